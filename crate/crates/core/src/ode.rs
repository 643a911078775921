//! Time integration of the component reaction system and the cone-probing
//! ensemble built on top of it.
//!
//! The state is the 13-dimensional component vector `(R, s, M)` advanced with
//! classic fourth-order Runge-Kutta. `M` is re-symmetrized after every step;
//! the trace constraint `tr(M) = R/2` is transported by the reaction itself
//! and needs no projection.
//!
//! Determinism contract: every random draw flows from `ChaCha8Rng` keyed by
//! `(seed, stream)`, one stream per run, so results are independent of
//! scheduling and identical across repeats and thread counts.

use crate::cone::{det_indicator, eigen_sum_rhs, two_smallest_sum, ConeReport};
use crate::decomp::{decompose, CurvatureParts};
use crate::reactions::component_reaction;
use crate::tensors::random_curvature_with;
use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Integration controls shared by single runs and ensembles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowParams {
    pub mu: f64,
    pub dt: f64,
    pub horizon: f64,
    /// `max_abs` beyond which the state counts as blown up.
    pub blow_up_threshold: f64,
    /// `two_sum` level that triggers boundary-touch refinement.
    pub touch_threshold: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            mu: 0.0,
            dt: 1e-3,
            horizon: 1.0,
            blow_up_threshold: 1e6,
            touch_threshold: 1e-6,
        }
    }
}

/// Ensemble controls: `runs` independent trajectories from rejection-sampled
/// in-cone initial states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleParams {
    pub flow: FlowParams,
    pub seed: u64,
    pub runs: u64,
    /// Scale handed to the raw tensor sampler before projection.
    pub scale: f64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams {
            flow: FlowParams::default(),
            seed: 0,
            runs: 100,
            scale: 1.0,
        }
    }
}

/// One classic RK4 step of the component reaction at step size `dt`.
pub fn rk4_step(state: &CurvatureParts, mu: f64, dt: f64) -> CurvatureParts {
    let k1 = component_reaction(state, mu);
    let k2 = component_reaction(&state.add(&k1.scale(0.5 * dt)), mu);
    let k3 = component_reaction(&state.add(&k2.scale(0.5 * dt)), mu);
    let k4 = component_reaction(&state.add(&k3.scale(dt)), mu);
    let mut next = state.add(
        &k1.add(&k2.scale(2.0))
            .add(&k3.scale(2.0))
            .add(&k4)
            .scale(dt / 6.0),
    );
    next.symmetrize_m();
    next
}

fn is_finite(state: &CurvatureParts) -> bool {
    if !state.r.is_finite() {
        return false;
    }
    for a in 0..3 {
        if !state.s[a].is_finite() {
            return false;
        }
        for b in 0..3 {
            if !state.m[a][b].is_finite() {
                return false;
            }
        }
    }
    true
}

fn blown_up(state: &CurvatureParts, threshold: f64) -> bool {
    !is_finite(state) || state.max_abs() > threshold
}

/// A stored sample along a trajectory.
#[derive(Clone, Copy, Debug)]
pub struct Step {
    pub t: f64,
    pub state: CurvatureParts,
}

/// Full trajectory with every step retained. Suitable for single runs;
/// ensembles use the streaming [`probe_run`] instead.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Time at which the blow-up guard fired, if it did.
    pub blew_up: Option<f64>,
}

impl Trajectory {
    pub fn last_state(&self) -> &CurvatureParts {
        &self.steps.last().expect("trajectory holds the initial step").state
    }
}

/// Integrate from `initial`, storing every step including the initial one.
/// Stops early (state excluded) when the blow-up guard fires.
pub fn integrate(initial: &CurvatureParts, params: &FlowParams) -> Trajectory {
    let n_steps = libm::round(params.horizon / params.dt) as usize;
    let mut steps = Vec::with_capacity(n_steps + 1);
    steps.push(Step {
        t: 0.0,
        state: *initial,
    });
    let mut state = *initial;
    let mut blew_up = None;
    for i in 1..=n_steps {
        state = rk4_step(&state, params.mu, params.dt);
        let t = i as f64 * params.dt;
        if blown_up(&state, params.blow_up_threshold) {
            blew_up = Some(t);
            break;
        }
        steps.push(Step { t, state });
    }
    Trajectory { steps, blew_up }
}

/// Boundary-touch record: the refined near-boundary state and the
/// inward-pointing rate evaluated there.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryTouch {
    pub t: f64,
    pub two_sum: f64,
    pub eigen_rhs: f64,
}

/// Outcome of one monitored run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub run_id: u64,
    pub initial: CurvatureParts,
    pub min_two_sum: f64,
    pub t_min_two_sum: f64,
    pub min_det: f64,
    pub t_min_det: f64,
    pub blew_up: bool,
    pub t_blowup: Option<f64>,
    pub touches: Vec<BoundaryTouch>,
}

impl RunSummary {
    pub fn initial_report(&self) -> ConeReport {
        ConeReport::from_parts(&self.initial)
    }
}

fn lerp_state(a: &CurvatureParts, b: &CurvatureParts, w: f64) -> CurvatureParts {
    a.scale(1.0 - w).add(&b.scale(w))
}

/// Refine a threshold crossing between consecutive steps: scan the linear
/// interpolant at `dt/10` resolution and keep the `two_sum` minimizer.
fn refine_touch(
    prev: &CurvatureParts,
    cur: &CurvatureParts,
    t_prev: f64,
    dt: f64,
    mu: f64,
) -> BoundaryTouch {
    let mut best_state = *prev;
    let mut best_t = t_prev;
    let mut best = two_smallest_sum(&prev.m).value;
    for k in 1..=10 {
        let w = k as f64 / 10.0;
        let state = lerp_state(prev, cur, w);
        let ts = two_smallest_sum(&state.m).value;
        if ts < best {
            best = ts;
            best_state = state;
            best_t = t_prev + w * dt;
        }
    }
    BoundaryTouch {
        t: best_t,
        two_sum: best,
        eigen_rhs: eigen_sum_rhs(&best_state.m, &best_state.s, mu),
    }
}

/// Integrate from `initial` while streaming the cone monitors; no trajectory
/// storage. Records a [`BoundaryTouch`] whenever `two_sum` crosses down
/// through the touch threshold (and once at `t = 0` if it starts below).
pub fn probe_run(initial: &CurvatureParts, run_id: u64, params: &FlowParams) -> RunSummary {
    let n_steps = libm::round(params.horizon / params.dt) as usize;
    let mut state = *initial;
    let mut prev = *initial;
    let mut prev_two_sum = two_smallest_sum(&state.m).value;
    let mut summary = RunSummary {
        run_id,
        initial: *initial,
        min_two_sum: prev_two_sum,
        t_min_two_sum: 0.0,
        min_det: det_indicator(&state),
        t_min_det: 0.0,
        blew_up: false,
        t_blowup: None,
        touches: Vec::new(),
    };
    if prev_two_sum < params.touch_threshold {
        summary.touches.push(BoundaryTouch {
            t: 0.0,
            two_sum: prev_two_sum,
            eigen_rhs: eigen_sum_rhs(&state.m, &state.s, params.mu),
        });
    }

    for i in 1..=n_steps {
        state = rk4_step(&state, params.mu, params.dt);
        let t = i as f64 * params.dt;
        if blown_up(&state, params.blow_up_threshold) {
            summary.blew_up = true;
            summary.t_blowup = Some(t);
            break;
        }
        let ts = two_smallest_sum(&state.m).value;
        let det = det_indicator(&state);
        if ts < summary.min_two_sum {
            summary.min_two_sum = ts;
            summary.t_min_two_sum = t;
        }
        if det < summary.min_det {
            summary.min_det = det;
            summary.t_min_det = t;
        }
        if prev_two_sum >= params.touch_threshold && ts < params.touch_threshold {
            summary
                .touches
                .push(refine_touch(&prev, &state, t - params.dt, params.dt, params.mu));
        }
        prev = state;
        prev_two_sum = ts;
    }
    summary
}

const SAMPLE_ATTEMPT_BOUND: usize = 100_000;

/// Rejection-sample curvature components inside the cone. Draws symmetrized
/// random tensors at the given scale, decomposes, and accepts the first state
/// with `two_sum ≥ 0` and `det_indicator ≥ 0`.
///
/// Deterministic in `(seed, stream)`; one stream per ensemble run keeps runs
/// independent and schedule-agnostic.
///
/// Panics if no state is accepted within 100 000 attempts, which for sane
/// scales means the sampler itself is broken.
pub fn sample_cone_state(seed: u64, stream: u64, scale: f64) -> CurvatureParts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for _ in 0..SAMPLE_ATTEMPT_BOUND {
        let t = random_curvature_with(&mut rng, scale);
        let parts = match decompose(&t) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if two_smallest_sum(&parts.m).value >= 0.0 && det_indicator(&parts) >= 0.0 {
            return parts;
        }
    }
    panic!("cone sampler exhausted {SAMPLE_ATTEMPT_BOUND} attempts at scale {scale}");
}

/// Run the full ensemble sequentially. Callers that parallelize should call
/// [`sample_cone_state`] and [`probe_run`] per run id and sort by id; the
/// per-run streams make the result identical either way.
pub fn ensemble_cone_probe(params: &EnsembleParams) -> Vec<RunSummary> {
    let mut out = Vec::with_capacity(params.runs as usize);
    for run_id in 0..params.runs {
        let initial = sample_cone_state(params.seed, run_id, params.scale);
        out.push(probe_run(&initial, run_id, &params.flow));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::in_cone;

    #[test]
    fn constant_hsc_is_a_fixed_point_of_the_integrator() {
        let initial = CurvatureParts::constant_hsc();
        let params = FlowParams {
            mu: 3.0,
            ..FlowParams::default()
        };
        let traj = integrate(&initial, &params);
        assert!(traj.blew_up.is_none());
        assert_eq!(traj.steps.len(), 1001);
        assert!(traj.last_state().max_abs_diff(&initial) < 1e-12);
    }

    #[test]
    fn isotropic_family_matches_closed_form() {
        // M = λI, s = 0, R = 6λ stays isotropic with dλ = 3λ² - μλ.
        // At μ = 0 the solution is λ(t) = λ0 / (1 - 3 λ0 t).
        let initial = CurvatureParts {
            r: 6.0,
            s: [0.0; 3],
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        let params = FlowParams {
            mu: 0.0,
            dt: 1e-3,
            horizon: 0.1,
            ..FlowParams::default()
        };
        let traj = integrate(&initial, &params);
        let lambda = 1.0 / (1.0 - 3.0 * 0.1);
        let last = traj.last_state();
        assert!((last.m[0][0] - lambda).abs() < 1e-10);
        assert!((last.r - 6.0 * lambda).abs() < 1e-9);
        assert!(last.s_norm_sqr() < 1e-20);
    }

    #[test]
    fn step_halving_shrinks_error_at_fourth_order() {
        let initial = CurvatureParts {
            r: 2.0,
            s: [0.3, 0.2, -0.1],
            m: [[0.5, 0.0, 0.0], [0.0, 0.3, 0.0], [0.0, 0.0, 0.2]],
        };
        // Each step size must divide the horizon exactly so all three runs
        // land on the same final time.
        let run = |dt: f64| {
            let params = FlowParams {
                mu: 0.0,
                dt,
                horizon: 0.25,
                ..FlowParams::default()
            };
            *integrate(&initial, &params).last_state()
        };
        let coarse = run(0.025);
        let mid = run(0.0125);
        let fine = run(0.00625);
        let e1 = coarse.max_abs_diff(&mid);
        let e2 = mid.max_abs_diff(&fine);
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn sampler_returns_in_cone_states_deterministically() {
        for stream in 0..50u64 {
            let parts = sample_cone_state(3, stream, 1.0);
            assert!(in_cone(&parts, 0.0), "stream {stream}");
            assert!((parts.trace_m() - 0.5 * parts.r).abs() < 1e-12);
            let again = sample_cone_state(3, stream, 1.0);
            assert_eq!(parts, again);
        }
    }

    #[test]
    fn blow_up_is_reported_not_fatal() {
        // R' = R²/2 from this state at μ = 0 blows up near t = 2/R = 0.1.
        let initial = CurvatureParts {
            r: 20.0,
            s: [0.0; 3],
            m: [
                [10.0 / 3.0, 0.0, 0.0],
                [0.0, 10.0 / 3.0, 0.0],
                [0.0, 0.0, 10.0 / 3.0],
            ],
        };
        let summary = probe_run(&initial, 0, &FlowParams::default());
        assert!(summary.blew_up);
        let t_blow = summary.t_blowup.expect("blow-up time recorded");
        assert!(t_blow < 0.2, "t_blow {t_blow}");
        assert!(summary.min_two_sum > -1e-9);
    }

    #[test]
    fn initial_state_below_threshold_counts_as_touch() {
        let u = 0.8;
        let eps = 5e-7;
        let initial = CurvatureParts {
            r: 2.0 * (eps + u + 1.0),
            s: [0.0; 3],
            m: [[-u, 0.0, 0.0], [0.0, u + eps, 0.0], [0.0, 0.0, 1.0]],
        };
        let params = FlowParams {
            horizon: 0.01,
            ..FlowParams::default()
        };
        let summary = probe_run(&initial, 7, &params);
        assert!(!summary.touches.is_empty());
        let touch = &summary.touches[0];
        assert!(touch.t == 0.0);
        assert!((touch.two_sum - eps).abs() < 1e-9);
        // Inward rate 2u² with s = 0 at the boundary.
        assert!((touch.eigen_rhs - 2.0 * u * u).abs() < 1e-5);
    }

    #[test]
    fn probe_and_integrate_agree_on_final_state() {
        let initial = sample_cone_state(11, 4, 1.0);
        let params = FlowParams {
            horizon: 0.05,
            ..FlowParams::default()
        };
        let traj = integrate(&initial, &params);
        let summary = probe_run(&initial, 4, &params);
        assert_eq!(summary.blew_up, traj.blew_up.is_some());
        if let Some(last) = traj.steps.last() {
            let ts = crate::cone::two_smallest_sum(&last.state.m).value;
            assert!(summary.min_two_sum <= ts + 1e-15);
        }
    }

    #[test]
    fn small_ensemble_preserves_the_cone() {
        let params = EnsembleParams {
            flow: FlowParams {
                horizon: 0.5,
                ..FlowParams::default()
            },
            seed: 1,
            runs: 50,
            scale: 1.0,
        };
        let summaries = ensemble_cone_probe(&params);
        assert_eq!(summaries.len(), 50);
        for s in &summaries {
            assert!(s.min_two_sum >= -1e-7, "run {} dipped {}", s.run_id, s.min_two_sum);
            assert!(s.min_det >= -1e-7, "run {} det {}", s.run_id, s.min_det);
            for touch in &s.touches {
                assert!(touch.eigen_rhs >= -1e-9, "run {}", s.run_id);
            }
        }
        // Summaries are keyed and ordered by run id.
        for (k, s) in summaries.iter().enumerate() {
            assert_eq!(s.run_id, k as u64);
        }
    }
}
