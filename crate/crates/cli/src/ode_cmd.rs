//! Reaction-flow ensembles with cone monitors.
//!
//! Runs are integrated in parallel but written in run-id order, and every
//! run depends only on `(seed, run_id)`, so outputs are byte-identical
//! across thread counts. Monitor excursions are classified by step halving:
//! an excursion that collapses by at least 4x at `dt/2` is integrator
//! precision, not a cone violation.

use crate::config::RunConfig;
use crate::report::{write_report, write_text};
use crate::{CmdError, EXIT_PROPERTY_FAILURE, EXIT_SUCCESS};
use krf_core::cone::in_cone;
use krf_core::ode::{probe_run, sample_cone_state, FlowParams, RunSummary};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;

#[derive(Serialize)]
struct OdeBody {
    runs: usize,
    violations_two_sum: usize,
    violations_det: usize,
    /// Most negative monitor value over hypothesis-met runs; null if none.
    worst_min: Option<f64>,
    blowups: usize,
    touches: usize,
    touch_violations: usize,
    hypothesis_unmet: Vec<u64>,
    /// Runs whose excursion collapsed under step halving.
    integrator_precision: Vec<u64>,
    pass: bool,
}

fn flow_params(config: &RunConfig, dt: f64) -> FlowParams {
    FlowParams {
        mu: config.mu,
        dt,
        horizon: config.horizon,
        blow_up_threshold: config.blow_up_threshold,
        touch_threshold: config.touch_threshold,
    }
}

/// Trace-compatible and inside the cone: the hypotheses the preservation
/// property actually assumes.
fn hypothesis_met(summary: &RunSummary) -> bool {
    let parts = &summary.initial;
    let trace_gap = (parts.trace_m() - 0.5 * parts.r).abs();
    trace_gap <= 1e-9 * parts.r.abs().max(1.0) && in_cone(parts, 0.0)
}

fn write_csv(config: &RunConfig, summaries: &[RunSummary]) -> Result<(), CmdError> {
    let mut csv =
        String::from("run_id,t_min_two_sum,min_two_sum,t_min_det,min_det,blew_up,t_blowup\n");
    for s in summaries {
        let t_blowup = s.t_blowup.map(|t| t.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            s.run_id, s.t_min_two_sum, s.min_two_sum, s.t_min_det, s.min_det, s.blew_up, t_blowup
        )
        .expect("string writes are infallible");
    }
    write_text(&config.output_dir.join("ode_runs.csv"), &csv)
}

pub fn run(config: &RunConfig) -> Result<u8, CmdError> {
    let flow = flow_params(config, config.dt);
    let summaries: Vec<RunSummary> = match &config.initial {
        Some(init) => vec![probe_run(&init.to_parts(), 0, &flow)],
        None => {
            let mut all: Vec<RunSummary> = (0..config.count as u64)
                .into_par_iter()
                .map(|id| probe_run(&sample_cone_state(config.seed, id, config.scale), id, &flow))
                .collect();
            all.sort_by_key(|s| s.run_id);
            all
        }
    };
    write_csv(config, &summaries)?;

    let tol = config.excursion_tolerance;
    let mut violations_two_sum = 0usize;
    let mut violations_det = 0usize;
    let mut touch_violations = 0usize;
    let mut touches = 0usize;
    let mut blowups = 0usize;
    let mut worst_min: Option<f64> = None;
    let mut hypothesis_unmet = Vec::new();
    let mut integrator_precision = Vec::new();

    for s in &summaries {
        if s.blew_up {
            blowups += 1;
        }
        if !hypothesis_met(s) {
            hypothesis_unmet.push(s.run_id);
            continue;
        }
        touches += s.touches.len();
        touch_violations += s
            .touches
            .iter()
            .filter(|t| t.eigen_rhs < -config.eigen_rhs_tolerance)
            .count();
        let run_min = s.min_two_sum.min(s.min_det);
        worst_min = Some(worst_min.map_or(run_min, |w: f64| w.min(run_min)));

        let excursion_two = s.min_two_sum < -tol;
        let excursion_det = s.min_det < -tol;
        if !(excursion_two || excursion_det) {
            continue;
        }
        let refined = probe_run(&s.initial, s.run_id, &flow_params(config, 0.5 * config.dt));
        let collapsed = |coarse: f64, fine: f64| fine >= 0.25 * coarse;
        let two_genuine = excursion_two && !collapsed(s.min_two_sum, refined.min_two_sum);
        let det_genuine = excursion_det && !collapsed(s.min_det, refined.min_det);
        if two_genuine {
            violations_two_sum += 1;
        }
        if det_genuine {
            violations_det += 1;
        }
        if !two_genuine && !det_genuine {
            integrator_precision.push(s.run_id);
        }
    }

    let pass = violations_two_sum == 0 && violations_det == 0 && touch_violations == 0;
    println!(
        "ode: {} runs, {} blowups, {} touches, violations two_sum {} det {} touch {} ({})",
        summaries.len(),
        blowups,
        touches,
        violations_two_sum,
        violations_det,
        touch_violations,
        if pass { "pass" } else { "FAIL" }
    );
    write_report(
        &config.output_dir.join("ode_summary.json"),
        config,
        OdeBody {
            runs: summaries.len(),
            violations_two_sum,
            violations_det,
            worst_min,
            blowups,
            touches,
            touch_violations,
            hypothesis_unmet,
            integrator_precision,
            pass,
        },
    )?;
    Ok(if pass {
        EXIT_SUCCESS
    } else {
        EXIT_PROPERTY_FAILURE
    })
}
