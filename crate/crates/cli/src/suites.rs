//! Identity suites: randomized oracles for the algebraic layer.
//!
//! Each suite reports its worst violation over a sampled ensemble against a
//! per-suite tolerance (overridable through `tolerances.<suite>`). Suites
//! draw from independent, stream-separated RNGs so results are reproducible
//! run to run and independent of suite ordering.

use crate::config::RunConfig;
use crate::report::write_report;
use crate::{CmdError, EXIT_PROPERTY_FAILURE, EXIT_SUCCESS};
use krf_core::cone::{
    boundary_identity_gap, det_indicator, eigen_sum_rhs, is_ricci_nonneg, ricci_ab, ricci_matrix,
    two_smallest_sum,
};
use krf_core::decomp::{
    bracket_contraction, decompose, mat3_conjugate, mat3_max_abs_diff, random_rotation_with,
    reconstruct, sharp, tensor_basis_components, traceless_tensor, CurvatureParts,
};
use krf_core::eigen3::eigensystem;
use krf_core::reactions::{
    component_reaction, coordinate_reaction, frame_reaction, ricci_frame_reaction,
    rotation_correction,
};
use krf_core::tensors::{random_curvature_with, HermitianForm2, KahlerCurvature};
use krf_core::Mat3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Range of the flow normalization sampled by the suites.
const MU_RANGE: (f64, f64) = (-2.0, 2.0);

pub const SUITE_NAMES: &[&str] = &[
    "cancellation",
    "ricci_trace_compatibility",
    "scalar_rate_compatibility",
    "systems_equivalence",
    "ke_stationarity",
    "sharp_oracle",
    "decompose_roundtrip",
    "trace_identity",
    "s_norm_consistency",
    "sharp_equivariance",
    "ricci_positivity_agreement",
    "boundary_identity",
    "infimum_characterization",
    "eigen_rate_consistency",
    "det_indicator_consistency",
];

#[derive(Serialize, Clone, Debug)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub samples: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Serialize)]
struct IdentitiesBody {
    pass: bool,
    suites: Vec<SuiteResult>,
}

struct SuiteSpec {
    name: &'static str,
    default_tolerance: f64,
    run: fn(&RunConfig, &mut ChaCha8Rng) -> (usize, f64),
}

fn random_mu<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.gen_range(MU_RANGE.0..=MU_RANGE.1)
}

fn random_symmetric<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let mut m = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v = rng.gen_range(-2.0..=2.0);
            m[i][j] = v;
            m[j][i] = v;
        }
    }
    m
}

fn realizable_parts<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> CurvatureParts {
    let t = random_curvature_with(rng, scale);
    decompose(&t).expect("sampler output decomposes")
}

/// Frame reaction splits exactly into coordinate reaction plus rotation
/// correction.
fn suite_cancellation(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let mu = random_mu(rng);
        let lhs = frame_reaction(&t, mu);
        let rhs = coordinate_reaction(&t, mu).add(&rotation_correction(&t, mu));
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    (config.count, worst)
}

/// The Ricci-level reaction is the Ricci trace of the tensor reaction.
fn suite_ricci_trace(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let mu = random_mu(rng);
        let direct = ricci_frame_reaction(&t.ricci_trace(), &t, mu);
        let traced = frame_reaction(&t, mu).ricci_trace();
        worst = worst.max(direct.max_abs_diff(&traced));
    }
    (config.count, worst)
}

/// The scalar rate of the component system matches the scalar trace of the
/// tensor reaction.
fn suite_scalar_rate(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let mu = random_mu(rng);
        let parts = decompose(&t).expect("sampler output decomposes");
        let rate = component_reaction(&parts, mu);
        worst = worst.max((rate.r - frame_reaction(&t, mu).scalar_trace()).abs());
    }
    (config.count, worst)
}

/// Decomposing the tensor reaction equals reacting the decomposition.
fn suite_systems_equivalence(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let mu = random_mu(rng);
        let tensor_route = decompose(&frame_reaction(&t, mu)).expect("reaction stays valid");
        let component_route =
            component_reaction(&decompose(&t).expect("sampler output decomposes"), mu);
        worst = worst.max(tensor_route.max_abs_diff(&component_route));
    }
    (config.count, worst)
}

/// The constant-curvature state is stationary at its own normalization, in
/// both the tensor and the component pictures.
fn suite_ke_stationarity(_config: &RunConfig, _rng: &mut ChaCha8Rng) -> (usize, f64) {
    let tensor_rate = frame_reaction(&KahlerCurvature::constant_hsc(), 3.0).max_abs();
    let component_rate = component_reaction(&CurvatureParts::constant_hsc(), 3.0).max_abs();
    (2, tensor_rate.max(component_rate))
}

/// `sharp` agrees with the bracket-contraction tensor oracle, and the
/// trace-free expansion round-trips through basis components.
fn suite_sharp_oracle(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let parts = decompose(&t).expect("sampler output decomposes");
        let s_t = traceless_tensor(&t);
        worst = worst.max(mat3_max_abs_diff(
            &tensor_basis_components(&s_t),
            &parts.m,
        ));
        let oracle = tensor_basis_components(&bracket_contraction(&s_t));
        worst = worst.max(mat3_max_abs_diff(&sharp(&parts.m), &oracle));
    }
    (config.count, worst)
}

/// `reconstruct . decompose` is the identity on valid tensors.
fn suite_decompose_roundtrip(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let parts = decompose(&t).expect("sampler output decomposes");
        worst = worst.max(reconstruct(&parts).max_abs_diff(&t));
    }
    (config.count, worst)
}

/// Decompositions satisfy `tr(M) = R/2`.
fn suite_trace_identity(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let parts = realizable_parts(rng, config.scale);
        worst = worst.max((parts.trace_m() - 0.5 * parts.r).abs());
    }
    (config.count, worst)
}

/// `Σ s_α²` equals the squared Frobenius norm of the trace-free Ricci form.
fn suite_s_norm(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let t = random_curvature_with(rng, config.scale);
        let parts = decompose(&t).expect("sampler output decomposes");
        let half_r = HermitianForm2::identity().scale(0.5 * parts.r);
        let s_form = t.ricci_trace().sub(&half_r);
        let mut frob = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                frob += s_form.0[a][b].norm_sqr();
            }
        }
        worst = worst.max((parts.s_norm_sqr() - frob).abs());
    }
    (config.count, worst)
}

/// `sharp` commutes with conjugation by rotations.
fn suite_sharp_equivariance(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let m = random_symmetric(rng);
        let q = random_rotation_with(rng);
        let rotated_then_sharp = sharp(&mat3_conjugate(&q, &m));
        let sharp_then_rotated = mat3_conjugate(&q, &sharp(&m));
        worst = worst.max(mat3_max_abs_diff(&rotated_then_sharp, &sharp_then_rotated));
    }
    (config.count, worst)
}

/// The closed-form positivity predicate agrees with the eigenvalues of the
/// reassembled Ricci matrix. Violations are counted, not measured.
fn suite_ricci_positivity(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    const TOL: f64 = 1e-10;
    let mut disagreements = 0usize;
    for _ in 0..config.positivity_samples {
        let a = rng.gen_range(-2.0..=2.0);
        let b = [
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-2.0..=2.0),
            rng.gen_range(-2.0..=2.0),
        ];
        let predicate = is_ricci_nonneg(a, &b, TOL);
        let spectral = ricci_matrix(a, &b).min_eigenvalue() >= -TOL;
        if predicate != spectral {
            disagreements += 1;
        }
    }
    (config.positivity_samples, disagreements as f64)
}

/// The boundary evolution identity holds at every trace-compatible state.
fn suite_boundary_identity(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let parts = realizable_parts(rng, config.scale);
        let mu = random_mu(rng);
        worst = worst.max(boundary_identity_gap(&parts, mu).abs());
    }
    (config.count, worst)
}

/// `two_smallest_sum` is the infimum of the quadratic form over orthonormal
/// pairs and is attained by the bottom eigenvector pair.
fn suite_infimum(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let m = random_symmetric(rng);
        let ts = two_smallest_sum(&m);
        for _ in 0..8 {
            let q = random_rotation_with(rng);
            let rotated = mat3_conjugate(&q, &m);
            let pair_sum = rotated[0][0] + rotated[1][1];
            worst = worst.max(ts.value - pair_sum);
        }
        let sys = eigensystem(&m);
        let mut attained = 0.0;
        for k in 0..2 {
            let v = sys.vector(k);
            for i in 0..3 {
                for j in 0..3 {
                    attained += v[i] * m[i][j] * v[j];
                }
            }
        }
        worst = worst.max((attained - ts.value).abs());
    }
    (config.count, worst)
}

/// For simple spectra the eigen-sum rate equals the first-order perturbation
/// of the two smallest eigenvalues under the component reaction.
fn suite_eigen_rate(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    let mut used = 0usize;
    for _ in 0..config.count {
        let m = random_symmetric(rng);
        let s = [
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        ];
        let mu = random_mu(rng);
        let sys = eigensystem(&m);
        if sys.values[1] - sys.values[0] < 1e-3 || sys.values[2] - sys.values[1] < 1e-3 {
            continue;
        }
        used += 1;
        let r = 2.0 * (m[0][0] + m[1][1] + m[2][2]);
        let rate = component_reaction(&CurvatureParts { r, s, m }, mu);
        let mut perturbation = 0.0;
        for k in 0..2 {
            let v = sys.vector(k);
            for i in 0..3 {
                for j in 0..3 {
                    perturbation += v[i] * rate.m[i][j] * v[j];
                }
            }
        }
        worst = worst.max((eigen_sum_rhs(&m, &s, mu) - perturbation).abs());
    }
    (used, worst)
}

/// `det_indicator` is twice the determinant of the reassembled Ricci matrix.
fn suite_det_indicator(config: &RunConfig, rng: &mut ChaCha8Rng) -> (usize, f64) {
    let mut worst = 0.0f64;
    for _ in 0..config.count {
        let parts = realizable_parts(rng, config.scale);
        let (a, b) = ricci_ab(&parts);
        let p = ricci_matrix(a, &b);
        worst = worst.max((det_indicator(&parts) - 2.0 * p.det_re()).abs());
    }
    (config.count, worst)
}

const SUITES: &[SuiteSpec] = &[
    SuiteSpec {
        name: "cancellation",
        default_tolerance: 1e-12,
        run: suite_cancellation,
    },
    SuiteSpec {
        name: "ricci_trace_compatibility",
        default_tolerance: 1e-12,
        run: suite_ricci_trace,
    },
    SuiteSpec {
        name: "scalar_rate_compatibility",
        default_tolerance: 1e-11,
        run: suite_scalar_rate,
    },
    SuiteSpec {
        name: "systems_equivalence",
        default_tolerance: 1e-11,
        run: suite_systems_equivalence,
    },
    SuiteSpec {
        name: "ke_stationarity",
        default_tolerance: 1e-13,
        run: suite_ke_stationarity,
    },
    SuiteSpec {
        name: "sharp_oracle",
        default_tolerance: 1e-12,
        run: suite_sharp_oracle,
    },
    SuiteSpec {
        name: "decompose_roundtrip",
        default_tolerance: 1e-12,
        run: suite_decompose_roundtrip,
    },
    SuiteSpec {
        name: "trace_identity",
        default_tolerance: 1e-12,
        run: suite_trace_identity,
    },
    SuiteSpec {
        name: "s_norm_consistency",
        default_tolerance: 1e-12,
        run: suite_s_norm,
    },
    SuiteSpec {
        name: "sharp_equivariance",
        default_tolerance: 1e-12,
        run: suite_sharp_equivariance,
    },
    SuiteSpec {
        name: "ricci_positivity_agreement",
        default_tolerance: 0.0,
        run: suite_ricci_positivity,
    },
    SuiteSpec {
        name: "boundary_identity",
        default_tolerance: 1e-12,
        run: suite_boundary_identity,
    },
    SuiteSpec {
        name: "infimum_characterization",
        default_tolerance: 1e-10,
        run: suite_infimum,
    },
    SuiteSpec {
        name: "eigen_rate_consistency",
        default_tolerance: 1e-10,
        run: suite_eigen_rate,
    },
    SuiteSpec {
        name: "det_indicator_consistency",
        default_tolerance: 1e-12,
        run: suite_det_indicator,
    },
];

pub fn run(config: &RunConfig) -> Result<u8, CmdError> {
    let mut results = Vec::with_capacity(SUITES.len());
    for (index, spec) in SUITES.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index as u64);
        let (samples, max_violation) = (spec.run)(config, &mut rng);
        let tolerance = config
            .tolerances
            .get(spec.name)
            .copied()
            .unwrap_or(spec.default_tolerance);
        let pass = max_violation <= tolerance;
        println!(
            "suite {}: {} (max violation {:e}, tolerance {:e}, samples {})",
            spec.name,
            if pass { "pass" } else { "FAIL" },
            max_violation,
            tolerance,
            samples
        );
        results.push(SuiteResult {
            suite: spec.name,
            samples,
            max_violation,
            tolerance,
            pass,
        });
    }
    let pass = results.iter().all(|r| r.pass);
    write_report(
        &config.output_dir.join("identities_report.json"),
        config,
        IdentitiesBody {
            pass,
            suites: results,
        },
    )?;
    Ok(if pass {
        EXIT_SUCCESS
    } else {
        EXIT_PROPERTY_FAILURE
    })
}
