//! Monitors for the nonnegativity cone of the component system.
//!
//! The preserved region is phrased entirely in `(R, s, M)` components:
//!
//! ```text
//! two_sum        = m1 + m2            (two smallest eigenvalues of M)
//! det_indicator  = (1/2) R² - |s|²    (= 2·det of the Ricci matrix)
//! cone           = { two_sum ≥ 0 and det_indicator ≥ 0 }
//! ```
//!
//! `two_sum ≥ 0` forces `R ≥ 0` on its own: the ascending order gives
//! `2 m2 ≥ m1 + m2 ≥ 0`, hence `m3 ≥ m2 ≥ 0` and `R = 2(m1 + m2 + m3) ≥ 0`.
//!
//! The Ricci side is tracked through `(A, B)` coordinates of the Ricci form,
//! `Ric = A·I + Σ_α B_α η_α`, with eigenvalues `A ± |B|`; for curvature
//! components `A = R/2` and `B = s/√2`.

use crate::decomp::{eta, CurvatureParts};
use crate::eigen3::{eigensystem, eigenvalues};
use crate::math;
use crate::reactions::component_reaction;
use crate::tensors::HermitianForm2;
use crate::Mat3;

/// Hermitian matrix `A·I + Σ_α B_α η_α`.
pub fn ricci_matrix(a: f64, b: &[f64; 3]) -> HermitianForm2 {
    let mut out = HermitianForm2::identity().scale(a);
    for alpha in 0..3 {
        out = out.add(&eta(alpha).scale(b[alpha]));
    }
    out
}

/// `(A, B)` coordinates of the Ricci form carried by curvature components.
pub fn ricci_ab(parts: &CurvatureParts) -> (f64, [f64; 3]) {
    let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
    (
        0.5 * parts.r,
        [
            inv_sqrt2 * parts.s[0],
            inv_sqrt2 * parts.s[1],
            inv_sqrt2 * parts.s[2],
        ],
    )
}

/// Nonnegativity of the form `A·I + Σ B_α η_α`, decided in coordinates:
/// `A ≥ -tol` and `A² - |B|² ≥ -tol`.
pub fn is_ricci_nonneg(a: f64, b: &[f64; 3], tol: f64) -> bool {
    let b_sqr = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    a >= -tol && a * a - b_sqr >= -tol
}

/// `(1/2) R² - |s|²`. Equals twice the determinant of [`ricci_matrix`] at
/// `(A, B) = (R/2, s/√2)`; nonnegative together with `R ≥ 0` exactly when
/// the Ricci form is nonnegative.
pub fn det_indicator(parts: &CurvatureParts) -> f64 {
    0.5 * parts.r * parts.r - parts.s_norm_sqr()
}

/// Sum of the two smallest eigenvalues of `M`, with the full spectrum kept
/// as a witness.
#[derive(Clone, Copy, Debug)]
pub struct TwoSum {
    pub value: f64,
    /// Ascending eigenvalues of `M`.
    pub values: [f64; 3],
}

pub fn two_smallest_sum(m: &Mat3) -> TwoSum {
    let values = eigenvalues(m);
    TwoSum {
        value: values[0] + values[1],
        values,
    }
}

/// Membership in the preserved cone, up to slack `tol` on both monitors.
pub fn in_cone(parts: &CurvatureParts, tol: f64) -> bool {
    two_smallest_sum(&parts.m).value >= -tol && det_indicator(parts) >= -tol
}

/// Scalar monitors evaluated at one state.
#[derive(Clone, Copy, Debug)]
pub struct ConeReport {
    pub r: f64,
    pub s_norm: f64,
    pub det_indicator: f64,
    pub two_sum: f64,
}

impl ConeReport {
    pub fn from_parts(parts: &CurvatureParts) -> Self {
        ConeReport {
            r: parts.r,
            s_norm: math::sqrt(parts.s_norm_sqr()),
            det_indicator: det_indicator(parts),
            two_sum: two_smallest_sum(&parts.m).value,
        }
    }
}

/// Defect of the boundary evolution identity for [`det_indicator`]:
///
/// ```text
/// [ R·dR - 2 s·ds - (R - 2μ)((1/2)R² - |s|²) ] - 2 Σ_α ((1/2)R - m_α) ŝ_α²
/// ```
///
/// with `(dR, ds)` the component reaction rates, `m_α` the eigenvalues of `M`
/// and `ŝ` the eigenbasis components of `s`. Identically zero (up to
/// round-off) for every trace-compatible state, not just on the boundary.
pub fn boundary_identity_gap(parts: &CurvatureParts, mu: f64) -> f64 {
    let rate = component_reaction(parts, mu);
    let mut s_dot_ds = 0.0;
    for a in 0..3 {
        s_dot_ds += parts.s[a] * rate.s[a];
    }
    let lhs = parts.r * rate.r
        - 2.0 * s_dot_ds
        - (parts.r - 2.0 * mu) * (0.5 * parts.r * parts.r - parts.s_norm_sqr());

    let sys = eigensystem(&parts.m);
    let s_hat = sys.into_basis(&parts.s);
    let mut rhs = 0.0;
    for alpha in 0..3 {
        rhs += 2.0 * (0.5 * parts.r - sys.values[alpha]) * s_hat[alpha] * s_hat[alpha];
    }
    lhs - rhs
}

/// Reaction rate of `two_sum` in the eigenbasis of `M`:
///
/// ```text
/// -μ (m1 + m2) + m1² + m2² + 2 m3 (m1 + m2) + (1/2)(ŝ1² + ŝ2²)
/// ```
///
/// For distinct eigenvalues this equals `d(m1 + m2)/dt` exactly, by
/// first-order perturbation of the two smallest eigenvalues under the `M`
/// reaction. On the cone boundary `m1 + m2 = 0` it reduces to
/// `m1² + m2² + (1/2)(ŝ1² + ŝ2²) ≥ 0`, the inward-pointing condition.
pub fn eigen_sum_rhs(m: &Mat3, s: &[f64; 3], mu: f64) -> f64 {
    let sys = eigensystem(m);
    let [m1, m2, m3] = sys.values;
    let s_hat = sys.into_basis(s);
    -mu * (m1 + m2)
        + m1 * m1
        + m2 * m2
        + 2.0 * m3 * (m1 + m2)
        + 0.5 * (s_hat[0] * s_hat[0] + s_hat[1] * s_hat[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{decompose, mat3_conjugate, random_rotation_with};
    use crate::tensors::random_kahler_curvature;
    use crate::C64;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ricci_matrix_example() {
        let p = ricci_matrix(1.0, &[0.5, 0.25, -0.25]);
        assert!((p.0[0][0] - C64::new(1.5, 0.0)).norm() < 1e-15);
        assert!((p.0[0][1] - C64::new(0.25, 0.25)).norm() < 1e-15);
        assert!((p.0[1][0] - C64::new(0.25, -0.25)).norm() < 1e-15);
        assert!((p.0[1][1] - C64::new(0.5, 0.0)).norm() < 1e-15);

        // Spectrum is A ± |B|.
        let b_norm = math::sqrt(0.5 * 0.5 + 0.25 * 0.25 + 0.25 * 0.25);
        let eig = p.eigenvalues();
        assert!((eig[0] - (1.0 - b_norm)).abs() < 1e-14);
        assert!((eig[1] - (1.0 + b_norm)).abs() < 1e-14);
    }

    #[test]
    fn predicate_agrees_with_matrix_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let tol = 1e-10;
        for _ in 0..2000 {
            let a = rng.gen_range(-2.0..=2.0);
            let b = [
                rng.gen_range(-2.0..=2.0),
                rng.gen_range(-2.0..=2.0),
                rng.gen_range(-2.0..=2.0),
            ];
            let coord = is_ricci_nonneg(a, &b, tol);
            let matrix = ricci_matrix(a, &b).min_eigenvalue() >= -tol;
            assert_eq!(coord, matrix, "a {a} b {b:?}");
        }
    }

    #[test]
    fn det_indicator_is_twice_matrix_determinant() {
        for seed in 0..100u64 {
            let parts = decompose(&random_kahler_curvature(seed, 1.0)).unwrap();
            let (a, b) = ricci_ab(&parts);
            let p = ricci_matrix(a, &b);
            assert!(
                (det_indicator(&parts) - 2.0 * p.det_re()).abs() < 1e-12,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn ricci_matrix_from_parts_matches_ricci_trace() {
        for seed in 0..50u64 {
            let t = random_kahler_curvature(seed, 1.0);
            let parts = decompose(&t).unwrap();
            let (a, b) = ricci_ab(&parts);
            assert!(
                ricci_matrix(a, &b).max_abs_diff(&t.ricci_trace()) < 1e-12,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn two_sum_on_diagonal_matrix() {
        let m = [[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]];
        let ts = two_smallest_sum(&m);
        assert!((ts.value - 1.0).abs() < 1e-14);
        assert_eq!(ts.values, [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_sum_is_infimum_over_orthonormal_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let mut m = [[0.0f64; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    let v = rng.gen_range(-2.0..=2.0);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            let ts = two_smallest_sum(&m);
            // Random orthonormal pairs never dip below the eigenvalue answer.
            for _ in 0..20 {
                let q = random_rotation_with(&mut rng);
                let rotated = mat3_conjugate(&q, &m);
                let pair_sum = rotated[0][0] + rotated[1][1];
                assert!(pair_sum >= ts.value - 1e-10);
            }
            // The eigenvector pair attains it.
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
            assert!((attained - ts.value).abs() < 1e-10);
        }
    }

    #[test]
    fn cone_membership_examples() {
        let inside = CurvatureParts::constant_hsc();
        assert!(in_cone(&inside, 0.0));

        // Split product sits on the boundary: m1 + m2 = 0.
        let boundary = decompose(&crate::tensors::KahlerCurvature::split_product()).unwrap();
        assert!((two_smallest_sum(&boundary.m).value).abs() < 1e-14);
        assert!(in_cone(&boundary, 1e-12));

        let outside = CurvatureParts {
            r: -2.0,
            s: [0.0; 3],
            m: [[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert!(!in_cone(&outside, 1e-12));
    }

    #[test]
    fn boundary_identity_gap_vanishes() {
        for seed in 0..200u64 {
            let parts = decompose(&random_kahler_curvature(seed, 1.0)).unwrap();
            for &mu in &[0.0, 1.5, -0.7] {
                assert!(
                    boundary_identity_gap(&parts, mu).abs() < 1e-12,
                    "seed {seed} mu {mu}"
                );
            }
        }
    }

    #[test]
    fn eigen_sum_rhs_example() {
        let m = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((eigen_sum_rhs(&m, &[0.0; 3], 0.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_sum_rhs_matches_perturbation_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..100 {
            let mut m = [[0.0f64; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    let v = rng.gen_range(-2.0..=2.0);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            let s = [
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
                rng.gen_range(-1.0..=1.0),
            ];
            let mu = rng.gen_range(-1.0..=1.0);
            let sys = eigensystem(&m);
            if sys.values[1] - sys.values[0] < 1e-3 || sys.values[2] - sys.values[1] < 1e-3 {
                continue;
            }
            // For simple eigenvalues, d(m_k) = v_kᵀ (dM) v_k.
            let r = 2.0 * (m[0][0] + m[1][1] + m[2][2]);
            let rate = component_reaction(&CurvatureParts { r, s, m }, mu);
            let mut direct = 0.0;
            for k in 0..2 {
                let v = sys.vector(k);
                for i in 0..3 {
                    for j in 0..3 {
                        direct += v[i] * rate.m[i][j] * v[j];
                    }
                }
            }
            assert!((eigen_sum_rhs(&m, &s, mu) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_states_point_inward_without_shear() {
        // States assembled on the boundary m1 + m2 = 0 with s = 0 always
        // satisfy the inward condition with margin m1² + m2².
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..200 {
            let u: f64 = rng.gen_range(0.0..=1.5);
            let d = [-u, u, u + rng.gen_range(0.0..=2.0)];
            let q = random_rotation_with(&mut rng);
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        m[i][j] += q[i][k] * d[k] * q[j][k];
                    }
                }
            }
            let ts = two_smallest_sum(&m);
            assert!(ts.value.abs() < 1e-12);
            let rhs = eigen_sum_rhs(&m, &[0.0; 3], 1.0);
            assert!(rhs >= 2.0 * u * u - 1e-10, "u {u} rhs {rhs}");
        }
    }

    proptest! {
        #[test]
        fn prop_report_consistency(seed in 0u64..5000) {
            let parts = decompose(&random_kahler_curvature(seed, 1.0)).unwrap();
            let report = ConeReport::from_parts(&parts);
            prop_assert!((report.r - parts.r).abs() < 1e-15);
            prop_assert!((report.s_norm * report.s_norm - parts.s_norm_sqr()).abs() < 1e-12);
            prop_assert!((report.det_indicator - (0.5 * parts.r * parts.r - parts.s_norm_sqr())).abs() < 1e-12);
            let sum = eigenvalues(&parts.m);
            prop_assert!((report.two_sum - (sum[0] + sum[1])).abs() < 1e-12);
        }
    }
}
