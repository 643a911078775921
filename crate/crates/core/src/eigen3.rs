//! Symmetric 3×3 eigensolver used by the cone monitors.
//!
//! Two entry points with different cost/need profiles:
//!
//! * [`eigenvalues`]: trigonometric closed form, values only. Cheap enough to
//!   call per lattice point inside diagnostic sweeps.
//! * [`eigensystem`]: cyclic Jacobi iteration returning values and an
//!   orthonormal eigenbasis. Unconditionally convergent for symmetric input,
//!   which matters because the boundary monitors feed it near-degenerate
//!   matrices by design.
//!
//! Both return eigenvalues in ascending order. Eigenvector signs are fixed
//! deterministically (first component of magnitude above 1e-9 is made
//! positive) so repeated runs and parallel schedules produce identical bytes.

use crate::decomp::{mat3_identity, mat3_mul, mat3_transpose};
use crate::math;
use crate::Mat3;

/// Orthonormal eigendecomposition of a symmetric matrix.
///
/// `values` ascend; row `k` of `vectors` is the unit eigenvector paired with
/// `values[k]`, so `M = Σ_k values[k] · vectors[k]ᵀ vectors[k]`.
#[derive(Clone, Copy, Debug)]
pub struct EigenDecomposition {
    pub values: [f64; 3],
    pub vectors: Mat3,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> [f64; 3] {
        self.vectors[k]
    }

    /// `Σ_k λ_k v_k v_kᵀ`; equals the input matrix up to round-off.
    pub fn reconstruct(&self) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for k in 0..3 {
            let v = self.vectors[k];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] += self.values[k] * v[i] * v[j];
                }
            }
        }
        out
    }

    /// Components of `x` in the eigenbasis: `x̂_k = v_k · x`.
    pub fn into_basis(&self, x: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            for i in 0..3 {
                out[k] += self.vectors[k][i] * x[i];
            }
        }
        out
    }
}

fn sort3(mut v: [f64; 3]) -> [f64; 3] {
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    if v[1] > v[2] {
        v.swap(1, 2);
    }
    if v[0] > v[1] {
        v.swap(0, 1);
    }
    v
}

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Eigenvalues of a symmetric matrix, ascending, via the trigonometric
/// closed form for the characteristic cubic.
pub fn eigenvalues(m: &Mat3) -> [f64; 3] {
    let p1 = m[0][1] * m[0][1] + m[0][2] * m[0][2] + m[1][2] * m[1][2];
    if p1 == 0.0 {
        return sort3([m[0][0], m[1][1], m[2][2]]);
    }
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p2 = (m[0][0] - q) * (m[0][0] - q)
        + (m[1][1] - q) * (m[1][1] - q)
        + (m[2][2] - q) * (m[2][2] - q)
        + 2.0 * p1;
    if p2 <= 0.0 {
        return [q, q, q];
    }
    let p = math::sqrt(p2 / 6.0);
    let mut b = *m;
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (b[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    // Round-off can push det(B)/2 marginally outside [-1, 1].
    let r = (det3(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = math::acos(r) / 3.0;
    let third = 2.0 * core::f64::consts::PI / 3.0;
    let hi = q + 2.0 * p * math::cos(phi);
    let lo = q + 2.0 * p * math::cos(phi + third);
    [lo, 3.0 * q - hi - lo, hi]
}

fn off_diag_max(a: &Mat3) -> f64 {
    a[0][1].abs().max(a[0][2].abs()).max(a[1][2].abs())
}

fn fix_sign(v: &mut [f64; 3]) {
    for x in v.iter() {
        if x.abs() > 1e-9 {
            if *x < 0.0 {
                for y in v.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

/// Full eigendecomposition of a symmetric matrix via cyclic Jacobi sweeps.
///
/// Input is symmetrized first, so slightly asymmetric matrices (accumulated
/// integration round-off) are handled without surprises.
pub fn eigensystem(m: &Mat3) -> EigenDecomposition {
    let mut a = *m;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let avg = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = avg;
            a[j][i] = avg;
        }
    }
    let mut v = mat3_identity();
    let mut scale = 0.0f64;
    for row in a.iter() {
        for x in row.iter() {
            scale = scale.max(x.abs());
        }
    }
    if scale == 0.0 {
        return EigenDecomposition {
            values: [0.0; 3],
            vectors: mat3_identity(),
        };
    }

    for _sweep in 0..32 {
        if off_diag_max(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..2 {
            for q in (p + 1)..3 {
                let apq = a[p][q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta.abs() > 1e10 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + math::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / math::sqrt(t * t + 1.0);
                let s = t * c;
                let mut j = mat3_identity();
                j[p][p] = c;
                j[q][q] = c;
                j[p][q] = s;
                j[q][p] = -s;
                a = mat3_mul(&mat3_transpose(&j), &mat3_mul(&a, &j));
                v = mat3_mul(&v, &j);
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).expect("finite eigenvalues"));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (k, &idx) in order.iter().enumerate() {
        values[k] = a[idx][idx];
        for i in 0..3 {
            vectors[k][i] = v[i][idx];
        }
        fix_sign(&mut vectors[k]);
    }
    EigenDecomposition { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::{mat3_max_abs_diff, random_rotation_with};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, scale: f64) -> Mat3 {
        let mut m = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let v = rng.gen_range(-scale..=scale);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    #[test]
    fn diagonal_matrix_values_sorted() {
        let m = [[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        assert_eq!(eigenvalues(&m), [1.0, 2.0, 3.0]);
        let e = eigensystem(&m);
        assert_eq!(e.values, [1.0, 2.0, 3.0]);
        assert_eq!(e.vectors[0], [0.0, 1.0, 0.0]);
        assert_eq!(e.vectors[1], [0.0, 0.0, 1.0]);
        assert_eq!(e.vectors[2], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn known_two_by_two_block() {
        // [[2,1],[1,2]] block has eigenvalues 1 and 3.
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let vals = eigenvalues(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        assert!((vals[2] - 5.0).abs() < 1e-14);

        let e = eigensystem(&m);
        let inv_sqrt2 = core::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[0][0] - inv_sqrt2).abs() < 1e-14);
        assert!((e.vectors[0][1] + inv_sqrt2).abs() < 1e-14);
    }

    #[test]
    fn repeated_eigenvalues_reconstruct() {
        let m = [[2.0, 1.0, 0.0], [1.0, 2.0, 0.0], [0.0, 0.0, 3.0]];
        let e = eigensystem(&m);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        assert!((e.values[2] - 3.0).abs() < 1e-14);
        assert!(mat3_max_abs_diff(&e.reconstruct(), &m) < 1e-13);
    }

    #[test]
    fn near_degenerate_stays_orthonormal() {
        let mut m = mat3_identity();
        m[0][1] = 1e-12;
        m[1][0] = 1e-12;
        let e = eigensystem(&m);
        for k in 0..3 {
            assert!((e.values[k] - 1.0).abs() < 1e-11);
        }
        for i in 0..3 {
            for j in 0..3 {
                let mut dot = 0.0;
                for k in 0..3 {
                    dot += e.vectors[i][k] * e.vectors[j][k];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn deterministic_including_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let m = random_symmetric(&mut rng, 5.0);
            let e1 = eigensystem(&m);
            let e2 = eigensystem(&m);
            assert_eq!(e1.values, e2.values);
            assert_eq!(e1.vectors, e2.vectors);
            for k in 0..3 {
                let first = e1.vectors[k]
                    .iter()
                    .copied()
                    .find(|x| x.abs() > 1e-9)
                    .expect("unit vector has a significant component");
                assert!(first > 0.0);
            }
        }
    }

    #[test]
    fn matches_rotated_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let d = [
                rng.gen_range(-4.0..=4.0),
                rng.gen_range(-4.0..=4.0),
                rng.gen_range(-4.0..=4.0),
            ];
            let q = random_rotation_with(&mut rng);
            // M = Q diag(d) Qᵀ has spectrum d by construction.
            let mut m = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    for k in 0..3 {
                        m[i][j] += q[i][k] * d[k] * q[j][k];
                    }
                }
            }
            let mut expect = d;
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let fast = eigenvalues(&m);
            let full = eigensystem(&m);
            for k in 0..3 {
                assert!((fast[k] - expect[k]).abs() < 1e-10);
                assert!((full.values[k] - expect[k]).abs() < 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn prop_eigensystem_reconstructs(
            a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
            d in -10.0f64..10.0, e in -10.0f64..10.0, f in -10.0f64..10.0,
        ) {
            let m = [[a, b, c], [b, d, e], [c, e, f]];
            let sys = eigensystem(&m);
            prop_assert!(sys.values[0] <= sys.values[1] && sys.values[1] <= sys.values[2]);
            prop_assert!(mat3_max_abs_diff(&sys.reconstruct(), &m) < 1e-9);
            let fast = eigenvalues(&m);
            for k in 0..3 {
                prop_assert!((fast[k] - sys.values[k]).abs() < 1e-9);
            }
        }
    }
}
