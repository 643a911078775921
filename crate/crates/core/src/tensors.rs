//! Pointwise curvature tensors of a Kähler surface in a unitary frame.
//!
//! Storage convention (fixed crate-wide): within every index pair the barred
//! index comes first. `h.0[a][b]` holds the `(ā, b)` component of a Hermitian
//! form and `t.0[a][b][c][d]` holds the `(ā, b, c̄, d)` component of a
//! curvature-type tensor. All indices run over `{0, 1}`.
//!
//! A [`KahlerCurvature`] value is contractually required to satisfy three
//! symmetry families (checked by [`KahlerCurvature::validate`]):
//!
//! ```text
//! pair exchange   T_āb c̄d = T_c̄d āb
//! Kähler exchange T_āb c̄d = T_ād c̄b = T_c̄b ād
//! reality         conj(T_āb c̄d) = T_b̄a d̄c
//! ```

use crate::math;
use crate::{C64, CTensor4};
use core::fmt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

// ── complex 2×2 helpers (shared with the frame and lattice code) ──

pub(crate) fn mat_mul(x: &[[C64; 2]; 2], y: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[czero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    out
}

pub(crate) fn mat_adjoint(x: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [
        [x[0][0].conj(), x[1][0].conj()],
        [x[0][1].conj(), x[1][1].conj()],
    ]
}

pub(crate) fn mat_identity() -> [[C64; 2]; 2] {
    [[c(1.0, 0.0), czero()], [czero(), c(1.0, 0.0)]]
}

/// Inverse of a 2×2 complex matrix; `None` when the determinant is zero.
pub(crate) fn mat_inverse(x: &[[C64; 2]; 2]) -> Option<[[C64; 2]; 2]> {
    let det = x[0][0] * x[1][1] - x[0][1] * x[1][0];
    if det.norm_sqr() == 0.0 {
        return None;
    }
    let inv = C64::new(1.0, 0.0) / det;
    Some([
        [x[1][1] * inv, -x[0][1] * inv],
        [-x[1][0] * inv, x[0][0] * inv],
    ])
}

/// Hermitian 2×2 form; entry `[a][b]` is the `(ā, b)` component, so a valid
/// value satisfies `h[a][b] = conj(h[b][a])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianForm2(pub [[C64; 2]; 2]);

impl HermitianForm2 {
    pub fn zero() -> Self {
        HermitianForm2([[czero(); 2]; 2])
    }

    pub fn identity() -> Self {
        HermitianForm2(mat_identity())
    }

    pub fn diag(a: f64, b: f64) -> Self {
        HermitianForm2([[c(a, 0.0), czero()], [czero(), c(b, 0.0)]])
    }

    /// Max modulus of `h[a][b] - conj(h[b][a])` over all entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                worst = worst.max((self.0[a][b] - self.0[b][a].conj()).norm_sqr());
            }
        }
        math::sqrt(worst)
    }

    pub fn trace_re(&self) -> f64 {
        self.0[0][0].re + self.0[1][1].re
    }

    pub fn det_re(&self) -> f64 {
        (self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]).re
    }

    /// Eigenvalues of the form, ascending. Exact closed form for 2×2.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let m = 0.5 * self.trace_re();
        let disc = (m * m - self.det_re()).max(0.0);
        let r = math::sqrt(disc);
        [m - r, m + r]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for b in 0..2 {
                out.0[a][b] += other.0[a][b];
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for b in 0..2 {
                out.0[a][b] -= other.0[a][b];
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for b in 0..2 {
                out.0[a][b] *= k;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                worst = worst.max((self.0[a][b] - other.0[a][b]).norm_sqr());
            }
        }
        math::sqrt(worst)
    }
}

/// Symmetry family of the [`KahlerCurvature`] contract.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryFamily {
    /// `T_āb c̄d = T_c̄d āb`
    PairExchange,
    /// `T_āb c̄d = T_ād c̄b` and `T_āb c̄d = T_c̄b ād`
    KahlerExchange,
    /// `conj(T_āb c̄d) = T_b̄a d̄c`
    Reality,
}

impl fmt::Display for SymmetryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SymmetryFamily::PairExchange => "pair exchange",
            SymmetryFamily::KahlerExchange => "Kähler exchange",
            SymmetryFamily::Reality => "reality",
        };
        f.write_str(name)
    }
}

/// Worst symmetry defect of a tensor, reported per family by
/// [`KahlerCurvature::symmetry_defects`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryDefects {
    pub pair: f64,
    pub kahler: f64,
    pub reality: f64,
}

impl SymmetryDefects {
    pub fn worst(&self) -> (SymmetryFamily, f64) {
        let mut family = SymmetryFamily::PairExchange;
        let mut defect = self.pair;
        if self.kahler > defect {
            family = SymmetryFamily::KahlerExchange;
            defect = self.kahler;
        }
        if self.reality > defect {
            family = SymmetryFamily::Reality;
            defect = self.reality;
        }
        (family, defect)
    }
}

/// A tensor failed symmetry validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryViolation {
    pub family: SymmetryFamily,
    pub defect: f64,
    pub tolerance: f64,
}

impl fmt::Display for SymmetryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "curvature tensor violates {} symmetry: defect {:e} exceeds tolerance {:e}",
            self.family, self.defect, self.tolerance
        )
    }
}

impl core::error::Error for SymmetryViolation {}

/// Rank-4 curvature tensor satisfying the symmetry contract in the module
/// docs. Entry `[a][b][c][d]` is the `(ā, b, c̄, d)` component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KahlerCurvature(pub CTensor4);

pub(crate) fn zero_tensor() -> CTensor4 {
    [[[[czero(); 2]; 2]; 2]; 2]
}

impl KahlerCurvature {
    pub fn zero() -> Self {
        KahlerCurvature(zero_tensor())
    }

    /// Model with constant holomorphic sectional curvature:
    /// `T_āb c̄d = δ_ab δ_cd + δ_ad δ_cb`. Ricci form `3·I`, scalar `6`.
    pub fn constant_hsc() -> Self {
        let mut t = zero_tensor();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let mut v = 0.0;
                        if a == b && cc == d {
                            v += 1.0;
                        }
                        if a == d && cc == b {
                            v += 1.0;
                        }
                        t[a][b][cc][d] = c(v, 0.0);
                    }
                }
            }
        }
        KahlerCurvature(t)
    }

    /// Product-of-curves model: the only nonzero components are
    /// `T_1̄11̄1 = T_2̄22̄2 = 2`. Ricci form `2·I`, scalar `4`.
    pub fn split_product() -> Self {
        let mut t = zero_tensor();
        t[0][0][0][0] = c(2.0, 0.0);
        t[1][1][1][1] = c(2.0, 0.0);
        KahlerCurvature(t)
    }

    /// Group-average projection of an arbitrary complex tensor onto the
    /// subspace satisfying the full symmetry contract. Idempotent: applying it
    /// to an already-valid tensor returns the tensor unchanged.
    pub fn symmetrized(raw: &CTensor4) -> Self {
        let mut t = zero_tensor();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        // Orbit of (a,b,c,d) under the two index swaps and the
                        // reality map; the last four images carry conjugation.
                        let sum = raw[a][b][cc][d]
                            + raw[a][d][cc][b]
                            + raw[cc][b][a][d]
                            + raw[cc][d][a][b]
                            + raw[b][a][d][cc].conj()
                            + raw[d][a][b][cc].conj()
                            + raw[b][cc][d][a].conj()
                            + raw[d][cc][b][a].conj();
                        t[a][b][cc][d] = sum.scale(1.0 / 8.0);
                    }
                }
            }
        }
        KahlerCurvature(t)
    }

    /// Per-family worst symmetry defects.
    pub fn symmetry_defects(&self) -> SymmetryDefects {
        let t = &self.0;
        let mut pair = 0.0f64;
        let mut kahler = 0.0f64;
        let mut reality = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let x = t[a][b][cc][d];
                        pair = pair.max((x - t[cc][d][a][b]).norm_sqr());
                        kahler = kahler.max((x - t[a][d][cc][b]).norm_sqr());
                        kahler = kahler.max((x - t[cc][b][a][d]).norm_sqr());
                        reality = reality.max((x.conj() - t[b][a][d][cc]).norm_sqr());
                    }
                }
            }
        }
        SymmetryDefects {
            pair: math::sqrt(pair),
            kahler: math::sqrt(kahler),
            reality: math::sqrt(reality),
        }
    }

    /// Check the symmetry contract, reporting the worst-violating family.
    pub fn validate(&self, tolerance: f64) -> Result<(), SymmetryViolation> {
        let defects = self.symmetry_defects();
        let (family, defect) = defects.worst();
        if defect > tolerance {
            Err(SymmetryViolation {
                family,
                defect,
                tolerance,
            })
        } else {
            Ok(())
        }
    }

    /// Ricci form by tracing the second pair: `Ric_āb = Σ_p T_āb p̄p`.
    pub fn ricci_trace(&self) -> HermitianForm2 {
        let mut ric = HermitianForm2::zero();
        for a in 0..2 {
            for b in 0..2 {
                ric.0[a][b] = self.0[a][b][0][0] + self.0[a][b][1][1];
            }
        }
        ric
    }

    /// Scalar curvature: trace of the Ricci form.
    pub fn scalar_trace(&self) -> f64 {
        self.ricci_trace().trace_re()
    }

    /// Transport into the unitary frame `e`:
    /// `T'_āb c̄d = Σ conj(e^j_a) e^k_b conj(e^l_c) e^m_d T_j̄k l̄m`.
    pub fn to_frame(&self, e: &Frame) -> KahlerCurvature {
        let mut out = zero_tensor();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        let mut sum = czero();
                        for j in 0..2 {
                            for k in 0..2 {
                                for l in 0..2 {
                                    for m in 0..2 {
                                        sum += e.0[j][a].conj()
                                            * e.0[k][b]
                                            * e.0[l][cc].conj()
                                            * e.0[m][d]
                                            * self.0[j][k][l][m];
                                    }
                                }
                            }
                        }
                        out[a][b][cc][d] = sum;
                    }
                }
            }
        }
        KahlerCurvature(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        out.0[a][b][cc][d] += other.0[a][b][cc][d];
                    }
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        out.0[a][b][cc][d] -= other.0[a][b][cc][d];
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        out.0[a][b][cc][d] *= k;
                    }
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    for d in 0..2 {
                        worst = worst.max(self.0[a][b][cc][d].norm_sqr());
                    }
                }
            }
        }
        math::sqrt(worst)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }
}

/// Draw a valid curvature tensor with entries of modulus at most `2·scale`.
///
/// Real and imaginary parts are sampled uniformly from `[-scale, scale]` in
/// lexicographic index order (real part first), then projected onto the valid
/// subspace with [`KahlerCurvature::symmetrized`]. Deterministic in `rng`.
pub fn random_curvature_with<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> KahlerCurvature {
    let mut raw = zero_tensor();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let re = rng.gen_range(-scale..=scale);
                    let im = rng.gen_range(-scale..=scale);
                    raw[a][b][cc][d] = c(re, im);
                }
            }
        }
    }
    KahlerCurvature::symmetrized(&raw)
}

/// Seeded convenience wrapper around [`random_curvature_with`].
pub fn random_kahler_curvature(seed: u64, scale: f64) -> KahlerCurvature {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_curvature_with(&mut rng, scale)
}

/// Frame matrix `e^j_a`: row `j` is the coordinate index, column `a` the frame
/// index. A frame is unitary for the metric `g` when `e† g e = I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame(pub [[C64; 2]; 2]);

impl Frame {
    pub fn identity() -> Self {
        Frame(mat_identity())
    }

    /// Gram matrix `e† g e`; equals the identity for a `g`-unitary frame.
    pub fn gram(&self, g: &HermitianForm2) -> HermitianForm2 {
        let ge = mat_mul(&g.0, &self.0);
        HermitianForm2(mat_mul(&mat_adjoint(&self.0), &ge))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..2 {
            for a in 0..2 {
                worst = worst.max((self.0[j][a] - other.0[j][a]).norm_sqr());
            }
        }
        math::sqrt(worst)
    }
}

/// Smallest metric eigenvalue accepted by [`frame_from_metric`]; at or below
/// this the metric counts as numerically degenerate.
pub const METRIC_EIGENVALUE_FLOOR: f64 = 1e-8;

/// The metric handed to [`frame_from_metric`] was not positive definite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonPositiveMetric {
    pub min_eigenvalue: f64,
}

impl fmt::Display for NonPositiveMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "metric is not positive definite: min eigenvalue {:e} (floor {:e})",
            self.min_eigenvalue, METRIC_EIGENVALUE_FLOOR
        )
    }
}

impl core::error::Error for NonPositiveMetric {}

/// Unitary frame for a positive Hermitian metric: `e = g^{-1/2}`, closed form.
///
/// Uses the 2×2 principal square root `g^{1/2} = (g + √det(g)·I) / t` with
/// `t = √(tr(g) + 2√det(g))`, then inverts. The result is the unique Hermitian
/// positive solution of `e† g e = I` with `e = e†`.
pub fn frame_from_metric(g: &HermitianForm2) -> Result<Frame, NonPositiveMetric> {
    let min_ev = g.min_eigenvalue();
    if min_ev <= METRIC_EIGENVALUE_FLOOR {
        return Err(NonPositiveMetric {
            min_eigenvalue: min_ev,
        });
    }
    let s = math::sqrt(g.det_re());
    let t = math::sqrt(g.trace_re() + 2.0 * s);
    let mut sqrt_g = g.0;
    sqrt_g[0][0] += c(s, 0.0);
    sqrt_g[1][1] += c(s, 0.0);
    for row in sqrt_g.iter_mut() {
        for v in row.iter_mut() {
            *v *= 1.0 / t;
        }
    }
    // Positive definite by the eigenvalue gate above, so invertible.
    let inv = mat_inverse(&sqrt_g).expect("positive definite square root is invertible");
    Ok(Frame(inv))
}
