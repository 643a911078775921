//! Trace/traceless decomposition of curvature tensors over the Pauli basis of
//! trace-free Hermitian forms.
//!
//! Basis (fixed by convention, see `docs/CONVENTIONS.md`):
//!
//! ```text
//! η1 = [[1, 0], [0, -1]]   η2 = [[0, 1], [1, 0]]   η3 = [[0, -i], [i, 0]]
//! ```
//!
//! with the orthonormal version `φ^α = η_α / √2` under the inner product
//! `⟨x, y⟩ = Σ_ab x_āb conj(y_āb)`.
//!
//! A valid tensor `T` splits into components `(R, s, M)`:
//!
//! ```text
//! R             scalar curvature
//! S_āb          = Ric_āb - (R/2) δ_ab,          s_α = ⟨S, φ^α⟩
//! S_āb c̄d       = T - (1/2)(Ric_āb δ_cd + Ric_c̄d δ_ab) + (1/4) R δ_ab δ_cd
//! M_αβ          = Σ S_āb c̄d conj(φ^α)_āb conj(φ^β)_c̄d
//! ```
//!
//! `M` is real symmetric and equals the matrix of the operator
//! `ψ ↦ Σ_cd S_āb c̄d ψ_d̄c` in the basis `φ^α`; its trace satisfies
//! `tr(M) = R/2`. The expansion `S_āb c̄d = Σ M_αβ φ^α_āb φ^β_c̄d` inverts the
//! contraction, which is what [`reconstruct`] relies on.

use crate::math;
use crate::tensors::{czero, zero_tensor, HermitianForm2, KahlerCurvature, SymmetryViolation};
use crate::{C64, CTensor4, Mat3};
use rand::Rng;

const SQRT_2: f64 = core::f64::consts::SQRT_2;

/// Symmetry tolerance applied by [`decompose`] before any contraction.
pub const DECOMPOSE_TOLERANCE: f64 = 1e-10;

#[inline]
fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Trace-free Hermitian basis element `η_α`, `alpha ∈ {0, 1, 2}`.
pub fn eta(alpha: usize) -> HermitianForm2 {
    let z = czero();
    match alpha {
        0 => HermitianForm2([[c(1.0, 0.0), z], [z, c(-1.0, 0.0)]]),
        1 => HermitianForm2([[z, c(1.0, 0.0)], [c(1.0, 0.0), z]]),
        2 => HermitianForm2([[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
        _ => panic!("basis index out of range: {alpha}"),
    }
}

/// Orthonormal trace-free basis element `φ^α = η_α / √2`.
pub fn phi(alpha: usize) -> HermitianForm2 {
    eta(alpha).scale(1.0 / SQRT_2)
}

// ── small real 3×3 helpers shared by the cone and ODE modules ──

pub(crate) fn mat3_identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub(crate) fn mat3_mul(x: &Mat3, y: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                out[i][j] += x[i][k] * y[k][j];
            }
        }
    }
    out
}

pub(crate) fn mat3_scale(x: &Mat3, k: f64) -> Mat3 {
    let mut out = *x;
    for row in out.iter_mut() {
        for v in row.iter_mut() {
            *v *= k;
        }
    }
    out
}

pub(crate) fn mat3_transpose(x: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = x[j][i];
        }
    }
    out
}

/// Worst entrywise difference of two real 3×3 matrices.
pub fn mat3_max_abs_diff(x: &Mat3, y: &Mat3) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((x[i][j] - y[i][j]).abs());
        }
    }
    worst
}

/// `q · m · qᵀ`.
pub fn mat3_conjugate(q: &Mat3, m: &Mat3) -> Mat3 {
    mat3_mul(&mat3_mul(q, m), &mat3_transpose(q))
}

/// Uniformly distributed rotation matrix (Shoemake's quaternion method).
pub fn random_rotation_with<R: Rng + ?Sized>(rng: &mut R) -> Mat3 {
    let u1: f64 = rng.gen_range(0.0..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let u3: f64 = rng.gen_range(0.0..1.0);
    let two_pi = 2.0 * core::f64::consts::PI;
    let (a, b) = (math::sqrt(1.0 - u1), math::sqrt(u1));
    let (w, x, y, z) = (
        a * math::sin(two_pi * u2),
        a * math::cos(two_pi * u2),
        b * math::sin(two_pi * u3),
        b * math::cos(two_pi * u3),
    );
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// Components `(R, s, M)` of a curvature tensor. Invariant for values produced
/// by [`decompose`]: `M` symmetric and `tr(M) = R/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureParts {
    pub r: f64,
    pub s: [f64; 3],
    pub m: Mat3,
}

impl CurvatureParts {
    pub fn zero() -> Self {
        CurvatureParts {
            r: 0.0,
            s: [0.0; 3],
            m: [[0.0; 3]; 3],
        }
    }

    /// Components of the constant holomorphic sectional curvature model:
    /// `(6, 0, I)`, the stationary state of the normalized reactions at μ = 3.
    pub fn constant_hsc() -> Self {
        CurvatureParts {
            r: 6.0,
            s: [0.0; 3],
            m: mat3_identity(),
        }
    }

    pub fn trace_m(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn s_norm_sqr(&self) -> f64 {
        self.s[0] * self.s[0] + self.s[1] * self.s[1] + self.s[2] * self.s[2]
    }

    /// Block operator matrix on (1,1)-forms in the basis `(ω/√2, φ^1, φ^2, φ^3)`:
    /// `[[R/2, sᵀ], [s, M]]`.
    pub fn op_matrix(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        out[0][0] = 0.5 * self.r;
        for a in 0..3 {
            out[0][a + 1] = self.s[a];
            out[a + 1][0] = self.s[a];
            for b in 0..3 {
                out[a + 1][b + 1] = self.m[a][b];
            }
        }
        out
    }

    /// Worst `|M_αβ - M_βα|`.
    pub fn m_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..3 {
            for b in 0..3 {
                worst = worst.max((self.m[a][b] - self.m[b][a]).abs());
            }
        }
        worst
    }

    /// Replace `M` by its symmetric part.
    pub fn symmetrize_m(&mut self) {
        for a in 0..3 {
            for b in (a + 1)..3 {
                let avg = 0.5 * (self.m[a][b] + self.m[b][a]);
                self.m[a][b] = avg;
                self.m[b][a] = avg;
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        out.r += other.r;
        for a in 0..3 {
            out.s[a] += other.s[a];
            for b in 0..3 {
                out.m[a][b] += other.m[a][b];
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = *self;
        out.r *= k;
        for a in 0..3 {
            out.s[a] *= k;
            for b in 0..3 {
                out.m[a][b] *= k;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = (self.r - other.r).abs();
        for a in 0..3 {
            worst = worst.max((self.s[a] - other.s[a]).abs());
            for b in 0..3 {
                worst = worst.max((self.m[a][b] - other.m[a][b]).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_diff(&CurvatureParts::zero())
    }
}

/// `(A, B)` coordinates of a Hermitian form: `h = A·I + Σ_α B_α η_α`.
pub fn ab_components(h: &HermitianForm2) -> (f64, [f64; 3]) {
    let a = 0.5 * h.trace_re();
    let b1 = 0.5 * (h.0[0][0].re - h.0[1][1].re);
    let b2 = h.0[0][1].re;
    let b3 = -h.0[0][1].im;
    (a, [b1, b2, b3])
}

/// Components of a Hermitian form in the orthonormal trace-free basis:
/// `s_α = ⟨h, φ^α⟩` (the trace part is ignored).
pub fn form_components(h: &HermitianForm2) -> [f64; 3] {
    let (_, b) = ab_components(h);
    [SQRT_2 * b[0], SQRT_2 * b[1], SQRT_2 * b[2]]
}

/// Inverse of [`form_components`] on the trace-free subspace: `Σ_α s_α φ^α`.
pub fn form_from_components(s: &[f64; 3]) -> HermitianForm2 {
    let mut out = HermitianForm2::zero();
    for alpha in 0..3 {
        out = out.add(&phi(alpha).scale(s[alpha]));
    }
    out
}

/// Trace-free part `S_āb c̄d` of a valid curvature tensor (no validation).
pub fn traceless_tensor(t: &KahlerCurvature) -> CTensor4 {
    let ric = t.ricci_trace();
    let r = ric.trace_re();
    let mut s = zero_tensor();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let mut v = t.0[a][b][cc][d];
                    if cc == d {
                        v -= ric.0[a][b].scale(0.5);
                    }
                    if a == b {
                        v -= ric.0[cc][d].scale(0.5);
                    }
                    if a == b && cc == d {
                        v += c(0.25 * r, 0.0);
                    }
                    s[a][b][cc][d] = v;
                }
            }
        }
    }
    s
}

/// Expand basis components into the trace-free tensor
/// `Σ_αβ M_αβ φ^α_āb φ^β_c̄d`.
pub fn s_tensor_from_components(m: &Mat3) -> CTensor4 {
    let mut out = zero_tensor();
    for alpha in 0..3 {
        for beta in 0..3 {
            let pa = phi(alpha);
            let pb = phi(beta);
            for a in 0..2 {
                for b in 0..2 {
                    for cc in 0..2 {
                        for d in 0..2 {
                            out[a][b][cc][d] += pa.0[a][b] * pb.0[cc][d] * m[alpha][beta];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Project a doubly trace-free tensor onto basis components:
/// `M_αβ = Σ S_āb c̄d conj(φ^α)_āb conj(φ^β)_c̄d`. Inverse of
/// [`s_tensor_from_components`]; real for tensors satisfying the reality
/// symmetry (the imaginary part is discarded).
pub fn tensor_basis_components(s: &CTensor4) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for alpha in 0..3 {
        for beta in 0..3 {
            let pa = phi(alpha);
            let pb = phi(beta);
            let mut sum = czero();
            for a in 0..2 {
                for b in 0..2 {
                    for cc in 0..2 {
                        for d in 0..2 {
                            sum += s[a][b][cc][d] * pa.0[a][b].conj() * pb.0[cc][d].conj();
                        }
                    }
                }
            }
            m[alpha][beta] = sum.re;
        }
    }
    m
}

/// Split a valid curvature tensor into `(R, s, M)` components.
///
/// Fails with the worst-offending symmetry family when the tensor violates
/// the [`KahlerCurvature`] contract beyond [`DECOMPOSE_TOLERANCE`].
pub fn decompose(t: &KahlerCurvature) -> Result<CurvatureParts, SymmetryViolation> {
    t.validate(DECOMPOSE_TOLERANCE)?;
    let ric = t.ricci_trace();
    let r = ric.trace_re();
    let s_form = ric.sub(&HermitianForm2::identity().scale(0.5 * r));
    let s = form_components(&s_form);
    let m = tensor_basis_components(&traceless_tensor(t));
    Ok(CurvatureParts { r, s, m })
}

/// Rebuild the curvature tensor with the given components. Exact inverse of
/// [`decompose`] when `M` is symmetric with `tr(M) = R/2`.
pub fn reconstruct(parts: &CurvatureParts) -> KahlerCurvature {
    let s_t = s_tensor_from_components(&parts.m);
    let ric = form_from_components(&parts.s).add(&HermitianForm2::identity().scale(0.5 * parts.r));
    let mut t = s_t;
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    if cc == d {
                        t[a][b][cc][d] += ric.0[a][b].scale(0.5);
                    }
                    if a == b {
                        t[a][b][cc][d] += ric.0[cc][d].scale(0.5);
                    }
                    if a == b && cc == d {
                        t[a][b][cc][d] -= c(0.25 * parts.r, 0.0);
                    }
                }
            }
        }
    }
    KahlerCurvature(t)
}

/// Commutator `x·y - y·x` of two Hermitian forms. The result is
/// anti-Hermitian, which is why it is returned as a raw matrix.
pub fn bracket(x: &HermitianForm2, y: &HermitianForm2) -> [[C64; 2]; 2] {
    let xy = crate::tensors::mat_mul(&x.0, &y.0);
    let yx = crate::tensors::mat_mul(&y.0, &x.0);
    let mut out = xy;
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] -= yx[a][b];
        }
    }
    out
}

/// Structure constants of the orthonormal basis, extracted from
/// `[φ^α, φ^β] = i c^αβγ φ^γ`. Equals `√2 ε^αβγ`.
pub fn structure_constants() -> [[[f64; 3]; 3]; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for alpha in 0..3 {
        for beta in 0..3 {
            let br = bracket(&phi(alpha), &phi(beta));
            for gamma in 0..3 {
                let pg = phi(gamma);
                // tr(bracket · φ^γ) = i c^αβγ
                let mut tr = czero();
                for a in 0..2 {
                    for b in 0..2 {
                        tr += br[a][b] * pg.0[b][a];
                    }
                }
                out[alpha][beta][gamma] = tr.im;
            }
        }
    }
    out
}

/// Quadratic bracket combination of a doubly trace-free tensor:
/// `B_āb c̄d = Σ_pr (S_āp r̄d S_p̄b c̄r - S_āp c̄r S_p̄b r̄d)`.
///
/// This is the ground truth behind [`sharp`]: for `S` with components `M`,
/// `tensor_basis_components(bracket_contraction(S)) = sharp(M)`.
pub fn bracket_contraction(s: &CTensor4) -> CTensor4 {
    let mut out = zero_tensor();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let mut sum = czero();
                    for p in 0..2 {
                        for r in 0..2 {
                            sum += s[a][p][r][d] * s[p][b][cc][r];
                            sum -= s[a][p][cc][r] * s[p][b][r][d];
                        }
                    }
                    out[a][b][cc][d] = sum;
                }
            }
        }
    }
    out
}

/// Sharp operator on basis components: `sharp(M) = 2·adj(M)` where `adj` is
/// the classical adjugate.
///
/// In the eigenbasis of `M` this is `2·diag(m2 m3, m1 m3, m1 m2)`; the sign is
/// pinned by the tensor oracle [`bracket_contraction`] and by stationarity of
/// the constant-HSC state under the normalized component reactions (see
/// `docs/CONVENTIONS.md`). Equivariant: `sharp(Q M Qᵀ) = Q sharp(M) Qᵀ` for
/// orthogonal `Q`.
pub fn sharp(m: &Mat3) -> Mat3 {
    let adj = [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ];
    mat3_scale(&adj, 2.0)
}
