//! Zero-diffusion reaction terms of the normalized curvature flow.
//!
//! Three gauges of the same evolution, plus the closed component system:
//!
//! * [`frame_reaction`]: derivative of the curvature tensor expressed in an
//!   evolving unitary frame. All traces are plain index sums because the
//!   metric stays the identity in this gauge.
//! * [`coordinate_reaction`]: derivative in a fixed coordinate gauge, where
//!   the metric itself evolves. Carries the opposite sign on the
//!   normalization term and extra Ricci rotation terms.
//! * [`rotation_correction`]: the gauge transport connecting the two,
//!   `frame_reaction = coordinate_reaction + rotation_correction`
//!   exactly (up to round-off) for every valid curvature tensor.
//! * [`component_reaction`]: the closed system on `(R, s, M)` components,
//!   equal to `decompose ∘ frame_reaction ∘ reconstruct`.
//!
//! `mu` is the normalization constant; the constant holomorphic sectional
//! curvature state `(R, s, M) = (6, 0, I)` is stationary exactly at `mu = 3`.

use crate::decomp::{mat3_mul, sharp, CurvatureParts};
use crate::tensors::{
    czero, mat_inverse, mat_mul, zero_tensor, Frame, HermitianForm2, KahlerCurvature,
    NonPositiveMetric,
};
use crate::C64;

/// Reaction in the evolving-frame gauge:
///
/// ```text
/// dT_āb c̄d = -μ T_āb c̄d + Σ_pr ( T_āb p̄r T_r̄p c̄d
///                               + T_āp r̄d T_p̄b c̄r
///                               - T_āp c̄r T_p̄b r̄d )
/// ```
///
/// Preserves the validity contract exactly in exact arithmetic.
pub fn frame_reaction(t: &KahlerCurvature, mu: f64) -> KahlerCurvature {
    let x = &t.0;
    let mut out = zero_tensor();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let mut sum = x[a][b][cc][d].scale(-mu);
                    for p in 0..2 {
                        for r in 0..2 {
                            sum += x[a][b][p][r] * x[r][p][cc][d];
                            sum += x[a][p][r][d] * x[p][b][cc][r];
                            sum -= x[a][p][cc][r] * x[p][b][r][d];
                        }
                    }
                    out[a][b][cc][d] = sum;
                }
            }
        }
    }
    KahlerCurvature(out)
}

/// Reaction of the Ricci form in the evolving-frame gauge:
///
/// ```text
/// dRic_āb = -μ Ric_āb + Σ_pr T_āb p̄r Ric_r̄p
/// ```
///
/// Equals the Ricci trace of [`frame_reaction`]: the two quadratic tensor
/// terms cancel under the trace.
pub fn ricci_frame_reaction(
    ric: &HermitianForm2,
    t: &KahlerCurvature,
    mu: f64,
) -> HermitianForm2 {
    let mut out = [[czero(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut sum = ric.0[a][b].scale(-mu);
            for p in 0..2 {
                for r in 0..2 {
                    sum += t.0[a][b][p][r] * ric.0[r][p];
                }
            }
            out[a][b] = sum;
        }
    }
    HermitianForm2(out)
}

/// Reaction in the fixed coordinate gauge (evolving metric):
///
/// ```text
/// dT_āb c̄d = +μ T_āb c̄d
///           - (1/2) Σ_r ( Ric_r̄d T_āb c̄r + Ric_r̄b T_ād c̄r
///                       + Ric_c̄r T_āb r̄d + Ric_ār T_c̄b r̄d )
///           + Σ_pr ( T_r̄p āb T_p̄r c̄d + T_r̄p c̄b T_p̄r ād - T_āp c̄r T_p̄b r̄d )
/// ```
///
/// with `Ric` the Ricci trace of `t`.
pub fn coordinate_reaction(t: &KahlerCurvature, mu: f64) -> KahlerCurvature {
    let x = &t.0;
    let ric = t.ricci_trace();
    let mut out = zero_tensor();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let mut sum = x[a][b][cc][d].scale(mu);
                    for r in 0..2 {
                        let mut rot = ric.0[r][d] * x[a][b][cc][r];
                        rot += ric.0[r][b] * x[a][d][cc][r];
                        rot += ric.0[cc][r] * x[a][b][r][d];
                        rot += ric.0[a][r] * x[cc][b][r][d];
                        sum -= rot.scale(0.5);
                    }
                    for p in 0..2 {
                        for r in 0..2 {
                            sum += x[r][p][a][b] * x[p][r][cc][d];
                            sum += x[r][p][cc][b] * x[p][r][a][d];
                            sum -= x[a][p][cc][r] * x[p][b][r][d];
                        }
                    }
                    out[a][b][cc][d] = sum;
                }
            }
        }
    }
    KahlerCurvature(out)
}

/// Gauge transport between the coordinate and frame derivatives:
///
/// ```text
/// (1/2) Σ_q ( Ric_āq T_q̄b c̄d + Ric_q̄b T_āq c̄d
///           + Ric_c̄q T_āb q̄d + Ric_q̄d T_āb c̄q )  -  2μ T_āb c̄d
/// ```
pub fn rotation_correction(t: &KahlerCurvature, mu: f64) -> KahlerCurvature {
    let x = &t.0;
    let ric = t.ricci_trace();
    let mut out = zero_tensor();
    for a in 0..2 {
        for b in 0..2 {
            for cc in 0..2 {
                for d in 0..2 {
                    let mut sum = x[a][b][cc][d].scale(-2.0 * mu);
                    for q in 0..2 {
                        let mut rot = ric.0[a][q] * x[q][b][cc][d];
                        rot += ric.0[q][b] * x[a][q][cc][d];
                        rot += ric.0[cc][q] * x[a][b][q][d];
                        rot += ric.0[q][d] * x[a][b][cc][q];
                        sum += rot.scale(0.5);
                    }
                    out[a][b][cc][d] = sum;
                }
            }
        }
    }
    KahlerCurvature(out)
}

/// Closed reaction system on `(R, s, M)` components:
///
/// ```text
/// dR = Σ_α s_α² + (1/2) R (R - 2μ)
/// ds = (1/2)(R - 2μ) s + M s
/// dM = -μ M + M² + sharp(M) + (1/2) s sᵀ
/// ```
///
/// The rates stay trace-compatible: `tr(dM) = dR / 2` whenever the input
/// satisfies `tr(M) = R / 2`.
pub fn component_reaction(parts: &CurvatureParts, mu: f64) -> CurvatureParts {
    let r = parts.r;
    let s = parts.s;
    let m = parts.m;

    let dr = parts.s_norm_sqr() + 0.5 * r * (r - 2.0 * mu);

    let mut ds = [0.0; 3];
    for a in 0..3 {
        ds[a] = 0.5 * (r - 2.0 * mu) * s[a];
        for b in 0..3 {
            ds[a] += m[a][b] * s[b];
        }
    }

    let m_sq = mat3_mul(&m, &m);
    let sh = sharp(&m);
    let mut dm = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            dm[a][b] = -mu * m[a][b] + m_sq[a][b] + sh[a][b] + 0.5 * s[a] * s[b];
        }
    }

    CurvatureParts {
        r: dr,
        s: ds,
        m: dm,
    }
}

/// Derivative of a unitary frame transported along the metric flow
/// `ġ = -Ric + μ g`:
///
/// ```text
/// ė_ja = -(1/2) Σ_rs (g⁻¹)_jr (-Ric_r̄s + μ g_r̄s) e_sa
/// ```
///
/// Returned as a raw tangent matrix in the same `[j][a]` layout as [`Frame`].
pub fn frame_flow_rhs(
    e: &Frame,
    g: &HermitianForm2,
    ric: &HermitianForm2,
    mu: f64,
) -> Result<[[C64; 2]; 2], NonPositiveMetric> {
    let g_inv = mat_inverse(&g.0).ok_or(NonPositiveMetric {
        min_eigenvalue: g.min_eigenvalue(),
    })?;
    let mut drive = [[czero(); 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            drive[r][s] = g.0[r][s].scale(mu) - ric.0[r][s];
        }
    }
    let lead = mat_mul(&g_inv, &drive);
    let mut out = mat_mul(&lead, &e.0);
    for j in 0..2 {
        for a in 0..2 {
            out[j][a] = out[j][a].scale(-0.5);
        }
    }
    Ok(out)
}
