//! Pointwise curvature algebra and flow kernels for Kähler surfaces (complex
//! dimension 2).
//!
//! The crate is organized bottom-up:
//!
//! * [`tensors`] — Hermitian forms, curvature tensors with their symmetry
//!   contracts, unitary frames, and seeded random generation.
//! * [`decomp`] — the trace/traceless split of a curvature tensor into scalar,
//!   form, and operator components over the Pauli basis of trace-free forms.
//! * [`eigen3`] — closed-form eigensolver for real symmetric 3×3 matrices.
//! * [`reactions`] — reaction (zero-diffusion) terms of the normalized
//!   curvature flow in coordinate, frame, and component form.
//! * [`cone`] — nonnegativity cones, boundary quantities, and the identities
//!   the maximum-principle argument rests on.
//! * [`ode`] — fixed-step integration of the component reaction system and
//!   cone-preservation ensembles.
//! * [`lattice`] — discrete potentials, metrics, and curvature on a flat
//!   4-torus with a normalized potential flow.
//!
//! Everything is `no_std` + `alloc`; IO, file formats, and the CLI live in the
//! companion `krf-cli` crate.
//!
//! Sign and normalization conventions are centralized in the convention ledger
//! (`docs/CONVENTIONS.md`); its version string is [`CONVENTION_VERSION`].

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod cone;
pub mod decomp;
pub mod eigen3;
pub mod lattice;
pub mod ode;
pub mod reactions;
pub mod tensors;

/// Float transcendentals routed through `libm` so the crate builds without
/// `std` and test/no-test builds evaluate identically.
pub(crate) mod math {
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
    #[inline]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline]
    pub fn acos(x: f64) -> f64 {
        libm::acos(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
}

/// Version tag of the sign/normalization convention ledger this build
/// implements. Embedded in every machine-readable report.
pub const CONVENTION_VERSION: &str = "conventions-v1";

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Real symmetric 3×3 matrix, row-major.
pub type Mat3 = [[f64; 3]; 3];

/// Complex rank-4 tensor on C², indexed `[a][b][c][d]` with the first index of
/// each pair barred: entry `[a][b][c][d]` holds the `(ā, b, c̄, d)` component.
pub type CTensor4 = [[[[C64; 2]; 2]; 2]; 2];
