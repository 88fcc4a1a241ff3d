//! Exact periodic orbits of the symmetric May-Leonard system and the linear
//! stability of those orbits against spatially periodic disturbances.
//!
//! The symmetric May-Leonard system
//!
//! ```text
//! u' = u (1 - u - 2v)
//! v' = v (1 - v - 2w)
//! w' = w (1 - w - 2u)
//! ```
//!
//! has an attracting invariant plane `u + v + w = 1` carrying a continuum of
//! periodic orbits labelled by the conserved product `A = u v w`,
//! `0 < A < 1/27`. This crate constructs those orbits in closed form through
//! Jacobi elliptic functions, integrates the variational equations of the
//! diffusively extended system to obtain monodromy matrices and Floquet
//! multipliers at any perturbation wavenumber, evaluates the long-wave
//! stability parameter by two independent routes, locates the
//! period-doubling instability threshold, and cross-checks the predicted
//! growth rates by direct simulation of the reaction-diffusion system.
//!
//! Conventions used throughout:
//!
//! * Elliptic integrals and functions take the **parameter** `m` (the square
//!   of the modulus), never the modulus itself. `m -> 0` at the coexistence
//!   limit `A -> 1/27` and `m -> 1` at the heteroclinic limit `A -> 0`.
//! * Orbits are phased so that `t = 0` is the minimum of `u`.
//! * Diffusivities are normalized so that `max(D_u, D_v, D_w) = 1` when fed
//!   to wavenumber scans (the wavenumber absorbs the scale).
//!
//! The crate is `no_std`-compatible (with `alloc`); enable the `libm`
//! feature when building without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("ml-floquet-core requires either the `std` or the `libm` feature");

extern crate alloc;

pub mod dns;
pub mod elliptic;
pub mod error;
pub mod floquet;
pub mod general;
pub mod linalg;
pub mod longwave;
pub(crate) mod math;
pub mod ode;
pub mod orbit;
pub mod small_amplitude;

pub use error::{CoreError, ErrorKind};
pub use floquet::{
    critical_period, floquet_decompose, max_multiplier, monodromy, multipliers, scan_k2,
    CriticalOutcome, Diffusivities, FloquetDecomposition, MonodromyResult, ScanPoint,
};
pub use general::{check_continuum, find_periodic_orbit, general_monodromy, GeneralParams, NumericOrbit};
pub use longwave::{
    alpha_fourier, alpha_numeric, fourier_table, instability_predicate, longwave_eigenvalues,
    splitting_r, FourierTable, LongwaveResult,
};
pub use orbit::{amplitude_from_period, period, quartic_roots, Branch, PeriodicOrbit};
