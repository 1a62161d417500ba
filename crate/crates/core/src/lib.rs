//! Simulation and analysis of two-level-system (TLS) noise in superconducting
//! resonators.
//!
//! The pipeline has three stages:
//!
//! 1. [`ensemble`]: draw quantum TLSs near the resonator frequency, couple
//!    them through a zero-point field map, and attach thermal TLSs to each.
//! 2. [`dynamics`]: run the thermal TLSs as telegraph processes, move each
//!    quantum TLS in frequency accordingly, and evaluate the resonator loss
//!    `Γ_int(t)` and frequency `f_r(t)` for every pump setting using the
//!    closed forms in [`physics`].
//! 3. [`spectral`]: normalize the series, estimate Welch spectra, and fit
//!    `h0 + h−1/f + h−2/f²`.
//!
//! [`resonfit`] covers the measurement side: the hanger S21 model, quality
//! factors, and the power dependence of the internal loss.
//!
//! ```
//! use tlsnoise::physics::{mean_photon_number, photon_flux};
//! use tlsnoise::units::dbm_to_watts;
//!
//! // Probe at −160 dBm on resonance with R1's rates.
//! let flux = photon_flux(dbm_to_watts(-160.0), 5.581779e9).unwrap();
//! let n = mean_photon_number(flux, 584e3, 584e3 + 84e3, 0.0).unwrap();
//! assert!((n - 0.07).abs() < 0.01);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod constants;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod lm;
pub mod physics;
pub mod presets;
pub mod resonfit;
pub mod seeds;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};

// The guide's code blocks run as doc-tests so the book cannot drift from the API.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub struct GuideIntroduction;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/physics.md")]
pub struct GuidePhysics;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/ensemble.md")]
pub struct GuideEnsemble;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/dynamics.md")]
pub struct GuideDynamics;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/spectral.md")]
pub struct GuideSpectral;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/resonfit.md")]
pub struct GuideResonfit;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub struct GuideCli;
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/reproducibility.md")]
pub struct GuideReproducibility;
