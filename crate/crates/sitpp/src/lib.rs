//! Stochastic simulation of optical soliton propagation through a 1-D medium of
//! two-level atoms, in the positive-P representation.
//!
//! The crate integrates the coupled Maxwell-Bloch equations for a slowly varying
//! field envelope `Omega(tau, z)` driving an ensemble of two-level atoms, with
//! quantum noise entering through the positive-P stochastic terms: atom-field
//! coupling noise, dephasing, pump/damping noise, and thermal photon noise on the
//! field. Phase space is doubled: `omega_dag` is an independent variable rather
//! than the conjugate of `omega`, and likewise `r_plus` vs `r_minus`. Stochastic
//! moments of the trajectories estimate normally ordered quantum moments, which
//! is what makes sub-shot-noise (squeezed) pulse-energy statistics visible as a
//! negative sample variance.
//!
//! What it computes:
//! - pulse-area dynamics (2-pi / 4-pi soliton attractors, reshaping, absorption),
//! - pulse-energy statistics along the fiber and the amplitude squeezing ratio,
//! - the dependence of squeezing on damping, temperature, and coupling strength.
//!
//! The primary interface is the `examples/` directory; each example is a small
//! runnable program exercising one capability:
//!
//! ```text
//! cargo run --release --example area_theorem        # deterministic pulse-area attractors
//! cargo run --release --example absorption_scan     # absorbed energy vs input area
//! cargo run --release --example soliton_invariance  # 2-pi sech round trip
//! cargo run --release --example rabi_check          # single-cell Bloch dynamics vs closed form
//! cargo run --release --example noise_statistics    # raw noise process contracts
//! cargo run --release --example squeezing_run       # stochastic ensemble, S(z) curve
//! cargo run --release --example damping_comparison  # squeezing with/without damping
//! cargo run --release --example thermal_sweep       # squeezing vs bath temperature
//! cargo run --release --example gamma0_sweep        # squeezing vs spontaneous-emission rate
//! cargo run --release --example reproducibility     # bit-identical parallel ensembles
//! cargo run --release --example custom_config       # config file -> csv/svg/manifest pipeline
//! ```
//!
//! A thin CLI binary (`sitpp`) wraps the same experiment drivers for scripted
//! use; see `sitpp --help`.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod field;
pub mod integrator;
pub mod medium;
pub mod noise;
pub mod observables;
pub mod params;
pub mod plot;
pub mod report;
pub mod rng;

pub use error::{Result, SitError};

/// Complex scalar used throughout (field amplitudes, Bloch variables).
pub type C64 = num_complex::Complex64;
