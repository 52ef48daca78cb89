//! The stochastic terms of the positive-P equations.
//!
//! Six elementary noise processes drive a run, all delta-correlated:
//!
//! - `xi_alpha` (complex): thermal photon noise on the field,
//! - `xi_j`, `xi_j_dag` (real, mutually independent): atom-field coupling
//!   noise on `r_minus` / `r_plus`,
//! - `xi_z` (real): composite noise on `r_z` (coupling + damping + pump),
//! - `xi_p` (complex): dephasing noise, shared between `r_minus` and `r_plus`,
//! - `xi_o` (complex): pump noise, shared among all three atomic equations.
//!
//! Discrete contract on a cell of volume `d_tau * d_z * d_omega`: real
//! processes have variance `1/(d_tau d_z d_omega)`, complex processes are
//! circular with `<|xi|^2> = 1/(d_tau d_z d_omega)` and `<xi^2> = 0`. The
//! field noise has no frequency index (`1/(d_tau d_z)`).
//!
//! The multiplicative amplitudes are complex square roots (principal branch):
//! `sqrt(2 omega r_minus)` on `r_minus`, `sqrt(omega_dag r_plus)` on `r_plus`
//! (the factor-2 asymmetry is deliberate and can be symmetrized via config),
//! `sqrt(gamma_p (r_z + 1))` for dephasing, and for `r_z` the composite
//! radicand `2 gamma_par (1 - sigma_ss r_z) + (r_minus omega_dag - r_plus
//! omega) - 2 W12 r_plus r_minus`, minus the pump cross-term
//! `(xi_o r_plus + conj(xi_o) r_minus) sqrt(W12)`. After absorbing grid
//! factors, the `1/sqrt(rho)` prefactor of the atomic noises becomes
//! `1/sqrt(N_band)` with `N_band = n_cell * weight`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SitError};
use crate::params::DerivedRates;
use crate::rng::{circular_complex, standard_normal, stream, Channel};

/// Individual on/off switches for the elementary noise processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseToggles {
    pub field_thermal: bool,
    pub coupling_j: bool,
    pub coupling_j_dag: bool,
    pub coupling_z: bool,
    pub dephasing: bool,
    pub pump: bool,
}

impl Default for NoiseToggles {
    fn default() -> Self {
        NoiseToggles::all_on()
    }
}

impl NoiseToggles {
    pub fn all_on() -> Self {
        NoiseToggles {
            field_thermal: true,
            coupling_j: true,
            coupling_j_dag: true,
            coupling_z: true,
            dephasing: true,
            pump: true,
        }
    }

    pub fn all_off() -> Self {
        NoiseToggles {
            field_thermal: false,
            coupling_j: false,
            coupling_j_dag: false,
            coupling_z: false,
            dephasing: false,
            pump: false,
        }
    }

    pub fn any(&self) -> bool {
        self.field_thermal
            || self.coupling_j
            || self.coupling_j_dag
            || self.coupling_z
            || self.dephasing
            || self.pump
    }
}

/// The elementary processes, for the raw sampling surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiKind {
    Alpha,
    J,
    JDag,
    Z,
    P,
    O,
}

impl XiKind {
    pub fn is_complex(&self) -> bool {
        matches!(self, XiKind::Alpha | XiKind::P | XiKind::O)
    }

    fn channel(&self) -> Channel {
        match self {
            XiKind::Alpha => Channel::FieldThermal,
            XiKind::J => Channel::CouplingJ,
            XiKind::JDag => Channel::CouplingJDag,
            XiKind::Z => Channel::CouplingZ,
            XiKind::P => Channel::Dephasing,
            XiKind::O => Channel::Pump,
        }
    }
}

/// Raw delta-correlated process samples on a discrete cell of volume
/// `cell_volume = d_tau * d_z * d_omega` (use `d_tau * d_z` for `Alpha`).
///
/// Real kinds return values on the real axis with variance `1/cell_volume`;
/// complex kinds are circular with `<|xi|^2> = 1/cell_volume`.
pub fn sample_xi<R: Rng + ?Sized>(
    kind: XiKind,
    n: usize,
    cell_volume: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if !(cell_volume.is_finite() && cell_volume > 0.0) {
        return Err(SitError::config("cell volume must be > 0"));
    }
    let sd = (1.0 / cell_volume).sqrt();
    let out = (0..n)
        .map(|_| {
            if kind.is_complex() {
                circular_complex(rng) * sd
            } else {
                Complex64::new(standard_normal(rng) * sd, 0.0)
            }
        })
        .collect();
    Ok(out)
}

/// Unit-variance draws for one z-cell, one block per process, addressed by
/// `(master_seed, trajectory, cell, channel)`. Disabled processes stay zero.
///
/// Layout: `xi_alpha[i]` per tau node; atomic arrays `[band * n_steps + step]`
/// per tau step (`n_steps = n_tau - 1`).
#[derive(Debug, Clone)]
pub struct CellNoise {
    pub xi_alpha: Vec<Complex64>,
    pub xi_j: Vec<f64>,
    pub xi_j_dag: Vec<f64>,
    pub xi_z: Vec<f64>,
    pub xi_p: Vec<Complex64>,
    pub xi_o: Vec<Complex64>,
}

impl CellNoise {
    pub fn empty() -> Self {
        CellNoise {
            xi_alpha: Vec::new(),
            xi_j: Vec::new(),
            xi_j_dag: Vec::new(),
            xi_z: Vec::new(),
            xi_p: Vec::new(),
            xi_o: Vec::new(),
        }
    }

    /// (Re)fill for one cell. Draw order within each process stream is fixed
    /// (band-major, then step), so values depend only on the address.
    pub fn draw(
        &mut self,
        master_seed: u64,
        traj: u64,
        cell: u64,
        n_bands: usize,
        n_tau: usize,
        toggles: &NoiseToggles,
    ) {
        let n_steps = n_tau - 1;
        let n_atomic = n_bands * n_steps;

        self.xi_alpha.resize(n_tau, Complex64::new(0.0, 0.0));
        self.xi_j.resize(n_atomic, 0.0);
        self.xi_j_dag.resize(n_atomic, 0.0);
        self.xi_z.resize(n_atomic, 0.0);
        self.xi_p.resize(n_atomic, Complex64::new(0.0, 0.0));
        self.xi_o.resize(n_atomic, Complex64::new(0.0, 0.0));

        if toggles.field_thermal {
            let mut rng = stream(master_seed, traj, cell, Channel::FieldThermal);
            for v in &mut self.xi_alpha {
                *v = circular_complex(&mut rng);
            }
        }
        if toggles.coupling_j {
            let mut rng = stream(master_seed, traj, cell, Channel::CouplingJ);
            for v in &mut self.xi_j {
                *v = standard_normal(&mut rng);
            }
        }
        if toggles.coupling_j_dag {
            let mut rng = stream(master_seed, traj, cell, Channel::CouplingJDag);
            for v in &mut self.xi_j_dag {
                *v = standard_normal(&mut rng);
            }
        }
        if toggles.coupling_z {
            let mut rng = stream(master_seed, traj, cell, Channel::CouplingZ);
            for v in &mut self.xi_z {
                *v = standard_normal(&mut rng);
            }
        }
        if toggles.dephasing {
            let mut rng = stream(master_seed, traj, cell, Channel::Dephasing);
            for v in &mut self.xi_p {
                *v = circular_complex(&mut rng);
            }
        }
        if toggles.pump {
            let mut rng = stream(master_seed, traj, cell, Channel::Pump);
            for v in &mut self.xi_o {
                *v = circular_complex(&mut rng);
            }
        }
    }

    #[inline]
    pub fn atomic(&self, band: usize, step: usize, n_steps: usize) -> AtomicDraws {
        let k = band * n_steps + step;
        AtomicDraws {
            xi_j: self.xi_j[k],
            xi_j_dag: self.xi_j_dag[k],
            xi_z: self.xi_z[k],
            xi_p: self.xi_p[k],
            xi_o: self.xi_o[k],
        }
    }
}

/// The unit draws feeding one atomic tau step of one band.
#[derive(Debug, Clone, Copy)]
pub struct AtomicDraws {
    pub xi_j: f64,
    pub xi_j_dag: f64,
    pub xi_z: f64,
    pub xi_p: Complex64,
    pub xi_o: Complex64,
}

/// Per-run constants of the noise assembly.
#[derive(Debug, Clone, Copy)]
pub struct NoiseContext {
    /// Overall amplitude factor (1 physical; 0 recovers the deterministic
    /// equations; negative flips every draw, for antithetic pairs).
    pub scale: f64,
    pub gamma_par: f64,
    pub sigma_ss: f64,
    /// Dephasing rate entering the multiplicative amplitude.
    pub gamma_p: f64,
    /// `W12` as seen by the noise terms (zero when the pump process is off,
    /// which also removes its compensating term in the `r_z` radicand).
    pub w12_noise: f64,
    pub sqrt_w12: f64,
    /// Std of the per-node field-noise increment over one dz step:
    /// `2 sqrt(G kappa n_bar d_z / d_tau)`.
    pub field_increment_sd: f64,
    /// Whether the coupling noise on `r_plus` uses `sqrt(2 omega_dag r_plus)`
    /// instead of `sqrt(omega_dag r_plus)`.
    pub symmetrize_coupling: bool,
}

impl NoiseContext {
    pub fn new(
        rates: &DerivedRates,
        toggles: &NoiseToggles,
        scale: f64,
        coupling: f64,
        kappa: f64,
        d_tau: f64,
        d_z: f64,
        symmetrize_coupling: bool,
    ) -> Self {
        let w12_noise = if toggles.pump { rates.w12 } else { 0.0 };
        let field_var = 4.0 * coupling * kappa * rates.n_bar_field * d_z / d_tau;
        NoiseContext {
            scale,
            gamma_par: rates.gamma_par,
            sigma_ss: rates.sigma_ss,
            gamma_p: rates.gamma_p,
            w12_noise,
            sqrt_w12: w12_noise.sqrt(),
            field_increment_sd: if toggles.field_thermal { field_var.sqrt() } else { 0.0 },
            symmetrize_coupling,
        }
    }
}

/// The four complex radicands under the multiplicative square roots at one
/// phase-space point. Tracked separately so the integrator can count
/// principal-branch crossings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radicands {
    pub j: Complex64,
    pub j_dag: Complex64,
    pub p: Complex64,
    pub z: Complex64,
}

#[inline]
pub fn radicands(
    omega: Complex64,
    omega_dag: Complex64,
    r_minus: Complex64,
    r_plus: Complex64,
    r_z: Complex64,
    ctx: &NoiseContext,
) -> Radicands {
    let one = Complex64::new(1.0, 0.0);
    let j = 2.0 * omega * r_minus;
    let j_dag = if ctx.symmetrize_coupling {
        2.0 * omega_dag * r_plus
    } else {
        omega_dag * r_plus
    };
    let p = ctx.gamma_p * (r_z + one);
    let z = 2.0 * ctx.gamma_par * (one - ctx.sigma_ss * r_z) + (r_minus * omega_dag - r_plus * omega)
        - 2.0 * ctx.w12_noise * r_plus * r_minus;
    Radicands { j, j_dag, p, z }
}

/// Assemble the noise increments (already multiplied by d_tau) for one atomic
/// tau step. `band_atoms` is the effective atom number of the band and `d_tau`
/// the step; the per-step amplitude is `scale * sqrt(d_tau / band_atoms)`.
#[inline]
pub fn atomic_increments(
    draws: &AtomicDraws,
    rads: &Radicands,
    r_minus: Complex64,
    r_plus: Complex64,
    ctx: &NoiseContext,
    band_atoms: f64,
    d_tau: f64,
) -> (Complex64, Complex64, Complex64) {
    let amp = ctx.scale * (d_tau / band_atoms).sqrt();
    let sqrt_p = rads.p.sqrt();
    let d_minus = draws.xi_j * rads.j.sqrt() + 2.0 * draws.xi_p * sqrt_p
        + 2.0 * draws.xi_o * ctx.sqrt_w12;
    let d_plus = draws.xi_j_dag * rads.j_dag.sqrt() + 2.0 * draws.xi_p.conj() * sqrt_p
        + 2.0 * draws.xi_o.conj() * ctx.sqrt_w12;
    let d_z = draws.xi_z * rads.z.sqrt()
        - (draws.xi_o * r_plus + draws.xi_o.conj() * r_minus) * ctx.sqrt_w12;
    (d_minus * amp, d_plus * amp, d_z * amp)
}

/// Field-noise increments over one dz step for the `omega` array and its
/// doubled partner (`F_omega_dag = conj(F_omega)`: the same draw, conjugated).
#[inline]
pub fn field_increment(xi_alpha: Complex64, ctx: &NoiseContext) -> (Complex64, Complex64) {
    let f = ctx.scale * ctx.field_increment_sd * xi_alpha;
    (f, f.conj())
}

/// Count of principal-branch crossings between two successive radicand values:
/// a crossing of the negative real axis, where `sqrt` jumps sign.
#[inline]
pub fn branch_flip(prev: Complex64, next: Complex64) -> bool {
    prev.re < 0.0 && next.re < 0.0 && (prev.im < 0.0) != (next.im < 0.0)
}
