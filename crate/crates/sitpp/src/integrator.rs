//! z-marching propagation of one stochastic trajectory.
//!
//! The medium is split into `n_z` cells of thickness `d_z`, each holding
//! `n_cell` fresh ground-state atoms per band weight. A cell update sweeps the
//! atoms across the retarded-time window under the current field, then steps
//! the field with the accumulated polarization source:
//!
//! - `r_minus' = -(gamma_perp + i delta) r_minus + omega r_z` (+ noise),
//!   `delta = omega_band - omega0`, and the mirrored equation for `r_plus`
//!   with `omega_dag`,
//! - `r_z' = -gamma_par (r_z - sigma_ss) - (omega r_plus + omega_dag
//!   r_minus)/2` (+ noise),
//! - `d omega/d z = -kappa/2 omega + g_rho sum_m w_m r_minus_m` (+ thermal
//!   noise), and the mirrored equation for `omega_dag` sourced by `r_plus`.
//!
//! The default scheme treats drift with a semi-implicit midpoint rule (fixed
//! number of fixed-point iterations, deterministic order 2) and adds noise
//! increments evaluated at the step's start point, which keeps the Ito
//! interpretation. The z direction uses a midpoint rule for the mean response:
//! a noise-free sweep under the incoming field builds the half-step field and
//! a second noise-free sweep under the half-step field supplies the source for
//! the full step. In stochastic runs a separate noisy sweep under the incoming
//! field fixes the cell's noise contribution, again keeping the amplitudes at
//! the step's start point; re-evaluating them downstream would turn the field
//! step into a Stratonovich one and bias the photon statistics.
//!
//! Time is retarded time tau = t - z/c, so a soliton slower than light drifts
//! toward later tau as it propagates. The optional `vg_frame` mode adds an
//! upwind advection term that moves the window along at the soliton group
//! velocity instead, keeping the envelope centered.

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SitError};
use crate::field::{FieldState, TauGrid};
use crate::medium::{AtomicState, FrequencyGrid};
use crate::noise::{self, CellNoise, NoiseContext, NoiseToggles};
use crate::params::{DerivedRates, PhysicalParams, C_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    SemiImplicitMidpoint,
    EulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepScheme {
    pub kind: SchemeKind,
    /// Fixed-point iterations of the implicit midpoint drift solve.
    pub midpoint_iters: usize,
}

impl Default for StepScheme {
    fn default() -> Self {
        StepScheme { kind: SchemeKind::SemiImplicitMidpoint, midpoint_iters: 3 }
    }
}

/// Knobs of a single-trajectory propagation.
#[derive(Debug, Clone)]
pub struct IntegratorOptions {
    pub scheme: StepScheme,
    pub n_z: usize,
    pub d_z: f64,
    /// Initial inversion of each fresh atom (-1/2 per convention; -1 selects
    /// the unit-inversion convention).
    pub rz0: f64,
    pub toggles: NoiseToggles,
    pub noise_scale: f64,
    pub symmetrize_coupling: bool,
    /// Co-move the window at the soliton group velocity (upwind advection).
    pub vg_frame: bool,
    /// Cells between recorded snapshots (0: only start and end).
    pub checkpoint_stride: usize,
    pub store_fields: bool,
    /// Magnitude above which a trajectory counts as diverged.
    pub divergence_threshold: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            scheme: StepScheme::default(),
            n_z: 400,
            d_z: 0.05,
            rz0: -0.5,
            toggles: NoiseToggles::all_on(),
            noise_scale: 1.0,
            symmetrize_coupling: false,
            vg_frame: false,
            checkpoint_stride: 20,
            store_fields: false,
            divergence_threshold: 1e6,
        }
    }
}

/// Observables recorded at one z checkpoint.
#[derive(Debug, Clone)]
pub struct TrajectorySnapshot {
    pub z: f64,
    pub area: Complex64,
    pub energy: Complex64,
    /// Cumulative energy deposited in the medium, `2 g_rho dz sum_m w_m
    /// (r_z(tau_end) - rz0)` summed over passed cells. For an undamped medium
    /// this balances the field energy exactly.
    pub excitation: Complex64,
    pub peak: f64,
    pub field: Option<FieldState>,
}

/// Everything one trajectory produced.
#[derive(Debug, Clone)]
pub struct TrajectoryOutcome {
    pub snapshots: Vec<TrajectorySnapshot>,
    /// z at which the trajectory exceeded the divergence threshold, if it did.
    /// Snapshots stop there; diverged trajectories are excluded from moments
    /// but always counted.
    pub diverged_at: Option<f64>,
    /// Principal-branch crossings of the noise radicands (spiking diagnostic).
    pub branch_flips: u64,
}

impl TrajectoryOutcome {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

#[derive(Debug)]
pub struct Propagator {
    grid: TauGrid,
    freq: FrequencyGrid,
    scheme: StepScheme,
    n_z: usize,
    d_z: f64,
    d_tau: f64,
    rz0: f64,
    n_cell: f64,
    g_rho: f64,
    kappa: f64,
    omega0: f64,
    gamma_perp: f64,
    gamma_par: f64,
    sigma_ss: f64,
    toggles: NoiseToggles,
    noise_ctx: NoiseContext,
    /// Upwind advection rate `1/v_g - 1/c` (zero: plain retarded frame).
    advection: f64,
    checkpoint_stride: usize,
    store_fields: bool,
    threshold_sqr: f64,
}

impl Propagator {
    pub fn new(
        params: &PhysicalParams,
        rates: &DerivedRates,
        grid: TauGrid,
        freq: FrequencyGrid,
        opts: &IntegratorOptions,
    ) -> Result<Self> {
        grid.validate()?;
        if opts.n_z == 0 {
            return Err(SitError::config("n_z must be >= 1"));
        }
        if !(opts.d_z.is_finite() && opts.d_z > 0.0) {
            return Err(SitError::config("d_z must be > 0"));
        }
        if opts.scheme.kind == SchemeKind::SemiImplicitMidpoint && opts.scheme.midpoint_iters == 0 {
            return Err(SitError::config("midpoint_iters must be >= 1"));
        }
        if !(opts.divergence_threshold > 0.0) {
            return Err(SitError::config("divergence threshold must be > 0"));
        }
        if freq.n_bands() == 0 {
            return Err(SitError::config("frequency grid has no bands"));
        }
        let mut p = params.clone();
        p.resolve_density(opts.d_z)?;
        let g_rho = p.coupling * p.density()?;
        let d_tau = grid.d_tau();
        let advection = if opts.vg_frame {
            let a = 1.0 / rates.v_g - 1.0 / C_LIGHT;
            if a * opts.d_z > d_tau * (1.0 + 1e-12) {
                return Err(SitError::config(format!(
                    "advection violates the CFL bound: (1/v_g - 1/c) d_z = {:.3e} > d_tau = {:.3e}",
                    a * opts.d_z,
                    d_tau
                )));
            }
            a
        } else {
            0.0
        };
        let noise_ctx = NoiseContext::new(
            rates,
            &opts.toggles,
            opts.noise_scale,
            p.coupling,
            p.kappa,
            d_tau,
            opts.d_z,
            opts.symmetrize_coupling,
        );
        Ok(Propagator {
            grid,
            freq,
            scheme: opts.scheme,
            n_z: opts.n_z,
            d_z: opts.d_z,
            d_tau,
            rz0: opts.rz0,
            n_cell: p.atoms_per_cell()?,
            g_rho,
            kappa: p.kappa,
            omega0: p.omega0,
            gamma_perp: rates.gamma_perp,
            gamma_par: rates.gamma_par,
            sigma_ss: rates.sigma_ss,
            toggles: opts.toggles,
            noise_ctx,
            advection,
            checkpoint_stride: if opts.checkpoint_stride == 0 { opts.n_z } else { opts.checkpoint_stride },
            store_fields: opts.store_fields,
            threshold_sqr: opts.divergence_threshold * opts.divergence_threshold,
        })
    }

    pub fn grid(&self) -> &TauGrid {
        &self.grid
    }

    pub fn frequency_grid(&self) -> &FrequencyGrid {
        &self.freq
    }

    pub fn length(&self) -> f64 {
        self.n_z as f64 * self.d_z
    }

    /// Sweep one cell of fresh atoms under the given field. Returns the
    /// tau-resolved atomic state and the weighted polarization sources
    /// `sum_m w_m r_minus_m` and `sum_m w_m r_plus_m` per node.
    pub fn sweep_cell(
        &self,
        field: &FieldState,
        cell_noise: Option<&CellNoise>,
    ) -> Result<(AtomicState, Vec<Complex64>, Vec<Complex64>)> {
        self.check_field(field)?;
        let n_tau = self.grid.n_tau;
        let mut atoms = AtomicState::ground(&self.freq, n_tau, self.rz0, self.n_cell);
        let zero = Complex64::new(0.0, 0.0);
        let mut s_minus = vec![zero; n_tau];
        let mut s_plus = vec![zero; n_tau];
        let mut flips = 0u64;
        self.sweep(&field.omega, &field.omega_dag, &mut atoms, cell_noise, &mut s_minus,
            &mut s_plus, &mut flips);
        Ok((atoms, s_minus, s_plus))
    }

    /// Per-atom excitation `sum_m w_m (r_z_m - rz0)` left at the trailing
    /// edge of one cell of fresh atoms after the given field passes.
    pub fn slab_deposit(&self, field: &FieldState) -> Result<Complex64> {
        let (atoms, _, _) = self.sweep_cell(field, None)?;
        Ok(self.trailing_deposit(&atoms))
    }

    fn trailing_deposit(&self, atoms: &AtomicState) -> Complex64 {
        let last = self.grid.n_tau - 1;
        let rz0 = Complex64::new(self.rz0, 0.0);
        let mut deposit = Complex64::new(0.0, 0.0);
        for (b, band) in self.freq.bands.iter().enumerate() {
            deposit += band.weight * (atoms.r_z[[b, last]] - rz0);
        }
        deposit
    }

    fn check_field(&self, field: &FieldState) -> Result<()> {
        if field.omega.len() != self.grid.n_tau || field.omega_dag.len() != self.grid.n_tau {
            return Err(SitError::config(format!(
                "field has {} nodes but the grid has {}",
                field.omega.len(),
                self.grid.n_tau
            )));
        }
        Ok(())
    }

    /// Propagate one trajectory through the full medium.
    pub fn propagate(
        &self,
        input: &FieldState,
        master_seed: u64,
        traj: u64,
    ) -> Result<TrajectoryOutcome> {
        self.check_field(input)?;
        let n_tau = self.grid.n_tau;
        let n_bands = self.freq.n_bands();
        let stochastic = self.toggles.any() && self.noise_ctx.scale != 0.0;
        let midpoint = self.scheme.kind == SchemeKind::SemiImplicitMidpoint;
        let zero = Complex64::new(0.0, 0.0);

        let mut field = input.clone();
        field.z = 0.0;
        let mut atoms = AtomicState::ground(&self.freq, n_tau, self.rz0, self.n_cell);
        let mut cell_noise = CellNoise::empty();
        let mut s_minus = vec![zero; n_tau];
        let mut s_plus = vec![zero; n_tau];
        let mut noise_s_minus = vec![zero; n_tau];
        let mut noise_s_plus = vec![zero; n_tau];
        let mut rhs = Array1::from_elem(n_tau, zero);
        let mut rhs_dag = Array1::from_elem(n_tau, zero);
        let mut omega_mid = Array1::from_elem(n_tau, zero);
        let mut omega_dag_mid = Array1::from_elem(n_tau, zero);

        let mut absorbed = zero;
        let mut flips = 0u64;
        let mut diverged_at = None;
        let mut snapshots = Vec::with_capacity(self.n_z / self.checkpoint_stride + 2);
        snapshots.push(self.snapshot(&field, absorbed));

        for cell in 0..self.n_z {
            if stochastic {
                cell_noise.draw(master_seed, traj, cell as u64, n_bands, n_tau, &self.toggles);
            }
            let noise_ref = if stochastic { Some(&cell_noise) } else { None };

            atoms.reset_ground(self.rz0);
            let deposit;
            let atom_ns;
            let mut finite;
            if midpoint && stochastic {
                // The noise crosses into the field as an Ito increment: the
                // noisy cell response is taken at the incoming field, and the
                // midpoint refinement is applied to the mean response alone.
                // Folding the noise into the midpoint pass would evaluate its
                // amplitudes half a step downstream, which integrates a
                // different (Stratonovich) equation and biases the photon
                // statistics at the same order as the effect being measured.
                let (ns_n, fin_n) = self.sweep(&field.omega, &field.omega_dag, &mut atoms,
                    noise_ref, &mut s_minus, &mut s_plus, &mut flips);
                let dep_noisy = self.trailing_deposit(&atoms);
                noise_s_minus.copy_from_slice(&s_minus);
                noise_s_plus.copy_from_slice(&s_plus);

                atoms.reset_ground(self.rz0);
                let (ns_d0, fin_d0) = self.sweep(&field.omega, &field.omega_dag, &mut atoms,
                    None, &mut s_minus, &mut s_plus, &mut flips);
                let dep_mean0 = self.trailing_deposit(&atoms);
                for i in 0..n_tau {
                    noise_s_minus[i] -= s_minus[i];
                    noise_s_plus[i] -= s_plus[i];
                }

                self.field_rhs(&field.omega, &s_minus, &mut rhs);
                self.field_rhs(&field.omega_dag, &s_plus, &mut rhs_dag);
                let h2 = 0.5 * self.d_z;
                for i in 0..n_tau {
                    omega_mid[i] = field.omega[i] + h2 * rhs[i];
                    omega_dag_mid[i] = field.omega_dag[i] + h2 * rhs_dag[i];
                }
                atoms.reset_ground(self.rz0);
                let (ns_d1, fin_d1) = self.sweep(&omega_mid, &omega_dag_mid, &mut atoms,
                    None, &mut s_minus, &mut s_plus, &mut flips);
                self.field_rhs(&omega_mid, &s_minus, &mut rhs);
                self.field_rhs(&omega_dag_mid, &s_plus, &mut rhs_dag);
                for i in 0..n_tau {
                    rhs[i] += self.g_rho * noise_s_minus[i];
                    rhs_dag[i] += self.g_rho * noise_s_plus[i];
                }
                deposit = self.trailing_deposit(&atoms) + dep_noisy - dep_mean0;
                atom_ns = ns_n.max(ns_d0).max(ns_d1);
                finite = fin_n && fin_d0 && fin_d1;
            } else if midpoint {
                let (ns1, fin1) = self.sweep(&field.omega, &field.omega_dag, &mut atoms,
                    None, &mut s_minus, &mut s_plus, &mut flips);
                self.field_rhs(&field.omega, &s_minus, &mut rhs);
                self.field_rhs(&field.omega_dag, &s_plus, &mut rhs_dag);
                let h2 = 0.5 * self.d_z;
                for i in 0..n_tau {
                    omega_mid[i] = field.omega[i] + h2 * rhs[i];
                    omega_dag_mid[i] = field.omega_dag[i] + h2 * rhs_dag[i];
                }
                atoms.reset_ground(self.rz0);
                let (ns2, fin2) = self.sweep(&omega_mid, &omega_dag_mid, &mut atoms, None,
                    &mut s_minus, &mut s_plus, &mut flips);
                self.field_rhs(&omega_mid, &s_minus, &mut rhs);
                self.field_rhs(&omega_dag_mid, &s_plus, &mut rhs_dag);
                deposit = self.trailing_deposit(&atoms);
                atom_ns = ns1.max(ns2);
                finite = fin1 && fin2;
            } else {
                let (ns1, fin1) = self.sweep(&field.omega, &field.omega_dag, &mut atoms,
                    noise_ref, &mut s_minus, &mut s_plus, &mut flips);
                self.field_rhs(&field.omega, &s_minus, &mut rhs);
                self.field_rhs(&field.omega_dag, &s_plus, &mut rhs_dag);
                deposit = self.trailing_deposit(&atoms);
                atom_ns = ns1;
                finite = fin1;
            }
            for i in 0..n_tau {
                field.omega[i] += self.d_z * rhs[i];
                field.omega_dag[i] += self.d_z * rhs_dag[i];
            }
            if stochastic && self.noise_ctx.field_increment_sd != 0.0 {
                for i in 0..n_tau {
                    let (f, fd) = noise::field_increment(cell_noise.xi_alpha[i], &self.noise_ctx);
                    field.omega[i] += f;
                    field.omega_dag[i] += fd;
                }
            }
            field.z = (cell + 1) as f64 * self.d_z;
            absorbed += 2.0 * self.g_rho * self.d_z * deposit;

            let mut field_ns = 0.0f64;
            for c in field.omega.iter().chain(field.omega_dag.iter()) {
                let ns = c.norm_sqr();
                if ns > field_ns {
                    field_ns = ns;
                }
                finite &= ns.is_finite();
            }
            if !finite || atom_ns > self.threshold_sqr || field_ns > self.threshold_sqr {
                diverged_at = Some(field.z);
                break;
            }
            if (cell + 1) % self.checkpoint_stride == 0 || cell + 1 == self.n_z {
                snapshots.push(self.snapshot(&field, absorbed));
            }
        }

        Ok(TrajectoryOutcome { snapshots, diverged_at, branch_flips: flips })
    }

    fn snapshot(&self, field: &FieldState, absorbed: Complex64) -> TrajectorySnapshot {
        TrajectorySnapshot {
            z: field.z,
            area: field.area(&self.grid),
            energy: field.energy(&self.grid),
            excitation: absorbed,
            peak: field.peak(),
            field: if self.store_fields { Some(field.clone()) } else { None },
        }
    }

    /// `-kappa/2 omega + g_rho s` plus the optional upwind advection term.
    fn field_rhs(&self, omega: &Array1<Complex64>, s: &[Complex64], out: &mut Array1<Complex64>) {
        let n = omega.len();
        let half_kappa = 0.5 * self.kappa;
        for i in 0..n {
            let mut v = self.g_rho * s[i] - half_kappa * omega[i];
            if self.advection != 0.0 {
                // Vacuum inflow at the trailing edge; outflow at the leading
                // edge falls out of the one-sided stencil.
                let next = if i + 1 < n { omega[i + 1] } else { Complex64::new(0.0, 0.0) };
                v += self.advection * (next - omega[i]) / self.d_tau;
            }
            out[i] = v;
        }
    }

    /// March every band across the window. Sources accumulate the pre-step
    /// state at each node; noise amplitudes are evaluated at the pre-step
    /// point. Returns (largest squared magnitude seen, all values finite).
    fn sweep(
        &self,
        omega: &Array1<Complex64>,
        omega_dag: &Array1<Complex64>,
        atoms: &mut AtomicState,
        cell_noise: Option<&CellNoise>,
        s_minus: &mut [Complex64],
        s_plus: &mut [Complex64],
        flips: &mut u64,
    ) -> (f64, bool) {
        let n_tau = omega.len();
        let n_steps = n_tau - 1;
        let d_tau = self.d_tau;
        let h2 = 0.5 * d_tau;
        let zero = Complex64::new(0.0, 0.0);
        let sigma = Complex64::new(self.sigma_ss, 0.0);
        s_minus.fill(zero);
        s_plus.fill(zero);
        let mut max_ns = 0.0f64;
        let mut finite = true;

        for (b, band) in self.freq.bands.iter().enumerate() {
            let delta = band.omega - self.omega0;
            let gm = Complex64::new(self.gamma_perp, delta);
            let gp = Complex64::new(self.gamma_perp, -delta);
            let w = band.weight;
            let band_atoms = atoms.band_atoms[b];
            let mut rm = atoms.r_minus[[b, 0]];
            let mut rp = atoms.r_plus[[b, 0]];
            let mut rz = atoms.r_z[[b, 0]];
            let mut prev_rads: Option<noise::Radicands> = None;

            for i in 0..n_tau {
                s_minus[i] += w * rm;
                s_plus[i] += w * rp;
                let ns = rm.norm_sqr().max(rp.norm_sqr()).max(rz.norm_sqr());
                if ns > max_ns {
                    max_ns = ns;
                }
                finite &= ns.is_finite();
                if i == n_steps {
                    break;
                }

                let mut dm = zero;
                let mut dp = zero;
                let mut dz_inc = zero;
                if let Some(cn) = cell_noise {
                    let draws = cn.atomic(b, i, n_steps);
                    let rads = noise::radicands(omega[i], omega_dag[i], rm, rp, rz,
                        &self.noise_ctx);
                    if let Some(prev) = prev_rads {
                        *flips += noise::branch_flip(prev.j, rads.j) as u64
                            + noise::branch_flip(prev.j_dag, rads.j_dag) as u64
                            + noise::branch_flip(prev.p, rads.p) as u64
                            + noise::branch_flip(prev.z, rads.z) as u64;
                    }
                    prev_rads = Some(rads);
                    let inc = noise::atomic_increments(&draws, &rads, rm, rp, &self.noise_ctx,
                        band_atoms, d_tau);
                    dm = inc.0;
                    dp = inc.1;
                    dz_inc = inc.2;
                }

                match self.scheme.kind {
                    SchemeKind::SemiImplicitMidpoint => {
                        let om = 0.5 * (omega[i] + omega[i + 1]);
                        let od = 0.5 * (omega_dag[i] + omega_dag[i + 1]);
                        let mut rms = rm;
                        let mut rps = rp;
                        let mut rzs = rz;
                        for _ in 0..self.scheme.midpoint_iters {
                            let fm = om * rzs - gm * rms;
                            let fp = od * rzs - gp * rps;
                            let fz = -self.gamma_par * (rzs - sigma)
                                - 0.5 * (om * rps + od * rms);
                            rms = rm + h2 * fm;
                            rps = rp + h2 * fp;
                            rzs = rz + h2 * fz;
                        }
                        rm = 2.0 * rms - rm;
                        rp = 2.0 * rps - rp;
                        rz = 2.0 * rzs - rz;
                    }
                    SchemeKind::EulerMaruyama => {
                        let om = omega[i];
                        let od = omega_dag[i];
                        let fm = om * rz - gm * rm;
                        let fp = od * rz - gp * rp;
                        let fz = -self.gamma_par * (rz - sigma) - 0.5 * (om * rp + od * rm);
                        rm += d_tau * fm;
                        rp += d_tau * fp;
                        rz += d_tau * fz;
                    }
                }
                if cell_noise.is_some() {
                    rm += dm;
                    rp += dp;
                    rz += dz_inc;
                }
                atoms.r_minus[[b, i + 1]] = rm;
                atoms.r_plus[[b, i + 1]] = rp;
                atoms.r_z[[b, i + 1]] = rz;
            }
        }
        (max_ns, finite)
    }
}
