//! Run description and trajectory-ensemble execution.
//!
//! A [`RunConfig`] is the complete, serializable description of one
//! experiment: physical parameters, rate overrides, grids, line
//! discretization, input pulse, and execution knobs. [`run_ensemble`]
//! propagates `n_traj` independent trajectories (in parallel, deterministic
//! for any worker count: trajectory seeds depend only on `(master_seed,
//! index)` and the reduction runs in index order) and distills the
//! checkpoint statistics.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SitError};
use crate::field::{FieldState, TauGrid};
use crate::integrator::{
    IntegratorOptions, Propagator, StepScheme, TrajectoryOutcome,
};
use crate::medium::{FrequencyGrid, Lineshape, LineshapeKind, QuadratureRule};
use crate::noise::NoiseToggles;
use crate::observables;
use crate::params::{derive_rates, DerivedRates, PhysicalParams, RateOverrides};

/// Retarded-time and propagation grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_tau: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_z: usize,
    pub d_z: f64,
    /// z spacing of recorded checkpoints (0: record only the ends).
    pub checkpoint_interval: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n_tau: 1921,
            tau_min: -18.0,
            tau_max: 30.0,
            n_z: 400,
            d_z: 0.05,
            checkpoint_interval: 1.0,
        }
    }
}

/// Atomic line discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LineConfig {
    #[serde(flatten)]
    pub kind: LineshapeKind,
    /// Line center; defaults to the transition frequency.
    pub center: Option<f64>,
    pub n_bands: usize,
    /// Truncation of broadened lines, in units of the width parameter.
    pub cutoff: f64,
    pub quadrature: QuadratureRule,
}

impl Default for LineConfig {
    fn default() -> Self {
        LineConfig {
            kind: LineshapeKind::SharpLine,
            center: None,
            n_bands: 1,
            cutoff: 6.0,
            quadrature: QuadratureRule::GaussLegendre,
        }
    }
}

/// Input pulse: a sech envelope rescaled to the requested area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    /// Initial pulse area in units of pi.
    pub area_pi: f64,
    /// Envelope center on the tau window.
    pub tau0: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig { area_pi: 2.0, tau0: 0.0 }
    }
}

/// Execution knobs of the stochastic ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub master_seed: u64,
    /// Worker threads (0: library default). Results are identical for any
    /// value.
    pub workers: usize,
    pub scheme: StepScheme,
    pub toggles: NoiseToggles,
    pub noise_scale: f64,
    pub symmetrize_coupling: bool,
    pub vg_frame: bool,
    pub rz0: f64,
    pub store_fields: bool,
    pub divergence_threshold: f64,
    /// Drop diverged trajectories from every checkpoint. Off by default: a
    /// trajectory that diverges still contributes its finite checkpoints, and
    /// the per-checkpoint sample count shrinks as trajectories drop out, so
    /// divergence stays visible instead of silently biasing the estimator.
    pub exclude_diverged: bool,
    /// Bootstrap resamples behind each quoted standard error.
    pub n_boot: usize,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_traj: 400,
            master_seed: 7,
            workers: 0,
            scheme: StepScheme::default(),
            toggles: NoiseToggles::all_on(),
            noise_scale: 1.0,
            symmetrize_coupling: false,
            vg_frame: false,
            rz0: -0.5,
            store_fields: false,
            divergence_threshold: 1e6,
            exclude_diverged: false,
            n_boot: 200,
        }
    }
}

/// The full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub rates: RateOverrides,
    pub grid: GridConfig,
    pub line: LineConfig,
    pub pulse: PulseConfig,
    pub run: EnsembleConfig,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let g = &self.grid;
        if g.n_tau < 2 {
            return Err(SitError::config("n_tau must be >= 2"));
        }
        if !(g.tau_max > g.tau_min) {
            return Err(SitError::config("tau_max must exceed tau_min"));
        }
        if g.n_z == 0 || !(g.d_z.is_finite() && g.d_z > 0.0) {
            return Err(SitError::config("n_z >= 1 and d_z > 0 required"));
        }
        if !(g.checkpoint_interval.is_finite() && g.checkpoint_interval >= 0.0) {
            return Err(SitError::config("checkpoint_interval must be >= 0"));
        }
        let l = g.n_z as f64 * g.d_z;
        if (l - self.params.length).abs() > 1e-9 * self.params.length {
            return Err(SitError::config(format!(
                "n_z * d_z = {l} disagrees with params.length = {}",
                self.params.length
            )));
        }
        if self.line.n_bands == 0 {
            return Err(SitError::config("n_bands must be >= 1"));
        }
        if self.line.kind != LineshapeKind::SharpLine && !(self.line.cutoff > 0.0) {
            return Err(SitError::config("cutoff must be > 0 for a broadened line"));
        }
        if !(self.pulse.area_pi.is_finite() && self.pulse.area_pi > 0.0) {
            return Err(SitError::config("area_pi must be > 0"));
        }
        let r = &self.run;
        if r.n_traj == 0 {
            return Err(SitError::config("n_traj must be >= 1"));
        }
        if r.n_boot < 2 {
            return Err(SitError::config("n_boot must be >= 2"));
        }
        if !r.noise_scale.is_finite() {
            return Err(SitError::config("noise_scale must be finite"));
        }
        if !(r.rz0.is_finite() && r.rz0.abs() <= 1.0) {
            return Err(SitError::config("rz0 must lie in [-1, 1]"));
        }
        if !(r.divergence_threshold > 0.0) {
            return Err(SitError::config("divergence_threshold must be > 0"));
        }
        Ok(())
    }

    /// Resolve the derived quantities and assemble the propagator and input
    /// pulse.
    pub fn build(&self) -> Result<BuiltRun> {
        self.validate()?;
        let mut params = self.params.clone();
        params.canonicalize();
        params.resolve_density(self.grid.d_z)?;
        let rates = derive_rates(&params, &self.rates)?;
        let grid = TauGrid::new(self.grid.n_tau, self.grid.tau_min, self.grid.tau_max)?;
        let shape = Lineshape {
            kind: self.line.kind,
            center: self.line.center.unwrap_or(params.omega0),
        };
        let freq = FrequencyGrid::discretize(&shape, self.line.n_bands, self.line.cutoff,
            self.line.quadrature)?;
        let stride = if self.grid.checkpoint_interval <= 0.0 {
            0
        } else {
            (self.grid.checkpoint_interval / self.grid.d_z).round().max(1.0) as usize
        };
        let opts = IntegratorOptions {
            scheme: self.run.scheme,
            n_z: self.grid.n_z,
            d_z: self.grid.d_z,
            rz0: self.run.rz0,
            toggles: self.run.toggles,
            noise_scale: self.run.noise_scale,
            symmetrize_coupling: self.run.symmetrize_coupling,
            vg_frame: self.run.vg_frame,
            checkpoint_stride: stride,
            store_fields: self.run.store_fields,
            divergence_threshold: self.run.divergence_threshold,
        };
        let propagator = Propagator::new(&params, &rates, grid.clone(), freq, &opts)?;
        let g_rho = params.coupling * params.density()?;
        let mut input = FieldState::sech_soliton(&grid, params.inv_width, self.pulse.tau0,
            params.delta, g_rho, 0.0)?;
        input.scale_to_area(self.pulse.area_pi * std::f64::consts::PI, &grid)?;
        let stiffness = grid.d_tau() * rates.gamma_perp.max(input.peak());
        if stiffness >= 0.1 {
            return Err(SitError::config(format!(
                "tau step too coarse: d_tau * max(gamma_perp, peak) = {stiffness:.4} \
                 (must stay below 0.1); refine n_tau or shrink the pulse"
            )));
        }
        Ok(BuiltRun { propagator, input, rates, params, grid })
    }
}

/// A validated, resolved run ready to propagate trajectories.
#[derive(Debug)]
pub struct BuiltRun {
    pub propagator: Propagator,
    pub input: FieldState,
    pub rates: DerivedRates,
    pub params: PhysicalParams,
    pub grid: TauGrid,
}

/// Ensemble statistics at one checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub z: f64,
    pub n_samples: usize,
    pub mean_area: Complex64,
    pub mean_energy: Complex64,
    pub var_energy: Complex64,
    pub mean_excitation: Complex64,
    pub mean_peak: f64,
    pub squeezing: f64,
    pub squeezing_db: Option<f64>,
    pub squeezing_stderr: f64,
}

/// Everything an ensemble run produced.
#[derive(Debug, Clone)]
pub struct EnsembleOutput {
    pub checkpoints: Vec<CheckpointStats>,
    /// Raw complex pulse-energy samples per checkpoint, for histograms and
    /// re-estimation. Includes every trajectory still finite at that z
    /// (or only never-diverged ones under `exclude_diverged`).
    pub energies: Vec<Vec<Complex64>>,
    /// Ensemble-mean field per checkpoint when `store_fields` is on.
    pub mean_fields: Option<Vec<FieldState>>,
    pub n_traj: usize,
    pub n_completed: usize,
    pub n_diverged: usize,
    /// z positions where trajectories diverged.
    pub diverged_at: Vec<f64>,
    pub branch_flips: u64,
    /// Best squeezing ratio over z > 0 and where it occurs.
    pub s_opt: f64,
    pub s_opt_db: Option<f64>,
    pub z_opt: f64,
    /// Energy-loss fraction between input and output.
    pub absorption: f64,
}

/// Propagate the ensemble described by `config`.
pub fn run_ensemble(config: &RunConfig) -> Result<EnsembleOutput> {
    let built = config.build()?;
    let seed = config.run.master_seed;
    let n_traj = config.run.n_traj;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.workers)
        .build()
        .map_err(|e| SitError::config(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<TrajectoryOutcome> = pool.install(|| {
        (0..n_traj)
            .into_par_iter()
            .map(|t| built.propagator.propagate(&built.input, seed, t as u64))
            .collect::<Result<Vec<_>>>()
    })?;

    summarize(config, &built, &outcomes)
}

fn summarize(
    config: &RunConfig,
    built: &BuiltRun,
    outcomes: &[TrajectoryOutcome],
) -> Result<EnsembleOutput> {
    let n_traj = outcomes.len();
    let n_completed = outcomes.iter().filter(|o| !o.diverged()).count();
    let diverged_at: Vec<f64> = outcomes.iter().filter_map(|o| o.diverged_at).collect();
    let branch_flips: u64 = outcomes.iter().map(|o| o.branch_flips).sum();
    let exclude = config.run.exclude_diverged;
    if exclude && n_completed == 0 {
        return Err(SitError::numerics(format!(
            "all {n_traj} trajectories diverged; nothing to average"
        )));
    }
    let n_checkpoints = outcomes.iter().map(|o| o.snapshots.len()).max().unwrap_or(0);
    let length = built.params.length;
    let v_g = built.rates.v_g;
    let g2 = built.rates.g_squared;
    let seed = config.run.master_seed;

    let mut checkpoints = Vec::with_capacity(n_checkpoints);
    let mut energies = Vec::with_capacity(n_checkpoints);
    let mut mean_fields = config.run.store_fields.then(Vec::new);
    for k in 0..n_checkpoints {
        let snaps: Vec<_> = outcomes
            .iter()
            .filter(|o| (!exclude || !o.diverged()) && o.snapshots.len() > k)
            .map(|o| &o.snapshots[k])
            .collect();
        if snaps.is_empty() {
            break;
        }
        let z = snaps[0].z;
        let m: Vec<Complex64> = snaps.iter().map(|s| s.energy).collect();
        let areas: Vec<Complex64> = snaps.iter().map(|s| s.area).collect();
        let excitations: Vec<Complex64> = snaps.iter().map(|s| s.excitation).collect();
        let mean_peak = snaps.iter().map(|s| s.peak).sum::<f64>() / snaps.len() as f64;
        let squeezing = observables::squeezing_ratio(&m, v_g, g2, length)?;
        let squeezing_stderr = observables::bootstrap_stderr(&m, seed, k as u64,
            config.run.n_boot, |xs| {
                observables::squeezing_ratio(xs, v_g, g2, length).unwrap_or(f64::NAN)
            })?;
        if let Some(fields) = mean_fields.as_mut() {
            fields.push(average_field(&snaps, built.grid.n_tau, z)?);
        }
        checkpoints.push(CheckpointStats {
            z,
            n_samples: snaps.len(),
            mean_area: observables::mean_complex(&areas),
            mean_energy: observables::mean_complex(&m),
            var_energy: observables::population_variance(&m),
            mean_excitation: observables::mean_complex(&excitations),
            mean_peak,
            squeezing,
            squeezing_db: observables::squeezing_db(squeezing),
            squeezing_stderr,
        });
        energies.push(m);
    }
    if checkpoints.len() < 2 {
        return Err(SitError::numerics(format!(
            "ensemble lost all {n_traj} trajectories before the first checkpoint past the input"
        )));
    }

    let (mut s_opt, mut z_opt) = (1.0, 0.0);
    for c in checkpoints.iter().skip(1) {
        if c.squeezing < s_opt {
            s_opt = c.squeezing;
            z_opt = c.z;
        }
    }
    let absorption = observables::absorption(
        checkpoints.first().unwrap().mean_energy.re,
        checkpoints.last().unwrap().mean_energy.re,
    )?;

    Ok(EnsembleOutput {
        checkpoints,
        energies,
        mean_fields,
        n_traj,
        n_completed,
        n_diverged: diverged_at.len(),
        diverged_at,
        branch_flips,
        s_opt,
        s_opt_db: observables::squeezing_db(s_opt),
        z_opt,
        absorption,
    })
}

fn average_field(
    snaps: &[&crate::integrator::TrajectorySnapshot],
    n_tau: usize,
    z: f64,
) -> Result<FieldState> {
    let mut omega = ndarray::Array1::from_elem(n_tau, Complex64::new(0.0, 0.0));
    let mut omega_dag = omega.clone();
    let mut count = 0.0;
    for s in snaps {
        let f = s.field.as_ref().ok_or_else(|| {
            SitError::numerics("store_fields set but a snapshot carries no field")
        })?;
        for i in 0..n_tau {
            omega[i] += f.omega[i];
            omega_dag[i] += f.omega_dag[i];
        }
        count += 1.0;
    }
    omega.mapv_inplace(|c| c / count);
    omega_dag.mapv_inplace(|c| c / count);
    Ok(FieldState { omega, omega_dag, z })
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Input pulse area, in units of pi.
    PulseArea,
    /// Population-damping rate override.
    GammaPar,
    /// Inverse bath temperature, applied to both field and atom baths.
    BathBeta,
    /// Spontaneous-emission rate.
    Gamma0,
}

impl SweepAxis {
    /// Stable name used in CSV headers and file names.
    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::PulseArea => "pulse_area",
            SweepAxis::GammaPar => "gamma_par",
            SweepAxis::BathBeta => "bath_beta",
            SweepAxis::Gamma0 => "gamma0",
        }
    }
}

/// Set one sweep-axis value on a run description.
pub fn apply_axis(config: &mut RunConfig, axis: SweepAxis, value: f64) {
    match axis {
        SweepAxis::PulseArea => config.pulse.area_pi = value,
        SweepAxis::GammaPar => config.rates.gamma_par = Some(value),
        SweepAxis::BathBeta => {
            config.params.beta_field = Some(value);
            config.params.beta_atom = Some(value);
        }
        SweepAxis::Gamma0 => config.params.gamma0 = value,
    }
}

/// One sweep point and its full ensemble output.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: f64,
    pub output: EnsembleOutput,
}

/// Run the ensemble once per axis value. The master seed is shared across
/// points (common random numbers), which smooths the sweep curves.
pub fn run_sweep(base: &RunConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepPoint>> {
    if values.is_empty() {
        return Err(SitError::config("sweep needs at least one value"));
    }
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let mut config = base.clone();
        apply_axis(&mut config, axis, value);
        let output = run_ensemble(&config).map_err(|e| match e {
            SitError::Config(m) => SitError::Config(format!("sweep value {value}: {m}")),
            SitError::Numerics(m) => SitError::Numerics(format!("sweep value {value}: {m}")),
            other => other,
        })?;
        points.push(SweepPoint { value, output });
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// A small, fast stochastic configuration used across the tests.
    fn small_config() -> RunConfig {
        let mut cfg = RunConfig::default();
        cfg.params = PhysicalParams {
            gamma0: 1e-3,
            kappa: 0.1,
            beta_field: Some(1.0),
            beta_atom: Some(1.0),
            rho: Some(2000.0),
            n_cell: None,
            length: 1.0,
            ..PhysicalParams::default()
        };
        cfg.grid = GridConfig {
            n_tau: 601,
            tau_min: -12.0,
            tau_max: 12.0,
            n_z: 20,
            d_z: 0.05,
            checkpoint_interval: 0.5,
        };
        cfg.run.n_traj = 8;
        cfg.run.n_boot = 20;
        cfg
    }

    #[test]
    fn toml_and_json_round_trip() {
        let cfg = small_config();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<RunConfig>("[pulse]\nareapi = 2.0\n");
        assert!(err.is_err());
    }

    #[test]
    fn validation_cross_checks_length() {
        let mut cfg = small_config();
        cfg.params.length = 2.0; // grid still implies 1.0
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.run.rz0 = -2.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn deterministic_ensemble_is_degenerate() {
        let mut cfg = small_config();
        cfg.run.toggles = NoiseToggles::all_off();
        cfg.run.n_traj = 3;
        let out = run_ensemble(&cfg).unwrap();
        assert_eq!(out.n_completed, 3);
        assert_eq!(out.n_diverged, 0);
        for (k, stats) in out.checkpoints.iter().enumerate() {
            let m = &out.energies[k];
            assert_eq!(m[0], m[1]);
            assert_eq!(m[1], m[2]);
            // With n = 3 the mean rounds one ulp off the common value, so the
            // centered variance is ulp^2 rather than a hard zero.
            assert!(stats.var_energy.norm() < 1e-24, "var = {:?}", stats.var_energy);
            assert_eq!(stats.squeezing, 1.0);
        }
    }

    #[test]
    fn coherent_input_has_unity_ratio_at_z_zero() {
        let mut cfg = small_config();
        cfg.run.n_traj = 50;
        let out = run_ensemble(&cfg).unwrap();
        let first = &out.checkpoints[0];
        assert_eq!(first.z, 0.0);
        assert!(first.var_energy.norm() < 1e-24, "var = {:?}", first.var_energy);
        assert_eq!(first.squeezing, 1.0);
        // Later checkpoints have picked up spread.
        assert!(out.checkpoints.last().unwrap().var_energy.norm() > 0.0);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut one = small_config();
        one.run.workers = 1;
        let mut four = small_config();
        four.run.workers = 4;
        let a = run_ensemble(&one).unwrap();
        let b = run_ensemble(&four).unwrap();
        assert_eq!(a.energies, b.energies);
        assert_eq!(a.branch_flips, b.branch_flips);
        assert_eq!(
            a.checkpoints.last().unwrap().squeezing.to_bits(),
            b.checkpoints.last().unwrap().squeezing.to_bits()
        );
    }

    #[test]
    fn fully_diverged_ensembles_truncate_or_error() {
        let mut cfg = small_config();
        cfg.run.toggles = NoiseToggles::all_off();
        cfg.run.rz0 = 0.5; // inverted: gain
        cfg.run.divergence_threshold = 2.5;
        cfg.params.rho = Some(40000.0);
        cfg.params.length = 20.0;
        cfg.grid.n_z = 400;
        // Default estimator keeps the finite prefix of every trajectory.
        let out = run_ensemble(&cfg).unwrap();
        assert_eq!(out.n_completed, 0);
        assert_eq!(out.n_diverged, out.n_traj);
        let last = out.checkpoints.last().unwrap();
        assert!(last.z < cfg.params.length);
        assert!(last.z < out.diverged_at[0] + 1e-12);
        // Whole-trajectory exclusion has nothing left to average.
        cfg.run.exclude_diverged = true;
        let err = run_ensemble(&cfg).unwrap_err();
        assert!(matches!(err, SitError::Numerics(_)), "{err}");
    }

    #[test]
    fn divergence_accounting_adds_up() {
        // Crank the noise until some (deterministically seeded) trajectories
        // cross the threshold; completed + diverged must equal n_traj.
        let mut cfg = small_config();
        cfg.run.noise_scale = 12.0;
        cfg.run.divergence_threshold = 25.0;
        cfg.run.n_traj = 16;
        let out = run_ensemble(&cfg).unwrap();
        assert_eq!(out.n_completed + out.n_diverged, out.n_traj);
        assert_eq!(out.diverged_at.len(), out.n_diverged);
        assert!(out.n_diverged >= 2, "expected divergence at this noise level");
        assert!(out.n_completed >= 2, "expected survivors at this noise level");
        for &z in &out.diverged_at {
            assert!(z > 0.0 && z <= 1.0 + 1e-12);
        }
        // Default estimator: a trajectory contributes until it diverges, so
        // the sample count at z is n_traj minus the trajectories lost by z.
        for c in &out.checkpoints {
            let lost = out.diverged_at.iter().filter(|&&z| z <= c.z).count();
            assert_eq!(c.n_samples, out.n_traj - lost, "at z = {}", c.z);
        }
        assert_eq!(out.checkpoints.first().unwrap().n_samples, out.n_traj);
        assert_eq!(out.checkpoints.last().unwrap().n_samples, out.n_completed);
    }

    #[test]
    fn exclusion_flag_narrows_every_checkpoint() {
        let mut cfg = small_config();
        cfg.run.noise_scale = 12.0;
        cfg.run.divergence_threshold = 25.0;
        cfg.run.n_traj = 16;
        cfg.run.exclude_diverged = true;
        let out = run_ensemble(&cfg).unwrap();
        assert!(out.n_diverged >= 2);
        for c in &out.checkpoints {
            assert_eq!(c.n_samples, out.n_completed);
        }
    }

    #[test]
    fn area_sweep_runs_in_order() {
        let mut cfg = small_config();
        cfg.run.toggles = NoiseToggles::all_off();
        cfg.run.n_traj = 1;
        let points = run_sweep(&cfg, SweepAxis::PulseArea, &[1.8, 2.0]).unwrap();
        assert_eq!(points.len(), 2);
        assert_relative_eq!(points[0].value, 1.8, max_relative = 1e-15);
        let a0 = points[0].output.checkpoints[0].mean_area.re;
        let a1 = points[1].output.checkpoints[0].mean_area.re;
        assert_relative_eq!(a0, 1.8 * std::f64::consts::PI, max_relative = 1e-9);
        assert_relative_eq!(a1, 2.0 * std::f64::consts::PI, max_relative = 1e-9);
    }

    #[test]
    fn axis_application() {
        let mut cfg = small_config();
        apply_axis(&mut cfg, SweepAxis::GammaPar, 0.25);
        assert_eq!(cfg.rates.gamma_par, Some(0.25));
        apply_axis(&mut cfg, SweepAxis::BathBeta, 2.5);
        assert_eq!(cfg.params.beta_field, Some(2.5));
        assert_eq!(cfg.params.beta_atom, Some(2.5));
        apply_axis(&mut cfg, SweepAxis::Gamma0, 1e-4);
        assert_relative_eq!(cfg.params.gamma0, 1e-4, max_relative = 1e-15);
    }

    #[test]
    fn mean_fields_come_back_when_requested() {
        let mut cfg = small_config();
        cfg.run.store_fields = true;
        cfg.run.n_traj = 4;
        let out = run_ensemble(&cfg).unwrap();
        let fields = out.mean_fields.as_ref().unwrap();
        assert_eq!(fields.len(), out.checkpoints.len());
        // The z = 0 mean field is the input itself.
        let built = cfg.build().unwrap();
        for i in 0..built.grid.n_tau {
            assert_relative_eq!(fields[0].omega[i].re, built.input.omega[i].re,
                max_relative = 1e-12);
        }
    }
}
