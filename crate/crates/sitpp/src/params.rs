//! Physical parameters of the medium and the rates derived from them.
//!
//! Everything is expressed in "soliton units": the time unit is the inverse
//! width `1/A` of the reference input pulse, the speed of light is 1, and z is
//! measured in light-travel units. All rates (`gamma0`, `kappa`, band
//! detunings, ...) are therefore dimensionless multiples of `A`. A config may
//! record a `z_unit_meters` annotation to map positions back to lab units; the
//! dynamics never use it.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SitError};

/// Speed of light in normalized units.
pub const C_LIGHT: f64 = 1.0;

/// Medium and pulse parameters, before any rates are derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Spontaneous emission rate of a single atom.
    pub gamma0: f64,
    /// Carrier (transition) angular frequency. Only used as the reference for
    /// detunings, Doppler widths, and the `beta = h_bar omega0 / k_B T` bookkeeping.
    pub omega0: f64,
    /// Inverse temperature of the field bath, `h_bar omega0 / k_B T`.
    /// `None` means zero temperature (no thermal photons).
    #[serde(default)]
    pub beta_field: Option<f64>,
    /// Inverse temperature of the atomic bath. `None` means zero temperature.
    #[serde(default)]
    pub beta_atom: Option<f64>,
    /// Background (non-resonant) field power absorption rate.
    pub kappa: f64,
    /// Collective atom-field coupling constant `G = V g^2 / c`.
    pub coupling: f64,
    /// Linear atom density (atoms per unit length). May be omitted in configs,
    /// in which case it is resolved as `n_cell / d_z` when the run grid is known.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Detuning of the pulse carrier from the atomic line center.
    pub delta: f64,
    /// Inverse temporal width of the reference sech pulse (the `A` in
    /// `2 A sech(A tau)`); 1.0 in soliton units.
    pub inv_width: f64,
    /// Medium length.
    pub length: f64,
    /// Atoms per z-cell of the run grid. Sets the atomic shot-noise scale.
    /// Either this or `rho` may be omitted; the other fills it in via
    /// `rho * d_z = n_cell` once the run grid is known.
    #[serde(default)]
    pub n_cell: Option<f64>,
    /// Quantization mode volume for the per-atom coupling `g^2 = G c / V`.
    /// Defaults to `length` (the mode fills the medium).
    #[serde(default)]
    pub mode_volume: Option<f64>,
    /// Meters per normalized z unit, recorded so output tables can annotate
    /// positions in lab units. Purely bookkeeping; no physics reads it.
    #[serde(default)]
    pub z_unit: Option<f64>,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            gamma0: 0.0,
            omega0: 100.0,
            beta_field: None,
            beta_atom: None,
            kappa: 0.0,
            coupling: 2.5e-5,
            rho: None,
            delta: 0.0,
            inv_width: 1.0,
            length: 20.0,
            n_cell: Some(1000.0),
            mode_volume: None,
            z_unit: None,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(SitError::config(msg.to_string()))
            }
        };
        check(self.gamma0.is_finite() && self.gamma0 >= 0.0, "gamma0 must be >= 0")?;
        check(self.omega0.is_finite() && self.omega0 > 0.0, "omega0 must be > 0")?;
        check(self.kappa.is_finite() && self.kappa >= 0.0, "kappa must be >= 0")?;
        check(self.coupling.is_finite() && self.coupling >= 0.0, "coupling must be >= 0")?;
        check(self.delta.is_finite(), "delta must be finite")?;
        check(self.inv_width.is_finite() && self.inv_width > 0.0, "inv_width must be > 0")?;
        check(self.length.is_finite() && self.length > 0.0, "length must be > 0")?;
        if let Some(n) = self.n_cell {
            check(n.is_finite() && n > 0.0, "n_cell must be > 0 when given")?;
        }
        if let Some(rho) = self.rho {
            check(rho.is_finite() && rho > 0.0, "rho must be > 0 when given")?;
        }
        check(self.n_cell.is_some() || self.rho.is_some(), "give at least one of rho, n_cell")?;
        if let Some(v) = self.mode_volume {
            check(v.is_finite() && v > 0.0, "mode_volume must be > 0 when given")?;
        }
        if let Some(u) = self.z_unit {
            check(u.is_finite() && u > 0.0, "z_unit must be > 0 when given")?;
        }
        for (name, beta) in [("beta_field", self.beta_field), ("beta_atom", self.beta_atom)] {
            if let Some(b) = beta {
                if !(b > 0.0) {
                    return Err(SitError::config(format!("{name} must be > 0 (omit for T = 0)")));
                }
            }
        }
        Ok(())
    }

    /// Fill in whichever of `rho`, `n_cell` is missing from the z-grid (or
    /// cross-check both), so that `rho * d_z = n_cell` holds afterwards.
    pub fn resolve_density(&mut self, d_z: f64) -> Result<()> {
        if !(d_z.is_finite() && d_z > 0.0) {
            return Err(SitError::config("d_z must be > 0 to resolve atom density"));
        }
        match (self.rho, self.n_cell) {
            (None, None) => {
                return Err(SitError::config("give at least one of rho, n_cell"));
            }
            (None, Some(n)) => {
                self.rho = Some(n / d_z);
            }
            (Some(rho), None) => {
                self.n_cell = Some(rho * d_z);
            }
            (Some(rho), Some(n)) => {
                let implied = rho * d_z;
                if (implied - n).abs() > 1e-9 * n.max(1.0) {
                    return Err(SitError::config(format!(
                        "rho and n_cell disagree: rho * d_z = {implied}, n_cell = {n}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn density(&self) -> Result<f64> {
        self.rho
            .ok_or_else(|| SitError::config("atom density not resolved yet (rho unset)"))
    }

    pub fn atoms_per_cell(&self) -> Result<f64> {
        self.n_cell
            .ok_or_else(|| SitError::config("atoms per cell not resolved yet (n_cell unset)"))
    }

    /// Normalize the zero-temperature representation: `beta = inf` becomes `None`.
    pub fn canonicalize(&mut self) {
        if self.beta_field.map_or(false, f64::is_infinite) {
            self.beta_field = None;
        }
        if self.beta_atom.map_or(false, f64::is_infinite) {
            self.beta_atom = None;
        }
    }

    pub fn beta_field_value(&self) -> f64 {
        self.beta_field.unwrap_or(f64::INFINITY)
    }

    pub fn beta_atom_value(&self) -> f64 {
        self.beta_atom.unwrap_or(f64::INFINITY)
    }
}

/// Optional overrides decoupling individual damping rates from `gamma0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateOverrides {
    /// Longitudinal (population) damping rate; default `W12 + W21`.
    #[serde(default)]
    pub gamma_par: Option<f64>,
    /// Pure dephasing rate; default `3 gamma0`.
    #[serde(default)]
    pub gamma_p: Option<f64>,
    /// Transverse (coherence) damping rate; default `gamma_p + gamma_par / 2`.
    #[serde(default)]
    pub gamma_perp: Option<f64>,
}

/// Rates and scales computed once per run from `PhysicalParams`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    /// Thermal photon occupation of the field bath.
    pub n_bar_field: f64,
    /// Thermal occupation of the atomic bath.
    pub n_bar_atom: f64,
    /// Incoherent pump rate (upward), `gamma0 * n_bar_atom`.
    pub w12: f64,
    /// Decay rate (downward), `gamma0 * (1 + n_bar_atom)`.
    pub w21: f64,
    /// Longitudinal damping rate.
    pub gamma_par: f64,
    /// Pure dephasing rate.
    pub gamma_p: f64,
    /// Transverse damping rate.
    pub gamma_perp: f64,
    /// Steady-state inversion `(W12 - W21) / (W12 + W21)`, in `[-1, 0]`.
    pub sigma_ss: f64,
    /// Soliton group velocity from `1/v = 1/c + G rho / (2 (A^2 + delta^2))`.
    pub v_g: f64,
    /// Per-atom coupling `g^2 = G c / V` used in the squeezing normalization.
    pub g_squared: f64,
}

/// Thermal occupation `1 / (e^beta - 1)`.
///
/// Accepts `beta = +inf` (returns exactly 0). Uses `expm1`, so the small-beta
/// limit `1/beta` and the large-beta tail `e^-beta` both come out accurate.
pub fn thermal_occupation(beta: f64) -> Result<f64> {
    if beta.is_nan() || beta <= 0.0 {
        return Err(SitError::config(format!(
            "inverse temperature must be > 0, got {beta}"
        )));
    }
    Ok(1.0 / beta.exp_m1())
}

/// Group velocity of a sech pulse with inverse width `a` and detuning `delta`
/// in a medium with collective coupling density `g_rho = G * rho`.
pub fn group_velocity(g_rho: f64, a: f64, delta: f64) -> f64 {
    1.0 / (1.0 / C_LIGHT + 0.5 * g_rho / (a * a + delta * delta))
}

/// Per-atom dipole coupling from the spontaneous emission rate:
/// `g^2 = 3 gamma0 c lambda0^2 / (4 V)`, and the collective constant
/// `G = V g^2 / c = 3 gamma0 lambda0^2 / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoupling {
    pub g_squared: f64,
    pub collective: f64,
}

pub fn dipole_coupling(gamma0: f64, lambda0: f64, volume: f64) -> Result<DipoleCoupling> {
    if !(gamma0.is_finite() && gamma0 >= 0.0) {
        return Err(SitError::config("gamma0 must be >= 0"));
    }
    if !(lambda0.is_finite() && lambda0 > 0.0) || !(volume.is_finite() && volume > 0.0) {
        return Err(SitError::config("lambda0 and volume must be > 0"));
    }
    let g_squared = 3.0 * gamma0 * C_LIGHT * lambda0 * lambda0 / (4.0 * volume);
    Ok(DipoleCoupling {
        g_squared,
        collective: volume * g_squared / C_LIGHT,
    })
}

/// Compute every rate the integrator and the estimators need.
///
/// With no overrides: `W21 = gamma0 (1 + n_bar)`, `W12 = gamma0 n_bar`,
/// `gamma_par = W12 + W21`, `gamma_p = 3 gamma0`,
/// `gamma_perp = gamma_p + gamma_par / 2`. An overridden `gamma_par` keeps the
/// thermal branching ratio, so `W12 + W21 = gamma_par` still holds.
pub fn derive_rates(params: &PhysicalParams, overrides: &RateOverrides) -> Result<DerivedRates> {
    params.validate()?;
    let n_bar_field = thermal_occupation(params.beta_field_value())?;
    let n_bar_atom = thermal_occupation(params.beta_atom_value())?;

    let (w12, w21, gamma_par) = match overrides.gamma_par {
        None => {
            let w21 = params.gamma0 * (1.0 + n_bar_atom);
            let w12 = params.gamma0 * n_bar_atom;
            (w12, w21, w12 + w21)
        }
        Some(g_par) => {
            if !(g_par.is_finite() && g_par >= 0.0) {
                return Err(SitError::config("gamma_par override must be >= 0"));
            }
            let denom = 1.0 + 2.0 * n_bar_atom;
            (g_par * n_bar_atom / denom, g_par * (1.0 + n_bar_atom) / denom, g_par)
        }
    };

    let gamma_p = match overrides.gamma_p {
        None => 3.0 * params.gamma0,
        Some(g) if g.is_finite() && g >= 0.0 => g,
        Some(_) => return Err(SitError::config("gamma_p override must be >= 0")),
    };
    let gamma_perp = match overrides.gamma_perp {
        None => gamma_p + 0.5 * gamma_par,
        Some(g) if g.is_finite() && g >= 0.0 => g,
        Some(_) => return Err(SitError::config("gamma_perp override must be >= 0")),
    };

    let sigma_ss = if w12 + w21 > 0.0 {
        (w12 - w21) / (w12 + w21)
    } else {
        // No relaxation at all: the value only multiplies gamma_par = 0 terms;
        // report the zero-temperature limit.
        -1.0
    };

    let g_rho = params.coupling * params.density()?;

    Ok(DerivedRates {
        n_bar_field,
        n_bar_atom,
        w12,
        w21,
        gamma_par,
        gamma_p,
        gamma_perp,
        sigma_ss,
        v_g: group_velocity(g_rho, params.inv_width, params.delta),
        g_squared: params.coupling * C_LIGHT / params.mode_volume.unwrap_or(params.length),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_occupation_limits() {
        assert_eq!(thermal_occupation(f64::INFINITY).unwrap(), 0.0);
        // beta = ln 2 puts exactly one thermal photon in the mode.
        assert_relative_eq!(
            thermal_occupation(std::f64::consts::LN_2).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert!(thermal_occupation(0.0).is_err());
        assert!(thermal_occupation(-1.0).is_err());
        assert!(thermal_occupation(f64::NAN).is_err());
    }

    #[test]
    fn thermal_occupation_matches_low_temperature_series() {
        // n_bar = e^-beta / (1 - e^-beta) = e^-beta (1 + e^-beta + ...); for
        // moderate beta the leading term must agree to the next-order term.
        for beta in [20.0, 30.0, 50.0, 100.0, 700.0] {
            let n = thermal_occupation(beta).unwrap();
            let leading = (-beta).exp();
            assert_relative_eq!(n, leading, max_relative = 2.0 * leading + 1e-12);
        }
        // Deep cryogenic regime: both the formula and the series underflow to
        // exactly zero, far below the smallest subnormal.
        let beta = 4.0e7;
        assert_eq!(thermal_occupation(beta).unwrap(), 0.0);
        assert_eq!((-beta).exp(), 0.0);
    }

    #[test]
    fn thermal_occupation_high_temperature_limit() {
        // Small beta: n_bar -> 1/beta.
        let beta = 1e-8;
        assert_relative_eq!(thermal_occupation(beta).unwrap(), 1.0 / beta, max_relative = 1e-6);
    }

    fn base_params() -> PhysicalParams {
        PhysicalParams {
            gamma0: 0.1,
            rho: Some(1000.0),
            ..PhysicalParams::default()
        }
    }

    #[test]
    fn zero_temperature_rates() {
        let rates = derive_rates(&base_params(), &RateOverrides::default()).unwrap();
        assert_eq!(rates.w21, 0.1);
        assert_eq!(rates.w12, 0.0);
        assert_eq!(rates.gamma_par, 0.1);
        assert_relative_eq!(rates.gamma_p, 0.3, max_relative = 1e-15);
        assert_relative_eq!(rates.gamma_perp, 0.35, max_relative = 1e-15);
        assert_eq!(rates.sigma_ss, -1.0);
    }

    #[test]
    fn infinite_temperature_inversion_vanishes() {
        let mut p = base_params();
        p.beta_atom = Some(1e-9); // n_bar ~ 1e9: W12 -> W21
        let rates = derive_rates(&p, &RateOverrides::default()).unwrap();
        assert!(rates.sigma_ss.abs() < 1e-8, "sigma_ss = {}", rates.sigma_ss);
        assert!(rates.sigma_ss <= 0.0);
    }

    #[test]
    fn sigma_ss_stays_in_range() {
        for beta in [0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 1e4] {
            let mut p = base_params();
            p.beta_atom = Some(beta);
            let r = derive_rates(&p, &RateOverrides::default()).unwrap();
            assert!((-1.0..=0.0).contains(&r.sigma_ss), "beta={beta}: {}", r.sigma_ss);
            assert_relative_eq!(r.w12 + r.w21, r.gamma_par, max_relative = 1e-12);
        }
    }

    #[test]
    fn gamma_par_override_keeps_branching_ratio() {
        for beta in [0.3, 1.0, 7.0] {
            let mut p = base_params();
            p.beta_atom = Some(beta);
            let over = RateOverrides { gamma_par: Some(1e-6), ..Default::default() };
            let r = derive_rates(&p, &over).unwrap();
            assert_relative_eq!(r.w12 + r.w21, 1e-6, max_relative = 1e-12);
            let free = derive_rates(&p, &RateOverrides::default()).unwrap();
            assert_relative_eq!(r.sigma_ss, free.sigma_ss, max_relative = 1e-12);
        }
    }

    #[test]
    fn group_velocity_limits_and_monotonicity() {
        assert_eq!(group_velocity(0.0, 1.0, 0.0), C_LIGHT);
        let mut prev = group_velocity(0.0, 1.0, 0.0);
        for k in 1..50 {
            let v = group_velocity(0.05 * k as f64, 1.0, 0.0);
            assert!(v < prev, "v_g must decrease with coupling density");
            prev = v;
        }
        // Wider-bandwidth (larger a) or detuned pulses travel faster.
        let mut prev = group_velocity(1.0, 0.2, 0.0);
        for k in 1..40 {
            let v = group_velocity(1.0, 0.2 + 0.1 * k as f64, 0.0);
            assert!(v > prev);
            prev = v;
        }
        let on = group_velocity(1.0, 1.0, 0.0);
        let off = group_velocity(1.0, 1.0, 2.0);
        assert!(off > on);
    }

    #[test]
    fn group_velocity_value() {
        // g_rho = 1, a = 1, delta = 0: 1/v = 1 + 1/2 -> v = 2/3.
        assert_relative_eq!(group_velocity(1.0, 1.0, 0.0), 2.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn dipole_coupling_values() {
        // Hand arithmetic: 3 * 0.1 * 2^2 / (4 * 4) = 0.075; G = 4 * 0.075 = 0.3.
        let d = dipole_coupling(0.1, 2.0, 4.0).unwrap();
        assert_relative_eq!(d.g_squared, 0.075, max_relative = 1e-15);
        assert_relative_eq!(d.collective, 0.3, max_relative = 1e-15);

        // g^2 scales as 1/V at fixed G.
        let half = dipole_coupling(0.1, 2.0, 8.0).unwrap();
        assert_relative_eq!(half.g_squared, 0.075 / 2.0, max_relative = 1e-15);
        assert_relative_eq!(half.collective, 0.3, max_relative = 1e-15);

        assert_eq!(dipole_coupling(0.0, 2.0, 4.0).unwrap().g_squared, 0.0);
        assert!(dipole_coupling(0.1, 0.0, 4.0).is_err());
        assert!(dipole_coupling(0.1, 2.0, -1.0).is_err());
    }

    #[test]
    fn derive_rates_is_pure() {
        let p = base_params();
        let a = derive_rates(&p, &RateOverrides::default()).unwrap();
        let b = derive_rates(&p, &RateOverrides::default()).unwrap();
        // Bit-identical, not just approximately equal.
        assert_eq!(a.v_g.to_bits(), b.v_g.to_bits());
        assert_eq!(a.gamma_perp.to_bits(), b.gamma_perp.to_bits());
        assert_eq!(a.sigma_ss.to_bits(), b.sigma_ss.to_bits());
    }

    #[test]
    fn density_resolution() {
        let mut p = PhysicalParams {
            rho: None,
            n_cell: Some(1000.0),
            ..PhysicalParams::default()
        };
        p.resolve_density(0.05).unwrap();
        assert_relative_eq!(p.density().unwrap(), 20000.0, max_relative = 1e-15);

        let mut q = PhysicalParams {
            rho: Some(20000.0),
            n_cell: None,
            ..PhysicalParams::default()
        };
        q.resolve_density(0.05).unwrap();
        assert_relative_eq!(q.atoms_per_cell().unwrap(), 1000.0, max_relative = 1e-15);

        let mut consistent = PhysicalParams {
            rho: Some(20000.0),
            n_cell: Some(1000.0),
            ..PhysicalParams::default()
        };
        consistent.resolve_density(0.05).unwrap();

        let mut bad = PhysicalParams {
            rho: Some(999.0),
            n_cell: Some(1000.0),
            ..PhysicalParams::default()
        };
        assert!(bad.resolve_density(0.05).is_err());

        let mut neither = PhysicalParams { rho: None, n_cell: None, ..PhysicalParams::default() };
        assert!(neither.validate().is_err());
        assert!(neither.resolve_density(0.05).is_err());
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let mut p = base_params();
        p.gamma0 = -1.0;
        assert!(p.validate().is_err());
        let mut p = base_params();
        p.inv_width = 0.0;
        assert!(p.validate().is_err());
        let mut p = base_params();
        p.beta_field = Some(-2.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn canonicalize_folds_infinite_beta() {
        let mut p = base_params();
        p.beta_field = Some(f64::INFINITY);
        p.canonicalize();
        assert_eq!(p.beta_field, None);
    }
}
