//! Ensemble estimators.
//!
//! Positive-P trajectory averages estimate normally ordered quantum moments,
//! so the pulse-energy samples `M_i` are complex and their population
//! variance can have a negative real part. That is the squeezing signal: the
//! noise ratio of the outgoing pulse energy against the coherent-state level
//! is
//!
//! `S = 1 + v_g Re Var[M] / (4 g^2 L Re <M>)`
//!
//! with the per-atom coupling `g^2` and medium length `L`. A coherent input
//! has a point-like distribution, so `S(0) = 1` identically and `S < 1` along
//! z means amplitude squeezing (`10 log10 S` decibels).

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Result, SitError};
use crate::field::FieldState;
use crate::rng::{stream, Channel, META_TRAJ};

pub fn mean_complex(xs: &[Complex64]) -> Complex64 {
    let n = xs.len().max(1) as f64;
    xs.iter().sum::<Complex64>() / n
}

/// Population variance `mean((x - mean)^2)` of complex samples (divides by
/// n, so duplicating the sample set leaves it unchanged). Centered before
/// squaring; the naive moment difference loses a dozen digits to
/// cancellation when the spread is tiny.
pub fn population_variance(xs: &[Complex64]) -> Complex64 {
    let n = xs.len().max(1) as f64;
    let mean = mean_complex(xs);
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<Complex64>() / n
}

/// Energy-noise ratio of the outgoing pulse relative to the coherent level.
pub fn squeezing_ratio(
    energies: &[Complex64],
    v_g: f64,
    g_squared: f64,
    length: f64,
) -> Result<f64> {
    if energies.is_empty() {
        return Err(SitError::numerics("no samples for the squeezing estimate"));
    }
    if !(g_squared > 0.0 && length > 0.0 && v_g > 0.0) {
        return Err(SitError::config("squeezing needs g_squared, length, v_g > 0"));
    }
    let mean_re = mean_complex(energies).re;
    if !(mean_re > 0.0) {
        return Err(SitError::numerics(format!(
            "mean pulse energy {mean_re:.3e} is not positive; squeezing undefined"
        )));
    }
    let var_re = population_variance(energies).re;
    Ok(1.0 + v_g * var_re / (4.0 * g_squared * length * mean_re))
}

/// `10 log10 S`; None when the estimated ratio is not positive (an ensemble
/// too small for the variance it is measuring).
pub fn squeezing_db(s: f64) -> Option<f64> {
    (s > 0.0).then(|| 10.0 * s.log10())
}

/// Fraction of the input pulse energy lost by z, clipped to [-1e-6, 1] so
/// that roundoff-level gain does not leak out as a negative loss.
pub fn absorption(energy_in: f64, energy_out: f64) -> Result<f64> {
    if !(energy_in > 0.0) {
        return Err(SitError::numerics("input energy must be positive"));
    }
    Ok(((energy_in - energy_out) / energy_in).clamp(-1e-6, 1.0))
}

/// Bootstrap standard error of an arbitrary statistic of the trajectory
/// samples. Resampling uses its own deterministic stream (the reserved
/// meta-trajectory), so the result depends only on `(master_seed, tag)`.
pub fn bootstrap_stderr<F>(
    values: &[Complex64],
    master_seed: u64,
    tag: u64,
    n_boot: usize,
    stat: F,
) -> Result<f64>
where
    F: Fn(&[Complex64]) -> f64,
{
    let n = values.len();
    if n == 0 {
        return Err(SitError::numerics("no samples to bootstrap"));
    }
    if n_boot < 2 {
        return Err(SitError::config("n_boot must be >= 2"));
    }
    let mut rng = stream(master_seed, META_TRAJ, tag, Channel::Bootstrap);
    let mut resample = vec![Complex64::new(0.0, 0.0); n];
    let mut stats = Vec::with_capacity(n_boot);
    for _ in 0..n_boot {
        for slot in resample.iter_mut() {
            *slot = values[rng.gen_range(0..n)];
        }
        stats.push(stat(&resample));
    }
    let mean = stats.iter().sum::<f64>() / n_boot as f64;
    let var = stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n_boot - 1) as f64;
    Ok(var.sqrt())
}

/// Largest pointwise deviation between field `a` at node `i` and field `b` at
/// node `i - shift`, over both phase-space copies. Shifting by whole nodes
/// compares a delayed pulse against its reference without interpolating.
pub fn max_shifted_deviation(a: &FieldState, b: &FieldState, shift: usize) -> Result<f64> {
    let n = a.omega.len();
    if b.omega.len() != n {
        return Err(SitError::config("fields live on different grids"));
    }
    if shift >= n {
        return Err(SitError::config("shift exceeds the window"));
    }
    let mut worst = 0.0f64;
    for i in shift..n {
        worst = worst
            .max((a.omega[i] - b.omega[i - shift]).norm())
            .max((a.omega_dag[i] - b.omega_dag[i - shift]).norm());
    }
    Ok(worst)
}
