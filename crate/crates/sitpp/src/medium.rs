//! Inhomogeneous line discretization and the atomic state arrays.
//!
//! A broadened line is cut off at `cutoff` widths from center and represented
//! by `n_bands` frequency bands with quadrature weights normalized to sum to
//! one. Gauss-Legendre nodes are the default (the band observables converge
//! spectrally in `n_bands`); a plain midpoint rule is available for
//! cross-checks. A sharp line is always a single band at the center frequency.

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SitError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LineshapeKind {
    SharpLine,
    /// Lorentzian with half-width-at-half-maximum `width`.
    Lorentzian { width: f64 },
    /// Gaussian with standard deviation `width`.
    Gaussian { width: f64 },
}

/// A spectral line: shape plus center frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lineshape {
    #[serde(flatten)]
    pub kind: LineshapeKind,
    pub center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    #[default]
    GaussLegendre,
    Midpoint,
}

/// One frequency band: center frequency and normalized weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub omega: f64,
    pub weight: f64,
}

/// The discretized line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub bands: Vec<Band>,
}

impl Lineshape {
    pub fn sharp(center: f64) -> Self {
        Lineshape { kind: LineshapeKind::SharpLine, center }
    }

    /// Normalized density evaluated at `omega` (before truncation).
    fn density(&self, omega: f64) -> f64 {
        let x = omega - self.center;
        match self.kind {
            LineshapeKind::SharpLine => 0.0, // never sampled
            LineshapeKind::Lorentzian { width } => {
                width / (std::f64::consts::PI * (x * x + width * width))
            }
            LineshapeKind::Gaussian { width } => {
                let s2 = 2.0 * width * width;
                (-x * x / s2).exp() / (width * (2.0 * std::f64::consts::PI).sqrt())
            }
        }
    }

    fn width(&self) -> Option<f64> {
        match self.kind {
            LineshapeKind::SharpLine => None,
            LineshapeKind::Lorentzian { width } | LineshapeKind::Gaussian { width } => Some(width),
        }
    }
}

impl FrequencyGrid {
    /// Discretize a lineshape into weighted bands.
    ///
    /// `cutoff` is the truncation half-range in units of the line width
    /// (5 is the conventional choice). Weights are renormalized so that they
    /// sum to one exactly; band moments therefore approximate moments of the
    /// truncated, renormalized line.
    pub fn discretize(
        shape: &Lineshape,
        n_bands: usize,
        cutoff: f64,
        rule: QuadratureRule,
    ) -> Result<Self> {
        if !shape.center.is_finite() {
            return Err(SitError::config("lineshape center must be finite"));
        }
        if let LineshapeKind::SharpLine = shape.kind {
            // Single resonant band regardless of the requested band count.
            return Ok(FrequencyGrid {
                bands: vec![Band { omega: shape.center, weight: 1.0 }],
            });
        }
        if n_bands == 0 {
            return Err(SitError::config("n_bands must be >= 1"));
        }
        let width = shape.width().unwrap();
        if !(width.is_finite() && width > 0.0) {
            return Err(SitError::config("line width must be > 0"));
        }
        if !(cutoff.is_finite() && cutoff > 0.0) {
            return Err(SitError::config("lineshape cutoff must be > 0"));
        }
        let half_range = cutoff * width;
        let mut bands: Vec<Band> = match rule {
            QuadratureRule::GaussLegendre => gauss_legendre(n_bands)
                .into_iter()
                .map(|(x, w)| {
                    let omega = shape.center + half_range * x;
                    Band { omega, weight: w * half_range * shape.density(omega) }
                })
                .collect(),
            QuadratureRule::Midpoint => {
                let h = 2.0 * half_range / n_bands as f64;
                (0..n_bands)
                    .map(|i| {
                        let omega = shape.center - half_range + (i as f64 + 0.5) * h;
                        Band { omega, weight: h * shape.density(omega) }
                    })
                    .collect()
            }
        };
        let total: f64 = bands.iter().map(|b| b.weight).sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(SitError::config("lineshape weights did not normalize"));
        }
        for b in &mut bands {
            b.weight /= total;
        }
        Ok(FrequencyGrid { bands })
    }

    pub fn n_bands(&self) -> usize {
        self.bands.len()
    }

    /// Band-weighted mean frequency.
    pub fn mean_omega(&self) -> f64 {
        self.bands.iter().map(|b| b.weight * b.omega).sum()
    }

    /// Band-weighted second central moment about `center`.
    pub fn second_moment(&self, center: f64) -> f64 {
        self.bands
            .iter()
            .map(|b| {
                let d = b.omega - center;
                b.weight * d * d
            })
            .sum()
    }
}

/// Doppler width of a thermal line: `omega0 * sqrt(1 / (beta * mass_param))`.
///
/// `mass_param` is the dimensionless `m c^2 / (h_bar omega0)` combination fixed
/// by the atomic species; `beta = +inf` (T = 0) gives zero width.
pub fn doppler_width(omega0: f64, beta: f64, mass_param: f64) -> Result<f64> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(SitError::config("omega0 must be > 0"));
    }
    if !(mass_param.is_finite() && mass_param > 0.0) {
        return Err(SitError::config("mass_param must be > 0"));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(SitError::config("beta must be > 0 (or +inf for T = 0)"));
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    Ok(omega0 * (1.0 / (beta * mass_param)).sqrt())
}

/// Phase-space variables of the atoms in one z-cell, resolved over the time
/// grid: rows are frequency bands, columns are tau nodes.
///
/// `r_plus` is an independent variable, not the conjugate of `r_minus`, and
/// `r_z` is complex: the doubled phase space is what lets trajectory averages
/// represent normally ordered moments.
#[derive(Debug, Clone)]
pub struct AtomicState {
    pub r_minus: Array2<Complex64>,
    pub r_plus: Array2<Complex64>,
    pub r_z: Array2<Complex64>,
    /// Effective atom number per band, `n_cell * weight`; sets the local
    /// shot-noise scale.
    pub band_atoms: Vec<f64>,
}

impl AtomicState {
    /// All atoms in the ground state (`r_minus = r_plus = 0`, `r_z = rz0`).
    pub fn ground(grid: &FrequencyGrid, n_tau: usize, rz0: f64, n_cell: f64) -> Self {
        let n_bands = grid.n_bands();
        AtomicState {
            r_minus: Array2::zeros((n_bands, n_tau)),
            r_plus: Array2::zeros((n_bands, n_tau)),
            r_z: Array2::from_elem((n_bands, n_tau), Complex64::new(rz0, 0.0)),
            band_atoms: grid.bands.iter().map(|b| n_cell * b.weight).collect(),
        }
    }

    /// Re-ground in place (each z cell starts from fresh atoms).
    pub fn reset_ground(&mut self, rz0: f64) {
        let zero = Complex64::new(0.0, 0.0);
        self.r_minus.fill(zero);
        self.r_plus.fill(zero);
        self.r_z.fill(Complex64::new(rz0, 0.0));
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = vec![(0.0, 0.0); n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Asymptotic root estimate, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out[i] = (-x, w);
        out[n - 1 - i] = (x, w);
    }
    out
}

/// Legendre polynomial `P_n` and its derivative at `x`, by recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
