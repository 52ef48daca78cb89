//! Field envelope on the retarded-time grid.
//!
//! The envelope lives on a uniform tau grid in the frame co-moving at c
//! (tau = t - z/c). `omega_dag` is stored as an independent array: it starts
//! as the conjugate of `omega` for a coherent input and stays exactly that in
//! deterministic runs, but the stochastic terms drive the two apart, which is
//! the doubled-phase-space freedom the moment estimators rely on.

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SitError};

/// Minimum distance (in pulse widths `1/A`) from the pulse center to either
/// window edge; closer than this and the truncated sech tails are no longer
/// negligible.
pub const MIN_EDGE_WIDTHS: f64 = 12.0;

/// Uniform retarded-time grid with `n_tau` nodes spanning `[tau_min, tau_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub n_tau: usize,
    pub tau_min: f64,
    pub tau_max: f64,
}

impl TauGrid {
    pub fn new(n_tau: usize, tau_min: f64, tau_max: f64) -> Result<Self> {
        let grid = TauGrid { n_tau, tau_min, tau_max };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tau < 2 {
            return Err(SitError::config("n_tau must be >= 2"));
        }
        if !(self.tau_min.is_finite() && self.tau_max.is_finite() && self.tau_max > self.tau_min)
        {
            return Err(SitError::config("need tau_max > tau_min and both finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn d_tau(&self) -> f64 {
        (self.tau_max - self.tau_min) / (self.n_tau - 1) as f64
    }

    #[inline]
    pub fn tau(&self, i: usize) -> f64 {
        self.tau_min + i as f64 * self.d_tau()
    }

    pub fn width(&self) -> f64 {
        self.tau_max - self.tau_min
    }

    /// Trapezoid quadrature of a node-sampled integrand.
    pub fn trapezoid(&self, values: &Array1<Complex64>) -> Complex64 {
        debug_assert_eq!(values.len(), self.n_tau);
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 1..values.len() {
            sum += values[i - 1] + values[i];
        }
        0.5 * self.d_tau() * sum
    }
}

/// Field envelope at one propagation position.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub omega: Array1<Complex64>,
    pub omega_dag: Array1<Complex64>,
    pub z: f64,
}

impl FieldState {
    /// Empty (vacuum) field.
    pub fn vacuum(grid: &TauGrid, z: f64) -> Self {
        FieldState {
            omega: Array1::zeros(grid.n_tau),
            omega_dag: Array1::zeros(grid.n_tau),
            z,
        }
    }

    /// The sech soliton `2 A sech(A (tau - tau0)) exp(i (delta tau + phi(z)))`
    /// with the propagation phase `phi(z) = delta / (A^2 + delta^2) * G rho z`.
    ///
    /// Fails if the pulse sits too close to a window edge for the truncated
    /// tails to be negligible.
    pub fn sech_soliton(
        grid: &TauGrid,
        inv_width: f64,
        tau0: f64,
        delta: f64,
        g_rho: f64,
        z: f64,
    ) -> Result<Self> {
        grid.validate()?;
        if !(inv_width.is_finite() && inv_width > 0.0) {
            return Err(SitError::config("inv_width must be > 0"));
        }
        let margin = MIN_EDGE_WIDTHS / inv_width;
        if tau0 - grid.tau_min < margin || grid.tau_max - tau0 < margin {
            return Err(SitError::config(format!(
                "pulse support exceeds the tau window: center {tau0} needs {margin:.2} \
                 clearance inside [{}, {}]",
                grid.tau_min, grid.tau_max
            )));
        }
        let phi = delta / (inv_width * inv_width + delta * delta) * g_rho * z;
        let mut omega = Array1::zeros(grid.n_tau);
        for i in 0..grid.n_tau {
            let tau = grid.tau(i);
            let amp = 2.0 * inv_width / (inv_width * (tau - tau0)).cosh();
            omega[i] = Complex64::from_polar(amp, delta * tau + phi);
        }
        let omega_dag = omega.mapv(|c| c.conj());
        Ok(FieldState { omega, omega_dag, z })
    }

    /// Pulse area `integral Omega d tau` (complex).
    pub fn area(&self, grid: &TauGrid) -> Complex64 {
        grid.trapezoid(&self.omega)
    }

    /// Pulse energy `integral omega_dag * omega d tau` (complex; real part is
    /// the physical estimate, the imaginary part is sampling noise).
    pub fn energy(&self, grid: &TauGrid) -> Complex64 {
        let integrand = Array1::from_iter(
            self.omega_dag.iter().zip(self.omega.iter()).map(|(d, o)| d * o),
        );
        grid.trapezoid(&integrand)
    }

    /// Rescale the amplitude so that `|area|` becomes `target`. Returns the
    /// scale factor applied. The phase profile is untouched.
    pub fn scale_to_area(&mut self, target: f64, grid: &TauGrid) -> Result<f64> {
        if !(target.is_finite() && target > 0.0) {
            return Err(SitError::config("target area must be > 0"));
        }
        let current = self.area(grid).norm();
        if current < 1e-300 {
            return Err(SitError::config("cannot rescale a zero-area pulse"));
        }
        let factor = target / current;
        self.omega.mapv_inplace(|c| c * factor);
        self.omega_dag.mapv_inplace(|c| c * factor);
        Ok(factor)
    }

    /// Largest envelope magnitude over the window (over both field copies).
    pub fn peak(&self) -> f64 {
        self.omega
            .iter()
            .chain(self.omega_dag.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wide_grid() -> TauGrid {
        TauGrid::new(4001, -20.0, 20.0).unwrap()
    }

    #[test]
    fn grid_basics() {
        let g = wide_grid();
        assert_relative_eq!(g.d_tau(), 0.01, max_relative = 1e-12);
        assert_relative_eq!(g.tau(0), -20.0);
        assert_relative_eq!(g.tau(4000), 20.0, max_relative = 1e-12);
        assert!(TauGrid::new(1, 0.0, 1.0).is_err());
        assert!(TauGrid::new(100, 1.0, 1.0).is_err());
    }

    #[test]
    fn sech_peak_and_reality() {
        let g = wide_grid();
        let f = FieldState::sech_soliton(&g, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let mid = 2000;
        assert_relative_eq!(f.omega[mid].re, 2.0, max_relative = 1e-12);
        assert_eq!(f.omega[mid].im, 0.0);
        // Coherent input: omega_dag is exactly the conjugate.
        for i in 0..g.n_tau {
            assert_eq!(f.omega_dag[i], f.omega[i].conj());
        }
    }

    #[test]
    fn resonant_soliton_accumulates_no_phase() {
        let g = wide_grid();
        let f = FieldState::sech_soliton(&g, 1.0, 0.0, 0.0, 1.0, 7.0).unwrap();
        assert_eq!(f.omega[2000].im, 0.0);
    }

    #[test]
    fn detuned_soliton_phase() {
        // delta / (A^2 + delta^2) * G rho z = 0.5/1.25 * 1 * 2 = 0.8 at tau = 0.
        let g = wide_grid();
        let f = FieldState::sech_soliton(&g, 1.0, 0.0, 0.5, 1.0, 2.0).unwrap();
        assert_relative_eq!(f.omega[2000].arg(), 0.8, max_relative = 1e-12);
    }

    #[test]
    fn unscaled_area_is_two_pi() {
        let g = TauGrid::new(8001, -20.0, 20.0).unwrap();
        let f = FieldState::sech_soliton(&g, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let area = f.area(&g);
        assert!(
            (area.norm() - 2.0 * std::f64::consts::PI).abs() < 1e-6,
            "area = {area}"
        );
        assert_relative_eq!(f.energy(&g).re, 8.0, max_relative = 1e-6);
        assert!(f.energy(&g).im.abs() < 1e-12);
    }

    #[test]
    fn area_scales_with_width_parameter() {
        // Doubling A doubles the energy (8A) but keeps the area at 2 pi.
        let g = wide_grid();
        let f = FieldState::sech_soliton(&g, 2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(f.area(&g).norm(), 2.0 * std::f64::consts::PI, max_relative = 1e-9);
        assert_relative_eq!(f.energy(&g).re, 16.0, max_relative = 1e-9);
    }

    #[test]
    fn scale_to_area_round_trip() {
        let g = wide_grid();
        let mut f = FieldState::sech_soliton(&g, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let target = 2.5 * std::f64::consts::PI;
        let factor = f.scale_to_area(target, &g).unwrap();
        assert_relative_eq!(factor, 1.25, max_relative = 1e-6);
        assert!((f.area(&g).norm() - target).abs() < 1e-10);
        // Identity rescale.
        let f2 = f.clone();
        f.scale_to_area(target, &g).unwrap();
        for i in 0..g.n_tau {
            assert_relative_eq!(f.omega[i].re, f2.omega[i].re, max_relative = 1e-12);
        }
    }

    #[test]
    fn scale_preserves_phase_profile() {
        let g = wide_grid();
        let mut f = FieldState::sech_soliton(&g, 1.0, 0.0, 0.7, 0.0, 0.0).unwrap();
        let before = f.omega[1234].arg();
        f.scale_to_area(4.0, &g).unwrap();
        assert_relative_eq!(f.omega[1234].arg(), before, max_relative = 1e-12);
    }

    #[test]
    fn zero_pulse_cannot_be_rescaled() {
        let g = wide_grid();
        let mut f = FieldState::vacuum(&g, 0.0);
        assert!(f.scale_to_area(1.0, &g).is_err());
    }

    #[test]
    fn off_window_pulse_rejected() {
        let g = TauGrid::new(512, -5.0, 5.0).unwrap();
        assert!(FieldState::sech_soliton(&g, 1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        // Narrower pulse (larger A) fits the same window.
        assert!(FieldState::sech_soliton(&g, 4.0, 0.0, 0.0, 0.0, 0.0).is_ok());
    }
}
