//! Deterministic, scheduling-independent random number streams.
//!
//! Every noise value in a run is addressed by `(master_seed, trajectory,
//! z-cell, channel)`: the trajectory index keys a 256-bit ChaCha seed and the
//! `(cell, channel)` pair selects a ChaCha stream. Draws inside one stream
//! follow a fixed order (band-major, then time step), so the same address
//! always yields the same value no matter how trajectories are scheduled
//! across worker threads, and toggling one noise channel never shifts the
//! draws of another.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Independent noise channels within one z-cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Channel {
    /// Thermal photon noise entering the field equation.
    FieldThermal = 0,
    /// Real atom-field coupling noise on `r_minus`.
    CouplingJ = 1,
    /// Real atom-field coupling noise on `r_plus` (independent of `CouplingJ`).
    CouplingJDag = 2,
    /// Real composite noise on `r_z`.
    CouplingZ = 3,
    /// Complex dephasing noise.
    Dephasing = 4,
    /// Complex pump (incoherent excitation) noise, shared across equations.
    Pump = 5,
    /// Estimator resampling (bootstrap), outside the physics.
    Bootstrap = 6,
}

pub const CHANNEL_STRIDE: u64 = 8;

/// Reserved trajectory id for estimator-level draws (bootstrap resampling).
pub const META_TRAJ: u64 = u64::MAX;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// 256-bit ChaCha key for one trajectory.
pub fn trajectory_key(master_seed: u64, traj: u64) -> [u8; 32] {
    let mut s = master_seed ^ traj.wrapping_mul(0xA076_1D64_78BD_642F);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
    }
    key
}

/// The generator for one `(master_seed, trajectory, cell, channel)` address.
pub fn stream(master_seed: u64, traj: u64, cell: u64, channel: Channel) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(trajectory_key(master_seed, traj));
    rng.set_stream(cell.wrapping_mul(CHANNEL_STRIDE) + channel as u64);
    rng
}

/// One standard normal draw, N(0, 1).
#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// One circular complex Gaussian draw with `<|xi|^2> = 1` and `<xi^2> = 0`.
#[inline]
pub fn circular_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let x: f64 = rng.sample(StandardNormal);
    let y: f64 = rng.sample(StandardNormal);
    Complex64::new(x * std::f64::consts::FRAC_1_SQRT_2, y * std::f64::consts::FRAC_1_SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_addressable_out_of_order() {
        // Drawing cell 7 before cell 3 must not change either stream.
        let mut a7 = stream(42, 1, 7, Channel::CouplingJ);
        let mut a3 = stream(42, 1, 3, Channel::CouplingJ);
        let fwd: Vec<f64> = (0..16).map(|_| standard_normal(&mut a3)).collect();
        let fwd7: Vec<f64> = (0..16).map(|_| standard_normal(&mut a7)).collect();

        let mut b3 = stream(42, 1, 3, Channel::CouplingJ);
        let mut b7 = stream(42, 1, 7, Channel::CouplingJ);
        let back7: Vec<f64> = (0..16).map(|_| standard_normal(&mut b7)).collect();
        let back: Vec<f64> = (0..16).map(|_| standard_normal(&mut b3)).collect();

        assert_eq!(fwd, back);
        assert_eq!(fwd7, back7);
    }

    #[test]
    fn channels_are_independent_streams() {
        let mut j = stream(9, 0, 0, Channel::CouplingJ);
        let mut jd = stream(9, 0, 0, Channel::CouplingJDag);
        let a: Vec<f64> = (0..8).map(|_| standard_normal(&mut j)).collect();
        let b: Vec<f64> = (0..8).map(|_| standard_normal(&mut jd)).collect();
        assert_ne!(a, b);
    }

    #[test]
    fn trajectories_get_distinct_keys() {
        let mut seen = std::collections::HashSet::new();
        for traj in 0..512u64 {
            assert!(seen.insert(trajectory_key(1234, traj)));
        }
    }

    #[test]
    fn circular_complex_moments() {
        let mut rng = stream(7, 0, 0, Channel::Dephasing);
        let n = 200_000;
        let (mut abs2, mut sq) = (0.0, Complex64::new(0.0, 0.0));
        for _ in 0..n {
            let z = circular_complex(&mut rng);
            abs2 += z.norm_sqr();
            sq += z * z;
        }
        abs2 /= n as f64;
        sq /= n as f64;
        // 5-sigma bands: |xi|^2 has variance 1 per draw; pseudo-variance components 1/2 each.
        let tol = 5.0 / (n as f64).sqrt();
        assert!((abs2 - 1.0).abs() < tol, "abs2 = {abs2}");
        assert!(sq.norm() < 2.0 * tol, "sq = {sq}");
    }
}
