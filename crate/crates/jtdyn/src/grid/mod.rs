//! Uniform periodic 2D grids, two-component complex fields on them, the
//! Fourier contract, and all field-level observables.
//!
//! Conventions: positions on each axis are x_i = −L + i·Δ with Δ = 2L/n;
//! the conjugate momentum grid has spacing π/L and spans [−π/Δ, π/Δ). The
//! forward transform uses the e^{−ip·q} kernel with 1/n² on the inverse.
//! Arrays are row-major with index iy·n + ix (a row holds fixed y, varying x).
//! Momentum-ordered data is exposed in monotonic order; the internal FFT
//! ordering never leaves this module.

mod fft;
mod field;

pub use fft::Fft2D;
pub use field::{
    adiabatic_populations, densities, edge_density_max, expectation_jz, expectation_momentum,
    expectation_position, fftshift2, make_gaussian, norm, projected_distribution,
    spin_expectations, Axis, Channel, SpinorField,
};

use crate::error::{Error, Result};

/// Uniform periodic position grid over [−L, L)² with its conjugate momentum
/// grid. `n` points per axis (power of two), half-width `extent` = L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    n: usize,
    extent: f64,
}

impl Grid2D {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "grid size must be a power of two >= 8, got {n}"
            )));
        }
        if !extent.is_finite() || extent <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "grid extent must be positive and finite, got {extent}"
            )));
        }
        Ok(Self { n, extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Position spacing Δ = 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Momentum spacing π/L.
    pub fn momentum_spacing(&self) -> f64 {
        std::f64::consts::PI / self.extent
    }

    /// Number of grid cells n².
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Monotonic axis positions −L, −L+Δ, …, L−Δ.
    pub fn positions(&self) -> Vec<f64> {
        let d = self.spacing();
        (0..self.n).map(|i| i as f64 * d - self.extent).collect()
    }

    /// Monotonic axis momenta −n/2·dp, …, (n/2−1)·dp.
    pub fn momenta_sorted(&self) -> Vec<f64> {
        let dp = self.momentum_spacing();
        let half = self.n as i64 / 2;
        (-half..half).map(|j| j as f64 * dp).collect()
    }

    /// Axis momenta in FFT storage order: 0, dp, …, then negative branch.
    pub(crate) fn momenta_fft_order(&self) -> Vec<f64> {
        let dp = self.momentum_spacing();
        let n = self.n as i64;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dp } else { (j - n) as f64 * dp })
            .collect()
    }

    pub fn idx(&self, ix: usize, iy: usize) -> usize {
        iy * self.n + ix
    }
}
