//! Thin 2D FFT engine over rustfft: row transforms, transposes, and full 2D
//! forward/inverse passes with the crate's 1/n² inverse normalization.

use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

static PLANNER: LazyLock<Mutex<FftPlanner<f64>>> = LazyLock::new(|| Mutex::new(FftPlanner::new()));

pub struct Fft2D {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<C64>,
    transpose_buf: Vec<C64>,
}

impl Fft2D {
    pub fn new(n: usize) -> Self {
        let (fwd, inv) = {
            let mut planner = PLANNER.lock().unwrap();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        };
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Fft2D {
            n,
            fwd,
            inv,
            scratch: vec![C64::new(0.0, 0.0); scratch_len],
            transpose_buf: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// 1D transforms along every contiguous row of an n×n array.
    pub fn fft_rows(&mut self, data: &mut [C64], inverse: bool) {
        debug_assert_eq!(data.len(), self.n * self.n);
        let plan = if inverse { &self.inv } else { &self.fwd };
        plan.process_with_scratch(data, &mut self.scratch);
    }

    /// In-place square transpose.
    pub fn transpose(&mut self, data: &mut [C64]) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        const B: usize = 32;
        let buf = &mut self.transpose_buf;
        for bi in (0..n).step_by(B) {
            for bj in (0..n).step_by(B) {
                for i in bi..(bi + B).min(n) {
                    for j in bj..(bj + B).min(n) {
                        buf[j * n + i] = data[i * n + j];
                    }
                }
            }
        }
        data.copy_from_slice(buf);
    }

    /// Full 2D forward DFT (unnormalized), natural layout in and out: both
    /// axes end up in FFT frequency order.
    pub fn forward(&mut self, data: &mut [C64]) {
        self.fft_rows(data, false);
        self.transpose(data);
        self.fft_rows(data, false);
        self.transpose(data);
    }

    /// Full 2D inverse DFT including the 1/n² normalization.
    pub fn inverse(&mut self, data: &mut [C64]) {
        self.fft_rows(data, true);
        self.transpose(data);
        self.fft_rows(data, true);
        self.transpose(data);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_identity() {
        let n = 32;
        let mut fft = Fft2D::new(n);
        let orig: Vec<C64> = (0..n * n)
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        let max_err = data
            .iter()
            .zip(&orig)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12, "round-trip error {max_err}");
    }

    #[test]
    fn parseval_holds() {
        let n = 16;
        let mut fft = Fft2D::new(n);
        let orig: Vec<C64> = (0..n * n)
            .map(|i| C64::new((i as f64).sin(), (i as f64 * 2.0).cos()))
            .collect();
        let mut data = orig.clone();
        fft.forward(&mut data);
        let pos: f64 = orig.iter().map(|c| c.norm_sqr()).sum();
        let mom: f64 = data.iter().map(|c| c.norm_sqr()).sum::<f64>() / (n * n) as f64;
        assert!((pos - mom).abs() < 1e-12 * pos);
    }

    #[test]
    fn single_mode_lands_on_its_bin() {
        let n = 16;
        let mut fft = Fft2D::new(n);
        // e^{2πi(3 ix + 5 iy)/n} must transform to a delta at (kx, ky) = (3, 5).
        let mut data: Vec<C64> = (0..n * n)
            .map(|idx| {
                let ix = idx % n;
                let iy = idx / n;
                let phase = 2.0 * std::f64::consts::PI * (3 * ix + 5 * iy) as f64 / n as f64;
                C64::from_polar(1.0, phase)
            })
            .collect();
        fft.forward(&mut data);
        for idx in 0..n * n {
            let (kx, ky) = (idx % n, idx / n);
            let expected = if (kx, ky) == (3, 5) { (n * n) as f64 } else { 0.0 };
            assert!(
                (data[idx].re - expected).abs() < 1e-9 && data[idx].im.abs() < 1e-9,
                "bin ({kx},{ky}) = {:?}",
                data[idx]
            );
        }
    }

    #[test]
    fn transpose_is_involution() {
        let n = 8;
        let mut fft = Fft2D::new(n);
        let orig: Vec<C64> = (0..n * n).map(|i| C64::new(i as f64, -(i as f64))).collect();
        let mut data = orig.clone();
        fft.transpose(&mut data);
        assert_ne!(data, orig);
        fft.transpose(&mut data);
        assert_eq!(data, orig);
    }
}
