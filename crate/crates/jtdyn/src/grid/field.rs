//! Two-component complex fields on a Grid2D and their observables: moments,
//! densities, marginals, spin expectations, adiabatic populations, and the
//! z angular momentum ⟨x p_y − y p_x⟩ + ⟨σz⟩/2.

use num_complex::Complex64 as C64;

use super::{Fft2D, Grid2D};
use crate::error::{Error, Result};
use crate::model::Point2;

/// Diabatic channel selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    One,
    Two,
}

/// Coordinate axis retained by a marginal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Two complex channel arrays over a grid, row-major with index iy·n + ix.
#[derive(Debug, Clone)]
pub struct SpinorField {
    pub grid: Grid2D,
    pub c1: Vec<C64>,
    pub c2: Vec<C64>,
}

impl SpinorField {
    /// All-zero field (building block for tests and custom initial states).
    pub fn zeros(grid: Grid2D) -> Self {
        let len = grid.len();
        SpinorField { grid, c1: vec![C64::new(0.0, 0.0); len], c2: vec![C64::new(0.0, 0.0); len] }
    }
}

/// Normalized Gaussian packet exp(−|q−center|²/(2σ²)) in one channel; the
/// packet must clear every grid edge by at least 5σ.
pub fn make_gaussian(grid: Grid2D, center: Point2, sigma: f64, channel: Channel) -> Result<SpinorField> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::InvalidInput(format!("sigma must be positive and finite, got {sigma}")));
    }
    if !center.x.is_finite() || !center.y.is_finite() {
        return Err(Error::InvalidInput("gaussian center must be finite".into()));
    }
    let l = grid.extent();
    let margin = (l - center.x).min(l + center.x).min(l - center.y).min(l + center.y);
    let required = 5.0 * sigma;
    if margin < required {
        return Err(Error::SupportViolation { margin, required });
    }

    let n = grid.n();
    let xs = grid.positions();
    let mut field = SpinorField::zeros(grid);
    {
        let target = match channel {
            Channel::One => &mut field.c1,
            Channel::Two => &mut field.c2,
        };
        let inv_2s2 = 1.0 / (2.0 * sigma * sigma);
        for iy in 0..n {
            let dy2 = (xs[iy] - center.y) * (xs[iy] - center.y);
            for ix in 0..n {
                let dx2 = (xs[ix] - center.x) * (xs[ix] - center.x);
                target[iy * n + ix] = C64::new((-(dx2 + dy2) * inv_2s2).exp(), 0.0);
            }
        }
    }
    let n2 = norm_sqr(&field);
    if n2 <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    let scale = 1.0 / n2.sqrt();
    for v in field.c1.iter_mut().chain(field.c2.iter_mut()) {
        *v *= scale;
    }
    Ok(field)
}

fn norm_sqr(field: &SpinorField) -> f64 {
    let d = field.grid.spacing();
    let sum: f64 = field
        .c1
        .iter()
        .zip(&field.c2)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .sum();
    d * d * sum
}

/// Quadrature norm √(Δ²·Σ(|c1|²+|c2|²)).
pub fn norm(field: &SpinorField) -> f64 {
    norm_sqr(field).sqrt()
}

fn checked_norm_sqr(field: &SpinorField) -> Result<f64> {
    let n2 = norm_sqr(field);
    if n2 > 0.0 {
        Ok(n2)
    } else {
        Err(Error::ZeroNorm)
    }
}

/// Position expectation (⟨Qx⟩, ⟨Qy⟩).
pub fn expectation_position(field: &SpinorField) -> Result<Point2> {
    let n2 = checked_norm_sqr(field)?;
    let n = field.grid.n();
    let xs = field.grid.positions();
    let (mut sx, mut sy) = (0.0, 0.0);
    for iy in 0..n {
        let mut row = 0.0;
        for ix in 0..n {
            let idx = iy * n + ix;
            let den = field.c1[idx].norm_sqr() + field.c2[idx].norm_sqr();
            sx += xs[ix] * den;
            row += den;
        }
        sy += xs[iy] * row;
    }
    let d = field.grid.spacing();
    Ok(Point2::new(d * d * sx / n2, d * d * sy / n2))
}

/// Forward transforms of both channels (unnormalized, FFT frequency order).
pub(crate) fn fourier_channels(field: &SpinorField) -> (Vec<C64>, Vec<C64>) {
    let mut fft = Fft2D::new(field.grid.n());
    let mut f1 = field.c1.clone();
    let mut f2 = field.c2.clone();
    fft.forward(&mut f1);
    fft.forward(&mut f2);
    (f1, f2)
}

/// Momentum expectation (⟨Px⟩, ⟨Py⟩), computed in the Fourier representation.
pub fn expectation_momentum(field: &SpinorField) -> Result<Point2> {
    let n2 = checked_norm_sqr(field)?;
    let n = field.grid.n();
    let (f1, f2) = fourier_channels(field);
    let ps = field.grid.momenta_fft_order();
    let (mut sx, mut sy) = (0.0, 0.0);
    for ky in 0..n {
        let mut row = 0.0;
        for kx in 0..n {
            let idx = ky * n + kx;
            let den = f1[idx].norm_sqr() + f2[idx].norm_sqr();
            sx += ps[kx] * den;
            row += den;
        }
        sy += ps[ky] * row;
    }
    // Mass per momentum bin is (Δ²/2π)²·dp²·|ĉ|² = (Δ/n)²·Δ²-free… which
    // collapses to Δ²/n² by dp·Δ = 2π/n; the constant cancels against norm²
    // only partially, so keep it explicit.
    let d = field.grid.spacing();
    let w = d * d / (n * n) as f64;
    Ok(Point2::new(w * sx / n2, w * sy / n2))
}

/// Pointwise |c1|²+|c2|² in position space and in momentum space (momentum
/// axes in monotonic order, density per unit dp²); each integrates to norm²
/// with cell areas Δ² and dp² respectively.
pub fn densities(field: &SpinorField) -> (Vec<f64>, Vec<f64>) {
    let n = field.grid.n();
    let pos: Vec<f64> = field
        .c1
        .iter()
        .zip(&field.c2)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    let (f1, f2) = fourier_channels(field);
    let d = field.grid.spacing();
    let dp = field.grid.momentum_spacing();
    let scale = d * d / ((n * n) as f64 * dp * dp);
    let mom_fft: Vec<f64> = f1
        .iter()
        .zip(&f2)
        .map(|(a, b)| scale * (a.norm_sqr() + b.norm_sqr()))
        .collect();
    (pos, fftshift2(n, &mom_fft))
}

/// Reorder an n×n array from FFT frequency order to monotonic order on both
/// axes.
pub fn fftshift2(n: usize, data: &[f64]) -> Vec<f64> {
    assert_eq!(data.len(), n * n);
    let mut out = vec![0.0; n * n];
    let half = n / 2;
    for my in 0..n {
        let ky = (my + half) % n;
        for mx in 0..n {
            let kx = (mx + half) % n;
            out[my * n + mx] = data[ky * n + kx];
        }
    }
    out
}

/// Marginal probability masses along the retained axis: entry j is
/// Δ²·Σ_other |ψ|², so the plain sum over j equals norm².
pub fn projected_distribution(field: &SpinorField, axis: Axis) -> Vec<f64> {
    let n = field.grid.n();
    let d = field.grid.spacing();
    let mut out = vec![0.0; n];
    for iy in 0..n {
        for ix in 0..n {
            let idx = iy * n + ix;
            let den = field.c1[idx].norm_sqr() + field.c2[idx].norm_sqr();
            match axis {
                Axis::X => out[ix] += den,
                Axis::Y => out[iy] += den,
            }
        }
    }
    for v in &mut out {
        *v *= d * d;
    }
    out
}

/// (⟨σx⟩, ⟨σy⟩, ⟨σz⟩) from channel bilinears.
pub fn spin_expectations(field: &SpinorField) -> Result<[f64; 3]> {
    let n2 = checked_norm_sqr(field)?;
    let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
    for (a, b) in field.c1.iter().zip(&field.c2) {
        let cross = a.conj() * b;
        sx += 2.0 * cross.re;
        sy += 2.0 * cross.im;
        sz += a.norm_sqr() - b.norm_sqr();
    }
    let d = field.grid.spacing();
    let w = d * d / n2;
    Ok([w * sx, w * sy, w * sz])
}

/// Populations (p−, p+) of the lower/upper adiabatic states by pointwise
/// projection. The projector is undefined at the exact origin cell; there the
/// nearest off-origin convention (the +x neighbor, φ=0) is used.
pub fn adiabatic_populations(field: &SpinorField) -> Result<(f64, f64)> {
    let n2 = checked_norm_sqr(field)?;
    let n = field.grid.n();
    let xs = field.grid.positions();
    let (mut pm, mut pp) = (0.0, 0.0);
    for iy in 0..n {
        let y = xs[iy];
        for ix in 0..n {
            let x = xs[ix];
            let idx = iy * n + ix;
            let den = field.c1[idx].norm_sqr() + field.c2[idx].norm_sqr();
            let cross = field.c1[idx].conj() * field.c2[idx];
            let rho = x.hypot(y);
            // e^{−iφ} at the cell; φ=0 at the singular origin cell.
            let em = if rho > 0.0 { C64::new(x / rho, -y / rho) } else { C64::new(1.0, 0.0) };
            let t = (em * cross).re;
            pp += 0.5 * (den + 2.0 * t);
            pm += 0.5 * (den - 2.0 * t);
        }
    }
    let d = field.grid.spacing();
    let w = d * d / n2;
    Ok((w * pm, w * pp))
}

/// ⟨Jz⟩ = ⟨x p_y − y p_x⟩ + ⟨σz⟩/2 with derivatives by Fourier
/// differentiation.
pub fn expectation_jz(field: &SpinorField) -> Result<f64> {
    let n2 = checked_norm_sqr(field)?;
    let n = field.grid.n();
    let xs = field.grid.positions();
    let ps = field.grid.momenta_fft_order();
    let mut fft = Fft2D::new(n);

    let mut lz_sum = 0.0;
    for c in [&field.c1, &field.c2] {
        let mut hat = c.clone();
        fft.forward(&mut hat);
        let mut px_c = hat.clone();
        let mut py_c = hat;
        for ky in 0..n {
            for kx in 0..n {
                let idx = ky * n + kx;
                px_c[idx] *= ps[kx];
                py_c[idx] *= ps[ky];
            }
        }
        fft.inverse(&mut px_c);
        fft.inverse(&mut py_c);
        for iy in 0..n {
            let y = xs[iy];
            for ix in 0..n {
                let x = xs[ix];
                let idx = iy * n + ix;
                let integrand = px_c[idx] * (-y) + py_c[idx] * x;
                lz_sum += (c[idx].conj() * integrand).re;
            }
        }
    }
    let d = field.grid.spacing();
    let sz = spin_expectations(field)?[2];
    Ok(d * d * lz_sum / n2 + 0.5 * sz)
}

/// Largest density within two cells of any grid edge (support monitor).
pub fn edge_density_max(field: &SpinorField) -> f64 {
    let n = field.grid.n();
    let mut max = 0.0f64;
    let edge = |i: usize| i <= 2 || i >= n - 2;
    for iy in 0..n {
        for ix in 0..n {
            if edge(ix) || edge(iy) {
                let idx = iy * n + ix;
                let den = field.c1[idx].norm_sqr() + field.c2[idx].norm_sqr();
                max = max.max(den);
            }
        }
    }
    max
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn default_field() -> SpinorField {
        let grid = Grid2D::new(256, 25.0).unwrap();
        make_gaussian(grid, Point2::new(10.0, 0.0), 1.0, Channel::One).unwrap()
    }

    fn modulate(field: &mut SpinorField, p0: Point2) {
        let n = field.grid.n();
        let xs = field.grid.positions();
        for iy in 0..n {
            for ix in 0..n {
                let phase = C64::from_polar(1.0, p0.x * xs[ix] + p0.y * xs[iy]);
                let idx = iy * n + ix;
                field.c1[idx] *= phase;
                field.c2[idx] *= phase;
            }
        }
    }

    #[test]
    fn gaussian_is_normalized() {
        let f = default_field();
        assert!((norm(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_moments() {
        let f = default_field();
        let q = expectation_position(&f).unwrap();
        assert!((q.x - 10.0).abs() < 1e-10, "x = {}", q.x);
        assert!(q.y.abs() < 1e-10);
        let p = expectation_momentum(&f).unwrap();
        assert!(p.x.abs() < 1e-10);
        assert!(p.y.abs() < 1e-10);
    }

    #[test]
    fn gaussian_position_variance() {
        let f = default_field();
        let n = f.grid.n();
        let xs = f.grid.positions();
        let d = f.grid.spacing();
        let mut var = 0.0;
        for iy in 0..n {
            for ix in 0..n {
                let idx = iy * n + ix;
                let den = f.c1[idx].norm_sqr() + f.c2[idx].norm_sqr();
                var += (xs[ix] - 10.0) * (xs[ix] - 10.0) * den;
            }
        }
        var *= d * d;
        assert!((var - 0.5).abs() < 1e-8, "var = {var}");
    }

    #[test]
    fn gaussian_momentum_variance() {
        // width σ=1 in position gives variance 1/(2σ²) = 0.5 per momentum axis
        let f = default_field();
        let n = f.grid.n();
        let (_, mom) = densities(&f);
        let ps = f.grid.momenta_sorted();
        let dp = f.grid.momentum_spacing();
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for ky in 0..n {
            for kx in 0..n {
                let den = mom[ky * n + kx];
                s0 += den;
                s1 += ps[kx] * den;
                s2 += ps[kx] * ps[kx] * den;
            }
        }
        let (s0, s1, s2) = (s0 * dp * dp, s1 * dp * dp, s2 * dp * dp);
        let var = s2 / s0 - (s1 / s0) * (s1 / s0);
        assert!((var - 0.5).abs() < 1e-8, "momentum variance = {var}");
    }

    #[test]
    fn support_violation_detected() {
        let grid = Grid2D::new(256, 25.0).unwrap();
        let r = make_gaussian(grid, Point2::new(21.0, 0.0), 1.0, Channel::One);
        assert!(matches!(r, Err(Error::SupportViolation { .. })));
        let r = make_gaussian(grid, Point2::new(0.0, -22.0), 0.5, Channel::One);
        assert!(r.is_ok());
        let r = make_gaussian(grid, Point2::new(0.0, 0.0), 0.0, Channel::One);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn global_phase_leaves_observables_unchanged() {
        let f = default_field();
        let mut g = f.clone();
        let phase = C64::from_polar(1.0, 0.7);
        for v in g.c1.iter_mut().chain(g.c2.iter_mut()) {
            *v *= phase;
        }
        let (qf, qg) = (expectation_position(&f).unwrap(), expectation_position(&g).unwrap());
        assert!((qf - qg).norm() < 1e-12);
        let (pf, pg) = (expectation_momentum(&f).unwrap(), expectation_momentum(&g).unwrap());
        assert!((pf - pg).norm() < 1e-12);
        assert!((norm(&f) - norm(&g)).abs() < 1e-12);
        let (sf, sg) = (spin_expectations(&f).unwrap(), spin_expectations(&g).unwrap());
        for i in 0..3 {
            assert!((sf[i] - sg[i]).abs() < 1e-12);
        }
        let (jf, jg) = (expectation_jz(&f).unwrap(), expectation_jz(&g).unwrap());
        assert!((jf - jg).abs() < 1e-12);
    }

    #[test]
    fn plane_wave_shifts_momentum() {
        let mut f = default_field();
        let p0 = Point2::new(0.377, -0.251);
        modulate(&mut f, p0);
        let p = expectation_momentum(&f).unwrap();
        assert!((p - p0).norm() < 1e-8, "p = {p:?}");
    }

    #[test]
    fn densities_integrate_to_norm_sqr() {
        let f = default_field();
        let (pos, mom) = densities(&f);
        let d = f.grid.spacing();
        let dp = f.grid.momentum_spacing();
        let pos_mass: f64 = pos.iter().sum::<f64>() * d * d;
        let mom_mass: f64 = mom.iter().sum::<f64>() * dp * dp;
        assert!((pos_mass - 1.0).abs() < 1e-10, "position mass {pos_mass}");
        assert!((mom_mass - 1.0).abs() < 1e-10, "momentum mass {mom_mass}");
        // peak at the packet center
        let n = f.grid.n();
        let peak = pos
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        let xs = f.grid.positions();
        assert!((xs[peak % n] - 10.0).abs() <= f.grid.spacing());
        assert!(xs[peak / n].abs() <= f.grid.spacing());
    }

    #[test]
    fn fourier_round_trip_through_both_representations() {
        let f = default_field();
        let mut fft = Fft2D::new(f.grid.n());
        let mut data = f.c1.clone();
        fft.forward(&mut data);
        fft.inverse(&mut data);
        let max_err = data
            .iter()
            .zip(&f.c1)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(max_err < 1e-12);
    }

    #[test]
    fn parseval_between_representations() {
        let f = default_field();
        let n = f.grid.n();
        let (f1, f2) = fourier_channels(&f);
        let d = f.grid.spacing();
        let mom_norm2: f64 = f1
            .iter()
            .chain(f2.iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            * d
            * d
            / (n * n) as f64;
        assert!((mom_norm2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginals_behave() {
        let f = default_field();
        let py = projected_distribution(&f, Axis::Y);
        let sum: f64 = py.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
        // symmetric around y=0: mirror symmetry within rounding
        let n = f.grid.n();
        let peak = py.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(peak, n / 2);

        let grid = f.grid;
        let g = make_gaussian(grid, Point2::new(0.0, 2.0), 1.0, Channel::One).unwrap();
        let my = projected_distribution(&g, Axis::Y);
        let xs = grid.positions();
        let mean: f64 = my.iter().zip(&xs).map(|(m, y)| m * y).sum::<f64>()
            / my.iter().sum::<f64>();
        assert!((mean - 2.0).abs() < 1e-8, "marginal mean {mean}");
        let mx = projected_distribution(&g, Axis::X);
        let mean_x: f64 = mx.iter().zip(&xs).map(|(m, x)| m * x).sum::<f64>()
            / mx.iter().sum::<f64>();
        assert!(mean_x.abs() < 1e-8);
    }

    #[test]
    fn spin_expectations_of_pure_channels() {
        let f = default_field();
        let s = spin_expectations(&f).unwrap();
        assert!(s[0].abs() < 1e-14);
        assert!(s[1].abs() < 1e-14);
        assert!((s[2] - 1.0).abs() < 1e-14);

        let grid = f.grid;
        let g = make_gaussian(grid, Point2::new(10.0, 0.0), 1.0, Channel::Two).unwrap();
        let s = spin_expectations(&g).unwrap();
        assert!((s[2] + 1.0).abs() < 1e-14);

        // equal mixture points along +x
        let mut h = f.clone();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in h.c1.iter_mut().zip(h.c2.iter_mut()) {
            let v = *a * inv_sqrt2;
            *a = v;
            *b = v;
        }
        let s = spin_expectations(&h).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_populations_complete_and_balanced() {
        let f = default_field();
        let (pm, pp) = adiabatic_populations(&f).unwrap();
        assert!((pm + pp - 1.0).abs() < 1e-10);
        // a pure diabatic channel projects half/half onto the two surfaces
        assert!((pm - 0.5).abs() < 1e-12, "p- = {pm}");
        assert!((pp - 0.5).abs() < 1e-12);

        let mut g = f.clone();
        modulate(&mut g, Point2::new(0.3, -0.2));
        let (pm, pp) = adiabatic_populations(&g).unwrap();
        assert!((pm + pp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn jz_of_initial_state_is_one_half() {
        let f = default_field();
        let jz = expectation_jz(&f).unwrap();
        assert!((jz - 0.5).abs() < 1e-10, "jz = {jz}");
    }

    #[test]
    fn fourier_differentiation_matches_analytic() {
        let f = default_field();
        let n = f.grid.n();
        let xs = f.grid.positions();
        let ps = f.grid.momenta_fft_order();
        let mut fft = Fft2D::new(n);
        let mut hat = f.c1.clone();
        fft.forward(&mut hat);
        for ky in 0..n {
            for kx in 0..n {
                hat[ky * n + kx] *= C64::new(0.0, ps[kx]);
            }
        }
        fft.inverse(&mut hat);
        let mut max_err = 0.0f64;
        for iy in 0..n {
            for ix in 0..n {
                let idx = iy * n + ix;
                let analytic = f.c1[idx] * (-(xs[ix] - 10.0));
                max_err = max_err.max((hat[idx] - analytic).norm());
            }
        }
        assert!(max_err < 1e-8, "max derivative error {max_err}");
    }

    #[test]
    fn zero_norm_rejected() {
        let grid = Grid2D::new(16, 4.0).unwrap();
        let z = SpinorField::zeros(grid);
        assert!(matches!(expectation_position(&z), Err(Error::ZeroNorm)));
        assert!(matches!(spin_expectations(&z), Err(Error::ZeroNorm)));
        assert!(matches!(expectation_jz(&z), Err(Error::ZeroNorm)));
        assert_eq!(norm(&z), 0.0);
    }

    #[test]
    fn edge_monitor_sees_leakage() {
        let grid = Grid2D::new(64, 8.0).unwrap();
        let f = make_gaussian(grid, Point2::new(0.0, 0.0), 1.0, Channel::One).unwrap();
        // centered σ=1 packet on an L=8 grid: edge density ~e^{-64}/π, tiny
        assert!(edge_density_max(&f) < 1e-20);
        let mut g = f.clone();
        // plant probability at an edge cell
        g.c1[5] = C64::new(1.0, 0.0);
        assert!(edge_density_max(&g) >= 1.0);
    }

    #[test]
    fn fftshift_reorders_axes() {
        let n = 4;
        let data: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let shifted = fftshift2(n, &data);
        // monotonic index 2 on each axis is frequency 0 → original (0,0) cell
        assert_eq!(shifted[2 * n + 2], data[0]);
        assert_eq!(shifted[0], data[2 * n + 2]);
    }
}
