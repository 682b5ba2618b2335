//! Truncated-Wigner ensemble: many classical trajectories whose initial
//! positions and momenta are drawn from the Wigner function of the Gaussian
//! packet, each on its own counter-based RNG stream so results are
//! reproducible and independent of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::analysis::ObservableSeries;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Point2};
use crate::semiclassical::{observable_row, rk4_integrate, ClassicalState, SpinFactor};

/// Ensemble description: initial packet, common spin, integration setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub n_traj: usize,
    pub center: Point2,
    pub sigma: f64,
    pub spin0: [f64; 3],
    pub seed: u64,
    pub dt: f64,
    pub t_final: f64,
    pub spin_factor: SpinFactor,
    pub record_stride: usize,
    /// Start every trajectory exactly at (center, 0) instead of sampling.
    pub delta_initial: bool,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidInput("n_traj must be at least 1".into()));
        }
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        if !self.center.x.is_finite() || !self.center.y.is_finite() {
            return Err(Error::InvalidInput("ensemble center must be finite".into()));
        }
        let s2: f64 = self.spin0.iter().map(|v| v * v).sum();
        if !s2.is_finite() || s2 > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "initial spin must fit in the unit ball, |spin0| = {}",
                s2.sqrt()
            )));
        }
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::InvalidInput(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !self.t_final.is_finite() || self.t_final < self.dt {
            return Err(Error::InvalidInput(format!(
                "t_final must be finite and at least dt, got {}",
                self.t_final
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidInput("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Initial state of trajectory `traj_index`: positions N(center, σ²/2) and
/// momenta N(0, 1/(2σ²)) drawn in the order x, y, px, py from the stream
/// keyed by the trajectory index, spin fixed at spin0. Requires a validated
/// spec.
pub fn sample_initial(spec: &EnsembleSpec, traj_index: u64) -> ClassicalState {
    if spec.delta_initial {
        return ClassicalState::new(spec.center.x, spec.center.y, 0.0, 0.0, spec.spin0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(traj_index);
    let pos = Normal::new(0.0, spec.sigma / std::f64::consts::SQRT_2).expect("validated sigma");
    let mom = Normal::new(0.0, 1.0 / (spec.sigma * std::f64::consts::SQRT_2))
        .expect("validated sigma");
    let x = spec.center.x + pos.sample(&mut rng);
    let y = spec.center.y + pos.sample(&mut rng);
    let px = mom.sample(&mut rng);
    let py = mom.sample(&mut rng);
    ClassicalState::new(x, y, px, py, spec.spin0)
}

/// Ensemble means, their standard errors, and the final phase-space scatter.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub series: ObservableSeries,
    /// Standard error of each channel mean, on the same time base (zero when
    /// n_traj = 1).
    pub std_errors: ObservableSeries,
    /// Final (x, y) per trajectory, in trajectory-index order.
    pub final_positions: Vec<(f64, f64)>,
    /// Final (px, py) per trajectory, in trajectory-index order.
    pub final_momenta: Vec<(f64, f64)>,
    pub n_traj: usize,
}

const BLOCK: usize = 1024;
const N_CHANNELS: usize = 12;

struct BlockAccum {
    sums: Vec<[f64; N_CHANNELS]>,
    sumsq: Vec<[f64; N_CHANNELS]>,
    final_positions: Vec<(f64, f64)>,
    final_momenta: Vec<(f64, f64)>,
    failed: usize,
}

fn run_block(
    spec: &EnsembleSpec,
    params: &ModelParams,
    range: std::ops::Range<usize>,
    n_records: usize,
) -> BlockAccum {
    let mut acc = BlockAccum {
        sums: vec![[0.0; N_CHANNELS]; n_records],
        sumsq: vec![[0.0; N_CHANNELS]; n_records],
        final_positions: Vec::with_capacity(range.len()),
        final_momenta: Vec::with_capacity(range.len()),
        failed: 0,
    };
    for i in range {
        let s0 = sample_initial(spec, i as u64);
        let traj = match rk4_integrate(
            &s0,
            params,
            spec.dt,
            spec.t_final,
            spec.spin_factor,
            spec.record_stride,
        ) {
            Ok(t) => t,
            Err(_) => {
                acc.failed += 1;
                continue;
            }
        };
        for (r, state) in traj.states.iter().enumerate() {
            let row = observable_row(state, params);
            for c in 0..N_CHANNELS {
                acc.sums[r][c] += row[c];
                acc.sumsq[r][c] += row[c] * row[c];
            }
        }
        let last = traj.states.last().expect("trajectory has records");
        acc.final_positions.push((last.x, last.y));
        acc.final_momenta.push((last.px, last.py));
    }
    acc
}

/// Run the full ensemble. Trajectories are processed in fixed index blocks
/// and the block results reduced in index order, so the output is bitwise
/// identical for any thread count. Any non-finite trajectory aborts the
/// ensemble with the failure tally.
pub fn run_ensemble(spec: &EnsembleSpec, params: &ModelParams) -> Result<EnsembleResult> {
    spec.validate()?;
    // record stamps exactly as the integrator emits them
    let n_steps = ((spec.t_final / spec.dt).round() as usize).max(1);
    let mut times = vec![0.0];
    for step in 1..=n_steps {
        if step % spec.record_stride == 0 || step == n_steps {
            times.push(step as f64 * spec.dt);
        }
    }
    let n_records = times.len();

    let n_blocks = spec.n_traj.div_ceil(BLOCK);
    let blocks: Vec<BlockAccum> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = ((b + 1) * BLOCK).min(spec.n_traj);
            run_block(spec, params, lo..hi, n_records)
        })
        .collect();

    let mut sums = vec![[0.0; N_CHANNELS]; n_records];
    let mut sumsq = vec![[0.0; N_CHANNELS]; n_records];
    let mut final_positions = Vec::with_capacity(spec.n_traj);
    let mut final_momenta = Vec::with_capacity(spec.n_traj);
    let mut failed = 0;
    for b in blocks {
        for r in 0..n_records {
            for c in 0..N_CHANNELS {
                sums[r][c] += b.sums[r][c];
                sumsq[r][c] += b.sumsq[r][c];
            }
        }
        final_positions.extend(b.final_positions);
        final_momenta.extend(b.final_momenta);
        failed += b.failed;
    }
    if failed > 0 {
        return Err(Error::TrajectoryFailures { failed, total: spec.n_traj });
    }

    let n = spec.n_traj as f64;
    let mut mean_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n_records); N_CHANNELS];
    let mut se_cols: Vec<Vec<f64>> = vec![Vec::with_capacity(n_records); N_CHANNELS];
    for r in 0..n_records {
        for c in 0..N_CHANNELS {
            let mean = sums[r][c] / n;
            mean_cols[c].push(mean);
            let se = if spec.n_traj > 1 {
                let var = ((sumsq[r][c] - n * mean * mean) / (n - 1.0)).max(0.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            se_cols[c].push(se);
        }
    }
    Ok(EnsembleResult {
        series: ObservableSeries::with_standard_channels(times.clone(), mean_cols)?,
        std_errors: ObservableSeries::with_standard_channels(times, se_cols)?,
        final_positions,
        final_momenta,
        n_traj: spec.n_traj,
    })
}

/// Which final scatter a histogram bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterSpace {
    Position,
    Momentum,
}

/// Dense 2D counts over a rectangle, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub counts: Vec<u64>,
}

fn bounds_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Bin the final scatter of an ensemble. With `rect = None` the data's
/// bounding box is used (degenerate spans widen by ±0.5); with an explicit
/// rectangle, points outside are clamped into the edge bins, so the counts
/// always sum to n_traj.
pub fn ensemble_histogram(
    result: &EnsembleResult,
    space: ScatterSpace,
    bins: (usize, usize),
    rect: Option<((f64, f64), (f64, f64))>,
) -> Result<Histogram2D> {
    let (nx, ny) = bins;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bins per axis, got {nx}×{ny}")));
    }
    let data = match space {
        ScatterSpace::Position => &result.final_positions,
        ScatterSpace::Momentum => &result.final_momenta,
    };
    if data.is_empty() {
        return Err(Error::InvalidInput("ensemble holds no final states".into()));
    }
    let (x_range, y_range) = match rect {
        Some((xr, yr)) => {
            if !(xr.0 < xr.1) || !(yr.0 < yr.1) {
                return Err(Error::InvalidInput(format!(
                    "rectangle must have positive extent, got x {xr:?}, y {yr:?}"
                )));
            }
            (xr, yr)
        }
        None => (
            bounds_of(data.iter().map(|p| p.0)),
            bounds_of(data.iter().map(|p| p.1)),
        ),
    };
    let mut counts = vec![0u64; nx * ny];
    let bin = |v: f64, (lo, hi): (f64, f64), n: usize| -> usize {
        let f = (v - lo) / (hi - lo) * n as f64;
        (f.floor() as i64).clamp(0, n as i64 - 1) as usize
    };
    for &(x, y) in data {
        let ix = bin(x, x_range, nx);
        let iy = bin(y, y_range, ny);
        counts[iy * nx + ix] += 1;
    }
    Ok(Histogram2D { nx, ny, x_range, y_range, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_default() -> ModelParams {
        ModelParams::new(0.02, 0.01).unwrap()
    }

    fn base_spec() -> EnsembleSpec {
        EnsembleSpec {
            n_traj: 256,
            center: Point2::new(10.0, 0.0),
            sigma: 1.0,
            spin0: [0.0, 0.0, 1.0],
            seed: 1,
            dt: 0.1,
            t_final: 10.0,
            spin_factor: SpinFactor::Two,
            record_stride: 10,
            delta_initial: false,
        }
    }

    #[test]
    fn spec_validation() {
        assert!(base_spec().validate().is_ok());
        for broken in [
            EnsembleSpec { n_traj: 0, ..base_spec() },
            EnsembleSpec { sigma: 0.0, ..base_spec() },
            EnsembleSpec { sigma: f64::NAN, ..base_spec() },
            EnsembleSpec { spin0: [1.0, 1.0, 0.0], ..base_spec() },
            EnsembleSpec { dt: -0.1, ..base_spec() },
            EnsembleSpec { t_final: 0.01, ..base_spec() },
            EnsembleSpec { record_stride: 0, ..base_spec() },
        ] {
            assert!(broken.validate().is_err(), "{broken:?}");
        }
    }

    #[test]
    fn sampling_moments_match_wigner_widths() {
        let spec = EnsembleSpec { n_traj: 50_000, ..base_spec() };
        let n = spec.n_traj;
        let mut mx = 0.0;
        let mut my = 0.0;
        let mut vx = 0.0;
        let mut vpx = 0.0;
        let mut mpx = 0.0;
        let states: Vec<ClassicalState> =
            (0..n).map(|i| sample_initial(&spec, i as u64)).collect();
        for s in &states {
            mx += s.x;
            my += s.y;
            mpx += s.px;
        }
        mx /= n as f64;
        my /= n as f64;
        mpx /= n as f64;
        for s in &states {
            vx += (s.x - mx) * (s.x - mx);
            vpx += (s.px - mpx) * (s.px - mpx);
        }
        vx /= (n - 1) as f64;
        vpx /= (n - 1) as f64;
        // σ²/2 = 0.5 in position, 1/(2σ²) = 0.5 in momentum; 3·SE bands
        let se_mean = (0.5f64 / n as f64).sqrt();
        assert!((mx - 10.0).abs() < 3.0 * se_mean, "mean x {mx}");
        assert!(my.abs() < 3.0 * se_mean, "mean y {my}");
        assert!(mpx.abs() < 3.0 * se_mean, "mean px {mpx}");
        let se_var = 0.5 * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((vx - 0.5).abs() < 3.0 * se_var, "var x {vx}");
        assert!((vpx - 0.5).abs() < 3.0 * se_var, "var px {vpx}");
        // spin is not sampled
        assert!(states.iter().all(|s| s.sz == 1.0 && s.sx == 0.0));
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let spec = base_spec();
        assert_eq!(sample_initial(&spec, 7), sample_initial(&spec, 7));
        assert_ne!(sample_initial(&spec, 7), sample_initial(&spec, 8));
        let reseeded = EnsembleSpec { seed: 2, ..spec };
        assert_ne!(sample_initial(&spec, 7), sample_initial(&reseeded, 7));
    }

    #[test]
    fn ensemble_is_reproducible() {
        let spec = base_spec();
        let p = params_default();
        let a = run_ensemble(&spec, &p).unwrap();
        let b = run_ensemble(&spec, &p).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.std_errors, b.std_errors);
        assert_eq!(a.final_positions, b.final_positions);
        assert_eq!(a.final_momenta, b.final_momenta);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        // 2.5 blocks worth of trajectories, reduced on 1 vs 8 threads
        let spec = EnsembleSpec { n_traj: 2560, t_final: 5.0, ..base_spec() };
        let p = params_default();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = pool1.install(|| run_ensemble(&spec, &p)).unwrap();
        let b = pool8.install(|| run_ensemble(&spec, &p)).unwrap();
        assert_eq!(a.series, b.series);
        assert_eq!(a.final_positions, b.final_positions);
    }

    #[test]
    fn delta_ensemble_reproduces_single_trajectory() {
        let spec = EnsembleSpec { n_traj: 1, delta_initial: true, t_final: 50.0, ..base_spec() };
        let p = params_default();
        let out = run_ensemble(&spec, &p).unwrap();
        let s0 = ClassicalState::new(10.0, 0.0, 0.0, 0.0, [0.0, 0.0, 1.0]);
        let traj = rk4_integrate(&s0, &p, spec.dt, spec.t_final, spec.spin_factor, spec.record_stride)
            .unwrap();
        let single = traj.to_series(&p).unwrap();
        assert_eq!(out.series, single);
        for (_, se) in &out.std_errors.channels {
            assert!(se.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn uncoupled_ensemble_keeps_zero_mean_y() {
        let spec = EnsembleSpec { n_traj: 2000, t_final: 50.0, ..base_spec() };
        let p = ModelParams::new(0.02, 0.0).unwrap();
        let out = run_ensemble(&spec, &p).unwrap();
        let y = out.series.channel("y").unwrap();
        let se = out.std_errors.channel("y").unwrap();
        for i in 1..y.len() {
            assert!(y[i].abs() < 4.0 * se[i], "y[{i}] = {} vs SE {}", y[i], se[i]);
        }
    }

    #[test]
    fn standard_error_scales_inverse_sqrt_n() {
        let p = params_default();
        let small = run_ensemble(&EnsembleSpec { n_traj: 500, ..base_spec() }, &p).unwrap();
        let large = run_ensemble(&EnsembleSpec { n_traj: 5000, ..base_spec() }, &p).unwrap();
        let last = small.series.len() - 1;
        let ratio = small.std_errors.channel("y").unwrap()[last]
            / large.std_errors.channel("y").unwrap()[last];
        let want = 10f64.sqrt();
        assert!(
            (ratio / want - 1.0).abs() < 0.2,
            "SE ratio {ratio}, expected about {want}"
        );
    }

    #[test]
    fn diverging_trajectories_are_reported() {
        // a grotesquely large step makes RK4 overflow to non-finite
        let spec = EnsembleSpec { n_traj: 8, dt: 1e6, t_final: 2e7, record_stride: 1, ..base_spec() };
        let p = params_default();
        match run_ensemble(&spec, &p) {
            Err(Error::TrajectoryFailures { failed, total }) => {
                assert_eq!(total, 8);
                assert!(failed > 0);
            }
            other => panic!("expected TrajectoryFailures, got {other:?}"),
        }
    }

    #[test]
    fn histogram_counts_and_clamping() {
        let spec = EnsembleSpec { n_traj: 300, t_final: 5.0, ..base_spec() };
        let p = params_default();
        let out = run_ensemble(&spec, &p).unwrap();
        let h = ensemble_histogram(&out, ScatterSpace::Position, (16, 16), None).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 300);
        assert_eq!(h.counts.len(), 256);
        // a tiny explicit window clamps everything into edge bins, count kept
        let h = ensemble_histogram(
            &out,
            ScatterSpace::Momentum,
            (4, 4),
            Some(((-1e-6, 1e-6), (-1e-6, 1e-6))),
        )
        .unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 300);
        assert!(ensemble_histogram(&out, ScatterSpace::Position, (1, 8), None).is_err());
        assert!(ensemble_histogram(
            &out,
            ScatterSpace::Position,
            (4, 4),
            Some(((1.0, 1.0), (0.0, 2.0)))
        )
        .is_err());
    }

    #[test]
    fn histogram_handles_degenerate_scatter() {
        let spec = EnsembleSpec { n_traj: 5, delta_initial: true, t_final: 1.0, ..base_spec() };
        let p = params_default();
        let out = run_ensemble(&spec, &p).unwrap();
        // all five trajectories are identical → zero-span bounding box
        let h = ensemble_histogram(&out, ScatterSpace::Position, (4, 4), None).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 5);
        assert_eq!(h.x_range.1 - h.x_range.0, 1.0);
        // the shared point sits at the box center → bin (2, 2)
        assert_eq!(h.counts[2 * 4 + 2], 5);
    }
}
