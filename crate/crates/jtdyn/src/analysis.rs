//! Time-series container shared by all three engines, plus the analysis
//! passes run on it: log-log power-law fits, conservation drift reports, and
//! cross-engine comparison with resampling onto a common time base.

use std::fmt;

use crate::error::{Error, Result};

/// Channel names every engine emits, in emission order.
pub const STANDARD_CHANNELS: [&str; 12] = [
    "x", "y", "px", "py", "sx", "sy", "sz", "norm", "energy", "jz", "pop_minus", "pop_plus",
];

/// Named scalar channels sampled on a strictly increasing time base.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub t: Vec<f64>,
    pub channels: Vec<(String, Vec<f64>)>,
}

impl ObservableSeries {
    pub fn new(t: Vec<f64>, channels: Vec<(String, Vec<f64>)>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidInput("series needs at least one sample".into()));
        }
        if !t.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("time stamps must be strictly increasing".into()));
        }
        for (name, values) in &channels {
            if values.len() != t.len() {
                return Err(Error::InvalidInput(format!(
                    "channel {name} has {} samples, expected {}",
                    values.len(),
                    t.len()
                )));
            }
        }
        Ok(ObservableSeries { t, channels })
    }

    /// Zip the standard channel names with columns given in standard order.
    pub fn with_standard_channels(t: Vec<f64>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != STANDARD_CHANNELS.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} columns, got {}",
                STANDARD_CHANNELS.len(),
                columns.len()
            )));
        }
        let channels = STANDARD_CHANNELS
            .iter()
            .zip(columns)
            .map(|(name, col)| (name.to_string(), col))
            .collect();
        Self::new(t, channels)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn channel(&self, name: &str) -> Result<&[f64]> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::MissingChannel { name: name.to_string() })
    }

    /// Copy of the samples with t in [t_lo, t_hi].
    pub fn restrict(&self, t_lo: f64, t_hi: f64) -> Result<ObservableSeries> {
        let keep: Vec<usize> = (0..self.t.len())
            .filter(|&i| self.t[i] >= t_lo && self.t[i] <= t_hi)
            .collect();
        if keep.is_empty() {
            return Err(Error::InvalidInput(format!("no samples in [{t_lo}, {t_hi}]")));
        }
        let t = keep.iter().map(|&i| self.t[i]).collect();
        let channels = self
            .channels
            .iter()
            .map(|(n, v)| (n.clone(), keep.iter().map(|&i| v[i]).collect()))
            .collect();
        ObservableSeries::new(t, channels)
    }
}

/// Least-squares fit of y = coefficient · t^exponent on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    /// Time span of the samples actually used.
    pub window: (f64, f64),
}

const MIN_FIT_SAMPLES: usize = 10;

/// Fit a power law to one channel over the window [t_lo, t_hi]. Requires at
/// least 10 samples in the window and at least 10 of those with t > 0 and
/// y > 0 (only such samples enter the log-log regression).
pub fn fit_power_law(series: &ObservableSeries, channel: &str, window: (f64, f64)) -> Result<PowerLawFit> {
    let y = series.channel(channel)?;
    let in_window: Vec<(f64, f64)> = series
        .t
        .iter()
        .zip(y)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, v)| (*t, *v))
        .collect();
    if in_window.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { found: in_window.len(), required: MIN_FIT_SAMPLES });
    }
    let usable: Vec<(f64, f64)> = in_window
        .into_iter()
        .filter(|(t, v)| *t > 0.0 && *v > 0.0)
        .collect();
    if usable.len() < MIN_FIT_SAMPLES {
        return Err(Error::NonPositiveData { found: usable.len(), required: MIN_FIT_SAMPLES });
    }

    let n = usable.len() as f64;
    let logs: Vec<(f64, f64)> = usable.iter().map(|(t, v)| (t.ln(), v.ln())).collect();
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mean_x) * (x - mean_x)).sum();
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let syy: f64 = logs.iter().map(|(_, y)| (y - mean_y) * (y - mean_y)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidInput("fit window spans a single distinct time".into()));
    }
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let ss_res: f64 = logs
        .iter()
        .map(|(x, y)| {
            let r = y - (exponent * x + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerLawFit {
        exponent,
        coefficient: intercept.exp(),
        r_squared,
        window: (usable[0].0, usable[usable.len() - 1].0),
    })
}

/// Time span of the first contiguous run of samples with y_lo < y < y_hi,
/// or None if no sample falls in the band.
pub fn auto_fit_window(series: &ObservableSeries, channel: &str, y_lo: f64, y_hi: f64) -> Result<Option<(f64, f64)>> {
    let y = series.channel(channel)?;
    let mut start = None;
    let mut end = 0;
    for (i, v) in y.iter().enumerate() {
        if *v > y_lo && *v < y_hi {
            if start.is_none() {
                start = Some(i);
            }
            end = i;
        } else if start.is_some() {
            break;
        }
    }
    Ok(start.map(|s| (series.t[s], series.t[end])))
}

/// Worst-case drifts of the conserved quantities over a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub norm_drift: f64,
    pub energy_drift_rel: f64,
    pub jz_drift: f64,
    pub spin_norm_drift: f64,
}

impl fmt::Display for ConservationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max |norm - 1|        : {:.3e}", self.norm_drift)?;
        writeln!(f, "max |E - E0| / |E0|   : {:.3e}", self.energy_drift_rel)?;
        writeln!(f, "max |Jz - Jz0|        : {:.3e}", self.jz_drift)?;
        write!(f, "max ||S| - |S0||      : {:.3e}", self.spin_norm_drift)
    }
}

/// Measure norm, relative energy, Jz, and spin-norm drifts against the first
/// sample.
pub fn conservation_report(series: &ObservableSeries) -> Result<ConservationReport> {
    let norm = series.channel("norm")?;
    let energy = series.channel("energy")?;
    let jz = series.channel("jz")?;
    let sx = series.channel("sx")?;
    let sy = series.channel("sy")?;
    let sz = series.channel("sz")?;

    let norm_drift = norm.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let e0 = energy[0];
    let e_num = energy.iter().map(|v| (v - e0).abs()).fold(0.0, f64::max);
    let energy_drift_rel = if e_num == 0.0 { 0.0 } else { e_num / e0.abs() };
    let jz0 = jz[0];
    let jz_drift = jz.iter().map(|v| (v - jz0).abs()).fold(0.0, f64::max);
    let s_mag = |i: usize| (sx[i] * sx[i] + sy[i] * sy[i] + sz[i] * sz[i]).sqrt();
    let s0 = s_mag(0);
    let spin_norm_drift = (0..series.len())
        .map(|i| (s_mag(i) - s0).abs())
        .fold(0.0, f64::max);
    Ok(ConservationReport { norm_drift, energy_drift_rel, jz_drift, spin_norm_drift })
}

/// Pointwise comparison of one channel across two series after resampling
/// onto the coarser time base.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonStats {
    pub max_abs_deviation: f64,
    /// Fraction of compared samples whose values have the same sign (both
    /// zero counts as agreement).
    pub sign_agreement: f64,
    /// Normalized inner product Σab / √(Σa²·Σb²); 1 if both sides vanish.
    pub correlation: f64,
}

fn interp(t: &[f64], y: &[f64], at: f64) -> f64 {
    // callers guarantee at ∈ [t[0], t[last]]
    let hi = t.partition_point(|v| *v < at);
    if hi == 0 {
        return y[0];
    }
    if hi == t.len() {
        return y[t.len() - 1];
    }
    let (t0, t1) = (t[hi - 1], t[hi]);
    if t1 == t0 {
        return y[hi];
    }
    let w = (at - t0) / (t1 - t0);
    y[hi - 1] * (1.0 - w) + y[hi] * w
}

/// Compare `channel` between two series. The series with the larger mean
/// time step supplies the comparison stamps; the other is linearly
/// interpolated onto them. Only the overlapping time range is compared.
pub fn compare_series(a: &ObservableSeries, b: &ObservableSeries, channel: &str) -> Result<ComparisonStats> {
    let ya = a.channel(channel)?;
    let yb = b.channel(channel)?;
    let span = |s: &ObservableSeries| {
        if s.len() > 1 {
            (s.t[s.len() - 1] - s.t[0]) / (s.len() - 1) as f64
        } else {
            f64::INFINITY
        }
    };
    let a_coarser = span(a) >= span(b);
    let (ct, cy, ft, fy) = if a_coarser { (&a.t, ya, &b.t, yb) } else { (&b.t, yb, &a.t, ya) };

    let lo = a.t[0].max(b.t[0]);
    let hi = a.t[a.len() - 1].min(b.t[b.len() - 1]);
    let mut pairs: Vec<(f64, f64)> = Vec::new();
    for (i, &t) in ct.iter().enumerate() {
        if t < lo || t > hi {
            continue;
        }
        let coarse = cy[i];
        let fine = interp(ft, fy, t);
        // keep (value from a, value from b) orientation stable
        pairs.push(if a_coarser { (coarse, fine) } else { (fine, coarse) });
    }
    if pairs.is_empty() {
        return Err(Error::EmptyOverlap);
    }

    let max_abs_deviation = pairs.iter().map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let agree = pairs
        .iter()
        .filter(|(u, v)| u * v > 0.0 || (*u == 0.0 && *v == 0.0))
        .count();
    let sign_agreement = agree as f64 / pairs.len() as f64;
    let suv: f64 = pairs.iter().map(|(u, v)| u * v).sum();
    let suu: f64 = pairs.iter().map(|(u, _)| u * u).sum();
    let svv: f64 = pairs.iter().map(|(_, v)| v * v).sum();
    let correlation = if suu == 0.0 && svv == 0.0 {
        1.0
    } else if suu == 0.0 || svv == 0.0 {
        0.0
    } else {
        suv / (suu * svv).sqrt()
    };
    Ok(ComparisonStats { max_abs_deviation, sign_agreement, correlation })
}
