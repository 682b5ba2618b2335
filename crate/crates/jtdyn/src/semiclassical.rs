//! Classical spin-orbit dynamics: a point particle in the harmonic trap
//! carrying a precessing spin vector, integrated with fixed-step RK4. The
//! spin precession rate carries a selectable factor (1 or 2) that sets how
//! fast the spin winds relative to the orbital motion.

use crate::analysis::ObservableSeries;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Phase-space point plus classical spin vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
}

impl ClassicalState {
    pub fn new(x: f64, y: f64, px: f64, py: f64, spin: [f64; 3]) -> Self {
        ClassicalState { x, y, px, py, sx: spin[0], sy: spin[1], sz: spin[2] }
    }

    pub fn spin_norm(&self) -> f64 {
        (self.sx * self.sx + self.sy * self.sy + self.sz * self.sz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.px, self.py, self.sx, self.sy, self.sz]
            .iter()
            .all(|v| v.is_finite())
    }

    fn scaled_add(&self, d: &ClassicalState, h: f64) -> ClassicalState {
        ClassicalState {
            x: self.x + h * d.x,
            y: self.y + h * d.y,
            px: self.px + h * d.px,
            py: self.py + h * d.py,
            sx: self.sx + h * d.sx,
            sy: self.sy + h * d.sy,
            sz: self.sz + h * d.sz,
        }
    }
}

/// Spin precession rate multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinFactor {
    One,
    Two,
}

impl SpinFactor {
    pub fn as_f64(self) -> f64 {
        match self {
            SpinFactor::One => 1.0,
            SpinFactor::Two => 2.0,
        }
    }

    pub fn from_int(v: u64) -> Result<Self> {
        match v {
            1 => Ok(SpinFactor::One),
            2 => Ok(SpinFactor::Two),
            _ => Err(Error::InvalidInput(format!("spin factor must be 1 or 2, got {v}"))),
        }
    }
}

/// Time derivative of the coupled orbit-spin system:
///   ẋ = ω·px,  ṗx = −ω·x − k·sx,
///   ẏ = ω·py,  ṗy = −ω·y − k·sy,
///   Ṡ = f·(B × S) with B = (k·x, k·y, 0).
pub fn wong_rhs(s: &ClassicalState, params: &ModelParams, factor: SpinFactor) -> ClassicalState {
    let f = factor.as_f64();
    let k = params.k;
    let w = params.omega;
    ClassicalState {
        x: w * s.px,
        y: w * s.py,
        px: -w * s.x - k * s.sx,
        py: -w * s.y - k * s.sy,
        sx: f * k * s.y * s.sz,
        sy: -f * k * s.x * s.sz,
        sz: f * k * (s.x * s.sy - s.y * s.sx),
    }
}

/// One classical RK4 step of size dt.
pub fn rk4_step(s: &ClassicalState, params: &ModelParams, dt: f64, factor: SpinFactor) -> ClassicalState {
    let k1 = wong_rhs(s, params, factor);
    let k2 = wong_rhs(&s.scaled_add(&k1, 0.5 * dt), params, factor);
    let k3 = wong_rhs(&s.scaled_add(&k2, 0.5 * dt), params, factor);
    let k4 = wong_rhs(&s.scaled_add(&k3, dt), params, factor);
    let mut out = s.scaled_add(&k1, dt / 6.0);
    out = out.scaled_add(&k2, dt / 3.0);
    out = out.scaled_add(&k3, dt / 3.0);
    out.scaled_add(&k4, dt / 6.0)
}

/// Classical energy ω(p² + q²)/2 + k·(x·sx + y·sy).
pub fn classical_energy(s: &ClassicalState, params: &ModelParams) -> f64 {
    0.5 * params.omega * (s.px * s.px + s.py * s.py + s.x * s.x + s.y * s.y)
        + params.k * (s.x * s.sx + s.y * s.sy)
}

/// Recorded classical trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
}

impl Trajectory {
    /// Emit the standard observable schema. norm reports the spin magnitude
    /// (conserved by the exact flow); jz reports x·py − y·px + sz/2, which
    /// the factor-2 flow conserves (the factor-1 flow conserves
    /// x·py − y·px + sz instead); populations project the spin on the local
    /// radial axis, (1 ∓ S·n̂)/2, with the even split at the origin.
    pub fn to_series(&self, params: &ModelParams) -> Result<ObservableSeries> {
        let n = self.times.len();
        let mut cols: Vec<Vec<f64>> = (0..12).map(|_| Vec::with_capacity(n)).collect();
        for s in &self.states {
            for (col, v) in cols.iter_mut().zip(observable_row(s, params)) {
                col.push(v);
            }
        }
        ObservableSeries::with_standard_channels(self.times.clone(), cols)
    }
}

/// Values of the standard observable channels for one classical state.
pub(crate) fn observable_row(s: &ClassicalState, params: &ModelParams) -> [f64; 12] {
    let rho = s.x.hypot(s.y);
    let radial = if rho > 0.0 { (s.sx * s.x + s.sy * s.y) / rho } else { 0.0 };
    [
        s.x,
        s.y,
        s.px,
        s.py,
        s.sx,
        s.sy,
        s.sz,
        s.spin_norm(),
        classical_energy(s, params),
        s.x * s.py - s.y * s.px + 0.5 * s.sz,
        0.5 * (1.0 - radial),
        0.5 * (1.0 + radial),
    ]
}

/// Integrate from s0 to t_final with fixed step dt, keeping every
/// record_stride-th state (plus the initial and final ones).
pub fn rk4_integrate(
    s0: &ClassicalState,
    params: &ModelParams,
    dt: f64,
    t_final: f64,
    factor: SpinFactor,
    record_stride: usize,
) -> Result<Trajectory> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidInput(format!("dt must be positive and finite, got {dt}")));
    }
    if !t_final.is_finite() || t_final < dt {
        return Err(Error::InvalidInput(format!(
            "t_final must be finite and at least dt, got {t_final}"
        )));
    }
    if record_stride == 0 {
        return Err(Error::InvalidInput("record_stride must be at least 1".into()));
    }
    if !s0.is_finite() {
        return Err(Error::NonFinite { t: 0.0, what: "classical state" });
    }
    let n_steps = ((t_final / dt).round() as usize).max(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut s = *s0;
    times.push(0.0);
    states.push(s);
    for step in 1..=n_steps {
        s = rk4_step(&s, params, dt, factor);
        if !s.is_finite() {
            return Err(Error::NonFinite { t: step as f64 * dt, what: "classical state" });
        }
        if step % record_stride == 0 || step == n_steps {
            times.push(step as f64 * dt);
            states.push(s);
        }
    }
    Ok(Trajectory { times, states })
}

/// Leading-order transverse displacement ω·k²·x0·t³/6 for release from
/// (x0, 0) at rest with spin +z and unit precession factor.
pub fn short_time_prediction(t: f64, params: &ModelParams, x0: f64) -> f64 {
    params.omega * params.k * params.k * x0 * t * t * t / 6.0
}
