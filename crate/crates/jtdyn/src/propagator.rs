//! Strang split-operator time evolution: exact diagonal kinetic phases in
//! the Fourier representation alternating with the exact 2×2 unitary of the
//! local potential. Second order in dt, unitary to rounding at every step.

use num_complex::Complex64 as C64;

use crate::analysis::ObservableSeries;
use crate::error::{Error, Result};
use crate::grid::{
    adiabatic_populations, densities, edge_density_max, expectation_jz, expectation_momentum,
    expectation_position, norm, spin_expectations, Fft2D, Grid2D, SpinorField,
};
use crate::model::ModelParams;

/// Step size, total time, and record cadence for a propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPlan {
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
}

impl PropagationPlan {
    pub fn new(dt: f64, t_final: f64, record_stride: usize) -> Result<Self> {
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
        Ok(PropagationPlan { dt, t_final, record_stride })
    }

    /// Number of integration steps the plan performs.
    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

/// Extra captures requested alongside the scalar records.
#[derive(Debug, Clone, Default)]
pub struct ObserverConfig {
    /// Times at which to store full position/momentum densities; each is
    /// matched to the nearest step.
    pub snapshot_times: Vec<f64>,
}

/// Densities captured at one instant (momentum axes monotonic).
#[derive(Debug, Clone)]
pub struct DensitySnapshot {
    pub t: f64,
    pub position_density: Vec<f64>,
    pub momentum_density: Vec<f64>,
}

#[derive(Debug)]
pub struct PropagationOutput {
    pub series: ObservableSeries,
    pub final_field: SpinorField,
    pub snapshots: Vec<DensitySnapshot>,
    pub warnings: Vec<String>,
}

/// Diagonal kinetic phases exp(−i·ω·p²·dt/2) on the FFT-ordered momentum
/// lattice.
fn build_kinetic_table(grid: Grid2D, omega: f64, dt: f64) -> Vec<C64> {
    let n = grid.n();
    let ps = grid.momenta_fft_order();
    let mut table = vec![C64::new(0.0, 0.0); n * n];
    for ky in 0..n {
        let py2 = ps[ky] * ps[ky];
        for kx in 0..n {
            let p2 = ps[kx] * ps[kx] + py2;
            table[ky * n + kx] = C64::from_polar(1.0, -0.5 * omega * p2 * dt);
        }
    }
    table
}

/// Per-cell entries of exp(−i·V(q)·dt): common diagonal d and the two
/// off-diagonal couplings (o12 upper, o21 lower).
struct PotentialTable {
    d: Vec<C64>,
    o12: Vec<C64>,
    o21: Vec<C64>,
}

fn build_potential_table(grid: Grid2D, params: &ModelParams, dt: f64) -> PotentialTable {
    let n = grid.n();
    let xs = grid.positions();
    let len = n * n;
    let mut d = vec![C64::new(0.0, 0.0); len];
    let mut o12 = vec![C64::new(0.0, 0.0); len];
    let mut o21 = vec![C64::new(0.0, 0.0); len];
    for iy in 0..n {
        let y = xs[iy];
        for ix in 0..n {
            let x = xs[ix];
            let idx = iy * n + ix;
            let rho = x.hypot(y);
            let a = 0.5 * params.omega * rho * rho;
            let ph = C64::from_polar(1.0, -a * dt);
            let theta = params.k * rho * dt;
            if rho > 0.0 {
                let eiphi = C64::new(x / rho, y / rho);
                let s = ph * C64::new(0.0, -theta.sin());
                d[idx] = ph * theta.cos();
                o12[idx] = s * eiphi.conj();
                o21[idx] = s * eiphi;
            } else {
                d[idx] = ph;
            }
        }
    }
    PotentialTable { d, o12, o21 }
}

fn apply_potential(table: &PotentialTable, field: &mut SpinorField) {
    for i in 0..field.c1.len() {
        let a = field.c1[i];
        let b = field.c2[i];
        field.c1[i] = table.d[i] * a + table.o12[i] * b;
        field.c2[i] = table.o21[i] * a + table.d[i] * b;
    }
}

fn apply_kinetic(fft: &mut Fft2D, table: &[C64], field: &mut SpinorField) {
    for c in [&mut field.c1, &mut field.c2] {
        fft.forward(c);
        for (v, ph) in c.iter_mut().zip(table) {
            *v *= ph;
        }
        fft.inverse(c);
    }
}

/// One free-motion step exp(−i·T·dt) of the given duration.
pub fn kinetic_step(field: &mut SpinorField, params: &ModelParams, dt: f64) {
    let table = build_kinetic_table(field.grid, params.omega, dt);
    let mut fft = Fft2D::new(field.grid.n());
    apply_kinetic(&mut fft, &table, field);
}

/// One local-potential step exp(−i·V·dt), exact per cell.
pub fn potential_step(field: &mut SpinorField, params: &ModelParams, dt: f64) {
    let table = build_potential_table(field.grid, params, dt);
    apply_potential(&table, field);
}

/// One Strang step: half kinetic, full potential, half kinetic.
pub fn strang_step(field: &mut SpinorField, params: &ModelParams, dt: f64) {
    let kin_half = build_kinetic_table(field.grid, params.omega, 0.5 * dt);
    let pot = build_potential_table(field.grid, params, dt);
    let mut fft = Fft2D::new(field.grid.n());
    apply_kinetic(&mut fft, &kin_half, field);
    apply_potential(&pot, field);
    apply_kinetic(&mut fft, &kin_half, field);
}

/// Total energy ⟨T⟩ + ⟨V⟩ of a field.
pub fn expectation_energy(field: &SpinorField, params: &ModelParams) -> Result<f64> {
    let n = field.grid.n();
    let d = field.grid.spacing();
    let xs = field.grid.positions();

    let mut norm2 = 0.0;
    let mut v_sum = 0.0;
    for iy in 0..n {
        let y = xs[iy];
        for ix in 0..n {
            let x = xs[ix];
            let idx = iy * n + ix;
            let (a, b) = (field.c1[idx], field.c2[idx]);
            let den = a.norm_sqr() + b.norm_sqr();
            let cross = a.conj() * b;
            norm2 += den;
            v_sum += 0.5 * params.omega * (x * x + y * y) * den
                + params.k * (x * 2.0 * cross.re + y * 2.0 * cross.im);
        }
    }
    norm2 *= d * d;
    if !(norm2 > 0.0) {
        return Err(Error::ZeroNorm);
    }

    let mut fft = Fft2D::new(n);
    let ps = field.grid.momenta_fft_order();
    let mut t_sum = 0.0;
    for c in [&field.c1, &field.c2] {
        let mut hat = c.clone();
        fft.forward(&mut hat);
        for ky in 0..n {
            let py2 = ps[ky] * ps[ky];
            for kx in 0..n {
                let p2 = ps[kx] * ps[kx] + py2;
                t_sum += 0.5 * params.omega * p2 * hat[ky * n + kx].norm_sqr();
            }
        }
    }
    let w = d * d / (n * n) as f64;
    Ok((w * t_sum + d * d * v_sum) / norm2)
}

const EDGE_DENSITY_LIMIT: f64 = 1e-8;

struct Recorder {
    t: Vec<f64>,
    cols: [Vec<f64>; 12],
    support_warned: bool,
}

impl Recorder {
    fn new() -> Self {
        Recorder { t: Vec::new(), cols: Default::default(), support_warned: false }
    }

    fn record(
        &mut self,
        t: f64,
        field: &SpinorField,
        params: &ModelParams,
        warnings: &mut Vec<String>,
    ) -> Result<()> {
        let nrm = norm(field);
        if !nrm.is_finite() {
            return Err(Error::NonFinite { t, what: "norm" });
        }
        let q = expectation_position(field)?;
        let p = expectation_momentum(field)?;
        let s = spin_expectations(field)?;
        let energy = expectation_energy(field, params)?;
        let jz = expectation_jz(field)?;
        let (pm, pp) = adiabatic_populations(field)?;
        if !self.support_warned {
            let edge = edge_density_max(field);
            if edge > EDGE_DENSITY_LIMIT {
                warnings.push(format!(
                    "support monitor: edge density {edge:.3e} exceeds {EDGE_DENSITY_LIMIT:.0e} at t = {t}"
                ));
                self.support_warned = true;
            }
        }
        self.t.push(t);
        for (col, v) in self.cols.iter_mut().zip([
            q.x, q.y, p.x, p.y, s[0], s[1], s[2], nrm, energy, jz, pm, pp,
        ]) {
            col.push(v);
        }
        Ok(())
    }

    fn into_series(self) -> Result<ObservableSeries> {
        ObservableSeries::with_standard_channels(self.t, self.cols.into())
    }
}

/// Evolve a normalized field for plan.t_final, recording the full observable
/// row every record_stride steps (plus the initial and final instants) and
/// capturing densities at the requested snapshot times. Half kinetic steps
/// are fused across step boundaries between sampling instants, so the cost
/// per step is one potential pass and one kinetic pass.
pub fn propagate(
    initial: &SpinorField,
    params: &ModelParams,
    plan: &PropagationPlan,
    observers: &ObserverConfig,
) -> Result<PropagationOutput> {
    let start_norm = norm(initial);
    if (start_norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!(
            "initial field must be normalized: |norm - 1| = {:.3e}",
            (start_norm - 1.0).abs()
        )));
    }
    let n_steps = plan.n_steps();
    let dt = plan.dt;
    let mut warnings = Vec::new();
    if ((n_steps as f64) * dt - plan.t_final).abs() > 1e-9 * plan.t_final.max(1.0) {
        warnings.push(format!(
            "t_final {} is not a multiple of dt; running {} steps to t = {}",
            plan.t_final,
            n_steps,
            n_steps as f64 * dt
        ));
    }

    // Steps at which the exact Strang state must be materialized: record
    // points, the end, and snapshot targets.
    let mut sample_steps = std::collections::BTreeSet::new();
    sample_steps.insert(n_steps);
    for s in (0..n_steps).step_by(plan.record_stride) {
        sample_steps.insert(s);
    }
    let mut snapshot_steps = std::collections::BTreeSet::new();
    for &ts in &observers.snapshot_times {
        if !ts.is_finite() || ts < -0.5 * dt {
            warnings.push(format!("snapshot time {ts} is invalid; skipped"));
            continue;
        }
        let step = (ts / dt).round() as usize;
        if step > n_steps {
            warnings.push(format!("snapshot time {ts} is past t_final; skipped"));
            continue;
        }
        snapshot_steps.insert(step);
        sample_steps.insert(step);
    }

    let kin_half = build_kinetic_table(initial.grid, params.omega, 0.5 * dt);
    let kin_full = build_kinetic_table(initial.grid, params.omega, dt);
    let pot = build_potential_table(initial.grid, params, dt);
    let mut fft = Fft2D::new(initial.grid.n());

    let mut field = initial.clone();
    let mut recorder = Recorder::new();
    let mut snapshots = Vec::new();

    let sample = |step: usize,
                      field: &SpinorField,
                      recorder: &mut Recorder,
                      snapshots: &mut Vec<DensitySnapshot>,
                      warnings: &mut Vec<String>|
     -> Result<()> {
        let t = step as f64 * dt;
        if step % plan.record_stride == 0 || step == n_steps {
            recorder.record(t, field, params, warnings)?;
        }
        if snapshot_steps.contains(&step) {
            let (position_density, momentum_density) = densities(field);
            snapshots.push(DensitySnapshot { t, position_density, momentum_density });
        }
        Ok(())
    };

    sample(0, &field, &mut recorder, &mut snapshots, &mut warnings)?;
    let mut prev = 0usize;
    for &next in sample_steps.range(1..) {
        let m = next - prev;
        apply_kinetic(&mut fft, &kin_half, &mut field);
        for i in 0..m {
            apply_potential(&pot, &mut field);
            if i + 1 < m {
                apply_kinetic(&mut fft, &kin_full, &mut field);
            }
        }
        apply_kinetic(&mut fft, &kin_half, &mut field);
        sample(next, &field, &mut recorder, &mut snapshots, &mut warnings)?;
        prev = next;
    }

    Ok(PropagationOutput {
        series: recorder.into_series()?,
        final_field: field,
        snapshots,
        warnings,
    })
}
