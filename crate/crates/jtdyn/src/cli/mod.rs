//! Command-line driver: argument parsing, engine dispatch, and the file
//! inventory each run writes into its output directory.

pub mod config;
pub mod output;

pub use config::{
    load_preset, parse_config, preset_text, serialize_config, validate_config, Engine, RunConfig,
    PRESET_NAMES,
};
pub use output::{
    emit_heatmap, read_heatmap_csv, read_series_csv, write_series_csv, Heatmap,
};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::analysis::conservation_report;
use crate::error::{Error, Result};
use crate::grid::{projected_distribution, make_gaussian, Axis, Grid2D};
use crate::model::{
    berry_phase_loop, dual_gauge, dual_lorentz_force, field_tensor, frobenius_norm,
    wilson_loop_product, Mat2, ModelParams, Point2,
};
use crate::propagator::{propagate, ObserverConfig, PropagationPlan};
use crate::semiclassical::{rk4_integrate, ClassicalState};
use crate::twa::{ensemble_histogram, run_ensemble, EnsembleSpec, Histogram2D, ScatterSpace};

/// What a completed run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Every file written, in write order.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Time tag for file names: integral times drop the fraction, others swap
/// the decimal point for 'p' so the name stays portable.
fn fmt_time(t: f64) -> String {
    if t == t.trunc() && t.abs() < 1e15 {
        format!("{}", t as i64)
    } else {
        format!("{t}").replace('.', "p").replace('-', "m")
    }
}

fn centers((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    let w = (hi - lo) / n as f64;
    (0..n).map(|i| lo + (i as f64 + 0.5) * w).collect()
}

fn histogram_to_heatmap(h: &Histogram2D) -> Heatmap {
    Heatmap {
        x_coords: centers(h.x_range, h.nx),
        y_coords: centers(h.y_range, h.ny),
        values: h.counts.iter().map(|&c| c as f64).collect(),
    }
}

fn fmt_mat(m: &Mat2) -> String {
    let e = |r: usize, c: usize| {
        let v = m[(r, c)];
        format!("{:+.6}{:+.6}i", v.re, v.im)
    };
    format!("[[{}, {}], [{}, {}]]", e(0, 0), e(0, 1), e(1, 0), e(1, 1))
}

fn run_quantum(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>, warnings: &mut Vec<String>) -> Result<()> {
    let grid = Grid2D::new(cfg.n, cfg.extent)?;
    let params = ModelParams::new(cfg.omega, cfg.k)?;
    let field = make_gaussian(grid, Point2::new(cfg.x0, cfg.y0), cfg.sigma, cfg.channel)?;
    let plan = PropagationPlan::new(cfg.dt, cfg.t_final, cfg.record_stride)?;
    let observers = ObserverConfig { snapshot_times: cfg.snapshots.clone() };
    let out = propagate(&field, &params, &plan, &observers)?;
    warnings.extend(out.warnings.iter().cloned());

    let series_path = dir.join("series.csv");
    output::write_series_csv(&series_path, &out.series)?;
    files.push(series_path);

    let cons_path = dir.join("conservation.txt");
    output::write_conservation(&cons_path, &conservation_report(&out.series)?)?;
    files.push(cons_path);

    let positions = grid.positions();
    let momenta = grid.momenta_sorted();
    for snap in &out.snapshots {
        let tag = fmt_time(snap.t);
        let pos_hm = Heatmap::new(positions.clone(), positions.clone(), snap.position_density.clone())?;
        let paths = output::emit_heatmap(&pos_hm, &dir.join(format!("position_density_t{tag}")), warnings)?;
        files.extend(paths);
        let mom_hm = Heatmap::new(momenta.clone(), momenta.clone(), snap.momentum_density.clone())?;
        let paths = output::emit_heatmap(&mom_hm, &dir.join(format!("momentum_density_t{tag}")), warnings)?;
        files.extend(paths);
    }

    let marginal = projected_distribution(&out.final_field, Axis::Y);
    let marg_path = dir.join("marginal_qy.csv");
    output::write_marginal_csv(&marg_path, "y", &positions, &marginal)?;
    files.push(marg_path);
    Ok(())
}

fn run_semiclassical(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let params = ModelParams::new(cfg.omega, cfg.k)?;
    let s0 = ClassicalState::new(cfg.x0, cfg.y0, 0.0, 0.0, cfg.spin0);
    let traj = rk4_integrate(&s0, &params, cfg.dt, cfg.t_final, cfg.spin_factor, cfg.record_stride)?;
    let series = traj.to_series(&params)?;

    let series_path = dir.join("series.csv");
    output::write_series_csv(&series_path, &series)?;
    files.push(series_path);

    let cons_path = dir.join("conservation.txt");
    output::write_conservation(&cons_path, &conservation_report(&series)?)?;
    files.push(cons_path);
    Ok(())
}

fn run_twa(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>, warnings: &mut Vec<String>) -> Result<()> {
    let params = ModelParams::new(cfg.omega, cfg.k)?;
    let spec = EnsembleSpec {
        n_traj: cfg.n_traj,
        center: Point2::new(cfg.x0, cfg.y0),
        sigma: cfg.sigma,
        spin0: cfg.spin0,
        seed: cfg.seed,
        dt: cfg.dt,
        t_final: cfg.t_final,
        spin_factor: cfg.spin_factor,
        record_stride: cfg.record_stride,
        delta_initial: cfg.delta_initial,
    };
    let result = run_ensemble(&spec, &params)?;

    let series_path = dir.join("series.csv");
    output::write_series_csv(&series_path, &result.series)?;
    files.push(series_path);

    let se_path = dir.join("stderr.csv");
    output::write_series_csv(&se_path, &result.std_errors)?;
    files.push(se_path);

    let cons_path = dir.join("conservation.txt");
    output::write_conservation(&cons_path, &conservation_report(&result.series)?)?;
    files.push(cons_path);

    for (space, name) in [(ScatterSpace::Position, "scatter_position"), (ScatterSpace::Momentum, "scatter_momentum")] {
        let hist = ensemble_histogram(&result, space, (128, 128), None)?;
        let hm = histogram_to_heatmap(&hist);
        let paths = output::emit_heatmap(&hm, &dir.join(name), warnings)?;
        files.extend(paths);
    }
    Ok(())
}

fn run_gauge(cfg: &RunConfig, dir: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let params = ModelParams::new(cfg.omega, cfg.k)?;
    let mut text = String::new();
    writeln!(text, "gauge structure report (omega = {}, k = {})", cfg.omega, cfg.k).unwrap();
    writeln!(text).unwrap();

    for radius in [0.5, 1.0, 5.0] {
        let phase = berry_phase_loop(radius, 360)?;
        writeln!(text, "berry phase, radius {radius}: {phase:.12}").unwrap();
    }
    let wilson = wilson_loop_product(1.0, 360)?;
    writeln!(text, "wilson loop product, radius 1: {:+.12}{:+.12}i", wilson.re, wilson.im).unwrap();
    writeln!(text).unwrap();

    writeln!(text, "field tensor residual (frobenius norm, step 1e-4):").unwrap();
    for q in [(2.0, 0.0), (0.0, 3.0), (1.0, 1.0), (-4.0, 2.0)] {
        let f = field_tensor(Point2::new(q.0, q.1), 1e-4)?;
        writeln!(text, "  at ({:+.1}, {:+.1}): {:.3e}", q.0, q.1, frobenius_norm(&f)).unwrap();
    }
    writeln!(text).unwrap();

    let dual = dual_gauge(&params);
    writeln!(text, "dual gauge potential Ax: {}", fmt_mat(&dual.atilde_x)).unwrap();
    writeln!(text, "dual gauge potential Ay: {}", fmt_mat(&dual.atilde_y)).unwrap();
    writeln!(text, "dual scalar potential: {:.12}", dual.phi_tilde).unwrap();
    writeln!(text, "dual magnetic field coefficient: {:.12}", dual.bz_coefficient).unwrap();
    let force = dual_lorentz_force(Point2::new(10.0, 0.0), 1.0, &params);
    // + 0.0 turns a negative zero into the plain one for display
    writeln!(text, "dual lorentz force at (10, 0), spin_z = 1: ({:.12}, {:.12})", force.x + 0.0, force.y + 0.0).unwrap();

    let path = dir.join("gauge_report.txt");
    fs::write(&path, text)?;
    files.push(path);
    Ok(())
}

/// Validate a configuration, run its engine, and write the output files.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    validate_config(cfg)?;
    let dir = PathBuf::from(&cfg.out_dir);
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    match cfg.engine {
        Engine::Quantum => run_quantum(cfg, &dir, &mut files, &mut warnings)?,
        Engine::Semiclassical => run_semiclassical(cfg, &dir, &mut files)?,
        Engine::Twa => run_twa(cfg, &dir, &mut files, &mut warnings)?,
        Engine::Gauge => run_gauge(cfg, &dir, &mut files)?,
    }
    let meta_path = dir.join("metadata.txt");
    output::write_metadata(&meta_path, cfg, "ok", &warnings)?;
    files.push(meta_path);
    Ok(RunOutcome { files, warnings })
}

/// Parsed command line (everything after the program name).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CliInvocation {
    /// Preset name or configuration file path.
    pub source: String,
    /// `--set key=value` pairs, in order.
    pub overrides: Vec<(String, String)>,
    pub out_dir: Option<String>,
    pub seed: Option<u64>,
    pub help: bool,
}

/// Parse CLI arguments: `<preset|config-path> [--set key=value]...
/// [--out DIR] [--seed N]`, plus `-h`/`--help`.
pub fn parse_cli_args(args: &[String]) -> Result<CliInvocation> {
    let mut inv = CliInvocation::default();
    let mut it = args.iter();
    let bad = |msg: String| Error::InvalidInput(msg);
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "-h" | "--help" => inv.help = true,
            "--set" => {
                let pair = it.next().ok_or_else(|| bad("--set needs key=value".into()))?;
                let (key, value) = pair
                    .split_once('=')
                    .ok_or_else(|| bad(format!("--set expects key=value, got '{pair}'")))?;
                inv.overrides.push((key.trim().to_string(), value.trim().to_string()));
            }
            "--out" => {
                let dir = it.next().ok_or_else(|| bad("--out needs a directory".into()))?;
                inv.out_dir = Some(dir.clone());
            }
            "--seed" => {
                let v = it.next().ok_or_else(|| bad("--seed needs a value".into()))?;
                inv.seed = Some(
                    v.parse::<u64>()
                        .map_err(|_| bad(format!("--seed expects a non-negative integer, got '{v}'")))?,
                );
            }
            flag if flag.starts_with('-') => {
                return Err(bad(format!("unknown flag '{flag}'")));
            }
            positional => {
                if !inv.source.is_empty() {
                    return Err(bad(format!(
                        "unexpected second positional argument '{positional}' (already running '{}')",
                        inv.source
                    )));
                }
                inv.source = positional.to_string();
            }
        }
    }
    if inv.source.is_empty() && !inv.help {
        return Err(bad("missing preset name or configuration path".into()));
    }
    Ok(inv)
}
