//! Run configuration: a flat key/value file format (`section.key = value`
//! lines, `#` comments), named presets, validation with precise error
//! locations, and a canonical serialization that parses back to the same
//! configuration.

use crate::error::{Error, Result};
use crate::grid::Channel;
use crate::semiclassical::SpinFactor;

/// Which engine a run drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Quantum,
    Semiclassical,
    Twa,
    Gauge,
}

impl Engine {
    pub fn as_str(self) -> &'static str {
        match self {
            Engine::Quantum => "quantum",
            Engine::Semiclassical => "semiclassical",
            Engine::Twa => "twa",
            Engine::Gauge => "gauge",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "quantum" => Some(Engine::Quantum),
            "semiclassical" => Some(Engine::Semiclassical),
            "twa" => Some(Engine::Twa),
            "gauge" => Some(Engine::Gauge),
            _ => None,
        }
    }
}

/// Fully resolved run description. The default value is the full quantum
/// transverse-drift scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: Engine,
    pub omega: f64,
    pub k: f64,
    pub x0: f64,
    pub y0: f64,
    pub sigma: f64,
    pub channel: Channel,
    pub spin0: [f64; 3],
    pub n: usize,
    pub extent: f64,
    pub dt: f64,
    pub t_final: f64,
    pub record_stride: usize,
    pub snapshots: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub spin_factor: SpinFactor,
    pub delta_initial: bool,
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engine: Engine::Quantum,
            omega: 0.02,
            k: 0.01,
            x0: 10.0,
            y0: 0.0,
            sigma: 1.0,
            channel: Channel::One,
            spin0: [0.0, 0.0, 1.0],
            n: 256,
            extent: 25.0,
            dt: 0.1,
            t_final: 15000.0,
            record_stride: 100,
            snapshots: vec![15000.0],
            n_traj: 50_000,
            seed: 1,
            spin_factor: SpinFactor::One,
            delta_initial: false,
            out_dir: "out".to_string(),
        }
    }
}

pub const PRESET_NAMES: [&str; 4] =
    ["drift-quantum", "drift-semiclassical", "drift-twa", "gauge-report"];

/// Embedded configuration text of a named preset.
pub fn preset_text(name: &str) -> Result<&'static str> {
    match name {
        "drift-quantum" => Ok("# full quantum run of the transverse-drift scenario\n\
             engine = quantum\n"),
        "drift-semiclassical" => Ok("# single classical spin-orbit trajectory from the packet center\n\
             engine = semiclassical\n\
             plan.dt = 0.01\n\
             plan.record_stride = 1000\n"),
        "drift-twa" => Ok("# Wigner-sampled trajectory ensemble with doubled spin precession\n\
             engine = twa\n\
             twa.spin_factor = 2\n"),
        "gauge-report" => Ok("# static gauge-structure summary, no time evolution\n\
             engine = gauge\n"),
        _ => Err(Error::UnknownPreset { name: name.to_string() }),
    }
}

/// Parse and validate a named preset.
pub fn load_preset(name: &str) -> Result<RunConfig> {
    parse_config(preset_text(name)?)
}

fn syntax(line: usize, msg: impl Into<String>) -> Error {
    Error::ConfigSyntax { line, msg: msg.into() }
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| syntax(line, format!("{key} expects a number, got '{v}'")))
}

fn parse_usize(line: usize, key: &str, v: &str) -> Result<usize> {
    v.trim()
        .parse::<usize>()
        .map_err(|_| syntax(line, format!("{key} expects a non-negative integer, got '{v}'")))
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.trim()
        .parse::<u64>()
        .map_err(|_| syntax(line, format!("{key} expects a non-negative integer, got '{v}'")))
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(syntax(line, format!("{key} expects true or false, got '{other}'"))),
    }
}

fn parse_f64_list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|part| parse_f64(line, key, part)).collect()
}

/// Apply one key/value pair (line number is for error reporting; command
/// line overrides pass 0).
pub fn apply_key(cfg: &mut RunConfig, key: &str, value: &str, line: usize) -> Result<()> {
    match key {
        "engine" => {
            cfg.engine = Engine::parse(value.trim()).ok_or_else(|| {
                syntax(line, format!("engine must be one of quantum, semiclassical, twa, gauge; got '{value}'"))
            })?;
        }
        "model.omega" => cfg.omega = parse_f64(line, key, value)?,
        "model.k" => cfg.k = parse_f64(line, key, value)?,
        "initial.x0" => cfg.x0 = parse_f64(line, key, value)?,
        "initial.y0" => cfg.y0 = parse_f64(line, key, value)?,
        "initial.sigma" => cfg.sigma = parse_f64(line, key, value)?,
        "initial.channel" => {
            cfg.channel = match parse_u64(line, key, value)? {
                1 => Channel::One,
                2 => Channel::Two,
                other => {
                    return Err(Error::ConfigDomain {
                        key: key.to_string(),
                        msg: format!("channel must be 1 or 2, got {other}"),
                    })
                }
            };
        }
        "initial.spin0" => {
            let list = parse_f64_list(line, key, value)?;
            if list.len() != 3 {
                return Err(syntax(line, format!("{key} expects three comma-separated numbers")));
            }
            cfg.spin0 = [list[0], list[1], list[2]];
        }
        "grid.n" => cfg.n = parse_usize(line, key, value)?,
        "grid.extent" => cfg.extent = parse_f64(line, key, value)?,
        "plan.dt" => cfg.dt = parse_f64(line, key, value)?,
        "plan.t_final" => cfg.t_final = parse_f64(line, key, value)?,
        "plan.record_stride" => cfg.record_stride = parse_usize(line, key, value)?,
        "plan.snapshots" => cfg.snapshots = parse_f64_list(line, key, value)?,
        "twa.n_traj" => cfg.n_traj = parse_usize(line, key, value)?,
        "twa.seed" => cfg.seed = parse_u64(line, key, value)?,
        "twa.spin_factor" => {
            let v = parse_u64(line, key, value)?;
            cfg.spin_factor = SpinFactor::from_int(v).map_err(|_| Error::ConfigDomain {
                key: key.to_string(),
                msg: format!("spin factor must be 1 or 2, got {v}"),
            })?;
        }
        "twa.delta_initial" => cfg.delta_initial = parse_bool(line, key, value)?,
        "output.dir" => {
            let v = value.trim();
            if v.is_empty() {
                return Err(Error::ConfigDomain {
                    key: key.to_string(),
                    msg: "output directory must not be empty".to_string(),
                });
            }
            cfg.out_dir = v.to_string();
        }
        _ => return Err(Error::UnknownKey { line, key: key.to_string() }),
    }
    Ok(())
}

/// Domain checks on a fully assembled configuration, with the offending key
/// in every error.
pub fn validate_config(cfg: &RunConfig) -> Result<()> {
    let domain = |key: &str, msg: String| Error::ConfigDomain { key: key.to_string(), msg };
    if !cfg.omega.is_finite() || cfg.omega <= 0.0 {
        return Err(domain("model.omega", format!("omega must be positive and finite, got {}", cfg.omega)));
    }
    if !cfg.k.is_finite() || cfg.k < 0.0 {
        return Err(domain("model.k", format!("k must be non-negative and finite, got {}", cfg.k)));
    }
    for (key, v) in [("initial.x0", cfg.x0), ("initial.y0", cfg.y0)] {
        if !v.is_finite() {
            return Err(domain(key, format!("must be finite, got {v}")));
        }
    }
    if !cfg.sigma.is_finite() || cfg.sigma <= 0.0 {
        return Err(domain("initial.sigma", format!("sigma must be positive and finite, got {}", cfg.sigma)));
    }
    let s2: f64 = cfg.spin0.iter().map(|v| v * v).sum();
    if !s2.is_finite() || s2 > 1.0 + 1e-12 {
        return Err(domain("initial.spin0", format!("spin must fit in the unit ball, |spin0| = {}", s2.sqrt())));
    }
    if cfg.n < 8 || !cfg.n.is_power_of_two() {
        return Err(domain("grid.n", format!("n must be a power of two of at least 8, got {}", cfg.n)));
    }
    if !cfg.extent.is_finite() || cfg.extent <= 0.0 {
        return Err(domain("grid.extent", format!("extent must be positive and finite, got {}", cfg.extent)));
    }
    if !cfg.dt.is_finite() || cfg.dt <= 0.0 {
        return Err(domain("plan.dt", format!("dt must be positive and finite, got {}", cfg.dt)));
    }
    if !cfg.t_final.is_finite() || cfg.t_final < cfg.dt {
        return Err(domain("plan.t_final", format!("t_final must be finite and at least dt, got {}", cfg.t_final)));
    }
    if cfg.record_stride == 0 {
        return Err(domain("plan.record_stride", "record_stride must be at least 1".to_string()));
    }
    for &ts in &cfg.snapshots {
        if !ts.is_finite() || ts < 0.0 {
            return Err(domain("plan.snapshots", format!("snapshot times must be finite and non-negative, got {ts}")));
        }
    }
    if cfg.n_traj == 0 {
        return Err(domain("twa.n_traj", "n_traj must be at least 1".to_string()));
    }
    Ok(())
}

/// Parse configuration text into a validated RunConfig, starting from the
/// defaults. Lines are `key = value` (with dotted section prefixes except
/// for `engine`); `#` starts a comment.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("expected 'key = value', got '{line}'")))?;
        apply_key(&mut cfg, key.trim(), value, line_no)?;
    }
    validate_config(&cfg)?;
    Ok(cfg)
}

/// Canonical dump of a configuration; parse_config(serialize_config(c)) == c.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let list = |vals: &[f64]| {
        vals.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
    };
    let spin_factor = match cfg.spin_factor {
        SpinFactor::One => 1,
        SpinFactor::Two => 2,
    };
    let channel = match cfg.channel {
        Channel::One => 1,
        Channel::Two => 2,
    };
    format!(
        "engine = {}\n\
         model.omega = {}\n\
         model.k = {}\n\
         initial.x0 = {}\n\
         initial.y0 = {}\n\
         initial.sigma = {}\n\
         initial.channel = {}\n\
         initial.spin0 = {}\n\
         grid.n = {}\n\
         grid.extent = {}\n\
         plan.dt = {}\n\
         plan.t_final = {}\n\
         plan.record_stride = {}\n\
         plan.snapshots = {}\n\
         twa.n_traj = {}\n\
         twa.seed = {}\n\
         twa.spin_factor = {}\n\
         twa.delta_initial = {}\n\
         output.dir = {}\n",
        cfg.engine.as_str(),
        cfg.omega,
        cfg.k,
        cfg.x0,
        cfg.y0,
        cfg.sigma,
        channel,
        list(&cfg.spin0),
        cfg.n,
        cfg.extent,
        cfg.dt,
        cfg.t_final,
        cfg.record_stride,
        list(&cfg.snapshots),
        cfg.n_traj,
        cfg.seed,
        spin_factor,
        cfg.delta_initial,
        cfg.out_dir,
    )
}
