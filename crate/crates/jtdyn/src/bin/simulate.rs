//! simulate — run one engine (quantum, semiclassical, twa, gauge) from a
//! named preset or a configuration file and write its outputs to a directory.

use std::process::ExitCode;

use jtdyn::cli::config::apply_key;
use jtdyn::cli::{
    parse_cli_args, parse_config, preset_text, run, validate_config, CliInvocation, RunOutcome,
    PRESET_NAMES,
};

fn usage() -> String {
    let mut text = String::from(
        "usage: simulate <preset|config-path> [--set key=value]... [--out DIR] [--seed N]\n\
         \n\
         Runs the engine named by the configuration and writes its files into\n\
         the output directory (override with --out). --set applies after the\n\
         file, --seed is shorthand for --set twa.seed=N.\n\
         \n\
         presets:\n",
    );
    for name in PRESET_NAMES {
        let first = preset_text(name)
            .expect("preset names are exhaustive")
            .lines()
            .next()
            .unwrap_or("")
            .trim_start_matches('#')
            .trim();
        text.push_str(&format!("  {name:<20} {first}\n"));
    }
    text
}

fn execute(inv: &CliInvocation) -> jtdyn::Result<RunOutcome> {
    let text = if PRESET_NAMES.contains(&inv.source.as_str()) {
        preset_text(&inv.source)?.to_string()
    } else {
        std::fs::read_to_string(&inv.source).map_err(|e| {
            jtdyn::Error::InvalidInput(format!(
                "cannot read configuration '{}' (not a preset; see --help): {e}",
                inv.source
            ))
        })?
    };
    let mut cfg = parse_config(&text)?;
    for (key, value) in &inv.overrides {
        apply_key(&mut cfg, key, value, 0)?;
    }
    if let Some(dir) = &inv.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = inv.seed {
        cfg.seed = seed;
    }
    validate_config(&cfg)?;
    run(&cfg)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let inv = match parse_cli_args(&args) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{}", usage());
            return ExitCode::from(2);
        }
    };
    if inv.help {
        print!("{}", usage());
        return ExitCode::SUCCESS;
    }
    match execute(&inv) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
