mod commands;
mod config;
mod output;
mod schema;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use commands::CliError;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

pub const RECIPES: &[(&str, &str)] = &[
    ("fig2a", include_str!("../recipes/fig2a.toml")),
    ("fig2b", include_str!("../recipes/fig2b.toml")),
    ("fig2c", include_str!("../recipes/fig2c.toml")),
    ("fig2d", include_str!("../recipes/fig2d.toml")),
    ("fig3a", include_str!("../recipes/fig3a.toml")),
    ("fig3b", include_str!("../recipes/fig3b.toml")),
    ("fig4a", include_str!("../recipes/fig4a.toml")),
    ("fig4b", include_str!("../recipes/fig4b.toml")),
    ("fig5a", include_str!("../recipes/fig5a.toml")),
    ("fig5b", include_str!("../recipes/fig5b.toml")),
];

/// Spectra, generalized Brillouin zones, winding numbers, vorticity and
/// biorthogonal polarization of non-Hermitian two-band chains.
///
/// Exit status: 0 success, 2 invalid input, 3 numerical failure.
#[derive(Parser, Debug)]
#[command(name = "nhbp", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(short, long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set model.gamma=3 (repeatable; wins over the file).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for --set output.out_dir=DIR.
    #[arg(short, long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    /// Shorthand for --set numeric.workers=N.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Eigenvalues of the open chain, classified into bulk and edge modes.
    Spectrum(Common),
    /// GBZ contour, deviation from the unit circle and non-Bloch winding.
    Gbz(Common),
    /// Closed-form radius, edge ratios, EPs, gap closings, loop vorticity.
    Invariants(Common),
    /// |E|, P and nu_tot along one parameter axis.
    Sweep(Common),
    /// Region labels on a (gamma, t1) grid.
    PhaseDiagram(Common),
    /// Run a shipped figure recipe.
    Reproduce {
        /// fig2a, fig2b, fig2c, fig2d, fig3a, fig3b, fig4a, fig4b, fig5a or fig5b.
        recipe: Option<String>,
        /// Print the recipe names and captions.
        #[arg(long)]
        list: bool,
        /// Print the recipe TOML instead of running it.
        #[arg(long)]
        show: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn cli_command() -> clap::Command {
    let keys = schema::help_table();
    Cli::command()
        .after_long_help(keys.clone())
        .mut_subcommands(|s| s.after_long_help(keys.clone()))
}

fn load(common: &Common, base: Option<toml::Table>) -> Result<(Option<String>, toml::Table), Vec<String>> {
    let (cmd, mut table) = match (&common.config, base) {
        (Some(p), _) => {
            let text = std::fs::read_to_string(p).map_err(|e| vec![format!("{}: {e}", p.display())])?;
            if p.extension().is_some_and(|e| e == "json") {
                let (c, t) = config::parse_manifest(&text)?;
                (Some(c), t)
            } else {
                (None, config::parse_toml(&text)?)
            }
        }
        (None, Some(t)) => (None, t),
        (None, None) => (None, toml::Table::new()),
    };
    let mut errs = Vec::new();
    let mut sets = common.set.clone();
    if let Some(d) = &common.out_dir {
        sets.push(format!("output.out_dir={:?}", d.display().to_string()));
    }
    if let Some(w) = common.workers {
        sets.push(format!("numeric.workers={w}"));
    }
    for s in &sets {
        if let Err(e) = config::apply_override(&mut table, s) {
            errs.push(e);
        }
    }
    if errs.is_empty() {
        Ok((cmd, table))
    } else {
        Err(errs)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, common, recipe, base) = match cli.command {
        Cmd::Spectrum(c) => ("spectrum".to_string(), c, None, None),
        Cmd::Gbz(c) => ("gbz".to_string(), c, None, None),
        Cmd::Invariants(c) => ("invariants".to_string(), c, None, None),
        Cmd::Sweep(c) => ("sweep".to_string(), c, None, None),
        Cmd::PhaseDiagram(c) => ("phase-diagram".to_string(), c, None, None),
        Cmd::Reproduce { recipe, list, show, common } => {
            if list {
                for (name, text) in RECIPES {
                    let t = config::parse_toml(text).map_err(CliError::Validation)?;
                    let cap = t["recipe"]["caption"].as_str().unwrap_or("");
                    println!("{name}  {cap}");
                }
                return Ok(());
            }
            let Some(name) = recipe else {
                return Err(CliError::Validation(vec!["reproduce: missing recipe name (see --list)".into()]));
            };
            let Some((_, text)) = RECIPES.iter().find(|(n, _)| *n == name) else {
                let names: Vec<&str> = RECIPES.iter().map(|(n, _)| *n).collect();
                return Err(CliError::Validation(vec![format!(
                    "unknown recipe {name}; expected one of {}",
                    names.join(", ")
                )]));
            };
            if show {
                print!("{text}");
                return Ok(());
            }
            let t = config::parse_toml(text).map_err(CliError::Validation)?;
            let cmd = t["recipe"]["command"].as_str().unwrap_or("sweep").to_string();
            (cmd, common, Some(name), Some(t))
        }
    };
    let (from_manifest, table) = load(&common, base).map_err(CliError::Validation)?;
    if let Some(m) = from_manifest {
        if m != command {
            return Err(CliError::Validation(vec![format!("manifest was written by `{m}`, not `{command}`")]));
        }
    }
    let cfg = config::resolve(&command, recipe.as_deref(), &table).map_err(CliError::Validation)?;

    let t0 = Instant::now();
    let done = commands::run(&cfg)?;
    let wall = t0.elapsed().as_secs_f64();

    let mut files = done.files.clone();
    let manifest_path = cfg.output.out_dir.join(format!("{}.manifest.json", cfg.stem()));
    files.push(manifest_path.clone());
    let manifest = json!({
        "schema_version": output::SCHEMA_VERSION,
        "command": cfg.command,
        "recipe": cfg.recipe,
        "versions": {"nhbp": nhbp::VERSION, "nhbp_cli": env!("CARGO_PKG_VERSION")},
        "config": cfg.resolved,
        "spec": cfg.spec,
        "axis": (cfg.command == "sweep").then_some(&cfg.axis),
        "sizes": {
            "n_cells": cfg.numeric.n_cells,
            "n_p": cfg.numeric.n_p,
            "n_phi": cfg.numeric.n_phi,
            "pbc_grid": cfg.numeric.pbc_grid,
        },
        "outputs": output::file_names(&files),
        "wall_time_s": wall,
        "summary": done.summary,
        "numerical_failure": done.numerical_failure,
    });
    output::write_json(&manifest_path, &manifest)?;
    println!("wrote {} in {wall:.2} s", output::file_names(&files).join(", "));
    match done.numerical_failure {
        Some(m) => Err(CliError::Numerical(m)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let matches = cli_command().get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Validation(msgs) => {
                    for m in msgs {
                        eprintln!("error: {m}");
                    }
                }
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
