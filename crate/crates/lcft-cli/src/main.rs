mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::CliError;
use config::{config_hash, RunConfig};

#[derive(Parser)]
#[command(
    name = "lcft",
    version,
    about = "Liouville correlators from the bootstrap and from GMC sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run config; `-` reads stdin. Missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for quadrature and sampling.
    #[arg(long, global = true, env = "LCFT_THREADS")]
    threads: Option<usize>,
    /// Directory for the JSON result and CSV curves.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides mc.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Υ_{γ/2} at `points`.
    Upsilon,
    /// DOZZ constant at the three `alpha`.
    Dozz,
    /// Gram matrix of the Verma module at `delta`, `level`.
    Shapovalov,
    /// Torus one-point block for alpha[0] at each `p`.
    Block,
    /// Bootstrap torus one-point function for each `alpha`.
    Torus1pt,
    /// Bootstrap torus k-point function at `points`.
    Toruskpt,
    /// Bootstrap sphere k-point function at `points`.
    Spherekpt,
    /// Correlator of the graph file `graph`.
    Graph,
    /// GMC Monte Carlo estimate of the torus one-point function.
    #[command(name = "mc-torus1pt")]
    McTorus1pt,
    /// The acceptance battery, restricted to `criteria`.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Upsilon => "upsilon",
            Command::Dozz => "dozz",
            Command::Shapovalov => "shapovalov",
            Command::Block => "block",
            Command::Torus1pt => "torus1pt",
            Command::Toruskpt => "toruskpt",
            Command::Spherekpt => "spherekpt",
            Command::Graph => "graph",
            Command::McTorus1pt => "mc-torus1pt",
            Command::Selftest => "selftest",
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let text = match path {
        None => return Ok(RunConfig::default()),
        Some(p) if p == Path::new("-") => std::io::read_to_string(std::io::stdin())
            .map_err(|e| CliError::Io(format!("cannot read config from stdin: {e}")))?,
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", p.display())))?,
    };
    Ok(RunConfig::from_json(&text)?)
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    let name = cli.command.name();
    let mut cfg = load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    cfg.validate()?;
    let out = commands::run(name, &cfg)?;
    let doc = json!({
        "subcommand": name,
        "config": cfg,
        "config_hash": config_hash(name, &cfg),
        "result": out.result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("result serializes");
    println!("{text}");
    if let Some(dir) = &cli.out {
        let write = |file: &str, body: &str| {
            std::fs::write(dir.join(file), body)
                .map_err(|e| CliError::Io(format!("cannot write {file}: {e}")))
        };
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        write(&format!("{name}.json"), &text)?;
        for (file, body) in &out.csv {
            write(file, body)?;
        }
    }
    Ok(!out.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
