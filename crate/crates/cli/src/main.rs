use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use encircle::model::{riemann_mesh, MeshBounds};
use encircle::{Family, HamiltonianSpec, LoopSpec};
use encircle_cli::error::{CliError, CliResult};
use encircle_cli::mesh::write_mesh_csv;
use encircle_cli::scenario::{vorticity_summary, write_json, write_outputs};
use encircle_cli::sweep::write_sweep_csv;
use encircle_cli::{presets, run_sweep, simulate, table, ScenarioConfig, SweepSpec};

#[derive(Parser)]
#[command(name = "encircle", version, about = "Exceptional-point encircling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario or sweep JSON file, or a preset name
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output directory (overrides the config's `outputs`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Noise seed (overrides `loop.seed`)
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario
    Encircle,
    /// Evaluate a parameter grid
    Sweep,
    /// Spectral and dynamic vorticity of a scenario's loop
    Vorticity,
    /// Reproduce the chirality / reciprocity pairing table
    Classify {
        #[arg(long, default_value_t = 0.06)]
        gamma: f64,
    },
    /// Eigenvalue sheets on a (Δ, J) grid
    Riemann {
        #[arg(long, default_value = "PT_PASSIVE")]
        family: String,
        #[arg(long, default_value_t = 0.06)]
        gamma: f64,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        delta: Option<Vec<f64>>,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        j: Option<Vec<f64>>,
        #[arg(long, default_value_t = 65)]
        resolution: usize,
    },
    /// Run a built-in scenario (`list` prints the names)
    Preset { name: String },
}

fn load_config(common: &Common) -> CliResult<ScenarioConfig> {
    let src = common.config.as_deref().ok_or_else(|| CliError::invalid("config", "--config is required"))?;
    let mut cfg = if !Path::new(src).exists() && presets::preset_names().any(|n| n == src) {
        presets::preset(src)?
    } else {
        ScenarioConfig::load(Path::new(src))?
    };
    apply_overrides(&mut cfg, common);
    cfg.validate()?;
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ScenarioConfig, common: &Common) {
    if let Some(out) = &common.out {
        cfg.outputs = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.path.seed = seed;
    }
}

fn out_dir(common: &Common) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
        _ => Ok(()),
    }
}

fn print_json<T: serde::Serialize>(v: &T) -> CliResult<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(v)?))
}

fn run_config(cfg: &ScenarioConfig) -> CliResult<()> {
    let out = simulate(cfg)?;
    write_outputs(cfg, &out, &cfg.outputs)?;
    print_json(&out.summary)
}

fn parse_family(s: &str) -> CliResult<Family> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| CliError::invalid("family", format!("unknown family '{s}'")))
}

fn run(cli: &Cli) -> CliResult<()> {
    let common = &cli.common;
    match &cli.command {
        Command::Encircle => run_config(&load_config(common)?),
        Command::Preset { name } if name == "list" => {
            emit(&presets::preset_names().map(|n| format!("{n}\n")).collect::<String>())
        }
        Command::Preset { name } => {
            let mut cfg = presets::preset(name)?;
            apply_overrides(&mut cfg, common);
            cfg.validate()?;
            run_config(&cfg)
        }
        Command::Vorticity => {
            let cfg = load_config(common)?;
            if cfg.hamiltonian.family == Family::Custom {
                return Err(CliError::invalid("hamiltonian.family", "vorticity needs a parametrized family"));
            }
            let (summary, trace) = vorticity_summary(&cfg.hamiltonian, &cfg.path)?;
            std::fs::create_dir_all(&cfg.outputs).map_err(|e| CliError::io(&cfg.outputs, e))?;
            let p = cfg.outputs.join("vorticity.csv");
            let mut w = std::io::BufWriter::new(std::fs::File::create(&p).map_err(|e| CliError::io(&p, e))?);
            trace.write_csv(&mut w).map_err(|e| CliError::io(&p, e))?;
            print_json(&summary)
        }
        Command::Sweep => {
            let src = common.config.as_deref().ok_or_else(|| CliError::invalid("config", "--config is required"))?;
            let text = std::fs::read_to_string(src).map_err(|e| CliError::io(src, e))?;
            let mut spec = SweepSpec::from_json(&text)?;
            if let Some(seed) = common.seed {
                let mut base = spec.base.resolve()?;
                base.path.seed = seed;
                spec.base = encircle_cli::ConfigSource::Inline(Box::new(base));
            }
            let rows = run_sweep(&spec, common.workers)?;
            let dir = out_dir(common);
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let p = dir.join("sweep.csv");
            let mut buf = Vec::new();
            write_sweep_csv(&spec, &rows, &mut buf).map_err(|e| CliError::io(&p, e))?;
            std::fs::write(&p, buf).map_err(|e| CliError::io(&p, e))?;
            let failed = rows.iter().filter(|r| !r.errors.is_empty()).count();
            emit(&format!("{} cells, {failed} with errors -> {}\n", rows.len(), p.display()))
        }
        Command::Classify { gamma } => {
            let mut template = LoopSpec::start_a(encircle::Direction::Clockwise);
            if common.config.is_some() {
                template = load_config(common)?.path;
            }
            let report = table::pair_table(*gamma, &template)?;
            let dir = out_dir(common);
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            write_json(&dir.join("classification.json"), &report)?;
            emit(&format!("{}all rows agree: {}\n", table::render(&report), report.all_agree))
        }
        Command::Riemann { family, gamma, delta, j, resolution } => {
            let spec = HamiltonianSpec::new(parse_family(family)?, *gamma);
            let mut bounds = MeshBounds { delta: (-gamma.abs(), gamma.abs()), j: (0.0, 2.0 * gamma.abs()) };
            if let Some(d) = delta {
                bounds.delta = (d[0], d[1]);
            }
            if let Some(v) = j {
                bounds.j = (v[0], v[1]);
            }
            let mesh = riemann_mesh(&spec, &bounds, *resolution)?;
            let dir = out_dir(common);
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let p = dir.join("riemann_mesh.csv");
            let mut w = std::io::BufWriter::new(std::fs::File::create(&p).map_err(|e| CliError::io(&p, e))?);
            write_mesh_csv(&mesh, &mut w).map_err(|e| CliError::io(&p, e))?;
            emit(&format!("{} points -> {}\n", mesh.len(), p.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = e.report();
            let json = serde_json::to_string(&report).unwrap_or_else(|_| format!("{{\"message\":\"{e}\"}}"));
            eprintln!("{json}");
            if let Some(dir) = &cli.common.out {
                if std::fs::create_dir_all(dir).is_ok() {
                    let _ = std::fs::write(dir.join("error.json"), format!("{json}\n"));
                }
            }
            ExitCode::from(report.exit_code as u8)
        }
    }
}
