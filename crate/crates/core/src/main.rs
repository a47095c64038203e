use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gfield::harness::{self, emit_report, preset, run_experiment, ExperimentConfig, Format, TheoremReport};
use gfield::sampler::io::{write_binary, write_csv};
use gfield::sampler::SamplePath;
use gfield::{Error, Result};

#[derive(Parser)]
#[command(name = "gfield", version, about = "Local exponents and fractal dimensions of Gaussian random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one path per seed and write it (plus a binary `.gfl` copy).
    Simulate(Common),
    /// Estimate exponents and predicted bounds only; no paths are drawn.
    Exponent(Common),
    /// Measure graph and range dimensions and check them against the bounds.
    Dimension(Common),
    /// Run everything; exit status 1 when any aggregate check fails.
    Verify(Common),
    /// Re-emit a saved report.json, or run the experiment and emit it.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Replace the configured seeds by this one.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Plotdata,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Plotdata => Format::Plotdata,
        }
    }
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut c = match (&common.config, &common.preset) {
        (Some(path), None) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        _ => {
            return Err(Error::Config(format!(
                "give --config <file.json> or --preset <name> (presets: {})",
                harness::PRESET_NAMES.join(", ")
            )))
        }
    };
    if let Some(seed) = common.seed {
        c.seeds = vec![seed];
    }
    Ok(c)
}

fn formats(common: &Common, config: &ExperimentConfig) -> Vec<Format> {
    match common.format {
        Some(f) => vec![f.into()],
        None if !config.outputs.formats.is_empty() => config.outputs.formats.clone(),
        None => vec![Format::Json],
    }
}

fn out_dir(common: &Common, config: &ExperimentConfig) -> Option<PathBuf> {
    common.out.clone().or_else(|| config.outputs.dir.as_ref().map(PathBuf::from))
}

fn emit(report: &TheoremReport, formats: &[Format], dir: Option<&Path>) -> Result<()> {
    match dir {
        Some(dir) => {
            for &f in formats {
                for file in emit_report(report, f, dir)? {
                    eprintln!("wrote {}", file.display());
                }
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            for &f in formats {
                match f {
                    Format::Json => writeln!(stdout, "{}", report.to_json()?)?,
                    Format::Csv => write!(stdout, "{}", harness::write_csv(report))?,
                    Format::Plotdata => return Err(Error::Config("plotdata writes several files; give --out".into())),
                }
            }
        }
    }
    Ok(())
}

fn summarize(report: &TheoremReport) {
    for a in &report.aggregates {
        for c in &a.checks {
            let verdict = if c.pass { "pass" } else { "FAIL" };
            eprintln!(
                "{verdict} t0={:?} {}: {:.4} in [{:.4}, {:.4}] +- {}",
                a.t0.coords(),
                c.name,
                c.value,
                c.lo,
                c.hi,
                c.tol
            );
        }
    }
    if let Some(f) = &report.frostman {
        eprintln!("frostman stable_max_beta: {:?}", f.stable_max_beta);
    }
}

fn write_path(path: &SamplePath, format: Format, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let binary = dir.join(format!("{stem}.gfl"));
    write_binary(path, std::io::BufWriter::new(std::fs::File::create(&binary)?))?;
    files.push(binary);
    let text = match format {
        Format::Json => (dir.join(format!("{stem}.json")), serde_json::to_string(path)?.into_bytes()),
        Format::Csv | Format::Plotdata => {
            let ext = if format == Format::Csv { "csv" } else { "dat" };
            let mut buf = Vec::new();
            write_csv(path, &mut buf)?;
            if format == Format::Plotdata {
                buf = format!("# {}", String::from_utf8_lossy(&buf).replace(',', " ")).into_bytes();
            }
            (dir.join(format!("{stem}.{ext}")), buf)
        }
    };
    std::fs::write(&text.0, text.1)?;
    files.push(text.0);
    Ok(files)
}

fn simulate(common: &Common) -> Result<bool> {
    let config = load(common)?;
    config.validate()?;
    let dir = out_dir(common, &config).ok_or_else(|| Error::Config("simulate needs --out <dir>".into()))?;
    std::fs::create_dir_all(&dir)?;
    let paths = harness::simulate(&config)?;
    for (seed, path) in config.seeds.iter().zip(&paths) {
        for f in formats(common, &config) {
            for file in write_path(path, f, &dir, &format!("path_s{seed}"))? {
                eprintln!("wrote {}", file.display());
            }
        }
    }
    Ok(true)
}

fn analyse(command: &str, common: &Common) -> Result<bool> {
    let mut config = load(common)?;
    match command {
        "exponent" => {
            config.dimension = None;
            config.frostman = None;
        }
        "dimension" if config.dimension.is_none() => {
            return Err(Error::Config("this configuration has no dimension section".into()));
        }
        "dimension" => config.sandwich = None,
        _ => {}
    }
    let report = run_experiment(&config)?;
    summarize(&report);
    emit(&report, &formats(common, &config), out_dir(common, &config).as_deref())?;
    Ok(command != "verify" || report.passed)
}

fn report(common: &Common, input: Option<&Path>) -> Result<bool> {
    let report = match input {
        Some(path) => TheoremReport::from_json(&std::fs::read_to_string(path)?)?,
        None => run_experiment(&load(common)?)?,
    };
    emit(&report, &formats(common, &report.config), out_dir(common, &report.config).as_deref())?;
    Ok(true)
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Simulate(c) => simulate(&c),
        Command::Exponent(c) => analyse("exponent", &c),
        Command::Dimension(c) => analyse("dimension", &c),
        Command::Verify(c) => analyse("verify", &c),
        Command::Report { common, input } => report(&common, input.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
