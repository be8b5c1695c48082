use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mitbench::benchmark::{run_volumetric, sample_filtered_circuits};
use mitbench::circuit::text::to_text;
use mitbench::config::{load_config, BenchmarkConfig};
use mitbench::report::{write_manifest, write_results, Format, ReportSpec, ResultsDocument};
use mitbench::sim::rng::derive_seed;
use mitbench::Error;

#[derive(Parser)]
#[command(name = "mitbench", version, about = "Volumetric benchmarks of quantum error mitigation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Svg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Svg => Format::Svg,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the benchmark circuits of every cell in text form.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the volumetric benchmark and write results.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FormatArg::Json, FormatArg::Csv, FormatArg::Svg])]
        formats: Vec<FormatArg>,
    },
    /// Re-render CSV and SVG output from a stored results.json.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FormatArg::Csv, FormatArg::Svg])]
        formats: Vec<FormatArg>,
    },
}

/// Errors reading or checking inputs exit with 2, anything later with 3.
enum Failure {
    Input(Error),
    Runtime(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Input(e) | Failure::Runtime(e) => e,
        }
    }
}

fn config_with_seed(path: &Path, seed: Option<u64>) -> Result<BenchmarkConfig, Failure> {
    let mut cfg = load_config(path).map_err(Failure::Input)?;
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.validate().map_err(Failure::Input)?;
    }
    Ok(cfg)
}

fn generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let cfg = config_with_seed(config, seed)?;
    generate_circuits(&cfg, out).map_err(Failure::Runtime)
}

fn generate_circuits(cfg: &BenchmarkConfig, out: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut written = Vec::new();
    for &[n, d] in &cfg.grid {
        let observable = cfg.observable.resolve(n)?;
        let cell_seed = derive_seed(cfg.seed, &[n as u64, d as u64]);
        let circuits = sample_filtered_circuits(
            cfg.class,
            n,
            d,
            cfg.circuits_per_cell,
            (cfg.filter_range[0], cfg.filter_range[1]),
            &observable,
            derive_seed(cell_seed, &[0]),
            cfg.max_attempts,
        )?;
        for (j, g) in circuits.iter().enumerate() {
            let path = out.join(format!("circuit_n{n}_d{d}_{j}.txt"));
            std::fs::write(&path, to_text(&g.circuit))
                .map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    write_manifest(out, &written)?;
    println!("wrote {} circuits to {}", written.len(), out.display());
    Ok(())
}

fn run(config: &Path, out: &Path, seed: Option<u64>, formats: Vec<Format>) -> Result<(), Failure> {
    let cfg = config_with_seed(config, seed)?;
    let spec = ReportSpec::new(out, formats).map_err(Failure::Input)?;
    let grids = run_volumetric(&cfg).map_err(Failure::Runtime)?;
    let failures: usize = grids
        .iter()
        .flat_map(|g| &g.cells)
        .map(|c| c.error.is_some() as usize + c.per_circuit.iter().filter(|r| r.failure.is_some()).count())
        .sum();
    let doc = ResultsDocument::new(cfg, grids);
    let written = write_results(&doc, &spec).map_err(Failure::Runtime)?;
    for g in &doc.grids {
        for c in &g.cells {
            let fmt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
            println!(
                "{:>4} n={} d={} median ε={} worst ε={}",
                g.method.as_str(),
                c.n,
                c.d,
                fmt(c.summary.median_eps),
                fmt(c.summary.worst_eps)
            );
        }
    }
    if failures > 0 {
        eprintln!("warning: {failures} cell or circuit failures recorded in the results");
    }
    println!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn report(results: &Path, out: &Path, formats: Vec<Format>) -> Result<(), Failure> {
    let doc = ResultsDocument::load(results).map_err(Failure::Input)?;
    let spec = ReportSpec::new(out, formats).map_err(Failure::Input)?;
    let written = write_results(&doc, &spec).map_err(Failure::Runtime)?;
    println!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate { config, out, seed } => generate(&config, &out, seed),
        Command::Run { config, out, seed, threads, formats } => {
            if let Some(t) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            run(&config, &out, seed, formats.into_iter().map(Format::from).collect())
        }
        Command::Report { results, out, formats } => report(&results, &out, formats.into_iter().map(Format::from).collect()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}
