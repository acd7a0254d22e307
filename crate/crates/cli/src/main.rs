use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use omnipred::harness::verify::{Suite, Verifier};
use omnipred::harness::{
    run_simulation, run_sweep, scenarios, PredictionSource, RunConfig, SweepAxis, Verdict,
};
use omnipred::Error;

#[derive(Parser)]
#[command(name = "omnipred", version, about = "Online omniprediction with long-term constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include per-round solver diagnostics in the report.
        #[arg(long)]
        diagnostics: bool,
        /// Also write the columnar transcript.
        #[arg(long)]
        transcript: bool,
    },
    /// Run a configuration over an axis of values and a set of seeds.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `path=v1,v2,...`, e.g. `horizon=512,1024`.
        #[arg(long)]
        axis: String,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Verify {
        /// `fast` or `full`.
        #[arg(default_value = "fast")]
        suite: String,
        /// Run only these criteria, e.g. `--only P1,P7`.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Pretty-print a report (JSON) or summarize a transcript.
    Inspect { path: PathBuf },
    /// Print a built-in scenario as a TOML configuration.
    Scenario {
        /// realized, expectation, subsequence, masking, downstream, downstream-expectation
        /// or downstream-boundary.
        name: String,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const EXIT_VERIFY: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_configuration() { EXIT_CONFIG } else { EXIT_RUNTIME })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, diagnostics: bool, transcript: bool) -> ExitCode {
    let mut cfg = match RunConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.diagnostics |= diagnostics;
    let file_out = cfg.output.clone().unwrap_or_default();
    let dir = out.or(file_out.dir).unwrap_or_else(|| PathBuf::from("."));
    let write_transcript = transcript || file_out.transcript;
    let result = run_simulation(&cfg).and_then(|mut output| {
        if write_transcript {
            let path = dir.join("transcript.txt");
            let mut buf = Vec::new();
            output.transcript.write_columnar(&mut buf)?;
            write_file(&path, &buf)?;
            output.report.body.transcript_path = Some(path.display().to_string());
        }
        let json = serde_json::to_string_pretty(&output.report).map_err(|e| Error::Invariant(e.to_string()))?;
        write_file(&dir.join("report.json"), json.as_bytes())?;
        let mut csv = Vec::new();
        output.report.body.write_csv(&mut csv)?;
        write_file(&dir.join("metrics.csv"), &csv)?;
        Ok(output)
    });
    match result {
        Ok(output) => {
            let body = &output.report.body;
            println!("config {} seed {} T={}", &body.config_digest[..12], body.seed, body.horizon);
            for row in &body.bounds {
                let who = row.agent.as_deref().unwrap_or("-");
                let scope = row.scope.map_or_else(|| "-".to_string(), |s| s.label());
                println!(
                    "{:<28} {:<10} {:<5} measured {:>12.4} bound {:>12.4} {:?}",
                    row.name, who, scope, row.measured, row.bound, row.verdict
                );
            }
            for flag in &body.flags {
                println!("flag: {}", serde_json::to_string(flag).unwrap_or_default());
            }
            println!("max solver gap {:.2e}; report written to {}", body.solver.max_gap, dir.display());
            if body.bounds.iter().any(|r| r.verdict == Verdict::Fail) {
                eprintln!("warning: some bound checks failed");
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn sweep(config: PathBuf, axis: String, seeds: Vec<u64>, out: Option<PathBuf>) -> ExitCode {
    let result = RunConfig::load(&config)
        .and_then(|cfg| Ok((cfg, SweepAxis::parse(&axis)?)))
        .and_then(|(cfg, axis)| run_sweep(&cfg, &axis, &seeds));
    let output = match result {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let table = output.aggregate_csv();
    print!("{table}");
    if let Some(slope) = output.bias_slope {
        println!("log-log slope of max bias: {slope:.4}");
    }
    for m in &output.members {
        if let Err(e) = &m.outcome {
            eprintln!("member {}={} seed {} failed: {e}", output.axis, m.axis_value, m.seed);
        }
    }
    if let Some(dir) = out {
        let json = match serde_json::to_string_pretty(&output) {
            Ok(j) => j,
            Err(e) => return fail(&Error::Invariant(e.to_string())),
        };
        if let Err(e) = write_file(&dir.join("sweep.json"), json.as_bytes())
            .and_then(|_| write_file(&dir.join("aggregate.csv"), table.as_bytes()))
        {
            return fail(&e);
        }
    }
    ExitCode::SUCCESS
}

fn verify(suite: String, only: Vec<String>) -> ExitCode {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let verifier = Verifier::new(suite);
    let results = if only.is_empty() {
        verifier.all()
    } else {
        let mut out = Vec::new();
        for id in &only {
            match verifier.criterion(id) {
                Some(r) => out.push(r),
                None => return fail(&Error::Config(format!("unknown criterion `{id}`"))),
            }
        }
        out
    };
    for r in &results {
        println!("{r}");
    }
    if results.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_VERIFY)
    }
}

fn inspect(path: PathBuf) -> ExitCode {
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => return fail(&Error::Config(format!("cannot read {}: {e}", path.display()))),
    };
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(&text) {
        println!("{}", serde_json::to_string_pretty(&value).unwrap_or(text));
        return ExitCode::SUCCESS;
    }
    // Columnar transcript: `#` metadata, a column header, then one row per round.
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    while let Some(meta) = lines.next_if(|l| l.starts_with('#')) {
        println!("{}", meta.trim_start_matches('#').trim());
    }
    let Some(header) = lines.next() else {
        return fail(&Error::Config(format!("{} has no transcript rows", path.display())));
    };
    let rows: Vec<&str> = lines.collect();
    println!("columns: {header}");
    println!("rounds: {}", rows.len());
    for row in rows.iter().take(5) {
        println!("  {row}");
    }
    if rows.len() > 5 {
        println!("  ...");
        println!("  {}", rows[rows.len() - 1]);
    }
    ExitCode::SUCCESS
}

fn scenario(name: &str, horizon: usize, seed: u64) -> ExitCode {
    let config = match name {
        "realized" => scenarios::realized_elimination(horizon, seed, PredictionSource::Forecaster),
        "expectation" => scenarios::expectation_elimination(horizon, seed),
        "subsequence" => scenarios::subsequence_realized(horizon, seed),
        "masking" => scenarios::masking(horizon, seed),
        "downstream" => scenarios::downstream_realized(horizon, seed),
        "downstream-expectation" => scenarios::downstream_expectation(horizon, seed),
        "downstream-boundary" => scenarios::downstream_boundary(horizon, seed),
        other => return fail(&Error::Config(format!("unknown scenario `{other}`"))),
    };
    match config.to_toml() {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            diagnostics,
            transcript,
        } => run(config, seed, out, diagnostics, transcript),
        Command::Sweep { config, axis, seeds, out } => sweep(config, axis, seeds, out),
        Command::Verify { suite, only } => verify(suite, only),
        Command::Inspect { path } => inspect(path),
        Command::Scenario { name, horizon, seed } => scenario(&name, horizon, seed),
    }
}
