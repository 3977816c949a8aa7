use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hyplat_cli::batch::{run_batch, BatchSpec};
use hyplat_cli::pipeline::{exit_code, run, InputSource, JobSpec, Mode, Outcome};
use hyplat_cli::report::to_dot;

#[derive(Parser)]
#[command(name = "hyplat", version, about = "Automorphism groups of integral hyperbolic lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute generators of the automorphism group of a Gram matrix.
    Aut {
        /// Matrix file: `n` followed by `n^2` entries, or a JSON array of rows.
        file: Option<PathBuf>,
        /// The matrix itself, in either format.
        #[arg(long, conflicts_with = "file")]
        inline: Option<String>,
        #[command(flatten)]
        opts: JobOptions,
    },
    /// Same as `aut` for the matrix of a graph: 2 on the diagonal, -1 at edges.
    Graph {
        /// Vertex count followed by pairs of 1-based vertices.
        file: PathBuf,
        #[command(flatten)]
        opts: JobOptions,
    },
    /// Random hyperbolic forms through both pipelines, as CSV on stdout.
    Batch {
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 15)]
        bound: i64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        orbit_budget: Option<usize>,
        /// Add per-row running times.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Args)]
struct JobOptions {
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Write the JSON report here; `-` for stdout.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the residue graph in DOT format here; `-` for stdout.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Re-check the output from scratch.
    #[arg(long)]
    verify: bool,
    /// Maximal orbit length in the Watson recovery.
    #[arg(long)]
    orbit_budget: Option<usize>,
    /// Maximal number of classes in the traversal.
    #[arg(long)]
    max_classes: Option<usize>,
    /// Include running times in the report.
    #[arg(long)]
    timings: bool,
}

impl JobOptions {
    fn into_job(self, input: InputSource) -> JobSpec {
        JobSpec {
            input,
            mode: self.mode,
            json: self.json,
            dot: self.dot,
            verify: self.verify,
            orbit_budget: self.orbit_budget,
            max_classes: self.max_classes,
            timings: self.timings,
        }
    }
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
        return Ok(());
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn summary(o: &Outcome) -> String {
    let r = &o.report;
    let mut s = format!("mode: {}\n", r.mode);
    if let Some(w) = &r.watson {
        s += &format!("watson: fillings {:?}, det {} -> {}, orbit length {}\n", w.chain, w.det_before, w.det_after, w.orbit_length);
    }
    s += &format!("classes: {}\nconnecting elements: {}\ngenerators: {}\n", r.classes.len(), r.num_connecting_elements, r.generators.len());
    if let Some(v) = &r.verification {
        s += &format!("verification: {}\n", if v.passed { "passed" } else { "FAILED" });
        for line in &v.violations {
            s += &format!("  {line}\n");
        }
    }
    s
}

fn run_job(job: JobSpec) -> Result<u8> {
    let outcome = run(&job)?;
    let json = serde_json::to_string_pretty(&outcome.report)? + "\n";
    let to_stdout = |p: &Option<PathBuf>| p.as_deref() == Some(Path::new("-"));
    if !to_stdout(&job.json) && !to_stdout(&job.dot) {
        print!("{}", summary(&outcome));
    }
    if let Some(p) = &job.json {
        write_output(p, &json)?;
    }
    if let Some(p) = &job.dot {
        write_output(p, &to_dot(&outcome.report))?;
    }
    Ok(if outcome.verification_failed { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Aut { file, inline, opts } => {
            let input = match (file, inline) {
                (Some(f), None) => Ok(InputSource::MatrixFile(f)),
                (None, Some(text)) => Ok(InputSource::Inline(text)),
                _ => Err(hyplat_cli::input::InputError::Other("give either a matrix file or --inline".into()).into()),
            };
            input.and_then(|i| run_job(opts.into_job(i)))
        }
        Command::Graph { file, opts } => run_job(opts.into_job(InputSource::GraphFile(file))),
        Command::Batch { count, dim, bound, seed, orbit_budget, timings } => {
            let spec = BatchSpec { count, dim, bound, seed, orbit_budget, timings };
            run_batch(&spec, std::io::stdout().lock()).map(|_| 0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
