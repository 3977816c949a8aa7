//! Job description and the direct and Watson pipelines.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use hyplat::cone::make_frame;
use hyplat::voronoi::{traverse_with, verify, GeneratorSet, ResidueGraph, TraverseOptions};
use hyplat::watson::{fillable_primes, watson, LatticeInSpace, LatticeOrbit};
use hyplat::IntMatrix;

use crate::input::{graph_to_gram, parse_edges, parse_matrix, InputError};
use crate::report::{classes_json, edges_json, generators_json, matrix_json, InputReport, Report, Timings, VerificationJson, WatsonReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Direct,
    Watson,
    /// Watson whenever a filling applies, direct otherwise.
    Auto,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Direct => "direct",
            Mode::Watson => "watson",
            Mode::Auto => "auto",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputSource {
    MatrixFile(PathBuf),
    Inline(String),
    GraphFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JobSpec {
    pub input: InputSource,
    pub mode: Mode,
    pub json: Option<PathBuf>,
    pub dot: Option<PathBuf>,
    pub verify: bool,
    pub orbit_budget: Option<usize>,
    pub max_classes: Option<usize>,
    pub timings: bool,
}

impl JobSpec {
    pub fn new(input: InputSource) -> Self {
        JobSpec { input, mode: Mode::Auto, json: None, dot: None, verify: false, orbit_budget: None, max_classes: None, timings: false }
    }
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| InputError::Other(format!("{}: {e}", path.display()))).map_err(Into::into)
}

/// The Gram matrix and a description of where it came from.
pub fn load(source: &InputSource) -> Result<(IntMatrix, String)> {
    match source {
        InputSource::MatrixFile(p) => {
            let m = parse_matrix(&read(p)?).with_context(|| p.display().to_string())?;
            Ok((m, p.display().to_string()))
        }
        InputSource::Inline(text) => Ok((parse_matrix(text)?, "inline".to_string())),
        InputSource::GraphFile(p) => {
            let (n, edges) = parse_edges(&read(p)?).with_context(|| p.display().to_string())?;
            Ok((graph_to_gram(&edges, n)?, format!("graph {}", p.display())))
        }
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Result of a pipeline run: the report and whether verification failed.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub verification_failed: bool,
}

struct Traversed {
    graph: ResidueGraph,
    gens: GeneratorSet,
    verification: Option<VerificationJson>,
}

fn traverse_and_verify(a: &IntMatrix, job: &JobSpec, timings: &mut Timings) -> Result<Traversed> {
    let frame = make_frame(a)?;
    let start = Instant::now();
    let options = TraverseOptions { max_classes: job.max_classes };
    let (graph, gens) = traverse_with(&frame, &options)?;
    timings.traverse_ms = ms(start);
    let verification = job.verify.then(|| {
        let start = Instant::now();
        let v = VerificationJson::from_report(&verify(&frame, &graph, &gens), Vec::new());
        timings.verify_ms += ms(start);
        v
    });
    Ok(Traversed { graph, gens, verification })
}

/// Run the pipeline of `job` on the Gram matrix `a`.
pub fn run_matrix(a: &IntMatrix, source: String, job: &JobSpec) -> Result<Outcome> {
    let total = Instant::now();
    let mut timings = Timings::default();
    make_frame(a)?;
    let lattice = LatticeInSpace::new(a)?;
    let fillable = !fillable_primes(&lattice)?.is_empty();
    let use_watson = match job.mode {
        Mode::Direct => false,
        Mode::Watson => true,
        Mode::Auto => fillable,
    };
    let input = InputReport { source, dim: a.rows(), matrix: matrix_json(a), det: a.det().to_string() };
    let (t, generators, watson_report) = if use_watson {
        let start = Instant::now();
        let (w, chain) = watson(&lattice)?;
        let gram = w.integral_gram()?;
        timings.watson_ms = ms(start);
        let mut t = traverse_and_verify(&gram, job, &mut timings)?;
        let start = Instant::now();
        let orbit = LatticeOrbit::new(&lattice, &w, &t.gens, job.orbit_budget)?;
        let recovered = orbit.recovered_group(&lattice)?;
        timings.recover_ms = ms(start);
        if let Some(v) = t.verification.as_mut() {
            let bad: Vec<String> = recovered
                .generators
                .iter()
                .enumerate()
                .filter(|(_, g)| !g.preserves(a))
                .map(|(k, _)| format!("recovered generator {k} does not preserve the input form"))
                .collect();
            v.passed &= bad.is_empty();
            v.violations.extend(bad);
        }
        let report = WatsonReport {
            chain: chain.iter().map(|p| p.to_string()).collect(),
            det_before: a.det().to_string(),
            det_after: gram.det().to_string(),
            gram: matrix_json(&gram),
            basis: matrix_json(w.basis()),
            scale: w.scale().to_string(),
            orbit_length: orbit.len(),
        };
        (t, recovered, Some(report))
    } else {
        let t = traverse_and_verify(a, job, &mut timings)?;
        let gens = t.gens.clone();
        (t, gens, None)
    };
    timings.total_ms = ms(total);
    let verification_failed = t.verification.as_ref().is_some_and(|v| !v.passed);
    let report = Report {
        input,
        mode: if use_watson { "watson" } else { "direct" }.to_string(),
        requested_mode: job.mode.name().to_string(),
        watson: watson_report,
        classes: classes_json(&t.graph),
        edges: edges_json(&t.graph),
        num_connecting_elements: t.graph.connecting_elements().count(),
        generators: generators_json(&generators),
        minus_identity_included: generators.includes_minus_identity,
        timings: job.timings.then_some(timings),
        verification: t.verification,
    };
    Ok(Outcome { report, verification_failed })
}

pub fn run(job: &JobSpec) -> Result<Outcome> {
    let (a, source) = load(&job.input)?;
    run_matrix(&a, source, job)
}

/// Process exit code for an error: 2 for bad input, 3 for exhausted
/// budgets, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<InputError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<hyplat::Error>() {
            return match e {
                hyplat::Error::NotSymmetric | hyplat::Error::Singular | hyplat::Error::Signature { .. } | hyplat::Error::Dimension(_) => 2,
                hyplat::Error::OrbitBudget(_) | hyplat::Error::ClassBudget(_) => 3,
                _ => 1,
            };
        }
    }
    1
}
