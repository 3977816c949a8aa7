//! Random hyperbolic forms run through both pipelines, as CSV.

use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use hyplat::cone::make_frame;
use hyplat::linalg::int;
use hyplat::IntMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::input::InputError;
use crate::pipeline::{run_matrix, InputSource, JobSpec, Mode};

#[derive(Clone, Debug)]
pub struct BatchSpec {
    pub count: usize,
    pub dim: usize,
    pub bound: i64,
    pub seed: u64,
    pub orbit_budget: Option<usize>,
    pub timings: bool,
}

/// A random symmetric matrix with entries in `[-bound, bound]` and
/// hyperbolic signature.
pub fn random_hyperbolic(rng: &mut ChaCha8Rng, dim: usize, bound: i64) -> IntMatrix {
    loop {
        let mut m = IntMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = int(rng.gen_range(-bound..=bound));
                m[(i, j)] = v.clone();
                m[(j, i)] = v;
            }
        }
        if make_frame(&m).is_ok() {
            return m;
        }
    }
}

fn flat(m: &IntMatrix) -> String {
    m.data().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Writes one CSV row per form, in generation order.
pub fn run_batch<W: Write>(spec: &BatchSpec, out: W) -> Result<()> {
    if spec.dim < 2 {
        return Err(InputError::Other("batch dimension must be at least 2".into()).into());
    }
    if spec.bound < 1 {
        return Err(InputError::Other("entry bound must be positive".into()).into());
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "index",
        "matrix",
        "det",
        "fillable",
        "classes_direct",
        "connecting_direct",
        "generators_direct",
        "watson_det",
        "classes_watson",
        "generators_watson",
        "orbit_length",
    ];
    if spec.timings {
        header.extend(["ms_direct", "ms_watson"]);
    }
    w.write_record(&header)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for index in 0..spec.count {
        let a = random_hyperbolic(&mut rng, spec.dim, spec.bound);
        let mut job = JobSpec::new(InputSource::Inline(String::new()));
        job.orbit_budget = spec.orbit_budget;
        job.mode = Mode::Direct;
        let start = Instant::now();
        let direct = run_matrix(&a, "batch".into(), &job)?.report;
        let ms_direct = start.elapsed().as_secs_f64() * 1000.0;
        job.mode = Mode::Auto;
        let start = Instant::now();
        let auto = run_matrix(&a, "batch".into(), &job)?.report;
        let ms_watson = start.elapsed().as_secs_f64() * 1000.0;
        let wr = auto.watson.as_ref();
        let mut row = vec![
            index.to_string(),
            flat(&a),
            direct.input.det.clone(),
            wr.is_some().to_string(),
            direct.classes.len().to_string(),
            direct.num_connecting_elements.to_string(),
            direct.generators.len().to_string(),
            wr.map_or_else(|| direct.input.det.clone(), |r| r.det_after.clone()),
            auto.classes.len().to_string(),
            auto.generators.len().to_string(),
            wr.map_or(1, |r| r.orbit_length).to_string(),
        ];
        if spec.timings {
            row.extend([format!("{ms_direct:.3}"), format!("{ms_watson:.3}")]);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
