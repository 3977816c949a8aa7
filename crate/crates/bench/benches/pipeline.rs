use criterion::{criterion_group, criterion_main, Criterion};
use hyplat::cone::{make_frame, minimal_vectors};
use hyplat::linalg::{hnf, int, snf};
use hyplat::pdlat::{automorphism_group, short_vectors, PDLattice};
use hyplat::voronoi::traverse;
use hyplat::watson::{recover_aut, watson, LatticeInSpace};
use hyplat::{IntMatrix, Rat};
use hyplat_bench::{first_example, scrambled, standard_form, watson_example};
use std::hint::black_box;

fn linalg(c: &mut Criterion) {
    let m = scrambled(8);
    c.bench_function("hnf 8x8", |b| b.iter(|| hnf(black_box(&m))));
    c.bench_function("snf 8x8", |b| b.iter(|| snf(black_box(&m))));
}

fn positive_definite(c: &mut Criterion) {
    let g = scrambled(6).congruence(&IntMatrix::identity(6));
    let lat = PDLattice::from_int(&g).unwrap();
    let bound = Rat::from_integer(int(60));
    c.bench_function("short vectors rank 6", |b| b.iter(|| short_vectors(black_box(&lat), &bound).unwrap()));
    let d4 = IntMatrix::from_i64_rows(&[&[2, -1, 0, 0], &[-1, 2, -1, -1], &[0, -1, 2, 0], &[0, -1, 0, 2]]);
    let d4 = PDLattice::from_int(&d4).unwrap();
    c.bench_function("automorphisms of D4", |b| b.iter(|| automorphism_group(black_box(&d4)).unwrap()));
}

fn hyperbolic(c: &mut Criterion) {
    let frame = make_frame(&first_example()).unwrap();
    let x = hyplat::linalg::int_vec(&[21, 8, -12]);
    c.bench_function("minimal vectors", |b| b.iter(|| minimal_vectors(&frame, black_box(&x)).unwrap()));
    c.bench_function("traverse first example", |b| b.iter(|| traverse(black_box(&frame)).unwrap()));
    let h6 = make_frame(&standard_form(6)).unwrap();
    c.bench_function("traverse H6", |b| b.iter(|| traverse(black_box(&h6)).unwrap()));
}

fn watson_pipeline(c: &mut Criterion) {
    let a = watson_example();
    let l = LatticeInSpace::new(&a).unwrap();
    c.bench_function("watson 4x4 example", |b| {
        b.iter(|| {
            let (w, _) = watson(black_box(&l)).unwrap();
            let frame = make_frame(&w.integral_gram().unwrap()).unwrap();
            let (_, gens) = traverse(&frame).unwrap();
            recover_aut(&l, &w, &gens, None).unwrap()
        })
    });
    let frame = make_frame(&a).unwrap();
    c.bench_function("direct 4x4 example", |b| b.iter(|| traverse(black_box(&frame)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = linalg, positive_definite, hyperbolic, watson_pipeline
}
criterion_main!(benches);
