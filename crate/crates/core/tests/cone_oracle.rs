mod common;

use common::suites::cone_oracle;
use common::{random_hyperbolic, random_point, rng};
use hyplat::cone::minimal_vectors;
use hyplat::Rat;

#[test]
fn minimal_and_short_vectors_match_box_search() {
    cone_oracle(21, 60).assert_passed();
}

#[test]
fn slices_respect_the_cone() {
    let mut r = rng(22);
    for _ in 0..20 {
        let (_, f) = random_hyperbolic(&mut r, 4, 6);
        let x = random_point(&mut r, &f, 1);
        let m = minimal_vectors(&f, &x).unwrap();
        for d in &m.minvecs {
            assert!(f.in_v2_int(d).in_closure());
            let img: Vec<Rat> = d.iter().map(|v| Rat::from_integer(v.clone())).collect();
            assert!(f.in_v2(&img).in_closure());
        }
    }
}
