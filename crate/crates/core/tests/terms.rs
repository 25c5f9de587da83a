mod common;

use std::collections::HashSet;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uag_core::terms::{
    decode_point, encode_point, enumerate_points, enumerate_terms, eval_term, substitute,
    GeneratorSet, PointBudget, Term, TermMorphism,
};
use uag_core::Error;

fn show(ts: &[Term], s: &uag_core::algebra::Signature) -> Vec<String> {
    ts.iter().map(|t| t.display(s).to_string()).collect()
}

#[test]
fn eval_examples() {
    let g = sig("Grp");
    assert_eq!(eval_term(&alg("Z2"), &term(&g, 1, "mul(x1,x1)"), &[1]).unwrap(), 0);
    for a in 0..6 {
        assert_eq!(eval_term(&alg("S3"), &Term::Var(0), &[a]).unwrap(), a);
    }
    let s = sig("Sgr");
    assert_eq!(eval_term(&alg("LZ2"), &term(&s, 2, "mul(x1,x2)"), &[0, 1]).unwrap(), 0);
}

#[test]
fn eval_validates() {
    let g = sig("Grp");
    let t = term(&g, 2, "mul(x1,x2)");
    assert!(matches!(
        eval_term(&alg("Z2"), &t, &[1]),
        Err(Error::RankMismatch { .. })
    ));
    // `mul` is operation 2 of Grp and does not exist in Sgr.
    assert!(matches!(
        eval_term(&alg("LZ2"), &t, &[1, 1]),
        Err(Error::UnknownSymbol(_))
    ));
    assert!(matches!(
        eval_term(&alg("Z2"), &t, &[1, 2]),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn substitute_examples() {
    let g = sig("Grp");
    let swap = TermMorphism::new(g.clone(), 2, vec![Term::Var(1), Term::Var(0)]).unwrap();
    assert_eq!(
        substitute(&term(&g, 2, "mul(x1,x2)"), &swap).unwrap(),
        term(&g, 2, "mul(x2,x1)")
    );
    let m = TermMorphism::new(g.clone(), 2, vec![term(&g, 2, "inv(x2)")]).unwrap();
    assert_eq!(substitute(&Term::Var(0), &m).unwrap(), m.images()[0]);
    assert_eq!(
        substitute(&term(&g, 1, "mul(x1,x1)"), &m).unwrap(),
        term(&g, 2, "mul(inv(x2),inv(x2))")
    );
    assert!(matches!(
        substitute(&term(&g, 2, "x2"), &m),
        Err(Error::RankMismatch { .. })
    ));
}

#[test]
fn morphism_images_must_fit_target_rank() {
    let g = sig("Grp");
    assert!(TermMorphism::new(g, 1, vec![Term::Var(1)]).is_err());
}

#[test]
fn point_enumeration() {
    let z2 = alg("Z2");
    let pts = enumerate_points(&z2, gens(1), budget()).unwrap();
    assert_eq!(pts.iter().map(|p| p.0.clone()).collect::<Vec<_>>(), [[0], [1]]);
    let pts = enumerate_points(&z2, gens(2), budget()).unwrap();
    assert_eq!(
        pts.iter().map(|p| p.0.clone()).collect::<Vec<_>>(),
        [[0, 0], [0, 1], [1, 0], [1, 1]]
    );
    let pts = enumerate_points(&alg("Z3"), gens(2), budget()).unwrap();
    assert_eq!(pts.len(), 9);
    assert_eq!(pts.iter().collect::<HashSet<_>>().len(), 9);
    assert!(matches!(
        enumerate_points(&alg("Q8"), gens(3), budget()),
        Err(Error::PointBudget { needed: 512, budget: 64 })
    ));
    assert_eq!(
        enumerate_points(&alg("Q8"), gens(3), PointBudget(512)).unwrap().len(),
        512
    );
}

#[test]
fn rank_zero_is_rejected() {
    assert!(matches!(GeneratorSet::new(0), Err(Error::ZeroRank)));
}

#[test]
fn point_codec_round_trips() {
    for size in 1usize..5 {
        for rank in 1..4 {
            for i in 0..size.pow(rank as u32) {
                assert_eq!(encode_point(&decode_point(i, size, rank), size), i);
            }
        }
    }
}

#[test]
fn term_enumeration_examples() {
    let g = sig("Grp");
    assert_eq!(show(&enumerate_terms(&g, gens(1), 0), &g), ["x1", "e"]);
    assert_eq!(
        show(&enumerate_terms(&g, gens(1), 1), &g),
        [
            "x1",
            "e",
            "inv(x1)",
            "inv(e)",
            "mul(x1,x1)",
            "mul(x1,e)",
            "mul(e,x1)",
            "mul(e,e)"
        ]
    );
    let s = sig("Sgr");
    assert_eq!(
        show(&enumerate_terms(&s, gens(2), 1), &s),
        ["x1", "x2", "mul(x1,x1)", "mul(x1,x2)", "mul(x2,x1)", "mul(x2,x2)"]
    );
}

/// Number of terms of depth at most `d` over `k` leaves for one unary and
/// one binary symbol: `N(d) = k + N(d-1) + N(d-1)^2`.
fn count_grp_like(k: usize, d: usize) -> usize {
    (0..d).fold(k, |n, _| k + n + n * n)
}

#[test]
fn term_enumeration_is_complete_and_unique() {
    let g = sig("Grp");
    for rank in 1..=2 {
        for depth in 0..=2 {
            let ts = enumerate_terms(&g, gens(rank), depth);
            assert_eq!(ts.len(), count_grp_like(rank + 1, depth));
            assert_eq!(ts.iter().collect::<HashSet<_>>().len(), ts.len());
            assert!(ts.iter().all(|t| t.depth() <= depth));
            assert!(ts.windows(2).all(|w| w[0].depth() <= w[1].depth()));
        }
    }
}

#[test]
fn depth_convention() {
    let g = sig("Grp");
    assert_eq!(term(&g, 1, "x1").depth(), 0);
    assert_eq!(term(&g, 1, "e").depth(), 0);
    assert_eq!(term(&g, 1, "inv(e)").depth(), 1);
    assert_eq!(term(&g, 1, "mul(inv(x1),e)").depth(), 2);
}

#[test]
fn substitution_law_on_many_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let names = ["Z3", "S3", "Q8", "LZ2xRZ2", "S2"];
    for i in 0..1200 {
        let h = alg(names[i % names.len()]);
        let s = h.signature().clone();
        let (r1, r2) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
        let t = random_term(&mut rng, &s, r1, 4);
        let m = random_morphism(&mut rng, &s, r1, r2, 3);
        let p: Vec<usize> = (0..r2).map(|_| rng.gen_range(0..h.size())).collect();
        let lhs = eval_term(&h, &substitute(&t, &m).unwrap(), &p).unwrap();
        let rhs = eval_term(&h, &t, &m.pull_back(&h, &p)).unwrap();
        assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn composition_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = sig("Grp");
        let ranks: Vec<usize> = (0..4).map(|_| rng.gen_range(1..=3)).collect();
        let t = random_term(&mut rng, &s, ranks[0], 3);
        let m1 = random_morphism(&mut rng, &s, ranks[0], ranks[1], 2);
        let m2 = random_morphism(&mut rng, &s, ranks[1], ranks[2], 2);
        let m3 = random_morphism(&mut rng, &s, ranks[2], ranks[3], 2);
        prop_assert_eq!(
            substitute(&substitute(&t, &m1).unwrap(), &m2).unwrap(),
            substitute(&t, &m1.then(&m2).unwrap()).unwrap()
        );
        prop_assert_eq!(
            m1.then(&m2).unwrap().then(&m3).unwrap(),
            m1.then(&m2.then(&m3).unwrap()).unwrap()
        );
        let id = TermMorphism::identity(s.clone(), ranks[0]).unwrap();
        prop_assert_eq!(substitute(&t, &id).unwrap(), t);
    }

    #[test]
    fn point_enumeration_has_exact_cardinality(size in 1usize..5, rank in 1usize..4) {
        let h = std::sync::Arc::new(
            uag_core::algebra::FiniteAlgebra::from_fn(sig("Sgr"), size, |_, a| a[0]).unwrap(),
        );
        let pts = enumerate_points(&h, gens(rank), budget()).unwrap();
        prop_assert_eq!(pts.len(), size.pow(rank as u32));
        prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }
}
