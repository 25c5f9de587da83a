//! Fixtures and random instances shared by the integration tests, plus the
//! brute-force oracles they are checked against.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;
use uag_core::algebra::{Elem, FiniteAlgebra, Signature};
use uag_core::dsl::{parse_model, parse_term, ModelFile};
use uag_core::geometry::{factors_through, PointSet};
use uag_core::terms::{EquationSystem, GeneratorSet, PointBudget, Term, TermMorphism};
use uag_core::verbal::WordSystem;

pub const STANDARD: &str = include_str!("../../fixtures/standard.uag");

pub fn model() -> &'static ModelFile {
    static MODEL: OnceLock<ModelFile> = OnceLock::new();
    MODEL.get_or_init(|| parse_model(STANDARD).expect("fixture corpus parses"))
}

pub fn alg(name: &str) -> Arc<FiniteAlgebra> {
    model().algebras[name].clone()
}

pub fn sys(name: &str) -> EquationSystem {
    model().systems[name].clone()
}

pub fn words(name: &str) -> WordSystem {
    model().word_systems[name].clone()
}

pub fn sig(name: &str) -> Arc<Signature> {
    model().signatures[name].clone()
}

pub fn term(sig: &Signature, rank: usize, text: &str) -> Term {
    parse_term(sig, rank, text).unwrap_or_else(|e| panic!("bad term {text}: {e}"))
}

pub fn system(sig: &Arc<Signature>, rank: usize, eqs: &[(&str, &str)]) -> EquationSystem {
    let pairs = eqs
        .iter()
        .map(|(l, r)| (term(sig, rank, l), term(sig, rank, r)))
        .collect();
    EquationSystem::new(sig.clone(), GeneratorSet::new(rank).unwrap(), pairs).unwrap()
}

pub fn gens(rank: usize) -> GeneratorSet {
    GeneratorSet::new(rank).unwrap()
}

pub fn budget() -> PointBudget {
    PointBudget::default()
}

/// Every algebra in the fixture corpus, by name.
pub fn fixture_algebras() -> Vec<(String, Arc<FiniteAlgebra>)> {
    model()
        .algebras
        .iter()
        .map(|(n, a)| (n.clone(), a.clone()))
        .collect()
}

pub fn point_set(h: &Arc<FiniteAlgebra>, rank: usize, points: &[&[Elem]]) -> PointSet {
    PointSet::from_assignments(h.clone(), gens(rank), points.iter().copied(), budget()).unwrap()
}

/// `S''` computed point by point through graph functionality, independent
/// of the partition-refinement closure used by the library.
pub fn oracle_close(s: &PointSet) -> BTreeSet<usize> {
    (0..s.total())
        .filter(|&p| factors_through(s, s.algebra(), &s.assignment(p)).unwrap())
        .collect()
}

/// Closed sets of every subset of the point space, deduplicated.
pub fn brute_force_closed_sets(h: &Arc<FiniteAlgebra>, rank: usize) -> BTreeSet<Vec<usize>> {
    let total = h.size().pow(rank as u32);
    assert!(total <= 10, "brute force limited to small point spaces");
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << total) {
        let points: Vec<usize> = (0..total).filter(|&p| mask & (1 << p) != 0).collect();
        let s = PointSet::new(h.clone(), gens(rank), points, budget()).unwrap();
        out.insert(oracle_close(&s).into_iter().collect());
    }
    out
}

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

pub fn signatures() -> Vec<Arc<Signature>> {
    vec![
        Arc::new(Signature::new("Mag", [("mul", 2)]).unwrap()),
        Arc::new(Signature::new("Un", [("f", 1)]).unwrap()),
        Arc::new(Signature::new("Pt", [("c", 0), ("f", 1)]).unwrap()),
        Arc::new(Signature::new("Mix", [("c", 0), ("f", 1), ("g", 2)]).unwrap()),
    ]
}

pub fn random_table_algebra<R: Rng>(rng: &mut R, sig: &Arc<Signature>, size: usize) -> FiniteAlgebra {
    FiniteAlgebra::from_fn(sig.clone(), size, |_, _| rng.gen_range(0..size)).unwrap()
}

fn is_associative(t: &[Elem], n: usize) -> bool {
    (0..n).all(|a| {
        (0..n).all(|b| (0..n).all(|c| t[t[a * n + b] * n + c] == t[a * n + t[b * n + c]]))
    })
}

/// All associative multiplication tables on three elements.
pub fn semigroups3() -> &'static [Vec<Elem>] {
    static TABLES: OnceLock<Vec<Vec<Elem>>> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut out = Vec::new();
        for code in 0..3usize.pow(9) {
            let mut x = code;
            let t: Vec<Elem> = (0..9)
                .map(|_| {
                    let d = x % 3;
                    x /= 3;
                    d
                })
                .collect();
            if is_associative(&t, 3) {
                out.push(t);
            }
        }
        out
    })
}

fn cyclic(sig: &Arc<Signature>, n: usize) -> FiniteAlgebra {
    FiniteAlgebra::new(
        sig.clone(),
        n,
        vec![(0..n * n).map(|i| (i / n + i % n) % n).collect()],
    )
    .unwrap()
}

/// A random algebra whose relatively free algebras stay small at rank 2.
///
/// Arbitrary tables are only drawn where `|H|^(|H|^rank)` is small; larger
/// cases come from families with known small free spectra.
pub fn random_tame_algebra<R: Rng>(rng: &mut R, max_size: usize, rank: usize) -> Arc<FiniteAlgebra> {
    let size = rng.gen_range(1..=max_size);
    let sigs = signatures();
    let arbitrary = size == 1 || rank == 1 && size <= 3 || size == 2;
    if arbitrary || (rank == 1 && size == 4 && rng.gen_bool(0.5)) {
        let sig = sigs.choose(rng).unwrap();
        return Arc::new(random_table_algebra(rng, sig, size));
    }
    let mag = sigs[0].clone();
    let un = sigs[1].clone();
    let alg = match rng.gen_range(0..5) {
        0 if size == 3 => {
            let t = semigroups3().choose(rng).unwrap().clone();
            FiniteAlgebra::new(mag, 3, vec![t]).unwrap()
        }
        1 => {
            // A mono-unary algebra: an arbitrary self-map.
            let f: Vec<Elem> = (0..size).map(|_| rng.gen_range(0..size)).collect();
            FiniteAlgebra::new(un, size, vec![f]).unwrap()
        }
        2 => {
            // A chain semilattice under min.
            FiniteAlgebra::from_fn(mag, size, |_, a| a[0].min(a[1])).unwrap()
        }
        3 if size == 4 => {
            // Rectangular band 2x2.
            FiniteAlgebra::from_fn(mag, 4, |_, a| (a[0] & 2) | (a[1] & 1)).unwrap()
        }
        _ => cyclic(&mag, size),
    };
    Arc::new(alg)
}

pub fn random_term<R: Rng>(rng: &mut R, sig: &Signature, rank: usize, depth: usize) -> Term {
    let leaves: Vec<Term> = (0..rank)
        .map(Term::Var)
        .chain(sig.constants().map(|c| Term::App(c, vec![])))
        .collect();
    let ops: Vec<usize> = (0..sig.len()).filter(|&o| sig.arity(o) > 0).collect();
    if depth == 0 || ops.is_empty() || rng.gen_bool(0.3) {
        return leaves.choose(rng).unwrap().clone();
    }
    let op = *ops.choose(rng).unwrap();
    let args = (0..sig.arity(op))
        .map(|_| random_term(rng, sig, rank, depth - 1))
        .collect();
    Term::App(op, args)
}

pub fn random_system<R: Rng>(
    rng: &mut R,
    sig: &Arc<Signature>,
    rank: usize,
    max_eqs: usize,
    depth: usize,
) -> EquationSystem {
    let n = rng.gen_range(0..=max_eqs);
    let pairs = (0..n)
        .map(|_| (random_term(rng, sig, rank, depth), random_term(rng, sig, rank, depth)))
        .collect();
    EquationSystem::new(sig.clone(), gens(rank), pairs).unwrap()
}

pub fn random_morphism<R: Rng>(
    rng: &mut R,
    sig: &Arc<Signature>,
    source_rank: usize,
    target_rank: usize,
    depth: usize,
) -> TermMorphism {
    let images = (0..source_rank)
        .map(|_| random_term(rng, sig, target_rank, depth))
        .collect();
    TermMorphism::new(sig.clone(), target_rank, images).unwrap()
}

pub fn random_point_set<R: Rng>(rng: &mut R, h: &Arc<FiniteAlgebra>, rank: usize) -> PointSet {
    let total = h.size().pow(rank as u32);
    let points: Vec<usize> = (0..total).filter(|_| rng.gen_bool(0.3)).collect();
    PointSet::new(h.clone(), gens(rank), points, budget()).unwrap()
}
