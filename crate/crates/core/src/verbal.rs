//! Verbal operations: derived algebras `H*_W`, finite-rank applicability
//! evidence for word systems, transport of closed congruences, the inner
//! automorphism search and automorphic equivalence.
//!
//! Applicability of a word system is only ever checked relative to the
//! variety generated by a chosen algebra `h0` and up to a rank bound.

use std::sync::Arc;

use crate::algebra::{
    graph_functional, is_homomorphism, Elem, FiniteAlgebra, FunctionalVerdict, Product, Signature,
    Subalgebra,
};
use crate::error::{Error, Result};
use crate::geometry::{
    geom_equiv, relatively_free, ClosedCongruence, CoordinateAlgebra, FreeSpace, GeomVerdict,
    PointSet,
};
use crate::terms::{enumerate_terms, GeneratorSet, PointBudget, Term, TermMorphism};

/// One word `w_ω` over `x1..x_{arity(ω)}` per operation symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordSystem {
    signature: Arc<Signature>,
    words: Vec<Term>,
}

impl WordSystem {
    pub fn new(signature: Arc<Signature>, words: Vec<Term>) -> Result<Self> {
        if words.len() != signature.len() {
            return Err(Error::Precondition(format!(
                "{} words for {} operation symbols",
                words.len(),
                signature.len()
            )));
        }
        for (op, w) in words.iter().enumerate() {
            w.check(&signature, signature.arity(op))?;
        }
        Ok(WordSystem { signature, words })
    }

    /// `w_ω = ω(x1, .., xn)` for every `ω`.
    pub fn identity(signature: Arc<Signature>) -> Self {
        let words = (0..signature.len())
            .map(|op| Term::App(op, (0..signature.arity(op)).map(Term::Var).collect()))
            .collect();
        WordSystem { signature, words }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn words(&self) -> &[Term] {
        &self.words
    }

    pub fn word(&self, op: usize) -> &Term {
        &self.words[op]
    }

    /// Rewrites every operation in `t` by its word, so that evaluating
    /// `t` in `H*_W` equals evaluating `expand(t)` in `H`.
    pub fn expand(&self, t: &Term) -> Term {
        t.fold(&mut Term::Var, &mut |op, children| {
            self.words[op].fold(&mut |i| children[i].clone(), &mut Term::App)
        })
    }

    /// The system whose derived algebras are `(H*_self)*_outer`.
    pub fn then(&self, outer: &WordSystem) -> Result<WordSystem> {
        self.signature.ensure_same(&outer.signature)?;
        let words = outer.words.iter().map(|w| self.expand(w)).collect();
        WordSystem::new(self.signature.clone(), words)
    }
}

/// The derived algebra `H*_W`: same carrier, operation `ω` interpreted by
/// its word `w_ω`.
pub fn derive_algebra(h: &FiniteAlgebra, w: &WordSystem) -> Result<FiniteAlgebra> {
    h.signature().ensure_same(&w.signature)?;
    FiniteAlgebra::from_fn(h.signature().clone(), h.size(), |op, args| {
        w.words[op].eval(h, args)
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApplicabilityStatus {
    /// The generator-fixing map `F_r → (F_r)*_W` is an isomorphism.
    IsoFound { s_map: Vec<Elem> },
    /// No generator-fixing homomorphism exists: `element` would need two
    /// different images, reached through the two witness terms.
    NotHomomorphism {
        element: Elem,
        first: Elem,
        second: Elem,
        first_witness: Term,
        second_witness: Term,
    },
    /// The homomorphism exists but sends `first` and `second` to `image`.
    NotBijective {
        first: Elem,
        second: Elem,
        image: Elem,
    },
}

/// Evidence gathered at a single rank.
#[derive(Debug, Clone)]
pub struct RankEvidence {
    pub rank: usize,
    /// The relatively free algebra `F_r` of `Var(h0)`, with witnesses.
    pub free: Arc<CoordinateAlgebra>,
    /// `F_r` as a standalone algebra.
    pub algebra: Arc<FiniteAlgebra>,
    /// `(F_r)*_W`.
    pub derived: Arc<FiniteAlgebra>,
    pub status: ApplicabilityStatus,
}

impl RankEvidence {
    pub fn s_map(&self) -> Option<&[Elem]> {
        match &self.status {
            ApplicabilityStatus::IsoFound { s_map } => Some(s_map),
            _ => None,
        }
    }
}

/// Applicability of `W` relative to `Var(h0)`, rank by rank.
#[derive(Debug, Clone)]
pub struct ApplicabilityReport {
    pub h0: Arc<FiniteAlgebra>,
    pub words: WordSystem,
    pub ranks: Vec<RankEvidence>,
    pub budget_exhausted_at: Option<usize>,
}

impl ApplicabilityReport {
    pub fn evidence(&self, rank: usize) -> Option<&RankEvidence> {
        self.ranks.iter().find(|e| e.rank == rank)
    }

    pub fn s_map(&self, rank: usize) -> Result<&[Elem]> {
        self.evidence(rank)
            .and_then(RankEvidence::s_map)
            .ok_or(Error::MissingIso(rank))
    }

    /// True iff every examined rank found an isomorphism and no rank was
    /// skipped for budget reasons.
    pub fn is_successful(&self) -> bool {
        !self.ranks.is_empty()
            && self.budget_exhausted_at.is_none()
            && self.ranks.iter().all(|e| e.s_map().is_some())
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.last().map_or(0, |e| e.rank)
    }
}

/// Looks for the generator-fixing isomorphisms `F_r → (F_r)*_W` in the
/// relatively free algebras of `Var(h0)`, `r = 1..=max_rank`.
pub fn check_applicable_rel(
    h0: &Arc<FiniteAlgebra>,
    w: &WordSystem,
    max_rank: usize,
    budget: PointBudget,
) -> Result<ApplicabilityReport> {
    h0.signature().ensure_same(&w.signature)?;
    if max_rank == 0 {
        return Err(Error::ZeroRank);
    }
    let mut report = ApplicabilityReport {
        h0: h0.clone(),
        words: w.clone(),
        ranks: Vec::new(),
        budget_exhausted_at: None,
    };
    for rank in 1..=max_rank {
        let free = match relatively_free(h0, GeneratorSet::new(rank)?, budget) {
            Ok(free) => free,
            Err(Error::PointBudget { .. }) if rank > 1 => {
                report.budget_exhausted_at = Some(rank);
                break;
            }
            Err(e) => return Err(e),
        };
        let algebra = free.to_algebra();
        let derived = Arc::new(derive_algebra(&algebra, w)?);
        let seeds: Vec<(Vec<Elem>, Vec<Elem>)> = free
            .generator_images()
            .iter()
            .map(|&g| (vec![g], vec![g]))
            .collect();
        let verdict = graph_functional(
            &Product::power(&algebra, 1),
            &Product::power(&derived, 1),
            &seeds,
        )?;
        let status = match verdict {
            FunctionalVerdict::Violation(v) => ApplicabilityStatus::NotHomomorphism {
                element: v.source[0],
                first: v.first[0],
                second: v.second[0],
                first_witness: v.first_witness,
                second_witness: v.second_witness,
            },
            FunctionalVerdict::Functional(mapping) => {
                let mut s_map = vec![0; algebra.size()];
                for (a, b) in mapping.iter() {
                    s_map[a[0]] = b[0];
                }
                match first_collision(&s_map) {
                    Some((first, second)) => ApplicabilityStatus::NotBijective {
                        first,
                        second,
                        image: s_map[first],
                    },
                    None => ApplicabilityStatus::IsoFound { s_map },
                }
            }
        };
        report.ranks.push(RankEvidence {
            rank,
            free,
            algebra,
            derived,
            status,
        });
    }
    Ok(report)
}

fn first_collision(map: &[Elem]) -> Option<(Elem, Elem)> {
    let mut preimage = vec![usize::MAX; map.len()];
    for (x, &y) in map.iter().enumerate() {
        if y >= map.len() {
            continue;
        }
        if preimage[y] != usize::MAX {
            return Some((preimage[y], x));
        }
        preimage[y] = x;
    }
    None
}

/// The induced map `F_{r1} → F_{r2}` of a term morphism on relatively free
/// algebras of `Var(h0)`.
fn induced_free_map(m: &TermMorphism, source: &RankEvidence, target: &RankEvidence) -> Result<Vec<Elem>> {
    let images = m
        .images()
        .iter()
        .map(|t| target.free.class_of(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(source
        .free
        .subalgebra()
        .fold(|g| images[g], |op, args| target.algebra.apply(op, args)))
}

/// `Φ(μ) = s_{r2} ∘ μ̂ ∘ s_{r1}^{-1}` on the finite relatively free carriers.
pub fn apply_automorphism_to_morphism(
    m: &TermMorphism,
    report: &ApplicabilityReport,
) -> Result<Vec<Elem>> {
    report.words.signature().ensure_same(m.signature())?;
    let (r1, r2) = (m.source_rank(), m.target_rank());
    let s1 = report.s_map(r1)?;
    let s2 = report.s_map(r2)?;
    let source = report.evidence(r1).ok_or(Error::MissingIso(r1))?;
    let target = report.evidence(r2).ok_or(Error::MissingIso(r2))?;
    let mu = induced_free_map(m, source, target)?;
    let mut s1_inverse = vec![0; s1.len()];
    for (x, &y) in s1.iter().enumerate() {
        s1_inverse[y] = x;
    }
    Ok(s1_inverse.iter().map(|&x| s2[mu[x]]).collect())
}

/// Checks that `h` satisfies every identity of `Var(h0)` in `rank`
/// variables.
fn satisfies_identities(h0: &Arc<FiniteAlgebra>, h: &Arc<FiniteAlgebra>, rank: usize, budget: PointBudget) -> Result<bool> {
    let space = FreeSpace::new(&[h0.clone(), h.clone()], rank, budget)?;
    let partition = space.partition(space.columns(0));
    Ok(space.columns(1).all(|c| space.respects(&partition, c)))
}

/// Transports `T ∈ Cl_H(F(X))` to `Cl_{H*_W}(F(X))` along the bijection
/// recorded in `report`.
///
/// `T` becomes a partition of the relatively free carrier `F_r` of
/// `Var(h0)`; since a point of `H*_W` has kernel `s^{-1}(ker ψ)` for the
/// matching point `ψ` of `H`, the partition is moved through `s^{-1}`. The
/// result is checked for closedness over `H*_W` and an error is returned if
/// the check fails.
pub fn transport_closed(
    t: &ClosedCongruence,
    w: &WordSystem,
    report: &ApplicabilityReport,
    budget: PointBudget,
) -> Result<ClosedCongruence> {
    Transport::new(t.algebra(), t.rank(), w, report, budget)?.apply(t)
}

/// The part of [`transport_closed`] that does not depend on `T`, prepared
/// once for an algebra and a rank so that many closed sets can be moved.
#[derive(Debug)]
pub struct Transport<'a> {
    h: Arc<FiniteAlgebra>,
    rank: usize,
    s: &'a [Elem],
    free: &'a Subalgebra,
    derived: Arc<FiniteAlgebra>,
    space: FreeSpace,
    to_free: Vec<usize>,
    budget: PointBudget,
}

impl<'a> Transport<'a> {
    pub fn new(
        h: &Arc<FiniteAlgebra>,
        rank: usize,
        w: &WordSystem,
        report: &'a ApplicabilityReport,
        budget: PointBudget,
    ) -> Result<Self> {
        if &report.words != w {
            return Err(Error::Precondition(
                "report was computed for a different word system".into(),
            ));
        }
        let h0 = &report.h0;
        h.signature().ensure_same(h0.signature())?;
        let s = report.s_map(rank)?;
        let evidence = report.evidence(rank).ok_or(Error::MissingIso(rank))?;

        for e in report.ranks.iter().filter(|e| e.rank <= rank.max(2)) {
            if !satisfies_identities(h0, h, e.rank, budget)? {
                return Err(Error::Precondition(format!(
                    "algebra fails an identity of Var(h0) in {} variables",
                    e.rank
                )));
            }
        }

        let free = evidence.free.subalgebra();
        let derived = Arc::new(derive_algebra(h, w)?);
        let space = FreeSpace::new(&[h0.clone(), derived.clone()], rank, budget)?;
        let h0_columns = space.columns(0);
        let to_free = space
            .elements()
            .elements()
            .map(|e| {
                free.index_of(&e[h0_columns.clone()])
                    .expect("projection of the joint free algebra is F_r")
            })
            .collect();
        Ok(Transport {
            h: h.clone(),
            rank,
            s,
            free,
            derived,
            space,
            to_free,
            budget,
        })
    }

    /// The derived algebra `H*_W` the results live in.
    pub fn derived(&self) -> &Arc<FiniteAlgebra> {
        &self.derived
    }

    pub fn apply(&self, t: &ClosedCongruence) -> Result<ClosedCongruence> {
        if t.algebra() != &self.h || t.rank() != self.rank {
            return Err(Error::Precondition(
                "closed set does not match the prepared algebra and rank".into(),
            ));
        }
        let h = &self.h;
        // T as a partition of F_r: elements are equal iff their witness
        // terms agree at every point of T'.
        let columns: Vec<Vec<Elem>> = t
            .base()
            .assignments()
            .map(|p| self.free.fold(|g| p[g], |op, args| h.apply(op, args)))
            .collect();
        let mut keys: indexmap::IndexSet<Vec<Elem>> = indexmap::IndexSet::new();
        let labels: Vec<usize> = (0..self.free.len())
            .map(|q| keys.insert_full(columns.iter().map(|c| c[q]).collect()).0)
            .collect();
        let moved: Vec<usize> = (0..self.free.len()).map(|q| labels[self.s[q]]).collect();

        let joint = self.space.elements();
        let target_columns = self.space.columns(1);
        let points: Vec<usize> = target_columns
            .clone()
            .filter(|&c| {
                // ψ must be constant on the moved classes of F_r.
                let mut seen = vec![usize::MAX; keys.len()];
                joint.elements().enumerate().all(|(e, tuple)| {
                    let class = moved[self.to_free[e]];
                    let v = tuple[c];
                    if seen[class] == usize::MAX {
                        seen[class] = v;
                        true
                    } else {
                        seen[class] == v
                    }
                })
            })
            .map(|c| c - target_columns.start)
            .collect();

        let closure = self
            .space
            .partition(points.iter().map(|&p| p + target_columns.start));
        if !closure.constant_on_classes(|e| moved[self.to_free[e]]) {
            return Err(Error::TransportNotClosed { rank: self.rank });
        }
        let base = PointSet::new(self.derived.clone(), t.generators(), points, self.budget)?;
        Ok(ClosedCongruence::from_closed(base))
    }
}

/// A unary term `c(x1)` whose induced maps `f ↦ c(f)` were verified to be
/// isomorphisms `F_r → (F_r)*_W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerWitness {
    pub term: Term,
    pub verified_ranks: Vec<usize>,
}

/// Searches unary terms up to `max_depth`, one per element of the rank-1
/// relatively free algebra, for an inner witness of `W` over `Var(h0)`.
///
/// `c(f)` is evaluated with the original operations of `F_r`.
pub fn inner_search(
    h0: &Arc<FiniteAlgebra>,
    w: &WordSystem,
    max_rank: usize,
    max_depth: usize,
    budget: PointBudget,
) -> Result<Option<InnerWitness>> {
    h0.signature().ensure_same(&w.signature)?;
    if max_rank == 0 {
        return Err(Error::ZeroRank);
    }
    let sig = h0.signature();
    let one = GeneratorSet::new(1)?;
    let free1 = relatively_free(h0, one, budget)?;
    let mut seen = vec![false; free1.len()];
    let candidates: Vec<Term> = enumerate_terms(sig, one, max_depth)
        .into_iter()
        .filter(|c| {
            let class = free1.class_of(c).expect("enumerated terms are well formed");
            !std::mem::replace(&mut seen[class], true)
        })
        .collect();

    let levels = (1..=max_rank)
        .map(|r| {
            let free = relatively_free(h0, GeneratorSet::new(r)?, budget)?;
            let algebra = free.to_algebra();
            let derived = derive_algebra(&algebra, w)?;
            Ok((algebra, derived))
        })
        .collect::<Result<Vec<_>>>()?;

    for c in candidates {
        let holds = levels
            .iter()
            .all(|(algebra, derived)| verify_inner(&c, algebra, derived));
        if holds {
            return Ok(Some(InnerWitness {
                term: c,
                verified_ranks: (1..=max_rank).collect(),
            }));
        }
    }
    Ok(None)
}

/// True iff `f ↦ c(f)` is a bijective homomorphism `free → derived`.
pub fn verify_inner(c: &Term, free: &FiniteAlgebra, derived: &FiniteAlgebra) -> bool {
    let map: Vec<Elem> = (0..free.size()).map(|f| c.eval(free, &[f])).collect();
    first_collision(&map).is_none() && is_homomorphism(free, derived, &map).unwrap_or(false)
}

/// The epistemic status of the word system used by [`auto_equiv`].
#[derive(Debug, Clone)]
pub enum ApplicabilityBasis {
    /// The caller asserts that `W` is applicable in the intended variety.
    UserAsserted,
    /// A successful finite-rank report relative to `Var(h0)`.
    RelativeEvidence(ApplicabilityReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisSummary {
    UserAsserted,
    RelativeEvidence { h0: Arc<FiniteAlgebra>, rank: usize },
}

#[derive(Debug, Clone)]
pub struct AutoEqVerdict {
    pub verdict: bool,
    pub max_rank: usize,
    pub basis: BasisSummary,
    pub geom: GeomVerdict,
}

/// Automorphic equivalence through `W`: `H1` against `(H2)*_W` for
/// geometric equivalence up to `max_rank`.
pub fn auto_equiv(
    h1: &Arc<FiniteAlgebra>,
    h2: &Arc<FiniteAlgebra>,
    w: &WordSystem,
    max_rank: usize,
    basis: &ApplicabilityBasis,
    budget: PointBudget,
) -> Result<AutoEqVerdict> {
    let summary = match basis {
        ApplicabilityBasis::UserAsserted => BasisSummary::UserAsserted,
        ApplicabilityBasis::RelativeEvidence(report) => {
            if &report.words != w {
                return Err(Error::MissingBasis(
                    "report covers a different word system".into(),
                ));
            }
            if !report.is_successful() {
                return Err(Error::MissingBasis(
                    "report does not show an isomorphism at every rank".into(),
                ));
            }
            BasisSummary::RelativeEvidence {
                h0: report.h0.clone(),
                rank: report.max_rank(),
            }
        }
    };
    let derived = Arc::new(derive_algebra(h2, w)?);
    let geom = geom_equiv(h1, &derived, max_rank, budget)?;
    Ok(AutoEqVerdict {
        verdict: geom.equivalent_up_to_rank,
        max_rank,
        basis: summary,
        geom,
    })
}
