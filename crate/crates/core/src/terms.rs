//! Terms over generators `x1..xn`: evaluation at points, substitution and
//! bounded enumeration.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use crate::algebra::{advance_round_tuple, Elem, FiniteAlgebra, Signature};
use crate::error::{Error, Result};

/// A term of the absolutely free algebra over `x1..xn`.
///
/// Generators are stored 0-based: `Var(0)` is `x1`. Operations are indices
/// into the ambient [`Signature`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App(usize, Vec<Term>),
}

impl Term {
    /// Generators and constants have depth 0, every application of positive
    /// arity adds one.
    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, children) => children
                .iter()
                .map(|c| c.depth() + 1)
                .max()
                .unwrap_or(0),
        }
    }

    /// Number of generators the term needs, i.e. the largest index used.
    pub fn min_rank(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(_, children) => children.iter().map(Term::min_rank).max().unwrap_or(0),
        }
    }

    /// Checks arities against `sig` and generator indices against `rank`.
    pub fn check(&self, sig: &Signature, rank: usize) -> Result<()> {
        match self {
            Term::Var(i) if *i < rank => Ok(()),
            Term::Var(i) => Err(Error::RankMismatch {
                expected: rank,
                found: i + 1,
            }),
            Term::App(op, children) => {
                if *op >= sig.len() {
                    return Err(Error::UnknownSymbol(format!("#{op}")));
                }
                if sig.arity(*op) != children.len() {
                    return Err(Error::ArityMismatch {
                        symbol: sig.symbol(*op).to_string(),
                        expected: sig.arity(*op),
                        found: children.len(),
                    });
                }
                children.iter().try_for_each(|c| c.check(sig, rank))
            }
        }
    }

    /// Evaluation without validation; `point` must cover every generator.
    pub fn eval(&self, algebra: &FiniteAlgebra, point: &[Elem]) -> Elem {
        match self {
            Term::Var(i) => point[*i],
            Term::App(op, children) => {
                let args: Vec<Elem> = children.iter().map(|c| c.eval(algebra, point)).collect();
                algebra.apply(*op, &args)
            }
        }
    }

    /// Generic evaluation: `var(i)` at generators, `apply(op, values)` at
    /// applications.
    pub fn fold<T>(
        &self,
        var: &mut impl FnMut(usize) -> T,
        apply: &mut impl FnMut(usize, Vec<T>) -> T,
    ) -> T {
        match self {
            Term::Var(i) => var(*i),
            Term::App(op, children) => {
                let values = children.iter().map(|c| c.fold(var, apply)).collect();
                apply(*op, values)
            }
        }
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(i) => write!(f, "x{}", i + 1),
            Term::App(op, children) => {
                write!(f, "{}", self.sig.symbol(*op))?;
                if children.is_empty() {
                    return Ok(());
                }
                write!(f, "(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", c.display(self.sig))?;
                }
                write!(f, ")")
            }
        }
    }
}

/// A finite generator set `{x1, .., xn}`, `n >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GeneratorSet {
    rank: usize,
}

impl GeneratorSet {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            Err(Error::ZeroRank)
        } else {
            Ok(GeneratorSet { rank })
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }
}

/// An assignment of carrier elements to `x1..xn`, standing for the unique
/// homomorphism from the free algebra that extends it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(pub Vec<Elem>);

impl Deref for Point {
    type Target = [Elem];

    fn deref(&self) -> &[Elem] {
        &self.0
    }
}

/// Validated evaluation of `t` in `algebra` at `point`.
pub fn eval_term(algebra: &FiniteAlgebra, t: &Term, point: &[Elem]) -> Result<Elem> {
    t.check(algebra.signature(), point.len())?;
    algebra.check_elements(point)?;
    Ok(t.eval(algebra, point))
}

/// A homomorphism `F(x1..x_source) → F(x1..x_target)` given by the images of
/// the source generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TermMorphism {
    signature: Arc<Signature>,
    target_rank: usize,
    images: Vec<Term>,
}

impl TermMorphism {
    pub fn new(signature: Arc<Signature>, target_rank: usize, images: Vec<Term>) -> Result<Self> {
        if images.is_empty() || target_rank == 0 {
            return Err(Error::ZeroRank);
        }
        for t in &images {
            t.check(&signature, target_rank)?;
        }
        Ok(TermMorphism {
            signature,
            target_rank,
            images,
        })
    }

    pub fn identity(signature: Arc<Signature>, rank: usize) -> Result<Self> {
        TermMorphism::new(signature, rank, (0..rank).map(Term::Var).collect())
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn source_rank(&self) -> usize {
        self.images.len()
    }

    pub fn target_rank(&self) -> usize {
        self.target_rank
    }

    pub fn images(&self) -> &[Term] {
        &self.images
    }

    /// `self` followed by `next`: images are `substitute(self.images[i], next)`.
    /// As homomorphisms this is `next ∘ self`.
    pub fn then(&self, next: &TermMorphism) -> Result<TermMorphism> {
        self.signature.ensure_same(&next.signature)?;
        let images = self
            .images
            .iter()
            .map(|t| substitute(t, next))
            .collect::<Result<_>>()?;
        TermMorphism::new(self.signature.clone(), next.target_rank, images)
    }

    /// The point `ψ∘m`: generator `i` goes to `images[i]` evaluated at `point`.
    pub fn pull_back(&self, algebra: &FiniteAlgebra, point: &[Elem]) -> Vec<Elem> {
        self.images.iter().map(|t| t.eval(algebra, point)).collect()
    }
}

/// Replaces every generator `xi` of `t` by `m.images[i]`.
pub fn substitute(t: &Term, m: &TermMorphism) -> Result<Term> {
    t.check(&m.signature, m.source_rank())?;
    Ok(t.fold(&mut |i| m.images[i].clone(), &mut Term::App))
}

/// A finite system of equations over `x1..xn`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquationSystem {
    signature: Arc<Signature>,
    generators: GeneratorSet,
    pairs: Vec<(Term, Term)>,
}

impl EquationSystem {
    pub fn new(
        signature: Arc<Signature>,
        generators: GeneratorSet,
        pairs: Vec<(Term, Term)>,
    ) -> Result<Self> {
        for (l, r) in &pairs {
            l.check(&signature, generators.rank())?;
            r.check(&signature, generators.rank())?;
        }
        Ok(EquationSystem {
            signature,
            generators,
            pairs,
        })
    }

    /// The empty system, whose closure is the diagonal's closure.
    pub fn empty(signature: Arc<Signature>, generators: GeneratorSet) -> Self {
        EquationSystem {
            signature,
            generators,
            pairs: Vec::new(),
        }
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn generators(&self) -> GeneratorSet {
        self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.rank()
    }

    pub fn pairs(&self) -> &[(Term, Term)] {
        &self.pairs
    }
}

/// Upper bound on `|H|^rank`, the number of points of an affine space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PointBudget(pub usize);

impl Default for PointBudget {
    fn default() -> Self {
        PointBudget(64)
    }
}

impl PointBudget {
    /// Returns `size^rank` if it fits in the budget.
    pub fn check(self, size: usize, rank: usize) -> Result<usize> {
        let needed = (size as u128).checked_pow(rank as u32).unwrap_or(u128::MAX);
        if needed > self.0 as u128 {
            Err(Error::PointBudget {
                needed,
                budget: self.0,
            })
        } else {
            Ok(needed as usize)
        }
    }
}

/// The assignment vector of the `index`-th point in lexicographic order.
pub fn decode_point(index: usize, size: usize, rank: usize) -> Vec<Elem> {
    let mut out = vec![0; rank];
    let mut x = index;
    for slot in out.iter_mut().rev() {
        *slot = x % size;
        x /= size;
    }
    out
}

/// Inverse of [`decode_point`].
pub fn encode_point(point: &[Elem], size: usize) -> usize {
    point.iter().fold(0, |acc, &a| acc * size + a)
}

/// All points of `Hom(F(X), H)`, i.e. all of `H^rank`, in lexicographic
/// order of assignment vectors.
pub fn enumerate_points(
    h: &FiniteAlgebra,
    generators: GeneratorSet,
    budget: PointBudget,
) -> Result<Vec<Point>> {
    let count = budget.check(h.size(), generators.rank())?;
    Ok((0..count)
        .map(|i| Point(decode_point(i, h.size(), generators.rank())))
        .collect())
}

/// Every arity-correct term of depth at most `max_depth`, ordered by depth,
/// then operation in signature order, then children lexicographically by
/// their own position in this enumeration.
///
/// Depth 0 lists the generators followed by the constants.
pub fn enumerate_terms(sig: &Signature, generators: GeneratorSet, max_depth: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = (0..generators.rank()).map(Term::Var).collect();
    terms.extend(sig.constants().map(|op| Term::App(op, Vec::new())));
    let mut level_start = 0;
    for _ in 0..max_depth {
        let level_end = terms.len();
        if level_start == level_end {
            break;
        }
        for op in 0..sig.len() {
            let arity = sig.arity(op);
            if arity == 0 {
                continue;
            }
            let mut args = vec![0; arity];
            args[arity - 1] = level_start;
            loop {
                let children = args.iter().map(|&a| terms[a].clone()).collect();
                terms.push(Term::App(op, children));
                if !advance_round_tuple(&mut args, level_start, level_end) {
                    break;
                }
            }
        }
        level_start = level_end;
    }
    terms
}
