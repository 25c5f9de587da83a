//! Solution sets, algebraic closure and the categories of closed
//! congruences and coordinate algebras.
//!
//! An `H`-closed congruence `T` of `F(X)` is represented by its solution set
//! `T' ⊆ Hom(F(X), H) = H^X`, a Galois-closed set of points. `T` itself is
//! recovered as the intersection of the kernels of those points, and term
//! pairs are tested against it by evaluation.

use std::ops::Range;
use std::sync::{Arc, OnceLock};

use crate::algebra::{
    generate_subalgebra, graph_functional, Elem, FiniteAlgebra, FunctionalVerdict, Product,
    Signature, Subalgebra,
};
use crate::error::{Error, Result};
use crate::terms::{
    decode_point, encode_point, EquationSystem, GeneratorSet, PointBudget, Term, TermMorphism,
};

/// A set of points of `Hom(F(X), H)`, kept as sorted indices into the
/// lexicographic point list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    algebra: Arc<FiniteAlgebra>,
    generators: GeneratorSet,
    total: usize,
    points: Vec<usize>,
}

impl PointSet {
    pub fn new(
        algebra: Arc<FiniteAlgebra>,
        generators: GeneratorSet,
        points: impl IntoIterator<Item = usize>,
        budget: PointBudget,
    ) -> Result<Self> {
        let total = budget.check(algebra.size(), generators.rank())?;
        let mut points: Vec<usize> = points.into_iter().collect();
        points.sort_unstable();
        points.dedup();
        if let Some(&bad) = points.iter().find(|&&p| p >= total) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                size: total,
            });
        }
        Ok(PointSet {
            algebra,
            generators,
            total,
            points,
        })
    }

    /// Builds a point set from assignment vectors.
    pub fn from_assignments<'a>(
        algebra: Arc<FiniteAlgebra>,
        generators: GeneratorSet,
        assignments: impl IntoIterator<Item = &'a [Elem]>,
        budget: PointBudget,
    ) -> Result<Self> {
        let size = algebra.size();
        let mut indices = Vec::new();
        for a in assignments {
            if a.len() != generators.rank() {
                return Err(Error::RankMismatch {
                    expected: generators.rank(),
                    found: a.len(),
                });
            }
            algebra.check_elements(a)?;
            indices.push(encode_point(a, size));
        }
        PointSet::new(algebra, generators, indices, budget)
    }

    pub fn full(
        algebra: Arc<FiniteAlgebra>,
        generators: GeneratorSet,
        budget: PointBudget,
    ) -> Result<Self> {
        let total = budget.check(algebra.size(), generators.rank())?;
        PointSet::new(algebra, generators, 0..total, budget)
    }

    pub fn empty(
        algebra: Arc<FiniteAlgebra>,
        generators: GeneratorSet,
        budget: PointBudget,
    ) -> Result<Self> {
        PointSet::new(algebra, generators, [], budget)
    }

    fn with_points(&self, points: Vec<usize>) -> PointSet {
        PointSet {
            algebra: self.algebra.clone(),
            generators: self.generators,
            total: self.total,
            points,
        }
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra> {
        &self.algebra
    }

    pub fn generators(&self) -> GeneratorSet {
        self.generators
    }

    pub fn rank(&self) -> usize {
        self.generators.rank()
    }

    /// Size of the whole affine space, `|H|^rank`.
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn indices(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.points.binary_search(&index).is_ok()
    }

    pub fn contains_assignment(&self, assignment: &[Elem]) -> bool {
        self.contains(encode_point(assignment, self.algebra.size()))
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.points.iter().all(|&p| other.contains(p))
    }

    pub fn assignment(&self, index: usize) -> Vec<Elem> {
        decode_point(index, self.algebra.size(), self.rank())
    }

    /// Assignment vectors in lexicographic order.
    pub fn assignments(&self) -> impl Iterator<Item = Vec<Elem>> + '_ {
        self.points.iter().map(|&p| self.assignment(p))
    }

    /// Generator rows `g_x = (φ(x))_{φ ∈ S}`, one per generator.
    pub fn rows(&self) -> Vec<Vec<Elem>> {
        let assignments: Vec<Vec<Elem>> = self.assignments().collect();
        (0..self.rank())
            .map(|x| assignments.iter().map(|a| a[x]).collect())
            .collect()
    }

    fn check_same_space(&self, other: &PointSet) -> Result<()> {
        self.algebra.signature().ensure_same(other.algebra.signature())?;
        if self.rank() != other.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: other.rank(),
            });
        }
        Ok(())
    }
}

/// A closed congruence `T ∈ Cl_H(F(X))`, stored as its Galois-closed point
/// set. The empty point set stands for the full congruence.
#[derive(Debug, Clone)]
pub struct ClosedCongruence {
    base: PointSet,
    coordinate: OnceLock<Arc<CoordinateAlgebra>>,
}

impl PartialEq for ClosedCongruence {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
    }
}

impl Eq for ClosedCongruence {}

impl ClosedCongruence {
    /// Wraps a point set after checking that it is Galois-closed.
    pub fn new(base: PointSet, budget: PointBudget) -> Result<Self> {
        let closed = galois_close_points(&base, budget)?;
        if closed != base {
            return Err(Error::Precondition(
                "point set is not Galois-closed".into(),
            ));
        }
        Ok(ClosedCongruence::from_closed(base))
    }

    pub(crate) fn from_closed(base: PointSet) -> Self {
        ClosedCongruence {
            base,
            coordinate: OnceLock::new(),
        }
    }

    pub fn base(&self) -> &PointSet {
        &self.base
    }

    pub fn algebra(&self) -> &Arc<FiniteAlgebra> {
        self.base.algebra()
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.base.algebra().signature()
    }

    /// The underlying free-algebra data `(signature, X)`.
    pub fn generators(&self) -> GeneratorSet {
        self.base.generators()
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    pub fn contains(&self, t1: &Term, t2: &Term) -> Result<bool> {
        congruence_contains(self, t1, t2)
    }

    /// The coordinate algebra `F(X)/T`, computed once.
    pub fn coordinate_algebra(&self) -> Arc<CoordinateAlgebra> {
        self.coordinate
            .get_or_init(|| Arc::new(CoordinateAlgebra::build(&self.base)))
            .clone()
    }
}

/// The quotient `F(X)/T` realized as the subalgebra of `H^S` generated by
/// the generator rows of `S = T'`.
#[derive(Debug)]
pub struct CoordinateAlgebra {
    sub: Subalgebra,
    standalone: OnceLock<Arc<FiniteAlgebra>>,
}

impl CoordinateAlgebra {
    fn build(base: &PointSet) -> Self {
        let product = Product::power(base.algebra(), base.len());
        let sub = generate_subalgebra(&product, &base.rows())
            .expect("rank is positive, so there is at least one generator");
        CoordinateAlgebra {
            sub,
            standalone: OnceLock::new(),
        }
    }

    pub fn subalgebra(&self) -> &Subalgebra {
        &self.sub
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.sub.signature()
    }

    pub fn rank(&self) -> usize {
        self.sub.generator_elements().len()
    }

    pub fn len(&self) -> usize {
        self.sub.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sub.is_empty()
    }

    /// Element index of each generator class `[x_i]`.
    pub fn generator_images(&self) -> &[usize] {
        self.sub.generator_elements()
    }

    pub fn element(&self, i: usize) -> &[Elem] {
        self.sub.element(i)
    }

    pub fn witness(&self, i: usize) -> Term {
        self.sub.witness(i)
    }

    /// The class of `t`, i.e. the element `(t(φ))_{φ ∈ S}`.
    pub fn class_of(&self, t: &Term) -> Result<usize> {
        t.check(self.signature(), self.rank())?;
        let product = self.sub.product();
        let gens = self.sub.generator_elements();
        let tuple = t.fold(
            &mut |i| self.sub.element(gens[i]).to_vec(),
            &mut |op, args| {
                let refs: Vec<&[Elem]> = args.iter().map(Vec::as_slice).collect();
                product.apply(op, &refs)
            },
        );
        Ok(self
            .sub
            .index_of(&tuple)
            .expect("term values lie in the generated subalgebra"))
    }

    /// The carrier as a standalone algebra with re-indexed tables.
    pub fn to_algebra(&self) -> Arc<FiniteAlgebra> {
        self.standalone
            .get_or_init(|| Arc::new(self.sub.to_algebra()))
            .clone()
    }

    fn same_carrier(&self, other: &CoordinateAlgebra) -> bool {
        self.len() == other.len() && self.sub.elements().eq(other.sub.elements())
    }
}

/// A homomorphism between coordinate algebras, a morphism of `Cor_H`.
#[derive(Debug, Clone)]
pub struct QuotientHom {
    source: Arc<CoordinateAlgebra>,
    target: Arc<CoordinateAlgebra>,
    map: Vec<usize>,
}

impl PartialEq for QuotientHom {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
            && (Arc::ptr_eq(&self.source, &other.source) || self.source.same_carrier(&other.source))
            && (Arc::ptr_eq(&self.target, &other.target) || self.target.same_carrier(&other.target))
    }
}

impl QuotientHom {
    pub fn identity(c: &Arc<CoordinateAlgebra>) -> Self {
        QuotientHom {
            source: c.clone(),
            target: c.clone(),
            map: (0..c.len()).collect(),
        }
    }

    /// The unique homomorphism sending generator class `i` of `source` to
    /// `images[i]`, if one exists.
    pub fn from_generator_images(
        source: &Arc<CoordinateAlgebra>,
        target: &Arc<CoordinateAlgebra>,
        images: &[usize],
    ) -> Result<Option<Self>> {
        if images.len() != source.rank() {
            return Err(Error::RankMismatch {
                expected: source.rank(),
                found: images.len(),
            });
        }
        let a = source.to_algebra();
        let b = target.to_algebra();
        b.check_elements(images)?;
        let seeds: Vec<(Vec<Elem>, Vec<Elem>)> = source
            .generator_images()
            .iter()
            .zip(images)
            .map(|(&g, &img)| (vec![g], vec![img]))
            .collect();
        let verdict = graph_functional(
            &Product::power(&a, 1),
            &Product::power(&b, 1),
            &seeds,
        )?;
        Ok(verdict.mapping().map(|m| {
            let mut map = vec![0; source.len()];
            for (x, y) in m.iter() {
                map[x[0]] = y[0];
            }
            QuotientHom {
                source: source.clone(),
                target: target.clone(),
                map,
            }
        }))
    }

    pub fn source(&self) -> &Arc<CoordinateAlgebra> {
        &self.source
    }

    pub fn target(&self) -> &Arc<CoordinateAlgebra> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, element: usize) -> usize {
        self.map[element]
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &QuotientHom) -> Result<QuotientHom> {
        if !self.target.same_carrier(&next.source) {
            return Err(Error::Precondition(
                "composed homomorphisms do not share a coordinate algebra".into(),
            ));
        }
        Ok(QuotientHom {
            source: self.source.clone(),
            target: next.target.clone(),
            map: self.map.iter().map(|&q| next.map[q]).collect(),
        })
    }

    /// Exhaustive homomorphism check on the standalone tables.
    pub fn is_homomorphism(&self) -> bool {
        crate::algebra::is_homomorphism(&self.source.to_algebra(), &self.target.to_algebra(), &self.map)
            .unwrap_or(false)
    }
}

/// The relatively free algebra of `Var(H_1 × .. × H_k)` at a fixed rank,
/// realized inside `H_1^{P_1} × .. × H_k^{P_k}` where `P_i` is the full
/// point list of `H_i`. Every point of every `H_i` is one coordinate, and
/// every kernel of a point is the partition induced by its coordinate.
///
/// Deciding `⋂_{φ∈S} ker φ ⊆ ker ψ` becomes a partition refinement check on
/// this finite carrier, which is how closures are computed in bulk.
#[derive(Debug)]
pub(crate) struct FreeSpace {
    algebras: Vec<Arc<FiniteAlgebra>>,
    offsets: Vec<usize>,
    sub: Subalgebra,
}

/// Class labels of the free carrier under some point set's partition.
pub(crate) struct Partition {
    labels: Vec<usize>,
    classes: usize,
}

impl Partition {
    /// True iff `value` is constant on every class.
    pub(crate) fn constant_on_classes(&self, value: impl Fn(usize) -> usize) -> bool {
        let mut seen = vec![usize::MAX; self.classes];
        for (e, &label) in self.labels.iter().enumerate() {
            let v = value(e);
            if seen[label] == usize::MAX {
                seen[label] = v;
            } else if seen[label] != v {
                return false;
            }
        }
        true
    }
}

impl FreeSpace {
    pub(crate) fn new(
        algebras: &[Arc<FiniteAlgebra>],
        rank: usize,
        budget: PointBudget,
    ) -> Result<Self> {
        let first = algebras
            .first()
            .ok_or_else(|| Error::Precondition("no algebras".into()))?;
        let mut offsets = vec![0];
        let mut factors = Vec::new();
        for h in algebras {
            first.signature().ensure_same(h.signature())?;
            let count = budget.check(h.size(), rank)?;
            factors.extend(std::iter::repeat_n(h.clone(), count));
            offsets.push(offsets.last().unwrap() + count);
        }
        let product = Product::new(first.signature().clone(), factors)?;
        let generators: Vec<Vec<Elem>> = (0..rank)
            .map(|x| {
                algebras
                    .iter()
                    .flat_map(|h| {
                        let count = h.size().pow(rank as u32);
                        (0..count).map(move |p| decode_point(p, h.size(), rank)[x])
                    })
                    .collect()
            })
            .collect();
        let sub = generate_subalgebra(&product, &generators)?;
        Ok(FreeSpace {
            algebras: algebras.to_vec(),
            offsets,
            sub,
        })
    }

    pub(crate) fn columns(&self, algebra: usize) -> Range<usize> {
        self.offsets[algebra]..self.offsets[algebra + 1]
    }

    pub(crate) fn partition(&self, columns: impl IntoIterator<Item = usize>) -> Partition {
        let n = self.sub.len();
        let mut labels = vec![0usize; n];
        let mut classes = 1;
        let mut relabel: Vec<usize> = Vec::new();
        for col in columns {
            let size = self.column_algebra(col).size();
            relabel.clear();
            relabel.resize(classes * size, usize::MAX);
            let mut next = 0;
            for (e, label) in labels.iter_mut().enumerate() {
                let key = *label * size + self.sub.element(e)[col];
                if relabel[key] == usize::MAX {
                    relabel[key] = next;
                    next += 1;
                }
                *label = relabel[key];
            }
            classes = next;
        }
        Partition { labels, classes }
    }

    /// True iff coordinate `col` is constant on every class of `partition`.
    pub(crate) fn respects(&self, partition: &Partition, col: usize) -> bool {
        partition.constant_on_classes(|e| self.sub.element(e)[col])
    }

    pub(crate) fn elements(&self) -> &Subalgebra {
        &self.sub
    }

    fn column_algebra(&self, col: usize) -> &FiniteAlgebra {
        let i = self.offsets.partition_point(|&o| o <= col) - 1;
        &self.algebras[i]
    }

    /// Local indices of the points of algebra `target` whose kernels contain
    /// `⋂ ker` of the given columns.
    pub(crate) fn close(&self, columns: &[usize], target: usize) -> Vec<usize> {
        let partition = self.partition(columns.iter().copied());
        let range = self.columns(target);
        range
            .clone()
            .filter(|&c| self.respects(&partition, c))
            .map(|c| c - range.start)
            .collect()
    }
}

/// The solution set `T'` of a system in `H`.
pub fn solutions(
    h: &Arc<FiniteAlgebra>,
    system: &EquationSystem,
    budget: PointBudget,
) -> Result<PointSet> {
    h.signature().ensure_same(system.signature())?;
    let gens = system.generators();
    let total = budget.check(h.size(), gens.rank())?;
    let points = (0..total).filter(|&p| {
        let point = decode_point(p, h.size(), gens.rank());
        system
            .pairs()
            .iter()
            .all(|(l, r)| l.eval(h, &point) == r.eval(h, &point))
    });
    PointSet::new(h.clone(), gens, points, budget)
}

/// Decides `⋂_{φ∈S} ker φ ⊆ ker ψ`, where `ψ` is a point of `target`
/// (any algebra of the same signature), by testing whether the generator
/// rows of `S` paired with `ψ(x)` generate the graph of a function.
pub fn factors_through(s: &PointSet, target: &Arc<FiniteAlgebra>, psi: &[Elem]) -> Result<bool> {
    s.algebra().signature().ensure_same(target.signature())?;
    if psi.len() != s.rank() {
        return Err(Error::RankMismatch {
            expected: s.rank(),
            found: psi.len(),
        });
    }
    target.check_elements(psi)?;
    Ok(graph_verdict(s, target, psi)?.is_functional())
}

fn graph_verdict(s: &PointSet, target: &Arc<FiniteAlgebra>, psi: &[Elem]) -> Result<FunctionalVerdict> {
    let seeds: Vec<(Vec<Elem>, Vec<Elem>)> = s
        .rows()
        .into_iter()
        .zip(psi)
        .map(|(row, &v)| (row, vec![v]))
        .collect();
    graph_functional(
        &Product::power(s.algebra(), s.len()),
        &Product::power(target, 1),
        &seeds,
    )
}

/// The Galois closure `S''`: every point whose kernel contains
/// `⋂_{φ∈S} ker φ`.
pub fn galois_close_points(s: &PointSet, budget: PointBudget) -> Result<PointSet> {
    let space = FreeSpace::new(std::slice::from_ref(s.algebra()), s.rank(), budget)?;
    Ok(s.with_points(space.close(s.indices(), 0)))
}

/// The algebraic closure `T''_H`.
pub fn closure(
    h: &Arc<FiniteAlgebra>,
    system: &EquationSystem,
    budget: PointBudget,
) -> Result<ClosedCongruence> {
    // Solution sets are always Galois-closed.
    Ok(ClosedCongruence::from_closed(solutions(h, system, budget)?))
}

/// Decides `(t1, t2) ∈ T` by evaluation at every point of `T'`.
pub fn congruence_contains(t: &ClosedCongruence, t1: &Term, t2: &Term) -> Result<bool> {
    let sig = t.signature();
    t1.check(sig, t.rank())?;
    t2.check(sig, t.rank())?;
    let h = t.algebra();
    Ok(t
        .base
        .assignments()
        .all(|p| t1.eval(h, &p) == t2.eval(h, &p)))
}

pub fn coordinate_algebra(t: &ClosedCongruence) -> Arc<CoordinateAlgebra> {
    t.coordinate_algebra()
}

/// The rank-`|X|` relatively free algebra of `Var(H)`, `F(X)/(Δ)''_H`.
pub fn relatively_free(
    h: &Arc<FiniteAlgebra>,
    generators: GeneratorSet,
    budget: PointBudget,
) -> Result<Arc<CoordinateAlgebra>> {
    let empty = EquationSystem::empty(h.signature().clone(), generators);
    Ok(closure(h, &empty, budget)?.coordinate_algebra())
}

fn check_morphism_shape(m: &TermMorphism, t1: &ClosedCongruence, t2: &ClosedCongruence) -> Result<()> {
    t1.signature().ensure_same(m.signature())?;
    t2.signature().ensure_same(m.signature())?;
    if t1.algebra() != t2.algebra() {
        return Err(Error::Precondition(
            "congruences are closed over different algebras".into(),
        ));
    }
    if t1.rank() != m.source_rank() {
        return Err(Error::RankMismatch {
            expected: m.source_rank(),
            found: t1.rank(),
        });
    }
    if t2.rank() != m.target_rank() {
        return Err(Error::RankMismatch {
            expected: m.target_rank(),
            found: t2.rank(),
        });
    }
    Ok(())
}

/// The first point `ψ ∈ T2'` with `ψ∘m ∉ T1'`, if any.
fn morphism_obstruction(m: &TermMorphism, t1: &ClosedCongruence, t2: &ClosedCongruence) -> Option<Vec<Elem>> {
    let h = t1.algebra();
    t2.base.assignments().find_map(|psi| {
        let pulled = m.pull_back(h, &psi);
        (!t1.base.contains_assignment(&pulled)).then_some(pulled)
    })
}

/// Decides `m(T1) ⊆ T2`, i.e. whether `m` is a morphism of `Cl_H`.
///
/// Uses the composed-point criterion: `m(T1) ⊆ T2` iff `ψ∘m ∈ T1'` for every
/// `ψ ∈ T2'`, which is exact because `T1'` is Galois-closed.
pub fn is_cl_morphism(m: &TermMorphism, t1: &ClosedCongruence, t2: &ClosedCongruence) -> Result<bool> {
    check_morphism_shape(m, t1, t2)?;
    Ok(morphism_obstruction(m, t1, t2).is_none())
}

/// The homomorphism `F(X1)/T1 → F(X2)/T2` closing the square with `m`.
pub fn induced_hom(m: &TermMorphism, t1: &ClosedCongruence, t2: &ClosedCongruence) -> Result<QuotientHom> {
    check_morphism_shape(m, t1, t2)?;
    if let Some(pulled) = morphism_obstruction(m, t1, t2) {
        let sig = t1.signature();
        let detail = match graph_verdict(&t1.base, t1.algebra(), &pulled)? {
            FunctionalVerdict::Violation(v) => format!(
                "({}, {}) lies in the source congruence but its image leaves the target",
                v.first_witness.display(sig),
                v.second_witness.display(sig)
            ),
            FunctionalVerdict::Functional(_) => "source point set is not closed".to_string(),
        };
        return Err(Error::Precondition(detail));
    }
    let h = t2.algebra();
    let source = t1.coordinate_algebra();
    let target = t2.coordinate_algebra();
    let target_points: Vec<Vec<Elem>> = t2.base.assignments().collect();
    let image_rows: Vec<Vec<Elem>> = m
        .images()
        .iter()
        .map(|t| target_points.iter().map(|p| t.eval(h, p)).collect())
        .collect();
    let product = target.subalgebra().product().clone();
    let tuples = source.subalgebra().fold(
        |g| image_rows[g].clone(),
        |op, args| {
            let refs: Vec<&[Elem]> = args.iter().map(Vec::as_slice).collect();
            product.apply(op, &refs)
        },
    );
    let map = tuples
        .iter()
        .map(|t| {
            target
                .subalgebra()
                .index_of(t)
                .expect("term values lie in the generated subalgebra")
        })
        .collect();
    Ok(QuotientHom {
        source,
        target,
        map,
    })
}

/// Lifts a homomorphism of coordinate algebras to a term morphism: each
/// generator goes to the witness term of its image.
pub fn lift_hom(h: &QuotientHom) -> TermMorphism {
    let images = h
        .source
        .generator_images()
        .iter()
        .map(|&g| h.target.witness(h.map[g]))
        .collect();
    TermMorphism::new(h.source.signature().clone(), h.target.rank(), images)
        .expect("witness terms are over the target generators")
}

/// Decides equality of closed congruences over possibly different algebras:
/// each side's points must factor through the other side's point set.
pub fn congruence_equal(a: &ClosedCongruence, b: &ClosedCongruence) -> Result<bool> {
    a.base.check_same_space(&b.base)?;
    for psi in b.base.assignments() {
        if !factors_through(&a.base, b.algebra(), &psi)? {
            return Ok(false);
        }
    }
    for phi in a.base.assignments() {
        if !factors_through(&b.base, a.algebra(), &phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All closed sets of a closure operator on `0..n`, in lectic order
/// (Next-Closure).
pub(crate) fn next_closure(n: usize, mut close: impl FnMut(&[usize]) -> Vec<usize>) -> Vec<Vec<usize>> {
    let to_mask = |set: &[usize]| {
        let mut mask = vec![false; n];
        for &i in set {
            mask[i] = true;
        }
        mask
    };
    let mut current = close(&[]);
    let mut out = vec![current.clone()];
    while current.len() < n {
        let mask = to_mask(&current);
        let mut advanced = false;
        for i in (0..n).rev() {
            if mask[i] {
                continue;
            }
            let mut seed: Vec<usize> = current.iter().copied().filter(|&p| p < i).collect();
            seed.push(i);
            let candidate = close(&seed);
            let prefix_unchanged = candidate
                .iter()
                .filter(|&&p| p < i)
                .eq(current.iter().filter(|&&p| p < i));
            if prefix_unchanged {
                current = candidate;
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
        out.push(current.clone());
    }
    out
}

/// `Cl_H(F(X))`: every Galois-closed point set exactly once, in lectic
/// order over the lexicographic point list.
pub fn enumerate_closed(
    h: &Arc<FiniteAlgebra>,
    generators: GeneratorSet,
    budget: PointBudget,
) -> Result<Vec<ClosedCongruence>> {
    let space = FreeSpace::new(std::slice::from_ref(h), generators.rank(), budget)?;
    let total = space.columns(0).len();
    let sets = next_closure(total, |seed| space.close(seed, 0));
    sets.into_iter()
        .map(|points| {
            Ok(ClosedCongruence::from_closed(PointSet::new(
                h.clone(),
                generators,
                points,
                budget,
            )?))
        })
        .collect()
}

/// Which algebra a counterexample congruence is closed in; it fails to be
/// closed in the other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone)]
pub struct GeomCounterexample {
    pub rank: usize,
    pub congruence: ClosedCongruence,
    pub closed_in: Side,
}

/// Geometric equivalence checked rank by rank.
#[derive(Debug, Clone)]
pub struct GeomVerdict {
    pub equivalent_up_to_rank: bool,
    pub checked_rank: usize,
    pub counterexample: Option<GeomCounterexample>,
    /// Rank at which the point budget stopped the sweep, if it did.
    pub budget_exhausted_at: Option<usize>,
}

/// A finite system whose closure in `T`'s algebra is `T`.
///
/// Candidate equations pair each element of the relatively free algebra of
/// `Var(H × context)` with the first element of its `T`-class; an equation
/// is kept only if it removes a point of `H` or of some context algebra
/// that the equations kept so far still admit.
pub fn presentation(
    t: &ClosedCongruence,
    context: &[Arc<FiniteAlgebra>],
    budget: PointBudget,
) -> Result<EquationSystem> {
    let h = t.algebra();
    let mut algebras = vec![h.clone()];
    algebras.extend(context.iter().cloned());
    let space = FreeSpace::new(&algebras, t.rank(), budget)?;
    let start = space.columns(0).start;
    let partition = space.partition(t.base().indices().iter().map(|&p| p + start));
    let sub = space.elements();
    let mut alive: Vec<usize> = (0..space.offsets[algebras.len()]).collect();
    let mut first_of_class = vec![usize::MAX; partition.classes];
    let mut pairs = Vec::new();
    for (e, &label) in partition.labels.iter().enumerate() {
        let rep = first_of_class[label];
        if rep == usize::MAX {
            first_of_class[label] = e;
            continue;
        }
        let (a, b) = (sub.element(rep), sub.element(e));
        let before = alive.len();
        alive.retain(|&c| a[c] == b[c]);
        if alive.len() < before {
            pairs.push((sub.witness(rep), sub.witness(e)));
        }
    }
    EquationSystem::new(h.signature().clone(), t.generators(), pairs)
}

/// Compares `Cl_{H1}(F(X))` and `Cl_{H2}(F(X))` for every rank up to
/// `max_rank`. A true verdict is evidence up to `checked_rank` only.
///
/// Each rank works in the relatively free algebra of `Var(H1 × H2)`, where
/// both algebras' kernels are coordinate partitions: a closed set of one
/// side is closed in the other iff the partition it induces equals the one
/// induced by its solution set on the other side.
pub fn geom_equiv(
    h1: &Arc<FiniteAlgebra>,
    h2: &Arc<FiniteAlgebra>,
    max_rank: usize,
    budget: PointBudget,
) -> Result<GeomVerdict> {
    h1.signature().ensure_same(h2.signature())?;
    if max_rank == 0 {
        return Err(Error::ZeroRank);
    }
    let pair = [h1.clone(), h2.clone()];
    for rank in 1..=max_rank {
        let space = match FreeSpace::new(&pair, rank, budget) {
            Ok(space) => space,
            Err(Error::PointBudget { .. }) if rank > 1 => {
                return Ok(GeomVerdict {
                    equivalent_up_to_rank: true,
                    checked_rank: rank - 1,
                    counterexample: None,
                    budget_exhausted_at: Some(rank),
                });
            }
            Err(e) => return Err(e),
        };
        for (side, here, there) in [(Side::First, 0, 1), (Side::Second, 1, 0)] {
            let here_cols = space.columns(here);
            let there_cols = space.columns(there);
            let sets = next_closure(here_cols.len(), |seed| {
                let global: Vec<usize> = seed.iter().map(|&p| p + here_cols.start).collect();
                space.close(&global, here)
            });
            for set in sets {
                let global: Vec<usize> = set.iter().map(|&p| p + here_cols.start).collect();
                let other: Vec<usize> = space
                    .close(&global, there)
                    .into_iter()
                    .map(|p| p + there_cols.start)
                    .collect();
                let back = space.partition(other);
                if !global.iter().all(|&c| space.respects(&back, c)) {
                    let gens = GeneratorSet::new(rank)?;
                    let congruence =
                        ClosedCongruence::from_closed(PointSet::new(pair[here].clone(), gens, set, budget)?);
                    return Ok(GeomVerdict {
                        equivalent_up_to_rank: false,
                        checked_rank: rank,
                        counterexample: Some(GeomCounterexample {
                            rank,
                            congruence,
                            closed_in: side,
                        }),
                        budget_exhausted_at: None,
                    });
                }
            }
        }
    }
    Ok(GeomVerdict {
        equivalent_up_to_rank: true,
        checked_rank: max_rank,
        counterexample: None,
        budget_exhausted_at: None,
    })
}
