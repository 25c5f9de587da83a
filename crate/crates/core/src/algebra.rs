//! Finite algebras given by full operation tables.
//!
//! Direct products are evaluated lazily; generated subalgebras remember a
//! witness term for every element.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};
use crate::terms::Term;

/// An element of a finite carrier, written as its 0-based index.
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
}

/// An ordered list of operation symbols with arities. The position of a
/// symbol in the list is its operation index everywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Signature {
    name: String,
    ops: Vec<Operation>,
}

impl Signature {
    pub fn new<S: Into<String>>(
        name: impl Into<String>,
        ops: impl IntoIterator<Item = (S, usize)>,
    ) -> Result<Self> {
        let ops: Vec<Operation> = ops
            .into_iter()
            .map(|(name, arity)| Operation {
                name: name.into(),
                arity,
            })
            .collect();
        for (i, op) in ops.iter().enumerate() {
            if op.name.is_empty() {
                return Err(Error::InvalidSignature("empty operation symbol".into()));
            }
            if ops[..i].iter().any(|o| o.name == op.name) {
                return Err(Error::InvalidSignature(format!(
                    "duplicate operation symbol `{}`",
                    op.name
                )));
            }
        }
        Ok(Signature {
            name: name.into(),
            ops,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn arity(&self, op: usize) -> usize {
        self.ops[op].arity
    }

    pub fn symbol(&self, op: usize) -> &str {
        &self.ops[op].name
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.ops.iter().position(|o| o.name == symbol)
    }

    /// Indices of the arity-0 operations, in signature order.
    pub fn constants(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, o)| o.arity == 0)
            .map(|(i, _)| i)
    }

    pub(crate) fn ensure_same(&self, other: &Signature) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SignatureMismatch {
                left: self.name.clone(),
                right: other.name.clone(),
            })
        }
    }
}

/// A finite algebra: a carrier `0..size` and one total table per operation.
///
/// Tables are stored row-major: the entry for arguments `(a1, .., ak)` sits
/// at `a1 * n^(k-1) + .. + ak`. Equality is table equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAlgebra {
    signature: Arc<Signature>,
    size: usize,
    tables: Vec<Box<[Elem]>>,
}

impl FiniteAlgebra {
    pub fn new(signature: Arc<Signature>, size: usize, tables: Vec<Vec<Elem>>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidTable {
                symbol: signature.name().to_string(),
                reason: "carrier must be nonempty".into(),
            });
        }
        if tables.len() != signature.len() {
            return Err(Error::InvalidTable {
                symbol: signature.name().to_string(),
                reason: format!(
                    "expected {} tables, found {}",
                    signature.len(),
                    tables.len()
                ),
            });
        }
        for (op, table) in tables.iter().enumerate() {
            let expected = table_len(size, signature.arity(op)).ok_or_else(|| {
                Error::InvalidTable {
                    symbol: signature.symbol(op).to_string(),
                    reason: "table too large".into(),
                }
            })?;
            if table.len() != expected {
                return Err(Error::InvalidTable {
                    symbol: signature.symbol(op).to_string(),
                    reason: format!("expected {expected} entries, found {}", table.len()),
                });
            }
            if let Some(&bad) = table.iter().find(|&&v| v >= size) {
                return Err(Error::InvalidTable {
                    symbol: signature.symbol(op).to_string(),
                    reason: format!("entry {bad} out of range for size {size}"),
                });
            }
        }
        Ok(FiniteAlgebra {
            signature,
            size,
            tables: tables.into_iter().map(Vec::into_boxed_slice).collect(),
        })
    }

    /// Builds the tables by calling `f(op, args)` for every operation and
    /// every argument tuple in row-major order.
    pub fn from_fn(
        signature: Arc<Signature>,
        size: usize,
        mut f: impl FnMut(usize, &[Elem]) -> Elem,
    ) -> Result<Self> {
        let tables = (0..signature.len())
            .map(|op| {
                let mut table = Vec::new();
                for_each_tuple(size, signature.arity(op), |args| table.push(f(op, args)));
                table
            })
            .collect();
        FiniteAlgebra::new(signature, size, tables)
    }

    /// The direct product, element `(a1, .., ak)` stored at the mixed-radix
    /// index with the first factor most significant.
    pub fn product(factors: &[&FiniteAlgebra]) -> Result<Self> {
        let first = factors.first().ok_or_else(|| {
            Error::Precondition("direct product of zero factors".into())
        })?;
        for f in factors {
            first.signature.ensure_same(&f.signature)?;
        }
        let size = factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.size))
            .ok_or_else(|| Error::Precondition("product carrier too large".into()))?;
        let decode = |mut x: Elem| -> Vec<Elem> {
            let mut out = vec![0; factors.len()];
            for (i, f) in factors.iter().enumerate().rev() {
                out[i] = x % f.size;
                x /= f.size;
            }
            out
        };
        let mut parts = Vec::new();
        FiniteAlgebra::from_fn(first.signature.clone(), size, |op, args| {
            parts.clear();
            parts.extend(args.iter().map(|&a| decode(a)));
            let mut index = 0;
            let mut comp = Vec::with_capacity(args.len());
            for (i, f) in factors.iter().enumerate() {
                comp.clear();
                comp.extend(parts.iter().map(|p| p[i]));
                index = index * f.size + f.apply(op, &comp);
            }
            index
        })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self, op: usize) -> &[Elem] {
        &self.tables[op]
    }

    /// Table lookup without validation beyond debug assertions.
    #[inline]
    pub fn apply(&self, op: usize, args: &[Elem]) -> Elem {
        debug_assert_eq!(args.len(), self.signature.arity(op));
        let index = args.iter().fold(0, |acc, &a| {
            debug_assert!(a < self.size);
            acc * self.size + a
        });
        self.tables[op][index]
    }

    /// Validated table lookup by symbol name.
    pub fn apply_op(&self, symbol: &str, args: &[Elem]) -> Result<Elem> {
        let op = self
            .signature
            .index_of(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))?;
        let arity = self.signature.arity(op);
        if args.len() != arity {
            return Err(Error::ArityMismatch {
                symbol: symbol.to_string(),
                expected: arity,
                found: args.len(),
            });
        }
        self.check_elements(args)?;
        Ok(self.apply(op, args))
    }

    pub(crate) fn check_elements(&self, elems: &[Elem]) -> Result<()> {
        match elems.iter().find(|&&a| a >= self.size) {
            Some(&index) => Err(Error::IndexOutOfRange {
                index,
                size: self.size,
            }),
            None => Ok(()),
        }
    }
}

fn table_len(size: usize, arity: usize) -> Option<usize> {
    size.checked_pow(u32::try_from(arity).ok()?)
}

/// Calls `f` on every tuple in `0..n` of length `k`, lexicographically.
pub(crate) fn for_each_tuple(n: usize, k: usize, mut f: impl FnMut(&[Elem])) {
    let mut args = vec![0; k];
    if k == 0 {
        f(&args);
        return;
    }
    if n == 0 {
        return;
    }
    loop {
        f(&args);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            args[pos] += 1;
            if args[pos] < n {
                break;
            }
            args[pos] = 0;
        }
    }
}

/// Returns true iff `f` commutes with every operation, checked on every
/// argument tuple of `a`.
pub fn is_homomorphism(a: &FiniteAlgebra, b: &FiniteAlgebra, f: &[Elem]) -> Result<bool> {
    a.signature.ensure_same(&b.signature)?;
    if f.len() != a.size {
        return Err(Error::Precondition(format!(
            "map has {} entries, domain has {} elements",
            f.len(),
            a.size
        )));
    }
    b.check_elements(f)?;
    let mut image = Vec::new();
    for op in 0..a.signature.len() {
        let mut ok = true;
        for_each_tuple(a.size, a.signature.arity(op), |args| {
            if !ok {
                return;
            }
            image.clear();
            image.extend(args.iter().map(|&x| f[x]));
            ok = f[a.apply(op, args)] == b.apply(op, &image);
        });
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A direct product `A1 × .. × Ak` of algebras over one signature. Elements
/// are tuples evaluated componentwise; the product table is never built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    signature: Arc<Signature>,
    factors: Vec<Arc<FiniteAlgebra>>,
}

impl Product {
    pub fn new(signature: Arc<Signature>, factors: Vec<Arc<FiniteAlgebra>>) -> Result<Self> {
        for f in &factors {
            signature.ensure_same(f.signature())?;
        }
        Ok(Product { signature, factors })
    }

    /// The power `H^k`.
    pub fn power(h: &Arc<FiniteAlgebra>, k: usize) -> Self {
        Product {
            signature: h.signature().clone(),
            factors: vec![h.clone(); k],
        }
    }

    pub fn concat(&self, other: &Product) -> Result<Product> {
        self.signature.ensure_same(&other.signature)?;
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Product {
            signature: self.signature.clone(),
            factors,
        })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn factors(&self) -> &[Arc<FiniteAlgebra>] {
        &self.factors
    }

    pub fn width(&self) -> usize {
        self.factors.len()
    }

    pub fn check_tuple(&self, tuple: &[Elem]) -> Result<()> {
        if tuple.len() != self.factors.len() {
            return Err(Error::TupleShape {
                expected: self.factors.len(),
                found: tuple.len(),
            });
        }
        for (f, &a) in self.factors.iter().zip(tuple) {
            f.check_elements(&[a])?;
        }
        Ok(())
    }

    /// Componentwise application into `out`.
    #[inline]
    pub(crate) fn apply_into(&self, op: usize, args: &[&[Elem]], out: &mut Vec<Elem>) {
        out.clear();
        for (c, f) in self.factors.iter().enumerate() {
            let n = f.size();
            let index = args.iter().fold(0, |acc, t| acc * n + t[c]);
            out.push(f.table(op)[index]);
        }
    }

    pub fn apply(&self, op: usize, args: &[&[Elem]]) -> Vec<Elem> {
        let mut out = Vec::with_capacity(self.width());
        self.apply_into(op, args, &mut out);
        out
    }
}

/// How an element of a generated subalgebra was first reached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    /// The `i`-th generator (0-based).
    Generator(usize),
    /// An operation applied to earlier elements.
    Apply { op: usize, args: Box<[usize]> },
}

/// The subalgebra of a product generated by a list of tuples, with a
/// witness derivation per element.
///
/// Elements are in breadth-first discovery order: generators, then
/// constants, then one round per term depth, operations in signature order
/// and argument tuples in lexicographic order within a round. The
/// derivation of each element is therefore the shallowest, and among those
/// the first in that order.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    product: Product,
    elements: IndexSet<Box<[Elem]>>,
    derivations: Vec<Derivation>,
    generator_elements: Vec<usize>,
}

impl Subalgebra {
    pub fn product(&self) -> &Product {
        &self.product
    }

    pub fn signature(&self) -> &Arc<Signature> {
        self.product.signature()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Always false: generation never returns an empty carrier.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, i: usize) -> &[Elem] {
        &self.elements[i]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[Elem]> + '_ {
        self.elements.iter().map(|t| &**t)
    }

    pub fn index_of(&self, tuple: &[Elem]) -> Option<usize> {
        self.elements.get_index_of(tuple)
    }

    pub fn contains(&self, tuple: &[Elem]) -> bool {
        self.elements.contains(tuple)
    }

    pub fn derivation(&self, i: usize) -> &Derivation {
        &self.derivations[i]
    }

    /// Element index of each generator, in generator order.
    pub fn generator_elements(&self) -> &[usize] {
        &self.generator_elements
    }

    /// The witness term of element `i` over generator variables.
    pub fn witness(&self, i: usize) -> Term {
        match &self.derivations[i] {
            Derivation::Generator(g) => Term::Var(*g),
            Derivation::Apply { op, args } => {
                Term::App(*op, args.iter().map(|&a| self.witness(a)).collect())
            }
        }
    }

    /// Folds a value over the derivation DAG: `generator(g)` for generator
    /// leaves, `apply(op, child values)` otherwise. Equivalent to evaluating
    /// every witness term, with sharing.
    pub fn fold<T: Clone>(
        &self,
        mut generator: impl FnMut(usize) -> T,
        mut apply: impl FnMut(usize, &[T]) -> T,
    ) -> Vec<T> {
        let mut values: Vec<T> = Vec::with_capacity(self.len());
        let mut scratch = Vec::new();
        for d in &self.derivations {
            let v = match d {
                Derivation::Generator(g) => generator(*g),
                Derivation::Apply { op, args } => {
                    scratch.clear();
                    scratch.extend(args.iter().map(|&a| values[a].clone()));
                    apply(*op, &scratch)
                }
            };
            values.push(v);
        }
        values
    }

    /// Exports the subalgebra as a standalone algebra whose element `i` is
    /// the `i`-th generated tuple.
    pub fn to_algebra(&self) -> FiniteAlgebra {
        let sig = self.signature().clone();
        let mut out = Vec::with_capacity(self.product.width());
        let mut refs: Vec<&[Elem]> = Vec::new();
        FiniteAlgebra::from_fn(sig, self.len(), |op, args| {
            refs.clear();
            refs.extend(args.iter().map(|&a| self.element(a)));
            self.product.apply_into(op, &refs, &mut out);
            self.index_of(&out)
                .expect("generated subalgebra is closed under operations")
        })
        .expect("exported tables are complete and in range")
    }
}

/// Breadth-first closure engine shared by [`generate_subalgebra`] and
/// [`graph_functional`]. `on_new` sees each element as it is discovered and
/// may stop the generation early.
fn generate_with<B>(
    product: &Product,
    generators: &[Vec<Elem>],
    mut on_new: impl FnMut(&IndexSet<Box<[Elem]>>, usize) -> ControlFlow<B>,
) -> Result<(Subalgebra, Option<B>)> {
    for g in generators {
        product.check_tuple(g)?;
    }
    let sig = product.signature().clone();
    if generators.is_empty() && sig.constants().next().is_none() {
        return Err(Error::EmptyGeneration);
    }

    let mut sub = Subalgebra {
        product: product.clone(),
        elements: IndexSet::new(),
        derivations: Vec::new(),
        generator_elements: Vec::with_capacity(generators.len()),
    };

    macro_rules! insert {
        ($tuple:expr, $derivation:expr) => {{
            let (index, fresh) = sub.elements.insert_full($tuple);
            if fresh {
                sub.derivations.push($derivation);
                if let ControlFlow::Break(b) = on_new(&sub.elements, index) {
                    return Ok((sub, Some(b)));
                }
            }
            index
        }};
    }

    for (i, g) in generators.iter().enumerate() {
        let index = insert!(g.clone().into_boxed_slice(), Derivation::Generator(i));
        sub.generator_elements.push(index);
    }
    for op in sig.constants() {
        let tuple = product.apply(op, &[]);
        insert!(
            tuple.into_boxed_slice(),
            Derivation::Apply {
                op,
                args: Box::new([])
            }
        );
    }

    let mut round_start = 0;
    let mut scratch = Vec::with_capacity(product.width());
    loop {
        let round_end = sub.elements.len();
        if round_start == round_end {
            break;
        }
        for op in 0..sig.len() {
            let arity = sig.arity(op);
            if arity == 0 {
                continue;
            }
            let mut args = vec![0usize; arity];
            args[arity - 1] = round_start;
            loop {
                scratch.clear();
                for (c, f) in product.factors.iter().enumerate() {
                    let n = f.size();
                    let index = args.iter().fold(0, |acc, &a| acc * n + sub.elements[a][c]);
                    scratch.push(f.table(op)[index]);
                }
                if !sub.elements.contains(scratch.as_slice()) {
                    // Visible to later lookups in this round, used as an
                    // argument only from the next round on.
                    insert!(
                        scratch.clone().into_boxed_slice(),
                        Derivation::Apply {
                            op,
                            args: args.clone().into_boxed_slice()
                        }
                    );
                }
                if !advance_round_tuple(&mut args, round_start, round_end) {
                    break;
                }
            }
        }
        round_start = round_end;
    }
    Ok((sub, None))
}

/// Steps to the lexicographically next tuple over `0..hi` that has at least
/// one entry `>= lo`. Requires `lo < hi`.
pub(crate) fn advance_round_tuple(args: &mut [usize], lo: usize, hi: usize) -> bool {
    let mut pos = args.len();
    loop {
        if pos == 0 {
            return false;
        }
        pos -= 1;
        args[pos] += 1;
        if args[pos] < hi {
            break;
        }
        args[pos] = 0;
    }
    if args.iter().all(|&a| a < lo) {
        *args.last_mut().expect("arity is positive") = lo;
    }
    true
}

/// Generates the least subset of `product` containing `generators` and
/// closed under all componentwise operations.
///
/// Fails with [`Error::EmptyGeneration`] when there are no generators and
/// the signature has no constants.
pub fn generate_subalgebra(product: &Product, generators: &[Vec<Elem>]) -> Result<Subalgebra> {
    generate_with::<()>(product, generators, |_, _| ControlFlow::Continue(()))
        .map(|(sub, _)| sub)
}

/// The homomorphism induced on the generated source-side subalgebra.
#[derive(Debug, Clone)]
pub struct GraphMapping {
    graph: Subalgebra,
    split: usize,
    map: IndexMap<Box<[Elem]>, Box<[Elem]>>,
}

impl GraphMapping {
    /// Source tuples in discovery order, each with its image.
    pub fn iter(&self) -> impl Iterator<Item = (&[Elem], &[Elem])> + '_ {
        self.map.iter().map(|(a, b)| (&**a, &**b))
    }

    pub fn get(&self, source: &[Elem]) -> Option<&[Elem]> {
        self.map.get(source).map(|b| &**b)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// The generated graph, a subalgebra of the concatenated product.
    pub fn graph(&self) -> &Subalgebra {
        &self.graph
    }

    /// Number of source-side components in each graph tuple.
    pub fn source_width(&self) -> usize {
        self.split
    }
}

/// Two generated pairs that agree on the source side and differ on the
/// target side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphViolation {
    pub source: Vec<Elem>,
    pub first: Vec<Elem>,
    pub second: Vec<Elem>,
    pub first_witness: Term,
    pub second_witness: Term,
}

#[derive(Debug, Clone)]
pub enum FunctionalVerdict {
    Functional(GraphMapping),
    Violation(GraphViolation),
}

impl FunctionalVerdict {
    pub fn is_functional(&self) -> bool {
        matches!(self, FunctionalVerdict::Functional(_))
    }

    pub fn mapping(&self) -> Option<&GraphMapping> {
        match self {
            FunctionalVerdict::Functional(m) => Some(m),
            FunctionalVerdict::Violation(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&GraphViolation> {
        match self {
            FunctionalVerdict::Violation(v) => Some(v),
            FunctionalVerdict::Functional(_) => None,
        }
    }
}

/// Decides whether the seed assignment `source ↦ target` extends to a
/// homomorphism on the subalgebra generated by the source seeds.
///
/// Generates the subalgebra of `source × target` from the seed pairs and
/// stops at the first two elements with equal source parts.
pub fn graph_functional(
    source: &Product,
    target: &Product,
    seeds: &[(Vec<Elem>, Vec<Elem>)],
) -> Result<FunctionalVerdict> {
    let joint = source.concat(target)?;
    let split = source.width();
    let mut generators = Vec::with_capacity(seeds.len());
    for (a, b) in seeds {
        source.check_tuple(a)?;
        target.check_tuple(b)?;
        let mut t = a.clone();
        t.extend_from_slice(b);
        generators.push(t);
    }
    let mut map: IndexMap<Box<[Elem]>, usize> = IndexMap::new();
    let (graph, clash) = generate_with(&joint, &generators, |elements, index| {
        let tuple = &elements[index];
        let (a, _) = tuple.split_at(split);
        match map.get(a) {
            Some(&other) => ControlFlow::Break((other, index)),
            None => {
                map.insert(a.into(), index);
                ControlFlow::Continue(())
            }
        }
    })?;
    if let Some((first, second)) = clash {
        let (a, b1) = graph.element(first).split_at(split);
        let b2 = &graph.element(second)[split..];
        return Ok(FunctionalVerdict::Violation(GraphViolation {
            source: a.to_vec(),
            first: b1.to_vec(),
            second: b2.to_vec(),
            first_witness: graph.witness(first),
            second_witness: graph.witness(second),
        }));
    }
    let map = map
        .into_iter()
        .map(|(a, i)| (a, graph.element(i)[split..].into()))
        .collect();
    Ok(FunctionalVerdict::Functional(GraphMapping { graph, split, map }))
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {{ ", self.name)?;
        for (i, op) in self.ops.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}/{}", op.name, op.arity)?;
        }
        write!(f, " }}")
    }
}
