//! A∞-categories with finitely many objects and finite-rank homs.
//!
//! A tuple of composable morphisms is written right to left: `args[0]` is the
//! last morphism `x_k` and `args[k-1]` is the first one `x_1`, so consecutive
//! entries satisfy `args[i].src == args[i + 1].tgt`.
//!
//! Two equivalent sign conventions are in play. The *standard* one uses
//! operations `m^k` of degree `2 - k` and relations
//! `Σ (-1)^{α + kγ} m(1^α ⊗ m^k ⊗ 1^γ) = 0` with Koszul signs for passing `m^k`
//! across the `α` left inputs. The *shifted* one uses operations `b^k` of degree
//! one on reduced degrees `‖x‖ = |x| - 1`, related by
//! `b^k(x_k, …, x_1) = (-1)^{σ(x)} m^k(x_k, …, x_1)` with
//! `σ(x) = Σ_i (i - 1)|x_i|`; there the relations carry only Koszul signs.
//! Constructions that insert elements between arguments (twisted complexes,
//! bar words) are simplest in shifted form; the two are checked to agree.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::coefficients::{vec_add, vec_scale, vec_sub, Accum, Ring, Scalar, SparseMatrix, SparseVec};
use crate::complexes::{find_homotopy, ChainMap, CochainComplex, ComplexError, Homotopy};
use crate::parallel;

#[derive(Debug, Error)]
pub enum AInftyError {
    #[error("arguments are not composable at position {0}")]
    NotComposable(usize),
    #[error("hom({0}, {1}) has torsion generators; only free homs have cohomology here")]
    NotFree(String, String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid category: {0}")]
    Invalid(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A basis morphism: element `idx` of the chosen basis of `hom(src, tgt)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen {
    pub src: usize,
    pub tgt: usize,
    pub idx: usize,
}

impl Gen {
    pub fn new(src: usize, tgt: usize, idx: usize) -> Self {
        Gen { src, tgt, idx }
    }
}

/// A linear combination of basis morphisms in one hom module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elem {
    pub src: usize,
    pub tgt: usize,
    pub v: SparseVec,
}

impl Elem {
    pub fn new(src: usize, tgt: usize, v: SparseVec) -> Self {
        Elem { src, tgt, v }
    }

    pub fn basis(g: Gen) -> Self {
        Elem { src: g.src, tgt: g.tgt, v: vec![(g.idx, Scalar::ONE)] }
    }

    pub fn zero(src: usize, tgt: usize) -> Self {
        Elem { src, tgt, v: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_empty()
    }

    pub fn gens(&self) -> impl Iterator<Item = (Gen, Scalar)> + '_ {
        self.v.iter().map(move |&(i, c)| (Gen::new(self.src, self.tgt, i), c))
    }

    pub fn add(&self, ring: Ring, o: &Elem) -> Elem {
        Elem { v: vec_add(ring, &self.v, &o.v), ..self.clone() }
    }

    pub fn sub(&self, ring: Ring, o: &Elem) -> Elem {
        Elem { v: vec_sub(ring, &self.v, &o.v), ..self.clone() }
    }

    pub fn scale(&self, ring: Ring, c: Scalar) -> Elem {
        Elem { v: vec_scale(ring, &self.v, c), ..self.clone() }
    }
}

/// Which convention an implementation's `op` is written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Standard,
    Shifted,
}

/// A finite A∞-category. Implementors provide `op` in either convention;
/// `mu` and `bmu` convert as needed.
pub trait AInfty: Sync {
    fn ring(&self) -> Ring;
    fn num_objects(&self) -> usize;
    fn object_name(&self, x: usize) -> String;
    fn hom_dim(&self, x: usize, y: usize) -> usize;
    fn degree(&self, g: Gen) -> i32;
    fn label(&self, g: Gen) -> String;
    /// Operations of larger arity vanish.
    fn max_arity(&self) -> usize;
    fn convention(&self) -> Convention;
    /// The operation on a composable basis tuple, with result in
    /// `hom(args[last].src, args[0].tgt)`.
    fn op(&self, args: &[Gen]) -> SparseVec;

    /// Additive order of a generator, if it is torsion.
    fn torsion(&self, _g: Gen) -> Option<u32> {
        None
    }

    /// `m^k` in the standard convention.
    fn mu(&self, args: &[Gen]) -> SparseVec {
        if args.is_empty() || args.len() > self.max_arity() {
            return Vec::new();
        }
        let v = self.op(args);
        match self.convention() {
            Convention::Standard => v,
            Convention::Shifted => signed(self.ring(), v, sigma(self, args)),
        }
    }

    /// `b^k` in the shifted convention.
    fn bmu(&self, args: &[Gen]) -> SparseVec {
        if args.is_empty() || args.len() > self.max_arity() {
            return Vec::new();
        }
        let v = self.op(args);
        match self.convention() {
            Convention::Shifted => v,
            Convention::Standard => signed(self.ring(), v, sigma(self, args)),
        }
    }
}

macro_rules! forward_ainfty {
    ($t:ty) => {
        impl<A: AInfty + Send + ?Sized> AInfty for $t {
            fn ring(&self) -> Ring {
                (**self).ring()
            }
            fn num_objects(&self) -> usize {
                (**self).num_objects()
            }
            fn object_name(&self, x: usize) -> String {
                (**self).object_name(x)
            }
            fn hom_dim(&self, x: usize, y: usize) -> usize {
                (**self).hom_dim(x, y)
            }
            fn degree(&self, g: Gen) -> i32 {
                (**self).degree(g)
            }
            fn label(&self, g: Gen) -> String {
                (**self).label(g)
            }
            fn max_arity(&self) -> usize {
                (**self).max_arity()
            }
            fn convention(&self) -> Convention {
                (**self).convention()
            }
            fn op(&self, args: &[Gen]) -> SparseVec {
                (**self).op(args)
            }
            fn torsion(&self, g: Gen) -> Option<u32> {
                (**self).torsion(g)
            }
            fn mu(&self, args: &[Gen]) -> SparseVec {
                (**self).mu(args)
            }
            fn bmu(&self, args: &[Gen]) -> SparseVec {
                (**self).bmu(args)
            }
        }
    };
}

forward_ainfty!(&A);
forward_ainfty!(Arc<A>);
forward_ainfty!(Box<A>);

fn signed(ring: Ring, v: SparseVec, odd: bool) -> SparseVec {
    if odd {
        vec_scale(ring, &v, ring.int(-1))
    } else {
        v
    }
}

/// Parity of `σ(x) = Σ_i (i - 1)|x_i|`, with `x_1` the rightmost argument.
pub fn sigma<A: AInfty + ?Sized>(a: &A, args: &[Gen]) -> bool {
    let k = args.len();
    args.iter().enumerate().map(|(j, &g)| (k - 1 - j) as i64 * a.degree(g) as i64).sum::<i64>().rem_euclid(2) == 1
}

/// Parity of `σ` for a list of degrees (rightmost last).
pub fn sigma_degrees(degs: &[i32]) -> bool {
    let k = degs.len();
    degs.iter().enumerate().map(|(j, &d)| (k - 1 - j) as i64 * d as i64).sum::<i64>().rem_euclid(2) == 1
}

pub fn check_composable<A: AInfty + ?Sized>(_a: &A, args: &[Gen]) -> Result<(), AInftyError> {
    for i in 0..args.len().saturating_sub(1) {
        if args[i].src != args[i + 1].tgt {
            return Err(AInftyError::NotComposable(i));
        }
    }
    Ok(())
}

/// Multilinear extension of `mu` (or `bmu` with `shifted`) to elements.
pub fn op_elems<A: AInfty + ?Sized>(a: &A, args: &[&Elem], shifted: bool) -> Elem {
    let ring = a.ring();
    let src = args.last().map_or(0, |e| e.src);
    let tgt = args.first().map_or(0, |e| e.tgt);
    let mut acc = Accum::new(ring);
    if args.iter().any(|e| e.is_zero()) {
        return Elem::zero(src, tgt);
    }
    let mut idx = vec![0usize; args.len()];
    let mut gens = vec![Gen::new(0, 0, 0); args.len()];
    loop {
        let mut c = Scalar::ONE;
        for (j, e) in args.iter().enumerate() {
            let (i, x) = e.v[idx[j]];
            gens[j] = Gen::new(e.src, e.tgt, i);
            c = ring.mul(c, x);
        }
        let out = if shifted { a.bmu(&gens) } else { a.mu(&gens) };
        acc.add_vec(&out, c);
        let mut j = args.len();
        loop {
            if j == 0 {
                return Elem::new(src, tgt, acc.finish());
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < args[j].v.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Degree of a homogeneous element; `None` for zero or mixed degree.
pub fn elem_degree<A: AInfty + ?Sized>(a: &A, e: &Elem) -> Option<i32> {
    let mut degs = e.gens().map(|(g, _)| a.degree(g));
    let d = degs.next()?;
    degs.all(|x| x == d).then_some(d)
}

/// Composable basis tuples of length `l` (right-to-left), in lexicographic
/// order of (first source, generators from the right).
pub fn composable_tuples<A: AInfty + ?Sized>(a: &A, l: usize) -> Vec<Vec<Gen>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for x in 0..a.num_objects() {
        extend_tuples(a, l, x, &mut cur, &mut out);
    }
    for t in &mut out {
        t.reverse();
    }
    out
}

fn extend_tuples<A: AInfty + ?Sized>(a: &A, l: usize, from: usize, cur: &mut Vec<Gen>, out: &mut Vec<Vec<Gen>>) {
    if cur.len() == l {
        out.push(cur.clone());
        return;
    }
    for y in 0..a.num_objects() {
        for i in 0..a.hom_dim(from, y) {
            cur.push(Gen::new(from, y, i));
            extend_tuples(a, l, y, cur, out);
            cur.pop();
        }
    }
}

/// Number of composable basis tuples of length `l`, without listing them.
pub fn count_tuples<A: AInfty + ?Sized>(a: &A, l: usize) -> u128 {
    let n = a.num_objects();
    let mut ways = vec![1u128; n];
    for _ in 0..l {
        let mut next = vec![0u128; n];
        for x in 0..n {
            for (y, nx) in next.iter_mut().enumerate() {
                *nx += ways[x] * a.hom_dim(x, y) as u128;
            }
        }
        ways = next;
    }
    ways.iter().sum()
}

/// A tensor of composable basis tuples with coefficients.
pub type Tensor = Vec<(Vec<Gen>, Scalar)>;

/// `m^k_l` applied to a basis tuple of length `l`: the sum over placements of
/// `m^k` with sign `(-1)^{α + kγ}` and the Koszul sign for the `α` inputs to
/// the left.
pub fn m_partial<A: AInfty + ?Sized>(a: &A, k: usize, args: &[Gen]) -> Result<Tensor, AInftyError> {
    check_composable(a, args)?;
    let ring = a.ring();
    let l = args.len();
    if k == 0 || k > l {
        return Err(AInftyError::Invalid(format!("m^{k}_{l} needs 1 ≤ k ≤ l")));
    }
    let mut out = Tensor::new();
    for alpha in 0..=l - k {
        let gamma = l - k - alpha;
        let left: i64 = args[..alpha].iter().map(|&g| a.degree(g) as i64).sum();
        let odd = ((alpha + k * gamma) % 2 == 1) != ((k as i64 * left).rem_euclid(2) == 1);
        let inner = a.mu(&args[alpha..alpha + k]);
        let (s, t) = (args[alpha + k - 1].src, args[alpha].tgt);
        for (i, c) in inner {
            let mut tup = args[..alpha].to_vec();
            tup.push(Gen::new(s, t, i));
            tup.extend_from_slice(&args[alpha + k..]);
            out.push((tup, if odd { ring.neg(c) } else { c }));
        }
    }
    Ok(out)
}

/// Applies `m^n` to a tensor of `n`-tuples.
pub fn mu_tensor<A: AInfty + ?Sized>(a: &A, t: &Tensor) -> SparseVec {
    let mut acc = Accum::new(a.ring());
    for (tup, c) in t {
        acc.add_vec(&a.mu(tup), *c);
    }
    acc.finish()
}

/// `Σ_k m^{l-k+1} m^k_l` on one tuple, in the standard convention.
pub fn relation_residual<A: AInfty + ?Sized>(a: &A, args: &[Gen]) -> SparseVec {
    let mut acc = Accum::new(a.ring());
    for k in 1..=args.len() {
        let t = m_partial(a, k, args).expect("composable tuple");
        acc.add_vec(&mu_tensor(a, &t), Scalar::ONE);
    }
    acc.finish()
}

/// `Σ b(1^α ⊗ b ⊗ 1^γ)` on one tuple, in the shifted convention.
pub fn relation_residual_shifted<A: AInfty + ?Sized>(a: &A, args: &[Gen]) -> SparseVec {
    let ring = a.ring();
    let l = args.len();
    let mut acc = Accum::new(ring);
    for alpha in 0..l {
        let left: i64 = args[..alpha].iter().map(|&g| a.degree(g) as i64 - 1).sum();
        let sign = ring.sign(left.rem_euclid(2) == 1);
        for beta in 1..=l - alpha {
            let inner = a.bmu(&args[alpha..alpha + beta]);
            let (s, t) = (args[alpha + beta - 1].src, args[alpha].tgt);
            for (i, c) in inner {
                let mut tup = args[..alpha].to_vec();
                tup.push(Gen::new(s, t, i));
                tup.extend_from_slice(&args[alpha + beta..]);
                acc.add_vec(&a.bmu(&tup), ring.mul(sign, c));
            }
        }
    }
    acc.finish()
}

/// Outcome of checking the A∞ relations for one length.
#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub length: usize,
    pub tuples_checked: usize,
    pub tuples_total: u128,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub lengths: Vec<RelationCheck>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.lengths.iter().all(|c| c.failure.is_none())
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.lengths.iter().find_map(|c| c.failure.as_deref())
    }
}

/// Renders a tuple as `(x_k, …, x_1)` with labels.
pub fn show_tuple<A: AInfty + ?Sized>(a: &A, args: &[Gen]) -> String {
    let parts: Vec<String> = args.iter().map(|&g| a.label(g)).collect();
    format!("({})", parts.join(", "))
}

pub fn show_vec<A: AInfty + ?Sized>(a: &A, src: usize, tgt: usize, v: &[(usize, Scalar)]) -> String {
    if v.is_empty() {
        return "0".into();
    }
    let parts: Vec<String> = v.iter().map(|&(i, c)| format!("{c}*{}", a.label(Gen::new(src, tgt, i)))).collect();
    parts.join(" + ")
}

/// Checks the relations for every length `1..=l_max`. With `sample`, at most
/// that many tuples per length are checked, chosen by a fixed-seed shuffle.
pub fn check_relations<A: AInfty + ?Sized>(a: &A, l_max: usize, sample: Option<usize>) -> RelationReport {
    let mut lengths = Vec::new();
    for l in 1..=l_max {
        let total = count_tuples(a, l);
        let mut tuples = match sample {
            Some(s) if total > s as u128 && total > 200_000 => sample_tuples(a, l, s, l as u64),
            _ => composable_tuples(a, l),
        };
        if let Some(s) = sample {
            if tuples.len() > s {
                let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
                tuples.shuffle(&mut rng);
                tuples.truncate(s);
                tuples.sort();
            }
        }
        let res = parallel::map(&tuples, |t| relation_residual(a, t));
        let failure = tuples.iter().zip(&res).find(|(_, r)| !r.is_empty()).map(|(t, r)| {
            let (s, tg) = (t.last().unwrap().src, t[0].tgt);
            format!("l = {l}: residual at {} is {}", show_tuple(a, t), show_vec(a, s, tg, r))
        });
        lengths.push(RelationCheck { length: l, tuples_checked: tuples.len(), tuples_total: total, failure });
    }
    RelationReport { lengths }
}

/// Random composable tuples (with repetition), for spaces too large to list.
fn sample_tuples<A: AInfty + ?Sized>(a: &A, l: usize, n: usize, seed: u64) -> Vec<Vec<Gen>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objs = a.num_objects();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < 50 * n {
        attempts += 1;
        let mut x = rng.random_range(0..objs);
        let mut t = Vec::new();
        for _ in 0..l {
            let choices: Vec<usize> = (0..objs).filter(|&y| a.hom_dim(x, y) > 0).collect();
            let Some(&y) = choices.choose(&mut rng) else { break };
            t.push(Gen::new(x, y, rng.random_range(0..a.hom_dim(x, y))));
            x = y;
        }
        if t.len() == l {
            t.reverse();
            out.push(t);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// A hom module as a cochain complex under `m^1`, with the basis regrouped by
/// degree.
#[derive(Clone, Debug)]
pub struct HomComplex {
    pub src: usize,
    pub tgt: usize,
    pub complex: Arc<CochainComplex>,
    /// Basis index → (degree, position within that degree).
    pub pos: Vec<(i32, usize)>,
    /// Degree → basis indices.
    pub by_degree: BTreeMap<i32, Vec<usize>>,
}

impl HomComplex {
    /// Coordinates of an element in the complex of a given degree.
    pub fn coords(&self, deg: i32, v: &[(usize, Scalar)]) -> SparseVec {
        let mut out: SparseVec = v.iter().filter(|(i, _)| self.pos[*i].0 == deg).map(|&(i, c)| (self.pos[i].1, c)).collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    /// Basis index of position `p` in degree `deg`.
    pub fn index(&self, deg: i32, p: usize) -> usize {
        self.by_degree[&deg][p]
    }

    pub fn dim(&self) -> usize {
        self.pos.len()
    }
}

pub fn hom_complex<A: AInfty + ?Sized>(a: &A, x: usize, y: usize) -> Result<HomComplex, AInftyError> {
    let n = a.hom_dim(x, y);
    if (0..n).any(|i| a.torsion(Gen::new(x, y, i)).is_some()) {
        return Err(AInftyError::NotFree(a.object_name(x), a.object_name(y)));
    }
    let degrees: Vec<i32> = (0..n).map(|i| a.degree(Gen::new(x, y, i))).collect();
    let images: Vec<SparseVec> = parallel::map_range(n, |i| a.mu(&[Gen::new(x, y, i)]));
    let labels: Vec<String> = (0..n).map(|i| a.label(Gen::new(x, y, i))).collect();
    complex_from_images(a.ring(), x, y, &degrees, &images, Some(&labels))
}

/// Assembles a complex from a graded basis and the images of the differential
/// on basis elements (in basis indices).
pub fn complex_from_images(ring: Ring, x: usize, y: usize, degrees: &[i32], images: &[SparseVec], labels: Option<&[String]>) -> Result<HomComplex, AInftyError> {
    let n = degrees.len();
    let mut by_degree: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for (i, &d) in degrees.iter().enumerate() {
        by_degree.entry(d).or_default().push(i);
    }
    let mut pos = vec![(0, 0); n];
    for (&d, idx) in &by_degree {
        for (p, &i) in idx.iter().enumerate() {
            pos[i] = (d, p);
        }
    }
    let mut pieces = BTreeMap::new();
    let mut lab = BTreeMap::new();
    if let (Some(&lo), Some(&hi)) = (by_degree.keys().next(), by_degree.keys().next_back()) {
        for d in lo..=hi {
            let idx = by_degree.get(&d).cloned().unwrap_or_default();
            let next = by_degree.get(&(d + 1)).map_or(0, Vec::len);
            let cols = idx
                .iter()
                .map(|&i| {
                    let mut c: SparseVec = images[i].iter().map(|&(j, s)| (pos[j].1, s)).collect();
                    c.sort_unstable_by_key(|e| e.0);
                    c
                })
                .collect();
            pieces.insert(d, (idx.len(), SparseMatrix::from_columns(next, cols)));
            if let Some(l) = labels {
                lab.insert(d, idx.iter().map(|&i| l[i].clone()).collect::<Vec<_>>());
            }
        }
    }
    let c = CochainComplex::from_degrees(ring, &pieces)?;
    let c = if lab.is_empty() { c } else { c.with_labels(lab.into_values().collect()) };
    Ok(HomComplex { src: x, tgt: y, complex: Arc::new(c), pos, by_degree })
}

/// The chain map `hom(s, t) → hom(s', t')` induced by a linear function on
/// basis elements of a fixed degree shift.
pub fn induced_map(from: &HomComplex, to: &HomComplex, degree: i32, f: impl Fn(usize) -> SparseVec) -> ChainMap {
    ChainMap::from_fn(from.complex.clone(), to.complex.clone(), degree, |d, p| {
        let v = f(from.index(d, p));
        to.coords(d + degree, &v)
    })
}

/// `m^2(e, -)` on `hom(w, x)`, for `e ∈ hom(x, y)`.
pub fn left_mult<A: AInfty + ?Sized>(a: &A, e: &Elem, w: usize) -> Result<ChainMap, AInftyError> {
    let from = hom_complex(a, w, e.src)?;
    let to = hom_complex(a, w, e.tgt)?;
    Ok(induced_map(&from, &to, 0, |i| op_elems(a, &[e, &Elem::basis(Gen::new(w, e.src, i))], false).v))
}

/// `m^2(-, e)` on `hom(y, w)`, for `e ∈ hom(x, y)`.
pub fn right_mult<A: AInfty + ?Sized>(a: &A, e: &Elem, w: usize) -> Result<ChainMap, AInftyError> {
    let from = hom_complex(a, e.tgt, w)?;
    let to = hom_complex(a, e.src, w)?;
    Ok(induced_map(&from, &to, 0, |i| op_elems(a, &[&Elem::basis(Gen::new(e.tgt, w, i)), e], false).v))
}

pub fn is_closed<A: AInfty + ?Sized>(a: &A, e: &Elem) -> bool {
    op_elems(a, &[e], false).is_zero()
}

/// Strict unit test: closed, two-sided identity for `m^2` and killing every
/// higher operation up to the arity bound.
pub fn is_strict_unit<A: AInfty + ?Sized>(a: &A, x: usize, e: &Elem) -> bool {
    if e.src != x || e.tgt != x || !is_closed(a, e) {
        return false;
    }
    if e.gens().any(|(g, _)| a.degree(g) != 0) {
        return false;
    }
    for w in 0..a.num_objects() {
        for i in 0..a.hom_dim(w, x) {
            let g = Elem::basis(Gen::new(w, x, i));
            if op_elems(a, &[e, &g], false) != g {
                return false;
            }
        }
        for i in 0..a.hom_dim(x, w) {
            let g = Elem::basis(Gen::new(x, w, i));
            if op_elems(a, &[&g, e], false) != g {
                return false;
            }
        }
    }
    for n in 3..=a.max_arity() {
        let others = composable_tuples(a, n - 1);
        let bad = parallel::map(&others, |t| {
            (0..n).any(|pos| {
                // Insert e so that it composes: needs t[pos-1].src == x and t[pos].tgt == x.
                let fits_left = pos == 0 || t[pos - 1].src == x;
                let fits_right = pos == n - 1 || t[pos].tgt == x;
                if !(fits_left && fits_right) {
                    return false;
                }
                let elems: Vec<Elem> = t.iter().map(|&g| Elem::basis(g)).collect();
                let mut refs: Vec<&Elem> = elems.iter().collect();
                refs.insert(pos, e);
                !op_elems(a, &refs, false).is_zero()
            })
        });
        if bad.into_iter().any(|b| b) {
            return false;
        }
    }
    true
}

/// Which side of a unit a witness homotopy belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `m^2(e, -) ≃ id` on `hom(w, x)`.
    Left,
    /// `m^2(-, e) ≃ id` on `hom(x, w)`.
    Right,
}

#[derive(Clone, Debug)]
pub struct UnitWitness {
    pub other: usize,
    pub side: Side,
    pub homotopy: Homotopy,
}

#[derive(Clone, Debug)]
pub struct UnitVerdict {
    pub is_unit: bool,
    pub reason: Option<String>,
    pub witnesses: Vec<UnitWitness>,
}

impl UnitVerdict {
    pub fn all_zero(&self) -> bool {
        self.witnesses.iter().all(|w| w.homotopy.is_zero())
    }
}

/// Homotopy-unit test over every object `w`, keeping the homotopies found.
pub fn is_unit<A: AInfty + ?Sized>(a: &A, x: usize, e: &Elem) -> Result<UnitVerdict, AInftyError> {
    let fail = |r: String| Ok(UnitVerdict { is_unit: false, reason: Some(r), witnesses: Vec::new() });
    if e.src != x || e.tgt != x {
        return fail("not an endomorphism".into());
    }
    if e.gens().any(|(g, _)| a.degree(g) != 0) {
        return fail("not of degree 0".into());
    }
    if !is_closed(a, e) {
        return fail("not closed".into());
    }
    let mut witnesses = Vec::new();
    for w in 0..a.num_objects() {
        for side in [Side::Left, Side::Right] {
            let f = match side {
                Side::Left => left_mult(a, e, w)?,
                Side::Right => right_mult(a, e, w)?,
            };
            let id = f.source.identity_map();
            match find_homotopy(&f, &id)? {
                Some(h) => witnesses.push(UnitWitness { other: w, side, homotopy: h }),
                None => return fail(format!("{side:?} multiplication is not homotopic to the identity on hom with {}", a.object_name(w))),
            }
        }
    }
    Ok(UnitVerdict { is_unit: true, reason: None, witnesses })
}

/// Sufficient criterion: every hom is a bounded complex of finitely generated
/// free modules. Over a field this always holds. A `false` answer only means
/// the criterion does not apply.
pub fn is_homotopically_projective<A: AInfty + ?Sized>(a: &A) -> bool {
    (0..a.num_objects()).all(|x| (0..a.num_objects()).all(|y| (0..a.hom_dim(x, y)).all(|i| a.torsion(Gen::new(x, y, i)).is_none())))
}

/// One basis element of a hom module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisElem {
    pub label: String,
    pub degree: i32,
    /// Additive order for torsion generators (ℤ/n summands).
    pub order: Option<u32>,
}

/// An A∞-category given by explicit structure constants in the standard
/// convention.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableCategory {
    pub name: String,
    ring: Ring,
    objects: Vec<String>,
    homs: HashMap<(usize, usize), Vec<BasisElem>>,
    ops: HashMap<Vec<Gen>, SparseVec>,
    max_arity: usize,
    units: Vec<Option<SparseVec>>,
}

impl AInfty for TableCategory {
    fn ring(&self) -> Ring {
        self.ring
    }
    fn num_objects(&self) -> usize {
        self.objects.len()
    }
    fn object_name(&self, x: usize) -> String {
        self.objects[x].clone()
    }
    fn hom_dim(&self, x: usize, y: usize) -> usize {
        self.homs.get(&(x, y)).map_or(0, Vec::len)
    }
    fn degree(&self, g: Gen) -> i32 {
        self.homs[&(g.src, g.tgt)][g.idx].degree
    }
    fn label(&self, g: Gen) -> String {
        self.homs[&(g.src, g.tgt)][g.idx].label.clone()
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn convention(&self) -> Convention {
        Convention::Standard
    }
    fn op(&self, args: &[Gen]) -> SparseVec {
        self.ops.get(args).cloned().unwrap_or_default()
    }
    fn torsion(&self, g: Gen) -> Option<u32> {
        self.homs[&(g.src, g.tgt)][g.idx].order
    }
}

impl TableCategory {
    pub fn new(name: &str, ring: Ring, max_arity: usize) -> Self {
        TableCategory { name: name.into(), ring, objects: Vec::new(), homs: HashMap::new(), ops: HashMap::new(), max_arity, units: Vec::new() }
    }

    pub fn add_object(&mut self, name: &str) -> usize {
        self.objects.push(name.into());
        self.units.push(None);
        self.objects.len() - 1
    }

    pub fn add_basis(&mut self, x: usize, y: usize, label: &str, degree: i32) -> Gen {
        self.add_basis_with_order(x, y, label, degree, None)
    }

    pub fn add_basis_with_order(&mut self, x: usize, y: usize, label: &str, degree: i32, order: Option<u32>) -> Gen {
        let h = self.homs.entry((x, y)).or_default();
        h.push(BasisElem { label: label.into(), degree, order });
        Gen::new(x, y, h.len() - 1)
    }

    /// Sets an operation on a basis tuple (replacing any previous value).
    pub fn set_op(&mut self, args: &[Gen], out: &[(Gen, i64)]) {
        let ring = self.ring;
        let v = crate::coefficients::vec_from_pairs(ring, out.iter().map(|&(g, c)| (g.idx, ring.int(c))));
        self.set_op_vec(args, v);
    }

    pub fn set_op_vec(&mut self, args: &[Gen], v: SparseVec) {
        if v.is_empty() {
            self.ops.remove(args);
        } else {
            self.ops.insert(args.to_vec(), v);
        }
    }

    pub fn set_unit(&mut self, x: usize, v: SparseVec) {
        self.units[x] = Some(v);
    }

    pub fn set_max_arity(&mut self, k: usize) {
        self.max_arity = k;
    }

    /// The declared unit of `x`, if any.
    pub fn unit(&self, x: usize) -> Option<Elem> {
        self.units[x].as_ref().map(|v| Elem::new(x, x, v.clone()))
    }

    pub fn find_object(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn find_gen(&self, x: usize, y: usize, label: &str) -> Option<Gen> {
        self.homs.get(&(x, y))?.iter().position(|b| b.label == label).map(|i| Gen::new(x, y, i))
    }

    pub fn ops(&self) -> impl Iterator<Item = (&Vec<Gen>, &SparseVec)> {
        self.ops.iter()
    }

    /// Checks shapes and degrees of every stored operation.
    pub fn validate(&self) -> Result<(), AInftyError> {
        for (args, out) in &self.ops {
            check_composable(self, args)?;
            if args.len() > self.max_arity {
                return Err(AInftyError::Invalid(format!("operation of arity {} above the bound {}", args.len(), self.max_arity)));
            }
            let want: i32 = args.iter().map(|&g| self.degree(g)).sum::<i32>() + 2 - args.len() as i32;
            let (s, t) = (args.last().unwrap().src, args[0].tgt);
            for &(i, _) in out {
                if i >= self.hom_dim(s, t) || self.degree(Gen::new(s, t, i)) != want {
                    return Err(AInftyError::Invalid(format!("operation on {} lands outside degree {want}", show_tuple(self, args))));
                }
            }
        }
        Ok(())
    }

    /// Text form; see the crate README for the grammar.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "category {}", self.name).unwrap();
        writeln!(s, "ring {}", self.ring.name()).unwrap();
        writeln!(s, "arity {}", self.max_arity).unwrap();
        for o in &self.objects {
            writeln!(s, "object {o}").unwrap();
        }
        let mut pairs: Vec<_> = self.homs.keys().copied().collect();
        pairs.sort();
        for (x, y) in pairs {
            for b in &self.homs[&(x, y)] {
                write!(s, "basis {} {} {} {}", self.objects[x], self.objects[y], b.label, b.degree).unwrap();
                if let Some(n) = b.order {
                    write!(s, " order {n}").unwrap();
                }
                s.push('\n');
            }
        }
        for (x, u) in self.units.iter().enumerate() {
            if let Some(v) = u {
                writeln!(s, "unit {} {}", self.objects[x], self.combo_text(x, x, v)).unwrap();
            }
        }
        let mut ops: Vec<_> = self.ops.iter().collect();
        ops.sort_by(|a, b| (a.0.len(), a.0).cmp(&(b.0.len(), b.0)));
        for (args, v) in ops {
            let labels: Vec<String> = args.iter().map(|&g| self.label(g)).collect();
            let (src, tgt) = (args.last().unwrap().src, args[0].tgt);
            writeln!(s, "op {} : {}", labels.join(" "), self.combo_text(src, tgt, v)).unwrap();
        }
        s
    }

    fn combo_text(&self, x: usize, y: usize, v: &[(usize, Scalar)]) -> String {
        let parts: Vec<String> = v.iter().map(|&(i, c)| format!("{c}*{}", self.label(Gen::new(x, y, i)))).collect();
        parts.join(" + ")
    }

    /// Parses the text form. Labels must be unique across the category.
    pub fn from_text(text: &str) -> Result<Self, AInftyError> {
        let err = |line: usize, msg: &str| AInftyError::Parse { line, msg: msg.into() };
        let mut name = None;
        let mut ring = None;
        let mut arity = None;
        let mut cat: Option<TableCategory> = None;
        let mut labels: HashMap<String, Gen> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let ln = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kw, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            if cat.is_none() && !matches!(kw, "category" | "ring" | "arity") {
                let r = ring.ok_or_else(|| err(ln, "missing ring line"))?;
                cat = Some(TableCategory::new(name.as_deref().unwrap_or("unnamed"), r, arity.unwrap_or(6)));
            }
            match kw {
                "category" => name = Some(rest.to_string()),
                "ring" => ring = Some(Ring::parse_name(rest).ok_or_else(|| err(ln, "unknown ring"))?),
                "arity" => arity = Some(rest.parse().map_err(|_| err(ln, "bad arity"))?),
                "object" => {
                    let c = cat.as_mut().unwrap();
                    if rest.is_empty() || rest.contains(' ') || c.find_object(rest).is_some() {
                        return Err(err(ln, "object names must be unique single words"));
                    }
                    c.add_object(rest);
                }
                "basis" => {
                    let c = cat.as_mut().unwrap();
                    let w: Vec<&str> = rest.split_whitespace().collect();
                    let (order, w) = match w.as_slice() {
                        [a, b, l, d, "order", o] => (Some(o.parse::<u32>().map_err(|_| err(ln, "bad order"))?), vec![*a, *b, *l, *d]),
                        [_, _, _, _] => (None, w),
                        _ => return Err(err(ln, "expected: basis SRC TGT LABEL DEGREE [order N]")),
                    };
                    let x = c.find_object(w[0]).ok_or_else(|| err(ln, "unknown source object"))?;
                    let y = c.find_object(w[1]).ok_or_else(|| err(ln, "unknown target object"))?;
                    let d: i32 = w[3].parse().map_err(|_| err(ln, "bad degree"))?;
                    if labels.contains_key(w[2]) {
                        return Err(err(ln, "duplicate label"));
                    }
                    let g = c.add_basis_with_order(x, y, w[2], d, order);
                    labels.insert(w[2].to_string(), g);
                }
                "unit" => {
                    let c = cat.as_mut().unwrap();
                    let (o, combo) = rest.split_once(' ').ok_or_else(|| err(ln, "expected: unit OBJECT COMBINATION"))?;
                    let x = c.find_object(o).ok_or_else(|| err(ln, "unknown object"))?;
                    let v = parse_combo(c.ring, combo, &labels, (x, x)).map_err(|m| err(ln, &m))?;
                    c.set_unit(x, v);
                }
                "op" => {
                    let c = cat.as_mut().unwrap();
                    let (lhs, rhs) = rest.split_once(" : ").ok_or_else(|| err(ln, "expected: op LABELS : COMBINATION"))?;
                    let args: Vec<Gen> = lhs.split_whitespace().map(|l| labels.get(l).copied().ok_or_else(|| err(ln, &format!("unknown label {l}")))).collect::<Result<_, _>>()?;
                    if args.is_empty() {
                        return Err(err(ln, "operation without inputs"));
                    }
                    check_composable(c, &args).map_err(|e| err(ln, &e.to_string()))?;
                    let v = parse_combo(c.ring, rhs, &labels, (args.last().unwrap().src, args[0].tgt)).map_err(|m| err(ln, &m))?;
                    if c.ops.contains_key(&args) {
                        return Err(err(ln, "operation given twice"));
                    }
                    c.set_op_vec(&args, v);
                }
                _ => return Err(err(ln, &format!("unknown keyword {kw}"))),
            }
        }
        let c = match cat {
            Some(c) => c,
            None => TableCategory::new(name.as_deref().unwrap_or("unnamed"), ring.ok_or_else(|| err(0, "missing ring line"))?, arity.unwrap_or(6)),
        };
        c.validate()?;
        Ok(c)
    }
}

pub(crate) fn parse_combo(ring: Ring, s: &str, labels: &HashMap<String, Gen>, hom: (usize, usize)) -> Result<SparseVec, String> {
    let mut acc = Accum::new(ring);
    for term in s.split(" + ") {
        let term = term.trim();
        if term.is_empty() {
            return Err("empty term".into());
        }
        let (c, l) = match term.split_once('*') {
            Some((c, l)) => (ring.parse(c).ok_or_else(|| format!("bad coefficient {c}"))?, l),
            None => (Scalar::ONE, term),
        };
        let g = labels.get(l).ok_or_else(|| format!("unknown label {l}"))?;
        if (g.src, g.tgt) != hom {
            return Err(format!("{l} is in the wrong hom"));
        }
        acc.add(g.idx, c);
    }
    Ok(acc.finish())
}

/// Writes out every nonzero operation of `a` up to its arity bound.
pub fn materialize<A: AInfty + ?Sized>(a: &A, name: &str) -> TableCategory {
    let mut t = TableCategory::new(name, a.ring(), a.max_arity());
    for x in 0..a.num_objects() {
        t.add_object(&a.object_name(x));
    }
    for x in 0..a.num_objects() {
        for y in 0..a.num_objects() {
            for i in 0..a.hom_dim(x, y) {
                let g = Gen::new(x, y, i);
                t.add_basis_with_order(x, y, &a.label(g), a.degree(g), a.torsion(g));
            }
        }
    }
    for l in 1..=a.max_arity() {
        let tuples = composable_tuples(a, l);
        let outs = parallel::map(&tuples, |tp| a.mu(tp));
        for (tp, v) in tuples.into_iter().zip(outs) {
            t.set_op_vec(&tp, v);
        }
    }
    t
}

/// `A⁺`: a strict unit `1_X` adjoined to each endomorphism module as the last
/// basis element.
#[derive(Clone, Debug)]
pub struct Augmented<A> {
    pub base: A,
}

impl<A: AInfty> Augmented<A> {
    pub fn new(base: A) -> Self {
        Augmented { base }
    }

    /// The adjoined unit `1_X`.
    pub fn one(&self, x: usize) -> Gen {
        Gen::new(x, x, self.base.hom_dim(x, x))
    }

    pub fn is_one(&self, g: Gen) -> bool {
        g.src == g.tgt && g.idx == self.base.hom_dim(g.src, g.src)
    }
}

impl<A: AInfty> AInfty for Augmented<A> {
    fn ring(&self) -> Ring {
        self.base.ring()
    }
    fn num_objects(&self) -> usize {
        self.base.num_objects()
    }
    fn object_name(&self, x: usize) -> String {
        self.base.object_name(x)
    }
    fn hom_dim(&self, x: usize, y: usize) -> usize {
        self.base.hom_dim(x, y) + usize::from(x == y)
    }
    fn degree(&self, g: Gen) -> i32 {
        if self.is_one(g) {
            0
        } else {
            self.base.degree(g)
        }
    }
    fn label(&self, g: Gen) -> String {
        if self.is_one(g) {
            format!("1_{}", self.base.object_name(g.src))
        } else {
            self.base.label(g)
        }
    }
    fn max_arity(&self) -> usize {
        self.base.max_arity().max(2)
    }
    fn convention(&self) -> Convention {
        Convention::Standard
    }
    fn op(&self, args: &[Gen]) -> SparseVec {
        let ones = args.iter().filter(|&&g| self.is_one(g)).count();
        if ones == 0 {
            return self.base.mu(args);
        }
        if args.len() != 2 {
            return Vec::new();
        }
        // m^2(1, x) = x and m^2(x, 1) = x.
        let other = if self.is_one(args[0]) { args[1] } else { args[0] };
        vec![(other.idx, Scalar::ONE)]
    }
    fn torsion(&self, g: Gen) -> Option<u32> {
        if self.is_one(g) {
            None
        } else {
            self.base.torsion(g)
        }
    }
}

pub fn augment<A: AInfty>(a: A) -> Augmented<A> {
    Augmented::new(a)
}

/// Bundled constructors for the running examples.
pub mod examples {
    use super::*;

    /// One object whose endomorphisms are `ℤ/2` in degree 0. Over ℤ the hom is a
    /// torsion module; over 𝔽₂ it is the ground field.
    pub fn z2_one_object(ring: Ring) -> TableCategory {
        let mut c = TableCategory::new("z2", ring, 4);
        let x = c.add_object("X");
        let order = (ring == Ring::Integers).then_some(2);
        let one = c.add_basis_with_order(x, x, "1", 0, order);
        c.set_op(&[one, one], &[(one, 1)]);
        c.set_unit(x, vec![(0, Scalar::ONE)]);
        c
    }

    /// The dga `ℤ·ε --×2--> ℤ·1` with `|ε| = -1` and `ε² = 0`.
    pub fn z2_resolution(ring: Ring) -> TableCategory {
        let mut c = TableCategory::new("z2-resolution", ring, 4);
        let x = c.add_object("X");
        let one = c.add_basis(x, x, "1", 0);
        let eps = c.add_basis(x, x, "eps", -1);
        c.set_op(&[eps], &[(one, 2)]);
        c.set_op(&[one, one], &[(one, 1)]);
        c.set_op(&[one, eps], &[(eps, 1)]);
        c.set_op(&[eps, one], &[(eps, 1)]);
        c.set_unit(x, vec![(one.idx, Scalar::ONE)]);
        c
    }

    /// The linearization `k ⊗ P` of a finite preorder given by `leq(i, j)`.
    pub fn preorder(name: &str, ring: Ring, n: usize, leq: impl Fn(usize, usize) -> bool) -> TableCategory {
        let mut c = TableCategory::new(name, ring, 4);
        for i in 0..n {
            c.add_object(&i.to_string());
        }
        let mut e = HashMap::new();
        for i in 0..n {
            for j in 0..n {
                if i == j || leq(i, j) {
                    e.insert((i, j), c.add_basis(i, j, &format!("e{i}{j}"), 0));
                }
            }
        }
        for (&(i, j), &f) in &e {
            for (&(j2, k), &g) in &e {
                if j2 == j {
                    c.set_op(&[g, f], &[(e[&(i, k)], 1)]);
                }
            }
        }
        for i in 0..n {
            c.set_unit(i, vec![(e[&(i, i)].idx, Scalar::ONE)]);
        }
        c
    }

    /// `k ⊗ [n]`: objects `0..=n`, `hom(i, j) = k` for `i ≤ j`.
    pub fn poset(ring: Ring, n: usize) -> TableCategory {
        preorder(&format!("k[{n}]"), ring, n + 1, |i, j| i <= j)
    }

    /// A single object with `hom = k` in degree 0.
    pub fn ground(ring: Ring) -> TableCategory {
        let mut c = poset(ring, 0);
        c.name = "k".into();
        c
    }

    /// `k[ε]/ε²` with `|ε| = deg`.
    pub fn dual_numbers(ring: Ring, deg: i32) -> TableCategory {
        let mut c = TableCategory::new("dual-numbers", ring, 4);
        let x = c.add_object("X");
        let one = c.add_basis(x, x, "1", 0);
        let eps = c.add_basis(x, x, "eps", deg);
        c.set_op(&[one, one], &[(one, 1)]);
        c.set_op(&[one, eps], &[(eps, 1)]);
        c.set_op(&[eps, one], &[(eps, 1)]);
        c.set_unit(x, vec![(one.idx, Scalar::ONE)]);
        c
    }

    /// `k ⊕ (β → γ)`: a strictly unital dga with a contractible square-zero
    /// ideal, `|β| = -1`, `dβ = γ`. Here `1 + γ` is a unit that is not strict.
    pub fn contractible_ideal(ring: Ring) -> TableCategory {
        let mut c = TableCategory::new("contractible-ideal", ring, 4);
        let x = c.add_object("X");
        let one = c.add_basis(x, x, "1", 0);
        let b = c.add_basis(x, x, "beta", -1);
        let g = c.add_basis(x, x, "gamma", 0);
        c.set_op(&[b], &[(g, 1)]);
        c.set_op(&[one, one], &[(one, 1)]);
        for y in [b, g] {
            c.set_op(&[one, y], &[(y, 1)]);
            c.set_op(&[y, one], &[(y, 1)]);
        }
        c.set_unit(x, vec![(one.idx, Scalar::ONE)]);
        c
    }

    /// An arrow of a graded quiver: source, target, label, degree.
    pub type Arrow<'a> = (usize, usize, &'a str, i32);

    /// The free dg category on an acyclic graded quiver, with differential
    /// given on arrows as integer combinations of paths (lists of arrow
    /// indices, right to left). Paths are the basis; identity paths are the
    /// strict units.
    pub fn free_dg(name: &str, ring: Ring, objects: &[&str], arrows: &[Arrow], d: &[(usize, Vec<(i64, Vec<usize>)>)]) -> Result<TableCategory, AInftyError> {
        let mut c = TableCategory::new(name, ring, 4);
        for o in objects {
            c.add_object(o);
        }
        // Enumerate paths by length; acyclicity bounds the length.
        let mut all: Vec<(usize, usize, Vec<usize>)> = (0..objects.len()).map(|o| (o, o, Vec::new())).collect();
        let mut frontier: Vec<(usize, usize, Vec<usize>)> = all.clone();
        for _ in 0..=arrows.len() {
            let mut next = Vec::new();
            for (s, t, p) in &frontier {
                for (ai, a) in arrows.iter().enumerate() {
                    if a.0 == *t {
                        let mut q = vec![ai];
                        q.extend_from_slice(p);
                        next.push((*s, a.1, q));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            all.extend(next.iter().cloned());
            frontier = next;
        }
        if !frontier.is_empty() && frontier.iter().any(|(_, _, p)| p.len() > arrows.len()) {
            return Err(AInftyError::Invalid("quiver has an oriented cycle".into()));
        }
        let mut index: HashMap<Vec<usize>, Gen> = HashMap::new();
        let mut ident: HashMap<usize, Gen> = HashMap::new();
        for (s, t, p) in &all {
            let label = if p.is_empty() { format!("id_{}", objects[*s]) } else { p.iter().map(|&a| arrows[a].2).collect::<Vec<_>>().join(".") };
            let deg = p.iter().map(|&a| arrows[a].3).sum();
            let g = c.add_basis(*s, *t, &label, deg);
            if p.is_empty() {
                ident.insert(*s, g);
            } else {
                index.insert(p.clone(), g);
            }
        }
        let gen_of = |s: usize, p: &[usize]| if p.is_empty() { ident[&s] } else { index[p] };
        // Differential on arrows, extended by the Leibniz rule.
        let mut darrow: HashMap<usize, Vec<(i64, Vec<usize>)>> = HashMap::new();
        for (a, v) in d {
            darrow.insert(*a, v.clone());
        }
        for (s, _, p) in &all {
            // p = a_n … a_1; d(p) = Σ ± a_n … d(a_i) … a_1 with sign (-1)^{Σ_{j>i}|a_j|}.
            let mut out: Vec<(Gen, i64)> = Vec::new();
            for i in 0..p.len() {
                let Some(da) = darrow.get(&p[i]) else { continue };
                let left: i32 = p[..i].iter().map(|&a| arrows[a].3).sum();
                let sign = if left.rem_euclid(2) == 1 { -1 } else { 1 };
                for (coef, q) in da {
                    let mut path = p[..i].to_vec();
                    path.extend_from_slice(q);
                    path.extend_from_slice(&p[i + 1..]);
                    let g = gen_of(*s, &path);
                    out.push((g, sign * coef));
                }
            }
            if !out.is_empty() {
                let g = gen_of(*s, p);
                c.set_op(&[g], &out);
            }
        }
        for (s, _, p) in &all {
            for (s2, t2, q) in &all {
                if *s == *t2 {
                    let mut path = p.clone();
                    path.extend_from_slice(q);
                    let (f, g) = (gen_of(*s, p), gen_of(*s2, q));
                    c.set_op(&[f, g], &[(gen_of(*s2, &path), 1)]);
                }
            }
        }
        for (o, g) in &ident {
            c.set_unit(*o, vec![(g.idx, Scalar::ONE)]);
        }
        c.validate()?;
        let l1 = check_relations(&c, 2, None);
        if !l1.passed() {
            return Err(AInftyError::Invalid(format!("differential is not compatible: {}", l1.first_failure().unwrap())));
        }
        Ok(c)
    }

    /// All bundled examples over `ring` that make sense there.
    pub fn standard(ring: Ring) -> Vec<TableCategory> {
        let mut v = vec![ground(ring), poset(ring, 1), poset(ring, 2), dual_numbers(ring, 0), dual_numbers(ring, -1), contractible_ideal(ring), z2_resolution(ring)];
        if let Ok(q) = free_dg("square", ring, &["a", "b", "c", "d"], &[(0, 1, "f", 0), (1, 3, "g", 0), (0, 2, "p", 0), (2, 3, "q", 0), (0, 3, "h", -1)], &[(4, vec![(1, vec![1, 0]), (-1, vec![3, 2])])]) {
            v.push(q);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::examples::*;
    use super::*;
    use crate::coefficients::vec_get;
    use rand::Rng;

    /// A one-object category with random degree-respecting structure
    /// constants; not A∞ in general.
    fn random_graded(seed: u64, ring: Ring) -> TableCategory {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = TableCategory::new("random", ring, 4);
        let x = c.add_object("X");
        let degs = [-1, 0, 0, 1];
        let gens: Vec<Gen> = degs.iter().enumerate().map(|(i, &d)| c.add_basis(x, x, &format!("g{i}"), d)).collect();
        for l in 1..=4 {
            for t in composable_tuples(&c, l) {
                let want: i32 = t.iter().map(|&g| c.degree(g)).sum::<i32>() + 2 - l as i32;
                let out: Vec<(Gen, i64)> = gens.iter().filter(|&&g| c.degree(g) == want).map(|&g| (g, rng.random_range(-2..=2))).collect();
                c.set_op(&t, &out);
            }
        }
        c
    }

    #[test]
    fn shifted_and_standard_residuals_agree() {
        // On arbitrary graded data the two residuals differ by (-1)^σ times a
        // sign depending only on the length.
        let ring = Ring::Rationals;
        for seed in 0..3 {
            let c = random_graded(seed, ring);
            for l in 1..=4 {
                let mut ratio: Option<Scalar> = None;
                for t in composable_tuples(&c, l) {
                    let rm = relation_residual(&c, &t);
                    let rb = relation_residual_shifted(&c, &t);
                    assert_eq!(rm.is_empty(), rb.is_empty(), "{t:?}");
                    for &(i, x) in &rm {
                        let y = vec_get(&rb, i);
                        let r = ring.mul(y, ring.inv(x).unwrap());
                        let r = if sigma(&c, &t) { ring.neg(r) } else { r };
                        assert!(r == Scalar::ONE || r == ring.int(-1));
                        assert_eq!(*ratio.get_or_insert(r), r, "length {l}");
                    }
                    assert_eq!(rm.len(), rb.len());
                }
            }
        }
    }

    #[test]
    fn m_partial_top_arity_is_m() {
        let c = z2_resolution(Ring::Integers);
        for t in composable_tuples(&c, 2) {
            let p = m_partial(&c, 2, &t).unwrap();
            let direct = c.mu(&t);
            let (s, tg) = (t[1].src, t[0].tgt);
            let got: SparseVec = crate::coefficients::vec_from_pairs(c.ring(), p.iter().map(|(tp, x)| (tp[0].idx, *x)));
            assert!(p.iter().all(|(tp, _)| tp.len() == 1 && tp[0].src == s && tp[0].tgt == tg));
            assert_eq!(got, direct);
        }
    }

    #[test]
    fn leibniz_from_m_partial() {
        // m^1_2(x, y) = -(m^1 x ⊗ y) - (-1)^{|x|} x ⊗ m^1 y.
        let c = z2_resolution(Ring::Integers);
        let one = Gen::new(0, 0, 0);
        let eps = Gen::new(0, 0, 1);
        let p = m_partial(&c, 1, &[eps, eps]).unwrap();
        let mut p: Vec<_> = p.into_iter().map(|(t, x)| (t, x.to_int())).collect();
        p.sort();
        assert_eq!(p, vec![(vec![one, eps], -2), (vec![eps, one], 2)]);
    }

    #[test]
    fn relations_hold_on_examples_and_fail_on_mutation() {
        for r in [Ring::Integers, Ring::PrimeField(2), Ring::PrimeField(3)] {
            for c in standard(r) {
                let rep = check_relations(&c, 4, None);
                assert!(rep.passed(), "{}: {:?}", c.name, rep.first_failure());
            }
        }
        let mut c = z2_resolution(Ring::Integers);
        let one = Gen::new(0, 0, 0);
        let eps = Gen::new(0, 0, 1);
        c.set_op(&[eps, one], &[(eps, 2)]);
        let rep = check_relations(&c, 4, None);
        assert!(!rep.passed());
        assert_eq!(rep.lengths.iter().position(|l| l.failure.is_some()), Some(1));
    }

    #[test]
    fn units() {
        let c = dual_numbers(Ring::PrimeField(2), 0);
        let u = c.unit(0).unwrap();
        assert!(is_strict_unit(&c, 0, &u));
        let v = is_unit(&c, 0, &u).unwrap();
        assert!(v.is_unit && v.all_zero());
        let eps = Elem::basis(Gen::new(0, 0, 1));
        assert!(!is_unit(&c, 0, &eps).unwrap().is_unit);
        assert!(!is_strict_unit(&c, 0, &Elem::zero(0, 0)));

        let ring = Ring::Integers;
        let c = contractible_ideal(ring);
        let e = Elem::new(0, 0, vec![(0, Scalar::ONE), (2, Scalar::ONE)]);
        assert!(!is_strict_unit(&c, 0, &e));
        let v = is_unit(&c, 0, &e).unwrap();
        assert!(v.is_unit);
        assert!(!v.all_zero());
    }

    #[test]
    fn augmentation() {
        let c = dual_numbers(Ring::PrimeField(3), 0);
        let a = augment(c.clone());
        assert_eq!(a.hom_dim(0, 0), 3);
        let one = Elem::basis(a.one(0));
        assert!(is_strict_unit(&a, 0, &one));
        // u stays a strict unit of A but not of A⁺, since m^2(u, 1) = u.
        let u = c.unit(0).unwrap();
        assert!(is_strict_unit(&c, 0, &u));
        assert!(!is_strict_unit(&a, 0, &u));
        assert_ne!(one, u);
        assert!(check_relations(&a, 4, None).passed());
        let aa = augment(materialize(&a, "aug"));
        assert_eq!(aa.hom_dim(0, 0), 4);
        assert!(is_strict_unit(&aa, 0, &Elem::basis(aa.one(0))));
        assert!(is_strict_unit(&aa.base, 0, &Elem::basis(a.one(0))));
        assert!(check_relations(&aa, 4, None).passed());
    }

    #[test]
    fn text_round_trip() {
        for c in standard(Ring::Integers).into_iter().chain([z2_one_object(Ring::Integers)]) {
            let t = c.to_text();
            let back = TableCategory::from_text(&t).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_text(), t);
        }
        let bad = "ring Z\nobject X\nbasis X X a 0\nop a b : a\n";
        match TableCategory::from_text(bad) {
            Err(AInftyError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projectivity_criterion() {
        assert!(is_homotopically_projective(&z2_resolution(Ring::Integers)));
        assert!(is_homotopically_projective(&z2_one_object(Ring::PrimeField(2))));
        assert!(!is_homotopically_projective(&z2_one_object(Ring::Integers)));
    }

    #[test]
    fn example_shapes() {
        let p = poset(Ring::PrimeField(2), 1);
        assert_eq!((p.hom_dim(0, 1), p.hom_dim(1, 0)), (1, 0));
        let r = z2_resolution(Ring::Integers);
        let h = hom_complex(&r, 0, 0).unwrap().complex.cohomology();
        assert_eq!(h[&0].to_string(), "Z/2");
        assert!(h[&-1].is_zero());
    }
}
