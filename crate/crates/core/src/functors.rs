//! A∞-functors, unitality, composition, augmentation, gauge transfer,
//! pre-natural transformation complexes and Hochschild cochains.
//!
//! Components `f^k` (degree `1 - k`) are stored in the standard convention.
//! Internally they are used in the shifted form `F^k(x) = (-1)^{σ(x)} f^k(x)`,
//! where the functor equations read
//! `Σ b'(F ⊗ … ⊗ F) = Σ F(1^α ⊗ b ⊗ 1^γ)` with only Koszul signs from `b`.
//! For dg functors this reduces to `f^1` being a chain map that is multiplicative.

use std::collections::HashMap;

use serde::Serialize;

use crate::ainfty::{self, complex_from_images, composable_tuples, op_elems, sigma, AInfty, AInftyError, Augmented, Elem, Gen, HomComplex, TableCategory};
use crate::complexes::CochainComplex;
use crate::coefficients::{vec_scale, Accum, Ring, Scalar, SparseVec};
use crate::parallel;
use crate::twisted::TwCategory;

/// An A∞-functor given by an object map and components on basis tuples.
pub trait Functor: Sync {
    fn obj(&self, x: usize) -> usize;
    fn max_arity(&self) -> usize;
    /// `f^k` on a composable basis tuple (standard convention).
    fn comp(&self, args: &[Gen]) -> SparseVec;
}

/// Shifted-convention component `F^k`.
pub fn fb<A: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, f: &F, args: &[Gen]) -> SparseVec {
    if args.is_empty() || args.len() > f.max_arity() {
        return Vec::new();
    }
    let v = f.comp(args);
    if sigma(a, args) {
        vec_scale(a.ring(), &v, a.ring().int(-1))
    } else {
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFunctor {
    pub obj_map: Vec<usize>,
    pub comps: HashMap<Vec<Gen>, SparseVec>,
    pub max_arity: usize,
}

impl Functor for TableFunctor {
    fn obj(&self, x: usize) -> usize {
        self.obj_map[x]
    }
    fn max_arity(&self) -> usize {
        self.max_arity
    }
    fn comp(&self, args: &[Gen]) -> SparseVec {
        self.comps.get(args).cloned().unwrap_or_default()
    }
}

impl TableFunctor {
    pub fn new(obj_map: Vec<usize>, max_arity: usize) -> Self {
        TableFunctor { obj_map, comps: HashMap::new(), max_arity }
    }

    pub fn set(&mut self, args: &[Gen], v: SparseVec) {
        if v.is_empty() {
            self.comps.remove(args);
        } else {
            self.comps.insert(args.to_vec(), v);
        }
    }

    /// Writes out all components of `f` on tuples of `a` up to its arity.
    pub fn materialize<A: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, f: &F) -> Self {
        let mut t = TableFunctor::new((0..a.num_objects()).map(|x| f.obj(x)).collect(), f.max_arity());
        for l in 1..=f.max_arity() {
            for tp in composable_tuples(a, l) {
                let v = f.comp(&tp);
                t.set(&tp, v);
            }
        }
        t
    }
}

/// The identity functor.
pub struct Identity;

impl Functor for Identity {
    fn obj(&self, x: usize) -> usize {
        x
    }
    fn max_arity(&self) -> usize {
        1
    }
    fn comp(&self, args: &[Gen]) -> SparseVec {
        if args.len() == 1 {
            vec![(args[0].idx, Scalar::ONE)]
        } else {
            Vec::new()
        }
    }
}

/// The non-unital inclusion `A → A⁺`.
pub struct Inclusion;

impl Functor for Inclusion {
    fn obj(&self, x: usize) -> usize {
        x
    }
    fn max_arity(&self) -> usize {
        1
    }
    fn comp(&self, args: &[Gen]) -> SparseVec {
        Identity.comp(args)
    }
}

/// `f⁺: A⁺ → B⁺`, sending `1_X` to `1_{fX}` and vanishing in higher arity on
/// any input `1_X`.
pub struct AugmentedFunctor<'a, A, B, F: ?Sized> {
    pub source: &'a Augmented<A>,
    pub target: &'a Augmented<B>,
    pub f: &'a F,
}

impl<A: AInfty, B: AInfty, F: Functor + ?Sized> Functor for AugmentedFunctor<'_, A, B, F> {
    fn obj(&self, x: usize) -> usize {
        self.f.obj(x)
    }
    fn max_arity(&self) -> usize {
        self.f.max_arity()
    }
    fn comp(&self, args: &[Gen]) -> SparseVec {
        let ones = args.iter().filter(|&&g| self.source.is_one(g)).count();
        if ones == 0 {
            return self.f.comp(args);
        }
        if args.len() == 1 {
            let y = self.f.obj(args[0].src);
            return vec![(self.target.one(y).idx, Scalar::ONE)];
        }
        Vec::new()
    }
}

pub fn augment_functor<'a, A: AInfty, B: AInfty, F: Functor + ?Sized>(source: &'a Augmented<A>, target: &'a Augmented<B>, f: &'a F) -> AugmentedFunctor<'a, A, B, F> {
    AugmentedFunctor { source, target, f }
}

/// Ordered compositions of `n` into positive parts, each at most `max`.
pub fn compositions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n.min(max) {
        for mut rest in compositions(n - first, max) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Applies `F_{i_r} ⊗ … ⊗ F_{i_1}` (shifted) to a basis tuple split by the
/// parts `parts` (left to right), returning the tensor of target elements
/// as a list of (element tuple, coefficient) expanded on basis generators.
fn apply_parts<A: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, f: &F, args: &[Gen], parts: &[usize]) -> Vec<Elem> {
    let mut pos = 0;
    parts
        .iter()
        .map(|&p| {
            let chunk = &args[pos..pos + p];
            pos += p;
            let (s, t) = (f.obj(chunk[p - 1].src), f.obj(chunk[0].tgt));
            Elem::new(s, t, fb(a, f, chunk))
        })
        .collect()
}

/// Shifted residual of the functor equation on one tuple.
pub fn functor_residual<A: AInfty + ?Sized, B: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, b: &B, f: &F, args: &[Gen]) -> SparseVec {
    let ring = a.ring();
    let n = args.len();
    let mut acc = Accum::new(ring);
    for parts in compositions(n, f.max_arity()) {
        if parts.len() > b.max_arity() {
            continue;
        }
        let elems = apply_parts(a, f, args, &parts);
        let refs: Vec<&Elem> = elems.iter().collect();
        acc.add_vec(&op_elems(b, &refs, true).v, Scalar::ONE);
    }
    for alpha in 0..n {
        let left: i64 = args[..alpha].iter().map(|&g| a.degree(g) as i64 - 1).sum();
        let sign = ring.sign(left.rem_euclid(2) == 1);
        for s in 1..=(n - alpha).min(a.max_arity()) {
            if n - s + 1 > f.max_arity() {
                continue;
            }
            let inner = a.bmu(&args[alpha..alpha + s]);
            let (src, tgt) = (args[alpha + s - 1].src, args[alpha].tgt);
            for (i, c) in inner {
                let mut tup = args[..alpha].to_vec();
                tup.push(Gen::new(src, tgt, i));
                tup.extend_from_slice(&args[alpha + s..]);
                acc.add_vec(&fb(a, f, &tup), ring.neg(ring.mul(sign, c)));
            }
        }
    }
    acc.finish()
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctorReport {
    pub passed: bool,
    pub failure: Option<String>,
    pub tuples_checked: usize,
}

pub fn check_functor<A: AInfty + ?Sized, B: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, b: &B, f: &F, l_max: usize) -> FunctorReport {
    check_functor_on(a, b, f, (1..=l_max).map(|l| composable_tuples(a, l)))
}

/// The functor equations on the given tuples, grouped by arity.
pub fn check_functor_on<A: AInfty + ?Sized, B: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, b: &B, f: &F, groups: impl IntoIterator<Item = Vec<Vec<Gen>>>) -> FunctorReport {
    let mut checked = 0;
    for tuples in groups {
        let Some(l) = tuples.first().map(Vec::len) else { continue };
        checked += tuples.len();
        let res = parallel::map(&tuples, |t| functor_residual(a, b, f, t));
        if let Some((t, r)) = tuples.iter().zip(&res).find(|(_, r)| !r.is_empty()) {
            let (s, tg) = (f.obj(t.last().unwrap().src), f.obj(t[0].tgt));
            return FunctorReport {
                passed: false,
                failure: Some(format!("l = {l}: residual at {} is {}", ainfty::show_tuple(a, t), ainfty::show_vec(b, s, tg, r))),
                tuples_checked: checked,
            };
        }
    }
    FunctorReport { passed: true, failure: None, tuples_checked: checked }
}

/// `Tw(f)`: twisted complexes of `source` to those of `target`, entrywise on
/// objects and by δ-insertion on morphisms.
pub struct TwFunctor<'a, A, B, F: ?Sized> {
    pub source: &'a TwCategory<A>,
    pub target: &'a TwCategory<B>,
    pub obj_map: Vec<usize>,
    pub f: &'a F,
}

impl<A: AInfty, B: AInfty, F: Functor + ?Sized> Functor for TwFunctor<'_, A, B, F> {
    fn obj(&self, p: usize) -> usize {
        self.obj_map[p]
    }
    fn max_arity(&self) -> usize {
        self.f.max_arity()
    }
    fn comp(&self, args: &[Gen]) -> SparseVec {
        let v = self.source.functor_on_letters(self.target, &self.obj_map, self.f, args);
        if sigma(self.source, args) {
            vec_scale(self.source.ring(), &v, self.source.ring().int(-1))
        } else {
            v
        }
    }
}

/// Builds `Tw(f)`, matching each twisted complex of `source` with the first
/// object of `target` that is its image; `Err` names an object without one.
pub fn tw_functor<'a, A: AInfty, B: AInfty, F: Functor + ?Sized>(source: &'a TwCategory<A>, target: &'a TwCategory<B>, f: &'a F) -> Result<TwFunctor<'a, A, B, F>, String> {
    let obj_map = (0..source.num_objects())
        .map(|p| (0..target.num_objects()).find(|&q| source.functor_object_image(p, target, q, f)).ok_or_else(|| format!("no image of {} among the target twisted complexes", source.object_name(p))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TwFunctor { source, target, obj_map, f })
}

/// `g ∘ f` with components `Σ G(F ⊗ … ⊗ F)` in the shifted convention.
pub fn compose<A: AInfty + ?Sized, B: AInfty + ?Sized, F: Functor + ?Sized, G: Functor + ?Sized>(a: &A, b: &B, f: &F, g: &G) -> TableFunctor {
    let ring = a.ring();
    let arity = f.max_arity() * g.max_arity();
    let arity = arity.min(a.max_arity().max(f.max_arity()));
    let mut t = TableFunctor::new((0..a.num_objects()).map(|x| g.obj(f.obj(x))).collect(), arity);
    for l in 1..=arity {
        for tp in composable_tuples(a, l) {
            let mut acc = Accum::new(ring);
            for parts in compositions(l, f.max_arity()) {
                if parts.len() > g.max_arity() {
                    continue;
                }
                let elems = apply_parts(a, f, &tp, &parts);
                acc.add_vec(&expand_functor(b, g, &elems), Scalar::ONE);
            }
            let v = acc.finish();
            let v = if sigma(a, &tp) { vec_scale(ring, &v, ring.int(-1)) } else { v };
            t.set(&tp, v);
        }
    }
    t
}

/// Multilinear extension of the shifted components `G` to elements of `b`.
fn expand_functor<B: AInfty + ?Sized, G: Functor + ?Sized>(b: &B, g: &G, elems: &[Elem]) -> SparseVec {
    let ring = b.ring();
    let mut acc = Accum::new(ring);
    if elems.iter().any(Elem::is_zero) {
        return Vec::new();
    }
    let mut idx = vec![0usize; elems.len()];
    loop {
        let mut c = Scalar::ONE;
        let gens: Vec<Gen> = elems
            .iter()
            .enumerate()
            .map(|(j, e)| {
                let (i, x) = e.v[idx[j]];
                c = ring.mul(c, x);
                Gen::new(e.src, e.tgt, i)
            })
            .collect();
        acc.add_vec(&fb(b, g, &gens), c);
        let mut j = elems.len();
        loop {
            if j == 0 {
                return acc.finish();
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < elems[j].v.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Exact equality of two functors on all tuples up to `arity`.
pub fn functors_equal<A: AInfty + ?Sized, F: Functor + ?Sized, G: Functor + ?Sized>(a: &A, f: &F, g: &G, arity: usize) -> bool {
    (0..a.num_objects()).all(|x| f.obj(x) == g.obj(x)) && (1..=arity).all(|l| composable_tuples(a, l).iter().all(|t| f.comp(t) == g.comp(t)))
}

/// Unital: `f^1` sends each declared unit to a unit of the target.
pub fn is_unital_functor<B: AInfty + ?Sized, F: Functor + ?Sized>(b: &B, f: &F, units: &[(usize, Elem)]) -> bool {
    units.iter().all(|(x, e)| {
        let y = f.obj(*x);
        let img = Elem::new(y, y, expand_functor_std(b, f, e));
        ainfty::is_unit(b, y, &img).map(|v| v.is_unit).unwrap_or(false)
    })
}

fn expand_functor_std<B: AInfty + ?Sized, F: Functor + ?Sized>(_b: &B, f: &F, e: &Elem) -> SparseVec {
    let mut acc = Accum::new(_b.ring());
    for (g, c) in e.gens() {
        acc.add_vec(&f.comp(&[g]), c);
    }
    acc.finish()
}

/// Strictly unital: `f^1(u_X) = u_{fX}` and higher components vanish on any
/// tuple containing a unit.
pub fn is_strictly_unital_functor<A: AInfty + ?Sized, B: AInfty + ?Sized, F: Functor + ?Sized>(a: &A, b: &B, f: &F, src_units: &[(usize, Elem)], tgt_units: &HashMap<usize, Elem>) -> bool {
    let ring = a.ring();
    for (x, u) in src_units {
        let Some(v) = tgt_units.get(&f.obj(*x)) else { return false };
        if expand_functor_std(b, f, u) != v.v {
            return false;
        }
    }
    for l in 2..=f.max_arity() {
        for t in composable_tuples(a, l - 1) {
            let elems: Vec<Elem> = t.iter().map(|&g| Elem::basis(g)).collect();
            for (x, u) in src_units {
                for pos in 0..l {
                    let fits_left = pos == 0 || t[pos - 1].src == *x;
                    let fits_right = pos == l - 1 || t[pos].tgt == *x;
                    if !(fits_left && fits_right) {
                        continue;
                    }
                    let mut refs: Vec<&Elem> = elems.iter().collect();
                    refs.insert(pos, u);
                    let mut acc = Accum::new(ring);
                    let owned: Vec<Elem> = refs.iter().map(|e| (*e).clone()).collect();
                    multilinear(&owned, ring, &mut |gens, c| acc.add_vec(&f.comp(gens), c));
                    if !acc.finish().is_empty() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn multilinear(elems: &[Elem], ring: Ring, f: &mut dyn FnMut(&[Gen], Scalar)) {
    if elems.iter().any(Elem::is_zero) {
        return;
    }
    let mut idx = vec![0usize; elems.len()];
    let mut gens = vec![Gen::new(0, 0, 0); elems.len()];
    loop {
        let mut c = Scalar::ONE;
        for (j, e) in elems.iter().enumerate() {
            let (i, x) = e.v[idx[j]];
            gens[j] = Gen::new(e.src, e.tgt, i);
            c = ring.mul(c, x);
        }
        f(&gens, c);
        let mut j = elems.len();
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < elems[j].v.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// A basis element of the pre-natural transformations `f ⇒ g`: the
/// component on `tuple` (or the object component at `obj` when empty) takes
/// the value `out`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PreNatBasis {
    pub obj: usize,
    pub tuple: Vec<Gen>,
    pub out: usize,
}

/// The complex of pre-natural transformations with components of arity at
/// most `arity`, as the quotient by higher components.
pub struct FunComplex {
    pub arity: usize,
    pub basis: Vec<PreNatBasis>,
    pub hom: HomComplex,
    index: HashMap<PreNatBasis, usize>,
}

impl FunComplex {
    pub fn complex(&self) -> &CochainComplex {
        &self.hom.complex
    }

    pub fn find(&self, b: &PreNatBasis) -> Option<usize> {
        self.index.get(b).copied()
    }

    /// Number of basis elements with components of each arity.
    pub fn dims_by_arity(&self) -> Vec<usize> {
        let mut out = vec![0; self.arity + 1];
        for b in &self.basis {
            out[b.tuple.len()] += 1;
        }
        out
    }
}

/// Composable tuples of length `0..=arity`, the empty tuple standing once for
/// each object.
fn tuples_with_objects<A: AInfty + ?Sized>(a: &A, arity: usize) -> Vec<(usize, Vec<Gen>)> {
    let mut out: Vec<(usize, Vec<Gen>)> = (0..a.num_objects()).map(|x| (x, Vec::new())).collect();
    for l in 1..=arity {
        out.extend(composable_tuples(a, l).into_iter().map(|t| (t[l - 1].src, t)));
    }
    out
}

/// `hom(f, g)` in the A∞-category of functors `a → b`, truncated at `arity`.
/// In the shifted convention, `D T = Σ b(G…G, T, F…F) − (−1)^{‖T‖} Σ T(1 ⊗ b ⊗ 1)`
/// with Koszul signs.
pub fn fun_complex<A: AInfty + ?Sized, B: AInfty + ?Sized, F: Functor + ?Sized, G: Functor + ?Sized>(a: &A, b: &B, f: &F, g: &G, arity: usize) -> Result<FunComplex, AInftyError> {
    let ring = b.ring();
    let mut basis = Vec::new();
    let mut degrees = Vec::new();
    let rows = tuples_with_objects(a, arity);
    for (x, t) in &rows {
        let y = t.first().map_or(*x, |h| h.tgt);
        let (fx, gy) = (f.obj(*x), g.obj(y));
        let shift: i32 = t.iter().map(|&h| a.degree(h) - 1).sum();
        for out in 0..b.hom_dim(fx, gy) {
            basis.push(PreNatBasis { obj: *x, tuple: t.clone(), out });
            degrees.push(b.degree(Gen::new(fx, gy, out)) - shift);
        }
    }
    let index: HashMap<PreNatBasis, usize> = basis.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    // Row by row: the component of D T on each tuple, as triplets (row, column, coefficient).
    let triplets: Vec<Vec<(usize, usize, Scalar)>> = parallel::map(&rows, |(x, s)| {
        let mut trip = Vec::new();
        let n = s.len();
        let y = s.first().map_or(*x, |h| h.tgt);
        let (fx, gy) = (f.obj(*x), g.obj(y));
        let row = |out: usize| index[&PreNatBasis { obj: *x, tuple: s.clone(), out }];
        let red = |t: &[Gen]| t.iter().map(|&h| a.degree(h) as i64 - 1).sum::<i64>();
        for p in 0..=n {
            for q in p..=n {
                let block = &s[p..q];
                let bobj = if p < n { s[p].tgt } else if n > 0 { s[n - 1].src } else { *x };
                let (bsrc, btgt) = if block.is_empty() { (bobj, bobj) } else { (block[block.len() - 1].src, block[0].tgt) };
                let bsrc_obj = if q < n { s[q].tgt } else { *x };
                debug_assert_eq!(bsrc, bsrc_obj);
                let col_key = |out: usize| PreNatBasis { obj: bsrc, tuple: block.to_vec(), out };
                let left_sum = red(&s[..p]);
                for gparts in compositions(p, g.max_arity()) {
                    let gl = apply_parts(a, g, &s[..p], &gparts);
                    if gl.iter().any(Elem::is_zero) {
                        continue;
                    }
                    for fparts in compositions(n - q, f.max_arity()) {
                        if gparts.len() + 1 + fparts.len() > b.max_arity() {
                            continue;
                        }
                        let fl = apply_parts(a, f, &s[q..], &fparts);
                        if fl.iter().any(Elem::is_zero) {
                            continue;
                        }
                        let (ts, tt) = (f.obj(bsrc), g.obj(btgt));
                        for out in 0..b.hom_dim(ts, tt) {
                            let col = index[&col_key(out)];
                            let tdeg = b.degree(Gen::new(ts, tt, out)) as i64 - red(block) - 1;
                            let e = Elem::basis(Gen::new(ts, tt, out));
                            let mut args: Vec<&Elem> = gl.iter().collect();
                            args.push(&e);
                            args.extend(fl.iter());
                            let v = op_elems(b, &args, true);
                            let sign = ring.sign((tdeg * left_sum).rem_euclid(2) == 1);
                            for (r, c) in v.v {
                                trip.push((row(r), col, ring.mul(sign, c)));
                            }
                        }
                    }
                }
            }
        }
        for alpha in 0..n {
            let left = red(&s[..alpha]);
            for beta in 1..=(n - alpha).min(a.max_arity()) {
                let inner = a.bmu(&s[alpha..alpha + beta]);
                let (src, tgt) = (s[alpha + beta - 1].src, s[alpha].tgt);
                for (i, c) in inner {
                    let mut tup = s[..alpha].to_vec();
                    tup.push(Gen::new(src, tgt, i));
                    tup.extend_from_slice(&s[alpha + beta..]);
                    let rt = red(&tup);
                    for out in 0..b.hom_dim(fx, gy) {
                        let col = index[&PreNatBasis { obj: *x, tuple: tup.clone(), out }];
                        let tdeg = b.degree(Gen::new(fx, gy, out)) as i64 - rt - 1;
                        // −(−1)^{‖T‖} (−1)^{Σ_{j<α} ‖s_j‖}
                        let odd = (tdeg + left + 1).rem_euclid(2) == 1;
                        trip.push((row(out), col, ring.mul(ring.sign(odd), c)));
                    }
                }
            }
        }
        trip
    });
    let mut images: Vec<Accum> = (0..basis.len()).map(|_| Accum::new(ring)).collect();
    for (r, c, v) in triplets.into_iter().flatten() {
        images[c].add(r, v);
    }
    let images: Vec<SparseVec> = images.into_iter().map(Accum::finish).collect();
    let hom = complex_from_images(ring, 0, 0, &degrees, &images, None)?;
    Ok(FunComplex { arity, basis, hom, index })
}

/// Hochschild cochains `hom(id, id)` truncated at `arity`.
pub fn hochschild<A: AInfty + ?Sized>(a: &A, arity: usize) -> Result<FunComplex, AInftyError> {
    fun_complex(a, a, &Identity, &Identity, arity)
}

/// Whether a closed degree-0 transformation has object components that are
/// isomorphisms in `H^0(b)`, tested by Yoneda on every hom complex.
pub fn is_natural_equivalence<B: AInfty + ?Sized, F: Functor + ?Sized, G: Functor + ?Sized>(b: &B, fc: &FunComplex, f: &F, g: &G, t: &SparseVec, objects: usize) -> Result<bool, AInftyError> {
    for x in 0..objects {
        let (fx, gx) = (f.obj(x), g.obj(x));
        let comp: SparseVec = t.iter().filter_map(|&(i, c)| {
            let k = &fc.basis[i];
            (k.tuple.is_empty() && k.obj == x).then_some((k.out, c))
        }).collect();
        let mut comp = comp;
        comp.sort_unstable_by_key(|e| e.0);
        let e = Elem::new(fx, gx, comp);
        for w in 0..b.num_objects() {
            let m = ainfty::left_mult(b, &e, w)?;
            let (lo, hi) = (m.source.window().0.min(m.target.window().0) - 1, m.source.window().1.max(m.target.window().1) + 1);
            if !m.is_quasi_iso_in(lo, hi)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, Serialize)]
pub struct FunctorClasses {
    pub candidates: usize,
    pub functors: usize,
    /// Indices into `members` grouped by natural equivalence.
    pub classes: Vec<Vec<usize>>,
    #[serde(skip)]
    pub members: Vec<TableFunctor>,
}

/// Enumerates unital functors `a → b` whose components up to `arity` have
/// coefficients in the (finite) ground field, and groups them up to natural
/// equivalence. Refuses when more than `limit` candidates would be tried.
pub fn pi0_functor_classes(a: &TableCategory, b: &TableCategory, arity: usize, limit: u128) -> Result<FunctorClasses, String> {
    let ring = a.ring();
    let elems = ring.elements().ok_or_else(|| format!("functor enumeration needs a finite ground ring, not {}", ring.name()))?;
    let q = elems.len() as u128;
    let (na, nb) = (a.num_objects(), b.num_objects());
    let src_units: Vec<(usize, Elem)> = (0..na).map(|x| a.unit(x).map(|u| (x, u)).ok_or_else(|| format!("{} has no declared unit", a.object_name(x)))).collect::<Result<_, _>>()?;
    let tuples: Vec<Vec<Gen>> = (1..=arity).flat_map(|l| composable_tuples(a, l)).collect();
    let mut obj_maps: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..na {
        obj_maps = obj_maps.into_iter().flat_map(|m| (0..nb).map(move |y| [m.as_slice(), &[y]].concat())).collect();
    }
    let mut total: u128 = 0;
    let mut plans = Vec::new();
    for om in &obj_maps {
        let coords: Vec<(usize, usize)> = tuples
            .iter()
            .enumerate()
            .flat_map(|(ti, t)| {
                let (x, y) = (om[t[t.len() - 1].src], om[t[0].tgt]);
                let want = 1 - t.len() as i32 + t.iter().map(|&g| a.degree(g)).sum::<i32>();
                (0..b.hom_dim(x, y)).filter(move |&o| b.degree(Gen::new(x, y, o)) == want).map(move |o| (ti, o))
            })
            .collect();
        let n = q.checked_pow(coords.len() as u32).unwrap_or(u128::MAX);
        total = total.saturating_add(n);
        plans.push((om.clone(), coords));
    }
    if total > limit {
        return Err(format!("{total} candidate functors exceed the enumeration limit {limit}"));
    }
    let mut members = Vec::new();
    for (om, coords) in &plans {
        let n = q.pow(coords.len() as u32) as usize;
        let found: Vec<Option<TableFunctor>> = parallel::map_range(n, |mut code| {
            let mut f = TableFunctor::new(om.clone(), arity);
            let mut vals: HashMap<usize, SparseVec> = HashMap::new();
            for &(ti, o) in coords {
                let c = elems[code % elems.len()];
                code /= elems.len();
                if !c.is_zero() {
                    vals.entry(ti).or_default().push((o, c));
                }
            }
            for (ti, v) in vals {
                f.set(&tuples[ti], v);
            }
            let ok = check_functor(a, b, &f, 2 * arity + 1).passed && is_unital_functor(b, &f, &src_units);
            ok.then_some(f)
        });
        members.extend(found.into_iter().flatten());
    }
    let m = members.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(p: &mut [usize], i: usize) -> usize {
        if p[i] == i { i } else { let r = root(p, p[i]); p[i] = r; r }
    }
    for i in 0..m {
        for j in i + 1..m {
            if root(&mut parent, i) == root(&mut parent, j) {
                continue;
            }
            if naturally_equivalent(a, b, &members[i], &members[j], arity, limit)? {
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[rj] = ri;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for i in 0..m {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Ok(FunctorClasses { candidates: total as usize, functors: m, classes: groups.into_values().collect(), members })
}

/// Searches the closed degree-0 transformations `f ⇒ g` (arity-truncated) for
/// one with invertible object components.
pub fn naturally_equivalent(a: &TableCategory, b: &TableCategory, f: &TableFunctor, g: &TableFunctor, arity: usize, limit: u128) -> Result<bool, String> {
    let ring = a.ring();
    let elems = ring.elements().ok_or("finite ground ring required")?;
    let fc = fun_complex(a, b, f, g, arity).map_err(|e| e.to_string())?;
    let cx = fc.complex();
    let z = crate::coefficients::kernel_basis(ring, &cx.diff(0));
    let count = (elems.len() as u128).checked_pow(z.len() as u32).unwrap_or(u128::MAX);
    if count > limit {
        return Err(format!("{count} closed transformations exceed the enumeration limit {limit}"));
    }
    for mut code in 0..count as usize {
        let mut acc = Accum::new(ring);
        for v in &z {
            acc.add_vec(v, elems[code % elems.len()]);
            code /= elems.len();
        }
        let local = acc.finish();
        let t: SparseVec = local.iter().map(|&(p, c)| (fc.hom.index(0, p), c)).collect();
        if is_natural_equivalence(b, &fc, f, g, &t, a.num_objects()).map_err(|e| e.to_string())? {
            return Ok(true);
        }
    }
    Ok(false)
}

impl TableFunctor {
    /// Text form: `functor NAME`, `arity N`, one `object SRC TGT` line per
    /// source object and `comp LABELS : COMBINATION` lines (standard convention).
    pub fn to_text(&self, name: &str, a: &TableCategory, b: &TableCategory) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        writeln!(s, "functor {name}").unwrap();
        writeln!(s, "arity {}", self.max_arity).unwrap();
        for (x, &y) in self.obj_map.iter().enumerate() {
            writeln!(s, "object {} {}", a.object_name(x), b.object_name(y)).unwrap();
        }
        let mut comps: Vec<_> = self.comps.iter().collect();
        comps.sort_by(|p, q| (p.0.len(), p.0).cmp(&(q.0.len(), q.0)));
        for (args, v) in comps {
            let labels: Vec<String> = args.iter().map(|&g| a.label(g)).collect();
            let (x, y) = (self.obj_map[args[args.len() - 1].src], self.obj_map[args[0].tgt]);
            let terms: Vec<String> = v.iter().map(|&(i, c)| format!("{c}*{}", b.label(Gen::new(x, y, i)))).collect();
            writeln!(s, "comp {} : {}", labels.join(" "), terms.join(" + ")).unwrap();
        }
        s
    }

    pub fn from_text(text: &str, a: &TableCategory, b: &TableCategory) -> Result<Self, AInftyError> {
        let err = |line: usize, msg: &str| AInftyError::Parse { line, msg: msg.into() };
        let labels = |c: &TableCategory| {
            let mut m = HashMap::new();
            for x in 0..c.num_objects() {
                for y in 0..c.num_objects() {
                    for i in 0..c.hom_dim(x, y) {
                        m.insert(c.label(Gen::new(x, y, i)), Gen::new(x, y, i));
                    }
                }
            }
            m
        };
        let (la, lb) = (labels(a), labels(b));
        let mut arity = 1;
        let mut obj_map: Vec<Option<usize>> = vec![None; a.num_objects()];
        let mut comps: Vec<(usize, Vec<Gen>, String)> = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let ln = n + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (kw, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            match kw {
                "functor" => {}
                "arity" => arity = rest.parse().map_err(|_| err(ln, "bad arity"))?,
                "object" => {
                    let (x, y) = rest.split_once(' ').ok_or_else(|| err(ln, "expected: object SRC TGT"))?;
                    let x = a.find_object(x.trim()).ok_or_else(|| err(ln, "unknown source object"))?;
                    let y = b.find_object(y.trim()).ok_or_else(|| err(ln, "unknown target object"))?;
                    obj_map[x] = Some(y);
                }
                "comp" => {
                    let (lhs, rhs) = rest.split_once(" : ").ok_or_else(|| err(ln, "expected: comp LABELS : COMBINATION"))?;
                    let args: Vec<Gen> = lhs.split_whitespace().map(|l| la.get(l).copied().ok_or_else(|| err(ln, &format!("unknown label {l}")))).collect::<Result<_, _>>()?;
                    if args.is_empty() {
                        return Err(err(ln, "component without inputs"));
                    }
                    ainfty::check_composable(a, &args).map_err(|e| err(ln, &e.to_string()))?;
                    comps.push((ln, args, rhs.to_string()));
                }
                _ => return Err(err(ln, &format!("unknown keyword {kw}"))),
            }
        }
        let obj_map: Vec<usize> = obj_map.into_iter().enumerate().map(|(x, y)| y.ok_or_else(|| err(0, &format!("object {} is not mapped", a.object_name(x))))).collect::<Result<_, _>>()?;
        let mut f = TableFunctor::new(obj_map, arity);
        for (ln, args, rhs) in comps {
            if args.len() > arity {
                return Err(err(ln, "component above the declared arity"));
            }
            let hom = (f.obj_map[args[args.len() - 1].src], f.obj_map[args[0].tgt]);
            let v = ainfty::parse_combo(b.ring(), &rhs, &lb, hom).map_err(|m| err(ln, &m))?;
            f.set(&args, v);
        }
        Ok(f)
    }
}

/// Transfers the structure of `a` along the formal diffeomorphism with
/// `f^1 = id` and `f^2 = phi` (standard convention, degree −1, zero above):
/// returns `a'` on the same graded modules and the functor `a → a'`.
/// Operations are computed up to `arity`; `Err` reports a nonzero operation
/// at the top arity, where truncation would not be exact.
pub fn gauge_transform(a: &TableCategory, phi: &HashMap<Vec<Gen>, SparseVec>, arity: usize) -> Result<(TableCategory, TableFunctor), String> {
    let ring = a.ring();
    let mut f = TableFunctor::new((0..a.num_objects()).collect(), 2);
    for l in 1..=1 {
        for t in composable_tuples(a, l) {
            f.set(&t, vec![(t[0].idx, Scalar::ONE)]);
        }
    }
    for (k, v) in phi {
        assert_eq!(k.len(), 2);
        f.set(k, v.clone());
    }
    let mut out = ainfty::materialize(a, &format!("{}-gauged", a.name));
    out.set_max_arity(arity);
    // Clear and rebuild operations by increasing arity.
    for l in 1..=arity {
        for t in composable_tuples(a, l) {
            out.set_op_vec(&t, Vec::new());
        }
    }
    for n in 1..=arity {
        let tuples = composable_tuples(a, n);
        let vals: Vec<SparseVec> = parallel::map(&tuples, |t| {
            // b'_n(x) = Σ F(1 ⊗ b ⊗ 1)(x) − Σ_{r<n} b'_r(F ⊗ … ⊗ F)(x), all shifted.
            let mut acc = Accum::new(ring);
            for alpha in 0..n {
                let left: i64 = t[..alpha].iter().map(|&g| a.degree(g) as i64 - 1).sum();
                let sign = ring.sign(left.rem_euclid(2) == 1);
                for s in 1..=n - alpha {
                    if n - s + 1 > 2 {
                        continue;
                    }
                    let inner = a.bmu(&t[alpha..alpha + s]);
                    let (src, tgt) = (t[alpha + s - 1].src, t[alpha].tgt);
                    for (i, c) in inner {
                        let mut tup = t[..alpha].to_vec();
                        tup.push(Gen::new(src, tgt, i));
                        tup.extend_from_slice(&t[alpha + s..]);
                        acc.add_vec(&fb(a, &f, &tup), ring.mul(sign, c));
                    }
                }
            }
            for parts in compositions(n, 2) {
                if parts.len() >= n {
                    continue;
                }
                let elems = apply_parts(a, &f, t, &parts);
                let refs: Vec<&Elem> = elems.iter().collect();
                acc.add_vec(&op_elems(&out, &refs, true).v, ring.int(-1));
            }
            let b = acc.finish();
            if sigma(a, t) {
                vec_scale(ring, &b, ring.int(-1))
            } else {
                b
            }
        });
        if n == arity && vals.iter().any(|v| !v.is_empty()) {
            return Err(format!("transferred structure has nonzero operations of arity {n}"));
        }
        for (t, v) in tuples.into_iter().zip(vals) {
            out.set_op_vec(&t, v);
        }
    }
    out.validate().map_err(|e| e.to_string())?;
    Ok((out, f))
}

/// `contractible_ideal` transferred along `f^2(1,1) = β`, `f^2(γ,1) = 2β`:
/// an A∞-category with nonzero `m^3` whose unit `1` is not strict.
pub fn gauged_contractible_ideal(ring: Ring) -> TableCategory {
    let a = ainfty::examples::contractible_ideal(ring);
    let (one, beta, gamma) = (Gen::new(0, 0, 0), Gen::new(0, 0, 1), Gen::new(0, 0, 2));
    let mut phi = HashMap::new();
    phi.insert(vec![one, one], vec![(beta.idx, Scalar::ONE)]);
    phi.insert(vec![gamma, one], vec![(beta.idx, ring.int(2))]);
    let (mut b, _) = gauge_transform(&a, &phi, 6).expect("transfer terminates");
    b.name = "gauged-ideal".into();
    b.set_unit(0, vec![(one.idx, Scalar::ONE)]);
    b
}

/// The path category `0 → 1 → 2 → 3` on arrows `a, b, c` with an extra
/// closed arrow `h: 0 → 2` of degree −1, transferred along `f^2(b, a) = h`.
/// The units stay strict and `m^3(c, b, a) = ±c·h` is nonzero.
pub fn gauged_path(ring: Ring) -> TableCategory {
    let a = ainfty::examples::free_dg("path", ring, &["0", "1", "2", "3"], &[(0, 1, "a", 0), (1, 2, "b", 0), (2, 3, "c", 0), (0, 2, "h", -1)], &[]).expect("acyclic quiver");
    let (ga, gb, gh) = (a.find_gen(0, 1, "a").unwrap(), a.find_gen(1, 2, "b").unwrap(), a.find_gen(0, 2, "h").unwrap());
    let mut phi = HashMap::new();
    phi.insert(vec![gb, ga], vec![(gh.idx, Scalar::ONE)]);
    let (mut b, _) = gauge_transform(&a, &phi, 6).expect("transfer terminates");
    b.name = "gauged-path".into();
    for x in 0..a.num_objects() {
        b.set_unit(x, a.unit(x).unwrap().v);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::examples::*;
    use crate::ainfty::{augment, check_relations};

    #[test]
    fn identity_and_dg_functors() {
        for c in standard(Ring::PrimeField(3)) {
            assert!(check_functor(&c, &c, &Identity, 4).passed, "{}", c.name);
        }
        // Collapse k[1] → k: both objects to the single object.
        let a = poset(Ring::PrimeField(2), 1);
        let b = ground(Ring::PrimeField(2));
        let mut f = TableFunctor::new(vec![0, 0], 1);
        for t in composable_tuples(&a, 1) {
            f.set(&t, vec![(0, Scalar::ONE)]);
        }
        assert!(check_functor(&a, &b, &f, 3).passed);
        // Perturb f^1 off a cocycle.
        let r = z2_resolution(Ring::Integers);
        let mut g = TableFunctor::materialize(&r, &Identity);
        g.set(&[Gen::new(0, 0, 1)], vec![]);
        let rep = check_functor(&r, &r, &g, 3);
        assert!(!rep.passed);
        assert!(rep.failure.unwrap().starts_with("l = 1"));
    }

    #[test]
    fn augmentation_is_functorial() {
        let ring = Ring::PrimeField(3);
        let a = dual_numbers(ring, 0);
        let aa = augment(a.clone());
        let id = augment_functor(&aa, &aa, &Identity);
        assert!(functors_equal(&aa, &id, &Identity, 3));
        let mut scale = TableFunctor::materialize(&a, &Identity);
        scale.set(&[Gen::new(0, 0, 1)], vec![(1, ring.int(2))]);
        assert!(check_functor(&a, &a, &scale, 4).passed);
        let comp = compose(&a, &a, &scale, &scale);
        let lhs = augment_functor(&aa, &aa, &comp);
        let sp = augment_functor(&aa, &aa, &scale);
        let rhs = compose(&aa, &aa, &sp, &sp);
        assert!(functors_equal(&aa, &lhs, &rhs, 3));
        assert!(check_functor(&aa, &aa, &sp, 4).passed);
        let units = vec![(0, Elem::basis(aa.one(0)))];
        let tgt: HashMap<usize, Elem> = units.iter().cloned().collect();
        assert!(is_strictly_unital_functor(&aa, &aa, &sp, &units, &tgt));
        // The inclusion A → A⁺ does not hit 1_X.
        let ua = vec![(0, a.unit(0).unwrap())];
        assert!(!is_strictly_unital_functor(&a, &aa, &Inclusion, &ua, &tgt));
        assert!(is_unital_functor(&a, &Identity, &ua));
    }

    #[test]
    fn gauge_transfer_gives_ainfty_structures() {
        let ring = Ring::Rationals;
        let a = contractible_ideal(ring);
        let one = Gen::new(0, 0, 0);
        let beta = Gen::new(0, 0, 1);
        let gamma = Gen::new(0, 0, 2);
        let mut phi = HashMap::new();
        phi.insert(vec![one, one], vec![(beta.idx, Scalar::ONE)]);
        phi.insert(vec![gamma, one], vec![(beta.idx, ring.int(2))]);
        let (b, f) = gauge_transform(&a, &phi, 6).unwrap();
        assert!(check_relations(&b, 5, None).passed());
        assert!(check_functor(&a, &b, &f, 5).passed);
        assert!(b.ops().any(|(t, _)| t.len() == 3));
        let u = Elem::basis(one);
        assert!(!ainfty::is_strict_unit(&b, 0, &u));
        assert!(ainfty::is_unit(&b, 0, &u).unwrap().is_unit);
    }

    #[test]
    fn twisted_functors() {
        // A strict rescaling of the dual numbers and the gauge functor with
        // nonzero f^2, both on cones of the unit.
        let ring = Ring::PrimeField(5);
        let a = dual_numbers(ring, 0);
        let mut scale = TableFunctor::materialize(&a, &Identity);
        scale.set(&[Gen::new(0, 0, 1)], vec![(1, ring.int(3))]);
        let eps = Elem::basis(Gen::new(0, 0, 1));
        let ta = crate::twisted::with_cones(&a, &[a.unit(0).unwrap(), eps.clone()]).unwrap();
        let tb = crate::twisted::with_cones(&a, &[a.unit(0).unwrap(), eps.scale(ring, ring.int(3))]).unwrap();
        let tf = tw_functor(&ta, &tb, &scale).unwrap();
        assert_eq!(tf.obj_map, vec![0, 1, 2]);
        assert!(check_functor(&ta, &tb, &tf, 3).passed);
        assert!(tw_functor(&ta, &ta, &scale).is_err());

        let ring = Ring::Rationals;
        let c = contractible_ideal(ring);
        let mut phi = HashMap::new();
        phi.insert(vec![Gen::new(0, 0, 0), Gen::new(0, 0, 0)], vec![(1, Scalar::ONE)]);
        phi.insert(vec![Gen::new(0, 0, 2), Gen::new(0, 0, 0)], vec![(1, ring.int(2))]);
        let (g, f) = gauge_transform(&c, &phi, 6).unwrap();
        let one = Elem::basis(Gen::new(0, 0, 0));
        let gamma = Elem::basis(Gen::new(0, 0, 2));
        let tc = crate::twisted::with_cones(&c, &[one.clone(), gamma.clone()]).unwrap();
        let tg = crate::twisted::with_cones(&g, &[one, gamma]).unwrap();
        let tf = tw_functor(&tc, &tg, &f).unwrap();
        let rep = check_functor(&tc, &tg, &tf, 3);
        assert!(rep.passed, "{:?}", rep.failure);
    }

    /// Classical Hochschild cochains `Hom(A^{⊗n}, A)` of a one-object algebra
    /// concentrated in degree 0, from its multiplication table.
    fn classical_hochschild(ring: Ring, dim: usize, mul: &dyn Fn(usize, usize) -> SparseVec, top: usize) -> CochainComplex {
        let tuples = |n: usize| -> Vec<Vec<usize>> {
            let mut out = vec![Vec::new()];
            for _ in 0..n {
                out = out.into_iter().flat_map(|t| (0..dim).map(move |i| [t.as_slice(), &[i]].concat())).collect();
            }
            out
        };
        let mut pieces = std::collections::BTreeMap::new();
        for n in 0..=top {
            let src = tuples(n);
            let tgt = tuples(n + 1);
            let col = |t: &[usize], o: usize| t.iter().fold(0, |acc, &i| acc * dim + i) * dim + o;
            let mut trip = Vec::new();
            if n < top {
                // (δφ)(a_1, …, a_{n+1}) = a_1 φ(a_2, …) + Σ (−1)^i φ(…, a_i a_{i+1}, …) + (−1)^{n+1} φ(…, a_n) a_{n+1}
                for s in &tgt {
                    for o in 0..dim {
                        // φ = e_{(t, o)}: evaluate δφ on s at coordinate r.
                        let mut add = |t: &[usize], coef: Scalar, v: &SparseVec| {
                            for &(r, c) in v {
                                trip.push((col(s, r), col(t, o), ring.mul(coef, c)));
                            }
                        };
                        let one_hot = vec![(o, Scalar::ONE)];
                        let left: SparseVec = mul(s[0], o);
                        add(&s[1..], Scalar::ONE, &left);
                        for i in 0..n {
                            for (p, c) in mul(s[i], s[i + 1]) {
                                let mut t = s[..i].to_vec();
                                t.push(p);
                                t.extend_from_slice(&s[i + 2..]);
                                add(&t, ring.mul(ring.sign(i % 2 == 0), c), &one_hot);
                            }
                        }
                        let right: SparseVec = mul(o, s[n]);
                        add(&s[..n], ring.sign(n % 2 == 0), &right);
                    }
                }
            }
            let rows = if n < top { tgt.len() * dim } else { 0 };
            pieces.insert(n as i32, (src.len() * dim, crate::coefficients::SparseMatrix::from_triplets(ring, rows, src.len() * dim, trip)));
        }
        CochainComplex::from_degrees(ring, &pieces).unwrap()
    }

    #[test]
    fn hochschild_matches_classical_complex() {
        for ring in [Ring::PrimeField(2), Ring::PrimeField(3), Ring::Rationals] {
            let a = dual_numbers(ring, 0);
            let mul = |i: usize, j: usize| -> SparseVec {
                match (i, j) {
                    (0, k) | (k, 0) => vec![(k, Scalar::ONE)],
                    _ => Vec::new(),
                }
            };
            let oracle = classical_hochschild(ring, 2, &mul, 3);
            let hh = hochschild(&a, 3).unwrap();
            assert_eq!(hh.dims_by_arity(), vec![2, 4, 8, 16]);
            for d in 0..=3 {
                assert_eq!(hh.complex().dim(d), oracle.dim(d));
            }
            let (ours, theirs) = (hh.complex().cohomology_in(0, 3), oracle.cohomology_in(0, 3));
            for d in 0..=3 {
                assert!(ours[&d].same(&theirs[&d]), "{} H^{d}: {} vs {}", ring.name(), ours[&d], theirs[&d]);
            }
            assert_eq!(ours[&0].free, 2);
        }
        let k = ground(Ring::PrimeField(2));
        let hh = hochschild(&k, 3).unwrap();
        let g = hh.complex().cohomology_in(0, 2);
        assert_eq!((g[&0].free, g[&1].free, g[&2].free), (1, 0, 0));
    }

    #[test]
    fn transformation_complexes_square_to_zero() {
        let ring = Ring::Rationals;
        let c = contractible_ideal(ring);
        let mut phi = HashMap::new();
        phi.insert(vec![Gen::new(0, 0, 0), Gen::new(0, 0, 0)], vec![(1, Scalar::ONE)]);
        phi.insert(vec![Gen::new(0, 0, 2), Gen::new(0, 0, 0)], vec![(1, ring.int(2))]);
        let (g, f) = gauge_transform(&c, &phi, 6).unwrap();
        // d² = 0 is checked when the complex is assembled.
        for arity in 0..=3 {
            fun_complex(&c, &g, &f, &f, arity).unwrap();
            hochschild(&g, arity).unwrap();
        }
        let p = poset(Ring::PrimeField(3), 2);
        for arity in 0..=3 {
            fun_complex(&p, &p, &Identity, &Identity, arity).unwrap();
        }
    }

    #[test]
    fn functor_classes() {
        let f2 = Ring::PrimeField(2);
        let k = ground(f2);
        let one = pi0_functor_classes(&k, &k, 1, 1 << 16).unwrap();
        assert_eq!((one.functors, one.classes.len()), (1, 1));
        let a = poset(f2, 1);
        let two = pi0_functor_classes(&a, &k, 2, 1 << 16).unwrap();
        assert_eq!((two.functors, two.classes.len()), (2, 2));
        // Reflexivity through the identity transformation.
        for f in &two.members {
            assert!(naturally_equivalent(&a, &k, f, f, 2, 1 << 16).unwrap());
        }
        let big = poset(Ring::PrimeField(5), 3);
        assert!(pi0_functor_classes(&big, &big, 2, 1000).is_err());
        assert!(pi0_functor_classes(&contractible_ideal(Ring::Rationals), &k, 1, 10).is_err());
    }

    #[test]
    fn functor_text_round_trip() {
        let ring = Ring::PrimeField(5);
        let a = dual_numbers(ring, 0);
        let mut f = TableFunctor::materialize(&a, &Identity);
        f.set(&[Gen::new(0, 0, 1)], vec![(1, ring.int(3))]);
        let text = f.to_text("scale", &a, &a);
        let g = TableFunctor::from_text(&text, &a, &a).unwrap();
        assert_eq!(f, g);
        assert!(TableFunctor::from_text("functor x\ncomp nope : 1", &a, &a).is_err());
    }
}
