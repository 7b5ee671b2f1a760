//! Nerves of dg categories and strictly unital A∞-categories in low
//! dimensions, inner-horn filling, cores and their homotopy groups.
//!
//! An n-simplex is a list of objects `x_0, …, x_n` with a morphism
//! `f_I ∈ hom^{2-|I|}(x_{min I}, x_{max I})` for every `I ⊆ [n]`, `|I| ≥ 2`,
//! stored by bitmask. Writing `I = {i_0 < … < i_k}`, the dg nerve asks
//!
//! `m¹ f_I + Σ_j c(k, j) m²(f_{i_j…i_k}, f_{i_0…i_j}) - Σ_j (-1)^j f_{I∖i_j} = 0`
//!
//! for `0 < j < k`, with `c(k, j) = (-1)^{1+k+kj}`: `(-1)^j` for odd `k` and
//! `-1` for even `k`. The A∞ nerve cuts `I` into any number of consecutive
//! pieces. With `g_I = τ(k) f_I` it is the twisting-cochain equation
//! `Σ b^r(g_{I_r}, …, g_{I_1}) + Σ_j (-1)^{j+k} g_{I∖i_j} = 0`, multiplied by
//! `τ(k)`, where `τ(k) = (-1)^{(k+1)(k+2)/2 + 1}`. Both equations have the
//! form `m¹ f_I + (terms in smaller cells) = 0`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::ainfty::{composable_tuples, hom_complex, is_strict_unit, op_elems, show_vec, AInfty, AInftyError, Elem, Gen, TableCategory};
use crate::coefficients::{kernel_basis, solve_linear, span_contains_all, vec_add, vec_scale, LinalgError, Ring, Scalar, SparseMatrix, SparseVec};
use crate::complexes::Group;
use crate::parallel;

#[derive(Debug, Error)]
pub enum NerveError {
    #[error("object {0} has no strict unit")]
    NotStrictlyUnital(String),
    #[error("not a dg category: {0}")]
    NotDg(String),
    #[error("inconsistent horn: {0}")]
    Inconsistent(String),
    #[error("no filler for a horn of a nerve: {0}")]
    NoFiller(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("hom({0}, {1}) has torsion generators")]
    Torsion(String, String),
    #[error(transparent)]
    AInfty(#[from] AInftyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NerveKind {
    Dg,
    AInfty,
}

/// A simplex; `cells[mask]` is `f_I` for the subset with that bitmask and is
/// empty when `|I| < 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex {
    pub objects: Vec<usize>,
    pub cells: Vec<SparseVec>,
}

fn tau(k: usize) -> bool {
    ((k + 1) * (k + 2) / 2 + 1) % 2 == 1
}

/// Parity of `c(k, j)`, the sign of `m²(f_{i_j…i_k}, f_{i_0…i_j})` in the dg
/// equation for `|I| = k + 1`.
pub fn dg_composite_sign(k: usize, j: usize) -> bool {
    (1 + k + k * j) % 2 == 1
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

fn mask_of(ix: &[usize]) -> u32 {
    ix.iter().fold(0, |m, &b| m | 1 << b)
}

/// Masks of subsets of `[n]` with at least two elements, by size.
pub fn cell_masks(n: usize) -> Vec<u32> {
    let mut v: Vec<u32> = (0..1u32 << (n + 1)).filter(|m| m.count_ones() >= 2).collect();
    v.sort_by_key(|m| (m.count_ones(), *m));
    v
}

impl Simplex {
    pub fn empty(objects: Vec<usize>) -> Self {
        let n = objects.len();
        Simplex { objects, cells: vec![Vec::new(); 1 << n] }
    }

    pub fn vertex(x: usize) -> Self {
        Simplex::empty(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.objects.len() - 1
    }

    pub fn cell(&self, mask: u32) -> &SparseVec {
        &self.cells[mask as usize]
    }

    pub fn edge(&self, i: usize, j: usize) -> &SparseVec {
        self.cell(1 << i | 1 << j)
    }

    /// `d_i`: delete vertex `i`.
    pub fn face(&self, i: usize) -> Simplex {
        let mut objects = self.objects.clone();
        objects.remove(i);
        let mut out = Simplex::empty(objects);
        for m in cell_masks(out.dim()) {
            out.cells[m as usize] = self.cell(expand(m, i)).clone();
        }
        out
    }

    /// The simplex spanned by the given increasing vertex list.
    pub fn restrict(&self, verts: &[usize]) -> Simplex {
        let mut out = Simplex::empty(verts.iter().map(|&v| self.objects[v]).collect());
        for m in cell_masks(out.dim()) {
            let old: Vec<usize> = bits(m).into_iter().map(|b| verts[b]).collect();
            out.cells[m as usize] = self.cell(mask_of(&old)).clone();
        }
        out
    }
}

/// The mask over `[n]` of a mask over `[n] ∖ {i}` written in `[n-1]`.
fn expand(m: u32, i: usize) -> u32 {
    let low = m & ((1 << i) - 1);
    let high = m >> i << (i + 1);
    low | high
}

/// Inverse of `expand` for masks missing `i`.
fn compress(m: u32, i: usize) -> u32 {
    let low = m & ((1 << i) - 1);
    let high = m >> (i + 1) << i;
    low | high
}

/// Homogeneous pieces of a hom module.
#[derive(Clone, Debug)]
struct Slice {
    idx: Vec<usize>,
}

/// The nerve of a category, truncated at `dim_bound`, as a family with an
/// exact membership test.
pub struct Nerve<A> {
    a: A,
    kind: NerveKind,
    units: Vec<SparseVec>,
    dim_bound: usize,
    slices: HashMap<(usize, usize, i32), Slice>,
}

/// An inner horn: the faces `d_j` for `j ≠ missing`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Horn {
    pub n: usize,
    pub missing: usize,
    pub faces: Vec<Option<Simplex>>,
}

impl Horn {
    pub fn of(s: &Simplex, missing: usize) -> Horn {
        let n = s.dim();
        Horn { n, missing, faces: (0..=n).map(|j| (j != missing).then(|| s.face(j))).collect() }
    }
}

pub fn dg_nerve(a: &TableCategory, dim_bound: usize) -> Result<Nerve<&TableCategory>, NerveError> {
    Nerve::new(a, table_units(a)?, NerveKind::Dg, dim_bound)
}

pub fn ainfty_nerve(a: &TableCategory, dim_bound: usize) -> Result<Nerve<&TableCategory>, NerveError> {
    Nerve::new(a, table_units(a)?, NerveKind::AInfty, dim_bound)
}

fn table_units(a: &TableCategory) -> Result<Vec<SparseVec>, NerveError> {
    (0..a.num_objects()).map(|x| a.unit(x).map(|e| e.v).ok_or_else(|| NerveError::NotStrictlyUnital(a.object_name(x)))).collect()
}

/// Whether every operation of arity ≥ 3 vanishes.
pub fn is_dg<A: AInfty + ?Sized>(a: &A) -> Result<(), String> {
    for l in 3..=a.max_arity() {
        let tuples = composable_tuples(a, l);
        let bad = parallel::map(&tuples, |t| !a.mu(t).is_empty());
        if let Some(p) = bad.iter().position(|&b| b) {
            return Err(format!("m^{l} is nonzero on {}", crate::ainfty::show_tuple(a, &tuples[p])));
        }
    }
    Ok(())
}

impl<A: AInfty> Nerve<A> {
    pub fn new(a: A, units: Vec<SparseVec>, kind: NerveKind, dim_bound: usize) -> Result<Self, NerveError> {
        for x in 0..a.num_objects() {
            for y in 0..a.num_objects() {
                if (0..a.hom_dim(x, y)).any(|i| a.torsion(Gen::new(x, y, i)).is_some()) {
                    return Err(NerveError::Torsion(a.object_name(x), a.object_name(y)));
                }
            }
        }
        if units.len() != a.num_objects() {
            return Err(NerveError::NotStrictlyUnital("(unit list has the wrong length)".into()));
        }
        for (x, u) in units.iter().enumerate() {
            if !is_strict_unit(&a, x, &Elem::new(x, x, u.clone())) {
                return Err(NerveError::NotStrictlyUnital(a.object_name(x)));
            }
        }
        if kind == NerveKind::Dg {
            is_dg(&a).map_err(NerveError::NotDg)?;
        }
        let mut slices = HashMap::new();
        for x in 0..a.num_objects() {
            for y in 0..a.num_objects() {
                let mut by: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
                for i in 0..a.hom_dim(x, y) {
                    by.entry(a.degree(Gen::new(x, y, i))).or_default().push(i);
                }
                for (d, idx) in by {
                    slices.insert((x, y, d), Slice { idx });
                }
            }
        }
        Ok(Nerve { a, kind, units, dim_bound, slices })
    }

    pub fn category(&self) -> &A {
        &self.a
    }

    pub fn kind(&self) -> NerveKind {
        self.kind
    }

    pub fn dim_bound(&self) -> usize {
        self.dim_bound
    }

    pub fn ring(&self) -> Ring {
        self.a.ring()
    }

    fn slice(&self, x: usize, y: usize, d: i32) -> &[usize] {
        self.slices.get(&(x, y, d)).map_or(&[], |s| &s.idx)
    }

    fn elem(&self, s: &Simplex, mask: u32) -> Elem {
        let b = bits(mask);
        Elem::new(s.objects[b[0]], s.objects[*b.last().unwrap()], s.cell(mask).clone())
    }

    /// The left-hand side of the equation for `f_I`; zero exactly when the
    /// equation holds.
    pub fn residual(&self, s: &Simplex, mask: u32) -> SparseVec {
        match self.kind {
            NerveKind::Dg => self.residual_dg(s, mask),
            NerveKind::AInfty => self.residual_ainfty(s, mask),
        }
    }

    fn residual_dg(&self, s: &Simplex, mask: u32) -> SparseVec {
        let ring = self.ring();
        let ix = bits(mask);
        let k = ix.len() - 1;
        let f = |m: u32| self.elem(s, m);
        let mut out = op_elems(&self.a, &[&f(mask)], false).v;
        for j in 1..k {
            let prod = op_elems(&self.a, &[&f(mask_of(&ix[j..])), &f(mask_of(&ix[..=j]))], false).v;
            out = vec_add(ring, &out, &vec_scale(ring, &prod, ring.sign(dg_composite_sign(k, j))));
            out = vec_add(ring, &out, &vec_scale(ring, s.cell(mask & !(1 << ix[j])), ring.sign(j % 2 == 0)));
        }
        out
    }

    fn residual_ainfty(&self, s: &Simplex, mask: u32) -> SparseVec {
        let ring = self.ring();
        let ix = bits(mask);
        let k = ix.len() - 1;
        let g = |m: u32| {
            let e = self.elem(s, m);
            let t = ring.sign(tau(m.count_ones() as usize - 1));
            Elem::new(e.src, e.tgt, vec_scale(ring, &e.v, t))
        };
        let mut out: SparseVec = Vec::new();
        // Cut points are subsets of the inner positions 1..k.
        for cuts in 0u32..1 << (k - 1) {
            let mut ends = vec![0];
            ends.extend((1..k).filter(|j| cuts >> (j - 1) & 1 == 1));
            ends.push(k);
            let r = ends.len() - 1;
            if r > self.a.max_arity() {
                continue;
            }
            let pieces: Vec<Elem> = (0..r).rev().map(|p| g(mask_of(&ix[ends[p]..=ends[p + 1]]))).collect();
            let refs: Vec<&Elem> = pieces.iter().collect();
            out = vec_add(ring, &out, &op_elems(&self.a, &refs, true).v);
        }
        for j in 1..k {
            let m = mask & !(1 << ix[j]);
            out = vec_add(ring, &out, &vec_scale(ring, &g(m).v, ring.sign((j + k) % 2 == 1)));
        }
        vec_scale(ring, &out, ring.sign(tau(k)))
    }

    /// Membership test: objects in range, cells of the right degree, every
    /// equation satisfied.
    pub fn check(&self, s: &Simplex) -> Result<(), String> {
        let n = s.dim();
        if s.cells.len() != 1 << (n + 1) || s.objects.iter().any(|&x| x >= self.a.num_objects()) {
            return Err("malformed simplex".into());
        }
        for m in cell_masks(n) {
            let b = bits(m);
            let (x, y) = (s.objects[b[0]], s.objects[*b.last().unwrap()]);
            let d = 2 - b.len() as i32;
            if s.cell(m).iter().any(|&(i, _)| i >= self.a.hom_dim(x, y) || self.a.degree(Gen::new(x, y, i)) != d) {
                return Err(format!("cell {b:?} is not in hom^{d}"));
            }
        }
        for m in cell_masks(n) {
            if !self.residual(s, m).is_empty() {
                return Err(format!("equation for {:?} fails", bits(m)));
            }
        }
        Ok(())
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.check(s).is_ok()
    }

    /// `s_i`: repeat vertex `i`.
    pub fn degeneracy(&self, s: &Simplex, i: usize) -> Simplex {
        let mut objects = s.objects.clone();
        objects.insert(i + 1, s.objects[i]);
        let mut out = Simplex::empty(objects);
        let pair = 1u32 << i | 1 << (i + 1);
        for m in cell_masks(out.dim()) {
            out.cells[m as usize] = if m & pair == pair {
                if m == pair {
                    self.units[s.objects[i]].clone()
                } else {
                    Vec::new()
                }
            } else {
                s.cell(compress(m, i + 1) | if m >> (i + 1) & 1 == 1 { 1 << i } else { 0 }).clone()
            };
        }
        out
    }

    /// The affine system for the cells `unknowns` (given the rest of `base`)
    /// under the equations `eqs`: returns `(L, e0, vars)` with residuals
    /// `e0 + L·u`.
    fn affine(&self, base: &Simplex, unknowns: &[u32], eqs: &[u32]) -> (SparseMatrix, SparseVec, Vec<(u32, usize)>) {
        let ring = self.ring();
        let mut s = base.clone();
        for &m in unknowns {
            s.cells[m as usize] = Vec::new();
        }
        let mut vars = Vec::new();
        for &m in unknowns {
            let b = bits(m);
            let (x, y) = (s.objects[b[0]], s.objects[*b.last().unwrap()]);
            for &i in self.slice(x, y, 2 - b.len() as i32) {
                vars.push((m, i));
            }
        }
        let mut offsets = Vec::new();
        let mut rows = 0;
        for &m in eqs {
            let b = bits(m);
            offsets.push(rows);
            rows += self.a.hom_dim(s.objects[b[0]], s.objects[*b.last().unwrap()]);
        }
        let eval = |s: &Simplex| -> SparseVec {
            let mut v = Vec::new();
            for (e, &m) in eqs.iter().enumerate() {
                v.extend(self.residual(s, m).into_iter().map(|(i, c)| (i + offsets[e], c)));
            }
            v
        };
        let e0 = eval(&s);
        let cols = parallel::map(&vars, |&(m, i)| {
            let mut t = s.clone();
            t.cells[m as usize] = vec![(i, Scalar::ONE)];
            crate::coefficients::vec_sub(ring, &eval(&t), &e0)
        });
        (SparseMatrix::from_columns(rows, cols), e0, vars)
    }

    fn apply_solution(s: &mut Simplex, vars: &[(u32, usize)], u: &SparseVec) {
        for &(m, _) in vars {
            s.cells[m as usize] = Vec::new();
        }
        for &(j, c) in u {
            let (m, i) = vars[j];
            s.cells[m as usize].push((i, c));
        }
        for &(m, _) in vars {
            s.cells[m as usize].sort_unstable_by_key(|e| e.0);
        }
    }

    /// Solves for the given cells; `None` when the system has no solution.
    pub fn solve_cells(&self, base: &Simplex, unknowns: &[u32]) -> Result<Option<Simplex>, NerveError> {
        let ring = self.ring();
        let (l, e0, vars) = self.affine(base, unknowns, unknowns);
        let Some(u) = solve_linear(ring, &l, &vec_scale(ring, &e0, ring.int(-1)))? else { return Ok(None) };
        let mut s = base.clone();
        Self::apply_solution(&mut s, &vars, &u);
        Ok(Some(s))
    }

    /// Fills an inner horn, returning a simplex whose faces other than
    /// `d_missing` are the given ones.
    pub fn fill_inner_horn(&self, h: &Horn) -> Result<Simplex, NerveError> {
        self.fill_with(h, None)
    }

    /// Like `fill_inner_horn`, adding a random element of the solution space
    /// of the linear system for the two missing cells.
    pub fn fill_inner_horn_seeded(&self, h: &Horn, seed: u64) -> Result<Simplex, NerveError> {
        self.fill_with(h, Some(seed))
    }

    fn fill_with(&self, h: &Horn, seed: Option<u64>) -> Result<Simplex, NerveError> {
        let (n, i) = (h.n, h.missing);
        let bad = |m: String| Err(NerveError::Inconsistent(m));
        if n < 2 || i == 0 || i >= n || h.faces.len() != n + 1 {
            return bad(format!("Λ^{n}_{i} is not an inner horn"));
        }
        if h.faces[i].is_some() {
            return bad("the missing face is present".into());
        }
        let face = |j: usize| h.faces[j].as_ref();
        for j in (0..=n).filter(|&j| j != i) {
            match face(j) {
                Some(f) if f.dim() == n - 1 => {
                    if let Err(e) = self.check(f) {
                        return bad(format!("face {j}: {e}"));
                    }
                }
                _ => return bad(format!("face {j} is missing or has the wrong dimension")),
            }
        }
        let mut objects = vec![usize::MAX; n + 1];
        for j in (0..=n).filter(|&j| j != i) {
            let f = face(j).unwrap();
            for v in (0..=n).filter(|&v| v != j) {
                let o = f.objects[if v < j { v } else { v - 1 }];
                if objects[v] == usize::MAX {
                    objects[v] = o;
                } else if objects[v] != o {
                    return bad(format!("faces disagree on vertex {v}"));
                }
            }
        }
        for j in (0..=n).filter(|&j| j != i) {
            for k in (j + 1..=n).filter(|&k| k != i) {
                if face(j).unwrap().face(k - 1) != face(k).unwrap().face(j) {
                    return bad(format!("faces {j} and {k} do not match"));
                }
            }
        }
        let full = (1u32 << (n + 1)) - 1;
        let mut base = Simplex::empty(objects);
        for m in cell_masks(n) {
            if m == full || m == full & !(1 << i) {
                continue;
            }
            let j = (0..=n).find(|&j| j != i && m >> j & 1 == 0).unwrap();
            base.cells[m as usize] = face(j).unwrap().cell(compress(m, j)).clone();
        }
        let unknowns = [full & !(1 << i), full];
        let ring = self.ring();
        let (l, e0, vars) = self.affine(&base, &unknowns, &unknowns);
        let Some(mut u) = solve_linear(ring, &l, &vec_scale(ring, &e0, ring.int(-1)))? else {
            return Err(NerveError::NoFiller(format!("Λ^{n}_{i} on objects {:?}", base.objects)));
        };
        if let Some(seed) = seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for v in kernel_basis(ring, &l) {
                let c = ring.int(rng.random_range(-2..=2));
                u = vec_add(ring, &u, &vec_scale(ring, &v, c));
            }
        }
        Self::apply_solution(&mut base, &vars, &u);
        if let Err(e) = self.check(&base) {
            return Err(NerveError::NoFiller(format!("solution is not a simplex: {e}")));
        }
        Ok(base)
    }

    /// Every n-simplex, over a finite field, in a canonical order. Fails when
    /// there are more than `limit`.
    pub fn simplices(&self, n: usize, limit: usize) -> Result<Vec<Simplex>, NerveError> {
        let ring = self.ring();
        let Some(elements) = ring.elements() else {
            return Err(NerveError::Infeasible(format!("simplices cannot be enumerated over {}", ring.name())));
        };
        let k = self.a.num_objects();
        let tuples: Vec<Vec<usize>> = (0..k.pow(n as u32 + 1))
            .map(|mut c| {
                (0..=n)
                    .map(|_| {
                        let o = c % k;
                        c /= k;
                        o
                    })
                    .collect()
            })
            .collect();
        let masks = cell_masks(n);
        let per = parallel::map(&tuples, |objs| {
            let mut out = Vec::new();
            let ok = self.extend(Simplex::empty(objs.clone()), &masks, &elements, &mut out, limit);
            (out, ok)
        });
        let mut all = Vec::new();
        for (v, ok) in per {
            if !ok || all.len() + v.len() > limit {
                return Err(NerveError::Infeasible(format!("more than {limit} simplices of dimension {n}")));
            }
            all.extend(v);
        }
        all.sort();
        Ok(all)
    }

    fn extend(&self, s: Simplex, masks: &[u32], elements: &[Scalar], out: &mut Vec<Simplex>, limit: usize) -> bool {
        let Some((&m, rest)) = masks.split_first() else {
            out.push(s);
            return out.len() <= limit;
        };
        let ring = self.ring();
        let (l, e0, vars) = self.affine(&s, &[m], &[m]);
        let Ok(Some(p)) = solve_linear(ring, &l, &vec_scale(ring, &e0, ring.int(-1))) else { return true };
        let ker = kernel_basis(ring, &l);
        let q = elements.len();
        let count = q.checked_pow(ker.len() as u32).unwrap_or(usize::MAX);
        if count > limit {
            return false;
        }
        for mut c in 0..count {
            let mut u = p.clone();
            for v in &ker {
                u = vec_add(ring, &u, &vec_scale(ring, v, elements[c % q]));
                c /= q;
            }
            let mut t = s.clone();
            Self::apply_solution(&mut t, &vars, &u);
            if !self.extend(t, rest, elements, out, limit) {
                return false;
            }
        }
        true
    }

    /// All simplices up to the dimension bound with face and degeneracy
    /// indices.
    pub fn truncate(&self, limit: usize) -> Result<TruncatedSimplicialSet, NerveError> {
        let simplices = (0..=self.dim_bound).map(|n| self.simplices(n, limit)).collect::<Result<Vec<_>, _>>()?;
        Ok(TruncatedSimplicialSet::assemble(self.dim_bound, simplices, |s, i| self.degeneracy(s, i)))
    }

    /// Whether a closed degree-0 morphism `x → y` is invertible in `H⁰`.
    pub fn is_invertible(&self, x: usize, y: usize, f: &SparseVec) -> Result<bool, NerveError> {
        let ring = self.ring();
        let a = &self.a;
        let fe = Elem::new(x, y, f.clone());
        let g0 = self.slice(y, x, 0).to_vec();
        let hx = self.slice(x, x, -1).to_vec();
        let hy = self.slice(y, y, -1).to_vec();
        let (nx, ny, nyx) = (a.hom_dim(x, x), a.hom_dim(y, y), a.hom_dim(y, x));
        let mut cols = Vec::new();
        for &i in &g0 {
            let g = Elem::basis(Gen::new(y, x, i));
            let mut c = op_elems(a, &[&g, &fe], false).v;
            c.extend(op_elems(a, &[&fe, &g], false).v.into_iter().map(|(j, s)| (j + nx, s)));
            c.extend(op_elems(a, &[&g], false).v.into_iter().map(|(j, s)| (j + nx + ny, s)));
            cols.push(c);
        }
        for &i in &hx {
            cols.push(vec_scale(ring, &a.mu(&[Gen::new(x, x, i)]), ring.int(-1)));
        }
        for &i in &hy {
            let v = a.mu(&[Gen::new(y, y, i)]);
            cols.push(v.into_iter().map(|(j, s)| (j + nx, ring.neg(s))).collect());
        }
        let m = SparseMatrix::from_columns(nx + ny + nyx, cols);
        let mut rhs = self.units[x].clone();
        rhs.extend(self.units[y].iter().map(|&(j, s)| (j + nx, s)));
        Ok(solve_linear(ring, &m, &rhs)?.is_some())
    }

    /// The core: simplices all of whose edges are invertible in `H⁰`.
    pub fn core(&self, ts: &TruncatedSimplicialSet) -> Result<TruncatedSimplicialSet, NerveError> {
        let edges = ts.simplices.get(1).cloned().unwrap_or_default();
        let inv = parallel::map(&edges, |e| self.is_invertible(e.objects[0], e.objects[1], e.edge(0, 1)));
        let mut good = HashMap::new();
        for (e, r) in edges.iter().zip(inv) {
            good.insert(e.clone(), r?);
        }
        let keep = |s: &Simplex| (0..=s.dim()).all(|i| (i + 1..=s.dim()).all(|j| good[&s.restrict(&[i, j])]));
        let simplices = ts.simplices.iter().map(|v| v.iter().filter(|s| keep(s)).cloned().collect()).collect();
        Ok(TruncatedSimplicialSet::assemble(ts.dim_bound, simplices, |s, i| self.degeneracy(s, i)))
    }

    /// Text dump: per dimension, each simplex with its cells and face indices.
    pub fn dump(&self, ts: &TruncatedSimplicialSet) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "simplicial set, dimensions 0..={}", ts.dim_bound);
        for (n, v) in ts.simplices.iter().enumerate() {
            let _ = writeln!(out, "dim {n}: {} simplices", v.len());
            for (k, s) in v.iter().enumerate() {
                let names: Vec<String> = s.objects.iter().map(|&x| self.a.object_name(x)).collect();
                let _ = write!(out, "  [{k}] ({})", names.join(","));
                for m in cell_masks(n) {
                    let b = bits(m);
                    let (x, y) = (s.objects[b[0]], s.objects[*b.last().unwrap()]);
                    let label: String = b.iter().map(|d| d.to_string()).collect();
                    let _ = write!(out, " f{label}={}", show_vec(&self.a, x, y, s.cell(m)));
                }
                if n > 0 {
                    let _ = write!(out, " faces {:?}", ts.faces[n][k]);
                }
                out.push('\n');
            }
        }
        out
    }
}

/// A finite simplicial set truncated at `dim_bound`, with faces and
/// degeneracies stored as indices into the neighbouring dimensions.
#[derive(Clone, Debug)]
pub struct TruncatedSimplicialSet {
    pub dim_bound: usize,
    pub simplices: Vec<Vec<Simplex>>,
    /// `faces[n][k][i]` indexes `simplices[n-1]`; empty for `n = 0`.
    pub faces: Vec<Vec<Vec<usize>>>,
    /// `degeneracies[n][k][i]` indexes `simplices[n+1]`; empty at the top.
    pub degeneracies: Vec<Vec<Vec<usize>>>,
}

const MISSING: usize = usize::MAX;

impl TruncatedSimplicialSet {
    fn assemble(dim_bound: usize, simplices: Vec<Vec<Simplex>>, degen: impl Fn(&Simplex, usize) -> Simplex + Sync) -> Self {
        let index: Vec<HashMap<&Simplex, usize>> = simplices.iter().map(|v| v.iter().enumerate().map(|(i, s)| (s, i)).collect()).collect();
        let mut faces = vec![Vec::new()];
        let mut degeneracies = Vec::new();
        for n in 0..simplices.len() {
            if n > 0 {
                faces.push(simplices[n].iter().map(|s| (0..=n).map(|i| index[n - 1].get(&s.face(i)).copied().unwrap_or(MISSING)).collect()).collect());
            }
            degeneracies.push(if n + 1 < simplices.len() {
                simplices[n].iter().map(|s| (0..=n).map(|i| index[n + 1].get(&degen(s, i)).copied().unwrap_or(MISSING)).collect()).collect()
            } else {
                Vec::new()
            });
        }
        TruncatedSimplicialSet { dim_bound, simplices, faces, degeneracies }
    }

    pub fn counts(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    /// Closure under faces and degeneracies plus every simplicial identity,
    /// checked on the stored indices.
    pub fn verify_identities(&self) -> Result<(), String> {
        let top = self.simplices.len() - 1;
        for n in 0..=top {
            for k in 0..self.simplices[n].len() {
                let d = |i: usize| self.faces[n][k][i];
                let s = |i: usize| self.degeneracies[n][k][i];
                if n > 0 && (0..=n).any(|i| d(i) == MISSING) {
                    return Err(format!("a face of simplex {k} in dimension {n} is missing"));
                }
                if n < top && (0..=n).any(|i| s(i) == MISSING) {
                    return Err(format!("a degeneracy of simplex {k} in dimension {n} is missing"));
                }
                for i in 0..=n {
                    for j in i + 1..=n {
                        if n >= 2 && self.faces[n - 1][d(j)][i] != self.faces[n - 1][d(i)][j - 1] {
                            return Err(format!("d{i} d{j} ≠ d{} d{i} on simplex {k} in dimension {n}", j - 1));
                        }
                    }
                }
                if n + 1 > top {
                    continue;
                }
                for j in 0..=n {
                    for i in 0..=n + 1 {
                        let lhs = self.faces[n + 1][s(j)][i];
                        let rhs = if i < j {
                            self.degeneracies[n - 1][d(i)][j - 1]
                        } else if i == j || i == j + 1 {
                            k
                        } else {
                            self.degeneracies[n - 1][d(i - 1)][j]
                        };
                        if lhs != rhs {
                            return Err(format!("d{i} s{j} identity fails on simplex {k} in dimension {n}"));
                        }
                    }
                    if n + 2 <= top {
                        for i in 0..=j {
                            if self.degeneracies[n + 1][s(j)][i] != self.degeneracies[n + 1][s(i)][j + 1] {
                                return Err(format!("s{i} s{j} ≠ s{} s{i} on simplex {k} in dimension {n}", j + 1));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Vertex classes under the equivalence generated by edges.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let nv = self.simplices[0].len();
        let mut uf = UnionFind::new(nv);
        if self.simplices.len() > 1 {
            for f in &self.faces[1] {
                uf.union(f[0], f[1]);
            }
        }
        uf.classes()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Classes sorted by smallest member.
    fn classes(&mut self) -> Vec<Vec<usize>> {
        let mut by: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..self.parent.len() {
            let r = self.find(x);
            by.entry(r).or_default().push(x);
        }
        by.into_values().collect()
    }
}

/// π₀ of a core: objects grouped by invertible-edge reachability.
pub fn pi0_core(core: &TruncatedSimplicialSet) -> Vec<Vec<usize>> {
    core.components().into_iter().map(|c| c.into_iter().map(|v| core.simplices[0][v].objects[0]).collect()).collect()
}

/// A finite group given by its multiplication table.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteGroup {
    pub order: usize,
    pub identity: usize,
    pub table: Vec<Vec<usize>>,
    pub abelian: bool,
    /// Invariant factors when abelian, e.g. `[4]` for ℤ/4.
    pub invariant_factors: Option<Vec<usize>>,
}

impl FiniteGroup {
    /// Checks the axioms and derives the invariants.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, String> {
        let n = table.len();
        if table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err("table is not a closed binary operation".into());
        }
        let identity = (0..n).find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x)).ok_or("no identity")?;
        for a in 0..n {
            if !(0..n).any(|b| table[a][b] == identity && table[b][a] == identity) {
                return Err(format!("element {a} has no inverse"));
            }
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err("not associative".into());
                    }
                }
            }
        }
        let abelian = (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a]));
        let mut g = FiniteGroup { order: n, identity, table, abelian, invariant_factors: None };
        if abelian {
            g.invariant_factors = Some(g.abelian_invariants());
        }
        Ok(g)
    }

    fn power(&self, a: usize, k: usize) -> usize {
        (0..k).fold(self.identity, |x, _| self.table[x][a])
    }

    fn abelian_invariants(&self) -> Vec<usize> {
        let n = self.order;
        let mut primes = Vec::new();
        let mut m = n;
        let mut p = 2;
        while m > 1 {
            if m % p == 0 {
                primes.push(p);
                while m % p == 0 {
                    m /= p;
                }
            }
            p += 1;
        }
        // Cyclic p-primary factors: the number of factors of order ≥ p^k is
        // log_p |G[p^k]| − log_p |G[p^{k−1}]|.
        let mut factors: Vec<Vec<usize>> = Vec::new();
        for p in primes {
            let mut logs = vec![0usize];
            let mut pk = 1;
            loop {
                pk *= p;
                let c = (0..n).filter(|&a| self.power(a, pk) == self.identity).count();
                let l = (c as f64).log(p as f64).round() as usize;
                if l == *logs.last().unwrap() {
                    break;
                }
                logs.push(l);
            }
            let at_least: Vec<usize> = logs.windows(2).map(|w| w[1] - w[0]).collect();
            let mut mine = Vec::new();
            for (k, &cnt) in at_least.iter().enumerate() {
                let next = at_least.get(k + 1).copied().unwrap_or(0);
                for _ in 0..cnt - next {
                    mine.push(p.pow(k as u32 + 1));
                }
            }
            mine.sort_unstable_by(|a, b| b.cmp(a));
            factors.push(mine);
        }
        let len = factors.iter().map(Vec::len).max().unwrap_or(0);
        let mut out: Vec<usize> = (0..len).map(|i| factors.iter().map(|f| f.get(i).copied().unwrap_or(1)).product()).collect();
        out.reverse();
        out
    }

    pub fn describe(&self) -> String {
        match &self.invariant_factors {
            Some(f) if f.is_empty() => "trivial".into(),
            Some(f) => f.iter().map(|d| format!("Z/{d}")).collect::<Vec<_>>().join(" x "),
            None => format!("non-abelian of order {}", self.order),
        }
    }
}

/// π₁ of a core at an object: loops modulo 2-simplices with a degenerate
/// edge, multiplied along 2-simplices. `reps` holds one loop per class.
#[derive(Clone, Debug)]
pub struct LoopGroup {
    pub group: FiniteGroup,
    pub reps: Vec<SparseVec>,
}

pub fn pi1_core(core: &TruncatedSimplicialSet, x: usize) -> Result<LoopGroup, String> {
    if core.simplices.len() < 3 {
        return Err("π₁ needs 2-simplices".into());
    }
    let v = core.simplices[0].iter().position(|s| s.objects[0] == x).ok_or("object is not in the core")?;
    let loops: Vec<usize> = (0..core.simplices[1].len()).filter(|&e| core.faces[1][e] == [v, v]).collect();
    let pos: HashMap<usize, usize> = loops.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let id = core.degeneracies[0][v][0];
    let tri: Vec<[usize; 3]> = core.faces[2].iter().filter(|f| f.iter().all(|e| pos.contains_key(e))).map(|f| [pos[&f[0]], pos[&f[1]], pos[&f[2]]]).collect();
    let mut uf = UnionFind::new(loops.len());
    for t in &tri {
        if loops[t[0]] == id {
            uf.union(t[1], t[2]);
        }
    }
    let classes = uf.classes();
    let mut class_of = vec![0; loops.len()];
    for (c, members) in classes.iter().enumerate() {
        for &m in members {
            class_of[m] = c;
        }
    }
    let n = classes.len();
    let mut table = vec![vec![MISSING; n]; n];
    for t in &tri {
        let (a, b, c) = (class_of[t[0]], class_of[t[2]], class_of[t[1]]);
        if table[a][b] == MISSING {
            table[a][b] = c;
        } else if table[a][b] != c {
            return Err("composition of loop classes is not well defined".into());
        }
    }
    let group = FiniteGroup::new(table)?;
    let reps = classes.iter().map(|c| core.simplices[1][loops[c[0]]].edge(0, 1).clone()).collect();
    Ok(LoopGroup { group, reps })
}

/// `H⁰ hom(x, y)` over a finite field as explicit classes of cocycles.
struct H0Classes {
    reps: Vec<SparseVec>,
}

impl<A: AInfty> Nerve<A> {
    fn z0_elements(&self, x: usize, y: usize, limit: usize) -> Result<Vec<SparseVec>, NerveError> {
        let ring = self.ring();
        let elements = ring.elements().ok_or_else(|| NerveError::Infeasible("enumeration needs a finite field".into()))?;
        let idx = self.slice(x, y, 0).to_vec();
        let cols: Vec<SparseVec> = idx.iter().map(|&i| self.a.mu(&[Gen::new(x, y, i)])).collect();
        let m = SparseMatrix::from_columns(self.a.hom_dim(x, y), cols);
        let ker = kernel_basis(ring, &m);
        let q = elements.len();
        let count = q.checked_pow(ker.len() as u32).filter(|&c| c <= limit).ok_or_else(|| NerveError::Infeasible(format!("Z⁰ has more than {limit} elements")))?;
        Ok((0..count)
            .map(|mut c| {
                let mut v = Vec::new();
                for k in &ker {
                    v = vec_add(ring, &v, &vec_scale(ring, k, elements[c % q]));
                    c /= q;
                }
                v.into_iter().map(|(p, s)| (idx[p], s)).collect()
            })
            .collect())
    }

    fn coboundaries(&self, x: usize, y: usize, d: i32) -> SparseMatrix {
        let cols = self.slice(x, y, d - 1).iter().map(|&i| self.a.mu(&[Gen::new(x, y, i)])).collect();
        SparseMatrix::from_columns(self.a.hom_dim(x, y), cols)
    }

    fn cohomologous(&self, b: &SparseMatrix, u: &SparseVec, v: &SparseVec) -> bool {
        let ring = self.ring();
        span_contains_all(ring, b, &[crate::coefficients::vec_sub(ring, u, v)])
    }

    fn h0_classes(&self, x: usize, y: usize, limit: usize) -> Result<H0Classes, NerveError> {
        let b = self.coboundaries(x, y, 0);
        let mut reps: Vec<SparseVec> = Vec::new();
        for z in self.z0_elements(x, y, limit)? {
            if !reps.iter().any(|r| self.cohomologous(&b, r, &z)) {
                reps.push(z);
            }
        }
        Ok(H0Classes { reps })
    }

    fn class_index(&self, h: &H0Classes, b: &SparseMatrix, v: &SparseVec) -> Option<usize> {
        h.reps.iter().position(|r| self.cohomologous(b, r, v))
    }

    fn compose(&self, x: usize, y: usize, z: usize, g: &SparseVec, f: &SparseVec) -> SparseVec {
        op_elems(&self.a, &[&Elem::new(y, z, g.clone()), &Elem::new(x, y, f.clone())], false).v
    }

    /// `(H⁰ hom(x, x))^×` by enumeration, with the class representatives.
    pub fn unit_group(&self, x: usize, limit: usize) -> Result<LoopGroup, NerveError> {
        let h = self.h0_classes(x, x, limit)?;
        let b = self.coboundaries(x, x, 0);
        let one = self.class_index(&h, &b, &self.units[x]).ok_or_else(|| NerveError::Infeasible("unit is not a cocycle".into()))?;
        let n = h.reps.len();
        let mut mult = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let p = self.compose(x, x, x, &h.reps[i], &h.reps[j]);
                mult[i][j] = self.class_index(&h, &b, &p).expect("H⁰ is closed under composition");
            }
        }
        let units: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| mult[i][j] == one && mult[j][i] == one)).collect();
        let pos: HashMap<usize, usize> = units.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let table = units.iter().map(|&i| units.iter().map(|&j| pos[&mult[i][j]]).collect()).collect();
        let group = FiniteGroup::new(table).map_err(NerveError::Infeasible)?;
        Ok(LoopGroup { group, reps: units.iter().map(|&i| h.reps[i].clone()).collect() })
    }

    /// Compares π₁ of the core at `x` with `(H⁰ hom(x, x))^×` through the map
    /// sending a loop to its class: checks that it is a bijective
    /// homomorphism.
    pub fn compare_pi1(&self, loops: &LoopGroup, x: usize, limit: usize) -> Result<bool, NerveError> {
        let units = self.unit_group(x, limit)?;
        let b = self.coboundaries(x, x, 0);
        let h = H0Classes { reps: units.reps.clone() };
        let image: Vec<Option<usize>> = loops.reps.iter().map(|r| self.class_index(&h, &b, r)).collect();
        let Some(image) = image.into_iter().collect::<Option<Vec<usize>>>() else { return Ok(false) };
        let mut seen = image.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != image.len() || image.len() != units.group.order {
            return Ok(false);
        }
        let n = image.len();
        Ok((0..n).all(|a| (0..n).all(|c| image[loops.group.table[a][c]] == units.group.table[image[a]][image[c]])))
    }

    /// Objects grouped into isomorphism classes of the `H⁰` category, by
    /// enumerating pairs of classes whose composites are the units.
    pub fn h0_iso_classes(&self, limit: usize) -> Result<Vec<Vec<usize>>, NerveError> {
        let k = self.a.num_objects();
        let mut uf = UnionFind::new(k);
        for x in 0..k {
            for y in x + 1..k {
                let hxy = self.h0_classes(x, y, limit)?;
                let hyx = self.h0_classes(y, x, limit)?;
                let (bx, by) = (self.coboundaries(x, x, 0), self.coboundaries(y, y, 0));
                let iso = hxy.reps.iter().any(|f| {
                    hyx.reps.iter().any(|g| {
                        self.cohomologous(&bx, &self.compose(x, y, x, g, f), &self.units[x]) && self.cohomologous(&by, &self.compose(y, x, y, f, g), &self.units[y])
                    })
                });
                if iso {
                    uf.union(x, y);
                }
            }
        }
        Ok(uf.classes())
    }

    /// π_i of the mapping space `hom(x, y)` of the nerve, `i ≤ 2`: from the
    /// cohomology `H^{-i}` and, for `i ≤ 1` over a finite field, by counting
    /// vertices or loops of the mapping space modulo the simplices that
    /// identify them.
    pub fn pi_vs_cohomology(&self, x: usize, y: usize, max_i: usize, limit: usize) -> Result<Vec<PiRow>, NerveError> {
        let hc = hom_complex(&self.a, x, y)?;
        let mut rows = Vec::new();
        for i in 0..=max_i.min(2) {
            let d = -(i as i32);
            let group = hc.complex.cohomology_in(d, d)[&d].clone();
            let (enumerated, note) = if i > 1 {
                (None, Some("enumeration only for i ≤ 1".to_string()))
            } else if self.ring().elements().is_none() {
                (None, Some(format!("enumeration skipped over {}", self.ring().name())))
            } else {
                match self.count_mapping_classes(x, y, i, limit) {
                    Ok(c) => (Some(c), None),
                    Err(NerveError::Infeasible(m)) => (None, Some(m)),
                    Err(e) => return Err(e),
                }
            };
            let agree = enumerated.map(|c| group.order() == Some(c as u64));
            rows.push(PiRow { i, cohomology: group.to_string(), group, enumerated, agree, note });
        }
        Ok(rows)
    }

    fn count_mapping_classes(&self, x: usize, y: usize, i: usize, limit: usize) -> Result<usize, NerveError> {
        let one = self.units[x].clone();
        let (items, template, unknown, pair): (Vec<SparseVec>, Simplex, u32, [u32; 2]) = if i == 0 {
            // 2-simplices (x, x, y) with f01 = 1 relate f02 and f12.
            let z = self.z0_elements(x, y, limit)?;
            let mut t = Simplex::empty(vec![x, x, y]);
            t.cells[0b011] = one;
            (z, t, 0b111, [0b101, 0b110])
        } else {
            // Loops at the zero map are the cells f012 of (x, x, y); 3-simplices
            // (x, x, x, y) with constant d0 relate f013 and f023.
            let e = self.elements_of_degree(x, y, -1, limit)?;
            let mut probe = Simplex::empty(vec![x, x, y]);
            probe.cells[0b011] = one.clone();
            let loops: Vec<SparseVec> = e
                .into_iter()
                .filter(|z| {
                    probe.cells[0b111] = z.clone();
                    self.contains(&probe)
                })
                .collect();
            let mut t = Simplex::empty(vec![x, x, x, y]);
            for m in [0b0011, 0b0110, 0b0101] {
                t.cells[m] = one.clone();
            }
            (loops, t, 0b1111, [0b1011, 0b1101])
        };
        if items.len() > 4096 {
            return Err(NerveError::Infeasible(format!("{} candidates", items.len())));
        }
        let pairs: Vec<(usize, usize)> = (0..items.len()).flat_map(|a| (a + 1..items.len()).map(move |b| (a, b))).collect();
        let related = parallel::map(&pairs, |&(a, b)| {
            let mut t = template.clone();
            t.cells[pair[0] as usize] = items[a].clone();
            t.cells[pair[1] as usize] = items[b].clone();
            matches!(self.solve_cells(&t, &[unknown]), Ok(Some(s)) if self.contains(&s))
        });
        let mut uf = UnionFind::new(items.len());
        for (&(a, b), r) in pairs.iter().zip(related) {
            if r {
                uf.union(a, b);
            }
        }
        Ok(uf.classes().len())
    }

    fn elements_of_degree(&self, x: usize, y: usize, d: i32, limit: usize) -> Result<Vec<SparseVec>, NerveError> {
        let ring = self.ring();
        let elements = ring.elements().ok_or_else(|| NerveError::Infeasible("enumeration needs a finite field".into()))?;
        let idx = self.slice(x, y, d).to_vec();
        let q = elements.len();
        let count = q.checked_pow(idx.len() as u32).filter(|&c| c <= limit).ok_or_else(|| NerveError::Infeasible(format!("hom^{d} has more than {limit} elements")))?;
        Ok((0..count)
            .map(|mut c| {
                let mut v = Vec::new();
                for &i in &idx {
                    let s = elements[c % q];
                    c /= q;
                    if !s.is_zero() {
                        v.push((i, s));
                    }
                }
                v
            })
            .collect())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PiRow {
    pub i: usize,
    pub cohomology: String,
    pub group: Group,
    pub enumerated: Option<usize>,
    pub agree: Option<bool>,
    pub note: Option<String>,
}

/// Result of comparing the dg and A∞ nerves of a dg category.
#[derive(Clone, Debug, Serialize)]
pub struct NerveComparison {
    pub dim: usize,
    /// Equations compared on random cell data, per dimension.
    pub residual_checks: usize,
    pub residuals_equal: bool,
    /// Simplex counts per dimension when enumerable.
    pub counts: Option<Vec<usize>>,
    pub simplices_equal: Option<bool>,
}

impl NerveComparison {
    pub fn identical(&self) -> bool {
        self.residuals_equal && self.simplices_equal != Some(false)
    }
}

/// Compares the two nerves of a dg category up to dimension `dim`: the
/// equations agree on random cell data for every object tuple, and over a
/// finite field the enumerated simplices coincide.
pub fn compare_nerves(a: &TableCategory, dim: usize, samples: usize, seed: u64, limit: usize) -> Result<NerveComparison, NerveError> {
    let dg = dg_nerve(a, dim)?;
    let ai = ainfty_nerve(a, dim)?;
    let ring = a.ring();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = a.num_objects();
    let mut checks = 0;
    let mut equal = true;
    for n in 1..=dim {
        for _ in 0..samples {
            let objs: Vec<usize> = (0..=n).map(|_| rng.random_range(0..k)).collect();
            let mut s = Simplex::empty(objs);
            for m in cell_masks(n) {
                let b = bits(m);
                let (x, y) = (s.objects[b[0]], s.objects[*b.last().unwrap()]);
                s.cells[m as usize] = dg.slice(x, y, 2 - b.len() as i32).iter().map(|&i| (i, ring.int(rng.random_range(-3..=3)))).filter(|e| !e.1.is_zero()).collect();
            }
            for m in cell_masks(n) {
                checks += 1;
                if dg.residual(&s, m) != ai.residual(&s, m) {
                    equal = false;
                }
            }
        }
    }
    let (counts, simplices_equal) = if ring.elements().is_some() {
        let mut counts = Vec::new();
        let mut same = true;
        for n in 0..=dim {
            let p = dg.simplices(n, limit)?;
            let q = ai.simplices(n, limit)?;
            counts.push(p.len());
            same &= p == q;
        }
        (Some(counts), Some(same))
    } else {
        (None, None)
    };
    Ok(NerveComparison { dim, residual_checks: checks, residuals_equal: equal, counts, simplices_equal })
}

/// Inner horns of dimension `n` built from simplices of the set: for `n = 2`
/// every composable pair of edges, for `n = 3` every compatible triple of
/// 2-simplices.
pub fn inner_horns(ts: &TruncatedSimplicialSet, n: usize) -> Vec<Horn> {
    let mut out = Vec::new();
    if n == 2 {
        let e = &ts.simplices[1];
        for a in e {
            for b in e {
                if a.objects[1] == b.objects[0] {
                    out.push(Horn { n: 2, missing: 1, faces: vec![Some(b.clone()), None, Some(a.clone())] });
                }
            }
        }
    } else if n == 3 {
        let t = &ts.simplices[2];
        // by_face[p][σ] lists the 2-simplices whose face d_p is σ.
        let mut by_face: Vec<HashMap<Simplex, Vec<usize>>> = vec![HashMap::new(); 3];
        for (k, s) in t.iter().enumerate() {
            for (p, m) in by_face.iter_mut().enumerate() {
                m.entry(s.face(p)).or_default().push(k);
            }
        }
        let none = Vec::new();
        for missing in [1usize, 2] {
            let [j0, j1, j2]: [usize; 3] = (0..4).filter(|&j| j != missing).collect::<Vec<_>>().try_into().unwrap();
            for a in t {
                for &b in by_face[j0].get(&a.face(j1 - 1)).unwrap_or(&none) {
                    let b = &t[b];
                    for &c in by_face[j0].get(&a.face(j2 - 1)).unwrap_or(&none) {
                        let c = &t[c];
                        if c.face(j1) == b.face(j2 - 1) {
                            let mut faces = vec![None; 4];
                            faces[j0] = Some(a.clone());
                            faces[j1] = Some(b.clone());
                            faces[j2] = Some(c.clone());
                            out.push(Horn { n: 3, missing, faces });
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fills every horn; returns the number filled or the first failure.
pub fn fill_all<A: AInfty>(nerve: &Nerve<A>, horns: &[Horn]) -> Result<usize, String> {
    let res = parallel::map(horns, |h| nerve.fill_inner_horn(h).map(|s| Horn::of(&s, h.missing) == *h));
    for (h, r) in horns.iter().zip(res) {
        match r {
            Ok(true) => {}
            Ok(false) => return Err(format!("filler of Λ^{}_{} does not restrict to the horn", h.n, h.missing)),
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(horns.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfty::check_relations;
    use crate::ainfty::examples::*;
    use crate::functors::{gauged_contractible_ideal, gauged_path};

    fn f(ring: Ring, i: usize, c: i64) -> SparseVec {
        vec![(i, ring.int(c))]
    }

    #[test]
    fn monoid_nerve_of_ground_field() {
        let ring = Ring::PrimeField(5);
        let k = ground(ring);
        let n = dg_nerve(&k, 3).unwrap();
        let ts = n.truncate(1000).unwrap();
        assert_eq!(ts.counts(), vec![1, 5, 25, 125]);
        for s in &ts.simplices[2] {
            let prod = ring.mul(vec_get0(s.edge(1, 2)), vec_get0(s.edge(0, 1)));
            assert_eq!(vec_get0(s.edge(0, 2)), prod);
        }
        ts.verify_identities().unwrap();
    }

    fn vec_get0(v: &SparseVec) -> Scalar {
        crate::coefficients::vec_get(v, 0)
    }

    #[test]
    fn poset_nerve_and_core() {
        let ring = Ring::PrimeField(2);
        let c = poset(ring, 1);
        let n = dg_nerve(&c, 3).unwrap();
        let ts = n.truncate(10_000).unwrap();
        // Edges: Z⁰ of hom(0,0), hom(1,1), hom(0,1) (two each) and the zero map 1 → 0.
        assert_eq!(ts.counts()[..2], [2, 7]);
        ts.verify_identities().unwrap();
        let core = n.core(&ts).unwrap();
        core.verify_identities().unwrap();
        assert_eq!(core.counts()[..2], [2, 2]);
        assert_eq!(pi0_core(&core), vec![vec![0], vec![1]]);
        let dump = n.dump(&ts);
        assert!(dump.starts_with("simplicial set, dimensions 0..=3\ndim 0: 2 simplices\n"));
        assert!(dump.contains("faces [1, 0]"));
    }

    #[test]
    fn hand_computed_low_simplices() {
        // ℤ·ε → ℤ·1 with dε = 2. A 2-simplex with f01 = f12 = 1 and f02 = 3
        // needs dε-multiples: m¹ f012 = f12·f01 − f02 = −2, so f012 = −ε.
        let ring = Ring::Integers;
        let c = z2_resolution(ring);
        let n = dg_nerve(&c, 3).unwrap();
        let mut s = Simplex::empty(vec![0, 0, 0]);
        s.cells[0b011] = f(ring, 0, 1);
        s.cells[0b110] = f(ring, 0, 1);
        s.cells[0b101] = f(ring, 0, 3);
        s.cells[0b111] = f(ring, 1, -1);
        assert!(n.contains(&s));
        s.cells[0b111] = f(ring, 1, 1);
        assert!(!n.contains(&s));
        s.cells[0b101] = f(ring, 0, 2);
        assert!(n.solve_cells(&s, &[0b111]).unwrap().is_none());
        // Degree 3: hom^{-2} = 0, so f023 − f013 − f123·f01 + f23·f012 = 0.
        // Edges f01 = 1, f12 = 3, f23 = 1, f02 = 1, f13 = 1, f03 = 5 force
        // f012 = ε, f123 = ε, f013 = −2ε, f023 = −2ε, and then
        // −ε − 2ε + ε + 2ε = 0.
        let mut t = Simplex::empty(vec![0; 4]);
        for (m, k) in [(0b0011, 1), (0b0110, 3), (0b1100, 1), (0b0101, 1), (0b1010, 1), (0b1001, 5)] {
            t.cells[m] = f(ring, 0, k);
        }
        for (m, k) in [(0b0111, 1), (0b1110, 1), (0b1011, -2), (0b1101, -2)] {
            t.cells[m] = f(ring, 1, k);
        }
        n.check(&t).unwrap();
        t.cells[0b1011] = f(ring, 1, 2);
        assert!(n.check(&t.face(2)).is_err());
    }

    /// The free dg category on the cells of the n-simplex with the nerve
    /// differential; it exists exactly when the sign table is consistent.
    fn universal_simplex(n: usize, sign: impl Fn(usize, usize) -> bool) -> Result<TableCategory, AInftyError> {
        let masks = cell_masks(n);
        let names: Vec<String> = masks.iter().map(|&m| format!("f{}", bits(m).iter().map(|b| b.to_string()).collect::<String>())).collect();
        let arrows: Vec<crate::ainfty::examples::Arrow> = masks
            .iter()
            .zip(&names)
            .map(|(&m, nm)| {
                let b = bits(m);
                (b[0], *b.last().unwrap(), nm.as_str(), 2 - b.len() as i32)
            })
            .collect();
        let idx = |m: u32| masks.iter().position(|&x| x == m).unwrap();
        let mut d = Vec::new();
        for &m in &masks {
            let ix = bits(m);
            let k = ix.len() - 1;
            let mut v = Vec::new();
            for j in 1..k {
                let s = if j % 2 == 1 { -1 } else { 1 };
                v.push((s, vec![idx(m & !(1 << ix[j]))]));
                v.push((if sign(k, j) { 1 } else { -1 }, vec![idx(mask_of(&ix[j..])), idx(mask_of(&ix[..=j]))]));
            }
            if !v.is_empty() {
                d.push((idx(m), v));
            }
        }
        let objs: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
        let o: Vec<&str> = objs.iter().map(String::as_str).collect();
        free_dg("universal", Ring::Rationals, &o, &arrows, &d)
    }

    #[test]
    fn sign_table_is_consistent() {
        for n in 2..=5 {
            let u = universal_simplex(n, dg_composite_sign).unwrap();
            // The tautological simplex lies in both nerves.
            let mut s = Simplex::empty((0..=n).collect());
            for m in cell_masks(n) {
                let b = bits(m);
                let label = format!("f{}", b.iter().map(|x| x.to_string()).collect::<String>());
                s.cells[m as usize] = vec![(u.find_gen(b[0], *b.last().unwrap(), &label).unwrap().idx, Scalar::ONE)];
            }
            assert!(dg_nerve(&u, n).unwrap().contains(&s), "n = {n}");
            assert!(ainfty_nerve(&u, n).unwrap().contains(&s), "n = {n}");
        }
        // The table with composite sign (-1)^j throughout breaks at n = 4.
        assert!(universal_simplex(3, |_, j| j % 2 == 1).is_ok());
        assert!(universal_simplex(4, |_, j| j % 2 == 1).is_err());
    }

    #[test]
    fn dg_and_ainfty_nerves_coincide_on_dg_categories() {
        let cats = [poset(Ring::PrimeField(2), 1), poset(Ring::PrimeField(3), 1), dual_numbers(Ring::PrimeField(3), -1), z2_resolution(Ring::Integers), standard(Ring::PrimeField(3)).pop().unwrap()];
        for c in &cats {
            let r = compare_nerves(c, 3, 40, 7, 200_000).unwrap();
            assert!(r.identical(), "{}: {r:?}", c.name);
            assert!(r.residual_checks > 100);
        }
        let r = compare_nerves(&poset(Ring::PrimeField(2), 1), 3, 5, 1, 100_000).unwrap();
        assert_eq!(r.counts.unwrap()[..2], [2, 7]);
    }

    #[test]
    fn units_and_dg_preconditions() {
        assert!(matches!(ainfty_nerve(&gauged_contractible_ideal(Ring::PrimeField(3)), 3), Err(NerveError::NotStrictlyUnital(_))));
        let g = gauged_path(Ring::PrimeField(3));
        assert!(check_relations(&g, 4, None).passed());
        assert!(matches!(dg_nerve(&g, 3), Err(NerveError::NotDg(_))));
        assert!(ainfty_nerve(&g, 3).is_ok());
        assert!(matches!(dg_nerve(&z2_one_object(Ring::Integers), 2), Err(NerveError::Torsion(..))));
    }

    #[test]
    fn three_simplices_see_m3() {
        let ring = Ring::PrimeField(3);
        let g = gauged_path(ring);
        let n = ainfty_nerve(&g, 3).unwrap();
        let ts = n.truncate(100_000).unwrap();
        ts.verify_identities().unwrap();
        let horns = inner_horns(&ts, 3);
        assert!(!horns.is_empty());
        assert_eq!(fill_all(&n, &horns), Ok(horns.len()));
        // Without m^3 the same 3-simplices on the spine a, b, c stop being simplices.
        let mut short = g.clone();
        short.set_max_arity(2);
        let m = ainfty_nerve(&short, 3).unwrap();
        let (a, b, c) = (g.find_gen(0, 1, "a").unwrap(), g.find_gen(1, 2, "b").unwrap(), g.find_gen(2, 3, "c").unwrap());
        let spine = ts.simplices[3].iter().filter(|s| s.objects == [0, 1, 2, 3] && *s.edge(0, 1) == f(ring, a.idx, 1) && *s.edge(1, 2) == f(ring, b.idx, 1) && *s.edge(2, 3) == f(ring, c.idx, 1)).collect::<Vec<_>>();
        assert!(!spine.is_empty());
        assert!(spine.iter().all(|s| !m.contains(s)));
    }

    #[test]
    fn inner_horns_fill() {
        for c in [poset(Ring::PrimeField(3), 2), dual_numbers(Ring::PrimeField(3), -1), standard(Ring::PrimeField(2)).pop().unwrap()] {
            let n = ainfty_nerve(&c, 3).unwrap();
            let ts = n.truncate(200_000).unwrap();
            for d in [2, 3] {
                let horns = inner_horns(&ts, d);
                assert!(!horns.is_empty());
                assert_eq!(fill_all(&n, &horns), Ok(horns.len()), "{} Λ^{d}", c.name);
            }
        }
    }

    #[test]
    fn integral_horns_fill() {
        let ring = Ring::Integers;
        let c = z2_resolution(ring);
        let n = dg_nerve(&c, 3).unwrap();
        for seed in 0..6u64 {
            let e = |k: i64| {
                let mut s = Simplex::empty(vec![0, 0]);
                s.cells[0b11] = f(ring, 0, k);
                s
            };
            let tri = |a: &Simplex, b: &Simplex, sd: u64| n.fill_inner_horn_seeded(&Horn { n: 2, missing: 1, faces: vec![Some(b.clone()), None, Some(a.clone())] }, sd).unwrap();
            let (e01, e12, e23) = (e(seed as i64 - 2), e(3), e(1 - seed as i64));
            let s012 = tri(&e01, &e12, seed);
            let s123 = tri(&e12, &e23, seed + 1);
            let s023 = tri(&s012.face(1), &e23, seed + 2);
            let s013 = tri(&e01, &s123.face(1), seed + 3);
            for (missing, faces) in [(1, [Some(s123.clone()), None, Some(s013.clone()), Some(s012.clone())]), (2, [Some(s123.clone()), Some(s023.clone()), None, Some(s012.clone())])] {
                let h = Horn { n: 3, missing, faces: faces.to_vec() };
                let s = n.fill_inner_horn(&h).unwrap();
                assert_eq!(Horn::of(&s, missing), h);
            }
        }
    }

    #[test]
    fn inconsistent_horns_are_rejected() {
        let ring = Ring::PrimeField(2);
        let c = poset(ring, 1);
        let n = dg_nerve(&c, 3).unwrap();
        let mut e01 = Simplex::empty(vec![0, 1]);
        e01.cells[0b11] = f(ring, 0, 1);
        let bad = Horn { n: 2, missing: 1, faces: vec![Some(e01.clone()), None, Some(e01.clone())] };
        assert!(matches!(n.fill_inner_horn(&bad), Err(NerveError::Inconsistent(_))));
        let outer = Horn { n: 2, missing: 0, faces: vec![None, Some(e01.clone()), Some(e01)] };
        assert!(matches!(n.fill_inner_horn(&outer), Err(NerveError::Inconsistent(_))));
    }

    #[test]
    fn fundamental_groups() {
        for (p, order, desc) in [(2u32, 1, "trivial"), (5, 4, "Z/4"), (7, 6, "Z/6")] {
            let k = ground(Ring::PrimeField(p));
            let n = ainfty_nerve(&k, 3).unwrap();
            let core = n.core(&n.truncate(10_000).unwrap()).unwrap();
            let g = pi1_core(&core, 0).unwrap();
            assert_eq!(g.group.order, order);
            assert_eq!(g.group.describe(), desc);
            assert!(n.compare_pi1(&g, 0, 10_000).unwrap());
        }
        // Klein four: the units of 𝔽₃[ε]/ε² with |ε| = 0 are ±1 + aε, cyclic of order 6.
        let c = dual_numbers(Ring::PrimeField(3), 0);
        let n = ainfty_nerve(&c, 2).unwrap();
        let core = n.core(&n.truncate(100_000).unwrap()).unwrap();
        let g = pi1_core(&core, 0).unwrap();
        assert_eq!(g.group.describe(), "Z/6");
        assert!(n.compare_pi1(&g, 0, 10_000).unwrap());
        let c = dual_numbers(Ring::PrimeField(2), 0);
        let n = ainfty_nerve(&c, 2).unwrap();
        let g = pi1_core(&n.core(&n.truncate(100_000).unwrap()).unwrap(), 0).unwrap();
        assert_eq!(g.group.describe(), "Z/2");
    }

    #[test]
    fn components_are_isomorphism_classes() {
        let ring = Ring::PrimeField(2);
        // 0 → 1 ≅ 2.
        let c = preorder("k[1]+iso", ring, 3, |i, j| i == 0 || (i >= 1 && j >= 1));
        let n = ainfty_nerve(&c, 2).unwrap();
        let core = n.core(&n.truncate(100_000).unwrap()).unwrap();
        assert_eq!(pi0_core(&core), vec![vec![0], vec![1, 2]]);
        assert_eq!(n.h0_iso_classes(1000).unwrap(), vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn mapping_space_homotopy() {
        let n3 = ground(Ring::PrimeField(3));
        let n = ainfty_nerve(&n3, 3).unwrap();
        let rows = n.pi_vs_cohomology(0, 0, 2, 10_000).unwrap();
        assert_eq!(rows.iter().map(|r| r.enumerated).collect::<Vec<_>>(), vec![Some(3), Some(1), None]);
        assert!(rows[..2].iter().all(|r| r.agree == Some(true)));
        // hom = 𝔽₂ in degrees −1 and 0 with zero differential: π₁ = 𝔽₂.
        let d = dual_numbers(Ring::PrimeField(2), -1);
        let n = ainfty_nerve(&d, 3).unwrap();
        let rows = n.pi_vs_cohomology(0, 0, 1, 10_000).unwrap();
        assert_eq!(rows[1].enumerated, Some(2));
        assert_eq!(rows[1].cohomology, "F_2");
        assert!(rows.iter().all(|r| r.agree == Some(true)));
        let z = z2_resolution(Ring::Integers);
        let n = ainfty_nerve(&z, 3).unwrap();
        let rows = n.pi_vs_cohomology(0, 0, 1, 10_000).unwrap();
        assert_eq!(rows[0].cohomology, "Z/2");
        assert!(rows[0].enumerated.is_none() && rows[0].note.is_some());
    }

    #[test]
    fn abelian_invariants() {
        let klein: Vec<Vec<usize>> = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        assert_eq!(FiniteGroup::new(klein).unwrap().invariant_factors, Some(vec![2, 2]));
        let z12: Vec<Vec<usize>> = (0..12).map(|a| (0..12).map(|b| (a + b) % 12).collect()).collect();
        assert_eq!(FiniteGroup::new(z12).unwrap().describe(), "Z/12");
        let z2z4: Vec<Vec<usize>> = (0..8).map(|a: usize| (0..8).map(|b: usize| ((a / 4 + b / 4) % 2) * 4 + (a % 4 + b % 4) % 4).collect()).collect();
        assert_eq!(FiniteGroup::new(z2z4).unwrap().describe(), "Z/2 x Z/4");
        let bad = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroup::new(bad).is_err());
    }
}
