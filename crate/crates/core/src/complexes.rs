//! Cochain complexes of finite free modules on a degree window, with shifts,
//! cones, hom and tensor complexes, cohomology and a chain-homotopy solver.
//!
//! Conventions: differentials raise degree; `(s^n C)^d = C^{d+n}` with
//! differential `(-1)^n d`; `cone(f: U → T) = T ⊕ sU` with
//! `d(t, su) = (dt + f u, -s du)`; a homotopy `h` from `f` to `g` satisfies
//! `dh + hd = g - f`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::coefficients::{invariant_factors, kernel_basis, rank, solve_linear, span_contains_all, LinalgError, Ring, Scalar, SparseMatrix, SparseVec};
use crate::parallel;

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("d∘d ≠ 0 in degree {0}")]
    NotComplex(i32),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("map is not closed: {0}")]
    NotClosed(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A finite-rank free cochain complex concentrated in `[lo, lo + ranks.len())`.
#[derive(Clone, Debug)]
pub struct CochainComplex {
    ring: Ring,
    lo: i32,
    ranks: Vec<usize>,
    /// `d[i]` maps degree `lo + i` to `lo + i + 1`.
    d: Vec<SparseMatrix>,
    labels: Option<Vec<Vec<String>>>,
    /// Degrees whose cohomology is exact (not affected by truncation).
    trusted: (i32, i32),
}

impl CochainComplex {
    /// Builds a complex and checks `d∘d = 0`. `d` has one matrix per degree;
    /// the last one must map into the zero module.
    pub fn new(ring: Ring, lo: i32, ranks: Vec<usize>, d: Vec<SparseMatrix>) -> Result<Self, ComplexError> {
        let n = ranks.len();
        if d.len() != n {
            return Err(ComplexError::Shape(format!("{} differentials for {} degrees", d.len(), n)));
        }
        for i in 0..n {
            let next = if i + 1 < n { ranks[i + 1] } else { 0 };
            if d[i].cols() != ranks[i] || d[i].rows() != next {
                return Err(ComplexError::Shape(format!("differential in degree {}", lo + i as i32)));
            }
        }
        let c = CochainComplex { ring, lo, ranks, d, labels: None, trusted: (i32::MIN, i32::MAX) };
        c.check_d_squared()?;
        Ok(c)
    }

    pub fn zero(ring: Ring) -> Self {
        CochainComplex { ring, lo: 0, ranks: Vec::new(), d: Vec::new(), labels: None, trusted: (i32::MIN, i32::MAX) }
    }

    /// A single copy of the ring in degree `deg`.
    pub fn unit(ring: Ring, deg: i32) -> Self {
        CochainComplex::new(ring, deg, vec![1], vec![SparseMatrix::zero(0, 1)]).unwrap()
    }

    /// Builds from a map degree → (rank, differential out of that degree).
    pub fn from_degrees(ring: Ring, pieces: &BTreeMap<i32, (usize, SparseMatrix)>) -> Result<Self, ComplexError> {
        let (Some(&lo), Some(&hi)) = (pieces.keys().next(), pieces.keys().next_back()) else {
            return Ok(Self::zero(ring));
        };
        let ranks: Vec<usize> = (lo..=hi).map(|k| pieces.get(&k).map_or(0, |p| p.0)).collect();
        let d = (lo..=hi)
            .enumerate()
            .map(|(i, k)| {
                let next = ranks.get(i + 1).copied().unwrap_or(0);
                pieces.get(&k).map(|p| p.1.clone()).unwrap_or_else(|| SparseMatrix::zero(next, 0))
            })
            .collect();
        Self::new(ring, lo, ranks, d)
    }

    pub fn with_labels(mut self, labels: Vec<Vec<String>>) -> Self {
        assert_eq!(labels.len(), self.ranks.len());
        for (l, &r) in labels.iter().zip(&self.ranks) {
            assert_eq!(l.len(), r, "one label per basis element");
        }
        self.labels = Some(labels);
        self
    }

    pub fn with_trusted(mut self, lo: i32, hi: i32) -> Self {
        self.trusted = (lo, hi);
        self
    }

    fn check_d_squared(&self) -> Result<(), ComplexError> {
        for i in 0..self.d.len().saturating_sub(1) {
            if !self.d[i + 1].mul(self.ring, &self.d[i])?.is_zero() {
                return Err(ComplexError::NotComplex(self.lo + i as i32));
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    /// `(lo, hi)`; empty complexes report `(lo, lo - 1)`.
    pub fn window(&self) -> (i32, i32) {
        (self.lo, self.lo + self.ranks.len() as i32 - 1)
    }

    pub fn trusted(&self) -> (i32, i32) {
        self.trusted
    }

    pub fn dim(&self, deg: i32) -> usize {
        let i = deg - self.lo;
        if i < 0 {
            0
        } else {
            self.ranks.get(i as usize).copied().unwrap_or(0)
        }
    }

    pub fn total_dim(&self) -> usize {
        self.ranks.iter().sum()
    }

    /// Differential out of degree `deg` (a `dim(deg+1) × dim(deg)` matrix).
    pub fn diff(&self, deg: i32) -> SparseMatrix {
        let i = deg - self.lo;
        if i >= 0 && (i as usize) < self.d.len() {
            self.d[i as usize].clone()
        } else {
            SparseMatrix::zero(self.dim(deg + 1), self.dim(deg))
        }
    }

    pub fn label(&self, deg: i32, i: usize) -> String {
        match &self.labels {
            Some(l) => l[(deg - self.lo) as usize][i].clone(),
            None => format!("e{deg}_{i}"),
        }
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        let (lo, hi) = self.window();
        lo..=hi
    }

    /// `(s^n C)^d = C^{d+n}` with differential `(-1)^n d`.
    pub fn shift(&self, n: i32) -> CochainComplex {
        let sign = self.ring.sign(n.rem_euclid(2) == 1);
        CochainComplex {
            ring: self.ring,
            lo: self.lo - n,
            ranks: self.ranks.clone(),
            d: self.d.iter().map(|m| m.scale(self.ring, sign)).collect(),
            labels: self.labels.as_ref().map(|ls| ls.iter().map(|l| l.iter().map(|x| if n == 0 { x.clone() } else { format!("s^{n}{x}") }).collect()).collect()),
            trusted: shift_window(self.trusted, -n),
        }
    }

    /// Restricts to degrees `[lo, hi]`; cohomology stays exact only strictly inside.
    pub fn truncate(&self, lo: i32, hi: i32) -> CochainComplex {
        let mut pieces = BTreeMap::new();
        for k in lo..=hi {
            let d = if k < hi { self.diff(k) } else { SparseMatrix::zero(0, self.dim(k)) };
            pieces.insert(k, (self.dim(k), d));
        }
        let c = Self::from_degrees(self.ring, &pieces).expect("truncation of a complex");
        let t = (self.trusted.0.max(lo + 1), self.trusted.1.min(hi - 1));
        c.with_trusted(t.0, t.1)
    }

    pub fn cohomology(&self) -> BTreeMap<i32, Group> {
        self.cohomology_in(self.window().0, self.window().1)
    }

    /// Cohomology in degrees `[lo, hi]`.
    pub fn cohomology_in(&self, lo: i32, hi: i32) -> BTreeMap<i32, Group> {
        let degs: Vec<i32> = (lo - 1..=hi).collect();
        let ring = self.ring;
        // Rank and torsion of each needed differential, computed independently.
        let info: Vec<(usize, Vec<i64>)> = parallel::map(&degs, |&k| {
            let m = self.diff(k);
            match ring {
                Ring::Integers => {
                    let f = invariant_factors(&m);
                    (f.len(), f)
                }
                _ => (rank(ring, &m), Vec::new()),
            }
        });
        let mut out = BTreeMap::new();
        for (i, k) in (lo..=hi).enumerate() {
            let (r_in, tors) = &info[i];
            let (r_out, _) = &info[i + 1];
            let free = self.dim(k) - r_in - r_out;
            let torsion = tors.iter().copied().filter(|&t| t > 1).collect();
            let partial = k < self.trusted.0 || k > self.trusted.1;
            out.insert(k, Group { ring, free, torsion, partial });
        }
        out
    }

    pub fn is_acyclic_in(&self, lo: i32, hi: i32) -> bool {
        self.cohomology_in(lo, hi).values().all(Group::is_zero)
    }

    pub fn identity_map(self: &Arc<Self>) -> ChainMap {
        let comps = self.degrees().map(|k| SparseMatrix::identity(self.dim(k))).collect();
        ChainMap { source: self.clone(), target: self.clone(), degree: 0, comps }
    }
}

/// Equality of the underlying complexes; labels and trust windows are metadata.
impl PartialEq for CochainComplex {
    fn eq(&self, other: &Self) -> bool {
        if self.ring != other.ring {
            return false;
        }
        let (a, b) = (self.window(), other.window());
        (a.0.min(b.0)..=a.1.max(b.1)).all(|k| self.dim(k) == other.dim(k) && self.diff(k) == other.diff(k))
    }
}

impl Eq for CochainComplex {}

fn shift_window(w: (i32, i32), by: i32) -> (i32, i32) {
    (w.0.saturating_add(by), w.1.saturating_add(by))
}

/// An abelian group descriptor: free rank plus torsion (over ℤ) or dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Group {
    #[serde(skip)]
    pub ring: Ring,
    pub free: usize,
    pub torsion: Vec<i64>,
    pub partial: bool,
}

impl Group {
    pub fn is_zero(&self) -> bool {
        self.free == 0 && self.torsion.is_empty()
    }

    /// Group equality ignoring the truncation flag.
    pub fn same(&self, other: &Group) -> bool {
        self.free == other.free && self.torsion == other.torsion
    }

    /// Number of elements, when finite.
    pub fn order(&self) -> Option<u64> {
        match self.ring {
            Ring::PrimeField(p) => Some((p as u64).pow(self.free as u32)),
            Ring::Integers if self.free == 0 => Some(self.torsion.iter().map(|&t| t as u64).product()),
            _ => None,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let base = match self.ring {
            Ring::Integers => "Z".to_string(),
            Ring::Rationals => "Q".to_string(),
            Ring::PrimeField(p) => format!("F_{p}"),
        };
        let mut parts = Vec::new();
        match self.free {
            0 => {}
            1 => parts.push(base),
            n => parts.push(format!("{base}^{n}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// A map of graded modules of the given degree, one matrix per source degree.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub source: Arc<CochainComplex>,
    pub target: Arc<CochainComplex>,
    pub degree: i32,
    comps: Vec<SparseMatrix>,
}

impl ChainMap {
    /// `comps` are indexed by source degree over the source window.
    pub fn new(source: Arc<CochainComplex>, target: Arc<CochainComplex>, degree: i32, comps: Vec<SparseMatrix>) -> Result<Self, ComplexError> {
        if comps.len() != source.ranks.len() {
            return Err(ComplexError::Shape("one component per source degree".into()));
        }
        for (k, m) in source.degrees().zip(&comps) {
            if m.cols() != source.dim(k) || m.rows() != target.dim(k + degree) {
                return Err(ComplexError::Shape(format!("component in degree {k}")));
            }
        }
        Ok(ChainMap { source, target, degree, comps })
    }

    /// Builds from a function giving the image of each basis vector.
    pub fn from_fn(source: Arc<CochainComplex>, target: Arc<CochainComplex>, degree: i32, f: impl Fn(i32, usize) -> SparseVec) -> Self {
        let comps = source
            .degrees()
            .map(|k| SparseMatrix::from_columns(target.dim(k + degree), (0..source.dim(k)).map(|i| f(k, i)).collect()))
            .collect();
        ChainMap { source, target, degree, comps }
    }

    pub fn zero(source: Arc<CochainComplex>, target: Arc<CochainComplex>, degree: i32) -> Self {
        Self::from_fn(source, target, degree, |_, _| Vec::new())
    }

    pub fn comp(&self, deg: i32) -> SparseMatrix {
        let i = deg - self.source.lo;
        if i >= 0 && (i as usize) < self.comps.len() {
            self.comps[i as usize].clone()
        } else {
            SparseMatrix::zero(self.target.dim(deg + self.degree), self.source.dim(deg))
        }
    }

    /// `d f - (-1)^deg f d`, which vanishes exactly for chain maps.
    pub fn boundary_defect(&self) -> Vec<(i32, SparseMatrix)> {
        let ring = self.source.ring;
        let sign = ring.sign(self.degree.rem_euclid(2) == 1);
        self.source
            .degrees()
            .map(|k| {
                let a = self.target.diff(k + self.degree).mul(ring, &self.comp(k)).unwrap();
                let b = self.comp(k + 1).mul(ring, &self.source.diff(k)).unwrap().scale(ring, sign);
                (k, a.sub(ring, &b).unwrap())
            })
            .collect()
    }

    pub fn is_chain_map(&self) -> bool {
        self.boundary_defect().iter().all(|(_, m)| m.is_zero())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ChainMap) -> Result<ChainMap, ComplexError> {
        if other.target != self.source && *other.target != *self.source {
            return Err(ComplexError::Shape("composition of chain maps".into()));
        }
        let ring = self.source.ring;
        let comps = other.source.degrees().map(|k| self.comp(k + other.degree).mul(ring, &other.comp(k)).unwrap()).collect();
        Ok(ChainMap { source: other.source.clone(), target: self.target.clone(), degree: self.degree + other.degree, comps })
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap, ComplexError> {
        if self.degree != other.degree || *self.source != *other.source || *self.target != *other.target {
            return Err(ComplexError::Shape("difference of maps with different shapes".into()));
        }
        let ring = self.source.ring;
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(ring, b).unwrap()).collect();
        Ok(ChainMap { source: self.source.clone(), target: self.target.clone(), degree: self.degree, comps })
    }

    pub fn scale(&self, c: Scalar) -> ChainMap {
        let ring = self.source.ring;
        ChainMap { comps: self.comps.iter().map(|m| m.scale(ring, c)).collect(), ..self.clone() }
    }

    pub fn apply(&self, deg: i32, v: &[(usize, Scalar)]) -> SparseVec {
        self.comp(deg).apply(self.source.ring, v)
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(SparseMatrix::is_zero)
    }

    /// Whether the induced map on cohomology is an isomorphism in `[lo, hi]`,
    /// read off from the cone via the long exact sequence.
    pub fn is_quasi_iso_in(&self, lo: i32, hi: i32) -> Result<bool, ComplexError> {
        let c = cone(self)?;
        Ok(c.is_acyclic_in(lo - 1, hi))
    }
}

/// For degree-0 maps `f: A → B` and `g: B → C`, whether `H^d(A)` maps
/// isomorphically onto the image of `H^d(B) → H^d(C)` for `d` in `[lo, hi]`:
/// `H(g∘f)` is injective and has the same image as `H(g)`.
pub fn is_iso_onto_image_in(f: &ChainMap, g: &ChainMap, lo: i32, hi: i32) -> Result<bool, ComplexError> {
    if f.degree != 0 || g.degree != 0 {
        return Err(ComplexError::Shape("maps of degree 0 expected".into()));
    }
    let ring = f.source.ring();
    for d in lo..=hi {
        let za = kernel_basis(ring, &f.source.diff(d));
        let zb = kernel_basis(ring, &g.source.diff(d));
        let hz: Vec<SparseVec> = za.iter().map(|z| g.apply(d, &f.apply(d, z))).collect();
        let mut cols = hz.clone();
        cols.extend(g.target.diff(d - 1).columns().iter().cloned());
        let m = SparseMatrix::from_columns(g.target.dim(d), cols);
        let gz: Vec<SparseVec> = zb.iter().map(|z| g.apply(d, z)).collect();
        if !span_contains_all(ring, &m, &gz) {
            return Ok(false);
        }
        let ba = f.source.diff(d - 1);
        for k in kernel_basis(ring, &m) {
            let mut acc = crate::coefficients::Accum::new(ring);
            for &(i, c) in k.iter().filter(|e| e.0 < za.len()) {
                acc.add_vec(&za[i], c);
            }
            if solve_linear(ring, &ba, &acc.finish())?.is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A degree −1 map `h` with `dh + hd = g − f`.
#[derive(Clone, Debug)]
pub struct Homotopy {
    pub f: ChainMap,
    pub g: ChainMap,
    pub h: ChainMap,
}

impl Homotopy {
    pub fn verify(&self) -> bool {
        let ring = self.f.source.ring;
        let (s, t) = (&self.f.source, &self.f.target);
        s.degrees().all(|k| {
            let lhs = t.diff(k - 1).mul(ring, &self.h.comp(k)).unwrap().add(ring, &self.h.comp(k + 1).mul(ring, &s.diff(k)).unwrap()).unwrap();
            let rhs = self.g.comp(k).sub(ring, &self.f.comp(k)).unwrap();
            lhs == rhs
        })
    }

    pub fn is_zero(&self) -> bool {
        self.h.is_zero()
    }
}

/// Mapping cone `T ⊕ sU` of a closed degree-0 map `f: U → T`.
pub fn cone(f: &ChainMap) -> Result<CochainComplex, ComplexError> {
    cone_with(f, false)
}

/// With `negate_shifted`, the result is the isomorphic model obtained by
/// `t ⊕ su ↦ t ⊕ -su`, i.e. the cone of `-f`.
pub fn cone_with(f: &ChainMap, negate_shifted: bool) -> Result<CochainComplex, ComplexError> {
    if f.degree != 0 {
        return Err(ComplexError::NotClosed("cone needs a degree 0 map".into()));
    }
    if !f.is_chain_map() {
        return Err(ComplexError::NotClosed("cone of a map that does not commute with d".into()));
    }
    let (u, t) = (&f.source, &f.target);
    let ring = u.ring;
    let lo = t.window().0.min(u.window().0 - 1);
    let hi = t.window().1.max(u.window().1 - 1);
    let fs = if negate_shifted { ring.int(-1) } else { Scalar::ONE };
    let mut pieces = BTreeMap::new();
    for k in lo..=hi {
        let (tk, uk) = (t.dim(k), u.dim(k + 1));
        let (tk1, uk1) = (t.dim(k + 1), u.dim(k + 2));
        let dt = t.diff(k);
        let fu = f.comp(k + 1).scale(ring, fs);
        let du = u.diff(k + 1).scale(ring, ring.int(-1));
        let m = SparseMatrix::block([tk1, uk1], [tk, uk], [[Some(&dt), Some(&fu)], [None, Some(&du)]]);
        pieces.insert(k, (tk + uk, m));
    }
    let c = CochainComplex::from_degrees(ring, &pieces)?;
    let tr = (t.trusted.0.max(u.trusted.0.saturating_sub(1)), t.trusted.1.min(u.trusted.1.saturating_sub(1)));
    Ok(c.with_trusted(tr.0, tr.1))
}

/// `(C ⊗ D)^n = ⊕ C^p ⊗ D^q` with `d(x ⊗ y) = dx ⊗ y + (-1)^{|x|} x ⊗ dy`.
/// Basis of degree n: pairs ordered by p, then x index, then y index.
pub fn tensor(c: &CochainComplex, d: &CochainComplex) -> CochainComplex {
    let ring = c.ring;
    let (clo, chi) = c.window();
    let (dlo, dhi) = d.window();
    if c.total_dim() == 0 || d.total_dim() == 0 {
        return CochainComplex::zero(ring);
    }
    let index = |n: i32| -> Vec<(i32, usize, usize)> {
        let mut v = Vec::new();
        for p in clo..=chi {
            for i in 0..c.dim(p) {
                for j in 0..d.dim(n - p) {
                    v.push((p, i, j));
                }
            }
        }
        v
    };
    let mut pieces = BTreeMap::new();
    for n in clo + dlo..=chi + dhi {
        let src = index(n);
        let tgt = index(n + 1);
        let pos: std::collections::HashMap<(i32, usize, usize), usize> = tgt.iter().enumerate().map(|(k, &t)| (t, k)).collect();
        let cols = src
            .iter()
            .map(|&(p, i, j)| {
                let mut acc = crate::coefficients::Accum::new(ring);
                for &(i2, x) in c.diff(p).column(i) {
                    acc.add(pos[&(p + 1, i2, j)], x);
                }
                let s = ring.sign(p.rem_euclid(2) == 1);
                for &(j2, y) in d.diff(n - p).column(j) {
                    acc.add(pos[&(p, i, j2)], ring.mul(s, y));
                }
                acc.finish()
            })
            .collect();
        pieces.insert(n, (src.len(), SparseMatrix::from_columns(tgt.len(), cols)));
    }
    CochainComplex::from_degrees(ring, &pieces).expect("tensor product of complexes")
}

/// `hom(C, D)^n = ∏ Hom(C^p, D^{p+n})` with `dφ = d_D φ - (-1)^n φ d_C`.
/// Basis of degree n: matrix units ordered by p, then column, then row.
pub fn hom_complex(c: &CochainComplex, d: &CochainComplex) -> CochainComplex {
    let ring = c.ring;
    let (clo, chi) = c.window();
    let (dlo, dhi) = d.window();
    if c.total_dim() == 0 || d.total_dim() == 0 {
        return CochainComplex::zero(ring);
    }
    let index = |n: i32| -> Vec<(i32, usize, usize)> {
        let mut v = Vec::new();
        for p in clo..=chi {
            for col in 0..c.dim(p) {
                for row in 0..d.dim(p + n) {
                    v.push((p, col, row));
                }
            }
        }
        v
    };
    let mut pieces = BTreeMap::new();
    for n in dlo - chi..=dhi - clo {
        let src = index(n);
        let tgt = index(n + 1);
        let pos: std::collections::HashMap<(i32, usize, usize), usize> = tgt.iter().enumerate().map(|(k, &t)| (t, k)).collect();
        let sign = ring.sign(n.rem_euclid(2) == 0);
        let cols = src
            .iter()
            .map(|&(p, col, row)| {
                let mut acc = crate::coefficients::Accum::new(ring);
                // d_D ∘ E_{row,col}: column col now hits d_D(row).
                for &(r2, x) in d.diff(p + n).column(row) {
                    acc.add(pos[&(p, col, r2)], x);
                }
                // E_{row,col} ∘ d_C, from degree p-1: entries d_C[col, c'] for c' in C^{p-1}.
                let dc = c.diff(p - 1);
                for c2 in 0..c.dim(p - 1) {
                    let x = dc.get(col, c2);
                    if !x.is_zero() {
                        acc.add(pos[&(p - 1, c2, row)], ring.mul(sign, x));
                    }
                }
                acc.finish()
            })
            .collect();
        pieces.insert(n, (src.len(), SparseMatrix::from_columns(tgt.len(), cols)));
    }
    CochainComplex::from_degrees(ring, &pieces).expect("hom complex")
}

/// Looks for `h` with `dh + hd = g − f`. `None` over ℤ means no integral
/// homotopy exists on these finite complexes; over a field it is definitive.
pub fn find_homotopy(f: &ChainMap, g: &ChainMap) -> Result<Option<Homotopy>, ComplexError> {
    if f.degree != g.degree || *f.source != *g.source || *f.target != *g.target {
        return Err(ComplexError::Shape("homotopy between maps of different shapes".into()));
    }
    let (s, t) = (f.source.clone(), f.target.clone());
    let ring = s.ring;
    let deg = f.degree;
    let degs: Vec<i32> = s.degrees().collect();
    // Unknown offsets: h^k is a dim T^{k+deg-1} × dim S^k block, column-major.
    let mut uoff = BTreeMap::new();
    let mut nu = 0;
    for &k in &degs {
        uoff.insert(k, nu);
        nu += t.dim(k + deg - 1) * s.dim(k);
    }
    let mut eoff = BTreeMap::new();
    let mut ne = 0;
    for &k in &degs {
        eoff.insert(k, ne);
        ne += t.dim(k + deg) * s.dim(k);
    }
    let sign = ring.sign(deg.rem_euclid(2) == 1);
    let mut trip = Vec::new();
    let mut rhs = Vec::new();
    for &k in &degs {
        let rows = t.dim(k + deg);
        let e0 = eoff[&k];
        // d_T h^k: entry (r, c) += dT[r, r'] h^k[r', c].
        let dt = t.diff(k + deg - 1);
        let hrows = t.dim(k + deg - 1);
        for c in 0..s.dim(k) {
            for rp in 0..hrows {
                for &(r, x) in dt.column(rp) {
                    trip.push((e0 + c * rows + r, uoff[&k] + c * hrows + rp, x));
                }
            }
        }
        // ±h^{k+1} d_S: entry (r, c) += h^{k+1}[r, c'] dS[c', c].
        if let Some(&u1) = uoff.get(&(k + 1)) {
            let ds = s.diff(k);
            for c in 0..s.dim(k) {
                for &(cp, x) in ds.column(c) {
                    for r in 0..rows {
                        trip.push((e0 + c * rows + r, u1 + cp * rows + r, ring.mul(sign, x)));
                    }
                }
            }
        }
        let diff = g.comp(k).sub(ring, &f.comp(k))?;
        for (r, c, x) in diff.entries() {
            rhs.push((e0 + c * rows + r, x));
        }
    }
    let m = SparseMatrix::from_triplets(ring, ne, nu, trip);
    rhs.sort_by_key(|e| e.0);
    let sol = if rhs.is_empty() { Some(Vec::new()) } else { solve_linear(ring, &m, &rhs)? };
    let Some(x) = sol else { return Ok(None) };
    let comps = degs
        .iter()
        .map(|&k| {
            let hrows = t.dim(k + deg - 1);
            let base = uoff[&k];
            let len = hrows * s.dim(k);
            let cols = (0..s.dim(k))
                .map(|c| x.iter().filter(|(i, _)| *i >= base + c * hrows && *i < base + (c + 1) * hrows).map(|&(i, v)| (i - base - c * hrows, v)).collect())
                .collect();
            let _ = len;
            SparseMatrix::from_columns(hrows, cols)
        })
        .collect();
    let h = ChainMap::new(s, t, deg - 1, comps)?;
    let hom = Homotopy { f: f.clone(), g: g.clone(), h };
    debug_assert!(hom.verify());
    Ok(Some(hom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_term(ring: Ring, n: i64) -> CochainComplex {
        // ℤ --×n--> ℤ in degrees −1, 0.
        CochainComplex::new(ring, -1, vec![1, 1], vec![SparseMatrix::from_dense(ring, &[vec![n]]), SparseMatrix::zero(0, 1)]).unwrap()
    }

    #[test]
    fn times_two_has_z_mod_2() {
        let c = two_term(Ring::Integers, 2);
        let h = c.cohomology();
        assert_eq!(h[&0].to_string(), "Z/2");
        assert!(h[&-1].is_zero());
    }

    #[test]
    fn shift_moves_degree() {
        let k = CochainComplex::unit(Ring::PrimeField(2), 0);
        let s = k.shift(1);
        assert_eq!(s.window(), (-1, -1));
        assert_eq!(k.shift(0), k);
        let c = two_term(Ring::Integers, 3);
        assert_eq!(c.shift(1).shift(-1), c);
    }

    #[test]
    fn cones_of_identity_and_zero() {
        let f2 = Ring::PrimeField(2);
        let k = Arc::new(CochainComplex::unit(f2, 0));
        let id = k.identity_map();
        assert!(cone(&id).unwrap().cohomology().values().all(Group::is_zero));
        let z = ChainMap::zero(k.clone(), k.clone(), 0);
        let h = cone(&z).unwrap().cohomology();
        assert_eq!(h[&0].free, 1);
        assert_eq!(h[&-1].free, 1);
        let zr = Ring::Integers;
        let kz = Arc::new(CochainComplex::unit(zr, 0));
        let two = ChainMap::new(kz.clone(), kz, 0, vec![SparseMatrix::from_dense(zr, &[vec![2]])]).unwrap();
        let h = cone(&two).unwrap().cohomology();
        assert_eq!(h[&0].to_string(), "Z/2");
        assert!(h[&-1].is_zero());
    }

    #[test]
    fn tensor_and_hom_with_unit() {
        let c = two_term(Ring::Integers, 2);
        let k = CochainComplex::unit(Ring::Integers, 0);
        assert_eq!(tensor(&k, &c), c);
        assert_eq!(hom_complex(&k, &c), c);
    }

    #[test]
    fn endomorphisms_of_times_two() {
        // hom(C, C) for C = ℤ --×2--> ℤ: H^0 = ℤ/2 spanned by the identity,
        // H^{-1} = 0, H^1 = ℤ/2 (the 1×2 matrix (2, -2) has cokernel ℤ/2).
        let c = two_term(Ring::Integers, 2);
        let e = hom_complex(&c, &c);
        let h = e.cohomology();
        assert_eq!(h[&0].to_string(), "Z/2");
        assert!(h[&-1].is_zero());
        assert_eq!(h[&1].to_string(), "Z/2");
    }

    #[test]
    fn homotopy_solver() {
        let q = Ring::PrimeField(3);
        let c = Arc::new(two_term(q, 1));
        let id = c.identity_map();
        let z = ChainMap::zero(c.clone(), c.clone(), 0);
        let h = find_homotopy(&z, &id).unwrap().expect("acyclic complex is contractible");
        assert!(h.verify());
        let h0 = find_homotopy(&id, &id).unwrap().unwrap();
        assert!(h0.is_zero());
        let zz = Arc::new(two_term(Ring::Integers, 2));
        let id = zz.identity_map();
        let z = ChainMap::zero(zz.clone(), zz.clone(), 0);
        assert!(find_homotopy(&z, &id).unwrap().is_none());
    }
}
