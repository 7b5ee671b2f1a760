//! Exact scalars over ℤ, 𝔽_p and ℚ, sparse vectors and matrices, and the
//! elimination routines (Smith normal form, kernels, linear solves) that all
//! homology computations reduce to.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("coefficient overflow")]
    Overflow,
    #[error("{0} is not prime")]
    NotPrime(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum Ring {
    Integers,
    PrimeField(u32),
    Rationals,
}

/// A ring element. Over ℤ and 𝔽_p the denominator is always 1 and residues
/// are kept in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar {
    num: i64,
    den: i64,
}

pub const fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn ck(v: Option<i64>) -> i64 {
    v.unwrap_or_else(|| panic!("{}", LinalgError::Overflow))
}

impl Scalar {
    pub const ZERO: Scalar = Scalar { num: 0, den: 1 };
    pub const ONE: Scalar = Scalar { num: 1, den: 1 };

    pub fn numer(self) -> i64 {
        self.num
    }

    pub fn denom(self) -> i64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Integer value; panics on a proper fraction.
    pub fn to_int(self) -> i64 {
        assert_eq!(self.den, 1, "not an integer: {self}");
        self.num
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Ring {
    pub fn prime_field(p: u32) -> Result<Ring, LinalgError> {
        if is_prime(p) {
            Ok(Ring::PrimeField(p))
        } else {
            Err(LinalgError::NotPrime(p))
        }
    }

    pub fn is_field(self) -> bool {
        !matches!(self, Ring::Integers)
    }

    pub fn characteristic(self) -> u32 {
        match self {
            Ring::PrimeField(p) => p,
            _ => 0,
        }
    }

    pub fn name(self) -> String {
        match self {
            Ring::Integers => "Z".into(),
            Ring::Rationals => "Q".into(),
            Ring::PrimeField(p) => format!("F{p}"),
        }
    }

    pub fn parse_name(s: &str) -> Option<Ring> {
        match s {
            "Z" => Some(Ring::Integers),
            "Q" => Some(Ring::Rationals),
            _ => {
                let p: u32 = s.strip_prefix('F')?.parse().ok()?;
                Ring::prime_field(p).ok()
            }
        }
    }

    pub fn zero(self) -> Scalar {
        Scalar::ZERO
    }

    pub fn one(self) -> Scalar {
        Scalar::ONE
    }

    pub fn int(self, n: i64) -> Scalar {
        match self {
            Ring::PrimeField(p) => Scalar { num: n.rem_euclid(p as i64), den: 1 },
            _ => Scalar { num: n, den: 1 },
        }
    }

    pub fn frac(self, num: i64, den: i64) -> Option<Scalar> {
        if den == 0 {
            return None;
        }
        match self {
            Ring::Integers => (num % den == 0).then(|| Scalar { num: num / den, den: 1 }),
            Ring::PrimeField(_) => Some(self.mul(self.int(num), self.inv(self.int(den))?)),
            Ring::Rationals => {
                let g = gcd(num, den);
                let s = if den < 0 { -1 } else { 1 };
                Some(Scalar { num: s * num / g, den: s * den / g })
            }
        }
    }

    /// Parses `"n"` or `"n/d"`.
    pub fn parse(self, s: &str) -> Option<Scalar> {
        match s.split_once('/') {
            Some((n, d)) => self.frac(n.trim().parse().ok()?, d.trim().parse().ok()?),
            None => Some(self.int(s.trim().parse().ok()?)),
        }
    }

    /// ±1 as a ring element.
    pub fn sign(self, odd: bool) -> Scalar {
        if odd {
            self.int(-1)
        } else {
            Scalar::ONE
        }
    }

    pub fn add(self, a: Scalar, b: Scalar) -> Scalar {
        match self {
            Ring::Integers => Scalar { num: ck(a.num.checked_add(b.num)), den: 1 },
            Ring::PrimeField(p) => {
                let s = a.num + b.num;
                Scalar { num: if s >= p as i64 { s - p as i64 } else { s }, den: 1 }
            }
            Ring::Rationals => {
                if a.den == 1 && b.den == 1 {
                    return Scalar { num: ck(a.num.checked_add(b.num)), den: 1 };
                }
                let n = ck(ck(a.num.checked_mul(b.den)).checked_add(ck(b.num.checked_mul(a.den))));
                let d = ck(a.den.checked_mul(b.den));
                self.frac(n, d).expect("nonzero denominator")
            }
        }
    }

    pub fn neg(self, a: Scalar) -> Scalar {
        match self {
            Ring::PrimeField(p) => Scalar { num: if a.num == 0 { 0 } else { p as i64 - a.num }, den: 1 },
            _ => Scalar { num: ck(a.num.checked_neg()), den: a.den },
        }
    }

    pub fn sub(self, a: Scalar, b: Scalar) -> Scalar {
        self.add(a, self.neg(b))
    }

    pub fn mul(self, a: Scalar, b: Scalar) -> Scalar {
        match self {
            Ring::Integers => Scalar { num: ck(a.num.checked_mul(b.num)), den: 1 },
            Ring::PrimeField(p) => Scalar { num: (a.num * b.num) % p as i64, den: 1 },
            Ring::Rationals => {
                if a.den == 1 && b.den == 1 {
                    return Scalar { num: ck(a.num.checked_mul(b.num)), den: 1 };
                }
                let g1 = gcd(a.num, b.den).max(1);
                let g2 = gcd(b.num, a.den).max(1);
                let n = ck((a.num / g1).checked_mul(b.num / g2));
                let d = ck((a.den / g2).checked_mul(b.den / g1));
                self.frac(n, d).expect("nonzero denominator")
            }
        }
    }

    pub fn inv(self, a: Scalar) -> Option<Scalar> {
        if a.is_zero() {
            return None;
        }
        match self {
            Ring::Integers => (a.num.abs() == 1).then_some(a),
            Ring::PrimeField(p) => {
                let (mut t, mut nt, mut r, mut nr) = (0i64, 1i64, p as i64, a.num);
                while nr != 0 {
                    let q = r / nr;
                    (t, nt) = (nt, t - q * nt);
                    (r, nr) = (nr, r - q * nr);
                }
                Some(self.int(t))
            }
            Ring::Rationals => self.frac(a.den, a.num),
        }
    }

    pub fn is_unit(self, a: Scalar) -> bool {
        self.inv(a).is_some()
    }

    /// Every element of a finite ring, in a fixed order.
    pub fn elements(self) -> Option<Vec<Scalar>> {
        match self {
            Ring::PrimeField(p) => Some((0..p as i64).map(|n| self.int(n)).collect()),
            _ => None,
        }
    }
}

/// Sparse vector: strictly increasing indices, no stored zeros.
pub type SparseVec = Vec<(usize, Scalar)>;

/// Accumulates linear combinations of basis indices.
#[derive(Clone, Debug)]
pub struct Accum {
    ring: Ring,
    map: HashMap<usize, Scalar>,
}

impl Accum {
    pub fn new(ring: Ring) -> Self {
        Accum { ring, map: HashMap::new() }
    }

    pub fn add(&mut self, i: usize, c: Scalar) {
        if c.is_zero() {
            return;
        }
        let r = self.ring;
        let e = self.map.entry(i).or_insert(Scalar::ZERO);
        *e = r.add(*e, c);
    }

    pub fn add_vec(&mut self, v: &[(usize, Scalar)], c: Scalar) {
        for &(i, x) in v {
            self.add(i, self.ring.mul(x, c));
        }
    }

    pub fn finish(self) -> SparseVec {
        let mut v: SparseVec = self.map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }
}

pub fn vec_from_pairs(ring: Ring, pairs: impl IntoIterator<Item = (usize, Scalar)>) -> SparseVec {
    let mut a = Accum::new(ring);
    for (i, c) in pairs {
        a.add(i, c);
    }
    a.finish()
}

pub fn vec_scale(ring: Ring, v: &[(usize, Scalar)], c: Scalar) -> SparseVec {
    if c.is_zero() {
        return Vec::new();
    }
    v.iter().map(|&(i, x)| (i, ring.mul(x, c))).filter(|e| !e.1.is_zero()).collect()
}

pub fn vec_add(ring: Ring, a: &[(usize, Scalar)], b: &[(usize, Scalar)]) -> SparseVec {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            let s = ring.add(a[i].1, b[j].1);
            if !s.is_zero() {
                out.push((a[i].0, s));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn vec_sub(ring: Ring, a: &[(usize, Scalar)], b: &[(usize, Scalar)]) -> SparseVec {
    vec_add(ring, a, &vec_scale(ring, b, ring.int(-1)))
}

pub fn vec_get(v: &[(usize, Scalar)], i: usize) -> Scalar {
    v.binary_search_by_key(&i, |e| e.0).map(|k| v[k].1).unwrap_or(Scalar::ZERO)
}

pub fn dense_to_sparse(ring: Ring, v: &[i64]) -> SparseVec {
    v.iter().enumerate().filter(|(_, &x)| ring.int(x) != Scalar::ZERO).map(|(i, &x)| (i, ring.int(x))).collect()
}

/// Sparse matrix stored by columns; column `j` is the image of basis vector `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix { rows, cols: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix { rows: n, cols: (0..n).map(|i| vec![(i, Scalar::ONE)]).collect() }
    }

    /// Columns must be valid sparse vectors with indices below `rows`.
    pub fn from_columns(rows: usize, cols: Vec<SparseVec>) -> Self {
        for c in &cols {
            debug_assert!(c.windows(2).all(|w| w[0].0 < w[1].0));
            assert!(c.iter().all(|&(i, x)| i < rows && !x.is_zero()), "column entry out of bounds or zero");
        }
        SparseMatrix { rows, cols }
    }

    pub fn from_triplets(ring: Ring, rows: usize, cols: usize, t: impl IntoIterator<Item = (usize, usize, Scalar)>) -> Self {
        let mut acc: Vec<Accum> = (0..cols).map(|_| Accum::new(ring)).collect();
        for (r, c, x) in t {
            assert!(r < rows && c < cols, "triplet out of bounds");
            acc[c].add(r, x);
        }
        SparseMatrix { rows, cols: acc.into_iter().map(Accum::finish).collect() }
    }

    pub fn from_dense(ring: Ring, d: &[Vec<i64>]) -> Self {
        let rows = d.len();
        let cols = d.first().map_or(0, |r| r.len());
        Self::from_triplets(ring, rows, cols, (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c, ring.int(d[r][c])))))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols.len()
    }

    pub fn column(&self, j: usize) -> &[(usize, Scalar)] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[SparseVec] {
        &self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        vec_get(&self.cols[c], r)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Scalar)> + '_ {
        self.cols.iter().enumerate().flat_map(|(c, v)| v.iter().map(move |&(r, x)| (r, c, x)))
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut d = vec![vec![Scalar::ZERO; self.cols()]; self.rows];
        for (r, c, x) in self.entries() {
            d[r][c] = x;
        }
        d
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<SparseVec> = vec![Vec::new(); self.rows];
        for (r, c, x) in self.entries() {
            cols[r].push((c, x));
        }
        SparseMatrix { rows: self.cols(), cols }
    }

    pub fn apply(&self, ring: Ring, v: &[(usize, Scalar)]) -> SparseVec {
        let mut acc = Accum::new(ring);
        for &(j, x) in v {
            acc.add_vec(&self.cols[j], x);
        }
        acc.finish()
    }

    /// `self * other`.
    pub fn mul(&self, ring: Ring, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if self.cols() != other.rows {
            return Err(LinalgError::Dimension(format!("{}x{} * {}x{}", self.rows, self.cols(), other.rows, other.cols())));
        }
        Ok(SparseMatrix { rows: self.rows, cols: other.cols.iter().map(|c| self.apply(ring, c)).collect() })
    }

    pub fn add(&self, ring: Ring, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        if self.rows != other.rows || self.cols() != other.cols() {
            return Err(LinalgError::Dimension("matrix sum".into()));
        }
        Ok(SparseMatrix { rows: self.rows, cols: self.cols.iter().zip(&other.cols).map(|(a, b)| vec_add(ring, a, b)).collect() })
    }

    pub fn sub(&self, ring: Ring, other: &SparseMatrix) -> Result<SparseMatrix, LinalgError> {
        self.add(ring, &other.scale(ring, ring.int(-1)))
    }

    pub fn scale(&self, ring: Ring, c: Scalar) -> SparseMatrix {
        SparseMatrix { rows: self.rows, cols: self.cols.iter().map(|v| vec_scale(ring, v, c)).collect() }
    }

    /// Reinterprets entries in another ring (reduction mod p, or inclusion ℤ ⊂ ℚ).
    pub fn change_ring(&self, to: Ring) -> SparseMatrix {
        SparseMatrix {
            rows: self.rows,
            cols: self.cols.iter().map(|v| v.iter().map(|&(i, x)| (i, to.frac(x.num, x.den).expect("representable"))).filter(|e| !e.1.is_zero()).collect()).collect(),
        }
    }

    /// Block matrix `[[a, b], [c, d]]`; `None` blocks are zero.
    pub fn block(rows: [usize; 2], cols: [usize; 2], blocks: [[Option<&SparseMatrix>; 2]; 2]) -> SparseMatrix {
        let mut out = vec![Vec::new(); cols[0] + cols[1]];
        for (bj, off_c) in [(0, 0), (1, cols[0])] {
            for j in 0..cols[bj] {
                let col = &mut out[off_c + j];
                for (bi, off_r) in [(0, 0), (1, rows[0])] {
                    if let Some(m) = blocks[bi][bj] {
                        assert!(m.rows == rows[bi] && m.cols() == cols[bj], "block shape");
                        col.extend(m.cols[j].iter().map(|&(r, x)| (r + off_r, x)));
                    }
                }
            }
        }
        SparseMatrix { rows: rows[0] + rows[1], cols: out }
    }
}

fn integral_rows(m: &SparseMatrix) -> Vec<Vec<(usize, i64)>> {
    // Clearing denominators row by row preserves rank and kernel.
    let t = m.transpose();
    t.cols
        .iter()
        .map(|row| {
            let l = row.iter().fold(1i64, |l, &(_, x)| ck(l.checked_mul(x.den / gcd(l, x.den))));
            row.iter().map(|&(c, x)| (c, ck(x.num.checked_mul(l / x.den)))).collect()
        })
        .collect()
}

/// Sparse elimination state shared by the field and integer reducers.
struct Eliminator {
    rows: Vec<Vec<(usize, i64)>>,
    col_rows: Vec<Vec<usize>>,
    alive: Vec<bool>,
}

impl Eliminator {
    fn new(rows: Vec<Vec<(usize, i64)>>, ncols: usize) -> Self {
        let mut col_rows = vec![Vec::new(); ncols];
        for (r, row) in rows.iter().enumerate() {
            for &(c, _) in row {
                col_rows[c].push(r);
            }
        }
        let alive = vec![true; rows.len()];
        Eliminator { rows, col_rows, alive }
    }

    fn entry(&self, r: usize, c: usize) -> i64 {
        let row = &self.rows[r];
        row.binary_search_by_key(&c, |e| e.0).map(|k| row[k].1).unwrap_or(0)
    }

    /// `row[target] += q * row[source]` under the reduction `red`.
    fn axpy(&mut self, target: usize, q: i64, source: usize, red: &impl Fn(i64) -> i64) {
        let a = std::mem::take(&mut self.rows[target]);
        let b = &self.rows[source];
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                let v = red(ck(q.checked_mul(b[j].1)));
                if v != 0 {
                    out.push((b[j].0, v));
                    self.col_rows[b[j].0].push(target);
                }
                j += 1;
            } else {
                let v = red(ck(a[i].1.checked_add(ck(q.checked_mul(b[j].1)))));
                if v != 0 {
                    out.push((a[i].0, v));
                }
                i += 1;
                j += 1;
            }
        }
        self.rows[target] = out;
    }

    fn rows_with(&mut self, c: usize, skip: usize) -> Vec<usize> {
        let mut list = std::mem::take(&mut self.col_rows[c]);
        list.sort_unstable();
        list.dedup();
        list.retain(|&r| self.alive[r] && self.entry(r, c) != 0);
        self.col_rows[c] = list.clone();
        list.retain(|&r| r != skip);
        list
    }
}

/// Rank over 𝔽_p by sparse elimination.
fn rank_mod_p(m: &SparseMatrix, p: i64) -> usize {
    let rows: Vec<Vec<(usize, i64)>> = m.transpose().cols.iter().map(|r| r.iter().map(|&(c, x)| (c, x.num)).collect()).collect();
    let ring = Ring::PrimeField(p as u32);
    let red = move |v: i64| v.rem_euclid(p);
    let mut el = Eliminator::new(rows, m.cols());
    let mut order: Vec<usize> = (0..el.rows.len()).collect();
    let mut rank = 0;
    loop {
        // Markowitz-style: the shortest live row supplies the pivot.
        order.retain(|&r| el.alive[r] && !el.rows[r].is_empty());
        let Some(&pr) = order.iter().min_by_key(|&&r| el.rows[r].len()) else { break };
        let (pc, pv) = *el.rows[pr].iter().min_by_key(|(c, _)| el.col_rows[*c].len()).unwrap();
        let pinv = ring.inv(ring.int(pv)).unwrap().num;
        for r in el.rows_with(pc, pr) {
            let q = (p - el.entry(r, pc) * pinv % p) % p;
            el.axpy(r, q, pr, &red);
        }
        el.alive[pr] = false;
        rank += 1;
    }
    rank
}

/// Nonzero diagonal entries of the Smith normal form of an integer matrix,
/// computed without transforms by minimal-pivot elimination.
pub fn invariant_factors(m: &SparseMatrix) -> Vec<i64> {
    let rows = integral_rows(m);
    let mut el = Eliminator::new(rows, m.cols());
    let mut diag = Vec::new();
    let red = |v: i64| v;
    let mut live: Vec<usize> = (0..el.rows.len()).collect();
    loop {
        live.retain(|&r| el.alive[r] && !el.rows[r].is_empty());
        if live.is_empty() {
            break;
        }
        // Pivot on the entry of least absolute value, breaking ties by row length.
        let mut best: Option<(i64, usize, usize, usize)> = None;
        for &r in &live {
            for &(c, v) in &el.rows[r] {
                let key = (v.abs(), el.rows[r].len());
                if best.is_none_or(|b| key < (b.0, b.3)) {
                    best = Some((v.abs(), r, c, el.rows[r].len()));
                }
                if v.abs() == 1 && el.rows[r].len() == 1 {
                    break;
                }
            }
        }
        let (_, pr, pc, _) = best.unwrap();
        let a = el.entry(pr, pc);
        let mut clean = true;
        for r in el.rows_with(pc, pr) {
            let b = el.entry(r, pc);
            let q = nearest_quotient(b, a);
            if q != 0 {
                el.axpy(r, -q, pr, &red);
            }
            if el.entry(r, pc) != 0 {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // Column operations touch only the pivot row once its column is clear.
        let row = std::mem::take(&mut el.rows[pr]);
        let reduced: Vec<(usize, i64)> = row
            .iter()
            .map(|&(c, v)| if c == pc { (c, v) } else { (c, v - nearest_quotient(v, a) * a) })
            .filter(|e| e.1 != 0)
            .collect();
        if reduced.len() == 1 {
            diag.push(a.abs());
            el.alive[pr] = false;
        } else {
            el.rows[pr] = reduced;
        }
    }
    normalize_diagonal(diag)
}

fn nearest_quotient(b: i64, a: i64) -> i64 {
    let q = b.div_euclid(a);
    let r = b - q * a;
    if 2 * r.abs() > a.abs() {
        q + a.signum()
    } else {
        q
    }
}

/// Turns a list of diagonal entries into the divisibility chain d_1 | d_2 | ….
fn normalize_diagonal(mut d: Vec<i64>) -> Vec<i64> {
    d.retain(|&x| x != 0);
    let n = d.len();
    for i in 0..n {
        for j in i + 1..n {
            let g = gcd(d[i], d[j]);
            let l = ck((d[i] / g).checked_mul(d[j]));
            d[i] = g;
            d[j] = l;
        }
    }
    d.sort_unstable();
    d
}

/// Rank over the given ring's fraction field.
pub fn rank(ring: Ring, m: &SparseMatrix) -> usize {
    if m.nnz() == 0 {
        return 0;
    }
    match ring {
        Ring::PrimeField(p) => rank_mod_p(m, p as i64),
        _ => invariant_factors(m).len(),
    }
}

/// Smith normal form over ℤ: unimodular `U`, `V` and diagonal `D` with
/// `U·M·V = D` and `d_i | d_{i+1}`.
pub fn smith_normal_form(m: &SparseMatrix) -> (SparseMatrix, SparseMatrix, SparseMatrix) {
    let (r, c) = (m.rows(), m.cols());
    let mut a = vec![vec![0i128; c]; r];
    for (i, j, x) in m.entries() {
        a[i][j] = x.to_int() as i128;
    }
    let (u, d, v) = snf_dense(a, r, c);
    let conv = |mat: &Vec<Vec<i128>>, rr: usize, cc: usize| {
        SparseMatrix::from_triplets(
            Ring::Integers,
            rr,
            cc,
            (0..rr).flat_map(|i| (0..cc).map(move |j| (i, j))).map(|(i, j)| (i, j, Scalar { num: i64::try_from(mat[i][j]).expect("SNF overflow"), den: 1 })),
        )
    };
    (conv(&u, r, r), conv(&d, r, c), conv(&v, c, c))
}

type Dense = Vec<Vec<i128>>;

fn eye(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

fn snf_dense(mut a: Dense, r: usize, c: usize) -> (Dense, Dense, Dense) {
    let mut u = eye(r);
    let mut v = eye(c);
    let swap_rows = |a: &mut Dense, u: &mut Dense, i: usize, j: usize| {
        a.swap(i, j);
        u.swap(i, j);
    };
    let swap_cols = |a: &mut Dense, v: &mut Dense, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };
    let mut t = 0;
    while t < r.min(c) {
        // Pick the nonzero entry of least absolute value in the trailing block.
        let mut best = None;
        for i in t..r {
            for j in t..c {
                if a[i][j] != 0 && best.is_none_or(|(b, _, _)| a[i][j].abs() < b) {
                    best = Some((a[i][j].abs(), i, j));
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        swap_rows(&mut a, &mut u, t, pi);
        swap_cols(&mut a, &mut v, t, pj);
        loop {
            let p = a[t][t];
            let mut done = true;
            for i in t + 1..r {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    for j in 0..c {
                        a[i][j] -= q * a[t][j];
                    }
                    for j in 0..r {
                        u[i][j] -= q * u[t][j];
                    }
                }
                if a[i][t] != 0 {
                    done = false;
                }
            }
            for j in t + 1..c {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    for i in 0..r {
                        a[i][j] -= q * a[i][t];
                    }
                    for i in 0..c {
                        v[i][j] -= q * v[i][t];
                    }
                }
                if a[t][j] != 0 {
                    done = false;
                }
            }
            if done {
                // Enforce divisibility against the trailing block.
                let bad = (t + 1..r).flat_map(|i| (t + 1..c).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in 0..c {
                            a[t][j] += a[i][j];
                        }
                        for j in 0..r {
                            u[t][j] += u[i][j];
                        }
                        continue;
                    }
                }
            }
            // A remainder smaller than the pivot appeared; move it into place.
            let mut best = (a[t][t].abs(), t, t);
            for i in t..r {
                if a[i][t] != 0 && a[i][t].abs() < best.0 {
                    best = (a[i][t].abs(), i, t);
                }
            }
            for j in t..c {
                if a[t][j] != 0 && a[t][j].abs() < best.0 {
                    best = (a[t][j].abs(), t, j);
                }
            }
            swap_rows(&mut a, &mut u, t, best.1);
            swap_cols(&mut a, &mut v, t, best.2);
        }
        if a[t][t] < 0 {
            for j in 0..c {
                a[t][j] = -a[t][j];
            }
            for j in 0..r {
                u[t][j] = -u[t][j];
            }
        }
        t += 1;
    }
    (u, a, v)
}

/// Row-reduces over a field, returning the reduced rows and pivot columns.
fn rref(ring: Ring, rows: Vec<SparseVec>, ncols: usize) -> (Vec<SparseVec>, Vec<usize>) {
    let mut rows: Vec<SparseVec> = rows.into_iter().filter(|r| !r.is_empty()).collect();
    let mut pivots: Vec<(usize, SparseVec)> = Vec::new();
    let mut by_col: HashMap<usize, usize> = HashMap::new();
    for row in rows.drain(..) {
        // Reduce against existing pivots, lowest column first.
        let mut row = row;
        loop {
            let hit = row.iter().find(|(c, _)| by_col.contains_key(c)).copied();
            let Some((c, x)) = hit else { break };
            let p = &pivots[by_col[&c]].1;
            row = vec_sub(ring, &row, &vec_scale(ring, p, x));
        }
        if let Some(&(c, x)) = row.first() {
            let inv = ring.inv(x).expect("field");
            let row = vec_scale(ring, &row, inv);
            // Keep earlier pivot rows reduced in the new pivot column.
            for (_, p) in pivots.iter_mut() {
                let y = vec_get(p, c);
                if !y.is_zero() {
                    *p = vec_sub(ring, p, &vec_scale(ring, &row, y));
                }
            }
            by_col.insert(c, pivots.len());
            pivots.push((c, row));
        }
    }
    let _ = ncols;
    pivots.sort_by_key(|e| e.0);
    let cols = pivots.iter().map(|e| e.0).collect();
    (pivots.into_iter().map(|e| e.1).collect(), cols)
}

/// A spanning set of the kernel. Over a field the vectors are independent and
/// number `cols − rank`; over ℤ they form a basis of the kernel lattice.
pub fn kernel_basis(ring: Ring, m: &SparseMatrix) -> Vec<SparseVec> {
    match ring {
        Ring::PrimeField(_) => {
            let (rows, piv) = rref(ring, m.transpose().cols, m.cols());
            let pivset: std::collections::HashSet<usize> = piv.iter().copied().collect();
            (0..m.cols())
                .filter(|c| !pivset.contains(c))
                .map(|f| {
                    let mut v = vec![(f, Scalar::ONE)];
                    for (row, &pc) in rows.iter().zip(&piv) {
                        let x = vec_get(row, f);
                        if !x.is_zero() {
                            v.push((pc, ring.neg(x)));
                        }
                    }
                    v.sort_by_key(|e| e.0);
                    v
                })
                .collect()
        }
        _ => {
            let rows = integral_rows(m);
            let im = SparseMatrix::from_triplets(Ring::Integers, m.rows(), m.cols(), rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |&(c, x)| (r, c, Scalar { num: x, den: 1 }))));
            let (_, d, v) = smith_normal_form(&im);
            let r = (0..d.rows().min(d.cols())).filter(|&i| !d.get(i, i).is_zero()).count();
            (r..m.cols()).map(|j| v.column(j).to_vec()).collect()
        }
    }
}

/// Whether every vector lies in the column span of `m` (the integral span
/// over ℤ). Over ℤ this compares invariant factors of `m` and `[m | vs]`: the
/// inclusion of cokernels is onto, and a surjection between isomorphic
/// finitely generated abelian groups is injective.
pub fn span_contains_all(ring: Ring, m: &SparseMatrix, vs: &[SparseVec]) -> bool {
    if vs.iter().all(|v| v.is_empty()) {
        return true;
    }
    let mut cols = m.columns().to_vec();
    cols.extend(vs.iter().cloned());
    let ext = SparseMatrix::from_columns(m.rows(), cols);
    match ring {
        Ring::Integers => invariant_factors(m) == invariant_factors(&ext),
        _ => rank(ring, m) == rank(ring, &ext),
    }
}

/// Solves `M·x = b`; over ℤ only integral solutions count.
pub fn solve_linear(ring: Ring, m: &SparseMatrix, b: &[(usize, Scalar)]) -> Result<Option<SparseVec>, LinalgError> {
    if b.iter().any(|&(i, _)| i >= m.rows()) {
        return Err(LinalgError::Dimension(format!("rhs index outside {} rows", m.rows())));
    }
    match ring {
        Ring::PrimeField(_) => {
            // Augment with b as an extra column and reduce.
            let n = m.cols();
            let mut rows = m.transpose().cols;
            for &(i, x) in b {
                rows[i].push((n, x));
            }
            let (rows, piv) = rref(ring, rows, n + 1);
            if piv.last() == Some(&n) {
                return Ok(None);
            }
            let x = rows.iter().zip(&piv).map(|(row, &pc)| (pc, vec_get(row, n))).filter(|e| !e.1.is_zero()).collect();
            Ok(Some(x))
        }
        _ => {
            // Scale rows to integers; scaling b alongside keeps the system equivalent.
            let t = m.transpose();
            let mut im_rows = Vec::with_capacity(m.rows());
            let mut rhs = vec![(0i64, 1i64); m.rows()];
            for &(i, x) in b {
                rhs[i] = (x.num, x.den);
            }
            for (r, row) in t.cols.iter().enumerate() {
                let mut l = row.iter().fold(1i64, |l, &(_, x)| ck(l.checked_mul(x.den / gcd(l, x.den))));
                l = ck(l.checked_mul(rhs[r].1 / gcd(l, rhs[r].1)));
                im_rows.push((row.iter().map(|&(c, x)| (c, ck(x.num.checked_mul(l / x.den)))).collect::<Vec<_>>(), ck(rhs[r].0.checked_mul(l / rhs[r].1))));
            }
            let im = SparseMatrix::from_triplets(Ring::Integers, m.rows(), m.cols(), im_rows.iter().enumerate().flat_map(|(r, (row, _))| row.iter().map(move |&(c, x)| (r, c, Scalar { num: x, den: 1 }))));
            let (u, d, v) = smith_normal_form(&im);
            let bi: SparseVec = im_rows.iter().enumerate().filter(|(_, e)| e.1 != 0).map(|(r, e)| (r, Scalar { num: e.1, den: 1 })).collect();
            let ub = u.apply(Ring::Integers, &bi);
            let mut y = Vec::new();
            for &(i, x) in &ub {
                let di = if i < d.cols() { d.get(i, i) } else { Scalar::ZERO };
                if di.is_zero() {
                    return Ok(None);
                }
                match ring.frac(x.num, di.num) {
                    Some(q) => y.push((i, q)),
                    None => return Ok(None),
                }
            }
            Ok(Some(v.apply(ring, &y)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: &SparseMatrix) -> Vec<Vec<i64>> {
        m.to_dense().iter().map(|r| r.iter().map(|x| x.to_int()).collect()).collect()
    }

    fn det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 0 {
            return 1;
        }
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, &x)| x).collect()).collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] * det(&minor)
            })
            .sum()
    }

    #[test]
    fn snf_zero_and_diagonal() {
        let z = Ring::Integers;
        let (_, d, _) = smith_normal_form(&SparseMatrix::zero(2, 2));
        assert!(d.is_zero());
        let (_, d, _) = smith_normal_form(&SparseMatrix::from_dense(z, &[vec![2]]));
        assert_eq!(dense(&d), vec![vec![2]]);
    }

    #[test]
    fn snf_identity_on_fixed_matrix() {
        let z = Ring::Integers;
        let m = SparseMatrix::from_dense(z, &[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let (u, d, v) = smith_normal_form(&m);
        assert_eq!(u.mul(z, &m).unwrap().mul(z, &v).unwrap(), d);
        assert_eq!(dense(&d), vec![vec![2, 0, 0], vec![0, 6, 0], vec![0, 0, 12]]);
        assert_eq!(det(&dense(&u)).abs(), 1);
        assert_eq!(det(&dense(&v)).abs(), 1);
        assert_eq!(invariant_factors(&m), vec![2, 6, 12]);
    }

    #[test]
    fn kernel_examples() {
        let f2 = Ring::PrimeField(2);
        assert!(kernel_basis(f2, &SparseMatrix::identity(3)).is_empty());
        assert_eq!(kernel_basis(f2, &SparseMatrix::zero(2, 3)).len(), 3);
        let k = kernel_basis(f2, &SparseMatrix::from_dense(f2, &[vec![1, 1], vec![1, 1]]));
        // Exhaustive: of the four vectors in 𝔽_2², only 0 and (1,1) are killed.
        assert_eq!(k, vec![vec![(0, Scalar::ONE), (1, Scalar::ONE)]]);
    }

    #[test]
    fn solve_examples() {
        let z = Ring::Integers;
        let q = Ring::Rationals;
        let b = vec![(0, z.int(3)), (1, z.int(-2))];
        assert_eq!(solve_linear(z, &SparseMatrix::identity(2), &b).unwrap(), Some(b.clone()));
        let two = SparseMatrix::from_dense(z, &[vec![2]]);
        assert_eq!(solve_linear(z, &two, &[(0, z.int(1))]).unwrap(), None);
        assert_eq!(solve_linear(q, &two, &[(0, q.int(1))]).unwrap(), Some(vec![(0, q.frac(1, 2).unwrap())]));
        assert!(solve_linear(z, &two, &[(3, z.int(1))]).is_err());
    }

    #[test]
    fn field_arithmetic() {
        let f5 = Ring::PrimeField(5);
        assert_eq!(f5.inv(f5.int(2)), Some(f5.int(3)));
        assert_eq!(f5.int(-1), f5.int(4));
        assert!(Ring::prime_field(6).is_err());
        let q = Ring::Rationals;
        assert_eq!(q.add(q.frac(1, 2).unwrap(), q.frac(1, 3).unwrap()), q.frac(5, 6).unwrap());
        assert_eq!(q.parse("-3/6"), q.frac(-1, 2));
    }

    #[test]
    fn rank_agrees_across_methods() {
        let m = SparseMatrix::from_dense(Ring::Integers, &[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(rank(Ring::Integers, &m), 2);
        // Mod 2 the first two rows vanish or coincide with the third.
        assert_eq!(rank(Ring::PrimeField(2), &m.change_ring(Ring::PrimeField(2))), 1);
        assert_eq!(rank(Ring::PrimeField(3), &m.change_ring(Ring::PrimeField(3))), 2);
        let m2 = SparseMatrix::from_dense(Ring::Integers, &[vec![2]]);
        assert_eq!(rank(Ring::PrimeField(2), &m2.change_ring(Ring::PrimeField(2))), 0);
    }
}
