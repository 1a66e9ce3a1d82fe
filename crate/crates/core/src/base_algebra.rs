//! Arithmetic over F2 and over R = F2[U,V]/(UV), with bigrading bookkeeping.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A monomial of R. `U(k)` and `V(k)` always have `k >= 1`; use the
/// constructors to normalize zero exponents to `One`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RMonomial {
    One,
    U(u32),
    V(u32),
}

impl RMonomial {
    pub fn u(k: u32) -> Self {
        if k == 0 {
            RMonomial::One
        } else {
            RMonomial::U(k)
        }
    }

    pub fn v(k: u32) -> Self {
        if k == 0 {
            RMonomial::One
        } else {
            RMonomial::V(k)
        }
    }

    /// Product in R; `None` when a U-power meets a V-power.
    pub fn mul(self, other: RMonomial) -> Option<RMonomial> {
        use RMonomial::*;
        match (self, other) {
            (One, m) | (m, One) => Some(m),
            (U(a), U(b)) => Some(U(a + b)),
            (V(a), V(b)) => Some(V(a + b)),
            _ => None,
        }
    }

    /// The U <-> V conjugate.
    pub fn swap(self) -> Self {
        match self {
            RMonomial::One => RMonomial::One,
            RMonomial::U(k) => RMonomial::V(k),
            RMonomial::V(k) => RMonomial::U(k),
        }
    }

    pub fn u_exp(self) -> u32 {
        match self {
            RMonomial::U(k) => k,
            _ => 0,
        }
    }

    pub fn v_exp(self) -> u32 {
        match self {
            RMonomial::V(k) => k,
            _ => 0,
        }
    }

    pub fn exponent(self) -> u32 {
        self.u_exp() + self.v_exp()
    }

    pub fn is_one(self) -> bool {
        self == RMonomial::One
    }

    /// The unique monomial of bidegree `delta`, if any.
    pub fn with_bidegree(delta: Bigrading) -> Option<RMonomial> {
        match (delta.gr_u, delta.gr_v) {
            (0, 0) => Some(RMonomial::One),
            (u, 0) if u < 0 && u % 2 == 0 => Some(RMonomial::U((-u / 2) as u32)),
            (0, v) if v < 0 && v % 2 == 0 => Some(RMonomial::V((-v / 2) as u32)),
            _ => None,
        }
    }

    pub fn bidegree(self) -> Bigrading {
        grading_shift(Bigrading::new(0, 0), self)
    }
}

impl fmt::Display for RMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RMonomial::One => write!(f, "1"),
            RMonomial::U(1) => write!(f, "U"),
            RMonomial::V(1) => write!(f, "V"),
            RMonomial::U(k) => write!(f, "U^{k}"),
            RMonomial::V(k) => write!(f, "V^{k}"),
        }
    }
}

impl FromStr for RMonomial {
    type Err = String;

    /// Strict canonical form: `1`, `U`, `V`, `U^k`, `V^k` with `k >= 2`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "1" => return Ok(RMonomial::One),
            "U" => return Ok(RMonomial::U(1)),
            "V" => return Ok(RMonomial::V(1)),
            _ => {}
        }
        let (var, exp) = s
            .split_once('^')
            .ok_or_else(|| format!("bad monomial `{s}`"))?;
        let k: u32 = exp
            .parse()
            .map_err(|_| format!("bad exponent in `{s}`"))?;
        if k < 2 || exp.starts_with('0') || exp.starts_with('+') {
            return Err(format!("non-canonical monomial `{s}`"));
        }
        match var {
            "U" => Ok(RMonomial::U(k)),
            "V" => Ok(RMonomial::V(k)),
            _ => Err(format!("bad monomial `{s}`")),
        }
    }
}

/// An element of R: a finite set of monomials with F2 coefficients.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RElem {
    terms: BTreeSet<RMonomial>,
}

impl RElem {
    pub fn zero() -> Self {
        RElem::default()
    }

    pub fn one() -> Self {
        RElem::from(RMonomial::One)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = RMonomial> + '_ {
        self.terms.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, m: RMonomial) -> bool {
        self.terms.contains(&m)
    }

    pub fn add_monomial(&mut self, m: RMonomial) {
        if !self.terms.remove(&m) {
            self.terms.insert(m);
        }
    }

    pub fn add_assign(&mut self, other: &RElem) {
        for m in other.terms() {
            self.add_monomial(m);
        }
    }

    pub fn add(&self, other: &RElem) -> RElem {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn mul_monomial(&self, m: RMonomial) -> RElem {
        let mut out = RElem::zero();
        for t in self.terms() {
            if let Some(p) = t.mul(m) {
                out.add_monomial(p);
            }
        }
        out
    }

    pub fn swap(&self) -> RElem {
        RElem { terms: self.terms().map(RMonomial::swap).collect() }
    }

    /// Formal derivative in U, reduced mod 2.
    pub fn d_du(&self) -> RElem {
        let mut out = RElem::zero();
        for t in self.terms() {
            if let RMonomial::U(k) = t {
                if k % 2 == 1 {
                    out.add_monomial(RMonomial::u(k - 1));
                }
            }
        }
        out
    }

    /// Formal derivative in V, reduced mod 2.
    pub fn d_dv(&self) -> RElem {
        self.swap().d_du().swap()
    }

    /// Evaluate at U = V = 0.
    pub fn hat(&self) -> bool {
        self.contains(RMonomial::One)
    }

    pub fn max_exponent(&self) -> u32 {
        self.terms().map(RMonomial::exponent).max().unwrap_or(0)
    }
}

impl From<RMonomial> for RElem {
    fn from(m: RMonomial) -> Self {
        RElem { terms: BTreeSet::from([m]) }
    }
}

impl FromIterator<RMonomial> for RElem {
    fn from_iter<I: IntoIterator<Item = RMonomial>>(iter: I) -> Self {
        let mut out = RElem::zero();
        for m in iter {
            out.add_monomial(m);
        }
        out
    }
}

impl fmt::Display for RElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Product in R.
pub fn rmul(a: &RElem, b: &RElem) -> RElem {
    let mut out = RElem::zero();
    for x in a.terms() {
        for y in b.terms() {
            if let Some(p) = x.mul(y) {
                out.add_monomial(p);
            }
        }
    }
    out
}

/// Bigrading `(grU, grV)`; the differential has bidegree `(-1,-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Bigrading {
    pub gr_u: i64,
    pub gr_v: i64,
}

impl Bigrading {
    pub const fn new(gr_u: i64, gr_v: i64) -> Self {
        Bigrading { gr_u, gr_v }
    }

    /// Twice the Alexander grading.
    pub fn alexander2(self) -> i64 {
        self.gr_u - self.gr_v
    }

    /// The Alexander grading, when integral.
    pub fn alexander(self) -> Option<i64> {
        let a2 = self.alexander2();
        (a2 % 2 == 0).then_some(a2 / 2)
    }

    pub fn swap(self) -> Self {
        Bigrading::new(self.gr_v, self.gr_u)
    }

    pub fn neg(self) -> Self {
        Bigrading::new(-self.gr_u, -self.gr_v)
    }

    pub fn add(self, o: Bigrading) -> Self {
        Bigrading::new(self.gr_u + o.gr_u, self.gr_v + o.gr_v)
    }

    pub fn sub(self, o: Bigrading) -> Self {
        Bigrading::new(self.gr_u - o.gr_u, self.gr_v - o.gr_v)
    }
}

impl fmt::Display for Bigrading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.gr_u, self.gr_v)
    }
}

/// Grading of `m * x` where `gr(x) = g`.
pub fn grading_shift(g: Bigrading, m: RMonomial) -> Bigrading {
    Bigrading::new(g.gr_u - 2 * m.u_exp() as i64, g.gr_v - 2 * m.v_exp() as i64)
}

/// A dense bit vector used by the F2 solvers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, b: bool) {
        if b {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_assign(&mut self, o: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }

    pub fn first_one(&self) -> Option<usize> {
        self.ones().next()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }
}

/// Sparse F2 matrix stored as a set of nonzero positions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct F2Matrix {
    rows: usize,
    cols: usize,
    entries: BTreeSet<(usize, usize)>,
}

impl F2Matrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        F2Matrix { rows, cols, entries: BTreeSet::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = F2Matrix::new(n, n);
        for i in 0..n {
            m.toggle(i, i);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<bool>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = F2Matrix::new(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Dimension("ragged rows".into()));
            }
            for (j, &b) in r.iter().enumerate() {
                if b {
                    m.toggle(i, j);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries.contains(&(i, j))
    }

    /// Flip entry `(i, j)`. Panics when out of bounds.
    pub fn toggle(&mut self, i: usize, j: usize) {
        assert!(i < self.rows && j < self.cols, "F2Matrix index out of bounds");
        if !self.entries.remove(&(i, j)) {
            self.entries.insert((i, j));
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn mul_vec(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        let mut out = vec![false; self.rows];
        for &(i, j) in &self.entries {
            if x[j] {
                out[i] ^= true;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, o: &F2Matrix) -> Result<F2Matrix> {
        if self.cols != o.rows {
            return Err(Error::Dimension("matrix product".into()));
        }
        let mut by_row: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(k, j) in &o.entries {
            by_row.entry(k).or_default().push(j);
        }
        let mut out = F2Matrix::new(self.rows, o.cols);
        for &(i, k) in &self.entries {
            if let Some(js) = by_row.get(&k) {
                for &j in js {
                    out.toggle(i, j);
                }
            }
        }
        Ok(out)
    }

    fn dense_rows(&self) -> Vec<BitVec> {
        let mut rows = vec![BitVec::zeros(self.cols); self.rows];
        for &(i, j) in &self.entries {
            rows[i].flip(j);
        }
        rows
    }

    pub fn rank(&self) -> usize {
        let mut sys = LinearSystem::new(self.cols);
        for r in self.dense_rows() {
            sys.push(r, false);
        }
        sys.rank()
    }

    /// A basis of `{x : Ax = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<bool>> {
        let mut sys = LinearSystem::new(self.cols);
        for r in self.dense_rows() {
            sys.push(r, false);
        }
        sys.nullspace().into_iter().map(|v| v.to_bools()).collect()
    }
}

/// Some `x` with `Ax = b`, or `None`. Pivots are chosen column by column,
/// left to right, taking the lowest-index remaining row; free variables are 0.
pub fn f2_solve(a: &F2Matrix, b: &[bool]) -> Result<Option<Vec<bool>>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for {} rows",
            b.len(),
            a.rows()
        )));
    }
    let mut sys = LinearSystem::new(a.cols());
    for (r, &bi) in a.dense_rows().into_iter().zip(b) {
        sys.push(r, bi);
    }
    Ok(sys.solve().map(|x| x.to_bools()))
}

/// Incrementally assembled F2 linear system `rows * x = rhs`.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    nvars: usize,
    rows: Vec<BitVec>,
    rhs: Vec<bool>,
}

impl LinearSystem {
    pub fn new(nvars: usize) -> Self {
        LinearSystem { nvars, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, row: BitVec, rhs: bool) {
        debug_assert_eq!(row.len(), self.nvars);
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// Push an equation given by its set of variables.
    pub fn push_sparse(&mut self, vars: impl IntoIterator<Item = usize>, rhs: bool) {
        let mut row = BitVec::zeros(self.nvars);
        for v in vars {
            row.flip(v);
        }
        self.push(row, rhs);
    }

    /// Row-reduce; returns pivot columns with their (reduced) rows and the
    /// consistency flag.
    fn eliminate(&self) -> (Vec<(usize, BitVec, bool)>, bool) {
        let mut rows: Vec<(BitVec, bool)> = self
            .rows
            .iter()
            .cloned()
            .zip(self.rhs.iter().copied())
            .filter(|(r, b)| !r.is_zero() || *b)
            .collect();
        let mut pivots: Vec<(usize, BitVec, bool)> = Vec::new();
        let mut done = vec![false; rows.len()];
        for col in 0..self.nvars {
            let Some(pi) = (0..rows.len()).find(|&i| !done[i] && rows[i].0.get(col)) else {
                continue;
            };
            done[pi] = true;
            let (prow, pb) = rows[pi].clone();
            for (i, (r, b)) in rows.iter_mut().enumerate() {
                if !done[i] && r.get(col) {
                    r.xor_assign(&prow);
                    *b ^= pb;
                }
            }
            for (_, r, b) in pivots.iter_mut() {
                if r.get(col) {
                    r.xor_assign(&prow);
                    *b ^= pb;
                }
            }
            pivots.push((col, prow, pb));
        }
        let consistent = rows
            .iter()
            .zip(&done)
            .all(|((r, b), &d)| d || !(r.is_zero() && *b));
        (pivots, consistent)
    }

    pub fn rank(&self) -> usize {
        self.eliminate().0.len()
    }

    pub fn solve(&self) -> Option<BitVec> {
        let (pivots, consistent) = self.eliminate();
        if !consistent {
            return None;
        }
        let mut x = BitVec::zeros(self.nvars);
        for (col, _, b) in pivots {
            x.set(col, b);
        }
        Some(x)
    }

    /// Basis of the homogeneous solution space.
    pub fn nullspace(&self) -> Vec<BitVec> {
        let (pivots, _) = self.eliminate();
        let pivot_cols: BTreeSet<usize> = pivots.iter().map(|p| p.0).collect();
        let mut out = Vec::new();
        for free in (0..self.nvars).filter(|c| !pivot_cols.contains(c)) {
            let mut v = BitVec::zeros(self.nvars);
            v.set(free, true);
            for (col, row, _) in &pivots {
                if row.get(free) {
                    v.set(*col, true);
                }
            }
            out.push(v);
        }
        out
    }
}

/// Matrix over R stored by columns: column `j` is the image of basis vector
/// `j`. When `skew` is set the map is U/V-skew linear: `f(U x) = V f(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RMatrix {
    rows: usize,
    cols: Vec<BTreeMap<usize, RElem>>,
    pub skew: bool,
}

impl RMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols: vec![BTreeMap::new(); cols], skew: false }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, RElem::one());
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, i: usize, j: usize) -> RElem {
        self.cols[j].get(&i).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, i: usize, j: usize, e: RElem) {
        assert!(i < self.rows, "RMatrix row out of bounds");
        if e.is_zero() {
            self.cols[j].remove(&i);
        } else {
            self.cols[j].insert(i, e);
        }
    }

    pub fn add_at(&mut self, i: usize, j: usize, e: &RElem) {
        let cur = self.get(i, j).add(e);
        self.set(i, j, cur);
    }

    pub fn add_monomial_at(&mut self, i: usize, j: usize, m: RMonomial) {
        let mut cur = self.get(i, j);
        cur.add_monomial(m);
        self.set(i, j, cur);
    }

    /// Nonzero entries of column `j` as `(row, entry)`.
    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, &RElem)> + '_ {
        self.cols[j].iter().map(|(&i, e)| (i, e))
    }

    /// All nonzero entries as `(row, col, entry)`, column-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &RElem)> + '_ {
        self.cols
            .iter()
            .enumerate()
            .flat_map(|(j, c)| c.iter().map(move |(&i, e)| (i, j, e)))
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(BTreeMap::is_empty)
    }

    pub fn add(&self, o: &RMatrix) -> Result<RMatrix> {
        if self.rows != o.rows || self.ncols() != o.ncols() {
            return Err(Error::Dimension("matrix sum".into()));
        }
        if self.skew != o.skew && !self.is_zero() && !o.is_zero() {
            return Err(Error::Dimension("sum of linear and skew-linear maps".into()));
        }
        let mut out = self.clone();
        out.skew = if self.is_zero() { o.skew } else { self.skew };
        for (i, j, e) in o.entries() {
            out.add_at(i, j, e);
        }
        Ok(out)
    }

    /// `self ∘ o`. Entries of `o` are conjugated when `self` is skew; the
    /// composite is skew iff exactly one factor is.
    pub fn compose(&self, o: &RMatrix) -> Result<RMatrix> {
        if self.ncols() != o.rows {
            return Err(Error::Dimension(format!(
                "compose {}x{} after {}x{}",
                self.rows,
                self.ncols(),
                o.rows,
                o.ncols()
            )));
        }
        let mut out = RMatrix::zero(self.rows, o.ncols());
        out.skew = self.skew ^ o.skew;
        for j in 0..o.ncols() {
            for (k, b) in o.column(j) {
                let b = if self.skew { b.swap() } else { b.clone() };
                for (i, a) in self.column(k) {
                    out.add_at(i, j, &rmul(a, &b));
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> RMatrix {
        let mut out = RMatrix::zero(self.ncols(), self.rows);
        out.skew = self.skew;
        for (i, j, e) in self.entries() {
            out.set(j, i, e.clone());
        }
        out
    }

    pub fn map_entries(&self, f: impl Fn(&RElem) -> RElem) -> RMatrix {
        let mut out = RMatrix::zero(self.rows, self.ncols());
        out.skew = self.skew;
        for (i, j, e) in self.entries() {
            out.set(i, j, f(e));
        }
        out
    }

    /// Restrict to the given rows and columns (in the given orders).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> RMatrix {
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(a, &r)| (r, a)).collect();
        let mut out = RMatrix::zero(rows.len(), cols.len());
        out.skew = self.skew;
        for (b, &c) in cols.iter().enumerate() {
            for (i, e) in self.column(c) {
                if let Some(&a) = pos.get(&i) {
                    out.set(a, b, e.clone());
                }
            }
        }
        out
    }

    pub fn max_exponent(&self) -> u32 {
        self.entries().map(|(_, _, e)| e.max_exponent()).max().unwrap_or(0)
    }

    /// The F2 matrix obtained by setting U = V = 0.
    pub fn hat(&self) -> F2Matrix {
        let mut m = F2Matrix::new(self.rows, self.ncols());
        for (i, j, e) in self.entries() {
            if e.hat() {
                m.toggle(i, j);
            }
        }
        m
    }
}

#[cfg(test)]
mod test {
    use super::*;
    use proptest::prelude::*;

    fn e(ms: &[RMonomial]) -> RElem {
        ms.iter().copied().collect()
    }

    #[test]
    fn rmul_examples() {
        use RMonomial::*;
        assert_eq!(rmul(&e(&[U(2)]), &e(&[U(3)])), e(&[U(5)]));
        assert!(rmul(&e(&[U(1)]), &e(&[V(1)])).is_zero());
        assert_eq!(rmul(&e(&[One, U(1)]), &e(&[One, V(1)])), e(&[One, U(1), V(1)]));
    }

    #[test]
    fn monomial_text_is_strict() {
        for s in ["1", "U", "V", "U^2", "V^17"] {
            let m: RMonomial = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        for s in ["U^1", "U^0", "V^02", "W", "U^", "u"] {
            assert!(s.parse::<RMonomial>().is_err(), "{s}");
        }
    }

    #[test]
    fn grading_shift_examples() {
        assert_eq!(grading_shift(Bigrading::new(0, 0), RMonomial::U(3)), Bigrading::new(-6, 0));
        assert_eq!(grading_shift(Bigrading::new(2, 4), RMonomial::V(2)), Bigrading::new(2, 0));
        // gr(a) = (0,0), d a contains U^n b with gr(b) = (2n-1,-1)
        let n = 3;
        let b = Bigrading::new(2 * n - 1, -1);
        let shifted = grading_shift(b, RMonomial::U(n as u32));
        assert_eq!(shifted, Bigrading::new(-1, -1));
    }

    #[test]
    fn solve_examples() {
        let id = F2Matrix::identity(3);
        assert_eq!(f2_solve(&id, &[true, false, false]).unwrap(), Some(vec![true, false, false]));
        let z = F2Matrix::new(2, 2);
        assert_eq!(f2_solve(&z, &[true, false]).unwrap(), None);
        assert!(f2_solve(&z, &[true]).is_err());
    }

    #[test]
    fn solve_free_variable_is_zero() {
        // x0 + x1 = 1, x1 + x2 = 1: rank 2, x2 free.
        let a = F2Matrix::from_dense(&[vec![true, true, false], vec![false, true, true]]).unwrap();
        let b = [true, true];
        let brute: Vec<Vec<bool>> = (0..8u8)
            .map(|k| (0..3).map(|i| k >> i & 1 == 1).collect::<Vec<_>>())
            .filter(|x| a.mul_vec(x).unwrap() == b)
            .collect();
        assert_eq!(brute.len(), 2);
        let x = f2_solve(&a, &b).unwrap().unwrap();
        assert!(brute.contains(&x));
        assert!(!x[2]);
        assert_eq!(x, vec![false, true, false]);
    }

    #[test]
    fn skew_composition() {
        let mut f = RMatrix::zero(1, 1);
        f.set(0, 0, RElem::from(RMonomial::U(1)));
        let mut s = RMatrix::identity(1);
        s.skew = true;
        let sf = s.compose(&f).unwrap();
        assert!(sf.skew);
        assert_eq!(sf.get(0, 0), RElem::from(RMonomial::V(1)));
        let fs = f.compose(&s).unwrap();
        assert_eq!(fs.get(0, 0), RElem::from(RMonomial::U(1)));
        let ss = s.compose(&s).unwrap();
        assert!(!ss.skew);
    }

    fn arb_monomial() -> impl Strategy<Value = RMonomial> {
        prop_oneof![
            Just(RMonomial::One),
            (1u32..5).prop_map(RMonomial::U),
            (1u32..5).prop_map(RMonomial::V),
        ]
    }

    fn arb_elem() -> impl Strategy<Value = RElem> {
        proptest::collection::vec(arb_monomial(), 0..5).prop_map(|v| v.into_iter().collect())
    }

    fn arb_f2(rows: usize, cols: usize) -> impl Strategy<Value = F2Matrix> {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), cols), rows)
            .prop_map(|r| F2Matrix::from_dense(&r).unwrap())
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_elem(), b in arb_elem(), c in arb_elem()) {
            prop_assert_eq!(rmul(&a, &b), rmul(&b, &a));
            prop_assert_eq!(rmul(&rmul(&a, &b), &c), rmul(&a, &rmul(&b, &c)));
            prop_assert_eq!(rmul(&a, &b.add(&c)), rmul(&a, &b).add(&rmul(&a, &c)));
            prop_assert!(rmul(&RElem::from(RMonomial::U(1)), &RElem::from(RMonomial::V(1))).is_zero());
        }

        #[test]
        fn shift_is_additive(a in 0u32..6, b in 0u32..6, g in -10i64..10, h in -10i64..10) {
            let g0 = Bigrading::new(g, h);
            let twice = grading_shift(grading_shift(g0, RMonomial::u(a)), RMonomial::u(b));
            prop_assert_eq!(twice, grading_shift(g0, RMonomial::u(a + b)));
        }

        #[test]
        fn solve_is_sound(a in arb_f2(5, 6), b in proptest::collection::vec(any::<bool>(), 5)) {
            match f2_solve(&a, &b).unwrap() {
                Some(x) => prop_assert_eq!(a.mul_vec(&x).unwrap(), b),
                None => {
                    // b is outside the column space: augmenting raises the rank.
                    let mut aug = a.clone();
                    let mut wide = F2Matrix::new(a.rows(), a.cols() + 1);
                    for (i, j) in aug.entries() { wide.toggle(i, j); }
                    for (i, &bi) in b.iter().enumerate() { if bi { wide.toggle(i, a.cols()); } }
                    aug = wide;
                    prop_assert_eq!(aug.rank(), a.rank() + 1);
                }
            }
        }

        #[test]
        fn nullspace_is_kernel(a in arb_f2(4, 7)) {
            let ns = a.nullspace();
            prop_assert_eq!(ns.len() + a.rank(), 7);
            for v in ns {
                prop_assert!(a.mul_vec(&v).unwrap().iter().all(|&b| !b));
            }
        }
    }
}
