//! Knot Floer complexes over R = F2[U,V]/(UV).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::base_algebra::{grading_shift, rmul, BitVec, Bigrading, LinearSystem, RElem, RMatrix, RMonomial};
use crate::error::{Error, Result};

/// A free, finitely generated, bigraded complex over R. Column `j` of `d`
/// is the boundary of generator `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfkComplex {
    pub names: Vec<String>,
    pub gradings: Vec<Bigrading>,
    pub d: RMatrix,
    /// Leading `#` comment lines, kept for bit-exact round trips.
    pub header: Vec<String>,
}

/// One violation found by [`validate_cfk`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DSquared { from: String, to: String, coeff: RElem },
    Grading { from: String, to: String, monomial: RMonomial },
    HalfIntegralAlexander { generator: String },
    DuplicateName { name: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::DSquared { from, to, coeff } => {
                write!(f, "d^2 nonzero: coefficient {coeff} of {to} in d^2({from})")
            }
            Violation::Grading { from, to, monomial } => {
                write!(f, "grading violation on entry d {from} {to} {monomial}")
            }
            Violation::HalfIntegralAlexander { generator } => {
                write!(f, "half-integral Alexander grading on {generator}")
            }
            Violation::DuplicateName { name } => write!(f, "duplicate generator name {name}"),
        }
    }
}

impl CfkComplex {
    pub fn new(names: Vec<String>, gradings: Vec<Bigrading>, d: RMatrix) -> Self {
        CfkComplex { names, gradings, d, header: Vec::new() }
    }

    pub fn empty() -> Self {
        CfkComplex::new(Vec::new(), Vec::new(), RMatrix::zero(0, 0))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Builder used by tests and the builtin corpus.
    pub fn from_parts(gens: &[(&str, i64, i64)], arrows: &[(&str, &str, RMonomial)]) -> Result<Self> {
        let names: Vec<String> = gens.iter().map(|g| g.0.to_string()).collect();
        let gradings = gens.iter().map(|g| Bigrading::new(g.1, g.2)).collect();
        let mut d = RMatrix::zero(names.len(), names.len());
        for (from, to, m) in arrows {
            let j = names.iter().position(|n| n == from).ok_or_else(|| Error::Invalid(format!("unknown generator {from}")))?;
            let i = names.iter().position(|n| n == to).ok_or_else(|| Error::Invalid(format!("unknown generator {to}")))?;
            d.add_monomial_at(i, j, *m);
        }
        Ok(CfkComplex::new(names, gradings, d))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut header = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut gradings = Vec::new();
        let mut arrows: Vec<(usize, usize, usize, RMonomial)> = Vec::new();
        let mut in_header = true;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            if in_header && raw.starts_with('#') {
                header.push(raw.to_string());
                continue;
            }
            in_header = false;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "gen" => {
                    if toks.len() != 4 {
                        return Err(Error::parse(line_no, 1, "expected `gen <name> <grU> <grV>`"));
                    }
                    let gu = parse_int(toks[2], line_no, raw)?;
                    let gv = parse_int(toks[3], line_no, raw)?;
                    if names.iter().any(|n| n == toks[1]) {
                        return Err(Error::parse(line_no, col_of(raw, toks[1]), format!("duplicate generator {}", toks[1])));
                    }
                    names.push(toks[1].to_string());
                    gradings.push(Bigrading::new(gu, gv));
                }
                "d" => {
                    if toks.len() != 4 {
                        return Err(Error::parse(line_no, 1, "expected `d <from> <to> <monomial>`"));
                    }
                    let from = lookup(&names, toks[1], line_no, raw)?;
                    let to = lookup(&names, toks[2], line_no, raw)?;
                    let m: RMonomial = toks[3]
                        .parse()
                        .map_err(|e: String| Error::parse(line_no, col_of(raw, toks[3]), e))?;
                    arrows.push((from, to, line_no, m));
                }
                other => {
                    return Err(Error::parse(line_no, col_of(raw, other), format!("unknown directive `{other}`")));
                }
            }
        }
        let mut d = RMatrix::zero(names.len(), names.len());
        for (from, to, line_no, m) in arrows {
            if d.get(to, from).contains(m) {
                return Err(Error::parse(line_no, 1, "repeated differential entry"));
            }
            d.add_monomial_at(to, from, m);
        }
        Ok(CfkComplex { names, gradings, d, header })
    }

    /// Canonical text: header, generators in order, then entries sorted by
    /// source, target and monomial.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str(h);
            out.push('\n');
        }
        for (n, g) in self.names.iter().zip(&self.gradings) {
            let _ = writeln!(out, "gen {n} {} {}", g.gr_u, g.gr_v);
        }
        for j in 0..self.len() {
            for (i, e) in self.d.column(j) {
                for m in e.terms() {
                    let _ = writeln!(out, "d {} {} {m}", self.names[j], self.names[i]);
                }
            }
        }
        out
    }

    /// Arrows as `(from, to, monomial)` index triples.
    pub fn arrows(&self) -> Vec<(usize, usize, RMonomial)> {
        let mut out = Vec::new();
        for (i, j, e) in self.d.entries() {
            for m in e.terms() {
                out.push((j, i, m));
            }
        }
        out
    }

    /// The F2 complex at U = V = 0.
    pub fn hat_rank(&self) -> usize {
        self.len() - 2 * self.d.hat().rank()
    }

    pub fn with_header(mut self, header: &[&str]) -> Self {
        self.header = header.iter().map(|s| s.to_string()).collect();
        self
    }
}

fn col_of(raw: &str, tok: &str) -> usize {
    raw.find(tok).map_or(1, |p| p + 1)
}

fn parse_int(tok: &str, line_no: usize, raw: &str) -> Result<i64> {
    let v: i64 = tok
        .parse()
        .map_err(|_| Error::parse(line_no, col_of(raw, tok), format!("bad integer `{tok}`")))?;
    if v.to_string() != tok {
        return Err(Error::parse(line_no, col_of(raw, tok), format!("non-canonical integer `{tok}`")));
    }
    Ok(v)
}

fn lookup(names: &[String], tok: &str, line_no: usize, raw: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == tok)
        .ok_or_else(|| Error::parse(line_no, col_of(raw, tok), format!("unknown generator `{tok}`")))
}

/// All violations of d^2 = 0 and of the grading discipline.
pub fn validate_cfk(c: &CfkComplex) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in &c.names {
        if !seen.insert(n) {
            out.push(Violation::DuplicateName { name: n.clone() });
        }
    }
    for (i, j, e) in c.d.entries() {
        for m in e.terms() {
            let expected = c.gradings[j].sub(Bigrading::new(1, 1));
            if grading_shift(c.gradings[i], m) != expected {
                out.push(Violation::Grading { from: c.names[j].clone(), to: c.names[i].clone(), monomial: m });
            }
        }
    }
    if let Ok(d2) = c.d.compose(&c.d) {
        for (i, j, e) in d2.entries() {
            out.push(Violation::DSquared { from: c.names[j].clone(), to: c.names[i].clone(), coeff: e.clone() });
        }
    }
    for (n, g) in c.names.iter().zip(&c.gradings) {
        if g.alexander().is_none() {
            out.push(Violation::HalfIntegralAlexander { generator: n.clone() });
        }
    }
    out
}

/// A map between complexes of fixed bidegree; `matrix.skew` marks U/V-skew maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub matrix: RMatrix,
    pub bidegree: Bigrading,
}

impl ChainMap {
    pub fn new(matrix: RMatrix, bidegree: Bigrading) -> Self {
        ChainMap { matrix, bidegree }
    }

    pub fn identity(c: &CfkComplex) -> Self {
        ChainMap::new(RMatrix::identity(c.len()), Bigrading::default())
    }

    pub fn zero(src: &CfkComplex, tgt: &CfkComplex, bidegree: Bigrading) -> Self {
        ChainMap::new(RMatrix::zero(tgt.len(), src.len()), bidegree)
    }

    pub fn is_skew(&self) -> bool {
        self.matrix.skew
    }

    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap> {
        let bidegree = if self.is_skew() {
            first.bidegree.swap().add(self.bidegree)
        } else {
            first.bidegree.add(self.bidegree)
        };
        Ok(ChainMap::new(self.matrix.compose(&first.matrix)?, bidegree))
    }

    pub fn add(&self, o: &ChainMap) -> Result<ChainMap> {
        Ok(ChainMap::new(self.matrix.add(&o.matrix)?, self.bidegree))
    }

    /// Parse `[skew]`, `[bidegree <u> <v>]` and `map <from> <to> <monomial>`
    /// lines, resolving names in `src` and `tgt`.
    pub fn parse(text: &str, src: &CfkComplex, tgt: &CfkComplex) -> Result<Self> {
        let mut m = RMatrix::zero(tgt.len(), src.len());
        let mut bidegree = Bigrading::default();
        let mut seen_entry = false;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "skew" if toks.len() == 1 && !seen_entry => m.skew = true,
                "bidegree" if toks.len() == 3 && !seen_entry => {
                    bidegree = Bigrading::new(parse_int(toks[1], line_no, raw)?, parse_int(toks[2], line_no, raw)?);
                }
                "map" => {
                    if toks.len() != 4 {
                        return Err(Error::parse(line_no, 1, "expected `map <from> <to> <monomial>`"));
                    }
                    seen_entry = true;
                    let from = lookup(&src.names, toks[1], line_no, raw)?;
                    let to = lookup(&tgt.names, toks[2], line_no, raw)?;
                    let mono: RMonomial = toks[3]
                        .parse()
                        .map_err(|e: String| Error::parse(line_no, col_of(raw, toks[3]), e))?;
                    if m.get(to, from).contains(mono) {
                        return Err(Error::parse(line_no, 1, "repeated map entry"));
                    }
                    m.add_monomial_at(to, from, mono);
                }
                other => {
                    return Err(Error::parse(line_no, col_of(raw, other), format!("unexpected `{other}`")));
                }
            }
        }
        Ok(ChainMap::new(m, bidegree))
    }

    pub fn serialize(&self, src: &CfkComplex, tgt: &CfkComplex) -> String {
        let mut out = String::new();
        if self.is_skew() {
            out.push_str("skew\n");
        }
        let _ = writeln!(out, "bidegree {} {}", self.bidegree.gr_u, self.bidegree.gr_v);
        for j in 0..src.len() {
            for (i, e) in self.matrix.column(j) {
                for mono in e.terms() {
                    let _ = writeln!(out, "map {} {} {mono}", src.names[j], tgt.names[i]);
                }
            }
        }
        out
    }
}

/// Whether `d_T f = f d_S`.
pub fn is_chain_map(src: &CfkComplex, tgt: &CfkComplex, f: &RMatrix) -> Result<bool> {
    let lhs = tgt.d.compose(f)?;
    let rhs = f.compose(&src.d)?;
    Ok(lhs.add(&rhs)?.is_zero())
}

/// Grading of the image of source generator `j` before adding the bidegree.
fn source_grading(src: &CfkComplex, j: usize, skew: bool) -> Bigrading {
    if skew {
        src.gradings[j].swap()
    } else {
        src.gradings[j]
    }
}

/// Whether every entry of `f` has the declared bidegree.
pub fn respects_grading(src: &CfkComplex, tgt: &CfkComplex, f: &ChainMap) -> bool {
    f.matrix.entries().all(|(i, j, e)| {
        e.terms().all(|m| {
            grading_shift(tgt.gradings[i], m) == source_grading(src, j, f.is_skew()).add(f.bidegree)
        })
    })
}

/// Unknown entries `(row, col, monomial)` of a map `src -> tgt` of the given
/// bidegree, one per pair admitting a monomial of bounded exponent.
fn map_unknowns(src: &CfkComplex, tgt: &CfkComplex, bideg: Bigrading, skew: bool, bound: u32) -> Vec<(usize, usize, RMonomial)> {
    let mut out = Vec::new();
    for j in 0..src.len() {
        let want = source_grading(src, j, skew).add(bideg);
        for i in 0..tgt.len() {
            if let Some(m) = RMonomial::with_bidegree(want.sub(tgt.gradings[i])) {
                if m.exponent() <= bound {
                    out.push((i, j, m));
                }
            }
        }
    }
    out
}

/// The system `d_T X + X d_S = rhs` in the unknown entries of `X`.
fn commutator_system(src: &CfkComplex, tgt: &CfkComplex, unknowns: &[(usize, usize, RMonomial)], skew: bool, rhs: &RMatrix) -> LinearSystem {
    let mut eqs: BTreeMap<(usize, usize, RMonomial), (BTreeSet<usize>, bool)> = BTreeMap::new();
    let mut touch = |key: (usize, usize, RMonomial), var: Option<usize>| {
        let entry = eqs.entry(key).or_default();
        match var {
            Some(v) => {
                if !entry.0.remove(&v) {
                    entry.0.insert(v);
                }
            }
            None => entry.1 ^= true,
        }
    };
    for (v, &(k, j, m)) in unknowns.iter().enumerate() {
        for (i, e) in tgt.d.column(k) {
            for dm in e.terms() {
                if let Some(p) = dm.mul(m) {
                    touch((i, j, p), Some(v));
                }
            }
        }
        for jj in 0..src.len() {
            let e = src.d.get(j, jj);
            for dm in e.terms() {
                let dm = if skew { dm.swap() } else { dm };
                if let Some(p) = dm.mul(m) {
                    touch((k, jj, p), Some(v));
                }
            }
        }
    }
    for (i, j, e) in rhs.entries() {
        for m in e.terms() {
            touch((i, j, m), None);
        }
    }
    let mut sys = LinearSystem::new(unknowns.len());
    for (vars, b) in eqs.into_values() {
        sys.push_sparse(vars, b);
    }
    sys
}

fn matrix_from_solution(src: &CfkComplex, tgt: &CfkComplex, unknowns: &[(usize, usize, RMonomial)], x: &BitVec, skew: bool) -> RMatrix {
    let mut h = RMatrix::zero(tgt.len(), src.len());
    h.skew = skew;
    for v in x.ones() {
        let (i, j, m) = unknowns[v];
        h.add_monomial_at(i, j, m);
    }
    h
}

/// Some `h` with `f + g = d h + h d`, or `None`.
pub fn solve_homotopy(src: &CfkComplex, tgt: &CfkComplex, f: &ChainMap, g: &ChainMap) -> Result<Option<RMatrix>> {
    if f.is_skew() != g.is_skew() && !f.matrix.is_zero() && !g.matrix.is_zero() {
        return Err(Error::Invalid("homotopy between a linear and a skew map".into()));
    }
    let skew = f.is_skew() || g.is_skew();
    let rhs = f.matrix.add(&g.matrix)?;
    let bound = rhs
        .max_exponent()
        .max(src.d.max_exponent())
        .max(tgt.d.max_exponent())
        + (src.len() + tgt.len()) as u32;
    let hdeg = f.bidegree.add(Bigrading::new(1, 1));
    let unknowns = map_unknowns(src, tgt, hdeg, skew, bound);
    let sys = commutator_system(src, tgt, &unknowns, skew, &rhs);
    Ok(sys.solve().map(|x| matrix_from_solution(src, tgt, &unknowns, &x, skew)))
}

/// Whether `f` is nullhomotopic.
pub fn is_nullhomotopic(src: &CfkComplex, tgt: &CfkComplex, f: &ChainMap) -> Result<bool> {
    let zero = ChainMap::new(RMatrix::zero(tgt.len(), src.len()), f.bidegree);
    let mut z = zero;
    z.matrix.skew = f.is_skew();
    Ok(solve_homotopy(src, tgt, f, &z)?.is_some())
}

/// Basis of the space of chain maps `src -> tgt` of the given bidegree.
pub fn chain_map_basis(src: &CfkComplex, tgt: &CfkComplex, bideg: Bigrading, skew: bool) -> Vec<RMatrix> {
    let bound = src.d.max_exponent().max(tgt.d.max_exponent()) + (src.len() + tgt.len()) as u32;
    let unknowns = map_unknowns(src, tgt, bideg, skew, bound);
    let sys = commutator_system(src, tgt, &unknowns, skew, &RMatrix::zero(tgt.len(), src.len()));
    sys.nullspace()
        .iter()
        .map(|x| matrix_from_solution(src, tgt, &unknowns, x, skew))
        .collect()
}

/// Unit-coefficient part of a map.
pub fn constant_part(f: &RMatrix) -> crate::base_algebra::F2Matrix {
    f.hat()
}

/// A bidegree-0 chain isomorphism `c -> d`, searched over the linear space of
/// chain maps; exhaustive up to 2^20 combinations, seeded random beyond.
pub fn iso_cfk(c: &CfkComplex, d: &CfkComplex) -> Result<Option<RMatrix>> {
    if c.len() != d.len() {
        return Ok(None);
    }
    let mut gc = c.gradings.clone();
    let mut gd = d.gradings.clone();
    gc.sort();
    gd.sort();
    if gc != gd {
        return Ok(None);
    }
    if c.is_empty() {
        return Ok(Some(RMatrix::zero(0, 0)));
    }
    let basis = chain_map_basis(c, d, Bigrading::default(), false);
    Ok(find_invertible(&basis, c.len()))
}

/// Some combination of `basis` whose constant part is invertible.
pub(crate) fn find_invertible(basis: &[RMatrix], n: usize) -> Option<RMatrix> {
    let consts: Vec<crate::base_algebra::F2Matrix> = basis.iter().map(constant_part).collect();
    // Drop members with zero constant part: they never help invertibility.
    let useful: Vec<usize> = (0..basis.len()).filter(|&k| consts[k].nnz() > 0).collect();
    let combine = |mask: &dyn Fn(usize) -> bool| {
        let mut m = crate::base_algebra::F2Matrix::new(n, n);
        for (t, &k) in useful.iter().enumerate() {
            if mask(t) {
                for (i, j) in consts[k].entries() {
                    m.toggle(i, j);
                }
            }
        }
        m
    };
    let build = |mask: &dyn Fn(usize) -> bool| {
        let mut out = RMatrix::zero(n, n);
        for (t, &k) in useful.iter().enumerate() {
            if mask(t) {
                out = out.add(&basis[k]).expect("same shape");
            }
        }
        out
    };
    let dim = useful.len();
    if dim <= 20 {
        for bits in 1u64..(1u64 << dim) {
            let mask = |t: usize| bits >> t & 1 == 1;
            if combine(&mask).rank() == n {
                return Some(build(&mask));
            }
        }
        return None;
    }
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for _ in 0..20_000 {
        let bits: Vec<bool> = (0..dim)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state & 1 == 1
            })
            .collect();
        let mask = |t: usize| bits[t];
        if combine(&mask).rank() == n {
            return Some(build(&mask));
        }
    }
    None
}

/// Homotopy equivalence data produced by [`reduce`]: `f: C -> C_red`,
/// `g: C_red -> C`, and `h` on `C` with `id + g f = d h + h d`
/// (and `f g = id`).
#[derive(Debug, Clone)]
pub struct Reduction {
    pub complex: CfkComplex,
    pub f: RMatrix,
    pub g: RMatrix,
    pub h: RMatrix,
}

/// Cancel unit differential entries until none remain.
pub fn reduce(c: &CfkComplex) -> Reduction {
    let n = c.len();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut d = c.d.clone();
    let mut f = RMatrix::identity(n);
    let mut g = RMatrix::identity(n);
    let mut h = RMatrix::zero(n, n);
    loop {
        let m = alive.len();
        let pivot = (0..m).find_map(|x| d.column(x).find(|(_, e)| e.contains(RMonomial::One)).map(|(y, _)| (x, y)));
        let Some((x, y)) = pivot else { break };
        // Coefficient of y in dx is a unit; normalize by treating it as 1
        // after subtracting the non-unit part, which the grading forbids.
        let keep: Vec<usize> = (0..m).filter(|&k| k != x && k != y).collect();
        let mut nd = RMatrix::zero(keep.len(), keep.len());
        for (b, &w) in keep.iter().enumerate() {
            let dyw = d.get(y, w);
            for (a, &z) in keep.iter().enumerate() {
                let mut e = d.get(z, w);
                if !dyw.is_zero() {
                    e.add_assign(&rmul(&d.get(z, x), &dyw));
                }
                nd.set(a, b, e);
            }
        }
        // f_new = f_step ∘ f
        let mut f_step = RMatrix::zero(keep.len(), m);
        for (a, &w) in keep.iter().enumerate() {
            f_step.set(a, w, RElem::one());
            let dzx = d.get(w, x);
            if !dzx.is_zero() {
                f_step.set(a, y, dzx);
            }
        }
        let f_new = f_step.compose(&f).expect("shapes");
        // g_new(w) = g(w) + d_{yw} g(x)
        let gx: Vec<(usize, RElem)> = g.column(x).map(|(i, e)| (i, e.clone())).collect();
        let mut g_new = RMatrix::zero(n, keep.len());
        for (b, &w) in keep.iter().enumerate() {
            for (i, e) in g.column(w) {
                g_new.set(i, b, e.clone());
            }
            let dyw = d.get(y, w);
            if !dyw.is_zero() {
                for (i, e) in &gx {
                    g_new.add_at(*i, b, &rmul(&dyw, e));
                }
            }
        }
        // h_new(v) = h(v) + coeff_y(f(v)) g(x)
        for v in 0..n {
            let fy = f.get(y, v);
            if fy.is_zero() {
                continue;
            }
            for (i, e) in &gx {
                h.add_at(*i, v, &rmul(&fy, e));
            }
        }
        alive = keep.iter().map(|&k| alive[k]).collect();
        d = nd;
        f = f_new;
        g = g_new;
    }
    let complex = CfkComplex {
        names: alive.iter().map(|&k| c.names[k].clone()).collect(),
        gradings: alive.iter().map(|&k| c.gradings[k]).collect(),
        d,
        header: c.header.clone(),
    };
    Reduction { complex, f, g, h }
}

/// Direct sum; generator names are kept (callers keep them distinct).
pub fn direct_sum(a: &CfkComplex, b: &CfkComplex) -> CfkComplex {
    let n = a.len() + b.len();
    let mut d = RMatrix::zero(n, n);
    for (i, j, e) in a.d.entries() {
        d.set(i, j, e.clone());
    }
    for (i, j, e) in b.d.entries() {
        d.set(i + a.len(), j + a.len(), e.clone());
    }
    let names = a.names.iter().chain(&b.names).cloned().collect();
    let gradings = a.gradings.iter().chain(&b.gradings).copied().collect();
    CfkComplex::new(names, gradings, d)
}

/// Rename generators with a prefix, e.g. to keep direct sums distinct.
pub fn prefixed(c: &CfkComplex, prefix: &str) -> CfkComplex {
    let mut out = c.clone();
    out.names = c.names.iter().map(|n| format!("{prefix}{n}")).collect();
    out
}

/// The tensor product with the Leibniz differential.
pub fn tensor_connected_sum(a: &CfkComplex, b: &CfkComplex) -> CfkComplex {
    let n = a.len() * b.len();
    let idx = |i: usize, j: usize| i * b.len() + j;
    let mut d = RMatrix::zero(n, n);
    let mut names = Vec::with_capacity(n);
    let mut gradings = Vec::with_capacity(n);
    for i in 0..a.len() {
        for j in 0..b.len() {
            names.push(format!("{}.{}", a.names[i], b.names[j]));
            gradings.push(a.gradings[i].add(b.gradings[j]));
            for (k, e) in a.d.column(i) {
                d.add_at(idx(k, j), idx(i, j), e);
            }
            for (k, e) in b.d.column(j) {
                d.add_at(idx(i, k), idx(i, j), e);
            }
        }
    }
    CfkComplex::new(names, gradings, d)
}

/// Transpose the differential and negate gradings.
pub fn dual(c: &CfkComplex) -> CfkComplex {
    CfkComplex {
        names: c.names.clone(),
        gradings: c.gradings.iter().map(|g| g.neg()).collect(),
        d: c.d.transpose(),
        header: c.header.clone(),
    }
}

/// Φ and Ψ, the formal U- and V-derivatives of the differential.
pub fn phi_psi(c: &CfkComplex) -> (ChainMap, ChainMap) {
    let phi = ChainMap::new(c.d.map_entries(RElem::d_du), Bigrading::new(1, -1));
    let psi = ChainMap::new(c.d.map_entries(RElem::d_dv), Bigrading::new(-1, 1));
    (phi, psi)
}

/// `id + Φ Ψ`.
pub fn sarkar_map(c: &CfkComplex) -> ChainMap {
    let (phi, psi) = phi_psi(c);
    let pp = phi.matrix.compose(&psi.matrix).expect("square");
    ChainMap::new(RMatrix::identity(c.len()).add(&pp).expect("square"), Bigrading::default())
}

/// Pairing found by simplifying one variable: `pairs` are `(source, target,
/// exponent)` in the new basis, `basis` expresses new generators in old ones.
#[derive(Debug, Clone)]
pub struct Simplified {
    pub basis: RMatrix,
    pub d: RMatrix,
    pub pairs: Vec<(usize, usize, u32)>,
    pub unpaired: Vec<usize>,
}

/// Simplify the quotient by one variable (`use_u` keeps the U-arrows) by
/// graded change of basis, cancelling shortest arrows first.
pub fn simplify_one_variable(c: &CfkComplex, use_u: bool) -> Simplified {
    simplify_pass(c, use_u, false)
}

/// The same pivoting, applied as a change of basis of the full complex.
fn simplify_pass(c: &CfkComplex, use_u: bool, full: bool) -> Simplified {
    let n = c.len();
    let keep = |m: RMonomial| if use_u { m.v_exp() == 0 } else { m.u_exp() == 0 };
    let mut d = if full { c.d.clone() } else { c.d.map_entries(|e| e.terms().filter(|&m| keep(m)).collect()) };
    // basis[:, k] = new generator k in terms of old ones.
    let mut basis = RMatrix::identity(n);
    let mut done = vec![false; n];
    let mut pairs = Vec::new();
    loop {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, j, e) in d.entries() {
            if done[i] || done[j] {
                continue;
            }
            for m in e.terms().filter(|&m| keep(m)) {
                let k = m.exponent();
                if best.is_none_or(|b| (k, j, i) < b) {
                    best = Some((k, j, i));
                }
            }
        }
        let Some((k, x, y)) = best else { break };
        let pow = |e: u32| if use_u { RMonomial::u(e) } else { RMonomial::v(e) };
        // Clear other arrows into y: z' = z + var^{k'-k} x.
        let into_y: Vec<(usize, u32)> = (0..n)
            .filter(|&z| z != x)
            .filter_map(|z| d.get(y, z).terms().find(|&m| keep(m)).map(|m| (z, m.exponent())))
            .collect();
        for (z, kz) in into_y {
            let e = RElem::from(pow(kz - k));
            change_basis_add(&mut d, &mut basis, z, x, &e);
        }
        // Clear other arrows out of x: y' = y + var^{k''-k} w.
        let out_x: Vec<(usize, u32)> = d
            .column(x)
            .filter(|&(w, _)| w != y)
            .filter_map(|(w, e)| e.terms().find(|&m| keep(m)).map(|m| (w, m.exponent())))
            .collect();
        for (w, kw) in out_x {
            let e = RElem::from(pow(kw - k));
            // New generator y' = y + e w, i.e. old w = w' and y = y' + e w'.
            change_basis_add(&mut d, &mut basis, y, w, &e);
        }
        done[x] = true;
        done[y] = true;
        pairs.push((x, y, k));
    }
    let unpaired = (0..n).filter(|&k| !done[k]).collect();
    Simplified { basis, d, pairs, unpaired }
}

/// Replace generator `z` by `z + e * x` (as a new basis element), updating
/// the matrix of `d` and the basis record.
fn change_basis_add(d: &mut RMatrix, basis: &mut RMatrix, z: usize, x: usize, e: &RElem) {
    // New column z: d(z + e x) = dz + e dx.
    let dx: Vec<(usize, RElem)> = d.column(x).map(|(i, v)| (i, v.clone())).collect();
    for (i, v) in dx {
        d.add_at(i, z, &rmul(e, &v));
    }
    // Coordinates: old z = z' + e x, so any coefficient c of z contributes
    // c*e to x.
    let n = d.ncols();
    for w in 0..n {
        let c = d.get(z, w);
        if !c.is_zero() {
            d.add_at(x, w, &rmul(&c, e));
        }
    }
    let bx: Vec<(usize, RElem)> = basis.column(x).map(|(i, v)| (i, v.clone())).collect();
    for (i, v) in bx {
        basis.add_at(i, z, &rmul(e, &v));
    }
}

/// True when every generator meets at most one U-arrow and at most one
/// V-arrow.
pub fn is_simultaneously_simplified(c: &CfkComplex) -> bool {
    let mut u = vec![0usize; c.len()];
    let mut v = vec![0usize; c.len()];
    for (i, j, e) in c.d.entries() {
        for m in e.terms() {
            let deg = if m.u_exp() > 0 { &mut u } else { &mut v };
            deg[i] += 1;
            deg[j] += 1;
        }
    }
    u.iter().chain(&v).all(|&k| k <= 1)
}

/// A basis of the reduced complex that is vertically and horizontally
/// simplified at once, found by a vertical then a horizontal pivoting pass
/// (or the reverse order).
pub fn simultaneous_simplify(c: &CfkComplex) -> Result<CfkComplex> {
    let red = reduce(c).complex;
    if is_simultaneously_simplified(&red) {
        return Ok(red);
    }
    let pass = |c: &CfkComplex, use_u: bool| {
        let s = simplify_pass(c, use_u, true);
        CfkComplex { names: c.names.clone(), gradings: c.gradings.clone(), d: s.d, header: c.header.clone() }
    };
    for first in [false, true] {
        let a = pass(&red, first);
        if is_simultaneously_simplified(&a) {
            return Ok(a);
        }
        let b = pass(&a, !first);
        if is_simultaneously_simplified(&b) {
            return Ok(b);
        }
    }
    Err(Error::NotSimplifiable("no simultaneously simplified basis found by pivoting".into()))
}

/// τ: minus the Alexander grading of the U-tower generator of H(C/V=0).
pub fn compute_tau(c: &CfkComplex) -> Result<i64> {
    let red = reduce(c).complex;
    let s = simplify_one_variable(&red, true);
    let v = simplify_one_variable(&red, false);
    if s.unpaired.len() != 1 || v.unpaired.len() != 1 {
        return Err(Error::NotKnotComplex(format!(
            "tower count {} horizontally and {} vertically",
            s.unpaired.len(),
            v.unpaired.len()
        )));
    }
    let a = red.gradings[s.unpaired[0]]
        .alexander()
        .ok_or_else(|| Error::NotKnotComplex("half-integral Alexander grading".into()))?;
    Ok(-a)
}

/// Connected components of the arrow graph of the reduced complex.
pub fn decompose_cfk(c: &CfkComplex) -> Vec<CfkComplex> {
    let red = reduce(c).complex;
    components(&red)
        .into_iter()
        .map(|comp| restrict(&red, &comp))
        .collect()
}

/// Index sets of the connected components of the arrow graph, each sorted,
/// ordered by smallest member.
pub fn components(c: &CfkComplex) -> Vec<Vec<usize>> {
    let n = c.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (i, j, _) in c.d.entries() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..n {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    groups.into_values().collect()
}

/// The subcomplex spanned by the given generators (assumed closed).
pub fn restrict(c: &CfkComplex, idx: &[usize]) -> CfkComplex {
    CfkComplex::new(
        idx.iter().map(|&k| c.names[k].clone()).collect(),
        idx.iter().map(|&k| c.gradings[k]).collect(),
        c.d.submatrix(idx, idx),
    )
}
