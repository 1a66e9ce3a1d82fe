//! The involution ι_K on knot complexes: validation against the Sarkar map,
//! conjugation, the hat-flavored package, equivariance of splittings, and
//! isolation arguments that work without knowing ι.

use std::collections::BTreeSet;

use crate::base_algebra::{f2_solve, Bigrading, F2Matrix, RMatrix, RMonomial};
use crate::cfk::{chain_map_basis, is_chain_map, phi_psi, respects_grading, sarkar_map, solve_homotopy, ChainMap, CfkComplex};
use crate::error::{Error, Result};

/// Swap U and V in every entry and the two components of every grading.
pub fn conjugate_cfk(c: &CfkComplex) -> CfkComplex {
    CfkComplex {
        names: c.names.clone(),
        gradings: c.gradings.iter().map(|g| g.swap()).collect(),
        d: c.d.map_entries(|e| e.swap()),
        header: c.header.clone(),
    }
}

/// A U/V-skew endomorphism of a knot complex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IotaMap {
    pub matrix: RMatrix,
}

impl IotaMap {
    pub fn new(mut matrix: RMatrix) -> Self {
        matrix.skew = true;
        IotaMap { matrix }
    }

    /// Build from `(source, target, monomial)` triples.
    pub fn from_entries(c: &CfkComplex, entries: &[(&str, &str, RMonomial)]) -> Result<Self> {
        let mut m = RMatrix::zero(c.len(), c.len());
        for &(from, to, mono) in entries {
            let j = c.index_of(from).ok_or_else(|| Error::Invalid(format!("unknown generator {from}")))?;
            let i = c.index_of(to).ok_or_else(|| Error::Invalid(format!("unknown generator {to}")))?;
            m.add_monomial_at(i, j, mono);
        }
        Ok(IotaMap::new(m))
    }

    pub fn as_chain_map(&self) -> ChainMap {
        ChainMap::new(self.matrix.clone(), Bigrading::default())
    }

    /// The same map read on the conjugate complex.
    pub fn conjugate(&self) -> IotaMap {
        IotaMap::new(self.matrix.map_entries(|e| e.swap()))
    }

    /// The chain-map text format with a `skew` line.
    pub fn parse(text: &str, c: &CfkComplex) -> Result<Self> {
        let f = ChainMap::parse(text, c, c)?;
        if !f.is_skew() {
            return Err(Error::parse(1, 1, "involution files must declare `skew`"));
        }
        if f.bidegree != Bigrading::default() {
            return Err(Error::parse(1, 1, "involution must have bidegree 0 0"));
        }
        Ok(IotaMap::new(f.matrix))
    }

    pub fn serialize(&self, c: &CfkComplex) -> String {
        self.as_chain_map().serialize(c, c)
    }
}

/// `a ↦ a`, `x ↦ x + d`, `b ↔ c`, `d ↦ d` on [`crate::corpus::c_n`]. For
/// `n = 1` this is completed by `a ↦ a + x`, the term that survives UV = 0.
pub fn c_n_iota(n: u32) -> IotaMap {
    let c = crate::corpus::c_n(n);
    let mut e = vec![
        ("a", "a", RMonomial::One),
        ("x", "x", RMonomial::One),
        ("x", "d", RMonomial::One),
        ("b", "c", RMonomial::One),
        ("c", "b", RMonomial::One),
        ("d", "d", RMonomial::One),
    ];
    if n == 1 {
        e.push(("a", "x", RMonomial::One));
    }
    IotaMap::from_entries(&c, &e).expect("generator names of c_n")
}

/// Outcome of [`validate_iota`].
#[derive(Debug, Clone)]
pub struct IotaReport {
    pub skew_chain_map: bool,
    pub graded: bool,
    /// Invertible at U = V = 0.
    pub invertible: bool,
    /// `h` with `ι² + id + ΦΨ = ∂h + h∂`.
    pub sarkar_homotopy: Option<RMatrix>,
    pub failures: Vec<String>,
}

impl IotaReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn validate_iota(c: &CfkComplex, iota: &IotaMap) -> IotaReport {
    let mut failures = Vec::new();
    let n = c.len();
    if iota.matrix.nrows() != n || iota.matrix.ncols() != n || !iota.matrix.skew {
        failures.push(format!("expected a skew {n}x{n} matrix"));
        return IotaReport { skew_chain_map: false, graded: false, invertible: false, sarkar_homotopy: None, failures };
    }
    let skew_chain_map = is_chain_map(c, c, &iota.matrix).unwrap_or(false);
    if !skew_chain_map {
        failures.push("ι∂ ≠ ∂ι under the U↔V twist".into());
    }
    let f = iota.as_chain_map();
    let graded = respects_grading(c, c, &f);
    if !graded {
        failures.push("ι does not carry (grU, grV) to (grV, grU)".into());
    }
    let invertible = iota.matrix.hat().rank() == n;
    if !invertible {
        failures.push("ι is not invertible".into());
    }
    let mut sarkar_homotopy = None;
    if skew_chain_map && graded {
        let sq = f.compose(&f).expect("square");
        match solve_homotopy(c, c, &sq, &sarkar_map(c)) {
            Ok(Some(h)) => sarkar_homotopy = Some(h),
            Ok(None) => failures.push("ι² is not homotopic to id + ΦΨ".into()),
            Err(e) => failures.push(e.to_string()),
        }
    }
    IotaReport { skew_chain_map, graded, invertible, sarkar_homotopy, failures }
}

/// Search the graded skew chain maps for a valid involution, preferring
/// fewest terms. Exhaustive over at most `2^max_basis` combinations.
pub fn solve_iota(c: &CfkComplex, max_basis: usize) -> Result<Option<IotaMap>> {
    let basis = chain_map_basis(c, c, Bigrading::default(), true);
    if basis.len() > max_basis {
        return Err(Error::ExtensionBudget);
    }
    let mut best: Option<(usize, IotaMap)> = None;
    for mask in 1u64..(1u64 << basis.len()) {
        let mut m = RMatrix::zero(c.len(), c.len());
        m.skew = true;
        for (k, b) in basis.iter().enumerate() {
            if mask >> k & 1 == 1 {
                m = m.add(b)?;
            }
        }
        let weight: usize = m.entries().map(|(_, _, e)| e.len()).sum();
        if best.as_ref().is_some_and(|(w, _)| *w <= weight) {
            continue;
        }
        let iota = IotaMap::new(m);
        if validate_iota(c, &iota).is_valid() {
            best = Some((weight, iota));
        }
    }
    Ok(best.map(|(_, i)| i))
}

/// ι̂, Φ̂ and Ψ̂ on the homology of the complex at U = V = 0.
#[derive(Debug, Clone)]
pub struct HatPackage {
    pub rank: usize,
    /// Cycle representatives of a homology basis, as generator vectors.
    pub basis: Vec<Vec<bool>>,
    pub iota: F2Matrix,
    pub phi: F2Matrix,
    pub psi: F2Matrix,
}

impl HatPackage {
    /// `ι̂² = id + Φ̂Ψ̂`, `Φ̂² = 0`, `Ψ̂² = 0`.
    pub fn identities_hold(&self) -> bool {
        let sq = |m: &F2Matrix| m.mul(m).expect("square");
        let mut rhs = F2Matrix::identity(self.rank);
        let pp = self.phi.mul(&self.psi).expect("square");
        for (i, j) in pp.entries().collect::<Vec<_>>() {
            rhs.toggle(i, j);
        }
        sq(&self.iota) == rhs && sq(&self.phi).nnz() == 0 && sq(&self.psi).nnz() == 0
    }
}

fn columns_to_matrix(rows: usize, cols: &[Vec<bool>]) -> Result<F2Matrix> {
    let dense: Vec<Vec<bool>> = (0..rows).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    if cols.is_empty() {
        return Ok(F2Matrix::new(rows, 0));
    }
    F2Matrix::from_dense(&dense)
}

pub fn hat_package(c: &CfkComplex, iota: &IotaMap) -> Result<HatPackage> {
    let n = c.len();
    let d = c.d.hat();
    let boundaries: Vec<Vec<bool>> = {
        let mut out: Vec<Vec<bool>> = Vec::new();
        for j in 0..n {
            let col: Vec<bool> = (0..n).map(|i| d.get(i, j)).collect();
            let mut cand = out.clone();
            cand.push(col.clone());
            if columns_to_matrix(n, &cand)?.rank() > out.len() {
                out.push(col);
            }
        }
        out
    };
    let mut basis: Vec<Vec<bool>> = Vec::new();
    for z in d.nullspace() {
        let mut cand = boundaries.clone();
        cand.extend(basis.iter().cloned());
        cand.push(z.clone());
        if columns_to_matrix(n, &cand)?.rank() == cand.len() {
            basis.push(z);
        }
    }
    let rank = basis.len();
    let mut reps = basis.clone();
    reps.extend(boundaries.iter().cloned());
    let reps_m = columns_to_matrix(n, &reps)?;
    let induced = |f: &F2Matrix| -> Result<F2Matrix> {
        let mut out = F2Matrix::new(rank, rank);
        for (k, v) in basis.iter().enumerate() {
            let w = f.mul_vec(v)?;
            let y = f2_solve(&reps_m, &w)?.ok_or_else(|| Error::Invalid("map does not preserve cycles".into()))?;
            for (i, &bit) in y.iter().take(rank).enumerate() {
                if bit {
                    out.toggle(i, k);
                }
            }
        }
        Ok(out)
    };
    let (phi, psi) = phi_psi(c);
    Ok(HatPackage {
        rank,
        iota: induced(&iota.matrix.hat())?,
        phi: induced(&phi.matrix.hat())?,
        psi: induced(&psi.matrix.hat())?,
        basis,
    })
}

/// Per-member homotopies `ι p_i ~ p_i ι`; `None` where none exists.
#[derive(Debug, Clone)]
pub struct SplittingReport {
    pub members: Vec<Option<RMatrix>>,
}

impl SplittingReport {
    pub fn equivariant(&self) -> bool {
        self.members.iter().all(Option::is_some)
    }
}

pub fn check_equivariant_splitting(c: &CfkComplex, iota: &IotaMap, family: &[RMatrix]) -> Result<SplittingReport> {
    let i = iota.as_chain_map();
    let mut members = Vec::with_capacity(family.len());
    for p in family {
        let p = ChainMap::new(p.clone(), Bigrading::default());
        let ip = i.compose(&p)?;
        let pi = p.compose(&i)?;
        members.push(solve_homotopy(c, c, &ip, &pi)?);
    }
    Ok(SplittingReport { members })
}

/// Why ι̂ of one generator cannot contain another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exclusion {
    /// ι carries bidegree (p, q) to (q, p).
    Grading,
    /// The two lie in different summands of a splitting declared invariant.
    Splitting,
    /// A U or V exponent of the differential is too small.
    Exponents,
}

/// Smallest U and V exponents of `ι ∂ g`: V-terms of `∂g` become U-terms.
fn iota_d_min_exponents(c: &CfkComplex, g: usize) -> (Option<u32>, Option<u32>) {
    let mut min_u = None;
    let mut min_v = None;
    for (_, e) in c.d.column(g) {
        for m in e.terms() {
            if m.v_exp() > 0 {
                min_u = Some(min_u.map_or(m.v_exp(), |x: u32| x.min(m.v_exp())));
            }
            if m.u_exp() > 0 {
                min_v = Some(min_v.map_or(m.u_exp(), |x: u32| x.min(m.u_exp())));
            }
        }
    }
    (min_u, min_v)
}

/// Whether some generator other than `g` has a differential term `M·y` with
/// `M` a power of the same variable of exponent at most `e`.
fn term_shared(c: &CfkComplex, g: usize, y: usize, e: u32, use_u: bool) -> bool {
    (0..c.len()).filter(|&w| w != g).any(|w| {
        c.d.get(y, w).terms().any(|m| {
            let k = if use_u { m.u_exp() } else { m.v_exp() };
            k > 0 && k <= e
        })
    })
}

/// Whether ι̂(`from`) provably omits `to`, for any bigraded ι respecting
/// the declared invariant splitting.
pub fn excluded(c: &CfkComplex, invariant_split: &[Vec<usize>], from: usize, to: usize) -> Option<Exclusion> {
    if c.gradings[to] != c.gradings[from].swap() {
        return Some(Exclusion::Grading);
    }
    let part = |g: usize| invariant_split.iter().position(|p| p.contains(&g));
    if let (Some(a), Some(b)) = (part(from), part(to)) {
        if a != b {
            return Some(Exclusion::Splitting);
        }
    }
    // ∂ι(from) = ι∂(from) has U-exponents ≥ min_u and V-exponents ≥ min_v,
    // so a term U^a y of ∂(to) with a < min_u cannot appear unless another
    // generator cancels it.
    let (min_u, min_v) = iota_d_min_exponents(c, from);
    for (y, e) in c.d.column(to) {
        for m in e.terms() {
            let (k, bound, use_u) = if m.u_exp() > 0 { (m.u_exp(), min_u, true) } else { (m.v_exp(), min_v, false) };
            if k == 0 {
                continue;
            }
            if bound.is_none_or(|b| k < b) && !term_shared(c, to, y, k, use_u) {
                return Some(Exclusion::Exponents);
            }
        }
    }
    None
}

/// Generators `g` among `candidates` (all generators when `None`) such that
/// ι̂(g) omits every other candidate and no other candidate's image contains
/// `g`. Requires a reduced complex, whose generators form a basis of hat
/// homology.
pub fn iota_isolation(c: &CfkComplex, invariant_split: &[Vec<usize>], candidates: Option<&[usize]>) -> Result<BTreeSet<usize>> {
    if c.d.hat().nnz() != 0 {
        return Err(Error::Invalid("complex must be reduced".into()));
    }
    let all: Vec<usize> = (0..c.len()).collect();
    let cands = candidates.unwrap_or(&all);
    if let Some(&g) = cands.iter().find(|&&g| g >= c.len()) {
        return Err(Error::Dimension(format!("generator {g} out of range")));
    }
    Ok(cands
        .iter()
        .copied()
        .filter(|&g| {
            cands
                .iter()
                .filter(|&&h| h != g)
                .all(|&h| excluded(c, invariant_split, g, h).is_some() && excluded(c, invariant_split, h, g).is_some())
        })
        .collect())
}

/// What is known about ι for [`nonsimple_check`].
#[derive(Debug, Clone)]
pub enum IotaEvidence {
    Explicit(IotaMap),
    /// Generators known to span ι̂-invariant lines with ι̂-invariant
    /// complement.
    Isolated(BTreeSet<usize>),
}

#[derive(Debug, Clone)]
pub struct NonsimpleVerdict {
    pub holds: bool,
    pub reasons: Vec<String>,
}

fn block_diagonal_at(m: &F2Matrix, g: usize) -> bool {
    (0..m.rows()).all(|i| i == g || (!m.get(i, g) && !m.get(g, i)))
}

/// Whether hat homology splits as `⟨v1⟩ ⊕ ⟨v2⟩ ⊕ W`, with W spanned by the
/// other generators, compatibly with ι̂, Φ̂ and Ψ̂.
pub fn nonsimple_check(c: &CfkComplex, evidence: &IotaEvidence, v1: usize, v2: usize) -> Result<NonsimpleVerdict> {
    let n = c.len();
    if c.d.hat().nnz() != 0 {
        return Err(Error::Invalid("complex must be reduced".into()));
    }
    if v1 >= n || v2 >= n {
        return Err(Error::Dimension("generator out of range".into()));
    }
    let mut reasons = Vec::new();
    if v1 == v2 {
        reasons.push("the two lines coincide".into());
        return Ok(NonsimpleVerdict { holds: false, reasons });
    }
    let (phi, psi) = phi_psi(c);
    let (phi, psi) = (phi.matrix.hat(), psi.matrix.hat());
    for v in [v1, v2] {
        let name = &c.names[v];
        match evidence {
            IotaEvidence::Explicit(iota) => {
                let i = iota.matrix.hat();
                if !i.get(v, v) || !block_diagonal_at(&i, v) {
                    reasons.push(format!("ι̂ mixes {name} with other generators"));
                }
            }
            IotaEvidence::Isolated(set) => {
                if !set.contains(&v) {
                    reasons.push(format!("{name} is not known to be ι̂-isolated"));
                }
            }
        }
        if !block_diagonal_at(&phi, v) {
            reasons.push(format!("Φ̂ mixes {name} with other generators"));
        }
        if !block_diagonal_at(&psi, v) {
            reasons.push(format!("Ψ̂ mixes {name} with other generators"));
        }
    }
    Ok(NonsimpleVerdict { holds: reasons.is_empty(), reasons })
}
