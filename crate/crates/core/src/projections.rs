//! Projections of knot complexes: lifting homotopy idempotents, making
//! families commute, extracting the summands they cut out, and comparing
//! maps blockwise across splittings on both sides of the LOT
//! correspondence.

use std::collections::BTreeSet;

use rand::Rng;

use crate::base_algebra::{f2_solve, Bigrading, F2Matrix, RElem, RMatrix, RMonomial};
use crate::bordered::{mor_complex, DMorphism, TypeD};
use crate::cfk::{is_chain_map, is_nullhomotopic, solve_homotopy, ChainMap, CfkComplex};
use crate::error::{Error, Result};

fn endo(p: &RMatrix) -> ChainMap {
    ChainMap::new(p.clone(), Bigrading::default())
}

fn mul(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.compose(b).expect("square matrices of one size")
}

fn add(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.add(b).expect("square matrices of one size")
}

fn check_endomorphism(c: &CfkComplex, p: &RMatrix) -> Result<()> {
    if p.nrows() != c.len() || p.ncols() != c.len() || p.skew {
        return Err(Error::Dimension(format!("expected a linear {n}x{n} endomorphism", n = c.len())));
    }
    if c.d.entries().any(|(_, _, e)| e.hat()) {
        return Err(Error::Invalid("complex must be reduced".into()));
    }
    if !is_chain_map(c, c, p)? {
        return Err(Error::Invalid("map is not a chain map".into()));
    }
    Ok(())
}

/// An honest projection with the witness of its homotopy to the input.
#[derive(Debug, Clone)]
pub struct Lifted {
    pub projection: RMatrix,
    /// `h` with `p + p' = ∂h + h∂`.
    pub homotopy: RMatrix,
    /// The power of the input that was reached.
    pub power: usize,
}

/// Smallest power of `p` that stabilises the kernel, bounded by
/// `gens × (1 + max exponent)`.
fn stabilisation_bound(c: &CfkComplex, p: &RMatrix) -> usize {
    c.len().max(1) * (1 + p.max_exponent().max(c.d.max_exponent()) as usize)
}

/// Replace a homotopy idempotent `p` by the projection onto `im(pⁿ)` along
/// `ker(pⁿ)` for `n` past kernel stabilisation. On a reduced complex
/// `p² + p` has entries in (U, V), so repeated squaring reaches this
/// projection.
pub fn lift_homotopy_projection(c: &CfkComplex, p: &RMatrix) -> Result<Lifted> {
    check_endomorphism(c, p)?;
    let sq = mul(p, p);
    if solve_homotopy(c, c, &endo(&sq), &endo(p))?.is_none() {
        return Err(Error::NotIdempotent);
    }
    let bound = stabilisation_bound(c, p);
    let mut q = p.clone();
    let mut power = 1;
    loop {
        let q2 = mul(&q, &q);
        if q2 == q {
            break;
        }
        if power > 2 * bound {
            return Err(Error::NotIdempotent);
        }
        q = q2;
        power *= 2;
    }
    let homotopy = solve_homotopy(c, c, &endo(p), &endo(&q))?.ok_or(Error::NotIdempotent)?;
    Ok(Lifted { projection: q, homotopy, power })
}

/// Make a family of homotopy-commuting homotopy projections honest and
/// pairwise commuting. Member `i + 1` is replaced by the lift of
/// `Σ_λ p_λ p_{i+1} p_λ`, where `p_λ = Π_{j ≤ i} (λ(j) + p_j)` runs over the
/// orthogonal idempotents cut out by the members already processed.
pub fn straighten_family(c: &CfkComplex, ps: &[RMatrix]) -> Result<Vec<Lifted>> {
    for (i, p) in ps.iter().enumerate() {
        check_endomorphism(c, p)?;
        for (j, q) in ps.iter().enumerate().skip(i + 1) {
            if solve_homotopy(c, c, &endo(&mul(p, q)), &endo(&mul(q, p)))?.is_none() {
                return Err(Error::Invalid(format!("members {i} and {j} do not commute up to homotopy")));
            }
        }
    }
    let n = c.len();
    let id = RMatrix::identity(n);
    let mut out: Vec<Lifted> = Vec::with_capacity(ps.len());
    for (i, p) in ps.iter().enumerate() {
        let mut conj = RMatrix::zero(n, n);
        for lambda in 0..(1usize << i) {
            let mut pl = id.clone();
            for (j, done) in out.iter().enumerate() {
                let f = if lambda >> j & 1 == 1 { add(&id, &done.projection) } else { done.projection.clone() };
                pl = mul(&pl, &f);
            }
            conj = add(&conj, &mul(&mul(&pl, p), &pl));
        }
        let lifted = lift_homotopy_projection(c, &conj).map_err(|e| match e {
            Error::NotIdempotent => Error::Invalid(format!("member {i} is not idempotent up to homotopy")),
            e => e,
        })?;
        let homotopy = solve_homotopy(c, c, &endo(p), &endo(&lifted.projection))?
            .ok_or_else(|| Error::Invalid(format!("member {i} changed homotopy class")))?;
        out.push(Lifted { homotopy, ..lifted });
    }
    Ok(out)
}

/// A summand of a complex with its inclusion and projection.
#[derive(Debug, Clone)]
pub struct Summand {
    pub complex: CfkComplex,
    /// `summand -> C`.
    pub inclusion: RMatrix,
    /// `C -> summand`, a left inverse of the inclusion.
    pub projection: RMatrix,
}

fn f2_to_r(m: &F2Matrix) -> RMatrix {
    let mut out = RMatrix::zero(m.rows(), m.cols());
    for (i, j) in m.entries() {
        out.set(i, j, RElem::one());
    }
    out
}

fn f2_inverse(m: &F2Matrix) -> Option<F2Matrix> {
    let n = m.rows();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let e: Vec<bool> = (0..n).map(|i| i == k).collect();
        cols.push(f2_solve(m, &e).ok()??);
    }
    let rows: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect();
    F2Matrix::from_dense(&rows).ok()
}

/// Inverse of a homogeneous square matrix whose constant part is
/// invertible, as a terminating Neumann series.
pub fn invert(a: &RMatrix) -> Result<RMatrix> {
    let n = a.nrows();
    let a0 = a.hat();
    let inv0 = f2_to_r(&f2_inverse(&a0).ok_or_else(|| Error::Invalid("constant part is singular".into()))?);
    // a = a0 (1 + a0⁻¹ N), so a⁻¹ = Σ (a0⁻¹ N)^k a0⁻¹.
    let nil = mul(&inv0, &add(a, &f2_to_r(&a0)));
    let mut term = inv0.clone();
    let mut sum = RMatrix::zero(n, n);
    for _ in 0..=(n.max(1) * (2 + a.max_exponent() as usize) * 4) {
        if term.is_zero() {
            return Ok(sum);
        }
        sum = add(&sum, &term);
        term = mul(&nil, &term);
    }
    Err(Error::Invalid("matrix is not homogeneous enough to invert".into()))
}

/// Summands cut out by a complete family of commuting projections.
pub fn split_by_family(c: &CfkComplex, family: &[RMatrix]) -> Result<Vec<Summand>> {
    let n = c.len();
    let mut total = RMatrix::zero(n, n);
    for (i, p) in family.iter().enumerate() {
        check_endomorphism(c, p)?;
        if mul(p, p) != *p {
            return Err(Error::Invalid(format!("member {i} is not a projection")));
        }
        for (j, q) in family.iter().enumerate().skip(i + 1) {
            if mul(p, q) != mul(q, p) {
                return Err(Error::Invalid(format!("members {i} and {j} do not commute")));
            }
        }
        total = add(&total, p);
    }
    if total != RMatrix::identity(n) {
        return Err(Error::Invalid("family is not complete".into()));
    }
    // Columns of p whose constant parts span im(p̄) generate im(p).
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    for p in family {
        let hat = p.hat();
        let mut picked = Vec::new();
        let mut rank = 0;
        for j in 0..n {
            let mut cols = picked.clone();
            cols.push(j);
            let sub: Vec<Vec<bool>> = (0..n).map(|i| cols.iter().map(|&k| hat.get(i, k)).collect()).collect();
            let r = F2Matrix::from_dense(&sub)?.rank();
            if r > rank {
                rank = r;
                picked.push(j);
            }
        }
        chosen.push(picked);
    }
    let mut basis = RMatrix::zero(n, n);
    let mut col = 0;
    for (p, picked) in family.iter().zip(&chosen) {
        for &j in picked {
            for (i, e) in p.column(j) {
                basis.set(i, col, e.clone());
            }
            col += 1;
        }
    }
    if col != n {
        return Err(Error::Invalid("projections do not split the complex".into()));
    }
    let inv = invert(&basis)?;
    let mut out = Vec::with_capacity(family.len());
    let mut start = 0;
    for picked in &chosen {
        let rows: Vec<usize> = (start..start + picked.len()).collect();
        let all: Vec<usize> = (0..n).collect();
        let inclusion = basis.submatrix(&all, &rows);
        let projection = inv.submatrix(&rows, &all);
        let d = mul(&projection, &mul(&c.d, &inclusion));
        let complex = CfkComplex::new(
            picked.iter().map(|&j| c.names[j].clone()).collect(),
            picked.iter().map(|&j| c.gradings[j]).collect(),
            d,
        );
        out.push(Summand { complex, inclusion, projection });
        start += picked.len();
    }
    Ok(out)
}

/// Summands spanned by disjoint sets of generators that are closed under
/// the differential in both directions.
pub fn split_by_generators(c: &CfkComplex, parts: &[Vec<usize>]) -> Result<Vec<Summand>> {
    let n = c.len();
    let mut family = Vec::with_capacity(parts.len());
    for part in parts {
        let mut p = RMatrix::zero(n, n);
        for &k in part {
            if k >= n {
                return Err(Error::Dimension(format!("generator {k} out of range")));
            }
            p.set(k, k, RElem::one());
        }
        family.push(p);
    }
    split_by_family(c, &family)
}

/// Entry `(i, j)` is true when the block `π_i ∘ f ∘ ι_j` from source
/// summand `j` to target summand `i` is not nullhomotopic.
pub fn block_pattern(f: &ChainMap, src: &[Summand], tgt: &[Summand]) -> Result<Vec<Vec<bool>>> {
    let mut out = vec![vec![false; src.len()]; tgt.len()];
    for (i, t) in tgt.iter().enumerate() {
        for (j, s) in src.iter().enumerate() {
            let block = t.projection.compose(&f.matrix.compose(&s.inclusion)?)?;
            let map = ChainMap::new(block, f.bidegree);
            out[i][j] = !is_nullhomotopic(&s.complex, &t.complex, &map)?;
        }
    }
    Ok(out)
}

/// The substructure on the given generators.
pub fn restrict_typed(m: &TypeD, idx: &[usize]) -> TypeD {
    let mut pos = vec![usize::MAX; m.len()];
    for (new, &old) in idx.iter().enumerate() {
        pos[old] = new;
    }
    let mut out = TypeD::new(m.variant, m.curvature);
    for &k in idx {
        out.gens.push(m.gens[k].clone());
    }
    for (&(f, t), e) in &m.arrows {
        if pos[f] != usize::MAX && pos[t] != usize::MAX {
            out.arrows.insert((pos[f], pos[t]), e.clone());
        }
    }
    out
}

/// Generator sets of a type D structure matching a splitting of the knot
/// complex: each connected piece of the arrow graph goes to the part
/// containing its ι₀ generators (looked up by name).
pub fn typed_parts(m: &TypeD, names: &[Vec<String>]) -> Result<Vec<Vec<usize>>> {
    let n = m.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for &(f, t) in m.arrows.keys() {
        let (a, b) = (find(&mut parent, f), find(&mut parent, t));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut owner = vec![None; n];
    for (k, part) in names.iter().enumerate() {
        for name in part {
            let g = m.index_of(name).ok_or_else(|| Error::Invalid(format!("no generator named {name}")))?;
            let r = find(&mut parent, g);
            if owner[r].is_some_and(|o| o != k) {
                return Err(Error::Invalid(format!("generator {name} is tied to another part")));
            }
            owner[r] = Some(k);
        }
    }
    let mut out = vec![Vec::new(); names.len()];
    for g in 0..n {
        let r = find(&mut parent, g);
        let k = owner[r].ok_or_else(|| Error::Invalid(format!("{} belongs to no part", m.gens[g].name)))?;
        out[k].push(g);
    }
    Ok(out)
}

/// The type D analogue of [`block_pattern`]: blocks are restrictions of `f`
/// between generator sets, tested for being boundaries in the morphism
/// complex.
pub fn block_pattern_typed(
    m: &TypeD,
    n: &TypeD,
    f: &DMorphism,
    src: &[Vec<usize>],
    tgt: &[Vec<usize>],
) -> Result<Vec<Vec<bool>>> {
    let mut out = vec![vec![false; src.len()]; tgt.len()];
    for (i, t) in tgt.iter().enumerate() {
        let nt = restrict_typed(n, t);
        for (j, s) in src.iter().enumerate() {
            let ms = restrict_typed(m, s);
            let mc = mor_complex(&ms, &nt)?;
            let mut block = DMorphism::zero(f.variant);
            for (a, &x) in s.iter().enumerate() {
                for (b, &y) in t.iter().enumerate() {
                    if let Some(e) = f.entries.get(&(x, y)) {
                        for q in e.terms() {
                            block.toggle(a, b, q);
                        }
                    }
                }
            }
            let v = mc.to_vector(&block);
            if !mc.is_cycle(&v) {
                return Err(Error::Invalid(format!("block ({i}, {j}) is not a morphism")));
            }
            out[i][j] = !mc.is_boundary(&v);
        }
    }
    Ok(out)
}

/// The morphism sending generator `x` to generator `y` by the idempotent,
/// for each pair.
pub fn identification_morphism(m: &TypeD, n: &TypeD, pairs: &[(usize, usize)]) -> Result<DMorphism> {
    let mut f = DMorphism::zero(m.variant);
    let mut seen = BTreeSet::new();
    for &(x, y) in pairs {
        if m.gens[x].idem != n.gens[y].idem || !seen.insert((x, y)) {
            return Err(Error::Invalid(format!("cannot identify {} with {}", m.gens[x].name, n.gens[y].name)));
        }
        f.toggle(x, y, crate::torus_algebra::Basis::Idem(m.gens[x].idem));
    }
    Ok(f)
}

fn remap(f: &DMorphism, src: &[usize], tgt: &[usize]) -> DMorphism {
    let mut out = DMorphism::zero(f.variant);
    for (&(a, b), e) in &f.entries {
        for q in e.terms() {
            out.toggle(src[a], tgt[b], q);
        }
    }
    out
}

/// The inclusion of `m` into `n` as the generators `part`, found as an
/// isomorphism onto the restriction.
pub fn typed_inclusion(m: &TypeD, n: &TypeD, part: &[usize]) -> Result<Option<DMorphism>> {
    let all: Vec<usize> = (0..m.len()).collect();
    Ok(crate::bordered::iso_typed(m, &restrict_typed(n, part))?.map(|f| remap(&f, &all, part)))
}

/// The projection of `n` onto `m` along the complement of `part`.
pub fn typed_projection(n: &TypeD, m: &TypeD, part: &[usize]) -> Result<Option<DMorphism>> {
    let all: Vec<usize> = (0..m.len()).collect();
    Ok(crate::bordered::iso_typed(&restrict_typed(n, part), m)?.map(|f| remap(&f, part, &all)))
}

/// `∂h + h∂`, the null-homotopic map witnessed by `h`.
pub fn boundary_of(c: &CfkComplex, h: &RMatrix) -> RMatrix {
    add(&mul(&c.d, h), &mul(h, &c.d))
}

/// A random map of bidegree (1, 1): each grading-compatible entry is set
/// with probability `density`.
pub fn random_homotopy<R: Rng>(c: &CfkComplex, rng: &mut R, density: f64) -> RMatrix {
    let n = c.len();
    let mut h = RMatrix::zero(n, n);
    for j in 0..n {
        for i in 0..n {
            let delta = c.gradings[j].add(Bigrading::new(1, 1)).sub(c.gradings[i]);
            if let Some(m) = RMonomial::with_bidegree(delta) {
                if rng.gen_bool(density) {
                    h.add_monomial_at(i, j, m);
                }
            }
        }
    }
    h
}

/// `g p g⁻¹` for the chain automorphism `g = id + ∂k + k∂`.
pub fn conjugate_by_homotopy(c: &CfkComplex, p: &RMatrix, k: &RMatrix) -> Result<RMatrix> {
    let g = add(&RMatrix::identity(c.len()), &boundary_of(c, k));
    let g_inv = invert(&g)?;
    Ok(mul(&mul(&g, p), &g_inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfk::{direct_sum, iso_cfk, prefixed};
    use crate::corpus;

    fn diag(n: usize, on: &[usize]) -> RMatrix {
        let mut p = RMatrix::zero(n, n);
        for &k in on {
            p.set(k, k, RElem::one());
        }
        p
    }

    #[test]
    fn honest_projection_is_fixed() {
        let c = corpus::c_n(3);
        let p = diag(5, &[0]);
        let l = lift_homotopy_projection(&c, &p).unwrap();
        assert_eq!(l.projection, p);
        assert_eq!(l.power, 1);
    }

    #[test]
    fn non_idempotent_is_rejected() {
        let c2 = direct_sum(&corpus::unknot(), &prefixed(&corpus::unknot(), "y"));
        // Swapping two copies squares to the identity, not to itself.
        let mut swap = RMatrix::zero(2, 2);
        swap.set(0, 1, RElem::one());
        swap.set(1, 0, RElem::one());
        assert_eq!(lift_homotopy_projection(&c2, &swap).unwrap_err(), Error::NotIdempotent);
    }

    #[test]
    fn split_c3() {
        let c = corpus::c_n(3);
        let parts = split_by_generators(&c, &[vec![0], vec![1, 2, 3, 4]]).unwrap();
        assert!(iso_cfk(&parts[0].complex, &corpus::unknot()).unwrap().is_some());
        assert_eq!(parts[1].complex.len(), 4);
        let f = ChainMap::identity(&c);
        assert_eq!(block_pattern(&f, &parts, &parts).unwrap(), vec![vec![true, false], vec![false, true]]);
        assert!(split_by_generators(&c, &[vec![0]]).is_err());
    }

    /// A trefoil plus a copy shifted by (1, 1), which admits the homotopy
    /// `b -> b'`.
    fn shifted_pair() -> CfkComplex {
        use crate::base_algebra::RMonomial;
        CfkComplex::from_parts(
            &[("a", 0, -2), ("b", -1, -1), ("c", -2, 0), ("a'", 1, -1), ("b'", 0, 0), ("c'", -1, 1)],
            &[
                ("b", "a", RMonomial::U(1)),
                ("b", "c", RMonomial::V(1)),
                ("b'", "a'", RMonomial::U(1)),
                ("b'", "c'", RMonomial::V(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn perturbed_projection_lifts_back() {
        let c = shifted_pair();
        let mut h = RMatrix::zero(6, 6);
        h.set(4, 1, RElem::one());
        let n = add(&mul(&c.d, &h), &mul(&h, &c.d));
        assert!(!n.is_zero());

        let id = RMatrix::identity(6);
        let q = add(&id, &n);
        assert_ne!(mul(&q, &q), q);
        let l = lift_homotopy_projection(&c, &q).unwrap();
        assert_eq!(l.projection, id);
        assert_eq!(l.power, 2);

        let p = add(&diag(6, &[0, 1, 2]), &n);
        let fam = straighten_family(&c, &[p.clone(), add(&id, &p)]).unwrap();
        let ps: Vec<RMatrix> = fam.iter().map(|l| l.projection.clone()).collect();
        assert_eq!(mul(&ps[0], &ps[1]), mul(&ps[1], &ps[0]));
        let parts = split_by_family(&c, &ps).unwrap();
        for s in &parts {
            assert_eq!(s.complex.len(), 3);
            assert_eq!(mul(&s.projection, &s.inclusion), RMatrix::identity(3));
        }
    }

    #[test]
    fn inclusion_pattern_both_sides() {
        let c = corpus::c_n(3);
        let o = corpus::unknot();
        let tgt = split_by_generators(&c, &[vec![0], vec![1, 2, 3, 4]]).unwrap();
        let src = split_by_generators(&o, &[vec![0]]).unwrap();
        let mut inc = RMatrix::zero(5, 1);
        inc.set(0, 0, RElem::one());
        let f = ChainMap::new(inc, Bigrading::default());
        assert_eq!(block_pattern(&f, &src, &tgt).unwrap(), vec![vec![true], vec![false]]);

        let m = crate::lot::cfk_to_cfd(&o, 2).unwrap();
        let n = crate::lot::cfk_to_cfd(&c, 2).unwrap();
        let np = typed_parts(&n, &[vec!["x".into()], vec!["a".into(), "b".into(), "c".into(), "d".into()]]).unwrap();
        let mp = typed_parts(&m, &[vec!["x".into()]]).unwrap();
        let fd = typed_inclusion(&m, &n, &np[0]).unwrap().unwrap();
        assert_eq!(block_pattern_typed(&m, &n, &fd, &mp, &np).unwrap(), vec![vec![true], vec![false]]);
    }
}
