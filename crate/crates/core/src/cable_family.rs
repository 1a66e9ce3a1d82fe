//! The (m, −1) cables of the complexes `C_n`: the ζ-generators of the cabled
//! box, their exponent profile, and the hat-level isolation evidence for
//! involutive nonsimplicity.

use std::collections::BTreeSet;

use crate::base_algebra::{Bigrading, RElem, RMatrix};
use crate::cfk::{components, decompose_cfk, iso_cfk, restrict, solve_homotopy, ChainMap, CfkComplex};
use crate::corpus;
use crate::curves::{cable_curve, curve_to_d, d_to_curve, grade_curve};
use crate::error::{Error, Result};
use crate::involution::{c_n_iota, iota_isolation, nonsimple_check, validate_iota, IotaEvidence, IotaMap};
use crate::lot::{cfd_to_cfk, cfk_to_cfd};

/// Largest `n` and `m` accepted.
pub const MAX_PARAMETER: u32 = 9;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zeta {
    pub name: String,
    /// `∂ζ = U^a y + V^b z`.
    pub a: u32,
    pub b: u32,
    pub y: String,
    pub z: String,
}

#[derive(Debug, Clone)]
pub struct CableFamilyReport {
    pub n: u32,
    pub m: u32,
    pub iota_homotopy: RMatrix,
    /// Sizes of the summands of `C_n`.
    pub decomposition: Vec<usize>,
    pub cable: CfkComplex,
    /// Generators of the free summand and of the cabled box.
    pub free_part: Vec<usize>,
    pub box_part: Vec<usize>,
    pub zeta_bidegree: Bigrading,
    /// ζ's ordered by increasing `a`.
    pub zetas: Vec<Zeta>,
    pub a_increasing: bool,
    pub b_decreasing: bool,
    pub middle: usize,
    /// Homotopy witnessing that the projection `C_n → O` commutes with ι.
    pub projection_homotopy: RMatrix,
    pub isolated: Vec<String>,
    pub x_name: String,
    pub nonsimple: bool,
    pub nonsimple_reasons: Vec<String>,
}

impl CableFamilyReport {
    /// All criteria of the nonsimplicity argument hold.
    pub fn verdict(&self) -> bool {
        let mid = &self.zetas[self.middle];
        let half = self.m.div_ceil(2);
        self.decomposition == [1, 4]
            && self.zetas.len() == self.m as usize
            && self.a_increasing
            && self.b_decreasing
            && mid.a == half
            && mid.b == half
            && self.isolated.contains(&mid.name)
            && self.isolated.contains(&self.x_name)
            && self.nonsimple
    }
}

pub fn check_parameters(n: u32, m: u32) -> Result<()> {
    for (label, v) in [("n", n), ("m", m)] {
        if v % 2 == 0 || !(3..=MAX_PARAMETER).contains(&v) {
            return Err(Error::Invalid(format!("{label} must be odd with 3 <= {label} <= {MAX_PARAMETER}, got {v}")));
        }
    }
    Ok(())
}

/// The knot complex of the `(p, q)` cable, computed through the curve.
pub fn cable_complex(c: &CfkComplex, p: i64, q: i64) -> Result<CfkComplex> {
    let d = cfk_to_cfd(c, 0)?;
    let curve = cable_curve(&d_to_curve(&d)?, p, q)?;
    let gr = grade_curve(&curve, None)?;
    let mut dc = curve_to_d(&curve)?;
    let tight = curve.tightened();
    for (ci, comp) in tight.components.iter().enumerate() {
        for k in 0..comp.crossing_count() {
            let name = comp.name(ci, k);
            let idx = dc.index_of(&name).ok_or_else(|| Error::Invalid(format!("lost generator {name}")))?;
            dc.gens[idx].grading = Some(gr.gradings[ci][k]);
        }
    }
    cfd_to_cfk(&dc)
}

fn zetas_of(c: &CfkComplex, part: &[usize], g: Bigrading) -> Vec<Zeta> {
    let mut out = Vec::new();
    for &j in part.iter().filter(|&&j| c.gradings[j] == g) {
        let mut u = None;
        let mut v = None;
        let mut other = false;
        for (i, e) in c.d.column(j) {
            for mono in e.terms() {
                match (mono.u_exp(), mono.v_exp()) {
                    (a, 0) if a > 0 && u.is_none() => u = Some((a, i)),
                    (0, b) if b > 0 && v.is_none() => v = Some((b, i)),
                    _ => other = true,
                }
            }
        }
        if let (Some((a, y)), Some((b, z)), false) = (u, v, other) {
            out.push(Zeta { name: c.names[j].clone(), a, b, y: c.names[y].clone(), z: c.names[z].clone() });
        }
    }
    out.sort_by_key(|z| (z.a, std::cmp::Reverse(z.b)));
    out
}

/// `h` with `π ι + ι_O π = ∂h + h∂` for the projection `π: C_n → O`.
fn projection_equivariance(n: u32, iota: &IotaMap) -> Result<RMatrix> {
    let c = corpus::c_n(n);
    let o = corpus::unknot();
    let x = c.index_of("x").expect("x in c_n");
    let mut proj = RMatrix::zero(1, c.len());
    proj.set(0, x, RElem::one());
    let iota_o = IotaMap::new(RMatrix::identity(1)).as_chain_map();
    let proj = ChainMap::new(proj, Bigrading::default());
    let lhs = proj.compose(&iota.as_chain_map())?;
    let rhs = iota_o.compose(&proj)?;
    solve_homotopy(&c, &o, &lhs, &rhs)?.ok_or_else(|| Error::Invalid("projection to the free summand is not equivariant".into()))
}

/// Run the whole chain for odd `n, m` in `3..=9`.
pub fn cable_family(n: u32, m: u32) -> Result<CableFamilyReport> {
    check_parameters(n, m)?;
    let c = corpus::c_n(n);
    let iota = c_n_iota(n);
    let rep = validate_iota(&c, &iota);
    let iota_homotopy = match (rep.is_valid(), rep.sarkar_homotopy) {
        (true, Some(h)) => h,
        _ => return Err(Error::Invalid(format!("involution on C_{n} fails: {}", rep.failures.join("; ")))),
    };
    let mut decomposition: Vec<usize> = decompose_cfk(&c).iter().map(CfkComplex::len).collect();
    decomposition.sort();

    let cable = cable_complex(&c, i64::from(m), -1)?;
    let parts = components(&cable);
    let (free, boxed): (Vec<Vec<usize>>, Vec<Vec<usize>>) = parts
        .into_iter()
        .partition(|p| p.len() == 1 && cable.gradings[p[0]] == Bigrading::default());
    let free_part = match free.as_slice() {
        [f] => f.clone(),
        _ => return Err(Error::Invalid(format!("expected one free summand, found {}", free.len()))),
    };
    if iso_cfk(&restrict(&cable, &free_part), &corpus::unknot())?.is_none() {
        return Err(Error::Invalid("free summand is not the unknot".into()));
    }
    let box_part: Vec<usize> = boxed.concat();
    let k = 2 - 2 * i64::from(n);
    let zeta_bidegree = Bigrading::new(k, k);
    let zetas = zetas_of(&cable, &box_part, zeta_bidegree);
    if zetas.is_empty() {
        return Err(Error::Invalid(format!("no ζ generators in bidegree {zeta_bidegree}")));
    }
    let a_increasing = zetas.windows(2).all(|w| w[0].a < w[1].a);
    let b_decreasing = zetas.windows(2).all(|w| w[0].b > w[1].b);
    let middle = (zetas.len() - 1) / 2;

    let projection_homotopy = projection_equivariance(n, &iota)?;
    let isolated: BTreeSet<usize> = iota_isolation(&cable, &[], None)?;
    let x = free_part[0];
    let zmid = cable.index_of(&zetas[middle].name).expect("ζ name");
    let verdict = nonsimple_check(&cable, &IotaEvidence::Isolated(isolated.clone()), x, zmid)?;

    Ok(CableFamilyReport {
        n,
        m,
        iota_homotopy,
        decomposition,
        x_name: cable.names[x].clone(),
        isolated: isolated.iter().map(|&g| cable.names[g].clone()).collect(),
        cable,
        free_part,
        box_part,
        zeta_bidegree,
        zetas,
        a_increasing,
        b_decreasing,
        middle,
        projection_homotopy,
        nonsimple: verdict.holds,
        nonsimple_reasons: verdict.reasons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard() {
        assert!(cable_family(2, 3).is_err());
        assert!(cable_family(3, 11).is_err());
        assert!(cable_family(1, 3).is_err());
    }

    #[test]
    fn three_three() {
        let r = cable_family(3, 3).unwrap();
        let prof: Vec<(u32, u32)> = r.zetas.iter().map(|z| (z.a, z.b)).collect();
        assert_eq!(r.zetas.len(), 3, "{prof:?}");
        assert_eq!(prof[1], (2, 2));
        assert!(r.verdict(), "{:?} {:?} {:?}", prof, r.isolated, r.nonsimple_reasons);
    }

    #[test]
    fn three_five_and_five_three() {
        let r = cable_family(3, 5).unwrap();
        assert_eq!(r.zetas.len(), 5);
        assert_eq!((r.zetas[2].a, r.zetas[2].b), (3, 3));
        assert!(r.verdict(), "{:?} {:?}", r.zetas, r.nonsimple_reasons);
        let r = cable_family(5, 3).unwrap();
        assert_eq!(r.zeta_bidegree, Bigrading::new(-8, -8));
        assert_eq!(r.zetas.len(), 3);
        assert!(r.verdict(), "{:?} {:?}", r.zetas, r.nonsimple_reasons);
    }

    #[test]
    fn whole_range() {
        for n in (3..=MAX_PARAMETER).step_by(2) {
            for m in (3..=MAX_PARAMETER).step_by(2) {
                let r = cable_family(n, m).unwrap();
                assert!(r.verdict(), "({n},{m}) {:?} {:?} {:?}", r.zetas, r.isolated, r.nonsimple_reasons);
            }
        }
    }

    #[test]
    fn unknot_cables_to_unknot() {
        for m in [3, 5] {
            let c = cable_complex(&corpus::unknot(), m, -1).unwrap();
            assert!(iso_cfk(&c, &corpus::unknot()).unwrap().is_some());
        }
    }
}
