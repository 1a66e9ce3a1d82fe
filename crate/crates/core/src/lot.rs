//! The correspondence between knot Floer complexes over ℛ and type D
//! structures of framed knot complements.

use crate::base_algebra::RMonomial;
use crate::bordered::{
    box_ad, extend_typed, reduce_typed, truncate, validate_typed, AGen, AOp, Curvature, TypeA, TypeD, DEFAULT_EXTENSION_BUDGET,
    DEFAULT_OP_BOUND,
};
use crate::cfk::{compute_tau, reduce, simultaneous_simplify, validate_cfk, CfkComplex};
use crate::curves::{cfk_to_curve, curve_to_d, curve_to_extended_d, d_to_curve, grade_curve};
use crate::error::{Error, Result};
use crate::torus_algebra::{Basis, Variant};

/// Which weights of the solid torus module survive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Specialization {
    Full,
    /// V = 0: only the U-weighted family.
    VZero,
    /// U = 0: only the V-weighted family.
    UZero,
    /// U = V = 0: no operations.
    Hat,
}

/// The half-extended solid torus module over the truncated algebra: one
/// generator `t` in ι₀ with
/// `m(t, ρ₃, ρ₂₃, …, ρ₂₃, ρ₂) = Uⁿ t` and `m(t, ρ₁, ρ₀₁, …, ρ₀₁, ρ₀) = Vⁿ t`
/// (n − 1 middle inputs, n ≥ 1), listed while the input count is at most
/// `bound`.
pub fn cfa_torus(bound: usize) -> TypeA {
    cfa_torus_specialized(Specialization::Full, bound)
}

pub fn cfa_torus_specialized(spec: Specialization, bound: usize) -> TypeA {
    let mut a = TypeA {
        variant: Variant::Truncated,
        gens: vec![AGen { name: "t".into(), idem: 0 }],
        ops: Vec::new(),
        bound,
        open: true,
    };
    let families = [
        (Basis::chord(3, 1), Basis::chord(2, 2), Basis::chord(2, 1), true),
        (Basis::chord(1, 1), Basis::chord(0, 2), Basis::chord(0, 1), false),
    ];
    for (first, mid, last, is_u) in families {
        for n in 1..bound {
            let mut seq = vec![first];
            seq.extend(std::iter::repeat_n(mid, n - 1));
            seq.push(last);
            let exp = u32::try_from(n).expect("small bound");
            let weight = if is_u { RMonomial::u(exp) } else { RMonomial::v(exp) };
            a.ops.push(AOp { input: 0, seq, output: 0, weight });
        }
    }
    a.specialize(|w| match spec {
        Specialization::Full => true,
        Specialization::VZero => w.v_exp() == 0,
        Specialization::UZero => w.u_exp() == 0,
        Specialization::Hat => w.is_one(),
    })
}

/// True when the framing lies above `2τ`, the regime of the
/// large-positive normal form.
pub fn is_large_framing(c: &CfkComplex, n: i64) -> Result<bool> {
    Ok(n > 2 * compute_tau(c)?)
}

/// The type D structure of the `n`-framed complement over the plain
/// algebra. ι₀ generators carry the names and bigradings of `c`.
pub fn cfk_to_cfd(c: &CfkComplex, n: i64) -> Result<TypeD> {
    let problems = validate_cfk(c);
    if let Some(p) = problems.first() {
        return Err(Error::NotKnotComplex(p.to_string()));
    }
    let s = simultaneous_simplify(c)?;
    let mut curve = cfk_to_curve(&s)?;
    curve.framing = n;
    let mut d = curve_to_d(&curve)?;
    for g in d.gens.iter_mut().filter(|g| g.idem == 0) {
        g.grading = s.index_of(&g.name).map(|k| s.gradings[k]);
    }
    d.header = c.header.clone();
    Ok(d)
}

/// Options for [`cfd_to_cfk`].
#[derive(Debug, Clone, Copy)]
pub struct PairingOptions {
    pub reduce: bool,
    pub extension_budget: usize,
}

impl Default for PairingOptions {
    fn default() -> Self {
        PairingOptions { reduce: true, extension_budget: DEFAULT_EXTENSION_BUDGET }
    }
}

/// Extend, truncate, pair with the solid torus module and reduce.
pub fn cfd_to_cfk(m: &TypeD) -> Result<CfkComplex> {
    cfd_to_cfk_with(m, PairingOptions::default())
}

pub fn cfd_to_cfk_with(m: &TypeD, opts: PairingOptions) -> Result<CfkComplex> {
    if m.variant != Variant::Plain || m.curvature != Curvature::Flat {
        return Err(Error::Variant("expected a flat structure over the plain algebra".into()));
    }
    let mut red = reduce_typed(m);
    if red.gens.iter().any(|g| g.idem == 0 && g.grading.is_none()) {
        // Structures that are not read as a curve pair with zero gradings.
        let mut graded = red.clone();
        if infer_gradings(&mut graded).is_ok() {
            red = graded;
        }
    }
    let ext = match curve_extension(&red) {
        Some(e) => e,
        None => extend_typed(&red, opts.extension_budget)?
            .ok_or_else(|| Error::Invalid("structure is not extendable".into()))?,
    };
    let tr = truncate(&ext, Variant::Truncated);
    let bound = DEFAULT_OP_BOUND.max(op_bound(&tr));
    let cx = box_ad(&cfa_torus(bound), &tr)?;
    Ok(if opts.reduce { reduce(&cx).complex } else { cx })
}

/// One more than the longest input sequence of the solid torus module that
/// can meet `m`: two end chords around the longest run of ρ₂₃ or ρ₀₁
/// arrows. A cycle of such arrows falls back to the generator count.
fn op_bound(m: &TypeD) -> usize {
    let mut longest = 0;
    for mid in [Basis::chord(2, 2), Basis::chord(0, 2)] {
        let mut next: Vec<Vec<usize>> = vec![Vec::new(); m.len()];
        for (f, b, t) in m.basis_arrows() {
            if b == mid {
                next[f].push(t);
            }
        }
        // Longest path by repeated relaxation; more than len rounds means a cycle.
        let mut len = vec![0usize; m.len()];
        let mut changed = true;
        let mut rounds = 0;
        while changed {
            changed = false;
            rounds += 1;
            if rounds > m.len() + 1 {
                return m.idem_count(1) + 3;
            }
            for f in 0..m.len() {
                for &t in &next[f] {
                    if len[t] < len[f] + 1 {
                        len[t] = len[f] + 1;
                        changed = true;
                    }
                }
            }
        }
        longest = longest.max(len.into_iter().max().unwrap_or(0));
    }
    longest + 3
}

/// The extension read off the curve of `m`, kept only if it passes the
/// curvature check. ι₀ generators keep their names and gradings.
fn curve_extension(m: &TypeD) -> Option<TypeD> {
    let curve = d_to_curve(m).ok()?;
    let mut ext = curve_to_extended_d(&curve).ok()?;
    for g in ext.gens.iter_mut().filter(|g| g.idem == 0) {
        g.grading = m.gens[m.index_of(&g.name)?].grading;
    }
    (ext.idem_count(0) == m.idem_count(0) && validate_typed(&ext).is_empty()).then_some(ext)
}

/// Bigradings of the ι₀ generators read off the curve. Closed components
/// are graded only relative to themselves.
fn infer_gradings(m: &mut TypeD) -> Result<()> {
    for g in m.gens.iter_mut() {
        g.grading = None;
    }
    let curve = d_to_curve(m)?;
    let gr = grade_curve(&curve, None)?;
    for (ci, comp) in curve.components.iter().enumerate() {
        for k in 0..comp.crossing_count() {
            let name = comp.name(ci, k);
            let idx = m.index_of(&name).ok_or_else(|| Error::Invalid(format!("lost generator {name}")))?;
            m.gens[idx].grading = Some(gr.gradings[ci][k]);
        }
    }
    Ok(())
}

/// Rank of the homology of the hat pairing, which has no differential on a
/// reduced structure.
pub fn hat_pairing_rank(m: &TypeD) -> Result<usize> {
    let mut a = cfa_torus_specialized(Specialization::Hat, DEFAULT_OP_BOUND);
    a.variant = m.variant;
    let cx = box_ad(&a, &reduce_typed(m))?;
    Ok(cx.len() - 2 * cx.d.hat().rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bordered::validate_typea;
    use crate::cfk::iso_cfk;
    use crate::corpus;

    fn corpus_list() -> Vec<CfkComplex> {
        vec![corpus::unknot(), corpus::trefoil(), corpus::mirror_trefoil(), corpus::figure_eight(), corpus::c_n(3)]
    }

    #[test]
    fn torus_module_ops() {
        let a = cfa_torus(6);
        assert_eq!(a.ops.len(), 10);
        assert!(a.ops.iter().any(|op| op.seq.len() == 2 && op.weight == RMonomial::u(1)));
        assert!(a.ops.iter().any(|op| op.seq == vec![Basis::chord(1, 1), Basis::chord(0, 2), Basis::chord(0, 1)]
            && op.weight == RMonomial::v(2)));
        assert!(cfa_torus_specialized(Specialization::Hat, 6).ops.is_empty());
        assert_eq!(cfa_torus_specialized(Specialization::VZero, 6).ops.len(), 5);
        assert!(validate_typea(&a).is_empty(), "{:?}", validate_typea(&a));
    }

    #[test]
    fn unknot_pairing() {
        // A lone ι₀ generator pairs to the unknot but admits no extension.
        let mut d = TypeD::new(Variant::Truncated, Curvature::Flat);
        d.add_gen("x", 0, None);
        let cx = box_ad(&cfa_torus(DEFAULT_OP_BOUND), &d).unwrap();
        assert!(iso_cfk(&cx, &corpus::unknot()).unwrap().is_some());
        d.variant = Variant::Plain;
        assert!(matches!(cfd_to_cfk(&d), Err(Error::Invalid(_))));
        let zero = cfk_to_cfd(&corpus::unknot(), 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero.basis_arrows(), vec![(0, Basis::chord(1, 2), 0)]);
        let m = cfk_to_cfd(&corpus::unknot(), -1).unwrap();
        assert_eq!(m.len(), 2);
        assert!(validate_typed(&m).is_empty());
    }

    #[test]
    fn roundtrip_corpus() {
        for c in corpus_list() {
            for n in [-3, 0, 7] {
                let d = cfk_to_cfd(&c, n).unwrap();
                assert!(validate_typed(&d).is_empty(), "{:?}", validate_typed(&d));
                assert_eq!(d.idem_count(0), c.len());
                assert!(extend_typed(&d, DEFAULT_EXTENSION_BUDGET).unwrap().is_some());
                let back = cfd_to_cfk(&d).unwrap();
                assert!(iso_cfk(&back, &c).unwrap().is_some(), "n={n}\n{}\n{}", c.serialize(), back.serialize());
                assert_eq!(hat_pairing_rank(&d).unwrap(), c.hat_rank());
            }
        }
    }

    #[test]
    fn roundtrip_without_gradings() {
        for c in [corpus::unknot(), corpus::trefoil(), corpus::mirror_trefoil()] {
            let mut d = cfk_to_cfd(&c, 2).unwrap();
            for g in d.gens.iter_mut() {
                g.grading = None;
            }
            let back = cfd_to_cfk(&d).unwrap();
            assert!(iso_cfk(&back, &c).unwrap().is_some(), "{}", back.serialize());
        }
    }
}
