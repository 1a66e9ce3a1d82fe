//! DA bimodules beyond the identity: composition, reduction, isomorphism,
//! and the Auroux–Zarev pieces over the torus algebra.

use std::collections::{BTreeMap, BTreeSet};

use crate::bordered::{builtin_identity_da, DaGen, DaOp, DaOpTable, TypeDA};
use crate::data;
use crate::error::{Error, Result};
use crate::torus_algebra::{basis, Basis, Variant};

/// One term `ρ ⊗ σ` of a type DD structure with two generators `x₀, x₁`,
/// where `x_k` has idempotent `ι_k` on the ρ side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DdTerm {
    pub rho: Basis,
    pub sigma: Basis,
}

fn op_table(m: &TypeDA) -> DaOpTable {
    let mut table: DaOpTable = BTreeMap::new();
    for op in &m.ops {
        table.entry((op.gen, op.inputs.clone())).or_default().push((op.output, op.target));
    }
    table
}

/// `outer ⊠ inner`: the D outputs of `inner` are fed to the A side of `outer`.
pub fn box_da_da(outer: &TypeDA, inner: &TypeDA) -> Result<TypeDA> {
    if outer.right != inner.left {
        return Err(Error::Variant(format!("box of a DA bimodule over {} with one over {}", outer.right, inner.left)));
    }
    let mut out = TypeDA::new(outer.left, inner.right);
    out.bound = outer.bound.max(inner.bound);
    let mut pos = BTreeMap::new();
    for (i, g) in outer.gens.iter().enumerate() {
        for (j, h) in inner.gens.iter().enumerate() {
            if g.right == h.left {
                pos.insert((i, j), out.gens.len());
                out.gens.push(DaGen { name: format!("{}.{}", g.name, h.name), left: g.left, right: h.right });
            }
        }
    }
    let outer_table = op_table(outer);
    let mut prefixes: BTreeSet<(usize, Vec<Basis>)> = BTreeSet::new();
    for op in &outer.ops {
        for k in 0..=op.inputs.len() {
            prefixes.insert((op.gen, op.inputs[..k].to_vec()));
        }
    }
    let inner_from: Vec<Vec<&DaOp>> = (0..inner.len()).map(|j| inner.ops.iter().filter(|o| o.gen == j).collect()).collect();
    let limit = out.bound;

    struct State {
        at: usize,
        inputs: Vec<Basis>,
        outputs: Vec<Basis>,
        unit: bool,
    }
    for (&(i, j), &col) in &pos {
        let mut stack = vec![State { at: j, inputs: Vec::new(), outputs: Vec::new(), unit: false }];
        while let Some(s) = stack.pop() {
            if s.inputs.len() > limit || s.outputs.len() > limit {
                return Err(Error::BoxDidNotTerminate);
            }
            if s.unit {
                let op = DaOp { gen: col, inputs: s.inputs.clone(), output: Basis::Idem(outer.gens[i].left), target: pos[&(i, s.at)] };
                out.toggle_op(op);
                continue;
            }
            if let Some(outs) = outer_table.get(&(i, s.outputs.clone())) {
                if !s.outputs.is_empty() || s.at == j {
                    for &(c, i2) in outs {
                        out.toggle_op(DaOp { gen: col, inputs: s.inputs.clone(), output: c, target: pos[&(i2, s.at)] });
                    }
                }
            }
            for op in &inner_from[s.at] {
                if op.output.is_idem() {
                    if s.outputs.is_empty() {
                        let mut inputs = s.inputs.clone();
                        inputs.extend(&op.inputs);
                        stack.push(State { at: op.target, inputs, outputs: Vec::new(), unit: true });
                    }
                    continue;
                }
                let mut outputs = s.outputs.clone();
                outputs.push(op.output);
                if !prefixes.contains(&(i, outputs.clone())) {
                    continue;
                }
                let mut inputs = s.inputs.clone();
                inputs.extend(&op.inputs);
                stack.push(State { at: op.target, inputs, outputs, unit: false });
            }
        }
    }
    Ok(out)
}

/// Cancel every `δ¹₁` term with idempotent output, correcting the remaining
/// operations along zig-zags.
pub fn reduce_da(m: &TypeDA) -> Result<TypeDA> {
    let mut m = m.clone();
    while let Some(cut) = m.ops.iter().find(|o| o.inputs.is_empty() && o.output.is_idem() && o.gen != o.target).cloned() {
        m = cancel_da(&m, &cut)?;
    }
    Ok(m)
}

fn cancel_da(m: &TypeDA, cut: &DaOp) -> Result<TypeDA> {
    let (x, y) = (cut.gen, cut.target);
    let rest: Vec<&DaOp> = m.ops.iter().filter(|o| *o != cut).collect();
    let from_x: Vec<&DaOp> = rest.iter().copied().filter(|o| o.gen == x).collect();
    let keep: Vec<usize> = (0..m.len()).filter(|&g| g != x && g != y).collect();
    let new_index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &g)| (g, k)).collect();
    let mut out = TypeDA::new(m.left, m.right);
    out.bound = m.bound;
    out.header = m.header.clone();
    out.gens = keep.iter().map(|&g| m.gens[g].clone()).collect();
    for op in rest.iter().filter(|o| o.gen != x && o.gen != y) {
        if op.target != x && op.target != y {
            out.toggle_op(DaOp { gen: new_index[&op.gen], inputs: op.inputs.clone(), output: op.output, target: new_index[&op.target] });
            continue;
        }
        if op.target == x {
            continue;
        }
        let mut stack = vec![(op.inputs.clone(), op.output, 0usize)];
        while let Some((inputs, acc, depth)) = stack.pop() {
            if depth > m.bound.max(8) * 4 {
                return Err(Error::BoxDidNotTerminate);
            }
            for next in &from_x {
                let Some(prod) = acc.mul(next.output, m.left) else { continue };
                let mut seq = inputs.clone();
                seq.extend(&next.inputs);
                if seq.len() > m.bound {
                    return Err(Error::BoxDidNotTerminate);
                }
                if next.target == y {
                    stack.push((seq, prod, depth + 1));
                } else if next.target != x {
                    out.toggle_op(DaOp { gen: new_index[&op.gen], inputs: seq, output: prod, target: new_index[&next.target] });
                }
            }
        }
    }
    Ok(out)
}

/// A generator bijection carrying every operation of `m` onto one of `n`.
pub fn iso_da(m: &TypeDA, n: &TypeDA) -> Option<Vec<usize>> {
    if m.left != n.left || m.right != n.right || m.len() != n.len() || m.ops.len() != n.ops.len() {
        return None;
    }
    fn search(m: &TypeDA, n: &TypeDA, perm: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        let k = perm.len();
        if k == m.len() {
            let mapped: BTreeSet<DaOp> = m
                .ops
                .iter()
                .map(|o| DaOp { gen: perm[o.gen], inputs: o.inputs.clone(), output: o.output, target: perm[o.target] })
                .collect();
            return mapped == n.ops;
        }
        for t in 0..n.len() {
            if used[t] || (n.gens[t].left, n.gens[t].right) != (m.gens[k].left, m.gens[k].right) {
                continue;
            }
            used[t] = true;
            perm.push(t);
            if search(m, n, perm, used) {
                return true;
            }
            perm.pop();
            used[t] = false;
        }
        false
    }
    let mut perm = Vec::new();
    let mut used = vec![false; n.len()];
    search(m, n, &mut perm, &mut used).then_some(perm)
}

/// The DD identity over the torus algebra: `Σ ρ_I ⊗ σ_I` over the chords
/// `I ∈ {1, 2, 3, 123}`, with σ written through the anti-automorphism that
/// lets it act on the left of the algebra.
pub fn dd_identity_terms() -> Vec<DdTerm> {
    ["rho_1", "rho_2", "rho_3", "rho_123"]
        .iter()
        .map(|s| {
            let b: Basis = s.parse().expect("chord name");
            DdTerm { rho: b, sigma: b }
        })
        .collect()
}

/// `DD ⊠ 𝒜`: the DA bimodule obtained by pairing a two-generator type DD
/// structure (complementary idempotents on the two sides) with the algebra
/// as a bimodule over itself. The σ side acts on the algebra factor by left
/// multiplication and the A side of the result by right multiplication.
pub fn dd_times_algebra(terms: &[DdTerm]) -> TypeDA {
    let v = Variant::Plain;
    let mut m = TypeDA::new(v, v);
    let mut pos = BTreeMap::new();
    for k in 0..2u8 {
        for a in basis(v) {
            if a.left_idem() == 1 - k {
                pos.insert((k, a), m.gens.len());
                m.gens.push(DaGen { name: format!("x{k}.{a}"), left: k, right: a.right_idem() });
            }
        }
    }
    for (&(k, a), &g) in &pos {
        for t in terms.iter().filter(|t| t.rho.left_idem() == k) {
            let k2 = t.rho.right_idem();
            if let Some(sa) = t.sigma.mul(a, v) {
                if let Some(&tgt) = pos.get(&(k2, sa)) {
                    m.toggle_op(DaOp { gen: g, inputs: Vec::new(), output: t.rho, target: tgt });
                }
            }
        }
        for b in basis(v).into_iter().filter(|b| !b.is_idem()) {
            if let Some(ab) = a.mul(b, v) {
                m.toggle_op(DaOp { gen: g, inputs: vec![b], output: Basis::Idem(k), target: pos[&(k, ab)] });
            }
        }
    }
    m
}

/// The anti-automorphism of the torus algebra exchanging ρ₁ and ρ₃ and
/// swapping the idempotents. `None` for chords containing 0.
pub fn reverse_basis(b: Basis) -> Option<Basis> {
    match b {
        Basis::Idem(i) => Some(Basis::Idem(1 - i)),
        _ if b.contains_zero() => None,
        _ => {
            let letters: Vec<u8> = b.letters().iter().rev().map(|&l| 4 - l).collect();
            Basis::from_letters(&letters)
        }
    }
}

/// The orientation-reversed bimodule: dual generators, reversed operations,
/// with inputs and outputs carried through [`reverse_basis`].
pub fn dual_da(m: &TypeDA) -> Result<TypeDA> {
    if m.left != Variant::Plain || m.right != Variant::Plain {
        return Err(Error::Variant("dual bimodules are only defined over the plain algebra".into()));
    }
    let mut out = TypeDA::new(Variant::Plain, Variant::Plain);
    out.bound = m.bound;
    out.gens = m.gens.iter().map(|g| DaGen { name: format!("{}*", g.name), left: 1 - g.left, right: 1 - g.right }).collect();
    for op in &m.ops {
        let inputs: Option<Vec<Basis>> = op.inputs.iter().rev().map(|&b| reverse_basis(b)).collect();
        let (Some(inputs), Some(output)) = (inputs, reverse_basis(op.output)) else { unreachable!("plain algebra is closed under reversal") };
        out.toggle_op(DaOp { gen: op.target, inputs, output, target: op.gen });
    }
    Ok(out)
}

/// The Auroux–Zarev piece in DA form, loaded from the shipped data file.
pub fn builtin_az() -> TypeDA {
    TypeDA::parse(data::builtin("bimodules/az.da").expect("az.da is embedded")).expect("shipped az.da parses")
}

/// The orientation reverse of [`builtin_az`], loaded from the shipped data file.
pub fn builtin_az_bar() -> TypeDA {
    TypeDA::parse(data::builtin("bimodules/az_bar.da").expect("az_bar.da is embedded")).expect("shipped az_bar.da parses")
}

/// Whether `reduce(outer ⊠ inner)` is isomorphic to the identity bimodule.
pub fn composes_to_identity(outer: &TypeDA, inner: &TypeDA) -> Result<bool> {
    let r = reduce_da(&box_da_da(outer, inner)?)?;
    Ok(iso_da(&r, &builtin_identity_da(outer.left)).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bordered::{box_da_d, iso_typed, reduce_typed, validate_typeda};
    use crate::lot::cfk_to_cfd;
    use crate::corpus;

    fn construction() -> (TypeDA, TypeDA) {
        let az = dd_times_algebra(&dd_identity_terms());
        let bar = dual_da(&az).unwrap();
        (az, bar)
    }

    #[test]
    fn reverse_is_an_anti_involution() {
        let v = Variant::Plain;
        for a in basis(v) {
            let ra = reverse_basis(a).unwrap();
            assert_eq!(reverse_basis(ra), Some(a));
            for b in basis(v) {
                let rb = reverse_basis(b).unwrap();
                assert_eq!(a.mul(b, v).map(|p| reverse_basis(p).unwrap()), rb.mul(ra, v), "{a} {b}");
            }
        }
        assert_eq!(reverse_basis("rho_0".parse().unwrap()), None);
    }

    #[test]
    fn shipped_files_match_the_construction() {
        let (az, bar) = construction();
        assert!(validate_typeda(&az).is_empty(), "{:?}", validate_typeda(&az));
        assert!(validate_typeda(&bar).is_empty(), "{:?}", validate_typeda(&bar));
        let shipped = builtin_az();
        assert_eq!(shipped.len(), 8);
        assert_eq!(shipped.gens, az.gens);
        assert_eq!(shipped.ops, az.ops);
        let shipped_bar = builtin_az_bar();
        assert_eq!(shipped_bar.gens, bar.gens);
        assert_eq!(shipped_bar.ops, bar.ops);
    }

    #[test]
    fn dual_is_an_involution() {
        let (az, bar) = construction();
        let back = dual_da(&bar).unwrap();
        assert_eq!(back.ops, az.ops);
        assert_eq!(back.gens.iter().map(|g| (g.left, g.right)).collect::<Vec<_>>(), az.gens.iter().map(|g| (g.left, g.right)).collect::<Vec<_>>());
    }

    #[test]
    fn az_pieces_compose_to_the_identity() {
        let (az, bar) = (builtin_az(), builtin_az_bar());
        assert!(composes_to_identity(&bar, &az).unwrap());
        assert!(composes_to_identity(&az, &bar).unwrap());
        // AZ alone is reduced and far from the identity.
        assert_eq!(reduce_da(&az).unwrap().len(), 8);
        assert!(!composes_to_identity(&az, &az).unwrap());
    }

    #[test]
    fn identity_composes_trivially() {
        let id = builtin_identity_da(Variant::Plain);
        let az = builtin_az();
        let r = reduce_da(&box_da_da(&id, &az).unwrap()).unwrap();
        assert!(iso_da(&r, &az).is_some());
    }

    #[test]
    fn composite_acts_trivially_on_type_d() {
        let (az, bar) = (builtin_az(), builtin_az_bar());
        for c in [corpus::trefoil(), corpus::figure_eight()] {
            let d = reduce_typed(&cfk_to_cfd(&c, 3).unwrap());
            let once = box_da_d(&az, &d).unwrap();
            let twice = reduce_typed(&box_da_d(&bar, &once).unwrap());
            assert!(iso_typed(&twice, &d).unwrap().is_some());
        }
    }

    #[test]
    fn cancellation_with_zigzag() {
        // a -ρ₁-> y <-ι₁- x -ρ₂-> z; cancelling x, y leaves a -ρ₁₂-> z.
        let mut m = TypeDA::new(Variant::Plain, Variant::Plain);
        for (name, l) in [("a", 0), ("x", 1), ("y", 1), ("z", 0)] {
            m.gens.push(DaGen { name: name.into(), left: l, right: l });
        }
        let r1: Basis = "rho_1".parse().unwrap();
        let r2: Basis = "rho_2".parse().unwrap();
        m.toggle_op(DaOp { gen: 0, inputs: vec![], output: r1, target: 2 });
        m.toggle_op(DaOp { gen: 1, inputs: vec![], output: Basis::Idem(1), target: 2 });
        m.toggle_op(DaOp { gen: 1, inputs: vec![], output: r2, target: 3 });
        let r = reduce_da(&m).unwrap();
        assert_eq!(r.len(), 2);
        let ops: Vec<_> = r.ops.iter().map(|o| (o.gen, o.output, o.target)).collect();
        assert_eq!(ops, vec![(0, "rho_12".parse().unwrap(), 1)]);
    }
}
