//! Type D, type A and type DA structures over the torus algebra variants.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use crate::base_algebra::{Bigrading, F2Matrix, LinearSystem, RElem, RMatrix, RMonomial};
use crate::cfk::CfkComplex;
use crate::error::{Error, Result};
use crate::torus_algebra::{alg_mul, basis, central_element, parse_alg_elem, AlgElem, Basis, Idem, Variant};

/// Default operation-length bound for type A and DA structures.
pub const DEFAULT_OP_BOUND: usize = 12;

/// Default cap on the number of unknown arrows in [`extend_typed`].
pub const DEFAULT_EXTENSION_BUDGET: usize = 200_000;

/// Operations keyed by `(generator, inputs)`.
type AOpTable = BTreeMap<(usize, Vec<Basis>), Vec<(usize, RMonomial)>>;
pub(crate) type DaOpTable = BTreeMap<(usize, Vec<Basis>), Vec<(Basis, usize)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Curvature {
    Flat,
    /// δ² = 𝕌 ⊗ id.
    Curved,
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Curvature::Flat => "flat",
            Curvature::Curved => "curved",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DGen {
    pub name: String,
    pub idem: Idem,
    pub grading: Option<Bigrading>,
}

/// A type D structure. `arrows[(x, y)]` is the coefficient of `y` in δ¹(x).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeD {
    pub variant: Variant,
    pub gens: Vec<DGen>,
    pub arrows: BTreeMap<(usize, usize), AlgElem>,
    pub curvature: Curvature,
    pub header: Vec<String>,
}

fn idem_name(i: Idem) -> &'static str {
    if i == 0 {
        "i0"
    } else {
        "i1"
    }
}

fn parse_idem(tok: &str) -> Option<Idem> {
    match tok {
        "i0" => Some(0),
        "i1" => Some(1),
        _ => None,
    }
}

fn col_of(raw: &str, tok: &str) -> usize {
    raw.find(tok).map_or(1, |p| p + 1)
}

impl TypeD {
    pub fn new(variant: Variant, curvature: Curvature) -> Self {
        TypeD { variant, gens: Vec::new(), arrows: BTreeMap::new(), curvature, header: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn add_gen(&mut self, name: impl Into<String>, idem: Idem, grading: Option<Bigrading>) -> usize {
        self.gens.push(DGen { name: name.into(), idem, grading });
        self.gens.len() - 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    /// Toggle the basis element `b` in the coefficient of `to` in δ¹(from).
    pub fn toggle_arrow(&mut self, from: usize, to: usize, b: Basis) {
        let e = self.arrows.entry((from, to)).or_insert_with(|| AlgElem::zero(self.variant));
        e.toggle(b);
        if e.is_zero() {
            self.arrows.remove(&(from, to));
        }
    }

    pub fn add_arrow(&mut self, from: usize, to: usize, a: &AlgElem) {
        for b in a.terms() {
            self.toggle_arrow(from, to, b);
        }
    }

    pub fn arrow(&self, from: usize, to: usize) -> AlgElem {
        self.arrows.get(&(from, to)).cloned().unwrap_or_else(|| AlgElem::zero(self.variant))
    }

    /// Outgoing arrows of `from` as `(to, coefficient)`.
    pub fn out(&self, from: usize) -> impl Iterator<Item = (usize, &AlgElem)> + '_ {
        self.arrows.range((from, 0)..(from + 1, 0)).map(|(&(_, t), e)| (t, e))
    }

    /// Every arrow split into basis terms, as `(from, term, to)`.
    pub fn basis_arrows(&self) -> Vec<(usize, Basis, usize)> {
        let mut out = Vec::new();
        for (&(f, t), e) in &self.arrows {
            for b in e.terms() {
                out.push((f, b, t));
            }
        }
        out
    }

    pub fn idem_count(&self, i: Idem) -> usize {
        self.gens.iter().filter(|g| g.idem == i).count()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = TypeD::new(Variant::Plain, Curvature::Flat);
        let mut in_header = true;
        let mut seen_body = false;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            if in_header && raw.starts_with('#') {
                m.header.push(raw.to_string());
                continue;
            }
            in_header = false;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "variant" | "curvature" if seen_body => {
                    return Err(Error::parse(line_no, 1, format!("`{}` must precede generators", toks[0])));
                }
                "variant" if toks.len() == 2 => {
                    m.variant = toks[1].parse().map_err(|e: String| Error::parse(line_no, col_of(raw, toks[1]), e))?;
                }
                "curvature" if toks.len() == 2 => {
                    m.curvature = match toks[1] {
                        "flat" => Curvature::Flat,
                        "curved" => Curvature::Curved,
                        t => return Err(Error::parse(line_no, col_of(raw, t), format!("unknown curvature `{t}`"))),
                    };
                }
                "gen" if toks.len() == 3 || toks.len() == 5 => {
                    seen_body = true;
                    let idem = parse_idem(toks[2])
                        .ok_or_else(|| Error::parse(line_no, col_of(raw, toks[2]), "expected i0 or i1"))?;
                    if m.index_of(toks[1]).is_some() {
                        return Err(Error::parse(line_no, col_of(raw, toks[1]), format!("duplicate generator {}", toks[1])));
                    }
                    let grading = if toks.len() == 5 {
                        let gu = parse_i64(toks[3], line_no, raw)?;
                        let gv = parse_i64(toks[4], line_no, raw)?;
                        Some(Bigrading::new(gu, gv))
                    } else {
                        None
                    };
                    m.add_gen(toks[1], idem, grading);
                }
                "arrow" if toks.len() == 4 => {
                    seen_body = true;
                    let f = lookup(&m, toks[1], line_no, raw)?;
                    let t = lookup(&m, toks[2], line_no, raw)?;
                    let a = parse_alg_elem(toks[3], m.variant).map_err(|e| Error::parse(line_no, col_of(raw, toks[3]), e))?;
                    if m.arrows.contains_key(&(f, t)) {
                        return Err(Error::parse(line_no, 1, "repeated arrow; join coefficients with `+`"));
                    }
                    m.add_arrow(f, t, &a);
                }
                other => return Err(Error::parse(line_no, col_of(raw, other), format!("malformed line `{line}`"))),
            }
        }
        Ok(m)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str(h);
            out.push('\n');
        }
        let _ = writeln!(out, "variant {}", self.variant);
        let _ = writeln!(out, "curvature {}", self.curvature);
        for g in &self.gens {
            match g.grading {
                Some(gr) => {
                    let _ = writeln!(out, "gen {} {} {} {}", g.name, idem_name(g.idem), gr.gr_u, gr.gr_v);
                }
                None => {
                    let _ = writeln!(out, "gen {} {}", g.name, idem_name(g.idem));
                }
            }
        }
        for (&(f, t), e) in &self.arrows {
            let _ = writeln!(out, "arrow {} {} {e}", self.gens[f].name, self.gens[t].name);
        }
        out
    }
}

fn parse_i64(tok: &str, line_no: usize, raw: &str) -> Result<i64> {
    match tok.parse::<i64>() {
        Ok(v) if v.to_string() == tok => Ok(v),
        _ => Err(Error::parse(line_no, col_of(raw, tok), format!("bad integer `{tok}`"))),
    }
}

fn lookup(m: &TypeD, tok: &str, line_no: usize, raw: &str) -> Result<usize> {
    m.index_of(tok)
        .ok_or_else(|| Error::parse(line_no, col_of(raw, tok), format!("unknown generator `{tok}`")))
}

/// The component of 𝕌 with both idempotents equal to `i`.
pub fn curvature_at(v: Variant, i: Idem) -> AlgElem {
    match central_element(v) {
        Ok(u) => AlgElem::from_terms(v, u.terms().filter(|b| b.left_idem() == i)).expect("legal terms"),
        Err(_) => AlgElem::zero(v),
    }
}

/// δ² as a map `(x, z) -> coefficient`.
pub fn delta_squared(m: &TypeD) -> BTreeMap<(usize, usize), AlgElem> {
    let mut out: BTreeMap<(usize, usize), AlgElem> = BTreeMap::new();
    for (&(x, y), a) in &m.arrows {
        for (z, b) in m.out(y) {
            let p = alg_mul(a, b).expect("same variant");
            if p.is_zero() {
                continue;
            }
            let e = out.entry((x, z)).or_insert_with(|| AlgElem::zero(m.variant));
            *e = e.add(&p).expect("same variant");
        }
    }
    out.retain(|_, e| !e.is_zero());
    out
}

/// Violations of idempotent compatibility and of the structure equation.
pub fn validate_typed(m: &TypeD) -> Vec<String> {
    let mut out = Vec::new();
    for (f, b, t) in m.basis_arrows() {
        if !b.is_legal(m.variant) {
            out.push(format!("{b} on {} -> {} is not in the {} algebra", m.gens[f].name, m.gens[t].name, m.variant));
        }
        if b.left_idem() != m.gens[f].idem || b.right_idem() != m.gens[t].idem {
            out.push(format!("idempotent mismatch on {} -> {} labelled {b}", m.gens[f].name, m.gens[t].name));
        }
    }
    if m.curvature == Curvature::Curved && m.variant == Variant::Plain {
        out.push("curved structure over the plain algebra".into());
        return out;
    }
    let mut sq = delta_squared(m);
    if m.curvature == Curvature::Curved {
        for (x, g) in m.gens.iter().enumerate() {
            let u = curvature_at(m.variant, g.idem);
            let e = sq.entry((x, x)).or_insert_with(|| AlgElem::zero(m.variant));
            *e = e.add(&u).expect("same variant");
        }
        sq.retain(|_, e| !e.is_zero());
    }
    for ((x, z), e) in sq {
        out.push(format!("structure equation fails: {} -> {} has {e}", m.gens[x].name, m.gens[z].name));
    }
    out
}

/// Cancel arrows labelled by an idempotent, with zig-zag corrections.
pub fn reduce_typed(m: &TypeD) -> TypeD {
    let mut cur = m.clone();
    loop {
        let pivot = cur
            .arrows
            .iter()
            .find(|(&(f, t), e)| f != t && e.terms().any(|b| b.is_idem()))
            .map(|(&k, _)| k);
        let Some((x, y)) = pivot else { break };
        let into_y: Vec<(usize, AlgElem)> = cur
            .arrows
            .iter()
            .filter(|(&(w, t), _)| t == y && w != x && w != y)
            .map(|(&(w, _), e)| (w, e.clone()))
            .collect();
        let out_x: Vec<(usize, AlgElem)> = cur.out(x).filter(|&(z, _)| z != x && z != y).map(|(z, e)| (z, e.clone())).collect();
        for (w, a) in &into_y {
            for (z, b) in &out_x {
                let p = alg_mul(a, b).expect("same variant");
                cur.add_arrow(*w, *z, &p);
            }
        }
        cur = remove_gens(&cur, &[x, y]);
    }
    cur
}

fn remove_gens(m: &TypeD, drop: &[usize]) -> TypeD {
    let keep: Vec<usize> = (0..m.len()).filter(|k| !drop.contains(k)).collect();
    let mut pos = vec![usize::MAX; m.len()];
    for (new, &old) in keep.iter().enumerate() {
        pos[old] = new;
    }
    let mut out = TypeD::new(m.variant, m.curvature);
    out.header = m.header.clone();
    for &k in &keep {
        out.gens.push(m.gens[k].clone());
    }
    for (&(f, t), e) in &m.arrows {
        if pos[f] != usize::MAX && pos[t] != usize::MAX {
            out.arrows.insert((pos[f], pos[t]), e.clone());
        }
    }
    out
}

/// Drop arrows that are not legal in `target` (`Truncated` or `Plain`).
pub fn truncate(m: &TypeD, target: Variant) -> TypeD {
    let mut out = TypeD::new(target, Curvature::Flat);
    out.gens = m.gens.clone();
    out.header = m.header.clone();
    for (&k, e) in &m.arrows {
        let p = e.project(target);
        if !p.is_zero() {
            out.arrows.insert(k, p);
        }
    }
    if target != Variant::Plain {
        let sq = delta_squared(&out);
        let curved = out
            .gens
            .iter()
            .enumerate()
            .all(|(x, g)| sq.get(&(x, x)).cloned().unwrap_or_else(|| AlgElem::zero(target)) == curvature_at(target, g.idem));
        if curved && !sq.is_empty() {
            out.curvature = Curvature::Curved;
        }
    }
    out
}

/// Direct sum, renaming generators of `b` when names collide.
pub fn direct_sum_typed(a: &TypeD, b: &TypeD) -> Result<TypeD> {
    if a.variant != b.variant || a.curvature != b.curvature {
        return Err(Error::Variant("direct sum of incompatible structures".into()));
    }
    let mut out = a.clone();
    let off = a.len();
    for g in &b.gens {
        let mut g = g.clone();
        while out.index_of(&g.name).is_some() {
            g.name.push('\'');
        }
        out.gens.push(g);
    }
    for (&(f, t), e) in &b.arrows {
        out.arrows.insert((f + off, t + off), e.clone());
    }
    Ok(out)
}

/// The morphism complex `Mor(M, N)`: basis triples `(m, a, n)` with
/// `a = ι(m) a ι(n)`.
#[derive(Debug, Clone)]
pub struct MorComplex {
    pub basis: Vec<(usize, Basis, usize)>,
    pub index: BTreeMap<(usize, Basis, usize), usize>,
    pub d: F2Matrix,
}

pub fn mor_complex(m: &TypeD, n: &TypeD) -> Result<MorComplex> {
    if m.variant != n.variant {
        return Err(Error::Variant("morphism complex across variants".into()));
    }
    let v = m.variant;
    let mut elems = Vec::new();
    let mut index = BTreeMap::new();
    for (i, gm) in m.gens.iter().enumerate() {
        for b in basis(v) {
            if b.left_idem() != gm.idem {
                continue;
            }
            for (j, gn) in n.gens.iter().enumerate() {
                if b.right_idem() == gn.idem {
                    index.insert((i, b, j), elems.len());
                    elems.push((i, b, j));
                }
            }
        }
    }
    let mut d = F2Matrix::new(elems.len(), elems.len());
    let incoming = |mm: usize| m.arrows.iter().filter(move |(&(_, t), _)| t == mm).map(|(&(f, _), e)| (f, e));
    for (col, &(i, a, j)) in elems.iter().enumerate() {
        for (j2, e) in n.out(j) {
            for b in e.terms() {
                if let Some(p) = a.mul(b, v) {
                    d.toggle(index[&(i, p, j2)], col);
                }
            }
        }
        for (i2, e) in incoming(i) {
            for c in e.terms() {
                if let Some(p) = c.mul(a, v) {
                    d.toggle(index[&(i2, p, j)], col);
                }
            }
        }
    }
    Ok(MorComplex { basis: elems, index, d })
}

impl MorComplex {
    pub fn homology_rank(&self) -> usize {
        self.basis.len() - 2 * self.d.rank()
    }

    pub fn to_vector(&self, f: &DMorphism) -> Vec<bool> {
        let mut out = vec![false; self.basis.len()];
        for (&(i, j), e) in &f.entries {
            for b in e.terms() {
                if let Some(&k) = self.index.get(&(i, b, j)) {
                    out[k] ^= true;
                }
            }
        }
        out
    }

    pub fn from_vector(&self, variant: Variant, x: &[bool]) -> DMorphism {
        let mut f = DMorphism::zero(variant);
        for (k, &on) in x.iter().enumerate() {
            if on {
                let (i, b, j) = self.basis[k];
                f.toggle(i, j, b);
            }
        }
        f
    }

    pub fn is_cycle(&self, x: &[bool]) -> bool {
        self.d.mul_vec(x).expect("sized").iter().all(|b| !b)
    }

    pub fn is_boundary(&self, x: &[bool]) -> bool {
        crate::base_algebra::f2_solve(&self.d, x).expect("sized").is_some()
    }
}

/// A morphism of type D structures: `entries[(m, n)]` is the coefficient of
/// `n` in `f(m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DMorphism {
    pub variant: Variant,
    pub entries: BTreeMap<(usize, usize), AlgElem>,
}

impl DMorphism {
    pub fn zero(variant: Variant) -> Self {
        DMorphism { variant, entries: BTreeMap::new() }
    }

    pub fn identity(m: &TypeD) -> Self {
        let mut f = DMorphism::zero(m.variant);
        for (k, g) in m.gens.iter().enumerate() {
            f.toggle(k, k, Basis::Idem(g.idem));
        }
        f
    }

    pub fn toggle(&mut self, i: usize, j: usize, b: Basis) {
        let e = self.entries.entry((i, j)).or_insert_with(|| AlgElem::zero(self.variant));
        e.toggle(b);
        if e.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    /// `self ∘ first`.
    pub fn compose(&self, first: &DMorphism) -> DMorphism {
        let mut out = DMorphism::zero(self.variant);
        for (&(i, j), a) in &first.entries {
            for (&(j2, k), b) in self.entries.range((j, 0)..(j + 1, 0)) {
                debug_assert_eq!(j, j2);
                for t in alg_mul(a, b).expect("same variant").terms() {
                    out.toggle(i, k, t);
                }
            }
        }
        out
    }

    pub fn add(&self, o: &DMorphism) -> DMorphism {
        let mut out = self.clone();
        for (&(i, j), e) in &o.entries {
            for b in e.terms() {
                out.toggle(i, j, b);
            }
        }
        out
    }

    /// Idempotent part as an F2 matrix (rows index the target).
    pub fn idempotent_part(&self, rows: usize, cols: usize) -> F2Matrix {
        let mut out = F2Matrix::new(rows, cols);
        for (&(i, j), e) in &self.entries {
            if e.terms().any(|b| b.is_idem()) {
                out.toggle(j, i);
            }
        }
        out
    }
}

/// An isomorphism `M -> N` of reduced structures, found among the closed
/// morphisms whose idempotent part is invertible.
pub fn iso_typed(m: &TypeD, n: &TypeD) -> Result<Option<DMorphism>> {
    if m.variant != n.variant {
        return Err(Error::Variant("isomorphism across variants".into()));
    }
    if m.idem_count(0) != n.idem_count(0) || m.idem_count(1) != n.idem_count(1) {
        return Ok(None);
    }
    if m.is_empty() {
        return Ok(Some(DMorphism::zero(m.variant)));
    }
    let mc = mor_complex(m, n)?;
    let cycles = mc.d.nullspace();
    // Restricted to idempotent coordinates, any cycle with invertible
    // idempotent part is an isomorphism of reduced structures.
    let mut mats = Vec::with_capacity(cycles.len());
    for c in &cycles {
        let f = mc.from_vector(m.variant, c);
        mats.push(f.idempotent_part(n.len(), m.len()));
    }
    let size = m.len();
    let Some(mask) = find_invertible_combination(&mats, size) else { return Ok(None) };
    let mut x = vec![false; mc.basis.len()];
    for (k, c) in cycles.iter().enumerate() {
        if mask[k] {
            for (t, &b) in c.iter().enumerate() {
                x[t] ^= b;
            }
        }
    }
    Ok(Some(mc.from_vector(m.variant, &x)))
}

/// Coefficients of a combination of `mats` with full rank, searched
/// exhaustively for small families and by a seeded random walk otherwise.
pub(crate) fn find_invertible_combination(mats: &[F2Matrix], n: usize) -> Option<Vec<bool>> {
    let useful: Vec<usize> = (0..mats.len()).filter(|&k| mats[k].nnz() > 0).collect();
    let combine = |mask: &[bool]| {
        let mut out = F2Matrix::new(n, n);
        for (t, &k) in useful.iter().enumerate() {
            if mask[t] {
                for (i, j) in mats[k].entries() {
                    out.toggle(i, j);
                }
            }
        }
        out
    };
    let expand = |mask: &[bool]| {
        let mut full = vec![false; mats.len()];
        for (t, &k) in useful.iter().enumerate() {
            full[k] = mask[t];
        }
        full
    };
    let dim = useful.len();
    if dim <= 18 {
        for bits in 1u64..(1u64 << dim) {
            let mask: Vec<bool> = (0..dim).map(|t| bits >> t & 1 == 1).collect();
            if combine(&mask).rank() == n {
                return Some(expand(&mask));
            }
        }
        return None;
    }
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for _ in 0..50_000 {
        let mask: Vec<bool> = (0..dim).map(|_| next() & 1 == 1).collect();
        if combine(&mask).rank() == n {
            return Some(expand(&mask));
        }
    }
    None
}

/// A curved extension of a flat structure over the plain algebra, found by
/// solving for arrows labelled by chords through 0. Products of two such
/// chords vanish, so the curvature equation is linear in the unknowns.
pub fn extend_typed(m: &TypeD, budget: usize) -> Result<Option<TypeD>> {
    if m.variant != Variant::Plain || m.curvature != Curvature::Flat {
        return Err(Error::Variant("extension needs a flat structure over the plain algebra".into()));
    }
    let v = Variant::Extended;
    let zero_chords: Vec<Basis> = basis(v).into_iter().filter(|b| b.contains_zero()).collect();
    let mut unknowns: Vec<(usize, Basis, usize)> = Vec::new();
    for (x, gx) in m.gens.iter().enumerate() {
        for &b in &zero_chords {
            if b.left_idem() != gx.idem {
                continue;
            }
            for (y, gy) in m.gens.iter().enumerate() {
                if b.right_idem() == gy.idem {
                    unknowns.push((x, b, y));
                    if unknowns.len() > budget {
                        return Err(Error::ExtensionBudget);
                    }
                }
            }
        }
    }
    let known: Vec<(usize, Basis, usize)> = m.basis_arrows();
    let mut out_known: BTreeMap<usize, Vec<(Basis, usize)>> = BTreeMap::new();
    let mut in_known: BTreeMap<usize, Vec<(usize, Basis)>> = BTreeMap::new();
    for &(f, b, t) in &known {
        out_known.entry(f).or_default().push((b, t));
        in_known.entry(t).or_default().push((f, b));
    }
    let mut eqs: BTreeMap<(usize, Basis, usize), (BTreeSet<usize>, bool)> = BTreeMap::new();
    for (k, &(x, c, y)) in unknowns.iter().enumerate() {
        // X_{xy} K_{yz}
        for &(b, z) in out_known.get(&y).into_iter().flatten() {
            if let Some(p) = c.mul(b, v) {
                let e = eqs.entry((x, p, z)).or_default();
                if !e.0.remove(&k) {
                    e.0.insert(k);
                }
            }
        }
        // K_{wx} X_{xy}
        for &(w, b) in in_known.get(&x).into_iter().flatten() {
            if let Some(p) = b.mul(c, v) {
                let e = eqs.entry((w, p, y)).or_default();
                if !e.0.remove(&k) {
                    e.0.insert(k);
                }
            }
        }
    }
    for (x, g) in m.gens.iter().enumerate() {
        for u in curvature_at(v, g.idem).terms() {
            eqs.entry((x, u, x)).or_default().1 ^= true;
        }
    }
    let mut sys = LinearSystem::new(unknowns.len());
    for (vars, rhs) in eqs.into_values() {
        sys.push_sparse(vars, rhs);
    }
    let Some(sol) = sys.solve() else { return Ok(None) };
    let mut out = TypeD::new(v, Curvature::Curved);
    out.gens = m.gens.clone();
    out.header = m.header.clone();
    for (&k, e) in &m.arrows {
        out.arrows.insert(k, e.project(v));
    }
    for k in sol.ones() {
        let (x, c, y) = unknowns[k];
        out.toggle_arrow(x, y, c);
    }
    Ok(Some(out))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AGen {
    pub name: String,
    pub idem: Idem,
}

/// `m_{1+k}(input, seq) ∋ weight · output`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AOp {
    pub input: usize,
    pub seq: Vec<Basis>,
    pub output: usize,
    pub weight: RMonomial,
}

/// A type A structure with R-weighted operations, listed up to `bound`
/// inputs. `open` marks families that continue past the bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeA {
    pub variant: Variant,
    pub gens: Vec<AGen>,
    pub ops: Vec<AOp>,
    pub bound: usize,
    pub open: bool,
}

impl TypeA {
    /// Keep only operations whose weight survives `keep`.
    pub fn specialize(&self, keep: impl Fn(RMonomial) -> bool) -> TypeA {
        let mut out = self.clone();
        out.ops.retain(|op| keep(op.weight));
        out
    }

    fn ops_from(&self, input: usize) -> impl Iterator<Item = &AOp> + '_ {
        self.ops.iter().filter(move |op| op.input == input)
    }
}

/// Violations of the A∞ relations for sequences built from the listed
/// operations, skipping sequences longer than the bound.
pub fn validate_typea(a: &TypeA) -> Vec<String> {
    let mut out = Vec::new();
    let v = a.variant;
    let mut table: AOpTable = BTreeMap::new();
    for op in &a.ops {
        if op.seq.is_empty() || op.seq.iter().any(|b| b.is_idem() || !b.is_legal(v)) {
            out.push(format!("operation on {} has an illegal input", a.gens[op.input].name));
            continue;
        }
        let first = op.seq[0];
        let last = *op.seq.last().expect("nonempty");
        let chained = op.seq.windows(2).all(|w| w[0].right_idem() == w[1].left_idem());
        if first.left_idem() != a.gens[op.input].idem || last.right_idem() != a.gens[op.output].idem || !chained {
            out.push(format!("idempotent mismatch in an operation on {}", a.gens[op.input].name));
        }
        table.entry((op.input, op.seq.clone())).or_default().push((op.output, op.weight));
    }
    let apply = |x: usize, s: &[Basis]| -> Vec<(usize, RMonomial)> { table.get(&(x, s.to_vec())).cloned().unwrap_or_default() };
    // Candidate sequences: concatenations of two operation inputs, and
    // operation inputs with one factor split.
    let mut candidates: BTreeSet<(usize, Vec<Basis>)> = BTreeSet::new();
    for op1 in &a.ops {
        for op2 in a.ops_from(op1.output) {
            let mut s = op1.seq.clone();
            s.extend(&op2.seq);
            if s.len() <= a.bound {
                candidates.insert((op1.input, s));
            }
        }
        for (k, &b) in op1.seq.iter().enumerate() {
            for l in basis(v) {
                for r in basis(v) {
                    if l.is_idem() || r.is_idem() || l.mul(r, v) != Some(b) {
                        continue;
                    }
                    let mut s = op1.seq[..k].to_vec();
                    s.push(l);
                    s.push(r);
                    s.extend(&op1.seq[k + 1..]);
                    if s.len() <= a.bound {
                        candidates.insert((op1.input, s));
                    }
                }
            }
        }
    }
    for (x, s) in candidates {
        let mut acc: BTreeMap<usize, RElem> = BTreeMap::new();
        let mut add = |y: usize, w: RMonomial| {
            acc.entry(y).or_default().add_monomial(w);
        };
        for i in 1..s.len() {
            for (y, w1) in apply(x, &s[..i]) {
                for (z, w2) in apply(y, &s[i..]) {
                    if let Some(w) = w1.mul(w2) {
                        add(z, w);
                    }
                }
            }
        }
        for j in 0..s.len() - 1 {
            if let Some(p) = s[j].mul(s[j + 1], v) {
                let mut t = s[..j].to_vec();
                t.push(p);
                t.extend(&s[j + 2..]);
                for (z, w) in apply(x, &t) {
                    add(z, w);
                }
            }
        }
        for (z, e) in acc {
            if !e.is_zero() {
                let seq: Vec<String> = s.iter().map(|b| b.to_string()).collect();
                out.push(format!(
                    "A-infinity relation fails on ({}, {}): {e} {}",
                    a.gens[x].name,
                    seq.join(", "),
                    a.gens[z].name
                ));
            }
        }
    }
    out
}

/// `A ⊠ D`: generators are idempotent-compatible pairs, the differential
/// feeds chains of δ¹ into the operations of `A`.
pub fn box_ad(a: &TypeA, d: &TypeD) -> Result<CfkComplex> {
    if a.variant != d.variant {
        return Err(Error::Variant(format!("box of {} module with {} structure", a.variant, d.variant)));
    }
    let mut pairs = Vec::new();
    for (i, ga) in a.gens.iter().enumerate() {
        for (x, gx) in d.gens.iter().enumerate() {
            if ga.idem == gx.idem {
                pairs.push((i, x));
            }
        }
    }
    let pos: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut prefixes: HashSet<(usize, Vec<Basis>)> = HashSet::new();
    let mut full: AOpTable = BTreeMap::new();
    for op in &a.ops {
        for k in 1..=op.seq.len() {
            prefixes.insert((op.input, op.seq[..k].to_vec()));
        }
        full.entry((op.input, op.seq.clone())).or_default().push((op.output, op.weight));
    }
    let adj: Vec<Vec<(Basis, usize)>> = (0..d.len())
        .map(|x| d.out(x).flat_map(|(t, e)| e.terms().map(move |b| (b, t))).collect())
        .collect();
    let mut mat = RMatrix::zero(pairs.len(), pairs.len());
    for (col, &(i, x)) in pairs.iter().enumerate() {
        let mut stack: Vec<(usize, Vec<Basis>)> = vec![(x, Vec::new())];
        while let Some((y, seq)) = stack.pop() {
            if !seq.is_empty() {
                if let Some(outs) = full.get(&(i, seq.clone())) {
                    for &(j, w) in outs {
                        let row = pos[&(j, y)];
                        mat.add_monomial_at(row, col, w);
                    }
                }
            }
            if a.open && seq.len() >= a.bound {
                return Err(Error::BoxDidNotTerminate);
            }
            for &(b, z) in &adj[y] {
                let mut s = seq.clone();
                s.push(b);
                if prefixes.contains(&(i, s.clone())) {
                    stack.push((z, s));
                }
            }
        }
    }
    let single = a.gens.len() == 1;
    let names = pairs
        .iter()
        .map(|&(i, x)| if single { d.gens[x].name.clone() } else { format!("{}.{}", a.gens[i].name, d.gens[x].name) })
        .collect();
    let gradings = pairs.iter().map(|&(_, x)| d.gens[x].grading.unwrap_or_default()).collect();
    Ok(CfkComplex::new(names, gradings, mat))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DaGen {
    pub name: String,
    /// Idempotent on the output (type D) side.
    pub left: Idem,
    /// Idempotent on the input (type A) side.
    pub right: Idem,
}

/// `δ¹_{1+k}(gen, inputs) ∋ output ⊗ target`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DaOp {
    pub gen: usize,
    pub inputs: Vec<Basis>,
    pub output: Basis,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDA {
    pub left: Variant,
    pub right: Variant,
    pub gens: Vec<DaGen>,
    pub ops: BTreeSet<DaOp>,
    pub bound: usize,
    pub header: Vec<String>,
}

impl TypeDA {
    pub fn new(left: Variant, right: Variant) -> Self {
        TypeDA { left, right, gens: Vec::new(), ops: BTreeSet::new(), bound: DEFAULT_OP_BOUND, header: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.gens.iter().position(|g| g.name == name)
    }

    pub fn toggle_op(&mut self, op: DaOp) {
        if !self.ops.remove(&op) {
            self.ops.insert(op);
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = TypeDA::new(Variant::Plain, Variant::Plain);
        let mut in_header = true;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            if in_header && raw.starts_with('#') {
                m.header.push(raw.to_string());
                continue;
            }
            in_header = false;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let variant = |t: &str| t.parse::<Variant>().map_err(|e| Error::parse(line_no, col_of(raw, t), e));
            match toks[0] {
                "left" if toks.len() == 2 => m.left = variant(toks[1])?,
                "right" if toks.len() == 2 => m.right = variant(toks[1])?,
                "bound" if toks.len() == 2 => {
                    m.bound = toks[1].parse().map_err(|_| Error::parse(line_no, col_of(raw, toks[1]), "bad bound"))?;
                }
                "gen" if toks.len() == 4 => {
                    let l = parse_idem(toks[2]).ok_or_else(|| Error::parse(line_no, col_of(raw, toks[2]), "expected i0 or i1"))?;
                    let r = parse_idem(toks[3]).ok_or_else(|| Error::parse(line_no, col_of(raw, toks[3]), "expected i0 or i1"))?;
                    if m.index_of(toks[1]).is_some() {
                        return Err(Error::parse(line_no, col_of(raw, toks[1]), "duplicate generator"));
                    }
                    m.gens.push(DaGen { name: toks[1].to_string(), left: l, right: r });
                }
                "op" => {
                    let parts: Vec<&str> = line["op".len()..].split('|').map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(Error::parse(line_no, 1, "expected `op <gen> | <inputs> | <output> <target>`"));
                    }
                    let gen = m.index_of(parts[0]).ok_or_else(|| Error::parse(line_no, col_of(raw, parts[0]), "unknown generator"))?;
                    let mut inputs = Vec::new();
                    for t in parts[1].split_whitespace() {
                        let b: Basis = t.parse().map_err(|e: String| Error::parse(line_no, col_of(raw, t), e))?;
                        if !b.is_legal(m.right) {
                            return Err(Error::parse(line_no, col_of(raw, t), format!("{b} is not in the {} algebra", m.right)));
                        }
                        inputs.push(b);
                    }
                    let outs: Vec<&str> = parts[2].split_whitespace().collect();
                    if outs.len() != 2 {
                        return Err(Error::parse(line_no, 1, "expected `<output> <target>` after the second `|`"));
                    }
                    let target = m.index_of(outs[1]).ok_or_else(|| Error::parse(line_no, col_of(raw, outs[1]), "unknown generator"))?;
                    let a = parse_alg_elem(outs[0], m.left).map_err(|e| Error::parse(line_no, col_of(raw, outs[0]), e))?;
                    for output in a.terms() {
                        m.toggle_op(DaOp { gen, inputs: inputs.clone(), output, target });
                    }
                }
                other => return Err(Error::parse(line_no, col_of(raw, other), format!("malformed line `{line}`"))),
            }
        }
        Ok(m)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str(h);
            out.push('\n');
        }
        let _ = writeln!(out, "left {}", self.left);
        let _ = writeln!(out, "right {}", self.right);
        let _ = writeln!(out, "bound {}", self.bound);
        for g in &self.gens {
            let _ = writeln!(out, "gen {} {} {}", g.name, idem_name(g.left), idem_name(g.right));
        }
        for op in &self.ops {
            let ins: Vec<String> = op.inputs.iter().map(|b| b.to_string()).collect();
            let ins = if ins.is_empty() { String::new() } else { format!(" {} ", ins.join(" ")) };
            let _ = writeln!(out, "op {} |{}| {} {}", self.gens[op.gen].name, if ins.is_empty() { " " } else { &ins }, op.output, self.gens[op.target].name);
        }
        out
    }
}

/// Idempotent and legality violations of a DA structure, plus failures of
/// the structure relations on sequences assembled from the listed ops.
pub fn validate_typeda(b: &TypeDA) -> Vec<String> {
    let mut out = Vec::new();
    for op in &b.ops {
        let g = &b.gens[op.gen];
        let t = &b.gens[op.target];
        let chained = op.inputs.windows(2).all(|w| w[0].right_idem() == w[1].left_idem());
        let right_ok = match (op.inputs.first(), op.inputs.last()) {
            (Some(f), Some(l)) => f.left_idem() == g.right && l.right_idem() == t.right,
            _ => g.right == t.right,
        };
        if !chained || !right_ok || op.output.left_idem() != g.left || op.output.right_idem() != t.left {
            out.push(format!("idempotent mismatch in an operation {} -> {}", g.name, t.name));
        }
        if !op.output.is_legal(b.left) || op.inputs.iter().any(|x| !x.is_legal(b.right) || x.is_idem()) {
            out.push(format!("illegal algebra element in an operation {} -> {}", g.name, t.name));
        }
    }
    if !out.is_empty() {
        return out;
    }
    let mut table: DaOpTable = BTreeMap::new();
    for op in &b.ops {
        table.entry((op.gen, op.inputs.clone())).or_default().push((op.output, op.target));
    }
    let apply = |x: usize, s: &[Basis]| table.get(&(x, s.to_vec())).cloned().unwrap_or_default();
    let curved = b.left != Variant::Plain && b.right != Variant::Plain;
    let mut candidates: BTreeSet<(usize, Vec<Basis>)> = BTreeSet::new();
    for op1 in &b.ops {
        candidates.insert((op1.gen, op1.inputs.clone()));
        for op2 in b.ops.iter().filter(|o| o.gen == op1.target) {
            let mut s = op1.inputs.clone();
            s.extend(&op2.inputs);
            if s.len() <= b.bound {
                candidates.insert((op1.gen, s));
            }
        }
        for k in 0..op1.inputs.len() {
            for l in basis(b.right) {
                for r in basis(b.right) {
                    if l.is_idem() || r.is_idem() || l.mul(r, b.right) != Some(op1.inputs[k]) {
                        continue;
                    }
                    let mut s = op1.inputs[..k].to_vec();
                    s.push(l);
                    s.push(r);
                    s.extend(&op1.inputs[k + 1..]);
                    candidates.insert((op1.gen, s));
                }
            }
            if curved && op1.inputs[k].len() == 4 {
                let mut s = op1.inputs.clone();
                s.remove(k);
                candidates.insert((op1.gen, s));
            }
        }
    }
    for (x, s) in candidates {
        let mut acc: BTreeMap<(Basis, usize), bool> = BTreeMap::new();
        let mut add = |c: Basis, z: usize| {
            *acc.entry((c, z)).or_default() ^= true;
        };
        for i in 0..=s.len() {
            for (c1, y) in apply(x, &s[..i]) {
                for (c2, z) in apply(y, &s[i..]) {
                    if let Some(p) = c1.mul(c2, b.left) {
                        add(p, z);
                    }
                }
            }
        }
        for j in 0..s.len().saturating_sub(1) {
            if let Some(p) = s[j].mul(s[j + 1], b.right) {
                let mut t = s[..j].to_vec();
                t.push(p);
                t.extend(&s[j + 2..]);
                for (c, z) in apply(x, &t) {
                    add(c, z);
                }
            }
        }
        if curved {
            for i in 0..=s.len() {
                let idem = if i == 0 { b.gens[x].right } else { s[i - 1].right_idem() };
                for u in curvature_at(b.right, idem).terms() {
                    let mut t = s[..i].to_vec();
                    t.push(u);
                    t.extend(&s[i..]);
                    for (c, z) in apply(x, &t) {
                        add(c, z);
                    }
                }
            }
            if s.is_empty() {
                for u in curvature_at(b.left, b.gens[x].left).terms() {
                    add(u, x);
                }
            }
        }
        for ((c, z), on) in acc {
            if on {
                let seq: Vec<String> = s.iter().map(|q| q.to_string()).collect();
                out.push(format!("DA relation fails on ({}; {}): {c} {}", b.gens[x].name, seq.join(", "), b.gens[z].name));
            }
        }
    }
    out
}

/// The identity DA bimodule over a variant.
pub fn builtin_identity_da(v: Variant) -> TypeDA {
    let mut m = TypeDA::new(v, v);
    m.gens.push(DaGen { name: "id0".into(), left: 0, right: 0 });
    m.gens.push(DaGen { name: "id1".into(), left: 1, right: 1 });
    for b in basis(v) {
        if b.is_idem() {
            continue;
        }
        m.ops.insert(DaOp { gen: b.left_idem() as usize, inputs: vec![b], output: b, target: b.right_idem() as usize });
    }
    m
}

/// `B ⊠ D` for a DA bimodule and a type D structure.
pub fn box_da_d(b: &TypeDA, d: &TypeD) -> Result<TypeD> {
    if b.right != d.variant {
        return Err(Error::Variant(format!("box of a DA bimodule over {} with a structure over {}", b.right, d.variant)));
    }
    let mut pairs = Vec::new();
    for (i, g) in b.gens.iter().enumerate() {
        for (x, gx) in d.gens.iter().enumerate() {
            if g.right == gx.idem {
                pairs.push((i, x));
            }
        }
    }
    let pos: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let mut prefixes: HashSet<(usize, Vec<Basis>)> = HashSet::new();
    let mut full: DaOpTable = BTreeMap::new();
    for op in &b.ops {
        for k in 0..=op.inputs.len() {
            prefixes.insert((op.gen, op.inputs[..k].to_vec()));
        }
        full.entry((op.gen, op.inputs.clone())).or_default().push((op.output, op.target));
    }
    let adj: Vec<Vec<(Basis, usize)>> = (0..d.len())
        .map(|x| d.out(x).flat_map(|(t, e)| e.terms().map(move |q| (q, t))).collect())
        .collect();
    let curvature = if b.left == Variant::Plain { Curvature::Flat } else { d.curvature };
    let mut out = TypeD::new(b.left, curvature);
    for &(i, x) in &pairs {
        out.add_gen(format!("{}.{}", b.gens[i].name, d.gens[x].name), b.gens[i].left, d.gens[x].grading);
    }
    for (col, &(i, x)) in pairs.iter().enumerate() {
        // Idempotent arrows of D pass through the unit operation.
        for &(_, z) in adj[x].iter().filter(|(q, _)| q.is_idem()) {
            out.toggle_arrow(col, pos[&(i, z)], Basis::Idem(b.gens[i].left));
        }
        let mut stack: Vec<(usize, Vec<Basis>)> = vec![(x, Vec::new())];
        while let Some((y, seq)) = stack.pop() {
            if let Some(outs) = full.get(&(i, seq.clone())) {
                for &(c, j) in outs {
                    out.toggle_arrow(col, pos[&(j, y)], c);
                }
            }
            if seq.len() > b.bound {
                return Err(Error::BoxDidNotTerminate);
            }
            for &(q, z) in &adj[y] {
                let mut s = seq.clone();
                s.push(q);
                if prefixes.contains(&(i, s.clone())) {
                    stack.push((z, s));
                }
            }
        }
    }
    Ok(out)
}
