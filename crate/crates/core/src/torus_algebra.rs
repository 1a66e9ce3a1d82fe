//! The torus algebra, its extension with ρ₀, and the quotient killing ρ₃₀.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which of the three algebras an element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// The unextended torus algebra (chords avoid 0).
    Plain,
    /// The extended algebra with all sixteen chords.
    Extended,
    /// The extended algebra modulo ρ₃₀.
    Truncated,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Plain => "plain",
            Variant::Extended => "extended",
            Variant::Truncated => "truncated",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(Variant::Plain),
            "extended" => Ok(Variant::Extended),
            "truncated" => Ok(Variant::Truncated),
            _ => Err(format!("unknown algebra variant `{s}`")),
        }
    }
}

/// Idempotent index: 0 for ι₀, 1 for ι₁.
pub type Idem = u8;

/// Idempotent at the corner between chord letters: odd positions are ι₀.
pub fn idem_at(pos: u8) -> Idem {
    if pos % 2 == 1 {
        0
    } else {
        1
    }
}

/// A basis element: an idempotent or a chord `(start, len)` covering
/// letters `start, start+1, ..., start+len-1` mod 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    Idem(Idem),
    Chord { start: u8, len: u8 },
}

impl Basis {
    pub fn chord(start: u8, len: u8) -> Self {
        assert!((1..=4).contains(&len), "chord length out of range");
        Basis::Chord { start: start % 4, len }
    }

    /// Chord from its letters, e.g. `&[2, 3, 0]` for ρ₂₃₀.
    pub fn from_letters(letters: &[u8]) -> Option<Self> {
        let (&first, rest) = letters.split_first()?;
        if letters.len() > 4 || first > 3 {
            return None;
        }
        let mut prev = first;
        for &l in rest {
            if l != (prev + 1) % 4 {
                return None;
            }
            prev = l;
        }
        Some(Basis::chord(first, letters.len() as u8))
    }

    pub fn letters(self) -> Vec<u8> {
        match self {
            Basis::Idem(_) => Vec::new(),
            Basis::Chord { start, len } => (0..len).map(|k| (start + k) % 4).collect(),
        }
    }

    pub fn left_idem(self) -> Idem {
        match self {
            Basis::Idem(i) => i,
            Basis::Chord { start, .. } => idem_at(start),
        }
    }

    pub fn right_idem(self) -> Idem {
        match self {
            Basis::Idem(i) => i,
            Basis::Chord { start, len } => idem_at((start + len) % 4),
        }
    }

    pub fn is_idem(self) -> bool {
        matches!(self, Basis::Idem(_))
    }

    pub fn contains_zero(self) -> bool {
        self.letters().contains(&0)
    }

    /// Whether the chord contains the consecutive letters 3, 0.
    pub fn contains_30(self) -> bool {
        self.letters().windows(2).any(|w| w == [3, 0])
    }

    pub fn is_legal(self, v: Variant) -> bool {
        match v {
            Variant::Plain => !self.contains_zero(),
            Variant::Extended => true,
            Variant::Truncated => !self.contains_30(),
        }
    }

    /// Product of basis elements in the given variant.
    pub fn mul(self, other: Basis, v: Variant) -> Option<Basis> {
        let out = match (self, other) {
            (Basis::Idem(i), b) => (b.left_idem() == i).then_some(b),
            (a, Basis::Idem(j)) => (a.right_idem() == j).then_some(a),
            (Basis::Chord { start: s1, len: l1 }, Basis::Chord { start: s2, len: l2 }) => {
                ((s1 + l1) % 4 == s2 && l1 + l2 <= 4).then(|| Basis::chord(s1, l1 + l2))
            }
        }?;
        out.is_legal(v).then_some(out)
    }

    /// The chord length (0 for idempotents).
    pub fn len(self) -> u8 {
        match self {
            Basis::Idem(_) => 0,
            Basis::Chord { len, .. } => len,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Idem(i) => write!(f, "i{i}"),
            b => {
                write!(f, "rho_")?;
                for l in b.letters() {
                    write!(f, "{l}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Basis {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "i0" => return Ok(Basis::Idem(0)),
            "i1" => return Ok(Basis::Idem(1)),
            _ => {}
        }
        let digits = s
            .strip_prefix("rho_")
            .ok_or_else(|| format!("bad algebra element `{s}`"))?;
        let letters: Option<Vec<u8>> = digits
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect();
        letters
            .and_then(|l| Basis::from_letters(&l))
            .ok_or_else(|| format!("bad chord `{s}`"))
    }
}

/// The full basis of a variant in canonical order: idempotents, then chords
/// by start and length.
pub fn basis(v: Variant) -> Vec<Basis> {
    let mut out = vec![Basis::Idem(0), Basis::Idem(1)];
    for start in 0..4 {
        for len in 1..=4 {
            let b = Basis::chord(start, len);
            if b.is_legal(v) {
                out.push(b);
            }
        }
    }
    out
}

/// An F2-linear combination of basis elements of one variant.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlgElem {
    pub variant: Variant,
    terms: BTreeSet<Basis>,
}

impl AlgElem {
    pub fn zero(variant: Variant) -> Self {
        AlgElem { variant, terms: BTreeSet::new() }
    }

    pub fn basis(variant: Variant, b: Basis) -> Result<Self> {
        if !b.is_legal(variant) {
            return Err(Error::Variant(format!("{b} is not in the {variant} algebra")));
        }
        Ok(AlgElem { variant, terms: BTreeSet::from([b]) })
    }

    pub fn from_terms(variant: Variant, terms: impl IntoIterator<Item = Basis>) -> Result<Self> {
        let mut out = AlgElem::zero(variant);
        for b in terms {
            if !b.is_legal(variant) {
                return Err(Error::Variant(format!("{b} is not in the {variant} algebra")));
            }
            out.toggle(b);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Basis> + '_ {
        self.terms.iter().copied()
    }

    pub fn contains(&self, b: Basis) -> bool {
        self.terms.contains(&b)
    }

    pub fn toggle(&mut self, b: Basis) {
        if !self.terms.remove(&b) {
            self.terms.insert(b);
        }
    }

    pub fn add(&self, o: &AlgElem) -> Result<AlgElem> {
        check_same(self.variant, o.variant)?;
        let mut out = self.clone();
        for b in o.terms() {
            out.toggle(b);
        }
        Ok(out)
    }

    /// Reinterpret in another variant, dropping terms that are not legal there.
    pub fn project(&self, v: Variant) -> AlgElem {
        AlgElem { variant: v, terms: self.terms().filter(|b| b.is_legal(v)).collect() }
    }
}

fn check_same(a: Variant, b: Variant) -> Result<()> {
    if a != b {
        return Err(Error::Variant(format!("{a} against {b}")));
    }
    Ok(())
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Parse a `+`-joined list of basis names in the given variant.
pub fn parse_alg_elem(s: &str, v: Variant) -> std::result::Result<AlgElem, String> {
    let mut terms = Vec::new();
    for part in s.split('+') {
        terms.push(part.parse::<Basis>()?);
    }
    let mut seen = BTreeSet::new();
    for t in &terms {
        if !seen.insert(*t) {
            return Err(format!("repeated term {t} in `{s}`"));
        }
    }
    AlgElem::from_terms(v, terms).map_err(|e| e.to_string())
}

/// Product in the common variant of `a` and `b`.
pub fn alg_mul(a: &AlgElem, b: &AlgElem) -> Result<AlgElem> {
    check_same(a.variant, b.variant)?;
    let mut out = AlgElem::zero(a.variant);
    for x in a.terms() {
        for y in b.terms() {
            if let Some(p) = x.mul(y, a.variant) {
                out.toggle(p);
            }
        }
    }
    Ok(out)
}

/// The central element 𝕌 (sum of the four length-4 chords that survive).
pub fn central_element(v: Variant) -> Result<AlgElem> {
    if v == Variant::Plain {
        return Err(Error::Variant("the plain torus algebra has no curvature element".into()));
    }
    let terms = (0..4).map(|s| Basis::chord(s, 4)).filter(|b| b.is_legal(v));
    AlgElem::from_terms(v, terms)
}

#[cfg(test)]
mod test {
    use super::*;

    fn el(v: Variant, s: &str) -> AlgElem {
        parse_alg_elem(s, v).unwrap()
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(basis(Variant::Plain).len(), 8);
        assert_eq!(basis(Variant::Extended).len(), 18);
        assert_eq!(basis(Variant::Truncated).len(), 12);
        let names: Vec<String> = basis(Variant::Plain).iter().map(|b| b.to_string()).collect();
        assert_eq!(names, ["i0", "i1", "rho_1", "rho_12", "rho_123", "rho_2", "rho_23", "rho_3"]);
    }

    #[test]
    fn products() {
        let p = Variant::Plain;
        assert_eq!(alg_mul(&el(p, "rho_1"), &el(p, "rho_2")).unwrap(), el(p, "rho_12"));
        assert!(alg_mul(&el(p, "rho_2"), &el(p, "rho_1")).unwrap().is_zero());
        assert!(alg_mul(&el(p, "rho_3"), &el(p, "rho_2")).unwrap().is_zero());
        let e = Variant::Extended;
        assert_eq!(alg_mul(&el(e, "rho_3"), &el(e, "rho_0")).unwrap(), el(e, "rho_30"));
        let t = Variant::Truncated;
        assert!(alg_mul(&el(t, "rho_3"), &el(t, "rho_0")).unwrap().is_zero());
        assert!(alg_mul(&el(p, "rho_1"), &el(e, "rho_2")).is_err());
    }

    #[test]
    fn idempotents() {
        let r1 = Basis::chord(1, 1);
        assert_eq!((r1.left_idem(), r1.right_idem()), (0, 1));
        let r0 = Basis::chord(0, 1);
        assert_eq!((r0.left_idem(), r0.right_idem()), (1, 0));
        assert_eq!(Basis::Idem(0).mul(r1, Variant::Plain), Some(r1));
        assert_eq!(Basis::Idem(1).mul(r1, Variant::Plain), None);
    }

    #[test]
    fn central_elements() {
        assert_eq!(
            central_element(Variant::Extended).unwrap(),
            el(Variant::Extended, "rho_0123+rho_1230+rho_2301+rho_3012")
        );
        assert_eq!(central_element(Variant::Truncated).unwrap(), el(Variant::Truncated, "rho_0123"));
        assert!(central_element(Variant::Plain).is_err());
    }

    #[test]
    fn associativity_exhaustive() {
        for v in [Variant::Plain, Variant::Extended, Variant::Truncated] {
            let bs = basis(v);
            for &a in &bs {
                for &b in &bs {
                    if let Some(ab) = a.mul(b, v) {
                        assert_eq!(a.right_idem(), b.left_idem());
                        assert_eq!(ab.left_idem(), a.left_idem());
                        assert_eq!(ab.right_idem(), b.right_idem());
                    }
                    for &c in &bs {
                        let l = a.mul(b, v).and_then(|ab| ab.mul(c, v));
                        let r = b.mul(c, v).and_then(|bc| a.mul(bc, v));
                        assert_eq!(l, r, "{a} {b} {c} in {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn central_element_is_central_and_squares_to_zero() {
        for v in [Variant::Extended, Variant::Truncated] {
            let u = central_element(v).unwrap();
            for b in basis(v) {
                let x = AlgElem::basis(v, b).unwrap();
                assert_eq!(alg_mul(&u, &x).unwrap(), alg_mul(&x, &u).unwrap(), "{b}");
            }
            assert!(alg_mul(&u, &u).unwrap().is_zero());
        }
    }

    #[test]
    fn text_roundtrip() {
        for b in basis(Variant::Extended) {
            assert_eq!(b.to_string().parse::<Basis>().unwrap(), b);
        }
        assert!("rho_13".parse::<Basis>().is_err());
        assert!("rho_01234".parse::<Basis>().is_err());
        assert!(parse_alg_elem("rho_30", Variant::Truncated).is_err());
        assert!(parse_alg_elem("rho_1+rho_1", Variant::Plain).is_err());
    }
}
