//! Immersed multicurves in the marked torus, stored as cyclic crossing words
//! in the infinite cylinder cover, together with their type D structures,
//! gradings and the cabling transform.
//!
//! A word lists the crossings of a curve in order: `R`/`L` cross the vertical
//! axis rightwards/leftwards (ι₀ generators), `U`/`D` cross a horizontal line
//! upwards/downwards (ι₁ generators). Words are stored 0-framed; the framing
//! of the type D structure is applied on conversion.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::{self, Write as _};

use crate::base_algebra::{Bigrading, RMatrix, RMonomial};
use crate::bordered::{box_da_d, extend_typed, reduce_typed, truncate, Curvature, TypeD, TypeDA};
use crate::cfk::{simplify_one_variable, CfkComplex};
use crate::error::{Error, Result};
use crate::torus_algebra::{Basis, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    R,
    L,
    U,
    D,
}

impl Letter {
    pub fn inverse(self) -> Letter {
        match self {
            Letter::R => Letter::L,
            Letter::L => Letter::R,
            Letter::U => Letter::D,
            Letter::D => Letter::U,
        }
    }

    /// Crossings of the vertical axis carry idempotent ι₀.
    pub fn is_axis(self) -> bool {
        matches!(self, Letter::R | Letter::L)
    }

    // Square edges: top 0, right 1, bottom 2, left 3.
    fn entry_edge(self) -> u8 {
        match self {
            Letter::L => 1,
            Letter::R => 3,
            Letter::U => 2,
            Letter::D => 0,
        }
    }

    fn exit_edge(self) -> u8 {
        match self {
            Letter::L => 3,
            Letter::R => 1,
            Letter::U => 0,
            Letter::D => 2,
        }
    }

    fn with_entry_edge(e: u8) -> Letter {
        match e {
            1 => Letter::L,
            3 => Letter::R,
            2 => Letter::U,
            _ => Letter::D,
        }
    }

    fn quarter_turns(self) -> i64 {
        match self {
            Letter::R => 0,
            Letter::U => 1,
            Letter::L => 2,
            Letter::D => 3,
        }
    }

    fn vertical(self) -> i64 {
        match self {
            Letter::U => 1,
            Letter::D => -1,
            _ => 0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::R => 'R',
            Letter::L => 'L',
            Letter::U => 'U',
            Letter::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'R' => Some(Letter::R),
            'L' => Some(Letter::L),
            'U' => Some(Letter::U),
            'D' => Some(Letter::D),
            _ => None,
        }
    }
}

/// Signed turn between consecutive letters, in quarter turns.
fn turn(a: Letter, b: Letter) -> i64 {
    match (b.quarter_turns() - a.quarter_turns()).rem_euclid(4) {
        0 => 0,
        1 => 1,
        3 => -1,
        _ => 2,
    }
}

/// A grading arrow: axis crossing `crossing` of this component has
/// `grU = grU(base crossing of component 0) + du`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Turn {
    pub crossing: usize,
    pub base: usize,
    pub du: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub word: Vec<Letter>,
    /// Row before the first letter. Row `r` is the band between the marked
    /// points at heights `r` and `r + 1`.
    pub height: i64,
    /// Names of the axis crossings in order; empty means automatic names.
    pub labels: Vec<String>,
    pub turns: Vec<Turn>,
}

impl Component {
    pub fn new(word: Vec<Letter>, height: i64) -> Self {
        Component { word, height, labels: Vec::new(), turns: Vec::new() }
    }

    pub fn axis_positions(&self) -> Vec<usize> {
        (0..self.word.len()).filter(|&k| self.word[k].is_axis()).collect()
    }

    pub fn crossing_count(&self) -> usize {
        self.word.iter().filter(|l| l.is_axis()).count()
    }

    /// Row before each letter.
    pub fn rows(&self) -> Vec<i64> {
        let mut r = self.height;
        self.word
            .iter()
            .map(|l| {
                let before = r;
                r += l.vertical();
                before
            })
            .collect()
    }

    /// Rows of the axis crossings.
    pub fn crossing_rows(&self) -> Vec<i64> {
        let rows = self.rows();
        self.axis_positions().into_iter().map(|k| rows[k]).collect()
    }

    /// `#L - #R`: ±1 for the essential component, 0 for closed ones.
    pub fn net_horizontal(&self) -> i64 {
        self.word
            .iter()
            .map(|l| match l {
                Letter::L => 1,
                Letter::R => -1,
                _ => 0,
            })
            .sum()
    }

    pub fn net_vertical(&self) -> i64 {
        self.word.iter().map(|l| l.vertical()).sum()
    }

    pub fn crossing_letters(&self) -> Vec<Letter> {
        self.word.iter().copied().filter(|l| l.is_axis()).collect()
    }

    /// Name of axis crossing `k` of component `comp`.
    pub fn name(&self, comp: usize, k: usize) -> String {
        self.labels.get(k).cloned().unwrap_or_else(|| format!("g{comp}_{k}"))
    }

    /// The same curve traversed backwards.
    pub fn reversed(&self) -> Component {
        let n = self.word.len();
        let k = self.crossing_count();
        let word: Vec<Letter> = self.word.iter().rev().map(|l| l.inverse()).collect();
        let mut labels = self.labels.clone();
        labels.reverse();
        let turns = self
            .turns
            .iter()
            .map(|t| Turn { crossing: k - 1 - t.crossing, ..*t })
            .collect();
        let height = if n == 0 { self.height } else { self.height + self.net_vertical() };
        Component { word, height, labels, turns }
    }

    /// Rotate so that axis crossing `k` comes first.
    pub fn rotated_to_crossing(&self, k: usize) -> Component {
        let pos = self.axis_positions();
        let nk = pos.len();
        if nk == 0 {
            return self.clone();
        }
        let start = pos[k];
        let rows = self.rows();
        let mut word = self.word.clone();
        word.rotate_left(start);
        let mut labels = self.labels.clone();
        if !labels.is_empty() {
            labels.rotate_left(k);
        }
        let turns = self
            .turns
            .iter()
            .map(|t| Turn { crossing: (t.crossing + nk - k) % nk, ..*t })
            .collect();
        Component { word, height: rows[start], labels, turns }
    }

    /// Apply the framing twist `L -> L U^n`, `R -> D^n R` (without
    /// tightening).
    pub fn twisted(&self, n: i64) -> Component {
        let up = if n >= 0 { Letter::U } else { Letter::D };
        let down = up.inverse();
        let reps = n.unsigned_abs() as usize;
        let mut word = Vec::with_capacity(self.word.len());
        for &l in &self.word {
            match l {
                Letter::L => {
                    word.push(l);
                    word.extend(std::iter::repeat_n(up, reps));
                }
                Letter::R => {
                    word.extend(std::iter::repeat_n(down, reps));
                    word.push(l);
                }
                _ => word.push(l),
            }
        }
        Component { word, ..self.clone() }
    }

    /// Cyclic free reduction. Returns the reduced component and, for every
    /// old axis crossing, its new index if it survives.
    pub fn tightened(&self) -> (Component, Vec<Option<usize>>) {
        let rows = self.rows();
        let mut k = 0;
        let items: Vec<(Letter, i64, Option<usize>)> = self
            .word
            .iter()
            .zip(&rows)
            .map(|(&l, &r)| {
                let tag = l.is_axis().then(|| {
                    k += 1;
                    k - 1
                });
                (l, r, tag)
            })
            .collect();
        let red = free_reduce(items, |it| it.0);
        let mut map = vec![None; self.crossing_count()];
        let mut labels = Vec::new();
        let mut next = 0;
        for it in &red {
            if let Some(old) = it.2 {
                map[old] = Some(next);
                next += 1;
                if let Some(l) = self.labels.get(old) {
                    labels.push(l.clone());
                }
            }
        }
        let turns = self
            .turns
            .iter()
            .filter_map(|t| map[t.crossing].map(|c| Turn { crossing: c, ..*t }))
            .collect();
        let height = red.first().map_or(self.height, |it| it.1);
        let word = red.iter().map(|it| it.0).collect();
        (Component { word, height, labels, turns }, map)
    }

    fn is_tight(&self) -> bool {
        let n = self.word.len();
        (0..n).all(|k| n < 2 || self.word[(k + 1) % n] != self.word[k].inverse())
    }
}

/// Cyclic free reduction of a sequence of tagged letters.
fn free_reduce<T: Clone>(items: Vec<T>, letter: impl Fn(&T) -> Letter) -> Vec<T> {
    let mut stack: Vec<T> = Vec::with_capacity(items.len());
    for it in items {
        if stack.last().is_some_and(|top| letter(top) == letter(&it).inverse()) {
            stack.pop();
        } else {
            stack.push(it);
        }
    }
    let mut dq: VecDeque<T> = stack.into();
    while dq.len() >= 2 && letter(dq.front().expect("nonempty")) == letter(dq.back().expect("nonempty")).inverse() {
        dq.pop_front();
        dq.pop_back();
    }
    dq.into()
}

/// A multicurve: component 0 is the essential component, the others are
/// closed in the cylinder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiCurve {
    pub framing: i64,
    pub components: Vec<Component>,
    pub header: Vec<String>,
}

impl MultiCurve {
    pub fn new(framing: i64, components: Vec<Component>) -> Self {
        MultiCurve { framing, components, header: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.components.first() else {
            return Err(Error::Invalid("multicurve has no components".into()));
        };
        if first.net_horizontal().abs() != 1 {
            return Err(Error::Invalid("component 0 must wind once around the cylinder".into()));
        }
        let base_count = first.crossing_count();
        for (ci, c) in self.components.iter().enumerate() {
            if c.word.is_empty() {
                return Err(Error::Invalid(format!("component {ci} is empty")));
            }
            if ci > 0 && c.net_horizontal() != 0 {
                return Err(Error::Invalid(format!("component {ci} is not closed")));
            }
            if c.net_vertical() != 0 {
                return Err(Error::Invalid(format!("component {ci} is not 0-framed (net vertical {})", c.net_vertical())));
            }
            if c.crossing_count() == 0 {
                return Err(Error::Invalid(format!("component {ci} never crosses the vertical axis")));
            }
            if !c.labels.is_empty() && c.labels.len() != c.crossing_count() {
                return Err(Error::Invalid(format!("component {ci} has {} labels for {} crossings", c.labels.len(), c.crossing_count())));
            }
            for t in &c.turns {
                if t.crossing >= c.crossing_count() || t.base >= base_count {
                    return Err(Error::Invalid(format!("turn {}:{} out of range on component {ci}", t.crossing, t.base)));
                }
            }
        }
        Ok(())
    }

    pub fn is_tight(&self) -> bool {
        self.components.iter().all(Component::is_tight)
    }

    /// Tighten every component, keeping turns whose crossings survive.
    pub fn tightened(&self) -> MultiCurve {
        let mut comps = Vec::with_capacity(self.components.len());
        let mut base_map = Vec::new();
        for (ci, c) in self.components.iter().enumerate() {
            let (t, map) = c.tightened();
            if ci == 0 {
                base_map = map;
            }
            comps.push(t);
        }
        for c in comps.iter_mut().skip(1) {
            c.turns = c
                .turns
                .iter()
                .filter_map(|t| base_map.get(t.base).copied().flatten().map(|b| Turn { base: b, ..*t }))
                .collect();
        }
        MultiCurve { framing: self.framing, components: comps, header: self.header.clone() }
    }

    /// Number of intersections with the vertical axis.
    pub fn axis_intersections(&self) -> usize {
        self.tightened().components.iter().map(Component::crossing_count).sum()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut out = MultiCurve::new(0, Vec::new());
        let mut in_header = true;
        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            if in_header && raw.starts_with('#') {
                out.header.push(raw.to_string());
                continue;
            }
            in_header = false;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let col = |tok: &str| raw.find(tok).map_or(1, |p| p + 1);
            match toks[0] {
                "framing" if toks.len() == 2 => {
                    if !out.components.is_empty() {
                        return Err(Error::parse(line_no, 1, "`framing` must precede components"));
                    }
                    out.framing = parse_int(toks[1]).ok_or_else(|| Error::parse(line_no, col(toks[1]), format!("bad integer `{}`", toks[1])))?;
                }
                "comp" if toks.len() >= 2 => {
                    let word_col = col(toks[1]);
                    let mut word = Vec::new();
                    for (i, ch) in toks[1].chars().enumerate() {
                        word.push(
                            Letter::from_char(ch)
                                .ok_or_else(|| Error::parse(line_no, word_col + i, format!("bad letter `{ch}`")))?,
                        );
                    }
                    let mut comp = Component::new(word, 0);
                    for tok in &toks[2..] {
                        let (key, val) = tok
                            .split_once('=')
                            .ok_or_else(|| Error::parse(line_no, col(tok), format!("expected key=value, got `{tok}`")))?;
                        let c = col(tok) + key.len() + 1;
                        match key {
                            "height" => {
                                comp.height = parse_int(val).ok_or_else(|| Error::parse(line_no, c, format!("bad integer `{val}`")))?;
                            }
                            "labels" => comp.labels = val.split(',').map(str::to_string).collect(),
                            "turns" => {
                                for t in val.split(',') {
                                    let parts: Vec<Option<i64>> = t.split(':').map(parse_int).collect();
                                    match parts.as_slice() {
                                        [Some(i), Some(j), Some(du)] if *i >= 0 && *j >= 0 => comp.turns.push(Turn {
                                            crossing: *i as usize,
                                            base: *j as usize,
                                            du: *du,
                                        }),
                                        _ => return Err(Error::parse(line_no, c, format!("bad turn `{t}`"))),
                                    }
                                }
                            }
                            _ => return Err(Error::parse(line_no, col(tok), format!("unknown key `{key}`"))),
                        }
                    }
                    out.components.push(comp);
                }
                other => return Err(Error::parse(line_no, col(other), format!("malformed line `{line}`"))),
            }
        }
        out.validate().map_err(|e| match e {
            Error::Invalid(msg) => Error::parse(text.lines().count().max(1), 1, msg),
            e => e,
        })?;
        Ok(out)
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str(h);
            out.push('\n');
        }
        let _ = writeln!(out, "framing {}", self.framing);
        for c in &self.components {
            let word: String = c.word.iter().map(|l| l.as_char()).collect();
            let _ = write!(out, "comp {word} height={}", c.height);
            if !c.labels.is_empty() {
                let _ = write!(out, " labels={}", c.labels.join(","));
            }
            if !c.turns.is_empty() {
                let ts: Vec<String> = c.turns.iter().map(|t| format!("{}:{}:{}", t.crossing, t.base, t.du)).collect();
                let _ = write!(out, " turns={}", ts.join(","));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for MultiCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

fn parse_int(s: &str) -> Option<i64> {
    s.parse::<i64>().ok().filter(|v| v.to_string() == s)
}

/// The type D structure of a curve over the plain algebra.
pub fn curve_to_d(c: &MultiCurve) -> Result<TypeD> {
    word_to_typed(c, false)
}

/// The curved extension over the extended algebra.
pub fn curve_to_extended_d(c: &MultiCurve) -> Result<TypeD> {
    word_to_typed(c, true)
}

/// Each pair of consecutive crossings bounds a segment in the square; the
/// segment contributes the chord avoiding 0 (and, when `extended`, the
/// complementary chord through 0 in the opposite direction).
pub fn word_to_typed(c: &MultiCurve, extended: bool) -> Result<TypeD> {
    c.validate()?;
    let (variant, curvature) = if extended { (Variant::Extended, Curvature::Curved) } else { (Variant::Plain, Curvature::Flat) };
    let mut out = TypeD::new(variant, curvature);
    for (ci, comp) in c.components.iter().enumerate() {
        let (tw, _) = comp.twisted(c.framing).tightened();
        let mut idx = Vec::with_capacity(tw.word.len());
        let mut k = 0;
        for (pos, &l) in tw.word.iter().enumerate() {
            let (name, idem) = if l.is_axis() {
                k += 1;
                (tw.name(ci, k - 1), 0)
            } else {
                (format!("h{ci}_{pos}"), 1)
            };
            if out.index_of(&name).is_some() {
                return Err(Error::Invalid(format!("duplicate generator name {name}")));
            }
            idx.push(out.add_gen(name, idem, None));
        }
        let n = tw.word.len();
        for k in 0..n {
            let (a, b) = (tw.word[k], tw.word[(k + 1) % n]);
            let (p, q) = (a.entry_edge(), b.exit_edge());
            if p == q {
                return Err(Error::Invalid("word is not tight".into()));
            }
            let fwd = Basis::chord(p, (q + 4 - p) % 4);
            let back = Basis::chord(q, (p + 4 - q) % 4);
            let (g, h) = (idx[k], idx[(k + 1) % n]);
            for (ch, f, t) in [(fwd, g, h), (back, h, g)] {
                if extended || !ch.contains_zero() {
                    out.toggle_arrow(f, t, ch);
                }
            }
        }
    }
    Ok(out)
}

/// Recover the multicurve of a reduced, local-system-free structure. The
/// framing is read off the essential component and the stored words are
/// untwisted to framing 0. When every ι₀ generator carries a grading, rows
/// are Alexander gradings and closed components get turns.
pub fn d_to_curve(m: &TypeD) -> Result<MultiCurve> {
    let plain = if m.variant == Variant::Plain { m.clone() } else { truncate(m, Variant::Plain) };
    let red = reduce_typed(&plain);
    let n = red.len();
    let mut ends: BTreeMap<(usize, u8), Vec<(usize, u8)>> = BTreeMap::new();
    for (f, b, t) in red.basis_arrows() {
        let Basis::Chord { start, len } = b else {
            return Err(Error::Invalid("structure is not reduced".into()));
        };
        let e = (start + len) % 4;
        ends.entry((f, start)).or_default().push((t, e));
        ends.entry((t, e)).or_default().push((f, start));
    }
    for (g, gen) in red.gens.iter().enumerate() {
        let edges = if gen.idem == 0 { [1, 3] } else { [0, 2] };
        for e in edges {
            if ends.get(&(g, e)).map_or(0, Vec::len) != 1 {
                return Err(Error::LocalSystem);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&g| (red.gens[g].idem, g));
    let mut seen = vec![false; n];
    let mut walks: Vec<Vec<(Letter, usize)>> = Vec::new();
    for start in order {
        if seen[start] {
            continue;
        }
        let e0 = if red.gens[start].idem == 0 { 1 } else { 2 };
        let mut cur = (start, e0);
        let mut walk = Vec::new();
        loop {
            let (g, e) = cur;
            if seen[g] {
                return Err(Error::LocalSystem);
            }
            seen[g] = true;
            walk.push((Letter::with_entry_edge(e), g));
            let (h, e2) = ends[&(g, e)][0];
            cur = (h, (e2 + 2) % 4);
            if cur == (start, e0) {
                break;
            }
        }
        walks.push(walk);
    }
    let mut comps: Vec<(Component, Vec<usize>)> = walks
        .into_iter()
        .map(|w| {
            let gens: Vec<usize> = w.iter().filter(|(l, _)| l.is_axis()).map(|&(_, g)| g).collect();
            let mut c = Component::new(w.iter().map(|&(l, _)| l).collect(), 0);
            c.labels = gens.iter().map(|&g| red.gens[g].name.clone()).collect();
            (c, gens)
        })
        .collect();
    if comps.iter().any(|(c, _)| c.crossing_count() == 0) {
        return Err(Error::Invalid("curve component without axis crossings".into()));
    }
    let ess: Vec<usize> = (0..comps.len()).filter(|&k| comps[k].0.net_horizontal() != 0).collect();
    if ess.len() != 1 || comps[ess[0]].0.net_horizontal().abs() != 1 {
        return Err(Error::Invalid("structure does not have exactly one essential component".into()));
    }
    let e = comps.remove(ess[0]);
    comps.insert(0, e);
    if comps[0].0.net_horizontal() < 0 {
        let (c, mut g) = comps[0].clone();
        g.reverse();
        comps[0] = (c.reversed(), g);
    }
    let framing = comps[0].0.net_vertical();
    for (c, gens) in comps.iter_mut() {
        let (t, map) = c.twisted(-framing).tightened();
        if map.iter().any(Option::is_none) {
            return Err(Error::Invalid("structure is not reduced".into()));
        }
        *c = t;
        let first = c.axis_positions()[0];
        if first != 0 {
            let k = c.word[..first].iter().filter(|l| l.is_axis()).count();
            *c = c.rotated_to_crossing(k);
            gens.rotate_left(k);
        }
    }
    let all_graded = red.gens.iter().all(|g| g.idem != 0 || g.grading.is_some());
    let mut out = MultiCurve::new(framing, Vec::new());
    match all_graded {
        true => {
            let gr: Vec<Bigrading> = red.gens.iter().map(|g| g.grading.unwrap_or_default()).collect();
            let mut base: Option<(Component, Vec<i64>)> = None;
            for (ci, (c, gens)) in comps.into_iter().enumerate() {
                let a: Vec<i64> = gens
                    .iter()
                    .map(|&g| gr[g].alexander().ok_or_else(|| Error::NotKnotComplex("half-integral Alexander grading".into())))
                    .collect::<Result<_>>()?;
                let mut c = c;
                c.height = a[0];
                if c.crossing_rows() != a {
                    return Err(Error::NotKnotComplex("Alexander gradings disagree with curve heights".into()));
                }
                let gu: Vec<i64> = gens.iter().map(|&g| gr[g].gr_u).collect();
                if ci == 0 {
                    base = Some((c.clone(), gu));
                } else {
                    let (b, bu) = base.as_ref().expect("essential first");
                    c = with_turn(c, &gu, b, bu);
                }
                out.components.push(c);
            }
        }
        false => {
            for (c, _) in comps {
                out.components.push(c);
            }
            let s = center_shift(&out.components[0])?;
            out.components[0].height -= s;
        }
    }
    out.validate()?;
    Ok(out)
}

/// Attach a turn to closed component `c`, preferring a crossing that
/// coincides with a base crossing (same row, same direction, same grU), in
/// either orientation.
fn with_turn(c: Component, gu: &[i64], base: &Component, base_gu: &[i64]) -> Component {
    let brows = base.crossing_rows();
    let blet = base.crossing_letters();
    let mut rev_gu = gu.to_vec();
    rev_gu.reverse();
    for (cand, cgu) in [(c.clone(), gu.to_vec()), (c.reversed(), rev_gu)] {
        let rows = cand.crossing_rows();
        let lets = cand.crossing_letters();
        for i in 0..rows.len() {
            for j in 0..brows.len() {
                if rows[i] == brows[j] && lets[i] == blet[j] && cgu[i] == base_gu[j] {
                    let mut out = cand.clone();
                    out.turns = vec![Turn { crossing: i, base: j, du: 0 }];
                    return out;
                }
            }
        }
    }
    let mut out = c;
    out.turns = vec![Turn { crossing: 0, base: 0, du: gu[0] - base_gu[0] }];
    out
}

/// Potential `-θ + 2W` at the axis crossings of a 0-framed word, where θ is
/// the tangent angle in half turns and `W` sums the rows of `L` crossings
/// (up to and including the current one) minus the rows of earlier `R`
/// crossings. Returns the values and the monodromy around the word.
fn word_potential(c: &Component, shift: i64) -> (Vec<i64>, i64) {
    let rows = c.rows();
    let n = c.word.len();
    let start = c.word[0].quarter_turns();
    let mut theta = start;
    let mut w = 0;
    let mut out = Vec::new();
    for k in 0..n {
        let l = c.word[k];
        let r = rows[k] - shift;
        match l {
            Letter::L => {
                w += r;
                out.push(-theta / 2 + 2 * w);
            }
            Letter::R => {
                out.push(-theta / 2 + 2 * w);
                w -= r;
            }
            _ => {}
        }
        theta += turn(l, c.word[(k + 1) % n]);
    }
    (out, -(theta - start) / 2 + 2 * w)
}

/// Row shift making the potential of the essential component single valued.
pub fn center_shift(c: &Component) -> Result<i64> {
    let (_, m) = word_potential(c, 0);
    let nh = c.net_horizontal();
    if nh == 0 || m % (2 * nh) != 0 {
        return Err(Error::Invalid(format!("potential monodromy {m} cannot be centered")));
    }
    Ok(m / (2 * nh))
}

/// An absolute grading for one crossing, used to pin a curve grading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Peg {
    pub component: usize,
    pub crossing: usize,
    pub grading: Bigrading,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveGrading {
    /// Bigradings of the axis crossings, per component.
    pub gradings: Vec<Vec<Bigrading>>,
    /// Components without a turn are graded only up to an overall shift.
    pub relative: Vec<bool>,
    /// Row shift applied to centre the heights.
    pub shift: i64,
}

/// Bigradings of all axis crossings. Alexander gradings are the centred
/// rows; Maslov gradings come from the potential, carried to closed
/// components by their turns, and are normalised by `peg` or else by the
/// U-tower of the V = 1 complex sitting in grU = 0.
pub fn grade_curve(c: &MultiCurve, peg: Option<Peg>) -> Result<CurveGrading> {
    let c = c.tightened();
    c.validate()?;
    let s = center_shift(&c.components[0])?;
    let mut pots = Vec::new();
    for (ci, comp) in c.components.iter().enumerate() {
        let (p, m) = word_potential(comp, s);
        if m != 0 {
            return Err(Error::Invalid(format!("component {ci} is not gradable (monodromy {m})")));
        }
        pots.push(p);
    }
    let mut relative = vec![false; c.components.len()];
    for ci in 1..c.components.len() {
        let off = match c.components[ci].turns.first() {
            Some(t) => pots[0][t.base] + t.du - pots[ci][t.crossing],
            None => {
                relative[ci] = true;
                -pots[ci][0]
            }
        };
        for v in pots[ci].iter_mut() {
            *v += off;
        }
    }
    let alex: Vec<Vec<i64>> = c.components.iter().map(|comp| comp.crossing_rows().iter().map(|r| r - s).collect()).collect();
    let build = |cst: i64| -> Vec<Vec<Bigrading>> {
        pots.iter()
            .zip(&alex)
            .map(|(p, a)| p.iter().zip(a).map(|(&g, &a)| Bigrading::new(g + cst, g + cst - 2 * a)).collect())
            .collect()
    };
    let cst = match peg {
        Some(pg) => {
            let g = *pots
                .get(pg.component)
                .and_then(|p| p.get(pg.crossing))
                .ok_or_else(|| Error::Invalid("peg out of range".into()))?;
            if pg.grading.alexander() != Some(alex[pg.component][pg.crossing]) {
                return Err(Error::Invalid("peg Alexander grading disagrees with the curve height".into()));
            }
            pg.grading.gr_u - g
        }
        None => {
            let gr = build(0);
            let cx = read_complex(&c, &gr);
            let v = simplify_one_variable(&cx, false);
            let h = simplify_one_variable(&cx, true);
            if v.unpaired.len() != 1 || h.unpaired.len() != 1 {
                return Err(Error::NotKnotComplex("curve does not have exactly one tower".into()));
            }
            let cst = -cx.gradings[v.unpaired[0]].gr_u;
            if cx.gradings[h.unpaired[0]].gr_v + cst != 0 {
                return Err(Error::Invalid("tower gradings are inconsistent".into()));
            }
            cst
        }
    };
    Ok(CurveGrading { gradings: build(cst), relative, shift: s })
}

/// The knot complex read from the curve: bigon arcs on the left of the axis
/// are vertical arrows, on the right horizontal arrows.
fn read_complex(c: &MultiCurve, gradings: &[Vec<Bigrading>]) -> CfkComplex {
    let mut names = Vec::new();
    let mut grs = Vec::new();
    let mut offsets = Vec::new();
    for (ci, comp) in c.components.iter().enumerate() {
        offsets.push(names.len());
        for k in 0..comp.crossing_count() {
            names.push(comp.name(ci, k));
            grs.push(gradings[ci][k]);
        }
    }
    let mut d = RMatrix::zero(names.len(), names.len());
    for (ci, comp) in c.components.iter().enumerate() {
        let pos = comp.axis_positions();
        let nk = pos.len();
        let n = comp.word.len();
        for k in 0..nk {
            let (a, b) = (comp.word[pos[k]], comp.word[pos[(k + 1) % nk]]);
            let mut v = 0;
            let mut i = (pos[k] + 1) % n;
            while i != pos[(k + 1) % nk] {
                v += comp.word[i].vertical();
                i = (i + 1) % n;
            }
            let g = offsets[ci] + k;
            let h = offsets[ci] + (k + 1) % nk;
            let e = v.unsigned_abs() as u32;
            match (a, b) {
                (Letter::L, Letter::R) if v < 0 => d.add_monomial_at(h, g, RMonomial::v(e)),
                (Letter::L, Letter::R) => d.add_monomial_at(g, h, RMonomial::v(e)),
                (Letter::R, Letter::L) if v > 0 => d.add_monomial_at(h, g, RMonomial::u(e)),
                (Letter::R, Letter::L) => d.add_monomial_at(g, h, RMonomial::u(e)),
                _ => {}
            }
        }
    }
    CfkComplex::new(names, grs, d)
}

/// The knot Floer complex of a curve, read directly from its bigons.
pub fn curve_to_cfk(c: &MultiCurve) -> Result<CfkComplex> {
    let g = grade_curve(c, None)?;
    Ok(read_complex(&c.tightened(), &g.gradings))
}

/// The 0-framed multicurve of a reduced complex whose basis is
/// simultaneously vertically and horizontally simplified.
pub fn cfk_to_curve(c: &CfkComplex) -> Result<MultiCurve> {
    #[derive(Clone, Copy)]
    struct Edge {
        other: usize,
        len: u32,
        outgoing: bool,
    }
    let n = c.len();
    let mut vport: Vec<Option<Edge>> = vec![None; n];
    let mut hport: Vec<Option<Edge>> = vec![None; n];
    for (to, from, e) in c.d.entries() {
        for m in e.terms() {
            if m.is_one() {
                return Err(Error::Invalid("complex is not reduced".into()));
            }
            let (ports, len) = if m.u_exp() > 0 { (&mut hport, m.u_exp()) } else { (&mut vport, m.v_exp()) };
            for (g, other, outgoing) in [(from, to, true), (to, from, false)] {
                if ports[g].is_some() {
                    return Err(Error::NotSimplifiable(format!("{} has two arrows of the same kind", c.names[g])));
                }
                ports[g] = Some(Edge { other, len, outgoing });
            }
        }
    }
    let xi: Vec<usize> = (0..n).filter(|&g| vport[g].is_none()).collect();
    let eta: Vec<usize> = (0..n).filter(|&g| hport[g].is_none()).collect();
    if xi.len() != 1 || eta.len() != 1 {
        return Err(Error::NotKnotComplex(format!("{} vertical and {} horizontal towers", xi.len(), eta.len())));
    }
    let (xi, eta) = (xi[0], eta[0]);
    let alex: Vec<i64> = c
        .gradings
        .iter()
        .map(|g| g.alexander().ok_or_else(|| Error::NotKnotComplex("half-integral Alexander grading".into())))
        .collect::<Result<_>>()?;
    let push_run = |word: &mut Vec<Letter>, up: bool, len: u32| {
        let l = if up { Letter::U } else { Letter::D };
        word.extend(std::iter::repeat_n(l, len as usize));
    };
    let mut seen = vec![false; n];
    let mut walks: Vec<(Vec<Letter>, Vec<usize>)> = Vec::new();
    let starts = std::iter::once(xi).chain(0..n);
    for start in starts {
        if seen[start] {
            continue;
        }
        let mut word = Vec::new();
        let mut gens = Vec::new();
        let (mut g, mut via_v) = (start, true);
        loop {
            seen[g] = true;
            gens.push(g);
            word.push(if via_v { Letter::L } else { Letter::R });
            let port = if via_v { vport[g] } else { hport[g] };
            let (next, next_via_v) = match port {
                Some(e) => {
                    // Vertical: D^len when leaving along an outgoing arrow;
                    // horizontal: U^len.
                    let up = if via_v { !e.outgoing } else { e.outgoing };
                    push_run(&mut word, up, e.len);
                    (e.other, via_v)
                }
                None => {
                    // The unstable chain joins ξ₀'s vertical side to η₀'s
                    // horizontal side.
                    let (to, rise) = if via_v { (eta, alex[eta] - alex[xi]) } else { (xi, alex[xi] - alex[eta]) };
                    push_run(&mut word, rise > 0, rise.unsigned_abs() as u32);
                    (to, !via_v)
                }
            };
            // Leave the next generator through its other port.
            g = next;
            via_v = !next_via_v;
            if g == start && via_v {
                break;
            }
            if seen[g] {
                return Err(Error::NotKnotComplex("arrow graph is not a union of cycles".into()));
            }
        }
        walks.push((word, gens));
    }
    let mut out = MultiCurve::new(0, Vec::new());
    let mut base: Option<(Component, Vec<i64>)> = None;
    for (ci, (word, gens)) in walks.into_iter().enumerate() {
        let mut comp = Component::new(word, alex[gens[0]]);
        comp.labels = gens.iter().map(|&g| c.names[g].clone()).collect();
        let a: Vec<i64> = gens.iter().map(|&g| alex[g]).collect();
        if comp.crossing_rows() != a {
            return Err(Error::NotKnotComplex("Alexander gradings disagree with the differential".into()));
        }
        let gu: Vec<i64> = gens.iter().map(|&g| c.gradings[g].gr_u).collect();
        if ci == 0 {
            base = Some((comp.clone(), gu));
        } else {
            let (b, bu) = base.as_ref().expect("essential first");
            comp = with_turn(comp, &gu, b, bu);
        }
        out.components.push(comp);
    }
    out.validate()?;
    Ok(out)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// The `(p, q)`-cable of a 0-framed multicurve.
///
/// Each component is drawn in the plane, stretched vertically by `p`, and
/// copies in successive columns are staggered by `-q`; the result is read
/// against the new marked points (one per height, in the columns forced by
/// the stagger) and pulled tight. Closed components produce `p` copies.
/// Turns of closed components must sit at crossings that coincide with the
/// base crossing; the potential is carried through that shared point.
pub fn cable_curve(c: &MultiCurve, p: i64, q: i64) -> Result<MultiCurve> {
    if p < 1 || gcd(p, q) != 1 {
        return Err(Error::Invalid(format!("cable parameters ({p}, {q}) are not coprime with p >= 1")));
    }
    let c = c.tightened();
    c.validate()?;
    if p == 1 {
        return Ok(c);
    }
    for extra in 0..8 {
        match Cabler::new(p, q, 2 * p + 1 + 2 * extra).run(&c) {
            Ok(out) => return Ok(out),
            Err(CableError::Degenerate) => continue,
            Err(CableError::Fatal(e)) => return Err(e),
        }
    }
    Err(Error::Invalid("no generic position found for the cabling transform".into()))
}

enum CableError {
    Degenerate,
    Fatal(Error),
}

impl From<Error> for CableError {
    fn from(e: Error) -> Self {
        CableError::Fatal(e)
    }
}

struct Ev {
    letter: Letter,
    /// Band of an axis crossing, or the row before a line crossing.
    row: i64,
    theta: f64,
}

struct Trace {
    events: Vec<Ev>,
    /// Input crossing index -> (θ, number of events before it).
    marks: BTreeMap<usize, (f64, usize)>,
    total_turn: f64,
}

/// Exact geometry at scale `4 * d`: input coordinates are multiples of 1/4,
/// and the vertical offset is `1 / d`.
struct Cabler {
    p: i64,
    q: i64,
    d: i64,
    s: i64,
    ktab: Vec<i64>,
}

impl Cabler {
    fn new(p: i64, q: i64, d: i64) -> Self {
        let ktab = (0..p).map(|r| (0..p).find(|k| (r + k * q).rem_euclid(p) == 0).expect("coprime")).collect();
        Cabler { p, q, d, s: 4 * d, ktab }
    }

    /// Column of the marked point at height `h` within its period.
    fn k(&self, h: i64) -> i64 {
        self.ktab[h.rem_euclid(self.p) as usize]
    }

    fn dk(&self, h: i64) -> i64 {
        self.k(h + 1) - self.k(h)
    }

    fn map(&self, x4: i64, y4: i64, col: i64) -> (i64, i64) {
        (self.d * x4, self.d * self.p * y4 - self.s * self.q * col.rem_euclid(self.p) + 4)
    }

    fn axis_x(&self, m: i64, h: i64, y: i64) -> i64 {
        self.s * (self.k(h) + self.p * m) + self.dk(h) * (y - self.s * h)
    }

    /// Lift `comp` (rotated so its crossing 0 comes first) to the plane with
    /// crossing 0 on axis `x0`, for `periods` traversals.
    fn realize(comp: &Component, x0: i64, periods: usize) -> (Vec<(i64, i64)>, Vec<usize>) {
        let pos = comp.axis_positions();
        let rows = comp.rows();
        let nk = pos.len();
        let mut verts: Vec<(i64, i64)> = Vec::new();
        let mut marks = Vec::new();
        let mut x = x0;
        let push = |verts: &mut Vec<(i64, i64)>, v: (i64, i64)| {
            if verts.last() != Some(&v) {
                verts.push(v);
            }
        };
        for _ in 0..periods {
            for k in 0..nk {
                let r = rows[pos[k]];
                marks.push(verts.len());
                push(&mut verts, (4 * x, 4 * r + 2));
                let r2 = rows[pos[(k + 1) % nk]];
                let (a, b) = (comp.word[pos[k]], comp.word[pos[(k + 1) % nk]]);
                let (off, dx) = match (a, b) {
                    (Letter::L, Letter::R) => (-1, 0),
                    (Letter::R, Letter::L) => (1, 0),
                    (Letter::L, _) => (-3, -1),
                    _ => (3, 1),
                };
                push(&mut verts, (4 * x + off, 4 * r + 2));
                push(&mut verts, (4 * x + off, 4 * r2 + 2));
                x += dx;
            }
        }
        let r0 = rows[pos[0]];
        verts.push((4 * x, 4 * r0 + 2));
        (verts, marks)
    }

    /// Apply the staggered stretch, inserting vertical connectors where a
    /// horizontal segment changes column.
    fn map_path(&self, verts: &[(i64, i64)], marks: &[usize]) -> (Vec<(i64, i64)>, BTreeMap<usize, usize>) {
        let col = |x4: i64| (x4 + 2).div_euclid(4);
        let mut out: Vec<(i64, i64)> = Vec::new();
        let mut out_marks = BTreeMap::new();
        let mark_of: BTreeMap<usize, usize> = marks.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let push = |out: &mut Vec<(i64, i64)>, v: (i64, i64)| {
            if out.last() != Some(&v) {
                out.push(v);
            }
        };
        for i in 0..verts.len() {
            let (x, y) = verts[i];
            if i > 0 {
                let (px, py) = verts[i - 1];
                if py == y && px != x {
                    let step = if x > px { 1 } else { -1 };
                    let mut j = if step > 0 { (px - 2).div_euclid(4) + 1 } else { (px - 2 - 1).div_euclid(4) };
                    loop {
                        let split = 4 * j + 2;
                        let inside = if step > 0 { split > px && split < x } else { split < px && split > x };
                        if !inside {
                            break;
                        }
                        let (before, after) = if step > 0 { (j, j + 1) } else { (j + 1, j) };
                        push(&mut out, self.map(split, y, before));
                        push(&mut out, self.map(split, y, after));
                        j += step;
                    }
                }
            }
            if let Some(&k) = mark_of.get(&i) {
                out_marks.insert(k, out.len());
            }
            let before = out.len();
            push(&mut out, self.map(x, y, col(x)));
            if out.len() == before {
                if let Some(&k) = mark_of.get(&i) {
                    out_marks.insert(k, out.len() - 1);
                }
            }
        }
        (out, out_marks)
    }

    fn trace(&self, verts: &[(i64, i64)], marks: &BTreeMap<usize, usize>) -> std::result::Result<Trace, CableError> {
        let s = self.s;
        let vmark: BTreeMap<usize, usize> = marks.iter().map(|(&k, &v)| (v, k)).collect();
        let mut events = Vec::new();
        let mut out_marks = BTreeMap::new();
        let mut theta: Option<f64> = None;
        let mut first = 0.0;
        let advance = |theta: &mut Option<f64>, first: &mut f64, a: f64| -> f64 {
            match *theta {
                None => {
                    *theta = Some(a);
                    *first = a;
                    a
                }
                Some(t) => {
                    let mut diff = (a - t).rem_euclid(2.0);
                    if diff > 1.0 {
                        diff -= 2.0;
                    }
                    *theta = Some(t + diff);
                    t + diff
                }
            }
        };
        let window = |lo: i64, hi: i64| (lo.div_euclid(s * self.p) - 2)..=(hi.div_euclid(s * self.p) + 2);
        for i in 0..verts.len() - 1 {
            let (x1, y1) = verts[i];
            let (x2, y2) = verts[i + 1];
            if y1.rem_euclid(s) == 0 {
                return Err(CableError::Degenerate);
            }
            if y1 == y2 {
                let h = y1.div_euclid(s);
                let a = if x2 > x1 { 0.0 } else { 1.0 };
                let t = advance(&mut theta, &mut first, a);
                if let Some(&k) = vmark.get(&i) {
                    out_marks.insert(k, (t, events.len()));
                }
                let mut found = Vec::new();
                for m in window(x1.min(x2), x1.max(x2)) {
                    let ax = self.axis_x(m, h, y1);
                    if ax == x1 || ax == x2 {
                        return Err(CableError::Degenerate);
                    }
                    if (ax > x1.min(x2)) && (ax < x1.max(x2)) {
                        found.push(ax);
                    }
                }
                found.sort_by_key(|&ax| (ax - x1).abs());
                let letter = if x2 > x1 { Letter::R } else { Letter::L };
                for _ in found {
                    events.push(Ev { letter, row: h, theta: t });
                }
            } else {
                let sg = (y2 - y1).signum();
                let mut y = y1;
                let mut h = y1.div_euclid(s);
                let mut first_piece = true;
                loop {
                    let bound = if sg > 0 { s * (h + 1) } else { s * h };
                    let end = if sg > 0 { bound.min(y2) } else { bound.max(y2) };
                    let dk = self.dk(h);
                    let a = (sg as f64).atan2((-dk * sg) as f64) / std::f64::consts::PI;
                    let t = advance(&mut theta, &mut first, a.rem_euclid(2.0));
                    if first_piece {
                        if let Some(&k) = vmark.get(&i) {
                            out_marks.insert(k, (t, events.len()));
                        }
                        first_piece = false;
                    }
                    if dk != 0 {
                        let (lo, hi) = (y.min(end), y.max(end));
                        let mut found: Vec<(i64, i64)> = Vec::new();
                        for m in window(x1 - s * self.p, x1 + s * self.p) {
                            // Axis through x1 at height num / den.
                            let mut num = s * h * dk + x1 - s * (self.k(h) + self.p * m);
                            let mut den = dk;
                            if den < 0 {
                                num = -num;
                                den = -den;
                            }
                            if num == lo * den || num == hi * den {
                                return Err(CableError::Degenerate);
                            }
                            if num > lo * den && num < hi * den {
                                found.push((num, den));
                            }
                        }
                        found.sort_by(|a, b| {
                            let o = (a.0 as i128 * b.1 as i128).cmp(&(b.0 as i128 * a.1 as i128));
                            if sg > 0 {
                                o
                            } else {
                                o.reverse()
                            }
                        });
                        let letter = if dk * sg > 0 { Letter::L } else { Letter::R };
                        for _ in found {
                            events.push(Ev { letter, row: h, theta: t });
                        }
                    }
                    if end == y2 {
                        break;
                    }
                    if sg > 0 {
                        events.push(Ev { letter: Letter::U, row: h, theta: t });
                        h += 1;
                    } else {
                        events.push(Ev { letter: Letter::D, row: h, theta: t });
                        h -= 1;
                    }
                    y = end;
                }
            }
        }
        let last = theta.unwrap_or(0.0);
        let mut diff = (first - last).rem_euclid(2.0);
        if diff > 1.0 {
            diff -= 2.0;
        }
        Ok(Trace { events, marks: out_marks, total_turn: last + diff - first })
    }

    fn run(&self, c: &MultiCurve) -> std::result::Result<MultiCurve, CableError> {
        let p = self.p as usize;
        let ess = &c.components[0];
        let nh = ess.net_horizontal();
        let (ev, em) = Self::realize(ess, 0, p);
        let (ov, om) = self.map_path(&ev, &em);
        let etr = self.trace(&ov, &om)?;
        let nk = ess.crossing_count();
        // Centre rows so that the essential potential is single valued.
        let (lr, wsum) = etr.events.iter().fold((0i64, 0i64), |(n, w), e| match e.letter {
            Letter::L => (n + 1, w + e.row),
            Letter::R => (n - 1, w - e.row),
            _ => (n, w),
        });
        if lr.abs() != 1 {
            return Err(Error::Invalid("cabled essential component does not wind once".into()).into());
        }
        let m0 = -round_turn(etr.total_turn)? + 2 * wsum;
        if m0 % (2 * lr) != 0 {
            return Err(Error::Invalid(format!("cabled potential monodromy {m0} cannot be centered")).into());
        }
        let shift = m0 / (2 * lr);
        let (ecomp, eg, emark) = finish(&etr, shift, 0.0)?;
        let mut comps = vec![ecomp];
        let eg0 = eg[0];
        for comp in &c.components[1..] {
            let (comp, turn) = align_turn(comp, ess)?;
            let start = turn.map_or(0, |t| t.crossing);
            let comp = comp.rotated_to_crossing(start);
            for t in 0..p {
                // Crossing `base` of period t of the essential lift.
                let (x0, link) = match turn {
                    Some(tn) => {
                        let v = em[t * nk + tn.base];
                        (ev[v].0 / 4, Some(t * nk + tn.base))
                    }
                    None => (-(t as i64) * nh, None),
                };
                let (cv, cm) = Self::realize(&comp, x0, 1);
                let (mv, mm) = self.map_path(&cv, &cm);
                let tr = self.trace(&mv, &mm)?;
                let (wl, ws) = tr.events.iter().fold((0i64, 0i64), |(n, w), e| match e.letter {
                    Letter::L => (n + 1, w + e.row),
                    Letter::R => (n - 1, w - e.row),
                    _ => (n, w),
                });
                if wl != 0 || -round_turn(tr.total_turn)? + 2 * ws != 0 {
                    return Err(Error::Invalid("cabled closed component is not gradable".into()).into());
                }
                let offset = match link {
                    Some(l) => {
                        let ge = emark.get(&l).copied().ok_or_else(|| Error::Invalid("missing base mark".into()))?;
                        let gc = mark_potential(&tr, 0, shift)?;
                        ge - gc
                    }
                    None => 0.0,
                };
                let (mut cc, cg, _) = finish(&tr, shift, offset)?;
                if cc.word.is_empty() {
                    continue;
                }
                if link.is_some() {
                    cc.turns = vec![Turn { crossing: 0, base: 0, du: cg[0] - eg0 }];
                }
                comps.push(cc);
            }
        }
        let mut out = MultiCurve::new(0, comps);
        out.header = c.header.clone();
        out.validate()?;
        Ok(out)
    }
}

fn round_turn(t: f64) -> std::result::Result<i64, CableError> {
    let r = t.round();
    if (t - r).abs() > 1e-6 {
        return Err(Error::Invalid(format!("non-integral total turning {t}")).into());
    }
    Ok(r as i64)
}

/// Unrounded potential at input mark `k` of a trace.
fn mark_potential(tr: &Trace, k: usize, shift: i64) -> std::result::Result<f64, CableError> {
    let &(theta, before) = tr.marks.get(&k).ok_or_else(|| Error::Invalid("missing mark".into()))?;
    let w: i64 = tr.events[..before]
        .iter()
        .map(|e| match e.letter {
            Letter::L => e.row - shift,
            Letter::R => -(e.row - shift),
            _ => 0,
        })
        .sum();
    Ok(-theta + 2.0 * w as f64)
}

/// Tighten a trace into a component. Returns the component, the potential
/// of its surviving crossings (plus `offset`), and the unrounded potential
/// at every input mark.
#[allow(clippy::type_complexity)]
fn finish(tr: &Trace, shift: i64, offset: f64) -> std::result::Result<(Component, Vec<i64>, BTreeMap<usize, f64>), CableError> {
    let mut g = Vec::with_capacity(tr.events.len());
    let mut w = 0;
    for e in &tr.events {
        let r = e.row - shift;
        match e.letter {
            Letter::L => {
                w += r;
                g.push(Some(-e.theta.round() as i64 + 2 * w));
            }
            Letter::R => {
                g.push(Some(-e.theta.round() as i64 + 2 * w));
                w -= r;
            }
            _ => g.push(None),
        }
    }
    let off = offset.round();
    if (offset - off).abs() > 1e-6 {
        return Err(Error::Invalid(format!("non-integral potential offset {offset}")).into());
    }
    let items: Vec<(Letter, i64, usize)> = tr
        .events
        .iter()
        .enumerate()
        .map(|(k, e)| (e.letter, e.row - shift, k))
        .collect();
    let mut red = free_reduce(items, |it| it.0);
    if let Some(first) = red.iter().position(|it| it.0.is_axis()) {
        red.rotate_left(first);
    }
    let word: Vec<Letter> = red.iter().map(|it| it.0).collect();
    let height = red.first().map_or(0, |it| it.1);
    let pots: Vec<i64> = red.iter().filter_map(|it| g[it.2]).map(|v| v + off as i64).collect();
    let mut marks = BTreeMap::new();
    for &k in tr.marks.keys() {
        marks.insert(k, mark_potential(tr, k, shift)? + off);
    }
    Ok((Component::new(word, height), pots, marks))
}

/// Orient a closed component so its first turn sits on a coincident base
/// crossing with `du = 0`.
fn align_turn(comp: &Component, ess: &Component) -> Result<(Component, Option<Turn>)> {
    let Some(&t) = comp.turns.first() else { return Ok((comp.clone(), None)) };
    let brow = ess.crossing_rows()[t.base];
    let blet = ess.crossing_letters()[t.base];
    for cand in [comp.clone(), comp.reversed()] {
        let t = cand.turns[0];
        if t.du == 0 && cand.crossing_rows()[t.crossing] == brow && cand.crossing_letters()[t.crossing] == blet {
            return Ok((cand, Some(t)));
        }
    }
    Err(Error::Invalid("cabling needs turns at crossings coinciding with the base crossing".into()))
}

/// Result of testing whether a satellite structure is extendable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionVerdict {
    Extendable,
    NotExtendable,
    Inconclusive(String),
}

/// Box a DA bimodule with a structure and try to extend the result.
pub fn satellite_extension_check(b: &TypeDA, m: &TypeD, budget: usize) -> Result<ExtensionVerdict> {
    let boxed = box_da_d(b, m)?;
    let plain = if boxed.variant == Variant::Plain { boxed } else { truncate(&boxed, Variant::Plain) };
    let red = reduce_typed(&plain);
    if !crate::bordered::validate_typed(&red).is_empty() {
        return Ok(ExtensionVerdict::Inconclusive("boxed structure fails the structure equation".into()));
    }
    match extend_typed(&red, budget) {
        Ok(Some(_)) => Ok(ExtensionVerdict::Extendable),
        Ok(None) => Ok(ExtensionVerdict::NotExtendable),
        Err(Error::ExtensionBudget) => Ok(ExtensionVerdict::Inconclusive("extension budget exhausted".into())),
        Err(e) => Err(e),
    }
}
