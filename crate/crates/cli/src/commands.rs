use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use lotkit::base_algebra::{Bigrading, F2Matrix, RMatrix};
use lotkit::bimodules::{box_da_da, reduce_da};
use lotkit::bordered::{
    box_da_d, extend_typed, reduce_typed, validate_typed, validate_typeda, DMorphism, TypeD, TypeDA,
    DEFAULT_EXTENSION_BUDGET,
};
use lotkit::cable_family::cable_family;
use lotkit::cfk::{iso_cfk, reduce, validate_cfk, ChainMap, CfkComplex};
use lotkit::curves::{cable_curve, curve_to_d, curve_to_extended_d, d_to_curve, grade_curve, MultiCurve};
use lotkit::involution::{hat_package, iota_isolation, nonsimple_check, solve_iota, validate_iota, IotaEvidence, IotaMap};
use lotkit::lot::{cfd_to_cfk_with, cfk_to_cfd, PairingOptions};
use lotkit::projections::{
    block_pattern, block_pattern_typed, boundary_of, conjugate_by_homotopy, lift_homotopy_projection, random_homotopy,
    split_by_generators, straighten_family, typed_parts, Lifted,
};

use crate::input::Loader;
use crate::report::Report;
use crate::{Cli, Cmd, CurveCmd, IotaCmd, Kind, LotCmd, SplitCmd, TargetKind};

/// Exit status for a failed command: 2 for usage, parse and I/O problems, 3
/// when a search budget ran out, 1 for everything else.
pub fn error_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<lotkit::Error>()) {
        Some(lotkit::Error::Parse { .. }) => 2,
        Some(lotkit::Error::ExtensionBudget | lotkit::Error::BoxDidNotTerminate) => 3,
        Some(_) => 1,
        None => 2,
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    loader: Loader,
    timings: BTreeMap<String, u128>,
}

impl Ctx<'_> {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> lotkit::Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f().with_context(|| format!("stage {stage}"));
        self.timings.insert(stage.to_string(), t.elapsed().as_millis());
        out
    }

    fn budget(&self) -> usize {
        self.cli.budget.unwrap_or(DEFAULT_EXTENSION_BUDGET)
    }

    fn cfk(&mut self, spec: &str) -> Result<CfkComplex> {
        let text = self.loader.read(spec)?;
        CfkComplex::parse(&text).with_context(|| format!("parsing {spec}"))
    }

    fn typed(&mut self, spec: &str) -> Result<TypeD> {
        let text = self.loader.read(spec)?;
        TypeD::parse(&text).with_context(|| format!("parsing {spec}"))
    }

    fn typeda(&mut self, spec: &str) -> Result<TypeDA> {
        let text = self.loader.read(spec)?;
        TypeDA::parse(&text).with_context(|| format!("parsing {spec}"))
    }

    fn curve(&mut self, spec: &str) -> Result<MultiCurve> {
        let text = self.loader.read(spec)?;
        MultiCurve::parse(&text).with_context(|| format!("parsing {spec}"))
    }

    fn iota(&mut self, spec: &str, c: &CfkComplex) -> Result<IotaMap> {
        let text = self.loader.read(spec)?;
        IotaMap::parse(&text, c).with_context(|| format!("parsing {spec}"))
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let mut ctx = Ctx { cli, loader: Loader::from_env(), timings: BTreeMap::new() };
    let mut rep = match &cli.cmd {
        Cmd::Validate { kind, input, complex } => validate(&mut ctx, *kind, input, complex.as_deref())?,
        Cmd::Reduce { kind, input } => reduce_cmd(&mut ctx, *kind, input)?,
        Cmd::Lot(c) => lot(&mut ctx, c)?,
        Cmd::Box { bimodule, target, target_kind, reduce } => box_cmd(&mut ctx, bimodule, target, *target_kind, *reduce)?,
        Cmd::Extend { input } => extend(&mut ctx, input)?,
        Cmd::Split(c) => split(&mut ctx, c)?,
        Cmd::Iota(c) => iota(&mut ctx, c)?,
        Cmd::Curve(c) => curve(&mut ctx, c)?,
        Cmd::CableFamily { n, m } => cable_family_cmd(&mut ctx, *n, *m)?,
    };
    rep.inputs = std::mem::take(&mut ctx.loader.checksums);
    if cli.timings {
        rep.timings_ms = Some(ctx.timings);
    }
    Ok(rep)
}

fn homotopy_text(c: &CfkComplex, h: &RMatrix) -> String {
    ChainMap::new(h.clone(), Bigrading::new(1, 1)).serialize(c, c)
}

fn map_text(src: &CfkComplex, tgt: &CfkComplex, f: &RMatrix) -> String {
    ChainMap::new(f.clone(), Bigrading::default()).serialize(src, tgt)
}

fn f2_rows(m: &F2Matrix) -> Vec<String> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| if m.get(i, j) { '1' } else { '0' }).collect()).collect()
}

fn problems(rep: &mut Report, list: Vec<String>) {
    rep.details = json!({ "problems": list });
    for p in &list {
        rep.line(p.clone());
    }
    rep.verdict(list.is_empty(), None);
}

fn validate(ctx: &mut Ctx, kind: Kind, input: &str, complex: Option<&str>) -> Result<Report> {
    let mut rep = Report::new("validate");
    match kind {
        Kind::Cfk => {
            let c = ctx.cfk(input)?;
            problems(&mut rep, validate_cfk(&c).iter().map(ToString::to_string).collect());
        }
        Kind::D => {
            let m = ctx.typed(input)?;
            problems(&mut rep, validate_typed(&m));
        }
        Kind::Da => {
            let m = ctx.typeda(input)?;
            problems(&mut rep, validate_typeda(&m));
        }
        Kind::Curve => {
            let c = ctx.curve(input)?;
            problems(&mut rep, c.validate().err().map(|e| e.to_string()).into_iter().collect());
        }
        Kind::Iota => {
            let spec = complex.ok_or_else(|| anyhow!("validating an involution needs --complex"))?;
            let c = ctx.cfk(spec)?;
            let iota = ctx.iota(input, &c)?;
            return iota_report(&c, &iota);
        }
    }
    Ok(rep)
}

fn iota_report(c: &CfkComplex, iota: &IotaMap) -> Result<Report> {
    let mut rep = Report::new("iota validate");
    let r = validate_iota(c, iota);
    rep.details = json!({
        "skew_chain_map": r.skew_chain_map,
        "graded": r.graded,
        "invertible": r.invertible,
        "failures": r.failures,
    });
    for f in &r.failures {
        rep.line(f.clone());
    }
    let witness = r.sarkar_homotopy.as_ref().map(|h| Value::String(homotopy_text(c, h)));
    rep.verdict(r.is_valid(), witness);
    Ok(rep)
}

fn reduce_cmd(ctx: &mut Ctx, kind: Kind, input: &str) -> Result<Report> {
    let mut rep = Report::new("reduce");
    let (before, after, text) = match kind {
        Kind::Cfk => {
            let c = ctx.cfk(input)?;
            let r = reduce(&c);
            rep.witness = Some(json!({
                "f": map_text(&c, &r.complex, &r.f),
                "g": map_text(&r.complex, &c, &r.g),
                "h": homotopy_text(&c, &r.h),
            }));
            (c.len(), r.complex.len(), r.complex.serialize())
        }
        Kind::D => {
            let m = ctx.typed(input)?;
            let r = reduce_typed(&m);
            (m.len(), r.len(), r.serialize())
        }
        Kind::Da => {
            let m = ctx.typeda(input)?;
            let r = ctx.timed("reduce", || reduce_da(&m))?;
            (m.len(), r.len(), r.serialize())
        }
        Kind::Curve | Kind::Iota => bail!("only cfk, d and da objects can be reduced"),
    };
    rep.line(format!("{before} generators reduced to {after}"));
    rep.details = json!({ "generators_before": before, "generators_after": after });
    rep.output = Some(text);
    Ok(rep)
}

fn lot(ctx: &mut Ctx, cmd: &LotCmd) -> Result<Report> {
    let opts = PairingOptions { reduce: true, extension_budget: ctx.budget() };
    match cmd {
        LotCmd::ToD { input, framing } => {
            let c = ctx.cfk(input)?;
            let d = ctx.timed("cfk_to_cfd", || cfk_to_cfd(&c, *framing))?;
            let mut rep = Report::new("lot to-d");
            rep.line(format!("{} generators at framing {framing}", d.len()));
            rep.details = json!({ "framing": framing, "generators": d.len() });
            rep.output = Some(d.serialize());
            Ok(rep)
        }
        LotCmd::ToCfk { input, no_reduce } => {
            let d = ctx.typed(input)?;
            let opts = PairingOptions { reduce: !no_reduce, ..opts };
            let c = ctx.timed("cfd_to_cfk", || cfd_to_cfk_with(&d, opts))?;
            let mut rep = Report::new("lot to-cfk");
            rep.line(format!("{} generators", c.len()));
            rep.details = json!({ "generators": c.len() });
            rep.output = Some(c.serialize());
            Ok(rep)
        }
        LotCmd::Roundtrip { input, framing } => {
            let c = ctx.cfk(input)?;
            let red = reduce(&c).complex;
            let d = ctx.timed("cfk_to_cfd", || cfk_to_cfd(&red, *framing))?;
            let back = ctx.timed("cfd_to_cfk", || cfd_to_cfk_with(&d, opts))?;
            let iso = ctx.timed("iso_cfk", || iso_cfk(&red, &back))?;
            let mut rep = Report::new("lot roundtrip");
            rep.line(format!("framing {framing}: {} generators, type D has {}", red.len(), d.len()));
            rep.details = json!({ "framing": framing, "type_d_generators": d.len(), "generators": back.len() });
            let witness = iso.as_ref().map(|f| Value::String(map_text(&red, &back, f)));
            rep.verdict(iso.is_some(), witness);
            rep.output = Some(back.serialize());
            Ok(rep)
        }
    }
}

fn box_cmd(ctx: &mut Ctx, bimodule: &str, target: &str, kind: TargetKind, reduce: bool) -> Result<Report> {
    let b = ctx.typeda(bimodule)?;
    let mut rep = Report::new("box");
    let (n, text) = match kind {
        TargetKind::D => {
            let d = ctx.typed(target)?;
            let mut out = ctx.timed("box", || box_da_d(&b, &d))?;
            if reduce {
                out = reduce_typed(&out);
            }
            (out.len(), out.serialize())
        }
        TargetKind::Da => {
            let inner = ctx.typeda(target)?;
            let mut out = ctx.timed("box", || box_da_da(&b, &inner))?;
            if reduce {
                out = ctx.timed("reduce", || reduce_da(&out))?;
            }
            (out.len(), out.serialize())
        }
    };
    rep.line(format!("{n} generators"));
    rep.details = json!({ "generators": n });
    rep.output = Some(text);
    Ok(rep)
}

fn extend(ctx: &mut Ctx, input: &str) -> Result<Report> {
    let m = ctx.typed(input)?;
    let budget = ctx.budget();
    let e = ctx.timed("extend", || extend_typed(&m, budget))?;
    let mut rep = Report::new("extend");
    match e {
        Some(e) => {
            rep.line(format!("extended with {} arrows", e.arrows.len()));
            rep.verdict(true, Some(Value::String(e.serialize())));
            rep.output = Some(e.serialize());
        }
        None => {
            rep.line("no extension exists");
            rep.verdict(false, None);
        }
    }
    Ok(rep)
}

/// `x|a,b,c,d` into generator name groups.
fn parse_parts(s: &str) -> Vec<Vec<String>> {
    s.split('|').map(|p| p.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect()).collect()
}

fn part_indices(c: &CfkComplex, parts: &[Vec<String>]) -> Result<Vec<Vec<usize>>> {
    parts
        .iter()
        .map(|p| p.iter().map(|n| c.index_of(n).ok_or_else(|| anyhow!("no generator named {n}"))).collect())
        .collect()
}

fn mul(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.compose(b).expect("square matrices of one size")
}

fn add(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.add(b).expect("square matrices of one size")
}

/// Whether `l` is an idempotent chain map with a correct homotopy to `p`.
fn lift_is_witnessed(c: &CfkComplex, p: &RMatrix, l: &Lifted) -> bool {
    let q = &l.projection;
    mul(q, q) == *q && mul(&c.d, q) == mul(q, &c.d) && boundary_of(c, &l.homotopy) == add(p, q)
}

fn lifted_json(c: &CfkComplex, l: &Lifted) -> Value {
    json!({
        "projection": map_text(c, c, &l.projection),
        "homotopy": homotopy_text(c, &l.homotopy),
        "power": l.power,
    })
}

fn split(ctx: &mut Ctx, cmd: &SplitCmd) -> Result<Report> {
    match cmd {
        SplitCmd::Lift { complex, map } => {
            let c = ctx.cfk(complex)?;
            let text = ctx.loader.read(map)?;
            let p = ChainMap::parse(&text, &c, &c).with_context(|| format!("parsing {map}"))?;
            let l = ctx.timed("lift", || lift_homotopy_projection(&c, &p.matrix))?;
            let mut rep = Report::new("split lift");
            rep.line(format!("power {}", l.power));
            rep.verdict(lift_is_witnessed(&c, &p.matrix, &l), Some(lifted_json(&c, &l)));
            rep.output = Some(map_text(&c, &c, &l.projection));
            Ok(rep)
        }
        SplitCmd::Straighten { complex, maps } => {
            let c = ctx.cfk(complex)?;
            let mut ps = Vec::new();
            for spec in maps {
                let text = ctx.loader.read(spec)?;
                ps.push(ChainMap::parse(&text, &c, &c).with_context(|| format!("parsing {spec}"))?.matrix);
            }
            let fam = ctx.timed("straighten", || straighten_family(&c, &ps))?;
            let mut rep = Report::new("split straighten");
            let members = fam.iter().zip(&ps).all(|(l, p)| lift_is_witnessed(&c, p, l));
            let commute = fam.iter().all(|a| {
                fam.iter().all(|b| mul(&a.projection, &b.projection) == mul(&b.projection, &a.projection))
            });
            rep.line(format!("{} members, commuting: {commute}", fam.len()));
            rep.verdict(members && commute, Some(Value::Array(fam.iter().map(|l| lifted_json(&c, l)).collect())));
            Ok(rep)
        }
        SplitCmd::Blocks { complex, parts, framing } => {
            let c = ctx.cfk(complex)?;
            let names = parse_parts(parts);
            let idx = part_indices(&c, &names)?;
            let summands = ctx.timed("split", || split_by_generators(&c, &idx))?;
            let id = ChainMap::identity(&c);
            let cfk_pattern = ctx.timed("cfk blocks", || block_pattern(&id, &summands, &summands))?;
            let d = ctx.timed("cfk_to_cfd", || cfk_to_cfd(&c, *framing))?;
            let dparts = ctx.timed("typed parts", || typed_parts(&d, &names))?;
            let did = DMorphism::identity(&d);
            let d_pattern = ctx.timed("d blocks", || block_pattern_typed(&d, &d, &did, &dparts, &dparts))?;
            let mut rep = Report::new("split blocks");
            rep.details = json!({ "cfk": cfk_pattern, "type_d": d_pattern });
            rep.line(format!("cfk pattern {cfk_pattern:?}"));
            rep.line(format!("type D pattern {d_pattern:?}"));
            rep.verdict(cfk_pattern == d_pattern, None);
            Ok(rep)
        }
        SplitCmd::Random { complex, parts, trials, density } => {
            let c = ctx.cfk(complex)?;
            let idx = part_indices(&c, &parse_parts(parts))?;
            let summands = split_by_generators(&c, &idx)?;
            let honest: Vec<RMatrix> = summands.iter().map(|s| mul(&s.inclusion, &s.projection)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.cli.seed);
            let mut failures = Vec::new();
            let t = Instant::now();
            for trial in 0..*trials {
                let k = random_homotopy(&c, &mut rng, *density);
                let perturbed: Vec<RMatrix> = honest
                    .iter()
                    .map(|p| {
                        let h = random_homotopy(&c, &mut rng, *density);
                        Ok(add(&conjugate_by_homotopy(&c, p, &k)?, &boundary_of(&c, &h)))
                    })
                    .collect::<lotkit::Result<_>>()?;
                for (i, p) in perturbed.iter().enumerate() {
                    match lift_homotopy_projection(&c, p) {
                        Ok(l) if lift_is_witnessed(&c, p, &l) => {}
                        Ok(_) => failures.push(format!("trial {trial}: lift of member {i} has no valid witness")),
                        Err(e) => failures.push(format!("trial {trial}: lift of member {i}: {e}")),
                    }
                }
                match straighten_family(&c, &perturbed) {
                    Ok(fam) if fam.iter().zip(&perturbed).all(|(l, p)| lift_is_witnessed(&c, p, l)) => {}
                    Ok(_) => failures.push(format!("trial {trial}: straightened family lacks witnesses")),
                    Err(e) => failures.push(format!("trial {trial}: straighten: {e}")),
                }
            }
            ctx.timings.insert("trials".into(), t.elapsed().as_millis());
            let mut rep = Report::new("split random");
            rep.line(format!("{trials} trials with seed {}", ctx.cli.seed));
            for f in &failures {
                rep.line(f.clone());
            }
            rep.details = json!({ "trials": trials, "seed": ctx.cli.seed, "failures": failures });
            rep.verdict(failures.is_empty(), None);
            Ok(rep)
        }
    }
}

fn iota(ctx: &mut Ctx, cmd: &IotaCmd) -> Result<Report> {
    match cmd {
        IotaCmd::Validate { complex, iota } => {
            let c = ctx.cfk(complex)?;
            let i = ctx.iota(iota, &c)?;
            iota_report(&c, &i)
        }
        IotaCmd::Hat { complex, iota } => {
            let c = ctx.cfk(complex)?;
            let i = ctx.iota(iota, &c)?;
            let h = ctx.timed("hat", || hat_package(&c, &i))?;
            let mut rep = Report::new("iota hat");
            rep.line(format!("hat rank {}", h.rank));
            rep.details = json!({
                "rank": h.rank,
                "iota": f2_rows(&h.iota),
                "phi": f2_rows(&h.phi),
                "psi": f2_rows(&h.psi),
            });
            rep.verdict(h.identities_hold(), None);
            Ok(rep)
        }
        IotaCmd::Isolate { complex, parts } => {
            let c = ctx.cfk(complex)?;
            let split = match parts {
                Some(p) => part_indices(&c, &parse_parts(p))?,
                None => Vec::new(),
            };
            let iso = ctx.timed("isolate", || iota_isolation(&c, &split, None))?;
            let names: Vec<&str> = iso.iter().map(|&g| c.names[g].as_str()).collect();
            let mut rep = Report::new("iota isolate");
            rep.line(format!("isolated: {}", names.join(" ")));
            rep.details = json!({ "isolated": names });
            Ok(rep)
        }
        IotaCmd::Nonsimple { complex, v1, v2, iota } => {
            let c = ctx.cfk(complex)?;
            let find = |n: &str| c.index_of(n).ok_or_else(|| anyhow!("no generator named {n}"));
            let (a, b) = (find(v1)?, find(v2)?);
            let ev = match iota {
                Some(spec) => IotaEvidence::Explicit(ctx.iota(spec, &c)?),
                None => IotaEvidence::Isolated(iota_isolation(&c, &[], None)?),
            };
            let v = ctx.timed("nonsimple", || nonsimple_check(&c, &ev, a, b))?;
            let mut rep = Report::new("iota nonsimple");
            for r in &v.reasons {
                rep.line(r.clone());
            }
            rep.details = json!({ "reasons": v.reasons });
            rep.verdict(v.holds, None);
            Ok(rep)
        }
        IotaCmd::Solve { complex, max_basis } => {
            let c = ctx.cfk(complex)?;
            let found = ctx.timed("solve", || solve_iota(&c, *max_basis))?;
            let mut rep = Report::new("iota solve");
            match found {
                Some(i) => {
                    let r = validate_iota(&c, &i);
                    let witness = r.sarkar_homotopy.as_ref().map(|h| Value::String(homotopy_text(&c, h)));
                    rep.verdict(r.is_valid(), witness);
                    rep.output = Some(i.serialize(&c));
                }
                None => {
                    rep.line("no involution within the search bound");
                    rep.verdict(false, None);
                }
            }
            Ok(rep)
        }
    }
}

fn curve(ctx: &mut Ctx, cmd: &CurveCmd) -> Result<Report> {
    match cmd {
        CurveCmd::FromD { input } => {
            let d = ctx.typed(input)?;
            let c = ctx.timed("d_to_curve", || d_to_curve(&d))?;
            let mut rep = Report::new("curve from-d");
            rep.line(format!("{} components, {} axis intersections", c.components.len(), c.axis_intersections()));
            rep.details = json!({ "components": c.components.len(), "axis_intersections": c.axis_intersections() });
            rep.output = Some(c.serialize());
            Ok(rep)
        }
        CurveCmd::ToD { input, extended } => {
            let c = ctx.curve(input)?;
            let d = ctx.timed("curve_to_d", || if *extended { curve_to_extended_d(&c) } else { curve_to_d(&c) })?;
            let mut rep = Report::new("curve to-d");
            rep.line(format!("{} generators", d.len()));
            rep.details = json!({ "generators": d.len() });
            rep.output = Some(d.serialize());
            Ok(rep)
        }
        CurveCmd::Cable { input, p, q } => {
            let c = ctx.curve(input)?;
            let out = ctx.timed("cable", || cable_curve(&c, *p, *q))?;
            let mut rep = Report::new("curve cable");
            rep.line(format!("({p}, {q}) cable: {} axis intersections", out.axis_intersections()));
            rep.details = json!({ "p": p, "q": q, "axis_intersections": out.axis_intersections() });
            rep.output = Some(out.serialize());
            Ok(rep)
        }
        CurveCmd::Grade { input } => {
            let c = ctx.curve(input)?;
            let g = ctx.timed("grade", || grade_curve(&c, None))?;
            let mut rep = Report::new("curve grade");
            let tight = c.tightened();
            let mut per = Vec::new();
            for (ci, comp) in tight.components.iter().enumerate() {
                for (k, gr) in g.gradings[ci].iter().enumerate() {
                    let name = comp.name(ci, k);
                    rep.line(format!("{name} {gr}"));
                    per.push(json!({ "crossing": name, "grading": gr.to_string() }));
                }
            }
            rep.details = json!({ "gradings": per, "relative": g.relative, "shift": g.shift });
            Ok(rep)
        }
    }
}

fn cable_family_cmd(ctx: &mut Ctx, n: u32, m: u32) -> Result<Report> {
    let r = ctx.timed("cable_family", || cable_family(n, m))?;
    let c_n = lotkit::corpus::c_n(n);
    let mut rep = Report::new("cable-family");
    let mid = &r.zetas[r.middle];
    rep.line(format!("C_{n} splits as {:?}", r.decomposition));
    rep.line(format!("({m}, -1) cable: {} generators, free summand {}", r.cable.len(), r.x_name));
    for z in &r.zetas {
        rep.line(format!("d {} = U^{} {} + V^{} {}", z.name, z.a, z.y, z.b, z.z));
    }
    rep.line(format!("middle generator {} with exponents ({}, {})", mid.name, mid.a, mid.b));
    rep.line(format!("isolated: {}", r.isolated.join(" ")));
    rep.details = json!({
        "n": n,
        "m": m,
        "decomposition": r.decomposition,
        "cable_generators": r.cable.len(),
        "free_summand": r.x_name,
        "zeta_bidegree": r.zeta_bidegree.to_string(),
        "zetas": r.zetas.iter().map(|z| json!({ "name": z.name, "a": z.a, "b": z.b, "y": z.y, "z": z.z })).collect::<Vec<_>>(),
        "a_increasing": r.a_increasing,
        "b_decreasing": r.b_decreasing,
        "middle": mid.name,
        "isolated": r.isolated,
        "nonsimple": r.nonsimple,
        "nonsimple_reasons": r.nonsimple_reasons,
    });
    let o = lotkit::corpus::unknot();
    let proj = ChainMap::new(r.projection_homotopy.clone(), Bigrading::new(1, 1)).serialize(&c_n, &o);
    rep.verdict(
        r.verdict(),
        Some(json!({ "iota_homotopy": homotopy_text(&c_n, &r.iota_homotopy), "projection_homotopy": proj })),
    );
    rep.output = Some(r.cable.serialize());
    Ok(rep)
}
