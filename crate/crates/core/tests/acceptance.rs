//! One line per acceptance criterion. Runs without the libtest harness so the
//! lines always print; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lotkit::base_algebra::{Bigrading, RElem, RMatrix, RMonomial};
use lotkit::bimodules::{builtin_az, builtin_az_bar, iso_da, reduce_da, box_da_da};
use lotkit::bordered::{
    builtin_identity_da, extend_typed, mor_complex, validate_typed, Curvature, DMorphism, TypeD, DEFAULT_EXTENSION_BUDGET,
};
use lotkit::cable_family::{cable_complex, cable_family};
use lotkit::cfk::{direct_sum, iso_cfk, prefixed, reduce, restrict, sarkar_map, ChainMap, CfkComplex};
use lotkit::corpus;
use lotkit::curves::{cable_curve, cfk_to_curve, curve_to_cfk, d_to_curve};
use lotkit::involution::{solve_iota, validate_iota, IotaMap};
use lotkit::lot::{cfd_to_cfk, cfk_to_cfd, hat_pairing_rank, is_large_framing};
use lotkit::projections::{
    block_pattern, block_pattern_typed, boundary_of, conjugate_by_homotopy, lift_homotopy_projection, random_homotopy,
    identification_morphism, split_by_generators, straighten_family, typed_parts, Lifted,
};
use lotkit::torus_algebra::{alg_mul, basis, central_element, AlgElem, Variant};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn s3() -> CfkComplex {
    let c = corpus::c_n(3);
    let idx: Vec<usize> = ["a", "b", "c", "d"].iter().map(|n| c.index_of(n).unwrap()).collect();
    restrict(&c, &idx)
}

fn c3_plus_s3() -> CfkComplex {
    direct_sum(&corpus::c_n(3), &prefixed(&s3(), "s"))
}

fn corpus_list() -> Vec<(&'static str, CfkComplex)> {
    vec![
        ("unknot", corpus::unknot()),
        ("trefoil", corpus::trefoil()),
        ("figure-eight", corpus::figure_eight()),
        ("C3", corpus::c_n(3)),
        ("C3+S3", c3_plus_s3()),
    ]
}

fn mul(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.compose(b).unwrap()
}

fn add(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.add(b).unwrap()
}

fn algebra() -> Outcome {
    let dims: Vec<usize> = [Variant::Plain, Variant::Extended, Variant::Truncated].iter().map(|&v| basis(v).len()).collect();
    ensure(dims == [8, 18, 12], || format!("dimensions {dims:?}"))?;
    let v = Variant::Extended;
    let bs = basis(v);
    let el = |b| AlgElem::basis(v, b).unwrap();
    let mut triples = 0;
    for &a in &bs {
        for &b in &bs {
            let ab = alg_mul(&el(a), &el(b)).unwrap();
            for &c in &bs {
                let l = alg_mul(&ab, &el(c)).unwrap();
                let r = alg_mul(&el(a), &alg_mul(&el(b), &el(c)).unwrap()).unwrap();
                ensure(l == r, || format!("({a}{b}){c} != {a}({b}{c})"))?;
                triples += 1;
            }
        }
    }
    for v in [Variant::Extended, Variant::Truncated] {
        let u = central_element(v).map_err(|e| e.to_string())?;
        for b in basis(v) {
            let x = AlgElem::basis(v, b).unwrap();
            ensure(alg_mul(&u, &x).unwrap() == alg_mul(&x, &u).unwrap(), || format!("U does not commute with {b}"))?;
        }
        ensure(alg_mul(&u, &u).unwrap().is_zero(), || format!("U^2 != 0 in {v}"))?;
    }
    Ok(format!("dims 8/18/12, {triples} triples associative, U central with U^2 = 0"))
}

fn curvature() -> Outcome {
    let mut checked = 0;
    for (name, c) in corpus_list() {
        for n in [-3, 0, 7] {
            let d = cfk_to_cfd(&c, n).map_err(|e| format!("{name}: {e}"))?;
            let e = extend_typed(&d, DEFAULT_EXTENSION_BUDGET)
                .map_err(|e| format!("{name}: {e}"))?
                .ok_or_else(|| format!("{name} at {n}: no extension"))?;
            ensure(e.variant == Variant::Extended && e.curvature == Curvature::Curved, || {
                format!("{name}: extension is not a curved structure over the extended algebra")
            })?;
            let problems = validate_typed(&e);
            ensure(problems.is_empty(), || format!("{name} at {n}: {problems:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} extended structures satisfy d^2 = U x id"))
}

fn roundtrip() -> Outcome {
    let mut checked = 0;
    for (name, c) in corpus_list() {
        let large = (1..).find(|&n| is_large_framing(&c, n).unwrap()).unwrap() + 5;
        for n in [-3, 0, large] {
            let d = cfk_to_cfd(&c, n).map_err(|e| format!("{name}: {e}"))?;
            let back = cfd_to_cfk(&d).map_err(|e| format!("{name} at {n}: {e}"))?;
            let iso = iso_cfk(&back, &c).map_err(|e| e.to_string())?;
            ensure(iso.is_some(), || format!("{name} at framing {n}: not isomorphic"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} roundtrips isomorphic at framings -3, 0 and large"))
}

fn az() -> Outcome {
    let az = builtin_az();
    let bar = builtin_az_bar();
    let composite = box_da_da(&bar, &az).map_err(|e| e.to_string())?;
    let red = reduce_da(&composite).map_err(|e| e.to_string())?;
    let id = builtin_identity_da(Variant::Plain);
    let iso = iso_da(&red, &id).ok_or_else(|| format!("reduced composite has {} generators, not the identity", red.len()))?;
    Ok(format!("{} generators reduce to {}, matched to the identity by {iso:?}", composite.len(), red.len()))
}

/// `c` plus a copy with primed names and gradings shifted by (1, 1).
fn with_shifted_copy(c: &CfkComplex) -> CfkComplex {
    let mut copy = prefixed(c, "");
    copy.names = c.names.iter().map(|n| format!("{n}'")).collect();
    copy.gradings = c.gradings.iter().map(|g| g.add(Bigrading::new(1, 1))).collect();
    direct_sum(c, &copy)
}

/// A trefoil together with a copy shifted by (1, 1).
fn shifted_pair() -> CfkComplex {
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

fn named_parts(c: &CfkComplex, parts: &[&[&str]]) -> Vec<Vec<usize>> {
    parts.iter().map(|p| p.iter().map(|n| c.index_of(n).unwrap()).collect()).collect()
}

fn witnessed(c: &CfkComplex, p: &RMatrix, l: &Lifted) -> bool {
    let q = &l.projection;
    mul(q, q) == *q && mul(&c.d, q) == mul(q, &c.d) && boundary_of(c, &l.homotopy) == add(p, q)
}

fn projections() -> Outcome {
    let c3 = corpus::c_n(3);
    let cs = c3_plus_s3();
    let sp = shifted_pair();
    let tpo = direct_sum(&sp, &corpus::unknot());
    let cc = with_shifted_copy(&c3);
    let pool = [
        (named_parts(&c3, &[&["x"], &["a", "b", "c", "d"]]), c3),
        (named_parts(&cs, &[&["x"], &["a", "b", "c", "d"], &["sa", "sb", "sc", "sd"]]), cs),
        (named_parts(&sp, &[&["a", "b", "c"], &["a'", "b'", "c'"]]), sp),
        (named_parts(&tpo, &[&["a", "b", "c", "a'", "b'", "c'"], &["x"]]), tpo),
        (named_parts(&cc, &[&["x", "x'"], &["a", "b", "c", "d", "a'", "b'", "c'", "d'"]]), cc),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut lifts, mut nontrivial) = (0, 0);
    for trial in 0..200 {
        let (parts, c) = &pool[rng.gen_range(0..pool.len())];
        let honest: Vec<RMatrix> = split_by_generators(c, parts)
            .map_err(|e| e.to_string())?
            .iter()
            .map(|s| mul(&s.inclusion, &s.projection))
            .collect();
        let k = random_homotopy(c, &mut rng, 0.5);
        let mut family = Vec::new();
        for p in &honest {
            let h = random_homotopy(c, &mut rng, 0.5);
            let q = add(&conjugate_by_homotopy(c, p, &k).map_err(|e| e.to_string())?, &boundary_of(c, &h));
            if mul(&q, &q) != q {
                nontrivial += 1;
            }
            let l = lift_homotopy_projection(c, &q).map_err(|e| format!("trial {trial}: {e}"))?;
            ensure(witnessed(c, &q, &l), || format!("trial {trial}: lift without a valid witness"))?;
            lifts += 1;
            family.push(q);
        }
        let fam = straighten_family(c, &family).map_err(|e| format!("trial {trial}: {e}"))?;
        for (l, q) in fam.iter().zip(&family) {
            ensure(witnessed(c, q, l), || format!("trial {trial}: straightened member without a valid witness"))?;
        }
        for a in &fam {
            for b in &fam {
                let (pa, pb) = (&a.projection, &b.projection);
                ensure(mul(pa, pb) == mul(pb, pa), || format!("trial {trial}: straightened members do not commute"))?;
            }
        }
    }
    ensure(nontrivial * 4 >= lifts, || format!("only {nontrivial} of {lifts} perturbations were non-idempotent"))?;
    Ok(format!("200 trials, {lifts} lifts ({nontrivial} from non-idempotent maps), all families straightened"))
}

fn involution() -> Outcome {
    let c = corpus::c_n(3);
    let one = RMonomial::One;
    let iota = IotaMap::from_entries(
        &c,
        &[("a", "a", one), ("x", "x", one), ("x", "d", one), ("b", "c", one), ("c", "b", one), ("d", "d", one)],
    )
    .map_err(|e| e.to_string())?;
    let r = validate_iota(&c, &iota);
    ensure(r.is_valid(), || format!("C3: {:?}", r.failures))?;
    let h = r.sarkar_homotopy.ok_or("C3: no homotopy")?;
    let sq = mul(&iota.matrix, &iota.matrix);
    ensure(add(&sq, &sarkar_map(&c).matrix) == boundary_of(&c, &h), || "C3: homotopy does not check".into())?;

    let f8 = corpus::figure_eight();
    let i8 = solve_iota(&f8, 20).map_err(|e| e.to_string())?.ok_or("figure-eight: no involution found")?;
    let r8 = validate_iota(&f8, &i8);
    ensure(r8.is_valid(), || format!("figure-eight: {:?}", r8.failures))?;
    let h8 = r8.sarkar_homotopy.ok_or("figure-eight: no homotopy")?;
    ensure(add(&mul(&i8.matrix, &i8.matrix), &sarkar_map(&f8).matrix) == boundary_of(&f8, &h8), || {
        "figure-eight: homotopy does not check".into()
    })?;
    Ok("C3 table valid with explicit homotopy; figure-eight involution solved and valid".into())
}

fn cabling() -> Outcome {
    let o = corpus::unknot();
    let line = cfk_to_curve(&o).map_err(|e| e.to_string())?;
    let t = cable_curve(&line, 2, 3).map_err(|e| e.to_string())?;
    let tx = reduce(&curve_to_cfk(&t).map_err(|e| e.to_string())?).complex;
    ensure(iso_cfk(&tx, &corpus::trefoil()).unwrap().is_some(), || format!("(2,3) cable:\n{}", tx.serialize()))?;
    for m in [3, 5] {
        let cx = cable_complex(&o, m, -1).map_err(|e| e.to_string())?;
        ensure(iso_cfk(&cx, &o).unwrap().is_some(), || format!("({m},-1) cable:\n{}", cx.serialize()))?;
    }
    Ok("unknot (2,3) cable is the trefoil; (3,-1) and (5,-1) cables are the unknot".into())
}

fn cable_family_check() -> Outcome {
    let t = Instant::now();
    let mut lines = Vec::new();
    for (n, m) in [(3u32, 3u32), (3, 5), (5, 3)] {
        let r = cable_family(n, m).map_err(|e| format!("({n},{m}): {e}"))?;
        let k = 2 - 2 * i64::from(n);
        ensure(r.decomposition == [1, 4], || format!("({n},{m}): C_n splits as {:?}", r.decomposition))?;
        ensure(r.zeta_bidegree == Bigrading::new(k, k), || format!("({n},{m}): bidegree {}", r.zeta_bidegree))?;
        ensure(r.zetas.len() == m as usize, || format!("({n},{m}): {} zetas", r.zetas.len()))?;
        ensure(r.a_increasing && r.b_decreasing, || format!("({n},{m}): exponents {:?}", r.zetas))?;
        let mid = &r.zetas[(m as usize - 1) / 2];
        let half = m.div_ceil(2);
        ensure((mid.a, mid.b) == (half, half), || format!("({n},{m}): middle exponents ({}, {})", mid.a, mid.b))?;
        ensure(r.isolated.contains(&mid.name) && r.isolated.contains(&r.x_name), || {
            format!("({n},{m}): isolated {:?}", r.isolated)
        })?;
        ensure(r.nonsimple, || format!("({n},{m}): {:?}", r.nonsimple_reasons))?;
        ensure(r.verdict(), || format!("({n},{m}): verdict false"))?;
        lines.push(format!("({n},{m}) middle ({half},{half})"));
    }
    let dt = t.elapsed();
    ensure(dt < Duration::from_secs(120), || format!("took {dt:?}"))?;
    Ok(format!("{} nonsimple in {:.1?}", lines.join(", "), dt))
}

fn counting() -> Outcome {
    let mut out = Vec::new();
    for (name, c) in corpus_list() {
        let d = cfk_to_cfd(&c, 0).map_err(|e| e.to_string())?;
        let curve = d_to_curve(&d).map_err(|e| format!("{name}: {e}"))?;
        let (i, r) = (curve.axis_intersections(), hat_pairing_rank(&d).map_err(|e| e.to_string())?);
        ensure(i == r, || format!("{name}: {i} intersections, hat rank {r}"))?;
        out.push(format!("{name} {i}"));
    }
    Ok(out.join(", "))
}

/// Maps between split corpus complexes: each source part goes to the target
/// part at the same position in `occupies`, generator names matching.
fn blocks() -> Outcome {
    let o = corpus::unknot();
    let c3 = corpus::c_n(3);
    let cs = c3_plus_s3();
    let x: &[&str] = &["x"];
    let s: &[&str] = &["a", "b", "c", "d"];
    let ss: &[&str] = &["sa", "sb", "sc", "sd"];
    let cases: [(&CfkComplex, Vec<&[&str]>, &CfkComplex, Vec<&[&str]>, Vec<usize>); 3] = [
        (&o, vec![x], &c3, vec![x, s], vec![0]),
        (&c3, vec![x, s], &cs, vec![x, s, ss], vec![0, 1]),
        (&o, vec![x], &cs, vec![x, s, ss], vec![0]),
    ];
    let mut checked = 0;
    for (src, sparts, tgt, tparts, occupies) in cases {
        let idx = |c: &CfkComplex, parts: &[&[&str]]| named_parts(c, parts);
        let names = |parts: &[&[&str]]| -> Vec<Vec<String>> {
            parts.iter().map(|p| p.iter().map(|n| n.to_string()).collect()).collect()
        };
        let s_split = split_by_generators(src, &idx(src, &sparts)).map_err(|e| e.to_string())?;
        let t_split = split_by_generators(tgt, &idx(tgt, &tparts)).map_err(|e| e.to_string())?;
        let m = cfk_to_cfd(src, 2).map_err(|e| e.to_string())?;
        let n = cfk_to_cfd(tgt, 2).map_err(|e| e.to_string())?;
        let mp = typed_parts(&m, &names(&sparts)).map_err(|e| e.to_string())?;
        let np = typed_parts(&n, &names(&tparts)).map_err(|e| e.to_string())?;
        // Type D generators of the source reappear under the same names.
        let pairs: Vec<(usize, usize)> = m
            .gens
            .iter()
            .enumerate()
            .map(|(i, g)| n.index_of(&g.name).map(|j| (i, j)).ok_or(format!("{} missing in target", g.name)))
            .collect::<Result<_, _>>()?;
        let closed = |a: &TypeD, b: &TypeD, f: &DMorphism| -> Result<bool, String> {
            let mc = mor_complex(a, b).map_err(|e| e.to_string())?;
            Ok(mc.is_cycle(&mc.to_vector(f)))
        };

        let mut inc = RMatrix::zero(tgt.len(), src.len());
        for (j, name) in src.names.iter().enumerate() {
            inc.set(tgt.index_of(name).ok_or("source name missing in target")?, j, RElem::one());
        }
        let want: Vec<Vec<bool>> =
            (0..tparts.len()).map(|i| (0..sparts.len()).map(|j| occupies[j] == i).collect()).collect();
        let transpose = |p: &Vec<Vec<bool>>| -> Vec<Vec<bool>> {
            (0..p[0].len()).map(|j| p.iter().map(|r| r[j]).collect()).collect()
        };

        let cfk_inc = block_pattern(&ChainMap::new(inc.clone(), Bigrading::default()), &s_split, &t_split)
            .map_err(|e| e.to_string())?;
        let d_inc = identification_morphism(&m, &n, &pairs).map_err(|e| e.to_string())?;
        ensure(closed(&m, &n, &d_inc)?, || "typed inclusion is not a morphism".into())?;
        let typed_inc = block_pattern_typed(&m, &n, &d_inc, &mp, &np).map_err(|e| e.to_string())?;
        ensure(cfk_inc == want, || format!("inclusion pattern {cfk_inc:?}, expected {want:?}"))?;
        ensure(cfk_inc == typed_inc, || format!("inclusion: {cfk_inc:?} vs {typed_inc:?}"))?;

        let cfk_proj = block_pattern(&ChainMap::new(inc.transpose(), Bigrading::default()), &t_split, &s_split)
            .map_err(|e| e.to_string())?;
        let back: Vec<(usize, usize)> = pairs.iter().map(|&(i, j)| (j, i)).collect();
        let d_proj = identification_morphism(&n, &m, &back).map_err(|e| e.to_string())?;
        ensure(closed(&n, &m, &d_proj)?, || "typed projection is not a morphism".into())?;
        let typed_proj = block_pattern_typed(&n, &m, &d_proj, &np, &mp).map_err(|e| e.to_string())?;
        ensure(cfk_proj == transpose(&want), || format!("projection pattern {cfk_proj:?}"))?;
        ensure(cfk_proj == typed_proj, || format!("projection: {cfk_proj:?} vs {typed_proj:?}"))?;
        checked += 2;
    }
    Ok(format!("{checked} inclusions and projections among O, C3 and C3+S3 have matching patterns"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("algebra exhaustives", algebra),
        ("extended curvature", curvature),
        ("LOT roundtrip", roundtrip),
        ("AZ composite is the identity", az),
        ("randomized projection lifting and straightening", projections),
        ("involutions", involution),
        ("cabling oracles", cabling),
        ("cable family (3,3), (3,5), (5,3)", cable_family_check),
        ("counting principle", counting),
        ("block-pattern transfer", blocks),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = f();
        let dt = t.elapsed();
        match out {
            Ok(detail) => println!("criterion {:>2} PASS [{dt:.2?}] {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{dt:.2?}] {name}: {why}", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
