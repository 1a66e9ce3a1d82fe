use proptest::prelude::*;

use lotkit::base_algebra::{Bigrading, RMatrix, RMonomial};
use lotkit::bimodules::builtin_az;
use lotkit::bordered::{
    box_da_d, direct_sum_typed, extend_typed, iso_typed, mor_complex, reduce_typed, validate_typed, TypeD,
    DEFAULT_EXTENSION_BUDGET,
};
use lotkit::cfk::{
    direct_sum, dual, iso_cfk, is_chain_map, phi_psi, prefixed, reduce, restrict, tensor_connected_sum, validate_cfk,
    CfkComplex,
};
use lotkit::corpus;
use lotkit::curves::{cable_curve, cfk_to_curve, curve_to_cfk, curve_to_d, d_to_curve, MultiCurve};
use lotkit::involution::{
    c_n_iota, check_equivariant_splitting, conjugate_cfk, iota_isolation, validate_iota, IotaMap,
};
use lotkit::lot::{cfd_to_cfk, cfk_to_cfd, hat_pairing_rank};
use lotkit::projections::{boundary_of, lift_homotopy_projection, random_homotopy};
use rand_chacha::rand_core::SeedableRng;

/// The staircase with the given step lengths, normalised so the first
/// generator has grU = 0 and the last has grV = 0.
fn staircase(steps: &[u32]) -> CfkComplex {
    let mut gr = vec![Bigrading::new(0, 0)];
    for (i, &s) in steps.iter().enumerate() {
        let prev = gr[i];
        let s = i64::from(s);
        gr.push(if i % 2 == 0 { prev.add(Bigrading::new(1 - 2 * s, 1)) } else { prev.add(Bigrading::new(-1, 2 * s - 1)) });
    }
    let shift = -gr.last().unwrap().gr_v;
    let names: Vec<String> = (0..gr.len()).map(|i| format!("s{i}")).collect();
    let gens: Vec<(&str, i64, i64)> = names.iter().zip(&gr).map(|(n, g)| (n.as_str(), g.gr_u, g.gr_v + shift)).collect();
    let mut arrows = Vec::new();
    for (i, &s) in steps.iter().enumerate() {
        if i % 2 == 0 {
            arrows.push((names[i + 1].as_str(), names[i].as_str(), RMonomial::u(s)));
        } else {
            arrows.push((names[i].as_str(), names[i + 1].as_str(), RMonomial::v(s)));
        }
    }
    CfkComplex::from_parts(&gens, &arrows).expect("staircase")
}

/// The acyclic box of `C_n`, shifted diagonally.
fn box_piece(n: u32, shift: i64, prefix: &str) -> CfkComplex {
    let c = corpus::c_n(n);
    let mut b = prefixed(&restrict(&c, &[1, 2, 3, 4]), prefix);
    for g in b.gradings.iter_mut() {
        *g = g.add(Bigrading::new(shift, shift));
    }
    b
}

fn arb_staircase() -> impl Strategy<Value = CfkComplex> {
    (prop::collection::vec(1u32..4, 0..3), any::<bool>()).prop_map(|(half, mirror)| {
        let mut steps = half.clone();
        steps.extend(half.iter().rev());
        let s = staircase(&steps);
        if mirror {
            dual(&s)
        } else {
            s
        }
    })
}

/// A staircase plus up to two shifted boxes.
fn arb_knot() -> impl Strategy<Value = CfkComplex> {
    (arb_staircase(), prop::collection::vec((1u32..4, -2i64..3), 0..3)).prop_map(|(s, boxes)| {
        boxes
            .iter()
            .enumerate()
            .fold(s, |acc, (k, &(n, sh))| direct_sum(&acc, &box_piece(n, sh, &format!("p{k}"))))
    })
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generated_complexes_are_valid_and_roundtrip_as_text(c in arb_knot()) {
        prop_assert!(validate_cfk(&c).is_empty(), "{:?}", validate_cfk(&c));
        let back = CfkComplex::parse(&c.serialize()).unwrap();
        prop_assert_eq!(back.serialize(), c.serialize());
    }

    #[test]
    fn lot_roundtrip(c in arb_knot(), n in -4i64..9) {
        let d = cfk_to_cfd(&c, n).unwrap();
        prop_assert!(validate_typed(&d).is_empty());
        prop_assert_eq!(d.idem_count(0), c.len());
        prop_assert_eq!(hat_pairing_rank(&d).unwrap(), c.hat_rank());
        let text = d.serialize();
        prop_assert_eq!(TypeD::parse(&text).unwrap().serialize(), text);
        let back = cfd_to_cfk(&d).unwrap();
        prop_assert!(iso_cfk(&back, &c).unwrap().is_some());
    }

    #[test]
    fn extensions_are_curved_structures(c in arb_knot(), n in -3i64..6) {
        let d = cfk_to_cfd(&c, n).unwrap();
        let e = extend_typed(&d, DEFAULT_EXTENSION_BUDGET).unwrap().expect("extendable");
        prop_assert!(validate_typed(&e).is_empty(), "{:?}", validate_typed(&e));
    }

    #[test]
    fn curves_recover_type_d(c in arb_knot(), n in -3i64..6) {
        let d = reduce_typed(&cfk_to_cfd(&c, n).unwrap());
        let curve = d_to_curve(&d).unwrap();
        let text = curve.serialize();
        prop_assert_eq!(MultiCurve::parse(&text).unwrap().serialize(), text);
        prop_assert_eq!(curve.axis_intersections(), hat_pairing_rank(&d).unwrap());
        let again = reduce_typed(&curve_to_d(&curve).unwrap());
        prop_assert!(iso_typed(&d, &again).unwrap().is_some());
    }

    #[test]
    fn trivial_cable_is_the_identity(c in arb_staircase()) {
        let curve = cfk_to_curve(&c).unwrap();
        let same = curve_to_cfk(&cable_curve(&curve, 1, 0).unwrap()).unwrap();
        prop_assert!(iso_cfk(&same, &c).unwrap().is_some());
    }

    #[test]
    fn dual_and_conjugate_are_involutions(c in arb_knot()) {
        prop_assert_eq!(dual(&dual(&c)), c.clone());
        prop_assert_eq!(conjugate_cfk(&conjugate_cfk(&c)), c.clone());
        let t = tensor_connected_sum(&corpus::unknot(), &c);
        prop_assert!(iso_cfk(&t, &c).unwrap().is_some());
    }

    #[test]
    fn reduction_maps_are_homotopy_inverse(c in arb_knot(), extra in 1u32..3) {
        // Add a cancelling pair so that reduction has work to do.
        let pair = CfkComplex::from_parts(&[("y", 3, 1), ("z", 2, 0)], &[("y", "z", RMonomial::One)]).unwrap();
        let big = (0..extra).fold(c.clone(), |acc, k| direct_sum(&acc, &prefixed(&pair, &format!("q{k}"))));
        let r = reduce(&big);
        prop_assert_eq!(r.complex.len(), c.len());
        prop_assert_eq!(r.f.compose(&r.g).unwrap(), RMatrix::identity(c.len()));
        let gf = r.g.compose(&r.f).unwrap();
        let lhs = RMatrix::identity(big.len()).add(&gf).unwrap();
        prop_assert_eq!(lhs, boundary_of(&big, &r.h));
        prop_assert!(iso_cfk(&r.complex, &c).unwrap().is_some());
    }

    #[test]
    fn phi_and_psi_are_chain_maps(c in arb_knot()) {
        let (phi, psi) = phi_psi(&c);
        prop_assert!(is_chain_map(&c, &c, &phi.matrix).unwrap());
        prop_assert!(is_chain_map(&c, &c, &psi.matrix).unwrap());
    }

    #[test]
    fn mor_complex_squares_to_zero(a in arb_staircase(), b in arb_staircase(), n in -2i64..4) {
        let m = cfk_to_cfd(&a, n).unwrap();
        let k = cfk_to_cfd(&b, n).unwrap();
        let mc = mor_complex(&m, &k).unwrap();
        prop_assert_eq!(mc.d.mul(&mc.d).unwrap().nnz(), 0);
    }

    #[test]
    fn box_respects_direct_sums(a in arb_staircase(), b in arb_staircase(), n in -2i64..4) {
        let az = builtin_az();
        let d1 = cfk_to_cfd(&a, n).unwrap();
        let d2 = cfk_to_cfd(&prefixed(&b, "t"), n).unwrap();
        let whole = reduce_typed(&box_da_d(&az, &direct_sum_typed(&d1, &d2).unwrap()).unwrap());
        let parts = direct_sum_typed(
            &reduce_typed(&box_da_d(&az, &d1).unwrap()),
            &reduce_typed(&box_da_d(&az, &d2).unwrap()),
        )
        .unwrap();
        prop_assert!(iso_typed(&whole, &parts).unwrap().is_some());
    }

    #[test]
    fn perturbed_identity_lifts(c in arb_knot(), seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = random_homotopy(&c, &mut rng, 0.5);
        let q = RMatrix::identity(c.len()).add(&boundary_of(&c, &h)).unwrap();
        let l = lift_homotopy_projection(&c, &q).unwrap();
        let p = &l.projection;
        prop_assert_eq!(p.compose(p).unwrap(), p.clone());
        prop_assert_eq!(boundary_of(&c, &l.homotopy), q.add(p).unwrap());
    }

    #[test]
    fn involution_facts_on_boxes(n in 1u32..8) {
        let c = corpus::c_n(n);
        let iota = c_n_iota(n);
        let r = validate_iota(&c, &iota);
        prop_assert!(r.is_valid(), "{:?}", r.failures);
        // Conjugation carries valid involutions to valid involutions.
        let cc = conjugate_cfk(&c);
        prop_assert!(validate_iota(&cc, &iota.conjugate()).is_valid());
        // The trivial splitting is always equivariant.
        let split = check_equivariant_splitting(&c, &iota, &[RMatrix::identity(c.len())]).unwrap();
        prop_assert!(split.equivariant());
        // Isolated generators are never mixed by the explicit involution.
        let hat = iota.matrix.hat();
        for g in iota_isolation(&c, &[], None).unwrap() {
            for h in (0..c.len()).filter(|&h| h != g) {
                prop_assert!(!hat.get(h, g) && !hat.get(g, h), "{} mixed with {}", c.names[g], c.names[h]);
            }
        }
    }

    #[test]
    fn invalid_involutions_stay_invalid_under_conjugation(n in 2u32..6, drop in 0usize..6) {
        let c = corpus::c_n(n);
        let mut iota = c_n_iota(n);
        let entries: Vec<(usize, usize)> = iota.matrix.entries().map(|(i, j, _)| (i, j)).collect();
        let (i, j) = entries[drop % entries.len()];
        iota.matrix.set(i, j, Default::default());
        let broken = IotaMap::new(iota.matrix.clone());
        let cc = conjugate_cfk(&c);
        prop_assert_eq!(validate_iota(&c, &broken).is_valid(), validate_iota(&cc, &broken.conjugate()).is_valid());
    }
}
