//! The builtin data library: knot complexes, involutions and bimodules
//! embedded at compile time under their relative paths.

use crate::base_algebra::RMonomial;

/// `(relative path, contents)` for every builtin file.
pub const FILES: &[(&str, &str)] = &[
    ("cfk/unknot.cfk", include_str!("../data/cfk/unknot.cfk")),
    ("cfk/trefoil.cfk", include_str!("../data/cfk/trefoil.cfk")),
    ("cfk/mirror_trefoil.cfk", include_str!("../data/cfk/mirror_trefoil.cfk")),
    ("cfk/figure_eight.cfk", include_str!("../data/cfk/figure_eight.cfk")),
    ("cfk/c_n.cfk", include_str!("../data/cfk/c_n.cfk")),
    ("iota/trefoil.iota", include_str!("../data/iota/trefoil.iota")),
    ("iota/figure_eight.iota", include_str!("../data/iota/figure_eight.iota")),
    ("iota/c_n.iota", include_str!("../data/iota/c_n.iota")),
    ("bimodules/identity.da", include_str!("../data/bimodules/identity.da")),
    ("bimodules/az.da", include_str!("../data/bimodules/az.da")),
    ("bimodules/az_bar.da", include_str!("../data/bimodules/az_bar.da")),
];

pub fn builtin(path: &str) -> Option<&'static str> {
    FILES.iter().find(|(p, _)| *p == path).map(|(_, s)| *s)
}

/// Fill the `{n}`-style placeholders of a parametric file.
pub fn instantiate(template: &str, n: u32) -> String {
    let k = i64::from(n);
    template
        .replace("{U^n}", &RMonomial::u(n).to_string())
        .replace("{V^n}", &RMonomial::v(n).to_string())
        .replace("{1-2n}", &(1 - 2 * k).to_string())
        .replace("{2-2n}", &(2 - 2 * k).to_string())
        .replace("{n}", &n.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bordered::{builtin_identity_da, TypeDA};
    use crate::cfk::CfkComplex;
    use crate::corpus;
    use crate::involution::{c_n_iota, validate_iota, IotaMap};
    use crate::torus_algebra::Variant;

    fn cfk(path: &str) -> CfkComplex {
        CfkComplex::parse(builtin(path).unwrap()).unwrap()
    }

    #[test]
    fn every_file_has_a_header() {
        for (p, s) in FILES {
            assert!(s.starts_with("# "), "{p}");
        }
    }

    #[test]
    fn complexes_match_the_corpus() {
        let same = |a: &CfkComplex, b: &CfkComplex| a.names == b.names && a.gradings == b.gradings && a.d == b.d;
        assert!(same(&cfk("cfk/unknot.cfk"), &corpus::unknot()));
        assert!(same(&cfk("cfk/trefoil.cfk"), &corpus::trefoil()));
        assert!(same(&cfk("cfk/mirror_trefoil.cfk"), &corpus::mirror_trefoil()));
        assert!(same(&cfk("cfk/figure_eight.cfk"), &corpus::figure_eight()));
        for n in [1, 3, 5, 9] {
            let c = CfkComplex::parse(&instantiate(builtin("cfk/c_n.cfk").unwrap(), n)).unwrap();
            assert!(same(&c, &corpus::c_n(n)), "n={n}");
        }
    }

    #[test]
    fn involutions_validate() {
        let t = corpus::trefoil();
        let iota = IotaMap::parse(builtin("iota/trefoil.iota").unwrap(), &t).unwrap();
        assert!(validate_iota(&t, &iota).is_valid());
        let f = corpus::figure_eight();
        let iota = IotaMap::parse(builtin("iota/figure_eight.iota").unwrap(), &f).unwrap();
        assert_eq!(iota, c_n_iota(1));
        for n in [3, 5] {
            let c = corpus::c_n(n);
            let iota = IotaMap::parse(builtin("iota/c_n.iota").unwrap(), &c).unwrap();
            assert_eq!(iota, c_n_iota(n));
        }
    }

    #[test]
    fn identity_file_matches() {
        let m = TypeDA::parse(builtin("bimodules/identity.da").unwrap()).unwrap();
        let id = builtin_identity_da(Variant::Plain);
        assert_eq!((m.gens, m.ops), (id.gens, id.ops));
    }
}
