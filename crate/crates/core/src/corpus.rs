//! Small builtin complexes used by tests, examples and the CLI.

use crate::base_algebra::RMonomial;
use crate::cfk::CfkComplex;

pub fn unknot() -> CfkComplex {
    CfkComplex::from_parts(&[("x", 0, 0)], &[]).expect("well formed")
}

/// The right-handed trefoil, τ = 1.
pub fn trefoil() -> CfkComplex {
    CfkComplex::from_parts(
        &[("a", 0, -2), ("b", -1, -1), ("c", -2, 0)],
        &[("b", "a", RMonomial::U(1)), ("b", "c", RMonomial::V(1))],
    )
    .expect("well formed")
}

/// The left-handed trefoil, τ = -1.
pub fn mirror_trefoil() -> CfkComplex {
    CfkComplex::from_parts(
        &[("a", 0, 2), ("b", 1, 1), ("c", 2, 0)],
        &[("a", "b", RMonomial::U(1)), ("c", "b", RMonomial::V(1))],
    )
    .expect("well formed")
}

/// `C_n`: an unknot summand `x` plus a box of side `n` whose bottom corner
/// `d` sits beside `x` in bidegree (0, 0), so that `x ↦ x + d` is graded.
/// `C_1` is the figure-eight.
pub fn c_n(n: u32) -> CfkComplex {
    let k = i64::from(n);
    CfkComplex::from_parts(
        &[("x", 0, 0), ("a", 2 - 2 * k, 2 - 2 * k), ("b", 1, 1 - 2 * k), ("c", 1 - 2 * k, 1), ("d", 0, 0)],
        &[
            ("a", "b", RMonomial::u(n)),
            ("a", "c", RMonomial::v(n)),
            ("b", "d", RMonomial::v(n)),
            ("c", "d", RMonomial::u(n)),
        ],
    )
    .expect("well formed")
}

pub fn figure_eight() -> CfkComplex {
    c_n(1)
}
