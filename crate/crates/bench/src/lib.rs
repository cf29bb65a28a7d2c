//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use num_rational::BigRational;
use walklab_core::{GroupSpec, SparseMeasure, Weight};

fn measure<W: Weight>(spec: GroupSpec, entries: &[(&str, &str)]) -> SparseMeasure<W> {
    SparseMeasure::from_text(Arc::new(spec), entries).expect("fixture measures are valid")
}

/// 1/2 at 0, 0.15 to the right, 0.35 to the left.
pub fn lazy_drift() -> SparseMeasure<f64> {
    measure(GroupSpec::free_abelian(1), &[("(0)", "1/2"), ("(1)", "3/20"), ("(-1)", "7/20")])
}

pub fn lazy_drift_exact() -> SparseMeasure<BigRational> {
    measure(GroupSpec::free_abelian(1), &[("(0)", "1/2"), ("(1)", "3/20"), ("(-1)", "7/20")])
}

pub fn srw_z2() -> SparseMeasure<f64> {
    measure(
        GroupSpec::free_abelian(2),
        &[("(1,0)", "1/4"), ("(-1,0)", "1/4"), ("(0,1)", "1/4"), ("(0,-1)", "1/4")],
    )
}

/// Lazy isotropic walk on `F_2`.
pub fn lazy_f2<W: Weight>() -> SparseMeasure<W> {
    measure(
        GroupSpec::free_group(2),
        &[("1", "1/2"), ("a", "1/8"), ("A", "1/8"), ("b", "1/8"), ("B", "1/8")],
    )
}

/// `S_4` with mass 1/2 on the transposition `(01)` and on the 4-cycle.
pub fn s4<W: Weight>() -> SparseMeasure<W> {
    measure(
        GroupSpec::finite_perm(4, vec![vec![1, 0, 2, 3], vec![1, 2, 3, 0]]),
        &[("[1,0,2,3]", "1/2"), ("[1,2,3,0]", "1/2")],
    )
}

/// Irreducible strongly aperiodic substochastic matrix of size `k`.
pub fn chain_matrix(k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| {
            let mut row = vec![0.0; k];
            row[i] = 0.3;
            row[(i + 1) % k] = 0.4;
            row[(i + k - 1) % k] = 0.2;
            row
        })
        .collect()
}
