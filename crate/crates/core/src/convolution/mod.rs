//! Finitely supported measures, convolution and convolution powers.
//!
//! Convolution follows `(m1 * m2)(z) = sum_x m1(x) m2(x^-1 z)`, so the
//! `n`-th power `mu^(n)(x^-1 y)` is the `n`-step transition probability of
//! the walk moving by right multiplication.

mod irreducible;
mod measure;
mod powers;

use std::collections::BTreeMap;

use crate::error::{Result, WalkError};
use crate::group::GroupElem;
use crate::weight::Weight;

pub use irreducible::{irreducibility_check, Irreducibility};
pub use measure::{SparseMeasure, SupportSet};
pub use powers::{power, support_power, ConvolutionPowers, PowerError, SupportPowers};

/// `m1 * m2`. For each output element the products are summed in canonical
/// order of the left factor's support.
pub fn convolve<W: Weight>(m1: &SparseMeasure<W>, m2: &SparseMeasure<W>, cap: usize) -> Result<SparseMeasure<W>> {
    if m1.spec() != m2.spec() {
        return Err(WalkError::BackendMismatch("convolving measures on different groups".into()));
    }
    let spec = m1.spec();
    let mut out: BTreeMap<GroupElem, W> = BTreeMap::new();
    for (x, wx) in m1.iter() {
        for (y, wy) in m2.iter() {
            let z = spec.mul(x, y)?;
            let c = wx.clone() * wy.clone();
            *out.entry(z).or_insert_with(W::zero) += &c;
            if out.len() > cap {
                return Err(WalkError::CapExceeded { cap, reached: None });
            }
        }
    }
    out.retain(|_, w| !w.is_zero());
    Ok(SparseMeasure::from_parts(spec.clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupSpec, DEFAULT_CAP};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn z() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::free_abelian(1))
    }

    fn v(i: i64) -> GroupElem {
        GroupElem::Vector(vec![i])
    }

    fn binom(n: u64, k: u64) -> BigInt {
        (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
    }

    /// mu^(n)(x) for {+1: p, -1: 1-p} by the binomial formula.
    fn binomial_oracle(p: &BigRational, n: u64, x: i64) -> BigRational {
        if (n as i64 + x) % 2 != 0 || x.unsigned_abs() > n {
            return BigRational::zero();
        }
        let up = ((n as i64 + x) / 2) as u64;
        let qq = BigRational::one() - p;
        BigRational::from_integer(binom(n, up))
            * num_traits::pow(p.clone(), up as usize)
            * num_traits::pow(qq, (n - up) as usize)
    }

    #[test]
    fn dirac_convolution() {
        let spec = Arc::new(GroupSpec::free_group(2));
        let g = spec.parse_elem("ab").unwrap();
        let h = spec.parse_elem("Bb a").unwrap();
        let dg = SparseMeasure::new(spec.clone(), [(g.clone(), 1.0)]).unwrap();
        let dh = SparseMeasure::new(spec.clone(), [(h.clone(), 1.0)]).unwrap();
        let c = convolve(&dg, &dh, DEFAULT_CAP).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get(&spec.mul(&g, &h).unwrap()), 1.0);
    }

    #[test]
    fn simple_random_walk_squared() {
        let srw = SparseMeasure::new(z(), [(v(1), q(1, 2)), (v(-1), q(1, 2))]).unwrap();
        let sq = convolve(&srw, &srw, DEFAULT_CAP).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.get(&v(-2)), q(1, 4));
        assert_eq!(sq.get(&v(0)), q(1, 2));
        assert_eq!(sq.get(&v(2)), q(1, 4));
    }

    #[test]
    fn fourth_power_at_origin_matches_binomial() {
        let srw = SparseMeasure::new(z(), [(v(1), q(1, 2)), (v(-1), q(1, 2))]).unwrap();
        let powers = power(&srw, 4, DEFAULT_CAP).unwrap();
        assert_eq!(powers[3].get(&v(0)), binomial_oracle(&q(1, 2), 4, 0));
        assert_eq!(powers[3].get(&v(0)), q(3, 8));
        assert_eq!(powers[2].get(&v(0)), BigRational::zero());
    }

    #[test]
    fn power_examples() {
        let z3 = Arc::new(GroupSpec::cyclic_table(3).validated().unwrap());
        let delta = SparseMeasure::new(z3.clone(), [(GroupElem::Table(1), q(1, 1))]).unwrap();
        let p = power(&delta, 3, DEFAULT_CAP).unwrap();
        assert_eq!(p[2].weights().len(), 1);
        assert_eq!(p[2].get(&z3.identity()), q(1, 1));

        let lazy = SparseMeasure::new(z(), [(v(0), q(1, 2)), (v(1), q(1, 4)), (v(-1), q(1, 4))]).unwrap();
        let p = power(&lazy, 2, DEFAULT_CAP).unwrap();
        // paths: stay-stay 1/4, (+1,-1) and (-1,+1) 1/16 each
        assert_eq!(p[1].get(&v(0)), q(3, 8));
    }

    #[test]
    fn power_reports_prefix_on_cap() {
        let f2 = Arc::new(GroupSpec::free_group(2));
        let m = SparseMeasure::<f64>::from_text(f2, &[("a", "0.25"), ("A", "0.25"), ("b", "0.25"), ("B", "0.25")])
            .unwrap();
        let err = power(&m, 10, 200).unwrap_err();
        assert!(!err.computed.is_empty());
        assert!(matches!(err.error, WalkError::CapExceeded { reached: Some(n), .. } if n == err.computed.len()));
    }

    #[test]
    fn engine_matches_iterated_convolution() {
        let s3 = Arc::new(GroupSpec::finite_perm(3, vec![vec![1, 0, 2], vec![2, 1, 0]]));
        let m = SparseMeasure::<BigRational>::from_text(s3, &[("[1,0,2]", "1/3"), ("[2,1,0]", "1/6"), ("[0,1,2]", "1/2")])
            .unwrap();
        let mut acc = m.clone();
        let powers = power(&m, 6, DEFAULT_CAP).unwrap();
        for (i, p) in powers.iter().enumerate() {
            assert_eq!(p, &acc, "n = {}", i + 1);
            acc = convolve(&acc, &m, DEFAULT_CAP).unwrap();
        }
    }

    #[test]
    fn support_power_examples() {
        let plus = SupportSet::new(z(), [v(1)]);
        let p = support_power(&plus, 3, DEFAULT_CAP).unwrap();
        assert_eq!(p[2].elements.iter().cloned().collect::<Vec<_>>(), vec![v(3)]);

        let s3 = Arc::new(GroupSpec::finite_perm(3, vec![]));
        let tr = SupportSet::new(s3.clone(), [GroupElem::Perm(vec![1, 0, 2]), GroupElem::Perm(vec![2, 1, 0])]);
        let p = support_power(&tr, 2, DEFAULT_CAP).unwrap();
        // brute force: all products of two of the transpositions
        let brute = tr.product(&tr).unwrap();
        assert_eq!(p[1], brute);
        let expected = SupportSet::new(
            s3,
            [GroupElem::Perm(vec![0, 1, 2]), GroupElem::Perm(vec![1, 2, 0]), GroupElem::Perm(vec![2, 0, 1])],
        );
        assert_eq!(p[1], expected);

        let f2 = Arc::new(GroupSpec::free_group(2));
        let ab = SupportSet::new(f2.clone(), [f2.parse_elem("a").unwrap(), f2.parse_elem("b").unwrap()]);
        let p = support_power(&ab, 2, DEFAULT_CAP).unwrap();
        let words: Vec<String> = p[1].elements.iter().map(|g| f2.format_elem(g)).collect();
        assert_eq!(words, vec!["aa", "ab", "ba", "bb"]);
    }

    #[test]
    fn prune_threshold_is_tracked() {
        let m = SparseMeasure::<f64>::new(z(), [(v(1), 0.01), (v(-1), 0.99)]).unwrap();
        let mut e = ConvolutionPowers::new(&m, DEFAULT_CAP).unwrap().with_prune(Some(1e-3));
        for _ in 0..5 {
            e.advance().unwrap();
        }
        assert!(e.pruned_mass() > 0.0);
        assert!(e.measure().iter().all(|(_, w)| *w >= 1e-3));
    }

    fn small_measure() -> impl Strategy<Value = Vec<(i64, i64, u32)>> {
        proptest::collection::vec((-2i64..=2, -2i64..=2, 1u32..=5), 1..5)
    }

    fn to_measure(raw: &[(i64, i64, u32)]) -> SparseMeasure<BigRational> {
        let spec = Arc::new(GroupSpec::free_abelian(2));
        let total: u32 = raw.iter().map(|r| r.2).sum::<u32>() + 1;
        SparseMeasure::new(
            spec,
            raw.iter().map(|&(a, b, w)| (GroupElem::Vector(vec![a, b]), q(w as i64, total as i64))),
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn binomial_oracle_agrees(pn in 1i64..10, n in 1u64..24) {
            let p = q(pn, 10);
            let m = SparseMeasure::new(z(), [(v(1), p.clone()), (v(-1), BigRational::one() - &p)]).unwrap();
            let powers = power(&m, n as usize, DEFAULT_CAP).unwrap();
            let last = &powers[n as usize - 1];
            for x in -(n as i64) - 1..=(n as i64) + 1 {
                prop_assert_eq!(last.get(&v(x)), binomial_oracle(&p, n, x));
            }
        }

        #[test]
        fn mass_and_support_are_multiplicative(a in small_measure(), b in small_measure()) {
            let (ma, mb) = (to_measure(&a), to_measure(&b));
            let c = convolve(&ma, &mb, DEFAULT_CAP).unwrap();
            prop_assert_eq!(c.total_mass(), ma.total_mass() * mb.total_mass());
            prop_assert_eq!(c.support(), ma.support().product(&mb.support()).unwrap());
        }

        #[test]
        fn float_mass_is_multiplicative(a in small_measure(), b in small_measure()) {
            let (ma, mb) = (to_measure(&a).to_f64(), to_measure(&b).to_f64());
            let c = convolve(&ma, &mb, DEFAULT_CAP).unwrap();
            let expected = ma.total_mass() * mb.total_mass();
            prop_assert!((c.total_mass() - expected).abs() <= 1e-12 * expected);
        }

        #[test]
        fn convolution_is_associative(a in small_measure(), b in small_measure(), c in small_measure()) {
            let (ma, mb, mc) = (to_measure(&a), to_measure(&b), to_measure(&c));
            let left = convolve(&convolve(&ma, &mb, DEFAULT_CAP).unwrap(), &mc, DEFAULT_CAP).unwrap();
            let right = convolve(&ma, &convolve(&mb, &mc, DEFAULT_CAP).unwrap(), DEFAULT_CAP).unwrap();
            prop_assert_eq!(&left, &right);
            let (fa, fb, fc) = (ma.to_f64(), mb.to_f64(), mc.to_f64());
            let lf = convolve(&convolve(&fa, &fb, DEFAULT_CAP).unwrap(), &fc, DEFAULT_CAP).unwrap();
            let rf = convolve(&fa, &convolve(&fb, &fc, DEFAULT_CAP).unwrap(), DEFAULT_CAP).unwrap();
            prop_assert_eq!(lf.len(), rf.len());
            for (g, w) in lf.iter() {
                prop_assert!((w - rf.get(g)).abs() <= 1e-12 * w.max(1e-300));
            }
        }
    }
}
