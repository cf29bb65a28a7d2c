//! Ratio limits `mu^(n+1)(x) / mu^(n)(x) -> rho`, the limit measure
//! `nu = lim mu^(n) / mu^(n)(e)` and its convolution equation, Doob
//! h-processes, the Bernoulli tail estimate and generic finite chains.

mod bernoulli;
mod chain;
mod harmonic;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::convolution::SparseMeasure;
use crate::error::{Result, WalkError};
use crate::fit::LineFit;
use crate::group::GroupElem;
use crate::spectral::{extrapolate_ratios, LogPowers};
use crate::weight::Weight;

pub use bernoulli::{bernoulli_pmf, bernoulli_tail_check, BernoulliCheck, TailFit};
pub use chain::{generic_chain_ratio, ChainReport};
pub use harmonic::{
    build_h_process, exponential_h, h_process_diag, harmonic_check, nearest_neighbour_doob, DiagEntry, DiagReport,
    GroupFunction, HProcess, HarmonicFn, HarmonicKind, HarmonicReport, PointSlack,
};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuSnapshot {
    pub n: usize,
    /// `(element, mu^(n)(g) / mu^(n)(e))` over the reporting window.
    pub values: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub x: String,
    pub stride: usize,
    /// `(n, mu^(n+d)(x) / mu^(n)(x))` where the denominator is positive.
    pub ratios: Vec<(usize, f64)>,
    /// Extrapolated limit of the stride ratios, i.e. an estimate of `rho^d`.
    pub extrapolated_stride_ratio: f64,
    /// Its `d`-th root, the estimate of `rho`.
    pub extrapolated_limit: f64,
    pub fit: Option<LineFit>,
    pub nu_n: Vec<NuSnapshot>,
}

/// Number of `nu_n` snapshots recorded by [`ratio_series`].
const SNAPSHOTS: usize = 10;

/// Ratio sequence at `x` up to `n_max`; `stride` is the period of the walk.
pub fn ratio_series<W: Weight>(
    m: &SparseMeasure<W>,
    x: &GroupElem,
    n_max: usize,
    stride: usize,
    window: &[GroupElem],
    cap: usize,
) -> Result<RatioReport> {
    let spec = m.spec();
    spec.check(x)?;
    let d = stride.max(1);
    let mut powers = LogPowers::new(m, cap)?;
    let mut logs = Vec::with_capacity(n_max + d + 1);
    let mut nu_n = Vec::new();
    let every = (n_max / SNAPSHOTS).max(1);
    logs.push(if *x == spec.identity() { 0.0 } else { f64::NEG_INFINITY });
    for n in 1..=n_max + d {
        powers.advance()?;
        logs.push(powers.log_at(x));
        let le = powers.log_at_identity();
        if n <= n_max && n % every == 0 && le.is_finite() && !window.is_empty() {
            let values = window
                .iter()
                .map(|g| (spec.format_elem(g), (powers.log_at(g) - le).exp()))
                .collect();
            nu_n.push(NuSnapshot { n, values });
        }
    }
    let ratios: Vec<(usize, f64)> = (1..=n_max)
        .filter(|&n| logs[n].is_finite() && logs[n + d].is_finite())
        .map(|n| (n, (logs[n + d] - logs[n]).exp()))
        .collect();
    if ratios.is_empty() {
        return Err(WalkError::InsufficientData(format!(
            "{} is not reached within {n_max} steps",
            spec.format_elem(x)
        )));
    }
    let points: Vec<(f64, f64)> = ratios.iter().map(|&(n, r)| (n as f64, r)).collect();
    let (stride_ratio, fit) = extrapolate_ratios(&points)?;
    Ok(RatioReport {
        x: spec.format_elem(x),
        stride: d,
        ratios,
        extrapolated_stride_ratio: stride_ratio,
        extrapolated_limit: stride_ratio.max(0.0).powf(1.0 / d as f64),
        fit,
        nu_n,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitMeasure {
    /// Estimated `nu(g)` over the window; `nu(e) = 1` exactly.
    pub values: BTreeMap<GroupElem, f64>,
    /// Averaging runs over `tail_from <= n <= n_max` with `n` a multiple of
    /// the stride.
    pub tail_from: usize,
    pub n_max: usize,
    pub samples: usize,
}

impl LimitMeasure {
    pub fn as_function(&self) -> GroupFunction<f64> {
        GroupFunction::Table(self.values.clone())
    }
}

/// `nu(x) ~ mu^(n)(x) / mu^(n)(e)`, averaged over the last 10% of `n`.
pub fn limit_measure<W: Weight>(
    m: &SparseMeasure<W>,
    window: &[GroupElem],
    n_max: usize,
    stride: usize,
    cap: usize,
) -> Result<LimitMeasure> {
    let spec = m.spec();
    let d = stride.max(1);
    let tail_from = n_max - n_max / 10;
    let e = spec.identity();
    let mut sums = vec![0.0; window.len()];
    let mut samples = 0usize;
    let mut powers = LogPowers::new(m, cap)?;
    for n in 1..=n_max {
        powers.advance()?;
        if n < tail_from || n % d != 0 {
            continue;
        }
        let le = powers.log_at_identity();
        if !le.is_finite() {
            continue;
        }
        samples += 1;
        for (s, g) in sums.iter_mut().zip(window) {
            *s += (powers.log_at(g) - le).exp();
        }
    }
    if samples == 0 {
        return Err(WalkError::InsufficientData(format!(
            "mu^(n)(e) vanishes for all n in [{tail_from}, {n_max}] with stride {d}"
        )));
    }
    let mut values: BTreeMap<GroupElem, f64> = window
        .iter()
        .cloned()
        .zip(sums.into_iter().map(|s| s / samples as f64))
        .collect();
    values.insert(e, 1.0);
    Ok(LimitMeasure {
        values,
        tail_from,
        n_max,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    /// `max |(mu * nu)(z) - rho nu(z)|` over interior window points.
    pub residual: f64,
    /// Same, divided by `nu(z)`.
    pub relative_residual: f64,
    pub interior_points: usize,
}

/// Sup-norm residual of `mu * nu = rho nu`, with
/// `(mu * nu)(z) = sum_x mu(x) nu(x^-1 z)`. Window points where some
/// `nu(x^-1 z)` is unknown are skipped.
pub fn conv_residual<W: Weight>(
    m: &SparseMeasure<W>,
    nu: &GroupFunction<f64>,
    rho: f64,
    window: &[GroupElem],
) -> Result<ResidualReport> {
    let spec = m.spec();
    let mut residual: f64 = 0.0;
    let mut relative: f64 = 0.0;
    let mut interior = 0usize;
    'points: for z in window {
        let Some(nz) = nu.value(z) else { continue };
        let mut lhs = 0.0;
        for (x, w) in m.iter() {
            let y = spec.mul(&spec.inv(x)?, z)?;
            let Some(ny) = nu.value(&y) else { continue 'points };
            lhs += w.as_f64() * ny;
        }
        interior += 1;
        let r = (lhs - rho * nz).abs();
        residual = residual.max(r);
        relative = relative.max(r / nz.abs());
    }
    if interior == 0 {
        return Err(WalkError::InsufficientData("window has no interior point".into()));
    }
    Ok(ResidualReport {
        residual,
        relative_residual: relative,
        interior_points: interior,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupSpec, DEFAULT_CAP};
    use crate::spectral::laplace_min;
    use std::sync::Arc;

    const RHO_LAZY_DRIFT: f64 = 0.958_257_569_495_584;

    fn z(entries: &[(&str, &str)]) -> SparseMeasure<f64> {
        SparseMeasure::from_text(Arc::new(GroupSpec::free_abelian(1)), entries).unwrap()
    }

    fn lazy_drift() -> SparseMeasure<f64> {
        z(&[("(0)", "0.5"), ("(1)", "0.15"), ("(-1)", "0.35")])
    }

    fn v(x: i64) -> GroupElem {
        GroupElem::Vector(vec![x])
    }

    fn window(r: i64) -> Vec<GroupElem> {
        (-r..=r).map(v).collect()
    }

    #[test]
    fn lazy_srw_ratio() {
        let m = z(&[("(0)", "0.5"), ("(1)", "0.25"), ("(-1)", "0.25")]);
        let r = ratio_series(&m, &v(0), 1000, 1, &[], DEFAULT_CAP).unwrap();
        let &(n, last) = r.ratios.last().unwrap();
        assert_eq!(n, 1000);
        // a_n ~ c n^-1/2 gives ratios close to sqrt(n / (n + 1))
        assert!((last - (1000.0f64 / 1001.0).sqrt()).abs() < 1e-5, "{last}");
        assert!((r.extrapolated_limit - 1.0).abs() < 1e-4);
    }

    #[test]
    fn finite_group_ratios_converge_to_one() {
        let s3 = Arc::new(GroupSpec::finite_perm(3, vec![vec![1, 0, 2], vec![2, 1, 0]]));
        let m = SparseMeasure::<f64>::from_text(s3.clone(), &[("[0,1,2]", "1/3"), ("[1,0,2]", "1/3"), ("[2,1,0]", "1/3")])
            .unwrap();
        let x = s3.parse_elem("[1,0,2]").unwrap();
        let r = ratio_series(&m, &x, 120, 1, &[], DEFAULT_CAP).unwrap();
        assert!((r.ratios.last().unwrap().1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_limits_agree_across_points() {
        let m = lazy_drift();
        let limits: Vec<f64> = [-3, -1, 0, 2, 4]
            .iter()
            .map(|&x| ratio_series(&m, &v(x), 4000, 1, &[], DEFAULT_CAP).unwrap().extrapolated_limit)
            .collect();
        for &l in &limits {
            assert!((l - RHO_LAZY_DRIFT).abs() < 2e-3, "{l}");
        }
        let spread = limits.iter().cloned().fold(f64::MIN, f64::max) - limits.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-3);
    }

    #[test]
    fn periodic_walk_uses_stride() {
        let m = z(&[("(1)", "0.3"), ("(-1)", "0.7")]);
        let r = ratio_series(&m, &v(0), 2000, 2, &[], DEFAULT_CAP).unwrap();
        assert!(r.ratios.iter().all(|&(n, _)| n % 2 == 0));
        assert!((r.extrapolated_limit - 2.0 * 0.21f64.sqrt()).abs() < 1e-4);
        assert!(ratio_series(&m, &v(1), 2000, 2, &[], DEFAULT_CAP).unwrap().ratios[0].0 % 2 == 1);
    }

    #[test]
    fn unreachable_point_is_an_error() {
        let m = z(&[("(1)", "0.5"), ("(2)", "0.5")]);
        assert!(ratio_series(&m, &v(-1), 20, 1, &[], DEFAULT_CAP).is_err());
    }

    #[test]
    fn limit_measure_lazy_drift() {
        let m = lazy_drift();
        let w = window(10);
        let lm = limit_measure(&m, &w, 4000, 1, DEFAULT_CAP).unwrap();
        assert_eq!(lm.values[&v(0)], 1.0);
        assert!((lm.values[&v(1)] - (3.0f64 / 7.0).sqrt()).abs() < 1e-2);
        let rho = laplace_min(&m).unwrap().rho;
        let res = conv_residual(&m, &lm.as_function(), rho, &w).unwrap();
        assert!(res.residual <= 1e-2, "{res:?}");
        assert_eq!(res.interior_points, 19);
    }

    #[test]
    fn limit_measure_on_finite_group_is_uniform() {
        let s3 = Arc::new(GroupSpec::finite_perm(3, vec![vec![1, 0, 2], vec![2, 1, 0]]));
        let m = SparseMeasure::<f64>::from_text(s3.clone(), &[("[0,1,2]", "1/3"), ("[1,0,2]", "1/3"), ("[2,1,0]", "1/3")])
            .unwrap();
        let all = s3.elements(DEFAULT_CAP).unwrap();
        let lm = limit_measure(&m, &all, 200, 1, DEFAULT_CAP).unwrap();
        assert!(lm.values.values().all(|&v| (v - 1.0).abs() < 1e-12));
        let res = conv_residual(&m, &GroupFunction::Constant(1.0), 1.0, &all).unwrap();
        assert_eq!(res.residual, 0.0);
    }

    #[test]
    fn limit_measure_lazy_srw_tends_to_one() {
        let m = z(&[("(0)", "0.5"), ("(1)", "0.25"), ("(-1)", "0.25")]);
        let lm = limit_measure(&m, &window(3), 4000, 1, DEFAULT_CAP).unwrap();
        assert!(lm.values.values().all(|&v| (v - 1.0).abs() < 1e-2));
    }

    #[test]
    fn closed_form_nu_solves_convolution_equation() {
        let m = lazy_drift();
        let nu = GroupFunction::Exponential {
            base: vec![(0.15f64 / 0.35).sqrt()],
        };
        let res = conv_residual(&m, &nu, 0.5 + 0.0525f64.sqrt() * 2.0, &window(10)).unwrap();
        assert!(res.residual <= 1e-12, "{res:?}");
    }

    #[test]
    fn residual_needs_interior_points() {
        let m = lazy_drift();
        let table = GroupFunction::Table([(v(0), 1.0)].into_iter().collect());
        assert!(conv_residual(&m, &table, 1.0, &[v(0)]).is_err());
    }
}
