//! Spectral radius `rho(mu) = lim mu^(n)(e)^(1/n)`: return probabilities,
//! certified lower bounds, extrapolated estimates and exact values where a
//! closed form is available.
//!
//! Return sequences are indexed by `n`, so `a[0] = 1` and `a[n] = mu^(n)(e)`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use serde::Serialize;

use crate::convolution::{ConvolutionPowers, SparseMeasure, SupportPowers};
use crate::error::{Result, WalkError};
use crate::fit::{fit_line, LineFit};
use crate::group::{GroupElem, GroupSpec};
use crate::weight::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RootTest,
    RatioExtrapolated,
    LaplaceExact,
    StochasticExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimateMode {
    RootTest,
    RatioExtrapolated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Ratios are taken `stride` steps apart and the `stride`-th root is
    /// reported, which handles period-`d` walks.
    pub stride: usize,
    pub ratio_points: usize,
    /// Last raw ratio `(a[n+d] / a[n])^(1/d)`.
    pub raw_ratio: Option<f64>,
    /// Fit `r_n = A + B/n` on the last quarter of the ratios.
    pub fit: Option<LineFit>,
    /// Value before clamping to `(0, 1]`.
    pub unclamped: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub rho_hat: f64,
    pub method: Method,
    /// `(n, a_n^(1/n))` for every `n` with `a_n > 0`.
    pub lower_bounds: Vec<(usize, f64)>,
    pub k0: Option<usize>,
    pub diagnostics: Option<Diagnostics>,
}

/// Parameters of a lazy nearest-neighbour isotropic measure on `F_k`:
/// mass `lazy` at `e` and `step / 2k` on each generator and inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotropicFree<W> {
    pub rank: usize,
    pub lazy: W,
    pub step: W,
}

pub fn isotropic_free_params<W: Weight>(m: &SparseMeasure<W>) -> Option<IsotropicFree<W>> {
    let GroupSpec::FreeGroup { rank } = m.spec().as_ref() else {
        return None;
    };
    let mut lazy = W::zero();
    let mut letter: Option<W> = None;
    let mut letters = 0;
    for (g, w) in m.iter() {
        let GroupElem::Word(word) = g else { return None };
        match word.len() {
            0 => lazy = w.clone(),
            1 => {
                match &letter {
                    Some(l) if l != w => return None,
                    _ => letter = Some(w.clone()),
                }
                letters += 1;
            }
            _ => return None,
        }
    }
    let letter = letter?;
    if letters != 2 * rank {
        return None;
    }
    let mut step = W::zero();
    for _ in 0..2 * rank {
        step += &letter;
    }
    Some(IsotropicFree {
        rank: *rank,
        lazy,
        step,
    })
}

/// Return probabilities of the word-length projection of an isotropic walk on `F_k`.
pub fn distance_chain_returns<W: Weight>(p: &IsotropicFree<W>, n_max: usize) -> Vec<W> {
    let two_k = W::from_ratio(&num_rational::BigRational::from_integer((2 * p.rank).into()));
    let down = p.step.clone() / two_k;
    let up = p.step.clone() - down.clone();
    let mut dist = vec![W::one()];
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(W::one());
    for _ in 0..n_max {
        let mut next = vec![W::zero(); dist.len() + 1];
        for (r, w) in dist.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            if !p.lazy.is_zero() {
                next[r] += &(p.lazy.clone() * w.clone());
            }
            if r == 0 {
                next[1] += &(p.step.clone() * w.clone());
            } else {
                next[r - 1] += &(down.clone() * w.clone());
                next[r + 1] += &(up.clone() * w.clone());
            }
        }
        while next.len() > 1 && next.last().is_some_and(|w| w.is_zero()) {
            next.pop();
        }
        out.push(next[0].clone());
        dist = next;
    }
    out
}

/// `ln a_n` from the distance chain tilted by `t^r`, `t = sqrt(down / up)`.
/// The tilted chain `Q(r, r') = P(r, r') t^(r' - r) / lambda`, with
/// `lambda = lazy + 2 sqrt(up * down)`, has `Q^n(0, 0) = a_n / lambda^n` and
/// keeps its mass near the origin, so nothing underflows.
fn distance_chain_log_returns(p: &IsotropicFree<f64>, n_max: usize) -> Vec<f64> {
    let down = p.step / (2 * p.rank) as f64;
    let up = p.step - down;
    let t = (down / up).sqrt();
    let lambda = p.lazy + 2.0 * (up * down).sqrt();
    let (stay, q_up, q_down, q_first) = (p.lazy / lambda, up * t / lambda, down / (t * lambda), p.step * t / lambda);
    let mut log_scale = 0.0;
    let mut dist = vec![1.0];
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    for n in 1..=n_max {
        let mut next = vec![0.0; dist.len() + 1];
        for (r, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            next[r] += stay * w;
            if r == 0 {
                next[1] += q_first * w;
            } else {
                next[r - 1] += q_down * w;
                next[r + 1] += q_up * w;
            }
        }
        while next.len() > 1 && next.last() == Some(&0.0) {
            next.pop();
        }
        let max = next.iter().copied().fold(0.0, f64::max);
        if max > 0.0 && !(1e-100..=1e100).contains(&max) {
            next.iter_mut().for_each(|w| *w /= max);
            log_scale += max.ln();
        }
        out.push(next[0].ln() + log_scale + n as f64 * lambda.ln());
        dist = next;
    }
    out
}

/// `a[n] = mu^(n)(e)` for `n = 0..=n_max`, by convolution.
pub fn return_sequence_by_convolution<W: Weight>(m: &SparseMeasure<W>, n_max: usize, cap: usize) -> Result<Vec<W>> {
    let mut powers = ConvolutionPowers::new(m, cap)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(W::one());
    for _ in 0..n_max {
        powers.advance()?;
        out.push(powers.at_identity());
    }
    Ok(out)
}

/// `a[n] = mu^(n)(e)` for `n = 0..=n_max`. Isotropic nearest-neighbour
/// measures on free groups go through the distance chain. Float values may
/// underflow on long horizons; see [`log_return_sequence`].
pub fn return_sequence<W: Weight>(m: &SparseMeasure<W>, n_max: usize, cap: usize) -> Result<Vec<W>> {
    m.require_probability()?;
    match isotropic_free_params(m) {
        Some(p) => Ok(distance_chain_returns(&p, n_max)),
        None => return_sequence_by_convolution(m, n_max, cap),
    }
}

/// Double precision convolution powers reporting `ln mu^(n)(g)`.
///
/// On `Z^d` the powers of the exponentially tilted measure
/// `mu_c(x) = mu(x) exp(<c, x>) / rho` are computed, `c` the Laplace
/// minimizer, and `ln mu^(n)(x) = ln mu_c^(n)(x) + n ln rho - <c, x>`. The
/// tilted walk has no drift, so values near the origin stay in range for
/// long horizons. Other backends (and reducible measures on `Z^d`) only
/// rescale by the maximum.
#[derive(Clone, Debug)]
pub struct LogPowers {
    powers: ConvolutionPowers<f64>,
    tilt: Option<Vec<f64>>,
    log_rho: f64,
}

impl LogPowers {
    pub fn new<W: Weight>(m: &SparseMeasure<W>, cap: usize) -> Result<Self> {
        let m = m.to_f64();
        let tilt = match m.spec().as_ref() {
            GroupSpec::FreeAbelian { .. } => laplace_min(&m).ok(),
            _ => None,
        };
        let Some(lm) = tilt else {
            return Ok(Self {
                powers: ConvolutionPowers::new(&m, cap)?.with_rescale(true),
                tilt: None,
                log_rho: 0.0,
            });
        };
        let weights = m
            .iter()
            .map(|(g, w)| (g.clone(), w * dot(g, &lm.minimizer).exp() / lm.rho))
            .collect();
        let tilted = SparseMeasure::from_parts(m.spec().clone(), weights);
        Ok(Self {
            powers: ConvolutionPowers::new(&tilted, cap)?.with_rescale(true),
            tilt: Some(lm.minimizer),
            log_rho: lm.rho.ln(),
        })
    }

    /// Drops stored entries below `threshold` after every step (tilted
    /// weights on `Z^d`). Off by default.
    pub fn with_prune(mut self, threshold: Option<f64>) -> Self {
        self.powers = self.powers.with_prune(threshold);
        self
    }

    /// Mass removed by pruning so far, in the stored (tilted) scale.
    pub fn pruned_mass(&self) -> f64 {
        self.powers.pruned_mass()
    }

    pub fn n(&self) -> usize {
        self.powers.n()
    }

    pub fn advance(&mut self) -> Result<()> {
        self.powers.advance()
    }

    /// `ln mu^(n)(g)`, `-inf` outside the support of `mu^(n)`.
    pub fn log_at(&self, g: &GroupElem) -> f64 {
        let v = self.powers.log_at(g) + self.n() as f64 * self.log_rho;
        match &self.tilt {
            Some(c) => v - dot(g, c),
            None => v,
        }
    }

    pub fn log_at_identity(&self) -> f64 {
        self.powers.log_at_id(0) + self.n() as f64 * self.log_rho
    }
}

fn dot(g: &GroupElem, c: &[f64]) -> f64 {
    match g {
        GroupElem::Vector(x) => x.iter().zip(c).map(|(&xi, ci)| xi as f64 * ci).sum(),
        _ => 0.0,
    }
}

/// `ln a[n]` for `n = 0..=n_max` in double precision, stable where `a_n`
/// itself underflows: [`LogPowers`] in general, the tilted distance chain
/// for isotropic free-group measures.
pub fn log_return_sequence<W: Weight>(m: &SparseMeasure<W>, n_max: usize, cap: usize) -> Result<Vec<f64>> {
    m.require_probability()?;
    if let Some(p) = isotropic_free_params(&m.to_f64()) {
        return Ok(distance_chain_log_returns(&p, n_max));
    }
    let mut powers = LogPowers::new(m, cap)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(0.0);
    for _ in 0..n_max {
        powers.advance()?;
        out.push(powers.log_at_identity());
    }
    Ok(out)
}

fn logs(a: &[f64]) -> Vec<f64> {
    a.iter().map(|v| v.ln()).collect()
}

/// `(n, a_n^(1/n))` over `n >= 1` with `a_n > 0`.
pub fn root_lower_bounds(a: &[f64]) -> Result<Vec<(usize, f64)>> {
    root_lower_bounds_log(&logs(a))
}

/// As [`root_lower_bounds`] from `ln a_n`.
pub fn root_lower_bounds_log(log_a: &[f64]) -> Result<Vec<(usize, f64)>> {
    let out: Vec<(usize, f64)> = log_a
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| v.is_finite())
        .map(|(n, &v)| (n, (v / n as f64).exp()))
        .collect();
    if out.is_empty() {
        return Err(WalkError::InsufficientData("no positive return probability".into()));
    }
    Ok(out)
}

/// Minimum number of ratio points for the extrapolated estimate.
pub const MIN_RATIO_POINTS: usize = 8;

/// Limit of a ratio sequence `(n, r_n)`: the intercept of the least-squares
/// fit `r_n = A + B/n` over the last quarter of the points (at least
/// [`MIN_RATIO_POINTS`]).
pub fn extrapolate_ratios(ratios: &[(f64, f64)]) -> Result<(f64, Option<LineFit>)> {
    if ratios.len() < MIN_RATIO_POINTS {
        return Err(WalkError::InsufficientData(format!(
            "{} usable ratio points, need {MIN_RATIO_POINTS}",
            ratios.len()
        )));
    }
    let take = (ratios.len() / 4).max(MIN_RATIO_POINTS);
    let tail = &ratios[ratios.len() - take..];
    let xs: Vec<f64> = tail.iter().map(|&(n, _)| 1.0 / n).collect();
    let ys: Vec<f64> = tail.iter().map(|&(_, r)| r).collect();
    let fit = fit_line(&xs, &ys);
    let value = fit.map_or(ys[ys.len() - 1], |f| f.intercept);
    Ok((value, fit))
}

/// Estimates `rho` from a return sequence. `stride` is the period of the
/// walk (1 for aperiodic walks).
pub fn rho_estimate(a: &[f64], mode: EstimateMode, stride: usize) -> Result<SpectralEstimate> {
    rho_estimate_log(&logs(a), mode, stride)
}

/// As [`rho_estimate`] from `ln a_n`.
pub fn rho_estimate_log(log_a: &[f64], mode: EstimateMode, stride: usize) -> Result<SpectralEstimate> {
    let lower_bounds = root_lower_bounds_log(log_a)?;
    match mode {
        EstimateMode::RootTest => {
            let best = lower_bounds.iter().map(|&(_, r)| r).fold(0.0, f64::max);
            Ok(SpectralEstimate {
                rho_hat: best.min(1.0),
                method: Method::RootTest,
                lower_bounds,
                k0: None,
                diagnostics: None,
            })
        }
        EstimateMode::RatioExtrapolated => {
            let d = stride.max(1);
            let inv_d = 1.0 / d as f64;
            let ratios: Vec<(f64, f64)> = (1..log_a.len().saturating_sub(d))
                .filter(|&n| log_a[n].is_finite() && log_a[n + d].is_finite())
                .map(|n| (n as f64, ((log_a[n + d] - log_a[n]) * inv_d).exp()))
                .collect();
            let (value, fit) = extrapolate_ratios(&ratios)?;
            let raw = ratios.last().map(|&(_, r)| r);
            if !(value > 0.0) {
                return Err(WalkError::NoConvergence(format!("extrapolated ratio {value} is not positive")));
            }
            Ok(SpectralEstimate {
                rho_hat: value.min(1.0),
                method: Method::RatioExtrapolated,
                lower_bounds,
                k0: None,
                diagnostics: Some(Diagnostics {
                    stride: d,
                    ratio_points: ratios.len(),
                    raw_ratio: raw,
                    fit,
                    unclamped: Some(value),
                }),
            })
        }
    }
}

/// Minimizer of the Laplace transform `L(c) = sum_x mu(x) exp(<c, x>)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaplaceMin {
    pub rho: f64,
    pub minimizer: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

const LAPLACE_MAX_ITER: usize = 200;
const LAPLACE_GRAD_TOL: f64 = 1e-12;

/// Exact `rho` of a walk on `Z^d` as `min_c L(c)`, by damped Newton steps
/// with backtracking.
pub fn laplace_min<W: Weight>(m: &SparseMeasure<W>) -> Result<LaplaceMin> {
    let GroupSpec::FreeAbelian { rank } = m.spec().as_ref() else {
        return Err(WalkError::Unsupported("the free_abelian backend".into()));
    };
    let dim = *rank;
    let pts: Vec<(Vec<f64>, f64)> = m
        .iter()
        .map(|(g, w)| match g {
            GroupElem::Vector(v) => (v.iter().map(|&x| x as f64).collect(), w.as_f64()),
            _ => unreachable!("free abelian elements are vectors"),
        })
        .collect();
    let eval = |c: &DVector<f64>| -> (f64, DVector<f64>, DMatrix<f64>) {
        let mut val = 0.0;
        let mut grad = DVector::zeros(dim);
        let mut hess = DMatrix::zeros(dim, dim);
        for (x, w) in &pts {
            let xv = DVector::from_column_slice(x);
            let t = w * xv.dot(c).exp();
            val += t;
            grad += &xv * t;
            hess += &xv * xv.transpose() * t;
        }
        (val, grad, hess)
    };
    let mut c = DVector::zeros(dim);
    let (mut val, mut grad, mut hess) = eval(&c);
    for it in 0..=LAPLACE_MAX_ITER {
        let gn = grad.norm();
        if gn <= LAPLACE_GRAD_TOL * val.max(1.0) {
            return Ok(LaplaceMin {
                rho: val,
                minimizer: c.iter().copied().collect(),
                iterations: it,
                gradient_norm: gn,
            });
        }
        if it == LAPLACE_MAX_ITER {
            break;
        }
        // directions outside the span of the support leave L unchanged, so a
        // small ridge keeps the system solvable without moving the minimum
        let ridge = 1e-14 * hess.trace().max(f64::MIN_POSITIVE);
        let mut h = hess.clone();
        for i in 0..dim {
            h[(i, i)] += ridge;
        }
        let dir = match h.cholesky() {
            Some(ch) => -ch.solve(&grad),
            None => -grad.clone(),
        };
        let slope = grad.dot(&dir);
        let mut t = 1.0;
        let mut moved = false;
        while t >= 1e-12 {
            let cand = &c + &dir * t;
            let (v, g, hs) = eval(&cand);
            if v <= val + 1e-4 * t * slope {
                c = cand;
                val = v;
                grad = g;
                hess = hs;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if !moved {
            // no representable descent left: accept if the gradient is at
            // rounding level for the size of the terms
            let scale = pts.iter().map(|(x, w)| w * x.iter().map(|v| v.abs()).sum::<f64>()).sum::<f64>();
            if gn <= 1e-10 * scale.max(1.0) * val.max(1.0) {
                return Ok(LaplaceMin {
                    rho: val,
                    minimizer: c.iter().copied().collect(),
                    iterations: it,
                    gradient_norm: gn,
                });
            }
            break;
        }
    }
    Err(WalkError::NoConvergence(format!(
        "Laplace transform minimization did not reach gradient norm {LAPLACE_GRAD_TOL} in {LAPLACE_MAX_ITER} iterations"
    )))
}

/// Exact `rho` when available: 1 for probability measures on finite groups,
/// the Laplace minimum on `Z^d`.
pub fn exact_rho<W: Weight>(m: &SparseMeasure<W>) -> Result<Option<(f64, Method)>> {
    let spec = m.spec();
    if spec.is_finite() && m.is_probability() {
        return Ok(Some((1.0, Method::StochasticExact)));
    }
    if matches!(spec.as_ref(), GroupSpec::FreeAbelian { .. }) {
        return Ok(Some((laplace_min(m)?.rho, Method::LaplaceExact)));
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupermultiplicativityReport {
    pub pairs_checked: usize,
    /// Smallest `a_{m+n} / (a_m a_n)` over pairs with `a_m a_n > 0`.
    pub min_ratio: f64,
}

/// Checks `a_m a_n <= a_{m+n}` for all `m, n >= 1` with `m + n` in range,
/// exactly for exact weights and with relative slack `1e-9` otherwise.
pub fn check_supermultiplicativity<W: Weight>(a: &[W]) -> Result<SupermultiplicativityReport> {
    let n_max = a.len().saturating_sub(1);
    let f: Vec<f64> = a.iter().map(|w| w.as_f64()).collect();
    let mut pairs = 0usize;
    let mut min_ratio = f64::INFINITY;
    for m in 1..=n_max / 2 {
        for n in m..=n_max - m {
            pairs += 1;
            let ok = if W::EXACT {
                a[m].clone() * a[n].clone() <= a[m + n]
            } else {
                f[m] * f[n] <= f[m + n] * (1.0 + 1e-9)
            };
            if !ok {
                return Err(WalkError::CheckFailed(format!(
                    "a_{m} * a_{n} = {} exceeds a_{} = {}",
                    (a[m].clone() * a[n].clone()).render(),
                    m + n,
                    a[m + n].render()
                )));
            }
            let prod = f[m] * f[n];
            if prod > 0.0 {
                min_ratio = min_ratio.min(f[m + n] / prod);
            }
        }
    }
    Ok(SupermultiplicativityReport {
        pairs_checked: pairs,
        min_ratio,
    })
}

/// As [`check_supermultiplicativity`] on `ln a_n`, with additive slack `1e-9`.
pub fn check_supermultiplicativity_log(log_a: &[f64]) -> Result<SupermultiplicativityReport> {
    let n_max = log_a.len().saturating_sub(1);
    let mut pairs = 0usize;
    let mut min_log = f64::INFINITY;
    for m in 1..=n_max / 2 {
        for n in m..=n_max - m {
            pairs += 1;
            let lhs = log_a[m] + log_a[n];
            if lhs == f64::NEG_INFINITY {
                continue;
            }
            if lhs > log_a[m + n] + 1e-9 {
                return Err(WalkError::CheckFailed(format!(
                    "ln a_{m} + ln a_{n} = {lhs} exceeds ln a_{} = {}",
                    m + n,
                    log_a[m + n]
                )));
            }
            min_log = min_log.min(log_a[m + n] - lhs);
        }
    }
    Ok(SupermultiplicativityReport {
        pairs_checked: pairs,
        min_ratio: min_log.exp(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GerlReport {
    /// `a_n > 0` for all `n0 <= n <= n_max`.
    pub n0: usize,
    pub x0: String,
    /// `x0^-1` lies in `S^r0`.
    pub r0: usize,
    pub k0: usize,
    pub rho: f64,
    pub n_max: usize,
    /// Largest `a_n / rho^n` over `k0 <= n <= n_max`.
    pub max_normalized: f64,
}

/// Verifies `a_n < rho^n` for `k0 <= n <= n_max`, `k0 = n0 + r0`.
pub fn check_gerl_strict<W: Weight>(m: &SparseMeasure<W>, rho_exact: f64, n_max: usize, cap: usize) -> Result<GerlReport> {
    let log_a = log_return_sequence(m, n_max, cap)?;
    gerl_strict_from_log_sequence(m, &log_a, rho_exact, cap)
}

/// As [`check_gerl_strict`] on a precomputed sequence `ln a_n`.
pub fn gerl_strict_from_log_sequence<W: Weight>(
    m: &SparseMeasure<W>,
    log_a: &[f64],
    rho: f64,
    cap: usize,
) -> Result<GerlReport> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(WalkError::InvalidArgument(format!("certified rho must lie in (0, 1], got {rho}")));
    }
    let spec = m.spec();
    let e = spec.identity();
    let Some(x0) = m.support_vec().into_iter().find(|g| *g != e) else {
        return Err(WalkError::InvalidMeasure("support is {e}; the check is vacuous".into()));
    };
    let n_max = log_a.len().saturating_sub(1);
    let mut n0 = n_max + 1;
    while n0 > 1 && log_a[n0 - 1].is_finite() {
        n0 -= 1;
    }
    if n0 > n_max {
        return Err(WalkError::InsufficientData(format!("a_{n_max} is zero")));
    }
    let target = spec.inv(&x0)?;
    let r0 = first_power_containing(spec, m.support_vec(), &target, n_max, cap)?;
    let k0 = n0 + r0;
    let ln_rho = rho.ln();
    let mut max_normalized: f64 = 0.0;
    for (n, &v) in log_a.iter().enumerate().skip(k0) {
        let log_normalized = v - n as f64 * ln_rho;
        if !(log_normalized < 0.0) {
            return Err(WalkError::CheckFailed(format!("ln a_{n} = {v} is not below n ln rho")));
        }
        let normalized = log_normalized.exp();
        max_normalized = max_normalized.max(normalized);
    }
    Ok(GerlReport {
        n0,
        x0: spec.format_elem(&x0),
        r0,
        k0,
        rho,
        n_max,
        max_normalized,
    })
}

fn first_power_containing(
    spec: &Arc<GroupSpec>,
    support: Vec<GroupElem>,
    target: &GroupElem,
    n_max: usize,
    cap: usize,
) -> Result<usize> {
    let mut p = SupportPowers::new(spec.clone(), support, cap)?;
    for r in 1..=n_max.max(1) {
        p.advance()?;
        if p.contains(target) {
            return Ok(r);
        }
    }
    Err(WalkError::InsufficientData(format!(
        "{} not reached within {n_max} steps",
        spec.format_elem(target)
    )))
}

/// Period of a sequence `ln a_n`, i.e. the gcd of `n` with `a_n > 0`.
pub fn sequence_period(log_a: &[f64]) -> usize {
    log_a
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| v.is_finite())
        .fold(0usize, |g, (n, _)| g.gcd(&n))
}
