use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::fit::fit_line;

/// `ln(n!) - ((n + 1/2) ln n - n + ln sqrt(2 pi))` for `n = 0..=15`.
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_09,
    0.027_677_925_684_998_339_15,
    0.020_790_672_103_765_093_11,
    0.016_644_691_189_821_192_16,
    0.013_876_128_823_070_747_99,
    0.011_896_709_945_891_770_10,
    0.010_411_265_261_972_096_50,
    0.009_255_462_182_712_732_918,
    0.008_330_563_433_362_871_256,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_866,
    0.006_408_994_188_004_207_068,
    0.005_951_370_112_758_847_736,
    0.005_554_733_551_962_801_371,
];

/// Error of Stirling's formula for `ln(n!)`.
fn stirlerr(n: u64) -> f64 {
    if n <= 15 {
        return STIRLERR_TABLE[n as usize];
    }
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    let n = n as f64;
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, accurate when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1.. {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// `C(n, k) a^k (1-a)^(n-k)` by the saddle point expansion, which keeps full
/// relative accuracy for large `n`.
fn dbinom(k: u64, n: u64, a: f64) -> f64 {
    let b = 1.0 - a;
    if k == 0 {
        return if n == 0 { 1.0 } else { (n as f64 * b.ln()).exp() };
    }
    if k == n {
        return (n as f64 * a.ln()).exp();
    }
    let (kf, nf) = (k as f64, n as f64);
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * a) - bd0(nf - kf, nf * b);
    let lf = std::f64::consts::TAU.ln() + kf.ln() + (-kf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `p_a(n, k)` for `k = 0..=n`.
pub fn bernoulli_pmf(a: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && a < 1.0) {
        return Err(WalkError::InvalidArgument(format!("a = {a} must lie in (0, 1)")));
    }
    Ok((0..=n as u64).map(|k| dbinom(k, n as u64, a)).collect())
}

/// Exponential bound `tail_n <= exp(c - delta n)` fitted to a tail sequence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailFit {
    /// `(n, tail_n)`.
    pub values: Vec<(usize, f64)>,
    /// Least-squares decay rate of `ln tail_n`; infinite when every tail is 0.
    #[serde(serialize_with = "crate::fit::serialize_extended")]
    pub fitted_delta: f64,
    /// Smallest `c` with `tail_n <= exp(c - delta n)` for every `n`.
    #[serde(serialize_with = "crate::fit::serialize_extended")]
    pub fitted_c: f64,
    pub dominated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernoulliCheck {
    pub a: f64,
    pub epsilon: f64,
    /// `sum_{k not in C_n(eps)} p_a(n, k)` with
    /// `C_n(eps) = {k : p_a(n, k) <= (1 + eps) p_a(n + 1, k + 1)}`.
    pub upper: TailFit,
    /// `sum_{k not in D_n(eps)} p_a(n + 1, k + 1)` with
    /// `D_n(eps) = {k : p_a(n + 1, k + 1) <= (1 + eps) p_a(n, k)}`.
    pub lower: TailFit,
    /// Largest `|sum_k p_a(n, k) - 1|` over the range.
    pub normalization_error: f64,
    /// Both decay rates are positive and both bounds dominate their tails.
    pub passed: bool,
}

/// Large-deviation tails of the binomial pmf over `n_lo <= n <= n_hi`, with
/// set membership decided by direct comparison of pmf values.
pub fn bernoulli_tail_check(a: f64, epsilon: f64, n_lo: usize, n_hi: usize) -> Result<BernoulliCheck> {
    if !(epsilon > 0.0) {
        return Err(WalkError::InvalidArgument(format!("epsilon = {epsilon} must be positive")));
    }
    if n_lo > n_hi {
        return Err(WalkError::InvalidArgument(format!("empty range [{n_lo}, {n_hi}]")));
    }
    let mut upper = Vec::with_capacity(n_hi - n_lo + 1);
    let mut lower = Vec::with_capacity(n_hi - n_lo + 1);
    let mut normalization_error: f64 = 0.0;
    let mut next = bernoulli_pmf(a, n_lo)?;
    for n in n_lo..=n_hi {
        let cur = next;
        next = bernoulli_pmf(a, n + 1)?;
        normalization_error = normalization_error.max((cur.iter().sum::<f64>() - 1.0).abs());
        let (mut tc, mut td) = (0.0, 0.0);
        for k in 0..=n {
            if cur[k] > (1.0 + epsilon) * next[k + 1] {
                tc += cur[k];
            }
            if next[k + 1] > (1.0 + epsilon) * cur[k] {
                td += next[k + 1];
            }
        }
        upper.push((n, tc.min(1.0)));
        lower.push((n, td.min(1.0)));
    }
    let upper = fit_tail(upper);
    let lower = fit_tail(lower);
    let passed = upper.fitted_delta > 0.0 && lower.fitted_delta > 0.0 && upper.dominated && lower.dominated;
    Ok(BernoulliCheck {
        a,
        epsilon,
        upper,
        lower,
        normalization_error,
        passed,
    })
}

fn fit_tail(values: Vec<(usize, f64)>) -> TailFit {
    let positive: Vec<(f64, f64)> = values
        .iter()
        .filter(|(_, t)| *t > 0.0)
        .map(|&(n, t)| (n as f64, t.ln()))
        .collect();
    if positive.is_empty() {
        return TailFit {
            values,
            fitted_delta: f64::INFINITY,
            fitted_c: f64::NEG_INFINITY,
            dominated: true,
        };
    }
    let xs: Vec<f64> = positive.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = positive.iter().map(|p| p.1).collect();
    let delta = fit_line(&xs, &ys).map_or(0.0, |f| -f.slope);
    let c = positive
        .iter()
        .map(|&(n, lt)| lt + delta * n)
        .fold(f64::NEG_INFINITY, f64::max);
    let dominated = values
        .iter()
        .all(|&(n, t)| t == 0.0 || t.ln() <= c - delta * n as f64 + 1e-12);
    TailFit {
        values,
        fitted_delta: delta,
        fitted_c: c,
        dominated,
    }
}
