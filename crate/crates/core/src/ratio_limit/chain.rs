use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Result, WalkError};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub states: usize,
    /// `gcd{n <= n_max : min_x p^(n)(x, x) > 0}`.
    pub strong_period: usize,
    /// First `n` with a positive diagonal everywhere.
    pub first_positive_diagonal: usize,
    pub n_max: usize,
    /// `p^(n_max+1)(x, y) / p^(n_max)(x, y)` by row.
    pub final_ratios: Vec<Vec<f64>>,
    /// `(n, p^(n+1)(0, 0) / p^(n)(0, 0))` for `n = 1..=n_max`.
    pub diagonal_ratios: Vec<(usize, f64)>,
    /// Mean of the final ratios.
    pub ratio_limit: f64,
    /// Largest minus smallest final ratio.
    pub ratio_spread: f64,
    /// Dominant eigenvalue by power iteration.
    pub eigenvalue: f64,
    pub power_iterations: usize,
}

const POWER_ITER_MAX: usize = 100_000;
const POWER_ITER_TOL: f64 = 1e-15;

/// Ratio limit of a finite irreducible, strongly aperiodic substochastic
/// matrix, cross-checked against its dominant eigenvalue.
pub fn generic_chain_ratio(p: &[Vec<f64>], n_max: usize) -> Result<ChainReport> {
    let m = validate(p)?;
    let k = m.nrows();
    if !irreducible(&m) {
        return Err(WalkError::Reducible("the transition graph is not strongly connected".into()));
    }
    if n_max == 0 {
        return Err(WalkError::InvalidArgument("n_max must be positive".into()));
    }

    // P^n up to a positive factor, with max entry 1
    let mut cur = m.clone();
    normalize(&mut cur);
    let mut strong_period = 0usize;
    let mut first_positive_diagonal = 0usize;
    let mut diagonal_ratios = Vec::with_capacity(n_max);
    let mut final_ratios = vec![vec![0.0; k]; k];
    for n in 1..=n_max {
        if (0..k).all(|i| cur[(i, i)] > 0.0) {
            strong_period = strong_period.gcd(&n);
            if first_positive_diagonal == 0 {
                first_positive_diagonal = n;
            }
        }
        // cur has max entry 1, so the normalizing factor of cur * P is the
        // ratio of the scales of P^(n+1) and P^n
        let mut next = &cur * &m;
        let factor = normalize(&mut next);
        let d = if cur[(0, 0)] > 0.0 { factor * next[(0, 0)] / cur[(0, 0)] } else { f64::NAN };
        diagonal_ratios.push((n, d));
        if n == n_max {
            for (i, row) in final_ratios.iter_mut().enumerate() {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = if cur[(i, j)] > 0.0 { factor * next[(i, j)] / cur[(i, j)] } else { f64::NAN };
                }
            }
        }
        cur = next;
    }
    if strong_period != 1 {
        return Err(WalkError::InvalidArgument(format!(
            "not strongly aperiodic within {n_max} steps (gcd {strong_period})"
        )));
    }
    let flat: Vec<f64> = final_ratios.iter().flatten().copied().collect();
    if flat.iter().any(|r| !r.is_finite()) {
        return Err(WalkError::InsufficientData(format!("some p^({n_max})(x, y) vanish")));
    }
    let ratio_limit = flat.iter().sum::<f64>() / flat.len() as f64;
    let hi = flat.iter().copied().fold(f64::MIN, f64::max);
    let lo = flat.iter().copied().fold(f64::MAX, f64::min);
    let (eigenvalue, power_iterations) = power_iteration(&m)?;
    Ok(ChainReport {
        states: k,
        strong_period,
        first_positive_diagonal,
        n_max,
        final_ratios,
        diagonal_ratios,
        ratio_limit,
        ratio_spread: hi - lo,
        eigenvalue,
        power_iterations,
    })
}

fn validate(p: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let k = p.len();
    if k == 0 {
        return Err(WalkError::InvalidArgument("empty matrix".into()));
    }
    for (i, row) in p.iter().enumerate() {
        if row.len() != k {
            return Err(WalkError::InvalidArgument(format!("row {i} has {} entries, expected {k}", row.len())));
        }
        if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(WalkError::InvalidArgument(format!("row {i} has a negative or non-finite entry")));
        }
        let s: f64 = row.iter().sum();
        if s > 1.0 + 1e-12 {
            return Err(WalkError::InvalidArgument(format!("row {i} has mass {s}")));
        }
    }
    Ok(DMatrix::from_fn(k, k, |i, j| p[i][j]))
}

fn irreducible(m: &DMatrix<f64>) -> bool {
    let k = m.nrows();
    (0..k).all(|start| {
        let mut seen = vec![false; k];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in 0..k {
                if m[(i, j)] > 0.0 && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    })
}

/// Divides by the largest entry and returns it.
fn normalize(m: &mut DMatrix<f64>) -> f64 {
    let max = m.max();
    if max > 0.0 {
        *m /= max;
    }
    max
}

fn power_iteration(m: &DMatrix<f64>) -> Result<(f64, usize)> {
    let k = m.nrows();
    let mut v = DVector::from_element(k, 1.0 / k as f64);
    let mut lambda = 0.0;
    for it in 1..=POWER_ITER_MAX {
        let w = m * &v;
        let norm = w.lp_norm(1);
        if norm == 0.0 {
            return Ok((0.0, it));
        }
        let w = w / norm;
        let change = (&w - &v).amax();
        v = w;
        let prev = lambda;
        lambda = norm;
        if change < POWER_ITER_TOL && (lambda - prev).abs() < POWER_ITER_TOL {
            return Ok((lambda, it));
        }
    }
    Err(WalkError::NoConvergence(format!(
        "power iteration did not settle in {POWER_ITER_MAX} iterations"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spectral_radius(p: &[Vec<f64>]) -> f64 {
        let k = p.len();
        DMatrix::from_fn(k, k, |i, j| p[i][j])
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn one_state() {
        let r = generic_chain_ratio(&[vec![0.4]], 50).unwrap();
        assert!(r.diagonal_ratios.iter().all(|&(_, x)| (x - 0.4).abs() < 1e-15));
        assert!((r.eigenvalue - 0.4).abs() < 1e-15);
    }

    #[test]
    fn doubly_stochastic_two_states() {
        let r = generic_chain_ratio(&[vec![0.6, 0.4], vec![0.4, 0.6]], 200).unwrap();
        assert!((r.ratio_limit - 1.0).abs() < 1e-12);
        assert!((r.eigenvalue - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_substochastic_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let p: Vec<Vec<f64>> = (0..5)
                .map(|_| {
                    let row: Vec<f64> = (0..5).map(|_| rng.random_range(0.05..1.0)).collect();
                    let s: f64 = row.iter().sum::<f64>() / rng.random_range(0.5..1.0);
                    row.into_iter().map(|v| v / s).collect()
                })
                .collect();
            let r = generic_chain_ratio(&p, 2000).unwrap();
            let oracle = spectral_radius(&p);
            assert!((r.ratio_limit - oracle).abs() < 1e-6);
            assert!((r.eigenvalue - oracle).abs() < 1e-9);
            assert!(r.ratio_spread < 1e-9);
        }
    }

    #[test]
    fn periodic_and_reducible_inputs_are_rejected() {
        assert!(generic_chain_ratio(&[vec![0.0, 1.0], vec![1.0, 0.0]], 50).is_err());
        assert!(generic_chain_ratio(&[vec![0.5, 0.5], vec![0.0, 1.0]], 50).is_err());
        assert!(generic_chain_ratio(&[vec![0.7, 0.7], vec![0.5, 0.5]], 50).is_err());
        assert!(generic_chain_ratio(&[vec![0.5], vec![0.5]], 50).is_err());
    }

    #[test]
    fn long_horizons_do_not_underflow() {
        let r = generic_chain_ratio(&[vec![0.01, 0.01], vec![0.01, 0.01]], 3000).unwrap();
        assert!((r.ratio_limit - 0.02).abs() < 1e-14);
    }
}
