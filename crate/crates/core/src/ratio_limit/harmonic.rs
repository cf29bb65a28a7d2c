use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::convolution::SparseMeasure;
use crate::error::{Result, WalkError};
use crate::group::{Explorer, GroupElem, GroupSpec};
use crate::spectral::{laplace_min, LogPowers};
use crate::surd::QuadSurd;
use crate::weight::Weight;

/// Positive function on a group.
#[derive(Clone, Debug, PartialEq)]
pub enum GroupFunction<W> {
    Table(BTreeMap<GroupElem, W>),
    /// `prod_i base_i^(x_i)` on `Z^d`.
    Exponential { base: Vec<W> },
    Constant(W),
}

impl<W: Weight> GroupFunction<W> {
    pub fn value(&self, g: &GroupElem) -> Option<W> {
        match self {
            GroupFunction::Table(t) => t.get(g).cloned(),
            GroupFunction::Constant(c) => Some(c.clone()),
            GroupFunction::Exponential { base } => {
                let GroupElem::Vector(x) = g else { return None };
                if x.len() != base.len() {
                    return None;
                }
                let mut acc = W::one();
                for (b, &xi) in base.iter().zip(x) {
                    let p = b.powi(xi.unsigned_abs() as usize);
                    acc = if xi >= 0 { acc * p } else { acc / p };
                }
                Some(acc)
            }
        }
    }

    pub fn to_f64(&self) -> GroupFunction<f64> {
        match self {
            GroupFunction::Table(t) => GroupFunction::Table(t.iter().map(|(g, w)| (g.clone(), w.as_f64())).collect()),
            GroupFunction::Exponential { base } => GroupFunction::Exponential {
                base: base.iter().map(|b| b.as_f64()).collect(),
            },
            GroupFunction::Constant(c) => GroupFunction::Constant(c.as_f64()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HarmonicKind {
    Harmonic,
    Subharmonic,
}

/// `h` with `sum_y mu(x^-1 y) h(y) <= rho h(x)` (equality when harmonic).
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicFn<W> {
    pub spec: Arc<GroupSpec>,
    pub values: GroupFunction<W>,
    pub rho: W,
    pub kind: HarmonicKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointSlack {
    pub x: String,
    /// `rho h(x) - sum_s mu(s) h(x s)`.
    pub slack: f64,
    pub harmonic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarmonicReport {
    pub points: Vec<PointSlack>,
    pub harmonic_points: usize,
    pub strict_points: usize,
}

/// Relative tolerance for float equality and violations.
const HARMONIC_TOL: f64 = 1e-9;

/// Checks `sum_s mu(s) h(x s) <= rho h(x)` at every window point. Errors on
/// a violation, a missing or nonpositive value, or a strict point when `h`
/// claims to be harmonic.
pub fn harmonic_check<W: Weight>(m: &SparseMeasure<W>, h: &HarmonicFn<W>, window: &[GroupElem]) -> Result<HarmonicReport> {
    let spec = m.spec();
    if spec != &h.spec {
        return Err(WalkError::BackendMismatch("measure and h live on different groups".into()));
    }
    let value = |g: &GroupElem| -> Result<W> {
        let v = h
            .values
            .value(g)
            .ok_or_else(|| WalkError::MissingValue(format!("h({})", spec.format_elem(g))))?;
        if !v.is_positive() {
            return Err(WalkError::InvalidArgument(format!("h({}) is not positive", spec.format_elem(g))));
        }
        Ok(v)
    };
    let mut points = Vec::with_capacity(window.len());
    let (mut harmonic_points, mut strict_points) = (0, 0);
    for x in window {
        let hx = value(x)?;
        let mut sum = W::zero();
        for (s, w) in m.iter() {
            sum += &(w.clone() * value(&spec.mul(x, s)?)?);
        }
        let bound = h.rho.clone() * hx;
        let slack = bound.clone() - sum;
        let scale = bound.as_f64().abs();
        let (violated, harmonic) = if W::EXACT {
            (slack < W::zero(), slack.is_zero())
        } else {
            let s = slack.as_f64();
            (s < -HARMONIC_TOL * scale, s.abs() <= HARMONIC_TOL * scale)
        };
        if violated {
            return Err(WalkError::CheckFailed(format!(
                "h is not rho-subharmonic at {}: slack {}",
                spec.format_elem(x),
                slack.render()
            )));
        }
        if !harmonic && h.kind == HarmonicKind::Harmonic {
            return Err(WalkError::CheckFailed(format!(
                "h is strictly subharmonic at {} (slack {}) but declared harmonic",
                spec.format_elem(x),
                slack.render()
            )));
        }
        if harmonic {
            harmonic_points += 1;
        } else {
            strict_points += 1;
        }
        points.push(PointSlack {
            x: spec.format_elem(x),
            slack: slack.as_f64(),
            harmonic,
        });
    }
    Ok(HarmonicReport {
        points,
        harmonic_points,
        strict_points,
    })
}

/// Doob transform `p_h(x, y) = mu(x^-1 y) h(y) / (rho h(x))` on a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct HProcess<W> {
    pub base: SparseMeasure<W>,
    pub h: HarmonicFn<W>,
    pub rho: W,
    pub rows: BTreeMap<GroupElem, BTreeMap<GroupElem, W>>,
    pub check: HarmonicReport,
}

impl<W: Weight> HProcess<W> {
    pub fn row_mass(&self, x: &GroupElem) -> Option<W> {
        self.rows.get(x).map(|row| {
            let mut acc = W::zero();
            for w in row.values() {
                acc += w;
            }
            acc
        })
    }
}

pub fn build_h_process<W: Weight>(m: &SparseMeasure<W>, h: &HarmonicFn<W>, domain: &[GroupElem]) -> Result<HProcess<W>> {
    let check = harmonic_check(m, h, domain)?;
    let spec = m.spec();
    let mut rows = BTreeMap::new();
    for x in domain {
        let denom = h.rho.clone() * h.values.value(x).expect("checked");
        let mut row = BTreeMap::new();
        let mut mass = W::zero();
        for (s, w) in m.iter() {
            let y = spec.mul(x, s)?;
            let p = w.clone() * h.values.value(&y).expect("checked") / denom.clone();
            mass += &p;
            *row.entry(y).or_insert_with(W::zero) += &p;
        }
        let over = if W::EXACT {
            mass > W::one()
        } else {
            mass.as_f64() > 1.0 + HARMONIC_TOL
        };
        if over {
            return Err(WalkError::CheckFailed(format!(
                "row {} has mass {}",
                spec.format_elem(x),
                mass.render()
            )));
        }
        rows.insert(x.clone(), row);
    }
    Ok(HProcess {
        base: m.clone(),
        h: h.clone(),
        rho: h.rho.clone(),
        rows,
        check,
    })
}

/// `h(x) = exp(<c, x>)` with `c` the Laplace minimizer and `rho` the
/// minimum: a `rho`-harmonic function for any finite measure on `Z^d`.
pub fn exponential_h<W: Weight>(m: &SparseMeasure<W>) -> Result<HarmonicFn<f64>> {
    let lm = laplace_min(m)?;
    Ok(HarmonicFn {
        spec: m.spec().clone(),
        values: GroupFunction::Exponential {
            base: lm.minimizer.iter().map(|c| c.exp()).collect(),
        },
        rho: lm.rho,
        kind: HarmonicKind::Harmonic,
    })
}

/// Exact version of [`exponential_h`] for nearest-neighbour measures on
/// `Z^d` (support in `{0, +-e_i}`): `h(x) = prod_i (q_i / p_i)^(x_i / 2)` and
/// `rho = mu(0) + 2 sum_i sqrt(p_i q_i)`, over `Q(sqrt D)`. All the
/// `sqrt(p_i q_i)` must lie in one quadratic field.
pub fn nearest_neighbour_doob(m: &SparseMeasure<BigRational>) -> Result<(SparseMeasure<QuadSurd>, HarmonicFn<QuadSurd>)> {
    let GroupSpec::FreeAbelian { rank } = m.spec().as_ref() else {
        return Err(WalkError::Unsupported("the free_abelian backend".into()));
    };
    let mut p = vec![BigRational::zero(); *rank];
    let mut q = vec![BigRational::zero(); *rank];
    let mut lazy = BigRational::zero();
    for (g, w) in m.iter() {
        let GroupElem::Vector(x) = g else { unreachable!("free abelian elements are vectors") };
        let nonzero: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0).collect();
        match nonzero.as_slice() {
            [] => lazy = w.clone(),
            [i] if x[*i].abs() == 1 => {
                if x[*i] == 1 {
                    p[*i] = w.clone();
                } else {
                    q[*i] = w.clone();
                }
            }
            _ => return Err(WalkError::Unsupported("nearest-neighbour support".into())),
        }
    }
    let mut rho = QuadSurd::from_rational(lazy);
    let mut base = Vec::with_capacity(*rank);
    for i in 0..*rank {
        if p[i].is_zero() || q[i].is_zero() {
            return Err(WalkError::InvalidMeasure(format!(
                "coordinate {} moves in one direction only",
                i + 1
            )));
        }
        let root = QuadSurd::sqrt_of(&(p[i].clone() * q[i].clone()))
            .ok_or_else(|| WalkError::Unsupported("quadratic radicands of this size".into()))?;
        // sqrt(q/p) = sqrt(pq) / p
        let t = root.clone() / QuadSurd::from_rational(p[i].clone());
        let two = QuadSurd::from_rational(BigRational::from_integer(2.into()));
        rho = checked_add(rho, two * root)?;
        base.push(t);
    }
    let surd_measure = m.map_weights(|w| QuadSurd::from_rational(w.clone()));
    Ok((
        surd_measure,
        HarmonicFn {
            spec: m.spec().clone(),
            values: GroupFunction::Exponential { base },
            rho,
            kind: HarmonicKind::Harmonic,
        },
    ))
}

fn checked_add(a: QuadSurd, b: QuadSurd) -> Result<QuadSurd> {
    if a.is_rational() || b.is_rational() || a.surd_part().1 == b.surd_part().1 {
        Ok(a + b)
    } else {
        Err(WalkError::Unsupported("square roots from different quadratic fields".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagEntry {
    pub n: usize,
    /// `p_h^(n)(e, e)` by iterating the h-process rows.
    pub p_h: f64,
    /// `mu^(n)(e) / rho^n` from the base walk.
    pub normalized_return: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagReport {
    pub entries: Vec<DiagEntry>,
    pub max_relative_error: f64,
    /// `p_h^(n)(e, e)^(1/n)` at the last `n` with a positive diagonal.
    pub last_root: Option<(usize, f64)>,
    /// Whether `0 < p_h^(n)(e, e) < 1` at every `n >= 1` with a positive diagonal.
    pub strictly_below_one: bool,
}

/// Diagonal `p_h^(n)(e, e)` of the h-process, computed from its rows in
/// double precision, next to `mu^(n)(e) / rho^n` from the base walk.
pub fn h_process_diag<W: Weight>(hp: &HProcess<W>, n_max: usize, cap: usize) -> Result<DiagReport> {
    let base = hp.base.to_f64();
    let spec = base.spec().clone();
    let h = hp.h.values.to_f64();
    let rho = hp.rho.as_f64();
    let (steps, mass): (Vec<GroupElem>, Vec<f64>) = base.iter().map(|(g, w)| (g.clone(), *w)).unzip();
    let mut explorer = Explorer::new(spec.clone(), steps, cap)?;
    let mut hval: Vec<f64> = Vec::new();
    let h_of = |explorer: &Explorer, hval: &mut Vec<f64>, id: u32| -> Result<f64> {
        while hval.len() <= id as usize {
            let g = explorer.elem(hval.len() as u32);
            let v = h
                .value(g)
                .ok_or_else(|| WalkError::MissingValue(format!("h({})", spec.format_elem(g))))?;
            hval.push(v);
        }
        Ok(hval[id as usize])
    };
    let mut dist: Vec<f64> = vec![1.0];
    let mut support: Vec<u32> = vec![0];
    let mut base_powers = LogPowers::new(&hp.base, cap)?;
    let log_rho = rho.ln();
    let mut entries = Vec::with_capacity(n_max);
    let mut max_rel: f64 = 0.0;
    let mut last_root = None;
    let mut strictly_below_one = true;
    for n in 1..=n_max {
        let mut next = vec![0.0; explorer.len()];
        let mut touched = Vec::new();
        for &x in &support {
            let wx = dist[x as usize];
            let hx = h_of(&explorer, &mut hval, x)?;
            for (j, mj) in mass.iter().enumerate() {
                let y = explorer.successor(x, j)?;
                let hy = h_of(&explorer, &mut hval, y)?;
                if y as usize >= next.len() {
                    next.resize(explorer.len(), 0.0);
                }
                if next[y as usize] == 0.0 {
                    touched.push(y);
                }
                next[y as usize] += wx * mj * hy / (rho * hx);
            }
        }
        touched.sort_unstable();
        touched.dedup();
        touched.retain(|&y| next[y as usize] > 0.0);
        dist = next;
        support = touched;
        base_powers.advance()?;

        let p_h = dist.first().copied().unwrap_or(0.0);
        let log_norm = base_powers.log_at_identity() - n as f64 * log_rho;
        let normalized_return = log_norm.exp();
        let relative_error = if p_h == 0.0 && normalized_return == 0.0 {
            0.0
        } else if p_h > 0.0 && log_norm.is_finite() {
            (p_h.ln() - log_norm).exp_m1().abs()
        } else {
            f64::INFINITY
        };
        max_rel = max_rel.max(relative_error);
        if p_h > 0.0 {
            last_root = Some((n, (p_h.ln() / n as f64).exp()));
            if p_h >= 1.0 {
                strictly_below_one = false;
            }
        }
        entries.push(DiagEntry {
            n,
            p_h,
            normalized_return,
            relative_error,
        });
    }
    Ok(DiagReport {
        entries,
        max_relative_error: max_rel,
        last_root,
        strictly_below_one,
    })
}
