use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Result, WalkError};
use crate::group::{Explorer, GroupElem, GroupSpec};
use crate::weight::Weight;

use super::{SparseMeasure, SupportSet};

/// Streaming convolution powers `mu^(0) = delta_e, mu^(1), mu^(2), ...`.
///
/// Each step pushes the current mass along the cached Cayley edges
/// `x -> x * s`. Contributions to an output element are accumulated in the
/// order of the source element ids, and ids are handed out in a
/// deterministic discovery order, so float results are reproducible bit for
/// bit.
#[derive(Clone, Debug)]
pub struct ConvolutionPowers<W> {
    explorer: Explorer,
    step: Vec<W>,
    dist: Vec<W>,
    support: Vec<u32>,
    n: usize,
    prune: Option<f64>,
    pruned_mass: f64,
    rescale: bool,
    log_scale: f64,
}

impl<W: Weight> ConvolutionPowers<W> {
    pub fn new(m: &SparseMeasure<W>, cap: usize) -> Result<Self> {
        let (steps, step): (Vec<GroupElem>, Vec<W>) = m.iter().map(|(g, w)| (g.clone(), w.clone())).unzip();
        let explorer = Explorer::new(m.spec().clone(), steps, cap)?;
        Ok(Self {
            explorer,
            step,
            dist: vec![W::one()],
            support: vec![0],
            n: 0,
            prune: None,
            pruned_mass: 0.0,
            rescale: false,
            log_scale: 0.0,
        })
    }

    /// Drops entries below `threshold` after every step. Off by default;
    /// the removed mass is tracked in [`Self::pruned_mass`].
    pub fn with_prune(mut self, threshold: Option<f64>) -> Self {
        self.prune = threshold;
        self
    }

    /// Keeps float weights in range by dividing them by their maximum
    /// whenever it leaves `[1e-100, 1e100]`. Stored values are then
    /// `mu^(n)(g) / exp(log_scale)`; exact weights are never rescaled.
    pub fn with_rescale(mut self, on: bool) -> Self {
        self.rescale = on && !W::EXACT;
        self
    }

    /// Natural log of the factor divided out of the stored values.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `ln mu^(n)(id)`, `-inf` outside the support.
    pub fn log_at_id(&self, id: u32) -> f64 {
        self.at_id(id).as_f64().ln() + self.log_scale
    }

    pub fn log_at(&self, g: &GroupElem) -> f64 {
        self.explorer
            .id_of(g)
            .map_or(f64::NEG_INFINITY, |id| self.log_at_id(id))
    }

    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    /// Current exponent `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn explorer(&self) -> &Explorer {
        &self.explorer
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// `mu^(n)(g)` for the current `n`, divided by `exp(log_scale)`.
    pub fn at(&self, g: &GroupElem) -> W {
        self.explorer
            .id_of(g)
            .map(|id| self.at_id(id))
            .unwrap_or_else(W::zero)
    }

    pub fn at_id(&self, id: u32) -> W {
        self.dist.get(id as usize).cloned().unwrap_or_else(W::zero)
    }

    pub fn at_identity(&self) -> W {
        self.at_id(0)
    }

    /// Advances to `n + 1`. On error the state is left at `n`.
    pub fn advance(&mut self) -> Result<()> {
        let k = self.step.len();
        let mut next: Vec<W> = vec![W::zero(); self.explorer.len()];
        let mut touched: Vec<u32> = Vec::with_capacity(self.support.len() + k);
        for &x in &self.support {
            let wx = &self.dist[x as usize];
            for j in 0..k {
                let z = self.explorer.successor(x, j).map_err(|e| with_reached(e, self.n))?;
                let zi = z as usize;
                if zi >= next.len() {
                    next.resize(self.explorer.len(), W::zero());
                }
                let c = wx.clone() * self.step[j].clone();
                if next[zi].is_zero() {
                    touched.push(z);
                }
                next[zi] += &c;
            }
        }
        touched.sort_unstable();
        touched.dedup();
        if let Some(t) = self.prune {
            let scale = self.log_scale.exp();
            for &z in &touched {
                let v = next[z as usize].as_f64() * scale;
                if v < t {
                    self.pruned_mass += v;
                    next[z as usize] = W::zero();
                }
            }
        }
        touched.retain(|&z| !next[z as usize].is_zero());
        if self.rescale {
            let max = touched.iter().map(|&z| next[z as usize].as_f64()).fold(0.0, f64::max);
            if max > 0.0 && !(1e-100..=1e100).contains(&max) {
                let factor = num_rational::BigRational::from_float(1.0 / max).map(|r| W::from_ratio(&r));
                if let Some(factor) = factor {
                    for &z in &touched {
                        next[z as usize] = next[z as usize].clone() * factor.clone();
                    }
                    self.log_scale += max.ln();
                }
            }
        }
        self.dist = next;
        self.support = touched;
        self.n += 1;
        Ok(())
    }

    /// The current power as a measure in canonical order (scaled when
    /// rescaling is on).
    pub fn measure(&self) -> SparseMeasure<W> {
        let weights: BTreeMap<GroupElem, W> = self
            .support
            .iter()
            .map(|&id| (self.explorer.elem(id).clone(), self.dist[id as usize].clone()))
            .collect();
        SparseMeasure::from_parts(self.explorer.spec().clone(), weights)
    }
}

fn with_reached(e: WalkError, n: usize) -> WalkError {
    match e {
        WalkError::CapExceeded { cap, .. } => WalkError::CapExceeded { cap, reached: Some(n) },
        other => other,
    }
}

/// Prefix of powers computed before a failure, plus the failure.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error} (computed {} powers)", computed.len())]
pub struct PowerError<W: std::fmt::Debug> {
    pub computed: Vec<SparseMeasure<W>>,
    pub error: WalkError,
}

/// `[mu^(1), ..., mu^(n)]`.
pub fn power<W: Weight>(
    m: &SparseMeasure<W>,
    n: usize,
    cap: usize,
) -> std::result::Result<Vec<SparseMeasure<W>>, PowerError<W>> {
    if n == 0 {
        return Err(PowerError {
            computed: Vec::new(),
            error: WalkError::InvalidArgument("power requires n >= 1".into()),
        });
    }
    let mut engine = ConvolutionPowers::new(m, cap).map_err(|error| PowerError {
        computed: Vec::new(),
        error,
    })?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        if let Err(error) = engine.advance() {
            return Err(PowerError { computed: out, error });
        }
        out.push(engine.measure());
    }
    Ok(out)
}

/// Streaming support powers `S^0 = {e}, S^1, S^2, ...` (boolean convolution).
#[derive(Clone, Debug)]
pub struct SupportPowers {
    explorer: Explorer,
    current: Vec<u32>,
    n: usize,
}

impl SupportPowers {
    pub fn new(spec: Arc<GroupSpec>, support: Vec<GroupElem>, cap: usize) -> Result<Self> {
        if support.is_empty() {
            return Err(WalkError::InvalidArgument("empty support".into()));
        }
        Ok(Self {
            explorer: Explorer::new(spec, support, cap)?,
            current: vec![0],
            n: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn explorer(&self) -> &Explorer {
        &self.explorer
    }

    pub fn explorer_mut(&mut self) -> &mut Explorer {
        &mut self.explorer
    }

    /// Ids of the current set `S^n`, ascending.
    pub fn ids(&self) -> &[u32] {
        &self.current
    }

    pub fn contains_identity(&self) -> bool {
        self.current.first() == Some(&0)
    }

    pub fn contains(&self, g: &GroupElem) -> bool {
        self.explorer
            .id_of(g)
            .is_some_and(|id| self.current.binary_search(&id).is_ok())
    }

    pub fn advance(&mut self) -> Result<()> {
        let k = self.explorer.steps().len();
        let mut next = Vec::with_capacity(self.current.len() * k);
        for &x in &self.current {
            for j in 0..k {
                next.push(self.explorer.successor(x, j).map_err(|e| with_reached(e, self.n))?);
            }
        }
        next.sort_unstable();
        next.dedup();
        self.current = next;
        self.n += 1;
        Ok(())
    }

    pub fn set(&self) -> SupportSet {
        SupportSet::new(
            self.explorer.spec().clone(),
            self.current.iter().map(|&id| self.explorer.elem(id).clone()),
        )
    }
}

/// `[S^1, ..., S^n]`.
pub fn support_power(s: &SupportSet, n: usize, cap: usize) -> Result<Vec<SupportSet>> {
    let mut engine = SupportPowers::new(s.spec.clone(), s.elements.iter().cloned().collect(), cap)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        engine.advance()?;
        out.push(engine.set());
    }
    Ok(out)
}
