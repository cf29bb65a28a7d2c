use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Result, WalkError};
use crate::group::{GroupElem, GroupSpec, DEFAULT_CAP};
use crate::weight::{parse_probability, Weight};

/// Finitely supported nonnegative measure of total mass at most one.
///
/// Weights are kept in canonical element order and are strictly positive;
/// zero entries never appear in the map.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMeasure<W> {
    spec: Arc<GroupSpec>,
    weights: BTreeMap<GroupElem, W>,
}

/// Set of elements, e.g. the support `S` of a measure or its power `S^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    pub spec: Arc<GroupSpec>,
    pub elements: BTreeSet<GroupElem>,
}

impl<W: Weight> SparseMeasure<W> {
    /// Builds and validates a measure. Repeated elements are summed and zero
    /// weights dropped.
    pub fn new(spec: Arc<GroupSpec>, entries: impl IntoIterator<Item = (GroupElem, W)>) -> Result<Self> {
        let finite_elements = match spec.as_ref() {
            GroupSpec::FinitePerm { .. } => Some(spec.elements(DEFAULT_CAP)?),
            _ => None,
        };
        let mut weights: BTreeMap<GroupElem, W> = BTreeMap::new();
        for (g, w) in entries {
            spec.check(&g)?;
            if !spec.contains(&g, finite_elements.as_deref()) {
                return Err(WalkError::NotInGroup(spec.format_elem(&g)));
            }
            if w < W::zero() {
                return Err(WalkError::InvalidMeasure(format!(
                    "negative weight {} at {}",
                    w.render(),
                    spec.format_elem(&g)
                )));
            }
            *weights.entry(g).or_insert_with(W::zero) += &w;
        }
        weights.retain(|_, w| !w.is_zero());
        let m = Self { spec, weights };
        m.validate()?;
        Ok(m)
    }

    /// Parses `(element, probability)` pairs in the element grammar.
    pub fn from_text<S: AsRef<str>>(spec: Arc<GroupSpec>, entries: &[(S, S)]) -> Result<Self> {
        let mut parsed = Vec::with_capacity(entries.len());
        for (e, p) in entries {
            let g = spec.parse_elem(e.as_ref())?;
            let (r, _) = parse_probability(p.as_ref())?;
            parsed.push((g, W::from_ratio(&r)));
        }
        Self::new(spec, parsed)
    }

    pub(crate) fn from_parts(spec: Arc<GroupSpec>, weights: BTreeMap<GroupElem, W>) -> Self {
        debug_assert!(weights.values().all(|w| !w.is_zero()));
        Self { spec, weights }
    }

    /// Checks positivity, nonempty support and `mass <= 1 + tol`.
    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(WalkError::InvalidMeasure("empty support".into()));
        }
        if let Some((g, w)) = self.weights.iter().find(|(_, w)| !w.is_positive()) {
            return Err(WalkError::InvalidMeasure(format!(
                "nonpositive weight {} at {}",
                w.render(),
                self.spec.format_elem(g)
            )));
        }
        let mass = self.total_mass();
        if W::EXACT {
            if mass > W::one() {
                return Err(WalkError::InvalidMeasure(format!("mass {} exceeds 1", mass.render())));
            }
        } else if mass.as_f64() > 1.0 + W::mass_tolerance() {
            return Err(WalkError::InvalidMeasure(format!("mass {} exceeds 1", mass.render())));
        }
        Ok(())
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn weights(&self) -> &BTreeMap<GroupElem, W> {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElem, &W)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, g: &GroupElem) -> W {
        self.weights.get(g).cloned().unwrap_or_else(W::zero)
    }

    /// Sum of weights in canonical order.
    pub fn total_mass(&self) -> W {
        let mut acc = W::zero();
        for w in self.weights.values() {
            acc += w;
        }
        acc
    }

    pub fn is_probability(&self) -> bool {
        let mass = self.total_mass();
        if W::EXACT {
            mass == W::one()
        } else {
            (mass.as_f64() - 1.0).abs() <= W::mass_tolerance()
        }
    }

    pub fn require_probability(&self) -> Result<()> {
        if self.is_probability() {
            Ok(())
        } else {
            Err(WalkError::InvalidMeasure(format!(
                "expected a probability measure, mass is {}",
                self.total_mass().render()
            )))
        }
    }

    pub fn support(&self) -> SupportSet {
        SupportSet {
            spec: self.spec.clone(),
            elements: self.weights.keys().cloned().collect(),
        }
    }

    pub fn support_vec(&self) -> Vec<GroupElem> {
        self.weights.keys().cloned().collect()
    }

    /// The reflected measure `x -> m(x^-1)`.
    pub fn reverse(&self) -> Self {
        let weights = self
            .weights
            .iter()
            .map(|(g, w)| (self.spec.inv(g).expect("canonical element"), w.clone()))
            .collect();
        Self::from_parts(self.spec.clone(), weights)
    }

    /// Same measure with weights mapped into another scalar type.
    pub fn map_weights<V: Weight>(&self, f: impl Fn(&W) -> V) -> SparseMeasure<V> {
        let weights = self
            .weights
            .iter()
            .map(|(g, w)| (g.clone(), f(w)))
            .filter(|(_, w)| !w.is_zero())
            .collect();
        SparseMeasure::from_parts(self.spec.clone(), weights)
    }

    pub fn to_f64(&self) -> SparseMeasure<f64> {
        self.map_weights(|w| w.as_f64())
    }

    /// Whether `m(x) = m(x^-1)` for all `x`.
    pub fn is_symmetric(&self) -> bool {
        self.weights
            .iter()
            .all(|(g, w)| self.spec.inv(g).map(|h| self.get(&h) == *w).unwrap_or(false))
    }
}

impl SupportSet {
    pub fn new(spec: Arc<GroupSpec>, elements: impl IntoIterator<Item = GroupElem>) -> Self {
        Self {
            spec,
            elements: elements.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, g: &GroupElem) -> bool {
        self.elements.contains(g)
    }

    /// Product set `A * B`.
    pub fn product(&self, other: &SupportSet) -> Result<SupportSet> {
        let mut out = BTreeSet::new();
        for a in &self.elements {
            for b in &other.elements {
                out.insert(self.spec.mul(a, b)?);
            }
        }
        Ok(SupportSet {
            spec: self.spec.clone(),
            elements: out,
        })
    }

    /// `A^-1 = {x^-1 : x in A}`.
    pub fn inverse(&self) -> Result<SupportSet> {
        Ok(SupportSet {
            spec: self.spec.clone(),
            elements: self
                .elements
                .iter()
                .map(|g| self.spec.inv(g))
                .collect::<Result<_>>()?,
        })
    }
}
