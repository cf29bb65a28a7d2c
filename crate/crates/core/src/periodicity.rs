//! Period of an irreducible walk, its cyclic coset classes, and the normal
//! subgroup `Gamma_0 = union_k S^-k S^k`.
//!
//! The label of an element is its class index in `0..d`: the identity has
//! label 0 and every step by an element of the support raises the label by
//! one modulo `d`. On finite groups a labeling that is consistent on the whole
//! group certifies the period exactly: consistency shows `d` divides every
//! closed-walk length, and `d` is the gcd of observed return times.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use num_integer::Integer;
use serde::Serialize;

use crate::convolution::{SparseMeasure, SupportPowers};
use crate::error::{Result, WalkError};
use crate::group::{GroupElem, GroupSpec};
use crate::weight::Weight;

/// Default horizon for return times.
pub const DEFAULT_RETURN_HORIZON: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Certification {
    Exact,
    /// The gcd may still drop for longer horizons.
    Candidate { n_max: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodReport {
    pub d: usize,
    /// Return times `n <= n_max`, i.e. `n` with `e` in `S^n`.
    pub return_times: Vec<usize>,
    pub n_max: usize,
    /// Smallest multiple of `d` from which on every multiple of `d` up to
    /// `n_max` is a return time (finite groups only).
    pub n0: Option<usize>,
    pub certification: Certification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetPartition {
    pub d: usize,
    pub labels: BTreeMap<GroupElem, usize>,
    /// Order of `x0 Gamma_0` in the quotient, `x0` the first support element.
    pub quotient_generator_order: usize,
}

impl CosetPartition {
    /// The label-0 class restricted to the explored domain.
    pub fn gamma0(&self) -> BTreeSet<GroupElem> {
        self.labels
            .iter()
            .filter(|(_, &l)| l == 0)
            .map(|(g, _)| g.clone())
            .collect()
    }

    pub fn label(&self, g: &GroupElem) -> Option<usize> {
        self.labels.get(g).copied()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.d];
        for &l in self.labels.values() {
            sizes[l] += 1;
        }
        sizes
    }
}

/// `N_mu` intersected with `[1, n_max]`.
pub fn compute_return_times<W: Weight>(m: &SparseMeasure<W>, n_max: usize, cap: usize) -> Result<Vec<usize>> {
    let mut powers = SupportPowers::new(m.spec().clone(), m.support_vec(), cap)?;
    let mut out = Vec::new();
    for n in 1..=n_max {
        powers.advance()?;
        if powers.contains_identity() {
            out.push(n);
        }
    }
    Ok(out)
}

pub fn compute_period<W: Weight>(m: &SparseMeasure<W>, n_max: usize, cap: usize) -> Result<PeriodReport> {
    let return_times = compute_return_times(m, n_max, cap)?;
    if return_times.is_empty() {
        return Err(WalkError::NoReturn(n_max));
    }
    let d = return_times.iter().fold(0usize, |g, &n| g.gcd(&n));
    let spec = m.spec();
    let (n0, certification) = if spec.is_finite() {
        let all = spec.elements(cap)?;
        let certification = match coset_labeling(m, d, &all) {
            Ok(_) => Certification::Exact,
            Err(WalkError::LabelConflict { .. }) => Certification::Candidate { n_max },
            Err(e) => return Err(e),
        };
        let present: HashSet<usize> = return_times.iter().copied().collect();
        let mut n0 = None;
        let mut k = n_max / d * d;
        while k >= d && present.contains(&k) {
            n0 = Some(k);
            k -= d;
        }
        (n0, certification)
    } else {
        (None, Certification::Candidate { n_max })
    };
    Ok(PeriodReport {
        d,
        return_times,
        n_max,
        n0,
        certification,
    })
}

/// Breadth-first labeling of `domain` from the identity along the edges
/// `x -> x * s`, `s` in the support, that stay inside the domain.
pub fn coset_labeling<W: Weight>(m: &SparseMeasure<W>, d: usize, domain: &[GroupElem]) -> Result<CosetPartition> {
    if d == 0 {
        return Err(WalkError::InvalidArgument("period must be positive".into()));
    }
    let spec = m.spec();
    let support = m.support_vec();
    let in_domain: HashSet<&GroupElem> = domain.iter().collect();
    let e = spec.identity();
    if !in_domain.contains(&e) {
        return Err(WalkError::InvalidArgument("domain must contain the identity".into()));
    }
    let mut labels: HashMap<GroupElem, usize> = HashMap::with_capacity(domain.len());
    labels.insert(e.clone(), 0);
    let mut queue = VecDeque::from([e]);
    while let Some(x) = queue.pop_front() {
        let lx = labels[&x];
        let want = (lx + 1) % d;
        for s in &support {
            let y = spec.mul(&x, s)?;
            if !in_domain.contains(&y) {
                continue;
            }
            match labels.get(&y) {
                Some(&ly) if ly != want => {
                    return Err(WalkError::LabelConflict {
                        element: spec.format_elem(&y),
                        expected: want,
                        found: ly,
                    })
                }
                Some(_) => {}
                None => {
                    labels.insert(y.clone(), want);
                    queue.push_back(y);
                }
            }
        }
    }
    if labels.len() != in_domain.len() {
        return Err(WalkError::InvalidArgument(format!(
            "{} domain elements are not reachable from the identity inside the domain",
            in_domain.len() - labels.len()
        )));
    }
    let labels: BTreeMap<GroupElem, usize> = labels.into_iter().collect();

    let x0 = &support[0];
    let mut order = None;
    let mut y = x0.clone();
    for k in 1..=d {
        match labels.get(&y) {
            Some(0) => {
                order = Some(k);
                break;
            }
            Some(_) => {}
            None => break,
        }
        y = spec.mul(&y, x0)?;
    }
    // x0^k left the domain: fall back to label arithmetic, label(x0) = 1
    let quotient_generator_order = order.unwrap_or(d);
    Ok(CosetPartition {
        d,
        labels,
        quotient_generator_order,
    })
}

/// Result of the union construction of `Gamma_0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gamma0Union {
    pub elements: BTreeSet<GroupElem>,
    /// First `k` at which `S^-k S^k` equalled its predecessor.
    pub stable_from: usize,
    pub k_reached: usize,
}

/// `union_k S^-k S^k` on a finite group, via `S^-(k+1) S^(k+1) = S^-1 (S^-k S^k) S`.
/// The terms increase with `k`; iteration stops once the term has been
/// unchanged for `ceil(log2 |Gamma|)` consecutive steps.
pub fn gamma0_by_union<W: Weight>(m: &SparseMeasure<W>, k_max: usize, cap: usize) -> Result<Gamma0Union> {
    let spec = m.spec();
    if !spec.is_finite() {
        return Err(WalkError::Unsupported("a finite group".into()));
    }
    let order = spec.elements(cap)?.len();
    let patience = (usize::BITS - (order.max(2) - 1).leading_zeros()) as usize;
    let support = m.support_vec();
    let inverses: Vec<GroupElem> = support.iter().map(|s| spec.inv(s)).collect::<Result<_>>()?;

    let mut current: HashSet<GroupElem> = HashSet::new();
    for a in &inverses {
        for b in &support {
            current.insert(spec.mul(a, b)?);
        }
    }
    let mut unchanged = 0usize;
    let mut stable_from = None;
    let mut k = 1;
    while unchanged < patience {
        if k >= k_max {
            let mut partial: Vec<GroupElem> = current.into_iter().collect();
            partial.sort();
            return Err(WalkError::NoStabilization { k_max, partial });
        }
        let mut next: HashSet<GroupElem> = HashSet::with_capacity(current.len());
        for u in &current {
            for a in &inverses {
                let au = spec.mul(a, u)?;
                for b in &support {
                    next.insert(spec.mul(&au, b)?);
                }
            }
        }
        k += 1;
        if next == current {
            unchanged += 1;
            stable_from.get_or_insert(k);
        } else {
            unchanged = 0;
            stable_from = None;
        }
        current = next;
    }
    Ok(Gamma0Union {
        elements: current.into_iter().collect(),
        stable_from: stable_from.unwrap_or(k),
        k_reached: k,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerificationScope {
    FullGroup { order: usize },
    /// Checks restricted to products that stay inside the explored domain.
    Ball { domain_size: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub scope: VerificationScope,
    pub gamma0_size: usize,
    pub index: usize,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn record(&mut self, name: &'static str, failure: Option<String>, ok_detail: impl Into<String>) {
        self.0.push(Check {
            name,
            passed: failure.is_none(),
            detail: failure.unwrap_or_else(|| ok_detail.into()),
        });
    }
}

/// Verifies the structure of the coset decomposition:
///
/// * `subgroup`: the label-0 class contains `e` and is closed under products
///   and inverses,
/// * `normal`: `x^-1 g x` stays in the class for every `x`,
/// * `index`: the number of classes is `d`,
/// * `cyclic_quotient`: for each support element `x0`, the powers
///   `x0^k` for `k < d` lie in distinct classes and `x0^d` in the class of `e`,
/// * `cosets`: labels are constant on the cosets `x Gamma_0`,
/// * `cycling`: every element of `S^n` has label `n mod d`, `n <= n_max`,
/// * `d_step_support`: `S^d` lies in the label-0 class,
/// * `d_step_irreducible` / `d_step_aperiodic`: `mu^(d)` is irreducible on the
///   label-0 class with period 1 (on infinite groups only the period is
///   checked, on the horizon `n_max`).
pub fn verify_proposition<W: Weight>(
    m: &SparseMeasure<W>,
    report: &PeriodReport,
    partition: &CosetPartition,
    cap: usize,
) -> Result<VerificationReport> {
    let spec = m.spec();
    let d = report.d;
    let support = m.support_vec();
    let label = |g: &GroupElem| partition.labels.get(g).copied();
    let gamma0: Vec<GroupElem> = partition.gamma0().into_iter().collect();
    let domain: Vec<&GroupElem> = partition.labels.keys().collect();
    let finite = spec.is_finite();
    let scope = if finite {
        let order = spec.elements(cap)?.len();
        if order != domain.len() {
            return Err(WalkError::InvalidArgument(format!(
                "partition covers {} of {order} elements",
                domain.len()
            )));
        }
        VerificationScope::FullGroup { order }
    } else {
        VerificationScope::Ball {
            domain_size: domain.len(),
        }
    };
    let fmt = |g: &GroupElem| spec.format_elem(g);
    let mut checks = Checks(Vec::new());

    // subgroup
    let mut failure = None;
    if label(&spec.identity()) != Some(0) {
        failure = Some("identity not in class 0".to_string());
    }
    'outer: for g in &gamma0 {
        let gi = spec.inv(g)?;
        match label(&gi) {
            Some(l) if l != 0 => {
                failure = Some(format!("inverse of {} has label {l}", fmt(g)));
                break;
            }
            None if finite => {
                failure = Some(format!("inverse of {} missing", fmt(g)));
                break;
            }
            _ => {}
        }
        for h in &gamma0 {
            let gh = spec.mul(g, h)?;
            if let Some(l) = label(&gh) {
                if l != 0 {
                    failure = Some(format!("{} * {} has label {l}", fmt(g), fmt(h)));
                    break 'outer;
                }
            }
        }
    }
    checks.record("subgroup", failure, format!("{} elements closed under products and inverses", gamma0.len()));

    // normal
    let mut failure = None;
    'outer: for x in &domain {
        let xi = spec.inv(x)?;
        for g in &gamma0 {
            let c = spec.mul(&spec.mul(&xi, g)?, x)?;
            if let Some(l) = label(&c) {
                if l != 0 {
                    failure = Some(format!("conjugate of {} by {} has label {l}", fmt(g), fmt(x)));
                    break 'outer;
                }
            }
        }
    }
    checks.record("normal", failure, "closed under conjugation");

    // index
    let sizes = partition.class_sizes();
    let occupied = sizes.iter().filter(|&&s| s > 0).count();
    let failure = if partition.d != d {
        Some(format!("partition built for d = {}, report has d = {d}", partition.d))
    } else if occupied != d {
        Some(format!("{occupied} of {d} classes occupied"))
    } else if finite && sizes.iter().any(|&s| s != gamma0.len()) {
        Some(format!("class sizes {sizes:?} are not all |Gamma_0|"))
    } else {
        None
    };
    checks.record("index", failure, format!("{d} classes of sizes {sizes:?}"));

    // cyclic quotient
    let mut failure = None;
    for x0 in &support {
        let mut y = spec.identity();
        let mut seen = Vec::new();
        for k in 0..=d {
            if let Some(l) = label(&y) {
                let expected = k % d;
                if l != expected {
                    failure = Some(format!("{}^{k} has label {l}, expected {expected}", fmt(x0)));
                    break;
                }
                if k < d {
                    seen.push(l);
                }
            }
            y = spec.mul(&y, x0)?;
        }
        if failure.is_some() {
            break;
        }
        if finite && seen.len() != d {
            failure = Some(format!("powers of {} do not reach all classes", fmt(x0)));
            break;
        }
    }
    checks.record("cyclic_quotient", failure, format!("x0 Gamma_0 generates a cyclic quotient of order {d}"));

    // cosets
    let mut failure = None;
    'outer: for x in &domain {
        let lx = label(x).unwrap_or(0);
        for g in &gamma0 {
            let xg = spec.mul(x, g)?;
            if let Some(l) = label(&xg) {
                if l != lx {
                    failure = Some(format!("{} * {} has label {l}, expected {lx}", fmt(x), fmt(g)));
                    break 'outer;
                }
            }
        }
    }
    checks.record("cosets", failure, "labels constant on cosets of Gamma_0");

    // cycling and the d-step walk
    let mut powers = SupportPowers::new(spec.clone(), support.clone(), cap)?;
    let mut failure = None;
    let mut d_step = BTreeSet::new();
    for n in 1..=report.n_max.max(d) {
        powers.advance()?;
        if n == d {
            d_step = powers.set().elements;
        }
        if n > report.n_max {
            continue;
        }
        if failure.is_none() {
            for &id in powers.ids() {
                let g = powers.explorer().elem(id);
                if let Some(l) = label(g) {
                    if l != n % d {
                        failure = Some(format!("{} in S^{n} has label {l}", fmt(g)));
                        break;
                    }
                }
            }
        }
    }
    checks.record("cycling", failure, format!("S^n inside class n mod {d} for n <= {}", report.n_max));

    let failure = d_step
        .iter()
        .find(|g| label(g).is_some_and(|l| l != 0))
        .map(|g| format!("{} in S^{d} outside Gamma_0", fmt(g)));
    checks.record("d_step_support", failure, format!("S^{d} ({} elements) inside Gamma_0", d_step.len()));

    let d_vec: Vec<GroupElem> = d_step.iter().cloned().collect();
    if finite {
        let mut closure: HashSet<u32> = HashSet::new();
        let mut p = SupportPowers::new(spec.clone(), d_vec.clone(), cap)?;
        loop {
            p.advance()?;
            let before = closure.len();
            closure.extend(p.ids().iter().copied());
            if closure.len() == before {
                break;
            }
        }
        let failure = if closure.len() != gamma0.len() {
            Some(format!("S^{d} generates {} of {} elements", closure.len(), gamma0.len()))
        } else {
            let outside = closure
                .iter()
                .map(|&id| p.explorer().elem(id))
                .find(|g| label(g) != Some(0));
            outside.map(|g| format!("{} reached by mu^({d}) outside Gamma_0", fmt(g)))
        };
        checks.record("d_step_irreducible", failure, format!("mu^({d}) irreducible on Gamma_0"));
    }

    let horizon = (report.n_max / d).max(1);
    let mut p = SupportPowers::new(spec.clone(), d_vec, cap)?;
    let mut g = 0usize;
    for n in 1..=horizon {
        p.advance()?;
        if p.contains_identity() {
            g = g.gcd(&n);
            if g == 1 {
                break;
            }
        }
    }
    let failure = (g != 1).then(|| format!("return-time gcd of mu^({d}) is {g} within {horizon} steps"));
    checks.record("d_step_aperiodic", failure, format!("mu^({d}) has period 1"));

    Ok(VerificationReport {
        scope,
        gamma0_size: gamma0.len(),
        index: occupied,
        checks: checks.0,
    })
}

/// Convenience wrapper: period, labeling of the whole finite group or of the
/// forward ball of the given radius, and the verification report.
pub fn analyze<W: Weight>(
    m: &SparseMeasure<W>,
    n_max: usize,
    ball_radius: usize,
    cap: usize,
) -> Result<(PeriodReport, CosetPartition, VerificationReport)> {
    let report = compute_period(m, n_max, cap)?;
    let domain = labeling_domain(m.spec(), &m.support_vec(), ball_radius, cap)?;
    let partition = coset_labeling(m, report.d, &domain)?;
    let verification = verify_proposition(m, &report, &partition, cap)?;
    Ok((report, partition, verification))
}

/// The whole group when finite, otherwise the forward ball `S^0 u ... u S^r`.
pub fn labeling_domain(spec: &Arc<GroupSpec>, support: &[GroupElem], radius: usize, cap: usize) -> Result<Vec<GroupElem>> {
    if spec.is_finite() {
        spec.elements(cap)
    } else {
        crate::group::ball(spec, support, radius, cap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_CAP;
    use num_rational::BigRational;

    fn s3() -> Arc<GroupSpec> {
        Arc::new(GroupSpec::finite_perm(3, vec![vec![1, 0, 2], vec![2, 1, 0]]))
    }

    fn transpositions() -> SparseMeasure<BigRational> {
        SparseMeasure::from_text(s3(), &[("[1,0,2]", "1/2"), ("[2,1,0]", "1/2")]).unwrap()
    }

    fn z(rank: usize, entries: &[(&str, &str)]) -> SparseMeasure<f64> {
        SparseMeasure::from_text(Arc::new(GroupSpec::free_abelian(rank)), entries).unwrap()
    }

    fn perm(p: &[u32]) -> GroupElem {
        GroupElem::Perm(p.to_vec())
    }

    fn a3() -> BTreeSet<GroupElem> {
        [perm(&[0, 1, 2]), perm(&[1, 2, 0]), perm(&[2, 0, 1])].into_iter().collect()
    }

    #[test]
    fn return_time_examples() {
        let srw = z(1, &[("(1)", "0.5"), ("(-1)", "0.5")]);
        assert_eq!(compute_return_times(&srw, 6, DEFAULT_CAP).unwrap(), vec![2, 4, 6]);
        let lazy = z(1, &[("(0)", "0.5"), ("(1)", "0.25"), ("(-1)", "0.25")]);
        assert_eq!(compute_return_times(&lazy, 6, DEFAULT_CAP).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        let z3 = Arc::new(GroupSpec::cyclic_table(3).validated().unwrap());
        let delta = SparseMeasure::<f64>::from_text(z3, &[("1", "1")]).unwrap();
        assert_eq!(compute_return_times(&delta, 6, DEFAULT_CAP).unwrap(), vec![3, 6]);
    }

    #[test]
    fn period_examples() {
        let r = compute_period(&transpositions(), 64, DEFAULT_CAP).unwrap();
        assert_eq!(r.d, 2);
        assert_eq!(r.certification, Certification::Exact);
        assert_eq!(r.n0, Some(2));
        let srw2 = z(2, &[("(1,0)", "0.25"), ("(-1,0)", "0.25"), ("(0,1)", "0.25"), ("(0,-1)", "0.25")]);
        let r = compute_period(&srw2, 64, DEFAULT_CAP).unwrap();
        assert_eq!(r.d, 2);
        assert_eq!(r.certification, Certification::Candidate { n_max: 64 });
        let lazy = z(1, &[("(0)", "0.5"), ("(1)", "0.25"), ("(-1)", "0.25")]);
        assert_eq!(compute_period(&lazy, 64, DEFAULT_CAP).unwrap().d, 1);
    }

    #[test]
    fn return_times_are_closed_under_addition() {
        let m = SparseMeasure::<f64>::from_text(
            Arc::new(GroupSpec::cyclic_table(12).validated().unwrap()),
            &[("4", "0.5"), ("3", "0.5")],
        )
        .unwrap();
        let r = compute_period(&m, 40, DEFAULT_CAP).unwrap();
        assert_eq!(r.d, 1);
        for &a in &r.return_times {
            for &b in &r.return_times {
                if a + b <= 40 {
                    assert!(r.return_times.contains(&(a + b)), "{a}+{b}");
                }
            }
            assert_eq!(a % r.d, 0);
        }
    }

    #[test]
    fn no_return_is_an_error() {
        let drift = z(1, &[("(1)", "0.5"), ("(2)", "0.5")]);
        assert!(matches!(compute_period(&drift, 10, DEFAULT_CAP), Err(WalkError::NoReturn(10))));
    }

    #[test]
    fn labeling_examples() {
        let srw = z(1, &[("(1)", "0.5"), ("(-1)", "0.5")]);
        let domain = crate::group::ball(srw.spec(), &srw.support_vec(), 4, DEFAULT_CAP).unwrap();
        let p = coset_labeling(&srw, 2, &domain).unwrap();
        for (g, &l) in &p.labels {
            let GroupElem::Vector(v) = g else { unreachable!() };
            assert_eq!(l as i64, v[0].rem_euclid(2));
        }

        let m = transpositions();
        let all = m.spec().elements(DEFAULT_CAP).unwrap();
        let p = coset_labeling(&m, 2, &all).unwrap();
        assert_eq!(p.gamma0(), a3());
        assert_eq!(p.label(&perm(&[0, 2, 1])), Some(1));
        assert_eq!(p.quotient_generator_order, 2);

        let lazy = z(1, &[("(0)", "0.5"), ("(1)", "0.25"), ("(-1)", "0.25")]);
        let domain = crate::group::ball(lazy.spec(), &lazy.support_vec(), 4, DEFAULT_CAP).unwrap();
        let p = coset_labeling(&lazy, 1, &domain).unwrap();
        assert!(p.labels.values().all(|&l| l == 0));
    }

    #[test]
    fn wrong_period_conflicts() {
        let lazy = z(1, &[("(0)", "0.5"), ("(1)", "0.25"), ("(-1)", "0.25")]);
        let domain = crate::group::ball(lazy.spec(), &lazy.support_vec(), 3, DEFAULT_CAP).unwrap();
        assert!(matches!(coset_labeling(&lazy, 2, &domain), Err(WalkError::LabelConflict { .. })));
    }

    #[test]
    fn union_examples() {
        let u = gamma0_by_union(&transpositions(), 12, DEFAULT_CAP).unwrap();
        assert_eq!(u.elements, a3());

        let all: Vec<(String, String)> = s3()
            .elements(DEFAULT_CAP)
            .unwrap()
            .iter()
            .map(|g| (s3().format_elem(g), "1/6".to_string()))
            .collect();
        let uniform = SparseMeasure::<BigRational>::from_text(s3(), &all).unwrap();
        let u = gamma0_by_union(&uniform, 12, DEFAULT_CAP).unwrap();
        assert_eq!(u.elements.len(), 6);

        let z4 = Arc::new(GroupSpec::cyclic_table(4).validated().unwrap());
        let delta = SparseMeasure::<f64>::from_text(z4.clone(), &[("1", "1")]).unwrap();
        let u = gamma0_by_union(&delta, 8, DEFAULT_CAP).unwrap();
        assert_eq!(u.elements, BTreeSet::from([z4.identity()]));
    }

    #[test]
    fn union_brute_force_agrees_with_recursion() {
        // S^-k S^k computed directly from the k-th support power
        let m = transpositions();
        let spec = m.spec().clone();
        let s = m.support();
        let mut sk = s.clone();
        let mut brute = BTreeSet::new();
        for _ in 1..=4 {
            brute.extend(sk.inverse().unwrap().product(&sk).unwrap().elements);
            sk = sk.product(&s).unwrap();
        }
        assert_eq!(gamma0_by_union(&m, 12, DEFAULT_CAP).unwrap().elements, brute);
        assert!(brute.iter().all(|g| spec.check(g).is_ok()));
    }

    #[test]
    fn union_reports_partial_set() {
        match gamma0_by_union(&transpositions(), 2, DEFAULT_CAP) {
            Err(WalkError::NoStabilization { k_max: 2, partial }) => assert!(!partial.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn proposition_on_s3() {
        let m = transpositions();
        let (report, partition, v) = analyze(&m, 64, 0, DEFAULT_CAP).unwrap();
        assert_eq!(report.d, 2);
        assert!(v.all_passed(), "{v:#?}");
        assert_eq!(v.index, 2);
        assert_eq!(v.gamma0_size, 3);
        assert_eq!(partition.gamma0(), a3());
        assert_eq!(v.scope, VerificationScope::FullGroup { order: 6 });
    }

    #[test]
    fn proposition_on_z2_ball() {
        let srw2 = z(2, &[("(1,0)", "0.25"), ("(-1,0)", "0.25"), ("(0,1)", "0.25"), ("(0,-1)", "0.25")]);
        let (report, partition, v) = analyze(&srw2, 16, 8, DEFAULT_CAP).unwrap();
        assert_eq!(report.d, 2);
        assert!(v.all_passed(), "{v:#?}");
        for (g, &l) in &partition.labels {
            let GroupElem::Vector(x) = g else { unreachable!() };
            assert_eq!(l as i64, (x[0] + x[1]).rem_euclid(2));
        }
        assert!(matches!(v.scope, VerificationScope::Ball { domain_size: 145 }));
    }

    #[test]
    fn proposition_on_cyclic_rotation() {
        let z3 = Arc::new(GroupSpec::cyclic_table(3).validated().unwrap());
        let delta = SparseMeasure::<BigRational>::from_text(z3.clone(), &[("1", "1")]).unwrap();
        let (report, partition, v) = analyze(&delta, 12, 0, DEFAULT_CAP).unwrap();
        assert_eq!(report.d, 3);
        assert_eq!(partition.gamma0(), BTreeSet::from([z3.identity()]));
        assert_eq!(partition.quotient_generator_order, 3);
        assert!(v.all_passed(), "{v:#?}");
    }

    #[test]
    fn broken_partition_fails_checks() {
        let m = transpositions();
        let (report, mut partition, _) = analyze(&m, 64, 0, DEFAULT_CAP).unwrap();
        // swap the labels of one even and one odd permutation
        partition.labels.insert(perm(&[1, 2, 0]), 1);
        partition.labels.insert(perm(&[1, 0, 2]), 0);
        let v = verify_proposition(&m, &report, &partition, DEFAULT_CAP).unwrap();
        assert!(!v.all_passed());
        assert!(!v.check("cycling").unwrap().passed);
    }

    #[test]
    fn random_permutation_groups() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let degree = rng.random_range(2..=6usize);
            let mut gens = Vec::new();
            for _ in 0..rng.random_range(1..=2) {
                let mut p: Vec<u32> = (0..degree as u32).collect();
                p.shuffle(&mut rng);
                gens.push(p);
            }
            let spec = Arc::new(GroupSpec::finite_perm(degree, gens.clone()).validated().unwrap());
            let all = spec.elements(DEFAULT_CAP).unwrap();
            let mut support: BTreeSet<GroupElem> = gens.into_iter().map(GroupElem::Perm).collect();
            for _ in 0..rng.random_range(0..=2) {
                support.insert(all[rng.random_range(0..all.len())].clone());
            }
            let w = 1.0 / support.len() as f64;
            let m = SparseMeasure::new(spec.clone(), support.into_iter().map(|g| (g, w))).unwrap();
            let (report, partition, v) = analyze(&m, 64, 0, DEFAULT_CAP).unwrap();
            assert_eq!(report.certification, Certification::Exact, "trial {trial}");
            assert!(v.all_passed(), "trial {trial}: {v:#?}");
            assert_eq!(all.len() % report.d, 0);
            let u = gamma0_by_union(&m, 2 * all.len(), DEFAULT_CAP).unwrap();
            assert_eq!(u.elements, partition.gamma0(), "trial {trial}");
        }
    }
}
