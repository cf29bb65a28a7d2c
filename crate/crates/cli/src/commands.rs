//! One function per subcommand. Each writes its files, prints a short
//! summary and returns an error only after the files are on disk when the
//! failure is a check rather than bad input.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;
use walklab_core::convolution::irreducibility_check;
use walklab_core::fit::serialize_extended;
use walklab_core::group::ball;
use walklab_core::periodicity::{
    compute_period, coset_labeling, gamma0_by_union, labeling_domain, verify_proposition, Certification,
    PeriodReport, VerificationReport,
};
use walklab_core::ratio_limit::{
    bernoulli_tail_check, build_h_process, conv_residual, exponential_h, generic_chain_ratio, h_process_diag,
    limit_measure, nearest_neighbour_doob, ratio_series, DiagReport, GroupFunction, HProcess, HarmonicFn,
    HarmonicKind, HarmonicReport, RatioReport, ResidualReport,
};
use walklab_core::spectral::{
    check_supermultiplicativity, check_supermultiplicativity_log, exact_rho, gerl_strict_from_log_sequence,
    log_return_sequence, return_sequence, rho_estimate_log, sequence_period, EstimateMode, GerlReport, LogPowers, Method,
    SpectralEstimate, SupermultiplicativityReport,
};
use walklab_core::{GroupElem, GroupSpec, SparseMeasure, WalkError, Weight};

use crate::config::{Command, Estimate, HChoice, RunConfig, EXACT_HORIZON};
use crate::output::{num, Output};
use crate::CliError;

pub fn run(cmd: Command, mut cfg: RunConfig) -> Result<Vec<std::path::PathBuf>, CliError> {
    let mut out = Output::new(cmd, &cfg)?;
    match cmd {
        Command::Period => {
            let spec = cfg.spec()?;
            if cfg.exact() {
                let m = cfg.exact_measure(&spec)?;
                period(&mut cfg, &mut out, &m)?
            } else {
                let m = cfg.float_measure(&spec)?;
                period(&mut cfg, &mut out, &m)?
            }
        }
        Command::Spectral => spectral(&cfg, &mut out)?,
        Command::Ratio => ratio(&cfg, &mut out)?,
        Command::LimitMeasure => limit(&cfg, &mut out)?,
        Command::HProcess => hprocess(&cfg, &mut out)?,
        Command::Bernoulli => bernoulli(&cfg, &mut out)?,
        Command::Chain => chain(&cfg, &mut out)?,
    }
    Ok(out.written().to_vec())
}

/// Elements explored for irreducibility evidence on infinite groups.
const EXPLORATION_BUDGET: usize = 100_000;

/// Exit 2 when the support provably does not generate the group.
fn require_irreducible<W: Weight>(m: &SparseMeasure<W>, cfg: &RunConfig) -> Result<serde_json::Value, CliError> {
    let budget = if m.spec().is_finite() { cfg.cap() } else { cfg.cap().min(EXPLORATION_BUDGET) };
    let r = irreducibility_check(m, EXACT_HORIZON, budget)?;
    if r.is_certified_no() {
        return Err(CliError::Walk(WalkError::Reducible(
            serde_json::to_string(&r).unwrap_or_default(),
        )));
    }
    Ok(serde_json::to_value(&r).expect("serializable"))
}

/// Generators of a symmetric ball around `e` covering the support.
fn window(m: &SparseMeasure<f64>, radius: usize, cap: usize) -> Result<Vec<GroupElem>, CliError> {
    let spec = m.spec();
    let mut gens = Vec::new();
    for g in m.support_vec() {
        let inv = spec.inv(&g)?;
        gens.push(g);
        gens.push(inv);
    }
    let e = spec.identity();
    gens.retain(|g| *g != e);
    gens.sort();
    gens.dedup();
    Ok(ball(spec, &gens, radius, cap)?)
}

/// Period read off `a_n > 0` for `n <= 64`.
fn stride_of(m: &SparseMeasure<f64>, cap: usize) -> Result<usize, CliError> {
    match sequence_period(&log_return_sequence(m, EXACT_HORIZON, cap)?) {
        0 => Err(WalkError::NoReturn(EXACT_HORIZON).into()),
        d => Ok(d),
    }
}

fn names(spec: &GroupSpec, elems: impl IntoIterator<Item = GroupElem>) -> Vec<String> {
    elems.into_iter().map(|g| spec.format_elem(&g)).collect()
}

#[derive(Serialize)]
struct ExactRho {
    value: f64,
    method: Method,
}

fn exact_rho_of(m: &SparseMeasure<f64>) -> Result<Option<ExactRho>, CliError> {
    Ok(exact_rho(m)?.map(|(value, method)| ExactRho { value, method }))
}

// period

#[derive(Serialize)]
struct PartitionOut {
    d: usize,
    quotient_generator_order: usize,
    domain_size: usize,
    class_sizes: Vec<usize>,
    gamma0: Vec<String>,
}

#[derive(Serialize)]
struct UnionOut {
    elements: Vec<String>,
    stable_from: usize,
    k_reached: usize,
    equals_label0_class: bool,
}

#[derive(Serialize)]
struct PeriodOut {
    irreducibility: serde_json::Value,
    period: PeriodReport,
    caveat: Option<String>,
    partition: PartitionOut,
    gamma0_union: Option<UnionOut>,
    verification: VerificationReport,
}

fn period<W: Weight>(cfg: &mut RunConfig, out: &mut Output, m: &SparseMeasure<W>) -> Result<(), CliError> {
    let spec = m.spec().clone();
    let cap = cfg.cap();
    let irreducibility = require_irreducible(m, cfg)?;
    let report = compute_period(m, cfg.n_max(), cap)?;
    let radius = cfg.ball_radius.expect("resolved");
    let domain = labeling_domain(&spec, &m.support_vec(), radius, cap)?;
    let partition = coset_labeling(m, report.d, &domain)?;
    let gamma0 = partition.gamma0();
    let union = if spec.is_finite() {
        let k_max = *cfg.k_max.get_or_insert(2 * domain.len());
        out.set_config(cfg);
        let u = gamma0_by_union(m, k_max, cap)?;
        Some(UnionOut {
            equals_label0_class: u.elements == gamma0,
            elements: names(&spec, u.elements),
            stable_from: u.stable_from,
            k_reached: u.k_reached,
        })
    } else {
        None
    };
    let verification = verify_proposition(m, &report, &partition, cap)?;
    let caveat = match report.certification {
        Certification::Exact => None,
        Certification::Candidate { n_max } => Some(format!(
            "candidate({n_max}): the gcd of return times may drop beyond n = {n_max}"
        )),
    };
    let rows: Vec<Vec<String>> = partition
        .labels
        .iter()
        .map(|(g, l)| vec![spec.format_elem(g), l.to_string()])
        .collect();
    let doc = PeriodOut {
        irreducibility,
        period: report.clone(),
        caveat: caveat.clone(),
        partition: PartitionOut {
            d: partition.d,
            quotient_generator_order: partition.quotient_generator_order,
            domain_size: partition.labels.len(),
            class_sizes: partition.class_sizes(),
            gamma0: names(&spec, gamma0),
        },
        gamma0_union: union,
        verification,
    };
    out.json("period.json", "d, Gamma_0", &doc)?;
    out.csv("coset_labels.csv", "coset labels C_j (Gamma_0 = label 0)", &["element", "label"], &rows)?;

    println!("d = {}", report.d);
    println!("|Gamma_0 in domain| = {}", doc.partition.gamma0.len());
    if let Some(c) = &caveat {
        println!("caveat: {c}");
    }
    let failed: Vec<&str> = doc.verification.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if !failed.is_empty() {
        return Err(CliError::Numeric(format!("failed checks: {}", failed.join(", "))));
    }
    if doc.gamma0_union.as_ref().is_some_and(|u| !u.equals_label0_class) {
        return Err(CliError::Numeric("union of S^-k S^k differs from the label-0 class".into()));
    }
    Ok(())
}

// spectral

#[derive(Serialize)]
struct SpectralOut {
    estimate: SpectralEstimate,
    stride: usize,
    exact_rho: Option<ExactRho>,
    gerl: Option<GerlOut>,
    supermultiplicativity: SupermultiplicativityReport,
    supermultiplicativity_exact: Option<SupermultiplicativityReport>,
    pruned_mass: Option<f64>,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
enum GerlOut {
    Passed(GerlReport),
    Failed { message: String },
}

fn spectral(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let m = cfg.float_measure(&spec)?;
    m.require_probability()?;
    let cap = cfg.cap();
    require_irreducible(&m, cfg)?;
    let d = stride_of(&m, cap)?;
    let n_max = cfg.n_max();

    let (log_a, pruned) = match cfg.prune {
        None => (log_return_sequence(&m, n_max, cap)?, None),
        Some(t) => {
            let mut p = LogPowers::new(&m, cap)?.with_prune(Some(t));
            let mut v = vec![0.0];
            for _ in 0..n_max {
                p.advance()?;
                v.push(p.log_at_identity());
            }
            (v, Some(p.pruned_mass()))
        }
    };
    let mode = match cfg.estimate.expect("resolved") {
        Estimate::Ratio => EstimateMode::RatioExtrapolated,
        Estimate::Root => EstimateMode::RootTest,
    };
    let mut estimate = rho_estimate_log(&log_a, mode, d)?;
    let exact = exact_rho_of(&m)?;
    let gerl = match (&exact, d) {
        (Some(e), 1) => Some(match gerl_strict_from_log_sequence(&m, &log_a, e.value, cap) {
            Ok(r) => {
                estimate.k0 = Some(r.k0);
                GerlOut::Passed(r)
            }
            Err(WalkError::CheckFailed(message)) => GerlOut::Failed { message },
            Err(e) => return Err(e.into()),
        }),
        _ => None,
    };
    let supermultiplicativity = check_supermultiplicativity_log(&log_a)?;
    let supermultiplicativity_exact = if cfg.exact() {
        let a = return_sequence(&cfg.exact_measure(&spec)?, n_max.min(EXACT_HORIZON), cap)?;
        Some(check_supermultiplicativity::<BigRational>(&a)?)
    } else {
        None
    };

    let inv_d = 1.0 / d as f64;
    let ratio_at = |n: usize| -> Option<f64> {
        let (a, b) = (*log_a.get(n)?, *log_a.get(n + d)?);
        (a.is_finite() && b.is_finite()).then(|| ((b - a) * inv_d).exp())
    };
    let ratio_ns: Vec<usize> = (1..=n_max).filter(|&n| ratio_at(n).is_some()).collect();
    let fit = estimate.diagnostics.as_ref().and_then(|g| g.fit);
    let fit_from = fit.map_or(usize::MAX, |f| ratio_ns[ratio_ns.len() - f.points]);
    let rows: Vec<Vec<String>> = (1..=n_max)
        .map(|n| {
            let la = log_a[n];
            let root = if la.is_finite() { (la / n as f64).exp() } else { f64::NAN };
            let extrapolated = match fit {
                Some(f) if n >= fit_from && ratio_at(n).is_some() => f.intercept + f.slope / n as f64,
                _ => f64::NAN,
            };
            vec![
                n.to_string(),
                num(la.exp()),
                num(root),
                num(ratio_at(n).unwrap_or(f64::NAN)),
                num(extrapolated),
            ]
        })
        .collect();

    println!("rho_hat = {}", estimate.rho_hat);
    if let Some(e) = &exact {
        println!("exact rho = {}", e.value);
    }
    let gerl_failed = matches!(gerl, Some(GerlOut::Failed { .. }));
    let doc = SpectralOut {
        estimate,
        stride: d,
        exact_rho: exact,
        gerl,
        supermultiplicativity,
        supermultiplicativity_exact,
        pruned_mass: pruned,
    };
    out.json("spectral.json", "rho", &doc)?;
    out.csv(
        "spectral.csv",
        "a_n = mu^(n)(e), root bound a_n^(1/n), ratio (a_(n+d)/a_n)^(1/d), fitted ratio A + B/n",
        &["n", "a_n", "root_bound", "ratio", "extrapolated"],
        &rows,
    )?;
    if gerl_failed {
        return Err(CliError::Numeric("a_n < rho^n fails beyond k0".into()));
    }
    Ok(())
}

// ratio

#[derive(Serialize)]
struct RatioOut {
    stride: usize,
    exact_rho: Option<ExactRho>,
    /// Largest minus smallest extrapolated limit over the targets.
    limit_spread: f64,
    reports: Vec<RatioReport>,
}

fn ratio(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let m = cfg.float_measure(&spec)?;
    let cap = cfg.cap();
    require_irreducible(&m, cfg)?;
    let d = stride_of(&m, cap)?;
    let win = window(&m, cfg.window_radius.expect("resolved"), cap)?;
    let mut reports = Vec::new();
    for x in cfg.targets(&spec)? {
        reports.push(ratio_series(&m, &x, cfg.n_max(), d, &win, cap)?);
    }
    let limits: Vec<f64> = reports.iter().map(|r| r.extrapolated_limit).collect();
    let spread = limits.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - limits.iter().cloned().fold(f64::INFINITY, f64::min);
    let rows: Vec<Vec<String>> = reports
        .iter()
        .flat_map(|r| r.ratios.iter().map(move |&(n, v)| vec![r.x.clone(), n.to_string(), num(v)]))
        .collect();
    for r in &reports {
        println!("x = {}: limit {}", r.x, r.extrapolated_limit);
    }
    let doc = RatioOut {
        stride: d,
        exact_rho: exact_rho_of(&m)?,
        limit_spread: spread,
        reports,
    };
    out.json("ratio.json", "rho (ratio limit mu^(n+d)(x) / mu^(n)(x))", &doc)?;
    out.csv(
        "ratio.csv",
        "ratio mu^(n+d)(x) / mu^(n)(x)",
        &["x", "n", "ratio"],
        &rows,
    )?;
    Ok(())
}

// limit-measure

#[derive(Serialize)]
struct LimitOut {
    stride: usize,
    tail_from: usize,
    samples: usize,
    values: Vec<(String, f64)>,
    rho_hat: f64,
    exact_rho: Option<ExactRho>,
    residual_rho_hat: ResidualReport,
    residual_exact_rho: Option<ResidualReport>,
}

fn limit(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let m = cfg.float_measure(&spec)?;
    let cap = cfg.cap();
    require_irreducible(&m, cfg)?;
    let d = stride_of(&m, cap)?;
    let win = window(&m, cfg.window_radius.expect("resolved"), cap)?;
    let lm = limit_measure(&m, &win, cfg.n_max(), d, cap)?;
    let nu = lm.as_function();
    let log_a = log_return_sequence(&m, cfg.n_max(), cap)?;
    let rho_hat = rho_estimate_log(&log_a, EstimateMode::RatioExtrapolated, d)?.rho_hat;
    let exact = exact_rho_of(&m)?;
    let residual_rho_hat = conv_residual(&m, &nu, rho_hat, &win)?;
    let residual_exact_rho = match &exact {
        Some(e) => Some(conv_residual(&m, &nu, e.value, &win)?),
        None => None,
    };
    let rows: Vec<Vec<String>> = lm
        .values
        .iter()
        .map(|(g, v)| vec![spec.format_elem(g), num(*v)])
        .collect();
    println!("rho_hat = {rho_hat}");
    println!("residual = {}", residual_rho_hat.residual);
    let doc = LimitOut {
        stride: d,
        tail_from: lm.tail_from,
        samples: lm.samples,
        values: lm.values.iter().map(|(g, v)| (spec.format_elem(g), *v)).collect(),
        rho_hat,
        exact_rho: exact,
        residual_rho_hat,
        residual_exact_rho,
    };
    out.json("limit_measure.json", "nu", &doc)?;
    out.csv("nu.csv", "nu(x) = lim mu^(n)(x) / mu^(n)(e)", &["element", "value"], &rows)?;
    Ok(())
}

// hprocess

#[derive(Serialize)]
struct Target {
    target: String,
    probability: String,
    value: f64,
}

#[derive(Serialize)]
struct Row {
    row: String,
    h: String,
    mass: String,
    targets: Vec<Target>,
}

#[derive(Serialize)]
struct HProcessOut {
    rho: String,
    rho_value: f64,
    kind: HarmonicKind,
    weight_mode: &'static str,
    /// `p_h(x, y) = p_h(y, x)` whenever both rows are stored.
    symmetric: bool,
    /// `p_h(x, x s)` does not depend on `x`.
    group_invariant: bool,
    harmonic_check: HarmonicReport,
    rows: Vec<Row>,
    diagonal: DiagReport,
}

fn hprocess(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let spec = cfg.spec()?;
    let fm = cfg.float_measure(&spec)?;
    let cap = cfg.cap();
    require_irreducible(&fm, cfg)?;
    let domain = window(&fm, cfg.window_radius.expect("resolved"), cap)?;
    let doc = match (cfg.h.expect("resolved"), cfg.exact()) {
        (HChoice::Exponential, true) => {
            let (m, h) = nearest_neighbour_doob(&cfg.exact_measure(&spec)?)?;
            hprocess_doc(&build_h_process(&m, &h, &domain)?, cfg, "exact")?
        }
        (HChoice::Exponential, false) => {
            let h = exponential_h(&fm)?;
            hprocess_doc(&build_h_process(&fm, &h, &domain)?, cfg, "float")?
        }
        (HChoice::Constant, true) => {
            let m = cfg.exact_measure(&spec)?;
            let h = constant_h(&spec);
            hprocess_doc(&build_h_process(&m, &h, &domain)?, cfg, "exact")?
        }
        (HChoice::Constant, false) => {
            let h = constant_h(&spec);
            hprocess_doc(&build_h_process(&fm, &h, &domain)?, cfg, "float")?
        }
    };
    let rows: Vec<Vec<String>> = doc
        .diagonal
        .entries
        .iter()
        .map(|e| vec![e.n.to_string(), num(e.p_h), num(e.normalized_return), num(e.relative_error)])
        .collect();
    println!("rho = {}", doc.rho);
    println!("symmetric rows: {}", doc.symmetric);
    out.json("hprocess.json", "P_h", &doc)?;
    out.csv(
        "hprocess_diag.csv",
        "p_h^(n)(e,e) against mu^(n)(e) / rho^n",
        &["n", "p_h", "normalized_return", "relative_error"],
        &rows,
    )?;
    Ok(())
}

fn constant_h<W: Weight>(spec: &Arc<GroupSpec>) -> HarmonicFn<W> {
    HarmonicFn {
        spec: spec.clone(),
        values: GroupFunction::Constant(W::one()),
        rho: W::one(),
        kind: HarmonicKind::Harmonic,
    }
}

fn close<W: Weight>(a: &W, b: &W) -> bool {
    if W::EXACT {
        a == b
    } else {
        (a.as_f64() - b.as_f64()).abs() <= 1e-12 * a.as_f64().abs().max(b.as_f64().abs())
    }
}

fn hprocess_doc<W: Weight>(hp: &HProcess<W>, cfg: &RunConfig, mode: &'static str) -> Result<HProcessOut, CliError> {
    let spec = hp.base.spec().clone();
    let mut symmetric = true;
    for (x, row) in &hp.rows {
        for (y, p) in row {
            if let Some(back) = hp.rows.get(y).and_then(|r| r.get(x)) {
                symmetric &= close(p, back);
            }
        }
    }
    let mut steps: BTreeMap<GroupElem, W> = BTreeMap::new();
    let mut group_invariant = true;
    for (x, row) in &hp.rows {
        let xi = spec.inv(x)?;
        for (y, p) in row {
            let s = spec.mul(&xi, y)?;
            match steps.get(&s) {
                Some(q) => group_invariant &= close(p, q),
                None => {
                    steps.insert(s, p.clone());
                }
            }
        }
    }
    let rows = hp
        .rows
        .iter()
        .map(|(x, row)| Row {
            row: spec.format_elem(x),
            h: hp.h.values.value(x).map(|v| v.render()).unwrap_or_default(),
            mass: hp.row_mass(x).map(|v| v.render()).unwrap_or_default(),
            targets: row
                .iter()
                .map(|(y, p)| Target {
                    target: spec.format_elem(y),
                    probability: p.render(),
                    value: p.as_f64(),
                })
                .collect(),
        })
        .collect();
    Ok(HProcessOut {
        rho: hp.rho.render(),
        rho_value: hp.rho.as_f64(),
        kind: hp.h.kind,
        weight_mode: mode,
        symmetric,
        group_invariant,
        harmonic_check: hp.check.clone(),
        rows,
        diagonal: h_process_diag(hp, cfg.n_max(), cfg.cap())?,
    })
}

// bernoulli

fn bernoulli(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let a = cfg.a.expect("resolved");
    let eps = cfg.epsilon.expect("resolved");
    let check = bernoulli_tail_check(a, eps, cfg.n_min.expect("resolved"), cfg.n_max())?;
    let mut rows = Vec::new();
    for (side, fit) in [("upper", &check.upper), ("lower", &check.lower)] {
        for &(n, t) in &fit.values {
            let bound = (fit.fitted_c - fit.fitted_delta * n as f64).exp();
            rows.push(vec![side.to_string(), n.to_string(), num(t), num(bound)]);
        }
    }
    println!("delta (upper tail) = {}", check.upper.fitted_delta);
    println!("delta (lower tail) = {}", check.lower.fitted_delta);
    out.json("bernoulli.json", "delta (Bernoulli large-deviation tail)", &check)?;
    out.csv(
        "bernoulli_tail.csv",
        "tail = p_a(n, .) mass outside C_n (upper) or D_n (lower); bound = exp(c - delta n)",
        &["side", "n", "tail", "bound"],
        &rows,
    )?;
    if !check.passed {
        return Err(CliError::Numeric("tail is not dominated by a decaying exponential".into()));
    }
    Ok(())
}

// chain

#[derive(Serialize)]
struct ChainOut {
    #[serde(flatten)]
    report: walklab_core::ratio_limit::ChainReport,
    #[serde(serialize_with = "serialize_extended")]
    eigenvalue_gap: f64,
}

fn chain(cfg: &RunConfig, out: &mut Output) -> Result<(), CliError> {
    let p = cfg.matrix.as_ref().expect("resolved");
    let report = generic_chain_ratio(p, cfg.n_max())?;
    let rows: Vec<Vec<String>> = report
        .diagonal_ratios
        .iter()
        .map(|&(n, r)| vec![n.to_string(), num(r)])
        .collect();
    println!("ratio limit = {}", report.ratio_limit);
    println!("power iteration = {}", report.eigenvalue);
    let doc = ChainOut {
        eigenvalue_gap: (report.ratio_limit - report.eigenvalue).abs(),
        report,
    };
    out.json("chain.json", "rho(P)", &doc)?;
    out.csv("chain_ratios.csv", "ratio p^(n+1)(0,0) / p^(n)(0,0)", &["n", "ratio"], &rows)?;
    Ok(())
}
