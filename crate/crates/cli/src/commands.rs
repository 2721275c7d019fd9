use anyhow::{bail, Result};
use fsmb::measure::SampleStats;
use fsmb::smb::SmbError;
use fsmb::{Method, Sampling, SkewSystem};
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, MethodChoice};
use crate::output::{CheckRecord, Row, Summary};

/// Slack on inequalities between entropies computed in floating point.
const ROUNDING: f64 = 1e-12;

pub struct Outcome {
    pub summary: Summary,
    pub rows: Vec<Row>,
}

fn sampling(config: &ExperimentConfig) -> Sampling {
    Sampling::new(config.run.samples, config.run.seed).with_workers(config.run.workers)
}

fn summary(name: &'static str, config: &ExperimentConfig, samples: usize, system: Option<&SkewSystem>) -> Summary {
    let mut s = Summary::new(name, config.run.seed, config.run.horizon, samples, config.run.workers);
    s.exploratory = system.is_some_and(|sys| sys.is_exploratory());
    s
}

fn row(
    experiment: &'static str,
    config: &ExperimentConfig,
    sample_id: usize,
    n: usize,
    value: f64,
    method: &str,
) -> Row {
    Row { experiment, seed: config.run.seed, sample_id, n, value, method: method.into() }
}

fn resolve(system: &SkewSystem, choice: MethodChoice) -> Method {
    match choice {
        MethodChoice::Fixed(m) => m,
        MethodChoice::Auto if system.exact_entropy().is_some() => Method::Exact,
        MethodChoice::Auto => Method::PointwiseMonteCarlo,
    }
}

pub fn info_seq(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let horizon = config.run.horizon;
    let s = sampling(config);
    let runs = s.run(|i| {
        let y = sys.sample_base(horizon, s.base_seed(i));
        let x = sys.sample_fiber(s.fiber_seed(i))?;
        Ok(sys.info_sequence(&y, &x, horizon)?.normalized_values())
    })?;
    let method = Method::PointwiseMonteCarlo.name();
    let mut rows = Vec::with_capacity(runs.len() * (horizon + 1));
    for (i, run) in runs.iter().enumerate() {
        rows.extend(run.iter().enumerate().map(|(n, &v)| row("info-seq", config, i, n, v, method)));
    }
    let finals: Vec<f64> = runs.iter().map(|r| r[horizon]).collect();
    let stats = SampleStats::of(&finals);
    let mut out = summary("info-seq", config, s.samples, Some(&sys));
    out.method = method.into();
    out.estimate_nats = stats.mean;
    out.stderr_nats = stats.stderr;
    out.checks.push(CheckRecord::at_most(
        "I(P^F_N)(x)/(N+1) mean <= H(P) + 3 se",
        stats.mean,
        sys.partition_entropy() + 3.0 * stats.stderr + ROUNDING,
        "nats",
    ));
    out.extra.insert("partition_entropy_nats".into(), sys.partition_entropy().into());
    Ok(Outcome { summary: out, rows })
}

pub fn entropy(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let horizon = config.run.horizon;
    let method = resolve(&sys, config.method()?);
    let s = sampling(config);
    let (estimate, rows) = if method == Method::Exact {
        let e = sys.orbital_entropy_estimate(method, horizon, &s)?;
        (e, vec![row("entropy", config, 0, horizon, e.value, method.name())])
    } else {
        let values = sys.orbital_entropy_samples(method, horizon, &s)?;
        let rows =
            values.iter().enumerate().map(|(i, &v)| row("entropy", config, i, horizon, v, method.name())).collect();
        (fsmb::EntropyEstimate::from_samples(method, horizon, &values), rows)
    };
    let mut out = summary("entropy", config, estimate.samples, Some(&sys));
    out.method = method.name().into();
    out.estimate_nats = estimate.value;
    out.stderr_nats = estimate.stderr;
    out.checks.push(CheckRecord::at_most(
        "estimate <= H(P) + 3 se",
        estimate.value,
        sys.partition_entropy() + 3.0 * estimate.stderr + ROUNDING,
        "nats",
    ));
    out.extra.insert("partition_entropy_nats".into(), sys.partition_entropy().into());
    Ok(Outcome { summary: out, rows })
}

pub fn cesaro_check(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let horizon = config.run.horizon;
    let s = sampling(config);
    let reports = s.run(|i| {
        let y = sys.sample_base(horizon, s.base_seed(i));
        (0..=horizon).map(|n| sys.cesaro_identity_check(&y, n)).collect::<Result<Vec<_>, SmbError>>()
    })?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, per_n) in reports.iter().enumerate() {
        for r in per_n {
            worst = worst.max(r.discrepancy);
            rows.push(row("cesaro-check", config, i, r.n, r.discrepancy, "discrepancy"));
        }
    }
    let normalized: Vec<f64> = reports.iter().map(|r| r[horizon].lhs / (horizon + 1) as f64).collect();
    let stats = SampleStats::of(&normalized);
    let mut out = summary("cesaro-check", config, s.samples, Some(&sys));
    out.method = Method::NormalizedEntropy.name().into();
    out.estimate_nats = stats.mean;
    out.stderr_nats = stats.stderr;
    out.checks.push(CheckRecord::at_most("max |H(P^F_n) - sum_k c_k(S^(n-k) y)|", worst, 1e-9, "nats"));
    out.extra.insert("max_discrepancy".into(), worst.into());
    Ok(Outcome { summary: out, rows })
}

pub fn seward(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let set = config.words(&config.run.seward_set)?;
    let mut rows = Vec::new();
    let mut out = summary("seward", config, 0, Some(&sys));
    for k in 1..=set.len() {
        let r = sys.seward_bound(&set[..k])?;
        rows.push(row("seward", config, k - 1, r.set_size, r.bound, Method::Exact.name()));
        out.checks.push(CheckRecord::at_most(
            format!("H(P^F)/|F| <= H(P), first {k} elements"),
            r.bound,
            r.partition_entropy + ROUNDING,
            "nats",
        ));
    }
    let Some(last) = rows.last() else { bail!("run.seward_set is empty") };
    out.method = Method::Exact.name().into();
    out.estimate_nats = last.value;
    let words: Vec<Value> = set.iter().map(|w| w.to_string().into()).collect();
    out.extra.insert("set".into(), Value::Array(words));
    out.extra.insert("partition_entropy_nats".into(), sys.partition_entropy().into());
    Ok(Outcome { summary: out, rows })
}

pub fn rokhlin_search(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let candidates = config.candidates()?;
    let method = match config.method()? {
        MethodChoice::Fixed(m) => m,
        MethodChoice::Auto => Method::PointwiseMonteCarlo,
    };
    let horizon = config.run.horizon;
    let s = sampling(config);
    let result = sys.rokhlin_search(&candidates, method, horizon, &s)?;
    let rows = result
        .estimates
        .iter()
        .enumerate()
        .map(|(i, e)| row("rokhlin-search", config, i, horizon, e.value, method.name()))
        .collect();
    let best = result.best_estimate();
    let mut out = summary("rokhlin-search", config, best.samples, Some(&sys));
    out.method = method.name().into();
    out.estimate_nats = best.value;
    out.stderr_nats = best.stderr;
    let best_entropy = sys.with_partition(result.spec.clone())?.partition_entropy();
    out.checks.push(CheckRecord::at_most(
        "best estimate <= H(P_best) + 3 se",
        best.value,
        best_entropy + 3.0 * best.stderr + ROUNDING,
        "nats",
    ));
    let listing: Vec<Value> = candidates
        .iter()
        .zip(&result.estimates)
        .map(|(c, e)| {
            json!({
                "window": c.window().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                "labeling": c.labeling().name(),
                "estimate_nats": e.value,
                "stderr_nats": e.stderr,
            })
        })
        .collect();
    out.extra.insert("best_candidate".into(), result.best.into());
    out.extra.insert("candidates".into(), Value::Array(listing));
    out.extra.insert("bound_kind".into(), "upper bound; candidates are assumed generating".into());
    Ok(Outcome { summary: out, rows })
}

pub fn maximal_check(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let s = sampling(config);
    let report = sys.maximal_inequality_check(&config.run.lambdas, config.run.horizon, &s)?;
    let rows = report
        .maxima
        .iter()
        .enumerate()
        .map(|(i, &v)| row("maximal-check", config, i, report.horizon, v, "sup-f_n"))
        .collect();
    let stats = SampleStats::of(&report.maxima);
    let mut out = summary("maximal-check", config, report.samples, Some(&sys));
    out.method = "sup-f_n".into();
    out.estimate_nats = stats.mean;
    out.stderr_nats = stats.stderr;
    for r in &report.rows {
        out.checks.push(CheckRecord::at_most(
            format!("P[x in cell {}, sup f_n > {}] <= e^-l + 3 sigma", r.cell, r.lambda),
            r.fraction,
            r.limit,
            "probability",
        ));
    }
    Ok(Outcome { summary: out, rows })
}

pub fn sphere_average(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let n = config.run.horizon;
    let x = sys.sample_fiber(fsmb::smb::derive_seed(config.run.seed, 0, 1))?;
    let mc = sys.sphere_average_monte_carlo(&x, n, config.run.samples, config.run.seed)?;
    let mut rows = vec![row("sphere-average", config, 0, n, mc.mean, "monte-carlo")];
    let mut out = summary("sphere-average", config, config.run.samples, Some(&sys));
    out.method = "monte-carlo".into();
    out.estimate_nats = mc.mean;
    out.stderr_nats = mc.stderr;
    match sys.sphere_average_exact(&x, n, config.run.sphere_words) {
        Ok(exact) => {
            rows.push(row("sphere-average", config, 1, n, exact, "exact"));
            out.checks.push(CheckRecord::at_most(
                "|exact - monte-carlo| <= 3 se",
                (exact - mc.mean).abs(),
                3.0 * mc.stderr + ROUNDING,
                "nats",
            ));
            out.extra.insert("exact_nats".into(), exact.into());
        }
        Err(SmbError::InfeasibleHorizon { feasible, reason, .. }) => {
            out.extra
                .insert("exact_skipped".into(), format!("{reason}; largest enumerable radius is {feasible}").into());
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Outcome { summary: out, rows })
}

pub fn rw_experiment(config: &ExperimentConfig) -> Result<Outcome> {
    let sys = config.system()?;
    let s = sampling(config);
    let report = sys.rw_experiment(config.run.horizon, &s)?;
    let method = report.estimate.method.name();
    let rows = report
        .finals
        .iter()
        .enumerate()
        .map(|(i, &v)| row("rw-experiment", config, i, report.horizon, v, method))
        .collect();
    let mut out = summary("rw-experiment", config, s.samples, Some(&sys));
    out.method = method.into();
    out.estimate_nats = report.estimate.value;
    out.stderr_nats = report.estimate.stderr;
    out.checks.push(CheckRecord::at_most(
        "estimate <= H(P) + 3 se",
        report.estimate.value,
        sys.partition_entropy() + 3.0 * report.estimate.stderr + ROUNDING,
        "nats",
    ));
    out.extra.insert("mean_by_n_nats".into(), report.mean.clone().into());
    out.extra.insert("stderr_by_n_nats".into(), report.stderr.clone().into());
    Ok(Outcome { summary: out, rows })
}

pub fn selftest(config: &ExperimentConfig) -> Result<Outcome> {
    let checks = fsmb::selftest::run(config.run.seed, config.run.workers)?;
    let rows = checks.iter().enumerate().map(|(i, c)| row("selftest", config, i, 0, c.observed, "selftest")).collect();
    let mut out = summary("selftest", config, 0, None);
    out.method = "selftest".into();
    out.checks = checks
        .into_iter()
        .map(|c| CheckRecord {
            name: c.name,
            bound: c.bound,
            observed: c.observed,
            pass: c.pass,
            units: "mixed".into(),
        })
        .collect();
    Ok(Outcome { summary: out, rows })
}
