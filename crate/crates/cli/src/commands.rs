use std::fs;
use std::io::{self, Read};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use trimstat::distributions::{moment_profile, parse_values};
use trimstat::montecarlo::{
    iqr, replicate, tail_probability, verify, violin_experiment, BoundReport, EstimatorSpec, ExperimentConfig,
    InequalityCase, DEFAULT_PERTURBATION_X, VIOLIN_K, VIOLIN_N, VIOLIN_REPS,
};
use trimstat::tuning::{
    ci_from_sample, k_contaminated, k_multiple, plan_all_subgaussian, plan_multiple, plan_sharper, precise_ci_plan,
    thm_all_max_x, ConfidencePlan, SharperOutcome,
};
use trimstat::{trimmed_summary, Error, Sample, Seed, TrimSpec};

use crate::args::*;
use crate::output::{num, opt, write_csv, write_json, Report};

/// What the caller needs to pick an exit code once output is written.
pub struct Outcome {
    pub violated: bool,
}

const OK: Outcome = Outcome { violated: false };

fn missing(flag: &str, what: &str) -> Error {
    Error::Config(format!("{what} needs {flag}"))
}

fn need<T: Copy>(v: Option<T>, flag: &str, what: &str) -> Result<T> {
    v.ok_or_else(|| missing(flag, what).into())
}

fn trim_levels(t: &Trim) -> (usize, usize) {
    match t.k {
        Some(k) => (k, k),
        None => (t.k1.unwrap_or(0), t.k2.unwrap_or(0)),
    }
}

fn parse_estimator(name: &str, trim: &Trim) -> Result<EstimatorSpec> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h.trim(), Some(a.trim())),
        None => (name.trim(), None),
    };
    let bad = |what: &str| Error::Config(format!("invalid {what} in estimator {name:?}"));
    let spec = match (head, arg) {
        ("trimmed", None) => {
            let (k1, k2) = trim_levels(trim);
            EstimatorSpec::Trimmed { k1, k2 }
        }
        ("trimmed", Some(k)) => EstimatorSpec::trimmed(k.parse().map_err(|_| bad("k"))?),
        ("mean" | "sample_mean", None) => EstimatorSpec::SampleMean,
        ("mom" | "median_of_means", Some(b)) => {
            EstimatorSpec::MedianOfMeans { blocks: b.parse().map_err(|_| bad("block count"))? }
        }
        ("catoni", None) => EstimatorSpec::Catoni { scale: None },
        ("catoni", Some(s)) => EstimatorSpec::Catoni { scale: Some(s.parse().map_err(|_| bad("scale"))?) },
        _ => return Err(Error::Config(format!("unknown estimator {name:?}")).into()),
    };
    Ok(spec)
}

fn load(input: &Input, seed: Seed) -> Result<(Vec<f64>, String)> {
    if let Some(path) = &input.path {
        let text = if path.as_os_str() == "-" {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
            s
        } else {
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
        };
        let values = parse_values(&text, input.column)?;
        return Ok((values, path.display().to_string()));
    }
    if let Some(dist) = &input.dist {
        let n = need(input.n, "--n", "sampling from --dist")?;
        return Ok((dist.sample(n, seed)?, format!("{dist}")));
    }
    Err(Error::Config("no data: give a file path or --dist with --n".into()).into())
}

fn emit(report: &Report, out: &Output, json: impl FnOnce() -> Value, csv: Option<(&[&str], Vec<Vec<String>>)>) -> Result<()> {
    report.print(io::stdout().lock())?;
    if let Some(path) = &out.json {
        write_json(path, &json())?;
    }
    if let (Some(path), Some((header, rows))) = (&out.csv, csv) {
        write_csv(path, header, &rows)?;
    }
    Ok(())
}

pub fn estimate(a: &EstimateArgs) -> Result<Outcome> {
    let seed = a.out.seed();
    let (data, source) = load(&a.input, seed)?;
    let est = parse_estimator(&a.estimator, &a.trim)?;
    est.check(data.len()).map_err(anyhow::Error::from)?;
    let mut r = Report::new("trimstat estimate", seed.0);
    r.line("source", &source).line("n", data.len()).line("estimator", est.name());
    let (value, variance, width) = match est {
        EstimatorSpec::Trimmed { k1, k2 } => {
            let s = trimmed_summary(&Sample::new(data.clone())?, TrimSpec::new(k1, k2))?;
            r.line("k1", k1).line("k2", k2);
            (s.mean, Some(s.variance), s.width)
        }
        _ => (est.estimate(&data, &mut Vec::with_capacity(data.len()))?, None, None),
    };
    r.line("estimate", num(value));
    if let Some(v) = variance {
        r.line("trimmed_variance", num(v)).line("width", opt(width));
    }
    let row = vec![est.name(), data.len().to_string(), num(value)];
    emit(
        &r,
        &a.out,
        || {
            json!({
                "command": "estimate", "seed": seed.0, "source": source, "n": data.len(),
                "estimator": est, "estimate": value, "trimmed_variance": variance, "width": width,
            })
        },
        Some((&["estimator", "n", "value"], vec![row])),
    )?;
    Ok(OK)
}

fn plan_lines(r: &mut Report, plan: &ConfidencePlan) {
    r.line("regime", format!("{:?}", plan.regime))
        .line("n", plan.n)
        .line("x", num(plan.x))
        .line("k1", plan.trim.k1)
        .line("k2", plan.trim.k2)
        .line("certificate", opt(plan.certificate))
        .line("failure_bound", num(plan.failure_bound))
        .line("feasible", plan.feasible);
}

pub fn ci(a: &CiArgs) -> Result<Outcome> {
    let seed = a.out.seed();
    let (data, source) = load(&a.input, seed)?;
    let plan = precise_ci_plan(data.len(), a.alpha, a.delta, a.p, a.kappa, a.c_universal)?;
    let interval = ci_from_sample(&Sample::new(data.clone())?, &plan)?;
    let mut r = Report::new("trimstat ci", seed.0);
    r.line("source", &source).line("alpha", num(a.alpha)).line("delta", num(a.delta));
    r.line("p", num(a.p)).line("kappa", num(a.kappa)).line("c_universal", num(a.c_universal));
    plan_lines(&mut r, &plan);
    r.line("center", num(interval.center))
        .line("half_width", num(interval.half_width))
        .line("lower", num(interval.lower()))
        .line("upper", num(interval.upper()));
    let row = vec![
        data.len().to_string(),
        plan.trim.k1.to_string(),
        num(interval.center),
        num(interval.lower()),
        num(interval.upper()),
    ];
    emit(
        &r,
        &a.out,
        || {
            json!({
                "command": "ci", "seed": seed.0, "source": source, "alpha": a.alpha, "delta": a.delta,
                "p": a.p, "kappa": a.kappa, "c_universal": a.c_universal, "plan": plan, "interval": interval,
            })
        },
        Some((&["n", "k", "center", "lower", "upper"], vec![row])),
    )?;
    Ok(OK)
}

pub fn tune(a: &TuneArgs) -> Result<Outcome> {
    let seed = a.out.seed();
    let what = format!("tune {:?}", a.mode).to_lowercase();
    let n = need(a.n, "--n", &what)?;
    let mut r = Report::new(format!("trimstat {what}"), seed.0);
    let json = match a.mode {
        TuneMode::All => {
            let x = need(a.x, "--x", &what)?;
            let (plan, hw) = plan_all_subgaussian(x, n, a.sigma)?;
            plan_lines(&mut r, &plan);
            r.line("sigma", num(a.sigma)).line("half_width", num(hw)).line("max_x", opt(thm_all_max_x(n)));
            json!({ "plan": plan, "sigma": a.sigma, "half_width": hw, "max_x": thm_all_max_x(n) })
        }
        TuneMode::Sharper => {
            let x = need(a.x, "--x", &what)?;
            let p = need(a.p, "--p", &what)?;
            let kappa = need(a.kappa, "--kappa", &what)?;
            match plan_sharper(x, n, p, kappa, a.sigma)? {
                SharperOutcome::Feasible { plan, half_width } => {
                    plan_lines(&mut r, &plan);
                    r.line("sigma", num(a.sigma)).line("half_width", num(half_width));
                    json!({ "feasible": true, "plan": plan, "sigma": a.sigma, "half_width": half_width })
                }
                SharperOutcome::Infeasible { a_min } => {
                    r.line("n", n).line("x", num(x)).line("feasible", false).line("a_min", num(a_min));
                    json!({ "feasible": false, "n": n, "x": x, "p": p, "kappa": kappa, "a_min": a_min })
                }
            }
        }
        TuneMode::Multiple => {
            let p = need(a.p, "--p", &what)?;
            let kappa = need(a.kappa, "--kappa", &what)?;
            let k = k_multiple(n, p, kappa)?;
            r.line("n", n).line("k", k.map_or_else(|| "none".into(), |k| k.to_string()));
            let plan = match a.x {
                Some(x) => plan_multiple(x, n, p, kappa)?,
                None => None,
            };
            if let Some(plan) = &plan {
                r.line("x", num(plan.x)).line("failure_bound", num(plan.failure_bound));
            }
            json!({ "n": n, "p": p, "kappa": kappa, "k": k, "plan": plan })
        }
        TuneMode::Contaminated => {
            let eps = need(a.eps, "--eps", &what)?;
            let alpha = need(a.alpha, "--alpha", &what)?;
            let c = k_contaminated(n, eps, alpha)?;
            r.line("n", n).line("eps", num(eps)).line("alpha", num(alpha));
            r.line("k", c.k).line("d", format!("{:.4}", c.d)).line("feasible", c.feasible);
            json!({ "n": n, "eps": eps, "alpha": alpha, "k": c.k, "d": c.d, "feasible": c.feasible })
        }
        TuneMode::Precise => {
            let alpha = need(a.alpha, "--alpha", &what)?;
            let delta = need(a.delta, "--delta", &what)?;
            let p = need(a.p, "--p", &what)?;
            let kappa = need(a.kappa, "--kappa", &what)?;
            let plan = precise_ci_plan(n, alpha, delta, p, kappa, a.c_universal)?;
            plan_lines(&mut r, &plan);
            json!({ "alpha": alpha, "delta": delta, "p": p, "kappa": kappa, "c_universal": a.c_universal, "plan": plan })
        }
    };
    let mut json = json;
    json["command"] = json!(what);
    json["seed"] = json!(seed.0);
    emit(&r, &a.out, || json, None)?;
    Ok(OK)
}

fn describe(values: &[f64]) -> Vec<(&'static str, f64)> {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let sd = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    vec![
        ("mean", mean),
        ("sd", sd),
        ("median", median),
        ("iqr", iqr(values)),
        ("min", sorted[0]),
        ("max", sorted[sorted.len() - 1]),
    ]
}

pub fn simulate(a: &SimulateArgs) -> Result<Outcome> {
    let seed = a.out.seed();
    let estimator = parse_estimator(&a.estimator, &a.trim)?;
    let mut config = ExperimentConfig::new(a.dist.clone(), a.n, a.reps, seed, estimator);
    config.contamination = a.contamination()?;
    config.validate()?;
    config.workers = a.out.workers;
    let estimates = replicate(&config)?;
    // Worker count never changes the numbers, so it stays out of the report.
    config.workers = None;

    let mut r = Report::new("trimstat simulate", seed.0);
    r.line("dist", &a.dist).line("n", a.n).line("reps", a.reps).line("estimator", estimator.name());
    if let Some(c) = &config.contamination {
        r.line("eps", num(c.eps)).line("strategy", &c.strategy);
    }
    let stats = describe(&estimates);
    for (k, v) in &stats {
        r.line(k, num(*v));
    }
    let mut tail = None;
    if let Some(x) = a.x {
        let profile = moment_profile(&a.dist, &[2.0])?;
        let mu = profile.mean.ok_or_else(|| missing("a finite mean", "--x"))?;
        let sigma = profile.sigma.finite().ok_or_else(|| missing("a finite variance", "--x"))?;
        let t = tail_probability(&estimates, mu, x * sigma / (a.n as f64).sqrt())?;
        r.line("x", num(x)).line("p_hat", num(t.p_hat)).line("cp_low", num(t.cp_low)).line("cp_high", num(t.cp_high));
        tail = Some(t);
    }
    let name = estimator.name();
    let rows = estimates
        .iter()
        .enumerate()
        .map(|(i, v)| vec![name.clone(), a.dist.to_string(), a.n.to_string(), i.to_string(), num(*v)])
        .collect();
    emit(
        &r,
        &a.out,
        || {
            let summary: serde_json::Map<String, Value> = stats.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            json!({
                "command": "simulate", "seed": seed.0, "config": config, "x": a.x, "tail": tail,
                "summary": summary, "estimates": estimates,
            })
        },
        Some((&["estimator", "dist", "n", "replicate", "estimate"], rows)),
    )?;
    Ok(OK)
}

fn parse_ab(items: &[String]) -> Result<Vec<(f64, f64)>> {
    items
        .iter()
        .map(|s| {
            let (a, b) = s.split_once(':').ok_or_else(|| Error::Config(format!("expected a:b, got {s:?}")))?;
            let f = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::Config(format!("invalid number {v:?}")));
            Ok((f(a)?, f(b)?))
        })
        .collect()
}

fn build_case(a: &VerifyArgs) -> Result<InequalityCase> {
    let what = format!("verify {:?}", a.case);
    let dist = || a.dist.clone().ok_or_else(|| anyhow::Error::from(missing("--dist", &what)));
    let n = || need(a.n, "--n", &what);
    let k = || need(a.trim.k, "--k", &what);
    let (k1, k2) = trim_levels(&a.trim);
    let case = match a.case {
        VerifyCase::Bernstein => InequalityCase::Bernstein { dist: dist()?, n: n()?, z: need(a.z, "--z", &what)? },
        VerifyCase::OrderStatUpper => InequalityCase::OrderStatUpper { n: n()?, k: k()?, t: need(a.t, "--t", &what)? },
        VerifyCase::OrderStatLower => InequalityCase::OrderStatLower { n: n()?, k: k()?, t: need(a.t, "--t", &what)? },
        VerifyCase::EmpiricalVariance => {
            InequalityCase::EmpiricalVariance { dist: dist()?, n: n()?, z: need(a.z, "--z", &what)? }
        }
        VerifyCase::XiConcentration => InequalityCase::XiConcentration { n: n()?, k1, k2, t: need(a.t, "--t", &what)? },
        VerifyCase::WidthTail => InequalityCase::WidthTail {
            dist: dist()?,
            n: n()?,
            k1,
            k2,
            p: need(a.p, "--p", &what)?,
            t: need(a.t, "--t", &what)?,
        },
        VerifyCase::WidthCorollary => InequalityCase::WidthCorollary { dist: dist()?, n: n()?, k: k()?, v: a.v },
        VerifyCase::ThmAllTail => InequalityCase::ThmAllTail { dist: dist()?, n: n()?, x: need(a.x, "--x", &what)? },
        VerifyCase::ThmMultipleTail => InequalityCase::ThmMultipleTail {
            dist: dist()?,
            n: n()?,
            p: need(a.p, "--p", &what)?,
            x: need(a.x, "--x", &what)?,
        },
        VerifyCase::ThmContaminated => InequalityCase::ThmContaminated {
            dist: dist()?,
            n: n()?,
            eps: need(a.eps, "--eps", &what)?,
            alpha: need(a.alpha, "--alpha", &what)?,
            strategy: a.strategy,
        },
        VerifyCase::GaussianPerturbation => InequalityCase::GaussianPerturbation {
            x_grid: a.x_grid.clone().unwrap_or_else(|| DEFAULT_PERTURBATION_X.to_vec()),
        },
        VerifyCase::PopulationBounds => InequalityCase::PopulationBounds {
            dist: dist()?,
            ab: match &a.ab {
                Some(items) => parse_ab(items)?,
                None => vec![(0.05, 0.95), (0.1, 0.9), (0.25, 0.75)],
            },
            p_list: a.p_list.clone().unwrap_or_else(|| vec![2.0, 3.0, 4.0]),
            q: a.q.unwrap_or(2.0),
        },
    };
    Ok(case)
}

fn verdict_name(r: &BoundReport) -> String {
    serde_json::to_value(r.verdict).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

fn compact_params(r: &BoundReport) -> String {
    r.params
        .iter()
        .map(|(k, v)| match v {
            Value::String(s) => format!("{k}={s}"),
            other => format!("{k}={other}"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn verify_case(a: &VerifyArgs) -> Result<Outcome> {
    let seed = a.out.seed();
    let case = build_case(a)?;
    let reports = verify(&case, a.reps, seed, a.out.workers)?;
    let mut r = Report::new(format!("trimstat verify {}", case.id()), seed.0);
    if case.is_empirical() {
        r.line("reps", a.reps);
    }
    let violated = reports.iter().filter(|x| x.is_violated()).count();
    r.line("reports", reports.len()).line("violated", violated);
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|b| {
            vec![
                b.inequality.clone(),
                compact_params(b),
                opt(b.p_hat),
                opt(b.cp_low),
                opt(b.lhs),
                opt(b.bound),
                verdict_name(b),
            ]
        })
        .collect();
    r.table(&["inequality", "params", "p_hat", "cp_low", "lhs", "bound", "verdict"], rows);
    let csv_rows = reports
        .iter()
        .map(|b| {
            vec![
                b.inequality.clone(),
                serde_json::to_string(&b.params).unwrap_or_default(),
                opt(b.p_hat),
                opt(b.cp_low),
                opt(b.cp_high),
                opt(b.lhs),
                opt(b.bound),
                verdict_name(b),
                b.seed.to_string(),
            ]
        })
        .collect();
    emit(
        &r,
        &a.out,
        || json!(reports),
        Some((&["inequality", "params", "p_hat", "cp_low", "cp_high", "lhs", "bound", "verdict", "seed"], csv_rows)),
    )?;
    Ok(Outcome { violated: violated > 0 })
}

pub fn violin(a: &ViolinArgs) -> Result<Outcome> {
    let seed = a.out.seed();
    let rows = violin_experiment(seed, a.out.workers)?;
    let mut groups: Vec<(String, f64, Vec<f64>)> = Vec::new();
    for row in &rows {
        match groups.iter_mut().find(|g| g.0 == row.estimator && g.1 == row.dof) {
            Some(g) => g.2.push(row.estimate),
            None => groups.push((row.estimator.clone(), row.dof, vec![row.estimate])),
        }
    }
    groups.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
    let summary: Vec<Value> = groups
        .iter()
        .map(|(e, dof, v)| {
            let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            json!({ "estimator": e, "dof": dof, "median": describe(v)[2].1, "iqr": iqr(v), "max_abs": max_abs })
        })
        .collect();
    let mut r = Report::new("trimstat violin", seed.0);
    r.line("n", VIOLIN_N).line("reps", VIOLIN_REPS).line("k", VIOLIN_K);
    let table = summary
        .iter()
        .map(|s| {
            vec![
                s["dof"].to_string(),
                s["estimator"].as_str().unwrap_or_default().to_string(),
                num(s["median"].as_f64().unwrap_or(f64::NAN)),
                num(s["iqr"].as_f64().unwrap_or(f64::NAN)),
                num(s["max_abs"].as_f64().unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    r.table(&["dof", "estimator", "median", "iqr", "max_abs"], table);
    let csv_rows = rows
        .iter()
        .map(|row| vec![row.estimator.clone(), num(row.dof), row.replicate.to_string(), num(row.estimate)])
        .collect();
    emit(
        &r,
        &a.out,
        || json!({ "command": "violin", "seed": seed.0, "n": VIOLIN_N, "reps": VIOLIN_REPS, "k": VIOLIN_K, "summary": summary }),
        Some((&["estimator", "dof", "replicate", "estimate"], csv_rows)),
    )?;
    Ok(OK)
}
