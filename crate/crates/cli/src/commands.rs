//! The subcommands. Each returns its property checks; artifacts go through a [`Writer`].

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use conic_spectra::analysis::{assemble_spectrum, mcgowan_for, sweep_epsilon, Check, SpectrumResult};
use conic_spectra::aps_limit::{aps_kernel, l2_extension_rule, ApsProblem};
use conic_spectra::cone_operator::{gamma_channels, gamma_formula, BlockFamily};
use conic_spectra::geometry::{build_profile, connected_sum_profile, Profile};
use conic_spectra::sphere_modes::ModeLevel;
use conic_spectra::{Error, Result};

use crate::config::RunConfig;
use crate::output::{loglog_svg, Cell, Series, Table, Writer};

/// What a subcommand found, before the report is written.
#[derive(Debug, Default, Serialize)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
    pub details: Value,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn io(e: std::io::Error) -> Error {
    Error::Domain(format!("cannot write output: {e}"))
}

pub fn modes(config: &RunConfig, out: &mut Writer) -> Result<Outcome> {
    let n = config.n;
    let half = 0.5 * n as f64;
    let model = config.model();
    let mut table = Table::new("modes", &["n", "q", "k", "mu_sq", "mult", "family", "gamma", "degree"]);
    let mut worst_bound = f64::INFINITY;
    let mut worst_formula: f64 = 0.0;
    let mut l2_rows = Vec::new();
    for p in 0..=n + 1 {
        for ch in gamma_channels(n, p, config.mu_sq_max, &model)? {
            let src = &ch.block.source;
            let k = match src.level {
                ModeLevel::Harmonic => 0,
                ModeLevel::Level(k) => k as u64,
            };
            worst_bound = worst_bound.min(ch.gamma.abs() - half);
            let expected = match ch.block.family {
                BlockFamily::Exceptional => {
                    if ch.gamma > 0.0 {
                        half
                    } else {
                        -half
                    }
                }
                family => {
                    let pair = gamma_formula(n, src.q, src.mu_sq, family);
                    if (pair[0] - ch.gamma).abs() < (pair[1] - ch.gamma).abs() {
                        pair[0]
                    } else {
                        pair[1]
                    }
                }
            };
            worst_formula = worst_formula.max((expected - ch.gamma).abs() / expected.abs().max(1.0));
            l2_rows.push(json!({ "gamma": ch.gamma, "degree": p, "l2_extension": l2_extension_rule(ch.gamma) }));
            table.push(vec![
                Cell::from(n),
                Cell::from(src.q),
                Cell::from(k),
                Cell::from(src.mu_sq),
                Cell::from(ch.multiplicity),
                Cell::from(ch.block.family.as_str()),
                Cell::from(ch.gamma),
                Cell::from(p),
            ]);
        }
    }
    out.table(&table).map_err(io)?;
    let checks = vec![
        check(
            "gamma_lower_bound",
            worst_bound >= -1e-12,
            format!("min over channels of |γ| − n/2: {worst_bound:.3e}"),
        ),
        check("zero_not_in_spectrum", half + worst_bound > 0.0, format!("min |γ| = {}", half + worst_bound)),
        check("block_formula", worst_formula <= 1e-12, format!("max relative deviation {worst_formula:.3e}")),
    ];
    let details = json!({ "channels": table.rows.len(), "l2_extension": l2_rows });
    Ok(Outcome { checks, failures: Vec::new(), details })
}

fn models(config: &RunConfig) -> Result<Vec<(String, Option<f64>, Profile)>> {
    let m1 = build_profile(&config.m1)?;
    let m2 = build_profile(&config.m2)?;
    let mut out = vec![("M1".to_string(), None, m1.clone())];
    for &eps in &config.epsilons {
        out.push((format!("M_eps({eps})"), Some(eps), connected_sum_profile(&m1, &m2, eps)?));
    }
    Ok(out)
}

pub fn spectrum(config: &RunConfig, out: &mut Writer) -> Result<Outcome> {
    let n = config.n;
    let model = config.model();
    let profiles = models(config)?;
    let jobs: Vec<(usize, usize)> =
        (0..profiles.len()).flat_map(|i| config.degrees.iter().map(move |&p| (i, p))).collect();
    let results: Vec<Result<SpectrumResult>> = jobs
        .par_iter()
        .map(|&(i, p)| assemble_spectrum(&profiles[i].2, n, p, config.lambda_max, &config.solver, &model))
        .collect();

    let mut table = Table::new(
        "spectrum",
        &["model", "epsilon", "p", "index", "lambda", "multiplicity", "system", "sphere_degree", "mu_sq", "error_estimate"],
    );
    let mut failures = Vec::new();
    let mut summaries = Vec::new();
    let mut solved: Vec<((usize, usize), SpectrumResult)> = Vec::new();
    for (&(i, p), res) in jobs.iter().zip(results) {
        let (label, eps, _) = &profiles[i];
        match res {
            Ok(s) => {
                for (idx, e) in s.entries.iter().enumerate() {
                    table.push(vec![
                        Cell::from(label.as_str()),
                        Cell::from(*eps),
                        Cell::from(p),
                        Cell::from(idx + 1),
                        Cell::from(e.lambda),
                        Cell::from(e.multiplicity),
                        Cell::from(e.system.as_str()),
                        Cell::from(e.sphere_degree),
                        Cell::from(e.mu_sq),
                        Cell::from(e.error_estimate),
                    ]);
                }
                summaries.push(json!({
                    "model": label,
                    "epsilon": eps,
                    "p": p,
                    "profile": s.profile,
                    "zero_count": s.zero_count,
                    "analytic_zero_count": s.analytic_zero_count,
                    "completeness": s.completeness,
                    "flags": s.flags,
                }));
                solved.push(((i, p), s));
            }
            Err(e) => failures.push(format!("{label} p={p}: {} ({})", e, e.kind())),
        }
    }
    out.table(&table).map_err(io)?;

    let mut checks = vec![check("all_solved", failures.is_empty(), format!("{} of {} spectra", solved.len(), jobs.len()))];
    let find = |i: usize, p: usize| solved.iter().find(|(key, _)| *key == (i, p)).map(|(_, s)| s);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut count_mismatch = false;
    for i in 0..profiles.len() {
        for &p in &config.degrees {
            let q = n + 1 - p;
            if p >= q {
                continue;
            }
            let (Some(a), Some(b)) = (find(i, p), find(i, q)) else { continue };
            pairs += 1;
            let (a, b) = (a.multiset(), b.multiset());
            if a.len() != b.len() {
                count_mismatch = true;
                continue;
            }
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs() / x.abs().max(1.0));
            }
        }
    }
    if pairs > 0 {
        checks.push(check(
            "hodge_duality",
            !count_mismatch && worst <= 1e-6,
            format!("{pairs} degree pairs, max relative deviation {worst:.3e}"),
        ));
    }
    Ok(Outcome { checks, failures, details: json!({ "spectra": summaries }) })
}

pub fn sweep(config: &RunConfig, out: &mut Writer, svg: bool) -> Result<Outcome> {
    let report = sweep_epsilon(&config.sweep(), &config.model())?;
    let mut table = Table::new(
        "sweep",
        &["epsilon", "p", "k", "lambda_eps", "lambda_m1", "abs_err", "rel_err", "bord_ratio", "mcgowan", "zero_count"],
    );
    for r in &report.rows {
        table.push(vec![
            Cell::from(r.epsilon),
            Cell::from(r.p),
            Cell::from(r.k),
            Cell::from(r.lambda_eps),
            Cell::from(r.lambda_m1),
            Cell::from(r.abs_err),
            Cell::from(r.rel_err),
            Cell::from(r.bord_ratio.map(|b| b.max(0.0))),
            Cell::from(r.mcgowan),
            Cell::from(r.zero_count),
        ]);
    }
    out.table(&table).map_err(io)?;
    if svg {
        for &p in &config.degrees {
            let series: Vec<Series> = (1..=config.k)
                .map(|k| Series {
                    label: format!("k = {k}"),
                    points: report.rows.iter().filter(|r| r.p == p && r.k == k).map(|r| (r.epsilon, r.abs_err)).collect(),
                })
                .collect();
            let title = format!("|λ_k(M_ε) − λ_k(M₁)|, p = {p}");
            out.svg(&format!("plots/error_p{p}.svg"), &loglog_svg(&title, "ε", "absolute error", &series))
                .map_err(io)?;
        }
    }
    let details = json!({
        "reference": report.reference,
        "expected_zero_counts": report.expected_zero_counts,
        "summaries": report.summaries,
    });
    Ok(Outcome { checks: report.checks, failures: report.failures, details })
}

pub fn aps_kernel_cmd(config: &RunConfig, out: &mut Writer) -> Result<Outcome> {
    let m2 = build_profile(&config.m2)?;
    let problem = ApsProblem::new(config.n, m2, config.mu_sq_max, &config.model())?;
    let report = aps_kernel(&problem)?;
    let rule: Vec<Value> = report
        .blocks
        .iter()
        .flat_map(|b| b.gammas.iter().map(move |g| json!({ "gamma": g, "family": b.family, "l2_extension": l2_extension_rule(*g) })))
        .collect();
    out.json("aps_kernel.json", &json!({ "kernel": report, "l2_extension": rule })).map_err(io)?;
    let dims: Vec<(usize, u64)> = report.degrees.iter().map(|d| (d.p, d.dimension)).collect();
    let checks = vec![check(
        "well_conditioned",
        report.flags.is_empty(),
        format!("kernel dimensions {dims:?}; flags {:?}", report.flags),
    )];
    Ok(Outcome { checks, failures: Vec::new(), details: json!({ "dimensions": dims }) })
}

pub fn mcgowan(config: &RunConfig, out: &mut Writer) -> Result<Outcome> {
    let n = config.n;
    let model = config.model();
    let m1 = build_profile(&config.m1)?;
    let m2 = build_profile(&config.m2)?;
    let jobs: Vec<(f64, usize)> =
        config.epsilons.iter().flat_map(|&e| (2..=n).map(move |p| (e, p))).collect();
    let results: Vec<Result<(conic_spectra::analysis::McGowanReport, Option<f64>)>> = jobs
        .par_iter()
        .map(|&(eps, p)| {
            let m_eps = connected_sum_profile(&m1, &m2, eps)?;
            let bound = mcgowan_for(&m_eps, eps, n, p, config.omega, config.c_rho, &config.solver, &model)?;
            let spec = assemble_spectrum(&m_eps, n, p, config.lambda_max, &config.solver, &model)?;
            Ok((bound, spec.lambda_k(1)))
        })
        .collect();
    let mut table = Table::new(
        "mcgowan",
        &["epsilon", "p", "mu_p_u1", "mu_p_u2", "mu_pm1_u12", "omega", "c_rho", "lambda0", "lambda1"],
    );
    let mut failures = Vec::new();
    let mut holds = true;
    let mut detail = Vec::new();
    for (&(eps, p), res) in jobs.iter().zip(results) {
        match res {
            Ok((r, l1)) => {
                holds &= l1.is_some_and(|l| r.lambda0 <= l);
                detail.push(format!("ε={eps} p={p}: λ₀={:.6} λ₁={}", r.lambda0, l1.map_or("none".into(), |l| format!("{l:.6}"))));
                table.push(vec![
                    Cell::from(eps),
                    Cell::from(p),
                    Cell::from(r.mu_p_u1),
                    Cell::from(r.mu_p_u2),
                    Cell::from(r.mu_pm1_u12),
                    Cell::from(r.omega),
                    Cell::from(r.c_rho),
                    Cell::from(r.lambda0),
                    Cell::from(l1),
                ]);
            }
            Err(e) => failures.push(format!("ε={eps} p={p}: {e}")),
        }
    }
    out.table(&table).map_err(io)?;
    let checks = vec![check("bound_below_first_eigenvalue", holds && !jobs.is_empty(), detail.join("; "))];
    Ok(Outcome { checks, failures, details: Value::Null })
}
