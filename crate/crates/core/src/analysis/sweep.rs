//! ε-sweeps of the collapsing connected sum `M_ε = M₁ # ε·M₂`.

use serde::{Deserialize, Serialize};

use super::diagnostics::{boundary_diagnostics, BoundaryDiagnostics};
use super::mcgowan::{mcgowan_for, McGowanReport};
use super::spectrum::{assemble_spectrum, SolverOptions, SpectrumResult};
use crate::aps_limit::{aps_kernel, ApsProblem};
use crate::geometry::{build_profile, connected_sum_profile, ModelSpec, Profile};
use crate::radial::transfer::transfer_mode;
use crate::sphere_modes::MultiplicityModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub m1: ModelSpec,
    pub m2: ModelSpec,
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    /// Degrees whose eigenvalues are tracked.
    pub degrees: Vec<usize>,
    /// Number of positive eigenvalues tracked per degree.
    pub k: usize,
    pub lambda_max: f64,
    pub solver: SolverOptions,
    /// Combinatorial constant of the cover bound.
    pub omega: f64,
    /// Override for `c_ρ`; defaults to the log-linear partition of unity.
    pub c_rho: Option<f64>,
    /// One-sided margin for `λ_k(M_ε) ≤ (1 + margin) λ_k(M₁)` at the last ε.
    pub upper_margin: f64,
    /// Relative error required at the last ε.
    pub final_rel_err: f64,
    /// Sphere modes enumerated for the limit-problem kernel.
    pub kernel_mu_sq_max: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 2,
            m1: ModelSpec::Spindle { radius: 1.0 },
            m2: ModelSpec::TruncatedSpindle { radius: 2.0, cut: 1.0 },
            epsilons: vec![0.2, 0.1, 0.05, 0.025],
            degrees: vec![0, 1],
            k: 5,
            lambda_max: 40.0,
            solver: SolverOptions::default(),
            omega: 1.0,
            c_rho: None,
            upper_margin: 0.05,
            final_rel_err: 0.02,
            kernel_mu_sq_max: 60.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {}", self.n)));
        }
        if self.epsilons.is_empty() || self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Domain("epsilons must be nonempty and strictly decreasing".into()));
        }
        if let Some(p) = self.degrees.iter().find(|p| **p > self.n + 1) {
            return Err(Error::Domain(format!("tracked degree {p} exceeds n + 1")));
        }
        if self.k == 0 || !(self.lambda_max > 0.0) {
            return Err(Error::Domain("k and lambda_max must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub p: usize,
    pub k: usize,
    pub lambda_eps: f64,
    pub lambda_m1: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub bord_ratio: Option<f64>,
    pub mcgowan: Option<f64>,
    pub zero_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonSummary {
    pub epsilon: f64,
    /// Zero modes in each degree `0..=m`.
    pub zero_counts: Vec<Option<u64>>,
    /// Smallest positive eigenvalue in each degree `1..=n`.
    pub min_positive: Vec<Option<f64>>,
    pub mcgowan: Vec<McGowanReport>,
    /// Diagnostics of the first tracked eigenfunction of each tracked degree.
    pub diagnostics: Vec<(usize, BoundaryDiagnostics)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub reference: Vec<(usize, Vec<f64>)>,
    pub expected_zero_counts: Vec<u64>,
    pub rows: Vec<SweepRow>,
    pub summaries: Vec<EpsilonSummary>,
    pub checks: Vec<Check>,
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn track(
    spec: &SpectrumResult,
    k: usize,
    glue: usize,
    eps: f64,
    n: usize,
) -> Result<BoundaryDiagnostics> {
    let e = spec
        .positive_entry(k)
        .ok_or_else(|| Error::Numerical(format!("no eigenvalue {k} in degree {}", spec.p)))?;
    let sol = &spec.solutions[e.system_index];
    let mode = transfer_mode(&sol.problem, e.lambda)?;
    boundary_diagnostics(&mode, glue, eps, n)
}

/// Run the sweep; solver failures are recorded and the sweep continues.
pub fn sweep_epsilon(config: &SweepConfig, model: &MultiplicityModel) -> Result<SweepReport> {
    config.validate()?;
    let n = config.n;
    let m = n + 1;
    let m1 = build_profile(&config.m1)?;
    let m2 = build_profile(&config.m2)?;
    let solver = &config.solver;
    let mut failures = Vec::new();

    // reference spectra on M₁ in every degree
    let mut ref_spectra: Vec<Option<SpectrumResult>> = Vec::new();
    for p in 0..=m {
        match assemble_spectrum(&m1, n, p, config.lambda_max, solver, model) {
            Ok(s) => ref_spectra.push(Some(s)),
            Err(e) => {
                failures.push(format!("M1 p={p}: {e}"));
                ref_spectra.push(None);
            }
        }
    }
    let reference: Vec<(usize, Vec<f64>)> = config
        .degrees
        .iter()
        .map(|&p| {
            let vals = ref_spectra[p].as_ref().map(|s| s.positive()).unwrap_or_default();
            (p, vals.into_iter().take(config.k).collect())
        })
        .collect();
    for (p, vals) in &reference {
        if vals.len() < config.k {
            failures.push(format!("M1 p={p}: only {} positive eigenvalues below {}", vals.len(), config.lambda_max));
        }
    }

    // zero modes expected from M₁ and the kernel of the limit problem on M₂(1)
    let kernel = ApsProblem::new(n, m2.clone(), config.kernel_mu_sq_max, model).and_then(|pr| aps_kernel(&pr));
    let mut expected_zero_counts = Vec::new();
    for p in 0..=m {
        let a = ref_spectra[p].as_ref().map(|s| s.zero_count).unwrap_or(0);
        let b = match (&kernel, p >= 1 && p < m) {
            (Ok(k), true) => k.dimension(p).unwrap_or(0),
            _ => 0,
        };
        expected_zero_counts.push(a + b);
    }
    if let Err(e) = &kernel {
        failures.push(format!("limit kernel: {e}"));
    }

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for &eps in &config.epsilons {
        let m_eps = match connected_sum_profile(&m1, &m2, eps) {
            Ok(p) => p,
            Err(e) => {
                failures.push(format!("eps={eps}: {e}"));
                continue;
            }
        };
        let glue = m_eps.glue.expect("connected sums record the gluing segment");
        let mut spectra: Vec<Option<SpectrumResult>> = Vec::new();
        for p in 0..=m {
            match assemble_spectrum(&m_eps, n, p, config.lambda_max, solver, model) {
                Ok(s) => spectra.push(Some(s)),
                Err(e) => {
                    failures.push(format!("eps={eps} p={p}: {e}"));
                    spectra.push(None);
                }
            }
        }
        let mut mcgowan = Vec::new();
        for p in 2..=n {
            match mcgowan_for(&m_eps, eps, n, p, config.omega, config.c_rho, solver, model) {
                Ok(r) => mcgowan.push(r),
                Err(e) => failures.push(format!("eps={eps} cover bound p={p}: {e}")),
            }
        }
        let mut diagnostics = Vec::new();
        for &p in &config.degrees {
            let Some(spec) = &spectra[p] else { continue };
            // the cover bound controls the positive spectrum in every degree 1..=n
            let bound = (p >= 1 && p <= n && !mcgowan.is_empty())
                .then(|| mcgowan.iter().map(|r| r.lambda0).fold(f64::INFINITY, f64::min));
            for k in 1..=config.k {
                let (Some(le), Some(l1)) = (spec.lambda_k(k), reference_value(&reference, p, k)) else {
                    failures.push(format!("eps={eps} p={p}: eigenvalue {k} missing"));
                    continue;
                };
                let diag = match track(spec, k, glue, eps, n) {
                    Ok(d) => Some(d),
                    Err(e) => {
                        failures.push(format!("eps={eps} p={p} k={k} diagnostics: {e}"));
                        None
                    }
                };
                if k == 1 {
                    if let Some(d) = diag {
                        diagnostics.push((p, d));
                    }
                }
                rows.push(SweepRow {
                    epsilon: eps,
                    p,
                    k,
                    lambda_eps: le,
                    lambda_m1: l1,
                    abs_err: (le - l1).abs(),
                    rel_err: (le - l1).abs() / l1,
                    bord_ratio: diag.map(|d| d.bord_ratio),
                    mcgowan: bound,
                    zero_count: spec.zero_count,
                });
            }
        }
        summaries.push(EpsilonSummary {
            epsilon: eps,
            zero_counts: spectra.iter().map(|s| s.as_ref().map(|s| s.zero_count)).collect(),
            min_positive: (1..=n).map(|p| spectra[p].as_ref().and_then(|s| s.lambda_k(1))).collect(),
            mcgowan,
            diagnostics,
        });
    }
    let checks = evaluate_checks(config, &rows, &summaries, &expected_zero_counts);
    Ok(SweepReport { config: config.clone(), reference, expected_zero_counts, rows, summaries, checks, failures })
}

fn reference_value(reference: &[(usize, Vec<f64>)], p: usize, k: usize) -> Option<f64> {
    reference.iter().find(|r| r.0 == p).and_then(|r| r.1.get(k - 1)).copied()
}

fn evaluate_checks(
    config: &SweepConfig,
    rows: &[SweepRow],
    summaries: &[EpsilonSummary],
    expected: &[u64],
) -> Vec<Check> {
    let mut checks = Vec::new();
    let last = *config.epsilons.last().expect("validated");

    // errors strictly decreasing in ε and small at the end
    let mut monotone = true;
    let mut final_ok = true;
    let mut upper_ok = true;
    let mut worst = String::new();
    for &p in &config.degrees {
        for k in 1..=config.k {
            let seq: Vec<&SweepRow> = rows.iter().filter(|r| r.p == p && r.k == k).collect();
            if seq.len() != config.epsilons.len() {
                monotone = false;
                final_ok = false;
                continue;
            }
            if seq.windows(2).any(|w| w[1].abs_err >= w[0].abs_err) {
                monotone = false;
                worst = format!("p={p} k={k}: {:?}", seq.iter().map(|r| r.abs_err).collect::<Vec<_>>());
            }
            let tail = seq.last().expect("nonempty");
            final_ok &= tail.rel_err < config.final_rel_err;
            upper_ok &= tail.epsilon == last && tail.lambda_eps <= (1.0 + config.upper_margin) * tail.lambda_m1;
        }
    }
    let max_final = rows.iter().filter(|r| r.epsilon == last).map(|r| r.rel_err).fold(0.0, f64::max);
    checks.push(Check {
        name: "errors_decreasing".into(),
        passed: monotone,
        detail: if monotone { "all tracked errors strictly decrease".into() } else { worst },
    });
    checks.push(Check {
        name: "final_error".into(),
        passed: final_ok,
        detail: format!("max relative error at ε = {last}: {max_final:.3e}"),
    });
    checks.push(Check {
        name: "upper_bound".into(),
        passed: upper_ok,
        detail: format!("λ_k(M_ε) ≤ {}·λ_k(M₁) at ε = {last}", 1.0 + config.upper_margin),
    });

    // zero modes
    let zero_ok = summaries.len() == config.epsilons.len()
        && summaries.iter().all(|s| s.zero_counts.iter().zip(expected).all(|(c, e)| *c == Some(*e)));
    checks.push(Check {
        name: "zero_modes".into(),
        passed: zero_ok,
        detail: format!(
            "expected {:?}; observed {:?}",
            expected,
            summaries.iter().map(|s| s.zero_counts.clone()).collect::<Vec<_>>()
        ),
    });

    // uniform gap and the cover bound
    let gaps: Vec<f64> = summaries.iter().flat_map(|s| s.min_positive.iter().flatten().copied()).collect();
    let gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let bounds: Vec<f64> = summaries.iter().flat_map(|s| s.mcgowan.iter().map(|r| r.lambda0)).collect();
    let gap_ok = gap.is_finite() && gap > 0.0 && gaps.len() == summaries.len() * config.n;
    checks.push(Check { name: "uniform_gap".into(), passed: gap_ok, detail: format!("min positive eigenvalue {gap:.6}") });
    let expected_bounds = summaries.len() * config.n.saturating_sub(1);
    let bound_ok = bounds.len() == expected_bounds && bounds.iter().all(|b| *b <= gap);
    checks.push(Check {
        name: "cover_bound".into(),
        passed: bound_ok,
        detail: format!("λ₀ per ε: {bounds:?}; gap {gap:.6}"),
    });

    // boundary control stays bounded, cut-off mass decreases
    let ratios: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.diagnostics.first().map(|d| d.1.bord_ratio))
        .collect();
    let masses: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.diagnostics.first().map(|d| d.1.cutoff_mass))
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let growing = ratios.len() >= 2 && ratios.windows(2).all(|w| w[1] > w[0]);
    checks.push(Check {
        name: "boundary_ratio_bounded".into(),
        passed: ratios.len() == summaries.len() && !growing && max_ratio.is_finite(),
        detail: format!("‖Π<0 σ(ε)‖²/ε: {ratios:?}"),
    });
    checks.push(Check {
        name: "cutoff_mass_decreasing".into(),
        passed: masses.len() == summaries.len() && masses.windows(2).all(|w| w[1] < w[0]),
        detail: format!("‖(1−ξ_ε)ξ₁φ⁻‖²: {masses:?}"),
    });
    checks
}

/// `M_ε` for one ε, for callers outside the sweep.
pub fn model_profile(config: &SweepConfig, eps: f64) -> Result<Profile> {
    connected_sum_profile(&build_profile(&config.m1)?, &build_profile(&config.m2)?, eps)
}
