//! Full p-form spectra of a profile, merged over radial systems.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::Profile;
use crate::radial::banded::count_below;
use crate::radial::fem::{assemble, fem_spectrum, MeshSpec};
use crate::radial::system::{EigList, RadialProblem, RadialSystem, SystemKind};
use crate::radial::transfer::{transfer_spectrum_with, zero_mode_count, TransferOptions};
use crate::radial::radial_systems;
use crate::sphere_modes::MultiplicityModel;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fem,
    #[default]
    Secular,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fem => "fem",
            Method::Secular => "secular",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub method: Method,
    pub mesh: MeshSpec,
    /// Relative agreement required between methods in `both` mode.
    pub agreement_rtol: f64,
    /// Eigenvalues below `zero_threshold · λ_max` count as zero modes.
    pub zero_threshold: f64,
    /// Secular scan step as a fraction of the expected spacing.
    pub scan_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: Method::Secular,
            mesh: MeshSpec::default(),
            agreement_rtol: 1e-6,
            zero_threshold: 1e-8,
            scan_fraction: TransferOptions::default().scan_fraction,
        }
    }
}

/// Evidence that no omitted sphere mode has an eigenvalue below `λ_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Completeness {
    /// Modes with `μ²` up to this value are included.
    pub mu_sq_cutoff: f64,
    /// The shell `(cutoff, shell_upper]` was solved and has no eigenvalue below `λ_max`.
    pub shell_upper: f64,
    pub shell_systems: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub lambda: f64,
    pub multiplicity: u64,
    pub system: String,
    pub kind: SystemKind,
    pub sphere_degree: usize,
    pub mu_sq: f64,
    /// Index into [`SpectrumResult::solutions`].
    pub system_index: usize,
    /// Position within that system's eigenvalue list.
    pub index_in_system: usize,
    pub error_estimate: Option<f64>,
}

/// One solved radial system.
#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub problem: RadialProblem,
    pub eig: EigList,
    pub zero_modes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub profile: String,
    pub n: usize,
    pub p: usize,
    pub lambda_max: f64,
    pub method: Method,
    pub mesh: MeshSpec,
    /// Eigenvalues below this value count as zero modes.
    pub zero_cut: f64,
    pub entries: Vec<SpectrumEntry>,
    pub zero_count: u64,
    pub analytic_zero_count: u64,
    pub completeness: Completeness,
    pub flags: Vec<String>,
    #[serde(skip)]
    pub solutions: Vec<SystemSolution>,
}

impl SpectrumResult {
    /// All eigenvalues with multiplicity, ascending.
    pub fn multiset(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for e in &self.entries {
            out.extend(std::iter::repeat(e.lambda).take(e.multiplicity as usize));
        }
        out
    }

    /// Positive eigenvalues with multiplicity, ascending.
    pub fn positive(&self) -> Vec<f64> {
        let cut = self.zero_cut;
        self.multiset().into_iter().filter(|l| *l >= cut).collect()
    }

    /// The entry carrying the `k`-th positive eigenvalue (`k ≥ 1`, with multiplicity).
    pub fn positive_entry(&self, k: usize) -> Option<&SpectrumEntry> {
        let cut = self.zero_cut;
        let mut seen = 0;
        for e in self.entries.iter().filter(|e| e.lambda >= cut) {
            seen += e.multiplicity as usize;
            if seen >= k {
                return Some(e);
            }
        }
        None
    }

    pub fn lambda_k(&self, k: usize) -> Option<f64> {
        self.positive_entry(k).map(|e| e.lambda)
    }
}

/// Lower bound for `γ(γ+1)`-type potentials of every system generated by a
/// mode with angular eigenvalue `μ²`, used to seed the cutoff search.
fn initial_cutoff(profile: &Profile, lambda_max: f64) -> f64 {
    (0.5 * lambda_max * profile.r_max().powi(2)).max(2.0)
}

fn systems_for(n: usize, degrees: &[usize], mu_sq_max: f64, model: &MultiplicityModel) -> Result<Vec<RadialSystem>> {
    let mut out = Vec::new();
    for &p in degrees {
        out.extend(radial_systems(n, p, mu_sq_max, model)?);
    }
    Ok(out)
}

/// Choose the mode cutoff: grow it until a whole shell of further modes has no
/// FEM eigenvalue below `λ_max`. Discrete eigenvalues bound the exact ones from
/// above, so the count is taken slightly above `λ_max`.
pub fn enumeration_cutoff(
    profile: &Profile,
    n: usize,
    degrees: &[usize],
    lambda_max: f64,
    model: &MultiplicityModel,
    filter: &(dyn Fn(&RadialSystem) -> bool + Sync),
    mesh: &MeshSpec,
) -> Result<Completeness> {
    let mut cut = initial_cutoff(profile, lambda_max);
    for _ in 0..40 {
        let hi = 1.5 * cut + 10.0;
        let shell: Vec<RadialSystem> = systems_for(n, degrees, hi, model)?
            .into_iter()
            .filter(|s| s.source.mu_sq > cut && filter(s))
            .collect();
        let low = shell
            .par_iter()
            .map(|s| {
                let pr = RadialProblem::new(s.clone(), profile.clone(), lambda_max)?;
                let disc = assemble(&pr, mesh, 0)?;
                Ok(count_below(&disc.k, &disc.m, lambda_max * 1.01))
            })
            .collect::<Result<Vec<usize>>>()?;
        if low.iter().all(|c| *c == 0) {
            return Ok(Completeness { mu_sq_cutoff: cut, shell_upper: hi, shell_systems: shell.len() });
        }
        cut = hi;
    }
    Err(Error::Incomplete(format!(
        "no mode cutoff up to μ² = {cut:.3e} certifies completeness below λ_max = {lambda_max}"
    )))
}

fn agree(a: &EigList, b: &EigList, rtol: f64, floor: f64) -> Result<()> {
    if a.entries.len() != b.entries.len() {
        return Err(Error::Disagreement(format!(
            "{}: {} secular vs {} FEM eigenvalues",
            a.system,
            a.entries.len(),
            b.entries.len()
        )));
    }
    for (x, y) in a.values().iter().zip(b.values()) {
        if (x - y).abs() > rtol * y.abs().max(floor) {
            return Err(Error::Disagreement(format!("{}: secular {x:.12e} vs FEM {y:.12e}", a.system)));
        }
    }
    Ok(())
}

/// Solve one radial problem with the configured method.
pub fn solve_system(problem: &RadialProblem, opts: &SolverOptions) -> Result<EigList> {
    let topts = TransferOptions { scan_fraction: opts.scan_fraction, ..TransferOptions::default() };
    match opts.method {
        Method::Fem => fem_spectrum(problem, &opts.mesh),
        Method::Secular => transfer_spectrum_with(problem, &topts, &opts.mesh),
        Method::Both => {
            let a = transfer_spectrum_with(problem, &topts, &opts.mesh)?;
            let b = fem_spectrum(problem, &opts.mesh)?;
            agree(&a, &b, opts.agreement_rtol, opts.zero_threshold.max(1e-3))?;
            Ok(a)
        }
    }
}

fn merge(
    profile: &Profile,
    n: usize,
    p: usize,
    lambda_max: f64,
    systems: Vec<RadialSystem>,
    opts: &SolverOptions,
    completeness: Completeness,
) -> Result<SpectrumResult> {
    let solutions = systems
        .into_par_iter()
        .map(|sys| {
            let problem = RadialProblem::new(sys, profile.clone(), lambda_max)?;
            let eig = solve_system(&problem, opts)?;
            let zero_modes = zero_mode_count(&problem)?;
            Ok(SystemSolution { problem, eig, zero_modes })
        })
        .collect::<Result<Vec<_>>>()?;
    let zero_cut = opts.zero_threshold * lambda_max;
    let mut entries = Vec::new();
    let mut flags = Vec::new();
    let mut zero_count = 0;
    let mut analytic_zero_count = 0;
    for (si, sol) in solutions.iter().enumerate() {
        let sys = &sol.problem.system;
        let mult = sys.multiplicity();
        flags.extend(sol.eig.flags.iter().cloned());
        analytic_zero_count += sol.zero_modes as u64 * mult;
        for (k, e) in sol.eig.entries.iter().enumerate() {
            if e.lambda < zero_cut {
                zero_count += mult;
            }
            entries.push(SpectrumEntry {
                lambda: e.lambda.max(0.0),
                multiplicity: mult,
                system: sys.label(),
                kind: sys.kind,
                sphere_degree: sys.source.q,
                mu_sq: sys.source.mu_sq,
                system_index: si,
                index_in_system: k,
                error_estimate: e.error_estimate,
            });
        }
    }
    if zero_count != analytic_zero_count {
        return Err(Error::Disagreement(format!(
            "{} p={p}: {zero_count} numerical zero modes vs {analytic_zero_count} from the λ = 0 solutions",
            profile.label
        )));
    }
    entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda).then(a.system_index.cmp(&b.system_index)));
    Ok(SpectrumResult {
        profile: profile.label.clone(),
        n,
        p,
        lambda_max,
        method: opts.method,
        mesh: opts.mesh,
        zero_cut,
        entries,
        zero_count,
        analytic_zero_count,
        completeness,
        flags,
        solutions,
    })
}

/// The spectrum of the Hodge Laplacian on `p`-forms below `λ_max`.
pub fn assemble_spectrum(
    profile: &Profile,
    n: usize,
    p: usize,
    lambda_max: f64,
    opts: &SolverOptions,
    model: &MultiplicityModel,
) -> Result<SpectrumResult> {
    if p > n + 1 {
        return Err(Error::Domain(format!("degree {p} exceeds the dimension {}", n + 1)));
    }
    let all = |_: &RadialSystem| true;
    let completeness = enumeration_cutoff(profile, n, &[p], lambda_max, model, &all, &opts.mesh)?;
    let systems = radial_systems(n, p, completeness.mu_sq_cutoff, model)?;
    merge(profile, n, p, lambda_max, systems, opts, completeness)
}

/// Whether a system carries exact `p`-forms: coexact `(p−1)`-forms of the
/// `v₁` and exceptional-`α` families (whose differentials are exact `p`-forms)
/// and the exact `v₄'` family in degree `p`.
pub fn carries_exact(sys: &RadialSystem, p: usize) -> bool {
    match sys.kind {
        SystemKind::MinusAlpha | SystemKind::ExceptionalAlpha => sys.degree + 1 == p,
        SystemKind::MinusBeta => sys.degree == p,
        _ => false,
    }
}

/// The spectrum of the Laplacian on exact `p`-forms below `λ_max` (zero modes excluded).
pub fn exact_spectrum(
    profile: &Profile,
    n: usize,
    p: usize,
    lambda_max: f64,
    opts: &SolverOptions,
    model: &MultiplicityModel,
) -> Result<SpectrumResult> {
    if p == 0 || p > n + 1 {
        return Err(Error::Domain(format!("exact forms need 1 ≤ p ≤ {}, got {p}", n + 1)));
    }
    let filter = move |s: &RadialSystem| carries_exact(s, p);
    let degrees = [p - 1, p];
    let completeness = enumeration_cutoff(profile, n, &degrees, lambda_max, model, &filter, &opts.mesh)?;
    let systems: Vec<RadialSystem> = systems_for(n, &degrees, completeness.mu_sq_cutoff, model)?
        .into_iter()
        .filter(|s| carries_exact(s, p))
        .collect();
    let mut res = merge(profile, n, p, lambda_max, systems, opts, completeness)?;
    // λ = 0 solutions of the coexact families are closed forms, not exact ones
    let cut = opts.zero_threshold * lambda_max;
    res.entries.retain(|e| e.lambda >= cut);
    res.zero_count = 0;
    res.analytic_zero_count = 0;
    Ok(res)
}

/// Smallest positive exact eigenvalue, doubling `λ_max` from `lambda_start`
/// until one is found.
pub fn first_exact_eigenvalue(
    profile: &Profile,
    n: usize,
    p: usize,
    lambda_start: f64,
    opts: &SolverOptions,
    model: &MultiplicityModel,
) -> Result<f64> {
    let mut lmax = lambda_start;
    for _ in 0..30 {
        let res = exact_spectrum(profile, n, p, lmax, opts, model)?;
        if let Some(e) = res.entries.first() {
            return Ok(e.lambda);
        }
        lmax *= 2.0;
    }
    Err(Error::Numerical(format!("no exact {p}-form eigenvalue found on {}", profile.label)))
}
