//! The limit operator on the unscaled second piece `M₂(1)` with the boundary
//! condition `Π_{<0} σ(1) = 0`: kernel by exact matching of `r^{-γ}`
//! solutions, the radial parametrix and the prolongation `P_ε`.

use nalgebra::{DMatrix, SVD};
use serde::Serialize;

use crate::cone_operator::{build_blocks, ABlock, ApsProjector, Slot};
use crate::geometry::{Endpoint, Orientation, Profile};
use crate::radial::quadrature::integrate;
use crate::sphere_modes::{enumerate_sphere_modes, MultiplicityModel};
use crate::{Error, Result};

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Singular values below this fraction (but above [`RANK_TOL`]) are flagged.
pub const NEAR_SINGULAR_TOL: f64 = 1e-6;

/// Whether the harmonic field `r^{-γ}` is square integrable on `r ≥ 1`.
pub fn l2_extension_rule(gamma: f64) -> bool {
    gamma > 0.5
}

/// `M₂(1)` with one boundary end at radius 1 and a tip at the other.
#[derive(Debug, Clone)]
pub struct ApsProblem {
    pub n: usize,
    pub profile: Profile,
    pub blocks: Vec<ABlock>,
    pub projector: ApsProjector,
    /// Whether the boundary is the left end of the profile.
    boundary_left: bool,
}

impl ApsProblem {
    pub fn new(n: usize, profile: Profile, mu_sq_max: f64, model: &MultiplicityModel) -> Result<Self> {
        profile.validate()?;
        let boundary_left = match (profile.left, profile.right) {
            (Endpoint::Boundary(_), Endpoint::Tip) => true,
            (Endpoint::Tip, Endpoint::Boundary(_)) => false,
            _ => {
                return Err(Error::InvalidProfile(
                    "the limit problem needs exactly one boundary end and one tip".into(),
                ))
            }
        };
        let seg = if boundary_left { profile.segments[0] } else { *profile.segments.last().unwrap() };
        let r_b = if boundary_left { seg.r_start() } else { seg.r_end() };
        if (r_b - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidProfile(format!("boundary must sit at r = 1, found r = {r_b}")));
        }
        if seg.r_hi < 1.5 - 1e-12 || seg.r_lo > 1.0 + 1e-12 {
            return Err(Error::InvalidProfile("the boundary collar must be conical on r ∈ [1, 1.5]".into()));
        }
        let blocks: Vec<ABlock> =
            enumerate_sphere_modes(n, mu_sq_max, model)?.iter().flat_map(build_blocks).collect();
        let projector = ApsProjector::from_blocks(blocks.clone());
        Ok(ApsProblem { n, profile, blocks, projector, boundary_left })
    }

    /// Total dimension `m = n + 1`.
    pub fn dimension(&self) -> usize {
        self.n + 1
    }
}

/// Matching data of one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockMatch {
    pub family: &'static str,
    pub sphere_degree: usize,
    pub mu_sq: f64,
    pub multiplicity: u64,
    pub gammas: Vec<f64>,
    pub degrees: Vec<usize>,
    pub unknowns: usize,
    pub equations: usize,
    pub nullity: usize,
    /// Smallest singular value relative to the largest.
    pub smallest_relative_sv: f64,
    /// Kernel dimension contributed to each degree listed in `degrees`.
    pub kernel_by_degree: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeKernel {
    pub p: usize,
    pub dimension: u64,
    /// Degrees 0 and m fall outside the range where the kernel is identified
    /// with cohomology.
    pub outside_identified_range: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelReport {
    pub n: usize,
    pub degrees: Vec<DegreeKernel>,
    pub blocks: Vec<BlockMatch>,
    pub flags: Vec<String>,
}

impl KernelReport {
    pub fn dimension(&self, p: usize) -> Option<u64> {
        self.degrees.iter().find(|d| d.p == p).map(|d| d.dimension)
    }
}

fn slot_sign(slot: Slot, o: Orientation) -> f64 {
    match (slot, o) {
        (Slot::Beta, Orientation::Down) => -1.0,
        _ => 1.0,
    }
}

/// Matching system of one block: unknowns `c[seg][j]` with
/// `w = Σ_j c_j r^{-γ_j} e_j` on each segment.
fn block_system(problem: &ApsProblem, block: &ABlock) -> DMatrix<f64> {
    let segs = &problem.profile.segments;
    let d = block.dim();
    let nseg = segs.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let idx = |s: usize, j: usize| s * d + j;
    // tip regularity: only decaying-to-zero branches r^{-γ}, γ < 0
    let tip_seg = if problem.boundary_left { nseg - 1 } else { 0 };
    for j in 0..d {
        if block.gammas[j] >= 0.0 {
            let mut row = vec![0.0; nseg * d];
            row[idx(tip_seg, j)] = 1.0;
            rows.push(row);
        }
    }
    // continuity of the global coordinates at every seam
    for s in 0..nseg - 1 {
        let (a, b) = (&segs[s], &segs[s + 1]);
        let r = a.r_end();
        for i in 0..d {
            let mut row = vec![0.0; nseg * d];
            let (sa, sb) = (slot_sign(block.basis[i].slot, a.orientation), slot_sign(block.basis[i].slot, b.orientation));
            for j in 0..d {
                let v = r.powf(-block.gammas[j]) * block.eigvecs[j][i];
                row[idx(s, j)] += sa * v;
                row[idx(s + 1, j)] -= sb * v;
            }
            rows.push(row);
        }
    }
    // Π_{<0} σ(1) = 0 at r = 1, where r^{-γ} = 1
    let bseg = if problem.boundary_left { 0 } else { nseg - 1 };
    for j in 0..d {
        if block.gammas[j] < 0.0 {
            let mut row = vec![0.0; nseg * d];
            row[idx(bseg, j)] = 1.0;
            rows.push(row);
        }
    }
    let mut m = DMatrix::from_fn(rows.len(), nseg * d, |i, j| rows[i][j]);
    for j in 0..m.ncols() {
        let scale = m.column(j).amax();
        if scale > 0.0 {
            m.column_mut(j).scale_mut(1.0 / scale);
        }
    }
    m
}

fn null_space(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let ncols = m.ncols();
    // pad to at least square so the SVD exposes the full right singular basis
    let padded = if m.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (m.nrows(), ncols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let mut kernel = Vec::new();
    let mut smallest = f64::INFINITY;
    for (i, s) in svd.singular_values.iter().enumerate() {
        let rel = if smax > 0.0 { s / smax } else { 0.0 };
        if rel < RANK_TOL {
            kernel.push(vt.row(i).transpose());
        } else {
            smallest = smallest.min(rel);
        }
    }
    let k = if kernel.is_empty() { DMatrix::zeros(ncols, 0) } else { DMatrix::from_columns(&kernel) };
    (k, smallest)
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let smax = sv.max();
    sv.iter().filter(|s| smax > 0.0 && **s >= RANK_TOL * smax).count()
}

/// Kernel dimension of the limit operator in every degree `0..=m`.
pub fn aps_kernel(problem: &ApsProblem) -> Result<KernelReport> {
    let m = problem.dimension();
    let nseg = problem.profile.segments.len();
    let mut by_degree = vec![0u64; m + 1];
    let mut blocks = Vec::new();
    let mut flags = Vec::new();
    for block in &problem.blocks {
        let d = block.dim();
        let sys = block_system(problem, block);
        // columns were rescaled; zero patterns, hence kernels, are unaffected
        let (kernel, smallest) = null_space(&sys);
        if smallest < NEAR_SINGULAR_TOL {
            flags.push(format!(
                "near-singular matching system for {} block (q={}, μ²={}): relative σ_min = {smallest:.2e}",
                block.family.as_str(),
                block.source.q,
                block.source.mu_sq
            ));
        }
        let mut degrees: Vec<usize> = block.basis.iter().map(|b| b.degree).collect();
        degrees.dedup();
        let mut kernel_by_degree = Vec::new();
        for &p in &degrees {
            // slot components of degree p on every segment
            let slots: Vec<usize> = (0..d).filter(|i| block.basis[*i].degree == p).collect();
            let proj = DMatrix::from_fn(nseg * d * slots.len(), nseg * d, |row, col| {
                let (seg, rest) = (row / (d * slots.len()), row % (d * slots.len()));
                let (j, si) = (rest / slots.len(), rest % slots.len());
                if col == seg * d + j {
                    block.eigvecs[j][slots[si]]
                } else {
                    0.0
                }
            });
            let r = if kernel.ncols() == 0 { 0 } else { rank(&(proj * &kernel)) };
            if p <= m {
                by_degree[p] += r as u64 * block.source.multiplicity;
            }
            kernel_by_degree.push(r);
        }
        if kernel_by_degree.iter().sum::<usize>() > kernel.ncols() {
            flags.push(format!(
                "kernel of {} block (q={}, μ²={}) mixes degrees",
                block.family.as_str(),
                block.source.q,
                block.source.mu_sq
            ));
        }
        blocks.push(BlockMatch {
            family: block.family.as_str(),
            sphere_degree: block.source.q,
            mu_sq: block.source.mu_sq,
            multiplicity: block.source.multiplicity,
            gammas: block.gammas.clone(),
            degrees,
            unknowns: sys.ncols(),
            equations: sys.nrows(),
            nullity: kernel.ncols(),
            smallest_relative_sv: if smallest.is_finite() { smallest } else { 0.0 },
            kernel_by_degree,
        });
    }
    let degrees = (0..=m)
        .map(|p| DegreeKernel { p, dimension: by_degree[p], outside_identified_range: p == 0 || p == m })
        .collect();
    Ok(KernelReport { n: problem.n, degrees, blocks, flags })
}

/// `φ = r^{-γ} ∫_a^r ρ^γ ψ(ρ) dρ` with `a = 1` for `γ < 0` and `a = 0` for `γ > 0`,
/// sampled at `radii`, and the verified residual of `(∂_r + γ/r)φ = ψ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parametrix {
    pub gamma: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// `max |φ' + γφ/r − ψ|` with `φ'` from a fourth-order difference of
    /// independently integrated values.
    pub residual: f64,
}

fn parametrix_value(gamma: f64, psi: &dyn Fn(f64) -> f64, r: f64) -> Result<f64> {
    let f = |rho: f64| rho.powf(gamma) * psi(rho);
    let from = if gamma < 0.0 { 1.0 } else { 0.0 };
    let (lo, hi, sign) = if r < from { (r, from, -1.0) } else { (from, r, 1.0) };
    let v = integrate(&f, lo, hi, 1e-15, 1e-13)
        .ok_or_else(|| Error::Numerical(format!("parametrix quadrature failed at r = {r}")))?;
    Ok(sign * v * r.powf(-gamma))
}

pub fn parametrix_apply(gamma: f64, psi: &dyn Fn(f64) -> f64, radii: &[f64]) -> Result<Parametrix> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::Domain(format!("parametrix needs a nonzero finite γ, got {gamma}")));
    }
    let mut values = Vec::with_capacity(radii.len());
    let mut residual: f64 = 0.0;
    for &r in radii {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("parametrix radii must lie in (0, 1], got {r}")));
        }
        let v = parametrix_value(gamma, psi, r)?;
        values.push(v);
        let h = 1e-3 * r;
        let p = |x: f64| parametrix_value(gamma, psi, x);
        let dv = (-p(r + 2.0 * h)? + 8.0 * p(r + h)? - 8.0 * p(r - h)? + p(r - 2.0 * h)?) / (12.0 * h);
        residual = residual.max((dv + gamma * v / r - psi(r)).abs());
    }
    Ok(Parametrix { gamma, radii: radii.to_vec(), values, residual })
}

/// One positive channel of the boundary datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelDatum {
    pub block: usize,
    pub gamma: f64,
    pub eigvec: [f64; 2],
    pub sigma: f64,
}

/// `P_ε σ = Σ ε^{γ-1/2} r^{-γ} σ_γ` on `[ε, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prolongation {
    pub eps: f64,
    pub channels: Vec<ChannelDatum>,
    /// Closed-form `‖·‖²` per channel: `(1 − ε^{2γ−1})/(2γ−1)·|σ_γ|²`.
    pub channel_norms_sq: Vec<f64>,
    pub norm_sq: f64,
}

impl Prolongation {
    /// Field in block coordinates, one entry per input block.
    pub fn field(&self, r: f64, nblocks: usize) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; nblocks];
        for ch in &self.channels {
            let a = self.eps.powf(ch.gamma - 0.5) * r.powf(-ch.gamma) * ch.sigma;
            out[ch.block][0] += a * ch.eigvec[0];
            out[ch.block][1] += a * ch.eigvec[1];
        }
        out
    }

    /// `‖P_ε σ‖²` by quadrature, for checking the closed form.
    pub fn quadrature_norm_sq(&self) -> Result<f64> {
        let mut total = 0.0;
        for ch in &self.channels {
            // r = eˢ turns the power into a smooth exponential
            let f = |s: f64| {
                let r = s.exp();
                (self.eps.powf(ch.gamma - 0.5) * r.powf(-ch.gamma) * ch.sigma).powi(2) * r
            };
            total += integrate(&f, self.eps.ln(), 0.0, 1e-300, 1e-12)
                .ok_or_else(|| Error::Numerical("prolongation quadrature failed".into()))?;
        }
        Ok(total)
    }
}

/// Prolongation of boundary data given in block coordinates.
pub fn prolong_p_eps(blocks: &[ABlock], data: &[[f64; 2]], eps: f64) -> Result<Prolongation> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("ε must lie in (0, 1), got {eps}")));
    }
    if blocks.len() != data.len() {
        return Err(Error::Domain("one datum per block is required".into()));
    }
    let mut channels = Vec::new();
    for (bi, (block, x)) in blocks.iter().zip(data).enumerate() {
        let scale = x[0].hypot(x[1]);
        for (g, v) in block.gammas.iter().zip(&block.eigvecs) {
            let sigma = v[0] * x[0] + v[1] * x[1];
            if *g < 0.0 {
                if sigma.abs() > 1e-12 * scale.max(1.0) {
                    return Err(Error::Domain(format!("datum has a component on the negative channel γ = {g}")));
                }
                continue;
            }
            if *g <= 0.5 {
                return Err(Error::Domain(format!("channel γ = {g} ≤ 1/2 cannot be prolonged")));
            }
            channels.push(ChannelDatum { block: bi, gamma: *g, eigvec: *v, sigma });
        }
    }
    let channel_norms_sq: Vec<f64> = channels
        .iter()
        .map(|c| {
            let k = 2.0 * c.gamma - 1.0;
            // -expm1 keeps precision when ε^{2γ-1} is close to 1
            -(k * eps.ln()).exp_m1() / k * c.sigma * c.sigma
        })
        .collect();
    let norm_sq = channel_norms_sq.iter().sum();
    Ok(Prolongation { eps, channels, channel_norms_sq, norm_sq })
}

/// `C = 1/(2γ_min − 1) = 1/(n − 1)`, with `γ_min = n/2`.
pub fn prolongation_constant(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("the prolongation bound needs n ≥ 2, got {n}")));
    }
    Ok(1.0 / (n as f64 - 1.0))
}

/// `sup ‖P_ε σ‖²/Σ|σ_γ|² = (1 − ε^{n−1})/(n−1)`.
pub fn prolongation_sup(n: usize, eps: f64) -> Result<f64> {
    let c = prolongation_constant(n)?;
    Ok(c * (1.0 - eps.powf(n as f64 - 1.0)))
}
