//! Bessel transfer matrices and the secular equation.
//!
//! The state `(u, G)` (values and conserved flux, see [`super::system`]) is
//! continuous along the profile. A basis of states satisfying the left end
//! condition is carried segment by segment with exact channel propagators and
//! re-orthonormalized after each segment; eigenvalues are the zeros of
//! `F(λ) = det(B_right · Y(λ))`.

use nalgebra::{DMatrix, SVD};
use serde::Serialize;

use super::banded::count_below;
use super::fem::{assemble, MeshSpec};
use super::system::{fundamental, EigEntry, EigList, End, RadialProblem, RadialSystem};
use crate::geometry::{BoundaryKind, Segment};
use crate::{Error, Result};

/// Relative singular-value threshold for zero modes.
const NULLITY_TOL: f64 = 1e-10;

type State = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferOptions {
    /// Scan step as a fraction of the expected eigenvalue spacing.
    pub scan_fraction: f64,
    /// Relative width of the final root brackets.
    pub root_rtol: f64,
    /// Rescans with a finer step when the count disagrees with the FEM count.
    pub max_rescans: usize,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions { scan_fraction: 0.1, root_rtol: 1e-13, max_rescans: 3 }
    }
}

fn split(s: &State, d: usize) -> ([f64; 2], [f64; 2]) {
    let mut u = [0.0; 2];
    let mut g = [0.0; 2];
    u[..d].copy_from_slice(&s[..d]);
    g[..d].copy_from_slice(&s[d..2 * d]);
    (u, g)
}

fn join(u: [f64; 2], g: [f64; 2], d: usize) -> State {
    let mut s = [0.0; 4];
    s[..d].copy_from_slice(&u[..d]);
    s[d..2 * d].copy_from_slice(&g[..d]);
    s
}

/// Local `(w, Φ)` on a segment from the global `(u, G)`, and back.
fn to_local(sys: &RadialSystem, seg: &Segment, s: &State) -> ([f64; 2], [f64; 2]) {
    let d = sys.dim();
    let sg = sys.orientation_signs(seg.orientation);
    let o = seg.orientation.sign();
    let (u, g) = split(s, d);
    let mut w = [0.0; 2];
    let mut phi = [0.0; 2];
    for i in 0..d {
        w[i] = sg[i] * u[i];
        phi[i] = o * sg[i] * g[i];
    }
    (w, phi)
}

fn to_global(sys: &RadialSystem, seg: &Segment, w: [f64; 2], phi: [f64; 2]) -> State {
    let d = sys.dim();
    let sg = sys.orientation_signs(seg.orientation);
    let o = seg.orientation.sign();
    let mut u = [0.0; 2];
    let mut g = [0.0; 2];
    for i in 0..d {
        u[i] = sg[i] * w[i];
        g[i] = o * sg[i] * phi[i];
    }
    join(u, g, d)
}

/// Regular solution `(f, f' + b f/r)` of each channel at `r`, normalized to unit length.
fn regular_data(sys: &RadialSystem, lambda: f64, r: f64) -> Result<Vec<[f64; 2]>> {
    sys.channels
        .iter()
        .map(|ch| {
            let fu = fundamental(ch.nu, lambda, r)?;
            let v = [fu.f, fu.fp + ch.b * fu.f / r];
            let n = v[0].hypot(v[1]);
            Ok([v[0] / n, v[1] / n])
        })
        .collect()
}

/// Propagate a state across `[r_a → r_b]` inside one segment.
fn propagate(sys: &RadialSystem, seg: &Segment, lambda: f64, r_a: f64, r_b: f64, s: &State) -> Result<State> {
    propagate_impl(sys, seg, lambda, r_a, r_b, s, false)
}

/// As [`propagate`]; with `regular_only` the singular branch is discarded,
/// which keeps rounding errors from growing towards a tip.
fn propagate_impl(
    sys: &RadialSystem,
    seg: &Segment,
    lambda: f64,
    r_a: f64,
    r_b: f64,
    s: &State,
    regular_only: bool,
) -> Result<State> {
    let (w, phi) = to_local(sys, seg, s);
    let d = sys.dim();
    let mut w_out = [0.0; 2];
    let mut phi_out = [0.0; 2];
    for ch in &sys.channels {
        let wj: f64 = (0..d).map(|i| ch.dir[i] * w[i]).sum();
        let pj: f64 = (0..d).map(|i| ch.dir[i] * phi[i]).sum();
        let fa = fundamental(ch.nu, lambda, r_a)?;
        let fb = fundamental(ch.nu, lambda, r_b)?;
        let (f_a, ff_a) = (fa.f, fa.fp + ch.b * fa.f / r_a);
        let (g_a, gg_a) = (fa.g, fa.gp + ch.b * fa.g / r_a);
        let (f_b, ff_b) = (fb.f, fb.fp + ch.b * fb.f / r_b);
        let (g_b, gg_b) = (fb.g, fb.gp + ch.b * fb.g / r_b);
        let wm = f_a * gg_a - g_a * ff_a;
        let rf = (fb.ln_f - fa.ln_f).exp();
        let rg = if regular_only { 0.0 } else { (fb.ln_g - fa.ln_g).exp() };
        let t11 = (f_b * gg_a * rf - g_b * ff_a * rg) / wm;
        let t12 = (-f_b * g_a * rf + g_b * f_a * rg) / wm;
        let t21 = (ff_b * gg_a * rf - gg_b * ff_a * rg) / wm;
        let t22 = (-ff_b * g_a * rf + gg_b * f_a * rg) / wm;
        let wn = t11 * wj + t12 * pj;
        let pn = t21 * wj + t22 * pj;
        for i in 0..d {
            w_out[i] += ch.dir[i] * wn;
            phi_out[i] += ch.dir[i] * pn;
        }
    }
    Ok(to_global(sys, seg, w_out, phi_out))
}

/// Modified Gram–Schmidt with positive diagonal; returns `R` (column-major upper).
fn orthonormalize(cols: &mut [State], len: usize) -> Vec<Vec<f64>> {
    let m = cols.len();
    let mut r = vec![vec![0.0; m]; m];
    for j in 0..m {
        for i in 0..j {
            let dot: f64 = (0..len).map(|k| cols[i][k] * cols[j][k]).sum();
            r[i][j] = dot;
            for k in 0..len {
                cols[j][k] -= dot * cols[i][k];
            }
        }
        let norm: f64 = (0..len).map(|k| cols[j][k] * cols[j][k]).sum::<f64>().sqrt();
        r[j][j] = norm;
        if norm > 0.0 {
            for k in 0..len {
                cols[j][k] /= norm;
            }
        }
    }
    r
}

/// Sweep record: the normalized basis at the start of every segment.
struct Sweep {
    /// `(segment, radius, basis)`: basis valid at that radius of that segment.
    anchors: Vec<(usize, f64, Vec<State>)>,
    /// Triangular factors applied when leaving each anchor.
    factors: Vec<Vec<Vec<f64>>>,
    /// Final boundary matrix `B·Y`, `d×d`, rows normalized.
    matrix: DMatrix<f64>,
}

fn complement(z: &[[f64; 2]], d: usize) -> Vec<[f64; 2]> {
    match (d, z.len()) {
        (1, 0) => vec![[1.0, 0.0]],
        (1, _) => vec![],
        (2, 0) => vec![[1.0, 0.0], [0.0, 1.0]],
        (2, 1) => vec![[-z[0][1], z[0][0]]],
        _ => vec![],
    }
}

fn sweep(problem: &RadialProblem, lambda: f64) -> Result<Sweep> {
    let sys = &problem.system;
    let d = sys.dim();
    let segs = &problem.profile.segments;
    let len = 2 * d;

    // initial basis
    let (mut cols, first, r0): (Vec<State>, usize, f64) = if problem.bc(End::Left) == BoundaryKind::RegularTip {
        let seg = &segs[0];
        let r = seg.r_end();
        let reg = regular_data(sys, lambda, r)?;
        let cols = sys
            .channels
            .iter()
            .zip(&reg)
            .map(|(ch, fv)| {
                let mut w = [0.0; 2];
                let mut phi = [0.0; 2];
                for i in 0..d {
                    w[i] = ch.dir[i] * fv[0];
                    phi[i] = ch.dir[i] * fv[1];
                }
                to_global(sys, seg, w, phi)
            })
            .collect();
        (cols, 0, r)
    } else {
        let z = problem.end_subspace(End::Left)?;
        let mut cols: Vec<State> = z.iter().map(|v| join(*v, [0.0; 2], d)).collect();
        cols.extend(complement(&z, d).iter().map(|v| join([0.0; 2], *v, d)));
        (cols, 0, segs[0].r_start())
    };
    let tip_left = problem.bc(End::Left) == BoundaryKind::RegularTip;
    let mut anchors = vec![(first, r0, cols.clone())];
    let mut factors = Vec::new();

    let last = segs.len() - 1;
    let tip_right = problem.bc(End::Right) == BoundaryKind::RegularTip;
    let start_seg = if tip_left { 1 } else { 0 };
    let end_seg = if tip_right { last } else { last + 1 };
    if tip_left && tip_right && segs.len() == 1 {
        return Err(Error::InvalidProfile("a single segment cannot have two tips".into()));
    }
    for si in start_seg..end_seg {
        let seg = &segs[si];
        let (ra, rb) = (seg.r_start(), seg.r_end());
        for c in cols.iter_mut() {
            *c = propagate(sys, seg, lambda, ra, rb, c)?;
        }
        let r = orthonormalize(&mut cols, len);
        factors.push(r);
        // anchor this basis at the start of the next segment (or the far end)
        let (aseg, ar) = if si < last { (si + 1, segs[si + 1].r_start()) } else { (si, rb) };
        anchors.push((aseg, ar, cols.clone()));
    }
    if start_seg == end_seg {
        // tip-to-tip on two segments: the initial basis already sits at the seam
        let r = orthonormalize(&mut cols, len);
        factors.push(r);
        anchors.push((last, segs[last].r_start(), cols.clone()));
    }

    // boundary rows
    let mut rows: Vec<State> = Vec::new();
    let mut rows_local: Vec<(usize, [f64; 2])> = Vec::new();
    if tip_right {
        let seg = &segs[last];
        let reg = regular_data(sys, lambda, seg.r_start())?;
        for (j, fv) in reg.iter().enumerate() {
            rows_local.push((j, *fv));
        }
        let mut m = DMatrix::zeros(d, d);
        for (col, c) in cols.iter().enumerate() {
            let (w, phi) = to_local(sys, seg, c);
            for (row, (j, fv)) in rows_local.iter().enumerate() {
                let ch = &sys.channels[*j];
                let wj: f64 = (0..d).map(|i| ch.dir[i] * w[i]).sum();
                let pj: f64 = (0..d).map(|i| ch.dir[i] * phi[i]).sum();
                m[(row, col)] = fv[0] * pj - fv[1] * wj;
            }
        }
        return Ok(Sweep { anchors, factors, matrix: m });
    }
    let z = problem.end_subspace(End::Right)?;
    for v in complement(&z, d) {
        rows.push(join(v, [0.0; 2], d));
    }
    for v in &z {
        rows.push(join([0.0; 2], *v, d));
    }
    let mut m = DMatrix::zeros(d, d);
    for (row, rv) in rows.iter().enumerate() {
        for (col, c) in cols.iter().enumerate() {
            m[(row, col)] = (0..len).map(|k| rv[k] * c[k]).sum();
        }
    }
    Ok(Sweep { anchors, factors, matrix: m })
}

/// The secular function `F(λ)`; its zeros in `λ > 0` are the eigenvalues.
pub fn secular_function(problem: &RadialProblem, lambda: f64) -> Result<f64> {
    Ok(sweep(problem, lambda)?.matrix.determinant())
}

/// Dimension of the kernel: nullity of the boundary matrix at `λ = 0`.
pub fn zero_mode_count(problem: &RadialProblem) -> Result<usize> {
    let m = sweep(problem, 0.0)?.matrix;
    let svd = SVD::new(m, false, false);
    let smax = svd.singular_values.max().max(1.0);
    Ok(svd.singular_values.iter().filter(|s| **s < NULLITY_TOL * smax).count())
}

fn scan(problem: &RadialProblem, frac: f64, start: f64, top: f64) -> Result<Vec<(f64, f64)>> {
    let len = problem.profile.length();
    let k0 = std::f64::consts::PI / len;
    let mut brackets = Vec::new();
    let mut a = start;
    let mut fa = secular_function(problem, a)?;
    while a < top {
        let step = frac * k0 * (2.0 * a.sqrt() + k0);
        let b = (a + step).min(top);
        let fb = secular_function(problem, b)?;
        if fa == 0.0 || fa.signum() != fb.signum() {
            brackets.push((a, b));
        }
        a = b;
        fa = fb;
    }
    Ok(brackets)
}

fn bisect(problem: &RadialProblem, (mut a, mut b): (f64, f64), rtol: f64) -> Result<(f64, f64)> {
    let mut fa = secular_function(problem, a)?;
    for _ in 0..200 {
        if b - a <= rtol * b.abs() {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = secular_function(problem, m)?;
        if fm == 0.0 {
            return Ok((m, m));
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok((a, b))
}

fn sigma_min(problem: &RadialProblem, lambda: f64) -> Result<(f64, usize)> {
    let m = sweep(problem, lambda)?.matrix;
    let sv = SVD::new(m, false, false).singular_values;
    Ok((sv.min(), sv.len()))
}

/// Roots of even multiplicity do not change the sign of `F`. They are located
/// near FEM eigenvalues that have no secular counterpart by minimizing the
/// smallest singular value of the boundary matrix, which vanishes linearly.
fn add_even_roots(problem: &RadialProblem, mesh: &MeshSpec, opts: &TransferOptions, entries: &mut Vec<EigEntry>) -> Result<()> {
    let fem = super::fem::fem_spectrum(problem, mesh)?.values();
    let lmax = problem.lambda_max;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * b.abs() + 1e-9 * lmax;
    let mut i = 0;
    while i < fem.len() {
        let lf = fem[i];
        let cluster = fem[i..].iter().take_while(|x| close(**x, lf)).count();
        let have = entries.iter().filter(|e| close(e.lambda, lf)).count();
        i += cluster;
        if have >= cluster || lf <= 0.0 {
            continue;
        }
        // golden-section search on σ_min
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let w = 1e-5 * lf + 1e-9 * lmax;
        let (mut a, mut b) = (lf - w, lf + w);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = sigma_min(problem, c)?.0;
        let mut fd = sigma_min(problem, d)?.0;
        while b - a > opts.root_rtol * lf {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = sigma_min(problem, c)?.0;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = sigma_min(problem, d)?.0;
            }
        }
        let root = 0.5 * (a + b);
        let (smin, dim) = sigma_min(problem, root)?;
        if smin > 1e-6 || dim == 0 {
            continue;
        }
        for _ in have..cluster {
            entries.push(EigEntry { lambda: root, error_estimate: Some(b - a), bracket: Some((a, b)) });
        }
    }
    Ok(())
}

/// Eigenvalues in `[0, λ_max]` from the secular equation, with the root count
/// checked against FEM inertia counts.
pub fn transfer_spectrum(problem: &RadialProblem) -> Result<EigList> {
    transfer_spectrum_with(problem, &TransferOptions::default(), &MeshSpec::default())
}

pub fn transfer_spectrum_with(problem: &RadialProblem, opts: &TransferOptions, mesh: &MeshSpec) -> Result<EigList> {
    let lmax = problem.lambda_max;
    let zeros = zero_mode_count(problem)?;
    let start = 1e-10 * lmax;
    // FEM eigenvalues bound the exact ones from above
    let disc = assemble(problem, mesh, 1)?;
    let fem_lo = count_below(&disc.k, &disc.m, lmax * (1.0 - 1e-6));
    let fem_hi = count_below(&disc.k, &disc.m, lmax * (1.0 + 1e-4));
    let mut flags = Vec::new();
    let mut frac = opts.scan_fraction;
    let mut brackets = Vec::new();
    let counts_agree = |total: usize| total >= fem_lo && total <= fem_hi;
    for _ in 0..=opts.max_rescans {
        brackets = scan(problem, frac, start, lmax)?;
        if counts_agree(zeros + brackets.len()) {
            break;
        }
        frac *= 0.25;
    }
    let mut entries: Vec<EigEntry> =
        (0..zeros).map(|_| EigEntry { lambda: 0.0, error_estimate: None, bracket: Some((0.0, 0.0)) }).collect();
    for br in brackets {
        let (a, b) = bisect(problem, br, opts.root_rtol)?;
        entries.push(EigEntry { lambda: 0.5 * (a + b), error_estimate: None, bracket: Some((a, b)) });
    }
    if !counts_agree(entries.len()) {
        add_even_roots(problem, mesh, opts, &mut entries)?;
        entries.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    }
    if !counts_agree(entries.len()) {
        flags.push(format!(
            "secular count {} disagrees with FEM count in [{fem_lo}, {fem_hi}] below {lmax}; suspected clustered roots",
            entries.len()
        ));
    }
    Ok(EigList { system: problem.system.label(), method: "secular", entries, flags })
}

/// An eigenfunction in closed form: a state anchored on every segment.
#[derive(Debug, Clone)]
pub struct TransferMode {
    pub lambda: f64,
    problem: RadialProblem,
    /// `(segment, anchor radius, state)`.
    anchors: Vec<(usize, f64, State)>,
    norm: f64,
}

impl TransferMode {
    /// `(w, Φ)` in the local coordinates of segment `seg` at radius `r`.
    pub fn local(&self, seg: usize, r: f64) -> Result<([f64; 2], [f64; 2])> {
        let sys = &self.problem.system;
        let s = &self.problem.profile.segments[seg];
        if r <= 0.0 {
            return Ok(([0.0; 2], [0.0; 2]));
        }
        let (_, ra, st) = self
            .anchors
            .iter()
            .find(|a| a.0 == seg)
            .ok_or_else(|| Error::Numerical(format!("no anchor on segment {seg}")))?;
        let segs = &self.problem.profile.segments;
        let tip = (seg == 0 && self.problem.bc(End::Left) == BoundaryKind::RegularTip)
            || (seg + 1 == segs.len() && self.problem.bc(End::Right) == BoundaryKind::RegularTip);
        let mut v = propagate_impl(sys, s, self.lambda, *ra, r, st, tip)?;
        for x in v.iter_mut() {
            *x /= self.norm;
        }
        Ok(to_local(sys, s, &v))
    }

    /// Global `(u, G)` at arclength `t`.
    pub fn state_at(&self, t: f64) -> Result<([f64; 2], [f64; 2])> {
        let bp = self.problem.profile.breakpoints();
        let seg = bp.windows(2).position(|w| t <= w[1]).unwrap_or(bp.len() - 2);
        let s = &self.problem.profile.segments[seg];
        let (w, phi) = self.local(seg, s.radius_at(t - bp[seg]))?;
        let st = to_global(&self.problem.system, s, w, phi);
        Ok(split(&st, self.problem.system.dim()))
    }

    pub fn problem(&self) -> &RadialProblem {
        &self.problem
    }
}

/// Gauss–Legendre integral of `|u|²` over one segment, graded towards `r = 0`.
fn segment_l2(mode_raw: &TransferMode, seg: usize) -> Result<f64> {
    let s = &mode_raw.problem.profile.segments[seg];
    let (x, w) = super::quadrature::gauss_legendre(16);
    let mut pts = vec![s.r_lo];
    if s.r_lo == 0.0 {
        let mut r = s.r_hi * 1e-6;
        while r < s.r_hi {
            pts.push(r);
            r *= 2.0;
        }
    } else {
        let mut r = s.r_lo;
        while r * 1.5 < s.r_hi {
            r *= 1.5;
            pts.push(r);
        }
    }
    pts.push(s.r_hi);
    let pieces_per = ((s.length() * mode_raw.lambda.sqrt().max(1.0)) as usize / 4 + 1).min(64);
    let mut total = 0.0;
    for win in pts.windows(2) {
        let (a0, b0) = (win[0], win[1]);
        for p in 0..pieces_per {
            let a = a0 + (b0 - a0) * p as f64 / pieces_per as f64;
            let b = a0 + (b0 - a0) * (p + 1) as f64 / pieces_per as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let (wv, _) = mode_raw.local(seg, r)?;
                total += 0.5 * (b - a) * wi * (wv[0] * wv[0] + wv[1] * wv[1]);
            }
        }
    }
    Ok(total)
}

/// Eigenfunction for an eigenvalue found by [`transfer_spectrum`], normalized
/// to `∫|u|² dt = 1`.
pub fn transfer_mode(problem: &RadialProblem, lambda: f64) -> Result<TransferMode> {
    let sw = sweep(problem, lambda)?;
    let svd = SVD::new(sw.matrix.clone(), false, true);
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD failed".into()))?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if *s < acc.1 { (i, *s) } else { acc });
    let d = problem.system.dim();
    let mut c: Vec<f64> = (0..d).map(|j| vt[(imin, j)]).collect();
    let len = 2 * d;
    let mut anchors = Vec::new();
    for (k, (seg, r, basis)) in sw.anchors.iter().enumerate().rev() {
        let mut st = [0.0; 4];
        for (j, col) in basis.iter().enumerate() {
            for i in 0..len {
                st[i] += c[j] * col[i];
            }
        }
        if !anchors.iter().any(|a: &(usize, f64, State)| a.0 == *seg) {
            anchors.push((*seg, *r, st));
        }
        if k > 0 {
            // c_{k-1} = R_k^{-1} c_k
            let rmat = &sw.factors[k - 1];
            let mut prev = vec![0.0; d];
            for i in (0..d).rev() {
                let mut s = c[i];
                for j in i + 1..d {
                    s -= rmat[i][j] * prev[j];
                }
                prev[i] = s / rmat[i][i];
            }
            c = prev;
        }
    }
    // every segment needs an anchor: tip segments inherit the neighbouring one
    let segs = &problem.profile.segments;
    let mut full = Vec::new();
    for si in 0..segs.len() {
        if let Some(a) = anchors.iter().find(|a| a.0 == si) {
            full.push(*a);
        } else if si == 0 {
            let a = anchors.iter().find(|a| a.0 == 1).copied().unwrap_or(anchors[0]);
            full.push((0, segs[0].r_end(), a.2));
        } else {
            let a = anchors.iter().find(|a| a.0 == si - 1).copied().unwrap();
            // state at the end of segment si-1 equals the state at the start of si
            let st = propagate(&problem.system, &segs[si - 1], lambda, a.1, segs[si - 1].r_end(), &a.2)?;
            full.push((si, segs[si].r_start(), st));
        }
    }
    let mut mode = TransferMode { lambda, problem: problem.clone(), anchors: full, norm: 1.0 };
    let total: f64 = (0..segs.len()).map(|s| segment_l2(&mode, s)).sum::<Result<f64>>()?;
    mode.norm = total.sqrt();
    Ok(mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_operator::Slot;
    use crate::geometry::{spindle, unit_cone, Endpoint};
    use crate::radial::fem::fem_spectrum;
    use crate::radial::system::radial_systems;
    use crate::sphere_modes::MultiplicityModel;

    const J32_ZERO_SQ: f64 = 20.190_728_556_426_6;

    #[test]
    fn dirichlet_cone() {
        let mut cone = unit_cone(1.0).unwrap();
        cone.right = Endpoint::Boundary(BoundaryKind::DirichletLike);
        let pr = RadialProblem::new(RadialSystem::scalar(2, 1.0, Slot::Alpha), cone, 40.0).unwrap();
        let ev = transfer_spectrum(&pr).unwrap();
        assert!((ev.entries[0].lambda - J32_ZERO_SQ).abs() < 1e-9);
        assert!(ev.flags.is_empty());
    }

    #[test]
    fn constants_on_the_cone() {
        let pr = RadialProblem::new(RadialSystem::scalar(2, -1.0, Slot::Alpha), unit_cone(1.0).unwrap(), 40.0).unwrap();
        assert_eq!(zero_mode_count(&pr).unwrap(), 1);
        let ev = transfer_spectrum(&pr).unwrap();
        assert_eq!(ev.entries[0].lambda, 0.0);
    }

    #[test]
    fn spindle_agrees_with_fem() {
        let sp = spindle(1.0).unwrap();
        for p in 0..=3 {
            for sys in radial_systems(2, p, 12.5, &MultiplicityModel::Builtin).unwrap() {
                let pr = RadialProblem::new(sys, sp.clone(), 40.0).unwrap();
                let a = transfer_spectrum(&pr).unwrap();
                let b = fem_spectrum(&pr, &MeshSpec::default()).unwrap();
                assert!(a.flags.is_empty(), "{:?}", a.flags);
                assert_eq!(a.entries.len(), b.entries.len(), "{}", a.system);
                for (x, y) in a.values().iter().zip(b.values()) {
                    assert!((x - y).abs() <= 1e-6 * y.max(1e-3), "{}: {x} vs {y}", a.system);
                }
            }
        }
    }

    #[test]
    fn mode_is_normalized_and_continuous() {
        let sp = spindle(1.0).unwrap();
        let sys = radial_systems(2, 1, 2.5, &MultiplicityModel::Builtin)
            .unwrap()
            .into_iter()
            .find(|s| s.dim() == 2)
            .unwrap();
        let pr = RadialProblem::new(sys, sp, 40.0).unwrap();
        let ev = transfer_spectrum(&pr).unwrap();
        let lam = ev.entries[0].lambda;
        let mode = transfer_mode(&pr, lam).unwrap();
        let (u1, g1) = mode.state_at(1.0 - 1e-9).unwrap();
        let (u2, g2) = mode.state_at(1.0 + 1e-9).unwrap();
        for i in 0..2 {
            assert!((u1[i] - u2[i]).abs() < 1e-6 && (g1[i] - g2[i]).abs() < 1e-5);
        }
        // compare with the FEM eigenvector norm convention
        let fe = crate::radial::fem::fem_eigenpairs(&pr, &MeshSpec::default(), &[lam]).unwrap();
        let node = fe[0].nodes.iter().position(|n| (n.t - 0.5).abs() < 0.02).unwrap();
        let (u, _) = mode.state_at(fe[0].nodes[node].t).unwrap();
        let ratio = fe[0].values[node][0] / u[0];
        assert!((ratio.abs() - 1.0).abs() < 1e-5, "ratio {ratio}");
    }
}
