//! Finite elements for the radial quadratic form.
//!
//! Continuous `P_k` Lagrange elements on GLL nodes in the arclength `t`,
//! graded geometrically towards small radii. Tips carry `u(0) = 0`; other ends
//! restrict `u` to the boundary subspace of the problem, the remaining
//! conditions being natural. Eigenvalues come from inertia bisection of the
//! banded pencil and are extrapolated over two uniformly nested meshes.

use serde::{Deserialize, Serialize};

use super::banded::{count_below, eigenvalues_in, inverse_iteration, SymBand};
use super::quadrature::{gauss_legendre, gll_nodes, lagrange};
use super::system::{EigEntry, EigList, End, RadialProblem};
use crate::geometry::BoundaryKind;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshSpec {
    /// Polynomial order of the elements.
    pub order: usize,
    /// Largest element length.
    pub h_max: f64,
    /// Element length relative to the radius (`h <= grading·r`).
    pub grading: f64,
    /// Radius, relative to the segment, below which tip meshes stop grading.
    pub tip_floor: f64,
    /// Largest accepted relative error estimate after extrapolation.
    pub rtol: f64,
}

impl Default for MeshSpec {
    fn default() -> Self {
        MeshSpec { order: 4, h_max: 0.05, grading: 0.1, tip_floor: 1e-3, rtol: 1e-5 }
    }
}

impl MeshSpec {
    fn validate(&self) -> Result<()> {
        if !(1..=12).contains(&self.order) {
            return Err(Error::Domain(format!("element order {} outside 1..=12", self.order)));
        }
        if !(self.h_max > 0.0 && self.grading > 0.0 && self.tip_floor > 0.0 && self.rtol > 0.0) {
            return Err(Error::Domain("mesh parameters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeshNode {
    pub t: f64,
    pub r: f64,
    pub segment: usize,
}

/// Assembled and constrained pencil `(K, M)` with the map back to nodal values.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub k: SymBand,
    pub m: SymBand,
    pub nodes: Vec<MeshNode>,
    pub dim: usize,
    /// For every unconstrained nodal value: `(reduced index, coefficient)` pairs.
    expand: Vec<Vec<(usize, f64)>>,
}

impl Discretization {
    /// Nodal values `u(t_i)` from a reduced vector.
    pub fn nodal_values(&self, x: &[f64]) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.nodes.len()];
        for (f, terms) in self.expand.iter().enumerate() {
            let v: f64 = terms.iter().map(|(i, c)| c * x[*i]).sum();
            out[f / self.dim][f % self.dim] = v;
        }
        out
    }
}

/// Element breakpoints on `[r_lo, r_hi]`, ascending in `r`.
fn radial_breaks(r_lo: f64, r_hi: f64, mesh: &MeshSpec) -> Vec<f64> {
    let floor = if r_lo == 0.0 { mesh.tip_floor * r_hi } else { 0.0 };
    let mut out = vec![r_lo];
    let mut r = r_lo;
    loop {
        let h = mesh.h_max.min(mesh.grading * r.max(floor));
        if r + 1.5 * h >= r_hi {
            if r + 0.75 * h < r_hi && r_hi - r > h {
                out.push(0.5 * (r + r_hi));
            }
            out.push(r_hi);
            return out;
        }
        r += h;
        out.push(r);
    }
}

struct Reference {
    nodes: Vec<f64>,
    points: Vec<f64>,
    weights: Vec<f64>,
    /// values[q][a], derivs[q][a] on [-1, 1]
    values: Vec<Vec<f64>>,
    derivs: Vec<Vec<f64>>,
}

fn reference(order: usize) -> Reference {
    let nodes = gll_nodes(order);
    let (qx, qw) = gauss_legendre(order + 4);
    let (values, derivs) = qx.iter().map(|&x| lagrange(&nodes, x)).unzip();
    Reference { nodes, points: qx, weights: qw, values, derivs }
}

/// Assemble the pencil on the mesh refined `2^level` times.
pub fn assemble(problem: &RadialProblem, mesh: &MeshSpec, level: u32) -> Result<Discretization> {
    mesh.validate()?;
    let sys = &problem.system;
    let d = sys.dim();
    let k = mesh.order;
    let re = reference(k);
    let split = 1usize << level;

    // elements in t order: (segment, t_a, t_b)
    let bp = problem.profile.breakpoints();
    let mut elements = Vec::new();
    for (si, seg) in problem.profile.segments.iter().enumerate() {
        let rb = radial_breaks(seg.r_lo, seg.r_hi, mesh);
        let mut tb: Vec<f64> = match seg.orientation {
            crate::geometry::Orientation::Up => rb.iter().map(|r| bp[si] + (r - seg.r_lo)).collect(),
            crate::geometry::Orientation::Down => rb.iter().rev().map(|r| bp[si] + (seg.r_hi - r)).collect(),
        };
        tb[0] = bp[si];
        *tb.last_mut().unwrap() = bp[si + 1];
        for w in tb.windows(2) {
            for j in 0..split {
                let a = w[0] + (w[1] - w[0]) * j as f64 / split as f64;
                let b = if j + 1 == split { w[1] } else { w[0] + (w[1] - w[0]) * (j + 1) as f64 / split as f64 };
                elements.push((si, a, b));
            }
        }
    }
    let n_nodes = elements.len() * k + 1;
    let n_dof = n_nodes * d;
    let bw = (k + 1) * d - 1;
    let mut kmat = SymBand::zeros(n_dof, bw);
    let mut mmat = SymBand::zeros(n_dof, bw);
    let mut nodes = vec![MeshNode { t: 0.0, r: 0.0, segment: 0 }; n_nodes];

    let nl = (k + 1) * d;
    let mut ke = vec![0.0; nl * nl];
    let mut me = vec![0.0; nl * nl];
    for (e, &(si, ta, tb)) in elements.iter().enumerate() {
        let seg = &problem.profile.segments[si];
        let s = sys.orientation_signs(seg.orientation);
        let mut sc = [[0.0; 2]; 2];
        for i in 0..d {
            for j in 0..d {
                sc[i][j] = s[i] * sys.c[i][j] * s[j];
            }
        }
        let jac = 0.5 * (tb - ta);
        let mid = 0.5 * (ta + tb);
        for (a, xa) in re.nodes.iter().enumerate() {
            let t = mid + jac * xa;
            nodes[e * k + a] = MeshNode { t, r: seg.radius_at(t - bp[si]).max(0.0), segment: si };
        }
        ke.iter_mut().for_each(|v| *v = 0.0);
        me.iter_mut().for_each(|v| *v = 0.0);
        for (q, wq) in re.weights.iter().enumerate() {
            let t = mid + jac * re.points[q];
            let r = seg.radius_at(t - bp[si]);
            let w = wq * jac;
            let inv_r2 = 1.0 / (r * r);
            let v = &re.values[q];
            let dv = &re.derivs[q];
            for a in 0..=k {
                for b in 0..=k {
                    let mass = w * v[a] * v[b];
                    let stiff = w * dv[a] * dv[b] / (jac * jac);
                    for i in 0..d {
                        let ia = a * d + i;
                        ke[ia * nl + b * d + i] += stiff;
                        me[ia * nl + b * d + i] += mass;
                        for j in 0..d {
                            ke[ia * nl + b * d + j] += mass * sc[i][j] * inv_r2;
                        }
                    }
                }
            }
        }
        let base = e * k * d;
        for x in 0..nl {
            for y in 0..=x {
                kmat.add(base + x, base + y, ke[x * nl + y]);
                mmat.add(base + x, base + y, me[x * nl + y]);
            }
        }
    }

    // boundary terms [wᵀBw/r] of every segment
    let mut node_of_t = Vec::with_capacity(bp.len());
    node_of_t.push(0usize);
    let mut count = 0usize;
    for (si, _) in problem.profile.segments.iter().enumerate() {
        count += elements.iter().filter(|e| e.0 == si).count();
        node_of_t.push(count * k);
    }
    for (si, seg) in problem.profile.segments.iter().enumerate() {
        let s = sys.orientation_signs(seg.orientation);
        let (n_start, n_end) = (node_of_t[si], node_of_t[si + 1]);
        let (n_hi, n_lo) = match seg.orientation {
            crate::geometry::Orientation::Up => (n_end, n_start),
            crate::geometry::Orientation::Down => (n_start, n_end),
        };
        for (node, r, sign) in [(n_hi, seg.r_hi, 1.0), (n_lo, seg.r_lo, -1.0)] {
            if r == 0.0 {
                continue;
            }
            for i in 0..d {
                for j in 0..=i {
                    kmat.add(node * d + i, node * d + j, sign * s[i] * sys.b[i][j] * s[j] / r);
                }
            }
        }
    }

    // end conditions
    let mut keep_mask = vec![true; n_dof];
    let mut expand: Vec<Vec<(usize, f64)>> = (0..n_dof).map(|f| vec![(f, 1.0)]).collect();
    for (end, node) in [(End::Left, 0usize), (End::Right, n_nodes - 1)] {
        let z = if problem.bc(end) == BoundaryKind::RegularTip { Vec::new() } else { problem.end_subspace(end)? };
        let q = complete_basis(&z, d);
        let aligned = (0..d).all(|c| q[c][c] == 1.0);
        if !aligned {
            rotate_node(&mut kmat, node, d, &q);
            rotate_node(&mut mmat, node, d, &q);
            for c in 0..d {
                expand[node * d + c] = (0..d).map(|c2| (node * d + c2, q[c][c2])).collect();
            }
        }
        for c in z.len()..d {
            keep_mask[node * d + c] = false;
        }
        if aligned {
            // unit vectors may be listed in any order
            for c in 0..d {
                keep_mask[node * d + c] = z.iter().any(|v| v[c] == 1.0);
            }
        }
    }
    let keep: Vec<usize> = (0..n_dof).filter(|f| keep_mask[*f]).collect();
    let mut reduced_of = vec![usize::MAX; n_dof];
    for (i, f) in keep.iter().enumerate() {
        reduced_of[*f] = i;
    }
    let expand = expand
        .into_iter()
        .map(|terms| {
            terms
                .into_iter()
                .filter(|(f, _)| reduced_of[*f] != usize::MAX)
                .map(|(f, c)| (reduced_of[f], c))
                .collect()
        })
        .collect();
    Ok(Discretization { k: kmat.submatrix(&keep), m: mmat.submatrix(&keep), nodes, dim: d, expand })
}

/// Orthonormal `d×d` matrix whose first columns span `z`, as `q[row][col]`.
fn complete_basis(z: &[[f64; 2]], d: usize) -> [[f64; 2]; 2] {
    let mut q = [[0.0; 2]; 2];
    match (d, z.len()) {
        (1, _) => q[0][0] = 1.0,
        (2, 0) | (2, 2) => {
            q[0][0] = 1.0;
            q[1][1] = 1.0;
        }
        (2, 1) => {
            let v = z[0];
            q[0][0] = v[0];
            q[1][0] = v[1];
            q[0][1] = -v[1];
            q[1][1] = v[0];
        }
        _ => unreachable!("systems have at most two components"),
    }
    q
}

/// `A ← QᵀAQ` on the dofs of one node.
fn rotate_node(a: &mut SymBand, node: usize, d: usize, q: &[[f64; 2]; 2]) {
    let bw = a.bandwidth();
    let n = a.dim();
    let base = node * d;
    let lo = base.saturating_sub(bw);
    let hi = (base + d - 1 + bw).min(n - 1);
    for y in lo..=hi {
        if y >= base && y < base + d {
            continue;
        }
        let v: Vec<f64> = (0..d).map(|c| a.get(base + c, y)).collect();
        for c2 in 0..d {
            let nv: f64 = (0..d).map(|c| q[c][c2] * v[c]).sum();
            if (base + c2).abs_diff(y) <= bw {
                a.set(base + c2, y, nv);
            }
        }
    }
    let mut blk = [[0.0; 2]; 2];
    for i in 0..d {
        for j in 0..d {
            blk[i][j] = a.get(base + i, base + j);
        }
    }
    for i in 0..d {
        for j in 0..=i {
            let mut s = 0.0;
            for c in 0..d {
                for c2 in 0..d {
                    s += q[c][i] * blk[c][c2] * q[c2][j];
                }
            }
            a.set(base + i, base + j, s);
        }
    }
}

/// Raw eigenvalues of one mesh level below `top`.
pub fn level_eigenvalues(disc: &Discretization, top: f64) -> Vec<f64> {
    let lo = -1e-9 * top;
    eigenvalues_in(&disc.k, &disc.m, lo, top, 1e-13, 1e-12 * top)
}

/// Eigenvalues in `[0, λ_max]` with Richardson extrapolation over two levels.
pub fn fem_spectrum(problem: &RadialProblem, mesh: &MeshSpec) -> Result<EigList> {
    let top = 1.1 * problem.lambda_max;
    let coarse = level_eigenvalues(&assemble(problem, mesh, 0)?, top);
    let fine = level_eigenvalues(&assemble(problem, mesh, 1)?, top);
    let factor = 2f64.powi(2 * mesh.order as i32) - 1.0;
    let mut entries = Vec::new();
    for (c, f) in coarse.iter().zip(&fine) {
        let err = (c - f).abs() / factor;
        let ext = (f - (c - f) / factor).max(0.0);
        if ext > problem.lambda_max {
            continue;
        }
        if err > mesh.rtol * ext.abs() + 1e-9 * problem.lambda_max {
            return Err(Error::Numerical(format!(
                "{}: FEM extrapolation not converged at lambda={ext:.6e} (estimate {err:.2e})",
                problem.system.label()
            )));
        }
        entries.push(EigEntry { lambda: ext, error_estimate: Some(err), bracket: None });
    }
    Ok(EigList { system: problem.system.label(), method: "fem", entries, flags: Vec::new() })
}

/// Number of discrete eigenvalues below `sigma` on the refined mesh; a lower
/// bound for the exact count since discrete eigenvalues lie above the exact ones.
pub fn fem_count_below(problem: &RadialProblem, mesh: &MeshSpec, sigma: f64) -> Result<usize> {
    let disc = assemble(problem, mesh, 1)?;
    Ok(count_below(&disc.k, &disc.m, sigma))
}

/// Eigenpair on the refined mesh: eigenvalue and nodal values, `∫|u|² = 1`.
#[derive(Debug, Clone)]
pub struct NodalEigenpair {
    pub lambda: f64,
    pub nodes: Vec<MeshNode>,
    pub values: Vec<[f64; 2]>,
}

/// Eigenvectors for the listed (isolated) eigenvalues.
pub fn fem_eigenpairs(problem: &RadialProblem, mesh: &MeshSpec, lambdas: &[f64]) -> Result<Vec<NodalEigenpair>> {
    let disc = assemble(problem, mesh, 1)?;
    lambdas
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            let x = inverse_iteration(&disc.k, &disc.m, lam, i as u64 + 1)?;
            Ok(NodalEigenpair { lambda: lam, nodes: disc.nodes.clone(), values: disc.nodal_values(&x) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone_operator::Slot;
    use crate::geometry::{unit_cone, Endpoint};
    use crate::radial::system::RadialSystem;

    const J32_ZERO_SQ: f64 = 20.190_728_556_426_6;

    fn dirichlet_cone(gamma: f64) -> RadialProblem {
        let mut cone = unit_cone(1.0).unwrap();
        cone.right = Endpoint::Boundary(BoundaryKind::DirichletLike);
        RadialProblem::new(RadialSystem::scalar(2, gamma, Slot::Alpha), cone, 40.0).unwrap()
    }

    #[test]
    fn dirichlet_cone_first_eigenvalue() {
        let ev = fem_spectrum(&dirichlet_cone(1.0), &MeshSpec::default()).unwrap();
        assert!((ev.entries[0].lambda - J32_ZERO_SQ).abs() < 1e-7 * J32_ZERO_SQ);
    }

    #[test]
    fn convergence_ratio() {
        let mesh = MeshSpec { order: 2, h_max: 0.1, grading: 1e6, tip_floor: 1.0, rtol: 1.0 };
        let pr = dirichlet_cone(1.0);
        let e0 = level_eigenvalues(&assemble(&pr, &mesh, 0).unwrap(), 30.0)[0] - J32_ZERO_SQ;
        let e1 = level_eigenvalues(&assemble(&pr, &mesh, 1).unwrap(), 30.0)[0] - J32_ZERO_SQ;
        let ratio = e0 / e1;
        assert!(e1 > 0.0 && (ratio / 16.0 - 1.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn quadratic_form_identity() {
        // ∫|σ'+γσ/r|² = ∫σ'² + γ(γ+1)σ²/r² + [γσ²/r]
        let (x, w) = gauss_legendre(30);
        for &(gamma, a, b) in &[(1.0, 0.3, 1.2), (-2.0, 0.1, 0.9), (1.5, 0.5, 2.0)] {
            let sigma = |r: f64| 0.3 + r - 0.7 * r * r + 0.2 * r.powi(3);
            let dsigma = |r: f64| 1.0 - 1.4 * r + 0.6 * r * r;
            let (mut lhs, mut rhs) = (0.0, 0.0);
            for (xi, wi) in x.iter().zip(&w) {
                let r = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let wq = 0.5 * (b - a) * wi;
                let (s, ds) = (sigma(r), dsigma(r));
                lhs += wq * (ds + gamma * s / r).powi(2);
                rhs += wq * (ds * ds + gamma * (gamma + 1.0) * s * s / (r * r));
            }
            rhs += gamma * sigma(b).powi(2) / b - gamma * sigma(a).powi(2) / a;
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn mesh_breaks_are_graded() {
        let m = MeshSpec::default();
        let b = radial_breaks(0.1, 1.0, &m);
        assert!((b[1] - b[0] - 0.01).abs() < 1e-15);
        assert!(b.windows(2).all(|w| w[1] - w[0] <= m.h_max + 1e-12));
        assert_eq!(*b.last().unwrap(), 1.0);
        let t = radial_breaks(0.0, 1.0, &m);
        assert!(t[1] < 1e-3);
    }
}
