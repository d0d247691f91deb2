//! Boundary control of eigenfunctions near the gluing sphere and the
//! logarithmic cut-off energies.

use serde::Serialize;

use crate::radial::quadrature::integrate;
use crate::radial::transfer::TransferMode;
use crate::{Error, Result};

/// `ξ_ε`: 0 for `r ≤ 2ε`, 1 for `r ≥ 2√ε`, `(log 2ε − log r)/log √ε` between.
pub fn xi_eps(eps: f64, r: f64) -> f64 {
    let (a, b) = (2.0 * eps, 2.0 * eps.sqrt());
    if r <= a {
        0.0
    } else if r >= b {
        1.0
    } else {
        ((2.0 * eps).ln() - r.ln()) / eps.sqrt().ln()
    }
}

/// `|dξ_ε/dr|`: `1/(r |log √ε|)` on `(2ε, 2√ε)`, zero elsewhere.
pub fn xi_eps_slope(eps: f64, r: f64) -> f64 {
    if r > 2.0 * eps && r < 2.0 * eps.sqrt() {
        1.0 / (r * eps.sqrt().ln().abs())
    } else {
        0.0
    }
}

/// `ξ₁`: 1 for `r ≤ 1/2`, 0 for `r ≥ 1`, linear between.
pub fn xi_one(r: f64) -> f64 {
    (2.0 * (1.0 - r)).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryDiagnostics {
    pub eps: f64,
    pub lambda: f64,
    /// `‖Π_{<0} σ(ε)‖²` on the `M₁` side of the gluing sphere.
    pub boundary_negative_sq: f64,
    /// `‖Π_{<0} σ(ε)‖² / ε`.
    pub bord_ratio: f64,
    /// `‖(1 − ξ_ε) ξ₁ φ⁻‖²`.
    pub cutoff_mass: f64,
    /// `‖|dξ_ε| ξ₁ φ⁻‖²`.
    pub cutoff_energy: f64,
    /// `4Λ/(n |log ε|)` with `Λ = λ + 1`.
    pub cutoff_energy_bound: f64,
}

/// Diagnostics of a normalized eigenfunction on the segment `glue`, which
/// starts at the gluing radius `ε` on the `M₁` side.
pub fn boundary_diagnostics(mode: &TransferMode, glue: usize, eps: f64, n: usize) -> Result<BoundaryDiagnostics> {
    let problem = mode.problem();
    let seg = problem
        .profile
        .segments
        .get(glue)
        .ok_or_else(|| Error::Domain(format!("no segment {glue}")))?;
    if (seg.r_start() - eps).abs() > 1e-12 * eps.max(1.0) {
        return Err(Error::Domain(format!("segment {glue} does not start at r = ε = {eps}")));
    }
    let sys = &problem.system;
    let neg = |r: f64| -> f64 {
        match mode.local(glue, r) {
            Ok((w, _)) => sys.negative_part_sq(w),
            Err(_) => f64::NAN,
        }
    };
    let boundary_negative_sq = neg(eps);
    let r_top = seg.r_hi.min(1.0);
    let quad = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        integrate(f, a, b, 1e-14, 1e-9).ok_or_else(|| Error::Numerical("diagnostic quadrature failed".into()))
    };
    let mass = |r: f64| (1.0 - xi_eps(eps, r)).powi(2) * xi_one(r).powi(2) * neg(r);
    let energy = |r: f64| xi_eps_slope(eps, r).powi(2) * xi_one(r).powi(2) * neg(r);
    let b_eps = (2.0 * eps.sqrt()).min(r_top);
    let cutoff_mass = quad(&mass, eps, b_eps)?;
    let cutoff_energy = quad(&energy, (2.0 * eps).min(r_top), b_eps)?;
    Ok(BoundaryDiagnostics {
        eps,
        lambda: mode.lambda,
        boundary_negative_sq,
        bord_ratio: boundary_negative_sq / eps,
        cutoff_mass,
        cutoff_energy,
        cutoff_energy_bound: 4.0 * (mode.lambda + 1.0) / (n as f64 * eps.ln().abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_endpoints() {
        for &eps in &[0.2, 0.1, 0.01] {
            assert_eq!(xi_eps(eps, 2.0 * eps), 0.0);
            assert!((xi_eps(eps, 2.0 * eps.sqrt() * (1.0 - 1e-15)) - 1.0).abs() < 1e-12);
            assert!((xi_eps(eps, 2.0 * eps.powf(0.75)) - 0.5).abs() < 1e-12);
        }
        assert_eq!(xi_one(0.3), 1.0);
        assert_eq!(xi_one(1.2), 0.0);
    }

    #[test]
    fn slope_matches_difference_quotient() {
        let eps = 0.05;
        let r = 0.2;
        let h = 1e-6;
        let fd = (xi_eps(eps, r + h) - xi_eps(eps, r - h)) / (2.0 * h);
        assert!((fd - xi_eps_slope(eps, r)).abs() < 1e-6);
    }
}
