//! Mayer–Vietoris lower bound for the first exact eigenvalue of `M_ε`.

use serde::Serialize;

use super::spectrum::{first_exact_eigenvalue, SolverOptions};
use crate::geometry::{cover_profiles, Profile};
use crate::sphere_modes::MultiplicityModel;
use crate::{Error, Result};

/// `λ₀ = ((1/μ^p(U₁) + 1/μ^p(U₂)) (ω c_ρ / μ^{p−1}(U₁₂) + 1))⁻¹`.
pub fn mcgowan_bound(mu_p_u1: f64, mu_p_u2: f64, mu_pm1_u12: f64, omega: f64, c_rho: f64) -> Result<f64> {
    for (name, v) in [("μ^p(U₁)", mu_p_u1), ("μ^p(U₂)", mu_p_u2), ("μ^{p−1}(U₁₂)", mu_pm1_u12), ("ω", omega), ("c_ρ", c_rho)]
    {
        if !(v > 0.0) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(1.0 / ((1.0 / mu_p_u1 + 1.0 / mu_p_u2) * (omega * c_rho / mu_pm1_u12 + 1.0)))
}

/// `(sup|dρ|)²` for the partition of unity that is linear in `log r` on `[ε, 2ε]`.
pub fn partition_c_rho(eps: f64) -> f64 {
    1.0 / (eps * std::f64::consts::LN_2).powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McGowanReport {
    pub p: usize,
    pub eps: f64,
    pub mu_p_u1: f64,
    pub mu_p_u2: f64,
    pub mu_pm1_u12: f64,
    pub omega: f64,
    pub c_rho: f64,
    pub lambda0: f64,
}

/// Evaluate the bound on the cover of `M_ε`; defined for `1 < p ≤ n`.
pub fn mcgowan_for(
    m_eps: &Profile,
    eps: f64,
    n: usize,
    p: usize,
    omega: f64,
    c_rho: Option<f64>,
    opts: &SolverOptions,
    model: &MultiplicityModel,
) -> Result<McGowanReport> {
    if !(p > 1 && p <= n) {
        return Err(Error::Domain(format!("the cover bound is stated for 1 < p ≤ n, got p = {p}, n = {n}")));
    }
    let (u1, u2, u12) = cover_profiles(m_eps, eps)?;
    let start = |pr: &Profile| 20.0 / pr.r_max().powi(2);
    let mu_p_u1 = first_exact_eigenvalue(&u1, n, p, start(&u1), opts, model)?;
    let mu_p_u2 = first_exact_eigenvalue(&u2, n, p, start(&u2), opts, model)?;
    let mu_pm1_u12 = first_exact_eigenvalue(&u12, n, p - 1, start(&u12), opts, model)?;
    let c_rho = c_rho.unwrap_or_else(|| partition_c_rho(eps));
    let lambda0 = mcgowan_bound(mu_p_u1, mu_p_u2, mu_pm1_u12, omega, c_rho)?;
    Ok(McGowanReport { p, eps, mu_p_u1, mu_p_u2, mu_pm1_u12, omega, c_rho, lambda0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_inputs() {
        assert!((mcgowan_bound(1.0, 1.0, 1.0, 1.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn large_first_piece_limit() {
        let lim = 2.0 / (1.0 * 3.0 / 5.0 + 1.0);
        let v = mcgowan_bound(1e15, 2.0, 5.0, 1.0, 3.0).unwrap();
        assert!((v - lim).abs() < 1e-12);
        assert!(mcgowan_bound(10.0, 2.0, 5.0, 1.0, 3.0).unwrap() < v);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(mcgowan_bound(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(mcgowan_bound(1.0, 1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn partition_slope() {
        let eps = 0.1;
        // ρ = log(r/ε)/log 2 has |dρ| = 1/(r ln 2), largest at r = ε
        assert!((partition_c_rho(eps) - (1.0 / (eps * 2f64.ln())).powi(2)).abs() < 1e-9);
    }
}
