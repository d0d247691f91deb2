//! Coclosed eigenforms of the Hodge Laplacian on the round sphere `Sⁿ`.
//!
//! Non-harmonic coexact `q`-forms at level `k ≥ 1` have eigenvalue
//! `μ² = (k+q)(k+n-q-1)`. The two harmonic families (constants in degree 0,
//! the volume form in degree `n`) are carried by a distinct [`ModeLevel::Harmonic`]
//! marker so the level index keeps its usual meaning.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::{Error, Result};

/// Level of a sphere eigenform family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ModeLevel {
    Harmonic,
    Level(u32),
}

impl fmt::Display for ModeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeLevel::Harmonic => write!(f, "H"),
            ModeLevel::Level(k) => write!(f, "{k}"),
        }
    }
}

/// One coclosed eigenform family on `Sⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereMode {
    pub n: usize,
    pub q: usize,
    pub level: ModeLevel,
    pub mu_sq: f64,
    pub multiplicity: u64,
}

impl SphereMode {
    pub fn is_harmonic(&self) -> bool {
        self.level == ModeLevel::Harmonic
    }

    pub fn mu(&self) -> f64 {
        self.mu_sq.sqrt()
    }

    /// Constants (`q = 0`) or the volume form (`q = n`).
    pub fn harmonic(n: usize, q: usize) -> Result<Self> {
        check_dimension(n)?;
        if q != 0 && q != n {
            return Err(Error::Domain(format!(
                "harmonic forms on S^{n} exist only in degree 0 and {n}, got {q}"
            )));
        }
        Ok(SphereMode {
            n,
            q,
            level: ModeLevel::Harmonic,
            mu_sq: 0.0,
            multiplicity: 1,
        })
    }

    pub fn coexact(n: usize, q: usize, k: u32, model: &MultiplicityModel) -> Result<Self> {
        Ok(SphereMode {
            n,
            q,
            level: ModeLevel::Level(k),
            mu_sq: coexact_eigenvalue(n, q, k)?,
            multiplicity: model.multiplicity(n, q, k)?,
        })
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain(format!("sphere dimension must be >= 2, got {n}")));
    }
    Ok(())
}

fn check_coexact(n: usize, q: usize, k: u32) -> Result<()> {
    check_dimension(n)?;
    if q >= n {
        return Err(Error::Domain(format!(
            "coexact degree q must satisfy 0 <= q <= n-1 = {}, got {q}",
            n - 1
        )));
    }
    if k == 0 {
        return Err(Error::Domain("coexact level k must be >= 1".into()));
    }
    Ok(())
}

/// `μ²(n, q, k) = (k+q)(k+n-q-1)`.
pub fn coexact_eigenvalue(n: usize, q: usize, k: u32) -> Result<f64> {
    check_coexact(n, q, k)?;
    let (n, q, k) = (n as f64, q as f64, k as f64);
    Ok((k + q) * (k + n - q - 1.0))
}

/// Lower bound `(n-q)(q+1)` on non-harmonic coclosed q-forms.
pub fn gallot_meyer_bound(n: usize, q: usize) -> f64 {
    ((n - q) * (q + 1)) as f64
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of degree-k harmonic polynomials in `n+1` variables.
fn harmonic_polynomial_dim(n: usize, k: u32) -> u64 {
    let (n, k) = (n as u64, k as u64);
    let top = binomial(n + k, n);
    let lower = if k >= 2 { binomial(n + k - 2, n) } else { 0 };
    top - lower
}

/// User supplied multiplicity formula `(n, q, k) -> Some(mult)`.
pub type MultiplicityHook = Arc<dyn Fn(usize, usize, u32) -> Option<u64> + Send + Sync>;

/// Source of eigenspace dimensions.
#[derive(Clone, Default)]
pub enum MultiplicityModel {
    /// Validated closed forms: functions (`q = 0`) and, by Hodge duality on
    /// the sphere, `q = n-1`, in every dimension. For `n = 2` this covers
    /// every coexact degree (`2k+1`).
    #[default]
    Builtin,
    /// Every family reported with multiplicity 1; results are per channel.
    Agnostic,
    /// Caller-provided formula, falling back to an error when it returns `None`.
    Custom(MultiplicityHook),
}

impl fmt::Debug for MultiplicityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplicityModel::Builtin => write!(f, "Builtin"),
            MultiplicityModel::Agnostic => write!(f, "Agnostic"),
            MultiplicityModel::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl MultiplicityModel {
    pub fn multiplicity(&self, n: usize, q: usize, k: u32) -> Result<u64> {
        check_coexact(n, q, k)?;
        match self {
            MultiplicityModel::Builtin => builtin_multiplicity(n, q, k),
            MultiplicityModel::Agnostic => Ok(1),
            MultiplicityModel::Custom(hook) => hook(n, q, k).ok_or_else(|| {
                Error::Unsupported(format!("multiplicity hook does not cover (n={n}, q={q}, k={k})"))
            }),
        }
    }

    pub fn is_agnostic(&self) -> bool {
        matches!(self, MultiplicityModel::Agnostic)
    }
}

fn builtin_multiplicity(n: usize, q: usize, k: u32) -> Result<u64> {
    if q == 0 || q == n - 1 {
        Ok(harmonic_polynomial_dim(n, k))
    } else {
        Err(Error::Unsupported(format!(
            "no validated multiplicity for coexact {q}-forms on S^{n} (level {k}); \
             supply a multiplicity hook or use the agnostic model"
        )))
    }
}

/// Dimension of the coexact q-eigenspace at level k under the builtin model.
pub fn coexact_multiplicity(n: usize, q: usize, k: u32) -> Result<u64> {
    MultiplicityModel::Builtin.multiplicity(n, q, k)
}

/// All sphere modes with `μ² <= mu_sq_max`, sorted by `(q, μ²)`.
pub fn enumerate_sphere_modes(
    n: usize,
    mu_sq_max: f64,
    model: &MultiplicityModel,
) -> Result<Vec<SphereMode>> {
    check_dimension(n)?;
    if !(mu_sq_max > 0.0) || !mu_sq_max.is_finite() {
        return Err(Error::Domain(format!("mu_sq_max must be positive, got {mu_sq_max}")));
    }
    let mut modes = vec![SphereMode::harmonic(n, 0)?, SphereMode::harmonic(n, n)?];
    for q in 0..n {
        // μ² is increasing in k, so stop at the first level past the cutoff.
        let mut k = 1;
        while coexact_eigenvalue(n, q, k)? <= mu_sq_max {
            modes.push(SphereMode::coexact(n, q, k, model)?);
            k += 1;
        }
    }
    modes.sort_by(|a, b| a.q.cmp(&b.q).then(a.mu_sq.total_cmp(&b.mu_sq)));
    Ok(modes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(coexact_eigenvalue(2, 0, 1).unwrap(), 2.0);
        assert_eq!(coexact_eigenvalue(4, 1, 1).unwrap(), 6.0);
        assert_eq!(coexact_eigenvalue(2, 1, 2).unwrap(), 6.0);
    }

    #[test]
    fn functions_match_classical_spectrum() {
        for n in 2..6 {
            for k in 1..10u32 {
                let classical = (k as f64) * (k as f64 + n as f64 - 1.0);
                assert_eq!(coexact_eigenvalue(n, 0, k).unwrap(), classical);
            }
        }
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(coexact_multiplicity(2, 0, 1).unwrap(), 3);
        assert_eq!(coexact_multiplicity(2, 1, 3).unwrap(), 7);
        assert_eq!(SphereMode::harmonic(2, 0).unwrap().multiplicity, 1);
        // spherical harmonics on S^3: (k+1)^2
        assert_eq!(coexact_multiplicity(3, 0, 2).unwrap(), 9);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(coexact_eigenvalue(2, 2, 1), Err(Error::Domain(_))));
        assert!(matches!(coexact_eigenvalue(2, 0, 0), Err(Error::Domain(_))));
        assert!(matches!(coexact_eigenvalue(1, 0, 1), Err(Error::Domain(_))));
        assert!(SphereMode::harmonic(3, 1).is_err());
    }

    #[test]
    fn unsupported_multiplicity_is_an_error() {
        assert!(matches!(coexact_multiplicity(4, 1, 1), Err(Error::Unsupported(_))));
        assert_eq!(MultiplicityModel::Agnostic.multiplicity(4, 1, 1).unwrap(), 1);
        let hook: MultiplicityHook = Arc::new(|_, q, k| (q == 1).then_some(k as u64));
        let model = MultiplicityModel::Custom(hook);
        assert_eq!(model.multiplicity(4, 1, 5).unwrap(), 5);
        assert!(matches!(model.multiplicity(4, 2, 1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn enumerate_examples() {
        let m = MultiplicityModel::Builtin;
        let modes = enumerate_sphere_modes(2, 2.5, &m).unwrap();
        assert_eq!(modes.len(), 4);
        assert!(modes.iter().any(|s| s.q == 0 && s.is_harmonic()));
        assert!(modes.iter().any(|s| s.q == 2 && s.is_harmonic()));
        for q in 0..2 {
            let s = modes.iter().find(|s| s.q == q && !s.is_harmonic()).unwrap();
            assert_eq!((s.level, s.mu_sq, s.multiplicity), (ModeLevel::Level(1), 2.0, 3));
        }

        let modes = enumerate_sphere_modes(2, 0.5, &m).unwrap();
        assert!(modes.iter().all(|s| s.is_harmonic()) && modes.len() == 2);

        let modes = enumerate_sphere_modes(3, 3.0, &MultiplicityModel::Agnostic).unwrap();
        let coexact: Vec<_> = modes.iter().filter(|s| !s.is_harmonic()).collect();
        assert_eq!(coexact.len(), 2);
        assert!(coexact.iter().all(|s| s.mu_sq == 3.0 && (s.q == 0 || s.q == 2)));
        assert_eq!(coexact_eigenvalue(3, 1, 1).unwrap(), 4.0);

        assert!(enumerate_sphere_modes(2, 0.0, &m).is_err());
    }

    proptest! {
        #[test]
        fn gallot_meyer_bound_holds(n in 2usize..8, q_frac in 0.0f64..1.0, k in 1u32..30) {
            let q = ((n as f64) * q_frac) as usize % n;
            let mu = coexact_eigenvalue(n, q, k).unwrap();
            prop_assert!(mu >= gallot_meyer_bound(n, q));
            if k == 1 {
                prop_assert_eq!(mu, gallot_meyer_bound(n, q));
            }
        }

        #[test]
        fn degree_symmetry(n in 2usize..8, q_frac in 0.0f64..1.0, k in 1u32..30) {
            let q = ((n as f64) * q_frac) as usize % n;
            let dual = n - 1 - q;
            prop_assert_eq!(coexact_eigenvalue(n, q, k).unwrap(), coexact_eigenvalue(n, dual, k).unwrap());
            if let (Ok(a), Ok(b)) = (coexact_multiplicity(n, q, k), coexact_multiplicity(n, dual, k)) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn enumeration_is_monotone(n in 2usize..5, lo in 0.5f64..30.0, extra in 0.0f64..30.0) {
            let m = MultiplicityModel::Agnostic;
            let small = enumerate_sphere_modes(n, lo, &m).unwrap();
            let large = enumerate_sphere_modes(n, lo + extra, &m).unwrap();
            for s in &small {
                prop_assert!(large.contains(s));
            }
        }

        #[test]
        fn two_sphere_multiplicity(k in 1u32..200) {
            prop_assert_eq!(coexact_multiplicity(2, 0, k).unwrap(), 2 * k as u64 + 1);
            prop_assert_eq!(coexact_multiplicity(2, 1, k).unwrap(), 2 * k as u64 + 1);
        }
    }
}
