//! Dense reference solver for functions: `-r⁻ⁿ(rⁿu')' + μ²u/r² = λu`.
//!
//! Works with the unweighted function `u` and the measure `rⁿ dt`, unlike the
//! FEM and secular solvers, so it serves as an independent check. Lumped
//! linear elements on three meshes, extrapolated in `h²`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::geometry::{BoundaryKind, Profile};
use crate::{Error, Result};

/// Eigenvalues of one mesh with `cells_per_unit` cells per unit arclength.
fn level(profile: &Profile, n: usize, mu_sq: f64, cells_per_unit: usize) -> Result<Vec<f64>> {
    let nf = n as f64;
    let mut t = vec![0.0];
    let mut r = vec![profile.segments[0].r_start()];
    for seg in &profile.segments {
        let cells = ((seg.length() * cells_per_unit as f64).ceil() as usize).max(4);
        let t0 = *t.last().unwrap();
        for i in 1..=cells {
            let s = seg.length() * i as f64 / cells as f64;
            t.push(t0 + s);
            r.push(seg.radius_at(s));
        }
    }
    let m = t.len();
    // ∫ r^k over a cell with r linear
    let cell_int = |a: f64, b: f64, h: f64, k: f64| {
        if (b - a).abs() < 1e-14 * (a + b).abs().max(1e-300) {
            h * a.powf(k)
        } else {
            h * (b.powf(k + 1.0) - a.powf(k + 1.0)) / ((k + 1.0) * (b - a))
        }
    };
    let mut diag = vec![0.0; m];
    let mut off = vec![0.0; m - 1];
    let mut mass = vec![0.0; m];
    for c in 0..m - 1 {
        let h = t[c + 1] - t[c];
        let (a, b) = (r[c], r[c + 1]);
        let rm = 0.5 * (a + b);
        let w = cell_int(a, b, h, nf) / (h * h);
        diag[c] += w;
        diag[c + 1] += w;
        off[c] = -w;
        // each half cell lumps onto its node
        mass[c] += cell_int(a, rm, 0.5 * h, nf);
        mass[c + 1] += cell_int(rm, b, 0.5 * h, nf);
        if mu_sq > 0.0 && a > 0.0 && rm > 0.0 {
            diag[c] += mu_sq * cell_int(a, rm, 0.5 * h, nf - 2.0);
        }
        if mu_sq > 0.0 && b > 0.0 && rm > 0.0 {
            diag[c + 1] += mu_sq * cell_int(rm, b, 0.5 * h, nf - 2.0);
        }
    }
    let mut keep: Vec<bool> = vec![true; m];
    let ends = [(0usize, profile.left.kind()), (m - 1, profile.right.kind())];
    for (idx, kind) in ends {
        match kind {
            BoundaryKind::Aps => return Err(Error::Unsupported("APS ends in the function solver".into())),
            BoundaryKind::DirichletLike => keep[idx] = false,
            BoundaryKind::RegularTip if mu_sq > 0.0 => keep[idx] = false,
            _ => {}
        }
    }
    let idx: Vec<usize> = (0..m).filter(|i| keep[*i]).collect();
    let k = idx.len();
    let mut a = DMatrix::zeros(k, k);
    for (i, &gi) in idx.iter().enumerate() {
        a[(i, i)] = diag[gi] / mass[gi];
        if i + 1 < k && idx[i + 1] == gi + 1 {
            let v = off[gi] / (mass[gi] * mass[gi + 1]).sqrt();
            a[(i, i + 1)] = v;
            a[(i + 1, i)] = v;
        }
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues in `[0, λ_max]` of the function problem with angular
/// eigenvalue `μ²` on a profile of a cone over `Sⁿ`; `(λ, error estimate)`.
pub fn function_spectrum(profile: &Profile, n: usize, mu_sq: f64, lambda_max: f64) -> Result<Vec<(f64, f64)>> {
    let base = 100;
    let l0 = level(profile, n, mu_sq, base)?;
    let l1 = level(profile, n, mu_sq, 2 * base)?;
    let l2 = level(profile, n, mu_sq, 4 * base)?;
    let mut out = Vec::new();
    for i in 0..l0.len().min(l1.len()).min(l2.len()) {
        // eliminate h² and h⁴
        let ext = (64.0 * l2[i] - 20.0 * l1[i] + l0[i]) / 45.0;
        let prev = (4.0 * l1[i] - l0[i]) / 3.0;
        if ext > lambda_max {
            break;
        }
        out.push((ext.max(0.0), (ext - prev).abs()));
    }
    Ok(out)
}
