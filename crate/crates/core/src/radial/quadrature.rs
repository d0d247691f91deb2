//! Gauss–Legendre rules, Gauss–Lobatto–Legendre nodes and Lagrange bases on `[-1, 1]`.

use std::f64::consts::PI;

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `m`-point Gauss–Legendre rule, nodes ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(m, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// The `k+1` Gauss–Lobatto–Legendre nodes: `±1` and the roots of `P_k'`.
pub fn gll_nodes(k: usize) -> Vec<f64> {
    assert!(k >= 1);
    let mut x = vec![0.0; k + 1];
    x[0] = -1.0;
    x[k] = 1.0;
    for i in 1..k {
        // Chebyshev–Gauss–Lobatto initial guess, Newton on (1-x²)P_k'
        let mut z = -(PI * i as f64 / k as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(k, z);
            // d/dx[(1-x²)P'] = -k(k+1)P
            let f = (1.0 - z * z) * dp;
            let df = -((k * (k + 1)) as f64) * p;
            let dz = f / df;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
    }
    x
}

/// Values and derivatives of the Lagrange basis on `nodes` at `x`.
pub fn lagrange(nodes: &[f64], x: f64) -> (Vec<f64>, Vec<f64>) {
    let m = nodes.len();
    let mut v = vec![0.0; m];
    let mut d = vec![0.0; m];
    for i in 0..m {
        let mut val = 1.0;
        let mut der = 0.0;
        for j in 0..m {
            if j == i {
                continue;
            }
            let den = nodes[i] - nodes[j];
            der = der * (x - nodes[j]) / den + val / den;
            val *= (x - nodes[j]) / den;
        }
        v[i] = val;
        d[i] = der;
    }
    (v, d)
}

/// Adaptive Gauss–Legendre integral of `f` over `[a, b]`: intervals are
/// bisected until the 10- and 20-point rules agree to `abs_tol + rel_tol·|I|`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Option<f64> {
    let (x10, w10) = gauss_legendre(10);
    let (x20, w20) = gauss_legendre(20);
    let rule = |x: &[f64], w: &[f64], a: f64, b: f64| -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        x.iter().zip(w).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    };
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut pieces = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = rule(&x10, &w10, lo, hi);
        let fine = rule(&x20, &w20, lo, hi);
        if !fine.is_finite() {
            return None;
        }
        let share = (hi - lo) / (b - a).abs().max(f64::MIN_POSITIVE);
        if (fine - coarse).abs() <= (abs_tol + rel_tol * fine.abs()) * share.max(1e-3) || depth >= 60 {
            if depth >= 60 && (fine - coarse).abs() > abs_tol + rel_tol * fine.abs() {
                return None;
            }
            total += fine;
            pieces += 1;
            if pieces > 100_000 {
                return None;
            }
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    Some(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact() {
        for m in 1..12 {
            let (x, w) = gauss_legendre(m);
            for deg in 0..2 * m {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-14, "m={m} deg={deg}");
            }
        }
    }

    #[test]
    fn gll_nodes_known() {
        let x = gll_nodes(2);
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        let x = gll_nodes(4);
        let a = (3.0f64 / 7.0).sqrt();
        assert!((x[1] + a).abs() < 1e-15 && (x[3] - a).abs() < 1e-15 && x[2].abs() < 1e-15);
    }

    #[test]
    fn lagrange_partition_of_unity() {
        let nodes = gll_nodes(5);
        for &x in &[-0.9, -0.1, 0.33, 0.77] {
            let (v, d) = lagrange(&nodes, x);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(d.iter().sum::<f64>().abs() < 1e-12);
            let xs: f64 = v.iter().zip(&nodes).map(|(v, n)| v * n).sum();
            let dx: f64 = d.iter().zip(&nodes).map(|(d, n)| d * n).sum();
            assert!((xs - x).abs() < 1e-14 && (dx - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_integral_with_endpoint_singularity() {
        let f = |x: f64| x.powf(0.3);
        let v = integrate(&f, 0.0, 1.0, 1e-14, 1e-13).unwrap();
        assert!((v - 1.0 / 1.3).abs() < 1e-12);
        let g = |x: f64| (20.0 * x).sin();
        let v = integrate(&g, 0.0, 3.0, 1e-14, 1e-13).unwrap();
        assert!((v - (1.0 - 60f64.cos()) / 20.0).abs() < 1e-13);
    }
}
