//! Symmetric banded matrices: `LDLᵀ` factorization, inertia counts and
//! bisection for the generalized problem `Kx = λMx`.

use crate::{Error, Result};

/// Lower band of a symmetric matrix; entry `(i, j)`, `i - bw <= j <= i`,
/// lives at `data[i * (bw + 1) + (i - j)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBand {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, bw: usize) -> Self {
        SymBand { n, bw, data: vec![0.0; n * (bw + 1)] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(i - j <= self.bw, "entry outside band");
        i * (self.bw + 1) + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if j > i { (j, i) } else { (i, j) };
        if a - b > self.bw {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let row = i * (self.bw + 1);
            y[i] += self.data[row] * x[i];
            for k in 1..=self.bw.min(i) {
                let j = i - k;
                let a = self.data[row + k];
                y[i] += a * x[j];
                y[j] += a * x[i];
            }
        }
        y
    }

    /// `self - sigma * other`, same shape.
    pub fn shifted(&self, other: &SymBand, sigma: f64) -> SymBand {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        SymBand {
            n: self.n,
            bw: self.bw,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - sigma * b).collect(),
        }
    }

    /// Restrict to the rows and columns listed in `keep` (ascending).
    pub fn submatrix(&self, keep: &[usize]) -> SymBand {
        let mut span = 0;
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep[..a].iter().enumerate().rev() {
                if i - j > self.bw {
                    break;
                }
                span = span.max(a - b);
            }
        }
        let mut out = SymBand::zeros(keep.len(), span.max(1));
        for (a, &i) in keep.iter().enumerate() {
            for b in a.saturating_sub(span)..=a {
                let j = keep[b];
                let v = self.get(i, j);
                if v != 0.0 {
                    out.add(a, b, v);
                }
            }
        }
        out
    }
}

/// `A = L D Lᵀ` with unit lower-triangular banded `L`.
#[derive(Debug, Clone)]
pub struct Ldlt {
    l: SymBand,
    d: Vec<f64>,
}

impl Ldlt {
    /// Factorization without pivoting; exact zero pivots are nudged by a tiny
    /// relative amount so that inertia stays well defined.
    pub fn new(a: &SymBand) -> Ldlt {
        let n = a.n;
        let bw = a.bw;
        let mut l = a.clone();
        let mut d = vec![0.0; n];
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            let ri = i * (bw + 1);
            for j in lo..i {
                let rj = j * (bw + 1);
                let mut s = l.data[ri + (i - j)];
                for k in lo.max(j.saturating_sub(bw))..j {
                    s -= l.data[ri + (i - k)] * l.data[rj + (j - k)] * d[k];
                }
                l.data[ri + (i - j)] = s / d[j];
            }
            let mut s = l.data[ri];
            for k in lo..i {
                let lik = l.data[ri + (i - k)];
                s -= lik * lik * d[k];
            }
            if s == 0.0 {
                s = f64::EPSILON * scale;
            }
            d[i] = s;
            l.data[ri] = 1.0;
        }
        Ldlt { l, d }
    }

    /// Number of negative pivots, i.e. negative eigenvalues of `A`.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|v| **v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let bw = self.l.bw;
        let mut x = b.to_vec();
        for i in 0..n {
            let ri = i * (bw + 1);
            for k in i.saturating_sub(bw)..i {
                x[i] -= self.l.data[ri + (i - k)] * x[k];
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let ri = i * (bw + 1);
            let xi = x[i];
            for k in i.saturating_sub(bw)..i {
                x[k] -= self.l.data[ri + (i - k)] * xi;
            }
        }
        x
    }
}

/// Number of eigenvalues of `Kx = λMx` below `sigma` (`M` positive definite).
pub fn count_below(k: &SymBand, m: &SymBand, sigma: f64) -> usize {
    Ldlt::new(&k.shifted(m, sigma)).negative_count()
}

/// All eigenvalues of `Kx = λMx` in `[lo, hi)`. Intervals are bisected on
/// inertia counts; once an eigenvalue is isolated to `1e-2` relative width it is
/// polished by Rayleigh quotient iteration, clusters are bisected
/// down to `rtol·max(|λ|, floor)`.
pub fn eigenvalues_in(k: &SymBand, m: &SymBand, lo: f64, hi: f64, rtol: f64, floor: f64) -> Vec<f64> {
    struct Ctx<'a> {
        k: &'a SymBand,
        m: &'a SymBand,
        rtol: f64,
        floor: f64,
    }
    fn rec(c: &Ctx, (lo, clo): (f64, usize), (hi, chi): (f64, usize), out: &mut Vec<f64>) {
        if chi <= clo {
            return;
        }
        let mid = 0.5 * (lo + hi);
        let scale = mid.abs().max(c.floor);
        if chi - clo == 1 && hi - lo <= 1e-2 * scale {
            if let Some(v) = rayleigh_polish(c.k, c.m, (lo, clo), hi, c.rtol * scale) {
                out.push(v);
                return;
            }
        }
        if hi - lo <= c.rtol * scale {
            out.extend(std::iter::repeat(mid).take(chi - clo));
            return;
        }
        let cm = count_below(c.k, c.m, mid);
        rec(c, (lo, clo), (mid, cm), out);
        rec(c, (mid, cm), (hi, chi), out);
    }
    let ctx = Ctx { k, m, rtol, floor };
    let clo = count_below(k, m, lo);
    let chi = count_below(k, m, hi);
    let mut out = Vec::with_capacity(chi.saturating_sub(clo));
    rec(&ctx, (lo, clo), (hi, chi), &mut out);
    out
}

/// Rayleigh quotient iteration started at the midpoint of a bracket holding
/// exactly one eigenvalue. The result is accepted only if inertia counts
/// confirm it to within `tol`.
fn rayleigh_polish(k: &SymBand, m: &SymBand, (lo, clo): (f64, usize), hi: f64, tol: f64) -> Option<f64> {
    let mut sigma = 0.5 * (lo + hi);
    let mut x = inverse_iteration_at(k, m, sigma, 2, 1).ok()?;
    for _ in 0..8 {
        let kx = k.mul_vec(&x);
        let mx = m.mul_vec(&x);
        let num: f64 = x.iter().zip(&kx).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        let rho = num / den;
        if !(rho > lo && rho < hi) {
            return None;
        }
        if (rho - sigma).abs() <= 0.01 * tol {
            sigma = rho;
            break;
        }
        sigma = rho;
        x = inverse_steps(k, m, sigma, x, 1).ok()?;
    }
    let ok = count_below(k, m, (sigma - tol).max(lo)) == clo && count_below(k, m, (sigma + tol).min(hi)) == clo + 1;
    ok.then_some(sigma)
}

/// Eigenvector for an isolated eigenvalue `lambda` by shifted inverse
/// iteration, normalized to `xᵀMx = 1`.
pub fn inverse_iteration(k: &SymBand, m: &SymBand, lambda: f64, seed: u64) -> Result<Vec<f64>> {
    let shift = lambda - 1e-10 * lambda.abs().max(1e-8);
    inverse_iteration_at(k, m, shift, 4, seed)
}

fn inverse_iteration_at(k: &SymBand, m: &SymBand, shift: f64, steps: usize, seed: u64) -> Result<Vec<f64>> {
    // deterministic pseudo-random start
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let x: Vec<f64> = (0..k.dim())
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
        .collect();
    inverse_steps(k, m, shift, x, steps)
}

fn inverse_steps(k: &SymBand, m: &SymBand, shift: f64, mut x: Vec<f64>, steps: usize) -> Result<Vec<f64>> {
    let f = Ldlt::new(&k.shifted(m, shift));
    for _ in 0..steps {
        let y = f.solve(&m.mul_vec(&x));
        let my = m.mul_vec(&y);
        let norm: f64 = y.iter().zip(&my).map(|(a, b)| a * b).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Numerical(format!("inverse iteration broke down at shift={shift}")));
        }
        x = y.iter().map(|v| v / norm).collect();
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> (SymBand, SymBand) {
        let mut k = SymBand::zeros(n, 1);
        let mut m = SymBand::zeros(n, 1);
        for i in 0..n {
            k.add(i, i, 2.0);
            m.add(i, i, 1.0);
            if i > 0 {
                k.add(i, i - 1, -1.0);
            }
        }
        (k, m)
    }

    #[test]
    fn tridiagonal_eigenvalues() {
        let n = 30;
        let (k, m) = laplacian_1d(n);
        let ev = eigenvalues_in(&k, &m, 0.0, 4.0, 1e-14, 1e-14);
        assert_eq!(ev.len(), n);
        for (j, v) in ev.iter().enumerate() {
            let e = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_matches_multiply() {
        let n = 12;
        let mut a = SymBand::zeros(n, 3);
        for i in 0..n {
            a.add(i, i, 10.0 + i as f64);
            for k in 1..=3.min(i) {
                a.add(i, i - k, 1.0 / (1.0 + k as f64 + i as f64));
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let y = Ldlt::new(&a).solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvector_residual() {
        let (k, m) = laplacian_1d(20);
        let lam = eigenvalues_in(&k, &m, 0.0, 4.0, 1e-15, 1e-15)[2];
        let x = inverse_iteration(&k, &m, lam, 7).unwrap();
        let kx = k.mul_vec(&x);
        let mx = m.mul_vec(&x);
        for (a, b) in kx.iter().zip(&mx) {
            assert!((a - lam * b).abs() < 1e-10);
        }
    }

    #[test]
    fn submatrix_drops_rows() {
        let (k, _) = laplacian_1d(5);
        let s = k.submatrix(&[1, 2, 3]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.get(0, 0), 2.0);
        assert_eq!(s.get(1, 0), -1.0);
        assert_eq!(s.get(2, 0), 0.0);
    }
}
