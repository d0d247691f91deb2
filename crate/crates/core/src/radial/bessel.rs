//! Bessel functions `J_ν`, `Y_ν` of real order and their derivatives.
//!
//! Steed/Temme scheme: the ratio `J_ν'/J_ν` comes from a continued fraction and
//! is carried down to `μ = ν - N ∈ [-1/2, 1/2]`; there `J_μ`, `Y_μ` come from
//! Temme's series for `x < 2` or from the complex continued fraction for
//! `x >= 2`; `Y` is recurred back up. Intermediate quantities are rescaled so
//! that values beyond the `f64` range come back as mantissa and log-scale.
//!
//! Documented range: `0 <= ν <= NU_MAX`, `0 < x <= X_MAX`.

use std::f64::consts::PI;

use crate::{Error, Result};

pub const NU_MAX: f64 = 200.0;
pub const X_MAX: f64 = 1.0e4;

const EPS: f64 = 1.0e-16;
const FPMIN: f64 = 1.0e-300;
const MAXIT: usize = 100_000;
const XMIN: f64 = 2.0;
const RESCALE: f64 = 1.0e200;

/// Taylor coefficients of `1/Γ(z) = Σ c_k z^k`, `k = 1..26`.
const RGAMMA: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// `1/Γ(1+x)` for `|x| <= 1/2`.
fn rgamma1p(x: f64) -> f64 {
    RGAMMA.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Temme's `Γ₁(μ) = (1/Γ(1-μ) - 1/Γ(1+μ))/(2μ)` and `Γ₂(μ) = (1/Γ(1-μ) + 1/Γ(1+μ))/2`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let x2 = mu * mu;
    let mut g1 = 0.0;
    let mut g2 = 0.0;
    let mut pow = 1.0;
    for pair in RGAMMA.chunks(2) {
        // pair = (c_{2j+1}, c_{2j+2}) contributes c_{2j+1} μ^{2j} to Γ₂ and -c_{2j+2} μ^{2j} to Γ₁
        g2 += pair[0] * pow;
        g1 -= pair[1] * pow;
        pow *= x2;
    }
    (g1, g2, rgamma1p(mu), rgamma1p(-mu))
}

/// `J_ν, J_ν', Y_ν, Y_ν'` at one point. True values are `j·e^{ln_scale_j}`
/// (and `jp`), `y·e^{ln_scale_y}` (and `yp`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselPair {
    pub j: f64,
    pub jp: f64,
    pub y: f64,
    pub yp: f64,
    pub ln_scale_j: f64,
    pub ln_scale_y: f64,
}

impl BesselPair {
    pub fn j_value(&self) -> f64 {
        self.j * self.ln_scale_j.exp()
    }
    pub fn jp_value(&self) -> f64 {
        self.jp * self.ln_scale_j.exp()
    }
    pub fn y_value(&self) -> f64 {
        self.y * self.ln_scale_y.exp()
    }
    pub fn yp_value(&self) -> f64 {
        self.yp * self.ln_scale_y.exp()
    }

    /// `J Y' - J' Y`, computed without forming the unscaled values.
    pub fn wronskian(&self) -> f64 {
        (self.j * self.yp - self.jp * self.y) * (self.ln_scale_j + self.ln_scale_y).exp()
    }

    fn normalized(mut self) -> Self {
        let mj = self.j.abs().max(self.jp.abs());
        if mj > 0.0 && mj.is_finite() {
            let e = mj.ln().round();
            self.j *= (-e).exp();
            self.jp *= (-e).exp();
            self.ln_scale_j += e;
        }
        let my = self.y.abs().max(self.yp.abs());
        if my > 0.0 && my.is_finite() {
            let e = my.ln().round();
            self.y *= (-e).exp();
            self.yp *= (-e).exp();
            self.ln_scale_y += e;
        }
        self
    }
}

pub fn bessel_pair(nu: f64, x: f64) -> Result<BesselPair> {
    if !(0.0..=NU_MAX).contains(&nu) {
        return Err(Error::Domain(format!("Bessel order {nu} outside [0, {NU_MAX}]")));
    }
    if !(x > 0.0 && x <= X_MAX) {
        return Err(Error::Domain(format!("Bessel argument {x} outside (0, {X_MAX}]")));
    }
    let nl = if x < XMIN {
        (nu + 0.5) as usize
    } else {
        (nu - x + 1.5).max(0.0) as usize
    };
    let xmu = nu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1 for J_ν'/J_ν
    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("Bessel CF1 did not converge at nu={nu}, x={x}")));
    }

    // downward recurrence to order μ, with rescaling
    let mut rjl = isign * 1.0e-30;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut ln_down = 0.0;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
        if rjl.abs() > RESCALE || rjpl.abs() > RESCALE {
            rjl /= RESCALE;
            rjpl /= RESCALE;
            ln_down += RESCALE.ln();
        }
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, rymu, ry1_start);
    if x < XMIN {
        let x2 = 0.5 * x;
        let pimu = PI * xmu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = xmu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(xmu);
        let mut ff = 2.0 / PI * fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let e = e.exp();
        let mut p = e / (gampl * PI);
        let mut q = 1.0 / (e * PI * gammi);
        let pimu2 = 0.5 * pimu;
        let fact3 = if pimu2.abs() < EPS { 1.0 } else { pimu2.sin() / pimu2 };
        let r = PI * pimu2 * fact3 * fact3;
        let mut c = 1.0;
        let d = -x2 * x2;
        let mut sum = ff + r * q;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= d / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * (ff + r * q);
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Numerical(format!("Bessel Temme series did not converge at x={x}")));
        }
        let ymu = -sum;
        let y1 = -sum1 * xi2;
        let ymup = xmu * xi * ymu - y1;
        rjmu = w / (ymup - f * ymu);
        rymu = ymu;
        ry1_start = y1;
    } else {
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let mut dlr = cr * dr - ci * di;
        let mut dli = cr * di + ci * dr;
        let mut temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 1..MAXIT {
            a += 2.0 * i as f64;
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di /= -den;
            dlr = cr * dr - ci * di;
            dli = cr * di + ci * dr;
            temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Numerical(format!("Bessel CF2 did not converge at x={x}")));
        }
        let gam = (p - f) / q;
        let mut jmu = (w / ((p - f) * gam + q)).sqrt();
        if rjl < 0.0 {
            jmu = -jmu;
        }
        let ymu = jmu * gam;
        let ymup = ymu * (p + q / gam);
        rjmu = jmu;
        rymu = ymu;
        ry1_start = xmu * xi * ymu - ymup;
    }
    let ratio = rjmu / rjl;
    let j = rjl1 * ratio;
    let jp = rjp1 * ratio;

    // upward recurrence for Y, with rescaling
    let mut ymu = rymu;
    let mut y1 = ry1_start;
    let mut ln_up = 0.0;
    for i in 1..=nl {
        let ytemp = (xmu + i as f64) * xi2 * y1 - ymu;
        ymu = y1;
        y1 = ytemp;
        if y1.abs() > RESCALE {
            y1 /= RESCALE;
            ymu /= RESCALE;
            ln_up += RESCALE.ln();
        }
    }
    let y = ymu;
    let yp = nu * xi * ymu - y1;

    Ok(BesselPair { j, jp, y, yp, ln_scale_j: -ln_down, ln_scale_y: ln_up }.normalized())
}
