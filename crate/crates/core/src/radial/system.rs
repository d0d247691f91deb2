//! Radial systems of a fixed total degree and the problems built from them.
//!
//! A system carries one or two components `u` (slots of `σ = (β, α)`) and, on a
//! segment oriented by `o = ±1`, the local field `w = S u` with `S` flipping
//! `β` on `Down` segments. The quadratic form is
//! `∫ |w'|² + wᵀCw/r² dr + [wᵀBw/r]` from `r_lo` to `r_hi`, and the conserved
//! flux across seams is `G = o S (w' + Bw/r)`.

use serde::Serialize;

use crate::cone_operator::{blocks_in_degree, ABlock, BlockFamily, Mat2, Slot};
use crate::geometry::{BoundaryKind, Orientation, Profile};
use crate::radial::bessel::bessel_pair;
use crate::sphere_modes::{MultiplicityModel, SphereMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// `v₁ = (0, η)` of a `MinusHalf` block: coexact forms.
    MinusAlpha,
    /// `v₄' = (dη/μ, 0)` of a `MinusHalf` block: exact forms.
    MinusBeta,
    /// The coupled pair `(dη/μ, η)` of a `PlusHalf` block.
    Plus,
    ExceptionalAlpha,
    ExceptionalBeta,
}

/// One scalar channel of a system: a common eigenvector of `B` and `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Channel {
    /// Direction in component coordinates.
    pub dir: [f64; 2],
    /// Eigenvalue of `C`, equal to `ν² - 1/4`.
    pub c: f64,
    /// Eigenvalue of `B`.
    pub b: f64,
    pub nu: f64,
    /// Eigenvalue of `A` when the system is a whole block.
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSystem {
    pub n: usize,
    pub degree: usize,
    pub kind: SystemKind,
    pub source: SphereMode,
    pub slots: Vec<Slot>,
    pub b: Mat2,
    pub c: Mat2,
    pub channels: Vec<Channel>,
    /// The eigenvalues of the generating block of `A`.
    pub block_gammas: Vec<f64>,
    /// Eigenvectors of the generating block, in block coordinates.
    pub block_eigvecs: Vec<[f64; 2]>,
    /// Block coordinate of each component.
    pub block_positions: Vec<usize>,
}

impl RadialSystem {
    pub fn dim(&self) -> usize {
        self.slots.len()
    }

    pub fn multiplicity(&self) -> u64 {
        self.source.multiplicity
    }

    /// Whether `C = B² + B`, i.e. the system is a full invariant block of `A`.
    pub fn is_aligned(&self) -> bool {
        self.channels.iter().all(|c| c.gamma.is_some())
    }

    /// Smallest potential coefficient, used for enumeration bounds.
    pub fn c_min(&self) -> f64 {
        self.channels.iter().map(|c| c.c).fold(f64::INFINITY, f64::min)
    }

    /// Block coordinates of a local field `w`.
    pub fn block_coordinates(&self, w: [f64; 2]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (i, &pos) in self.block_positions.iter().enumerate() {
            out[pos] = w[i];
        }
        out
    }

    /// `|Π_{<0} σ|²` for the block datum of a local field `w`.
    pub fn negative_part_sq(&self, w: [f64; 2]) -> f64 {
        let s = self.block_coordinates(w);
        self.block_gammas
            .iter()
            .zip(&self.block_eigvecs)
            .filter(|(g, _)| **g < 0.0)
            .map(|(_, v)| (v[0] * s[0] + v[1] * s[1]).powi(2))
            .fold(0.0, |a, b| a + b)
    }

    pub fn label(&self) -> String {
        format!("{:?}(q={},{})", self.kind, self.source.q, self.source.level)
    }

    /// `S` on a segment of the given orientation.
    pub fn orientation_signs(&self, o: Orientation) -> [f64; 2] {
        let mut s = [1.0; 2];
        for (i, slot) in self.slots.iter().enumerate() {
            if *slot == Slot::Beta && o == Orientation::Down {
                s[i] = -1.0;
            }
        }
        s
    }

    /// Ad hoc scalar channel with potential `γ(γ+1)` and boundary coefficient `γ`,
    /// not tied to a sphere mode.
    pub fn scalar(n: usize, gamma: f64, slot: Slot) -> RadialSystem {
        let c = gamma * (gamma + 1.0);
        RadialSystem {
            n,
            degree: 0,
            kind: match slot {
                Slot::Alpha => SystemKind::ExceptionalAlpha,
                Slot::Beta => SystemKind::ExceptionalBeta,
            },
            source: SphereMode::harmonic(n, 0).expect("n >= 2"),
            slots: vec![slot],
            b: [[gamma, 0.0], [0.0, 0.0]],
            c: [[c, 0.0], [0.0, 0.0]],
            channels: vec![Channel { dir: [1.0, 0.0], c, b: gamma, nu: (gamma + 0.5).abs(), gamma: Some(gamma) }],
            block_gammas: vec![gamma],
            block_eigvecs: vec![[1.0, 0.0]],
            block_positions: vec![0],
        }
    }
}

fn from_block(block: &ABlock, p: usize) -> Option<RadialSystem> {
    let n = block.source.n;
    let m = block.matrix;
    let base = |kind, slots: Vec<Slot>, b: Mat2, c: Mat2, channels, positions| RadialSystem {
        n,
        degree: p,
        kind,
        source: block.source.clone(),
        slots,
        b,
        c,
        channels,
        block_gammas: block.gammas.clone(),
        block_eigvecs: block.eigvecs.clone(),
        block_positions: positions,
    };
    match block.family {
        BlockFamily::MinusHalf => {
            // both γ give γ(γ+1) = s² - 1/4
            let s = 0.5 * (block.gammas[0] - block.gammas[1]);
            let c = s * s - 0.25;
            let idx = block.basis.iter().position(|v| v.degree == p)?;
            let bval = m[idx][idx];
            let kind = if idx == 0 { SystemKind::MinusAlpha } else { SystemKind::MinusBeta };
            Some(base(
                kind,
                vec![block.basis[idx].slot],
                [[bval, 0.0], [0.0, 0.0]],
                [[c, 0.0], [0.0, 0.0]],
                vec![Channel { dir: [1.0, 0.0], c, b: bval, nu: s, gamma: None }],
                vec![idx],
            ))
        }
        BlockFamily::PlusHalf => {
            if block.basis[0].degree != p {
                return None;
            }
            let c = block.a_times_a_plus_one();
            let channels = block
                .gammas
                .iter()
                .zip(&block.eigvecs)
                .map(|(g, v)| Channel { dir: *v, c: g * (g + 1.0), b: *g, nu: (g + 0.5).abs(), gamma: Some(*g) })
                .collect();
            Some(base(SystemKind::Plus, block.basis.iter().map(|v| v.slot).collect(), m, c, channels, vec![0, 1]))
        }
        BlockFamily::Exceptional => {
            if block.basis[0].degree != p {
                return None;
            }
            let g = block.gammas[0];
            let slot = block.basis[0].slot;
            let kind = match slot {
                Slot::Alpha => SystemKind::ExceptionalAlpha,
                Slot::Beta => SystemKind::ExceptionalBeta,
            };
            Some(base(
                kind,
                vec![slot],
                [[g, 0.0], [0.0, 0.0]],
                [[g * (g + 1.0), 0.0], [0.0, 0.0]],
                vec![Channel { dir: [1.0, 0.0], c: g * (g + 1.0), b: g, nu: (g + 0.5).abs(), gamma: Some(g) }],
                vec![0],
            ))
        }
    }
}

/// All radial systems in total degree `p` from sphere modes with `μ² <= mu_sq_max`.
pub fn radial_systems(n: usize, p: usize, mu_sq_max: f64, model: &MultiplicityModel) -> Result<Vec<RadialSystem>> {
    Ok(blocks_in_degree(n, p, mu_sq_max, model)?
        .iter()
        .filter_map(|b| from_block(b, p))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum End {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundaryCondition {
    pub kind: BoundaryKind,
    pub location: End,
}

#[derive(Debug, Clone)]
pub struct RadialProblem {
    pub system: RadialSystem,
    pub profile: Profile,
    pub bcs: [BoundaryCondition; 2],
    pub lambda_max: f64,
}

impl RadialProblem {
    pub fn new(system: RadialSystem, profile: Profile, lambda_max: f64) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
        }
        profile.validate()?;
        let bcs = [
            BoundaryCondition { kind: profile.left.kind(), location: End::Left },
            BoundaryCondition { kind: profile.right.kind(), location: End::Right },
        ];
        let p = RadialProblem { system, profile, bcs, lambda_max };
        for bc in p.bcs {
            p.end_subspace(bc.location)?;
        }
        Ok(p)
    }

    pub fn bc(&self, end: End) -> BoundaryKind {
        match end {
            End::Left => self.bcs[0].kind,
            End::Right => self.bcs[1].kind,
        }
    }

    fn end_orientation(&self, end: End) -> Orientation {
        match end {
            End::Left => self.profile.segments[0].orientation,
            End::Right => self.profile.segments.last().unwrap().orientation,
        }
    }

    /// Orthonormal basis of the admissible values of `u` at a non-tip end; the
    /// flux `G` must be orthogonal to it.
    pub fn end_subspace(&self, end: End) -> Result<Vec<[f64; 2]>> {
        let sys = &self.system;
        let d = sys.dim();
        let unit = |i: usize| {
            let mut e = [0.0; 2];
            e[i] = 1.0;
            e
        };
        match self.bc(end) {
            BoundaryKind::RegularTip => Ok(Vec::new()),
            BoundaryKind::DirichletLike => Ok(Vec::new()),
            BoundaryKind::Absolute => {
                Ok((0..d).filter(|&i| sys.slots[i] == Slot::Alpha).map(unit).collect())
            }
            BoundaryKind::Aps => {
                if !sys.is_aligned() {
                    return Err(Error::Unsupported(format!(
                        "APS condition needs a full block of A, got {}",
                        sys.label()
                    )));
                }
                // exterior datum R w with R flipping β must lie in the γ > 0 span
                let s = sys.orientation_signs(self.end_orientation(end));
                Ok(sys
                    .channels
                    .iter()
                    .filter(|c| c.gamma.unwrap() > 0.0)
                    .map(|c| {
                        let mut v = [0.0; 2];
                        for i in 0..d {
                            let refl = if sys.slots[i] == Slot::Beta { -1.0 } else { 1.0 };
                            v[i] = s[i] * refl * c.dir[i];
                        }
                        v
                    })
                    .collect())
            }
        }
    }
}

/// One computed eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigEntry {
    pub lambda: f64,
    /// FEM: estimated absolute error after extrapolation.
    pub error_estimate: Option<f64>,
    /// Secular method: final bisection bracket.
    pub bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigList {
    pub system: String,
    pub method: &'static str,
    pub entries: Vec<EigEntry>,
    /// Clustered or unresolved roots that need adjudication.
    pub flags: Vec<String>,
}

impl EigList {
    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }
}

/// Two solutions of `-u'' + (ν² - 1/4)u/r² = λu` at `r`: the regular branch
/// `f` and the singular one `g`, with derivatives. True values carry the
/// factors `e^{ln_f}` and `e^{ln_g}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fundamental {
    pub f: f64,
    pub fp: f64,
    pub g: f64,
    pub gp: f64,
    pub ln_f: f64,
    pub ln_g: f64,
}

impl Fundamental {
    /// `f g' - f' g` (exactly `2/π` for `λ > 0`, `-2ν` at `λ = 0`).
    pub fn wronskian(&self) -> f64 {
        (self.f * self.gp - self.fp * self.g) * (self.ln_f + self.ln_g).exp()
    }
}

/// `{√r J_ν(√λ r), √r Y_ν(√λ r)}` for `λ > 0`, `{r^{1/2+ν}, r^{1/2-ν}}` for `λ = 0`.
pub fn fundamental(nu: f64, lambda: f64, r: f64) -> Result<Fundamental> {
    if lambda < 0.0 {
        return Err(Error::Domain(format!("negative lambda {lambda}")));
    }
    if r <= 0.0 {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if lambda == 0.0 && nu < 1e-12 {
        // {√r, √r ln r}
        let lr = r.ln();
        return Ok(Fundamental {
            f: 1.0,
            fp: 0.5 / r,
            g: lr,
            gp: (0.5 * lr + 1.0) / r,
            ln_f: 0.5 * lr,
            ln_g: 0.5 * lr,
        });
    }
    if lambda == 0.0 {
        let lr = r.ln();
        return Ok(Fundamental {
            f: 1.0,
            fp: (0.5 + nu) / r,
            g: 1.0,
            gp: (0.5 - nu) / r,
            ln_f: (0.5 + nu) * lr,
            ln_g: (0.5 - nu) * lr,
        });
    }
    let k = lambda.sqrt();
    let b = bessel_pair(nu, k * r)?;
    let sr = r.sqrt();
    Ok(Fundamental {
        f: sr * b.j,
        fp: b.j / (2.0 * sr) + sr * k * b.jp,
        g: sr * b.y,
        gp: b.y / (2.0 * sr) + sr * k * b.yp,
        ln_f: b.ln_scale_j,
        ln_g: b.ln_scale_y,
    })
}

/// Solution basis of `-u'' + γ(γ+1)u/r² = λu`; see [`ChannelBasis`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelBasis {
    /// Columns `(u, u')` of the two basis solutions.
    pub values: [[f64; 2]; 2],
    /// Index of the regular (Friedrichs) branch.
    pub regular: usize,
    /// Indicial exponents of the two columns at `r → 0`.
    pub exponents: [f64; 2],
}

/// For `λ > 0` the columns are `√r J_ν(√λ r)`, `√r Y_ν(√λ r)`; for `λ = 0`
/// they are `r^{γ+1}`, `r^{-γ}`. `ν = |γ + 1/2|`.
pub fn channel_fundamental(gamma: f64, lambda: f64, r: f64) -> Result<ChannelBasis> {
    let nu = (gamma + 0.5).abs();
    let fu = fundamental(nu, lambda, r)?;
    let (ef, eg) = (fu.ln_f.exp(), fu.ln_g.exp());
    let reg_col = [fu.f * ef, fu.fp * ef];
    let sing_col = [fu.g * eg, fu.gp * eg];
    if lambda > 0.0 {
        return Ok(ChannelBasis {
            values: [reg_col, sing_col],
            regular: 0,
            exponents: [0.5 + nu, 0.5 - nu],
        });
    }
    // r^{γ+1} is the regular branch exactly when γ + 1 > -γ
    let exps = [gamma + 1.0, -gamma];
    let cols = if gamma + 1.0 >= -gamma { [reg_col, sing_col] } else { [sing_col, reg_col] };
    let regular = if exps[0] > exps[1] { 0 } else { 1 };
    Ok(ChannelBasis { values: cols, regular, exponents: exps })
}
