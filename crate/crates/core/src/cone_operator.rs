//! The tangential operator `A` of the cone `dr² + r²h` over `Sⁿ`.
//!
//! In the coordinates `σ = (β, α)` of a form `dr∧r^{-(n/2-deg β)}β + r^{-(n/2-deg α)}α`,
//! `A = [[n/2 - P, -D₀], [-D₀, P - n/2]]` with `P` the sphere degree and `D₀ = d + δ`
//! of the sphere. On the span of a coexact eigenform `η` (`δη = 0`, `Δη = μ²η`) and
//! `dη/μ` it splits into 2×2 symmetric blocks:
//!
//! * `MinusHalf`: `v₁ = (0, η)` (degree q), `v₄' = (dη/μ, 0)` (degree q+2),
//!   matrix `[[q-n/2, -μ], [-μ, n/2-q-1]]`, eigenvalues `-1/2 ± s`;
//! * `PlusHalf`: `v₂ = (0, dη/μ)`, `v₃ = (η, 0)` (both degree q+1),
//!   matrix `[[q+1-n/2, -μ], [-μ, n/2-q]]`, eigenvalues `1/2 ± s`;
//!
//! where `s = √(μ² + ((n-1)/2 - q)²)`. Harmonic sphere forms give 1×1 blocks
//! with `γ = ±n/2`.

use serde::Serialize;

use crate::sphere_modes::{enumerate_sphere_modes, MultiplicityModel, SphereMode};
use crate::Result;

pub type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BlockFamily {
    MinusHalf,
    PlusHalf,
    Exceptional,
}

impl BlockFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockFamily::MinusHalf => "minus_half",
            BlockFamily::PlusHalf => "plus_half",
            BlockFamily::Exceptional => "exceptional",
        }
    }
}

/// Which slot of `σ = (β, α)` a basis vector occupies. `β` is the normal
/// (`dr∧`) part and changes sign when the radial direction is reversed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Slot {
    Beta,
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BasisVector {
    pub slot: Slot,
    /// Total form degree on the cone.
    pub degree: usize,
}

/// One invariant block of `A` (dimension 1 or 2).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ABlock {
    pub source: SphereMode,
    pub family: BlockFamily,
    pub basis: Vec<BasisVector>,
    /// Only the leading `dim × dim` corner is meaningful.
    pub matrix: Mat2,
    /// Eigenvalues in decreasing order.
    pub gammas: Vec<f64>,
    /// Orthonormal eigenvectors in block coordinates, matching `gammas`.
    pub eigvecs: Vec<[f64; 2]>,
}

impl ABlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `A(A+1)` in block coordinates.
    pub fn a_times_a_plus_one(&self) -> Mat2 {
        let m = &self.matrix;
        let d = self.dim();
        let mut out = [[0.0; 2]; 2];
        for i in 0..d {
            for j in 0..d {
                let mut acc = m[i][j];
                for l in 0..d {
                    acc += m[i][l] * m[l][j];
                }
                out[i][j] = acc;
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.degree).collect()
    }
}

/// Closed-form eigen-decomposition of a symmetric 2×2 matrix, eigenvalues
/// in decreasing order, eigenvectors with first nonzero entry positive.
pub fn symmetric_eigen2(m: &Mat2) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (m[0][0], m[0][1], m[1][1]);
    let mean = 0.5 * (a + d);
    let rad = (0.5 * (a - d)).hypot(b);
    let vals = [mean + rad, mean - rad];
    if b == 0.0 {
        return if a >= d {
            ([a, d], [[1.0, 0.0], [0.0, 1.0]])
        } else {
            ([d, a], [[0.0, 1.0], [1.0, 0.0]])
        };
    }
    let mut vecs = [[0.0; 2]; 2];
    for (k, &lam) in vals.iter().enumerate() {
        // two algebraically equivalent choices; take the better conditioned one
        let c1 = [b, lam - a];
        let c2 = [lam - d, b];
        let v = if c1[0].hypot(c1[1]) >= c2[0].hypot(c2[1]) { c1 } else { c2 };
        let norm = v[0].hypot(v[1]);
        let mut v = [v[0] / norm, v[1] / norm];
        let lead = if v[0] != 0.0 { v[0] } else { v[1] };
        if lead < 0.0 {
            v = [-v[0], -v[1]];
        }
        vecs[k] = v;
    }
    (vals, vecs)
}

/// `s = √(μ² + ((n-1)/2 - q)²)`.
pub fn block_radius(n: usize, q: usize, mu_sq: f64) -> f64 {
    let shift = 0.5 * (n as f64 - 1.0) - q as f64;
    (mu_sq + shift * shift).sqrt()
}

/// Spectrum of `A` by direct substitution: `offset ± s` with offset `±1/2`.
pub fn gamma_formula(n: usize, q: usize, mu_sq: f64, family: BlockFamily) -> [f64; 2] {
    let s = block_radius(n, q, mu_sq);
    let offset = match family {
        BlockFamily::MinusHalf => -0.5,
        BlockFamily::PlusHalf => 0.5,
        BlockFamily::Exceptional => unreachable!("exceptional blocks have no formula pair"),
    };
    [offset + s, offset - s]
}

fn two_by_two(source: &SphereMode, family: BlockFamily, basis: Vec<BasisVector>, matrix: Mat2) -> ABlock {
    let (vals, vecs) = symmetric_eigen2(&matrix);
    ABlock {
        source: source.clone(),
        family,
        basis,
        matrix,
        gammas: vals.to_vec(),
        eigvecs: vecs.to_vec(),
    }
}

fn one_by_one(source: &SphereMode, slot: Slot, degree: usize, gamma: f64) -> ABlock {
    ABlock {
        source: source.clone(),
        family: BlockFamily::Exceptional,
        basis: vec![BasisVector { slot, degree }],
        matrix: [[gamma, 0.0], [0.0, 0.0]],
        gammas: vec![gamma],
        eigvecs: vec![[1.0, 0.0]],
    }
}

/// Invariant blocks of `A` generated by one sphere mode.
pub fn build_blocks(mode: &SphereMode) -> Vec<ABlock> {
    let n = mode.n;
    let half = 0.5 * n as f64;
    if mode.is_harmonic() {
        return if mode.q == 0 {
            vec![
                one_by_one(mode, Slot::Alpha, 0, -half),
                one_by_one(mode, Slot::Beta, 1, half),
            ]
        } else {
            vec![
                one_by_one(mode, Slot::Alpha, n, half),
                one_by_one(mode, Slot::Beta, n + 1, -half),
            ]
        };
    }
    let q = mode.q;
    let qf = q as f64;
    let mu = mode.mu();
    let minus = two_by_two(
        mode,
        BlockFamily::MinusHalf,
        vec![
            BasisVector { slot: Slot::Alpha, degree: q },
            BasisVector { slot: Slot::Beta, degree: q + 2 },
        ],
        [[qf - half, -mu], [-mu, half - qf - 1.0]],
    );
    let plus = two_by_two(
        mode,
        BlockFamily::PlusHalf,
        vec![
            BasisVector { slot: Slot::Alpha, degree: q + 1 },
            BasisVector { slot: Slot::Beta, degree: q + 1 },
        ],
        [[qf + 1.0 - half, -mu], [-mu, half - qf]],
    );
    vec![minus, plus]
}

/// One scalar radial channel: an eigenvalue of `A` reaching total degree `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaChannel {
    pub gamma: f64,
    pub degree: usize,
    pub multiplicity: u64,
    pub block: ABlock,
    pub eigvec: [f64; 2],
}

impl GammaChannel {
    /// `γ(γ+1)`, the coefficient of `1/r²` in the radial equation.
    pub fn potential(&self) -> f64 {
        self.gamma * (self.gamma + 1.0)
    }

    /// Bessel order `|γ + 1/2|`.
    pub fn bessel_order(&self) -> f64 {
        (self.gamma + 0.5).abs()
    }
}

/// All blocks whose basis touches degree `p`, from modes with `μ² <= mu_sq_max`.
pub fn blocks_in_degree(
    n: usize,
    p: usize,
    mu_sq_max: f64,
    model: &MultiplicityModel,
) -> Result<Vec<ABlock>> {
    if p > n + 1 {
        return Err(crate::Error::Domain(format!("form degree p={p} exceeds n+1={}", n + 1)));
    }
    let modes = enumerate_sphere_modes(n, mu_sq_max, model)?;
    Ok(modes
        .iter()
        .flat_map(build_blocks)
        .filter(|b| b.basis.iter().any(|v| v.degree == p))
        .collect())
}

/// Channels of total degree `p` generated by modes with `μ² <= mu_sq_max`.
pub fn gamma_channels(
    n: usize,
    p: usize,
    mu_sq_max: f64,
    model: &MultiplicityModel,
) -> Result<Vec<GammaChannel>> {
    let blocks = blocks_in_degree(n, p, mu_sq_max, model)?;
    let mut out = Vec::new();
    for block in blocks {
        for (gamma, eigvec) in block.gammas.iter().zip(&block.eigvecs) {
            out.push(GammaChannel {
                gamma: *gamma,
                degree: p,
                multiplicity: block.source.multiplicity,
                block: block.clone(),
                eigvec: *eigvec,
            });
        }
    }
    Ok(out)
}

/// Spectral projectors `Π_{<0}` and `Π_{>0}` of `A`, block by block.
#[derive(Debug, Clone)]
pub struct ApsProjector {
    blocks: Vec<ABlock>,
}

impl ApsProjector {
    pub fn from_blocks(blocks: Vec<ABlock>) -> Self {
        ApsProjector { blocks }
    }

    pub fn blocks(&self) -> &[ABlock] {
        &self.blocks
    }

    fn project(&self, data: &[[f64; 2]], negative: bool) -> Vec<[f64; 2]> {
        assert_eq!(data.len(), self.blocks.len(), "one boundary datum per block");
        self.blocks
            .iter()
            .zip(data)
            .map(|(block, x)| {
                let mut out = [0.0; 2];
                for (g, v) in block.gammas.iter().zip(&block.eigvecs) {
                    if (*g < 0.0) == negative {
                        let c = v[0] * x[0] + v[1] * x[1];
                        out[0] += c * v[0];
                        out[1] += c * v[1];
                    }
                }
                out
            })
            .collect()
    }

    /// `Π_{<0}` applied to per-block coordinates.
    pub fn negative(&self, data: &[[f64; 2]]) -> Vec<[f64; 2]> {
        self.project(data, true)
    }

    /// `Π_{>0}` applied to per-block coordinates.
    pub fn positive(&self, data: &[[f64; 2]]) -> Vec<[f64; 2]> {
        self.project(data, false)
    }

    /// Whether a single channel is kept by `Π_{<0}`.
    pub fn selects_negative(channel: &GammaChannel) -> bool {
        channel.gamma < 0.0
    }
}

/// Projector built from the distinct blocks referenced by `channels`.
pub fn aps_projector(channels: &[GammaChannel]) -> ApsProjector {
    let mut blocks: Vec<ABlock> = Vec::new();
    for ch in channels {
        if !blocks.iter().any(|b| *b == ch.block) {
            blocks.push(ch.block.clone());
        }
    }
    ApsProjector::from_blocks(blocks)
}
