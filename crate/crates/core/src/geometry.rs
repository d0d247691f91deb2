//! Piecewise-conical radial profiles.
//!
//! A profile is a chain of segments laid out along an arclength coordinate `t`.
//! On each segment the metric is `dr² + r²h` with `r = r_lo .. r_hi`; an `Up`
//! segment has `dr/dt = +1`, a `Down` segment `dr/dt = -1`. Segments meet at equal
//! radius. A change of orientation is a reflection seam (`RadialMax` or
//! `RadialMin`), across which the normal component of a form changes sign.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const RADIUS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Up,
    Down,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Up => 1.0,
            Orientation::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Up => Orientation::Down,
            Orientation::Down => Orientation::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r_lo: f64,
    pub r_hi: f64,
    pub orientation: Orientation,
}

impl Segment {
    pub fn up(r_lo: f64, r_hi: f64) -> Self {
        Segment { r_lo, r_hi, orientation: Orientation::Up }
    }

    pub fn down(r_hi: f64, r_lo: f64) -> Self {
        Segment { r_lo, r_hi, orientation: Orientation::Down }
    }

    pub fn length(&self) -> f64 {
        self.r_hi - self.r_lo
    }

    /// Radius where the segment starts (smaller `t`).
    pub fn r_start(&self) -> f64 {
        match self.orientation {
            Orientation::Up => self.r_lo,
            Orientation::Down => self.r_hi,
        }
    }

    /// Radius where the segment ends (larger `t`).
    pub fn r_end(&self) -> f64 {
        match self.orientation {
            Orientation::Up => self.r_hi,
            Orientation::Down => self.r_lo,
        }
    }

    /// Radius at local arclength `s ∈ [0, length]` from the start.
    pub fn radius_at(&self, s: f64) -> f64 {
        self.r_start() + self.orientation.sign() * s
    }

    fn reversed(&self) -> Self {
        Segment { orientation: self.orientation.flipped(), ..*self }
    }

    fn scaled(&self, c: f64) -> Self {
        Segment { r_lo: self.r_lo * c, r_hi: self.r_hi * c, ..*self }
    }
}

/// Boundary condition attached to an exposed end of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Friedrichs (regular branch) condition at a cone tip.
    RegularTip,
    /// Absolute conditions `i_ν φ = 0`, `i_ν dφ = 0`.
    Absolute,
    /// `Π_{<0}` of the boundary data vanishes.
    Aps,
    /// All components vanish.
    DirichletLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Tip,
    Boundary(BoundaryKind),
}

impl Endpoint {
    pub fn kind(self) -> BoundaryKind {
        match self {
            Endpoint::Tip => BoundaryKind::RegularTip,
            Endpoint::Boundary(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeamKind {
    RadialMax,
    RadialMin,
    /// Same orientation on both sides; only a subdivision point.
    Smooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Seam {
    /// Index of the segment that starts at this seam.
    pub index: usize,
    pub t: f64,
    pub radius: f64,
    pub kind: SeamKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub label: String,
    pub segments: Vec<Segment>,
    pub left: Endpoint,
    pub right: Endpoint,
    /// Index of the first segment belonging to the outer piece of a connected sum.
    #[serde(default)]
    pub glue: Option<usize>,
}

impl Profile {
    pub fn new(label: impl Into<String>, segments: Vec<Segment>, left: Endpoint, right: Endpoint) -> Result<Self> {
        let p = Profile { label: label.into(), segments, left, right, glue: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProfile(format!("{}: {m}", self.label)));
        if self.segments.is_empty() {
            return bad("no segments".into());
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.r_lo.is_finite() && s.r_hi.is_finite()) || s.r_lo < 0.0 || s.r_hi <= s.r_lo {
                return bad(format!("segment {i} has invalid radii [{}, {}]", s.r_lo, s.r_hi));
            }
        }
        for (i, w) in self.segments.windows(2).enumerate() {
            let (a, b) = (w[0].r_end(), w[1].r_start());
            if (a - b).abs() > RADIUS_TOL * a.max(b) {
                return bad(format!("segments {i} and {} meet at different radii {a} and {b}", i + 1));
            }
            if a <= 0.0 {
                return bad(format!("interior seam after segment {i} at zero radius"));
            }
        }
        let ends = [
            (self.left, self.segments[0].r_start(), "left"),
            (self.right, self.segments.last().unwrap().r_end(), "right"),
        ];
        for (ep, r, side) in ends {
            match ep {
                Endpoint::Tip if r != 0.0 => return bad(format!("{side} tip at nonzero radius {r}")),
                Endpoint::Boundary(BoundaryKind::RegularTip) => {
                    return bad(format!("{side} boundary declared as a tip condition"))
                }
                Endpoint::Boundary(_) if r <= 0.0 => {
                    return bad(format!("{side} boundary at zero radius"))
                }
                _ => {}
            }
        }
        if let Some(g) = self.glue {
            if g == 0 || g >= self.segments.len() {
                return bad(format!("glue index {g} out of range"));
            }
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn r_max(&self) -> f64 {
        self.segments.iter().map(|s| s.r_hi).fold(0.0, f64::max)
    }

    /// Arclength at the start of each segment, plus the total length.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut t = vec![0.0];
        for s in &self.segments {
            t.push(t.last().unwrap() + s.length());
        }
        t
    }

    pub fn seams(&self) -> Vec<Seam> {
        let bp = self.breakpoints();
        self.segments
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let kind = match (w[0].orientation, w[1].orientation) {
                    (Orientation::Up, Orientation::Down) => SeamKind::RadialMax,
                    (Orientation::Down, Orientation::Up) => SeamKind::RadialMin,
                    _ => SeamKind::Smooth,
                };
                Seam { index: i + 1, t: bp[i + 1], radius: w[0].r_end(), kind }
            })
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.left == Endpoint::Tip && self.right == Endpoint::Tip
    }

    pub fn scale(&self, c: f64) -> Result<Profile> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("scale factor must be positive, got {c}")));
        }
        Ok(Profile {
            label: format!("{}*{c}", self.label),
            segments: self.segments.iter().map(|s| s.scaled(c)).collect(),
            ..self.clone()
        })
    }

    /// The same manifold traversed in the opposite direction.
    pub fn reversed(&self) -> Profile {
        Profile {
            label: self.label.clone(),
            segments: self.segments.iter().rev().map(Segment::reversed).collect(),
            left: self.right,
            right: self.left,
            glue: self.glue.map(|g| self.segments.len() - g),
        }
    }

    /// Split every segment into `pieces` equal parts joined by smooth seams.
    pub fn refined(&self, pieces: usize) -> Profile {
        let mut segs = Vec::new();
        let mut glue = None;
        for (i, s) in self.segments.iter().enumerate() {
            if Some(i) == self.glue {
                glue = Some(segs.len());
            }
            let h = s.length() / pieces as f64;
            for j in 0..pieces {
                let (a, b) = (s.r_lo + j as f64 * h, s.r_lo + (j + 1) as f64 * h);
                let b = if j + 1 == pieces { s.r_hi } else { b };
                let piece = Segment { r_lo: a, r_hi: b, orientation: s.orientation };
                segs.push(piece);
            }
            if s.orientation == Orientation::Down {
                let n = segs.len();
                segs[n - pieces..].reverse();
            }
        }
        Profile { segments: segs, glue, ..self.clone() }
    }

    /// Volume of the model with cross-section the round `Sⁿ`.
    pub fn volume(&self, n: usize) -> f64 {
        let m = (n + 1) as f64;
        let c = sphere_area(n);
        self.segments.iter().map(|s| c * (s.r_hi.powf(m) - s.r_lo.powf(m)) / m).sum()
    }

    /// The exactly conical band of arclength `width` next to the boundary at the
    /// given side, as a radius interval.
    pub fn collar(&self, width: f64, left: bool) -> Option<(f64, f64)> {
        let (ep, seg) = if left {
            (self.left, self.segments[0])
        } else {
            (self.right, *self.segments.last().unwrap())
        };
        if !matches!(ep, Endpoint::Boundary(_)) || seg.length() < width {
            return None;
        }
        let r0 = if left { seg.r_start() } else { seg.r_end() };
        let inward = if left { seg.orientation.sign() } else { -seg.orientation.sign() };
        let r1 = r0 + inward * width;
        Some((r0.min(r1), r0.max(r1)))
    }
}

/// Area of the unit `Sⁿ`: `2π^{(n+1)/2}/Γ((n+1)/2)`.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ at integer and half-integer points
    let m = n + 1;
    let gamma_half_m = if m % 2 == 0 {
        (1..m / 2).map(|k| k as f64).product::<f64>()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < 0.5 * m as f64 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    };
    2.0 * PI.powf(0.5 * m as f64) / gamma_half_m
}

/// Parameters of the named model profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Double cone with equator radius `radius`.
    Spindle { radius: f64 },
    /// Spindle of equator `radius` with the ball of radius `cut` about one tip removed.
    TruncatedSpindle { radius: f64, cut: f64 },
    /// Cone over the sphere of radius `radius`, with a boundary there.
    UnitCone { radius: f64 },
    /// Annular cone between radii `inner < outer`.
    Annulus { inner: f64, outer: f64 },
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{what} must be positive, got {x}")))
    }
}

pub fn spindle(radius: f64) -> Result<Profile> {
    positive(radius, "spindle radius")?;
    Profile::new(
        format!("spindle({radius})"),
        vec![Segment::up(0.0, radius), Segment::down(radius, 0.0)],
        Endpoint::Tip,
        Endpoint::Tip,
    )
}

pub fn truncated_spindle(radius: f64, cut: f64) -> Result<Profile> {
    positive(cut, "truncation radius")?;
    if radius <= cut {
        return Err(Error::InvalidProfile(format!(
            "truncated spindle needs radius > cut, got {radius} <= {cut}"
        )));
    }
    Profile::new(
        format!("truncated_spindle({radius},{cut})"),
        vec![Segment::up(cut, radius), Segment::down(radius, 0.0)],
        Endpoint::Boundary(BoundaryKind::Absolute),
        Endpoint::Tip,
    )
}

pub fn unit_cone(radius: f64) -> Result<Profile> {
    positive(radius, "cone radius")?;
    Profile::new(
        format!("cone({radius})"),
        vec![Segment::up(0.0, radius)],
        Endpoint::Tip,
        Endpoint::Boundary(BoundaryKind::Absolute),
    )
}

pub fn annulus(inner: f64, outer: f64) -> Result<Profile> {
    positive(inner, "annulus inner radius")?;
    if outer <= inner {
        return Err(Error::InvalidProfile(format!("annulus needs inner < outer, got {inner}, {outer}")));
    }
    Profile::new(
        format!("annulus({inner},{outer})"),
        vec![Segment::up(inner, outer)],
        Endpoint::Boundary(BoundaryKind::Absolute),
        Endpoint::Boundary(BoundaryKind::Absolute),
    )
}

pub fn build_profile(spec: &ModelSpec) -> Result<Profile> {
    match *spec {
        ModelSpec::Spindle { radius } => spindle(radius),
        ModelSpec::TruncatedSpindle { radius, cut } => truncated_spindle(radius, cut),
        ModelSpec::UnitCone { radius } => unit_cone(radius),
        ModelSpec::Annulus { inner, outer } => annulus(inner, outer),
    }
}

/// `(M₁ − B(p₀, ε)) ∪ ε·(M₂ − B(1))`, laid out from the tip of `M₂` to the far end of `M₁`.
///
/// `m1` must start with a tip whose first segment reaches radius `2ε`; `m2` must
/// start with a boundary at radius 1.
pub fn connected_sum_profile(m1: &Profile, m2: &Profile, eps: f64) -> Result<Profile> {
    let first = m1.segments[0];
    if m1.left != Endpoint::Tip || first.orientation != Orientation::Up {
        return Err(Error::InvalidProfile(format!("{} does not start with a cone tip", m1.label)));
    }
    if !(eps > 0.0 && 2.0 * eps <= first.r_hi && eps < 0.5) {
        return Err(Error::Domain(format!(
            "epsilon {eps} outside (0, min(1, R1)/2) for {}",
            m1.label
        )));
    }
    let m2_start = m2.segments[0];
    if !matches!(m2.left, Endpoint::Boundary(_))
        || m2_start.orientation != Orientation::Up
        || (m2_start.r_lo - 1.0).abs() > RADIUS_TOL
    {
        return Err(Error::InvalidProfile(format!(
            "{} does not start with a boundary at radius 1",
            m2.label
        )));
    }
    let inner = m2.reversed().scale(eps)?;
    let mut segments = inner.segments;
    let glue = segments.len();
    segments.push(Segment::up(eps, first.r_hi));
    segments.extend_from_slice(&m1.segments[1..]);
    let p = Profile {
        label: format!("{}#{}@{eps}", m1.label, m2.label),
        segments,
        left: inner.left,
        right: m1.right,
        glue: Some(glue),
    };
    p.validate()?;
    Ok(p)
}

/// The McGowan cover `U₁ = M₁(ε)`, `U₂ = ε·(M₂(1) ∪ 𝒞_{1,2})`, `U₁₂ = ε·𝒞_{1,2}`,
/// each with absolute conditions on its cuts.
pub fn cover_profiles(m_eps: &Profile, eps: f64) -> Result<(Profile, Profile, Profile)> {
    let g = m_eps
        .glue
        .ok_or_else(|| Error::InvalidProfile(format!("{} is not a connected sum", m_eps.label)))?;
    let neck = m_eps.segments[g];
    if (neck.r_lo - eps).abs() > RADIUS_TOL * eps || neck.r_hi < 2.0 * eps {
        return Err(Error::Domain(format!("epsilon {eps} does not match the gluing radius {}", neck.r_lo)));
    }
    let abs = Endpoint::Boundary(BoundaryKind::Absolute);
    let u1 = Profile::new(format!("U1@{eps}"), m_eps.segments[g..].to_vec(), abs, m_eps.right)?;
    let mut seg2 = m_eps.segments[..g].to_vec();
    seg2.push(Segment::up(eps, 2.0 * eps));
    let u2 = Profile::new(format!("U2@{eps}"), seg2, m_eps.left, abs)?;
    let u12 = Profile { label: format!("U12@{eps}"), ..annulus(eps, 2.0 * eps)? };
    Ok((u1, u2, u12))
}

/// `[λe^{−(n+2p)η}, λe^{(n+2p)η}]`.
pub fn dodziuk_interval(lambda: f64, eta: f64, n: usize, p: usize) -> Result<(f64, f64)> {
    if !(lambda >= 0.0 && eta >= 0.0) {
        return Err(Error::Domain(format!("need lambda >= 0 and eta >= 0, got {lambda}, {eta}")));
    }
    let f = ((n + 2 * p) as f64 * eta).exp();
    Ok((lambda / f, lambda * f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spindle_shape() {
        let s = spindle(1.0).unwrap();
        assert_eq!(s.segments.len(), 2);
        let seams = s.seams();
        assert_eq!(seams.len(), 1);
        assert_eq!(seams[0].kind, SeamKind::RadialMax);
        assert!(s.is_closed());
        assert_eq!(s.scale(0.3).unwrap().segments, spindle(0.3).unwrap().segments);
    }

    #[test]
    fn truncated_spindle_collar() {
        let m2 = truncated_spindle(2.0, 1.0).unwrap();
        assert_eq!(m2.collar(0.5, true), Some((1.0, 1.5)));
        assert_eq!(m2.collar(0.5, false), None);
        assert!(truncated_spindle(1.0, 1.0).is_err());
    }

    #[test]
    fn connected_sum_chain() {
        let m = connected_sum_profile(&spindle(1.0).unwrap(), &truncated_spindle(2.0, 1.0).unwrap(), 0.1).unwrap();
        let mut chain = vec![m.segments[0].r_start()];
        chain.extend(m.segments.iter().map(|s| s.r_end()));
        let expect = [0.0, 0.2, 0.1, 1.0, 0.0];
        for (a, e) in chain.iter().zip(expect) {
            assert!((a - e).abs() < 1e-15);
        }
        let kinds: Vec<_> = m.seams().iter().map(|s| (s.kind, s.radius)).collect();
        assert_eq!(kinds.len(), 3);
        assert_eq!(kinds[0].0, SeamKind::RadialMax);
        assert_eq!(kinds[1].0, SeamKind::RadialMin);
        assert_eq!(kinds[2].0, SeamKind::RadialMax);
        assert!((kinds[1].1 - 0.1).abs() < 1e-15);
        assert!(m.is_closed());
        assert_eq!(m.glue, Some(2));
    }

    #[test]
    fn volume_converges() {
        let m1 = spindle(1.0).unwrap();
        let m2 = truncated_spindle(2.0, 1.0).unwrap();
        let v1 = m1.volume(2);
        assert!((v1 - 2.0 * 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        let mut last = f64::INFINITY;
        for eps in [0.2, 0.1, 0.05, 0.025, 0.0125] {
            let d = (connected_sum_profile(&m1, &m2, eps).unwrap().volume(2) - v1).abs();
            assert!(d < last);
            last = d;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert!((sphere_area(1) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn covers() {
        let m = connected_sum_profile(&spindle(1.0).unwrap(), &truncated_spindle(2.0, 1.0).unwrap(), 0.1).unwrap();
        let (u1, u2, u12) = cover_profiles(&m, 0.1).unwrap();
        assert_eq!(u12.segments, vec![Segment::up(0.1, 0.2)]);
        assert_eq!(u12.left, Endpoint::Boundary(BoundaryKind::Absolute));
        assert_eq!(u12.right, Endpoint::Boundary(BoundaryKind::Absolute));
        // U1 ∪ U2 covers the arclength of M_ε with overlap of length ε
        assert!((u1.length() + u2.length() - m.length() - 0.1).abs() < 1e-14);
        assert_eq!(u1.segments[0].r_lo, 0.1);
        assert_eq!(u2.segments.last().unwrap().r_hi, 0.2);
    }

    #[test]
    fn dodziuk_examples() {
        assert_eq!(dodziuk_interval(2.0, 0.0, 2, 1).unwrap(), (2.0, 2.0));
        let (lo, hi) = dodziuk_interval(1.0, 0.1, 2, 1).unwrap();
        assert!((lo - (-0.4f64).exp()).abs() < 1e-15);
        assert!((hi - 0.4f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn refinement_keeps_geometry() {
        let m = connected_sum_profile(&spindle(1.0).unwrap(), &truncated_spindle(2.0, 1.0).unwrap(), 0.1).unwrap();
        let r = m.refined(3);
        r.validate().unwrap();
        assert_eq!(r.segments.len(), 12);
        assert!((r.length() - m.length()).abs() < 1e-14);
        assert_eq!(r.glue, Some(6));
        assert_eq!(r.segments[6].r_lo, 0.1);
    }

    #[test]
    fn invalid_profiles() {
        assert!(spindle(-1.0).is_err());
        assert!(annulus(0.2, 0.1).is_err());
        let bad = Profile::new("x", vec![Segment::up(0.0, 1.0), Segment::down(0.9, 0.0)], Endpoint::Tip, Endpoint::Tip);
        assert!(bad.is_err());
        let m1 = spindle(1.0).unwrap();
        let m2 = truncated_spindle(2.0, 1.0).unwrap();
        assert!(connected_sum_profile(&m1, &m2, 0.6).is_err());
        assert!(connected_sum_profile(&m2, &m1, 0.1).is_err());
    }
}
