//! Möbius transformations and Schottky groups for surfaces of Euler
//! characteristic −1.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use twofloat::TwoFloat;

use crate::error::{Error, Result};

/// A real 2×2 matrix of unit determinant acting on the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moebius {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Moebius {
    pub const IDENTITY: Moebius = Moebius {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// Builds a matrix from entries, rescaling so that the determinant is 1.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidParameters(format!(
                "matrix determinant {det} is not positive"
            )));
        }
        let k = det.sqrt().recip();
        Ok(Moebius {
            a: a * k,
            b: b * k,
            c: c * k,
            d: d * k,
        })
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        Moebius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Action on a point of the boundary line. `None` stands for ∞.
    pub fn apply(&self, x: Option<f64>) -> Option<f64> {
        match x {
            None => (self.c != 0.0).then(|| self.a / self.c),
            Some(x) => {
                let den = self.c * x + self.d;
                (den != 0.0).then(|| (self.a * x + self.b) / den)
            }
        }
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Moebius) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }

    /// Same as `max_abs_diff`, but treats `M` and `−M` as equal.
    pub fn projective_diff(&self, other: &Moebius) -> f64 {
        let neg = Moebius {
            a: -other.a,
            b: -other.b,
            c: -other.c,
            d: -other.d,
        };
        self.max_abs_diff(other).min(self.max_abs_diff(&neg))
    }

    /// Translation length ℓ with 2cosh(ℓ/2) = |tr T|.
    pub fn trace_length(&self) -> Result<f64> {
        trace_to_length(self.trace())
    }

    /// `(T⁻¹)'(w₋)` at the repelling fixed point `w₋` of `T`, computed from
    /// the fixed points themselves rather than from the trace.
    pub fn fixed_point_multiplier(&self) -> Result<f64> {
        let t = self.trace().abs();
        if !(t > 2.0) {
            return Err(Error::NonHyperbolic { trace_abs: t });
        }
        let Moebius { a, b, c, d } = *self;
        if c == 0.0 {
            // Fixed points ∞ and b/(d − a); T acts as z ↦ (a/d) z + b/d.
            let ratio = a / d;
            return Ok(ratio.min(ratio.recip()));
        }
        // c w² + (d − a) w − b = 0, solved without cancellation.
        let bq = d - a;
        let disc = bq * bq + 4.0 * b * c;
        let q = -0.5 * (bq + bq.signum() * disc.sqrt());
        let roots = [q / c, -b / q];
        // (T⁻¹)'(w) = (a − c w)⁻²; the repelling point of T maximises |a − c w|.
        let denom = roots
            .iter()
            .filter(|w| w.is_finite())
            .map(|w| (a - c * w).abs())
            .fold(0.0_f64, f64::max);
        Ok(denom.powi(-2))
    }

    /// Isometric circle `|cz + d| = 1`, if `c ≠ 0`.
    pub fn isometric_circle(&self) -> Option<Disk> {
        (self.c != 0.0).then(|| Disk {
            center: -self.d / self.c,
            radius: self.c.abs().recip(),
        })
    }

    pub fn conjugate_by(&self, m: &Moebius) -> Moebius {
        *m * *self * m.inverse()
    }
}

impl Mul for Moebius {
    type Output = Moebius;

    fn mul(self, o: Moebius) -> Moebius {
        Moebius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }
}

/// Translation length from a trace: `ℓ = 2 log(x + √(x² − 1))`, `x = |t|/2`.
pub fn trace_to_length(trace: f64) -> Result<f64> {
    let x = 0.5 * trace.abs();
    if !(x > 1.0) {
        return Err(Error::NonHyperbolic {
            trace_abs: trace.abs(),
        });
    }
    if x > 1e8 {
        // x + √(x² − 1) = 2x (1 − 1/(4x²) + …); the correction is below ulp.
        return Ok(2.0 * ((2.0 * x).ln()));
    }
    Ok(2.0 * (x + ((x - 1.0) * (x + 1.0)).sqrt()).ln())
}

/// Word products in double-double arithmetic, with the generators taken as
/// exact. Long products of the generators cancel heavily (the entries grow
/// far faster than the trace), which costs plain `f64` products a few
/// hundred ulps of length.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExactProduct([TwoFloat; 4]);

impl ExactProduct {
    pub(crate) const IDENTITY: ExactProduct = ExactProduct([
        TwoFloat::from_f64(1.0),
        TwoFloat::from_f64(0.0),
        TwoFloat::from_f64(0.0),
        TwoFloat::from_f64(1.0),
    ]);

    pub(crate) fn times(&self, m: &Moebius) -> ExactProduct {
        let [a, b, c, d] = self.0;
        ExactProduct([
            a * m.a + b * m.c,
            a * m.b + b * m.d,
            c * m.a + d * m.c,
            c * m.b + d * m.d,
        ])
    }

    pub(crate) fn trace_length(&self) -> Result<f64> {
        let t = self.0[0] + self.0[3];
        trace_to_length(t.hi() + t.lo())
    }
}

/// Euclidean disk centred on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: f64,
    pub radius: f64,
}

impl Disk {
    /// Positive when the closed disks intersect.
    pub fn overlap(&self, other: &Disk) -> f64 {
        self.radius + other.radius - (self.center - other.center).abs()
    }
}

/// Surface parametrization a group was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceSpec {
    /// Three funnels glued to a pair of pants with boundary lengths ℓ₁, ℓ₂, ℓ₃.
    ThreeFunnel { l1: f64, l2: f64, l3: f64 },
    /// Genus one, one funnel: geodesic lengths ℓ₁, ℓ₂ meeting at angle φ.
    FunneledTorus { l1: f64, l2: f64, phi: f64 },
    /// Group given directly by generators.
    Generic { r: usize },
}

impl SurfaceSpec {
    pub fn generator_count(&self) -> usize {
        match self {
            SurfaceSpec::Generic { r } => *r,
            _ => 2,
        }
    }

    pub fn build(&self) -> Result<SchottkyGroup> {
        match *self {
            SurfaceSpec::ThreeFunnel { l1, l2, l3 } => SchottkyGroup::three_funnel(l1, l2, l3),
            SurfaceSpec::FunneledTorus { l1, l2, phi } => {
                SchottkyGroup::funneled_torus(l1, l2, phi)
            }
            SurfaceSpec::Generic { .. } => Err(Error::InvalidParameters(
                "generic surfaces are built from explicit generators".into(),
            )),
        }
    }

    /// Smallest generator length parameter.
    pub fn min_length(&self) -> Option<f64> {
        match *self {
            SurfaceSpec::ThreeFunnel { l1, l2, l3 } => Some(l1.min(l2).min(l3)),
            SurfaceSpec::FunneledTorus { l1, l2, .. } => Some(l1.min(l2)),
            SurfaceSpec::Generic { .. } => None,
        }
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceSpec::ThreeFunnel { l1, l2, l3 } => write!(f, "X:{l1},{l2},{l3}"),
            SurfaceSpec::FunneledTorus { l1, l2, phi } => write!(f, "Y:{l1},{l2},{phi}"),
            SurfaceSpec::Generic { r } => write!(f, "G:{r}"),
        }
    }
}

/// Parses a decimal or a rational multiple of π: `1.2`, `pi`, `pi/2.5`, `2pi/3`, `0.5*pi`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || Error::InvalidParameters(format!("cannot parse angle `{text}`"));
    let num = |s: &str| -> Result<f64> { s.trim().parse::<f64>().map_err(|_| bad()) };
    let Some(pos) = t.find("pi") else {
        return num(&t);
    };
    let head = t[..pos].trim().trim_end_matches('*');
    let tail = t[pos + 2..].trim();
    let coef = if head.is_empty() { 1.0 } else { num(head)? };
    let den = match tail.strip_prefix('/') {
        Some(rest) => num(rest)?,
        None if tail.is_empty() => 1.0,
        None => return Err(bad()),
    };
    Ok(coef * PI / den)
}

impl FromStr for SurfaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParameters(format!("surface spec `{s}`: {m}"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let parts: Vec<&str> = rest.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("expected three parameters"));
        }
        let len = |p: &str| -> Result<f64> {
            let v: f64 = p.parse().map_err(|_| bad("bad length"))?;
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(bad("lengths must be positive"))
            }
        };
        match kind.trim() {
            "X" | "x" => Ok(SurfaceSpec::ThreeFunnel {
                l1: len(parts[0])?,
                l2: len(parts[1])?,
                l3: len(parts[2])?,
            }),
            "Y" | "y" => {
                let phi = parse_angle(parts[2])?;
                if !(phi > 0.0 && phi < PI) {
                    return Err(bad("angle must lie in (0, pi)"));
                }
                Ok(SurfaceSpec::FunneledTorus {
                    l1: len(parts[0])?,
                    l2: len(parts[1])?,
                    phi,
                })
            }
            _ => Err(bad("kind must be X or Y")),
        }
    }
}

/// Free group on `r` hyperbolic generators, with the cyclic convention
/// `S_{j+r} = S_j⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchottkyGroup {
    spec: SurfaceSpec,
    /// `S_1 … S_r` followed by their inverses.
    letters: Vec<Moebius>,
}

impl SchottkyGroup {
    /// Group from explicit generators. Every generator must be hyperbolic.
    pub fn from_generators(gens: &[Moebius], spec: SurfaceSpec) -> Result<Self> {
        if gens.is_empty() {
            return Err(Error::InvalidParameters("no generators".into()));
        }
        for (i, g) in gens.iter().enumerate() {
            let scale = (g.a * g.d).abs() + (g.b * g.c).abs();
            if (g.det() - 1.0).abs() > 1e-13 * scale.max(1.0) {
                return Err(Error::InvalidParameters(format!(
                    "generator {} has determinant {}",
                    i + 1,
                    g.det()
                )));
            }
            g.trace_length()?;
        }
        let mut letters = gens.to_vec();
        letters.extend(gens.iter().map(Moebius::inverse));
        Ok(SchottkyGroup { spec, letters })
    }

    /// Generators pairing the disks `D_j` and `D_{j+r}`: `S_j` maps the
    /// exterior of `D_j` onto the interior of `D_{j+r}`.
    pub fn from_disks(disks: &[Disk]) -> Result<Self> {
        if disks.len() < 2 || !disks.len().is_multiple_of(2) {
            return Err(Error::InvalidParameters(
                "need an even, positive number of disks".into(),
            ));
        }
        let r = disks.len() / 2;
        let gens = (0..r)
            .map(|j| {
                let (p, q) = (disks[j], disks[j + r]);
                // z ↦ q.c − ρρ'/(z − p.c)
                Moebius::normalized(
                    q.center,
                    -p.center * q.center - p.radius * q.radius,
                    1.0,
                    -p.center,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(&gens, SurfaceSpec::Generic { r })
    }

    /// Pair of pants with funnels, `X(ℓ₁, ℓ₂, ℓ₃)`.
    pub fn three_funnel(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        for l in [l1, l2, l3] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "length {l} is not positive"
                )));
            }
        }
        let (c1, s1) = ((0.5 * l1).cosh(), (0.5 * l1).sinh());
        let (c2, s2) = ((0.5 * l2).cosh(), (0.5 * l2).sinh());
        // tr(S₁S₂⁻¹) = 2c₁c₂ − s₁s₂(a + 1/a). Only the negative branch
        // −2cosh(ℓ₃/2) has positive roots; in PSL(2,ℝ) the sign is immaterial.
        // k = a + 1/a; k − 2 is formed directly to avoid cancellation.
        let k_minus_2 = 2.0 * ((0.5 * (l1 - l2)).cosh() + (0.5 * l3).cosh()) / (s1 * s2);
        let k = 2.0 + k_minus_2;
        let root = (k_minus_2 * (k + 2.0)).sqrt();
        let a = 0.5 * (k + root);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameters(format!(
                "no positive solution of the trace equation for ({l1}, {l2}, {l3})"
            )));
        }
        let s1m = Moebius {
            a: c1,
            b: s1,
            c: s1,
            d: c1,
        };
        let s2m = Moebius {
            a: c2,
            b: a * s2,
            c: s2 / a,
            d: c2,
        };
        let group = Self::from_generators(
            &[s1m, s2m],
            SurfaceSpec::ThreeFunnel { l1, l2, l3 },
        )?;
        // The product trace cancels terms of size c₁c₂, so the residual is
        // measured against that scale.
        let t = (s1m * s2m.inverse()).trace().abs();
        let target = 2.0 * (0.5 * l3).cosh();
        let residual = (t - target) / (2.0 * c1 * c2 + target);
        if residual.abs() > 1e-12 {
            return Err(Error::InvalidParameters(format!(
                "trace equation residual {residual} too large"
            )));
        }
        Ok(group)
    }

    /// Funneled torus `Y(ℓ₁, ℓ₂, φ)`; fails unless the generators pass the
    /// disk check of [`SchottkyGroup::validate`].
    pub fn funneled_torus(l1: f64, l2: f64, phi: f64) -> Result<Self> {
        for l in [l1, l2] {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameters(format!(
                    "length {l} is not positive"
                )));
            }
        }
        if !(phi > 0.0 && phi < PI) {
            return Err(Error::InvalidParameters(format!(
                "angle {phi} outside (0, pi)"
            )));
        }
        let s1 = Moebius {
            a: (0.5 * l1).exp(),
            b: 0.0,
            c: 0.0,
            d: (-0.5 * l1).exp(),
        };
        let (ch, sh) = ((0.5 * l2).cosh(), (0.5 * l2).sinh());
        let (cp, sp) = (phi.cos(), phi.sin());
        let s2 = Moebius {
            a: ch - cp * sh,
            b: sp * sp * sh,
            c: sh,
            d: ch + cp * sh,
        };
        let group = Self::from_generators(&[s1, s2], SurfaceSpec::FunneledTorus { l1, l2, phi })?;
        group.validate()?;
        Ok(group)
    }

    pub fn spec(&self) -> &SurfaceSpec {
        &self.spec
    }

    /// Number of free generators `r`.
    pub fn rank(&self) -> usize {
        self.letters.len() / 2
    }

    /// `S_j` for `j ∈ 1..=2r`, with `S_{j+r} = S_j⁻¹`.
    pub fn generator(&self, j: usize) -> Result<Moebius> {
        if j == 0 || j > self.letters.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.letters.len(),
            });
        }
        Ok(self.letters[j - 1])
    }

    /// Translation length of the word `S_{σ₁} ⋯ S_{σₙ}`, with the product
    /// formed in double-double arithmetic.
    pub fn word_length(&self, letters: &[u8]) -> Result<f64> {
        letters
            .iter()
            .fold(ExactProduct::IDENTITY, |m, &j| m.times(&self.letters[j as usize - 1]))
            .trace_length()
    }

    /// Matrix of `S_{σ₁} ⋯ S_{σₙ}` for 1-based letters.
    pub fn word_matrix(&self, letters: &[u8]) -> Moebius {
        letters
            .iter()
            .fold(Moebius::IDENTITY, |m, &j| m * self.letters[j as usize - 1])
    }

    pub(crate) fn letter(&self, zero_based: usize) -> Moebius {
        self.letters[zero_based]
    }

    /// Isometric circles of `S_1 … S_{2r}`; succeeds iff their closures are
    /// pairwise disjoint. When a generator fixes ∞ the group is first
    /// conjugated by a rotation of angle π/8 so that every circle exists.
    pub fn validate(&self) -> Result<Vec<Disk>> {
        let letters: Vec<Moebius> = if self.letters.iter().any(|m| m.c == 0.0) {
            let (s, c) = (PI / 8.0).sin_cos();
            let rot = Moebius {
                a: c,
                b: -s,
                c: s,
                d: c,
            };
            self.letters.iter().map(|m| m.conjugate_by(&rot)).collect()
        } else {
            self.letters.clone()
        };
        let disks = letters
            .iter()
            .map(|m| {
                m.isometric_circle().ok_or_else(|| {
                    Error::CorruptGroup("generator without isometric circle".into())
                })
            })
            .collect::<Result<Vec<_>>>()?;
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                let overlap = disks[i].overlap(&disks[j]);
                if overlap >= 0.0 {
                    return Err(Error::NotSchottky {
                        first: i + 1,
                        second: j + 1,
                        overlap,
                    });
                }
            }
        }
        Ok(disks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x121314() -> SchottkyGroup {
        SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap()
    }

    #[test]
    fn three_funnel_traces() {
        let g = x121314();
        let s1 = g.generator(1).unwrap();
        let s2 = g.generator(2).unwrap();
        assert!((s1.trace() - 2.0 * 6f64.cosh()).abs() < 1e-12 * s1.trace());
        let t = (s1 * s2.inverse()).trace().abs();
        assert!((t - 2.0 * 7f64.cosh()).abs() < 1e-12 * t);
        assert!((s1.trace_length().unwrap() - 12.0).abs() < 1e-10);
        assert!((s2.trace_length().unwrap() - 13.0).abs() < 1e-10);
        assert!(((s1 * s2.inverse()).trace_length().unwrap() - 14.0).abs() < 1e-10);
        assert!(((s1 * s1).trace_length().unwrap() - 24.0).abs() < 1e-10);
        for m in [s1, s2] {
            assert!((m.det() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn symmetric_three_funnel() {
        let g = SchottkyGroup::three_funnel(12.0, 12.0, 12.0).unwrap();
        for j in 1..=2 {
            let l = g.generator(j).unwrap().trace_length().unwrap();
            assert!((l - 12.0).abs() < 1e-10);
        }
    }

    #[test]
    fn generator_convention() {
        let g = x121314();
        let s1 = g.generator(1).unwrap();
        let s1inv = g.generator(3).unwrap();
        assert!((s1 * s1inv).max_abs_diff(&Moebius::IDENTITY) < 1e-10);
        assert_eq!(g.generator(4).unwrap(), g.generator(2).unwrap().inverse());
        assert!(matches!(
            g.generator(5),
            Err(Error::IndexOutOfRange { index: 5, max: 4 })
        ));
        assert!(g.generator(0).is_err());
    }

    #[test]
    fn multiplier_matches_length() {
        let g = x121314();
        let s1 = g.generator(1).unwrap();
        let m = s1.fixed_point_multiplier().unwrap();
        assert!(((m - (-12f64).exp()) / m).abs() < 1e-9);
        assert!(m > 0.0 && m < 1.0);
    }

    #[test]
    fn non_hyperbolic_rejected() {
        let rot = Moebius {
            a: 0.6,
            b: -0.8,
            c: 0.8,
            d: 0.6,
        };
        assert!(matches!(rot.trace_length(), Err(Error::NonHyperbolic { .. })));
        assert!(rot.fixed_point_multiplier().is_err());
        assert!(Moebius::IDENTITY.trace_length().is_err());
    }

    #[test]
    fn large_trace_length() {
        // ℓ = 180 gives traces near e^90.
        let t = 2.0 * 90f64.cosh();
        assert!((trace_to_length(t).unwrap() - 180.0).abs() < 1e-12 * 180.0);
        assert!((trace_to_length(-t).unwrap() - 180.0).abs() < 1e-12 * 180.0);
    }

    #[test]
    fn torus_generators() {
        let g = SchottkyGroup::funneled_torus(12.0, 13.0, PI / 2.0).unwrap();
        let s1 = g.generator(1).unwrap();
        let s2 = g.generator(2).unwrap();
        assert!((s2.det() - 1.0).abs() < 1e-10);
        assert!((s1.trace_length().unwrap() - 12.0).abs() < 1e-10);
        assert!((s2.trace_length().unwrap() - 13.0).abs() < 1e-10);
        assert_eq!(g.validate().unwrap().len(), 4);
    }

    #[test]
    fn disks_three_funnel() {
        let disks = x121314().validate().unwrap();
        assert_eq!(disks.len(), 4);
        let coth6 = 6f64.cosh() / 6f64.sinh();
        assert!((disks[0].center + coth6).abs() < 1e-12);
        assert!((disks[2].center - coth6).abs() < 1e-12);
    }

    #[test]
    fn thin_torus_is_not_schottky() {
        let err = SchottkyGroup::funneled_torus(0.1, 0.1, PI / 2.0).unwrap_err();
        assert!(matches!(err, Error::NotSchottky { overlap, .. } if overlap > 0.0));
        assert!(SchottkyGroup::funneled_torus(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn from_disks_pairs_boundaries() {
        let disks = [
            Disk { center: -3.0, radius: 0.5 },
            Disk { center: -1.0, radius: 0.3 },
            Disk { center: 1.0, radius: 0.4 },
            Disk { center: 3.0, radius: 0.6 },
        ];
        let g = SchottkyGroup::from_disks(&disks).unwrap();
        let s1 = g.generator(1).unwrap();
        // A boundary point of D₁ lands on the boundary of D₃.
        let y = s1.apply(Some(-3.0 + 0.5)).unwrap();
        assert!(((y - 1.0).abs() - 0.4).abs() < 1e-12);
        assert_eq!(s1.apply(None), Some(1.0));
    }

    #[test]
    fn spec_strings() {
        let x: SurfaceSpec = "X:12,13,14".parse().unwrap();
        assert_eq!(x, SurfaceSpec::ThreeFunnel { l1: 12.0, l2: 13.0, l3: 14.0 });
        assert_eq!(x.to_string(), "X:12,13,14");
        let y: SurfaceSpec = "Y:12,13,pi/2".parse().unwrap();
        assert_eq!(y, SurfaceSpec::FunneledTorus { l1: 12.0, l2: 13.0, phi: PI / 2.0 });
        assert_eq!(y.to_string().parse::<SurfaceSpec>().unwrap(), y);
        let y: SurfaceSpec = "Y:10,12,pi/2.5".parse().unwrap();
        assert!(matches!(y, SurfaceSpec::FunneledTorus { phi, .. } if (phi - PI / 2.5).abs() < 1e-15));
        assert!((parse_angle("2pi/3").unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((parse_angle("0.5*pi").unwrap() - PI / 2.0).abs() < 1e-15);
        assert!("X:12,-1,3".parse::<SurfaceSpec>().is_err());
        assert!("Y:12,12,4".parse::<SurfaceSpec>().is_err());
        assert!("Z:1,2,3".parse::<SurfaceSpec>().is_err());
        assert!("X:1,2".parse::<SurfaceSpec>().is_err());
    }
}
