//! The expansion coefficients `d_n(s)` in multiprecision arithmetic.
//!
//! In double precision `d_n` stalls at a rounding floor around `1e−12`,
//! set by cancellation in the `b_{n,k}` recursion and by the absolute
//! error of the lengths times `Im s`. Recomputing generators, traces, the
//! sums `a_n` and the recursion with MPFR floats exposes the true decay.

use num_complex::Complex64;
use rug::ops::Pow;
use rug::Float;

use crate::cache::ClassTableSet;
use crate::error::{Error, Result};
use crate::schottky::SurfaceSpec;

/// Default working precision in bits.
pub const DEFAULT_PREC: u32 = 256;

#[derive(Debug, Clone)]
struct Cx {
    re: Float,
    im: Float,
}

impl Cx {
    fn zero(prec: u32) -> Self {
        Cx {
            re: Float::new(prec),
            im: Float::new(prec),
        }
    }

    fn mul(&self, o: &Cx) -> Cx {
        let prec = self.re.prec();
        let re = Float::with_val(prec, &self.re * &o.re) - Float::with_val(prec, &self.im * &o.im);
        let im = Float::with_val(prec, &self.re * &o.im) + Float::with_val(prec, &self.im * &o.re);
        Cx { re, im }
    }

    fn add_assign(&mut self, o: &Cx) {
        self.re += &o.re;
        self.im += &o.im;
    }

    fn scale(&mut self, x: &Float) {
        self.re *= x;
        self.im *= x;
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

/// 2×2 matrix over MPFR floats.
#[derive(Debug, Clone)]
struct Mat([Float; 4]);

impl Mat {
    fn identity(prec: u32) -> Self {
        let one = Float::with_val(prec, 1);
        Mat([one.clone(), Float::new(prec), Float::new(prec), one])
    }

    fn mul(&self, o: &Mat) -> Mat {
        let [a, b, c, d] = &self.0;
        let [e, f, g, h] = &o.0;
        let p = a.prec();
        let dot = |x: &Float, y: &Float, z: &Float, w: &Float| {
            Float::with_val(p, x * y) + Float::with_val(p, z * w)
        };
        Mat([dot(a, e, b, g), dot(a, f, b, h), dot(c, e, d, g), dot(c, f, d, h)])
    }

    fn inverse(&self) -> Mat {
        let [a, b, c, d] = &self.0;
        Mat([d.clone(), -b.clone(), -c.clone(), a.clone()])
    }

    fn trace(&self) -> Float {
        Float::with_val(self.0[0].prec(), &self.0[0] + &self.0[3])
    }
}

fn generators(spec: &SurfaceSpec, prec: u32) -> Result<[Mat; 2]> {
    let f = |x: f64| Float::with_val(prec, x);
    let half = |x: f64| f(x) / 2u32;
    match *spec {
        SurfaceSpec::ThreeFunnel { l1, l2, l3 } => {
            let (c1, s1) = (half(l1).cosh(), half(l1).sinh());
            let (c2, s2) = (half(l2).cosh(), half(l2).sinh());
            let num = (f(l1) - f(l2)) / 2u32;
            let km2 = (num.cosh() + half(l3).cosh()) * 2u32 / (s1.clone() * &s2);
            let k = km2.clone() + 2u32;
            let root = (km2 * (k.clone() + 2u32)).sqrt();
            let a = (k + root) / 2u32;
            let s1m = Mat([c1.clone(), s1.clone(), s1, c1]);
            let s2m = Mat([c2.clone(), s2.clone() * &a, s2 / &a, c2]);
            Ok([s1m, s2m])
        }
        SurfaceSpec::FunneledTorus { l1, l2, phi } => {
            let e = half(l1).exp();
            let s1m = Mat([e.clone(), Float::new(prec), Float::new(prec), e.recip()]);
            let (ch, sh) = (half(l2).cosh(), half(l2).sinh());
            let (cp, sp) = (f(phi).cos(), f(phi).sin());
            let s2m = Mat([
                ch.clone() - cp.clone() * &sh,
                sp.pow(2u32) * &sh,
                sh.clone(),
                ch + cp * &sh,
            ]);
            Ok([s1m, s2m])
        }
        SurfaceSpec::Generic { .. } => Err(Error::InvalidParameters(
            "multiprecision generators exist only for X and Y surfaces".into(),
        )),
    }
}

/// Lengths and weights `m/(1 − e^{−ℓ})` per word length, in multiprecision.
#[derive(Debug, Clone)]
pub struct PreciseExpansion {
    prec: u32,
    /// `(ℓ, weight)` per class, `levels[n − 1]`.
    levels: Vec<Vec<(Float, Float)>>,
}

impl PreciseExpansion {
    pub fn new(spec: &SurfaceSpec, tables: &ClassTableSet, prec: u32) -> Result<Self> {
        if tables.r != 2 {
            return Err(Error::InvalidParameters(format!(
                "class tables are for r = {}, surfaces here have r = 2",
                tables.r
            )));
        }
        let [g1, g2] = generators(spec, prec)?;
        let letters = [g1.clone(), g2.clone(), g1.inverse(), g2.inverse()];
        let levels = tables
            .tables
            .iter()
            .map(|t| {
                t.classes
                    .iter()
                    .map(|c| {
                        let m = c
                            .representative
                            .letters()
                            .iter()
                            .fold(Mat::identity(prec), |acc, &j| acc.mul(&letters[j as usize - 1]));
                        let half_tr = m.trace().abs() / 2u32;
                        if half_tr <= 1u32 {
                            return Err(Error::NonHyperbolic {
                                trace_abs: 2.0 * half_tr.to_f64(),
                            });
                        }
                        let l = half_tr.acosh() * 2u32;
                        let denom = -Float::with_val(prec, -&l).exp_m1();
                        let w = Float::with_val(prec, c.multiplicity) / denom;
                        Ok((l, w))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PreciseExpansion { prec, levels })
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    /// Lengths at word length `n`, rounded to `f64`.
    pub fn lengths(&self, n: usize) -> Vec<f64> {
        self.levels[n - 1].iter().map(|p| p.0.to_f64()).collect()
    }

    fn a_coeff(&self, n: usize, s: Complex64) -> Cx {
        let p = self.prec;
        let (sr, si) = (Float::with_val(p, s.re), Float::with_val(p, s.im));
        let mut acc = Cx::zero(p);
        for (l, w) in &self.levels[n - 1] {
            let modulus = Float::with_val(p, -(sr.clone() * l)).exp() * w;
            let (sin, cos) = Float::with_val(p, si.clone() * l).sin_cos(Float::new(p));
            acc.re += Float::with_val(p, &modulus * &cos);
            acc.im -= modulus * sin;
        }
        acc.scale(&(Float::with_val(p, -1) / n as u32));
        acc
    }

    /// `d_1, …, d_n` at `s`, rounded to `f64` at the end only.
    pub fn d_coeffs(&self, s: Complex64, n: usize) -> Vec<Complex64> {
        let n = n.min(self.n_max());
        let a: Vec<Cx> = (1..=n).map(|m| self.a_coeff(m, s)).collect();
        // b[n − 1][k − 1] as in the double-precision recursion
        let mut b: Vec<Vec<Cx>> = Vec::with_capacity(n);
        let mut out = Vec::with_capacity(n);
        for nn in 1..=n {
            let mut row = vec![a[nn - 1].clone()];
            for k in 2..=nn {
                let mut acc = Cx::zero(self.prec);
                for m in 1..=nn + 1 - k {
                    acc.add_assign(&b[nn - m - 1][k - 2].mul(&a[m - 1]));
                }
                acc.scale(&(Float::with_val(self.prec, 1) / k as u32));
                row.push(acc);
            }
            let mut d = Cx::zero(self.prec);
            for x in &row {
                d.add_assign(x);
            }
            out.push(d.to_c64());
            b.push(row);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::LengthCache;
    use crate::words::ClassTableConfig;
    use crate::zeta::ZetaFunction;

    #[test]
    fn agrees_with_double_precision_where_both_are_accurate() {
        let tables = ClassTableSet::build(2, 6, &ClassTableConfig::default()).unwrap();
        for spec in ["X:12,13,14", "Y:12,13,pi/2"] {
            let spec: SurfaceSpec = spec.parse().unwrap();
            let g = spec.build().unwrap();
            let cache = LengthCache::build(&g, &tables).unwrap();
            let z = ZetaFunction::new(&cache);
            let p = PreciseExpansion::new(&spec, &tables, DEFAULT_PREC).unwrap();
            for n in 1..=6 {
                let mut ours = p.lengths(n);
                ours.sort_by(f64::total_cmp);
                let theirs: Vec<f64> = cache.levels[n - 1].iter().map(|q| q.0).collect();
                for (a, b) in ours.iter().zip(&theirs) {
                    assert!((a - b).abs() < 1e-12 * b, "{spec} n={n}: {a} vs {b}");
                }
            }
            let s = Complex64::new(0.3, 7.0);
            let hi = p.d_coeffs(s, 4);
            let lo = z.d_coeffs(4, s, false);
            for (a, b) in hi.iter().zip(&lo) {
                assert!((a - b.0).norm() < 1e-10 * (1.0 + a.norm()));
            }
        }
        assert_eq!(
            PreciseExpansion::new(&SurfaceSpec::Generic { r: 2 }, &tables, 64).err().map(|e| e.to_string()),
            Some("invalid parameters: multiprecision generators exist only for X and Y surfaces".into())
        );
    }
}
