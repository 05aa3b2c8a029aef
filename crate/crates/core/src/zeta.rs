//! Truncated determinant expansion of the zeta function.
//!
//! `Z_N(s) = 1 + Σ_{n ≤ N} d_n(s)` where `d_n` collects the degree-`n` part
//! of `exp(Σ a_m z^m)` and
//! `a_n(s) = −(1/n) Σ_{σ∈𝒲_n} e^{−sℓ_σ} / (1 − e^{−ℓ_σ})`.
//!
//! All sums run over lengths in ascending order with compensated
//! accumulation, so results do not depend on how evaluation points are
//! scheduled.

use num_complex::Complex64;

use crate::cache::LengthCache;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::schottky::SchottkyGroup;
use crate::words;

/// Taylor coefficients `f, f', f''/2` at a point.
pub type Jet = [Complex64; 3];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const JET_ZERO: Jet = [ZERO; 3];

/// Default stopping tolerance on `|d_N / Z_N|`.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Lengths within this relative distance of a group's smallest member are
/// summed as one term.
const MERGE_REL: f64 = 1e-13;

/// Samples per block between direct re-evaluations in [`ZetaFunction::sample_line`].
const RESEED: usize = 192;

/// Compensated sum (Neumaier style, via Knuth's two-sum).
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    /// Branch-free two-sum; the rounding error goes into `comp`.
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        let bb = t - self.sum;
        self.comp += (self.sum - (t - bb)) + (x - bb);
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    #[inline]
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// `e^{−sℓ}`, built so that `conj(s)` gives the exact conjugate.
#[inline]
fn exp_neg(s: Complex64, l: f64) -> Complex64 {
    let m = (-s.re * l).exp();
    let (sin, cos) = (s.im * l).sin_cos();
    Complex64::new(m * cos, -m * sin)
}

#[inline]
fn jet_mul(a: &Jet, b: &Jet, order: usize) -> Jet {
    let mut out = JET_ZERO;
    for i in 0..=order {
        for j in 0..=order - i {
            out[i + j] += a[i] * b[j];
        }
    }
    out
}

/// How many terms of the expansion to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    Fixed(usize),
    /// Start at `start`, add `step` orders at a time until `|d_N/Z_N| < tol`
    /// or the cache is exhausted.
    Adaptive { start: usize, step: usize, tol: f64 },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Adaptive {
            start: 6,
            step: 2,
            tol: DEFAULT_TOL,
        }
    }
}

/// Result of one evaluation of `Z_N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaEvaluation {
    pub s: Complex64,
    pub value: Complex64,
    pub derivative: Option<Complex64>,
    /// Truncation order used.
    pub n: usize,
    /// `|d_N(s) / Z_N(s)|`.
    pub rel_err: f64,
    /// Adaptive mode ran out of cached orders before reaching its tolerance.
    pub capped: bool,
    /// Value or error indicator is not finite.
    pub overflow: bool,
}

#[derive(Debug, Clone)]
struct Level {
    lengths: Vec<f64>,
    weights: Vec<f64>,
}

/// `Z_N` for one length cache.
#[derive(Debug, Clone)]
pub struct ZetaFunction {
    levels: Vec<Level>,
    truncation: Truncation,
}

impl ZetaFunction {
    pub fn new(cache: &LengthCache) -> Self {
        Self::from_levels(&cache.levels)
    }

    /// From per-word-length `(length, multiplicity)` lists, `levels[n − 1]`.
    pub fn from_levels(levels: &[words::LengthLevel]) -> Self {
        let levels = levels
            .iter()
            .map(|level| {
                let mut pairs = level.clone();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                // Near-equal lengths become one term at their weighted mean;
                // the error is second order, (|s|·Δℓ)²/8.
                let mut groups: Vec<(f64, f64, u64)> = Vec::with_capacity(pairs.len());
                for (l, m) in pairs {
                    match groups.last_mut() {
                        Some(g) if l - g.0 <= MERGE_REL * l => {
                            g.1 += m as f64 * l;
                            g.2 += m;
                        }
                        _ => groups.push((l, m as f64 * l, m)),
                    }
                }
                let merged: Vec<(f64, u64)> =
                    groups.iter().map(|&(_, lm, m)| (lm / m as f64, m)).collect();
                Level {
                    lengths: merged.iter().map(|p| p.0).collect(),
                    weights: merged
                        .iter()
                        .map(|&(l, m)| m as f64 / -(-l).exp_m1())
                        .collect(),
                }
            })
            .collect();
        ZetaFunction {
            levels,
            truncation: Truncation::default(),
        }
    }

    pub fn with_truncation(mut self, truncation: Truncation) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    /// Number of distinct lengths summed at each word length.
    pub fn term_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.lengths.len()).collect()
    }

    /// Shortest length in the cache.
    pub fn min_length(&self) -> f64 {
        self.levels
            .iter()
            .filter_map(|l| l.lengths.first().copied())
            .fold(f64::INFINITY, f64::min)
    }

    fn level(&self, n: usize) -> &Level {
        &self.levels[n - 1]
    }

    /// Taylor jet of `a_n` at `s` to the given order (0..=2).
    pub fn a_jet(&self, n: usize, s: Complex64, order: usize) -> Jet {
        let level = self.level(n);
        let mut acc = [ComplexSum::default(); 3];
        for (&l, &w) in level.lengths.iter().zip(&level.weights) {
            let t = exp_neg(s, l) * w;
            acc[0].add(t);
            if order >= 1 {
                acc[1].add(t * -l);
            }
            if order >= 2 {
                acc[2].add(t * (0.5 * l * l));
            }
        }
        let scale = -1.0 / n as f64;
        let mut out = JET_ZERO;
        for k in 0..=order {
            out[k] = acc[k].value() * scale;
        }
        out
    }

    pub fn a_coeff(&self, n: usize, s: Complex64) -> Complex64 {
        self.a_jet(n, s, 0)[0]
    }

    pub fn a_coeff_deriv(&self, n: usize, s: Complex64) -> Complex64 {
        self.a_jet(n, s, 1)[1]
    }

    /// `(d_n, d_n')` for `n = 1..=n_trunc`.
    pub fn d_coeffs(
        &self,
        n_trunc: usize,
        s: Complex64,
        with_deriv: bool,
    ) -> Vec<(Complex64, Option<Complex64>)> {
        let order = usize::from(with_deriv);
        let mut rec = Recursion::new(order);
        (1..=n_trunc.min(self.n_max()))
            .map(|n| {
                let d = rec.push(self.a_jet(n, s, order));
                (d[0], with_deriv.then_some(d[1]))
            })
            .collect()
    }

    pub fn eval(&self, s: Complex64) -> ZetaEvaluation {
        self.eval_jet(s, 0).0
    }

    pub fn eval_with_deriv(&self, s: Complex64) -> ZetaEvaluation {
        self.eval_jet(s, 1).0
    }

    /// Evaluation together with the Taylor jet `Z, Z', Z''/2` up to `order`.
    pub fn eval_jet(&self, s: Complex64, order: usize) -> (ZetaEvaluation, Jet) {
        self.eval_truncated(s, order, self.truncation)
    }

    pub fn eval_truncated(
        &self,
        s: Complex64,
        order: usize,
        truncation: Truncation,
    ) -> (ZetaEvaluation, Jet) {
        let n_max = self.n_max();
        let (target, start, step, tol) = match truncation {
            Truncation::Fixed(n) => (n.clamp(1, n_max.max(1)), usize::MAX, 1, 0.0),
            Truncation::Adaptive { start, step, tol } => (n_max, start.max(1), step.max(1), tol),
        };
        let mut rec = Recursion::new(order);
        let mut z = JET_ZERO;
        z[0] = ONE;
        let mut last = JET_ZERO;
        let mut n = 0;
        let mut converged = false;
        while n < target.min(n_max) {
            n += 1;
            last = rec.push(self.a_jet(n, s, order));
            for k in 0..=order {
                z[k] += last[k];
            }
            if n >= start && (n - start) % step == 0 && last[0].norm() < tol * z[0].norm() {
                converged = true;
                break;
            }
        }
        let rel_err = last[0].norm() / z[0].norm();
        let overflow = !(rel_err.is_finite() && z[0].re.is_finite() && z[0].im.is_finite());
        let capped = matches!(truncation, Truncation::Adaptive { .. }) && !converged;
        let eval = ZetaEvaluation {
            s,
            value: z[0],
            derivative: (order >= 1).then_some(z[1]),
            n,
            rel_err,
            capped,
            overflow,
        };
        (eval, z)
    }

    /// Truncation order the configured policy picks at `s`.
    pub fn order_at(&self, s: Complex64) -> usize {
        self.eval(s).n
    }

    /// Values of `Z_n` at `p + k·h`, `k = 0..count`, at fixed order `n`.
    ///
    /// Exponentials are advanced by multiplication and recomputed directly
    /// every few hundred samples.
    pub fn sample_line(&self, p: Complex64, h: Complex64, count: usize, n: usize) -> Vec<Complex64> {
        let n = n.clamp(1, self.n_max().max(1));
        let ratio: Vec<Complex64> = self.flat_lengths(n).map(|l| exp_neg(h, l)).collect();
        let mut t = vec![ZERO; ratio.len()];
        let mut out = Vec::with_capacity(count);
        let mut a = vec![[ZERO; RESEED]; n];
        let mut start = 0;
        while start < count {
            let len = RESEED.min(count - start);
            let p0 = p + h * start as f64;
            for (x, l) in t.iter_mut().zip(self.flat_lengths(n)) {
                *x = exp_neg(p0, l);
            }
            self.advance_block(&mut t, &ratio, len, n, &mut a);
            self.finish_block(&a, len, n, &mut out);
            start += len;
        }
        out
    }

    /// Lengths of the terms of levels `1..=n`, level by level.
    pub fn flat_lengths(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        self.levels[..n.min(self.n_max())]
            .iter()
            .flat_map(|l| l.lengths.iter().copied())
    }

    /// Like [`sample_line`](Self::sample_line), from precomputed per-term
    /// factors `e^{−pℓ}` and `e^{−hℓ}` in [`flat_lengths`](Self::flat_lengths)
    /// order. Longer tables are fine, only their prefix is read. There is
    /// no reseeding, so this is meant for steps with `Re h ≥ 0`.
    pub fn sample_from(
        &self,
        start: &[Complex64],
        ratio: &[Complex64],
        count: usize,
        n: usize,
    ) -> Vec<Complex64> {
        let n = n.clamp(1, self.n_max().max(1));
        let terms: usize = self.levels[..n].iter().map(|l| l.lengths.len()).sum();
        let mut t = start[..terms].to_vec();
        let mut out = Vec::with_capacity(count);
        let mut a = vec![[ZERO; RESEED]; n];
        let mut done = 0;
        while done < count {
            let len = RESEED.min(count - done);
            self.advance_block(&mut t, &ratio[..terms], len, n, &mut a);
            self.finish_block(&a, len, n, &mut out);
            done += len;
        }
        out
    }

    /// `a_m` at `len` consecutive points into `a[m − 1]`, leaving `t` one
    /// step past the block.
    fn advance_block(
        &self,
        t: &mut [Complex64],
        ratio: &[Complex64],
        len: usize,
        n: usize,
        a: &mut [[Complex64; RESEED]],
    ) {
        let mut acc = [ZERO; RESEED];
        let mut offset = 0;
        for m in 1..=n {
            let level = self.level(m);
            let k = level.lengths.len();
            let (t, r) = (&mut t[offset..offset + k], &ratio[offset..offset + k]);
            offset += k;
            acc[..len].fill(ZERO);
            // four interleaved recurrences; plain sums are ample for winding
            let mut tc = t.chunks_exact_mut(4);
            let mut rc = r.chunks_exact(4);
            let mut wc = level.weights.chunks_exact(4);
            for ((t, r), w) in tc.by_ref().zip(rc.by_ref()).zip(wc.by_ref()) {
                let mut x = [t[0] * w[0], t[1] * w[1], t[2] * w[2], t[3] * w[3]];
                for slot in acc[..len].iter_mut() {
                    *slot += (x[0] + x[1]) + (x[2] + x[3]);
                    for j in 0..4 {
                        x[j] *= r[j];
                    }
                }
                for j in 0..4 {
                    t[j] = x[j] / w[j];
                }
            }
            for ((t, r), w) in tc
                .into_remainder()
                .iter_mut()
                .zip(rc.remainder())
                .zip(wc.remainder())
            {
                let mut x = *t * *w;
                for slot in acc[..len].iter_mut() {
                    *slot += x;
                    x *= r;
                }
                *t = x / *w;
            }
            let scale = -1.0 / m as f64;
            for k in 0..len {
                a[m - 1][k] = acc[k] * scale;
            }
        }
    }

    fn finish_block(&self, a: &[[Complex64; RESEED]], len: usize, n: usize, out: &mut Vec<Complex64>) {
        for k in 0..len {
            let mut rec = Recursion::new(0);
            let mut z = ONE;
            for m in 1..=n {
                let mut jet = JET_ZERO;
                jet[0] = a[m - 1][k];
                z += rec.push(jet)[0];
            }
            out.push(z);
        }
    }

    /// Evaluates many points, in input order.
    pub fn eval_many(&self, points: &[Complex64], exec: Execution) -> Vec<ZetaEvaluation> {
        exec::map_collect(exec, points, |&s| self.eval(s))
    }
}

/// Incremental `b_{n,k}` recursion; each `push` adds `a_n` and returns `d_n`.
struct Recursion {
    order: usize,
    a: Vec<Jet>,
    /// `b[n − 1][k − 1]`.
    b: Vec<Vec<Jet>>,
}

impl Recursion {
    fn new(order: usize) -> Self {
        Recursion {
            order,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    fn push(&mut self, a_n: Jet) -> Jet {
        self.a.push(a_n);
        let n = self.a.len();
        let mut row = Vec::with_capacity(n);
        row.push(a_n);
        for k in 2..=n {
            // b_{n,k} = (1/k) Σ_{m=1}^{n−k+1} b_{n−m,k−1} a_m
            let mut acc = JET_ZERO;
            for m in 1..=n + 1 - k {
                let t = jet_mul(&self.b[n - m - 1][k - 2], &self.a[m - 1], self.order);
                for i in 0..=self.order {
                    acc[i] += t[i];
                }
            }
            let inv = 1.0 / k as f64;
            for x in acc.iter_mut() {
                *x *= inv;
            }
            row.push(acc);
        }
        let mut d = JET_ZERO;
        for b in &row {
            for i in 0..=self.order {
                d[i] += b[i];
            }
        }
        self.b.push(row);
        d
    }
}

/// Euler product over primitive classes of word length at most `n_max`.
#[derive(Debug, Clone)]
pub struct EulerProduct {
    lengths: Vec<f64>,
}

impl EulerProduct {
    pub fn new(group: &SchottkyGroup, n_max: usize) -> Result<Self> {
        let mut lengths = words::primitive_lengths(group, n_max)?;
        lengths.sort_by(f64::total_cmp);
        Ok(EulerProduct { lengths })
    }

    /// `Π_γ Π_{k=0}^{k_max} (1 − e^{−(s+k)ℓ_γ})`, valid for `Re s > 1`.
    pub fn eval(&self, s: Complex64, k_max: usize) -> Result<Complex64> {
        if !(s.re > 1.0) {
            return Err(Error::OutsideConvergence { re: s.re });
        }
        let mut log = ComplexSum::default();
        for &l in &self.lengths {
            for k in 0..=k_max {
                let x = exp_neg(s + k as f64, l);
                let term = if x.norm() < 1e-3 {
                    -(x + x * x * 0.5 + x * x * x / 3.0 + x * x * x * x * 0.25)
                } else {
                    (ONE - x).ln()
                };
                log.add(term);
            }
        }
        Ok(log.value().exp())
    }
}

/// One-shot Euler-product evaluation.
pub fn euler_product_eval(
    group: &SchottkyGroup,
    s: Complex64,
    n_max: usize,
    k_max: usize,
) -> Result<Complex64> {
    if !(s.re > 1.0) {
        return Err(Error::OutsideConvergence { re: s.re });
    }
    EulerProduct::new(group, n_max)?.eval(s, k_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zeta(l: [f64; 3], n_max: usize) -> ZetaFunction {
        let g = SchottkyGroup::three_funnel(l[0], l[1], l[2]).unwrap();
        ZetaFunction::new(&LengthCache::for_group(&g, n_max).unwrap())
    }

    #[test]
    fn first_coefficients() {
        let z = zeta([12.0, 13.0, 14.0], 3);
        let a1 = z.a_coeff(1, ZERO);
        let expect = -(2.0 / -(-12f64).exp_m1() + 2.0 / -(-13f64).exp_m1());
        assert!((a1.re - expect).abs() < 1e-14 && a1.im == 0.0);
        assert!((a1.re + 4.000016809169242).abs() < 1e-13);
        let da1 = z.a_coeff_deriv(1, ZERO);
        assert!((da1.re - 50.00020623069993).abs() < 1e-11);
        assert!(z.a_coeff(1, c(200.0, 0.0)).norm() < 1e-300);
    }

    #[test]
    fn recursion_matches_exponential_expansion() {
        let z = zeta([12.0, 13.0, 14.0], 4);
        let s = c(0.05, 3.0);
        let a: Vec<_> = (1..=4).map(|n| z.a_coeff(n, s)).collect();
        let d = z.d_coeffs(4, s, false);
        let close = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-14 * (1.0 + y.norm());
        assert!(close(d[0].0, a[0]));
        assert!(close(d[1].0, a[1] + a[0] * a[0] / 2.0));
        assert!(close(d[2].0, a[2] + a[0] * a[1] + a[0].powi(3) / 6.0));
        let d4 = a[3] + a[0] * a[2] + a[1] * a[1] / 2.0 + a[0] * a[0] * a[1] / 2.0 + a[0].powi(4) / 24.0;
        assert!(close(d[3].0, d4));
    }

    #[test]
    fn derivative_jets_match_differences() {
        let z = zeta([12.0, 13.0, 14.0], 8).with_truncation(Truncation::Fixed(8));
        let s = c(0.1, 10.0);
        let h = 1e-5;
        let da = (z.a_coeff(3, s + h) - z.a_coeff(3, s - h)) / (2.0 * h);
        assert!((da - z.a_coeff_deriv(3, s)).norm() < 1e-6 * da.norm());
        let (e, jet) = z.eval_jet(s, 2);
        let (_, jp) = z.eval_jet(s + h, 1);
        let (_, jm) = z.eval_jet(s - h, 1);
        let fd1 = (jp[0] - jm[0]) / (2.0 * h);
        let fd2 = (jp[1] - jm[1]) / (2.0 * h);
        assert!((fd1 - e.derivative.unwrap()).norm() < 1e-6 * fd1.norm());
        assert!((fd2 - jet[2] * 2.0).norm() < 1e-5 * fd2.norm());
    }

    #[test]
    fn adaptive_truncation() {
        let z = zeta([12.0, 13.0, 14.0], 12);
        let e = z.eval(c(0.1, 20.0));
        assert!(!e.capped && e.rel_err < DEFAULT_TOL && e.n <= 12 && e.n >= 6);
        let fixed = z.clone().with_truncation(Truncation::Fixed(12)).eval(c(0.1, 20.0));
        assert_eq!(fixed.n, 12);
        assert!((fixed.value - e.value).norm() < 1e-8 * fixed.value.norm());
    }

    #[test]
    fn real_and_conjugate_symmetry() {
        let z = zeta([12.0, 13.0, 14.0], 10);
        let e = z.eval(c(0.3, 0.0));
        assert_eq!(e.value.im, 0.0);
        let s = c(0.07, 41.3);
        assert_eq!(z.eval(s.conj()).value, z.eval(s).value.conj());
    }

    #[test]
    fn sample_line_matches_pointwise() {
        let z = zeta([12.0, 13.0, 14.0], 10).with_truncation(Truncation::Fixed(10));
        let p = c(0.02, 3.0);
        let h = c(0.0, 0.01);
        let vals = z.sample_line(p, h, 130, 10);
        for (k, v) in vals.iter().enumerate() {
            let direct = z.eval(p + h * k as f64).value;
            assert!((v - direct).norm() < 1e-11 * (1.0 + direct.norm()), "k = {k}");
        }
    }

    #[test]
    fn euler_product_agrees_at_large_re() {
        let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
        let z = ZetaFunction::new(&LengthCache::for_group(&g, 12).unwrap());
        let ep = EulerProduct::new(&g, 12).unwrap();
        for s in [c(2.0, 0.0), c(3.0, 0.0), c(2.0, 5.0)] {
            let a = z.eval(s).value;
            let b = ep.eval(s, 10).unwrap();
            assert!((a - b).norm() < 1e-8 * b.norm(), "s = {s}: {a} vs {b}");
        }
        assert!(matches!(ep.eval(c(1.0, 0.0), 2), Err(Error::OutsideConvergence { .. })));
        let v3 = ep.eval(c(3.0, 0.0), 10).unwrap();
        assert!((v3 - 1.0).norm() < (-2.0 * 12.0f64).exp() * 1.5);
    }

    #[test]
    fn overflow_flagged_far_left() {
        let z = zeta([12.0, 13.0, 14.0], 8);
        let e = z.eval(c(-80.0, 0.0));
        assert!(e.overflow || e.capped);
    }
}
