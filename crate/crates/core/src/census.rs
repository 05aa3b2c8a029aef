//! Statistics over located resonances: δ, strip counting functions,
//! windowed counts, the envelope `h_w(t)`, real-part histograms, density
//! grids and power-law fits.
//!
//! Resonance lists cover the upper half-plane only. Counts over `|Im| ≤ t`
//! weight off-axis resonances twice and real ones once. Strip bounds are
//! half-open, `a₀ ≤ Re ζ < a₁`, so adjacent strips add up exactly.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::zeros::{self, Rect, Resonance};
use crate::zeta::{Truncation, ZetaFunction};

/// `|Im ζ|` below this counts as a real resonance.
pub const AXIS_TOL: f64 = 1e-8;

/// Default downward scan step for [`compute_delta`].
pub const DELTA_SCAN_STEP: f64 = 0.01;

/// Located resonances together with the region they are complete for.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceSet {
    pub coverage: Rect,
    pub resonances: Vec<Resonance>,
    /// Bins whose zeros were counted but not refined, with missing multiplicity.
    pub unrefined: Vec<(Rect, i64)>,
}

impl ResonanceSet {
    pub fn new(coverage: Rect, mut resonances: Vec<Resonance>) -> Self {
        zeros::sort_resonances(&mut resonances);
        ResonanceSet {
            coverage,
            resonances,
            unrefined: Vec::new(),
        }
    }

    pub fn from_report(report: &zeros::LocateReport) -> Self {
        let mut set = Self::new(report.rect, report.resonances.clone());
        set.unrefined = report.unrefined.iter().map(|u| (u.bin, u.count)).collect();
        set
    }

    /// Fails unless `region` lies in the coverage and avoids unrefined bins.
    pub fn check_complete(&self, region: &Rect) -> Result<()> {
        let c = &self.coverage;
        if region.re_min < c.re_min
            || region.re_max > c.re_max
            || region.im_min < c.im_min
            || region.im_max > c.im_max
        {
            return Err(Error::IncompleteData(format!(
                "query region {region} exceeds the covered region {c}"
            )));
        }
        if let Some((bin, k)) = self.unrefined.iter().find(|(b, _)| b.intersects(region)) {
            return Err(Error::IncompleteData(format!(
                "{k} unrefined zero(s) in bin {bin} inside the query region"
            )));
        }
        Ok(())
    }

    /// Upper-half-plane region for a query over `|Im| ≤ t`, which needs the
    /// real axis inside the coverage.
    fn check_symmetric(&self, re0: f64, re1: f64, t: f64) -> Result<()> {
        if self.coverage.im_min > 0.0 {
            return Err(Error::IncompleteData(format!(
                "covered region {} misses the real axis",
                self.coverage
            )));
        }
        let region = Rect {
            re_min: re0,
            re_max: re1,
            im_min: self.coverage.im_min,
            im_max: t,
        };
        self.check_complete(&region)
    }

    /// `(ζ, weight)` for every resonance and its mirror image in the lower
    /// half-plane. Stored entries below the axis are mirrors already and skipped.
    fn symmetric(&self) -> impl Iterator<Item = (Complex64, u64)> + '_ {
        self.resonances
            .iter()
            .filter(|r| r.position.im >= -AXIS_TOL)
            .flat_map(|r| {
                let m = r.multiplicity as u64;
                let mirror = (r.position.im > AXIS_TOL).then(|| (r.position.conj(), m));
                std::iter::once((r.position, m)).chain(mirror)
            })
    }

    /// Resonance CSV with the coverage and unrefined bins as comment lines.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# coverage {}\n", self.coverage);
        for (bin, k) in &self.unrefined {
            let _ = writeln!(s, "# unrefined {bin} {k}");
        }
        s.push_str(&zeros::resonances_to_csv(&self.resonances));
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut coverage = None;
        let mut unrefined = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.trim().strip_prefix('#') else {
                continue;
            };
            let mut it = rest.split_whitespace();
            match (it.next(), it.next(), it.next()) {
                (Some("coverage"), Some(r), None) => {
                    coverage = Some(r.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?)
                }
                (Some("unrefined"), Some(r), Some(k)) => {
                    let bin: Rect = r.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
                    let k = k.parse().map_err(|_| Error::parse(i + 1, "bad count"))?;
                    unrefined.push((bin, k));
                }
                _ => {}
            }
        }
        let coverage = coverage.ok_or_else(|| Error::parse(0, "missing `# coverage` line"))?;
        let mut set = Self::new(coverage, zeros::parse_resonance_csv(text)?);
        set.unrefined = unrefined;
        Ok(set)
    }
}

/// Largest real zero of `Z`: a downward scan from 1 for the first sign
/// change, bisection, then Newton.
pub fn compute_delta(zeta: &ZetaFunction) -> Result<f64> {
    compute_delta_with_step(zeta, DELTA_SCAN_STEP)
}

pub fn compute_delta_with_step(zeta: &ZetaFunction, step: f64) -> Result<f64> {
    if zeta.n_max() < 8 {
        return Err(Error::InvalidParameters(format!(
            "δ needs word lengths up to at least 8, cache has {}",
            zeta.n_max()
        )));
    }
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::InvalidParameters(format!("scan step {step} outside (0, 1)")));
    }
    let trunc = Truncation::Fixed(zeta.n_max());
    let f = |x: f64| zeta.eval_truncated(Complex64::new(x, 0.0), 0, trunc).0.value.re;
    let mut hi = 1.0;
    let mut f_hi = f(hi);
    let mut bracket = None;
    let steps = (1.0 / step).floor() as usize;
    for k in 1..steps {
        let lo = 1.0 - k as f64 * step;
        let f_lo = f(lo);
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_lo.signum() != f_hi.signum() {
            bracket = Some((lo, hi, f_lo));
            break;
        }
        hi = lo;
        f_hi = f_lo;
    }
    let (mut lo, mut hi, mut f_lo) = bracket.ok_or(Error::NoSignChange)?;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == f_lo.signum() {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..8 {
        let (e, _) = zeta.eval_truncated(Complex64::new(x, 0.0), 1, trunc);
        if e.value.norm() < 1e-12 {
            break;
        }
        let d = e.derivative.unwrap_or_default().re;
        if d == 0.0 {
            break;
        }
        let next = x - e.value.re / d;
        if (next - x).abs() > 1e-9 {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Decay rate predicted by the classical escape rate, `1 − δ`.
pub fn escape_rate(delta: f64) -> f64 {
    1.0 - delta
}

/// Nondecreasing counts against ascending `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub t_values: Vec<f64>,
    pub counts: Vec<u64>,
    /// `[a₀, a₁)`; windowed counts use `(0, ∞)`.
    pub strip: (f64, f64),
}

impl CountSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,count\n");
        for (t, c) in self.t_values.iter().zip(&self.counts) {
            let _ = writeln!(s, "{t},{c}");
        }
        s
    }
}

fn check_ascending(t_values: &[f64]) -> Result<()> {
    if t_values.windows(2).any(|w| !(w[0] <= w[1])) || t_values.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameters("t values must be finite and ascending".into()));
    }
    Ok(())
}

/// `N(a₀, a₁; t) = #{ζ : a₀ ≤ Re ζ < a₁, |Im ζ| ≤ t}` with multiplicity.
pub fn counting_strip(set: &ResonanceSet, a0: f64, a1: f64, t_values: &[f64]) -> Result<CountSeries> {
    if !(a0 < a1) {
        return Err(Error::InvalidParameters(format!("empty strip [{a0}, {a1})")));
    }
    check_ascending(t_values)?;
    if let Some(&t_max) = t_values.last() {
        set.check_symmetric(a0, a1, t_max)?;
    }
    let mut ims: Vec<(f64, u64)> = set
        .symmetric()
        .filter(|(z, _)| z.im >= -AXIS_TOL && z.re >= a0 && z.re < a1)
        .map(|(z, m)| (z.im.max(0.0), if z.im > AXIS_TOL { 2 * m } else { m }))
        .collect();
    ims.sort_by(|a, b| a.0.total_cmp(&b.0));
    let prefix = prefix_sums(&ims);
    let counts = t_values
        .iter()
        .map(|&t| prefix[ims.partition_point(|p| p.0 <= t)])
        .collect();
    Ok(CountSeries {
        t_values: t_values.to_vec(),
        counts,
        strip: (a0, a1),
    })
}

fn prefix_sums(pts: &[(f64, u64)]) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(pts.len() + 1);
    prefix.push(0);
    for p in pts {
        prefix.push(prefix.last().unwrap() + p.1);
    }
    prefix
}

/// `#{ζ : Re ζ > 0, |Im ζ − t| ≤ w}` with multiplicity.
pub fn windowed_count(set: &ResonanceSet, w: f64, t_values: &[f64]) -> Result<CountSeries> {
    if !(w > 0.0) {
        return Err(Error::InvalidParameters(format!("window half-width {w} must be positive")));
    }
    check_ascending(t_values)?;
    if let (Some(first), Some(last)) = (t_values.first(), t_values.last()) {
        let reach = (first - w).abs().max((last + w).abs());
        set.check_symmetric(0.0, set.coverage.re_max, reach)?;
    }
    let mut ims: Vec<(f64, u64)> = set
        .symmetric()
        .filter(|(z, _)| z.re > 0.0)
        .map(|(z, m)| (z.im, m))
        .collect();
    ims.sort_by(|a, b| a.0.total_cmp(&b.0));
    let prefix = prefix_sums(&ims);
    let counts = t_values
        .iter()
        .map(|&t| {
            let lo = ims.partition_point(|p| p.0 < t - w);
            let hi = ims.partition_point(|p| p.0 <= t + w);
            prefix[hi] - prefix[lo]
        })
        .collect();
    Ok(CountSeries {
        t_values: t_values.to_vec(),
        counts,
        strip: (0.0, f64::INFINITY),
    })
}

/// Windowed maximum of real parts; `None` marks an empty window or one
/// reaching past the covered region.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    pub t_values: Vec<f64>,
    pub h_values: Vec<Option<f64>>,
    pub window: f64,
}

impl EnvelopeSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,h\n");
        for (t, h) in self.t_values.iter().zip(&self.h_values) {
            match h {
                Some(h) => writeln!(s, "{t},{h:.12e}"),
                None => writeln!(s, "{t},"),
            }
            .ok();
        }
        s
    }
}

/// `h_w(t) = max{Re ζ : |Im ζ − t| ≤ w}`.
pub fn envelope(set: &ResonanceSet, w: f64, t_values: &[f64]) -> Result<EnvelopeSeries> {
    if !(w > 0.0) {
        return Err(Error::InvalidParameters(format!("window half-width {w} must be positive")));
    }
    check_ascending(t_values)?;
    let mut pts: Vec<(f64, f64)> = set.symmetric().map(|(z, _)| (z.im, z.re)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let reach = set.coverage.im_max;
    let h_values = t_values
        .iter()
        .map(|&t| {
            let in_range = set.coverage.im_min <= 0.0 && (t - w).abs().max((t + w).abs()) <= reach;
            let window = Rect {
                re_min: set.coverage.re_min,
                re_max: set.coverage.re_max,
                im_min: (t - w).min(0.0).max(set.coverage.im_min),
                im_max: (t + w).abs().max((t - w).abs()),
            };
            let blocked = set.unrefined.iter().any(|(b, _)| b.intersects(&window));
            if !in_range || blocked {
                return None;
            }
            let lo = pts.partition_point(|p| p.0 < t - w);
            let hi = pts.partition_point(|p| p.0 <= t + w);
            pts[lo..hi].iter().map(|p| p.1).max_by(f64::total_cmp)
        })
        .collect();
    Ok(EnvelopeSeries {
        t_values: t_values.to_vec(),
        h_values,
        window: w,
    })
}

/// Multiplicity-weighted histogram of `Re ζ` on `[lo, hi]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub weights: Vec<u64>,
    pub im_range: (f64, f64),
}

impl Histogram {
    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.weights.len() as f64
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.lo && x <= self.hi) {
            return None;
        }
        let k = ((x - self.lo) / self.bin_width()).floor() as usize;
        Some(k.min(self.weights.len() - 1))
    }

    pub fn edges(&self, k: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + k as f64 * w, self.lo + (k + 1) as f64 * w)
    }

    /// Heaviest bin, the lowest one on ties; `None` when empty.
    pub fn mode(&self) -> Option<usize> {
        let max = *self.weights.iter().max()?;
        (max > 0).then(|| self.weights.iter().position(|&w| w == max).unwrap())
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("re_lo,re_hi,weight\n");
        for (k, w) in self.weights.iter().enumerate() {
            let (a, b) = self.edges(k);
            let _ = writeln!(s, "{a:.12e},{b:.12e},{w}");
        }
        s
    }
}

/// Real parts of resonances with `Im ζ` in `im_range`, counted once each
/// (no mirroring).
pub fn real_part_histogram(
    set: &ResonanceSet,
    re_range: (f64, f64),
    bins: usize,
    im_range: (f64, f64),
) -> Result<Histogram> {
    if bins == 0 || !(re_range.0 < re_range.1) || !(im_range.0 <= im_range.1) {
        return Err(Error::InvalidParameters("empty histogram range".into()));
    }
    let mut h = Histogram {
        lo: re_range.0,
        hi: re_range.1,
        weights: vec![0; bins],
        im_range,
    };
    for r in &set.resonances {
        let z = r.position;
        if z.im < im_range.0 || z.im > im_range.1 {
            continue;
        }
        if let Some(k) = h.bin_of(z.re) {
            h.weights[k] += r.multiplicity as u64;
        }
    }
    Ok(h)
}

/// Multiplicity-weighted 2D binning, row-major with `j` the `Im` index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    pub weights: Vec<u64>,
}

impl DensityGrid {
    pub fn weight(&self, i: usize, j: usize) -> u64 {
        self.weights[j * self.nx + i]
    }

    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,re,im,weight\n");
        let (dx, dy) = (self.rect.width() / self.nx as f64, self.rect.height() / self.ny as f64);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let re = self.rect.re_min + (i as f64 + 0.5) * dx;
                let im = self.rect.im_min + (j as f64 + 0.5) * dy;
                let _ = writeln!(s, "{i},{j},{re:.9e},{im:.9e},{}", self.weight(i, j));
            }
        }
        s
    }

    /// Plain PGM, highest `Im` in the top row.
    pub fn to_pgm(&self) -> String {
        let max = self.weights.iter().copied().max().unwrap_or(0).max(1);
        let mut s = format!("P2\n{} {}\n{}\n", self.nx, self.ny, max);
        for j in (0..self.ny).rev() {
            let row: Vec<String> = (0..self.nx).map(|i| self.weight(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

pub fn density_grid(set: &ResonanceSet, rect: &Rect, nx: usize, ny: usize) -> Result<DensityGrid> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameters("density grid needs nx, ny ≥ 1".into()));
    }
    let mut g = DensityGrid {
        rect: *rect,
        nx,
        ny,
        weights: vec![0; nx * ny],
    };
    for r in &set.resonances {
        let z = r.position;
        if !rect.contains(z) {
            continue;
        }
        let i = (((z.re - rect.re_min) / rect.width() * nx as f64) as usize).min(nx - 1);
        let j = (((z.im - rect.im_min) / rect.height() * ny as f64) as usize).min(ny - 1);
        g.weights[j * nx + i] += r.multiplicity as u64;
    }
    Ok(g)
}

/// Least-squares fit `count ≈ prefactor · t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// RMS residual in `log count`.
    pub rms: f64,
    pub samples: usize,
}

/// Ordinary least squares of `log count` on `log t` over samples with
/// `t ∈ [t_min, t_max]`, `t > 0` and a positive count.
pub fn weyl_fit(series: &CountSeries, t_min: f64, t_max: f64) -> Result<WeylFit> {
    let pts: Vec<(f64, f64)> = series
        .t_values
        .iter()
        .zip(&series.counts)
        .filter(|(&t, &c)| t >= t_min && t <= t_max && t > 0.0 && c > 0)
        .map(|(&t, &c)| (t.ln(), (c as f64).ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} positive samples in [{t_min}, {t_max}], need at least 5",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all samples at one t".into()));
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    Ok(WeylFit {
        exponent: slope,
        prefactor: icpt.exp(),
        rms: (rss / n).sqrt(),
        samples: pts.len(),
    })
}

/// Separation between δ and the rest of the computed spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub delta: f64,
    /// The resonance at δ, if present in the list.
    pub first: Option<Resonance>,
    /// Rightmost other resonance with `Im ≤ im_max`.
    pub runner_up: Option<Resonance>,
    /// `δ − Re(runner_up)`, the minimum of `δ − h_w` over the range; `None`
    /// when nothing else was computed.
    pub gap: Option<f64>,
    pub im_max: f64,
}

pub fn gap_report(set: &ResonanceSet, delta: f64, im_max: f64) -> GapReport {
    let is_first = |r: &Resonance| (r.position - Complex64::new(delta, 0.0)).norm() < 1e-6;
    let first = set.resonances.iter().find(|r| is_first(r)).copied();
    let runner_up = set
        .resonances
        .iter()
        .filter(|r| !is_first(r) && r.position.im >= -AXIS_TOL && r.position.im <= im_max)
        .max_by(|a, b| a.position.re.total_cmp(&b.position.re))
        .copied();
    GapReport {
        delta,
        first,
        gap: runner_up.map(|r| delta - r.position.re),
        runner_up,
        im_max,
    }
}
