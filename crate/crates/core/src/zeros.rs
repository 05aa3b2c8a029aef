//! Zero counting by the sampled argument principle, and Newton refinement.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::zeta::{Truncation, ZetaFunction};

/// `|Z|` below this on a sample point counts as a zero on the path.
pub const ON_PATH_THRESHOLD: f64 = 1e-13;

/// Smallest bin side used to separate close zeros below pixel size.
const SPLIT_FLOOR: f64 = 1e-6;

/// Second difference of `log|Z|` along a path above which the interval
/// is sampled more finely.
const LOG_DIP: f64 = 1.0;

/// Refined zeros closer than this fraction of a pixel are one zero found twice.
const DEDUPE_REL: f64 = 1e-4;

/// Newton steps below this that fail to shrink end the iteration.
const STAGNATION_STEP: f64 = 1e-8;

/// Truncation order of the cheap first Newton phase.
const PRESOLVE_ORDER: usize = 8;

/// Axis-parallel rectangle in the `s`-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let finite = [re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite());
        if !finite || !(re_min < re_max) || !(im_min < im_max) {
            return Err(Error::InvalidParameters(format!(
                "degenerate rectangle [{re_min}, {re_max}]×[{im_min}, {im_max}]"
            )));
        }
        Ok(Rect {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Square of half-side `r` around `c`.
    pub fn around(c: Complex64, r: f64) -> Self {
        Rect {
            re_min: c.re - r,
            re_max: c.re + r,
            im_min: c.im - r,
            im_max: c.im + r,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    /// Closed containment.
    pub fn contains(&self, s: Complex64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }

    /// Whether the closed rectangles share a point.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.re_min <= other.re_max
            && other.re_min <= self.re_max
            && self.im_min <= other.im_max
            && other.im_min <= self.im_max
    }

    pub fn expanded(&self, dx: f64, dy: f64) -> Self {
        Rect {
            re_min: self.re_min - dx,
            re_max: self.re_max + dx,
            im_min: self.im_min - dy,
            im_max: self.im_max + dy,
        }
    }

    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        Rect {
            re_min: self.re_min + dx,
            re_max: self.re_max + dx,
            im_min: self.im_min + dy,
            im_max: self.im_max + dy,
        }
    }

    /// Mirror image under `s ↦ conj(s)`.
    pub fn conj(&self) -> Self {
        Rect {
            im_min: -self.im_max,
            im_max: -self.im_min,
            ..*self
        }
    }

    pub fn split_re(&self, x: f64) -> (Rect, Rect) {
        (
            Rect {
                re_max: x,
                ..*self
            },
            Rect {
                re_min: x,
                ..*self
            },
        )
    }

    pub fn split_im(&self, y: f64) -> (Rect, Rect) {
        (
            Rect {
                im_max: y,
                ..*self
            },
            Rect {
                im_min: y,
                ..*self
            },
        )
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.re_min, self.re_max, self.im_min, self.im_max
        )
    }
}

impl FromStr for Rect {
    type Err = Error;

    /// `re0,re1,im0,im1`
    fn from_str(text: &str) -> Result<Self> {
        let v = text
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidParameters(format!("bad rectangle `{text}`")))?;
        match v.as_slice() {
            &[a, b, c, d] => Rect::new(a, b, c, d),
            _ => Err(Error::InvalidParameters(format!(
                "rectangle `{text}` needs four numbers re0,re1,im0,im1"
            ))),
        }
    }
}

/// Argument sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub min_spacing: f64,
    pub min_samples: usize,
    /// Increments larger than this are bisected.
    pub max_increment: f64,
    pub max_depth: usize,
    /// Lowest `Re s` accepted for sampling.
    pub floor: f64,
    pub retries: usize,
    pub exec: Execution,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            min_spacing: 0.01,
            min_samples: 8,
            max_increment: PI / 2.0,
            max_depth: 12,
            floor: -0.5,
            retries: 3,
            exec: Execution::default(),
        }
    }
}

/// Newton refinement parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub tol: f64,
    pub min_step: f64,
    pub max_iter: usize,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            tol: 1e-10,
            min_step: 1e-13,
            max_iter: 50,
        }
    }
}

/// Winding number of `Z` around a closed rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub count: i64,
    /// Distance of the raw winding sum from `count`.
    pub residual: f64,
    /// Rectangle actually sampled (sides may be nudged off zeros).
    pub rect: Rect,
}

impl Winding {
    pub fn flagged(&self) -> bool {
        self.residual > 0.25
    }
}

/// Per-bin zero counts over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `counts[j·nx + i]` for the bin in column `i`, row `j`
    /// (rows ascend in `Im s`).
    pub counts: Vec<i64>,
    pub residuals: Vec<f64>,
    /// Grid-line positions actually used (after any perturbation).
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Winding number of the outer boundary.
    pub total: i64,
}

impl BinGrid {
    pub fn count(&self, i: usize, j: usize) -> i64 {
        self.counts[j * self.nx + i]
    }

    pub fn bin(&self, i: usize, j: usize) -> Rect {
        Rect {
            re_min: self.xs[i],
            re_max: self.xs[i + 1],
            im_min: self.ys[j],
            im_max: self.ys[j + 1],
        }
    }

    pub fn sum(&self) -> i64 {
        self.counts.iter().sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// Counts summed over `fx × fy` blocks; `nx`, `ny` must be divisible.
    pub fn aggregate(&self, fx: usize, fy: usize) -> Vec<i64> {
        let (mx, my) = (self.nx / fx, self.ny / fy);
        let mut out = vec![0; mx * my];
        for j in 0..self.ny {
            for i in 0..self.nx {
                out[(j / fy) * mx + i / fx] += self.count(i, j);
            }
        }
        out
    }
}

/// A refined zero of `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub position: Complex64,
    pub multiplicity: u32,
    /// `|Z(position)|`.
    pub residual: f64,
    /// Bin the refinement was seeded from.
    pub bin: Rect,
}

/// Bin with a positive count whose zero could not be refined.
#[derive(Debug, Clone, PartialEq)]
pub struct UnrefinedBin {
    pub bin: Rect,
    pub count: i64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocateReport {
    pub rect: Rect,
    pub resonances: Vec<Resonance>,
    pub unrefined: Vec<UnrefinedBin>,
    /// Entries found twice (closer than a small fraction of a pixel) and merged.
    pub merged: usize,
    /// Winding number of the whole rectangle.
    pub total: i64,
}

impl LocateReport {
    pub fn located_multiplicity(&self) -> i64 {
        self.resonances.iter().map(|r| r.multiplicity as i64).sum()
    }
}

#[derive(Clone, Copy)]
enum Line {
    X(usize),
    Y(usize),
}

/// Argument-principle engine over one zeta function.
#[derive(Debug, Clone, Copy)]
pub struct ZeroCounter<'a> {
    zeta: &'a ZetaFunction,
    cfg: SamplingConfig,
    refine: RefineConfig,
    /// Truncation order pinned for a region; `None` picks it per point.
    order: Option<usize>,
}

impl<'a> ZeroCounter<'a> {
    pub fn new(zeta: &'a ZetaFunction, cfg: SamplingConfig) -> Self {
        ZeroCounter {
            zeta,
            cfg,
            refine: RefineConfig::default(),
            order: None,
        }
    }

    /// Same counter with every evaluation at truncation order `n`.
    pub fn with_order(mut self, n: usize) -> Self {
        self.order = Some(n);
        self
    }

    fn order_at(&self, s: Complex64) -> usize {
        self.order.unwrap_or_else(|| self.zeta.order_at(s))
    }

    fn truncation(&self) -> Truncation {
        self.order.map_or(self.zeta.truncation(), Truncation::Fixed)
    }

    pub fn with_refine(mut self, refine: RefineConfig) -> Self {
        self.refine = refine;
        self
    }

    pub fn zeta(&self) -> &ZetaFunction {
        self.zeta
    }

    pub fn config(&self) -> &SamplingConfig {
        &self.cfg
    }

    fn check_floor(&self, rect: &Rect) -> Result<()> {
        if rect.re_min < self.cfg.floor {
            return Err(Error::BelowFloor {
                re: rect.re_min,
                floor: self.cfg.floor,
            });
        }
        Ok(())
    }

    /// Truncation order used on a segment between `p` and `q`.
    fn order_between(&self, p: Complex64, q: Complex64) -> usize {
        self.order_at(p).max(self.order_at(q))
    }

    /// Truncation order used over a rectangle.
    pub fn order_for(&self, rect: &Rect) -> usize {
        if let Some(n) = self.order {
            return n;
        }
        let c = rect.center();
        [
            Complex64::new(rect.re_min, rect.im_min),
            Complex64::new(rect.re_max, rect.im_min),
            Complex64::new(rect.re_min, rect.im_max),
            Complex64::new(rect.re_max, rect.im_max),
            c,
        ]
        .iter()
        .map(|&s| self.zeta.order_at(s))
        .max()
        .unwrap_or(1)
    }

    /// Sum of principal-branch argument increments of `Z` along `[p, q]`.
    pub fn edge_arg_delta(&self, p: Complex64, q: Complex64) -> Result<f64> {
        if p == q {
            return Ok(0.0);
        }
        self.segment_delta(p, q, self.order_between(p, q))
    }

    /// Segments are always sampled from the endpoint with the smaller
    /// `(Re, Im)`, so reversing a segment negates its value exactly.
    fn segment_delta(&self, p: Complex64, q: Complex64, n: usize) -> Result<f64> {
        if p == q {
            return Ok(0.0);
        }
        let forward = (p.re, p.im) < (q.re, q.im);
        let (a, b) = if forward { (p, q) } else { (q, p) };
        let m = self.sample_count(a, b);
        let h = (b - a) / m as f64;
        let vals = self.zeta.sample_line(a, h, m + 1, n);
        let total = self.path_delta(a, h, &vals, n)?;
        Ok(if forward { total } else { -total })
    }

    /// Sample intervals on `[a, b]`.
    fn sample_count(&self, a: Complex64, b: Complex64) -> usize {
        (((b - a).norm() / self.cfg.min_spacing).ceil() as usize).max(self.cfg.min_samples)
    }

    /// Argument change along samples `vals[k] = Z(a + k·h)`.
    fn path_delta(&self, a: Complex64, h: Complex64, vals: &[Complex64], n: usize) -> Result<f64> {
        let m = vals.len() - 1;
        if let Some(k) = vals.iter().position(|v| v.norm() < ON_PATH_THRESHOLD) {
            return Err(Error::OnPathZero { location: a + h * k as f64 });
        }
        let log_mod: Vec<f64> = vals.iter().map(|v| v.norm().ln()).collect();
        // a dip of log|Z| at a sample: a zero close to the path
        let dip = |k: usize| k > 0 && k < m && log_mod[k - 1] + log_mod[k + 1] - 2.0 * log_mod[k] > LOG_DIP;
        let mut total = 0.0;
        for k in 0..m {
            let s0 = a + h * k as f64;
            let s1 = a + h * (k + 1) as f64;
            let forced = dip(k) || dip(k + 1);
            total += self.increment(s0, vals[k], s1, vals[k + 1], n, 0, forced)?;
        }
        Ok(total)
    }

    fn value(&self, s: Complex64, n: usize) -> Complex64 {
        self.zeta.eval_truncated(s, 0, Truncation::Fixed(n)).0.value
    }

    /// `|Z′/Z|` at `s`: the largest rate at which the argument can turn.
    fn log_rate(&self, s: Complex64, n: usize) -> f64 {
        let e = self.zeta.eval_truncated(s, 1, Truncation::Fixed(n)).0;
        e.derivative.unwrap_or_default().norm() / e.value.norm()
    }

    /// Principal argument increment from `s0` to `s1`, bisected while it
    /// exceeds `max_increment`. A `forced` interval has a zero close by: a
    /// double zero passed at a distance well below the sample spacing turns
    /// the argument by more than `π`, which the principal branch can read as
    /// a small turn the other way. Such intervals are bisected until the
    /// logarithmic derivative at both ends bounds the turn.
    #[allow(clippy::too_many_arguments)]
    fn increment(
        &self,
        s0: Complex64,
        v0: Complex64,
        s1: Complex64,
        v1: Complex64,
        n: usize,
        depth: usize,
        forced: bool,
    ) -> Result<f64> {
        let inc = (v1 * v0.conj()).arg();
        let small = inc.abs() <= self.cfg.max_increment;
        let forced = forced && {
            let len = (s1 - s0).norm();
            len * self.log_rate(s0, n).max(self.log_rate(s1, n)) > self.cfg.max_increment
        };
        if small && !forced {
            return Ok(inc);
        }
        let mid = (s0 + s1) * 0.5;
        if depth >= self.cfg.max_depth {
            // at the rounding floor of a split double zero |Z′/Z| is noise
            if small {
                return Ok(inc);
            }
            return Err(Error::OnPathZero { location: mid });
        }
        let vm = self.value(mid, n);
        if vm.norm() < ON_PATH_THRESHOLD {
            return Err(Error::OnPathZero { location: mid });
        }
        Ok(self.increment(s0, v0, mid, vm, n, depth + 1, forced)?
            + self.increment(mid, vm, s1, v1, n, depth + 1, forced)?)
    }

    /// Zero count inside `rect` by the argument principle.
    pub fn rect_winding(&self, rect: &Rect) -> Result<Winding> {
        let grid = self.bin_count_grid(rect, 1, 1)?;
        let mut w = Winding {
            count: grid.counts[0],
            residual: grid.residuals[0],
            rect: grid.bin(0, 0),
        };
        if w.flagged() {
            let fine = ZeroCounter {
                cfg: SamplingConfig {
                    min_spacing: self.cfg.min_spacing / 4.0,
                    min_samples: self.cfg.min_samples * 4,
                    ..self.cfg
                },
                ..*self
            };
            let g = fine.bin_count_grid(rect, 1, 1)?;
            w = Winding {
                count: g.counts[0],
                residual: g.residuals[0],
                rect: g.bin(0, 0),
            };
        }
        Ok(w)
    }

    /// Per-bin counts on an `nx × ny` grid; each grid segment is sampled
    /// once and shared by its two bins.
    pub fn bin_count_grid(&self, rect: &Rect, nx: usize, ny: usize) -> Result<BinGrid> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameters("grid needs nx, ny ≥ 1".into()));
        }
        self.check_floor(rect)?;
        let bw = rect.width() / nx as f64;
        let bh = rect.height() / ny as f64;
        let mut xs: Vec<f64> = (0..=nx).map(|i| rect.re_min + bw * i as f64).collect();
        let mut ys: Vec<f64> = (0..=ny).map(|j| rect.im_min + bh * j as f64).collect();
        xs[nx] = rect.re_max;
        ys[ny] = rect.im_max;
        self.count_on_lines(xs, ys)
    }

    /// Per-bin counts on a grid with arbitrary ascending line positions.
    pub fn bin_count_lines(&self, xs: &[f64], ys: &[f64]) -> Result<BinGrid> {
        let ascending = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|p| p[0] < p[1]);
        if !ascending(xs) || !ascending(ys) {
            return Err(Error::InvalidParameters(
                "grid lines must be strictly ascending, at least two per axis".into(),
            ));
        }
        self.check_floor(&Rect::new(xs[0], xs[xs.len() - 1], ys[0], ys[ys.len() - 1])?)?;
        self.count_on_lines(xs.to_vec(), ys.to_vec())
    }

    fn count_on_lines(&self, mut xs: Vec<f64>, mut ys: Vec<f64>) -> Result<BinGrid> {
        let (nx, ny) = (xs.len() - 1, ys.len() - 1);
        // perturbations stay below the sample spacing, so a shifted outer
        // line does not sweep across a neighbouring row of zeros
        let bw = ((xs[nx] - xs[0]) / nx as f64).min(self.cfg.min_spacing);
        let bh = ((ys[ny] - ys[0]) / ny as f64).min(self.cfg.min_spacing);
        let mut tries_x = vec![0usize; nx + 1];
        let mut tries_y = vec![0usize; ny + 1];
        loop {
            match self.grid_pass(&xs, &ys) {
                Ok(grid) => return Ok(grid),
                Err((line, Error::OnPathZero { location })) => {
                    let (tries, pos, step) = match line {
                        Line::X(i) => (&mut tries_x[i], &mut xs[i], bw),
                        Line::Y(j) => (&mut tries_y[j], &mut ys[j], bh),
                    };
                    *tries += 1;
                    if *tries > self.cfg.retries {
                        return Err(Error::BoundaryZero {
                            location,
                            retries: self.cfg.retries,
                        });
                    }
                    *pos += 0.37 * step * 10f64.powi(-(*tries as i32));
                }
                Err((_, e)) => return Err(e),
            }
        }
    }

    fn grid_pass(&self, xs: &[f64], ys: &[f64]) -> std::result::Result<BinGrid, (Line, Error)> {
        let (nx, ny) = (xs.len() - 1, ys.len() - 1);
        let c = |x: f64, y: f64| Complex64::new(x, y);
        // truncation order per horizontal grid line
        let line_orders = exec::map_range(self.cfg.exec, ny + 1, |j| {
            let y = ys[j];
            [xs[0], 0.5 * (xs[0] + xs[nx]), xs[nx]]
                .iter()
                .map(|&x| self.order_at(c(x, y)))
                .max()
                .unwrap_or(1)
        });
        let n_tab = line_orders.iter().copied().max().unwrap_or(1);
        let lengths: Vec<f64> = self.zeta.flat_lengths(n_tab).collect();
        // e^{−sℓ} factors as exp(−xℓ)·e^{−iyℓ}: one modulus table per grid
        // column, one phase table per row, one ratio table per distinct step
        let moduli = exec::map_collect(self.cfg.exec, xs, |&x| {
            lengths.iter().map(|&l| (-x * l).exp()).collect::<Vec<f64>>()
        });
        let mut steps: Vec<Complex64> = Vec::new();
        let mut step_of = |p: Complex64, q: Complex64| {
            let h = (q - p) / self.sample_count(p, q) as f64;
            match steps.iter().position(|&g| g == h) {
                Some(k) => k,
                None => {
                    steps.push(h);
                    steps.len() - 1
                }
            }
        };
        let h_steps: Vec<usize> = (0..nx).map(|i| step_of(c(xs[i], 0.0), c(xs[i + 1], 0.0))).collect();
        let v_steps: Vec<usize> = (0..ny).map(|j| step_of(c(0.0, ys[j]), c(0.0, ys[j + 1]))).collect();
        let ratios = exec::map_collect(self.cfg.exec, &steps, |&h| {
            lengths.iter().map(|&l| (-h * l).exp()).collect::<Vec<Complex64>>()
        });
        // row j: its horizontal segments, then the vertical ones above it
        let rows = exec::map_range(self.cfg.exec, ny + 1, |j| {
            let phase: Vec<Complex64> =
                lengths.iter().map(|&l| Complex64::from_polar(1.0, -ys[j] * l)).collect();
            let sample = |i: usize, n: usize, step: usize, m: usize| {
                let start: Vec<Complex64> =
                    phase.iter().zip(&moduli[i]).map(|(p, &r)| p * r).collect();
                self.zeta.sample_from(&start, &ratios[step], m + 1, n)
            };
            let mut out = Vec::with_capacity(2 * nx + 1);
            for i in 0..nx {
                let (p, q) = (c(xs[i], ys[j]), c(xs[i + 1], ys[j]));
                let n = line_orders[j];
                let vals = sample(i, n, h_steps[i], self.sample_count(p, q));
                out.push(self.path_delta(p, steps[h_steps[i]], &vals, n).map_err(|e| (Line::Y(j), e))?);
            }
            if j < ny {
                for i in 0..=nx {
                    let (p, q) = (c(xs[i], ys[j]), c(xs[i], ys[j + 1]));
                    let n = line_orders[j].max(line_orders[j + 1]);
                    let vals = sample(i, n, v_steps[j], self.sample_count(p, q));
                    out.push(self.path_delta(p, steps[v_steps[j]], &vals, n).map_err(|e| (Line::X(i), e))?);
                }
            }
            Ok(out)
        });
        let rows = rows.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
        let horiz = |i: usize, j: usize| rows[j][i];
        let vert = |i: usize, j: usize| rows[j][nx + i];
        let mut counts = Vec::with_capacity(nx * ny);
        let mut residuals = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let w = (horiz(i, j) + vert(i + 1, j) - horiz(i, j + 1) - vert(i, j)) / TAU;
                let k = w.round();
                counts.push(k as i64);
                residuals.push((w - k).abs());
            }
        }
        let mut boundary = 0.0;
        for i in 0..nx {
            boundary += horiz(i, 0) - horiz(i, ny);
        }
        for j in 0..ny {
            boundary += vert(nx, j) - vert(0, j);
        }
        let rect = Rect {
            re_min: xs[0],
            re_max: xs[nx],
            im_min: ys[0],
            im_max: ys[ny],
        };
        Ok(BinGrid {
            rect,
            nx,
            ny,
            counts,
            residuals,
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            total: (boundary / TAU).round() as i64,
        })
    }

    /// Newton iteration from `seed`, confined to `guard`; multiplicity by a
    /// small verification winding.
    pub fn refine_zero(&self, seed: Complex64, guard: &Rect) -> Result<Resonance> {
        // the switch to Z′ can also fire on a close pair of simple zeros
        // and land on the saddle between them
        self.newton(seed, guard, true).or_else(|_| self.newton(seed, guard, false))
    }

    fn newton(&self, seed: Complex64, guard: &Rect, double_switch: bool) -> Result<Resonance> {
        let cfg = self.refine;
        let fail = |reason: String| Error::NoConvergence { seed, reason };
        let trunc = self.truncation();
        let mut s = self.presolve(seed, guard);
        let mut last_step = f64::INFINITY;
        let mut halvings = 0;
        let mut converged = false;
        for _ in 0..cfg.max_iter {
            let e = self.zeta.eval_truncated(s, 1, trunc).0;
            if e.value.norm() < cfg.tol {
                converged = true;
                self.polish(&mut s, &mut last_step, trunc);
                break;
            }
            let d = e.derivative.unwrap_or_default();
            if d.norm() == 0.0 || !d.norm().is_finite() {
                return Err(fail("vanishing derivative".into()));
            }
            let step = e.value / d;
            // tiny steps that stop shrinking: |Z| is at its rounding floor
            if step.norm() < STAGNATION_STEP && step.norm() >= last_step {
                converged = true;
                break;
            }
            // steady halving is Newton on a double zero; near the rounding
            // floor it would wander, so finish on Z′ instead
            let ratio = step.norm() / last_step;
            halvings = if (0.4..0.6).contains(&ratio) { halvings + 1 } else { 0 };
            if double_switch && halvings >= 3 {
                s -= step;
                if let Some(t) = self.newton_on_derivative(s, guard, trunc) {
                    s = t;
                    last_step = f64::INFINITY;
                    converged = true;
                    break;
                }
                halvings = 0;
                last_step = step.norm();
                continue;
            }
            s -= step;
            last_step = step.norm();
            if !guard.contains(s) {
                return Err(fail(format!("left the guard box at {s}")));
            }
            if last_step < step_floor(cfg.min_step, s) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(fail(format!("no convergence in {} steps", cfg.max_iter)));
        }
        let radius = if last_step.is_finite() { (2.0 * last_step).max(1e-4) } else { 1e-4 };
        let w = self.rect_winding(&Rect::around(s, radius))?;
        if w.count < 1 {
            return Err(fail(format!("verification winding {} at {s}", w.count)));
        }
        if w.count >= 2 {
            s = self.center_of_cluster(s, w.count as usize, radius)?;
        }
        Ok(Resonance {
            position: s,
            multiplicity: w.count as u32,
            residual: self.zeta.eval_truncated(s, 0, trunc).0.value.norm(),
            bin: *guard,
        })
    }

    /// Zero of `Z′` near `s`, while the steps keep shrinking.
    fn newton_on_derivative(&self, s0: Complex64, guard: &Rect, trunc: Truncation) -> Option<Complex64> {
        let mut s = s0;
        let mut prev = f64::INFINITY;
        for _ in 0..self.refine.max_iter {
            let (_, jet) = self.zeta.eval_truncated(s, 2, trunc);
            let step = jet[1] / (jet[2] * 2.0);
            if !(step.norm() < prev) {
                break;
            }
            prev = step.norm();
            s -= step;
            if !guard.contains(s) {
                return None;
            }
            if prev < step_floor(self.refine.min_step, s) {
                break;
            }
        }
        (prev < STAGNATION_STEP).then_some(s)
    }

    /// Newton steps on a low truncation order, which is far cheaper and
    /// already places the iterate within about `1e−6` of the zero.
    fn presolve(&self, seed: Complex64, guard: &Rect) -> Complex64 {
        let full = self.order.unwrap_or(self.zeta.n_max());
        let low = PRESOLVE_ORDER.min(full);
        if low >= full {
            return seed;
        }
        let mut s = seed;
        for _ in 0..self.refine.max_iter {
            let e = self.zeta.eval_truncated(s, 1, Truncation::Fixed(low)).0;
            let step = e.value / e.derivative.unwrap_or_default();
            let next = s - step;
            if !(step.norm().is_finite() && guard.contains(next)) {
                break;
            }
            s = next;
            if step.norm() < 1e-7 {
                break;
            }
        }
        s
    }

    /// A few extra Newton steps past the tolerance, while they keep shrinking.
    fn polish(&self, s: &mut Complex64, last_step: &mut f64, trunc: Truncation) {
        let mut prev = f64::INFINITY;
        for _ in 0..4 {
            let e = self.zeta.eval_truncated(*s, 1, trunc).0;
            let Some(d) = e.derivative.filter(|d| d.norm() > 0.0) else {
                return;
            };
            let step = e.value / d;
            if !(step.norm() < prev) {
                return;
            }
            *s -= step;
            prev = step.norm();
            *last_step = prev;
            if prev < 1e-15 * s.norm().max(1.0) {
                return;
            }
        }
    }

    /// A multiple zero may split into a tight cluster under truncation;
    /// its center is the nearby zero of `Z^{(m−1)}`. Only `m = 2` is
    /// handled, higher orders keep the Newton point.
    fn center_of_cluster(&self, s0: Complex64, m: usize, radius: f64) -> Result<Complex64> {
        if m != 2 {
            return Ok(s0);
        }
        let trunc = self.truncation();
        let mut s = s0;
        let mut prev = f64::INFINITY;
        for _ in 0..self.refine.max_iter {
            let (_, jet) = self.zeta.eval_truncated(s, 2, trunc);
            let step = jet[1] / (jet[2] * 2.0);
            // past the rounding floor the steps stop shrinking
            if !(step.norm() < prev) {
                break;
            }
            prev = step.norm();
            s -= step;
            if (s - s0).norm() > radius {
                return Ok(s0);
            }
            if step.norm() < step_floor(self.refine.min_step, s) {
                break;
            }
        }
        Ok(s)
    }

    /// Finds all zeros in `rect`: counts on a coarse grid, subdivides bins
    /// until a Newton refinement from the bin center accounts for the whole
    /// bin count or the bin reaches `pixel` size.
    pub fn locate_all(&self, rect: &Rect, pixel: f64) -> Result<LocateReport> {
        if !(pixel > 0.0) {
            return Err(Error::InvalidParameters("pixel must be positive".into()));
        }
        self.check_floor(rect)?;
        let coarse = (64.0 * pixel).max(0.25);
        let nx = (rect.width() / coarse).ceil().max(1.0) as usize;
        let ny = (rect.height() / coarse).ceil().max(1.0) as usize;
        let grid = self.bin_count_grid(rect, nx, ny)?;
        let mut pending: Vec<(Rect, i64)> = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if grid.count(i, j) > 0 {
                    pending.push((grid.bin(i, j), grid.count(i, j)));
                }
            }
        }
        let outcomes = exec::map_collect(self.cfg.exec, &pending, |&(bin, count)| {
            let mut found = Vec::new();
            let mut unrefined = Vec::new();
            let local = self.with_order(self.order_for(&bin));
            local.resolve_bin(bin, count, pixel, &mut found, &mut unrefined);
            (found, unrefined)
        });
        let mut resonances = Vec::new();
        let mut unrefined = Vec::new();
        for (f, u) in outcomes {
            resonances.extend(f);
            unrefined.extend(u);
        }
        sort_resonances(&mut resonances);
        let before = resonances.len();
        let resonances = dedupe(resonances, DEDUPE_REL * pixel);
        Ok(LocateReport {
            rect: grid.rect,
            merged: before - resonances.len(),
            resonances,
            unrefined,
            total: grid.total,
        })
    }

    fn resolve_bin(
        &self,
        bin: Rect,
        count: i64,
        pixel: f64,
        found: &mut Vec<Resonance>,
        unrefined: &mut Vec<UnrefinedBin>,
    ) {
        let small = bin.width() <= pixel && bin.height() <= pixel;
        if count > 2 && !small {
            self.subdivide(bin, count, pixel, found, unrefined);
            return;
        }
        let guard = bin.expanded(bin.width(), bin.height());
        let attempt = self.refine_zero(bin.center(), &guard);
        if let Ok(r) = &attempt {
            if bin.contains(r.position) && r.multiplicity as i64 == count {
                found.push(Resonance { bin, ..*r });
                return;
            }
        }
        if small {
            self.resolve_small(bin, count, attempt, found, unrefined);
            return;
        }
        self.subdivide(bin, count, pixel, found, unrefined);
    }

    /// Pixel-sized bin: the center seed plus the four quarter points, keeping
    /// distinct zeros until the bin count is accounted for.
    fn resolve_small(
        &self,
        bin: Rect,
        count: i64,
        first: Result<Resonance>,
        found: &mut Vec<Resonance>,
        unrefined: &mut Vec<UnrefinedBin>,
    ) {
        let near = bin.expanded(bin.width(), bin.height());
        let sep = 1e-3 * bin.width().max(bin.height());
        let c = bin.center();
        let (dx, dy) = (bin.width() / 4.0, bin.height() / 4.0);
        let seeds = [
            Complex64::new(c.re - dx, c.im - dy),
            Complex64::new(c.re + dx, c.im - dy),
            Complex64::new(c.re - dx, c.im + dy),
            Complex64::new(c.re + dx, c.im + dy),
        ];
        let mut local: Vec<Resonance> = Vec::new();
        let mut last_err = None;
        let mut attempt = Some(first);
        let mut next_seed = seeds.iter();
        loop {
            let have: i64 = local.iter().map(|r| r.multiplicity as i64).sum();
            if have >= count {
                break;
            }
            let result = match attempt.take() {
                Some(r) => r,
                None => match next_seed.next() {
                    Some(&seed) => self.refine_zero(seed, &near),
                    None => break,
                },
            };
            // a simple zero outside the bin belongs to a neighbour; the
            // center of a split multiple zero may sit just across the edge
            match result {
                Ok(r) if bin.contains(r.position) || (r.multiplicity >= 2 && near.contains(r.position)) => {
                    if local.iter().all(|q| (q.position - r.position).norm() > sep) {
                        local.push(Resonance { bin, ..r });
                    }
                }
                Ok(r) => {
                    last_err = Some(format!("refinement converged outside the bin at {}", r.position))
                }
                Err(e) => last_err = Some(e.to_string()),
            }
        }
        let have: i64 = local.iter().map(|r| r.multiplicity as i64).sum();
        let size = bin.width().max(bin.height());
        if have < count && size > SPLIT_FLOOR {
            // close pairs: separate them by counting below pixel size
            self.subdivide(bin, count, size / 2.0, found, unrefined);
            return;
        }
        found.extend(local);
        if have < count {
            unrefined.push(UnrefinedBin {
                bin,
                count: count - have,
                reason: last_err.unwrap_or_else(|| "bin count exceeds refined multiplicity".into()),
            });
        }
    }

    fn subdivide(
        &self,
        bin: Rect,
        count: i64,
        pixel: f64,
        found: &mut Vec<Resonance>,
        unrefined: &mut Vec<UnrefinedBin>,
    ) {
        let fx = if bin.width() > pixel { 2 } else { 1 };
        let fy = if bin.height() > pixel { 2 } else { 1 };
        match self.bin_count_grid(&bin, fx, fy) {
            Ok(sub) => {
                for j in 0..fy {
                    for i in 0..fx {
                        let k = sub.count(i, j);
                        if k > 0 {
                            self.resolve_bin(sub.bin(i, j), k, pixel, found, unrefined);
                        }
                    }
                }
            }
            Err(e) => unrefined.push(UnrefinedBin {
                bin,
                count,
                reason: e.to_string(),
            }),
        }
    }
}

/// Step size below which Newton stops: `min_step`, or a few ulps of `|s|`.
fn step_floor(min_step: f64, s: Complex64) -> f64 {
    min_step.max(4.0 * f64::EPSILON * s.norm())
}

/// Sorts by `Im`, then `Re`.
pub fn sort_resonances(list: &mut [Resonance]) {
    list.sort_by(|a, b| {
        a.position
            .im
            .total_cmp(&b.position.im)
            .then(a.position.re.total_cmp(&b.position.re))
    });
}

/// Merges entries closer than `radius`, keeping the first and adding
/// multiplicities. Input must be sorted by [`sort_resonances`].
fn dedupe(list: Vec<Resonance>, radius: f64) -> Vec<Resonance> {
    let mut out: Vec<Resonance> = Vec::with_capacity(list.len());
    for r in list {
        let dup = out
            .iter_mut()
            .rev()
            .take_while(|q| r.position.im - q.position.im < radius)
            .find(|q| (q.position - r.position).norm() < radius);
        match dup {
            Some(q) => q.multiplicity = q.multiplicity.max(r.multiplicity),
            None => out.push(r),
        }
    }
    out
}

/// Writes the resonance CSV body (header plus rows).
pub fn resonances_to_csv(list: &[Resonance]) -> String {
    let mut sorted = list.to_vec();
    sort_resonances(&mut sorted);
    let mut s = String::from("re,im,multiplicity,residual\n");
    for r in &sorted {
        s.push_str(&format!(
            "{:.14e},{:.14e},{},{:.3e}\n",
            r.position.re, r.position.im, r.multiplicity, r.residual
        ));
    }
    s
}

/// Reads a resonance CSV; `#` lines are skipped. The origin bin is not
/// stored, so it is set to a point rectangle at the position.
pub fn parse_resonance_csv(text: &str) -> Result<Vec<Resonance>> {
    let mut out = Vec::new();
    let mut header = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header {
            if line != "re,im,multiplicity,residual" {
                return Err(Error::parse(i + 1, "expected header `re,im,multiplicity,residual`"));
            }
            header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(Error::parse(i + 1, "expected 4 fields"));
        }
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(i + 1, format!("bad number `{t}`")))
        };
        let position = Complex64::new(num(f[0])?, num(f[1])?);
        let multiplicity = f[2]
            .trim()
            .parse::<u32>()
            .map_err(|_| Error::parse(i + 1, "bad multiplicity"))?;
        out.push(Resonance {
            position,
            multiplicity,
            residual: num(f[3])?,
            bin: Rect {
                re_min: position.re,
                re_max: position.re,
                im_min: position.im,
                im_max: position.im,
            },
        });
    }
    if !header {
        return Err(Error::parse(0, "missing header"));
    }
    Ok(out)
}
