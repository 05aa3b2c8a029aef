use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{Context, Result};
use num_complex::Complex64;

use selberg_core::cache::LengthCache;
use selberg_core::census::{self, ResonanceSet};
use selberg_core::schottky::SurfaceSpec;
use selberg_core::words::{self, ClassTableConfig};
use selberg_core::zeros::{Rect, RefineConfig, SamplingConfig, ZeroCounter};
use selberg_core::zeta::{Truncation, ZetaFunction};
use selberg_core::Error;

use crate::manifest::RunManifest;
use crate::plot;
use crate::{Census, Command, EvalOpts, Output, Sampling, Series, Source};

/// Depth of a cache built on the fly from `--spec`.
const DEFAULT_NMAX: usize = 12;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Cache { source, out } => cache(&source, &out),
        Command::Eval { source, eval, s, out } => evaluate(&source, &eval, &s, &out),
        Command::Count {
            source,
            eval,
            sampling,
            bins,
            out,
        } => count(&source, &eval, &sampling, &bins, &out),
        Command::Locate {
            source,
            eval,
            sampling,
            pixel,
            refine_tol,
            out,
        } => locate(&source, &eval, &sampling, pixel, refine_tol, &out),
        Command::Census(c) => census(c),
        Command::Plot { input, loglog, out } => {
            let text = read(&input)?;
            let (xl, yl, pts) = plot::read_series(&text)?;
            let m = RunManifest::new("plot")
                .param("input", input.display())
                .param("loglog", loglog);
            let svg = plot::line_svg(&pts, &xl, &yl, loglog)?;
            // the manifest rides along as an XML comment
            let line = m.to_line();
            emit(&out, &format!("<!--{} -->\n{svg}", line.trim_start_matches('#')))
        }
    }
}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidParameters(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(Error::Io)
        .with_context(|| format!("reading {}", path.display()))
}

fn emit(out: &Output, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text)
            .map_err(Error::Io)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pair<T: FromStr>(text: &str, what: &str) -> Result<(T, T)> {
    let v: Vec<&str> = text.split(',').map(str::trim).collect();
    match v.as_slice() {
        [a, b] => match (a.parse(), b.parse()) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            _ => Err(invalid(format!("bad {what} `{text}`"))),
        },
        _ => Err(invalid(format!("{what} `{text}` needs two comma-separated values"))),
    }
}

fn parse_point(text: &str) -> Result<Complex64> {
    if text.contains(',') {
        let (re, im) = pair::<f64>(text, "point")?;
        return Ok(Complex64::new(re, im));
    }
    Complex64::from_str(text.trim()).map_err(|_| invalid(format!("bad point `{text}`")))
}

fn parse_spec(text: &str) -> Result<SurfaceSpec> {
    Ok(text.parse::<SurfaceSpec>()?)
}

/// The length cache named by `--cache`, or one built from `--spec`.
fn load(source: &Source, manifest: &mut RunManifest) -> Result<LengthCache> {
    let cache = match (&source.cache, &source.spec) {
        (Some(path), spec) => {
            let cache = LengthCache::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(spec) = spec {
                let spec = parse_spec(spec)?;
                if spec != cache.spec {
                    return Err(invalid(format!("cache holds {} but --spec is {spec}", cache.spec)));
                }
            }
            manifest.cache = Some(path.display().to_string());
            cache
        }
        (None, Some(spec)) => {
            let group = parse_spec(spec)?.build()?;
            LengthCache::for_group(&group, source.nmax.unwrap_or(DEFAULT_NMAX))?
        }
        (None, None) => return Err(invalid("give --cache or --spec")),
    };
    let cache = match source.nmax {
        Some(n) if n < cache.n_max() => cache.truncated(n),
        _ => cache,
    };
    manifest.spec = Some(cache.spec.to_string());
    manifest.n_max = Some(cache.n_max());
    Ok(cache)
}

fn zeta_for(cache: &LengthCache, eval: &EvalOpts, manifest: &mut RunManifest) -> ZetaFunction {
    manifest.params.push(("tol".into(), format!("{:e}", eval.tol)));
    manifest.params.push(("floor".into(), floor_of(eval).to_string()));
    ZetaFunction::new(cache).with_truncation(Truncation::Adaptive {
        start: 6,
        step: 2,
        tol: eval.tol,
    })
}

fn floor_of(eval: &EvalOpts) -> f64 {
    if eval.force {
        f64::NEG_INFINITY
    } else {
        eval.floor
    }
}

fn sampling_for(sampling: &Sampling, eval: &EvalOpts, manifest: &mut RunManifest) -> Result<(Rect, SamplingConfig)> {
    let rect: Rect = sampling.rect.parse()?;
    if !(sampling.min_spacing > 0.0) {
        return Err(invalid("--min-spacing must be positive"));
    }
    manifest.rect = Some(rect.to_string());
    manifest.params.push(("min_spacing".into(), sampling.min_spacing.to_string()));
    let cfg = SamplingConfig {
        min_spacing: sampling.min_spacing,
        floor: floor_of(eval),
        ..SamplingConfig::default()
    };
    Ok((rect, cfg))
}

fn cache(source: &Source, out: &Output) -> Result<()> {
    let spec = source.spec.as_deref().ok_or_else(|| invalid("cache needs --spec"))?;
    let spec = parse_spec(spec)?;
    let n_max = source.nmax.unwrap_or(DEFAULT_NMAX);
    let group = spec.build()?;
    let cache = LengthCache::for_group(&group, n_max)?;
    let m = RunManifest {
        spec: Some(spec.to_string()),
        n_max: Some(n_max),
        ..RunManifest::new("cache")
    }
    .param("seed", ClassTableConfig::default().seed);
    eprintln!("n,words,classes");
    for (i, level) in cache.levels.iter().enumerate() {
        eprintln!("{},{},{}", i + 1, words::word_count(group.rank(), i + 1), level.len());
    }
    emit(out, &m.wrap(&cache.to_text()))
}

fn evaluate(source: &Source, eval: &EvalOpts, s: &str, out: &Output) -> Result<()> {
    let s = parse_point(s)?;
    let mut m = RunManifest::new("eval");
    let cache = load(source, &mut m)?;
    let zeta = zeta_for(&cache, eval, &mut m);
    let m = m.param("s", format!("{},{}", s.re, s.im));
    if s.re < floor_of(eval) {
        return Err(Error::BelowFloor {
            re: s.re,
            floor: eval.floor,
        }
        .into());
    }
    let e = zeta.eval_with_deriv(s);
    let d = e.derivative.unwrap_or_default();
    let mut body = String::from("re,im,z_re,z_im,dz_re,dz_im,rel_err,n,capped\n");
    let _ = writeln!(
        body,
        "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e},{},{}",
        s.re, s.im, e.value.re, e.value.im, d.re, d.im, e.rel_err, e.n, e.capped
    );
    emit(out, &m.wrap(&body))
}

fn count(source: &Source, eval: &EvalOpts, sampling: &Sampling, bins: &str, out: &Output) -> Result<()> {
    let (nx, ny) = pair::<usize>(bins, "bins")?;
    if nx == 0 || ny == 0 {
        return Err(invalid("--bins needs nx, ny >= 1"));
    }
    let mut m = RunManifest::new("count");
    let cache = load(source, &mut m)?;
    let zeta = zeta_for(&cache, eval, &mut m);
    let (rect, cfg) = sampling_for(sampling, eval, &mut m)?;
    let m = m.param("bins", format!("{nx},{ny}"));
    let grid = ZeroCounter::new(&zeta, cfg).bin_count_grid(&rect, nx, ny)?;
    let mut body = format!("# total {}\ni,j,re_min,re_max,im_min,im_max,count,residual\n", grid.total);
    for j in 0..ny {
        for i in 0..nx {
            let b = grid.bin(i, j);
            let _ = writeln!(
                body,
                "{i},{j},{},{},{},{},{},{:.3e}",
                b.re_min,
                b.re_max,
                b.im_min,
                b.im_max,
                grid.count(i, j),
                grid.residuals[j * nx + i]
            );
        }
    }
    eprintln!("total {} in {rect}", grid.total);
    emit(out, &m.wrap(&body))
}

fn locate(source: &Source, eval: &EvalOpts, sampling: &Sampling, pixel: f64, tol: f64, out: &Output) -> Result<()> {
    let mut m = RunManifest::new("locate");
    let cache = load(source, &mut m)?;
    let zeta = zeta_for(&cache, eval, &mut m);
    let (rect, cfg) = sampling_for(sampling, eval, &mut m)?;
    let m = m.param("pixel", pixel).param("refine_tol", format!("{tol:e}"));
    let refine = RefineConfig {
        tol,
        ..RefineConfig::default()
    };
    let report = ZeroCounter::new(&zeta, cfg).with_refine(refine).locate_all(&rect, pixel)?;
    if report.rect != rect {
        eprintln!("zero on the boundary: covered region moved to {}", report.rect);
    }
    eprintln!(
        "{} resonances, multiplicity {} of {} counted, {} unrefined bins",
        report.resonances.len(),
        report.located_multiplicity(),
        report.total,
        report.unrefined.len()
    );
    emit(out, &m.wrap(&ResonanceSet::from_report(&report).to_csv()))
}

fn t_grid(series: &Series) -> Result<Vec<f64>> {
    let step = series.t_step.unwrap_or(series.t_max / 100.0);
    if !(series.t_max > 0.0 && step > 0.0) {
        return Err(invalid("--t-max and --t-step must be positive"));
    }
    let k = (series.t_max / step + 1e-9).floor() as usize;
    // rounded so that 0.15 prints as 0.15
    Ok((0..=k).map(|i| (i as f64 * step * 1e12).round() / 1e12).collect())
}

fn load_set(path: &Path) -> Result<ResonanceSet> {
    ResonanceSet::parse(&read(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn series_manifest(command: &str, series: &Series) -> RunManifest {
    RunManifest::new(command)
        .param("resonances", series.resonances.display())
        .param("t_max", series.t_max)
        .param("t_step", series.t_step.unwrap_or(series.t_max / 100.0))
}

fn census(c: Census) -> Result<()> {
    match c {
        Census::Delta { source, tol, out } => {
            let mut m = RunManifest::new("census-delta");
            let cache = load(&source, &mut m)?;
            let zeta = ZetaFunction::new(&cache).with_truncation(Truncation::Adaptive { start: 6, step: 2, tol });
            let m = m.param("tol", format!("{tol:e}"));
            let delta = census::compute_delta(&zeta)?;
            let body = format!("delta,escape_rate\n{delta:.15},{:.15}\n", census::escape_rate(delta));
            emit(&out, &m.wrap(&body))
        }
        Census::Weyl {
            series,
            strip,
            fit_min,
            out,
        } => {
            let (a0, a1) = pair::<f64>(&strip, "strip")?;
            let set = load_set(&series.resonances)?;
            let t = t_grid(&series)?;
            let counts = census::counting_strip(&set, a0, a1, &t)?;
            let fit = census::weyl_fit(&counts, fit_min, series.t_max)?;
            let m = series_manifest("census-weyl", &series)
                .param("strip", format!("{a0},{a1}"))
                .param("fit_min", fit_min);
            let body = format!(
                "# fit exponent={:.6} prefactor={:.6e} rms={:.3e} samples={}\n{}",
                fit.exponent,
                fit.prefactor,
                fit.rms,
                fit.samples,
                counts.to_csv()
            );
            eprintln!("exponent {:.4}", fit.exponent);
            emit(&out, &m.wrap(&body))
        }
        Census::Window { series, window, out } => {
            let set = load_set(&series.resonances)?;
            let counts = census::windowed_count(&set, window, &t_grid(&series)?)?;
            let m = series_manifest("census-window", &series).param("window", window);
            emit(&out, &m.wrap(&counts.to_csv()))
        }
        Census::Envelope { series, window, out } => {
            let set = load_set(&series.resonances)?;
            let env = census::envelope(&set, window, &t_grid(&series)?)?;
            let m = series_manifest("census-envelope", &series).param("window", window);
            emit(&out, &m.wrap(&env.to_csv()))
        }
        Census::Hist {
            resonances,
            re_range,
            im_range,
            bins,
            out,
        } => {
            let set = load_set(&resonances)?;
            let re = pair::<f64>(&re_range, "re range")?;
            let im = pair::<f64>(&im_range, "im range")?;
            let h = census::real_part_histogram(&set, re, bins, im)?;
            if let Some(k) = h.mode() {
                let (lo, hi) = h.edges(k);
                eprintln!("mode bin {k}: [{lo}, {hi})");
            }
            let m = RunManifest::new("census-hist")
                .param("resonances", resonances.display())
                .param("re_range", format!("{},{}", re.0, re.1))
                .param("im_range", format!("{},{}", im.0, im.1))
                .param("bins", bins);
            emit(&out, &m.wrap(&h.to_csv()))
        }
        Census::Density {
            resonances,
            rect,
            bins,
            pgm,
            out,
        } => {
            let set = load_set(&resonances)?;
            let r: Rect = rect.parse()?;
            let (nx, ny) = pair::<usize>(&bins, "bins")?;
            let g = census::density_grid(&set, &r, nx, ny)?;
            let m = RunManifest {
                rect: Some(r.to_string()),
                ..RunManifest::new("census-density")
            }
            .param("resonances", resonances.display())
            .param("bins", format!("{nx},{ny}"));
            if pgm {
                // PGM comments may follow the magic number
                let img = g.to_pgm();
                let (magic, rest) = img.split_once('\n').unwrap_or((&img, ""));
                emit(&out, &format!("{magic}\n{}\n{rest}", m.to_line()))
            } else {
                emit(&out, &m.wrap(&g.to_csv()))
            }
        }
        Census::Gap {
            resonances,
            delta,
            im_max,
            out,
        } => {
            let set = load_set(&resonances)?;
            let g = census::gap_report(&set, delta, im_max);
            let m = RunManifest::new("census-gap")
                .param("resonances", resonances.display())
                .param("delta", delta)
                .param("im_max", im_max);
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.15}"));
            let body = format!(
                "delta,first_re,runner_up_re,runner_up_im,gap\n{delta},{},{},{},{}\n",
                opt(g.first.map(|r| r.position.re)),
                opt(g.runner_up.map(|r| r.position.re)),
                opt(g.runner_up.map(|r| r.position.im)),
                g.gap.map_or("inf".to_string(), |v| format!("{v:.15}")),
            );
            emit(&out, &m.wrap(&body))
        }
    }
}
