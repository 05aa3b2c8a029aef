//! Persistent length caches and class tables.
//!
//! Both formats are line-oriented text. Lines starting with `#` are comments
//! and are skipped on read. Lengths are written with 17 significant digits,
//! which round-trips every `f64` exactly.
//!
//! ```text
//! version 1
//! surface X:12,13,14
//! r 2
//! nmax 12
//! seed 20130519
//! n 1 classes 2
//! 1.2000000000000000e1 2
//! 1.3000000000000000e1 2
//! ...
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::schottky::{SchottkyGroup, SurfaceSpec};
use crate::words::{
    self, ClassTableConfig, LengthClass, LengthClassTable, LengthLevel, Word,
};

pub const FORMAT_VERSION: u32 = 1;

/// Length multisets `Λ_n`, `n = 1..=n_max`, for one surface.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthCache {
    pub spec: SurfaceSpec,
    pub r: usize,
    /// Seed of the class-table draws the levels were grouped by.
    pub seed: u64,
    /// `levels[n − 1]`, each ascending by length.
    pub levels: Vec<LengthLevel>,
}

impl LengthCache {
    pub fn build(group: &SchottkyGroup, tables: &ClassTableSet) -> Result<Self> {
        let levels = tables
            .tables
            .iter()
            .map(|t| words::evaluate_lengths(group, t))
            .collect::<Result<Vec<_>>>()?;
        Ok(LengthCache {
            spec: *group.spec(),
            r: group.rank(),
            seed: tables.seed,
            levels,
        })
    }

    /// Builds class tables and the cache in one go.
    pub fn for_group(group: &SchottkyGroup, n_max: usize) -> Result<Self> {
        let tables = ClassTableSet::build(group.rank(), n_max, &ClassTableConfig::default())?;
        Self::build(group, &tables)
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Option<&LengthLevel> {
        n.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    /// Smallest length present at word length 1.
    pub fn min_length(&self) -> Option<f64> {
        self.levels
            .iter()
            .flat_map(|l| l.iter().map(|p| p.0))
            .min_by(f64::total_cmp)
    }

    /// Keeps only word lengths `1..=n_max`.
    pub fn truncated(&self, n_max: usize) -> Self {
        LengthCache {
            levels: self.levels.iter().take(n_max).cloned().collect(),
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version {FORMAT_VERSION}");
        let _ = writeln!(s, "surface {}", self.spec);
        let _ = writeln!(s, "r {}", self.r);
        let _ = writeln!(s, "nmax {}", self.n_max());
        let _ = writeln!(s, "seed {}", self.seed);
        for (i, level) in self.levels.iter().enumerate() {
            let _ = writeln!(s, "n {} classes {}", i + 1, level.len());
            for &(l, m) in level {
                let _ = writeln!(s, "{l:.16e} {m}");
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.expect_version()?;
        let (ln, surface) = lines.keyed("surface")?;
        let spec = parse_surface(surface).map_err(|e| Error::parse(ln, e.to_string()))?;
        let r = lines.keyed_num::<usize>("r")?;
        let n_max = lines.keyed_num::<usize>("nmax")?;
        let seed = lines.keyed_num::<u64>("seed")?;
        let mut levels = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let k = lines.level_header(n)?;
            let mut level = Vec::with_capacity(k);
            for _ in 0..k {
                let (ln, line) = lines.next_line()?;
                let mut it = line.split_whitespace();
                let (Some(l), Some(m), None) = (it.next(), it.next(), it.next()) else {
                    return Err(Error::parse(ln, "expected `<length> <multiplicity>`"));
                };
                let l: f64 = l.parse().map_err(|_| Error::parse(ln, "bad length"))?;
                let m: u64 = m.parse().map_err(|_| Error::parse(ln, "bad multiplicity"))?;
                level.push((l, m));
            }
            levels.push(level);
        }
        lines.expect_end()?;
        Ok(LengthCache {
            spec,
            r,
            seed,
            levels,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn parse_surface(text: &str) -> Result<SurfaceSpec> {
    match text.strip_prefix("G:") {
        Some(r) => r
            .trim()
            .parse()
            .map(|r| SurfaceSpec::Generic { r })
            .map_err(|_| Error::InvalidParameters(format!("bad generic surface `{text}`"))),
        None => text.parse(),
    }
}

/// Class tables for `n = 1..=n_max` together with the draw settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTableSet {
    pub r: usize,
    pub seed: u64,
    pub trials: usize,
    pub tol: f64,
    pub tables: Vec<LengthClassTable>,
}

impl ClassTableSet {
    pub fn build(r: usize, n_max: usize, config: &ClassTableConfig) -> Result<Self> {
        Ok(ClassTableSet {
            r,
            seed: config.seed,
            trials: config.trials,
            tol: config.tol,
            tables: words::build_class_tables(r, n_max, config)?,
        })
    }

    pub fn n_max(&self) -> usize {
        self.tables.len()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "version {FORMAT_VERSION}");
        let _ = writeln!(s, "r {}", self.r);
        let _ = writeln!(s, "nmax {}", self.n_max());
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "trials {}", self.trials);
        let _ = writeln!(s, "tol {:e}", self.tol);
        for t in &self.tables {
            let _ = writeln!(s, "n {} classes {}", t.n, t.classes.len());
            for c in &t.classes {
                let _ = writeln!(s, "{} {}", c.representative, c.multiplicity);
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.expect_version()?;
        let r = lines.keyed_num::<usize>("r")?;
        let n_max = lines.keyed_num::<usize>("nmax")?;
        let seed = lines.keyed_num::<u64>("seed")?;
        let trials = lines.keyed_num::<usize>("trials")?;
        let tol = lines.keyed_num::<f64>("tol")?;
        let mut tables = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let k = lines.level_header(n)?;
            let mut classes = Vec::with_capacity(k);
            for _ in 0..k {
                let (ln, line) = lines.next_line()?;
                let nums = line
                    .split_whitespace()
                    .map(|t| t.parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::parse(ln, "bad integer"))?;
                if nums.len() != n + 1 {
                    return Err(Error::parse(ln, format!("expected {n} letters and a multiplicity")));
                }
                let letters = nums[..n].iter().map(|&x| x as u8).collect();
                let representative =
                    Word::new(letters, r).map_err(|e| Error::parse(ln, e.to_string()))?;
                classes.push(LengthClass {
                    representative,
                    multiplicity: nums[n],
                });
            }
            tables.push(LengthClassTable { r, n, classes });
        }
        lines.expect_end()?;
        Ok(ClassTableSet {
            r,
            seed,
            trials,
            tol,
            tables,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Ok((i + 1, t));
            }
        }
        Err(Error::parse(0, "unexpected end of file"))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, line) = self.next_line()?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok((ln, v.trim())),
            _ => Err(Error::parse(ln, format!("expected `{key} …`"))),
        }
    }

    fn keyed_num<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let (ln, v) = self.keyed(key)?;
        v.parse()
            .map_err(|_| Error::parse(ln, format!("bad value for `{key}`")))
    }

    fn expect_version(&mut self) -> Result<()> {
        let v = self.keyed_num::<u32>("version")?;
        if v != FORMAT_VERSION {
            return Err(Error::parse(1, format!("unsupported version {v}")));
        }
        Ok(())
    }

    fn level_header(&mut self, n: usize) -> Result<usize> {
        let (ln, line) = self.next_line()?;
        let t: Vec<&str> = line.split_whitespace().collect();
        match t.as_slice() {
            ["n", m, "classes", k] if m.parse() == Ok(n) => {
                k.parse().map_err(|_| Error::parse(ln, "bad class count"))
            }
            _ => Err(Error::parse(ln, format!("expected `n {n} classes <k>`"))),
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next_line() {
            Ok((ln, _)) => Err(Error::parse(ln, "trailing content")),
            Err(_) => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_text_round_trip() {
        let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
        let cache = LengthCache::for_group(&g, 5).unwrap();
        let text = cache.to_text();
        assert!(text.starts_with("version 1\nsurface X:12,13,14\nr 2\nnmax 5\n"));
        let back = LengthCache::parse(&text).unwrap();
        assert_eq!(back, cache);
        assert_eq!(back.to_text(), text);
        for (n, level) in cache.levels.iter().enumerate() {
            let total: u64 = level.iter().map(|p| p.1).sum();
            assert_eq!(total as u128, words::word_count(2, n + 1));
            assert!(level.windows(2).all(|p| p[0].0 <= p[1].0));
            assert!(level.iter().all(|p| p.0 >= 12.0 - 1e-9));
        }
    }

    #[test]
    fn class_table_round_trip() {
        let set = ClassTableSet::build(2, 4, &ClassTableConfig::default()).unwrap();
        let text = set.to_text();
        assert_eq!(ClassTableSet::parse(&text).unwrap(), set);
    }

    #[test]
    fn comments_skipped_and_errors_located() {
        let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
        let cache = LengthCache::for_group(&g, 2).unwrap();
        let text = format!("# manifest\n{}", cache.to_text());
        assert_eq!(LengthCache::parse(&text).unwrap(), cache);
        let broken = cache.to_text().replace("n 2 classes 4", "n 2 classes x");
        assert!(matches!(LengthCache::parse(&broken), Err(Error::Parse { line: 9, .. })));
        assert!(LengthCache::parse("version 2\n").is_err());
    }
}
