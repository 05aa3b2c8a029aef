//! Cyclically reduced words, length classes and their lengths for a group.
//!
//! Letters are 1-based indices into `S_1 … S_{2r}` with `S_{j+r} = S_j⁻¹`.
//! Word sets are always produced in lexicographic order so that parallel and
//! sequential builds agree exactly.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::schottky::{Disk, ExactProduct, Moebius, SchottkyGroup};

/// Default cap on `(2r−1)^n` for enumeration.
pub const DEFAULT_WORD_CAP: u128 = 100_000_000;

/// Default relative tolerance for matching lengths across draws.
pub const DEFAULT_CLASS_TOL: f64 = 1e-9;

/// Letter inverse to `x` (1-based) in rank `r`.
#[inline]
pub fn inverse_letter(x: u8, r: usize) -> u8 {
    let r = r as u8;
    if x > r {
        x - r
    } else {
        x + r
    }
}

#[inline]
fn cancels(x: u8, y: u8, r: usize) -> bool {
    inverse_letter(x, r) == y
}

/// Reduced and cyclically reduced.
pub fn is_cyclically_reduced(letters: &[u8], r: usize) -> bool {
    let n = letters.len();
    n > 0
        && letters.windows(2).all(|w| !cancels(w[0], w[1], r))
        && (n == 1 || !cancels(letters[n - 1], letters[0], r))
}

/// A cyclically reduced word `σ ∈ 𝒲_n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<u8>);

impl Word {
    /// Validates letter range and cyclic reduction.
    pub fn new(letters: Vec<u8>, r: usize) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParameters("empty word".into()));
        }
        if let Some(&x) = letters.iter().find(|&&x| x == 0 || x as usize > 2 * r) {
            return Err(Error::InvalidParameters(format!(
                "letter {x} outside 1..={}",
                2 * r
            )));
        }
        if !is_cyclically_reduced(&letters, r) {
            return Err(Error::InvalidParameters(format!(
                "word {letters:?} is not cyclically reduced"
            )));
        }
        Ok(Word(letters))
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Word of `T_σ⁻¹`.
    pub fn inverse(&self, r: usize) -> Word {
        Word(self.0.iter().rev().map(|&x| inverse_letter(x, r)).collect())
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// `(σ_{k+1}, …, σ_n, σ_1, …, σ_k)`.
    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        let n = v.len().max(1);
        v.rotate_left(k % n);
        Word(v)
    }

    /// Lexicographically smallest cyclic rotation.
    pub fn canonical_rotation(&self) -> Word {
        (0..self.len())
            .map(|k| self.rotate(k))
            .min()
            .unwrap_or_else(|| self.clone())
    }

    /// Smallest `p` with `σ = (σ_1 … σ_p)^{n/p}`.
    pub fn period(&self) -> usize {
        let n = self.len();
        (1..=n)
            .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| self.0[i] == self.0[i - p]))
            .unwrap_or(n)
    }

    /// Not a proper power.
    pub fn is_primitive(&self) -> bool {
        self.period() == self.len()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// Number of cyclically reduced words of length `n` in the free group of rank `r`:
/// `(2r−1)^n + 1 + (r−1)(1 + (−1)^n)`.
pub fn word_count(r: usize, n: usize) -> u128 {
    let base = (2 * r as u128 - 1).pow(n as u32);
    let even = if n.is_multiple_of(2) { 2 } else { 0 };
    base + 1 + (r as u128 - 1) * even
}

fn check_cap(r: usize, n: usize, cap: u128) -> Result<()> {
    if r < 1 || n < 1 {
        return Err(Error::InvalidParameters(format!(
            "need r ≥ 1 and n ≥ 1 (got r = {r}, n = {n})"
        )));
    }
    if 2 * r > u8::MAX as usize {
        return Err(Error::InvalidParameters(format!("rank {r} too large")));
    }
    let count = (2 * r as u128 - 1)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::TooLarge { count, cap });
    }
    Ok(())
}

/// Two-letter prefixes used to split enumeration into independent chunks.
fn prefixes(r: usize, n: usize) -> Vec<Vec<u8>> {
    let k = 2 * r as u8;
    if n == 1 {
        return (1..=k).map(|x| vec![x]).collect();
    }
    let mut out = Vec::new();
    for x in 1..=k {
        for y in 1..=k {
            if !cancels(x, y, r) {
                out.push(vec![x, y]);
            }
        }
    }
    out
}

/// Depth-first walk over reduced words extending `prefix` to length `n`, in
/// lexicographic order, calling `leaf` on each cyclically reduced one.
fn walk<S: Clone>(
    r: usize,
    n: usize,
    prefix: &[u8],
    init: S,
    step: &impl Fn(&S, u8) -> S,
    leaf: &mut impl FnMut(&[u8], &S),
) {
    let mut buf = prefix.to_vec();
    let mut state = init;
    for &x in prefix {
        state = step(&state, x);
    }
    fn rec<S: Clone>(
        r: usize,
        n: usize,
        buf: &mut Vec<u8>,
        state: &S,
        step: &impl Fn(&S, u8) -> S,
        leaf: &mut impl FnMut(&[u8], &S),
    ) {
        if buf.len() == n {
            if n == 1 || !cancels(buf[n - 1], buf[0], r) {
                leaf(buf, state);
            }
            return;
        }
        let last = buf.last().copied();
        for x in 1..=(2 * r) as u8 {
            if last.is_some_and(|l| cancels(l, x, r)) {
                continue;
            }
            buf.push(x);
            let next = step(state, x);
            rec(r, n, buf, &next, step, leaf);
            buf.pop();
        }
    }
    rec(r, n, &mut buf, &state, step, leaf);
}

/// Flat lexicographic list of `𝒲_n` (`n` letters per word).
fn enumerate_flat(r: usize, n: usize, exec: Execution) -> Vec<u8> {
    let chunks = exec::map_collect(exec, &prefixes(r, n), |p| {
        let mut out = Vec::new();
        walk(r, n, p, (), &|_, _| (), &mut |w, _| out.extend_from_slice(w));
        out
    });
    chunks.concat()
}

/// Lengths of all of `𝒲_n` for `group`, in the same order as [`enumerate_words`].
/// The plain `f64` products are used for the class-table correlation runs,
/// where only the partition matters.
fn lengths_flat(group: &SchottkyGroup, n: usize, exec: Execution) -> Result<Vec<f64>> {
    let r = group.rank();
    flatten(exec::map_collect(exec, &prefixes(r, n), |p| {
        let mut out = Vec::new();
        let mut err = None;
        walk(
            r,
            n,
            p,
            Moebius::IDENTITY,
            &|m: &Moebius, x| *m * group.letter(x as usize - 1),
            &mut |_, m| push_length(m.trace_length(), &mut out, &mut err),
        );
        err.map_or(Ok(out), Err)
    }))
}

fn exact_lengths_flat(group: &SchottkyGroup, n: usize, exec: Execution) -> Result<Vec<f64>> {
    let r = group.rank();
    flatten(exec::map_collect(exec, &prefixes(r, n), |p| {
        let mut out = Vec::new();
        let mut err = None;
        walk(
            r,
            n,
            p,
            ExactProduct::IDENTITY,
            &|m: &ExactProduct, x| m.times(&group.letter(x as usize - 1)),
            &mut |_, m| push_length(m.trace_length(), &mut out, &mut err),
        );
        err.map_or(Ok(out), Err)
    }))
}

fn push_length(l: Result<f64>, out: &mut Vec<f64>, err: &mut Option<Error>) {
    match l {
        Ok(l) => out.push(l),
        Err(e) => {
            err.get_or_insert(e);
        }
    }
}

fn flatten(chunks: Vec<Result<Vec<f64>>>) -> Result<Vec<f64>> {
    let mut all = Vec::new();
    for c in chunks {
        all.extend(c.map_err(|e| Error::CorruptGroup(e.to_string()))?);
    }
    Ok(all)
}

/// All cyclically reduced words of length `n`, lexicographically ordered.
pub fn enumerate_words(r: usize, n: usize) -> Result<Vec<Word>> {
    enumerate_words_capped(r, n, DEFAULT_WORD_CAP)
}

pub fn enumerate_words_capped(r: usize, n: usize, cap: u128) -> Result<Vec<Word>> {
    check_cap(r, n, cap)?;
    let flat = enumerate_flat(r, n, Execution::default());
    Ok(flat.chunks(n).map(|w| Word(w.to_vec())).collect())
}

/// Closure of `{w}` under cyclic permutation, inversion, reversal and the
/// block reversal `w(U, V) ↦ w(U⁻¹, V⁻¹)⁻¹`, restricted to `𝒲_n`.
pub fn symmetry_orbit(w: &Word, r: usize) -> BTreeSet<Word> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![w.clone()];
    while let Some(x) = stack.pop() {
        if !seen.insert(x.clone()) {
            continue;
        }
        let mut next: Vec<Word> = (1..x.len()).map(|k| x.rotate(k)).collect();
        next.push(x.inverse(r));
        next.push(x.reverse());
        next.extend(block_reversals(&x, r));
        stack.extend(next.into_iter().filter(|y| !seen.contains(y)));
    }
    seen
}

/// Every rewriting of `w` as a product of blocks drawn from two subwords
/// `U`, `V`, with the block order reversed.
fn block_reversals(w: &Word, r: usize) -> Vec<Word> {
    fn rec<'a>(
        rest: &'a [u8],
        blocks: &mut Vec<&'a [u8]>,
        distinct: &mut Vec<&'a [u8]>,
        out: &mut BTreeSet<Vec<u8>>,
    ) {
        if rest.is_empty() {
            out.insert(blocks.iter().rev().flat_map(|b| b.iter().copied()).collect());
            return;
        }
        for len in 1..=rest.len() {
            let b = &rest[..len];
            let known = distinct.contains(&b);
            if !known && distinct.len() == 2 {
                continue;
            }
            if !known {
                distinct.push(b);
            }
            blocks.push(b);
            rec(&rest[len..], blocks, distinct, out);
            blocks.pop();
            if !known {
                distinct.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    rec(w.letters(), &mut Vec::new(), &mut Vec::new(), &mut out);
    out.into_iter()
        .filter(|v| is_cyclically_reduced(v, r))
        .map(Word)
        .collect()
}

/// One length class: a lexicographically minimal representative and the
/// number of words of `𝒲_n` sharing its length for every choice of generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthClass {
    pub representative: Word,
    pub multiplicity: u64,
}

/// Partition of `𝒲_n` into length classes. Depends only on `(r, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LengthClassTable {
    pub r: usize,
    pub n: usize,
    pub classes: Vec<LengthClass>,
}

impl LengthClassTable {
    pub fn total_multiplicity(&self) -> u64 {
        self.classes.iter().map(|c| c.multiplicity).sum()
    }
}

/// Settings for numerical class correlation.
#[derive(Debug, Clone, Copy)]
pub struct ClassTableConfig {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
    pub cap: u128,
    pub exec: Execution,
}

impl Default for ClassTableConfig {
    fn default() -> Self {
        ClassTableConfig {
            trials: 3,
            tol: DEFAULT_CLASS_TOL,
            seed: 20130519,
            cap: DEFAULT_WORD_CAP,
            exec: Execution::default(),
        }
    }
}

/// Random admissible groups used for correlation. Rank 2 draws 3-funnel
/// surfaces with lengths in `[1, 3]`; other ranks draw random disk
/// configurations with comparable lengths.
pub fn correlation_groups(r: usize, trials: usize, seed: u64) -> Result<Vec<SchottkyGroup>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .map(|_| {
            if r == 2 {
                let [a, b, c]: [f64; 3] = std::array::from_fn(|_| rng.gen_range(1.0..3.0));
                SchottkyGroup::three_funnel(a, b, c)
            } else {
                let disks: Vec<Disk> = (0..2 * r)
                    .map(|k| Disk {
                        center: k as f64 + rng.gen_range(-0.05..0.05),
                        radius: rng.gen_range(0.2..0.4),
                    })
                    .collect();
                SchottkyGroup::from_disks(&disks)
            }
        })
        .collect()
}

/// Labels each index with the smallest index whose length agrees within
/// relative `tol`, chaining through sorted neighbours.
fn partition_by_length(lengths: &[f64], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&i, &j| lengths[i].total_cmp(&lengths[j]).then(i.cmp(&j)));
    let mut labels = vec![0usize; lengths.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() {
            let (a, b) = (lengths[order[end - 1]], lengths[order[end]]);
            if (b - a).abs() > tol * b.abs() {
                break;
            }
            end += 1;
        }
        let group = &order[start..end];
        let rep = *group.iter().min().expect("non-empty group");
        for &i in group {
            labels[i] = rep;
        }
        start = end;
    }
    labels
}

/// Correlates the lengths of `𝒲_n` across `config.trials` random groups.
pub fn build_class_table(r: usize, n: usize, config: &ClassTableConfig) -> Result<LengthClassTable> {
    let groups = correlation_groups(r, config.trials, config.seed)?;
    build_class_table_with(r, n, &groups, config)
}

pub(crate) fn build_class_table_with(
    r: usize,
    n: usize,
    groups: &[SchottkyGroup],
    config: &ClassTableConfig,
) -> Result<LengthClassTable> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameters(
            "class correlation needs at least two trials".into(),
        ));
    }
    check_cap(r, n, config.cap)?;
    let flat = enumerate_flat(r, n, config.exec);
    let mut reference: Option<Vec<usize>> = None;
    for (trial, g) in groups.iter().enumerate() {
        let labels = partition_by_length(&lengths_flat(g, n, config.exec)?, config.tol);
        match &reference {
            None => reference = Some(labels),
            Some(r0) if *r0 != labels => return Err(Error::AmbiguousClasses { n, trial }),
            Some(_) => {}
        }
    }
    let labels = reference.expect("at least two trials");
    let mut counts: HashMap<usize, u64> = HashMap::new();
    for &l in &labels {
        *counts.entry(l).or_default() += 1;
    }
    let classes = labels
        .iter()
        .enumerate()
        .filter(|(i, l)| *i == **l)
        .map(|(i, _)| LengthClass {
            representative: Word(flat[i * n..(i + 1) * n].to_vec()),
            multiplicity: counts[&i],
        })
        .collect();
    Ok(LengthClassTable { r, n, classes })
}

/// Class tables for `n = 1..=n_max`, sharing one set of random draws.
pub fn build_class_tables(
    r: usize,
    n_max: usize,
    config: &ClassTableConfig,
) -> Result<Vec<LengthClassTable>> {
    let groups = correlation_groups(r, config.trials, config.seed)?;
    (1..=n_max)
        .map(|n| build_class_table_with(r, n, &groups, config))
        .collect()
}

/// `(length, multiplicity)` pairs for one word length, ascending by length.
pub type LengthLevel = Vec<(f64, u64)>;

/// Length of one representative per class, paired with its multiplicity.
pub fn evaluate_lengths(group: &SchottkyGroup, table: &LengthClassTable) -> Result<LengthLevel> {
    if table.r != group.rank() {
        return Err(Error::InvalidParameters(format!(
            "table rank {} does not match group rank {}",
            table.r,
            group.rank()
        )));
    }
    let mut level = table
        .classes
        .iter()
        .map(|c| {
            group
                .word_length(c.representative.letters())
                .map(|l| (l, c.multiplicity))
                .map_err(|e| {
                    Error::CorruptGroup(format!("word {}: {e}", c.representative))
                })
        })
        .collect::<Result<LengthLevel>>()?;
    // Stable: equal lengths keep representative order.
    level.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(level)
}

/// Cyclic-class membership of a word, as used by the Euler product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicInfo {
    pub word: Word,
    pub primitive: bool,
    /// Index of the word's cyclic class, numbered by first appearance.
    pub class_id: usize,
}

/// Cyclic classes and primitivity for every word of length `1..=n_max`.
pub fn primitive_classes(r: usize, n_max: usize) -> Result<Vec<CyclicInfo>> {
    let mut ids: HashMap<Word, usize> = HashMap::new();
    let mut out = Vec::new();
    for n in 1..=n_max {
        for w in enumerate_words(r, n)? {
            let canon = w.canonical_rotation();
            let next = ids.len();
            let class_id = *ids.entry(canon).or_insert(next);
            out.push(CyclicInfo {
                primitive: w.is_primitive(),
                word: w,
                class_id,
            });
        }
    }
    Ok(out)
}

/// Lengths of the primitive cyclic classes with word length `≤ n_max`,
/// one entry per class (oriented: `T` and `T⁻¹` are distinct classes).
pub fn primitive_lengths(group: &SchottkyGroup, n_max: usize) -> Result<Vec<f64>> {
    let r = group.rank();
    let mut out = Vec::new();
    for n in 1..=n_max {
        check_cap(r, n, DEFAULT_WORD_CAP)?;
        let mut err = None;
        walk(
            r,
            n,
            &[],
            ExactProduct::IDENTITY,
            &|m: &ExactProduct, x| m.times(&group.letter(x as usize - 1)),
            &mut |w, m| {
                let word = Word(w.to_vec());
                if word.is_primitive() && word.canonical_rotation() == word {
                    match m.trace_length() {
                        Ok(l) => out.push(l),
                        Err(e) => {
                            err.get_or_insert(e);
                        }
                    }
                }
            },
        );
        if let Some(e) = err {
            return Err(Error::CorruptGroup(e.to_string()));
        }
    }
    Ok(out)
}

/// Lengths of every word of `𝒲_n` (no class grouping), in lexicographic order.
pub fn all_lengths(group: &SchottkyGroup, n: usize) -> Result<Vec<f64>> {
    check_cap(group.rank(), n, DEFAULT_WORD_CAP)?;
    exact_lengths_flat(group, n, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[u8]) -> Word {
        Word::new(v.to_vec(), 2).unwrap()
    }

    #[test]
    fn small_enumerations() {
        let one = enumerate_words(2, 1).unwrap();
        assert_eq!(one, vec![w(&[1]), w(&[2]), w(&[3]), w(&[4])]);
        let two = enumerate_words(2, 2).unwrap();
        assert_eq!(two.len(), 12);
        for bad in [[1u8, 3], [3, 1], [2, 4], [4, 2]] {
            assert!(!two.iter().any(|x| x.letters() == bad));
        }
        assert!(two.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn counts_match_closed_form() {
        for n in 1..=8 {
            assert_eq!(enumerate_words(2, n).unwrap().len() as u128, word_count(2, n));
            assert_eq!(enumerate_words(3, n.min(5)).unwrap().len() as u128, word_count(3, n.min(5)));
        }
        assert_eq!(word_count(2, 3), 28);
        assert_eq!(word_count(2, 4), 84);
        assert_eq!(word_count(2, 9), 19684);
        assert_eq!(word_count(2, 12), 531444);
    }

    #[test]
    fn cap_guard() {
        assert!(matches!(
            enumerate_words_capped(2, 10, 1000),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn word_validation() {
        assert!(Word::new(vec![1, 3], 2).is_err());
        assert!(Word::new(vec![1, 3], 2).is_err());
        assert!(Word::new(vec![1, 2, 1, 4], 2).is_ok());
        assert!(Word::new(vec![1, 2, 3], 2).is_err());
        assert!(Word::new(vec![1, 2, 4, 3], 2).is_err());
        assert!(Word::new(vec![5], 2).is_err());
        assert!(Word::new(vec![], 2).is_err());
    }

    #[test]
    fn orbit_examples() {
        let o = symmetry_orbit(&w(&[1]), 2);
        assert_eq!(o.into_iter().collect::<Vec<_>>(), vec![w(&[1]), w(&[3])]);
        let o = symmetry_orbit(&w(&[1, 2]), 2);
        let expect: BTreeSet<Word> = [w(&[1, 2]), w(&[2, 1]), w(&[3, 4]), w(&[4, 3])].into();
        assert_eq!(o, expect);
    }

    #[test]
    fn generic_orbit_divides_4n() {
        let x = w(&[1, 1, 2, 1, 2, 2, 2]);
        let o = symmetry_orbit(&x, 2);
        assert_eq!((4 * x.len()) % o.len(), 0);
    }

    #[test]
    fn primitivity() {
        assert!(!w(&[1, 1]).is_primitive());
        assert!(w(&[1, 2]).is_primitive());
        assert!(!w(&[1, 2, 1, 2]).is_primitive());
        let info = primitive_classes(2, 2).unwrap();
        let n1: BTreeSet<usize> = info.iter().filter(|i| i.word.len() == 1).map(|i| i.class_id).collect();
        assert_eq!(n1.len(), 4);
        let a = info.iter().find(|i| i.word == w(&[1, 2])).unwrap();
        let b = info.iter().find(|i| i.word == w(&[2, 1])).unwrap();
        assert!(a.primitive);
        assert_eq!(a.class_id, b.class_id);
        let sq = info.iter().find(|i| i.word == w(&[1, 1])).unwrap();
        assert!(!sq.primitive);
    }

    #[test]
    fn class_table_n2() {
        let t = build_class_table(2, 2, &ClassTableConfig::default()).unwrap();
        let mut sizes: Vec<u64> = t.classes.iter().map(|c| c.multiplicity).collect();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 4, 4]);
        assert_eq!(t.total_multiplicity(), 12);
    }

    #[test]
    fn ambiguous_when_tolerance_is_huge() {
        let cfg = ClassTableConfig {
            tol: 0.05,
            ..Default::default()
        };
        assert!(matches!(
            build_class_table(2, 6, &cfg),
            Err(Error::AmbiguousClasses { .. })
        ));
    }

    #[test]
    fn lengths_for_three_funnel() {
        let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
        let cfg = ClassTableConfig::default();
        let t1 = build_class_table(2, 1, &cfg).unwrap();
        let l1 = evaluate_lengths(&g, &t1).unwrap();
        assert_eq!(l1.len(), 2);
        assert!((l1[0].0 - 12.0).abs() < 1e-10 && l1[0].1 == 2);
        assert!((l1[1].0 - 13.0).abs() < 1e-10 && l1[1].1 == 2);
        let t2 = build_class_table(2, 2, &cfg).unwrap();
        let l2 = evaluate_lengths(&g, &t2).unwrap();
        assert!(l2.iter().any(|&(l, m)| (l - 14.0).abs() < 1e-10 && m == 4));
        assert!(l2.iter().any(|&(l, m)| (l - 24.0).abs() < 1e-10 && m == 2));
        assert!(l2.iter().any(|&(l, m)| (l - 26.0).abs() < 1e-10 && m == 2));
    }
}
