use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use selberg_core::cache::{ClassTableSet, LengthCache};
use selberg_core::census::{self, ResonanceSet};
use selberg_core::schottky::{Moebius, SchottkyGroup};
use selberg_core::words::{self, ClassTableConfig};
use selberg_core::zeros::{Rect, Resonance, SamplingConfig, ZeroCounter};
use selberg_core::zeta::{Truncation, ZetaFunction};

const N_MAX: usize = 8;

fn tables() -> &'static ClassTableSet {
    static T: OnceLock<ClassTableSet> = OnceLock::new();
    T.get_or_init(|| ClassTableSet::build(2, N_MAX, &ClassTableConfig::default()).unwrap())
}

fn x121314() -> &'static (SchottkyGroup, LengthCache, ZetaFunction) {
    static S: OnceLock<(SchottkyGroup, LengthCache, ZetaFunction)> = OnceLock::new();
    S.get_or_init(|| {
        let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
        let cache = LengthCache::build(&g, tables()).unwrap();
        let z = ZetaFunction::new(&cache);
        (g, cache, z)
    })
}

fn full_order() -> &'static (ZetaFunction, ZetaFunction) {
    // orders 8 and 12 for the truncation comparison
    static S: OnceLock<(ZetaFunction, ZetaFunction)> = OnceLock::new();
    S.get_or_init(|| {
        let g = SchottkyGroup::three_funnel(12.0, 13.0, 14.0).unwrap();
        let cache = LengthCache::for_group(&g, 12).unwrap();
        let z = ZetaFunction::new(&cache);
        (
            z.clone().with_truncation(Truncation::Fixed(8)),
            z.with_truncation(Truncation::Fixed(12)),
        )
    })
}

fn reduced_word(max_len: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(1u8..=4, 1..=max_len)
        .prop_filter("cyclically reduced", |w| words::is_cyclically_reduced(w, 2))
}

fn three_funnel_lengths() -> impl Strategy<Value = (f64, f64, f64)> {
    (1.0f64..14.0, 1.0f64..14.0, 1.0f64..14.0)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn synthetic_set(points: &[(f64, f64, u32)]) -> ResonanceSet {
    let coverage = Rect::new(-0.5, 1.0, -1.0, 100.0).unwrap();
    let list = points
        .iter()
        .map(|&(re, im, m)| Resonance {
            position: Complex64::new(re, im),
            multiplicity: m,
            residual: 0.0,
            bin: Rect::around(Complex64::new(re, im), 1e-3),
        })
        .collect();
    ResonanceSet::new(coverage, list)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_have_unit_determinant_and_invert(
        (l1, l2, l3) in three_funnel_lengths(),
        w in reduced_word(6),
    ) {
        let g = SchottkyGroup::three_funnel(l1, l2, l3).unwrap();
        let m = g.word_matrix(&w);
        let scale = m.a.abs() * m.d.abs() + m.b.abs() * m.c.abs();
        prop_assert!((m.det() - 1.0).abs() <= 1e-12 * scale.max(1.0));
        let inv: Vec<u8> = w.iter().rev().map(|&x| words::inverse_letter(x, 2)).collect();
        let id = m * g.word_matrix(&inv);
        prop_assert!(id.projective_diff(&Moebius::IDENTITY) < 1e-10 * scale.max(1.0));
    }

    #[test]
    fn length_is_inverse_invariant((l1, l2, l3) in three_funnel_lengths(), w in reduced_word(5)) {
        let g = SchottkyGroup::three_funnel(l1, l2, l3).unwrap();
        let m = g.word_matrix(&w);
        let a = m.trace_length().unwrap();
        let b = m.inverse().trace_length().unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn multiplier_matches_length((l1, l2, l3) in (2.0f64..8.0, 2.0f64..8.0, 2.0f64..8.0), w in reduced_word(4)) {
        let g = SchottkyGroup::three_funnel(l1, l2, l3).unwrap();
        let m = g.word_matrix(&w);
        let k = m.fixed_point_multiplier().unwrap();
        let l = m.trace_length().unwrap();
        prop_assert!((k * l.exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_funnel_hits_its_lengths((l1, l2, l3) in three_funnel_lengths()) {
        let g = SchottkyGroup::three_funnel(l1, l2, l3).unwrap();
        let s1 = g.generator(1).unwrap();
        let s2 = g.generator(2).unwrap();
        prop_assert!((s1.trace_length().unwrap() - l1).abs() < 1e-10 * l1.max(1.0));
        prop_assert!((s2.trace_length().unwrap() - l2).abs() < 1e-10 * l2.max(1.0));
        let l = g.word_length(&[1, 4]).unwrap();
        prop_assert!((l - l3).abs() < 1e-10 * l3.max(1.0));
    }

    #[test]
    fn zeta_is_conjugation_symmetric(re in 0.0f64..1.0, im in 0.0f64..100.0) {
        let z = &x121314().2;
        let s = Complex64::new(re, im);
        let a = z.eval(s).value;
        let b = z.eval(s.conj()).value;
        prop_assert!(rel(b, a.conj()) < 1e-12);
    }

    #[test]
    fn zeta_is_real_on_the_axis(re in -0.3f64..2.0) {
        let e = x121314().2.eval(Complex64::new(re, 0.0));
        prop_assert!(e.value.im.abs() <= 1e-14 * e.value.re.abs().max(1.0));
    }

    #[test]
    fn derivative_matches_differences(re in 0.0f64..0.3, im in 0.0f64..100.0) {
        let z = x121314().2.clone().with_truncation(Truncation::Fixed(N_MAX));
        let s = Complex64::new(re, im);
        let h = 1e-5;
        let fd = (z.eval(s + h).value - z.eval(s - h).value) / (2.0 * h);
        let d = z.eval_with_deriv(s).derivative.unwrap();
        prop_assert!(rel(fd, d) < 1e-6 || (fd - d).norm() < 1e-9);
    }

    #[test]
    fn higher_order_is_not_worse(re in 0.0f64..0.1068, im in 0.0f64..200.0) {
        let (z8, z12) = full_order();
        let s = Complex64::new(re, im);
        prop_assert!(z12.eval(s).rel_err <= z8.eval(s).rel_err);
    }

    #[test]
    fn strips_are_additive(
        pts in prop::collection::vec((0.0f64..0.2, 0.0f64..50.0, 1u32..=2), 0..60),
        a1 in 0.0f64..0.2,
        t in 0.0f64..60.0,
    ) {
        let set = synthetic_set(&pts);
        let ts = [t];
        let whole = census::counting_strip(&set, -0.1, 0.3, &ts).unwrap().counts[0];
        let left = census::counting_strip(&set, -0.1, a1, &ts).unwrap().counts[0];
        let right = census::counting_strip(&set, a1, 0.3, &ts).unwrap().counts[0];
        prop_assert_eq!(left + right, whole);
    }

    #[test]
    fn strip_counts_are_monotone(
        pts in prop::collection::vec((0.0f64..0.2, 0.0f64..50.0, 1u32..=2), 0..60),
        mut ts in prop::collection::vec(0.0f64..60.0, 1..20),
    ) {
        ts.sort_by(f64::total_cmp);
        let set = synthetic_set(&pts);
        let series = census::counting_strip(&set, 0.0, 0.2, &ts).unwrap();
        prop_assert!(series.counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn escape_rate_is_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        prop_assume!(a < b);
        prop_assert!(census::escape_rate(a) > census::escape_rate(b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn winding_is_additive_under_bisection(
        re0 in 0.0f64..0.08,
        w in 0.02f64..0.08,
        im0 in 0.0f64..60.0,
        h in 0.5f64..4.0,
        frac in 0.2f64..0.8,
        vertical in any::<bool>(),
    ) {
        let counter = ZeroCounter::new(&x121314().2, SamplingConfig::default());
        let rect = Rect::new(re0, re0 + w, im0, im0 + h).unwrap();
        let (a, b) = if vertical {
            rect.split_re(re0 + frac * w)
        } else {
            rect.split_im(im0 + frac * h)
        };
        let whole = counter.rect_winding(&rect).unwrap();
        let parts = counter.rect_winding(&a).unwrap().count + counter.rect_winding(&b).unwrap().count;
        prop_assert!(whole.count >= 0);
        prop_assert_eq!(whole.count, parts);
    }

    #[test]
    fn grid_counts_are_nonnegative_and_sum(
        re0 in 0.0f64..0.05,
        im0 in 0.0f64..80.0,
        nx in 1usize..4,
        ny in 1usize..6,
    ) {
        let counter = ZeroCounter::new(&x121314().2, SamplingConfig::default());
        let rect = Rect::new(re0, re0 + 0.06, im0, im0 + 5.0).unwrap();
        let grid = counter.bin_count_grid(&rect, nx, ny).unwrap();
        prop_assert!(grid.counts.iter().all(|&c| c >= 0));
        prop_assert_eq!(grid.sum(), grid.total);
    }
}

#[test]
fn class_multiplicities_cover_every_word() {
    for t in &tables().tables {
        assert_eq!(t.total_multiplicity() as u128, words::word_count(2, t.n));
    }
}

#[test]
fn cache_round_trip_is_exact() {
    let cache = &x121314().1;
    let text = cache.to_text();
    let back = LengthCache::parse(&text).unwrap();
    assert_eq!(&back, cache);
    for (a, b) in back.levels.iter().flatten().zip(cache.levels.iter().flatten()) {
        assert_eq!(a.0.to_bits(), b.0.to_bits());
    }
    assert_eq!(back.to_text(), text);
}

#[test]
fn class_sums_match_enumeration() {
    let (g, _, z) = x121314();
    for n in 1..=N_MAX {
        let lengths = words::all_lengths(g, n).unwrap();
        for s in [Complex64::new(0.1, 3.0), Complex64::new(0.5, 25.0), Complex64::new(1.0, 0.0)] {
            let direct: Complex64 = lengths
                .iter()
                .map(|&l| (-s * l).exp() / -(-l).exp_m1())
                .sum::<Complex64>()
                / -(n as f64);
            let classes = z.a_coeff(n, s);
            assert!(rel(classes, direct) < 1e-12, "n={n} s={s}");
        }
    }
}
