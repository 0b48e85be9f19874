use proptest::prelude::*;
use pseudotest::stats::{
    effect_size, mid_ranks, pearson, rank_sum_exact, rank_sum_normal, rank_sum_test, score_gap,
    signed_rank_test, StatMethod, Tally, EXACT_LIMIT,
};

/// Two-sided exact p-value by listing every way to pick |a| of the pooled
/// positions.
fn brute_rank_sum(a: &[f64], b: &[f64]) -> (f64, f64) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    // Mid-ranks by counting, independent of the library's sort.
    let ranks: Vec<f64> = pooled
        .iter()
        .map(|x| {
            let less = pooled.iter().filter(|y| *y < x).count() as f64;
            let equal = pooled.iter().filter(|y| *y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect();
    let n1 = a.len();
    let centre = n1 as f64 * (n as f64 + 1.0) / 2.0;
    let observed: f64 = ranks[..n1].iter().sum();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let s: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        total += 1;
        if (s - centre).abs() >= (observed - centre).abs() - 1e-9 {
            extreme += 1;
        }
    }
    (observed, extreme as f64 / total as f64)
}

fn small_samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=11)
        .prop_flat_map(|n1| (Just(n1), 1usize..=(EXACT_LIMIT - n1)))
        .prop_flat_map(|(n1, n2)| {
            // A small value range forces plenty of ties.
            (prop::collection::vec(0u8..6, n1), prop::collection::vec(0u8..6, n2))
        })
        .prop_map(|(a, b)| {
            (a.into_iter().map(f64::from).collect(), b.into_iter().map(f64::from).collect())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pearson_is_scale_and_shift_invariant(
        pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
        a in 0.01f64..100.0,
        b in -100.0f64..100.0,
        c in 0.01f64..100.0,
        d in -100.0f64..100.0,
    ) {
        let Ok(base) = pearson(&pairs) else { return Ok(()); };
        let scaled: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (a * x + b, c * y + d)).collect();
        let moved = pearson(&scaled).unwrap();
        prop_assert!((base.statistic - moved.statistic).abs() < 1e-6);
        prop_assert!((-1.0..=1.0).contains(&base.statistic));
        prop_assert!((0.0..=1.0).contains(&base.p_value));
        prop_assert_eq!(base.method_tag, StatMethod::Pearson);

        // Flipping one axis flips the sign.
        let flipped: Vec<(f64, f64)> = pairs.iter().map(|&(x, y)| (-x, y)).collect();
        prop_assert!((pearson(&flipped).unwrap().statistic + base.statistic).abs() < 1e-9);
    }

    #[test]
    fn rank_sum_exact_matches_enumeration((a, b) in small_samples()) {
        let (w, p) = rank_sum_exact(&a, &b);
        let (w_ref, p_ref) = brute_rank_sum(&a, &b);
        prop_assert!((w - w_ref).abs() < 1e-9);
        prop_assert!((p - p_ref).abs() < 1e-12, "p={p} reference={p_ref} a={a:?} b={b:?}");
        let r = rank_sum_test(&a, &b).unwrap();
        prop_assert!(r.exact);
        prop_assert_eq!(r.p_value, p);
    }

    #[test]
    fn mid_ranks_sum_to_triangle(xs in prop::collection::vec(0u8..5, 1..30)) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let n = xs.len() as f64;
        let total: f64 = mid_ranks(&xs).iter().sum();
        prop_assert!((total - n * (n + 1.0) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn large_samples_use_the_normal_approximation(
        a in prop::collection::vec(-50.0f64..50.0, 7..30),
        b in prop::collection::vec(-50.0f64..50.0, 7..30),
    ) {
        let r = rank_sum_test(&a, &b).unwrap();
        prop_assert!(!r.exact);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
        let swapped = rank_sum_test(&b, &a).unwrap();
        prop_assert!((r.p_value - swapped.p_value).abs() < 1e-12);
    }

    #[test]
    fn effect_size_is_antisymmetric(
        a in prop::collection::vec(-10.0f64..10.0, 2..20),
        b in prop::collection::vec(-10.0f64..10.0, 2..20),
    ) {
        if let (Ok(ab), Ok(ba)) = (effect_size(&a, &b), effect_size(&b, &a)) {
            prop_assert!((ab.statistic + ba.statistic).abs() < 1e-9);
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
        }
    }
}

#[test]
fn rank_sum_exact_enumeration_is_exhaustive_for_tiny_totals() {
    // All untied arrangements for every split of totals up to 8.
    for n in 2..=8usize {
        for n1 in 1..n {
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != n1 {
                    continue;
                }
                let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| mask & (1 << i) != 0);
                let a: Vec<f64> = a.into_iter().map(|i| i as f64).collect();
                let b: Vec<f64> = b.into_iter().map(|i| i as f64).collect();
                let got = rank_sum_exact(&a, &b);
                let want = brute_rank_sum(&a, &b);
                assert!((got.1 - want.1).abs() < 1e-12, "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn exact_and_normal_agree_at_the_switch_point() {
    // Total size 12, every untied split with 4 <= n1 <= 8.
    let n = EXACT_LIMIT;
    let mut worst = 0f64;
    for mask in 0u32..(1 << n) {
        let n1 = mask.count_ones() as usize;
        if !(4..=8).contains(&n1) {
            continue;
        }
        let (a, b): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| mask & (1 << i) != 0);
        let a: Vec<f64> = a.into_iter().map(|i| i as f64).collect();
        let b: Vec<f64> = b.into_iter().map(|i| i as f64).collect();
        let gap = (rank_sum_exact(&a, &b).1 - rank_sum_normal(&a, &b).1).abs();
        worst = worst.max(gap);
    }
    assert!(worst <= 0.02, "worst gap {worst}");
}

#[test]
fn effect_size_definitional_cases() {
    // Equal means.
    let d = effect_size(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
    assert!(d.statistic.abs() < 1e-9);
    assert!((d.p_value - 1.0).abs() < 1e-9);

    // Means one pooled SD apart: both samples have SD 1.
    let d = effect_size(&[0.0, 1.0, 2.0], &[-1.0, 0.0, 1.0]).unwrap();
    assert!((d.statistic - 1.0).abs() < 1e-9);
    assert_eq!(d.effect_size, Some(d.statistic));
    assert_eq!(d.method_tag, StatMethod::CohenD);

    // SD 2 in both samples, means 3 apart.
    let d = effect_size(&[1.0, 3.0, 5.0], &[-2.0, 0.0, 2.0]).unwrap();
    assert!((d.statistic - 1.5).abs() < 1e-9);

    // Unequal sizes: pooled variance ((4-1)*var_a + (2-1)*var_b) / 4.
    let a = [2.0, 4.0, 6.0, 8.0];
    let b = [0.0, 2.0];
    let var_a = 20.0 / 3.0;
    let var_b = 2.0;
    let pooled = ((3.0 * var_a + var_b) / 4.0f64).sqrt();
    let d = effect_size(&a, &b).unwrap();
    assert!((d.statistic - (5.0 - 1.0) / pooled).abs() < 1e-9);

    assert!(effect_size(&[1.0, 1.0], &[1.0, 1.0]).is_err());
    assert!(effect_size(&[1.0], &[1.0, 2.0]).is_err());
}

#[test]
fn signed_rank_small_cases() {
    // Every difference positive: W+ is the full rank sum and only the two
    // all-one-sign assignments are as extreme.
    let a = [5.0, 6.0, 7.0, 8.0, 9.0];
    let b = [4.0, 4.0, 4.0, 4.0, 4.0];
    let r = signed_rank_test(&a, &b).unwrap();
    assert_eq!(r.statistic, 15.0);
    assert!(r.exact);
    assert!((r.p_value - 2.0 / 32.0).abs() < 1e-12);
    assert_eq!(r.method_tag, StatMethod::SignedRank);

    let same = signed_rank_test(&a, &a).unwrap();
    assert_eq!(same.p_value, 1.0);
    assert!(signed_rank_test(&a, &b[..3]).is_err());
}

#[test]
fn pearson_undefined_cases() {
    assert!(pearson(&[(1.0, 2.0), (2.0, 3.0)]).is_err());
    assert!(pearson(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)]).is_err());
}

#[test]
fn score_gap_macro_and_micro() {
    let t = |detected, generated| Tally { detected, generated };
    let gap = score_gap(&[(t(1, 10), t(9, 10)), (t(0, 0), t(5, 5)), (t(2, 2), t(1, 2))]);
    assert_eq!(gap.projects, 2);
    // Projects 1 and 3 have both scores: (0.8 + -0.5) / 2.
    assert!((gap.macro_gap.unwrap() - 0.15).abs() < 1e-12);
    // Pooled: required 15/17, pseudo 3/12.
    assert!((gap.micro_gap.unwrap() - (15.0 / 17.0 - 3.0 / 12.0)).abs() < 1e-12);
    let none = score_gap(&[(t(0, 0), t(1, 1))]);
    assert_eq!(none.macro_gap, None);
    assert_eq!(none.micro_gap, None);
}
