use kincall::stats::{ks_statistic, mann_whitney_u, mwu_asymptotic, mwu_exact, welch_t_test};
use proptest::prelude::*;

fn sample(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3f64..1e3, 2..max)
}

proptest! {
    #[test]
    fn ks_invariant_under_increasing_transforms(a in sample(40), b in sample(40)) {
        let base = ks_statistic(&a, &b).unwrap();
        for f in [|x: f64| x.exp() / 1e300, |x: f64| x.powi(3) + 2.0 * x, |x: f64| (x / 100.0).atan()] {
            let (ta, tb): (Vec<f64>, Vec<f64>) = (a.iter().map(|&x| f(x)).collect(), b.iter().map(|&x| f(x)).collect());
            // only meaningful while the map stays strictly increasing in floating point
            let mut pooled: Vec<(f64, f64)> = a.iter().chain(&b).zip(ta.iter().chain(&tb)).map(|(x, y)| (*x, *y)).collect();
            pooled.sort_by(|p, q| p.0.total_cmp(&q.0));
            if pooled.windows(2).any(|w| w[0].0 < w[1].0 && w[0].1 >= w[1].1) {
                continue;
            }
            prop_assert_eq!(ks_statistic(&ta, &tb).unwrap().statistic, base.statistic);
        }
    }

    #[test]
    fn swapping_labels_keeps_two_sided_results(a in sample(30), b in sample(30)) {
        let (k1, k2) = (ks_statistic(&a, &b).unwrap(), ks_statistic(&b, &a).unwrap());
        prop_assert_eq!(k1.statistic, k2.statistic);
        prop_assert_eq!(k1.p_value, k2.p_value);
        let (w1, w2) = (welch_t_test(&a, &b).unwrap(), welch_t_test(&b, &a).unwrap());
        prop_assert_eq!(w1.t, -w2.t);
        prop_assert!((w1.p_value - w2.p_value).abs() <= 1e-15);
        let (m1, m2) = (mann_whitney_u(&a, &b).unwrap(), mann_whitney_u(&b, &a).unwrap());
        prop_assert_eq!(m1.u + m2.u, (a.len() * b.len()) as f64);
        prop_assert!((m1.p_value - m2.p_value).abs() <= 1e-15);
    }

    #[test]
    fn p_values_are_probabilities(a in sample(30), b in sample(30)) {
        for p in [ks_statistic(&a, &b).unwrap().p_value, welch_t_test(&a, &b).unwrap().p_value, mann_whitney_u(&a, &b).unwrap().p_value] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    // With three or fewer values on one side the normal approximation drifts
    // past 0.02 (0.022 at 3 vs 9, 0.115 at 1 vs 11).
    #[test]
    fn exact_and_normal_mwu_agree_at_twelve(mask in 1u32..4095) {
        prop_assume!((4..=8).contains(&mask.count_ones()));
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for i in 0..12 {
            if mask >> i & 1 == 1 { a.push(i as f64) } else { b.push(i as f64) }
        }
        let (e, n) = (mwu_exact(&a, &b).unwrap(), mwu_asymptotic(&a, &b).unwrap());
        prop_assert_eq!(e.u, n.u);
        prop_assert!((e.p_value - n.p_value).abs() <= 0.02, "{} vs {}", e.p_value, n.p_value);
    }
}
