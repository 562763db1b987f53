mod common;

use common::oracle;
use gradkit::*;
use proptest::prelude::*;

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// Crude rates in `[1e-4, 0.5]` spanning a few orders of magnitude.
fn rates(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(log_uniform(1e-4, 0.5), len)
}

fn table_with_exposures(max_len: usize) -> impl Strategy<Value = MortalityTable> {
    (2..=max_len)
        .prop_flat_map(|n| (rates(n..=n), prop::collection::vec(log_uniform(50.0, 1e5), n)))
        .prop_map(|(q, e)| MortalityTable::new(q, Some(e)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smoother_rows_are_probability_vectors(
        bw in (1usize..=120).prop_flat_map(|w| prop::collection::vec(log_uniform(1e-5, 1e5), w + 1))
    ) {
        let omega = bw.len() - 1;
        let k = smoother_matrix(&bw, omega).unwrap();
        prop_assert_eq!(k.order(), omega + 1);
        for row in k.rows() {
            prop_assert_eq!(row.len(), omega + 1);
            prop_assert!(row.iter().all(|&w| w >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mode_is_strict_argmax(omega in 1usize..=100, m_frac in 0.0f64..=1.0, h in log_uniform(1e-4, 1e3)) {
        let m = ((omega as f64) * m_frac).round() as usize;
        let k = normalized_kernel(&KernelParams::new(m, h, omega).unwrap());
        for (x, w) in k.iter().enumerate() {
            if x != m {
                prop_assert!(*w < k[m], "x={} w={} k[m]={}", x, w, k[m]);
            }
        }
    }

    #[test]
    fn log_domain_matches_naive_powers(omega in 1usize..=10, m_frac in 0.0f64..=1.0, h in 0.1f64..20.0) {
        let m = ((omega as f64) * m_frac).round() as usize;
        let fast = normalized_kernel(&KernelParams::new(m, h, omega).unwrap());
        let slow = oracle::naive_normalized(m, h, omega);
        for (a, b) in fast.iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs(), "{} vs {}", a, b);
        }
    }

    #[test]
    fn bandwidth_decreases_in_s(l in 0.001f64..0.999, h in log_uniform(1e-4, 1.0), s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
        prop_assume!((s1 - s2).abs() > 1e-9);
        let factors = local_factors_ex(&[1.0 / l, 1.0]).unwrap();
        let at = |s| adaptive_bandwidths(h, s, &factors).unwrap();
        let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(at(hi)[0] < at(lo)[0]);
        prop_assert_eq!(at(hi)[1], h);
        prop_assert!(at(hi).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn factors_ignore_exposure_scale(t in table_with_exposures(30), c in log_uniform(1e-3, 1e6)) {
        let e = t.exposures().unwrap();
        let scaled: Vec<f64> = e.iter().map(|v| v * c).collect();
        let a = local_factors_ex(e).unwrap();
        let b = local_factors_ex(&scaled).unwrap();
        for (x, y) in a.factors().iter().zip(b.factors()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let a = local_factors_vc(t.crude_rates(), e).unwrap();
        let b = local_factors_vc(t.crude_rates(), &scaled).unwrap();
        for (x, y) in a.factors().iter().zip(b.factors()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert!((a.factors().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(a.factors().iter().all(|&l| l > 0.0 && l <= 1.0));
    }

    #[test]
    fn graduation_is_linear(
        (q1, q2) in (2usize..=25).prop_flat_map(|n| (
            prop::collection::vec(0.0f64..0.4, n),
            prop::collection::vec(0.0f64..0.4, n),
        )),
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        h in log_uniform(1e-3, 10.0),
    ) {
        let omega = q1.len() - 1;
        let spec = BandwidthSpec::fixed(h, omega).unwrap();
        let mix: Vec<f64> = q1.iter().zip(&q2).map(|(x, y)| a * x + b * y).collect();
        let g = |q: &[f64]| graduate(&MortalityTable::new(q.to_vec(), None).unwrap(), &spec, false).unwrap().fitted;
        let (g1, g2, gm) = (g(&q1), g(&q2), g(&mix));
        for i in 0..=omega {
            prop_assert!((gm[i] - (a * g1[i] + b * g2[i])).abs() <= 1e-12);
        }
    }

    #[test]
    fn fitted_within_convex_hull(t in table_with_exposures(40), h in log_uniform(1e-4, 10.0), s in 0.0f64..=1.0) {
        let l = local_factors_vc(t.crude_rates(), t.exposures().unwrap()).unwrap();
        let spec = BandwidthSpec::adaptive(h, s, &l).unwrap();
        let r = graduate(&t, &spec, false).unwrap();
        let lo = t.crude_rates().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = t.crude_rates().iter().cloned().fold(0.0, f64::max);
        for f in &r.fitted {
            prop_assert!(*f >= lo - 1e-15 && *f <= hi + 1e-15);
        }
        let lr = graduate(&t, &spec, true).unwrap();
        prop_assert!(lr.fitted.iter().all(|&f| f > 0.0 && f < 1.0));
    }

    #[test]
    fn matrix_form_matches_summation(
        (q, e) in (2usize..=11).prop_flat_map(|n| (rates(n..=n), prop::collection::vec(500.0f64..1000.0, n))),
        h in 0.1f64..5.0,
        s in 0.0f64..=1.0,
    ) {
        // factors stay >= 0.5, so the raw powers in the oracle cannot overflow
        let t = MortalityTable::new(q, Some(e)).unwrap();
        let l = local_factors_ex(t.exposures().unwrap()).unwrap();
        let spec = BandwidthSpec::adaptive(h, s, &l).unwrap();
        let fitted = graduate(&t, &spec, false).unwrap().fitted;
        let direct = oracle::naive_graduate(t.crude_rates(), spec.per_age());
        for (a, b) in fitted.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn intervals_are_ordered(t in table_with_exposures(30), h in log_uniform(1e-3, 1.0), alpha in 0.001f64..0.999) {
        let spec = BandwidthSpec::fixed(h, t.omega()).unwrap();
        let r = graduate(&t, &spec, false).unwrap().with_confidence_intervals(&t, alpha).unwrap();
        let (lo, hi) = (r.lower.unwrap(), r.upper.unwrap());
        for i in 0..=t.omega() {
            prop_assert!(lo[i] < r.fitted[i] && r.fitted[i] < hi[i]);
        }
    }

    #[test]
    fn logit_round_trip(q in log_uniform(1e-10, 0.5), upper in any::<bool>()) {
        let q = if upper { 1.0 - q } else { q };
        prop_assert!((inv_logit(logit_transform(q).unwrap()) - q).abs() <= 1e-12);
    }

    #[test]
    fn quantile_matches_bisection(p in log_uniform(1e-10, 0.5), upper in any::<bool>()) {
        let p = if upper { 1.0 - p } else { p };
        let z = normal_quantile(p).unwrap();
        prop_assert!((z - oracle::normal_quantile_bisect(p)).abs() <= 1e-9, "p={}", p);
        let mirrored = 1.0 - p;
        let p_exact = 1.0 - mirrored;
        prop_assert!((normal_quantile(p_exact).unwrap() + normal_quantile(mirrored).unwrap()).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cv_search_is_monotone_and_feasible(t in table_with_exposures(20), s0 in 0.0f64..=1.0) {
        let cfg = CvConfig { optimize_s: true, start_s: s0, ..CvConfig::default() };
        let sel = select_bandwidth(&t, BandwidthMode::VariationCoefficient, true, &cfg, None).unwrap();
        let recs = &sel.trace.records;
        prop_assert!(recs.windows(2).all(|w| w[1].rss <= w[0].rss));
        for r in recs {
            prop_assert!(r.params[0] > 0.0);
            prop_assert!((0.0..=1.0).contains(&r.params[1]));
        }
        prop_assert_eq!(recs.last().unwrap().rss, sel.cv);
        prop_assert!(sel.h > 0.0 && (0.0..=1.0).contains(&sel.s));
    }

    #[test]
    fn zero_sensitivity_matches_fixed(t in table_with_exposures(25), vc in any::<bool>(), prop in any::<bool>()) {
        let kind = if prop { ResidualKind::Proportional } else { ResidualKind::Classical };
        let cfg = CvConfig { residual_kind: kind, ..CvConfig::default() };
        let mode = if vc { BandwidthMode::VariationCoefficient } else { BandwidthMode::Exposure };
        let fx = select_bandwidth(&t, BandwidthMode::Fixed, false, &cfg, None).unwrap();
        let ad = select_bandwidth(&t, mode, false, &cfg, Some(0.0)).unwrap();
        prop_assert!((fx.h - ad.h).abs() <= 1e-6);
    }

    #[test]
    fn both_residual_kinds_converge(t in table_with_exposures(25)) {
        for kind in [ResidualKind::Classical, ResidualKind::Proportional] {
            let cfg = CvConfig { residual_kind: kind, ..CvConfig::default() };
            let sel = select_bandwidth(&t, BandwidthMode::Fixed, false, &cfg, None).unwrap();
            prop_assert!(sel.trace.converged, "{:?}", sel.trace);
            prop_assert!(sel.cv.is_finite());
        }
    }
}

#[test]
fn constant_rates_everywhere() {
    let t = MortalityTable::new(vec![0.0375; 12], Some(vec![1234.0; 12])).unwrap();
    for mode in [
        BandwidthMode::Fixed,
        BandwidthMode::Exposure,
        BandwidthMode::VariationCoefficient,
    ] {
        for kind in [ResidualKind::Classical, ResidualKind::Proportional] {
            for logit in [false, true] {
                let spec = match factors_for(&t, mode).unwrap() {
                    Some(l) => BandwidthSpec::adaptive(0.01, 0.6, &l).unwrap(),
                    None => BandwidthSpec::fixed(0.01, 11).unwrap(),
                };
                let cv = cv_statistic(&t, &spec, logit, kind).unwrap();
                let fitted = graduate(&t, &spec, logit).unwrap().fitted;
                if logit {
                    // exact up to one logit round trip
                    assert!(cv <= 1e-28, "{mode} {kind}: {cv}");
                    assert!(fitted.iter().all(|f| (f - 0.0375).abs() <= 1e-16));
                } else {
                    assert_eq!(cv, 0.0, "{mode} {kind}");
                    assert!(fitted.iter().all(|&f| f == 0.0375));
                }
            }
        }
    }
}

#[test]
fn quantile_high_precision_points() {
    // mpmath, 50 digits
    let cases = [
        (1e-10, -6.361_340_902_404_056),
        (0.001, -3.090_232_306_167_813_5),
        (0.2, -0.841_621_233_572_914_2),
        (0.9, 1.281_551_565_544_600_5),
        (0.999999, 4.753_424_308_822_899),
        (0.975, 1.959_963_984_540_054_2),
    ];
    for (p, z) in cases {
        assert!((normal_quantile(p).unwrap() - z).abs() <= 1e-9, "p={p}");
        assert!(
            (oracle::normal_quantile_bisect(p) - z).abs() <= 1e-9,
            "oracle p={p}"
        );
    }
}
