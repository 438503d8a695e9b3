//! Acceptance suite: one test per criterion, each printing a pass line
//! with the measured values (run with `--nocapture` to see them).

use pressurelab::demos::{
    closed_form_curve, ex35_partition_sum, ex35_pressure, ex36_norm_ratio, Demo,
};
use pressurelab::gibbs;
use pressurelab::lift;
use pressurelab::multifractal;
use pressurelab::pressure::{self, build_norm_cache, curve_to_csv};
use pressurelab::sft::SubshiftSpec;
use pressurelab::{EvalOptions, Mat, MatrixFamily, PressureEvaluator};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut g = Vec::new();
    let mut i = 0usize;
    loop {
        let q = lo + i as f64 * step;
        if q > hi + 1e-9 * step {
            break;
        }
        g.push(q);
        i += 1;
    }
    g
}

fn pass(idx: u32, msg: &str) {
    println!("ACCEPTANCE {idx} PASS — {msg}");
}

#[test]
fn c01_ex35_closed_form_estimates() {
    let fam = Demo::Ex35.family();
    let eval = PressureEvaluator::new(&fam, 20, &opts()).unwrap();

    // The per-level sums themselves are checked against the binomial
    // oracle, an enumeration-independent route.
    for n in [18usize, 20] {
        let cache = build_norm_cache(&fam, n, &opts()).unwrap();
        for q in [0.5, 1.5, 2.0, 3.0] {
            let direct = cache.log_partition_sum(q, 1).unwrap();
            let oracle = ex35_partition_sum(n, q).ln();
            assert!(
                (direct - oracle).abs() <= 1e-9 * oracle.abs(),
                "partition sum disagrees with the binomial oracle at n={n}, q={q}"
            );
        }
    }

    let mut report = String::new();
    for (q, tol) in [(0.5, 0.05), (1.5, 0.05), (3.0, 0.05), (2.0, 0.01)] {
        let est = eval.estimate(q);
        let exact = ex35_pressure(q);
        let err = (est - exact).abs();
        assert!(err <= tol, "q={q}: |{est} - {exact}| = {err} > {tol}");
        report.push_str(&format!("q={q}: err={err:.5} (tol {tol}); "));
    }
    pass(1, &report);
}

#[test]
fn c02_integer_oracle_and_lift_equivalence() {
    let fam = Demo::Ex35.family();
    let p1 = lift::pressure_exact_integer(&fam, 1).unwrap();
    let p2 = lift::pressure_exact_integer(&fam, 2).unwrap();
    assert!(
        (p1.estimate - 4.0f64.ln()).abs() <= 1e-9,
        "q=1 oracle {}",
        p1.estimate
    );
    assert!(
        (p2.estimate - 10.0f64.ln()).abs() <= 1e-9,
        "q=2 oracle {}",
        p2.estimate
    );

    let mut worst: f64 = 0.0;
    for seed in 1..=5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = SubshiftSpec::full_shift(2).unwrap();
        let mats: Vec<Mat> = (0..2)
            .map(|_| {
                let rows: Vec<Vec<f64>> = (0..2)
                    .map(|_| (0..2).map(|_| 2.0 * rng.random::<f64>()).collect())
                    .collect();
                Mat::from_rows(&rows).unwrap()
            })
            .collect();
        let fam = MatrixFamily::depth1(spec, mats).unwrap();
        for q in 1..=3u32 {
            for n in 1..=10usize {
                let lifted = lift::lifted_partition_sum(&fam, q, n).unwrap();
                let cache = build_norm_cache(&fam, n, &opts()).unwrap();
                let enumerated = cache.log_partition_sum(q as f64, 1).unwrap().exp();
                let rel = (lifted - enumerated).abs() / enumerated;
                worst = worst.max(rel);
                assert!(rel <= 1e-9, "seed {seed} q={q} n={n}: rel {rel}");
            }
        }
    }
    pass(
        2,
        &format!(
            "oracle log4/log10 within 1e-9; lift vs enumeration worst rel {worst:.2e} over 5 seeds"
        ),
    );
}

#[test]
fn c03_kink_detection_on_the_closed_form() {
    let g = grid(0.5, 1.5, 0.05);
    let curve = closed_form_curve(ex35_pressure, &g);
    let kinks = pressure::detect_kink(&curve, 0.05).unwrap();
    assert_eq!(
        kinks.len(),
        1,
        "expected exactly one kink, got {}",
        kinks.len()
    );
    let k = &kinks[0];
    assert!((k.q - 1.0).abs() <= 0.05 + 1e-12, "kink at q={}", k.q);
    let jump = k.jump();
    assert!((jump - 0.131).abs() <= 0.03, "slope jump {jump}");
    pass(
        3,
        &format!(
            "one kink at q={:.2} with slope jump {:.4} (0.131±0.03)",
            k.q, jump
        ),
    );
}

#[test]
fn c04_golden_witness_and_smooth_curve() {
    let fam = Demo::Golden.family();
    let w = fam.check_h2(fam.default_h2_horizon()).unwrap();
    assert!(w.satisfied);
    assert_eq!(w.r, 1);
    assert!((w.b - 0.5).abs() <= 1e-9, "witness constant {}", w.b);

    let eval = PressureEvaluator::new(&fam, 14, &opts()).unwrap();
    let curve: Vec<_> = grid(0.5, 3.0, 0.05)
        .iter()
        .map(|&q| eval.result(q))
        .collect();
    let kinks = pressure::detect_kink(&curve, 0.05).unwrap();
    assert!(kinks.is_empty(), "unexpected kinks: {kinks:?}");
    // every norm is at least 1 here, so the curve must be nondecreasing
    for w in curve.windows(2) {
        assert!(
            w[1].estimate >= w[0].estimate - 1e-12,
            "curve dipped at q={}",
            w[1].q
        );
    }
    pass(
        4,
        &format!(
            "witness r=1, b={:.3}; no kink above 0.05 on [0.5,3] at n=14",
            w.b
        ),
    );
}

#[test]
fn c05_gibbs_spread_stays_bounded() {
    let fam = Demo::Golden.family();
    let eval = PressureEvaluator::new(&fam, 8, &opts()).unwrap();
    let p_hat = eval.estimate(1.0);
    let d4 = gibbs::gibbs_ratio_diagnostics(&fam, 4, 12, 1.0, p_hat, &opts()).unwrap();
    let d6 = gibbs::gibbs_ratio_diagnostics(&fam, 6, 12, 1.0, p_hat, &opts()).unwrap();
    assert!(d4.min_ratio > 0.0 && d6.min_ratio > 0.0);
    assert!(
        d6.spread() <= 1.5 * d4.spread(),
        "spread grew: {} -> {}",
        d4.spread(),
        d6.spread()
    );
    pass(
        5,
        &format!(
            "spread(n=4)={:.6}, spread(n=6)={:.6} (≤1.5×)",
            d4.spread(),
            d6.spread()
        ),
    );
}

#[test]
fn c06_quasi_bernoulli_failure_law() {
    // exact integer norms of the unipotent powers
    let mut prev: Option<(u64, u64)> = None;
    for n in 1..=12u32 {
        let (num, den) = ex36_norm_ratio(n);
        assert_eq!(num, 2 * n as u64 + 2, "numerator law at n={n}");
        assert_eq!(
            den,
            (n as u64 + 2) * (n as u64 + 2),
            "denominator law at n={n}"
        );
        if let Some((pn, pd)) = prev {
            // strict decrease: pn/pd > num/den  ⇔  pn·den > num·pd
            assert!(
                (pn as u128) * (den as u128) > (num as u128) * (pd as u128),
                "ratio failed to decrease at n={n}"
            );
        }
        prev = Some((num, den));
    }
    let (num, den) = ex36_norm_ratio(10);
    assert_eq!((num, den), (22, 144));
    pass(6, "‖M₁^(2n)‖/‖M₁ⁿ‖² = (2n+2)/(n+2)² exactly for n ≤ 12, strictly decreasing; n=10 gives 22/144");
}

#[test]
fn c07_scalar_and_sft_baselines() {
    let scalar = Demo::Scalar.family();
    for n in [4usize, 7, 12] {
        let eval = PressureEvaluator::new(&scalar, n, &opts()).unwrap();
        for q in [-1.0, 0.5, 1.0, 2.0, 3.0] {
            let est = eval.estimate(q);
            assert!((est - 2.0f64.ln()).abs() <= 1e-12, "n={n} q={q}: {est}");
        }
    }

    let gm = Demo::GoldenmeanSft.family();
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let oracle = lift::pressure_exact_integer(&gm, 1).unwrap();
    assert!(
        (oracle.estimate - phi.ln()).abs() <= 1e-6,
        "oracle {}",
        oracle.estimate
    );
    let eval = PressureEvaluator::new(&gm, 20, &opts()).unwrap();
    let est = eval.estimate(1.0);
    assert!((est - phi.ln()).abs() <= 0.05, "enumeration {est}");
    pass(
        7,
        &format!(
        "scalar pressure = log2 to 1e-12; golden-mean oracle err {:.1e}, enumeration err {:.1e}",
        (oracle.estimate - phi.ln()).abs(),
        (est - phi.ln()).abs()
    ),
    );
}

#[test]
fn c08_growth_rate_concentration() {
    let fam = Demo::Golden.family();
    let eval = PressureEvaluator::new(&fam, 14, &opts()).unwrap();

    // exact expectation of (1/14)·log‖M_J‖ under the level-14 weights
    let cache = eval.cache();
    let log_z = cache.log_partition_sum(1.0, 1).unwrap();
    let mut exact = 0.0;
    for &l in cache.log_norms() {
        exact += (l - log_z).exp() * (l / 14.0);
    }

    let words = gibbs::sample_words(&fam, 14, 1.0, 10_000, 27, &opts()).unwrap();
    let st = gibbs::empirical_lyapunov(&fam, &words).unwrap();
    assert_eq!(st.excluded, 0);

    let f = |q: f64| eval.estimate(q);
    let dp = multifractal::pressure_derivative(&f, 1.0, 0.05);
    let gap = (st.mean - dp).abs();
    assert!(
        gap <= 0.05,
        "sample mean {} vs P'(1) {} (gap {gap})",
        st.mean,
        dp
    );

    let se = st.stddev / (words.len() as f64).sqrt();
    let sigmas = (st.mean - exact).abs() / se;
    assert!(
        sigmas <= 3.0,
        "sample mean {} vs exact {} = {sigmas:.2} SE",
        st.mean,
        exact
    );
    pass(
        8,
        &format!(
        "sample mean {:.6} within {gap:.4} of P'(1)={dp:.6} and {sigmas:.2} SE of exact {exact:.6}",
        st.mean
    ),
    );
}

#[test]
fn c09_spectrum_identities() {
    // τ(q, 1) = 0 exactly for every demo pressure function
    for demo in [
        Demo::Ex35,
        Demo::Ex36,
        Demo::Golden,
        Demo::Scalar,
        Demo::GoldenmeanSft,
    ] {
        let fam = demo.family();
        let eval = PressureEvaluator::new(&fam, 8, &opts()).unwrap();
        let f = |q: f64| eval.estimate(q);
        for q in [0.5, 1.0, 2.0] {
            let tau = multifractal::tau_formula(q, 1.0, &f, fam.spec().m());
            assert_eq!(
                tau,
                0.0,
                "τ(t=1) not exactly zero for {} at q={q}",
                demo.name()
            );
        }
    }

    // smooth-branch dimension value against the dual bound (closed form)
    let alpha = multifractal::pressure_derivative(&ex35_pressure, 2.0, 0.05);
    let pts = multifractal::dimension_spectrum(&ex35_pressure, &[2.0], 0.05, 2).unwrap();
    let f_alpha = pts[0].f_alpha;
    assert!((f_alpha - 0.469).abs() <= 0.02, "f(α) = {f_alpha}");
    let g = grid(0.5, 3.0, 0.05);
    let bound = multifractal::legendre_upper_bound(&ex35_pressure, alpha, &g, 2).unwrap();
    assert!(
        (f_alpha - bound).abs() <= 0.01,
        "f {f_alpha} vs dual bound {bound}"
    );
    pass(
        9,
        &format!("τ(q,1)=0 exactly on all demos; f(α)={f_alpha:.4} matches dual bound {bound:.4}"),
    );
}

#[test]
fn c10_invariant_suites() {
    // submultiplicativity with n+ℓ ≤ 14 on the cheap demos
    for demo in [Demo::Ex35, Demo::GoldenmeanSft] {
        let fam = demo.family();
        let logs: Vec<Vec<f64>> = (1..=13)
            .map(|n| {
                let c = build_norm_cache(&fam, n, &opts()).unwrap();
                [0.5, 1.0, 2.0]
                    .iter()
                    .map(|&q| c.log_partition_sum(q, 1).unwrap())
                    .collect()
            })
            .collect();
        for (qi, _) in [0.5, 1.0, 2.0].iter().enumerate() {
            for n in 1..=12usize {
                for l in 1..=(13 - n).min(12) {
                    assert!(
                        logs[n + l - 1][qi] <= logs[n - 1][qi] + logs[l - 1][qi] + 1e-9,
                        "{}: submultiplicativity failed at n={n}, l={l}",
                        demo.name()
                    );
                }
            }
        }
    }

    // bracket validity and shrinking width
    let golden = Demo::Golden.family();
    let mut widths = Vec::new();
    for n in [6usize, 8, 10] {
        let r = pressure::pressure_estimate(&golden, n, 1.0, &opts()).unwrap();
        let (lo, up) = (r.lower.unwrap(), r.upper.unwrap());
        assert!(
            lo <= r.estimate + 1e-12 && r.estimate <= up + 1e-12,
            "bracket at n={n}"
        );
        widths.push(up - lo);
    }
    assert!(
        widths[1] < widths[0] && widths[2] < widths[1],
        "widths {widths:?}"
    );

    // scaling covariance at n=10, c=2
    let scaled = golden.scaled(2.0).unwrap();
    for q in [0.5, 1.0, 2.0] {
        let a = pressure::partition_sum(&golden, 10, q, &opts())
            .unwrap()
            .log_value;
        let b = pressure::partition_sum(&scaled, 10, q, &opts())
            .unwrap()
            .log_value;
        let shift = 10.0 * q * 2.0f64.ln();
        assert!(
            (b - a - shift).abs() <= 1e-10,
            "scaling covariance at q={q}: {}",
            b - a - shift
        );
    }

    // symbol-permutation invariance (cyclic relabel of the golden family)
    let spec3 = SubshiftSpec::full_shift(3).unwrap();
    let g = |i: u8| golden.symbol_matrix(i).clone();
    let permuted = MatrixFamily::depth1(spec3, vec![g(2), g(0), g(1)]).unwrap();
    for q in [0.5, 1.0, 2.0] {
        let a = pressure::partition_sum(&golden, 8, q, &opts())
            .unwrap()
            .log_value;
        let b = pressure::partition_sum(&permuted, 8, q, &opts())
            .unwrap()
            .log_value;
        assert!(
            (a - b).abs() <= 1e-12 * a.abs().max(1.0),
            "permutation changed s_n at q={q}"
        );
    }

    // table normalization and bit-exact marginal consistency
    let deep = gibbs::level_weights(&golden, 10, 1.0, None, &opts()).unwrap();
    assert!((deep.total() - 1.0).abs() <= 1e-12);
    let via = gibbs::marginalize(&gibbs::marginalize(&deep, 6).unwrap(), 3).unwrap();
    let direct = gibbs::marginalize(&deep, 3).unwrap();
    assert!((direct.total() - 1.0).abs() <= 1e-12);
    for (a, b) in via.weights().iter().zip(direct.weights()) {
        assert_eq!(
            a.to_bits(),
            b.to_bits(),
            "marginal consistency is not bit-exact"
        );
    }

    // byte-stable CSV across 1, 2 and 8 threads
    let fam = Demo::Ex35.family();
    let g = grid(0.5, 3.0, 0.25);
    let mut outputs = Vec::new();
    for threads in [1usize, 2, 8] {
        let curve =
            pressure::pressure_curve(&fam, &g, 12, &EvalOptions::with_threads(threads)).unwrap();
        outputs.push(curve_to_csv(&curve));
    }
    assert_eq!(
        outputs[0], outputs[1],
        "CSV differs between 1 and 2 threads"
    );
    assert_eq!(
        outputs[0], outputs[2],
        "CSV differs between 1 and 8 threads"
    );

    pass(10, "submultiplicativity, brackets, scaling covariance, permutation invariance, normalization, bit-exact marginals, thread-stable CSV");
}
