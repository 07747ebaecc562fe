use affine_spectra_core::coding::{exact_coding, project_exact, run_stats};
use affine_spectra_core::constants::lambda_set;
use affine_spectra_core::exponent::{gammas, HorizonOptions, Side};
use affine_spectra_core::spectrum::{beta, beta_prime, beta_star, legendre_slope, relative_entropy_ratio};
use affine_spectra_core::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

const DENOM: u32 = 40;

/// Systems with partition points on the grid `i / 40`, so exact rational
/// coding applies.
fn system_strategy(max_r: usize, max_d: f64) -> impl Strategy<Value = SelfAffineSystem> {
    (2..=max_r)
        .prop_flat_map(move |r| {
            (
                proptest::sample::subsequence((1..DENOM).collect::<Vec<_>>(), r - 1),
                proptest::collection::vec(-1.0f64..1.0, r - 1),
                -1.0f64..1.0,
                proptest::collection::vec(0.05f64..max_d, r),
                proptest::collection::vec(any::<bool>(), r),
            )
        })
        .prop_map(|(cuts, ys, y_end, dmag, signs)| {
            let mut xs = vec![0u32];
            xs.extend(cuts);
            xs.push(DENOM);
            let mut verts: Vec<[f64; 2]> = vec![[0.0, 0.0]];
            for (i, &x) in xs[1..xs.len() - 1].iter().enumerate() {
                verts.push([x as f64 / DENOM as f64, ys[i]]);
            }
            verts.push([1.0, y_end]);
            let d: Vec<f64> = dmag.iter().zip(&signs).map(|(&m, &s)| if s { m } else { -m }).collect();
            SelfAffineSystem::from_polygon(&verts, &d).unwrap()
        })
}

fn rational(p: u32, q: u32) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn functional_equation_holds(sys in system_strategy(4, 0.8), k_pick in 0usize..4, p in 1u32..999) {
        let ev = Evaluator::new(&sys);
        let tol = 1e-11;
        let k = 1 + k_pick % sys.r();
        let part = sys.exact_partition().unwrap();
        let x = rational(p, 1000);
        let gx = &part[k - 1] + (&part[k] - &part[k - 1]) * &x;
        let lhs = ev.evaluate_exact(&gx, tol).unwrap().value;
        let b = sys.branch(k);
        let xf = p as f64 / 1000.0;
        let rhs = b.c * xf + b.d * ev.evaluate_exact(&x, tol).unwrap().value + b.e;
        prop_assert!((lhs - rhs).abs() <= 2.0 * tol + 1e-13, "{lhs} vs {rhs}");
    }

    #[test]
    fn vertices_are_interpolated(sys in system_strategy(4, 0.95)) {
        let ev = Evaluator::new(&sys);
        for v in sys.vertices() {
            prop_assert_eq!(ev.evaluate(v[0], 1e-12).unwrap().value, v[1]);
        }
    }

    #[test]
    fn refining_tolerance_stays_inside_bound(sys in system_strategy(3, 0.9), x in 0.0f64..1.0) {
        let ev = Evaluator::new(&sys);
        let coarse = ev.evaluate(x, 1e-6).unwrap();
        let fine = ev.evaluate(x, 1e-7).unwrap();
        prop_assert!((coarse.value - fine.value).abs() <= coarse.error_bound + 1e-12);
    }

    #[test]
    fn exponent_sums_are_dominated(sys in system_strategy(4, 0.95)) {
        let c = compute_constants(&sys).unwrap();
        prop_assert!(c.s_min <= c.s_hat + 1e-12 && c.s_max <= c.s_hat + 1e-12);
        prop_assert!(c.alpha_min <= c.alpha_hat + 1e-12 && c.alpha_hat <= c.alpha_max + 1e-12);
    }

    #[test]
    fn beta_is_decreasing_and_convex(sys in system_strategy(4, 0.95), q1 in -5.0f64..5.0, gap in 0.01f64..3.0) {
        let c = compute_constants(&sys).unwrap();
        let (q2, q3) = (q1 + gap, q1 + 2.0 * gap);
        let (b1, b2, b3) = (beta(&c, q1), beta(&c, q2), beta(&c, q3));
        prop_assert!(b1 > b2 && b2 > b3);
        prop_assert!(b2 <= 0.5 * (b1 + b3) + 1e-10);
    }

    #[test]
    fn legendre_consistency(sys in system_strategy(3, 0.95), t in 0.05f64..0.95) {
        let c = compute_constants(&sys).unwrap();
        prop_assume!(c.alpha_max - c.alpha_min > 1e-3);
        let alpha = c.alpha_min + t * (c.alpha_max - c.alpha_min);
        let q = legendre_slope(&c, alpha).unwrap();
        prop_assert!((beta_prime(&c, q) + alpha).abs() < 1e-9);
        let bs = beta_star(&c, alpha).unwrap();
        prop_assert!((bs - (alpha * q + beta(&c, q))).abs() < 1e-9);
    }

    #[test]
    fn relative_entropy_ratio_is_at_most_sigma(
        a in 0.1f64..0.9, y in -1.0f64..1.0, t1 in 0.05f64..0.95, t2 in 0.05f64..0.95,
        w in proptest::collection::vec(0.001f64..1.0, 2),
    ) {
        let sys = SelfAffineSystem::from_polygon(&[[0.0, 0.0], [a, y], [1.0, 0.0]], &[t1 * a, t2 * (1.0 - a)]).unwrap();
        let c = compute_constants(&sys).unwrap();
        prop_assume!(c.regime == Regime::CaseB);
        let s: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|v| v / s).collect();
        let sigma = c.sigma.unwrap();
        prop_assert!(relative_entropy_ratio(&c, &p) <= sigma + 1e-9);
        let p_star = c.p_star.clone().unwrap();
        prop_assert!((p_star.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!((relative_entropy_ratio(&c, &p_star) - sigma).abs() < 1e-9);
    }

    #[test]
    fn two_map_lambda_criterion(
        a in 0.1f64..0.9, t1 in -0.95f64..0.95, t2 in -0.95f64..0.95, yv in -1.0f64..1.0, y_end in -1.0f64..1.0, mode in 0u8..3,
    ) {
        let (a1, a2) = (a, 1.0 - a);
        let d1 = t1 * a1;
        let d2 = if mode == 1 { a2 * (1.0 - d1 / a1) } else { t2 * a2 };
        prop_assume!(d2.abs() < a2 && d1 != 0.0 && d2 != 0.0);
        let y = if mode == 2 {
            // Solve c1 / (a1 - d1) = c2 / (a2 - d2) for the middle vertex.
            y_end * ((1.0 - d2) * (a1 - d1) + d1 * (a2 - d2)) / (a1 - d1 + a2 - d2)
        } else {
            yv
        };
        let sys = SelfAffineSystem::from_polygon(&[[0.0, 0.0], [a1, y], [1.0, y_end]], &[d1, d2]).unwrap();
        let (b1, b2) = (sys.branch(1), sys.branch(2));
        let slopes_equal = (b1.c / (a1 - d1) - b2.c / (a2 - d2)).abs() < 1e-9;
        let ratios_sum = (d1 / a1 + d2 / a2 - 1.0).abs() < 1e-9;
        let (lambda, _) = lambda_set(&sys);
        prop_assert_eq!(lambda.is_empty(), slopes_equal || ratios_sum);
    }

    #[test]
    fn exponent_ranges_and_gamma_inequalities(
        sys in system_strategy(3, 0.95),
        period in proptest::collection::vec(1usize..=3, 1..5),
        prefix in proptest::collection::vec(1usize..=3, 0..3),
    ) {
        let c = compute_constants(&sys).unwrap();
        prop_assume!(!c.polynomial);
        let r = sys.r();
        let clamp = |v: &Vec<usize>| v.iter().map(|&k| 1 + (k - 1) % r).collect::<Vec<_>>();
        let coding = Coding::new(clamp(&prefix), clamp(&period));
        let Ok(g) = gammas(&c, &coding, Side::Right, HorizonOptions::default()) else { return Ok(()) };
        prop_assert!((g.gamma - g.gamma0.min(g.gamma1).min(g.gamma2)).abs() < 1e-15);
        prop_assert!(g.gamma2 >= g.gamma0.min(1.0) - 1e-12);
        if c.d[r - 1].abs() <= c.a[r - 1] && g.gamma0 <= 1.0 {
            prop_assert!((g.gamma0 - g.gamma2).abs() < 1e-12);
        }
        let lower = if c.regime == Regime::CaseB { 1.0 } else { c.alpha_min };
        if coding.canonical().constant_tail() != Some(r) && coding.canonical().constant_tail() != Some(1) {
            prop_assert!(g.gamma >= lower - 1e-9 && g.gamma <= c.alpha_max + 1e-9, "{} not in [{lower}, {}]", g.gamma, c.alpha_max);
        }
        if c.k1 == 0.0 && c.k2 == 0.0 && c.lambda.is_empty() {
            prop_assert_eq!(g.gamma, g.gamma0);
        }
    }

    #[test]
    fn coding_round_trip(sys in system_strategy(3, 0.9), period in proptest::collection::vec(1usize..=3, 1..4), prefix in proptest::collection::vec(1usize..=3, 0..3)) {
        let r = sys.r();
        let clamp = |v: &Vec<usize>| v.iter().map(|&k| 1 + (k - 1) % r).collect::<Vec<_>>();
        let coding = Coding::new(clamp(&prefix), clamp(&period)).canonical();
        prop_assume!(coding.constant_tail() != Some(1) && coding.constant_tail() != Some(r));
        let x = project_exact(&sys, &coding).unwrap();
        let (back, status) = exact_coding(&sys, &x, 10_000).unwrap();
        prop_assert_eq!(status, TStatus::Regular);
        prop_assert_eq!(back, coding);
    }

    #[test]
    fn run_counts_are_additive(word in proptest::collection::vec(1usize..=3, 2..60), m_pick in 0usize..60) {
        let coding = Coding::finite(word.clone());
        let n = word.len();
        let m = 1 + m_pick % (n - 1);
        let sn = run_stats(3, &coding, n, |_| true, |_| false).unwrap();
        let sm = run_stats(3, &coding, m, |_| true, |_| false).unwrap();
        for k in 1..=3 {
            let between = word[m..n].iter().filter(|&&d| d == k).count();
            prop_assert_eq!(sn.s[k - 1] - sm.s[k - 1], between);
        }
    }
}

#[test]
fn cantor_function_at_a_quarter() {
    let sys = preset("okamoto:0.5").unwrap();
    let v = Evaluator::new(&sys).evaluate_exact(&rational(1, 4), 1e-14).unwrap();
    assert!((v.value - 1.0 / 3.0).abs() < 1e-13);
}
