use proptest::prelude::*;
use vdp_core::catalog::{case1, case2, p_general, KSign};
use vdp_core::colehopf::{solve_chain, verify_annihilation};
use vdp_core::expr::{parse, Expr, Func, ParamEnv};
use vdp_core::odesolve::Grid;
use vdp_core::params::VdpParams;
use vdp_core::reference;

/// Smooth expressions on the whole real line: denominators and the arguments
/// of `sqrt` and `log` are kept at least 1, exponentials see bounded input.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![Just(Expr::x()), (-2.0f64..2.0).prop_map(Expr::c), Just(Expr::param("mu")),];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / (1.0 + b.powi(2))),
            inner.clone().prop_map(|a| -a),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.sin()),
            inner.clone().prop_map(|a| a.cos()),
            inner.clone().prop_map(|a| a.sin().exp()),
            inner.clone().prop_map(|a| a.cos().sinh()),
            inner.clone().prop_map(|a| a.sin().cosh()),
            inner.clone().prop_map(|a| (1.0 + a.powi(2)).sqrt()),
            inner.clone().prop_map(|a| (1.0 + a.powi(2)).log()),
            inner.prop_map(|a| (a.sin() / 2.0).tan()),
        ]
    })
}

fn env() -> ParamEnv {
    ParamEnv::new().with("mu", 0.7)
}

/// Fourth-order central difference.
fn fd(e: &Expr, x: f64, env: &ParamEnv) -> Option<f64> {
    let h = 1e-3;
    let f = |t: f64| e.eval(t, env).ok();
    Some((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn derivative_matches_finite_difference(e in smooth_expr(), x in -2.0f64..2.0) {
        let env = env();
        let d = e.diff().eval(x, &env).unwrap();
        let approx = fd(&e, x, &env).unwrap();
        let scale = d.abs().max(1.0);
        prop_assert!((d - approx).abs() <= 1e-5 * scale, "{e}: {d} vs {approx}");
    }

    #[test]
    fn printing_round_trips(e in smooth_expr(), x in -2.0f64..2.0) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text.clone());
        let env = env();
        prop_assert_eq!(back.eval(x, &env).unwrap().to_bits(), e.eval(x, &env).unwrap().to_bits(), "{}", text);
    }

    #[test]
    fn simplify_preserves_values(e in smooth_expr(), x in -2.0f64..2.0) {
        let env = env();
        let a = e.eval(x, &env).unwrap();
        let b = e.simplify().eval(x, &env).unwrap();
        prop_assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(f64::MIN_POSITIVE), "{e}: {a} vs {b}");
    }

    #[test]
    fn compiled_matches_tree(e in smooth_expr(), x in -2.0f64..2.0) {
        let env = env();
        let d = e.diff();
        prop_assert_eq!(d.compile(&env).eval(x).map(f64::to_bits), d.eval(x, &env).map(f64::to_bits));
        let partial = ParamEnv::new();
        prop_assert_eq!(e.compile(&partial).eval(x), e.eval(x, &partial));
    }

    #[test]
    fn second_derivative_is_closed(e in smooth_expr(), x in -2.0f64..2.0) {
        prop_assert!(e.diff().diff().eval(x, &env()).is_ok());
    }
}

fn nonzero() -> impl Strategy<Value = f64> {
    prop_oneof![-2.0f64..-0.1, 0.1f64..2.0]
}

/// `(mu, beta, alpha)` with a real `k`.
fn real_k_params() -> impl Strategy<Value = VdpParams> {
    (nonzero(), nonzero(), 0.0f64..1.0).prop_map(|(mu, beta, t)| {
        let m = mu * beta;
        // alpha ranges over [m^2/4 - 2, m^2/4]
        VdpParams::new(mu, beta, m * m / 4.0 - 2.0 * t)
    })
}

fn sign() -> impl Strategy<Value = KSign> {
    prop_oneof![Just(KSign::Plus), Just(KSign::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn case1_potential_is_a_perfect_square(params in real_k_params(), s in sign()) {
        let sol = case1(params, s).unwrap();
        let k = sol.constants.k;
        let want = ((params.mu_beta() - k) / 4.0).powi(2);
        let env = sol.bundle.env().with("k", k);
        let omega_sq = reference::CASE1_OMEGA_SQ.expr();
        for x in [0.0, 1.3, 4.9] {
            let u = sol.bundle.u.eval(x, &env).unwrap();
            prop_assert!((u - want).abs() <= 1e-12 * want.max(1.0));
            prop_assert!((omega_sq.eval(x, &env).unwrap() + u).abs() <= 1e-12 * want.max(1.0));
        }
        prop_assert!(sol.basis_residual(&Grid::new(0.0, 5.0, 51).unwrap()).unwrap() <= 1e-9);
    }

    #[test]
    fn case2_potential(mu in nonzero(), beta in nonzero()) {
        let m = mu * beta;
        let sol = case2(VdpParams::new(mu, beta, m * m / 4.0)).unwrap();
        let u = sol.bundle.u.eval(0.5, &sol.bundle.env()).unwrap();
        prop_assert!((u - m * m / 16.0).abs() <= 1e-12 * (m * m).max(1.0));
        prop_assert!(sol.basis_residual(&Grid::new(0.0, 5.0, 51).unwrap()).unwrap() <= 1e-9);
    }

    #[test]
    fn unforced_family_has_zero_forcing(
        params in real_k_params(),
        c1 in 0.0f64..1.0,
        c2 in 0.0f64..1.0,
        s in sign(),
    ) {
        // nonnegative constants keep the denominator positive
        let p = p_general(params, c1, c2, s).unwrap();
        let b = solve_chain(&p, params);
        let g = Grid::new(0.0, 5.0, 101).unwrap();
        let env = b.env();
        for x in g.points() {
            let f = b.f.eval(x, &env).unwrap();
            prop_assert!(f.abs() <= 1e-9, "f({x}) = {f}");
        }
        prop_assert!(verify_annihilation(&b, &g).unwrap().passes());
    }

    #[test]
    fn seeded_potential_holds_for_both_branches(
        mu in nonzero(), beta in nonzero(), alpha in -1.0f64..1.0, a in -1.0f64..1.0,
    ) {
        use vdp_core::colehopf::{seeded_construction, Branch};
        let params = VdpParams::new(mu, beta, alpha);
        let s = Expr::c(a) * Expr::x() + Expr::call(Func::Sin, Expr::x());
        for branch in [Branch::Plus, Branch::Minus] {
            let b = seeded_construction(&s, params, branch);
            prop_assert!(b.ledger.iter().all(|e| e.agrees));
            prop_assert!(verify_annihilation(&b, &Grid::new(0.0, 3.0, 31).unwrap()).unwrap().passes());
        }
    }
}
