use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vckdv_core::expr::real_pow;
use vckdv_core::lie::{
    adjoint, commutator, jacobi_defect, tabulated_structure_constants, simplify_with_v1, Basis, LieAlgebraBasis, Point,
    SampleDomain, VectorField,
};
use vckdv_core::phi::{phi_diff, PhiPoly, RiccatiSolution};
use vckdv_core::{jet_eval, Expr, GammaFamily, JetVars, Rational};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::var("x")),
        Just(Expr::var("t")),
        (-2.0..2.0f64).prop_map(Expr::c),
    ]
}

/// Expressions that stay smooth and in-domain for `x ∈ [-1, 1]`, `t ∈ [0.5, 1.5]`.
fn smooth_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let padded = |a: Expr| Expr::c(1.5) + a.clone() * a;
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), 1..=3i64).prop_map(|(a, n)| a.powi(n)),
            inner.clone().prop_map(|a| a.tanh()),
            inner.clone().prop_map(|a| (Expr::c(0.3) * a).tanh().exp()),
            inner.clone().prop_map(move |a| padded(a).sqrt()),
            inner.clone().prop_map(move |a| padded(a).ln()),
            inner.clone().prop_map(move |a| padded(a).powr(Rational::frac(-1, 3))),
            inner.prop_map(move |a| Expr::one() / padded(a)),
        ]
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn jets_agree_with_symbolic_derivatives(e in smooth_expr(), x in -1.0..1.0f64, t in 0.5..1.5f64) {
        let env = [("x", x), ("t", t)];
        let j = jet_eval(&e, &env, JetVars::xt("x", "t")).unwrap();
        let d1 = e.diff("x");
        let d2 = d1.diff("x");
        let d3 = d2.diff("x");
        let dt = e.diff("t");
        for (got, sym) in [(j.value(), &e), (j.dx(), &d1), (j.dxx(), &d2), (j.dxxx(), &d3), (j.dt(), &dt)] {
            let want = sym.eval(&env).unwrap();
            prop_assert!(close(got, want, 1e-10), "{e}: jet {got} vs symbolic {want}");
        }
    }

    #[test]
    fn degree_five_polynomial(c in proptest::collection::vec(-3.0..3.0f64, 6), x in -2.0..2.0f64) {
        let p = Expr::sum(c.iter().enumerate().map(|(k, ck)| Expr::c(*ck) * Expr::var("x").powi(k as i64)));
        let j = jet_eval(&p, &[("x", x)], JetVars::only("x")).unwrap();
        let env = [("x", x)];
        let d1 = p.diff("x");
        let d2 = d1.diff("x");
        let d3 = d2.diff("x");
        prop_assert!(close(j.dx(), d1.eval(&env).unwrap(), 1e-12));
        prop_assert!(close(j.dxx(), d2.eval(&env).unwrap(), 1e-12));
        prop_assert!(close(j.dxxx(), d3.eval(&env).unwrap(), 1e-12));
    }

    #[test]
    fn odd_root_power_identity(x in -50.0..50.0f64, p in -6i64..=6, k in 0i64..4) {
        let q = 2 * k + 1;
        prop_assume!(x != 0.0 || p > 0);
        let e = Rational::frac(p, q);
        let lhs = real_pow(real_pow(x, e).unwrap(), Rational::integer(q)).unwrap();
        let rhs = real_pow(x, Rational::integer(p)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE), "{lhs} vs {rhs}");
    }
}

fn phi_poly() -> impl Strategy<Value = PhiPoly> {
    proptest::collection::vec((-9i64..=9, -2.0..2.0f64), 1..5)
        .prop_map(|ts| PhiPoly::from_terms(ts.into_iter().map(|(n, c)| (Rational::frac(n, 3), c))))
}

fn poly_close(a: &PhiPoly, b: &PhiPoly, rel: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    let diff = a - b;
    diff.max_abs() <= rel * scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn phi_ring_axioms(a in phi_poly(), b in phi_poly(), c in phi_poly()) {
        prop_assert!(poly_close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-12));
        prop_assert!(poly_close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-12));
        prop_assert!(poly_close(&(&a + &b), &(&b + &a), 1e-12));
        prop_assert!(poly_close(&(&a * &b), &(&b * &a), 1e-12));
        prop_assert!(poly_close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-12));
    }

    #[test]
    fn leibniz_rule(a in phi_poly(), b in phi_poly(), r in -2.0..2.0f64) {
        let lhs = phi_diff(&(&a * &b), r);
        let rhs = &(&phi_diff(&a, r) * &b) + &(&a * &phi_diff(&b, r));
        prop_assert!(poly_close(&lhs, &rhs, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn riccati_instantiation_is_a_homomorphism(p in phi_poly(), s in 0.2..1.5f64) {
        let z = Expr::var("zeta");
        for sol in RiccatiSolution::ALL {
            let r = match sol {
                RiccatiSolution::Tanh | RiccatiSolution::Coth => -s * s,
                RiccatiSolution::Tan | RiccatiSolution::Cot => s * s,
                RiccatiSolution::Rational => 0.0,
            };
            let phi = sol.expr(r, &z).unwrap();
            let inst = p.to_expr(&phi);
            let dp = phi_diff(&p, r);
            let singular = sol.singular_set(r);
            let mut checked = 0;
            let mut zeta = 0.13;
            while checked < 20 {
                zeta += 0.061;
                if singular.distance(zeta) < 0.1 {
                    continue;
                }
                let j = jet_eval(&inst, &[("zeta", zeta)], JetVars::only("zeta")).unwrap();
                let phi_v = phi.eval(&[("zeta", zeta)]).unwrap();
                let want = dp.eval(phi_v).unwrap();
                prop_assert!(close(j.dx(), want, 1e-8), "{sol:?} at {zeta}: {} vs {want}", j.dx());
                checked += 1;
            }
        }
    }
}

fn poly_field() -> impl Strategy<Value = VectorField> {
    let comp = || {
        proptest::collection::vec(-2.0..2.0f64, 4).prop_map(|c| {
            Expr::sum([
                Expr::c(c[0]),
                Expr::c(c[1]) * Expr::var("t") * Expr::var("x"),
                Expr::c(c[2]) * Expr::var("u").powi(2),
                Expr::c(c[3]) * Expr::var("x").powi(3),
            ])
        })
    };
    (comp(), comp(), comp()).prop_map(|(a, b, c)| VectorField::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn commutator_antisymmetry(x in poly_field(), y in poly_field(), p in (0.5..2.0f64, -2.0..2.0f64, -2.0..2.0f64)) {
        let pt = Point::new(p.0, p.1, p.2);
        let a = commutator(&x, &y).eval(&pt).unwrap();
        let b = commutator(&y, &x).eval(&pt).unwrap();
        for k in 0..3 {
            prop_assert!((a[k] + b[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn adjoint_group_law(i in 0usize..5, e1 in -1.0..1.0f64, e2 in -1.0..1.0f64, w in proptest::array::uniform5(-2.0..2.0f64)) {
        let s = tabulated_structure_constants();
        let b = Basis::ALL[i];
        let lhs = adjoint(&s, b, e1 + e2, &w);
        let rhs = adjoint(&s, b, e1, &adjoint(&s, b, e2, &w));
        for k in 0..5 {
            prop_assert!((lhs[k] - rhs[k]).abs() <= 1e-10 * lhs[k].abs().max(1.0));
        }
        let id = adjoint(&s, b, 0.0, &w);
        prop_assert_eq!(id, w);
    }
}

#[test]
fn jacobi_on_sampled_basis_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for gamma in [GammaFamily::IDENTITY, GammaFamily::EXP] {
        let basis = LieAlgebraBasis::new(gamma);
        let pts = SampleDomain::default().sample(&mut rng, 10);
        for i in Basis::ALL {
            for j in Basis::ALL {
                for k in Basis::ALL {
                    let (a, b, c) = (basis.field(i), basis.field(j), basis.field(k));
                    let cyc = commutator(a, &commutator(b, c))
                        .plus(&commutator(b, &commutator(c, a)))
                        .plus(&commutator(c, &commutator(a, b)));
                    for p in &pts {
                        for v in cyc.eval(p).unwrap() {
                            assert!(v.abs() <= 1e-8, "{i} {j} {k}: {v}");
                        }
                    }
                }
            }
        }
    }
    assert_eq!(jacobi_defect(&tabulated_structure_constants()), 0.0);
}

#[test]
fn v1_removes_v2_and_v3_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let s = tabulated_structure_constants();
    for _ in 0..20 {
        let mut w = [0.0f64; 5];
        for v in &mut w {
            *v = rand::Rng::gen_range(&mut rng, -2.0..2.0);
        }
        if w[0].abs() < 0.1 {
            w[0] = 0.5;
        }
        let simp = simplify_with_v1(&s, &w).unwrap();
        assert!(simp.coords[1].abs() < 1e-10 && simp.coords[2].abs() < 1e-10, "{simp:?}");
    }
}
