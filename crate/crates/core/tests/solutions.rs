use vckdv_core::phi::{PhiPoly, RiccatiSolution};
use vckdv_core::reduction::Profile;
use vckdv_core::residual::{pde_residual, GridSpec};
use vckdv_core::solutions::{default_params, SolutionConstants, SolutionError, SolutionId, SolutionParams, SolutionRecord};
use vckdv_core::{Expr, GammaFamily, Rational};

fn gen2_claim(rec: &SolutionRecord) -> vckdv_core::tanh::Gen2Claim {
    match rec.constants {
        SolutionConstants::Gen2(c) => c,
        SolutionConstants::Gen1(_) => panic!("expected a second-generator record"),
    }
}

#[test]
fn second_generator_amplitude_factors_out() {
    for gamma in [GammaFamily::IDENTITY, GammaFamily::EXP] {
        for id in [SolutionId::U2, SolutionId::U3, SolutionId::U4, SolutionId::U5, SolutionId::U6] {
            let rec = SolutionRecord::build(id, default_params(id), gamma).unwrap();
            let c = gen2_claim(&rec);
            for zeta in [-0.9, -0.35, 0.4, 1.3] {
                if rec.singular.distance(zeta) < 0.1 {
                    continue;
                }
                let vals: Vec<f64> = (0..8)
                    .map(|i| {
                        let t = 0.5 + 0.2 * i as f64;
                        let g = gamma.eval(t);
                        let x = c.k2 * g - zeta;
                        rec.evaluate(x, t).unwrap() * (c.k3 * g).exp()
                    })
                    .collect();
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
                assert!(var < 1e-10, "{id} {gamma} at zeta = {zeta}: variance {var}");
            }
        }
    }
}

#[test]
fn coth_ansatz_is_the_tanh_ansatz_with_exchanged_coefficients() {
    let u2 = SolutionRecord::build(SolutionId::U2, default_params(SolutionId::U2), GammaFamily::IDENTITY).unwrap();
    let u3 = SolutionRecord::build(SolutionId::U3, default_params(SolutionId::U3), GammaFamily::IDENTITY).unwrap();
    let a = gen2_claim(&u2).ansatz;
    assert_eq!(a, gen2_claim(&u3).ansatz);
    let r = a.r;
    let r23 = r.cbrt().powi(2);
    let swapped = PhiPoly::from_terms([
        (Rational::integer(0), a.a0),
        (Rational::frac(2, 3), a.b1 / r23),
        (Rational::frac(-2, 3), a.a1 * r23),
    ]);
    let phi = RiccatiSolution::Tanh.expr(r, &Expr::var("zeta")).unwrap();
    let via_tanh = swapped.to_expr(&phi);
    let mut checked = 0;
    let mut zeta: f64 = -3.0;
    while checked < 20 {
        zeta += 0.29;
        if zeta.abs() < 0.1 {
            continue;
        }
        let want = u3.ansatz_profile.derivatives(zeta).unwrap()[0];
        let got = via_tanh.eval(&[("zeta", zeta)]).unwrap();
        assert!((got - want).abs() <= 1e-8 * want.abs().max(1.0), "{zeta}: {got} vs {want}");
        checked += 1;
    }
}

#[test]
fn u1_tends_to_its_constant_part_far_from_the_origin() {
    let rec = SolutionRecord::build(SolutionId::U1, SolutionParams::Gen1 { n2: 60.0, n5: 0.0, n6: 1.0 }, GammaFamily::IDENTITY)
        .unwrap();
    let SolutionConstants::Gen1(c) = rec.constants else { unreachable!() };
    let t: f64 = 1.3;
    let limit = 1.5 * t.powf(-c.k1 / 3.0);
    let far = rec.evaluate(1e12, t).unwrap();
    assert!((far - limit).abs() < 1e-6, "{far} vs {limit}");
}

#[test]
fn u6_singular_locus_is_out_of_domain() {
    let rec = SolutionRecord::build(
        SolutionId::U6,
        SolutionParams::Gen2Rational { m1: 1.0, m2: 1.0, m4: 0.0, m5: 0.0 },
        GammaFamily::EXP,
    )
    .unwrap();
    let c = gen2_claim(&rec);
    let t = 0.8;
    let x = c.k2 * GammaFamily::EXP.eval(t);
    assert!(matches!(rec.evaluate(x, t), Err(SolutionError::OutOfDomain { .. })));
    assert!(rec.evaluate(x + 1.0, t).is_ok());
}

#[test]
fn ansatz_profiles_satisfy_the_reduced_ode() {
    for id in SolutionId::ALL {
        let rec = SolutionRecord::build(id, default_params(id), GammaFamily::IDENTITY).unwrap();
        for zeta in [-2.1, -0.7, 0.45, 1.9] {
            if rec.singular.distance(zeta) < 0.1 {
                continue;
            }
            let d = rec.ansatz_profile.derivatives(zeta).unwrap();
            let r = rec.ode.residual(zeta, d);
            assert!(r.abs() < 1e-8, "{id} at {zeta}: {r}");
        }
    }
}

#[test]
fn printed_closed_forms_pass_except_the_coth_branch() {
    let grid = GridSpec::new((0.5, 1.5, 20), (-2.0, 2.0, 20));
    for id in SolutionId::ALL {
        let rec = SolutionRecord::build(id, default_params(id), GammaFamily::IDENTITY).unwrap();
        let report = pde_residual(&rec, &rec.family, &grid, None).unwrap();
        assert_eq!(report.passes(1e-6), id != SolutionId::U3, "{id}: {}", report.max_abs);
    }
}
