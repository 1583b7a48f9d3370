use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vckdv_core::reduction::{
    random_test_profile, reduction_identity, CoefficientFamily, Gen2Constants, Gen2Reading, Profile, ReducedOde,
    ReductionSpec, SimilarityField,
};
use vckdv_core::residual::{residual_terms, Field, GridSpec};
use vckdv_core::GammaFamily;

#[test]
fn printed_second_reduction_differs_by_a_linear_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let m = [0.5, -0.3, 0.2, 0.7, 0.4, 0.25];
    let (k2, k3, k4) = (0.6, 0.3, -0.45);
    for gamma in [GammaFamily::IDENTITY, GammaFamily::EXP] {
        let fam = CoefficientFamily::generator_two(gamma, Gen2Constants::new(m, k2, k3));
        let spec = ReductionSpec::for_family(&fam).unwrap();
        let chain = ReducedOde::for_family(&fam, Gen2Reading::ChainRule).unwrap();
        let printed = ReducedOde::for_family(&fam, Gen2Reading::AsPrinted { k4 }).unwrap();
        for _ in 0..5 {
            let p = random_test_profile(&mut rng);
            let field = SimilarityField::new(spec.clone(), &p);
            for (x, t) in [(-1.0, 0.7), (0.3, 1.1), (1.4, 1.6)] {
                let zeta = spec.zeta_at(x, t).unwrap();
                let d = p.derivatives(zeta).unwrap();
                let lambda = spec.factor_at(x, t).unwrap();
                let jet = field.jet(x, t).unwrap();
                let g = fam.eval_at(t).unwrap();
                let pde = residual_terms(jet.value(), jet.dt(), jet.dx(), jet.dxxx(), &g, 0.0).total();

                let r_chain = chain.residual(zeta, d);
                assert!((pde - lambda * r_chain).abs() <= 1e-9 * pde.abs().max(1.0));

                let predicted = (k2 - k3) * d[1] + (k4 - k3) * d[0] + 2.0 * m[5];
                let gap = printed.residual(zeta, d) - r_chain;
                assert!((gap - predicted).abs() <= 1e-10 * predicted.abs().max(1.0), "{gap} vs {predicted}");
                let mismatch = pde - lambda * printed.residual(zeta, d);
                assert!((mismatch + lambda * predicted).abs() <= 1e-9 * mismatch.abs().max(1.0));
            }
        }
    }
}

#[test]
fn readings_coincide_when_the_misprinted_constants_agree() {
    let m = [0.5, -0.3, 0.2, 0.7, 0.4, 0.0];
    let k = 0.3;
    let fam = CoefficientFamily::generator_two(GammaFamily::IDENTITY, Gen2Constants::new(m, k, k));
    let spec = ReductionSpec::for_family(&fam).unwrap();
    let printed = ReducedOde::for_family(&fam, Gen2Reading::AsPrinted { k4: k }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    let profiles: Vec<_> = (0..3).map(|_| random_test_profile(&mut rng)).collect();
    let refs: Vec<&dyn Profile> = profiles.iter().map(|p| p as &dyn Profile).collect();
    let grid = GridSpec::new((0.6, 1.8, 5), (-1.5, 1.5, 7));
    let r = reduction_identity(&fam, &spec, &printed, &refs, &grid).unwrap();
    assert!(r.passes(1e-8), "{}", r.max_mismatch);
}
