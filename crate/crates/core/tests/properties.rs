use graded_norms::norms::DualNorm;
use graded_norms::properties::{
    check_monotonic, check_orthant_monotonic, check_orthant_strictly_monotonic, replay, CheckConfig, Verdict,
};
use graded_norms::suite::{hexagon, linf_square, parallelogram, sheared_square};
use graded_norms::topk::{topk_eval, KSupportMethod, KSupportNorm, TopKNorm};
use graded_norms::{norms, Norm, NormSpec, Vector};

fn cfg(dim: usize) -> CheckConfig {
    CheckConfig::new(dim).trials(400).seed(5)
}

#[test]
fn topk_and_ksupport_of_om_sources_are_om() {
    for (source, d) in [(NormSpec::lp(2.0).unwrap(), 4), (NormSpec::lp(1.0).unwrap(), 3), (hexagon(), 2)] {
        for k in 1..=d {
            let top = TopKNorm::new(source.clone(), k).unwrap();
            assert_eq!(check_orthant_monotonic(&top, &cfg(d)).unwrap().verdict, Verdict::Passed, "top-{k} of {source}");
        }
    }
    let l1 = NormSpec::lp(1.0).unwrap();
    for k in 1..=3 {
        let ks = KSupportNorm::new(l1.clone(), k, KSupportMethod::Analytic).unwrap();
        assert_eq!(check_orthant_monotonic(&ks, &cfg(3)).unwrap().verdict, Verdict::Passed);
    }
    let ks = KSupportNorm::new(NormSpec::lp(2.0).unwrap(), 2, KSupportMethod::DualOpt).unwrap();
    assert_eq!(check_orthant_monotonic(&ks, &cfg(3).trials(100)).unwrap().verdict, Verdict::Passed);
}

#[test]
fn om_is_preserved_by_duality_for_polytopes() {
    for source in [hexagon(), parallelogram(), sheared_square(), linf_square()] {
        let primal = check_orthant_monotonic(&source, &cfg(2)).unwrap().verdict;
        let dual = check_orthant_monotonic(&DualNorm(&source), &cfg(2)).unwrap().verdict;
        let polar = check_orthant_monotonic(&source.dual_spec().unwrap(), &cfg(2)).unwrap().verdict;
        assert_ne!(primal, Verdict::Inconclusive);
        assert_eq!(primal, dual, "{source}");
        assert_eq!(primal, polar, "{source}");
    }
}

#[test]
fn osm_is_not_preserved_by_duality() {
    let l1 = check_orthant_strictly_monotonic(&NormSpec::lp(1.0).unwrap(), &cfg(3)).unwrap();
    let linf = check_orthant_strictly_monotonic(&NormSpec::lp_inf(), &cfg(3)).unwrap();
    assert_eq!(l1.verdict, Verdict::Passed);
    assert_eq!(linf.verdict, Verdict::Falsified);
}

#[test]
fn verdict_lattice_and_replay() {
    let sources = [
        NormSpec::lp(1.0).unwrap(),
        NormSpec::lp(2.5).unwrap(),
        NormSpec::lp_inf(),
        NormSpec::weighted_lp(1.0, Vector::new(vec![1.0, 3.0]).unwrap()).unwrap(),
        hexagon(),
        parallelogram(),
        sheared_square(),
    ];
    for source in &sources {
        let c = cfg(2);
        let monotonic = check_monotonic(source, &c).unwrap();
        let om = check_orthant_monotonic(source, &c).unwrap();
        let osm = check_orthant_strictly_monotonic(source, &c).unwrap();
        if monotonic.passed() || osm.passed() {
            assert!(om.passed(), "{source}");
        }
        for report in [&monotonic, &om, &osm] {
            if report.falsified() {
                assert!(replay(report, source).unwrap(), "{} on {source}", report.property);
            }
        }
    }
}

#[test]
fn norm_meets_top_d_exactly_when_om() {
    // dropping a coordinate of (1, 1) increases the parallelogram norm from 2/3 to 1
    let x = Vector::new(vec![1.0, 1.0]).unwrap();
    let p = parallelogram();
    let top = topk_eval(&p, 2, &x).unwrap();
    assert!((norms::eval(&p, &x).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((top - 1.0).abs() < 1e-12);
    let h = hexagon();
    for t in 0..50 {
        let x = graded_norms::sampling::mixture_vector(&mut graded_norms::sampling::trial_rng(3, t), 2);
        let (n, top) = (h.eval(&x).unwrap(), topk_eval(&h, 2, &x).unwrap());
        assert!((n - top).abs() <= 1e-12 * n.max(1.0));
    }
}
