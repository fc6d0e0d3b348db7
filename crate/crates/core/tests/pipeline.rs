use allpay_core::bounds_kernel::{hat_cdf_construct, r_lower_bound, r_value};
use allpay_core::nash_verify::{atom_diagnostic, certify, CertifyConfig, Game, Verdict};
use allpay_core::simultaneous::{product_bkv_profile, validate_inequality_one, validate_inequality_two};
use allpay_core::single_item::{bkv_worst_equilibrium, equilibrium_welfare, SingleItemInstance};
use allpay_core::valuations::XosValuation;
use allpay_core::{McConfig, PiecewiseCdf};

#[test]
fn single_item_equilibrium_end_to_end() {
    let inst = SingleItemInstance::new(vec![2.0, 1.2, 1.2, 0.4]).unwrap();
    let profile = bkv_worst_equilibrium(&inst, 2049).unwrap();
    assert!(atom_diagnostic(&profile).clean);
    let report = equilibrium_welfare(&profile, &inst).unwrap();
    assert!(report.welfare <= report.optimum && report.welfare >= 1.2);
    let game = Game::SingleAllPay { values: inst.values().to_vec(), prizes: None, profile };
    let cfg = CertifyConfig { grid_size: 200, ..CertifyConfig::for_game(&game, McConfig::new(100_000, 1).with_workers(2)) };
    let cert = certify(&game, &cfg).unwrap();
    assert_eq!(cert.verdict, Verdict::Certified, "{cert:?}");
    // the low-value player never bids
    assert_eq!(cert.players[3].regret, 0.0);
}

#[test]
fn extremal_replacement_lowers_r() {
    let v = 1.0;
    let lambda = 0.56;
    for f in [
        PiecewiseCdf::tabulate(|x| x * x, 1.0, 1025).unwrap(),
        PiecewiseCdf::uniform(0.7).unwrap(),
        PiecewiseCdf::new(0.2, vec![0.0, 0.5, 1.2], vec![0.2, 0.9, 1.0]).unwrap(),
    ] {
        let hat = hat_cdf_construct(&f, v).unwrap();
        let r = r_value(&f, v, lambda).unwrap().r;
        let r_hat = r_value(&hat.cdf, v, lambda).unwrap().r;
        assert!(r_hat <= r + 1e-9, "{r_hat} > {r}");
        assert!(r_hat >= r_lower_bound(lambda).unwrap() * v - 1e-9);
    }
}

#[test]
fn inequalities_on_three_items() {
    let vals = vec![
        XosValuation::additive(vec![1.0, 0.2, 0.6]).unwrap(),
        XosValuation::additive(vec![0.7, 0.9, 0.3]).unwrap(),
        XosValuation::additive(vec![0.4, 0.5, 0.8]).unwrap(),
    ];
    let profile = product_bkv_profile(&vals, 1025).unwrap();
    let cfg = McConfig::new(100_000, 2).with_workers(2);
    assert!(validate_inequality_one(&profile, &vals, &cfg).unwrap().holds);
    assert!(validate_inequality_two(&profile, &vals, &cfg).unwrap().holds);
}
