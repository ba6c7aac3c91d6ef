use xyvqe::ansatz::{AnsatzSpec, Connectivity, Family};
use xyvqe::measure::EstimateMode;
use xyvqe::model::XYModel;
use xyvqe::vqe::{self, VqeConfig};

#[test]
fn tqr_reaches_polarized_state_at_strong_field() {
    let m = XYModel::new(1.0, 5.0, 4).unwrap();
    let mut cfg = VqeConfig::new(m, AnsatzSpec::new(Family::Tqr, Connectivity::Full, 1, 4), EstimateMode::Exact);
    cfg.restarts = 3;
    let r = vqe::run(&cfg).unwrap();
    assert!((r.energy_per_site + 5.0).abs() < 1e-6);
    assert!(r.fidelity_vs_exact > 0.999);
}

#[test]
fn sampled_run_is_reproducible_and_close() {
    let m = XYModel::new(1.0, 2.0, 2).unwrap();
    let mut cfg = VqeConfig::new(m, AnsatzSpec::mean_field(2), EstimateMode::Sampled);
    cfg.restarts = 2;
    cfg.optimizer.max_evals = 1500;
    cfg.seed = 11;
    let a = vqe::run(&cfg).unwrap();
    let b = vqe::run(&cfg).unwrap();
    assert!(a.same_outcome(&b));
    assert!(a.std_error > 0.0);
    assert!((a.statevector_energy_per_site - a.exact_energy_per_site).abs() < 0.1);
}

#[test]
fn sweep_rows_follow_field_order() {
    let m = XYModel::new(1.0, 0.0, 3).unwrap();
    let mut cfg = VqeConfig::new(m, AnsatzSpec::new(Family::Tqr, Connectivity::Full, 1, 3), EstimateMode::Exact);
    cfg.restarts = 2;
    let hs = [-2.0, 0.0, 2.0];
    let rows = vqe::sweep(&cfg, &hs).unwrap();
    assert_eq!(rows.len(), 3);
    for (r, &h) in rows.iter().zip(&hs) {
        assert!(r.energy_per_site >= r.exact_energy_per_site - 1e-9, "h = {h}");
        assert!((r.energy_per_site - r.exact_energy_per_site).abs() < 1e-3, "h = {h}");
    }
}
