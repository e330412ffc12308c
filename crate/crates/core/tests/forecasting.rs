use bemdsvr::forecasters::{
    rolling_evaluation, EvaluationConfig, HoltConfig, ModelSpec, PipelineConfig, Repair, VecConfig,
};
use bemdsvr::synthetic::{generate, SyntheticSpec};

#[test]
fn bemd_svr_beats_naive_on_synthetic_hold_out() {
    let s = generate(&SyntheticSpec { length: 96, seed: 5, ..SyntheticSpec::default() }).unwrap();
    let cfg = EvaluationConfig {
        holdout: 12,
        replications: 1,
        base_seed: 5,
        models: vec![
            ModelSpec::BemdSvr(PipelineConfig::compact()),
            ModelSpec::Holt(HoltConfig::default()),
            ModelSpec::Vec(VecConfig::default()),
        ],
        repair: Repair::Swap,
    };
    let out = rolling_evaluation(&s, &cfg).unwrap();
    let u = out.score("BEMD-SVR(Trans1)").unwrap().values[0];
    assert!(u < 1.0, "U^I = {u}");
    assert_eq!(out.records.len(), 12 * 4);
    assert!(out.records.iter().all(|r| r.pred_lower <= r.pred_upper));
}
