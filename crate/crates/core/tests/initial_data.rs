use wavebreak::initial_data::*;

fn paper_params() -> SeedParams {
    SeedParams::new(100.0, 1e-2, 3.0).unwrap()
}

#[test]
fn derived_scales() {
    let p = paper_params();
    assert!((p.s0() - 4.605_170_185_988_091).abs() < 1e-12);
    assert!((p.ell() - 0.047_152_924_252_903_475).abs() < 1e-12);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(SeedParams::new(100.0, 1.0, 3.0).is_err());
    assert!(SeedParams::new(100.0, 0.0, 3.0).is_err());
    assert!(SeedParams::new(2.0, 0.01, 3.0).is_err());
}

#[test]
fn default_seed_passes_every_check() {
    let p = paper_params();
    let f = minimal_far_scale(&p).unwrap();
    let seed = SelfSimilarSeed::cutoff(p, Some(f), None).unwrap();
    let report = verify_seed(&seed).unwrap();
    println!("far scale {f}\n{}", serde_json::to_string_pretty(&report).unwrap());
    assert!(report.pass);
}
