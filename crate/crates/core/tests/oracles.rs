mod oracle;

#[test]
fn channel_matrix_matches_time_domain_propagation() {
    let err = oracle::channel_matrix_error(100);
    assert!(err < 1e-9, "relative error {err:e}");
}

#[test]
fn fast_matched_filter_matches_double_sum() {
    let err = oracle::matched_filter_error(10);
    assert!(err < 1e-6, "relative error {err:e}");
}

#[test]
fn ml_detector_matches_exhaustive_search() {
    assert_eq!(oracle::ml_disagreements(200), 0);
}
