//! External-predictor protocol tests against the reference child process.

use vivi::models::external::{external_predictor, ExternalConfig, TaskDecl};
use vivi::models::{Feature, FeatureKind, Predictor, Task};
use vivi::pdp::{make_grid, pdp_1d};
use vivi::tabular::{Column, Table};
use vivi::vivi::h_unnormalized;

fn oracle_bin() -> String {
    env!("CARGO_BIN_EXE_vivi-oracle").to_string()
}

fn numeric_features(names: &[&str]) -> Vec<Feature> {
    names
        .iter()
        .map(|n| Feature { name: (*n).to_string(), kind: FeatureKind::Numeric })
        .collect()
}

fn xy_table(n: usize, seed: u64) -> Table {
    let mut r = vivi::rng::stream(seed, "x", 0);
    let x1: Vec<f64> = (0..n).map(|_| vivi::rng::uniform01(&mut r)).collect();
    let x2: Vec<f64> = (0..n).map(|_| vivi::rng::uniform01(&mut r)).collect();
    Table::new(vec![Column::numeric("x1", x1), Column::numeric("x2", x2)]).unwrap()
}

#[test]
fn constant_child_returns_constant_predictions() {
    let p = external_predictor(ExternalConfig::new(
        vec![oracle_bin(), "const:1.0".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(7, 1);
    let preds = p.predict(&t).unwrap();
    assert_eq!(preds.as_regression().unwrap(), &[1.0; 7]);
    // Child is reused across calls.
    let again = p.predict(&t).unwrap();
    assert_eq!(again.as_regression().unwrap(), &[1.0; 7]);
}

#[test]
fn row_index_child_confirms_ordering() {
    let p = external_predictor(ExternalConfig::new(
        vec![oracle_bin(), "rowindex".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(5, 2);
    let preds = p.predict(&t).unwrap();
    assert_eq!(preds.as_regression().unwrap(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
}

#[test]
fn empty_batch_returns_empty_predictions() {
    let p = external_predictor(ExternalConfig::new(
        vec![oracle_bin(), "const:2.5".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(4, 3).take_rows(&[]);
    assert!(p.predict(&t).unwrap().is_empty());
}

#[test]
fn linear_child_transfers_floats_at_full_precision() {
    let p = external_predictor(ExternalConfig::new(
        vec![oracle_bin(), "lin:2,3".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(20, 4);
    let x1 = t.columns()[0].as_numeric().unwrap();
    let x2 = t.columns()[1].as_numeric().unwrap();
    let preds = p.predict(&t).unwrap();
    for (i, &got) in preds.as_regression().unwrap().iter().enumerate() {
        let expect = 2.0 * x1[i] + 3.0 * x2[i];
        assert_eq!(got.to_bits(), expect.to_bits(), "row {i}");
    }
}

#[test]
fn additive_child_has_zero_interaction_downstream() {
    let p = external_predictor(ExternalConfig::new(
        vec![oracle_bin(), "lin:1,1".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(80, 5);
    let h = h_unnormalized(&p, &t, "x1", "x2", 30, 9).unwrap();
    assert!(h <= 1e-9, "h = {h}");
    // And the PD curve of a linear child is linear.
    let grid = make_grid(&t, "x1", 5).unwrap();
    let curve = pdp_1d(&p, &t, &grid).unwrap();
    let pts = grid.numeric_points().unwrap();
    let slope = (curve.values[4] - curve.values[0]) / (pts[4] - pts[0]);
    assert!((slope - 1.0).abs() < 1e-9);
}

#[test]
fn classification_child_declares_classes_and_streams_probabilities() {
    let p = external_predictor(ExternalConfig::new(
        vec![oracle_bin(), "classes:no,yes:const:0.25,0.75".to_string()],
        TaskDecl::Classification,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    match p.task() {
        Task::Classification { classes } => {
            assert_eq!(classes, &["no".to_string(), "yes".to_string()])
        }
        Task::Regression => panic!("expected classification"),
    }
    let t = xy_table(3, 6);
    let preds = p.predict(&t).unwrap();
    for row in preds.as_classification().unwrap() {
        assert_eq!(row, &[0.25, 0.75]);
    }
}

#[test]
fn unspawnable_command_is_a_protocol_error() {
    let err = external_predictor(ExternalConfig::new(
        vec!["/nonexistent/not-a-binary".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1"]),
    ))
    .unwrap_err();
    assert!(matches!(err, vivi::Error::Protocol(_)));
}

#[test]
fn child_that_exits_mid_batch_reports_a_protocol_error() {
    // `head -n 2` consumes the CLASSES-free regression batch header plus one
    // row, then exits without replying.
    let p = external_predictor(ExternalConfig::new(
        vec!["head".to_string(), "-n".to_string(), "0".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(3, 7);
    let err = p.predict(&t).unwrap_err();
    assert!(matches!(err, vivi::Error::Protocol(_)), "{err}");
}

#[test]
fn malformed_reply_is_a_protocol_error() {
    // `yes` prints "y" lines forever: unparsable as floats.
    let p = external_predictor(ExternalConfig::new(
        vec!["yes".to_string()],
        TaskDecl::Regression,
        numeric_features(&["x1", "x2"]),
    ))
    .unwrap();
    let t = xy_table(2, 8);
    let err = p.predict(&t).unwrap_err();
    assert!(matches!(err, vivi::Error::Protocol(_)), "{err}");
}
