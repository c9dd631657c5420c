//! Cross-module integration: benchmark data through models, partial
//! dependence, and the importance machinery.

use vivi::models::forest::{forest_fit, ForestConfig};
use vivi::models::knn::knn_fit;
use vivi::models::Predictor;
use vivi::pdp::{make_grid, pdp_1d};
use vivi::simbench::{friedman, SimConfig};
use vivi::tabular::{Column, Table};
use vivi::vivi::{permutation_importance, Metric};

fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut order: Vec<usize> = (0..v.len()).collect();
        order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
        let mut r = vec![0.0; v.len()];
        for (rank, &idx) in order.iter().enumerate() {
            r[idx] = rank as f64;
        }
        r
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx) * (a - mx);
        vy += (b - my) * (b - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn forest_pdp_of_x4_increases_monotonically() {
    let data =
        friedman(&SimConfig { n: 500, p: 8, noise_sd: 1.0, correlated: false, seed: 13 }).unwrap();
    let forest =
        forest_fit(&data, ForestConfig { n_trees: 60, seed: 2, ..Default::default() }).unwrap();
    let grid = make_grid(&data, "x4", 20).unwrap();
    let curve = pdp_1d(&forest, &data, &grid).unwrap();
    let rho = spearman(grid.numeric_points().unwrap(), &curve.values);
    assert!(rho > 0.9, "Spearman correlation {rho}");
}

#[test]
fn permutation_importance_ranks_signal_above_noise() {
    let data =
        friedman(&SimConfig { n: 400, p: 8, noise_sd: 1.0, correlated: false, seed: 17 }).unwrap();
    let forest =
        forest_fit(&data, ForestConfig { n_trees: 50, seed: 3, ..Default::default() }).unwrap();
    let imp = permutation_importance(&forest, &data, Metric::Rmse, 4, 5).unwrap();
    // x4 (index 3) carries a strong linear term; x8 (index 7) is noise.
    assert!(imp[3] > imp[7], "importance {imp:?}");
}

#[test]
fn knn_with_k_equal_n_scores_every_variable_exactly_zero() {
    let data =
        friedman(&SimConfig { n: 60, p: 5, noise_sd: 0.5, correlated: false, seed: 19 }).unwrap();
    let model = knn_fit(&data, data.n()).unwrap();
    // All-neighbour kNN is constant, so permutations cannot change anything.
    let imp = permutation_importance(&model, &data, Metric::Rmse, 3, 23).unwrap();
    assert_eq!(imp, vec![0.0; 5]);
}

#[test]
fn multi_class_forest_runs_the_near_logit_pipeline() {
    let n = 150;
    let mut r = vivi::rng::seeded(31);
    let x1: Vec<f64> = (0..n).map(|_| vivi::rng::uniform01(&mut r)).collect();
    let x2: Vec<f64> = (0..n).map(|_| vivi::rng::uniform01(&mut r)).collect();
    let codes: Vec<u32> = x1
        .iter()
        .zip(&x2)
        .map(|(&a, &b)| if a + b < 0.7 { 0 } else if a + b < 1.3 { 1 } else { 2 })
        .collect();
    let t = Table::new(vec![
        Column::numeric("x1", x1),
        Column::numeric("x2", x2),
        Column::categorical("cls", codes, vec!["lo".into(), "mid".into(), "hi".into()]),
    ])
    .unwrap()
    .with_response("cls")
    .unwrap();
    let forest =
        forest_fit(&t, ForestConfig { n_trees: 25, seed: 7, ..Default::default() }).unwrap();

    let grid = make_grid(&t, "x1", 6).unwrap();
    let curve = pdp_1d(&forest, &t, &grid).unwrap();
    assert_eq!(curve.scale, "near-logit");
    assert!(curve.values.iter().all(|v| v.is_finite()));
    // More of x1 pushes rows toward the "hi" class (the default near-logit
    // class is the last one).
    assert!(curve.values[5] > curve.values[0]);

    let m = vivi::vivi::vivi_matrix(
        &forest,
        &t,
        &vivi::vivi::ViviConfig {
            importance: vivi::vivi::ImportanceSpec::Permutation {
                metric: Metric::LogLoss,
                n_perm: 2,
            },
            sample_rows: 25,
            seed: 9,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(m.scale, "near-logit");
    assert_eq!(m.get(0, 1), m.get(1, 0));
    assert!(m.values.iter().all(|v| v.is_finite()));
}

#[test]
fn unseen_categorical_level_is_a_model_error() {
    let train = Table::new(vec![
        Column::categorical("c", vec![0, 1, 0, 1], vec!["a".into(), "b".into()]),
        Column::numeric("y", vec![1.0, 2.0, 1.0, 2.0]),
    ])
    .unwrap()
    .with_response("y")
    .unwrap();
    let forest = forest_fit(&train, ForestConfig { n_trees: 3, ..Default::default() }).unwrap();
    let query = Table::new(vec![
        Column::categorical("c", vec![0, 2], vec!["a".into(), "b".into(), "zzz".into()]),
        Column::numeric("y", vec![0.0, 0.0]),
    ])
    .unwrap();
    let err = forest.predict(&query).unwrap_err();
    assert!(matches!(err, vivi::Error::Model(_)), "{err}");
    assert!(err.to_string().contains("zzz"));

    // Levels merely listed in a different order still resolve by label.
    let reordered = Table::new(vec![
        Column::categorical("c", vec![1, 0], vec!["b".into(), "a".into()]),
        Column::numeric("y", vec![0.0, 0.0]),
    ])
    .unwrap();
    let preds = forest.predict(&reordered).unwrap();
    assert_eq!(preds.len(), 2);
}
