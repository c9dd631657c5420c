//! Minimal library walkthrough: simulate data, fit a forest, compute the
//! importance/interaction matrix, seriate it, and write a heatmap.
//!
//! Run with `cargo run --example quickstart --release`.

use vivi::arrange::{cluster_interactions, leaf_sort, Linkage};
use vivi::models::forest::{forest_fit, ForestConfig};
use vivi::plotspec::heatmap::heatmap_spec;
use vivi::plotspec::render_svg;
use vivi::simbench::{friedman, SimConfig};
use vivi::vivi::{vivi_matrix, ImportanceSpec, InteractionSpec, Metric, ViviConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = friedman(&SimConfig { n: 500, seed: 42, ..Default::default() })?;
    let forest = forest_fit(&data, ForestConfig { n_trees: 50, seed: 1, ..Default::default() })?;

    let matrix = vivi_matrix(
        &forest,
        &data,
        &ViviConfig {
            importance: ImportanceSpec::Permutation { metric: Metric::Rmse, n_perm: 4 },
            interaction: InteractionSpec::UnnormalizedH,
            sample_rows: 50,
            seed: 3,
            threads: 0,
            class: None,
        },
    )?;
    println!("{}", matrix.to_csv_string());

    let dendrogram = cluster_interactions(&matrix, Linkage::Average)?;
    let ordering = leaf_sort(&dendrogram, &matrix, 1.0, 1.0)?;
    println!("display order: {:?}", ordering.names(&matrix));

    let spec = heatmap_spec(&matrix, &ordering, None)?;
    std::fs::write("heatmap.svg", render_svg(&spec)?)?;
    println!("wrote heatmap.svg");
    Ok(())
}
