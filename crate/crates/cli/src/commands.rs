//! Subcommand implementations: ingestion, model wiring, matrix computation,
//! and display compilation.

use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};

use vivi::arrange::{cluster_interactions, leaf_sort, Linkage, Ordering};
use vivi::models::external::{external_predictor, ExternalConfig, TaskDecl};
use vivi::models::forest::{forest_fit, ForestConfig};
use vivi::models::knn::knn_fit;
use vivi::models::metrics;
use vivi::models::store::{ModelKind, SavedModel, SavedTask};
use vivi::models::{Feature, Predictions, Predictor, Task};
use vivi::netgraph::{build_graph, cluster_nodes, eulerian};
use vivi::plotspec::gpdp::{compute_gpdp_artifacts, gpdp_spec, GpdpConfig};
use vivi::plotspec::heatmap::{heatmap_spec, heatmap_spec_with_limits, matrix_limits};
use vivi::plotspec::network::{network_spec, NetworkLayout};
use vivi::plotspec::zpdp::{build_zpdp, ZpdpConfig};
use vivi::plotspec::{empty_plot, render_json, render_svg, PlotKind, PlotSpec};
use vivi::simbench::{friedman, SimConfig};
use vivi::tabular::{read_csv, ColumnKind, Table};
use vivi::vivi::{vivi_matrix as compute_vivi, ImportanceSpec, InteractionSpec, Metric, ViviConfig, ViviMatrix};

use crate::{FitArgs, PlotArgs, SimulateArgs, ViviArgs};

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = SimConfig {
        n: args.n,
        p: args.p,
        noise_sd: args.sd,
        correlated: args.correlated,
        seed: args.seed,
    };
    let table = friedman(&cfg)?;
    table.write_csv(&args.out)?;
    eprintln!("wrote {} rows x {} columns to {}", table.n(), args.p + 1, args.out.display());
    Ok(())
}

fn parse_schema(spec: Option<&str>) -> Result<Vec<(String, ColumnKind)>> {
    let Some(spec) = spec else { return Ok(vec![]) };
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|entry| {
            let (name, kind) = entry
                .split_once('=')
                .ok_or_else(|| anyhow!("schema entry '{entry}' is not col=kind"))?;
            let kind = match kind.trim() {
                "numeric" => ColumnKind::Numeric,
                "categorical" => ColumnKind::Categorical,
                other => bail!("unknown column kind '{other}'"),
            };
            Ok((name.trim().to_string(), kind))
        })
        .collect()
}

fn load_table(
    data: &Path,
    schema: Option<&str>,
    log_columns: Option<&str>,
    log_offset: f64,
    response: Option<&str>,
) -> Result<Table> {
    let schema = parse_schema(schema)?;
    let mut table = read_csv(data, &schema)?;
    if table.dropped_rows > 0 {
        eprintln!("dropped {} rows with missing cells", table.dropped_rows);
    }
    if let Some(columns) = log_columns {
        let names: Vec<String> =
            columns.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        table = table.log_transform(&names, log_offset)?;
    }
    if let Some(response) = response {
        table = table.with_response(response)?;
    }
    Ok(table)
}

fn split_command(command: &str) -> Result<Vec<String>> {
    let argv: Vec<String> = command.split_whitespace().map(str::to_string).collect();
    if argv.is_empty() {
        bail!("external command is empty");
    }
    Ok(argv)
}

fn print_test_metrics(task: &Task, test: &Table, preds: &Predictions) -> Result<()> {
    match task {
        Task::Regression => {
            let y = test
                .response_column()
                .and_then(|c| c.as_numeric())
                .ok_or_else(|| anyhow!("numeric response required"))?;
            let yhat = preds.as_regression()?;
            println!("test RMSE {:.6}", metrics::rmse(y, yhat));
            println!("test R2 {:.6}", metrics::r2(y, yhat));
        }
        Task::Classification { classes } => {
            let (codes, _) = test
                .response_column()
                .and_then(|c| c.as_categorical())
                .ok_or_else(|| anyhow!("categorical response required"))?;
            let probs = preds.as_classification()?;
            println!("test accuracy {:.6}", metrics::accuracy(codes, probs));
            if classes.len() == 2 {
                let scores: Vec<f64> = probs.iter().map(|row| row[1]).collect();
                match metrics::auc_binary(codes, 1, &scores) {
                    Ok(auc) => println!("test AUC {:.6}", auc),
                    Err(e) => eprintln!("AUC unavailable: {e}"),
                }
            }
        }
    }
    Ok(())
}

pub fn fit(args: FitArgs) -> Result<()> {
    let table = load_table(
        &args.data,
        args.schema.as_deref(),
        args.log_columns.as_deref(),
        args.log_offset,
        Some(&args.response),
    )?;
    let (train, test) = match args.split {
        Some(fraction) => {
            let (a, b) = table.split(fraction, args.seed)?;
            (a, Some(b))
        }
        None => (table, None),
    };

    let saved = match args.model.as_str() {
        "knn" => {
            let model = knn_fit(&train, args.k)?;
            for w in &model.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(test) = &test {
                print_test_metrics(model.task(), test, &model.predict(test)?)?;
            }
            SavedModel::new(ModelKind::Knn(model))
        }
        "forest" => {
            let cfg = ForestConfig {
                n_trees: args.trees,
                min_node: args.min_node,
                mtry: args.mtry,
                seed: args.seed,
            };
            let model = forest_fit(&train, cfg)?;
            if let Some(test) = &test {
                print_test_metrics(model.task(), test, &model.predict(test)?)?;
            }
            SavedModel::new(ModelKind::Forest(model))
        }
        "external" => {
            let command = args
                .command
                .as_deref()
                .ok_or_else(|| anyhow!("--model external requires --command"))?;
            let argv = split_command(command)?;
            let task = Task::from_table(&train)?;
            let decl = if task.is_classification() {
                TaskDecl::Classification
            } else {
                TaskDecl::Regression
            };
            let features = Feature::list_from_table(&train);
            let model =
                external_predictor(ExternalConfig::new(argv.clone(), decl, features.clone()))?;
            if let Some(test) = &test {
                print_test_metrics(model.task(), test, &model.predict(test)?)?;
            }
            let saved_task = match decl {
                TaskDecl::Regression => SavedTask::Regression,
                TaskDecl::Classification => SavedTask::Classification,
            };
            SavedModel::new(ModelKind::External { argv, task: saved_task, features })
        }
        other => bail!("unknown model '{other}'"),
    };
    saved.save(&args.out)?;
    eprintln!("saved model to {}", args.out.display());
    Ok(())
}

fn load_predictor(
    model: Option<&Path>,
    command: Option<&str>,
    table: &Table,
) -> Result<Box<dyn Predictor>> {
    match (model, command) {
        (Some(_), Some(_)) => bail!("give either --model or --command, not both"),
        (Some(path), None) => Ok(SavedModel::load(path)
            .with_context(|| format!("loading model {}", path.display()))?
            .into_predictor()?),
        (None, Some(command)) => {
            let argv = split_command(command)?;
            let decl = match table.response_name() {
                Some(_) if Task::from_table(table)?.is_classification() => {
                    TaskDecl::Classification
                }
                _ => TaskDecl::Regression,
            };
            let features = Feature::list_from_table(table);
            Ok(Box::new(external_predictor(ExternalConfig::new(argv, decl, features))?))
        }
        (None, None) => bail!("a model is required: --model FILE or --command CMD"),
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var("VIVI_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
}

fn class_index(task: &Task, label: Option<&str>) -> Result<Option<usize>> {
    let Some(label) = label else { return Ok(None) };
    match task {
        Task::Regression => bail!("--class only applies to classification models"),
        Task::Classification { classes } => classes
            .iter()
            .position(|c| c == label)
            .map(Some)
            .ok_or_else(|| anyhow!("class '{label}' not among {classes:?}")),
    }
}

pub fn vivi_matrix(args: ViviArgs) -> Result<()> {
    let table = load_table(
        &args.data,
        args.schema.as_deref(),
        args.log_columns.as_deref(),
        args.log_offset,
        args.response.as_deref(),
    )?;
    let predictor = load_predictor(args.model.as_deref(), args.command.as_deref(), &table)?;

    let importance = match args.importance.as_str() {
        "embedded" => ImportanceSpec::Embedded,
        "permutation" => {
            let metric = match args.metric.as_deref() {
                Some("rmse") => Metric::Rmse,
                Some("logloss") => Metric::LogLoss,
                Some(other) => bail!("unknown metric '{other}'"),
                None => {
                    if predictor.task().is_classification() {
                        Metric::LogLoss
                    } else {
                        Metric::Rmse
                    }
                }
            };
            ImportanceSpec::Permutation { metric, n_perm: args.n_perm }
        }
        other => match other.strip_prefix("file=") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading importance file {path}"))?;
                let values: Vec<f64> = serde_json::from_str(&text)
                    .with_context(|| format!("{path} must be a JSON array of numbers"))?;
                ImportanceSpec::Supplied(values)
            }
            None => bail!("--importance must be embedded, permutation, or file=PATH"),
        },
    };
    let interaction = match args.interaction.as_str() {
        "h" => InteractionSpec::UnnormalizedH,
        _ => InteractionSpec::NormalizedH2,
    };
    let cfg = ViviConfig {
        importance,
        interaction,
        sample_rows: args.sample,
        seed: args.seed,
        threads: resolve_threads(args.threads),
        class: class_index(predictor.task(), args.class.as_deref())?,
    };

    let started = Instant::now();
    let matrix = compute_vivi(predictor.as_ref(), &table, &cfg)?;
    let elapsed = started.elapsed();
    let p = matrix.p();
    eprintln!(
        "computed {} variable pairs on {} sampled rows in {:.2}s",
        p * (p - 1) / 2,
        matrix.sample_rows,
        elapsed.as_secs_f64()
    );
    for &(i, j) in &matrix.flat_pairs {
        eprintln!(
            "warning: flat surface for ({}, {}); normalized value reported as 0",
            matrix.names[i], matrix.names[j]
        );
    }

    let json_path = args.out.with_extension("json");
    let csv_path = args.out.with_extension("csv");
    std::fs::write(&json_path, matrix.to_json())?;
    std::fs::write(&csv_path, matrix.to_csv_string())?;
    eprintln!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(())
}

fn load_matrix(path: Option<&Path>) -> Result<ViviMatrix> {
    let path = path.ok_or_else(|| anyhow!("this display needs --matrix"))?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading matrix {}", path.display()))?;
    Ok(ViviMatrix::from_json(&text)?)
}

fn seriation(m: &ViviMatrix, lambda1: f64, lambda2: f64, linkage: &str) -> Result<Ordering> {
    if m.p() == 1 {
        return Ok(Ordering { order: vec![0], weights: vec![0.0], lambda1, lambda2 });
    }
    let linkage = match linkage {
        "complete" => Linkage::Complete,
        "single" => Linkage::Single,
        _ => Linkage::Average,
    };
    let dendro = cluster_interactions(m, linkage)?;
    Ok(leaf_sort(&dendro, m, lambda1, lambda2)?)
}

fn write_plot(out: &Path, spec: &PlotSpec) -> Result<()> {
    let svg_path = out.with_extension("svg");
    let json_path = out.with_extension("json");
    std::fs::write(&svg_path, render_svg(spec)?)?;
    std::fs::write(&json_path, render_json(spec))?;
    eprintln!("wrote {} and {}", svg_path.display(), json_path.display());
    Ok(())
}

pub fn plot(args: PlotArgs) -> Result<()> {
    match args.kind.as_str() {
        "heatmap" => {
            let m = load_matrix(args.matrix.as_deref())?;
            let order = seriation(&m, args.lambda1, args.lambda2, &args.linkage)?;
            if let Some(path) = &args.order_out {
                std::fs::write(path, serde_json::to_string(&order.names(&m))? + "\n")?;
            }
            let spec = match &args.share_limits_with {
                Some(other_path) => {
                    let other = load_matrix(Some(other_path))?;
                    let limits = matrix_limits(&[&m, &other]);
                    heatmap_spec_with_limits(&m, &order, args.top, Some(&limits))?
                }
                None => heatmap_spec(&m, &order, args.top)?,
            };
            write_plot(&args.out, &spec)
        }
        "network" => {
            let m = load_matrix(args.matrix.as_deref())?;
            let order = seriation(&m, args.lambda1, args.lambda2, &args.linkage)?;
            if let Some(path) = &args.order_out {
                std::fs::write(path, serde_json::to_string(&order.names(&m))? + "\n")?;
            }
            let ordered = m.permuted(&order.order)?;
            let graph = build_graph(&ordered, args.threshold);
            if graph.nodes.is_empty() {
                eprintln!(
                    "warning: no interactions above threshold {}; writing an empty canvas",
                    args.threshold
                );
                let spec = empty_plot(
                    PlotKind::Network,
                    format!("no interactions above threshold {}", args.threshold),
                );
                return write_plot(&args.out, &spec);
            }
            let labels = if args.cluster { Some(cluster_nodes(&graph)?) } else { None };
            let layout = if args.layout == "force" {
                NetworkLayout::Force
            } else {
                NetworkLayout::Radial
            };
            let spec = network_spec(&graph, layout, labels.as_deref())?;
            write_plot(&args.out, &spec)
        }
        "gpdp" => {
            let data = args.data.as_deref().ok_or_else(|| anyhow!("gpdp needs --data"))?;
            let table = load_table(
                data,
                args.schema.as_deref(),
                args.log_columns.as_deref(),
                args.log_offset,
                args.response.as_deref(),
            )?;
            let predictor = load_predictor(args.model.as_deref(), None, &table)?;
            let vars: Vec<String> = match (&args.vars, &args.matrix) {
                (Some(list), _) => {
                    list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
                }
                (None, Some(_)) => {
                    let m = load_matrix(args.matrix.as_deref())?;
                    let order = seriation(&m, args.lambda1, args.lambda2, &args.linkage)?;
                    let k = args.top.unwrap_or(5).min(m.p());
                    order.names(&m)[..k].to_vec()
                }
                (None, None) => bail!("gpdp needs --vars or --matrix (+ --top)"),
            };
            let cfg = GpdpConfig {
                grid_size: args.grid,
                max_ice: args.max_ice,
                per_class: args.per_class,
                seed: args.seed,
                class: class_index(predictor.task(), args.class.as_deref())?,
            };
            let artifacts = compute_gpdp_artifacts(predictor.as_ref(), &table, &vars, &cfg)?;
            let spec = gpdp_spec(&table, &artifacts)?;
            write_plot(&args.out, &spec)
        }
        "zpdp" => {
            let m = load_matrix(args.matrix.as_deref())?;
            let data = args.data.as_deref().ok_or_else(|| anyhow!("zpdp needs --data"))?;
            let table = load_table(
                data,
                args.schema.as_deref(),
                args.log_columns.as_deref(),
                args.log_offset,
                args.response.as_deref(),
            )?;
            let predictor = load_predictor(args.model.as_deref(), None, &table)?;
            let graph = build_graph(&m, args.threshold);
            if graph.is_empty() {
                eprintln!(
                    "warning: no interactions above threshold {}; writing an empty canvas",
                    args.threshold
                );
                let spec = empty_plot(
                    PlotKind::Zpdp,
                    format!("no interactions above threshold {}", args.threshold),
                );
                return write_plot(&args.out, &spec);
            }
            let cfg = ZpdpConfig {
                grid_size: args.grid,
                join: args.join_components,
                class: class_index(predictor.task(), args.class.as_deref())?,
            };
            let (seq, spec) = build_zpdp(predictor.as_ref(), &table, &graph, &cfg)?;
            std::fs::write(args.out.with_extension("trail.json"), seq.to_json())?;
            write_plot(&args.out, &spec)?;
            // Structural check: the display has one panel per trail step.
            debug_assert_eq!(seq.total_steps(), eulerian(&graph)?.total_steps());
            Ok(())
        }
        other => bail!("unknown display kind '{other}'"),
    }
}
