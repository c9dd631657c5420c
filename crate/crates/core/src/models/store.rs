//! Versioned model persistence (JSON).
//!
//! Built-in models serialize in full; external models persist as the command
//! line plus the feature schema and are respawned on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::external::{external_predictor, ExternalConfig, TaskDecl};
use crate::models::forest::Forest;
use crate::models::knn::Knn;
use crate::models::{Feature, Predictor};
use crate::Result;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SavedTask {
    Regression,
    Classification,
}

#[derive(Serialize, Deserialize)]
pub enum ModelKind {
    Knn(Knn),
    Forest(Forest),
    External { argv: Vec<String>, task: SavedTask, features: Vec<Feature> },
}

#[derive(Serialize, Deserialize)]
pub struct SavedModel {
    pub version: u32,
    pub model: ModelKind,
}

impl SavedModel {
    pub fn new(model: ModelKind) -> Self {
        SavedModel { version: FORMAT_VERSION, model }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<SavedModel> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
        let saved: SavedModel = serde_json::from_str(&text)?;
        if saved.version != FORMAT_VERSION {
            return Err(Error::data(format!(
                "model file version {} unsupported (expected {FORMAT_VERSION})",
                saved.version
            )));
        }
        Ok(saved)
    }

    /// Turns the dump back into a live predictor, respawning external
    /// children.
    pub fn into_predictor(self) -> Result<Box<dyn Predictor>> {
        Ok(match self.model {
            ModelKind::Knn(m) => Box::new(m),
            ModelKind::Forest(m) => Box::new(m),
            ModelKind::External { argv, task, features } => {
                let decl = match task {
                    SavedTask::Regression => TaskDecl::Regression,
                    SavedTask::Classification => TaskDecl::Classification,
                };
                Box::new(external_predictor(ExternalConfig::new(argv, decl, features))?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::forest::{forest_fit, ForestConfig};
    use crate::tabular::{Column, Table};

    #[test]
    fn forest_round_trips_through_the_dump() {
        let t = Table::new(vec![
            Column::numeric("x", (0..40).map(f64::from).collect()),
            Column::numeric("y", (0..40).map(|i| f64::from(i) * 2.0).collect()),
        ])
        .unwrap()
        .with_response("y")
        .unwrap();
        let forest =
            forest_fit(&t, ForestConfig { n_trees: 5, seed: 3, ..Default::default() }).unwrap();
        let before = forest.predict(&t).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        SavedModel::new(ModelKind::Forest(forest)).save(&path).unwrap();
        let loaded = SavedModel::load(&path).unwrap().into_predictor().unwrap();
        assert_eq!(loaded.predict(&t).unwrap(), before);
    }

    #[test]
    fn knn_round_trips_through_the_dump() {
        let t = Table::new(vec![
            Column::numeric("x", vec![0.0, 1.0, 2.0, 3.0, 10.0]),
            Column::categorical("c", vec![0, 1, 0, 1, 0], vec!["a".into(), "b".into()]),
            Column::numeric("y", vec![5.0, 6.0, 7.0, 8.0, 9.0]),
        ])
        .unwrap()
        .with_response("y")
        .unwrap();
        let knn = crate::models::knn::knn_fit(&t, 2).unwrap();
        let before = knn.predict(&t).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("knn.json");
        SavedModel::new(ModelKind::Knn(knn)).save(&path).unwrap();
        let loaded = SavedModel::load(&path).unwrap().into_predictor().unwrap();
        assert_eq!(loaded.predict(&t).unwrap(), before);
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        std::fs::write(&path, r#"{"version":99,"model":{"External":{"argv":["x"],"task":"Regression","features":[]}}}"#).unwrap();
        assert!(SavedModel::load(&path).is_err());
    }
}
