//! Citation datasets: the node-classification record, feature
//! normalisation, transductive splits and JSON persistence.
//!
//! Loaders for the on-disk formats live in [`planetoid`]; [`synthetic`]
//! builds planted-partition graphs with class-correlated features for tests
//! and offline experiments.

pub mod planetoid;
pub mod synthetic;

pub use planetoid::{load_content_cites, load_named, load_pubmed, LoadWarnings};

use std::collections::HashMap;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{build_graph, Graph, GraphError};
use crate::seed::rng_for;
use crate::Matrix;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Malformed {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("{path}:{line}: duplicate node id {id:?}")]
    DuplicateId { path: PathBuf, line: usize, id: String },
    #[error("infeasible split: {0}")]
    Infeasible(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("unknown dataset {0:?}")]
    UnknownName(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl DatasetError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.to_owned(),
            source,
        }
    }
}

/// A graph with node features, one-hot labels and train/validation/test
/// node lists (ascending, pairwise disjoint).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub features: Matrix,
    pub labels: Matrix,
    pub class_names: Vec<String>,
    pub ids: Vec<String>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    index: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRecord {
    name: String,
    nodes: usize,
    edges: Vec<(usize, usize)>,
    features: Matrix,
    labels: Matrix,
    class_names: Vec<String>,
    ids: Vec<String>,
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

impl Dataset {
    /// Unsplit dataset. `classes[i]` indexes into `class_names`.
    pub fn new(
        name: impl Into<String>,
        graph: Graph,
        features: Matrix,
        classes: &[usize],
        class_names: Vec<String>,
        ids: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let c = class_names.len();
        if let Some(&bad) = classes.iter().find(|&&k| k >= c) {
            return Err(DatasetError::Invalid(format!("class {bad} out of 0..{c}")));
        }
        let labels = Matrix::from_shape_fn((classes.len(), c), |(i, k)| {
            if classes[i] == k {
                1.0
            } else {
                0.0
            }
        });
        Self::from_parts(name.into(), graph, features, labels, class_names, ids, [vec![], vec![], vec![]])
    }

    fn from_parts(
        name: String,
        graph: Graph,
        features: Matrix,
        labels: Matrix,
        class_names: Vec<String>,
        ids: Vec<String>,
        [train, val, test]: [Vec<usize>; 3],
    ) -> Result<Self, DatasetError> {
        let n = graph.node_count();
        let invalid = |msg: String| Err(DatasetError::Invalid(msg));
        if features.nrows() != n || labels.nrows() != n || ids.len() != n {
            return invalid(format!(
                "{n} nodes but {} feature rows, {} label rows and {} ids",
                features.nrows(),
                labels.nrows(),
                ids.len()
            ));
        }
        if labels.ncols() != class_names.len() {
            return invalid(format!(
                "{} label columns for {} classes",
                labels.ncols(),
                class_names.len()
            ));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return invalid("feature matrix holds a non-finite value".into());
        }
        for (i, row) in labels.rows().into_iter().enumerate() {
            let ones = row.iter().filter(|&&v| v == 1.0).count();
            let zeros = row.iter().filter(|&&v| v == 0.0).count();
            if ones != 1 || ones + zeros != row.len() {
                return invalid(format!("label row {i} is not one-hot"));
            }
        }
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return invalid(format!("duplicate id {id:?}"));
            }
        }
        let data = Self {
            name,
            graph,
            features,
            labels,
            class_names,
            ids,
            train: vec![],
            val: vec![],
            test: vec![],
            index,
        };
        data.with_splits(train, val, test)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.labels
            .row(node)
            .iter()
            .position(|&v| v == 1.0)
            .expect("labels are one-hot")
    }

    /// Dense index of an external node id.
    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Boolean masks for the train, validation and test lists.
    pub fn masks(&self) -> [Vec<bool>; 3] {
        let n = self.node_count();
        [&self.train, &self.val, &self.test].map(|split| {
            let mut m = vec![false; n];
            for &i in split {
                m[i] = true;
            }
            m
        })
    }

    /// Replaces the splits after checking that they are in range and disjoint.
    pub fn with_splits(
        mut self,
        mut train: Vec<usize>,
        mut val: Vec<usize>,
        mut test: Vec<usize>,
    ) -> Result<Self, DatasetError> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        for split in [&mut train, &mut val, &mut test] {
            split.sort_unstable();
            for &i in split.iter() {
                if i >= n {
                    return Err(DatasetError::Invalid(format!("split node {i} out of 0..{n}")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(DatasetError::Invalid(format!(
                        "node {i} appears twice across the splits"
                    )));
                }
            }
        }
        self.train = train;
        self.val = val;
        self.test = test;
        Ok(self)
    }

    /// Sub-dataset induced by `nodes` (relabelled in the given order). Split
    /// members outside `nodes` are dropped.
    pub fn restrict(&self, nodes: &[usize]) -> Result<Self, DatasetError> {
        let graph = self.graph.induced_subgraph(nodes)?;
        let features = self.features.select(ndarray::Axis(0), nodes);
        let labels = self.labels.select(ndarray::Axis(0), nodes);
        let ids = nodes.iter().map(|&i| self.ids[i].clone()).collect();
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let map = |split: &[usize]| -> Vec<usize> {
            split.iter().map(|&i| remap[i]).filter(|&i| i != usize::MAX).collect()
        };
        Self::from_parts(
            self.name.clone(),
            graph,
            features,
            labels,
            self.class_names.clone(),
            ids,
            [map(&self.train), map(&self.val), map(&self.test)],
        )
    }

    pub fn to_json(&self) -> Result<String, DatasetError> {
        let record = DatasetRecord {
            name: self.name.clone(),
            nodes: self.node_count(),
            edges: self.graph.edges().to_vec(),
            features: self.features.clone(),
            labels: self.labels.clone(),
            class_names: self.class_names.clone(),
            ids: self.ids.clone(),
            train: self.train.clone(),
            val: self.val.clone(),
            test: self.test.clone(),
        };
        Ok(serde_json::to_string(&record)?)
    }

    pub fn from_json(s: &str) -> Result<Self, DatasetError> {
        let r: DatasetRecord = serde_json::from_str(s)?;
        let graph = build_graph(r.nodes, r.edges)?;
        Self::from_parts(
            r.name,
            graph,
            r.features,
            r.labels,
            r.class_names,
            r.ids,
            [r.train, r.val, r.test],
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| DatasetError::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| DatasetError::io(path, e))?)
    }
}

/// Divides every nonzero row by its L1 norm.
pub fn row_normalize(features: &Matrix) -> Matrix {
    let mut out = features.clone();
    for mut row in out.rows_mut() {
        let s: f64 = row.iter().map(|v| v.abs()).sum();
        if s > 0.0 {
            row.mapv_inplace(|v| v / s);
        }
    }
    out
}

/// Divides every nonzero column by its L1 norm.
pub fn column_normalize(features: &Matrix) -> Matrix {
    let mut out = features.clone();
    for mut col in out.columns_mut() {
        let s: f64 = col.iter().map(|v| v.abs()).sum();
        if s > 0.0 {
            col.mapv_inplace(|v| v / s);
        }
    }
    out
}

/// Transductive split: the first `per_class` nodes of every class form the
/// training set, the next `val` unused nodes the validation set and the
/// next `test` unused nodes the test set. Nodes are visited in index order,
/// or in a seeded random order when `seed` is given.
pub fn standard_split(
    data: &Dataset,
    per_class: usize,
    val: usize,
    test: usize,
    seed: Option<u64>,
) -> Result<Dataset, DatasetError> {
    let n = data.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(s) = seed {
        order.shuffle(&mut rng_for(s, "split"));
    }
    let c = data.num_classes();
    let mut taken = vec![0usize; c];
    let mut used = vec![false; n];
    let mut train = Vec::with_capacity(per_class * c);
    for &i in &order {
        let k = data.class_of(i);
        if taken[k] < per_class {
            taken[k] += 1;
            used[i] = true;
            train.push(i);
        }
    }
    if let Some(k) = taken.iter().position(|&t| t < per_class) {
        return Err(DatasetError::Infeasible(format!(
            "class {:?} has {} nodes, {} requested",
            data.class_names[k], taken[k], per_class
        )));
    }
    let rest: Vec<usize> = order.into_iter().filter(|&i| !used[i]).collect();
    if rest.len() < val + test {
        return Err(DatasetError::Infeasible(format!(
            "{} nodes left after training, {} requested for validation and test",
            rest.len(),
            val + test
        )));
    }
    let val_nodes = rest[..val].to_vec();
    let test_nodes = rest[val..val + test].to_vec();
    data.clone().with_splits(train, val_nodes, test_nodes)
}

fn read_index_file(path: &Path) -> Result<Vec<usize>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| DatasetError::io(path, e))?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        out.push(t.parse().map_err(|_| DatasetError::Malformed {
            path: path.to_owned(),
            line: lineno + 1,
            reason: format!("expected a node index, found {t:?}"),
        })?);
    }
    Ok(out)
}

/// Applies the splits listed in `dir/{train,val,test}.idx` (one dense node
/// index per line).
pub fn apply_index_files(data: &Dataset, dir: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let dir = dir.as_ref();
    let train = read_index_file(&dir.join("train.idx"))?;
    let val = read_index_file(&dir.join("val.idx"))?;
    let test = read_index_file(&dir.join("test.idx"))?;
    data.clone().with_splits(train, val, test)
}
