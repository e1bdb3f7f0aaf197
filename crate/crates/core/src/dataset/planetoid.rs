//! Readers for the plain-text citation dataset distributions.
//!
//! `.content`/`.cites` (Cora, Citeseer): one node per content line,
//! `<id> <feature>… <label>`, and one citation per cites line, `<id> <id>`.
//! Pubmed ships as two `.tab` files with `key=value` fields instead.
//! Citation direction is discarded in both cases.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use super::{Dataset, DatasetError};
use crate::graph::build_graph;
use crate::Matrix;

/// Non-fatal oddities met while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadWarnings {
    /// Citations naming a node absent from the content file; dropped.
    pub unknown_cites: usize,
}

fn lines(path: &Path) -> Result<impl Iterator<Item = (usize, Result<String, DatasetError>)>, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::io(path, e))?;
    let owned = path.to_owned();
    Ok(BufReader::new(file)
        .lines()
        .enumerate()
        .map(move |(i, l)| (i + 1, l.map_err(|e| DatasetError::io(&owned, e)))))
}

fn malformed(path: &Path, line: usize, reason: impl Into<String>) -> DatasetError {
    DatasetError::Malformed {
        path: path.to_owned(),
        line,
        reason: reason.into(),
    }
}

/// Node table collected before the graph is built.
struct Nodes {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    features: Vec<f64>,
    labels: Vec<String>,
}

impl Nodes {
    fn new() -> Self {
        Self {
            ids: Vec::new(),
            index: HashMap::new(),
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn push(&mut self, path: &Path, line: usize, id: &str, row: &[f64], label: &str) -> Result<(), DatasetError> {
        if self.index.contains_key(id) {
            return Err(DatasetError::DuplicateId {
                path: path.to_owned(),
                line,
                id: id.to_owned(),
            });
        }
        self.index.insert(id.to_owned(), self.ids.len());
        self.ids.push(id.to_owned());
        self.features.extend_from_slice(row);
        self.labels.push(label.to_owned());
        Ok(())
    }

    fn finish(
        self,
        name: &str,
        dim: usize,
        cites: Vec<(String, String)>,
    ) -> Result<(Dataset, LoadWarnings), DatasetError> {
        let n = self.ids.len();
        if n == 0 {
            return Err(DatasetError::Invalid("no nodes".into()));
        }
        let mut warnings = LoadWarnings::default();
        let mut edges = Vec::with_capacity(cites.len());
        for (a, b) in &cites {
            match (self.index.get(a), self.index.get(b)) {
                (Some(&i), Some(&j)) => edges.push((i, j)),
                _ => warnings.unknown_cites += 1,
            }
        }
        if warnings.unknown_cites > 0 {
            log::warn!(
                "{name}: dropped {} citations that reference unknown nodes",
                warnings.unknown_cites
            );
        }
        let graph = build_graph(n, edges)?;
        let class_names: Vec<String> = self
            .labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let classes: Vec<usize> = self
            .labels
            .iter()
            .map(|l| class_names.binary_search(l).expect("collected above"))
            .collect();
        let features = Matrix::from_shape_vec((n, dim), self.features)
            .map_err(|e| DatasetError::Invalid(e.to_string()))?;
        let data = Dataset::new(name, graph, features, &classes, class_names, self.ids)?;
        Ok((data, warnings))
    }
}

fn parse_value(path: &Path, line: usize, tok: &str) -> Result<f64, DatasetError> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| malformed(path, line, format!("feature value {tok:?} is not a finite number")))
}

/// Loads a `.content`/`.cites` pair. Node ids keep the content-file order.
pub fn load_content_cites(
    name: &str,
    content: impl AsRef<Path>,
    cites: impl AsRef<Path>,
) -> Result<(Dataset, LoadWarnings), DatasetError> {
    let content = content.as_ref();
    let cites = cites.as_ref();
    let mut nodes = Nodes::new();
    let mut dim = None;
    for (lineno, line) in lines(content)? {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 3 {
            return Err(malformed(content, lineno, "expected an id, features and a label"));
        }
        let feats = &tokens[1..tokens.len() - 1];
        match dim {
            None => dim = Some(feats.len()),
            Some(d) if d != feats.len() => {
                return Err(malformed(
                    content,
                    lineno,
                    format!("{} features where earlier lines had {d}", feats.len()),
                ))
            }
            Some(_) => {}
        }
        let row = feats
            .iter()
            .map(|t| parse_value(content, lineno, t))
            .collect::<Result<Vec<_>, _>>()?;
        nodes.push(content, lineno, tokens[0], &row, tokens[tokens.len() - 1])?;
    }

    let mut pairs = Vec::new();
    for (lineno, line) in lines(cites)? {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => continue,
            [a, b] => pairs.push((a.to_string(), b.to_string())),
            _ => return Err(malformed(cites, lineno, "expected two node ids")),
        }
    }
    nodes.finish(name, dim.unwrap_or(0), pairs)
}

/// Loads the Pubmed-Diabetes `NODE.paper.tab` / `DIRECTED.cites.tab` pair.
pub fn load_pubmed(
    nodes_path: impl AsRef<Path>,
    cites_path: impl AsRef<Path>,
) -> Result<(Dataset, LoadWarnings), DatasetError> {
    let path = nodes_path.as_ref();
    let mut it = lines(path)?;
    let mut header = |expect: &str| -> Result<String, DatasetError> {
        match it.next() {
            Some((_, l)) => l,
            None => Err(malformed(path, 0, format!("missing {expect} header"))),
        }
    };
    header("node")?;
    let schema = header("feature")?;
    let mut feature_index = HashMap::new();
    for field in schema.split('\t') {
        if let Some(rest) = field.strip_prefix("numeric:") {
            let key = rest.split(':').next().unwrap_or(rest);
            let next = feature_index.len();
            feature_index.entry(key.to_owned()).or_insert(next);
        }
    }
    let dim = feature_index.len();
    if dim == 0 {
        return Err(malformed(path, 2, "no numeric features declared"));
    }

    let mut nodes = Nodes::new();
    let mut row = vec![0.0; dim];
    for (lineno, line) in it {
        let line = line?;
        let mut fields = line.split('\t').filter(|f| !f.is_empty());
        let Some(id) = fields.next().map(str::trim) else { continue };
        if id.is_empty() {
            continue;
        }
        row.iter_mut().for_each(|v| *v = 0.0);
        let mut label = None;
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| malformed(path, lineno, format!("field {field:?} is not key=value")))?;
            match key {
                "label" => label = Some(value.to_owned()),
                "summary" => {}
                _ => {
                    let &col = feature_index
                        .get(key)
                        .ok_or_else(|| malformed(path, lineno, format!("undeclared feature {key:?}")))?;
                    row[col] = parse_value(path, lineno, value)?;
                }
            }
        }
        let label = label.ok_or_else(|| malformed(path, lineno, "missing label"))?;
        nodes.push(path, lineno, id, &row, &label)?;
    }

    let cites = cites_path.as_ref();
    let mut pairs = Vec::new();
    for (lineno, line) in lines(cites)?.skip(2) {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] => continue,
            [_, a, "|", b] => {
                let strip = |t: &str| t.strip_prefix("paper:").unwrap_or(t).to_owned();
                pairs.push((strip(a), strip(b)));
            }
            _ => return Err(malformed(cites, lineno, "expected `<id> paper:<a> | paper:<b>`")),
        }
    }
    nodes.finish("pubmed", dim, pairs)
}

fn first_existing(candidates: &[PathBuf]) -> PathBuf {
    candidates
        .iter()
        .find(|p| p.exists())
        .unwrap_or(&candidates[0])
        .clone()
}

/// Loads `cora`, `citeseer` or `pubmed` from `data_dir/<name>/` (or directly
/// from `data_dir`).
pub fn load_named(name: &str, data_dir: impl AsRef<Path>) -> Result<(Dataset, LoadWarnings), DatasetError> {
    let dir = data_dir.as_ref();
    let locate = |file: &str| first_existing(&[dir.join(name).join(file), dir.join(file)]);
    match name {
        "cora" | "citeseer" => load_content_cites(
            name,
            locate(&format!("{name}.content")),
            locate(&format!("{name}.cites")),
        ),
        "pubmed" => load_pubmed(
            locate("Pubmed-Diabetes.NODE.paper.tab"),
            locate("Pubmed-Diabetes.DIRECTED.cites.tab"),
        ),
        other => Err(DatasetError::UnknownName(other.to_owned())),
    }
}
