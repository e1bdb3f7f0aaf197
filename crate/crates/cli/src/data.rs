use std::fs::File;
use std::io::BufReader;

use gresnet::dataset::synthetic::{planted_partition, SyntheticConfig};
use gresnet::dataset::{apply_index_files, load_named, row_normalize, standard_split, Dataset};
use gresnet::graph::parse_edge_list;
use gresnet::Graph;

use crate::args::{DataArgs, DatasetSpec};
use crate::Failure;

/// Graph plus, for labelled datasets, the split dataset with row-normalised
/// features.
pub struct Source {
    pub name: String,
    pub graph: Graph,
    pub dataset: Option<Dataset>,
}

impl Source {
    pub fn labelled(&self) -> Result<&Dataset, Failure> {
        self.dataset.as_ref().ok_or_else(|| {
            Failure::data(anyhow::anyhow!(
                "{} is a bare edge list; this command needs features and labels",
                self.name
            ))
        })
    }
}

/// Stand-in with Cora's node, class and vocabulary counts, for running the
/// experiments without the dataset files.
fn synthetic_config() -> SyntheticConfig {
    SyntheticConfig {
        nodes: 2708,
        classes: 7,
        features: 1433,
        p_in: 0.008,
        p_out: 0.0003,
        words_per_node: 18,
        signal: 0.3,
    }
}

pub fn load(args: &DataArgs) -> Result<Source, Failure> {
    let (name, mut data) = match &args.dataset {
        DatasetSpec::EdgeList(path) => {
            let file = File::open(path)
                .map_err(|e| Failure::data(anyhow::anyhow!("{}: {e}", path.display())))?;
            let (mut graph, _) = parse_edge_list(BufReader::new(file)).map_err(Failure::data)?;
            if args.largest_component {
                graph = graph
                    .induced_subgraph(&graph.largest_component())
                    .map_err(Failure::data)?;
            }
            return Ok(Source {
                name: format!("edgelist:{}", path.display()),
                graph,
                dataset: None,
            });
        }
        DatasetSpec::Synthetic => (
            "synthetic".to_owned(),
            planted_partition(&synthetic_config(), 0).map_err(Failure::data)?,
        ),
        DatasetSpec::Named(name) => {
            let (d, warnings) = load_named(name, &args.data_dir).map_err(Failure::data)?;
            if warnings.unknown_cites > 0 {
                log::warn!("{name}: {} citations referenced unknown papers", warnings.unknown_cites);
            }
            (name.clone(), d)
        }
    };
    if args.largest_component {
        data = data.restrict(&data.graph.largest_component()).map_err(Failure::data)?;
    }
    data.features = row_normalize(&data.features);
    let data = match &args.split_dir {
        Some(dir) => apply_index_files(&data, dir),
        None => standard_split(&data, 20, 500, 1000, None),
    }
    .map_err(Failure::data)?;
    log::info!(
        "{name}: {} nodes, {} edges, {} features, {} classes",
        data.node_count(),
        data.graph.edge_count(),
        data.feature_dim(),
        data.num_classes()
    );
    Ok(Source {
        name,
        graph: data.graph.clone(),
        dataset: Some(data),
    })
}
