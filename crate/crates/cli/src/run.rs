//! Command execution. Everything is computed first and written at the end,
//! so a failing run leaves no partial outputs behind.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use graphset::classifier::evaluate_repeated;
use graphset::embedding::GraphEmbedding;
use graphset::features::{write_features_csv, FeatureMatrix, FeatureRegistry};
use graphset::graph::{k_core, largest_component, load_edge_list, load_tud_dataset};
use graphset::sampling::{sampling_sweep, EmbeddingPipeline};
use graphset::selection::{
    fast_select, greedy_select, random_baseline, unsupervised_select, worst_select, FeatureBank,
};
use graphset::{Error, GraphCollection, Labels};
use serde_json::{json, Value};

use crate::config::{ConfigError, DatasetFormat, RunConfig, Task};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Features,
    Embed,
    Classify,
    Select,
    Similarity,
    Bench,
    Run,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Features => "features",
            Command::Embed => "embed",
            Command::Classify => "classify",
            Command::Select => "select",
            Command::Similarity => "similarity",
            Command::Bench => "bench",
            Command::Run => "run",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Lib(Error),
    Output(std::io::Error),
}

impl CliError {
    /// 2 configuration, 3 ingestion, 4 numeric failure, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lib(e) if e.is_ingest() => 3,
            CliError::Lib(e) if e.is_numeric() => 4,
            CliError::Lib(Error::Pipeline { .. }) => 4,
            CliError::Lib(Error::Parameter(_) | Error::Mode(_) | Error::UnknownFeature(_) | Error::Shape(_)) => 2,
            CliError::Lib(_) | CliError::Output(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Output(e) => write!(f, "cannot write outputs: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

/// Which task a command runs, given the config's declared task.
fn resolve_task(command: Command, declared: Option<Task>, method: Option<Task>) -> Result<Task, CliError> {
    let mismatch = |t: Task| CliError::Config(format!("task {t:?} cannot run under `{}`", command.name()));
    Ok(match command {
        Command::Features | Command::Embed | Command::Bench => Task::Embed,
        Command::Classify => match declared {
            None | Some(Task::Classify) => Task::Classify,
            Some(Task::Regress) => Task::Regress,
            Some(t) => return Err(mismatch(t)),
        },
        Command::Select => match (method, declared) {
            (Some(m), _) => m,
            (None, Some(t)) if t.is_selection() => t,
            (None, Some(t)) => return Err(mismatch(t)),
            (None, None) => return Err(CliError::Config("select needs --method or a select:* task".into())),
        },
        Command::Similarity => match declared {
            None | Some(Task::SimilaritySweep) => Task::SimilaritySweep,
            Some(t) => return Err(mismatch(t)),
        },
        Command::Run => declared.ok_or_else(|| CliError::Config("`run` needs a task in the config".into()))?,
    })
}

fn read_labels(path: &Path) -> Result<Labels, Error> {
    let text = std::fs::read_to_string(path)?;
    let tokens: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    Labels::parse(&tokens).map_err(|message| Error::Ingest {
        path: path.to_path_buf(),
        message,
    })
}

fn load(config: &RunConfig) -> Result<GraphCollection, Error> {
    let d = &config.dataset;
    let collection = match d.format {
        DatasetFormat::Tud => {
            let name = d.name.clone().unwrap_or_else(|| {
                d.path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            });
            load_tud_dataset(&d.path, &name)?
        }
        DatasetFormat::EdgeList => {
            let c = load_edge_list(&d.path)?;
            match &d.labels {
                Some(p) => GraphCollection::new(c.name(), c.graphs().to_vec(), Some(read_labels(p)?))?,
                None => c,
            }
        }
    };
    let p = &config.preprocessing;
    let mut collection = collection;
    if p.largest_component {
        collection = collection.map_graphs(largest_component)?;
    }
    if let Some(k) = p.k_core {
        collection = collection.map_graphs(|g| k_core(g, k))?;
    }
    log::info!(
        "loaded {} graphs (mean {:.1} nodes, {:.1} edges)",
        collection.len(),
        collection.mean_node_count(),
        collection.mean_edge_count()
    );
    Ok(collection)
}

/// Files to write, in order, relative to the output directory.
struct Outputs {
    hash: String,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    fn csv(&mut self, name: &str, body: Vec<u8>) {
        let mut bytes = format!("# config_hash: {}\n", self.hash).into_bytes();
        bytes.extend(body);
        self.files.push((name.into(), bytes));
    }

    fn json(&mut self, name: &str, value: Value) {
        let mut v = value;
        if let Value::Object(map) = &mut v {
            map.insert("config_hash".into(), Value::String(self.hash.clone()));
        }
        let mut bytes = serde_json::to_vec_pretty(&v).expect("json value serialises");
        bytes.push(b'\n');
        self.files.push((name.into(), bytes));
    }

    fn write(self, dir: &Path, manifest: Value) -> std::io::Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut names: Vec<String> = Vec::new();
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, bytes)?;
            names.push(name.clone());
            written.push(path);
        }
        let mut manifest = manifest;
        manifest["outputs"] = json!(names);
        manifest["config_hash"] = json!(self.hash);
        let path = dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");
        bytes.push(b'\n');
        std::fs::write(&path, bytes)?;
        written.push(path);
        Ok(written)
    }
}

fn dataset_summary(c: &GraphCollection) -> Value {
    json!({
        "name": c.name(),
        "graphs": c.len(),
        "mean_nodes": c.mean_node_count(),
        "mean_edges": c.mean_edge_count(),
        "classes": c.class_count(),
    })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> graphset::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn embedding_outputs(out: &mut Outputs, collection: &GraphCollection, emb: &GraphEmbedding) -> Result<(), CliError> {
    out.csv("embedding.csv", csv_bytes(|b| emb.write_csv(b, Some(collection)))?);
    out.json(
        "embedding.json",
        json!({
            "method": emb.method,
            "dim": emb.dim(),
            "feature_columns": emb.feature_columns,
            "singular_values": emb.singular_values,
        }),
    );
    Ok(())
}

fn feature_outputs(out: &mut Outputs, collection: &GraphCollection, features: &[FeatureMatrix]) -> Result<(), CliError> {
    out.csv("features.csv", csv_bytes(|b| write_features_csv(b, collection, features))?);
    Ok(())
}

/// Labels for the task: regression turns integer classes into reals.
fn task_labels(collection: &GraphCollection, task: Task) -> Result<Option<Labels>, CliError> {
    let labels = collection.labels().cloned();
    if task.needs_labels() && labels.is_none() {
        return Err(Error::Mode(format!("task {task:?} needs graph labels; the dataset has none")).into());
    }
    Ok(match (task, labels) {
        (Task::Regress, Some(Labels::Class(v))) => Some(Labels::Real(v.iter().map(|&c| c as f64).collect())),
        (_, l) => l,
    })
}

pub struct RunSummary {
    pub written: Vec<PathBuf>,
}

pub fn execute(
    command: Command,
    mut config: RunConfig,
    method: Option<Task>,
    threads: usize,
) -> Result<RunSummary, CliError> {
    let registry = FeatureRegistry::new();
    let task = resolve_task(command, config.task, method)?;
    config.embedding.seed = config.seed;
    config.validate(task, &registry)?;
    let hash = config.hash();
    let seed = config.seed;
    let started = Instant::now();

    let collection = load(&config)?;
    let load_seconds = started.elapsed().as_secs_f64();
    let labels = task_labels(&collection, task)?;
    let pipeline = EmbeddingPipeline {
        specs: config.features.clone(),
        registry: &registry,
        standardize: config.standardize,
        reduce_dim: config.reduce_dim,
        embedding: config.embedding.clone(),
    };
    let mut out = Outputs {
        hash: hash.clone(),
        files: Vec::new(),
    };
    let mut report = json!({
        "command": command.name(),
        "task": task,
        "seed": seed,
        "dataset": dataset_summary(&collection),
    });

    match (command, task) {
        (Command::Features, _) => {
            let features = graphset::features::compute_collection_features(
                &collection,
                &config.features,
                &registry,
                seed,
                None,
            )?;
            feature_outputs(&mut out, &collection, &features)?;
            report["features"] = json!(features.first().map(|f| f.columns.clone()).unwrap_or_default());
        }
        (Command::Bench, _) => {
            let t = Instant::now();
            let (features, emb) = pipeline.run(&collection, None, seed)?;
            let embed_seconds = t.elapsed().as_secs_f64();
            let mut timing = json!({
                "load_seconds": load_seconds,
                "features_and_embedding_seconds": embed_seconds,
                "threads": threads,
                "rows": features.iter().map(FeatureMatrix::rows).sum::<usize>(),
            });
            if let Some(l) = &labels {
                let t = Instant::now();
                evaluate_repeated(&emb.matrix, l, &config.eval, seed)?;
                timing["evaluation_seconds"] = json!(t.elapsed().as_secs_f64());
            }
            report["timing"] = timing;
            out.json("bench.json", report.clone());
        }
        (_, Task::Embed | Task::Classify | Task::Regress) => {
            let (features, emb) = pipeline.run(&collection, None, seed)?;
            if config.write_features {
                feature_outputs(&mut out, &collection, &features)?;
            }
            embedding_outputs(&mut out, &collection, &emb)?;
            report["embedding"] = json!({"method": emb.method, "dim": emb.dim()});
            if let (Some(l), true) = (&labels, task != Task::Embed) {
                let eval = evaluate_repeated(&emb.matrix, l, &config.eval, seed)?;
                let mut line = format!("{}\n", graphset::classifier::EvalReport::csv_header()).into_bytes();
                eval.write_csv_line(&mut line, collection.name())?;
                out.csv("summary.csv", line);
                report["eval"] = serde_json::to_value(&eval).expect("report serialises");
            }
        }
        (_, Task::SimilaritySweep) => {
            let sweep = sampling_sweep(&collection, &pipeline, &config.sweep, &config.eval, seed)?;
            out.csv("sweep.csv", csv_bytes(|b| sweep.write_csv(b))?);
            report["sweep"] = serde_json::to_value(&sweep).expect("sweep serialises");
        }
        (_, t) => {
            let mut bank = FeatureBank::compute(&collection, &config.features, &registry, seed, config.standardize)?;
            if config.selection.per_column {
                bank = bank.split_columns()?;
            }
            let params = config.selection_params();
            let result = match t {
                Task::SelectGreedy => greedy_select(&bank, labels.as_ref(), &params)?,
                Task::SelectWorst => worst_select(&bank, labels.as_ref(), &params)?,
                Task::SelectFast => fast_select(&bank, labels.as_ref(), &params)?,
                Task::SelectUnsupervised => unsupervised_select(&bank, &config.selection.unsupervised, seed)?,
                Task::SelectRandom => {
                    let baseline = random_baseline(&bank, labels.as_ref(), config.selection.n_outer, &params)?;
                    report["random_runs"] = json!(baseline.runs.len());
                    baseline.summary()
                }
                _ => unreachable!("selection tasks only"),
            };
            out.csv("selection.csv", csv_bytes(|b| result.write_csv(b))?);
            out.json("selection.json", serde_json::to_value(&result).expect("selection serialises"));
            report["selection"] = json!({
                "method": result.method,
                "ordered_features": result.ordered_features,
                "best_prefix": result.best_prefix,
            });
        }
    }
    if command != Command::Bench {
        out.json("report.json", report);
    }
    let manifest = json!({
        "command": command.name(),
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": threads,
        "timestamp": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    let written = out.write(&config.output_dir, manifest).map_err(CliError::Output)?;
    Ok(RunSummary { written })
}
