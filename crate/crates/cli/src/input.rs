//! Loading datasets and models named on the command line.

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};
use stagedtree::data::load_records;
use stagedtree::{datasets, load_counts_csv, read_model, Dataset, LevelOrder, LoadOptions, Records, StagedTree};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

/// Where the data comes from and how to read it.
#[derive(Debug, Clone, Default)]
pub struct DataSpec {
    pub source: String,
    pub order: Option<Vec<String>>,
    pub freq: Option<String>,
    pub levels: BTreeMap<String, Vec<String>>,
    pub first_appearance: bool,
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
}

/// Parses `Var=a,b,c`.
pub fn parse_levels(specs: &[String]) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for s in specs {
        let (name, levels) = s
            .split_once('=')
            .ok_or_else(|| anyhow!("--levels expects VAR=L1,L2,..., got `{}`", s))?;
        out.insert(name.trim().to_string(), split_list(levels));
    }
    Ok(out)
}

/// Parses `Child=P1,P2;Child2=P3`.
pub fn parse_parents(s: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (child, ps) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("--parents expects CHILD=P1,P2;..., got `{}`", part))?;
        out.insert(child.trim().to_string(), split_list(ps));
    }
    Ok(out)
}

fn builtin(name: &str) -> Result<Option<Records>> {
    let Some(rest) = name.strip_prefix("builtin:") else {
        return Ok(None);
    };
    let mut parts = rest.split(':');
    match parts.next() {
        Some("titanic") => Ok(Some(datasets::titanic_records())),
        Some("asym") => {
            let n = parts.next().map(str::parse).transpose().context("builtin:asym:N")?.unwrap_or(1000);
            let seed = parts.next().map(str::parse).transpose().context("builtin:asym:N:SEED")?.unwrap_or(0);
            Ok(Some(datasets::asym(n, seed)))
        }
        _ => bail!("unknown builtin dataset `{}` (builtin:titanic, builtin:asym[:N[:SEED]])", name),
    }
}

fn load_options(spec: &DataSpec) -> LoadOptions {
    LoadOptions {
        order: spec.order.clone(),
        level_order: if spec.first_appearance {
            LevelOrder::FirstAppearance
        } else {
            LevelOrder::Lexicographic
        },
        levels: spec.levels.clone(),
    }
}

fn open(path: &str) -> Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).map_err(|e| anyhow::Error::new(e).context(format!("cannot open `{}`", path)))?,
    ))
}

/// Individual records; count tables are expanded.
pub fn records(spec: &DataSpec) -> Result<Records> {
    if let Some(r) = builtin(&spec.source)? {
        return Ok(match &spec.order {
            Some(o) => r.reorder(o)?,
            None => r,
        });
    }
    let opts = load_options(spec);
    match &spec.freq {
        Some(col) => Ok(load_counts_csv::<f64, _>(open(&spec.source)?, col, &opts)?.to_records()?),
        None => Ok(load_records(open(&spec.source)?, &opts)?),
    }
}

pub fn dataset(spec: &DataSpec) -> Result<Dataset> {
    if let Some(r) = builtin(&spec.source)? {
        let ds: Dataset = r.to_dataset()?;
        return Ok(match &spec.order {
            Some(o) => ds.reorder(o)?,
            None => ds,
        });
    }
    let opts = load_options(spec);
    match &spec.freq {
        Some(col) => Ok(load_counts_csv(open(&spec.source)?, col, &opts)?),
        None => Ok(load_records(open(&spec.source)?, &opts)?.to_dataset()?),
    }
}

/// Column names of a CSV file (empty for builtin data).
pub fn header(source: &str) -> Result<Vec<String>> {
    if source.starts_with("builtin:") {
        return Ok(Vec::new());
    }
    let mut line = String::new();
    std::io::BufRead::read_line(&mut open(source)?, &mut line)?;
    Ok(line.trim_end().split(',').map(|s| s.trim().trim_matches('"').to_string()).collect())
}

pub fn model(path: &str) -> Result<StagedTree> {
    Ok(read_model(open(path)?)?)
}

/// SHA-256 of a file, or of the source name for builtin data.
pub fn digest(source: &str) -> Result<String> {
    let bytes = if source.starts_with("builtin:") || !Path::new(source).exists() {
        source.as_bytes().to_vec()
    } else {
        std::fs::read(source).with_context(|| format!("cannot read `{}`", source))?
    };
    Ok(hex::encode(Sha256::digest(&bytes)))
}
