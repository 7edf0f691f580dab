//! Categorical data: contingency counts over the product space and record lists.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::tree::{EventTree, Variable};
use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

/// Cell counts over the product space of an [`EventTree`], indexed like its leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T: Real = f64> {
    tree: EventTree,
    counts: Vec<T>,
}

impl<T: Real> Dataset<T> {
    pub fn new(tree: EventTree, counts: Vec<T>) -> Result<Self> {
        if counts.len() != tree.n_leaves() {
            return Err(Error::InvalidData(format!(
                "expected {} cells, got {}",
                tree.n_leaves(),
                counts.len()
            )));
        }
        if let Some(c) = counts.iter().find(|c| !(**c >= T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidData(format!("invalid cell count {}", c)));
        }
        Ok(Dataset { tree, counts })
    }

    pub fn zeros(tree: EventTree) -> Self {
        let n = tree.n_leaves();
        Dataset {
            tree,
            counts: vec![T::zero(); n],
        }
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn counts(&self) -> &[T] {
        &self.counts
    }

    pub fn total(&self) -> T {
        self.counts.iter().copied().sum()
    }

    pub fn count(&self, x: &[usize]) -> Result<T> {
        Ok(self.counts[self.tree.leaf_index(x)?])
    }

    pub fn add(&mut self, x: &[usize], w: T) -> Result<()> {
        let i = self.tree.leaf_index(x)?;
        self.counts[i] = self.counts[i] + w;
        Ok(())
    }

    /// Path-prefix counts for every depth: element `d` has one entry per vertex at depth `d`.
    pub fn prefix_counts(&self) -> Vec<Vec<T>> {
        let n = self.tree.len();
        let mut out = vec![Vec::new(); n + 1];
        out[n] = self.counts.clone();
        for d in (0..n).rev() {
            let k = self.tree.cardinality(d);
            out[d] = out[d + 1].chunks(k).map(|c| c.iter().copied().sum()).collect();
        }
        out
    }

    /// The same data with variables permuted into `order` (names).
    pub fn reorder(&self, order: &[String]) -> Result<Self> {
        let perm = self.tree.permutation_for(order)?;
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(self.clone());
        }
        let vars: Vec<Variable> = perm.iter().map(|&p| self.tree.variable(p).clone()).collect();
        let tree = EventTree::new(vars)?;
        let mut counts = vec![T::zero(); self.counts.len()];
        let cards = self.tree.cardinalities();
        let mut x = vec![0usize; cards.len()];
        let mut y = vec![0usize; cards.len()];
        for (i, &c) in self.counts.iter().enumerate() {
            let mut rest = i;
            for d in (0..cards.len()).rev() {
                x[d] = rest % cards[d];
                rest /= cards[d];
            }
            for (j, &p) in perm.iter().enumerate() {
                y[j] = x[p];
            }
            counts[tree.leaf_index(&y)?] = c;
        }
        Ok(Dataset { tree, counts })
    }

    /// Expands integer cell counts back into records, cells in leaf order.
    pub fn to_records(&self) -> Result<Records> {
        let mut rows = Vec::new();
        let cards = self.tree.cardinalities();
        for (i, &c) in self.counts.iter().enumerate() {
            let m = c.round();
            if (c - m).abs() > T::epsilon() * T::lit(16.0) * (T::one() + m) {
                return Err(Error::InvalidData(format!("cell {} has non-integer count {}", i, c)));
            }
            let mut x = vec![0; cards.len()];
            let mut rest = i;
            for d in (0..cards.len()).rev() {
                x[d] = rest % cards[d];
                rest /= cards[d];
            }
            for _ in 0..m.to_usize().unwrap_or(0) {
                rows.push(x.clone());
            }
        }
        Ok(Records {
            tree: self.tree.clone(),
            rows,
        })
    }
}

/// Individual observations as level indices over an [`EventTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Records {
    pub tree: EventTree,
    pub rows: Vec<Vec<usize>>,
}

impl Records {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_dataset<T: Real>(&self) -> Result<Dataset<T>> {
        self.subset_dataset(0..self.rows.len())
    }

    /// Counts of the rows selected by `idx`, over the full level sets of the records.
    pub fn subset_dataset<T: Real>(&self, idx: impl IntoIterator<Item = usize>) -> Result<Dataset<T>> {
        let mut ds = Dataset::zeros(self.tree.clone());
        for i in idx {
            ds.add(&self.rows[i], T::one())?;
        }
        Ok(ds)
    }

    /// The same records with variables permuted into `order` (names); row order is kept.
    pub fn reorder(&self, order: &[String]) -> Result<Records> {
        let perm = self.tree.permutation_for(order)?;
        let tree = EventTree::new(perm.iter().map(|&p| self.tree.variable(p).clone()).collect())?;
        let rows = self
            .rows
            .iter()
            .map(|r| perm.iter().map(|&p| r[p]).collect())
            .collect();
        Ok(Records { tree, rows })
    }

    /// Moves variable `name` to the front, keeping the others in their order.
    pub fn with_first(&self, name: &str) -> Result<Records> {
        let first = self.tree.variable_index(name)?;
        let order: Vec<String> = std::iter::once(first)
            .chain((0..self.tree.len()).filter(|&d| d != first))
            .map(|d| self.tree.variable(d).name.clone())
            .collect();
        self.reorder(&order)
    }

    pub fn labels(&self, row: usize) -> Vec<&str> {
        self.rows[row]
            .iter()
            .enumerate()
            .map(|(d, &x)| self.tree.variable(d).levels[x].as_str())
            .collect()
    }

    /// Writes the records as CSV with a header row.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(self.tree.names())?;
        for i in 0..self.rows.len() {
            wr.write_record(self.labels(i))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// How level labels are ordered when they are discovered from data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LevelOrder {
    #[default]
    Lexicographic,
    FirstAppearance,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Variable order; defaults to column order.
    pub order: Option<Vec<String>>,
    pub level_order: LevelOrder,
    /// Explicit level lists; these win over discovered levels.
    pub levels: BTreeMap<String, Vec<String>>,
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table<R: Read>(input: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::InvalidData("missing header row".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::InvalidData(format!(
                "row {} has {} fields, header has {}",
                i + 1,
                rec.len(),
                header.len()
            )));
        }
        let row: Vec<String> = rec.iter().map(|s| s.trim().to_string()).collect();
        if let Some(j) = row.iter().position(String::is_empty) {
            return Err(Error::InvalidData(format!(
                "row {} has an empty value in column `{}`",
                i + 1,
                header[j]
            )));
        }
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Builds the tree for `columns` of `table` following `opts`; returns the tree and,
/// for each tree variable, the source column.
fn build_tree(table: &Table, columns: &[usize], opts: &LoadOptions) -> Result<(EventTree, Vec<usize>)> {
    let names: Vec<&str> = columns.iter().map(|&c| table.header[c].as_str()).collect();
    for name in opts.levels.keys() {
        if !names.contains(&name.as_str()) {
            return Err(Error::UnknownVariable(name.clone()));
        }
    }
    let source: Vec<usize> = match &opts.order {
        None => columns.to_vec(),
        Some(order) => {
            if order.len() != columns.len() {
                return Err(Error::InvalidArgument(format!(
                    "order lists {} variables, data has {}",
                    order.len(),
                    columns.len()
                )));
            }
            order
                .iter()
                .map(|name| {
                    names
                        .iter()
                        .position(|n| n == name)
                        .map(|p| columns[p])
                        .ok_or_else(|| Error::UnknownVariable(name.clone()))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut vars = Vec::with_capacity(source.len());
    for &c in &source {
        let name = &table.header[c];
        let levels = match opts.levels.get(name) {
            Some(explicit) => {
                for row in &table.rows {
                    if !explicit.contains(&row[c]) {
                        return Err(Error::UnknownLevel {
                            variable: name.clone(),
                            level: row[c].clone(),
                        });
                    }
                }
                explicit.clone()
            }
            None => match opts.level_order {
                LevelOrder::Lexicographic => table
                    .rows
                    .iter()
                    .map(|r| r[c].clone())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect(),
                LevelOrder::FirstAppearance => {
                    let mut seen = Vec::new();
                    for r in &table.rows {
                        if !seen.contains(&r[c]) {
                            seen.push(r[c].clone());
                        }
                    }
                    seen
                }
            },
        };
        vars.push(Variable::new(name.clone(), levels));
    }
    Ok((EventTree::new(vars)?, source))
}

fn row_indices(tree: &EventTree, source: &[usize], row: &[String]) -> Vec<usize> {
    source
        .iter()
        .enumerate()
        .map(|(d, &c)| {
            tree.variable(d)
                .levels
                .iter()
                .position(|l| *l == row[c])
                .expect("level discovered")
        })
        .collect()
}

/// Reads one observation per row; every column is a categorical variable.
pub fn load_records<R: Read>(input: R, opts: &LoadOptions) -> Result<Records> {
    let table = read_table(input)?;
    if table.rows.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }
    let columns: Vec<usize> = (0..table.header.len()).collect();
    let (tree, source) = build_tree(&table, &columns, opts)?;
    let rows = table
        .rows
        .iter()
        .map(|r| row_indices(&tree, &source, r))
        .collect();
    Ok(Records { tree, rows })
}

pub fn load_records_csv<T: Real, R: Read>(input: R, opts: &LoadOptions) -> Result<Dataset<T>> {
    load_records(input, opts)?.to_dataset()
}

/// Reads a contingency table: categorical columns plus a numeric frequency column.
pub fn load_counts_csv<T: Real, R: Read>(input: R, freq_column: &str, opts: &LoadOptions) -> Result<Dataset<T>> {
    let table = read_table(input)?;
    if table.rows.is_empty() {
        return Err(Error::InvalidData("no data rows".into()));
    }
    let fcol = table
        .header
        .iter()
        .position(|h| h == freq_column)
        .ok_or_else(|| Error::InvalidData(format!("missing frequency column `{}`", freq_column)))?;
    let columns: Vec<usize> = (0..table.header.len()).filter(|&c| c != fcol).collect();
    let (tree, source) = build_tree(&table, &columns, opts)?;
    let mut ds = Dataset::zeros(tree);
    for (i, row) in table.rows.iter().enumerate() {
        let f: f64 = row[fcol]
            .parse()
            .map_err(|_| Error::InvalidData(format!("row {}: frequency `{}` is not a number", i + 1, row[fcol])))?;
        if !(f >= 0.0) || !f.is_finite() {
            return Err(Error::InvalidData(format!("row {}: negative or invalid frequency {}", i + 1, f)));
        }
        let x = row_indices(ds.tree(), &source, row);
        ds.add(&x, T::lit(f))?;
    }
    Ok(ds)
}
