//! Text, CSV and JSON output of the subcommands.

use crate::input::digest;
use anyhow::Result;
use serde::Serialize;
use stagedtree::evaluate::MeanResult;
use stagedtree::{Ceg, ModelScore, SplitResult, Summary};
use std::fmt::Write as _;
use std::io::IsTerminal;
use std::time::Instant;

pub struct Style {
    color: bool,
}

impl Style {
    /// ANSI styling on a terminal unless `STAGEDTREE_COLOR=0`.
    pub fn from_env() -> Self {
        let disabled = std::env::var("STAGEDTREE_COLOR").is_ok_and(|v| v == "0");
        Style {
            color: !disabled && std::io::stdout().is_terminal(),
        }
    }

    fn key(&self, s: &str) -> String {
        if self.color {
            format!("\x1b[1m{}\x1b[0m", s)
        } else {
            s.to_string()
        }
    }

    pub fn score_report(&self, s: &ModelScore) -> String {
        format!(
            "{} {:.3} {} {}\n{} {:.3} {} {:.3}\n",
            self.key("logLik"),
            s.loglik,
            self.key("df"),
            s.df,
            self.key("AIC"),
            s.aic,
            self.key("BIC"),
            s.bic
        )
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn adjmat_csv(c: &Ceg, m: &[Vec<usize>]) -> String {
    let names: Vec<String> = (0..m.len()).map(|i| csv_field(&c.node_name(i))).collect();
    let mut s = format!(",{}\n", names.join(","));
    for (name, row) in names.iter().zip(m) {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "{},{}", name, cells.join(","));
    }
    s
}

pub fn evaluation_csv(results: &[SplitResult], mean: &MeanResult, timing: bool) -> String {
    let mut s = String::from("split,df,logLik,AIC,BIC,accuracy");
    s.push_str(if timing { ",seconds\n" } else { "\n" });
    for r in results {
        let _ = write!(
            s,
            "{},{},{:.3},{:.3},{:.3},{:.4}",
            r.split, r.df, r.loglik, r.aic, r.bic, r.accuracy
        );
        s.push_str(&if timing { format!(",{:.4}\n", r.seconds) } else { "\n".into() });
    }
    let _ = write!(
        s,
        "mean,{:.2},{:.3},{:.3},{:.3},{:.4}",
        mean.df, mean.loglik, mean.aic, mean.bic, mean.accuracy
    );
    s.push_str(&if timing { format!(",{:.4}\n", mean.seconds) } else { "\n".into() });
    s
}

pub fn summary_json(s: &Summary) -> Result<String> {
    let strata: Vec<_> = s
        .strata
        .iter()
        .map(|st| {
            serde_json::json!({
                "variable": st.variable,
                "levels": st.levels,
                "stages": st.stages.iter().map(|g| serde_json::json!({
                    "id": g.id,
                    "npaths": g.npaths,
                    "sample_size": g.sample_size,
                    "probs": g.probs,
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&serde_json::json!({
        "lambda": s.lambda,
        "fitted": s.fitted,
        "strata": strata,
    }))?)
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub source: String,
    pub sha256: String,
}

/// Record of a `learn` or `evaluate` run, enough to repeat it.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command_line: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub version: String,
    pub duration_seconds: f64,
}

impl Manifest {
    pub fn new(inputs: &[String], seed: u64, start: Instant) -> Result<Self> {
        Ok(Manifest {
            command_line: std::env::args().collect(),
            inputs: inputs
                .iter()
                .map(|s| {
                    Ok(InputDigest {
                        source: s.clone(),
                        sha256: digest(s)?,
                    })
                })
                .collect::<Result<_>>()?,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: start.elapsed().as_secs_f64(),
        })
    }
}
