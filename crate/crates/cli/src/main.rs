mod input;
mod report;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use input::{parse_levels, parse_parents, split_list, DataSpec};
use report::{Manifest, Style};
use stagedtree::evaluate::mean;
use stagedtree::{
    as_staged_tree_from_bn, ceg, ceg_adjmat, ceg_to_dot, compare_stages, fit, full, get_path, get_stage, indep,
    learn, lr_test, parse_assignment, predict, prob, sample_from, score, summary, tree_to_dot, write_model,
    Algorithm, CompareMethod, Divergence, ErrorKind, EvalConfig, Init, InitOptions, Linkage, ScoreKind,
    SearchConfig, StagedTree,
};
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "stagedtree", version, about = "Staged event trees and chain event graphs")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Data: a CSV file, `builtin:titanic` or `builtin:asym[:N[:SEED]]`
    #[arg(long, global = true)]
    data: Option<String>,
    /// Model file (.sevt.json)
    #[arg(long, global = true)]
    model: Option<String>,
    /// Output file; stdout when absent (model files are only written with --out)
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Comma-separated variable order
    #[arg(long, global = true)]
    order: Option<String>,
    /// Laplace smoothing added to every floret count
    #[arg(long, global = true, default_value_t = 0.0)]
    lambda: f64,
    /// Output format of `ceg` (dot, adjmat-csv) and `summary` (text, json)
    #[arg(long, global = true)]
    format: Option<String>,
    /// Name of a frequency column: rows of the CSV are cells of a count table
    #[arg(long, global = true)]
    freq: Option<String>,
    /// Explicit levels of a variable, `VAR=L1,L2,...`; repeatable
    #[arg(long, global = true)]
    levels: Vec<String>,
    /// Order discovered levels by first appearance instead of lexicographically
    #[arg(long, global = true)]
    first_appearance: bool,
    /// Where to write the run manifest of `learn` and `evaluate` (default: OUT.manifest.json, else stderr)
    #[arg(long, global = true)]
    manifest: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct InitArgs {
    /// Initial model
    #[arg(long, default_value = "full", value_parser = ["full", "indep"])]
    init: String,
    /// Keep unobserved subtrees as separate stages
    #[arg(long)]
    no_join_unobserved: bool,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long, default_value = "hc")]
    alg: String,
    /// Objective of score-based searches: bic, aic or loglik
    #[arg(long, default_value = "bic")]
    score: String,
    /// Distance threshold of bj
    #[arg(long, default_value_t = 0.1)]
    thr: f64,
    /// Stages per stratum of hclust and kmeans
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// kl, tv, hl, bh, cd, lp[:P], ry[:ALPHA]
    #[arg(long, default_value = "kl")]
    distance: String,
    /// complete, single or average
    #[arg(long, default_value = "complete")]
    linkage: String,
    /// Iterations of bhcr
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Comma-separated variables whose strata are searched
    #[arg(long)]
    scope: Option<String>,
    /// Restarts of kmeans
    #[arg(long, default_value_t = 10)]
    n_restarts: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit an initial model (or a compiled Bayesian network) and report its scores
    Fit {
        #[command(flatten)]
        init: InitArgs,
        /// DAG parents, `CHILD=P1,P2;CHILD2=P3`; the tree follows --order
        #[arg(long)]
        parents: Option<String>,
    },
    /// Learn a staging, starting from --model or from an initial model of --data
    Learn {
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Probabilities, stages and paths of a fitted model
    Query {
        #[command(subcommand)]
        what: Query,
    },
    /// Draw observations from a fitted model as CSV
    Sample {
        #[arg(long)]
        n: usize,
    },
    /// Compare the stagings of two models
    Compare {
        a: String,
        b: String,
        /// stages, naive or hamming
        #[arg(long, default_value = "stages")]
        method: String,
    },
    /// Chain event graph of a model as DOT or an adjacency matrix
    Ceg {
        #[arg(value_name = "MODEL")]
        file: Option<String>,
    },
    /// Repeated 80/20 train/test evaluation
    Evaluate {
        #[command(flatten)]
        init: InitArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Evaluate the initial model without learning
        #[arg(long)]
        no_learn: bool,
        /// Class variable, moved to the first position (default: first variable)
        #[arg(long)]
        class: Option<String>,
        #[arg(long, default_value_t = 10)]
        splits: usize,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Leave out the wall-clock column so output is reproducible
        #[arg(long)]
        no_timing: bool,
    },
    /// DOT drawing of the staged tree
    ExportDot {
        #[arg(value_name = "MODEL")]
        file: Option<String>,
    },
    /// Predict a class variable for the rows of --data
    Predict {
        #[arg(long)]
        class: String,
    },
    /// Stages, sample sizes and probabilities per stratum
    Summary {
        #[arg(value_name = "MODEL")]
        file: Option<String>,
    },
    /// Likelihood-ratio test of a nested model against a general one
    LrTest { nested: String, general: String },
}

#[derive(Subcommand, Debug)]
enum Query {
    /// Probability of a partial assignment
    Prob {
        /// `VAR=LEVEL,...`; empty for the sure event
        #[arg(long, default_value = "")]
        event: String,
        /// Report the natural logarithm
        #[arg(long)]
        log: bool,
    },
    /// Stage of the vertex reached by a path of levels
    Stage {
        /// Comma-separated levels from the root
        #[arg(long)]
        path: String,
    },
    /// Paths to the vertices of a stage
    Paths {
        #[arg(long)]
        var: String,
        #[arg(long)]
        stage: String,
    },
}

impl Global {
    fn data_spec(&self) -> Result<DataSpec> {
        Ok(DataSpec {
            source: self.data.clone().ok_or_else(|| anyhow!("--data is required"))?,
            order: self.order.as_deref().map(split_list),
            freq: self.freq.clone(),
            levels: parse_levels(&self.levels)?,
            first_appearance: self.first_appearance,
        })
    }

    fn model_path<'a>(&'a self, positional: &'a Option<String>) -> Result<&'a str> {
        positional
            .as_deref()
            .or(self.model.as_deref())
            .ok_or_else(|| anyhow!("a model file is required (positional or --model)"))
    }

    fn load_model(&self, positional: &Option<String>) -> Result<StagedTree> {
        input::model(self.model_path(positional)?)
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(std::io::BufWriter::new(
                std::fs::File::create(p).with_context(|| format!("cannot create `{}`", p))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        })
    }

    fn init_options(&self, init: &InitArgs) -> InitOptions {
        InitOptions {
            join_unobserved: !init.no_join_unobserved,
            lambda: self.lambda,
            ..Default::default()
        }
    }
}

impl SearchArgs {
    fn algorithm(&self) -> Result<Algorithm> {
        Ok(self.alg.parse()?)
    }

    fn config(&self, seed: u64) -> Result<SearchConfig> {
        Ok(SearchConfig {
            score: self.score.parse::<ScoreKind>()?,
            scope: self.scope.as_deref().map(split_list),
            seed,
            max_iter: self.max_iter,
            thr: self.thr,
            k: self.k,
            distance: self.distance.parse::<Divergence>()?,
            linkage: self.linkage.parse::<Linkage>()?,
            n_restarts: self.n_restarts,
        })
    }
}

fn initial(g: &Global, init: &InitArgs) -> Result<StagedTree> {
    let ds = input::dataset(&g.data_spec()?)?;
    let opts = g.init_options(init);
    Ok(match init.init.as_str() {
        "indep" => indep(&ds, &opts)?,
        _ => full(&ds, &opts)?,
    })
}

fn save(g: &Global, st: &StagedTree) -> Result<()> {
    if let Some(p) = &g.out {
        let f = std::fs::File::create(p).with_context(|| format!("cannot create `{}`", p))?;
        write_model(st, std::io::BufWriter::new(f))?;
    }
    Ok(())
}

fn emit_manifest(g: &Global, m: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(m)?;
    let path = g.manifest.clone().or_else(|| g.out.as_ref().map(|o| format!("{}.manifest.json", o)));
    match path {
        Some(p) => std::fs::write(&p, text + "\n").with_context(|| format!("cannot write `{}`", p))?,
        None => eprintln!("{}", text),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let style = Style::from_env();
    match &cli.command {
        Command::Fit { init, parents } => {
            let st = match parents {
                Some(p) => {
                    let ds = input::dataset(&g.data_spec()?)?;
                    let bn: StagedTree = as_staged_tree_from_bn(ds.tree(), &parse_parents(p)?)?;
                    fit(&bn, &ds, g.lambda)?
                }
                None => initial(g, init)?,
            };
            save(g, &st)?;
            print!("{}", style.score_report(&score(&st)?));
        }
        Command::Learn { init, search } => {
            let start = Instant::now();
            let (st, inputs) = match &g.model {
                Some(p) => (input::model(p)?, vec![p.clone()]),
                None => (initial(g, init)?, vec![g.data_spec()?.source]),
            };
            let out = learn(&st, search.algorithm()?, &search.config(g.seed)?)?;
            save(g, &out)?;
            print!("{}", style.score_report(&score(&out)?));
            emit_manifest(g, &Manifest::new(&inputs, g.seed, start)?)?;
        }
        Command::Query { what } => {
            let st = g.load_model(&None)?;
            let mut w = g.writer()?;
            match what {
                Query::Prob { event, log } => {
                    writeln!(w, "{:.7}", prob(&st, &parse_assignment(event)?, *log)?)?;
                }
                Query::Stage { path } => writeln!(w, "{}", get_stage(&st, &split_list(path))?)?,
                Query::Paths { var, stage } => {
                    for p in get_path(&st, var, stage)? {
                        writeln!(w, "{}", p.join(","))?;
                    }
                }
            }
        }
        Command::Sample { n } => {
            let st = g.load_model(&None)?;
            sample_from(&st, *n, g.seed)?.write_csv(g.writer()?)?;
        }
        Command::Compare { a, b, method } => {
            let (a, b) = (input::model(a)?, input::model(b)?);
            let (equal, diff) = compare_stages(&a, &b, method.parse::<CompareMethod>()?)?;
            let mut w = g.writer()?;
            writeln!(w, "{}", if equal { "equal" } else { "different" })?;
            for (d, paths) in diff.paths(a.tree()).iter().enumerate() {
                for p in paths {
                    writeln!(w, "{}\t{}", a.tree().variable(d).name, p.join(","))?;
                }
            }
        }
        Command::Ceg { file } => {
            let c = ceg(&g.load_model(file)?)?;
            let mut w = g.writer()?;
            match g.format.as_deref().unwrap_or("dot") {
                "dot" => write!(w, "{}", ceg_to_dot(&c))?,
                "adjmat-csv" => write!(w, "{}", report::adjmat_csv(&c, &ceg_adjmat(&c)))?,
                f => bail!("unknown ceg format `{}` (dot, adjmat-csv)", f),
            }
        }
        Command::Evaluate {
            init,
            search,
            no_learn,
            class,
            splits,
            train_fraction,
            no_timing,
        } => {
            let start = Instant::now();
            let spec = g.data_spec()?;
            let mut records = input::records(&spec)?;
            if let Some(c) = class {
                records = records.with_first(c)?;
            }
            let cfg = EvalConfig {
                init: init.init.parse::<Init>()?,
                algorithm: if *no_learn { None } else { Some(search.algorithm()?) },
                search: search.config(g.seed)?,
                init_options: g.init_options(init),
                splits: *splits,
                train_fraction: *train_fraction,
                seed: g.seed,
            };
            let results = stagedtree::evaluate(&records, &cfg)?;
            let mean = mean(&results).expect("at least one split");
            write!(g.writer()?, "{}", report::evaluation_csv(&results, &mean, !no_timing))?;
            emit_manifest(g, &Manifest::new(&[spec.source], g.seed, start)?)?;
        }
        Command::ExportDot { file } => {
            write!(g.writer()?, "{}", tree_to_dot(&g.load_model(file)?))?;
        }
        Command::Predict { class } => {
            let st = g.load_model(&None)?;
            let mut spec = DataSpec {
                order: None,
                ..g.data_spec()?
            };
            // levels come from the model so that a column may hold a single level
            let header = input::header(&spec.source)?;
            for v in st.tree().variables().iter().filter(|v| header.contains(&v.name)) {
                spec.levels.entry(v.name.clone()).or_insert_with(|| v.levels.clone());
            }
            let records = input::records(&spec)?;
            let mut w = g.writer()?;
            writeln!(w, "{}", class)?;
            for label in predict(&st, class, &records)? {
                writeln!(w, "{}", label)?;
            }
        }
        Command::Summary { file } => {
            let s = summary(&g.load_model(file)?);
            let mut w = g.writer()?;
            match g.format.as_deref().unwrap_or("text") {
                "text" => write!(w, "{}", s)?,
                "json" => writeln!(w, "{}", report::summary_json(&s)?)?,
                f => bail!("unknown summary format `{}` (text, json)", f),
            }
        }
        Command::LrTest { nested, general } => {
            let t = lr_test(&input::model(nested)?, &input::model(general)?)?;
            let p = if t.p_value < 1e-4 {
                format!("{:.6e}", t.p_value)
            } else {
                format!("{:.9}", t.p_value)
            };
            writeln!(g.writer()?, "statistic {:.3} df {} p-value {}", t.statistic, t.df, p)?;
        }
    }
    Ok(())
}

/// 1 for I/O failures, 3 for numeric failures, 2 for everything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(se) = cause.downcast_ref::<stagedtree::Error>() {
            return match se.kind() {
                ErrorKind::Io => 1,
                ErrorKind::Validation => 2,
                ErrorKind::Numeric => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e
                .chain()
                .filter_map(|c| c.downcast_ref::<std::io::Error>())
                .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
