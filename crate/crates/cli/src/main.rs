//! `mohpi`: hyperparameter importance for multi-objective HPO runs.
//!
//! Subcommands: `generate` (sample a synthetic benchmark into a meta-dataset
//! CSV), `pareto` (efficient rows and derived weights as JSON), `analyze`
//! (fANOVA or ablation report plus SVG), `plot` (re-render an SVG from a
//! report), and `dp` (demographic-parity loss of a predictions file).
//!
//! Exit codes: 0 success, 1 validation error, 2 I/O error.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mohpi_core::ablation::{mo_ablation_with_surrogates, AblationOptions};
use mohpi_core::configspace::{parse_space, ConfigSpace};
use mohpi_core::dataset::MetaDataset;
use mohpi_core::error::Error;
use mohpi_core::fanova::{mo_fanova, FanovaOptions};
use mohpi_core::forest::{Forest, ForestParams};
use mohpi_core::pareto::{self, WeightVector};
use mohpi_core::report::{AnalysisReport, ReportMetadata};
use mohpi_core::rng::derive_seed;
use mohpi_core::synthetic;

#[derive(Parser)]
#[command(name = "mohpi", version, about = "Hyperparameter importance for multi-objective HPO runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Base RNG seed for all stochastic components.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Number of trees per random-forest surrogate.
    #[arg(long, global = true, default_value_t = 100)]
    trees: usize,

    /// Features considered per split (default: max(1, d/3)).
    #[arg(long, global = true)]
    mtry: Option<usize>,

    /// Minimum samples per leaf.
    #[arg(long, global = true, default_value_t = 1)]
    min_samples_leaf: usize,

    /// Maximum tree depth (default: unlimited).
    #[arg(long, global = true)]
    max_depth: Option<usize>,

    /// Fit each tree on the full data instead of a bootstrap resample.
    #[arg(long, global = true)]
    no_bootstrap: bool,

    /// Add k uniformly spaced weightings to the Pareto-derived ones.
    #[arg(long, global = true, value_name = "K")]
    grid: Option<usize>,

    /// Swap the roles of w1 and w2 in the derived weightings.
    #[arg(long, global = true)]
    invert_weights: bool,

    /// Also compute pairwise interaction importances (fANOVA only).
    #[arg(long, global = true)]
    pairwise: bool,

    /// Select ablation incumbents on raw instead of normalized objectives.
    #[arg(long, global = true)]
    raw_incumbent: bool,

    /// Write fitted surrogates as JSON next to the report (path prefix).
    #[arg(long, global = true, value_name = "PREFIX")]
    dump_surrogate: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic problem into a meta-dataset CSV.
    Generate {
        /// Synthetic problem document (JSON).
        #[arg(long)]
        problem: PathBuf,
        /// Number of configurations to sample.
        #[arg(long)]
        n: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Also write the problem's config-space schema here.
        #[arg(long)]
        space_out: Option<PathBuf>,
    },
    /// Print Pareto-efficient rows and the derived weightings as JSON.
    Pareto {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated pair of objective column names, e.g. "error,cost".
        #[arg(long)]
        objectives: String,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an analysis and write `<out>.json` and `<out>.svg`.
    Analyze {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated pair of objective column names, e.g. "error,cost".
        #[arg(long)]
        objectives: String,
        /// Output path prefix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render the SVG for an existing report.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Demographic-parity loss of a CSV with `prediction` and `sensitive`
    /// columns (0/1 or true/false).
    Dp {
        #[arg(long)]
        data: PathBuf,
        /// Divide both group sums by the total population size instead of
        /// the group sizes.
        #[arg(long)]
        dp_shared_n: bool,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Method {
    Fanova,
    Ablation,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    if let Ok(threads) = std::env::var("MOHPI_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: MOHPI_THREADS must be a positive integer, got '{threads}'");
                return ExitCode::from(1);
            }
        }
    }

    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Generate { problem, n, out, space_out } => {
            let problem = synthetic::make_problem(&read(problem)?)?;
            let ds = synthetic::sample_runs(&problem, *n, cli.seed)?;
            ds.write_csv(out)?;
            if let Some(path) = space_out {
                write(path, &problem.space().to_schema_json())?;
            }
            Ok(())
        }
        Command::Pareto { space, data, objectives, out } => {
            let (ds, _) = load_dataset(space, data, objectives)?;
            let document = pareto_document(&ds, cli)?;
            match out {
                Some(path) => write(path, &document)?,
                None => print!("{document}"),
            }
            Ok(())
        }
        Command::Analyze { method, space, data, objectives, out } => {
            let (ds, space_name) = load_dataset(space, data, objectives)?;
            let weights = derive_weight_set(&ds, cli)?;
            let forest_params = forest_params(cli);
            let metadata = ReportMetadata {
                dataset: data.display().to_string(),
                space: space_name,
                objectives: split_objectives(objectives)?.to_vec(),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                grid: cli.grid,
                invert_weights: cli.invert_weights,
                raw_incumbent: cli.raw_incumbent,
            };
            let report = match method {
                Method::Fanova => {
                    let opts = FanovaOptions {
                        forest: forest_params.clone(),
                        pairwise: cli.pairwise,
                        weights,
                    };
                    let result = mo_fanova(&ds, &opts)?;
                    if let Some(prefix) = &cli.dump_surrogate {
                        dump_fanova_surrogates(&ds, &opts, prefix)?;
                    }
                    AnalysisReport::from_fanova(&result, metadata, forest_params)
                }
                Method::Ablation => {
                    let opts = AblationOptions {
                        forest: forest_params.clone(),
                        weights,
                        raw_incumbent: cli.raw_incumbent,
                    };
                    let (paths, (s1, s2)) = mo_ablation_with_surrogates(&ds, &opts)?;
                    if let Some(prefix) = &cli.dump_surrogate {
                        write(&suffixed(prefix, "_o1.json"), &s1.to_json())?;
                        write(&suffixed(prefix, "_o2.json"), &s2.to_json())?;
                    }
                    AnalysisReport::from_ablation(&paths, metadata, forest_params)
                }
            };
            write(&suffixed(out, ".json"), &report.to_json())?;
            write(&suffixed(out, ".svg"), &svg::render_report(&report))?;
            Ok(())
        }
        Command::Plot { report, out } => {
            let report = AnalysisReport::from_json(&read(report)?)?;
            write(out, &svg::render_report(&report))
        }
        Command::Dp { data, dp_shared_n } => {
            let (predictions, sensitive) = load_dp_csv(data)?;
            let loss = if *dp_shared_n {
                synthetic::dp_loss_shared_n(&predictions, &sensitive)?
            } else {
                synthetic::dp_loss(&predictions, &sensitive)?
            };
            println!("{{\"dp_loss\": {loss}}}");
            Ok(())
        }
    }
}

fn forest_params(cli: &Cli) -> ForestParams {
    ForestParams {
        n_trees: cli.trees,
        mtry: cli.mtry,
        min_samples_leaf: cli.min_samples_leaf,
        max_depth: cli.max_depth,
        bootstrap: !cli.no_bootstrap,
        seed: cli.seed,
    }
}

fn split_objectives(spec: &str) -> Result<[String; 2], Error> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if parts.len() != 2 {
        return Err(Error::Schema(format!(
            "--objectives needs exactly two comma-separated names, got '{spec}'"
        )));
    }
    Ok([parts[0].to_string(), parts[1].to_string()])
}

fn load_dataset(space: &Path, data: &Path, objectives: &str) -> Result<(MetaDataset, String), Error> {
    let space: ConfigSpace = parse_space(&read(space)?)?;
    let names = split_objectives(objectives)?;
    let ds = MetaDataset::load_csv(data, &space, &names)?;
    let name = space.name().to_string();
    Ok((ds, name))
}

fn derive_weight_set(ds: &MetaDataset, cli: &Cli) -> Result<Vec<WeightVector>, Error> {
    let (c1, c2) = ds.objective_pair()?;
    let mut weights = pareto::pareto_weights(&c1.normalized(), &c2.normalized());
    if let Some(k) = cli.grid {
        pareto::add_grid_weights(&mut weights, k);
    }
    if cli.invert_weights {
        pareto::invert_weights(&mut weights);
    }
    Ok(weights)
}

fn pareto_document(ds: &MetaDataset, cli: &Cli) -> Result<String, Error> {
    use serde_json::json;
    let (c1, c2) = ds.objective_pair()?;
    let (o1, o2) = (c1.normalized(), c2.normalized());
    let points: Vec<[f64; 2]> = o1.iter().zip(&o2).map(|(&a, &b)| [a, b]).collect();
    let mask = pareto::pareto_mask(&points);
    let efficient: Vec<serde_json::Value> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(row, _)| {
            json!({
                "row": row,
                c1.name(): c1.raw()[row],
                c2.name(): c2.raw()[row],
                "normalized": [o1[row], o2[row]],
            })
        })
        .collect();
    let weights = derive_weight_set(ds, cli)?;
    let mut out = serde_json::to_string_pretty(&json!({
        "efficient_rows": efficient,
        "weights": weights,
    }))?;
    out.push('\n');
    Ok(out)
}

fn dump_fanova_surrogates(ds: &MetaDataset, opts: &FanovaOptions, prefix: &Path) -> Result<(), Error> {
    let (c1, c2) = ds.objective_pair()?;
    let (o1, o2) = (c1.normalized(), c2.normalized());
    let domain = ds.space().encoded_domain();
    for (idx, w) in opts.weights.iter().enumerate() {
        let y = mohpi_core::fanova::scalarize(&o1, &o2, w)?;
        let params = ForestParams {
            seed: derive_seed(opts.forest.seed, idx as u64),
            ..opts.forest.clone()
        };
        let forest = Forest::fit(ds.x(), &y, &params, domain.clone())?;
        write(&suffixed(prefix, &format!("_w{idx:03}.json")), &forest.to_json())?;
    }
    Ok(())
}

fn load_dp_csv(path: &Path) -> Result<(Vec<bool>, Vec<bool>), Error> {
    let text = read(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or(Error::EmptyDataset { rows: 0 })?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::MissingColumn { column: name.to_string() })
    };
    let (pred_col, sens_col) = (col("prediction")?, col("sensitive")?);
    let parse_bool = |cell: &str, row: usize, column: &str| match cell.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        other => Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("'{other}' is not a binary value"),
        }),
    };
    let mut predictions = Vec::new();
    let mut sensitive = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let get = |idx: usize| cells.get(idx).copied().unwrap_or("");
        predictions.push(parse_bool(get(pred_col), i + 1, "prediction")?);
        sensitive.push(parse_bool(get(sens_col), i + 1, "sensitive")?);
    }
    Ok((predictions, sensitive))
}

fn suffixed(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_os_string();
    name.push(suffix);
    PathBuf::from(name)
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write(path: &Path, content: &str) -> Result<(), Error> {
    std::fs::write(path, content).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}
