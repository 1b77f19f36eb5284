use std::path::{Path, PathBuf};
use std::process::ExitCode;

use actpath::artifacts::to_json;
use actpath::config::DEFAULT_SEED;
use actpath::error::{Error, Result};
use actpath::fixture::{default_planted, write_planted, write_recurrent};
use actpath::{cmd_cluster, cmd_flows, cmd_mine, cmd_pipeline, cmd_report, cmd_sankey, RunArgs};
use actpath_core::fixture::{FixtureSpec, RecurrentFixtureSpec};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

/// Cluster hidden activations, count cluster-to-cluster flows, mine
/// per-class decision paths and draw them as Sankey diagrams.
#[derive(Debug, Parser)]
#[command(name = "actpath", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// k-means per included layer -> clusters.json
    Cluster(RunArgs),
    /// Class-keyed transition counts between columns -> flows.json
    Flows(RunArgs),
    /// Decision paths and rare transitions -> paths.json
    Mine(RunArgs),
    /// Sankey diagram -> diagram.svg, diagram.json, diagram.html
    Sankey(RunArgs),
    /// Markdown summary -> report.md
    Report(RunArgs),
    /// cluster, flows, mine, sankey and report in order
    Pipeline(RunArgs),
    /// Generate a synthetic dataset with known structure
    #[command(subcommand)]
    Fixture(FixtureCommand),
}

#[derive(Debug, Subcommand)]
enum FixtureCommand {
    /// Feed-forward data: classes follow weighted paths through
    /// well-separated Gaussian clusters
    Planted {
        #[arg(long, short = 'o')]
        out: PathBuf,
        /// Full spec as JSON; other flags override its fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        outlier_rate: Option<f64>,
        /// Cluster spacing in units of sigma.
        #[arg(long)]
        separation: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Activation width of every layer.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "planted")]
        name: String,
    },
    /// Recurrent data: per-class Markov chains over planted states
    Recurrent {
        #[arg(long, short = 'o')]
        out: PathBuf,
        /// Full spec as JSON; other flags override its fields.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 10)]
        states: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long, default_value_t = 20)]
        min_length: usize,
        #[arg(long, default_value_t = 30)]
        max_length: usize,
        /// Probability of following the class's planted cycle at each step.
        #[arg(long, default_value_t = 0.98)]
        fidelity: f64,
        #[arg(long, default_value = "recurrent")]
        name: String,
    },
}

fn read_spec<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::config("spec", e.to_string()))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Cluster(a) => Ok(vec![cmd_cluster(&a.resolve()?)?]),
        Command::Flows(a) => Ok(vec![cmd_flows(&a.resolve()?)?]),
        Command::Mine(a) => Ok(vec![cmd_mine(&a.resolve()?)?]),
        Command::Sankey(a) => cmd_sankey(&a.resolve()?),
        Command::Report(a) => Ok(vec![cmd_report(&a.resolve()?)?]),
        Command::Pipeline(a) => cmd_pipeline(&a.resolve()?),
        Command::Fixture(FixtureCommand::Planted {
            out,
            spec,
            seed,
            instances,
            outlier_rate,
            separation,
            sigma,
            dim,
            name,
        }) => {
            let mut s: FixtureSpec = match spec {
                Some(p) => read_spec(&p)?,
                None => default_planted(3000, 0.005, DEFAULT_SEED),
            };
            s.seed = seed.unwrap_or(s.seed);
            s.instances = instances.unwrap_or(s.instances);
            s.outlier_rate = outlier_rate.unwrap_or(s.outlier_rate);
            s.separation = separation.unwrap_or(s.separation);
            s.sigma = sigma.unwrap_or(s.sigma);
            if let Some(d) = dim {
                s.columns.iter_mut().for_each(|c| c.dim = d);
            }
            write_planted(&out, &s, &name)?;
            Ok(vec![out])
        }
        Command::Fixture(FixtureCommand::Recurrent {
            out,
            spec,
            seed,
            classes,
            states,
            dim,
            instances,
            min_length,
            max_length,
            fidelity,
            name,
        }) => {
            let mut s = match spec {
                Some(p) => read_spec::<RecurrentFixtureSpec>(&p)?,
                None => RecurrentFixtureSpec::cyclic(
                    classes,
                    states,
                    dim,
                    1500,
                    (min_length, max_length),
                    fidelity,
                    DEFAULT_SEED,
                ),
            };
            s.seed = seed.unwrap_or(s.seed);
            s.instances = instances.unwrap_or(s.instances);
            write_recurrent(&out, &s, &name)?;
            Ok(vec![out])
        }
    }
}

fn fail(body: serde_json::Value) -> ExitCode {
    eprint!("{}", String::from_utf8_lossy(&to_json(&serde_json::json!({ "error": body }))));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            return fail(serde_json::json!({
                "kind": "usage",
                "message": e.render().to_string().trim_end(),
            }))
        }
    };
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(serde_json::to_value(e.report()).expect("report serializes")),
    }
}
