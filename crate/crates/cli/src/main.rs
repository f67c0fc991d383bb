use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::{Parser, Subcommand};
use limit_cli::commands::{self, RunOptions};
use limit_cli::{parse_seeds, server};
use limit_core::humans::HumanKind;
use limit_core::playground::Playground;
use limit_core::runner::Algorithm;

#[derive(Parser)]
#[command(name = "limit", version, about = "Co-adaptive interface learning: simulations, statistics and the playground")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run simulated experiments and write one CSV row per interaction.
    Run {
        /// JSON experiment config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        /// sim1d, sim2d, over4x2 or under2x4.
        #[arg(long)]
        preset: Option<String>,
        /// One or more of naive, bayes, convey, distinguish, limit (comma separated), or `all`.
        #[arg(long, value_delimiter = ',')]
        algo: Vec<String>,
        /// rotate or align.
        #[arg(long)]
        human: Option<HumanKind>,
        /// `0..19` (inclusive), `3..=5`, or a comma list.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        lr: Option<f64>,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Final-window means and paired t-tests.
    Stats {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 5)]
        window: usize,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Error-versus-interaction curves (mean and standard error) as SVG.
    Plot {
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        title: Option<String>,
    },
    /// Pretrain a 2D learner against a simulated Align human and save it.
    Pretrain {
        #[arg(long, default_value_t = 100)]
        interactions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the playground API (and optionally a static UI).
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Learner checkpoint; pretrained at startup when omitted.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        pretrain: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory served for every non-API path.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

fn parse_algorithms(names: &[String]) -> anyhow::Result<Vec<Algorithm>> {
    if names.iter().any(|n| n == "all") {
        return Ok(Algorithm::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse::<Algorithm>().map_err(anyhow::Error::from))
        .collect()
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            preset,
            algo,
            human,
            seeds,
            lr,
            out,
        } => {
            let opts = RunOptions {
                config,
                preset,
                algorithms: parse_algorithms(&algo)?,
                human,
                seeds: seeds.as_deref().map(parse_seeds).transpose()?,
                learning_rate: lr,
                out: out.clone(),
            };
            let rows = commands::run(&opts)?;
            if let Some(path) = out {
                eprintln!("wrote {} rows to {}", rows.len(), path.display());
            }
        }
        Command::Stats { inputs, window, json } => {
            let summary = commands::stats(&inputs, window)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            } else {
                print!("{summary}");
            }
        }
        Command::Plot { inputs, out, title } => {
            commands::plot(&inputs, &out, title.as_deref())?;
            eprintln!("wrote {}", out.display());
        }
        Command::Pretrain { interactions, seed, out } => {
            let learner = commands::pretrain(interactions, seed)?;
            std::fs::write(&out, learner.to_json()?).with_context(|| format!("writing {}", out.display()))?;
            eprintln!("wrote {}", out.display());
        }
        Command::Serve {
            addr,
            checkpoint,
            pretrain,
            seed,
            static_dir,
        } => {
            eprintln!("preparing learner");
            let learner = commands::load_or_pretrain(checkpoint.as_deref(), pretrain, seed)?;
            let app = server::router(Arc::new(Playground::new(learner)?), static_dir);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(addr).await?;
                eprintln!("listening on http://{}", listener.local_addr()?);
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}
