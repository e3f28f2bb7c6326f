use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use review_lstm::commands::{cmd_analyze, cmd_evaluate, cmd_label, cmd_predict, cmd_train, exit_code};
use review_lstm::config::RunConfig;
use review_lstm::Result;

#[derive(Parser)]
#[command(
    name = "review-lstm",
    version,
    about = "Review analytics, lexicon sentiment and BiLSTM classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Descriptive statistics, frequency tables, crosstabs, correlations, word counts.
    Analyze(Common),
    /// Append lexicon sentiment labels to the dataset.
    Label(Common),
    /// Train the BiLSTM classifier.
    Train(Common),
    /// Score a trained model on the test split.
    Evaluate(Common),
    /// Classify one text and print JSON.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        text: String,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = ["recommendation", "sentiment"])]
    task: Option<String>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Training run directory to load (evaluate, predict).
    #[arg(long)]
    model: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, use_model: bool) -> Result<RunConfig> {
        let mut flags = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.push((k.to_string(), v));
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        push("data", path(&self.data));
        push("out", path(&self.out));
        push("seed", self.seed.map(|s| s.to_string()));
        push("task", self.task.clone());
        push("embeddings", path(&self.embeddings));
        push("lexicon", path(&self.lexicon));
        push("model", path(&self.model));
        RunConfig::resolve(self.config.as_deref(), &flags, use_model)
    }
}

fn run(cli: Cli) -> Result<()> {
    let report = |dir: PathBuf| println!("{}", dir.display());
    match cli.command {
        Command::Analyze(c) => report(cmd_analyze(&c.resolve(false)?)?),
        Command::Label(c) => report(cmd_label(&c.resolve(false)?)?),
        Command::Train(c) => report(cmd_train(&c.resolve(false)?)?),
        Command::Evaluate(c) => report(cmd_evaluate(&c.resolve(true)?)?),
        Command::Predict { common, text } => {
            let p = cmd_predict(&common.resolve(true)?, &text)?;
            println!("{}", serde_json::to_string(&p)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
