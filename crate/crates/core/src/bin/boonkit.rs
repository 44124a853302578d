use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boonkit::harness::{cmd_bounds, cmd_datagen, cmd_eval, cmd_train, cmd_verify, ExperimentConfig, HarnessError};

#[derive(Parser)]
#[command(name = "boonkit", version, about = "Boundary-corrected neural operators: checks, data, training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every property suite; stops at the first failure.
    Verify(Opts),
    /// Generate a BOONDATA dataset.
    Datagen(Opts),
    /// Train an operator on a dataset.
    Train(Opts),
    /// Evaluate checkpoints on datasets (comma-separated lists).
    Eval(Opts),
    /// Check the boundedness formulas on random kernels.
    Bounds(Opts),
}

/// Every key can also come from `--config`; giving it in both places is an error.
#[derive(Args, Default)]
struct Opts {
    /// `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    problem: Option<String>,
    #[arg(long)]
    bc: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    re: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    wave_speed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    amp: Option<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    resolution: Option<String>,
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    extent: Option<String>,
    #[arg(long)]
    n_data: Option<String>,
    #[arg(long)]
    n_train: Option<String>,
    #[arg(long)]
    nt: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    multistep: bool,
    #[arg(long, allow_hyphen_values = true)]
    t_final: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lr: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    decay_every: Option<String>,
    /// Disable every boundary correction.
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    mollifier: bool,
    #[arg(long)]
    modes: Option<String>,
    #[arg(long)]
    width: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    data: Option<String>,
    #[arg(long)]
    checkpoint: Option<String>,
    /// test, train or all.
    #[arg(long)]
    split: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// Substring of suite names to run.
    #[arg(long)]
    filter: Option<String>,
    /// Corrupt the dense Dirichlet oracle (mutation smoke test).
    #[arg(long)]
    inject_fault: bool,
}

impl Opts {
    fn pairs(&self) -> Vec<(String, String)> {
        let text = [
            ("problem", &self.problem),
            ("bc", &self.bc),
            ("nu", &self.nu),
            ("re", &self.re),
            ("wave_speed", &self.wave_speed),
            ("kappa", &self.kappa),
            ("amp", &self.amp),
            ("order", &self.order),
            ("resolution", &self.resolution),
            ("extent", &self.extent),
            ("n_data", &self.n_data),
            ("n_train", &self.n_train),
            ("nt", &self.nt),
            ("m", &self.m),
            ("t_final", &self.t_final),
            ("seed", &self.seed),
            ("epochs", &self.epochs),
            ("lr", &self.lr),
            ("batch_size", &self.batch_size),
            ("decay_every", &self.decay_every),
            ("modes", &self.modes),
            ("width", &self.width),
            ("out", &self.out),
            ("data", &self.data),
            ("checkpoint", &self.checkpoint),
            ("split", &self.split),
            ("trials", &self.trials),
            ("filter", &self.filter),
        ];
        let flags = [
            ("multistep", self.multistep),
            ("baseline", self.baseline),
            ("mollifier", self.mollifier),
            ("inject_fault", self.inject_fault),
        ];
        text.into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .chain(flags.into_iter().filter(|(_, on)| *on).map(|(k, _)| (k.to_string(), "true".to_string())))
            .collect()
    }

    fn resolve(&self) -> Result<ExperimentConfig, HarnessError> {
        let flags = ExperimentConfig::from_pairs(self.pairs())?;
        match &self.config {
            Some(p) => ExperimentConfig::merge(ExperimentConfig::load(p)?, flags),
            None => Ok(flags),
        }
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Verify(o) => cmd_verify(&o.resolve()?, &mut out).map(drop),
        Command::Datagen(o) => cmd_datagen(&o.resolve()?, &mut out),
        Command::Train(o) => cmd_train(&o.resolve()?, &mut out, &mut std::io::stderr()),
        Command::Eval(o) => cmd_eval(&o.resolve()?, &mut out).map(drop),
        Command::Bounds(o) => cmd_bounds(&o.resolve()?, &mut out).map(drop),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = std::io::stdout().flush();
            eprintln!("boonkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
