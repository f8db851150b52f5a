use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use faultaug::augment::Scenario;
use faultaug::eval::MetricsReport;
use faultaug::pipeline::{corpus_gen, emit_report, run_pipeline, templates, EvalSpace, FlMethod, RunConfig};

#[derive(Parser)]
#[command(name = "faultaug", version, about = "Fault localization with context-aware failing-test synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus operations.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Run every scenario and method over a corpus and write reports.
    Run(RunArgs),
    /// Re-render an existing report.json as table and RImp CSV.
    Report {
        /// Path to report.json.
        input: PathBuf,
        /// Directory for the rendered files (defaults to the input's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// Generate the built-in corpus (golden version plus one per template).
    Gen {
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    scenarios: Option<Vec<Scenario>>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<FlMethod>>,
    #[arg(long)]
    eval_space: Option<EvalSpace>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long = "beta1")]
    beta_1: Option<f64>,
    #[arg(long = "betaT")]
    beta_t: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sample_steps: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    max_failing: Option<usize>,
    #[arg(long)]
    reject_empty: bool,
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, String> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p).map_err(|e| e.to_string())?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(corpus, seed, scenarios, methods, eval_space, steps, lr, beta_1, beta_t, alpha, gamma, sample_steps, epochs);
        if let Some(v) = self.out {
            c.output = v;
        }
        if self.max_failing.is_some() {
            c.max_failing = self.max_failing;
        }
        c.reject_empty |= self.reject_empty;
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Corpus { action: CorpusAction::Gen { out, seed } } => {
            match corpus_gen(&templates::builtin_templates(), seed, &out) {
                Ok(ids) => {
                    println!("wrote {} versions to {}", ids.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Run(args) => {
            let cfg = match args.into_config() {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_pipeline(&cfg) {
                Ok(out) => {
                    print!("{}", out.report.to_table());
                    if out.report.errors.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Report { input, out } => {
            let report: MetricsReport = match std::fs::read_to_string(&input)
                .map_err(|e| e.to_string())
                .and_then(|t| serde_json::from_str(&t).map_err(|e| e.to_string()))
            {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {}: {e}", input.display());
                    return ExitCode::FAILURE;
                }
            };
            let dir = out.unwrap_or_else(|| input.parent().map(PathBuf::from).unwrap_or_default());
            if let Err(e) = emit_report(&report, &dir) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            print!("{}", report.to_table());
            if report.errors.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
        }
    }
}
