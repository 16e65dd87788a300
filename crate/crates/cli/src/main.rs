use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leaning::classify::Family;
use leaning::eval::Dataset;
use leaning::pipeline::{self, ModelChoice, RunConfig, Stage};
use leaning::synthgen::{generate, SynthSpec};
use leaning::Error;

#[derive(Parser)]
#[command(name = "leaning", version, about = "Infer left/right leaning of social-media users")]
struct Cli {
    /// Log level (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "info")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load tweets, follow lists and VAA results; derive labels and filter users.
    Ingest(RunArgs),
    /// Induce the political lexicon.
    Lexicon(RunArgs),
    /// Build political, non-political and network feature matrices.
    Dfm(RunArgs),
    /// Draw balanced samples and fit topic models on their training splits.
    Topics(RunArgs),
    /// Cross-validate and train every configured classifier.
    Train(RunArgs),
    /// Score held-out users and write the evaluation report.
    Eval(RunArgs),
    /// Apply one trained model to all ingested users.
    Predict(PredictArgs),
    /// Classify news sharers and count them by outlet and news type.
    Newsstudy(RunArgs),
    /// Run every stage from ingest to eval (and newsstudy when configured).
    Run(RunArgs),
    /// Write a synthetic corpus with planted truth and a matching config.
    Synth(SynthArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run configuration; relative paths inside resolve against its directory.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tweets: Option<PathBuf>,
    #[arg(long)]
    friends: Option<PathBuf>,
    #[arg(long)]
    vaa: Option<PathBuf>,
    #[arg(long)]
    periods: Option<PathBuf>,
    #[arg(long)]
    news_tweets: Option<PathBuf>,
    #[arg(long)]
    news_friends: Option<PathBuf>,
    #[arg(long)]
    shares: Option<PathBuf>,
    #[arg(long)]
    patterns: Option<PathBuf>,
    /// Number of topics.
    #[arg(long)]
    topics: Option<usize>,
    /// Balanced samples to evaluate.
    #[arg(long)]
    samples: Option<usize>,
    /// Cross-validation folds (0 disables cross validation).
    #[arg(long)]
    cv_folds: Option<usize>,
    /// Comma-separated datasets: net, non-pol, non-pol+net, pol, pol+net.
    #[arg(long, value_delimiter = ',')]
    datasets: Option<Vec<Dataset>>,
    /// Comma-separated classifiers: NB, NN, SVM_lin, SVM_poly, SVM_rad.
    #[arg(long, value_delimiter = ',')]
    classifiers: Option<Vec<Family>>,
    /// Probability threshold for the news study.
    #[arg(long)]
    news_tau: Option<f64>,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = 1)]
    sample: usize,
    #[arg(long, default_value = "non-pol+net")]
    dataset: Dataset,
    #[arg(long, default_value = "SVM_poly")]
    classifier: Family,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for the generated files.
    #[arg(long)]
    out: PathBuf,
    /// JSON generator spec; flags override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    n_users: Option<usize>,
    #[arg(long)]
    right_fraction: Option<f64>,
    #[arg(long)]
    k_topics: Option<usize>,
    #[arg(long)]
    vocab_size: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    homophily: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_news_users: Option<usize>,
}

fn load_config(a: &RunArgs) -> leaning::Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.inputs.tweets, &a.tweets);
    set(&mut cfg.inputs.friends, &a.friends);
    set(&mut cfg.inputs.vaa, &a.vaa);
    set(&mut cfg.inputs.periods, &a.periods);
    set(&mut cfg.inputs.news_tweets, &a.news_tweets);
    set(&mut cfg.inputs.news_friends, &a.news_friends);
    set(&mut cfg.inputs.shares, &a.shares);
    set(&mut cfg.inputs.patterns, &a.patterns);
    if let Some(d) = &a.output_dir {
        cfg.output_dir = d.clone();
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(k) = a.topics {
        cfg.topics.k = k;
    }
    if let Some(n) = a.samples {
        cfg.eval.n_samples = n;
    }
    if let Some(n) = a.cv_folds {
        cfg.eval.cv_folds = n;
    }
    if let Some(d) = &a.datasets {
        cfg.eval.datasets = d.clone();
    }
    if let Some(c) = &a.classifiers {
        cfg.eval.classifiers = c.clone();
    }
    if let Some(t) = a.news_tau {
        cfg.news.tau = t;
    }
    Ok(cfg)
}

fn synth(a: &SynthArgs) -> leaning::Result<()> {
    let mut spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::config("spec", format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Error::config("spec", e))?
        }
        None => SynthSpec::default(),
    };
    macro_rules! over {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { spec.$f = v; } )* };
    }
    over!(n_users, right_fraction, k_topics, vocab_size, delta, homophily, seed, n_news_users);
    if let Err(Error::InvalidInput(msg)) = spec.validate() {
        let (field, message) = msg.split_once(": ").unwrap_or(("spec", msg.as_str()));
        return Err(Error::config(field, message));
    }
    let data = generate(&spec)?;
    let files = data.write(&a.out)?;
    let name = |p: &Path| PathBuf::from(p.file_name().expect("file path"));
    let mut cfg = RunConfig::default();
    cfg.inputs.tweets = Some(name(&files.tweets));
    cfg.inputs.friends = Some(name(&files.friends));
    cfg.inputs.vaa = Some(name(&files.vaa));
    cfg.inputs.periods = Some(name(&files.periods));
    cfg.inputs.news_tweets = Some(name(&files.news_tweets));
    cfg.inputs.news_friends = Some(name(&files.news_friends));
    cfg.inputs.shares = Some(name(&files.shares));
    cfg.output_dir = PathBuf::from("out");
    cfg.seed = spec.seed;
    cfg.topics.k = spec.k_topics;
    let path = a.out.join("config.json");
    let text = serde_json::to_string_pretty(&cfg)?;
    std::fs::write(&path, text + "\n").map_err(|e| Error::Io { path: path.clone(), source: e })?;
    log::info!(
        "synth: {} users, {} tweets, {} news users written to {}",
        spec.n_users,
        data.tweets.len(),
        spec.n_news_users,
        a.out.display()
    );
    Ok(())
}

fn run(cli: &Cli) -> leaning::Result<()> {
    match &cli.command {
        Command::Ingest(a) => pipeline::ingest(&load_config(a)?).map(drop),
        Command::Lexicon(a) => pipeline::lexicon(&load_config(a)?).map(drop),
        Command::Dfm(a) => pipeline::dfm(&load_config(a)?).map(drop),
        Command::Topics(a) => pipeline::topics(&load_config(a)?).map(drop),
        Command::Train(a) => pipeline::train(&load_config(a)?).map(drop),
        Command::Eval(a) => pipeline::eval(&load_config(a)?).map(drop),
        Command::Newsstudy(a) => {
            let table = pipeline::newsstudy(&load_config(a)?)?;
            print!("{}", table.to_text());
            Ok(())
        }
        Command::Run(a) => {
            let cfg = load_config(a)?;
            // fail on configuration problems before any stage runs
            cfg.validate(Stage::Ingest)?;
            pipeline::run_all(&cfg).map(drop)
        }
        Command::Predict(p) => {
            let cfg = load_config(&p.run)?;
            let choice = ModelChoice {
                sample: p.sample,
                dataset: p.dataset,
                classifier: p.classifier,
                tau: p.tau,
            };
            pipeline::predict(&cfg, choice).map(drop)
        }
        Command::Synth(a) => synth(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
