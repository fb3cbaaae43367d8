use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newsframe_core::framing::{ScoreMode, ThresholdMode};
use newsframe_core::keywords::IgVariant;
use newsframe_core::legislation::{ChangeInput, PredictorMode};
use newsframe_core::semantics::Weighting;
use newsframe_core::NgramOrders;
use serde::de::DeserializeOwned;

mod commands;
mod config;
mod error;
mod io;

use config::RunConfig;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "newsframe", version, about = "Framing changes, news cycles and legislation signals from news corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download a keyword search into a JSON Lines corpus.
    Fetch {
        /// nyt or guardian
        #[arg(long)]
        adapter: String,
        #[arg(long)]
        query: String,
        /// First day, YYYY-MM-DD
        #[arg(long)]
        from: String,
        /// Last day, YYYY-MM-DD
        #[arg(long)]
        to: String,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Keywords, distances and the framing-change decision for two periods.
    Framing {
        #[arg(long)]
        t1: Option<PathBuf>,
        #[arg(long)]
        t2: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Annual volume, sentiment and correlation of one topic corpus.
    Cycle {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Directory holding positive.txt and negative.txt
        #[arg(long)]
        lexicons: Option<PathBuf>,
        /// CSV of topic,year,count; fills the legislative column
        #[arg(long)]
        laws: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Legislation model over a directory of annual feature CSVs.
    Legislate {
        #[command(subcommand)]
        action: LegislateAction,
    },
    /// Two-stage random-forest expansion of coded seed articles.
    Bootstrap {
        /// CSV of article_id,label
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        universal: Option<PathBuf>,
        /// Article ids (one per line) added as first-stage negatives
        #[arg(long)]
        extra_negatives: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[arg(long)]
    series_dir: Option<PathBuf>,
    /// CSV of topic,year,count
    #[arg(long)]
    laws: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum LegislateAction {
    /// Fit on every series and write the model.
    Fit {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Score every year of every series with a fitted model.
    Predict {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Leave-one-topic-out evaluation.
    Loo {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        opts: Overrides,
    },
}

fn serde_value<T: DeserializeOwned>(raw: &str) -> Result<T, String> {
    let v = serde_json::Value::String(raw.replace('-', "_"));
    serde_json::from_value(v).map_err(|e| e.to_string())
}

fn orders_value(raw: &str) -> Result<NgramOrders, String> {
    let orders: Vec<u8> = raw.split(',').map(|s| s.trim().parse().map_err(|_| format!("bad order {s:?}"))).collect::<Result<_, _>>()?;
    NgramOrders::from_orders(&orders).map_err(|e| e.to_string())
}

/// Flags that override the config file.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML run configuration
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    topic: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long, value_parser = serde_value::<Weighting>)]
    weighting: Option<Weighting>,
    /// Comma-separated n-gram orders, e.g. 1,2
    #[arg(long, value_parser = orders_value)]
    orders: Option<NgramOrders>,
    #[arg(long)]
    min_df: Option<usize>,
    #[arg(long, value_parser = serde_value::<IgVariant>)]
    ig_variant: Option<IgVariant>,
    #[arg(long)]
    max_vocab: Option<usize>,
    #[arg(long, value_parser = serde_value::<ScoreMode>)]
    score_mode: Option<ScoreMode>,
    #[arg(long, value_parser = serde_value::<ThresholdMode>)]
    threshold_mode: Option<ThresholdMode>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = serde_value::<PredictorMode>)]
    mode: Option<PredictorMode>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long, value_parser = serde_value::<ChangeInput>)]
    change_input: Option<ChangeInput>,
    #[arg(long)]
    n_trees: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    max_pages: Option<u32>,
    #[arg(long)]
    requests_per_second: Option<f64>,
}

impl Overrides {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set!(
            seed => c.seed, k => c.k, j => c.j, window => c.window, weighting => c.weighting,
            orders => c.orders, min_df => c.min_df, ig_variant => c.ig_variant, max_vocab => c.max_vocab,
            score_mode => c.score_mode, threshold_mode => c.threshold_mode, threshold => c.threshold,
            bins => c.bins, alpha => c.alpha, mode => c.predictor_mode, t => c.t,
            change_input => c.change_input, n_trees => c.n_trees, max_depth => c.max_depth,
            max_pages => c.max_pages, requests_per_second => c.requests_per_second,
        );
        if self.topic.is_some() {
            c.topic = self.topic.clone();
        }
        if self.out.is_some() {
            c.paths.out = self.out.clone();
        }
        Ok(c)
    }
}

fn merge(slot: &mut Option<PathBuf>, flag: Option<PathBuf>) {
    if flag.is_some() {
        *slot = flag;
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Fetch { adapter, query, from, to, cache_dir, opts } => {
            let mut c = opts.resolve()?;
            merge(&mut c.paths.cache_dir, cache_dir);
            c.validate()?;
            commands::fetch(&c, &adapter, &query, &from, &to)
        }
        Command::Framing { t1, t2, opts } => {
            let mut c = opts.resolve()?;
            merge(&mut c.paths.t1, t1);
            merge(&mut c.paths.t2, t2);
            c.validate()?;
            commands::framing(&c)
        }
        Command::Cycle { corpus, lexicons, laws, opts } => {
            let mut c = opts.resolve()?;
            merge(&mut c.paths.corpus, corpus);
            merge(&mut c.paths.lexicons, lexicons);
            merge(&mut c.paths.laws, laws);
            c.validate()?;
            commands::cycle(&c)
        }
        Command::Legislate { action } => {
            let (series, opts, model, which) = match action {
                LegislateAction::Fit { series, opts } => (series, opts, None, commands::Legislate::Fit),
                LegislateAction::Predict { series, model, opts } => (series, opts, model, commands::Legislate::Predict),
                LegislateAction::Loo { series, opts } => (series, opts, None, commands::Legislate::Loo),
            };
            let mut c = opts.resolve()?;
            merge(&mut c.paths.series_dir, series.series_dir);
            merge(&mut c.paths.laws, series.laws);
            merge(&mut c.paths.model, model);
            c.validate()?;
            commands::legislate(&c, which)
        }
        Command::Bootstrap { seeds, universal, extra_negatives, opts } => {
            let mut c = opts.resolve()?;
            merge(&mut c.paths.seeds, seeds);
            merge(&mut c.paths.universal, universal);
            merge(&mut c.paths.extra_negatives, extra_negatives);
            c.validate()?;
            commands::bootstrap(&c)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
