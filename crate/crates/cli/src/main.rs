//! `stage`: command-line front end for the consensus, weighting, psychometric and scoring
//! stages.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stage_core::ahp::{compute_weights, WeightMethod};
use stage_core::consensus::{indicator_stats, round_consensus, screen_round, ConsensusOptions};
use stage_core::forms::emit_round_form;
use stage_core::io::{
    load_response_set, names_by_id, parse_ratings, read_experts, read_importance, read_indicators,
    read_pairwise, write_text, RatingsOptions,
};
use stage_core::model::{load_default_instrument, ScreeningThresholds, DEFAULT_SCALE_MAX};
use stage_core::pipeline::{read_weight_table, run_pipeline};
use stage_core::psychometrics::{reliability_report, validity_report, DEFAULT_RELEVANCE_FLOOR};
use stage_core::report::{emit_report, parse_report_json, Precision, ReportBundle, ReportFormat};
use stage_core::scoring::{score_software, DEFAULT_BONUS_CAP};
use stage_core::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(
    name = "stage",
    version,
    about = "Delphi consensus, indicator weighting and scale validation"
)]
struct Cli {
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Decimal places for every displayed figure (default: 4 for coefficients, 2 for scores).
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Positivity, authority, concordance and per-indicator statistics for one round.
    RoundStats(RoundArgs),
    /// Round statistics plus the screening verdicts.
    Screen {
        #[command(flatten)]
        round: RoundArgs,
        #[command(flatten)]
        thresholds: ThresholdArgs,
    },
    /// Local and global indicator weights.
    Weights(WeightArgs),
    /// Cronbach's alpha and item-total statistics of the consumer questionnaire.
    Reliability {
        #[arg(long)]
        responses: PathBuf,
    },
    /// Item- and scale-level content validity.
    Validity {
        #[arg(long)]
        importance: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RELEVANCE_FLOOR)]
        relevance_floor: u32,
    },
    /// Dimension, core and final scores for one piece of software.
    Score {
        #[arg(long)]
        responses: PathBuf,
        /// Weight table, or any report containing one.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        expert_bonus: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BONUS_CAP)]
        bonus_cap: f64,
    },
    /// Consultation form for the next round, carrying the previous round's means.
    Form(FormArgs),
    /// Re-render a saved report.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run every stage listed in a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RoundArgs {
    #[arg(long)]
    ratings: PathBuf,
    #[arg(long)]
    experts: PathBuf,
    #[arg(long, default_value_t = 1)]
    round: u32,
    #[arg(long, default_value_t = DEFAULT_SCALE_MAX)]
    scale_max: u32,
    /// Questionnaires sent out (default: rows in the ratings file).
    #[arg(long)]
    distributed: Option<usize>,
    /// Indicator list; ratings columns must be ids from it.
    #[arg(long)]
    indicators: Option<PathBuf>,
    /// Use the Kendall's W formula without the tie correction.
    #[arg(long)]
    uncorrected_ties: bool,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Fixed thresholds; all three must be given together. Derived from the round otherwise.
    #[arg(long, requires_all = ["fsf_floor", "cv_ceiling"])]
    mean_floor: Option<f64>,
    #[arg(long, requires_all = ["mean_floor", "cv_ceiling"])]
    fsf_floor: Option<f64>,
    #[arg(long, requires_all = ["mean_floor", "fsf_floor"])]
    cv_ceiling: Option<f64>,
}

#[derive(Args)]
struct WeightArgs {
    #[arg(long)]
    indicators: PathBuf,
    /// Pairwise comparison matrix; repeat for each sibling group.
    #[arg(long = "matrix")]
    matrices: Vec<PathBuf>,
    #[arg(long, default_value = "combined")]
    method: WeightMethod,
    /// Ratings whose indicator means give the importance weights.
    #[arg(long)]
    ratings: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SCALE_MAX)]
    scale_max: u32,
}

#[derive(Args)]
struct FormArgs {
    /// Report holding the previous round (as written by round-stats, screen or pipeline).
    #[arg(long, conflicts_with_all = ["ratings", "experts"])]
    report: Option<PathBuf>,
    /// Previous round's ratings; use with --experts instead of --report.
    #[arg(long, requires = "experts")]
    ratings: Option<PathBuf>,
    #[arg(long, requires = "ratings")]
    experts: Option<PathBuf>,
    /// Previous round number (default: the last round in the report, or 1).
    #[arg(long)]
    round: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_SCALE_MAX)]
    scale_max: u32,
    /// Indicator list used for display names.
    #[arg(long)]
    indicators: Option<PathBuf>,
    /// Carry these ids forward instead of the screening verdict.
    #[arg(long, value_delimiter = ',')]
    retain: Vec<String>,
}

fn round_bundle(args: &RoundArgs) -> Result<ReportBundle> {
    let known_ids = match &args.indicators {
        Some(p) => Some(
            read_indicators(p)?
                .nodes()
                .iter()
                .map(|n| n.id.clone())
                .collect(),
        ),
        None => None,
    };
    let round = parse_ratings(
        &args.ratings,
        &RatingsOptions {
            round_no: args.round,
            scale_max: args.scale_max,
            distributed: args.distributed,
            known_ids,
        },
    )?;
    let experts = read_experts(&args.experts)?;
    let options = ConsensusOptions {
        uncorrected_ties: args.uncorrected_ties,
        ..Default::default()
    };
    Ok(ReportBundle {
        rounds: vec![round_consensus(&round, &experts, &options)?],
        ..Default::default()
    })
}

fn thresholds(args: &ThresholdArgs) -> Result<Option<ScreeningThresholds>> {
    match (args.mean_floor, args.fsf_floor, args.cv_ceiling) {
        (Some(m), Some(f), Some(c)) => ScreeningThresholds::new(m, f, c).map(Some),
        _ => Ok(None),
    }
}

fn weights(args: &WeightArgs) -> Result<ReportBundle> {
    let tree = read_indicators(&args.indicators)?;
    let matrices = args
        .matrices
        .iter()
        .map(|p| read_pairwise(p))
        .collect::<Result<Vec<_>>>()?;
    let mut importance = BTreeMap::new();
    if args.method != WeightMethod::Ahp {
        let path = args.ratings.as_ref().ok_or_else(|| {
            Error::MissingInput(format!(
                "--ratings is required by the {} method",
                args.method
            ))
        })?;
        let round = parse_ratings(
            path,
            &RatingsOptions {
                round_no: 1,
                scale_max: args.scale_max,
                ..Default::default()
            },
        )?;
        for (j, id) in round.indicator_ids().iter().enumerate() {
            importance.insert(
                id.clone(),
                indicator_stats(&round.column(j), args.scale_max)?.mean,
            );
        }
    }
    Ok(ReportBundle {
        weights: Some(compute_weights(&tree, &matrices, &importance, args.method)?),
        ..Default::default()
    })
}

fn read_bundle(path: &Path) -> Result<ReportBundle> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_report_json(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn form(args: &FormArgs) -> Result<String> {
    let bundle = match (&args.report, &args.ratings, &args.experts) {
        (Some(report), _, _) => read_bundle(report)?,
        (None, Some(ratings), Some(experts)) => {
            let mut b = round_bundle(&RoundArgs {
                ratings: ratings.clone(),
                experts: experts.clone(),
                round: args.round.unwrap_or(1),
                scale_max: args.scale_max,
                distributed: None,
                indicators: None,
                uncorrected_ties: false,
            })?;
            b.screening.push(screen_round(&b.rounds[0], None)?);
            b
        }
        _ => {
            return Err(Error::MissingInput(
                "--report, or --ratings with --experts".into(),
            ))
        }
    };
    let prev = match args.round {
        Some(k) => bundle.rounds.iter().find(|r| r.round_no == k),
        None => bundle.rounds.last(),
    }
    .ok_or_else(|| Error::MissingInput("previous round statistics".into()))?;
    let retained = if !args.retain.is_empty() {
        args.retain.clone()
    } else {
        bundle
            .screening
            .iter()
            .find(|s| s.round_no == prev.round_no)
            .map(|s| s.retained.clone())
            .unwrap_or_else(|| prev.indicators.keys().cloned().collect())
    };
    let names = match &args.indicators {
        Some(p) => names_by_id(&read_indicators(p)?),
        None => BTreeMap::new(),
    };
    emit_round_form(prev, &names, &retained, prev.round_no + 1)
}

fn run(cli: &Cli) -> Result<String> {
    let precision = cli.precision.map(Precision::uniform).unwrap_or_default();
    let format = match cli.format {
        Format::Json => ReportFormat::Json,
        Format::Markdown => ReportFormat::Markdown,
    };
    let instrument = load_default_instrument();
    let bundle = match &cli.command {
        Command::RoundStats(args) => round_bundle(args)?,
        Command::Screen {
            round,
            thresholds: t,
        } => {
            let mut b = round_bundle(round)?;
            b.screening
                .push(screen_round(&b.rounds[0], thresholds(t)?.as_ref())?);
            b
        }
        Command::Weights(args) => weights(args)?,
        Command::Reliability { responses } => {
            let set = load_response_set(responses, None, &instrument)?;
            ReportBundle {
                reliability: Some(reliability_report(&set, &instrument)?),
                ..Default::default()
            }
        }
        Command::Validity {
            importance,
            relevance_floor,
        } => {
            let (items, matrix) = read_importance(importance)?;
            ReportBundle {
                validity: Some(validity_report(&items, &matrix, *relevance_floor)?),
                ..Default::default()
            }
        }
        Command::Score {
            responses,
            weights,
            expert_bonus,
            bonus_cap,
        } => {
            let set = load_response_set(responses, expert_bonus.as_deref(), &instrument)?;
            let table = read_weight_table(weights)?;
            ReportBundle {
                scorecard: Some(score_software(&set, &instrument, &table, *bonus_cap)?),
                ..Default::default()
            }
        }
        Command::Form(args) => return form(args),
        Command::Report { input } => read_bundle(input)?,
        Command::Pipeline { config } => run_pipeline(config)?,
    };
    Ok(emit_report(&bundle, format, &precision))
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Validation => 2,
        ErrorClass::Numeric => 3,
        ErrorClass::Io => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|text| match &cli.out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
