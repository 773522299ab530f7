use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;

use stacktext_core::classical::{accuracy, Dataset};
use stacktext_core::dataset::{class_counts, load_liar_dir, parse_liar_tsv, SplitSet, Statement};
use stacktext_core::ensemble::{build_hybrid, evaluate_hybrid};
use stacktext_core::harness::{
    emit_report, format_percent, majority_baseline, run_grid, CellFeatures, CellModel, CellSpec, ReportFormat,
    RunConfig,
};
use stacktext_core::neural::{ann_init, ann_train, AnnConfig};
use stacktext_core::persist::{self, SavedModel};
use stacktext_core::{synth, BaseClassifier, BinaryLabel, Featurizer};

#[derive(Parser)]
#[command(
    name = "stacktext",
    version,
    about = "Stacked-ensemble fake news classification on LIAR-format data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a LIAR directory and print per-split label counts.
    Ingest {
        #[arg(long, env = "STACKTEXT_LIAR_DIR")]
        data_dir: PathBuf,
    },
    /// Run the experiment grid and write a report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Cells to run, as MODEL:FEATURES (e.g. svm:tfidf, ann:v3).
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Markdown)]
        format: Format,
        /// Overrides `data_dir` from the config file.
        #[arg(long, env = "STACKTEXT_LIAR_DIR")]
        data_dir: Option<PathBuf>,
        /// Run cells concurrently.
        #[arg(long)]
        parallel: bool,
        /// Write NA instead of measured runtimes.
        #[arg(long)]
        no_runtime: bool,
    },
    /// Majority-class accuracy of an evaluation split.
    Baseline {
        #[arg(long, value_enum, default_value_t = Split::Test)]
        split: Split,
        #[arg(long, env = "STACKTEXT_LIAR_DIR", default_value = "data/liar")]
        data_dir: PathBuf,
    },
    /// Fit one model on the training split and save it.
    Train {
        /// svm, knn, logreg, rf or ann.
        #[arg(long)]
        model: String,
        /// A feature set, or v1..v4 with `--model ann` for a hybrid.
        #[arg(long)]
        features: String,
        #[arg(long)]
        save: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "STACKTEXT_LIAR_DIR")]
        data_dir: Option<PathBuf>,
    },
    /// Score a statement with a saved model.
    Predict {
        #[arg(long)]
        load: PathBuf,
        #[arg(long)]
        text: String,
    },
    /// Write a synthetic LIAR-format directory for trying the pipeline.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        train: usize,
        #[arg(long, default_value_t = 500)]
        test: usize,
        #[arg(long, default_value_t = 500)]
        valid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Markdown,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Markdown => ReportFormat::Markdown,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Test,
    Valid,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn load_data(dir: &Path) -> Result<SplitSet> {
    load_liar_dir(dir).with_context(|| format!("loading LIAR data from {}", dir.display()))
}

fn ingest(dir: &Path) -> Result<()> {
    let splits = load_data(dir)?;
    println!("split\trows\tFAKE\tTRUE\tmajority");
    for (name, s) in [
        ("train", &splits.train),
        ("test", &splits.test),
        ("valid", &splits.validation),
    ] {
        let [fake, truth] = class_counts(s);
        let maj = majority_baseline(s).map(format_percent).unwrap_or_else(|_| "NA".into());
        println!("{name}\t{}\t{fake}\t{truth}\t{maj}", s.len());
    }
    Ok(())
}

fn baseline(split: Split, dir: &Path) -> Result<()> {
    let (name, file) = match split {
        Split::Test => ("test", "test.tsv"),
        Split::Valid => ("valid", "valid.tsv"),
    };
    let path = dir.join(file);
    let statements = parse_liar_tsv(&path)?;
    let acc = majority_baseline(&statements)?;
    let [fake, truth] = class_counts(&statements);
    println!(
        "majority baseline ({name}): {} ({} of {} rows)",
        format_percent(acc),
        fake.max(truth),
        statements.len()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run(
    config: &Path,
    only: Vec<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Format,
    data_dir: Option<PathBuf>,
    parallel: bool,
    no_runtime: bool,
) -> Result<ExitCode> {
    let mut cfg = load_config(Some(config))?;
    if !only.is_empty() {
        cfg.only = only;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(d) = data_dir {
        cfg.data_dir = d;
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    cfg.parallel |= parallel;
    cfg.record_runtime &= !no_runtime;
    cfg.validate()?;

    let splits = load_data(&cfg.data_dir)?;
    let grid = run_grid(&cfg, &splits)?;
    let format = ReportFormat::from(format);
    let report = emit_report(&grid, format);
    fs::create_dir_all(&cfg.output_dir).with_context(|| format!("creating {}", cfg.output_dir.display()))?;
    let file = cfg.output_dir.join(match format {
        ReportFormat::Markdown => "report.md",
        ReportFormat::Csv => "report.csv",
    });
    fs::write(&file, &report).with_context(|| format!("writing {}", file.display()))?;
    print!("{report}");
    info!("report written to {}", file.display());
    if grid.failed() > 0 {
        eprintln!("{} of {} cells failed", grid.failed(), grid.cells.len());
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn texts(s: &[Statement]) -> Vec<&str> {
    s.iter().map(|st| st.text.as_str()).collect()
}

fn labels(s: &[Statement]) -> Vec<BinaryLabel> {
    s.iter().map(|st| st.binary_label).collect()
}

fn train(
    model: &str,
    features: &str,
    save: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    data_dir: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let seed = seed.unwrap_or(cfg.seed);
    let spec = CellSpec {
        model: model.parse()?,
        features: features.parse()?,
    };
    let splits = load_data(&data_dir.unwrap_or(cfg.data_dir.clone()))?;
    let (saved, test_acc) = match (spec.model, spec.features) {
        (CellModel::Ann, CellFeatures::Hybrid(v)) => {
            let ensemble = build_hybrid(&splits.train, v, &cfg.ensemble_config(), seed)?;
            let acc = evaluate_hybrid(&ensemble, &splits.test)?;
            (
                SavedModel::Hybrid {
                    ensemble: Box::new(ensemble),
                },
                acc,
            )
        }
        (_, CellFeatures::Hybrid(_)) => bail!("hybrids are trained with --model ann"),
        (model, CellFeatures::Set(set)) => {
            let (featurizer, x) = Featurizer::fit(set, &texts(&splits.train), &cfg.doc2vec, seed)?;
            let data = Dataset::new(x, labels(&splits.train))?;
            let test = Dataset::new(featurizer.transform_all(&texts(&splits.test))?, labels(&splits.test))?;
            match model {
                CellModel::Classical(kind) => {
                    let m = BaseClassifier::fit(kind, &data, &cfg.classical, seed)?;
                    let acc = accuracy(&m, &test)?;
                    (SavedModel::Classical { featurizer, model: m }, acc)
                }
                CellModel::Ann => {
                    let ann_cfg = AnnConfig {
                        input_dim: data.dim(),
                        seed,
                        ..cfg.ann.clone()
                    };
                    let m = ann_train(ann_init(&ann_cfg)?, &data, None)?;
                    let acc = accuracy(&m, &test)?;
                    (SavedModel::Ann { featurizer, model: m }, acc)
                }
            }
        }
    };
    persist::save(save, &saved)?;
    println!(
        "{}:{} test accuracy {} saved to {}",
        spec.model.key(),
        spec.features.key(),
        format_percent(test_acc),
        save.display()
    );
    Ok(())
}

fn predict(load: &Path, text: &str) -> Result<()> {
    let model = persist::load(load).with_context(|| format!("loading model {}", load.display()))?;
    let score = model.score(text)?;
    println!("{}\t{score:.6}", BinaryLabel::from_score(score));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest { data_dir } => ingest(&data_dir).map(|_| ExitCode::SUCCESS),
        Command::Run {
            config,
            only,
            seed,
            out,
            format,
            data_dir,
            parallel,
            no_runtime,
        } => run(&config, only, seed, out, format, data_dir, parallel, no_runtime),
        Command::Baseline { split, data_dir } => baseline(split, &data_dir).map(|_| ExitCode::SUCCESS),
        Command::Train {
            model,
            features,
            save,
            config,
            seed,
            data_dir,
        } => train(&model, &features, &save, config.as_deref(), seed, data_dir).map(|_| ExitCode::SUCCESS),
        Command::Predict { load, text } => predict(&load, &text).map(|_| ExitCode::SUCCESS),
        Command::Synth {
            out,
            train,
            test,
            valid,
            seed,
        } => synth::write_liar_dir(&out, train, test, valid, seed)
            .map(|_| ExitCode::SUCCESS)
            .map_err(Into::into),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
