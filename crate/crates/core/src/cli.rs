//! The `hiersvm` command line.
//!
//! Subcommands mirror the offline pipeline: `generate`/`ingest` produce a
//! feature dataset, `build-tree` picks the tree shape, `train` fits the node
//! models, and `optimize`/`sweep` compress them. `stats` summarizes a model.
//!
//! `--config <file>` reads a TOML file whose top-level keys are global flags
//! and whose `[<subcommand>]` table holds that subcommand's flags, spelled
//! as on the command line (`depth-limit = 3`, `exact = true`). Flags given
//! on the command line win over the file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{self, CsvSchema, LabeledDataset, SynthSpec, WindowSpec};
use crate::error::{Error, Result};
use crate::eval::{self, ReportFormat, SweepConfig};
use crate::format::{self, Layout};
use crate::moc;
use crate::svm::TrainConfig;
use crate::tree::{self, ActivityClass, ClassifierTree, TreeBuildConfig};

const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "hiersvm", version, about = "Hierarchical SVM construction and support-vector sharing")]
#[command(args_override_self = true)]
struct Cli {
    /// Seed for synthetic data and the train/test split.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output path of the subcommand's artifact.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// TOML file with default flag values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a seeded synthetic feature dataset.
    Generate(GenerateArgs),
    /// Window a sensor CSV recording into a feature dataset.
    Ingest(IngestArgs),
    /// Build the tree shape from class probabilities.
    BuildTree(BuildTreeArgs),
    /// Train an SVM at every internal node.
    Train(TrainArgs),
    /// Share support vectors within one radius.
    Optimize(OptimizeArgs),
    /// Sweep the sharing radius and report savings against accuracy.
    Sweep(SweepArgs),
    /// Print tree statistics.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct GenerateArgs {
    #[arg(long, default_value_t = 6)]
    classes: usize,
    #[arg(long, default_value_t = 8)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1.0)]
    spread: f64,
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    /// TOML synthetic spec (may list explicit class means); replaces the
    /// shape flags above.
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = data::DEFAULT_CHANNELS.map(String::from))]
    channels: Vec<String>,
    /// Sampling rate in Hz.
    #[arg(long, default_value_t = data::DEFAULT_SAMPLE_RATE)]
    rate: f64,
    /// Window length in samples (default: two seconds).
    #[arg(long)]
    window: Option<usize>,
    /// Window stride in samples (default: one second).
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct BuildTreeArgs {
    /// Class probabilities, as percents or fractions.
    #[arg(long, value_delimiter = ',', required = true)]
    probs: Vec<f64>,
    #[arg(long)]
    depth_limit: Option<usize>,
    /// Dataset whose sorted class ids label the leaves (default `0..n`).
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SvmFlags {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_passes: usize,
}

impl SvmFlags {
    fn config(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            kkt_tolerance: self.tol,
            max_passes: self.max_passes,
        }
    }
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct TrainArgs {
    #[arg(long, default_value = "tree.model")]
    model: PathBuf,
    #[arg(long, default_value = "data.csv")]
    data: PathBuf,
    #[command(flatten)]
    svm: SvmFlags,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct OptimizeArgs {
    #[arg(long, default_value = "tree.model")]
    model: PathBuf,
    #[arg(long, default_value = "data.csv")]
    data: PathBuf,
    #[arg(long)]
    epsilon: f64,
    /// Solve the cover exactly (small instances only).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = moc::DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
    #[command(flatten)]
    svm: SvmFlags,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct SweepArgs {
    #[arg(long, default_value = "tree.model")]
    model: PathBuf,
    #[arg(long, default_value = "data.csv")]
    data: PathBuf,
    /// Explicit radius grid; defaults to an adaptive grid from 0.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = eval::DEFAULT_GRID_POINTS)]
    points: usize,
    /// Minimum acceptable accuracy in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    floor: f64,
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = moc::DEFAULT_EXACT_LIMIT)]
    exact_limit: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[command(flatten)]
    svm: SvmFlags,
}

#[derive(Debug, Args)]
#[command(args_override_self = true)]
struct StatsArgs {
    #[arg(long, default_value = "tree.model")]
    model: PathBuf,
    /// Also report held-out accuracy on this dataset.
    #[arg(long)]
    data: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 7] = [
    "generate",
    "ingest",
    "build-tree",
    "train",
    "optimize",
    "sweep",
    "stats",
];

/// Inserts flags from `--config` right after the subcommand name so that
/// explicit flags, which come later, override them.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let Some(sub_at) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidConfig(format!("{path}: {e}")))?;

    let mut extra = Vec::new();
    let mut push = |key: &str, value: &toml::Value| -> Result<()> {
        let flag = format!("--{}", key.replace('_', "-"));
        let rendered = match value {
            toml::Value::Boolean(true) => {
                extra.push(OsString::from(flag));
                return Ok(());
            }
            toml::Value::Boolean(false) => return Ok(()),
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => {
                return Err(Error::InvalidConfig(format!(
                    "{path}: unsupported value for {key}: {other}"
                )))
            }
        };
        extra.push(OsString::from(flag));
        extra.push(OsString::from(rendered));
        Ok(())
    };
    for (key, value) in &table {
        if !value.is_table() {
            push(key, value)?;
        }
    }
    if let Some(toml::Value::Table(sub)) = table.get(&strs[sub_at]) {
        for (key, value) in sub {
            push(key, value)?;
        }
    }
    let mut out = argv;
    out.splice(sub_at + 1..sub_at + 1, extra);
    Ok(out)
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on a pipeline failure (or a sweep where no radius meets the floor),
/// 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn output_or(cli_output: &Option<PathBuf>, default: &str) -> PathBuf {
    cli_output.clone().unwrap_or_else(|| PathBuf::from(default))
}

/// Loads a model; untrained shapes are trained on the dataset's split.
fn trained_tree(
    model: &Path,
    data: &LabeledDataset,
    split: &data::Split,
    svm: &TrainConfig,
) -> Result<ClassifierTree> {
    let tree = format::load_tree(model)?;
    check_classes(&tree, data)?;
    if tree.is_trained() {
        return Ok(tree);
    }
    let trained = tree::attach_classifiers(&tree, &split.train, svm)?;
    println!("train: {} internal nodes trained", trained.internal_nodes().count());
    Ok(trained)
}

fn check_classes(tree: &ClassifierTree, data: &LabeledDataset) -> Result<()> {
    let mut ids: Vec<usize> = tree.classes().iter().map(|c| c.id).collect();
    ids.sort_unstable();
    if ids != data.class_ids() {
        return Err(Error::Arity {
            expected: data.classes.len(),
            got: ids.len(),
        });
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    match cli.command {
        Command::Generate(args) => {
            let mut spec = match &args.spec {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    toml::from_str::<SynthSpec>(&text)
                        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", p.display())))?
                }
                None => SynthSpec {
                    n_classes: args.classes,
                    dimension: args.dim,
                    means: None,
                    spread: args.spread,
                    separation: args.separation,
                    samples_per_class: args.samples,
                    seed,
                },
            };
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let ds = data::synth_generate(&spec)?;
            let out = output_or(&cli.output, "data.csv");
            ds.save(&out)?;
            println!(
                "generate: {} samples, {} classes, dimension {} -> {}",
                ds.len(),
                ds.classes.len(),
                ds.dimension(),
                out.display()
            );
        }
        Command::Ingest(args) => {
            let schema = CsvSchema {
                channels: args.channels,
                sample_rate: args.rate,
            };
            let rec = data::load_csv(&args.input, &schema)?;
            let default = WindowSpec::for_rate(args.rate);
            let spec = WindowSpec {
                length: args.window.unwrap_or(default.length),
                stride: args.stride.unwrap_or(default.stride),
            };
            let ds = data::extract_features(&rec, &spec)?;
            let out = output_or(&cli.output, "data.csv");
            ds.save(&out)?;
            println!(
                "ingest: {} samples -> {} windows of {} features -> {}",
                rec.len(),
                ds.len(),
                ds.dimension(),
                out.display()
            );
        }
        Command::BuildTree(args) => {
            let ids = match &args.data {
                Some(p) => LabeledDataset::load(p)?.class_ids(),
                None => (0..args.probs.len()).collect(),
            };
            if ids.len() != args.probs.len() {
                return Err(Error::Arity {
                    expected: ids.len(),
                    got: args.probs.len(),
                });
            }
            let classes = ActivityClass::with_ids(&ids, &args.probs)?;
            let cfg = TreeBuildConfig {
                depth_limit: args.depth_limit,
                ..TreeBuildConfig::default()
            };
            let t = tree::build(&classes, &cfg)?;
            let out = output_or(&cli.output, "tree.model");
            format::save_tree(&t, &out, Layout::PerNode)?;
            let stats = tree::tree_stats(&t);
            println!(
                "build-tree: depth {} E(I) {} topology {} -> {}",
                stats.depth,
                stats.expected_instructions,
                t.topology(),
                out.display()
            );
        }
        Command::Train(args) => {
            let ds = LabeledDataset::load(&args.data)?;
            let t = format::load_tree(&args.model)?;
            check_classes(&t, &ds)?;
            let split = data::stratified_split(&ds, seed)?;
            let trained = tree::attach_classifiers(&t, &split.train, &args.svm.config())?;
            let out = output_or(&cli.output, "trained.model");
            format::save_tree(&trained, &out, Layout::PerNode)?;
            let stats = tree::tree_stats(&trained);
            println!(
                "train: {} nodes, {} support vectors, overlap {:.2}%, test accuracy {:.4} -> {}",
                stats.node_support_counts.len(),
                stats.node_support_counts.iter().sum::<usize>(),
                stats.initial_overlap_pct.unwrap_or(0.0),
                eval::accuracy(&trained, &split.test)?,
                out.display()
            );
        }
        Command::Optimize(args) => {
            let ds = LabeledDataset::load(&args.data)?;
            let split = data::stratified_split(&ds, seed)?;
            let t = trained_tree(&args.model, &ds, &split, &args.svm.config())?;
            let isvs = moc::collect_initial_svs(&t)?;
            let pool = moc::candidate_pool(&split.train.features, &isvs);
            let cov = moc::enumerate_secondary(&isvs, &pool, args.epsilon)?;
            let sel = if args.exact {
                moc::exact_moc(&cov, args.exact_limit)?
            } else {
                moc::greedy_moc(&cov)?
            };
            let rebuilt = moc::rebuild_models(&t, &sel, &pool, &split.train)?;
            let report = moc::savings(&t, &sel)?;
            let out = output_or(&cli.output, "optimized.model");
            format::save_tree(&rebuilt, &out, Layout::SharedPool)?;
            println!(
                "optimize: epsilon {} stored {} -> {} ({:.2}% saved, {} shared), accuracy {:.4} -> {:.4} -> {}",
                args.epsilon,
                report.initial_stored,
                report.final_stored,
                report.savings_pct,
                report.overlap_count,
                eval::accuracy(&t, &split.test)?,
                eval::accuracy(&rebuilt, &split.test)?,
                out.display()
            );
        }
        Command::Sweep(args) => {
            let ds = LabeledDataset::load(&args.data)?;
            let split = data::stratified_split(&ds, seed)?;
            let t = trained_tree(&args.model, &ds, &split, &args.svm.config())?;
            let grid = match args.grid {
                Some(g) => g,
                None => eval::default_grid(&t, args.points)?,
            };
            let cfg = SweepConfig {
                epsilon_grid: grid,
                accuracy_floor: args.floor,
                exact_oracle: args.exact,
                split_seed: seed,
                exact_limit: args.exact_limit,
            };
            let report = eval::sweep_epsilon(&t, &split, &cfg)?;
            let (format, default) = match args.format {
                FormatArg::Csv => (ReportFormat::Csv, "sweep.csv"),
                FormatArg::Text => (ReportFormat::Text, "sweep.toml"),
            };
            let out = output_or(&cli.output, default);
            eval::emit_report(&report, &out, format)?;
            let best = report
                .records
                .iter()
                .filter(|r| r.meets_floor)
                .max_by(|a, b| a.savings_pct.total_cmp(&b.savings_pct));
            match best {
                Some(r) => println!(
                    "sweep: {} radii, best savings {:.2}% at epsilon {} (accuracy {:.4}) -> {}",
                    report.records.len(),
                    r.savings_pct,
                    r.epsilon,
                    r.accuracy,
                    out.display()
                ),
                None => {
                    println!(
                        "sweep: {} radii, none reaches accuracy {} -> {}",
                        report.records.len(),
                        args.floor,
                        out.display()
                    );
                    return Ok(1);
                }
            }
        }
        Command::Stats(args) => {
            let t = format::load_tree(&args.model)?;
            let stats = tree::tree_stats(&t);
            let overlap = stats
                .initial_overlap_pct
                .map_or_else(|| "n/a".to_string(), |o| format!("{o:.2}%"));
            let stored = format::vector_pool(&t).len();
            let mut line = format!(
                "stats: classes {} depth {} E(I) {} overlap {} stored vectors {}",
                t.classes().len(),
                stats.depth,
                stats.expected_instructions,
                overlap,
                stored
            );
            if let Some(p) = &args.data {
                let ds = LabeledDataset::load(p)?;
                let split = data::stratified_split(&ds, seed)?;
                line.push_str(&format!(" accuracy {:.4}", eval::accuracy(&t, &split.test)?));
            }
            println!("{line}");
            if let Some(out) = &cli.output {
                let text = toml::to_string(&stats).expect("stats serialize as TOML");
                data::write_text(out, &text)?;
            }
        }
    }
    Ok(0)
}
