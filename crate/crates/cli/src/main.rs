//! Pipeline front end. Stages exchange plain text files (counts,
//! distributions, kernels) so the expensive ones can be cached and
//! re-run independently; `eval` runs the whole pipeline in one go.
//! Every command is byte-reproducible given the same flags and seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use smoothlet::{
    build_catalog, build_dag, cross_validate_gram, enumerate_connected_subgraphs,
    export_precomputed_kernel, gram_matrix, load_catalog, load_counts, load_distributions,
    powerlaw_table, save_catalog, save_counts, save_distributions, BaseMode, CountSource,
    Distribution, Error, EvalReport, FeatureConfig, GraphCollection, GraphletCatalog,
    GraphletDag, PypConfig, Result, SampleMethod, SmoothMethod, DISCOUNT_GRID,
};

#[derive(Parser)]
#[command(
    name = "smoothlet",
    version,
    about = "Graph classification with smoothed graphlet-distribution kernels",
    long_about = "Counts connected induced subgraphs against a catalog of graphlet types, \
                  smooths the resulting frequency distributions using the catalog's \
                  vertex-deletion structure, and evaluates the induced kernels with a \
                  cross-validated SVM.\n\nCatalogs are cached under $SMOOTHLET_CATALOG_DIR \
                  (default ./catalogs) and rebuilt on demand."
)]
struct Cli {
    /// Cap on worker threads (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the graphlet catalog and deletion DAG, print level sizes
    Catalog(CatalogArgs),
    /// Count connected induced k-subgraphs of every graph
    Count(CountArgs),
    /// Estimate smoothed distributions from a counts file
    Smooth(SmoothArgs),
    /// Export a precomputed kernel matrix from a distributions file
    Kernel(KernelArgs),
    /// Cross-validated SVM accuracy, one RESULT line per run
    Eval(EvalArgs),
    /// Rank-frequency table of one graph's exhaustive counts
    Plotdata(PlotdataArgs),
}

#[derive(Args)]
struct CatalogArgs {
    /// Largest graphlet size to catalog (3..=8)
    #[arg(long, value_parser = clap::value_parser!(u8).range(3..=8))]
    kmax: u8,
    /// Output file (default: the cache location)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    /// TU-format dataset directory, or a single edge-list file
    #[arg(long)]
    dataset: PathBuf,
    /// Graphlet size
    #[arg(short, long, value_parser = clap::value_parser!(u8).range(2..=8))]
    k: u8,
    /// Subgraph samples per graph
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "exhaustive")]
    samples: u64,
    /// Enumerate every subgraph instead of sampling
    #[arg(long)]
    exhaustive: bool,
    /// Sampling scheme: expand grows neighborhoods (fast, biased toward
    /// dense regions); reject draws uniform subsets (unbiased, slow on
    /// sparse graphs)
    #[arg(long, value_enum, default_value_t = SamplerFlag::Expand)]
    sampler: SamplerFlag,
    /// Base RNG seed; each graph derives its own stream
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Counts file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SmoothArgs {
    /// Counts file from `count`
    #[arg(long)]
    counts: PathBuf,
    /// Counts one level below, for the structural fallback (skn)
    #[arg(long)]
    lower: Option<PathBuf>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Seed for the seating sampler (pyp)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Distributions file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KernelArgs {
    /// Distributions file from `smooth`
    #[arg(long)]
    vectors: PathBuf,
    /// Dataset the vectors came from (provides the labels)
    #[arg(long)]
    dataset: PathBuf,
    /// Precomputed-kernel file to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// TU-format dataset directory, or a single edge-list file
    #[arg(long)]
    dataset: PathBuf,
    /// Graphlet size(s), comma separated (e.g. 3,4,5 for a size sweep)
    #[arg(short, long, value_delimiter = ',', required = true)]
    k: Vec<u8>,
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// Evaluate every discount on the built-in grid and mark the best row
    #[arg(long, conflicts_with = "d")]
    d_grid: bool,
    /// Subgraph samples per graph
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "exhaustive")]
    samples: u64,
    /// Enumerate every subgraph instead of sampling
    #[arg(long)]
    exhaustive: bool,
    /// Sampling scheme (see `count --help`)
    #[arg(long, value_enum, default_value_t = SamplerFlag::Expand)]
    sampler: SamplerFlag,
    /// Cross-validation folds
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    folds: u64,
    /// SVM regularization constant
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Seed for sampling, seating, and the fold split
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotdataArgs {
    /// TU-format dataset directory, or a single edge-list file
    #[arg(long)]
    dataset: PathBuf,
    /// Graph index within the dataset
    #[arg(long, default_value_t = 0)]
    graph: usize,
    /// Graphlet size
    #[arg(short, long, value_parser = clap::value_parser!(u8).range(2..=8))]
    k: u8,
    /// Also write the table to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Estimator flags shared by `smooth` and `eval`.
#[derive(Args)]
struct EstimatorArgs {
    /// Estimator for the graphlet distribution
    #[arg(long, value_enum)]
    method: MethodFlag,
    /// Discount (kn/skn/pyp; defaults: 1 for kn/skn, 0.5 for pyp)
    #[arg(long)]
    d: Option<f64>,
    /// Fallback construction for skn
    #[arg(long, value_enum, default_value_t = BaseFlag::ParentMle)]
    base: BaseFlag,
    /// Keep the raw discounted estimate instead of rescaling to sum 1
    #[arg(long)]
    no_renormalize: bool,
    /// Strength parameter of the seating process (pyp)
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Seating sweeps after burn-in (pyp)
    #[arg(long, default_value_t = 100)]
    sweeps: u32,
    /// Discarded initial seating sweeps (pyp)
    #[arg(long, default_value_t = 50)]
    burn_in: u32,
    /// Sweeps averaged into the final estimate (pyp)
    #[arg(long, default_value_t = 10)]
    avg_last: u32,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodFlag {
    Mle,
    Laplace,
    Kn,
    Skn,
    Pyp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerFlag {
    Expand,
    Reject,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaseFlag {
    ParentMle,
    Recursive,
}

impl EstimatorArgs {
    fn smooth_method(&self, seed: u64) -> SmoothMethod {
        match self.method {
            MethodFlag::Mle => SmoothMethod::Mle,
            MethodFlag::Laplace => SmoothMethod::Laplace,
            MethodFlag::Kn => SmoothMethod::KneserNey {
                d: self.d.unwrap_or(1.0),
            },
            MethodFlag::Skn => SmoothMethod::StructuralKneserNey {
                d: self.d.unwrap_or(1.0),
            },
            MethodFlag::Pyp => SmoothMethod::PitmanYor(PypConfig {
                d: self.d.unwrap_or(0.5),
                theta: self.theta,
                sweeps: self.sweeps as usize,
                burn_in: self.burn_in as usize,
                avg_last: self.avg_last as usize,
                seed,
            }),
        }
    }

    fn base_mode(&self) -> BaseMode {
        match self.base {
            BaseFlag::ParentMle => BaseMode::ParentMle,
            BaseFlag::Recursive => BaseMode::Recursive,
        }
    }
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        // a later duplicate build_global is harmless, the first pool wins
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers as usize)
            .build_global();
    }
    if let Err(e) = run(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(match e {
            Error::InvalidArgument(_) => 2,
            Error::Format(_) | Error::Io { .. } => 3,
            _ => 4,
        });
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Catalog(args) => cmd_catalog(args),
        Command::Count(args) => cmd_count(args),
        Command::Smooth(args) => cmd_smooth(args),
        Command::Kernel(args) => cmd_kernel(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Plotdata(args) => cmd_plotdata(args),
    }
}

fn catalog_cache_dir() -> PathBuf {
    std::env::var_os("SMOOTHLET_CATALOG_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("catalogs"))
}

fn cache_path(kmax: u8) -> PathBuf {
    catalog_cache_dir().join(format!("catalog_k{kmax}.txt"))
}

/// Catalog covering levels up to `k`, from the cache when present.
fn obtain_catalog(k: u8) -> Result<(GraphletCatalog, GraphletDag)> {
    let kmax = k.max(3);
    let path = cache_path(kmax);
    if path.exists() {
        return load_catalog(&path);
    }
    let catalog = build_catalog(kmax)?;
    let dag = build_dag(&catalog);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    save_catalog(&catalog, &dag, &path)?;
    Ok((catalog, dag))
}

fn load_input(path: &Path) -> Result<GraphCollection> {
    if path.is_dir() {
        let name = path
            .file_name()
            .and_then(|s| s.to_str())
            .ok_or_else(|| {
                Error::InvalidArgument(format!("cannot derive a dataset name from {path:?}"))
            })?
            .to_string();
        smoothlet::parse_tu_dataset(path, &name)
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let graph = smoothlet::parse_edge_list(&text)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("graph")
            .to_string();
        Ok(GraphCollection {
            graphs: vec![graph],
            labels: vec![0],
            name,
        })
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_catalog(args: CatalogArgs) -> Result<()> {
    let catalog = build_catalog(args.kmax)?;
    let dag = build_dag(&catalog);
    let path = args.out.unwrap_or_else(|| cache_path(args.kmax));
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    save_catalog(&catalog, &dag, &path)?;
    let sizes: Vec<String> = (2..=args.kmax)
        .map(|k| format!("{k}:{}", catalog.level_size(k)))
        .collect();
    println!("{}", sizes.join(" "));
    Ok(())
}

fn count_source(samples: u64, exhaustive: bool, sampler: SamplerFlag, seed: u64) -> CountSource {
    if exhaustive {
        CountSource::Exhaustive
    } else {
        CountSource::Sampled {
            n_samples: samples as usize,
            method: match sampler {
                SamplerFlag::Expand => SampleMethod::Expand,
                SamplerFlag::Reject => SampleMethod::Reject,
            },
            seed,
        }
    }
}

fn cmd_count(args: CountArgs) -> Result<()> {
    let coll = load_input(&args.dataset)?;
    let (catalog, _) = obtain_catalog(args.k)?;
    let source = count_source(args.samples, args.exhaustive, args.sampler, args.seed);
    let counts = smoothlet::count_collection(&coll, args.k, source, &catalog)?;
    save_counts(&counts, &args.out)?;
    println!(
        "counted {} graphs at size {} -> {}",
        counts.len(),
        args.k,
        args.out.display()
    );
    Ok(())
}

fn cmd_smooth(args: SmoothArgs) -> Result<()> {
    let counts_head = peek_level(&args.counts)?;
    let (catalog, dag) = obtain_catalog(counts_head)?;
    let counts = load_counts(&args.counts, &catalog)?;
    let level = match counts.first() {
        Some(v) => v.level,
        None => {
            return Err(Error::Format(format!(
                "{}: no count vectors",
                args.counts.display()
            )))
        }
    };
    if counts.iter().any(|v| v.level != level) {
        return Err(Error::Format(format!(
            "{}: mixed levels in one counts file",
            args.counts.display()
        )));
    }
    let lower = match &args.lower {
        Some(path) => Some(load_counts(path, &catalog)?),
        None => None,
    };
    if args.estimator.method == MethodFlag::Skn && lower.is_none() {
        return Err(Error::InvalidArgument(
            "--method skn needs --lower with counts for the fallback level".into(),
        ));
    }
    let config = FeatureConfig {
        level,
        source: CountSource::Exhaustive, // counts already on disk
        method: args.estimator.smooth_method(args.seed),
        renormalize: !args.estimator.no_renormalize,
        base: args.estimator.base_mode(),
    };
    let features =
        smoothlet::features_from_counts(&counts, lower.as_deref(), &config, &dag)?;
    let dists: Vec<Distribution> = features
        .into_iter()
        .map(|probs| Distribution { level, probs })
        .collect();
    save_distributions(&dists, &args.out)?;
    println!(
        "smoothed {} graphs with {} -> {}",
        dists.len(),
        config.method_name(),
        args.out.display()
    );
    Ok(())
}

/// Level named on the first counts line, to know which catalog to load.
fn peek_level(path: &Path) -> Result<u8> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for line in text.lines() {
        let mut it = line.split_whitespace();
        let (Some(_idx), Some(level)) = (it.next(), it.next()) else {
            continue;
        };
        return level
            .parse()
            .map_err(|_| Error::Format(format!("{}: bad level {level:?}", path.display())));
    }
    Err(Error::Format(format!(
        "{}: no count vectors",
        path.display()
    )))
}

fn cmd_kernel(args: KernelArgs) -> Result<()> {
    let coll = load_input(&args.dataset)?;
    let level = peek_level(&args.vectors)?;
    let (catalog, _) = obtain_catalog(level)?;
    let dists = load_distributions(&args.vectors, &catalog)?;
    let features: Vec<Vec<f64>> = dists.into_iter().map(|d| d.probs).collect();
    let km = gram_matrix(&features, None)?;
    export_precomputed_kernel(&km, &coll.labels, &args.out)?;
    println!("{}x{} kernel -> {}", km.n, km.n, args.out.display());
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    if args.d_grid && !matches!(args.estimator.method, MethodFlag::Kn | MethodFlag::Skn) {
        return Err(Error::InvalidArgument(
            "--d-grid applies to the discounting methods (kn, skn)".into(),
        ));
    }
    let coll = load_input(&args.dataset)?;
    let source = count_source(args.samples, args.exhaustive, args.sampler, args.seed);
    let folds = args.folds as usize;
    let mut report = String::new();
    for &k in &args.k {
        let (catalog, dag) = obtain_catalog(k)?;
        let config = FeatureConfig {
            level: k,
            source,
            method: args.estimator.smooth_method(args.seed),
            renormalize: !args.estimator.no_renormalize,
            base: args.estimator.base_mode(),
        };
        if args.d_grid {
            // count once, smooth per grid point
            let (upper, lower) = smoothlet::collection_counts(&coll, &config, &catalog)?;
            let mut best: Option<EvalReport> = None;
            for &d in DISCOUNT_GRID.iter() {
                let config = FeatureConfig {
                    method: match args.estimator.method {
                        MethodFlag::Kn => SmoothMethod::KneserNey { d },
                        _ => SmoothMethod::StructuralKneserNey { d },
                    },
                    ..config
                };
                let features =
                    smoothlet::features_from_counts(&upper, lower.as_deref(), &config, &dag)?;
                let km = gram_matrix(&features, Some(config))?;
                let cv = cross_validate_gram(&km, &coll.labels, folds, args.c, args.seed)?;
                let run = EvalReport {
                    dataset: coll.name.clone(),
                    level: k,
                    method: config.method_name().to_string(),
                    d: Some(d),
                    fold_accuracies: cv.fold_accuracies,
                    mean: cv.mean,
                    std: cv.std,
                };
                emit_report(&mut report, &run);
                if best.as_ref().is_none_or(|b| run.mean > b.mean) {
                    best = Some(run);
                }
            }
            let best = best.expect("grid is never empty");
            let _ = writeln!(report, "BEST [test-set-selected] {}", best.result_line());
        } else {
            let run = smoothlet::cross_validate(
                &coll, &config, folds, args.c, args.seed, &catalog, &dag,
            )?;
            emit_report(&mut report, &run);
        }
    }
    print!("{report}");
    if let Some(out) = &args.out {
        write_text(out, &report)?;
    }
    Ok(())
}

fn emit_report(buf: &mut String, run: &EvalReport) {
    let folds: Vec<String> = run
        .fold_accuracies
        .iter()
        .map(|a| format!("{a:.2}"))
        .collect();
    let _ = writeln!(buf, "# folds: {}", folds.join(" "));
    let _ = writeln!(buf, "{}", run.result_line());
}

fn cmd_plotdata(args: PlotdataArgs) -> Result<()> {
    let coll = load_input(&args.dataset)?;
    let graph = coll.graphs.get(args.graph).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "graph index {} out of range for {} graphs",
            args.graph,
            coll.graphs.len()
        ))
    })?;
    let (catalog, _) = obtain_catalog(args.k)?;
    let counts = enumerate_connected_subgraphs(graph, args.k, &catalog)?;
    let table = powerlaw_table(&counts)?;
    let mut text = String::new();
    for (rank, freq) in table {
        let _ = writeln!(text, "{rank} {freq}");
    }
    print!("{text}");
    if let Some(out) = &args.out {
        write_text(out, &text)?;
    }
    Ok(())
}
