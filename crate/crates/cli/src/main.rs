mod manifest;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use cgfam::clustering::{classify, dbscan, kmedoids, Clustering, DbscanConfig, Init, KMedoidsConfig, PointClass};
use cgfam::ged::AnnealConfig;
use cgfam::graph::{graph_stats, is_graph_file, load_graph_file, read_families_csv, validate_conventions, GraphCorpus, ParseOptions};
use cgfam::quality::{kdist_csv, kdist_curve, kdist_knee, cluster_purity, frequency_table, silhouette, sum_of_error, QualityReport};
use cgfam::simmatrix::{compute_matrix_with, load_matrix, save_matrix, MatcherMode};
use cgfam::synth::{generate_corpus, SynthConfig};
use cgfam::DistanceMatrix;

use manifest::{beside, RunManifest};

#[derive(Parser)]
#[command(name = "cgfam", version, about = "Call-graph similarity and malware family clustering")]
struct Cli {
    /// Seed for every stochastic step; a random seed is chosen and printed
    /// when omitted.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse graph files and report statistics and warnings.
    Validate {
        /// Graph files or directories of graph files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Merge repeated external names instead of rejecting them.
        #[arg(long)]
        merge_externals: bool,
    },
    /// Generate a synthetic corpus with planted families.
    Synth(SynthArgs),
    /// Compute the pairwise dissimilarity matrix of a corpus directory.
    Simmatrix(SimmatrixArgs),
    /// Cluster a dissimilarity matrix.
    Cluster {
        #[command(subcommand)]
        algorithm: ClusterCommand,
    },
    /// Validity metrics of a clustering.
    Quality(QualityArgs),
    /// Run clustering over a parameter range and tabulate the metrics.
    Sweep {
        #[command(subcommand)]
        algorithm: SweepCommand,
    },
}

#[derive(Args, Serialize)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    families: usize,
    /// Members per family as `MIN,MAX`.
    #[arg(long, default_value = "3,10", value_parser = parse_pair)]
    family_size: (usize, usize),
    /// Explicit members per family, e.g. `10,8,2`; overrides `--families`
    /// and `--family-size`.
    #[arg(long, value_delimiter = ',')]
    family_sizes: Option<Vec<usize>>,
    /// Base graph order as `MIN,MAX`.
    #[arg(long, default_value = "30,80", value_parser = parse_pair)]
    order: (usize, usize),
    #[arg(long, default_value_t = 2.1)]
    edge_factor: f64,
    #[arg(long, default_value_t = 0.3)]
    external_fraction: f64,
    #[arg(long, default_value_t = 3)]
    mutations: usize,
    /// Chain mutations from member to member instead of from the base.
    #[arg(long)]
    generational: bool,
}

#[derive(Args)]
struct SimmatrixArgs {
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// `key = value` annealing configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Exhaustive search for every pair (small graphs only).
    #[arg(long)]
    exact: bool,
    #[arg(long)]
    merge_externals: bool,
    #[arg(long)]
    initial_temperature: Option<f64>,
    #[arg(long)]
    cooling_factor: Option<f64>,
    /// Moves per temperature, or `auto`.
    #[arg(long)]
    steps_per_temperature: Option<String>,
    #[arg(long)]
    minimum_temperature: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    structural_seed: Option<bool>,
    #[arg(long)]
    exact_max_order: Option<usize>,
}

#[derive(Subcommand)]
enum ClusterCommand {
    Kmedoids {
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        k: usize,
        /// `random`, `plusplus` or `trained:<file>` (one medoid label per line).
        #[arg(long, default_value = "plusplus")]
        init: String,
        /// Independent runs; the lowest objective is kept.
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        max_iterations: usize,
    },
    Dbscan {
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        minpts: usize,
        #[arg(long)]
        rad: f64,
        /// `--rad` is given in units of `scale * sigma`.
        #[arg(long, default_value_t = 1.0)]
        distance_scale: f64,
    },
}

#[derive(Args)]
struct QualityArgs {
    matrix: PathBuf,
    /// Assignment CSV, or a directory written by `cluster`.
    clustering: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    medoids: Option<PathBuf>,
    /// `label,family` CSV for the frequency table and purity.
    #[arg(long)]
    families: Option<PathBuf>,
    /// Exponents p of the sum of error.
    #[arg(long, value_delimiter = ',')]
    se: Vec<u32>,
    #[arg(long, default_value_t = 100.0)]
    se_scale: f64,
    /// Neighbour ranks for k-dist curves.
    #[arg(long, value_delimiter = ',')]
    kdist: Vec<usize>,
}

#[derive(Subcommand)]
enum SweepCommand {
    Kmedoids {
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Values of k: `2..10` (inclusive) or a list `2,4,8`.
        #[arg(long, value_parser = parse_usize_range)]
        k: Grid,
        #[arg(long, default_value = "plusplus")]
        init: String,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        se: Vec<u32>,
        #[arg(long, default_value_t = 100.0)]
        se_scale: f64,
    },
    Dbscan {
        matrix: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// `A..B` (inclusive) or a list.
        #[arg(long, value_parser = parse_usize_range)]
        minpts: Grid,
        #[arg(long, value_delimiter = ',', required = true)]
        rad: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        distance_scale: f64,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected MIN,MAX, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Clone)]
struct Grid(Vec<usize>);

/// `A..B` (inclusive) or a comma-separated list.
fn parse_usize_range(s: &str) -> Result<Grid, String> {
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty range {s:?}"));
        }
        return Ok(Grid((a..=b).collect()));
    }
    s.split(',').map(parse).collect::<Result<_, _>>().map(Grid)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

fn load(path: &Path) -> Result<DistanceMatrix> {
    load_matrix(path).with_context(|| format!("cannot load matrix {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("cgfam: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { paths, merge_externals } => validate(&paths, merge_externals),
        Command::Synth(args) => synth(args, cli.seed).map(|_| ExitCode::SUCCESS),
        Command::Simmatrix(args) => simmatrix(args, cli.seed).map(|_| ExitCode::SUCCESS),
        Command::Cluster { algorithm } => cluster(algorithm, cli.seed).map(|_| ExitCode::SUCCESS),
        Command::Quality(args) => quality(args).map(|_| ExitCode::SUCCESS),
        Command::Sweep { algorithm } => sweep(algorithm, cli.seed).map(|_| ExitCode::SUCCESS),
    }
}

fn validate(paths: &[PathBuf], merge_externals: bool) -> Result<ExitCode> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut inside: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("cannot read {}", path.display()))?
                .map(|e| e.map(|e| e.path()))
                .collect::<Result<_, _>>()?;
            inside.sort();
            files.extend(inside.into_iter().filter(|p| p.is_file() && is_graph_file(p)));
        } else {
            files.push(path.clone());
        }
    }
    let opts = ParseOptions {
        merge_duplicate_externals: merge_externals,
        default_label: None,
    };
    let mut failed = 0;
    for file in &files {
        match load_graph_file(file, &opts) {
            Ok(g) => {
                println!("OK {}: {}", file.display(), graph_stats(&g));
                for w in validate_conventions(&g) {
                    println!("  warning: {w}");
                }
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {e}");
            }
        }
    }
    println!("{} files, {failed} failed", files.len());
    Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn synth(args: SynthArgs, seed: Option<u64>) -> Result<()> {
    let cfg = SynthConfig {
        families: args.families,
        family_size_range: args.family_size,
        family_sizes: args.family_sizes.clone(),
        base_order_range: args.order,
        edge_factor: args.edge_factor,
        external_fraction: args.external_fraction,
        mutations_per_generation: args.mutations,
        generational: args.generational,
        seed: resolve_seed(seed),
    };
    let corpus = generate_corpus(&cfg)?;
    corpus.write_dir(&args.out)?;
    let mut m = RunManifest::new("synth", Some(cfg.seed), &cfg);
    for label in corpus.labels() {
        m.record(&args.out.join(format!("{label}.json")));
    }
    m.record(&args.out.join("families.csv"));
    m.write(&args.out.join("synth.manifest.json"))?;
    println!("wrote {} graphs to {}", corpus.len(), args.out.display());
    Ok(())
}

fn anneal_config(args: &SimmatrixArgs, seed: Option<u64>) -> Result<AnnealConfig> {
    let mut cfg = AnnealConfig::default();
    let mut file_seed = false;
    if let Some(path) = &args.config {
        let text = read(path)?;
        cfg.apply_key_values(&text).with_context(|| format!("in {}", path.display()))?;
        file_seed = text
            .lines()
            .filter_map(|l| l.split('#').next()?.split_once('='))
            .any(|(k, _)| k.trim() == "seed");
    }
    let mut set = |key: &str, value: Option<String>| -> Result<()> {
        if let Some(v) = value {
            cfg.set(key, &v).with_context(|| format!("--{}", key.replace('_', "-")))?;
        }
        Ok(())
    };
    set("initial_temperature", args.initial_temperature.map(|v| v.to_string()))?;
    set("cooling_factor", args.cooling_factor.map(|v| v.to_string()))?;
    set("steps_per_temperature", args.steps_per_temperature.clone())?;
    set("minimum_temperature", args.minimum_temperature.map(|v| v.to_string()))?;
    set("restarts", args.restarts.map(|v| v.to_string()))?;
    set("structural_seed", args.structural_seed.map(|v| v.to_string()))?;
    set("exact_max_order", args.exact_max_order.map(|v| v.to_string()))?;
    if seed.is_some() || !file_seed {
        cfg.seed = resolve_seed(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn simmatrix(args: SimmatrixArgs, seed: Option<u64>) -> Result<()> {
    let cfg = anneal_config(&args, seed)?;
    let opts = ParseOptions {
        merge_duplicate_externals: args.merge_externals,
        default_label: None,
    };
    let corpus = GraphCorpus::load_dir(&args.corpus, &opts)?;
    ensure!(!corpus.is_empty(), "no graph files in {}", args.corpus.display());
    let mode = if args.exact {
        MatcherMode::Exact {
            max_order: cfg.exact_max_order,
        }
    } else {
        MatcherMode::Approximate
    };
    let matrix: DistanceMatrix = compute_matrix_with(&corpus, &cfg, args.workers, mode)?;
    save_matrix(&matrix, &args.out)?;

    #[derive(Serialize)]
    struct Resolved<'a> {
        anneal: &'a AnnealConfig,
        exact: bool,
        merge_externals: bool,
    }
    // the worker count never changes the output, so it is not recorded
    let mut m = RunManifest::new(
        "simmatrix",
        Some(cfg.seed),
        Resolved {
            anneal: &cfg,
            exact: args.exact,
            merge_externals: args.merge_externals,
        },
    );
    m.input("corpus", &args.corpus);
    if let Some(c) = &args.config {
        m.input("config", c);
    }
    m.record(&args.out);
    m.write(&beside(&args.out))?;
    println!("{} samples, matrix written to {}", matrix.len(), args.out.display());
    Ok(())
}

fn parse_init(spec: &str, matrix: &DistanceMatrix) -> Result<Init> {
    Ok(match spec {
        "random" => Init::Random,
        "plusplus" => Init::PlusPlus,
        other => {
            let Some(path) = other.strip_prefix("trained:") else {
                bail!("unknown initialization {other:?}; expected random, plusplus or trained:<file>");
            };
            let labels: Vec<String> = read(Path::new(path))?
                .lines()
                .map(|l| l.split('#').next().unwrap_or("").trim())
                .filter(|l| !l.is_empty())
                .map(str::to_string)
                .collect();
            for l in &labels {
                ensure!(matrix.index_of(l).is_some(), "trained medoid {l:?} is not in the matrix");
            }
            Init::Trained(labels)
        }
    })
}

fn scaled_rad(rad: f64, scale: f64) -> Result<f64> {
    ensure!(scale > 0.0, "--distance-scale must be positive");
    let r = rad / scale;
    ensure!((0.0..=1.0).contains(&r), "--rad {rad} at scale {scale} is outside the dissimilarity range");
    Ok(r)
}

fn cluster(algorithm: ClusterCommand, seed: Option<u64>) -> Result<()> {
    match algorithm {
        ClusterCommand::Kmedoids {
            matrix,
            out,
            k,
            init,
            restarts,
            max_iterations,
        } => {
            ensure!(restarts > 0, "--restarts must be positive");
            let dm = load(&matrix)?;
            let init_kind = parse_init(&init, &dm)?;
            let seed = resolve_seed(seed);
            let mut best = None;
            for r in 0..restarts as u64 {
                let cfg = KMedoidsConfig {
                    max_iterations,
                    ..KMedoidsConfig::new(k, init_kind.clone()).with_seed(seed.wrapping_add(r))
                };
                let result = kmedoids(&dm, &cfg)?;
                if best.as_ref().is_none_or(|(_, b): &(u64, cgfam::KMedoidsResult)| result.objective() < b.objective()) {
                    best = Some((r, result));
                }
            }
            let (restart, result) = best.expect("at least one restart");
            create_dir(&out)?;
            let mut m = RunManifest::new(
                "cluster kmedoids",
                Some(seed),
                serde_json::json!({ "k": k, "init": init, "restarts": restarts, "max_iterations": max_iterations, "best_restart": restart }),
            );
            m.input("matrix", &matrix);
            m.emit(&out.join("assignments.csv"), &result.clustering.to_csv())?;
            m.emit(&out.join("medoids.csv"), &result.clustering.medoids_csv().expect("k-medoids has medoids"))?;
            let mut trace = String::from("iteration,objective\n");
            for (i, v) in result.trace.iter().enumerate() {
                trace.push_str(&format!("{i},{v}\n"));
            }
            m.emit(&out.join("trace.csv"), &trace)?;
            m.write(&out.join("cluster.manifest.json"))?;
            println!(
                "{} clusters, objective {} after {} iterations{}",
                result.clustering.cluster_count(),
                result.objective(),
                result.iterations,
                if result.converged { "" } else { " (not converged)" }
            );
        }
        ClusterCommand::Dbscan {
            matrix,
            out,
            minpts,
            rad,
            distance_scale,
        } => {
            let dm = load(&matrix)?;
            let cfg = DbscanConfig::new(minpts, scaled_rad(rad, distance_scale)?);
            let clustering = dbscan(&dm, &cfg)?;
            create_dir(&out)?;
            let mut m = RunManifest::new(
                "cluster dbscan",
                None,
                serde_json::json!({ "minpts": minpts, "rad": rad, "distance_scale": distance_scale }),
            );
            m.input("matrix", &matrix);
            m.emit(&out.join("assignments.csv"), &clustering.to_csv())?;
            let mut classes = String::from("label,class\n");
            for (label, class) in dm.labels().iter().zip(classify(&dm, &cfg)) {
                let class = match class {
                    PointClass::Core => "core",
                    PointClass::Border => "border",
                    PointClass::Noise => "noise",
                };
                classes.push_str(&format!("{label},{class}\n"));
            }
            m.emit(&out.join("classes.csv"), &classes)?;
            m.write(&out.join("cluster.manifest.json"))?;
            println!("{} clusters, {} noise samples", clustering.cluster_count(), clustering.noise().len());
        }
    }
    Ok(())
}

fn load_clustering(path: &Path, medoids: Option<&Path>) -> Result<Clustering> {
    let (assignments, medoids) = if path.is_dir() {
        let default = path.join("medoids.csv");
        let medoids = medoids.map(Path::to_path_buf).or(default.exists().then_some(default));
        (path.join("assignments.csv"), medoids)
    } else {
        (path.to_path_buf(), medoids.map(Path::to_path_buf))
    };
    let medoid_text = medoids.as_deref().map(read).transpose()?;
    Clustering::from_csv(&read(&assignments)?, medoid_text.as_deref())
        .with_context(|| format!("cannot load clustering {}", assignments.display()))
}

fn quality(args: QualityArgs) -> Result<()> {
    let dm = load(&args.matrix)?;
    let clustering = load_clustering(&args.clustering, args.medoids.as_deref())?
        .aligned_to(dm.labels())
        .context("clustering and matrix label sets differ")?;
    let report = QualityReport::compute(&dm, &clustering, &args.se, args.se_scale)?;
    create_dir(&args.out)?;
    let mut m = RunManifest::new(
        "quality",
        None,
        serde_json::json!({ "se": args.se, "se_scale": args.se_scale, "kdist": args.kdist }),
    );
    m.input("matrix", &args.matrix).input("clustering", &args.clustering);
    let mut summary = report.summary();
    m.emit(&args.out.join("silhouette_samples.csv"), &report.per_sample_csv())?;
    m.emit(&args.out.join("clusters.csv"), &report.per_cluster_csv())?;
    if !args.se.is_empty() {
        m.emit(&args.out.join("se.csv"), &report.se_csv())?;
    }
    for &k in &args.kdist {
        let curve = kdist_curve(&dm, k)?;
        if let Some((i, v)) = kdist_knee(&curve) {
            summary.push_str(&format!("k-dist knee (k={k}): {v} at rank {i}\n"));
        }
        m.emit(&args.out.join(format!("kdist_k{k}.csv")), &kdist_csv(&curve))?;
    }
    if let Some(path) = &args.families {
        m.input("families", path);
        let families = read_families_csv(path)?;
        let table = frequency_table(&clustering, &families)?;
        m.emit(&args.out.join("frequency.csv"), &table.to_csv())?;
        match cluster_purity::<f64>(&clustering, &families) {
            Ok(p) => summary.push_str(&format!("purity: {p}\n")),
            Err(e) => summary.push_str(&format!("purity: undefined ({e})\n")),
        }
    }
    m.emit(&args.out.join("summary.txt"), &summary)?;
    m.write(&args.out.join("quality.manifest.json"))?;
    print!("{summary}");
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn optional(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn sweep(algorithm: SweepCommand, seed: Option<u64>) -> Result<()> {
    match algorithm {
        SweepCommand::Kmedoids {
            matrix,
            out,
            k,
            init,
            repeats,
            se,
            se_scale,
        } => {
            let k = k.0;
            ensure!(!k.is_empty(), "empty k grid");
            ensure!(repeats > 0, "--repeats must be positive");
            let dm = load(&matrix)?;
            let init_kind = parse_init(&init, &dm)?;
            let seed = resolve_seed(seed);
            let mut header = vec!["k".to_string(), "repeats".into(), "min_objective".into(), "mean_objective".into()];
            for p in &se {
                header.push(format!("min_se{p}"));
                header.push(format!("mean_se{p}"));
            }
            header.extend(["max_silhouette".into(), "mean_silhouette".into()]);
            let mut csv = header.join(",") + "\n";
            for &k in &k {
                let mut objectives = Vec::new();
                let mut ses: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
                let mut silhouettes = Vec::new();
                for r in 0..repeats as u64 {
                    let cfg = KMedoidsConfig::new(k, init_kind.clone()).with_seed(seed.wrapping_add(r));
                    let result = kmedoids(&dm, &cfg).with_context(|| format!("k = {k}"))?;
                    objectives.push(result.objective());
                    for &p in &se {
                        ses.entry(p).or_default().push(sum_of_error(&dm, &result.clustering, p, se_scale)?);
                    }
                    if let Ok(s) = silhouette(&dm, &result.clustering) {
                        silhouettes.push(s.overall);
                    }
                }
                let mut row = vec![
                    k.to_string(),
                    repeats.to_string(),
                    objectives.iter().copied().fold(f64::INFINITY, f64::min).to_string(),
                    mean(&objectives).to_string(),
                ];
                for values in ses.values() {
                    row.push(values.iter().copied().fold(f64::INFINITY, f64::min).to_string());
                    row.push(mean(values).to_string());
                }
                let has_silhouette = !silhouettes.is_empty();
                row.push(optional(has_silhouette.then(|| silhouettes.iter().copied().fold(f64::NEG_INFINITY, f64::max))));
                row.push(optional(has_silhouette.then(|| mean(&silhouettes))));
                csv.push_str(&(row.join(",") + "\n"));
            }
            let mut m = RunManifest::new(
                "sweep kmedoids",
                Some(seed),
                serde_json::json!({ "k": k, "init": init, "repeats": repeats, "se": se, "se_scale": se_scale }),
            );
            m.input("matrix", &matrix);
            m.emit(&out, &csv)?;
            m.write(&beside(&out))?;
        }
        SweepCommand::Dbscan {
            matrix,
            out,
            minpts,
            rad,
            distance_scale,
        } => {
            let minpts = minpts.0;
            ensure!(!minpts.is_empty() && !rad.is_empty(), "empty (minpts, rad) grid");
            let dm = load(&matrix)?;
            let mut csv = String::from("minpts,rad,clusters,noise,silhouette\n");
            for &mp in &minpts {
                for &r in &rad {
                    let cfg = DbscanConfig::new(mp, scaled_rad(r, distance_scale)?);
                    let c = dbscan(&dm, &cfg)?;
                    let s = silhouette(&dm, &c).ok().map(|s| s.overall);
                    csv.push_str(&format!("{mp},{r},{},{},{}\n", c.cluster_count(), c.noise().len(), optional(s)));
                }
            }
            let mut m = RunManifest::new(
                "sweep dbscan",
                None,
                serde_json::json!({ "minpts": minpts, "rad": rad, "distance_scale": distance_scale }),
            );
            m.input("matrix", &matrix);
            m.emit(&out, &csv)?;
            m.write(&beside(&out))?;
        }
    }
    Ok(())
}
