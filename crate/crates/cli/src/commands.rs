use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};

use labelidx::io::{
    format_bench_records, format_mot_report, format_query_records, parse_config_file,
    read_detection_csv, read_feature_csv, write_detection_csv, BenchRecord, QueryRecord,
};
use labelidx::scene::{cluster_queries, clustered_corpus, generate_scene, SceneSpec};
use labelidx::track::{run_tracking, truth_from_stream, EngineLabeler, NaiveLabeler};
use labelidx::{
    compute_mot_metrics, linear_label_search, Detection, FeatureVector, IndexConfig, MetricKind,
    MirroredIndex, SearchStats, TrackerConfig,
};

use crate::ConfigArgs;

const DEFAULTS: (usize, MetricKind, f64, f64, usize) =
    (labelidx::DEFAULT_DIMENSION, MetricKind::Cosine, 0.2, 0.6, 64);

/// Flags > config file > defaults.
fn resolve_config(args: &ConfigArgs, dim_hint: Option<usize>) -> Result<IndexConfig> {
    let (mut dim, mut metric, mut beta, mut zeta, mut c_max) = DEFAULTS;
    if let Some(hint) = dim_hint {
        dim = hint;
    }
    if let Some(path) = &args.config {
        let map = parse_config_file(path)?;
        if let Some(v) = map.get("dimension") {
            dim = v.parse().context("config: invalid dimension")?;
        }
        if let Some(v) = map.get("metric") {
            metric = v.parse::<MetricKind>()?;
        }
        if let Some(v) = map.get("beta") {
            beta = v.parse().context("config: invalid beta")?;
        }
        if let Some(v) = map.get("zeta") {
            zeta = v.parse().context("config: invalid zeta")?;
        }
        if let Some(v) = map.get("c_max") {
            c_max = v.parse().context("config: invalid c_max")?;
        }
    }
    if let Some(v) = args.dim {
        dim = v;
    }
    if let Some(v) = &args.metric {
        metric = v.parse::<MetricKind>()?;
    }
    if let Some(v) = args.beta {
        beta = v;
    }
    if let Some(v) = args.zeta {
        zeta = v;
    }
    if let Some(v) = args.c_max {
        c_max = v;
    }
    Ok(IndexConfig::new(dim, metric, beta, zeta, c_max)?)
}

fn is_detection_csv(path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path).map_err(labelidx::Error::Io)?;
    Ok(text.lines().next().is_some_and(|h| h.starts_with("frame,")))
}

fn mean_stats(stats: &[SearchStats]) -> (f64, f64, f64) {
    if stats.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    let n = stats.len() as f64;
    let d: u64 = stats.iter().map(|s| s.distances_computed).sum();
    let c: u64 = stats.iter().map(|s| s.comparisons).sum();
    let t: f64 = stats.iter().map(|s| s.elapsed.as_secs_f64()).sum();
    (d as f64 / n, c as f64 / n, t / n)
}

/// Builds a mirrored index from a corpus file, returning the per-search
/// stats gathered along the way.
fn build_from_file(
    input: &Path,
    config: IndexConfig,
    seed: u64,
) -> Result<(MirroredIndex, Vec<SearchStats>)> {
    let mut index = MirroredIndex::new(config, seed);
    let mut stats = Vec::new();

    if is_detection_csv(input)? {
        let stream = read_detection_csv(input)?;
        let mut labeler = EngineLabeler::new(&mut index);
        run_tracking(&stream, &mut labeler, &TrackerConfig::default())?;
        return Ok((index, stats));
    }

    let csv = read_feature_csv(input)?;
    if csv.has_labels {
        // Rows sharing a label are one track's collection: the first
        // establishes the profile, the rest arrive as its bag.
        let mut groups: std::collections::BTreeMap<u64, Vec<FeatureVector>> =
            std::collections::BTreeMap::new();
        let mut unlabeled = Vec::new();
        for (v, label) in csv.vectors.into_iter().zip(csv.labels) {
            match label {
                Some(l) => groups.entry(l).or_default().push(v),
                None => unlabeled.push(v),
            }
        }
        for (_, mut vectors) in groups {
            let first = vectors.remove(0);
            let r = index.search_and_mirror(&first)?;
            stats.push(r.stats);
            if !vectors.is_empty() {
                index.insert_bag(r.leaf, r.label, vectors, None)?;
            }
        }
        for v in unlabeled {
            let r = index.ingest(v)?;
            stats.push(r.stats);
        }
    } else {
        for v in csv.vectors {
            let r = index.ingest(v)?;
            stats.push(r.stats);
        }
    }
    index.flush_all()?;
    Ok((index, stats))
}

fn write_or_print(path: Option<PathBuf>, contents: &str, what: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(&p, contents).map_err(labelidx::Error::Io)?;
            eprintln!("{what} written to {}", p.display());
        }
        None => print!("{contents}"),
    }
    Ok(())
}

pub fn index_build(
    input: &Path,
    config: &ConfigArgs,
    seed: u64,
    out_stats: Option<PathBuf>,
    out_snapshot: Option<PathBuf>,
) -> Result<()> {
    let cfg = resolve_config(config, sniff_dimension(input)?)?;
    let (index, stats) = build_from_file(input, cfg, seed)?;
    let tree_stats = index.engine().tree().stats();
    let (avg_d, avg_c, avg_t) = mean_stats(&stats);
    let record = BenchRecord::from_stats(
        input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "build".into()),
        tree_stats.indexed_vectors as u64,
        avg_d,
        avg_c,
        avg_t,
        &tree_stats,
    );
    write_or_print(out_stats, &format_bench_records(&[record]), "stats")?;
    if let Some(p) = out_snapshot {
        std::fs::write(&p, index.engine().tree().snapshot()).map_err(labelidx::Error::Io)?;
        eprintln!("snapshot written to {}", p.display());
    }
    eprintln!(
        "indexed {} vectors, {} profiles, height {}, degenerate splits {}",
        tree_stats.indexed_vectors,
        tree_stats.profile_count,
        tree_stats.height,
        index.engine().degenerate_splits()
    );
    Ok(())
}

fn sniff_dimension(input: &Path) -> Result<Option<usize>> {
    let text = std::fs::read_to_string(input).map_err(labelidx::Error::Io)?;
    let Some(header) = text.lines().next() else {
        return Ok(None);
    };
    let fields: Vec<&str> = header.split(',').collect();
    let dim = fields.iter().filter(|f| f.starts_with('f')).count();
    Ok(if dim > 0 { Some(dim) } else { None })
}

pub fn index_query(
    corpus: &Path,
    input: &Path,
    mode: &str,
    config: &ConfigArgs,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    if !corpus.exists() {
        bail!("missing index corpus: {}", corpus.display());
    }
    let cfg = resolve_config(config, sniff_dimension(corpus)?)?;
    let (mut index, _) = build_from_file(corpus, cfg, seed)?;
    let queries = read_feature_csv(input)?;

    let mut rows = Vec::new();
    match mode {
        "offline" => {
            for (i, q) in queries.vectors.iter().enumerate() {
                let outcome = index.engine().lookup(q)?;
                let (label, stats) = match outcome {
                    Some(o) => (o.label.map(|l| l.id() as i64).unwrap_or(-1), o.stats),
                    None => (-1, SearchStats::default()),
                };
                rows.push(QueryRecord {
                    query: i as u64,
                    label,
                    created: false,
                    distances: stats.distances_computed,
                    comparisons: stats.comparisons,
                    time_s: stats.elapsed.as_secs_f64(),
                });
            }
        }
        "online" => {
            for (i, q) in queries.vectors.iter().enumerate() {
                let r = index.search_and_mirror(q)?;
                rows.push(QueryRecord {
                    query: i as u64,
                    label: r.label.id() as i64,
                    created: r.created,
                    distances: r.stats.distances_computed,
                    comparisons: r.stats.comparisons,
                    time_s: r.stats.elapsed.as_secs_f64(),
                });
            }
        }
        other => bail!("unknown query mode '{other}' (use online or offline)"),
    }
    write_or_print(out, &format_query_records(&rows), "query results")?;
    Ok(())
}

fn parse_sizes(sizes: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in sizes.split(',') {
        let part = part.trim().to_ascii_lowercase();
        if part.is_empty() {
            continue;
        }
        let (digits, mult) = if let Some(d) = part.strip_suffix('k') {
            (d.to_string(), 1_000usize)
        } else if let Some(d) = part.strip_suffix('m') {
            (d.to_string(), 1_000_000usize)
        } else {
            (part.clone(), 1)
        };
        let n: usize = digits
            .parse()
            .with_context(|| format!("invalid size '{part}'"))?;
        out.push(n * mult);
    }
    if out.is_empty() {
        bail!("no sizes given");
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn bench_scaling(
    sizes: &str,
    seed: u64,
    clusters: usize,
    queries: usize,
    noise: f64,
    separation: f64,
    config: &ConfigArgs,
    out: Option<PathBuf>,
) -> Result<()> {
    let sizes = parse_sizes(sizes)?;
    let base = resolve_config(config, None)?;
    let mut records = Vec::new();
    for &n in &sizes {
        let cfg = if config.c_max.is_some() {
            base.clone()
        } else {
            IndexConfig::with_corpus_hint(base.dimension, base.metric, base.beta, base.zeta, n)?
        };
        let corpus = clustered_corpus(cfg.dimension, clusters, n, noise, separation, seed)?;
        let query_set = cluster_queries(&corpus.centers, queries, noise, seed ^ 0x51ab);

        let mut index = MirroredIndex::new(cfg, seed);
        for v in corpus.vectors {
            index.ingest(v)?;
        }
        index.flush_all()?;

        let tree_stats = index.engine().tree().stats();
        let outcomes = index.engine().lookup_batch(&query_set)?;
        let stats: Vec<SearchStats> = outcomes
            .iter()
            .flatten()
            .map(|o| o.stats)
            .collect();
        let (avg_d, avg_c, avg_t) = mean_stats(&stats);
        records.push(BenchRecord::from_stats(
            format!("tree/n={n}"),
            n as u64,
            avg_d,
            avg_c,
            avg_t,
            &tree_stats,
        ));

        let oracle_start = Instant::now();
        let mut oracle_distances = 0u64;
        for q in &query_set {
            let r = linear_label_search(index.store(), q, index.engine().config().beta);
            oracle_distances += r.stats.distances_computed;
        }
        let oracle_time = oracle_start.elapsed().as_secs_f64() / queries.max(1) as f64;
        records.push(BenchRecord::from_stats(
            format!("oracle/n={n}"),
            n as u64,
            oracle_distances as f64 / queries.max(1) as f64,
            oracle_distances as f64 / queries.max(1) as f64,
            oracle_time,
            &tree_stats,
        ));
        eprintln!(
            "n={n}: tree avg distances {:.1}, oracle {}, height {}",
            records[records.len() - 2].avg_distances,
            n,
            tree_stats.height
        );
    }
    write_or_print(out, &format_bench_records(&records), "bench results")?;
    Ok(())
}

fn scene_from_file(path: &Path, seed: u64) -> Result<SceneSpec> {
    let map = parse_config_file(path)?;
    let get = |k: &str, default: f64| -> Result<f64> {
        match map.get(k) {
            Some(v) => v
                .parse()
                .with_context(|| format!("scene: invalid {k}")),
            None => Ok(default),
        }
    };
    let dim = get("dim", 16.0)? as usize;
    let persistent = get("objects", 5.0)? as usize;
    let cyclers = get("cyclers", 5.0)? as usize;
    let appear = get("appear", 8.0)? as u64;
    let gap = get("gap", 12.0)? as u64;
    let noise = get("noise", 0.05)?;
    let separation = get("separation", 0.7)?;
    let seed = map
        .get("seed")
        .map(|v| v.parse::<u64>())
        .transpose()
        .context("scene: invalid seed")?
        .unwrap_or(seed);
    let mut spec = if cyclers == 0 {
        let frames = get("frames", 100.0)? as u64;
        SceneSpec::persistent(dim, persistent, frames, noise, separation, seed)
    } else {
        SceneSpec::reentry(dim, persistent, cyclers, appear, gap, noise, separation, seed)
    };
    if let Some(v) = map.get("velocity") {
        spec.velocity = v.parse().context("scene: invalid velocity")?;
    }
    Ok(spec)
}

#[allow(clippy::too_many_arguments)]
pub fn track_run(
    scene: Option<&Path>,
    stream_path: Option<&Path>,
    baseline: &str,
    seed: u64,
    max_missed: u32,
    confirm_after: u32,
    config: &ConfigArgs,
    out: Option<PathBuf>,
    tracks_out: Option<PathBuf>,
    dump_stream: Option<PathBuf>,
) -> Result<()> {
    let stream: Vec<Detection> = match (scene, stream_path) {
        (_, Some(path)) => read_detection_csv(path)?,
        (Some(path), None) => generate_scene(&scene_from_file(path, seed)?)?,
        (None, None) => generate_scene(&SceneSpec::reentry(16, 5, 5, 8, 12, 0.05, 0.7, seed))?,
    };
    if let Some(p) = &dump_stream {
        write_detection_csv(p, &stream)?;
        eprintln!("stream written to {}", p.display());
    }

    let dim = stream.first().map(|d| d.feature.dim());
    let cfg = resolve_config(config, dim)?;
    let tracker = TrackerConfig {
        max_missed,
        confirm_after,
        ..TrackerConfig::default()
    };

    let output = match baseline {
        "engine" => {
            let mut index = MirroredIndex::new(cfg, seed);
            let mut labeler = EngineLabeler::new(&mut index);
            let output = run_tracking(&stream, &mut labeler, &tracker)?;
            let stats = index.engine().tree().stats();
            eprintln!(
                "profiles {}, indexed vectors {}, height {}",
                stats.profile_count, stats.indexed_vectors, stats.height
            );
            output
        }
        "naive" => {
            let mut labeler = NaiveLabeler::new();
            run_tracking(&stream, &mut labeler, &tracker)?
        }
        other => bail!("unknown baseline '{other}' (use engine or naive)"),
    };

    let truth = truth_from_stream(&stream);
    if truth.is_empty() {
        eprintln!("stream carries no ground truth; skipping metrics");
    } else {
        let report = compute_mot_metrics(&output.estimates, &truth, 0.5)?;
        eprintln!("{report}");
        write_or_print(out, &format_mot_report(&report), "report")?;
    }

    let mut tracks_csv = String::from("label,camera,first_frame,last_frame,detections\n");
    for r in &output.records {
        use std::fmt::Write as _;
        let _ = writeln!(
            tracks_csv,
            "{},{},{},{},{}",
            r.label,
            r.camera,
            r.first_frame,
            r.last_frame,
            r.detections
        );
    }
    if let Some(p) = tracks_out {
        std::fs::write(&p, tracks_csv).map_err(labelidx::Error::Io)?;
        eprintln!("tracks written to {}", p.display());
    }
    Ok(())
}
