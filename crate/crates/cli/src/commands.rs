use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use triptrie::analytics::{
    first_occurrence_depth, grid_metadata, heatmap as heat, occurrence_csv, outlier_report,
    route_diversity, subtree_distribution, TrieStats, TripCategory,
};
use triptrie::corpus::{
    encode_traces, extract_all, occupied_extent, read_corpus, read_corpus_grid,
    write_corpus_on_grid, CorpusRecord,
};
use triptrie::ingest::{filter_by_duration, pad_strings, parse_trace_file, ParsedTrace};
use triptrie::macro_cluster::{macro_cluster, micro_clusters, MacroMethod};
use triptrie::oracle::{verify_equivalence, VerifyOptions};
use triptrie::synthetic::{self, WalkParams};
use triptrie::{Grid, Symbol, Trie, TripString};

use crate::config::Config;
use crate::error::CliError;

pub const TRIE_FILE: &str = "trie.snap";
pub const CORPUS_FILE: &str = "corpus.tsv";
pub const TRIPS_FILE: &str = "trips.tsv";
pub const TRACES_DIR: &str = "traces";

/// Reports the time since the previous stage on stderr.
struct Stages {
    last: Instant,
}

impl Stages {
    fn start() -> Stages {
        Stages {
            last: Instant::now(),
        }
    }

    fn done(&mut self, stage: &str) {
        let now = Instant::now();
        eprintln!("timing\t{stage}\t{:.3}s", (now - self.last).as_secs_f64());
        self.last = now;
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))
}

/// Writes through a sibling temporary file so readers never see a partial
/// output.
fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::file(dir, e))?;
    }
    let mut partial = path.as_os_str().to_owned();
    partial.push(".partial");
    let partial = PathBuf::from(partial);
    std::fs::write(&partial, text).map_err(|e| CliError::file(&partial, e))?;
    std::fs::rename(&partial, path).map_err(|e| CliError::file(path, e))
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(&path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::file(Path::new("<stdout>"), e))
        }
    }
}

fn load_trie(path: &Path) -> Result<Trie, CliError> {
    let text = read_text(path)?;
    Trie::deserialize(&text).map_err(|e| CliError::in_file(path, e))
}

fn load_corpus(path: &Path) -> Result<(Vec<CorpusRecord>, Option<Grid>), CliError> {
    let text = read_text(path)?;
    let records = read_corpus(&text).map_err(|e| CliError::in_file(path, e))?;
    let grid = read_corpus_grid(&text).map_err(|e| CliError::in_file(path, e))?;
    Ok((records, grid))
}

/// Trace files of a directory in name order. Files starting with `_` are
/// skipped; the taxi id is the file stem without a `new_` prefix.
fn read_traces(dir: &Path) -> Result<Vec<(String, ParsedTrace)>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::file(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "txt"))
        .filter(|p| {
            !p.file_name()
                .is_some_and(|n| n.to_string_lossy().starts_with('_'))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::file(dir, "no .txt trace files"));
    }
    files
        .iter()
        .map(|path| {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let taxi = stem.strip_prefix("new_").unwrap_or(&stem).to_string();
            let parsed = parse_trace_file(path, &taxi).map_err(|e| CliError::in_file(path, e))?;
            Ok((taxi, parsed))
        })
        .collect()
}

fn key_values(pairs: &[(&str, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn extract(
    cfg: &Config,
    traces: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut stages = Stages::start();
    let traces = read_traces(&traces.unwrap_or_else(|| cfg.path(TRACES_DIR)))?;
    stages.done("reading traces");
    let trips = extract_all(&traces);
    let extracted = trips.len();
    let (kept, report) = filter_by_duration(trips, cfg.max_minutes);
    stages.done("extracting trips");

    let mut table = String::from("#taxi_id\tstart_epoch\tend_epoch\trecords\tduration_secs\n");
    for t in &kept {
        let _ = writeln!(
            table,
            "{}\t{}\t{}\t{}\t{}",
            t.taxi_id,
            t.start_epoch(),
            t.end_epoch(),
            t.records.len(),
            t.duration_secs()
        );
    }
    write_file(&out.unwrap_or_else(|| cfg.path(TRIPS_FILE)), &table)?;
    stages.done("writing trips");
    print!(
        "{}",
        key_values(&[
            ("traces", traces.len().to_string()),
            (
                "malformed_lines",
                traces
                    .iter()
                    .map(|(_, p)| p.malformed)
                    .sum::<usize>()
                    .to_string()
            ),
            (
                "duplicate_epochs",
                traces
                    .iter()
                    .map(|(_, p)| p.duplicate_epochs)
                    .sum::<usize>()
                    .to_string()
            ),
            ("trips_extracted", extracted.to_string()),
            ("trips_within_max_minutes", report.kept.to_string()),
            ("kept_fraction", format!("{:.6}", report.kept_fraction())),
        ])
    );
    Ok(())
}

pub fn encode(cfg: &Config, traces: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut stages = Stages::start();
    let traces = read_traces(&traces.unwrap_or_else(|| cfg.path(TRACES_DIR)))?;
    stages.done("reading traces");
    let grid = match cfg.grid()? {
        Some(grid) => grid,
        None => {
            let extent = occupied_extent(&traces).ok_or_else(|| {
                CliError::Config("no occupied records to derive a bounding box from".into())
            })?;
            Grid::new(extent, cfg.rows, cfg.cols)?
        }
    };
    let (records, stats) = encode_traces(&traces, &grid, cfg.t_r, cfg.max_minutes)?;
    stages.done("encoding trips");
    let text = write_corpus_on_grid(&records, Some(&grid))?;
    write_file(&out.unwrap_or_else(|| cfg.path(CORPUS_FILE)), &text)?;
    stages.done("writing corpus");
    let b = grid.bbox();
    print!(
        "{}",
        key_values(&[
            ("traces", stats.traces.to_string()),
            ("malformed_lines", stats.malformed_lines.to_string()),
            ("trips_extracted", stats.trips_extracted.to_string()),
            (
                "trips_within_max_minutes",
                stats.trips_within_duration.to_string()
            ),
            ("kept_fraction", format!("{:.6}", stats.kept_fraction())),
            ("trips_out_of_bounds", stats.trips_out_of_bounds.to_string()),
            ("trips_encoded", stats.trips_encoded.to_string()),
            (
                "bbox",
                format!("{},{},{},{}", b.x_min, b.y_min, b.x_max, b.y_max)
            ),
        ])
    );
    Ok(())
}

pub fn build(
    cfg: &Config,
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
    category: &str,
) -> Result<(), CliError> {
    let category = TripCategory::parse(category)?;
    let mut stages = Stages::start();
    let (records, _) = load_corpus(&corpus.unwrap_or_else(|| cfg.path(CORPUS_FILE)))?;
    let offset = cfg.utc_offset_secs();
    let strings: Vec<TripString> = records
        .into_iter()
        .filter(|r| category.matches(r.start_epoch, offset))
        .map(|r| r.trip)
        .collect();
    if strings.is_empty() {
        return Err(triptrie::Error::Parameter("no trips in the selected category".into()).into());
    }
    let (strings, len) = pad_strings(strings)?;
    stages.done("reading corpus");
    let trie = Trie::build(&strings)?;
    stages.done("constructing trie");
    write_file(
        &out.unwrap_or_else(|| cfg.path(TRIE_FILE)),
        &trie.serialize(),
    )?;
    stages.done("writing snapshot");
    print!(
        "{}",
        key_values(&[
            ("trips", trie.num_trips().to_string()),
            ("length", len.to_string()),
            ("nodes", trie.num_nodes().to_string()),
        ])
    );
    Ok(())
}

pub fn insert(trie_path: PathBuf, corpus: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut stages = Stages::start();
    let mut trie = load_trie(&trie_path)?;
    let (records, _) = load_corpus(corpus)?;
    stages.done("reading inputs");
    let len = if trie.is_empty() {
        records.iter().map(|r| r.trip.len()).max().unwrap_or(0)
    } else {
        trie.len()
    };
    for mut r in records {
        if r.trip.len() > len {
            return Err(triptrie::Error::Precondition(format!(
                "trip {} has {} steps but the trie holds strings of length {len}",
                r.trip.trip_id,
                r.trip.len()
            ))
            .into());
        }
        r.trip.symbols.resize(len, Symbol::NULL_PAD);
        trie.insert(&r.trip)?;
    }
    stages.done("inserting trips");
    write_file(&out.unwrap_or(trie_path), &trie.serialize())?;
    stages.done("writing snapshot");
    print!(
        "{}",
        key_values(&[
            ("trips", trie.num_trips().to_string()),
            ("nodes", trie.num_nodes().to_string())
        ])
    );
    Ok(())
}

pub struct VerifyRun {
    pub samples: usize,
    pub size: usize,
    pub full_sweep: bool,
    pub max_matrix_mib: usize,
}

/// Size of the synthetic corpus that `verify` samples from.
const SYNTHETIC_TRIPS: usize = 20_000;

pub fn verify(
    cfg: &Config,
    corpus: Option<PathBuf>,
    run: &VerifyRun,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if run.samples == 0 || run.size == 0 {
        return Err(CliError::Config("samples and size must be positive".into()));
    }
    let mut stages = Stages::start();
    let mut rng = synthetic::rng(cfg.seed);
    let (source, pool) = match &corpus {
        Some(path) => {
            let (records, _) = load_corpus(path)?;
            if records.is_empty() {
                return Err(CliError::File {
                    path: path.display().to_string(),
                    kind: "format",
                    message: "corpus holds no trips".into(),
                });
            }
            (
                "corpus",
                pad_strings(records.into_iter().map(|r| r.trip).collect())?.0,
            )
        }
        None => {
            let params = WalkParams {
                n_rows: cfg.rows,
                n_cols: cfg.cols,
                hubs: 50,
                max_len: 30,
                ..WalkParams::default()
            };
            let walks = synthetic::random_walks(SYNTHETIC_TRIPS, &params, &mut rng);
            ("synthetic", pad_strings(walks)?.0)
        }
    };
    stages.done("preparing corpus");

    let options = VerifyOptions {
        full_sweep: run.full_sweep,
        max_matrix_bytes: run.max_matrix_mib.saturating_mul(1 << 20),
    };
    let mut report = String::from("#triptrie-verify v1\n");
    let _ = writeln!(
        report,
        "source\t{source}\nseed\t{}\npool\t{}",
        cfg.seed,
        pool.len()
    );
    report.push_str("#sample\tsize\tlength\tlevels\tequal_levels\tresult\n");
    let mut passed = 0;
    for sample in 1..=run.samples {
        let picked = synthetic::sample_indices(pool.len(), run.size, &mut rng);
        let strings: Vec<TripString> = picked.iter().map(|&i| pool[i].clone()).collect();
        let trie = Trie::build(&strings)?;
        let check = verify_equivalence(&trie, &strings, options)?;
        let equal = check.levels.iter().filter(|c| c.equal).count();
        let ok = check.all_equal();
        passed += usize::from(ok);
        let _ = writeln!(
            report,
            "{sample}\t{}\t{}\t{}\t{equal}\t{}",
            check.n,
            check.len,
            check.levels.len(),
            if ok { "PASS" } else { "FAIL" }
        );
        stages.done(&format!("verifying sample {sample}"));
    }
    let _ = writeln!(report, "passed\t{passed}/{}", run.samples);
    emit(out, &report)?;
    if passed != run.samples {
        return Err(CliError::Verification(format!(
            "{} of {} samples differ",
            run.samples - passed,
            run.samples
        )));
    }
    Ok(())
}

pub fn stats(cfg: &Config, trie: &Path, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut stages = Stages::start();
    let trie = load_trie(trie)?;
    stages.done("reading snapshot");
    let report = TrieStats::compute(&trie, cfg.first_levels).to_report();
    stages.done("computing statistics");
    emit(out, &report)
}

/// Grid from an explicit corpus header, else the configured bounding box,
/// else the header of the default corpus.
fn grid_for(cfg: &Config, corpus: Option<PathBuf>) -> Result<Grid, CliError> {
    if corpus.is_none() {
        if let Some(grid) = cfg.grid()? {
            return Ok(grid);
        }
    }
    let path = corpus.unwrap_or_else(|| cfg.path(CORPUS_FILE));
    if !path.exists() {
        return Err(CliError::Config(
            "a grid is needed: pass --corpus or set bbox".into(),
        ));
    }
    load_corpus(&path)?.1.ok_or_else(|| CliError::File {
        path: path.display().to_string(),
        kind: "format",
        message: "corpus header names no grid".into(),
    })
}

pub fn heatmap(
    cfg: &Config,
    trie: &Path,
    level: usize,
    corpus: Option<PathBuf>,
    out_dir: Option<PathBuf>,
) -> Result<(), CliError> {
    let grid = grid_for(cfg, corpus)?;
    let trie = load_trie(trie)?;
    let map = heat(&trie, &grid, level)?;
    let dir = out_dir.unwrap_or_else(|| cfg.data_dir.clone());
    let csv = dir.join(format!("heatmap_level{level}.csv"));
    write_file(&csv, &map.to_csv())?;
    let extra = [
        ("level", level.to_string()),
        (
            "elapsed_secs",
            ((level - 1) as u64 * u64::from(cfg.t_r)).to_string(),
        ),
        ("trips", map.total().to_string()),
    ];
    write_file(
        &dir.join(format!("heatmap_level{level}.meta")),
        &grid_metadata(&grid, &extra),
    )?;
    println!("{}", csv.display());
    Ok(())
}

pub fn occurrence(
    cfg: &Config,
    trie: &Path,
    corpus: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let grid = grid_for(cfg, corpus)?;
    let trie = load_trie(trie)?;
    let depths = first_occurrence_depth(&trie);
    if let Some(&region) = depths
        .keys()
        .next_back()
        .filter(|&&r| r > grid.num_regions())
    {
        return Err(triptrie::Error::NotARegion(region as i32).into());
    }
    let out = out.unwrap_or_else(|| cfg.path("occurrence.csv"));
    write_file(&out, &occurrence_csv(&grid, &depths))?;
    let meta = out.with_extension("meta");
    write_file(
        &meta,
        &grid_metadata(&grid, &[("regions_seen", depths.len().to_string())]),
    )?;
    println!("{}", out.display());
    Ok(())
}

pub fn subtree(
    trie: &Path,
    start: u32,
    level: usize,
    top: usize,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let trie = load_trie(trie)?;
    let ranked = subtree_distribution(&trie, Symbol::region(start), level, top)?;
    let mut text = String::from("#region\ttrips\n");
    for (z, count) in ranked {
        let _ = writeln!(text, "{}\t{count}", z.raw());
    }
    emit(out, &text)
}

pub fn predict(trie: &Path, prefix: &str, out: Option<PathBuf>) -> Result<(), CliError> {
    let symbols = prefix
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let raw = s.parse().map_err(|_| {
                triptrie::Error::Parameter(format!("bad region id {s:?} in prefix"))
            })?;
            Symbol::from_raw(raw)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let trie = load_trie(trie)?;
    let node = trie
        .locate(&symbols)
        .ok_or_else(|| triptrie::Error::NotFound("no trip follows this prefix".into()))?;
    let mut text = String::from("#region\ttrips\tprobability\n");
    for step in trie.children_distribution(node)? {
        let _ = writeln!(
            text,
            "{}\t{}\t{:.6}",
            step.symbol.raw(),
            step.count,
            step.probability
        );
    }
    emit(out, &text)
}

pub fn diversity(trie: &Path, start: u32, end: u32) -> Result<(), CliError> {
    let trie = load_trie(trie)?;
    let routes = route_diversity(&trie, Symbol::region(start), Symbol::region(end));
    println!("{start}\t{end}\t{routes}");
    Ok(())
}

pub fn macro_clusters(
    trie: &Path,
    level: usize,
    q: usize,
    method: MacroMethod,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut stages = Stages::start();
    let trie = load_trie(trie)?;
    let micros = micro_clusters(&trie, level)?;
    stages.done("collecting micro-clusters");
    let result = macro_cluster(&micros, q, method);
    stages.done("macro-clustering");
    let name = match method {
        MacroMethod::CompleteLinkage => "complete",
        MacroMethod::Greedy => "greedy",
    };
    let mut text = format!(
        "#triptrie-macro v1\tlevel={level}\tq={q}\tmethod={name}\tmicro={}\tmacro={}\n",
        micros.len(),
        result.num_clusters()
    );
    text.push_str("#node\tmacro\ttrips\troute\n");
    for (m, label) in micros.iter().zip(&result.labels) {
        let route: Vec<String> = m
            .representative
            .iter()
            .map(|z| z.raw().to_string())
            .collect();
        let _ = writeln!(
            text,
            "{}\t{label}\t{}\t{}",
            m.node,
            m.weight,
            route.join(",")
        );
    }
    emit(out, &text)
}

pub fn outliers(trie: &Path, top: Option<usize>, out: Option<PathBuf>) -> Result<(), CliError> {
    let trie = load_trie(trie)?;
    let report = outlier_report(&trie);
    let mut text = String::from("#region\tnode_count\ttrip_types\tfirst_level\n");
    for o in report.iter().take(top.unwrap_or(usize::MAX)) {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}",
            o.region, o.node_count, o.trip_types, o.first_depth
        );
    }
    emit(out, &text)
}
