//! `spreadnet` subcommands. Each reads files, runs one pipeline stage, writes
//! its artifacts plus `manifest.json` into `--out`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;
use spreadnet_core::analysis::{
    aggregate_yearly, build_mobility_network, compare_networks, consecutive_ssim, region_metrics,
    rollup_planning_areas, FlowNetwork,
};
use spreadnet_core::counts::{build_weekly_counts, week_year, WeekRule, WeeklyCaseCounts};
use spreadnet_core::evaluation::{confusion_counts, weekly_metrics, yearly_summary, WeeklyScore};
use spreadnet_core::forecast::forecast_next_week;
use spreadnet_core::geometry::SubzoneIndex;
use spreadnet_core::hotspot::{binarize, HotspotSeries};
use spreadnet_core::learner::{fit_spreading_matrix, search_temporal_weights, SpreadingModel};
use spreadnet_core::synth::{generate, to_counts};

use crate::config::{Config, PopulationMode};
use crate::error::{Error, Result};
use crate::formats::{self, fmt_num, round_num};
use crate::ingest::{read_snapshot, read_subzones};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "spreadnet", version, about = "Learn spreading networks from weekly hotspot data")]
pub struct Cli {
    /// TOML configuration file (relative paths resolve against $SPREADNET_HOME).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "spreadnet-out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count active localities per subzone and week from snapshot CSVs.
    Ingest(IngestArgs),
    /// Threshold weekly counts into hotspot and presence matrices.
    Binarize(BinarizeArgs),
    /// Fit one spreading model per target week.
    Learn(LearnArgs),
    /// Forecast the week after each model's target week.
    Forecast(ForecastArgs),
    /// Score forecasts against observed hotspots.
    Evaluate(EvaluateArgs),
    /// SSIM between consecutive weekly models.
    Stability(StabilityArgs),
    /// Aggregate learned networks and build the mobility network.
    Network(NetworkArgs),
    /// Correlate transmission with mobility.
    Compare(CompareArgs),
    /// Generate a synthetic world from the [synth] config section.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Snapshot CSV files or directories of them.
    #[arg(required = true)]
    pub snapshots: Vec<PathBuf>,
    /// Subzone boundary GeoJSON.
    #[arg(long)]
    pub subzones: PathBuf,
    /// Keep only weeks in START..END (inclusive labels, either end optional).
    #[arg(long)]
    pub weeks: Option<WeekRange>,
    /// Drop subzones below 10 people per km².
    #[arg(long)]
    pub drop_low_density: bool,
}

#[derive(Debug, Args)]
pub struct BinarizeArgs {
    /// Weekly counts CSV written by `ingest` or `synth`.
    pub counts: PathBuf,
    #[arg(long)]
    pub hotspot_threshold: Option<u32>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// Directory holding `hotspots.json` and its matrices.
    pub hotspots: PathBuf,
    /// Target weeks to fit.
    #[arg(long)]
    pub weeks: Option<WeekRange>,
    #[arg(long)]
    pub lookback: Option<usize>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    /// Fixed temporal weights (comma separated) instead of the grid search.
    #[arg(long, value_delimiter = ',')]
    pub temporal_weights: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    pub hotspots: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    /// Restrict to models whose target week lies in this range.
    #[arg(long)]
    pub weeks: Option<WeekRange>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub hotspots: PathBuf,
    /// Forecast directory written by `forecast`.
    #[arg(long, required_unless_present = "models", conflicts_with = "models")]
    pub forecasts: Option<PathBuf>,
    /// Model directory; forecasts are computed on the fly.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Restrict to forecast weeks in this range.
    #[arg(long)]
    pub weeks: Option<WeekRange>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    pub models: PathBuf,
    #[arg(long)]
    pub weeks: Option<WeekRange>,
}

#[derive(Debug, Args)]
pub struct NetworkArgs {
    pub models: PathBuf,
    #[arg(long)]
    pub subzones: PathBuf,
    /// `home_grid,work_grid` CSV.
    #[arg(long, requires = "grid_map")]
    pub commutes: Option<PathBuf>,
    /// `grid_id,subzone_id` CSV.
    #[arg(long, requires = "commutes")]
    pub grid_map: Option<PathBuf>,
    /// Target weeks to aggregate, typically one year.
    #[arg(long)]
    pub weeks: Option<WeekRange>,
    #[arg(long, value_enum)]
    pub population_mode: Option<PopulationMode>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// `region_metrics.csv`, or the `network` output directory holding it.
    pub metrics: PathBuf,
    #[arg(long)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub regions: Option<usize>,
    #[arg(long)]
    pub weeks: Option<usize>,
    #[arg(long)]
    pub noise_rate: Option<f64>,
}

/// Inclusive range of week labels, `START..END`; either end may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeekRange {
    pub start: Option<String>,
    pub end: Option<String>,
}

impl std::str::FromStr for WeekRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected START..END, got {s:?}"))?;
        let side = |v: &str| Some(v.trim().to_string()).filter(|v| !v.is_empty());
        let range = WeekRange {
            start: side(a),
            end: side(b),
        };
        if let (Some(a), Some(b)) = (&range.start, &range.end) {
            if a > b {
                return Err(format!("empty week range {s:?}"));
            }
        }
        Ok(range)
    }
}

impl WeekRange {
    /// Labels compare as strings, which is chronological for ISO dates.
    pub fn contains(&self, label: &str) -> bool {
        self.start.as_deref().is_none_or(|s| label >= s) && self.end.as_deref().is_none_or(|e| label <= e)
    }
}

fn in_range(range: &Option<WeekRange>, label: &str) -> bool {
    range.as_ref().is_none_or(|r| r.contains(label))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let (mut config, _) = Config::load(cli.config.as_deref())?;
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    apply_overrides(&mut config, &cli.command);
    let config = config.resolve();
    formats::ensure_dir(&cli.out)?;
    let out = cli.out.as_path();
    match &cli.command {
        Command::Ingest(a) => ingest(a, &config, out),
        Command::Binarize(a) => binarize_cmd(a, &config, out),
        Command::Learn(a) => learn(a, &config, out),
        Command::Forecast(a) => forecast(a, &config, out),
        Command::Evaluate(a) => evaluate(a, &config, out),
        Command::Stability(a) => stability(a, &config, out),
        Command::Network(a) => network(a, &config, out),
        Command::Compare(a) => compare(a, &config, out),
        Command::Synth(a) => synth(a, &config, out),
    }
}

fn apply_overrides(config: &mut Config, command: &Command) {
    match command {
        Command::Ingest(a) if a.drop_low_density => config.ingest.drop_low_density = true,
        Command::Binarize(a) => {
            if let Some(c) = a.hotspot_threshold {
                config.hotspot.threshold = c;
            }
        }
        Command::Learn(a) => {
            let l = &mut config.learner;
            l.lookback = a.lookback.unwrap_or(l.lookback);
            l.lambda1 = a.lambda1.unwrap_or(l.lambda1);
            l.lambda2 = a.lambda2.unwrap_or(l.lambda2);
        }
        Command::Network(a) => {
            if let Some(m) = a.population_mode {
                config.analysis.population_mode = m;
            }
        }
        Command::Compare(a) => config.analysis.top_k = a.top_k.unwrap_or(config.analysis.top_k),
        Command::Synth(a) => {
            let s = &mut config.synth;
            s.regions = a.regions.unwrap_or(s.regions);
            s.weeks = a.weeks.unwrap_or(s.weeks);
            s.noise_rate = a.noise_rate.unwrap_or(s.noise_rate);
        }
        _ => {}
    }
}

fn manifest(name: &str, config: &Config, seed: u64) -> RunManifest {
    RunManifest::new(format!("spreadnet {name}"), config, seed)
}

fn top_seed(config: &Config) -> u64 {
    config.seed.unwrap_or(config.learner.seed)
}

fn load_index(path: &Path, drop_low_density: bool) -> Result<SubzoneIndex> {
    let index = read_subzones(path)?;
    if drop_low_density {
        index.without_low_density().map_err(Error::at(path.display().to_string()))
    } else {
        Ok(index)
    }
}

fn snapshot_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .map_err(Error::io(input))?
                .map(|e| e.map(|e| e.path()).map_err(Error::io(input)))
                .collect::<Result<_>>()?;
            found.retain(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")));
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::Usage("no snapshot CSV files found".into()));
    }
    Ok(files)
}

fn select_weeks(counts: &WeeklyCaseCounts, range: &WeekRange) -> Result<WeeklyCaseCounts> {
    let keep: Vec<usize> = (0..counts.weeks())
        .filter(|&t| range.contains(&counts.week_labels[t]))
        .collect();
    let labels = keep.iter().map(|&t| counts.week_labels[t].clone()).collect();
    let mut values = Vec::with_capacity(counts.regions() * keep.len());
    for i in 0..counts.regions() {
        values.extend(keep.iter().map(|&t| counts.get(i, t)));
    }
    Ok(WeeklyCaseCounts::new(counts.subzone_ids.clone(), labels, values)?)
}

fn ingest(args: &IngestArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("ingest", config, top_seed(config));
    let index = load_index(&args.subzones, config.ingest.drop_low_density)?;
    m.add_input(&args.subzones)?;
    let files = snapshot_files(&args.snapshots)?;
    let mut records = Vec::new();
    let mut skipped = 0;
    for file in &files {
        let snap = read_snapshot(file, &config.ingest.columns)?;
        records.extend(snap.records);
        skipped += snap.skipped;
        m.add_input(file)?;
    }
    let rule = WeekRule::new(config.ingest.weekday()?);
    let build = build_weekly_counts(&records, &index, rule)?;
    let counts = match &args.weeks {
        Some(r) => select_weeks(&build.counts, r)?,
        None => build.counts,
    };
    for w in &build.empty_weeks {
        warn!("week {w} has no records");
    }
    info!(
        "{} records, {} outside every subzone, {} invalid, {} duplicates, {} unparseable rows",
        records.len(),
        build.outside,
        build.invalid,
        build.duplicates,
        skipped
    );
    let low_density: Vec<&str> = index
        .subzones()
        .iter()
        .filter(|s| s.is_low_density())
        .map(|s| s.id.as_str())
        .collect();
    let meta: BTreeMap<String, serde_json::Value> = [
        ("files", serde_json::json!(files.len())),
        ("records", serde_json::json!(records.len())),
        ("skipped_rows", serde_json::json!(skipped)),
        ("outside", serde_json::json!(build.outside)),
        ("invalid", serde_json::json!(build.invalid)),
        ("duplicates", serde_json::json!(build.duplicates)),
        ("empty_weeks", serde_json::json!(build.empty_weeks)),
        ("low_density_subzones", serde_json::json!(low_density)),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    formats::write_counts_csv(&out.join(formats::COUNTS_CSV), &counts)?;
    formats::write_counts_json(&out.join(formats::COUNTS_JSON), &counts, meta)?;
    m.write(out)?;
    Ok(())
}

fn binarize_cmd(args: &BinarizeArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("binarize", config, top_seed(config));
    let counts = formats::read_counts_csv(&args.counts)?;
    m.add_input(&args.counts)?;
    let series = binarize(&counts, config.hotspot.threshold)?;
    formats::write_hotspots(out, &series)?;
    m.write(out)?;
    Ok(())
}

fn load_series(dir: &Path, m: &mut RunManifest) -> Result<HotspotSeries> {
    let series = formats::read_hotspots(dir)?;
    m.add_inputs(&formats::hotspot_files(dir))?;
    Ok(series)
}

fn load_models(
    dir: &Path,
    range: &Option<WeekRange>,
    m: &mut RunManifest,
) -> Result<Vec<(formats::ModelDocument, SpreadingModel)>> {
    let mut models = formats::read_models(dir)?;
    m.add_inputs(&formats::model_files(dir)?)?;
    models.retain(|(doc, _)| in_range(range, &doc.target_week));
    if models.is_empty() {
        return Err(Error::format(dir.display(), "no models found"));
    }
    Ok(models)
}

#[derive(Serialize)]
struct ModelSummaryRow<'a> {
    target_week: &'a str,
    final_loss: String,
    iterations: usize,
    weights: String,
}

fn learn(args: &LearnArgs, config: &Config, out: &Path) -> Result<()> {
    let cfg = &config.learner;
    cfg.validate()?;
    let mut m = manifest("learn", config, cfg.seed);
    let series = load_series(&args.hotspots, &mut m)?;
    let targets: Vec<usize> = (cfg.lookback..series.weeks())
        .filter(|&t| in_range(&args.weeks, &series.week_labels[t]))
        .collect();
    if targets.is_empty() {
        return Err(Error::format(
            args.hotspots.display(),
            format!("no target week in range has {} weeks of history", cfg.lookback),
        ));
    }
    info!("fitting {} weekly models", targets.len());
    let models: Vec<SpreadingModel> = targets
        .par_iter()
        .map(|&t| {
            let fitted = match &args.temporal_weights {
                Some(w) => fit_spreading_matrix(&series, t, w, cfg),
                None => search_temporal_weights(&series, t, cfg),
            };
            fitted.map_err(Error::at(format!("week {}", series.week_labels[t])))
        })
        .collect::<Result<_>>()?;

    let path = out.join("models.csv");
    let mut w = csv::Writer::from_path(&path).map_err(Error::csv(&path))?;
    for model in &models {
        formats::write_model(out, model, &series.subzone_ids)?;
        w.serialize(ModelSummaryRow {
            target_week: &model.target_week,
            final_loss: fmt_num(model.final_loss),
            iterations: model.iterations_used,
            weights: model.weights.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(";"),
        })
        .map_err(Error::csv(&path))?;
    }
    w.flush().map_err(Error::io(&path))?;
    m.write(out)?;
    Ok(())
}

/// Label of the week after `series.week_labels[t]`: the next label in the
/// series, else seven days on when labels are dates.
fn next_week_label(series: &HotspotSeries, t: usize) -> String {
    if let Some(next) = series.week_labels.get(t + 1) {
        return next.clone();
    }
    let label = &series.week_labels[t];
    chrono::NaiveDate::parse_from_str(label, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.checked_add_days(chrono::Days::new(7)))
        .map(|d| d.format("%Y-%m-%d").to_string())
        .unwrap_or_else(|| format!("{label}+1"))
}

fn forecasts_from_models(
    series: &HotspotSeries,
    models: &[(formats::ModelDocument, SpreadingModel)],
) -> Result<Vec<formats::ForecastDocument>> {
    models
        .iter()
        .map(|(doc, model)| {
            let at = format!("model for week {}", doc.target_week);
            if doc.subzones != series.subzone_ids {
                return Err(Error::at(at)(spreadnet_core::Error::LabelMismatch));
            }
            let t = series
                .week_position(&doc.target_week)
                .ok_or_else(|| Error::at(at.clone())(spreadnet_core::Error::UnknownRegion(doc.target_week.clone())))?;
            let result = forecast_next_week(model, series, t).map_err(Error::at(at))?;
            Ok(formats::ForecastDocument::new(
                &result,
                next_week_label(series, t),
                &model.weights,
                &series.subzone_ids,
            ))
        })
        .collect()
}

fn forecast(args: &ForecastArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("forecast", config, top_seed(config));
    let series = load_series(&args.hotspots, &mut m)?;
    let models = load_models(&args.models, &args.weeks, &mut m)?;
    for doc in forecasts_from_models(&series, &models)? {
        formats::write_forecast(out, &doc)?;
    }
    m.write(out)?;
    Ok(())
}

fn evaluate(args: &EvaluateArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("evaluate", config, top_seed(config));
    let series = load_series(&args.hotspots, &mut m)?;
    let docs = match (&args.forecasts, &args.models) {
        (Some(dir), _) => {
            m.add_inputs(&formats::forecast_files(dir)?)?;
            formats::read_forecasts(dir)?
        }
        (None, Some(dir)) => forecasts_from_models(&series, &load_models(dir, &None, &mut m)?)?,
        (None, None) => return Err(Error::Usage("evaluate needs --forecasts or --models".into())),
    };

    let mut by_year: BTreeMap<String, (Vec<WeeklyScore>, Vec<Vec<f64>>)> = BTreeMap::new();
    let mut weeks = Vec::new();
    for doc in docs.iter().filter(|d| in_range(&args.weeks, &d.week)) {
        let Some(t) = series.week_position(&doc.week) else {
            warn!("forecast for week {} has no observations; skipped", doc.week);
            continue;
        };
        let confusion = confusion_counts(&doc.predictions(), &series.y.column(t))
            .map_err(Error::at(format!("week {}", doc.week)))?;
        let score = weekly_metrics(doc.week.clone(), confusion);
        let year = week_year(&doc.week).map_or_else(|| "all".to_string(), |y| y.to_string());
        let entry = by_year.entry(year).or_default();
        entry.0.push(score.clone());
        entry.1.push(doc.weights.clone());
        weeks.push(score);
    }
    if weeks.is_empty() {
        return Err(Error::format(args.hotspots.display(), "no forecast week has observations"));
    }
    let years = by_year
        .iter()
        .map(|(year, (scores, weights))| yearly_summary(year.clone(), scores, weights).map_err(Error::from))
        .collect::<Result<Vec<_>>>()?;
    for y in &years {
        println!(
            "{}: {} weeks, accuracy {:.4}, precision {:.4}, recall {:.4}, F1 {:.4} (pooled {:.4})",
            y.year, y.weeks, y.accuracy_mean, y.precision_mean, y.recall_mean, y.f1_mean, y.pooled.f1
        );
    }
    formats::write_metrics(out, &weeks, &years)?;
    m.write(out)?;
    Ok(())
}

#[derive(Serialize)]
struct StabilitySummary {
    pairs: usize,
    mean: Option<f64>,
    min: Option<f64>,
    max: Option<f64>,
}

fn stability(args: &StabilityArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("stability", config, top_seed(config));
    let loaded = load_models(&args.models, &args.weeks, &mut m)?;
    let models: Vec<SpreadingModel> = loaded.into_iter().map(|(_, model)| model).collect();
    let values = consecutive_ssim(&models)?;

    let path = out.join("stability.csv");
    let mut w = csv::Writer::from_path(&path).map_err(Error::csv(&path))?;
    w.write_record(["week_a", "week_b", "ssim"]).map_err(Error::csv(&path))?;
    for (pair, v) in models.windows(2).zip(&values) {
        w.write_record([pair[0].target_week.as_str(), pair[1].target_week.as_str(), &fmt_num(*v)])
            .map_err(Error::csv(&path))?;
    }
    w.flush().map_err(Error::io(&path))?;

    let summary = StabilitySummary {
        pairs: values.len(),
        mean: (!values.is_empty()).then(|| round_num(spreadnet_core::stats::mean(&values))),
        min: values.iter().copied().reduce(f64::min).map(round_num),
        max: values.iter().copied().reduce(f64::max).map(round_num),
    };
    formats::write_json(&out.join("stability.json"), &summary)?;
    m.write(out)?;
    Ok(())
}

/// The boundary index restricted to `labels`, in that order.
fn index_for(index: &SubzoneIndex, labels: &[String], file: &Path) -> Result<SubzoneIndex> {
    let subzones = labels
        .iter()
        .map(|id| {
            index
                .position(id)
                .map(|k| index.subzones()[k].clone())
                .ok_or_else(|| Error::at(file.display().to_string())(spreadnet_core::Error::UnknownRegion(id.clone())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubzoneIndex::new(subzones)?)
}

fn write_with_rollup(out: &Path, stem: &str, net: &FlowNetwork, index: &SubzoneIndex) -> Result<()> {
    formats::write_network(out, stem, net)?;
    let areas = rollup_planning_areas(net, index)?;
    formats::write_network(out, &format!("{stem}_planning_area"), &areas)
}

fn network(args: &NetworkArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("network", config, top_seed(config));
    let models = load_models(&args.models, &args.weeks, &mut m)?;
    let labels = models[0].0.subzones.clone();
    if let Some((doc, _)) = models.iter().find(|(d, _)| d.subzones != labels) {
        return Err(Error::at(format!("model for week {}", doc.target_week))(
            spreadnet_core::Error::LabelMismatch,
        ));
    }
    let full = read_subzones(&args.subzones)?;
    m.add_input(&args.subzones)?;
    let index = index_for(&full, &labels, &args.subzones)?;

    let weekly: Vec<SpreadingModel> = models.into_iter().map(|(_, model)| model).collect();
    let aggregate = aggregate_yearly(&weekly, labels)?;
    for w in &aggregate.zero_weeks {
        warn!("week {w}: learned matrix has no positive entry");
    }
    write_with_rollup(out, "learned", &aggregate.network, &index)?;

    if let (Some(commutes_path), Some(map_path)) = (&args.commutes, &args.grid_map) {
        let commutes = formats::read_commutes(commutes_path)?;
        let grid_map = formats::read_grid_map(map_path)?;
        m.add_input(commutes_path)?;
        m.add_input(map_path)?;
        let mobility = build_mobility_network(&commutes, &grid_map, &index)?;
        if mobility.unmapped > 0 {
            warn!("{} commute tuples had no subzone", mobility.unmapped);
        }
        write_with_rollup(out, "mobility", &mobility.network, &index)?;
        let population = match config.analysis.population_mode {
            PopulationMode::Raw => index.populations(),
            PopulationMode::Density => index.densities(),
        };
        let metrics = region_metrics(&aggregate.network, &mobility.network, &population)?;
        formats::write_region_metrics(&out.join(formats::REGION_METRICS_CSV), &metrics)?;
        formats::write_json(
            &out.join("region_metrics.geojson"),
            &formats::region_metrics_geojson(&index, &metrics),
        )?;
    }
    m.write(out)?;
    Ok(())
}

fn compare(args: &CompareArgs, config: &Config, out: &Path) -> Result<()> {
    let mut m = manifest("compare", config, top_seed(config));
    let path = if args.metrics.is_dir() {
        args.metrics.join(formats::REGION_METRICS_CSV)
    } else {
        args.metrics.clone()
    };
    let metrics = formats::read_region_metrics(&path)?;
    m.add_input(&path)?;
    let mut report = compare_networks(&metrics, config.analysis.top_k);
    for pair in [&mut report.transmission_in, &mut report.transmission_out] {
        pair.pearson = pair.pearson.map(round_num);
        pair.spearman = pair.spearman.map(round_num);
        pair.jaccard_top_k = round_num(pair.jaccard_top_k);
    }
    formats::write_json(&out.join("comparison.json"), &report)?;
    m.write(out)?;
    Ok(())
}

#[derive(Serialize)]
struct SynthSummary<'a> {
    regions: usize,
    weeks: usize,
    seed: u64,
    w_star: &'a [f64],
    sparsity: f64,
    matrix_file: &'a str,
}

fn synth(_args: &SynthArgs, config: &Config, out: &Path) -> Result<()> {
    let scenario = &config.synth;
    let m = manifest("synth", config, scenario.seed);
    let world = generate(scenario)?;
    formats::write_counts_csv(&out.join(formats::COUNTS_CSV), &to_counts(&world.series)?)?;
    formats::write_hotspots(out, &world.series)?;
    formats::write_dense_matrix(&out.join("p_star.csv"), &world.series.subzone_ids, &world.p_star)?;
    formats::write_json(
        &out.join("synth.json"),
        &SynthSummary {
            regions: scenario.regions,
            weeks: scenario.weeks,
            seed: scenario.seed,
            w_star: &world.w_star,
            sparsity: round_num(world.sparsity),
            matrix_file: "p_star.csv",
        },
    )?;
    m.write(out)?;
    Ok(())
}
