//! On-disk artifacts exchanged between pipeline stages.
//!
//! Numeric CSV cells use a fixed number of decimals so reruns diff cleanly.
//! Matrices are written dense with a header row of column labels and the row
//! label in the first column.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spreadnet_core::analysis::{FlowNetwork, Level, NetworkKind, RegionMetrics};
use spreadnet_core::counts::WeeklyCaseCounts;
use spreadnet_core::evaluation::{WeeklyScore, YearlySummary};
use spreadnet_core::forecast::ForecastResult;
use spreadnet_core::geometry::SubzoneIndex;
use spreadnet_core::hotspot::HotspotSeries;
use spreadnet_core::learner::SpreadingModel;
use spreadnet_core::{BinaryMatrix, Matrix};

use crate::error::{Error, Result};

pub const DECIMALS: usize = 10;

pub const COUNTS_CSV: &str = "counts.csv";
pub const COUNTS_JSON: &str = "counts.json";
pub const HOTSPOT_CSV: &str = "hotspots_y.csv";
pub const PRESENCE_CSV: &str = "presence_y_hat.csv";
pub const HOTSPOT_META: &str = "hotspots.json";
pub const REGION_METRICS_CSV: &str = "region_metrics.csv";

/// Fixed-decimal rendering; negative zero prints as zero.
pub fn fmt_num(v: f64) -> String {
    let s = format!("{v:.DECIMALS$}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Rounds to [`DECIMALS`] places for JSON output.
pub fn round_num(v: f64) -> f64 {
    let scale = 10f64.powi(DECIMALS as i32);
    let r = (v * scale).round() / scale;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn round_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(round_num).collect()
}

/// Turns a week or region label into a safe file stem.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' })
        .collect()
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(Error::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::json(path))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(Error::json(path))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(Error::csv(path))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(Error::csv(path))
}

/// Labelled dense table: `corner, col...` header then `row_label, cell...`.
pub struct Table {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub cells: Vec<Vec<String>>,
}

pub fn write_table<F>(path: &Path, corner: &str, rows: &[String], cols: &[String], cell: F) -> Result<()>
where
    F: Fn(usize, usize) -> String,
{
    let mut w = csv_writer(path)?;
    let header = std::iter::once(corner.to_string()).chain(cols.iter().cloned());
    w.write_record(header).map_err(Error::csv(path))?;
    for (i, label) in rows.iter().enumerate() {
        let record = std::iter::once(label.clone()).chain((0..cols.len()).map(|j| cell(i, j)));
        w.write_record(record).map_err(Error::csv(path))?;
    }
    w.flush().map_err(Error::io(path))
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv_reader(path)?;
    let headers = r.headers().map_err(Error::csv(path))?.clone();
    let col_labels: Vec<String> = headers.iter().skip(1).map(String::from).collect();
    let mut row_labels = Vec::new();
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(Error::csv(path))?;
        let mut it = rec.iter();
        row_labels.push(it.next().unwrap_or_default().to_string());
        let row: Vec<String> = it.map(String::from).collect();
        if row.len() != col_labels.len() {
            return Err(Error::format(
                path.display(),
                format!("row {} has {} cells, expected {}", row_labels.len(), row.len(), col_labels.len()),
            ));
        }
        cells.push(row);
    }
    Ok(Table {
        row_labels,
        col_labels,
        cells,
    })
}

fn parse_cell<T: std::str::FromStr>(path: &Path, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::format(path.display(), format!("cannot parse cell {s:?}")))
}

// ---- counts ----

pub fn write_counts_csv(path: &Path, counts: &WeeklyCaseCounts) -> Result<()> {
    write_table(path, "subzone_id", &counts.subzone_ids, &counts.week_labels, |i, t| {
        counts.get(i, t).to_string()
    })
}

pub fn read_counts_csv(path: &Path) -> Result<WeeklyCaseCounts> {
    let table = read_table(path)?;
    let mut values = Vec::with_capacity(table.row_labels.len() * table.col_labels.len());
    for row in &table.cells {
        for cell in row {
            values.push(parse_cell::<u32>(path, cell)?);
        }
    }
    WeeklyCaseCounts::new(table.row_labels, table.col_labels, values)
        .map_err(Error::at(path.display().to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CountsDocument {
    pub subzones: Vec<String>,
    pub weeks: Vec<String>,
    pub counts: Vec<Vec<u32>>,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

pub fn write_counts_json(
    path: &Path,
    counts: &WeeklyCaseCounts,
    metadata: BTreeMap<String, serde_json::Value>,
) -> Result<()> {
    let doc = CountsDocument {
        subzones: counts.subzone_ids.clone(),
        weeks: counts.week_labels.clone(),
        counts: (0..counts.regions()).map(|i| counts.row(i).to_vec()).collect(),
        metadata,
    };
    write_json(path, &doc)
}

// ---- hotspot series ----

#[derive(Debug, Serialize, Deserialize)]
struct HotspotMeta {
    threshold: u32,
    subzones: Vec<String>,
    weeks: Vec<String>,
    hotspot_file: String,
    presence_file: String,
}

fn write_binary(path: &Path, ids: &[String], weeks: &[String], m: &BinaryMatrix) -> Result<()> {
    write_table(path, "subzone_id", ids, weeks, |i, t| {
        if m.get(i, t) { "1" } else { "0" }.to_string()
    })
}

fn read_binary(path: &Path) -> Result<(Vec<String>, Vec<String>, BinaryMatrix)> {
    let table = read_table(path)?;
    let (n, t) = (table.row_labels.len(), table.col_labels.len());
    let mut m = BinaryMatrix::zeros(n, t);
    for (i, row) in table.cells.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            match cell.as_str() {
                "0" => {}
                "1" => m.set(i, j, true),
                other => return Err(Error::format(path.display(), format!("expected 0 or 1, found {other:?}"))),
            }
        }
    }
    Ok((table.row_labels, table.col_labels, m))
}

pub fn write_hotspots(dir: &Path, series: &HotspotSeries) -> Result<()> {
    ensure_dir(dir)?;
    write_binary(&dir.join(HOTSPOT_CSV), &series.subzone_ids, &series.week_labels, &series.y)?;
    write_binary(&dir.join(PRESENCE_CSV), &series.subzone_ids, &series.week_labels, &series.y_hat)?;
    write_json(
        &dir.join(HOTSPOT_META),
        &HotspotMeta {
            threshold: series.threshold,
            subzones: series.subzone_ids.clone(),
            weeks: series.week_labels.clone(),
            hotspot_file: HOTSPOT_CSV.into(),
            presence_file: PRESENCE_CSV.into(),
        },
    )
}

pub fn hotspot_files(dir: &Path) -> Vec<PathBuf> {
    [HOTSPOT_CSV, PRESENCE_CSV, HOTSPOT_META]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

pub fn read_hotspots(dir: &Path) -> Result<HotspotSeries> {
    let meta: HotspotMeta = read_json(&dir.join(HOTSPOT_META))?;
    let y_path = dir.join(&meta.hotspot_file);
    let (ids, weeks, y) = read_binary(&y_path)?;
    let (ids2, weeks2, y_hat) = read_binary(&dir.join(&meta.presence_file))?;
    if ids != ids2 || weeks != weeks2 || ids != meta.subzones || weeks != meta.weeks {
        return Err(Error::format(dir.display(), "hotspot and presence tables disagree on labels"));
    }
    HotspotSeries::new(ids, weeks, y, y_hat, meta.threshold).map_err(Error::at(y_path.display().to_string()))
}

// ---- models ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelDocument {
    pub target_week: String,
    pub lookback: usize,
    pub weights: Vec<f64>,
    pub final_loss: f64,
    pub iterations_used: usize,
    pub subzones: Vec<String>,
    /// Dense CSV holding `P`, relative to this file.
    pub matrix_file: String,
}

pub fn model_json_path(dir: &Path, week: &str) -> PathBuf {
    dir.join(format!("model_{}.json", file_stem(week)))
}

pub fn write_dense_matrix(path: &Path, labels: &[String], m: &Matrix) -> Result<()> {
    write_table(path, "region", labels, labels, |i, j| fmt_num(m[(i, j)]))
}

pub fn read_dense_matrix(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let table = read_table(path)?;
    if table.row_labels != table.col_labels {
        return Err(Error::format(path.display(), "row and column labels differ"));
    }
    let n = table.row_labels.len();
    let mut data = Vec::with_capacity(n * n);
    for row in &table.cells {
        for cell in row {
            data.push(parse_cell::<f64>(path, cell)?);
        }
    }
    let m = Matrix::from_vec(n, n, data).map_err(Error::at(path.display().to_string()))?;
    Ok((table.row_labels, m))
}

pub fn write_model(dir: &Path, model: &SpreadingModel, subzones: &[String]) -> Result<()> {
    let stem = file_stem(&model.target_week);
    let matrix_file = format!("model_{stem}_P.csv");
    write_dense_matrix(&dir.join(&matrix_file), subzones, &model.p)?;
    let doc = ModelDocument {
        target_week: model.target_week.clone(),
        lookback: model.weights.len(),
        weights: round_all(&model.weights),
        final_loss: round_num(model.final_loss),
        iterations_used: model.iterations_used,
        subzones: subzones.to_vec(),
        matrix_file,
    };
    write_json(&model_json_path(dir, &model.target_week), &doc)
}

pub fn read_model(json_path: &Path) -> Result<(ModelDocument, SpreadingModel)> {
    let doc: ModelDocument = read_json(json_path)?;
    let dir = json_path.parent().unwrap_or(Path::new("."));
    let (labels, p) = read_dense_matrix(&dir.join(&doc.matrix_file))?;
    if labels != doc.subzones {
        return Err(Error::format(json_path.display(), "matrix labels differ from model subzones"));
    }
    let model = SpreadingModel {
        p,
        weights: doc.weights.clone(),
        target_week: doc.target_week.clone(),
        final_loss: doc.final_loss,
        iterations_used: doc.iterations_used,
    };
    Ok((doc, model))
}

fn list_prefixed(dir: &Path, prefix: &str, suffix: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(Error::io(dir))? {
        let path = entry.map_err(Error::io(dir))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if name.starts_with(prefix) && name.ends_with(suffix) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// All models in a directory, ordered by target week label.
pub fn read_models(dir: &Path) -> Result<Vec<(ModelDocument, SpreadingModel)>> {
    let mut models = list_prefixed(dir, "model_", ".json")?
        .iter()
        .map(|p| read_model(p))
        .collect::<Result<Vec<_>>>()?;
    models.sort_by(|a, b| a.0.target_week.cmp(&b.0.target_week));
    Ok(models)
}

pub fn model_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = list_prefixed(dir, "model_", ".json")?;
    files.extend(list_prefixed(dir, "model_", ".csv")?);
    files.sort();
    Ok(files)
}

// ---- forecasts ----

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastEntry {
    pub id: String,
    pub score: f64,
    pub prediction: u8,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForecastDocument {
    /// Forecast week.
    pub week: String,
    /// Latest week whose observations fed the forecast.
    pub source_week: String,
    pub threshold: f64,
    pub weights: Vec<f64>,
    pub subzones: Vec<ForecastEntry>,
}

impl ForecastDocument {
    pub fn new(result: &ForecastResult, week: String, weights: &[f64], ids: &[String]) -> Self {
        ForecastDocument {
            week,
            source_week: result.source_week.clone(),
            threshold: round_num(result.threshold),
            weights: round_all(weights),
            subzones: ids
                .iter()
                .zip(&result.scores)
                .zip(&result.predictions)
                .map(|((id, &score), &p)| ForecastEntry {
                    id: id.clone(),
                    score: round_num(score),
                    prediction: u8::from(p),
                })
                .collect(),
        }
    }

    pub fn predictions(&self) -> Vec<bool> {
        self.subzones.iter().map(|e| e.prediction == 1).collect()
    }
}

pub fn write_forecast(dir: &Path, doc: &ForecastDocument) -> Result<()> {
    let stem = file_stem(&doc.week);
    write_json(&dir.join(format!("forecast_{stem}.json")), doc)?;
    let path = dir.join(format!("forecast_{stem}.csv"));
    let mut w = csv_writer(&path)?;
    w.write_record(["subzone_id", "score", "prediction"]).map_err(Error::csv(&path))?;
    for e in &doc.subzones {
        w.write_record([e.id.clone(), fmt_num(e.score), e.prediction.to_string()])
            .map_err(Error::csv(&path))?;
    }
    w.flush().map_err(Error::io(&path))
}

pub fn read_forecasts(dir: &Path) -> Result<Vec<ForecastDocument>> {
    let mut docs = list_prefixed(dir, "forecast_", ".json")?
        .iter()
        .map(|p| read_json::<ForecastDocument>(p))
        .collect::<Result<Vec<_>>>()?;
    docs.sort_by(|a, b| a.week.cmp(&b.week));
    Ok(docs)
}

pub fn forecast_files(dir: &Path) -> Result<Vec<PathBuf>> {
    list_prefixed(dir, "forecast_", ".json")
}

// ---- metrics ----

#[derive(Debug, Serialize)]
pub struct MetricsDocument<'a> {
    pub weeks: &'a [WeeklyScore],
    pub years: &'a [YearlySummary],
}

pub fn write_metrics(dir: &Path, weeks: &[WeeklyScore], years: &[YearlySummary]) -> Result<()> {
    let round_week = |s: &WeeklyScore| {
        let mut s = s.clone();
        let m = &mut s.metrics;
        m.accuracy = round_num(m.accuracy);
        m.precision = round_num(m.precision);
        m.recall = round_num(m.recall);
        m.f1 = round_num(m.f1);
        s
    };
    let rounded_weeks: Vec<WeeklyScore> = weeks.iter().map(round_week).collect();
    let rounded_years: Vec<YearlySummary> = years
        .iter()
        .map(|y| {
            let mut y = y.clone();
            for v in [
                &mut y.accuracy_mean,
                &mut y.accuracy_std,
                &mut y.precision_mean,
                &mut y.recall_mean,
                &mut y.f1_mean,
                &mut y.pooled.accuracy,
                &mut y.pooled.precision,
                &mut y.pooled.recall,
                &mut y.pooled.f1,
            ] {
                *v = round_num(*v);
            }
            for d in &mut y.weight_stats {
                for v in [&mut d.min, &mut d.median, &mut d.mean, &mut d.max] {
                    *v = round_num(*v);
                }
            }
            y
        })
        .collect();
    write_json(
        &dir.join("metrics.json"),
        &MetricsDocument {
            weeks: &rounded_weeks,
            years: &rounded_years,
        },
    )?;

    let path = dir.join("metrics.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "kind", "label", "weeks", "tp", "fp", "tn", "fn", "accuracy", "accuracy_std", "precision", "recall", "f1",
        "pooled_f1",
    ])
    .map_err(Error::csv(&path))?;
    for s in weeks {
        let c = &s.confusion;
        let m = &s.metrics;
        w.write_record([
            "week".to_string(),
            s.week.clone(),
            "1".into(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            fmt_num(m.accuracy),
            String::new(),
            fmt_num(m.precision),
            fmt_num(m.recall),
            fmt_num(m.f1),
            String::new(),
        ])
        .map_err(Error::csv(&path))?;
    }
    for y in years {
        w.write_record([
            "year".to_string(),
            y.year.clone(),
            y.weeks.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            fmt_num(y.accuracy_mean),
            fmt_num(y.accuracy_std),
            fmt_num(y.precision_mean),
            fmt_num(y.recall_mean),
            fmt_num(y.f1_mean),
            fmt_num(y.pooled.f1),
        ])
        .map_err(Error::csv(&path))?;
    }
    w.flush().map_err(Error::io(&path))
}

// ---- networks ----

/// Edge list of the non-zero entries. For learned networks entry `(i, j)` is
/// spreading from `j` into `i`, so `src_id = labels[j]`, `dst_id = labels[i]`.
pub fn write_edge_list(path: &Path, net: &FlowNetwork) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["src_id", "dst_id", "weight"]).map_err(Error::csv(path))?;
    let n = net.len();
    for j in 0..n {
        for i in 0..n {
            let v = net.weights[(i, j)];
            if v != 0.0 {
                w.write_record([net.labels[j].as_str(), net.labels[i].as_str(), &fmt_num(v)])
                    .map_err(Error::csv(path))?;
            }
        }
    }
    w.flush().map_err(Error::io(path))
}

pub fn write_network(dir: &Path, stem: &str, net: &FlowNetwork) -> Result<()> {
    write_dense_matrix(&dir.join(format!("{stem}.csv")), &net.labels, &net.weights)?;
    write_edge_list(&dir.join(format!("{stem}_edges.csv")), net)
}

pub fn read_network(path: &Path, kind: NetworkKind, level: Level) -> Result<FlowNetwork> {
    let (labels, weights) = read_dense_matrix(path)?;
    FlowNetwork::new(weights, kind, level, labels).map_err(Error::at(path.display().to_string()))
}

// ---- mobility inputs ----

/// `home_grid,work_grid` rows.
pub fn read_commutes(path: &Path) -> Result<Vec<(String, String)>> {
    let mut r = csv_reader(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(Error::csv(path))?;
        match (rec.get(0), rec.get(1)) {
            (Some(h), Some(w)) => out.push((h.to_string(), w.to_string())),
            _ => return Err(Error::format(path.display(), "commute rows need home and work grid ids")),
        }
    }
    Ok(out)
}

/// `grid_id,subzone_id` rows.
pub fn read_grid_map(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut r = csv_reader(path)?;
    let mut out = BTreeMap::new();
    for rec in r.records() {
        let rec = rec.map_err(Error::csv(path))?;
        match (rec.get(0), rec.get(1)) {
            (Some(g), Some(s)) => {
                out.insert(g.to_string(), s.to_string());
            }
            _ => return Err(Error::format(path.display(), "grid map rows need grid and subzone ids")),
        }
    }
    Ok(out)
}

// ---- region metrics ----

pub fn write_region_metrics(path: &Path, m: &RegionMetrics) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["subzone_id", "transmission_in", "transmission_out", "mobility_ratio", "population"])
        .map_err(Error::csv(path))?;
    for k in 0..m.labels.len() {
        w.write_record([
            m.labels[k].clone(),
            fmt_num(m.transmission_in[k]),
            fmt_num(m.transmission_out[k]),
            fmt_num(m.mobility_ratio[k]),
            fmt_num(m.population[k]),
        ])
        .map_err(Error::csv(path))?;
    }
    w.flush().map_err(Error::io(path))
}

pub fn read_region_metrics(path: &Path) -> Result<RegionMetrics> {
    let mut r = csv_reader(path)?;
    let mut m = RegionMetrics {
        labels: Vec::new(),
        transmission_in: Vec::new(),
        transmission_out: Vec::new(),
        mobility_ratio: Vec::new(),
        population: Vec::new(),
    };
    for rec in r.records() {
        let rec = rec.map_err(Error::csv(path))?;
        if rec.len() != 5 {
            return Err(Error::format(path.display(), "region metrics rows need 5 columns"));
        }
        m.labels.push(rec[0].to_string());
        m.transmission_in.push(parse_cell(path, &rec[1])?);
        m.transmission_out.push(parse_cell(path, &rec[2])?);
        m.mobility_ratio.push(parse_cell(path, &rec[3])?);
        m.population.push(parse_cell(path, &rec[4])?);
    }
    Ok(m)
}

/// GeoJSON FeatureCollection of the subzone polygons with the metric values
/// as feature properties.
pub fn region_metrics_geojson(index: &SubzoneIndex, m: &RegionMetrics) -> serde_json::Value {
    use serde_json::json;
    let features: Vec<_> = m
        .labels
        .iter()
        .enumerate()
        .filter_map(|(k, id)| {
            let sz = &index.subzones()[index.position(id)?];
            let polygons: Vec<_> = sz
                .polygons
                .iter()
                .map(|p| {
                    std::iter::once(&p.exterior)
                        .chain(&p.holes)
                        .map(|ring| ring.iter().map(|pt| json!([pt.lon, pt.lat])).collect::<Vec<_>>())
                        .collect::<Vec<_>>()
                })
                .collect();
            Some(json!({
                "type": "Feature",
                "properties": {
                    "subzone_id": id,
                    "planning_area_id": sz.planning_area,
                    "transmission_in": round_num(m.transmission_in[k]),
                    "transmission_out": round_num(m.transmission_out[k]),
                    "mobility_ratio": round_num(m.mobility_ratio[k]),
                    "population": round_num(m.population[k]),
                },
                "geometry": {"type": "MultiPolygon", "coordinates": polygons},
            }))
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}
