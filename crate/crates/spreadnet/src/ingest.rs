//! Weekly snapshot CSVs and the subzone boundary file.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use spreadnet_core::counts::LocalityRecord;
use spreadnet_core::geometry::{Point, Polygon, Ring, Subzone, SubzoneIndex};

use crate::error::{Error, Result};

/// Header names of the snapshot columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnapshotColumns {
    pub address: String,
    pub latitude: String,
    pub longitude: String,
    pub cluster_number: String,
    pub recent_cases: String,
    pub total_cases: String,
    pub date: String,
}

impl Default for SnapshotColumns {
    fn default() -> Self {
        SnapshotColumns {
            address: "address".into(),
            latitude: "lat".into(),
            longitude: "lng".into(),
            cluster_number: "cluster_no".into(),
            recent_cases: "recent_cases".into(),
            total_cases: "total_cases".into(),
            date: "date".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub records: Vec<LocalityRecord>,
    /// Rows dropped for unparseable coordinates or date.
    pub skipped: usize,
}

/// Finds a `YYMMDD` date in a snapshot filename, e.g. `130615.csv` or
/// `dengue-130615.csv`.
pub fn date_from_filename(filename: &str) -> Option<NaiveDate> {
    let stem = Path::new(filename).file_stem()?.to_str()?;
    let bytes = stem.as_bytes();
    (0..bytes.len().saturating_sub(5)).find_map(|start| {
        let window = &bytes[start..start + 6];
        let bounded = (start == 0 || !bytes[start - 1].is_ascii_digit())
            && bytes.get(start + 6).is_none_or(|b| !b.is_ascii_digit());
        if !bounded || !window.iter().all(u8::is_ascii_digit) {
            return None;
        }
        let s = std::str::from_utf8(window).ok()?;
        NaiveDate::parse_from_str(&format!("20{s}"), "%Y%m%d").ok()
    })
}

/// Accepts `YYYY-MM-DD`, `DD/MM/YYYY` and `YYMMDD`.
pub fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .or_else(|_| NaiveDate::parse_from_str(s, "%d/%m/%Y"))
        .ok()
        .or_else(|| {
            (s.len() == 6 && s.bytes().all(|b| b.is_ascii_digit()))
                .then(|| NaiveDate::parse_from_str(&format!("20{s}"), "%Y%m%d").ok())
                .flatten()
        })
}

fn parse_count(s: Option<&str>) -> u32 {
    s.and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| *v >= 0.0 && v.is_finite())
        .map_or(0, |v| v.round() as u32)
}

/// Parses one weekly snapshot. Rows whose coordinates or date cannot be read
/// are skipped and counted.
pub fn parse_snapshot<R: Read>(raw: R, filename: &str, columns: &SnapshotColumns) -> Result<Snapshot> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(raw);
    let headers = reader.headers().map_err(Error::csv(filename))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));

    let required = [&columns.address, &columns.latitude, &columns.longitude];
    let missing: Vec<&str> = required
        .iter()
        .filter(|c| find(c).is_none())
        .map(|c| c.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingHeader {
            file: filename.into(),
            missing: missing.join(", "),
        });
    }
    let (addr, lat, lng) = (
        find(&columns.address).unwrap(),
        find(&columns.latitude).unwrap(),
        find(&columns.longitude).unwrap(),
    );
    let date_col = find(&columns.date);
    let file_date = date_from_filename(filename);
    if date_col.is_none() && file_date.is_none() {
        return Err(Error::NoDateSource(filename.into()));
    }
    let cluster = find(&columns.cluster_number);
    let recent = find(&columns.recent_cases);
    let total = find(&columns.total_cases);

    let mut records = Vec::new();
    let mut skipped = 0;
    for row in reader.records() {
        let row = row.map_err(Error::csv(filename))?;
        let coord = |k: usize| row.get(k).and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite());
        let date = date_col
            .and_then(|k| row.get(k))
            .and_then(parse_date)
            .or(file_date);
        let (Some(latitude), Some(longitude), Some(collection_date)) = (coord(lat), coord(lng), date) else {
            skipped += 1;
            continue;
        };
        if !(-90.0..=90.0).contains(&latitude) || !(-180.0..=180.0).contains(&longitude) {
            skipped += 1;
            continue;
        }
        records.push(LocalityRecord {
            street_address: row.get(addr).unwrap_or_default().to_string(),
            latitude,
            longitude,
            cluster_number: parse_count(cluster.and_then(|k| row.get(k))),
            recent_cases: parse_count(recent.and_then(|k| row.get(k))),
            total_cluster_cases: parse_count(total.and_then(|k| row.get(k))),
            collection_date,
        });
    }
    Ok(Snapshot { records, skipped })
}

pub fn read_snapshot(path: &Path, columns: &SnapshotColumns) -> Result<Snapshot> {
    let file = std::fs::File::open(path).map_err(Error::io(path))?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    parse_snapshot(std::io::BufReader::new(file), name, columns).map_err(|e| match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.into(),
            source,
        },
        other => other,
    })
}

fn ring(value: &Value, file: &str) -> Result<Ring> {
    let points = value
        .as_array()
        .ok_or_else(|| Error::format(file, "ring is not an array"))?;
    points
        .iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([lon, lat, ..]) => match (lon.as_f64(), lat.as_f64()) {
                (Some(lon), Some(lat)) => Ok(Point::new(lon, lat)),
                _ => Err(Error::format(file, "non-numeric coordinate")),
            },
            _ => Err(Error::format(file, "position needs two coordinates")),
        })
        .collect()
}

fn polygon(rings: &Value, file: &str) -> Result<Polygon> {
    let rings = rings
        .as_array()
        .filter(|r| !r.is_empty())
        .ok_or_else(|| Error::format(file, "polygon without rings"))?;
    Ok(Polygon {
        exterior: ring(&rings[0], file)?,
        holes: rings[1..].iter().map(|r| ring(r, file)).collect::<Result<_>>()?,
    })
}

fn property_text(props: &Value, key: &str) -> Option<String> {
    match props.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

/// Parses a GeoJSON FeatureCollection of subzones. Each feature carries
/// `subzone_id`, `planning_area_id` and `population` properties (and
/// optionally `area_km2`, otherwise computed from the geometry).
pub fn parse_subzones(json: &str, file: &str) -> Result<SubzoneIndex> {
    let root: Value = serde_json::from_str(json).map_err(Error::json(file))?;
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::format(file, "not a FeatureCollection"))?;
    let mut subzones = Vec::with_capacity(features.len());
    for (k, feature) in features.iter().enumerate() {
        let props = feature.get("properties").unwrap_or(&Value::Null);
        let id = property_text(props, "subzone_id")
            .ok_or_else(|| Error::format(file, format!("feature {k} has no subzone_id")))?;
        let geometry = feature
            .get("geometry")
            .ok_or_else(|| Error::format(file, format!("subzone {id} has no geometry")))?;
        let coords = geometry.get("coordinates").unwrap_or(&Value::Null);
        let polygons = match geometry.get("type").and_then(Value::as_str) {
            Some("Polygon") => vec![polygon(coords, file)?],
            Some("MultiPolygon") => coords
                .as_array()
                .ok_or_else(|| Error::format(file, format!("subzone {id}: bad MultiPolygon")))?
                .iter()
                .map(|p| polygon(p, file))
                .collect::<Result<_>>()?,
            other => {
                return Err(Error::format(
                    file,
                    format!("subzone {id}: unsupported geometry {other:?}"),
                ))
            }
        };
        let population = props.get("population").and_then(Value::as_f64).unwrap_or(0.0);
        let area_km2 = props
            .get("area_km2")
            .and_then(Value::as_f64)
            .unwrap_or_else(|| polygons.iter().map(Polygon::area_km2).sum());
        subzones.push(Subzone {
            id,
            planning_area: property_text(props, "planning_area_id").filter(|s| !s.is_empty()),
            polygons,
            population,
            area_km2,
        });
    }
    SubzoneIndex::new(subzones).map_err(Error::at(file))
}

pub fn read_subzones(path: &Path) -> Result<SubzoneIndex> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    parse_subzones(&text, &path.display().to_string())
}
