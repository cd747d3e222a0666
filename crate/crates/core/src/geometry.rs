//! Subzone polygons and the point-in-polygon spatial join.
//!
//! Coordinates are `(longitude, latitude)` in degrees. A point on the
//! boundary of a polygon counts as inside it; when several subzones claim a
//! point (shared edges and vertices) the lexicographically smallest
//! `subzone_id` wins.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Population density (persons per km²) below which a subzone is flagged.
pub const LOW_DENSITY_PER_KM2: f64 = 10.0;

const EARTH_RADIUS_KM: f64 = 6371.0088;
const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub lon: f64,
    pub lat: f64,
}

impl Point {
    pub fn new(lon: f64, lat: f64) -> Self {
        Point { lon, lat }
    }
}

/// Closed ring; the closing vertex may or may not be repeated.
pub type Ring = Vec<Point>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BBox {
    min: Point,
    max: Point,
}

impl BBox {
    fn of(ring: &[Point]) -> Option<BBox> {
        let first = *ring.first()?;
        let mut b = BBox {
            min: first,
            max: first,
        };
        for p in ring {
            b.min.lon = b.min.lon.min(p.lon);
            b.min.lat = b.min.lat.min(p.lat);
            b.max.lon = b.max.lon.max(p.lon);
            b.max.lat = b.max.lat.max(p.lat);
        }
        Some(b)
    }

    fn contains(&self, p: Point) -> bool {
        p.lon >= self.min.lon - BOUNDARY_EPS
            && p.lon <= self.max.lon + BOUNDARY_EPS
            && p.lat >= self.min.lat - BOUNDARY_EPS
            && p.lat <= self.max.lat + BOUNDARY_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RingPosition {
    Inside,
    Boundary,
    Outside,
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    let scale = (b.lon - a.lon).abs() + (b.lat - a.lat).abs();
    if cross.abs() > BOUNDARY_EPS * scale.max(1.0) {
        return false;
    }
    p.lon >= a.lon.min(b.lon) - BOUNDARY_EPS
        && p.lon <= a.lon.max(b.lon) + BOUNDARY_EPS
        && p.lat >= a.lat.min(b.lat) - BOUNDARY_EPS
        && p.lat <= a.lat.max(b.lat) + BOUNDARY_EPS
}

fn ring_edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = ring.len();
    (0..n).map(move |k| (ring[k], ring[(k + 1) % n]))
}

/// Even-odd ray casting with an explicit boundary check first.
fn ring_position(ring: &[Point], p: Point) -> RingPosition {
    if ring.len() < 3 {
        return RingPosition::Outside;
    }
    let mut inside = false;
    for (a, b) in ring_edges(ring) {
        if on_segment(p, a, b) {
            return RingPosition::Boundary;
        }
        if (a.lat > p.lat) != (b.lat > p.lat) {
            let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if p.lon < x {
                inside = !inside;
            }
        }
    }
    if inside {
        RingPosition::Inside
    } else {
        RingPosition::Outside
    }
}

impl Polygon {
    pub fn new(exterior: Ring) -> Self {
        Polygon {
            exterior,
            holes: Vec::new(),
        }
    }

    /// Interior or boundary containment. Points strictly inside a hole are
    /// outside the polygon; points on a hole's edge are on the boundary.
    pub fn contains(&self, p: Point) -> bool {
        match ring_position(&self.exterior, p) {
            RingPosition::Outside => false,
            RingPosition::Boundary => true,
            RingPosition::Inside => self
                .holes
                .iter()
                .all(|hole| ring_position(hole, p) != RingPosition::Inside),
        }
    }

    /// Approximate area in km² (equirectangular projection about the
    /// exterior's mean latitude; adequate at city scale).
    pub fn area_km2(&self) -> f64 {
        let lat0 = if self.exterior.is_empty() {
            0.0
        } else {
            self.exterior.iter().map(|p| p.lat).sum::<f64>() / self.exterior.len() as f64
        };
        let kx = EARTH_RADIUS_KM * libm::cos(lat0.to_radians()) * core::f64::consts::PI / 180.0;
        let ky = EARTH_RADIUS_KM * core::f64::consts::PI / 180.0;
        let shoelace = |ring: &[Point]| -> f64 {
            let twice: f64 = ring_edges(ring)
                .map(|(a, b)| (a.lon * kx) * (b.lat * ky) - (b.lon * kx) * (a.lat * ky))
                .sum();
            (twice / 2.0).abs()
        };
        let holes: f64 = self.holes.iter().map(|h| shoelace(h)).sum();
        (shoelace(&self.exterior) - holes).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subzone {
    pub id: String,
    pub planning_area: Option<String>,
    pub polygons: Vec<Polygon>,
    pub population: f64,
    pub area_km2: f64,
}

impl Subzone {
    pub fn density(&self) -> f64 {
        if self.area_km2 > 0.0 {
            self.population / self.area_km2
        } else {
            0.0
        }
    }

    pub fn is_low_density(&self) -> bool {
        self.density() < LOW_DENSITY_PER_KM2
    }

    pub fn contains(&self, p: Point) -> bool {
        self.polygons.iter().any(|poly| poly.contains(p))
    }
}

/// Ordered collection of subzones. Every matrix in the crate indexes regions
/// by position in this list.
#[derive(Debug, Clone, PartialEq)]
pub struct SubzoneIndex {
    subzones: Vec<Subzone>,
    bboxes: Vec<Option<BBox>>,
}

impl SubzoneIndex {
    pub fn new(subzones: Vec<Subzone>) -> Result<Self> {
        if subzones.is_empty() {
            return Err(Error::EmptyInput("subzone index"));
        }
        let mut seen = BTreeSet::new();
        for sz in &subzones {
            if !seen.insert(sz.id.as_str()) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "duplicate subzone id {}",
                    sz.id
                )));
            }
            if !(sz.population >= 0.0) {
                return Err(Error::InvalidConfig(alloc::format!(
                    "subzone {} has negative population",
                    sz.id
                )));
            }
        }
        let bboxes = subzones
            .iter()
            .map(|sz| {
                sz.polygons
                    .iter()
                    .filter_map(|p| BBox::of(&p.exterior))
                    .reduce(|a, b| BBox {
                        min: Point::new(a.min.lon.min(b.min.lon), a.min.lat.min(b.min.lat)),
                        max: Point::new(a.max.lon.max(b.max.lon), a.max.lat.max(b.max.lat)),
                    })
            })
            .collect();
        Ok(SubzoneIndex { subzones, bboxes })
    }

    pub fn len(&self) -> usize {
        self.subzones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subzones.is_empty()
    }

    pub fn subzones(&self) -> &[Subzone] {
        &self.subzones
    }

    pub fn ids(&self) -> Vec<String> {
        self.subzones.iter().map(|s| s.id.clone()).collect()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.subzones.iter().position(|s| s.id == id)
    }

    pub fn populations(&self) -> Vec<f64> {
        self.subzones.iter().map(|s| s.population).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.subzones.iter().map(Subzone::density).collect()
    }

    /// Copy of the index without low-density subzones.
    pub fn without_low_density(&self) -> Result<SubzoneIndex> {
        let kept = self
            .subzones
            .iter()
            .filter(|s| !s.is_low_density())
            .cloned()
            .collect();
        SubzoneIndex::new(kept)
    }

    /// Position of the subzone containing `p`, smallest id on ties.
    pub fn locate(&self, p: Point) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, sz) in self.subzones.iter().enumerate() {
            let Some(bbox) = self.bboxes[k] else { continue };
            if !bbox.contains(p) || !sz.contains(p) {
                continue;
            }
            best = match best {
                Some(b) if self.subzones[b].id <= sz.id => Some(b),
                _ => Some(k),
            };
        }
        best
    }
}

/// Id of the subzone whose polygon contains the point, if any.
pub fn assign_subzone(lon: f64, lat: f64, index: &SubzoneIndex) -> Option<&str> {
    index
        .locate(Point::new(lon, lat))
        .map(|k| index.subzones[k].id.as_str())
}
