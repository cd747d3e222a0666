#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub const CELL: f64 = 0.01;

/// Runs the CLI in-process and returns its exit code.
pub fn run(args: &[&str]) -> i32 {
    let argv = std::iter::once("spreadnet").chain(args.iter().copied());
    spreadnet::cli::run(argv)
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Subzones `SZ000..` on a row of square cells, five per planning area.
pub fn grid_geojson(n: usize) -> Value {
    let features: Vec<Value> = (0..n)
        .map(|k| {
            let x0 = 103.6 + CELL * k as f64;
            let y0 = 1.3;
            json!({
                "type": "Feature",
                "properties": {
                    "subzone_id": format!("SZ{k:03}"),
                    "planning_area_id": format!("PA{}", k / 5),
                    "population": 1000.0 * (1 + k % 7) as f64,
                    "area_km2": 0.5 + (k % 3) as f64,
                },
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[x0, y0], [x0 + CELL, y0], [x0 + CELL, y0 + CELL], [x0, y0 + CELL], [x0, y0]]],
                },
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

/// Centre of subzone `k` in the grid fixture.
pub fn centre(k: usize) -> (f64, f64) {
    (103.6 + CELL * (k as f64 + 0.5), 1.3 + CELL * 0.5)
}

pub fn write_geojson(dir: &Path, n: usize) -> PathBuf {
    let path = dir.join("subzones.geojson");
    fs::write(&path, serde_json::to_string(&grid_geojson(n)).unwrap()).unwrap();
    path
}

/// Seeded commute tuples over two grid cells per subzone plus one unmapped
/// grid; returns `(commutes.csv, grid_map.csv)`.
pub fn write_mobility(dir: &Path, n: usize, tuples: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = BTreeMap::new();
    for g in 0..2 * n {
        map.insert(format!("G{g:04}"), format!("SZ{:03}", g / 2));
    }
    let mut commutes = String::from("home_grid,work_grid\n");
    for _ in 0..tuples {
        let h = rng.random_range(0..2 * n + 1);
        let w = rng.random_range(0..2 * n + 1);
        commutes.push_str(&format!("G{h:04},G{w:04}\n"));
    }
    let mut grid = String::from("grid_id,subzone_id\n");
    for (g, s) in &map {
        grid.push_str(&format!("{g},{s}\n"));
    }
    let c = dir.join("commutes.csv");
    let m = dir.join("grid_map.csv");
    fs::write(&c, commutes).unwrap();
    fs::write(&m, grid).unwrap();
    (c, m)
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Every file under `dir` except manifests, as `relative path -> bytes`.
pub fn numeric_outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().unwrap() != "manifest.json" {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}
