//! Locality records and the weekly locality-count matrix.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::geometry::{Point, SubzoneIndex};

/// One geolocated locality row from a weekly snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalityRecord {
    pub street_address: String,
    pub latitude: f64,
    pub longitude: f64,
    pub cluster_number: u32,
    pub recent_cases: u32,
    pub total_cluster_cases: u32,
    pub collection_date: NaiveDate,
}

impl LocalityRecord {
    pub fn point(&self) -> Point {
        Point::new(self.longitude, self.latitude)
    }

    pub fn has_valid_coordinates(&self) -> bool {
        (-90.0..=90.0).contains(&self.latitude) && (-180.0..=180.0).contains(&self.longitude)
    }
}

/// Epidemiological week boundaries: weeks run seven days from `start`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeekRule {
    pub start: Weekday,
}

impl Default for WeekRule {
    fn default() -> Self {
        WeekRule {
            start: Weekday::Sun,
        }
    }
}

impl WeekRule {
    pub fn new(start: Weekday) -> Self {
        WeekRule { start }
    }

    /// First day of the week containing `date`.
    pub fn week_start(&self, date: NaiveDate) -> NaiveDate {
        let back = (7 + date.weekday().num_days_from_monday()
            - self.start.num_days_from_monday())
            % 7;
        date - Days::new(u64::from(back))
    }

    /// Week label: the ISO date of the week's first day.
    pub fn label(&self, date: NaiveDate) -> String {
        week_label(self.week_start(date))
    }
}

pub fn week_label(start: NaiveDate) -> String {
    start.format("%Y-%m-%d").to_string()
}

/// Epidemiological year of a week labelled by its start date: the calendar
/// year holding the week's fourth day.
pub fn week_year(label: &str) -> Option<i32> {
    let start = NaiveDate::parse_from_str(label, "%Y-%m-%d").ok()?;
    Some((start + Days::new(3)).year())
}

/// `N x T` matrix of locality counts; rows follow the subzone index order and
/// columns are consecutive weeks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyCaseCounts {
    pub subzone_ids: Vec<String>,
    pub week_labels: Vec<String>,
    counts: Vec<u32>,
}

impl WeeklyCaseCounts {
    pub fn new(subzone_ids: Vec<String>, week_labels: Vec<String>, counts: Vec<u32>) -> Result<Self> {
        check_dims(
            "count matrix size",
            subzone_ids.len() * week_labels.len(),
            counts.len(),
        )?;
        if week_labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "week labels must be strictly increasing".into(),
            ));
        }
        Ok(WeeklyCaseCounts {
            subzone_ids,
            week_labels,
            counts,
        })
    }

    pub fn zeros(subzone_ids: Vec<String>, week_labels: Vec<String>) -> Self {
        let counts = vec![0; subzone_ids.len() * week_labels.len()];
        WeeklyCaseCounts {
            subzone_ids,
            week_labels,
            counts,
        }
    }

    pub fn regions(&self) -> usize {
        self.subzone_ids.len()
    }

    pub fn weeks(&self) -> usize {
        self.week_labels.len()
    }

    pub fn get(&self, region: usize, week: usize) -> u32 {
        self.counts[region * self.weeks() + week]
    }

    pub fn set(&mut self, region: usize, week: usize, value: u32) {
        let w = self.weeks();
        self.counts[region * w + week] = value;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn row(&self, region: usize) -> &[u32] {
        let w = self.weeks();
        &self.counts[region * w..(region + 1) * w]
    }
}

/// Result of [`build_weekly_counts`] with the bookkeeping callers report.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsBuild {
    pub counts: WeeklyCaseCounts,
    /// Records whose point fell outside every subzone.
    pub outside: usize,
    /// Records with out-of-range coordinates.
    pub invalid: usize,
    /// Records dropped as repeats of an `(address, week)` already counted.
    pub duplicates: usize,
    /// Weeks with no records that were filled with zeros.
    pub empty_weeks: Vec<String>,
}

/// Counts localities per subzone and epidemiological week.
///
/// A locality is counted once per `(street_address, week)`; the first
/// occurrence in address/date order decides its subzone. Weeks between the
/// first and last populated week are always present, as zero columns when no
/// record falls in them.
pub fn build_weekly_counts(
    records: &[LocalityRecord],
    index: &SubzoneIndex,
    rule: WeekRule,
) -> Result<CountsBuild> {
    if records.is_empty() {
        return Err(Error::EmptyInput("locality records"));
    }

    // Sort a view so duplicate resolution does not depend on input order.
    let mut order: Vec<&LocalityRecord> = records.iter().collect();
    order.sort_by(|a, b| {
        a.street_address
            .cmp(&b.street_address)
            .then(a.collection_date.cmp(&b.collection_date))
            .then(a.latitude.total_cmp(&b.latitude))
            .then(a.longitude.total_cmp(&b.longitude))
    });

    let mut seen: BTreeSet<(&str, NaiveDate)> = BTreeSet::new();
    let mut cells: BTreeMap<(usize, NaiveDate), u32> = BTreeMap::new();
    let mut outside = 0;
    let mut invalid = 0;
    let mut duplicates = 0;

    for rec in order {
        let week = rule.week_start(rec.collection_date);
        if !seen.insert((rec.street_address.as_str(), week)) {
            duplicates += 1;
            continue;
        }
        if !rec.has_valid_coordinates() {
            invalid += 1;
            continue;
        }
        match index.locate(rec.point()) {
            Some(region) => *cells.entry((region, week)).or_insert(0) += 1,
            None => outside += 1,
        }
    }

    let (Some(first), Some(last)) = (
        cells.keys().map(|&(_, w)| w).min(),
        cells.keys().map(|&(_, w)| w).max(),
    ) else {
        return Err(Error::EmptyAfterFiltering);
    };

    let n_weeks = ((last - first).num_days() / 7) as usize + 1;
    let weeks: Vec<NaiveDate> = (0..n_weeks)
        .map(|k| first + Days::new(7 * k as u64))
        .collect();
    let mut counts = WeeklyCaseCounts::zeros(index.ids(), weeks.iter().map(|&d| week_label(d)).collect());
    for (&(region, week), &n) in &cells {
        let col = ((week - first).num_days() / 7) as usize;
        counts.set(region, col, n);
    }

    let populated: BTreeSet<NaiveDate> = cells.keys().map(|&(_, w)| w).collect();
    let empty_weeks = weeks
        .iter()
        .filter(|w| !populated.contains(w))
        .map(|&w| week_label(w))
        .collect();

    Ok(CountsBuild {
        counts,
        outside,
        invalid,
        duplicates,
        empty_weeks,
    })
}
