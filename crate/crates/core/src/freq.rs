//! City-scale change frequency: 30 m tiles, the encounter probability of a
//! changed tile, per-tile change probability among well-visited tiles, and
//! the yearly encounter extrapolation.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const TILE_SIZE: f64 = 30.0;
pub const METERS_PER_MILE: f64 = 1609.0;
/// Annual U.S. vehicle miles traveled used for the extrapolation.
pub const US_MILES_PER_YEAR: f64 = 3.225e12;
pub const DEFAULT_MIN_VISITS: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileId {
    pub ix: i64,
    pub iy: i64,
}

pub fn tile_index(p: Point2, tile_size: f64) -> TileId {
    TileId {
        ix: (p.x / tile_size).floor() as i64,
        iy: (p.y / tile_size).floor() as i64,
    }
}

/// Tile entries along a trajectory: a new entry whenever the tile differs
/// from the previous sample's tile. The first sample counts as an entry.
pub fn tile_entries(positions: &[Point2], tile_size: f64) -> Vec<TileId> {
    let mut out: Vec<TileId> = Vec::new();
    for &p in positions {
        let t = tile_index(p, tile_size);
        if out.last() != Some(&t) {
            out.push(t);
        }
    }
    out
}

/// Fraction of tile entries that landed in a changed tile.
pub fn encounter_probability(entries: &[(TileId, bool)]) -> Result<f64> {
    if entries.is_empty() {
        return Err(Error::EmptyInput("tile entries"));
    }
    Ok(entries.iter().filter(|(_, changed)| *changed).count() as f64 / entries.len() as f64)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileStats {
    pub visits: u64,
    pub changed: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TileVisitLog {
    pub tiles: BTreeMap<TileId, TileStats>,
}

impl TileVisitLog {
    pub fn record(&mut self, tile: TileId, visits: u64, changed: bool) {
        let e = self.tiles.entry(tile).or_default();
        e.visits += visits;
        e.changed |= changed;
    }

    /// Every visit is one entry; entries into changed tiles count as
    /// changed encounters.
    pub fn encounter_probability(&self) -> Result<f64> {
        let total: u64 = self.tiles.values().map(|s| s.visits).sum();
        if total == 0 {
            return Err(Error::EmptyInput("tile visits"));
        }
        let changed: u64 = self.tiles.values().filter(|s| s.changed).map(|s| s.visits).sum();
        Ok(changed as f64 / total as f64)
    }
}

/// Among tiles visited at least `min_visits` times, the fraction that changed.
pub fn per_tile_change_probability(log: &TileVisitLog, min_visits: u32) -> Result<f64> {
    let qualifying: Vec<&TileStats> = log.tiles.values().filter(|s| s.visits >= min_visits as u64).collect();
    if qualifying.is_empty() {
        return Err(Error::NoQualifyingTiles(min_visits));
    }
    Ok(qualifying.iter().filter(|s| s.changed).count() as f64 / qualifying.len() as f64)
}

/// Expected changed-tile encounters per year: miles → meters → tiles → changes.
pub fn extrapolate_encounters(miles_per_year: f64, p: f64) -> f64 {
    miles_per_year * METERS_PER_MILE / TILE_SIZE * p
}

/// "Up to T tiles in a thousand": whole numbers at or above one, one
/// decimal below.
pub fn tiles_per_thousand(p: f64) -> f64 {
    let t = p * 1000.0;
    if t >= 1.0 {
        t.round()
    } else {
        (t * 10.0).round() / 10.0
    }
}

/// Parses `tile_ix,tile_iy,visits,changed` (header required). `changed`
/// accepts `true`/`false`/`1`/`0`.
pub fn read_visits_csv(reader: impl Read) -> Result<TileVisitLog> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut log = TileVisitLog::default();
    let bad = |what: &str, v: &str| Error::format("visits csv", format!("bad {what} {v:?}"));
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::format("visits csv", e.to_string()))?;
        if rec.len() != 4 {
            return Err(Error::format("visits csv", format!("expected 4 columns, got {}", rec.len())));
        }
        let ix = rec[0].parse().map_err(|_| bad("tile_ix", &rec[0]))?;
        let iy = rec[1].parse().map_err(|_| bad("tile_iy", &rec[1]))?;
        let visits = rec[2].parse().map_err(|_| bad("visits", &rec[2]))?;
        let changed = match rec[3].to_ascii_lowercase().as_str() {
            "true" | "1" => true,
            "false" | "0" => false,
            v => return Err(bad("changed flag", v)),
        };
        log.record(TileId { ix, iy }, visits, changed);
    }
    Ok(log)
}

/// Change-frequency report with the columns of the per-city table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub tiles: usize,
    pub encounter_probability: f64,
    pub encounters_per_year: f64,
    pub min_visits: u32,
    pub probability_of_change: f64,
    pub tiles_per_thousand: f64,
    pub probability_of_change_min1: f64,
    pub tiles_per_thousand_min1: f64,
}

pub fn frequency_report(log: &TileVisitLog, min_visits: u32) -> Result<FrequencyReport> {
    let p_eca = log.encounter_probability()?;
    let p = per_tile_change_probability(log, min_visits)?;
    let p1 = per_tile_change_probability(log, 1)?;
    Ok(FrequencyReport {
        tiles: log.tiles.len(),
        encounter_probability: p_eca,
        encounters_per_year: extrapolate_encounters(US_MILES_PER_YEAR, p_eca),
        min_visits,
        probability_of_change: p,
        tiles_per_thousand: tiles_per_thousand(p),
        probability_of_change_min1: p1,
        tiles_per_thousand_min1: tiles_per_thousand(p1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tile_indices() {
        assert_eq!(tile_index(Point2::new(0.0, 0.0), TILE_SIZE), TileId { ix: 0, iy: 0 });
        assert_eq!(tile_index(Point2::new(29.99, 30.0), TILE_SIZE), TileId { ix: 0, iy: 1 });
        assert_eq!(tile_index(Point2::new(-0.01, 0.0), TILE_SIZE), TileId { ix: -1, iy: 0 });
    }

    #[test]
    fn entries_are_transitions() {
        let path: Vec<Point2> = [0.0, 10.0, 29.0, 31.0, 35.0, 29.5, 61.0].iter().map(|&x| Point2::new(x, 1.0)).collect();
        let e = tile_entries(&path, TILE_SIZE);
        let ix: Vec<i64> = e.iter().map(|t| t.ix).collect();
        assert_eq!(ix, vec![0, 1, 0, 2]);
    }

    #[test]
    fn encounter_examples() {
        let t = TileId { ix: 0, iy: 0 };
        let mut entries = vec![(t, false); 18_123];
        entries.push((t, true));
        let p = encounter_probability(&entries).unwrap();
        assert!((p - 1.0 / 18_124.0).abs() < 1e-18);
        assert!((p - 5.5176e-5).abs() < 1e-8);

        assert_eq!(encounter_probability(&[(t, false); 10]).unwrap(), 0.0);

        let mut fixture = vec![(t, false); 199];
        fixture.push((t, true));
        let fixture: Vec<_> = fixture.iter().cycle().take(2000).copied().collect();
        assert_eq!(encounter_probability(&fixture).unwrap(), 0.005);
        assert!(encounter_probability(&[]).is_err());
    }

    fn pittsburgh_like() -> TileVisitLog {
        let mut log = TileVisitLog::default();
        for i in 0..10_000 {
            log.record(TileId { ix: i, iy: 0 }, 5 + (i % 7) as u64, i < 68);
        }
        log
    }

    #[test]
    fn per_tile_probability() {
        let mut log = pittsburgh_like();
        assert!((per_tile_change_probability(&log, 5).unwrap() - 0.0068).abs() < 1e-15);
        for i in 0..3_077 {
            log.record(TileId { ix: i, iy: 1 }, 1 + (i % 4) as u64, false);
        }
        let p1 = per_tile_change_probability(&log, 1).unwrap();
        assert!(p1 < 0.0068);
        assert!((p1 - 0.0052).abs() < 5e-5, "{p1}");

        let mut all = TileVisitLog::default();
        all.record(TileId { ix: 0, iy: 0 }, 9, true);
        assert_eq!(per_tile_change_probability(&all, 5).unwrap(), 1.0);
        assert!(matches!(per_tile_change_probability(&all, 10), Err(Error::NoQualifyingTiles(10))));
    }

    #[test]
    fn extrapolation() {
        let n = extrapolate_encounters(3.225e12, 5.5174e-5);
        assert!((n - 9.5e9).abs() / 9.5e9 < 0.01, "{n}");
        assert_eq!(extrapolate_encounters(3.225e12, 0.0), 0.0);
        assert!((extrapolate_encounters(3.0e12, 1e-5) - 1.609e9).abs() < 1.0);
    }

    #[test]
    fn thousand_rounding_matches_table_style() {
        assert_eq!(tiles_per_thousand(0.0068), 7.0);
        assert_eq!(tiles_per_thousand(0.0049), 5.0);
        assert_eq!(tiles_per_thousand(0.0009), 0.9);
        assert_eq!(tiles_per_thousand(0.0006), 0.6);
    }

    #[test]
    fn visits_csv() {
        let text = "tile_ix,tile_iy,visits,changed\n0,0,7,true\n1,-2,3,0\n";
        let log = read_visits_csv(text.as_bytes()).unwrap();
        assert_eq!(log.tiles.len(), 2);
        assert_eq!(log.tiles[&TileId { ix: 1, iy: -2 }], TileStats { visits: 3, changed: false });
        assert_eq!(log.encounter_probability().unwrap(), 0.7);
        assert!(read_visits_csv("tile_ix,tile_iy,visits,changed\n0,0,x,true\n".as_bytes()).is_err());
    }
}
