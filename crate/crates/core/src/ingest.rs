//! Raw taxi traces to trip strings.
//!
//! A trace file holds one GPS record per line: latitude, longitude, an
//! occupancy flag and a Unix timestamp, separated by commas and/or whitespace.
//! Maximal runs of occupied records become trips, which are resampled at a
//! fixed temporal resolution and mapped onto grid regions.

use crate::error::{Error, Result};
use crate::grid::{Grid, Symbol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub lat: f64,
    pub lon: f64,
    pub occupied: bool,
    pub epoch: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrace {
    /// Sorted by epoch ascending, one record per epoch.
    pub records: Vec<TraceRecord>,
    pub malformed: usize,
    /// Records dropped because an earlier line carried the same timestamp.
    pub duplicate_epochs: usize,
}

/// An occupied run from one taxi: at least two records, strictly increasing
/// timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrip {
    pub taxi_id: String,
    pub records: Vec<TraceRecord>,
}

impl RawTrip {
    pub fn start_epoch(&self) -> i64 {
        self.records[0].epoch
    }

    pub fn end_epoch(&self) -> i64 {
        self.records[self.records.len() - 1].epoch
    }

    pub fn duration_secs(&self) -> i64 {
        self.end_epoch() - self.start_epoch()
    }
}

/// A trip as a sequence of regions, one per time step of `t_r` seconds
/// starting at time 0. Padding, when present, is a trailing run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TripString {
    pub trip_id: u64,
    pub t_r: u32,
    pub symbols: Vec<Symbol>,
}

impl TripString {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Length without the trailing padding run.
    pub fn unpadded_len(&self) -> usize {
        crate::metrics::strip_padding(&self.symbols).len()
    }
}

fn parse_line(line: &str) -> Option<TraceRecord> {
    let fields: Vec<&str> = line
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|f| !f.is_empty())
        .collect();
    let [lat, lon, flag, epoch] = fields.as_slice() else {
        return None;
    };
    let lat: f64 = lat.parse().ok()?;
    let lon: f64 = lon.parse().ok()?;
    let occupied = match *flag {
        "0" => false,
        "1" => true,
        _ => return None,
    };
    let epoch: i64 = epoch.parse().ok()?;
    let valid = (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon) && epoch >= 0;
    valid.then_some(TraceRecord {
        lat,
        lon,
        occupied,
        epoch,
    })
}

/// Parses one taxi's trace. Malformed lines are skipped and counted; the whole
/// file is rejected when more than half of its non-empty lines are malformed.
pub fn parse_trace<'a, I>(lines: I, taxi_id: &str) -> Result<ParsedTrace>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut records = Vec::new();
    let mut malformed = 0usize;
    let mut non_empty = 0usize;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        non_empty += 1;
        match parse_line(line) {
            Some(rec) => records.push(rec),
            None => malformed += 1,
        }
    }
    if malformed * 2 > non_empty {
        return Err(Error::Format(format!(
            "trace {taxi_id}: {malformed} of {non_empty} lines are malformed"
        )));
    }
    // stable: the first line seen for a timestamp wins
    records.sort_by_key(|r| r.epoch);
    let before = records.len();
    records.dedup_by_key(|r| r.epoch);
    Ok(ParsedTrace {
        duplicate_epochs: before - records.len(),
        records,
        malformed,
    })
}

pub fn parse_trace_file(path: &std::path::Path, taxi_id: &str) -> Result<ParsedTrace> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_trace(text.lines(), taxi_id)
}

/// Splits time-ordered records into maximal occupied runs. Runs of a single
/// record are discarded; a run still open at the end of the input is kept.
pub fn extract_trips(records: &[TraceRecord], taxi_id: &str) -> Vec<RawTrip> {
    records
        .split(|r| !r.occupied)
        .filter(|run| run.len() >= 2)
        .map(|run| RawTrip {
            taxi_id: taxi_id.to_string(),
            records: run.to_vec(),
        })
        .collect()
}

/// Positions `(lon, lat)` at times `0, t_r, 2 t_r, ...` after the trip starts,
/// linearly interpolated between the surrounding records.
pub fn resample_trip(trip: &RawTrip, t_r: u32) -> Result<Vec<(f64, f64)>> {
    if t_r == 0 {
        return Err(Error::Parameter(
            "temporal resolution must be positive".into(),
        ));
    }
    if trip.records.is_empty() {
        return Err(Error::Precondition("trip has no records".into()));
    }
    let start = trip.start_epoch();
    let steps = trip.duration_secs().max(0) / i64::from(t_r);
    let recs = &trip.records;

    let mut out = Vec::with_capacity(steps as usize + 1);
    let mut seg = 0usize;
    for k in 0..=steps {
        let t = start + k * i64::from(t_r);
        while seg + 1 < recs.len() && recs[seg + 1].epoch < t {
            seg += 1;
        }
        let a = recs[seg];
        let point = match recs.get(seg + 1) {
            Some(b) if t > a.epoch => {
                let frac = (t - a.epoch) as f64 / (b.epoch - a.epoch) as f64;
                let frac = frac.min(1.0);
                (
                    a.lon + frac * (b.lon - a.lon),
                    a.lat + frac * (b.lat - a.lat),
                )
            }
            _ => (a.lon, a.lat),
        };
        out.push(point);
    }
    Ok(out)
}

/// Maps resampled `(lon, lat)` positions to regions. Repeated regions are kept
/// since they encode dwell time. A single out-of-bounds sample rejects the trip.
pub fn encode_trip(
    grid: &Grid,
    samples: &[(f64, f64)],
    trip_id: u64,
    t_r: u32,
) -> Result<TripString> {
    let symbols = samples
        .iter()
        .enumerate()
        .map(|(index, &(x, y))| {
            grid.coord_to_symbol(x, y)
                .map_err(|_| Error::TripRejected { index })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TripString {
        trip_id,
        t_r,
        symbols,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterReport {
    pub total: usize,
    pub kept: usize,
}

impl FilterReport {
    pub fn kept_fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.kept as f64 / self.total as f64
        }
    }
}

/// Keeps trips lasting at most `max_minutes`. Pass `f64::INFINITY` to keep all.
pub fn filter_by_duration(trips: Vec<RawTrip>, max_minutes: f64) -> (Vec<RawTrip>, FilterReport) {
    let total = trips.len();
    let limit = max_minutes * 60.0;
    let kept: Vec<RawTrip> = trips
        .into_iter()
        .filter(|t| t.duration_secs() as f64 <= limit)
        .collect();
    let report = FilterReport {
        total,
        kept: kept.len(),
    };
    (kept, report)
}

/// Pads every string with trailing padding symbols up to the longest length.
pub fn pad_strings(mut strings: Vec<TripString>) -> Result<(Vec<TripString>, usize)> {
    let l = strings
        .iter()
        .map(TripString::len)
        .max()
        .ok_or_else(|| Error::Parameter("cannot pad an empty corpus".into()))?;
    for s in &mut strings {
        s.symbols.resize(l, Symbol::NULL_PAD);
    }
    Ok((strings, l))
}
