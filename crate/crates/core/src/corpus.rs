//! Encoded trip corpus and its on-disk text format.
//!
//! ```text
//! #triptrie-corpus v1
//! #trip_id	taxi_id	start_epoch	t_r	symbols
//! 0	abboip	1213084687	60	4521,4521,4622
//! ```
//!
//! One tab-separated record per line after the two header lines. `symbols` is
//! a comma-separated list of region ids; `-1` marks padding. Lines end in `\n`.
//! An optional `#grid\tx_min,y_min,x_max,y_max\tn_rows\tn_cols` line after
//! the column line records the grid the corpus was encoded on.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{BoundingBox, Grid, Symbol};
use crate::ingest::{
    encode_trip, extract_trips, filter_by_duration, resample_trip, ParsedTrace, RawTrip, TripString,
};

pub const CORPUS_MAGIC: &str = "#triptrie-corpus v1";
const CORPUS_COLUMNS: &str = "#trip_id\ttaxi_id\tstart_epoch\tt_r\tsymbols";
const GRID_TAG: &str = "#grid\t";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub taxi_id: String,
    pub start_epoch: i64,
    pub trip: TripString,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EncodeStats {
    pub traces: usize,
    pub malformed_lines: usize,
    pub trips_extracted: usize,
    pub trips_within_duration: usize,
    pub trips_out_of_bounds: usize,
    pub trips_encoded: usize,
}

impl EncodeStats {
    pub fn kept_fraction(&self) -> f64 {
        if self.trips_extracted == 0 {
            1.0
        } else {
            self.trips_within_duration as f64 / self.trips_extracted as f64
        }
    }
}

/// Extracted trips of many taxis, ordered by `(taxi_id, start epoch)`.
pub fn extract_all(traces: &[(String, ParsedTrace)]) -> Vec<RawTrip> {
    let mut trips: Vec<RawTrip> = traces
        .iter()
        .flat_map(|(taxi, parsed)| extract_trips(&parsed.records, taxi))
        .collect();
    trips.sort_by(|a, b| {
        a.taxi_id
            .cmp(&b.taxi_id)
            .then(a.start_epoch().cmp(&b.start_epoch()))
    });
    trips
}

/// Bounding box of all occupied records, or `None` when there are none.
pub fn occupied_extent(traces: &[(String, ParsedTrace)]) -> Option<BoundingBox> {
    let mut points = traces
        .iter()
        .flat_map(|(_, p)| &p.records)
        .filter(|r| r.occupied)
        .map(|r| (r.lon, r.lat));
    let (x, y) = points.next()?;
    let mut b = BoundingBox::new(x, y, x, y);
    for (x, y) in points {
        b.x_min = b.x_min.min(x);
        b.x_max = b.x_max.max(x);
        b.y_min = b.y_min.min(y);
        b.y_max = b.y_max.max(y);
    }
    Some(b)
}

/// Full pipeline from parsed traces to an (unpadded) corpus. Trip ids are
/// assigned sequentially in `(taxi_id, start epoch)` order among the trips
/// that survive filtering and encoding.
pub fn encode_traces(
    traces: &[(String, ParsedTrace)],
    grid: &Grid,
    t_r: u32,
    max_minutes: f64,
) -> Result<(Vec<CorpusRecord>, EncodeStats)> {
    let mut stats = EncodeStats {
        traces: traces.len(),
        malformed_lines: traces.iter().map(|(_, p)| p.malformed).sum(),
        ..EncodeStats::default()
    };
    let trips = extract_all(traces);
    stats.trips_extracted = trips.len();
    let (kept, report) = filter_by_duration(trips, max_minutes);
    stats.trips_within_duration = report.kept;

    let mut records = Vec::with_capacity(kept.len());
    for raw in kept {
        let samples = resample_trip(&raw, t_r)?;
        match encode_trip(grid, &samples, records.len() as u64, t_r) {
            Ok(trip) => records.push(CorpusRecord {
                taxi_id: raw.taxi_id.clone(),
                start_epoch: raw.start_epoch(),
                trip,
            }),
            Err(Error::TripRejected { .. }) => stats.trips_out_of_bounds += 1,
            Err(e) => return Err(e),
        }
    }
    stats.trips_encoded = records.len();
    Ok((records, stats))
}

pub fn write_corpus(records: &[CorpusRecord]) -> Result<String> {
    write_corpus_on_grid(records, None)
}

pub fn write_corpus_on_grid(records: &[CorpusRecord], grid: Option<&Grid>) -> Result<String> {
    let mut out = String::new();
    out.push_str(CORPUS_MAGIC);
    out.push('\n');
    out.push_str(CORPUS_COLUMNS);
    out.push('\n');
    if let Some(g) = grid {
        let b = g.bbox();
        let _ = writeln!(
            out,
            "{GRID_TAG}{},{},{},{}\t{}\t{}",
            b.x_min,
            b.y_min,
            b.x_max,
            b.y_max,
            g.n_rows(),
            g.n_cols()
        );
    }
    for r in records {
        if r.taxi_id.is_empty() || r.taxi_id.contains(['\t', '\n', '\r']) {
            return Err(Error::Format(format!(
                "taxi id {:?} cannot be stored",
                r.taxi_id
            )));
        }
        let _ = write!(
            out,
            "{}\t{}\t{}\t{}\t",
            r.trip.trip_id, r.taxi_id, r.start_epoch, r.trip.t_r
        );
        for (i, z) in r.trip.symbols.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", z.raw());
        }
        out.push('\n');
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(value: &str, name: &str, line_no: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Format(format!("line {line_no}: bad {name} {value:?}")))
}

pub fn read_corpus(text: &str) -> Result<Vec<CorpusRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first == CORPUS_MAGIC => {}
        Some((_, first)) => {
            return Err(Error::Format(format!("unexpected corpus header {first:?}")))
        }
        None => return Err(Error::Format("empty corpus file".into())),
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        let [trip_id, taxi_id, start, t_r, symbols] = cols.as_slice() else {
            return Err(Error::Format(format!("line {line_no}: expected 5 columns")));
        };
        let symbols = symbols
            .split(',')
            .map(|s| Symbol::from_raw(field(s, "symbol", line_no)?))
            .collect::<Result<Vec<_>>>()?;
        let t_r: u32 = field(t_r, "t_r", line_no)?;
        if t_r == 0 {
            return Err(Error::Format(format!(
                "line {line_no}: t_r must be positive"
            )));
        }
        records.push(CorpusRecord {
            taxi_id: taxi_id.to_string(),
            start_epoch: field(start, "start_epoch", line_no)?,
            trip: TripString {
                trip_id: field(trip_id, "trip_id", line_no)?,
                t_r,
                symbols,
            },
        });
    }
    Ok(records)
}

/// The grid recorded in a corpus header, if any.
pub fn read_corpus_grid(text: &str) -> Result<Option<Grid>> {
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let Some(rest) = line.strip_prefix(GRID_TAG) else {
            continue;
        };
        let cols: Vec<&str> = rest.split('\t').collect();
        let [bbox, rows, cols] = cols.as_slice() else {
            return Err(Error::Format(format!("bad grid header {line:?}")));
        };
        let b = bbox
            .split(',')
            .map(|v| field::<f64>(v, "bounding box", 3))
            .collect::<Result<Vec<_>>>()?;
        let [x_min, y_min, x_max, y_max] = b.as_slice() else {
            return Err(Error::Format(format!("bad grid header {line:?}")));
        };
        let bbox = BoundingBox::new(*x_min, *y_min, *x_max, *y_max);
        return Grid::new(bbox, field(rows, "n_rows", 3)?, field(cols, "n_cols", 3)?).map(Some);
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoundingBox;
    use crate::ingest::parse_trace;

    #[test]
    fn pipeline_is_ordered_and_counted() {
        let grid = Grid::new(BoundingBox::new(0.0, 0.0, 10.0, 10.0), 10, 10).unwrap();
        // lat lon flag epoch, newest first as in the raw taxi files
        let b = parse_trace(
            [
                "5.5 5.5 0 400",
                "2.5 2.5 1 300",
                "1.5 1.5 1 180",
                "0.5 0.5 1 0",
                "0.5 0.5 0 -1",
            ],
            "b",
        )
        .unwrap();
        let a = parse_trace(
            [
                "0.5 0.5 1 0",
                "0.5 0.5 1 3000",
                "0.5 0.5 0 3100",
                "0.5 20.5 1 3200",
                "0.5 0.5 1 3260",
            ],
            "a",
        )
        .unwrap();
        let traces = vec![("b".to_string(), b), ("a".to_string(), a)];
        let (records, stats) = encode_traces(&traces, &grid, 60, 30.0).unwrap();
        assert_eq!(stats.malformed_lines, 1);
        assert_eq!(stats.trips_extracted, 3);
        assert_eq!(stats.trips_within_duration, 2);
        assert_eq!(stats.trips_out_of_bounds, 1);
        assert_eq!(records.len(), 1);
        let r = &records[0];
        assert_eq!(
            (r.taxi_id.as_str(), r.start_epoch, r.trip.trip_id),
            ("b", 0, 0)
        );
        // samples at 0, 60, ..., 300; interpolated between records
        let ids: Vec<i32> = r.trip.symbols.iter().map(|z| z.raw()).collect();
        assert_eq!(ids, vec![1, 1, 12, 12, 12, 23]);
    }

    #[test]
    fn extent_covers_occupied_records() {
        let t = parse_trace(["1.0 2.0 1 0", "5.0 -3.0 0 60", "4.0 7.0 1 120"], "t").unwrap();
        let b = occupied_extent(&[("t".to_string(), t)]).unwrap();
        assert_eq!(b, BoundingBox::new(2.0, 1.0, 7.0, 4.0));
        assert!(occupied_extent(&[]).is_none());
    }

    #[test]
    fn corpus_text_round_trip() {
        let records = vec![
            CorpusRecord {
                taxi_id: "abboip".into(),
                start_epoch: 1213084687,
                trip: TripString {
                    trip_id: 0,
                    t_r: 60,
                    symbols: vec![Symbol::region(4521), Symbol::region(4521), Symbol::NULL_PAD],
                },
            },
            CorpusRecord {
                taxi_id: "x".into(),
                start_epoch: 5,
                trip: TripString {
                    trip_id: 1,
                    t_r: 30,
                    symbols: vec![Symbol::region(2)],
                },
            },
        ];
        let text = write_corpus(&records).unwrap();
        assert_eq!(
            text,
            "#triptrie-corpus v1\n#trip_id\ttaxi_id\tstart_epoch\tt_r\tsymbols\n\
             0\tabboip\t1213084687\t60\t4521,4521,-1\n1\tx\t5\t30\t2\n"
        );
        assert_eq!(read_corpus(&text).unwrap(), records);
    }

    #[test]
    fn grid_header_round_trip() {
        let grid = Grid::new(BoundingBox::new(-122.5, 37.5, -122.0, 38.0), 100, 80).unwrap();
        let records = vec![CorpusRecord {
            taxi_id: "x".into(),
            start_epoch: 5,
            trip: TripString {
                trip_id: 0,
                t_r: 60,
                symbols: vec![Symbol::region(2)],
            },
        }];
        let text = write_corpus_on_grid(&records, Some(&grid)).unwrap();
        assert!(text.contains("#grid\t-122.5,37.5,-122,38\t100\t80\n"));
        assert_eq!(read_corpus(&text).unwrap(), records);
        assert_eq!(read_corpus_grid(&text).unwrap(), Some(grid));
        assert_eq!(
            read_corpus_grid(&write_corpus(&records).unwrap()).unwrap(),
            None
        );
        assert!(read_corpus_grid("#triptrie-corpus v1\n#grid\t1,2\t3\t4\n").is_err());
    }

    #[test]
    fn corpus_rejects_garbage() {
        assert!(read_corpus("").is_err());
        assert!(read_corpus("#triptrie-corpus v2\n").is_err());
        assert!(read_corpus("#triptrie-corpus v1\n0\tx\t5\t30\n").is_err());
        assert!(read_corpus("#triptrie-corpus v1\n0\tx\t5\t30\t1,-7\n").is_err());
        assert!(read_corpus("#triptrie-corpus v1\n0\tx\t5\t0\t1\n").is_err());
        let bad_id = CorpusRecord {
            taxi_id: "a\tb".into(),
            start_epoch: 0,
            trip: TripString {
                trip_id: 0,
                t_r: 1,
                symbols: vec![Symbol::region(1)],
            },
        };
        assert!(write_corpus(&[bad_id]).is_err());
    }
}
