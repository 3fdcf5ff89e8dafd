use std::io::{Read, Write};

use super::{BandRow, ParticipationError, ParticipationRow};

const PARTICIPATION_HEADER: [&str; 4] = ["source_id", "TNA", "NRA", "PP"];
const BANDS_HEADER: [&str; 6] = [
    "band",
    "threshold",
    "publications",
    "errors",
    "error_percent",
    "avg_pp",
];

pub fn write_participation_csv<W: Write>(
    rows: &[ParticipationRow],
    out: W,
) -> Result<(), ParticipationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PARTICIPATION_HEADER)?;
    for r in rows {
        w.write_record([
            r.source_id.clone(),
            r.tna.to_string(),
            r.nra.to_string(),
            r.pp.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `source_id,TNA,NRA,PP`; PP is recomputed from the integer columns
/// and must agree with the stored value.
pub fn read_participation_csv<R: Read>(input: R) -> Result<Vec<ParticipationRow>, ParticipationError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    if reader.headers()?.iter().ne(PARTICIPATION_HEADER) {
        return Err(ParticipationError::Malformed {
            line: 1,
            reason: format!("header must be `{}`", PARTICIPATION_HEADER.join(",")),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |reason: &str| ParticipationError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let tna: u64 = record.get(1).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad TNA"))?;
        let nra: u64 = record.get(2).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad NRA"))?;
        let pp: f64 = record.get(3).and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad PP"))?;
        if tna == 0 || nra > tna {
            return Err(bad("need 0 <= NRA <= TNA and TNA > 0"));
        }
        let row = ParticipationRow::new(record.get(0).unwrap_or(""), tna, nra);
        if row.pp != pp {
            return Err(bad("PP disagrees with 100 * NRA / TNA"));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_bands_csv<W: Write>(table: &[BandRow], out: W) -> Result<(), ParticipationError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BANDS_HEADER)?;
    for b in table {
        w.write_record([
            b.band_index.to_string(),
            b.threshold_percent.to_string(),
            b.included.to_string(),
            b.errors.to_string(),
            b.error_percent.to_string(),
            b.avg_pp.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a band table. Returns each row with its printed error% (when the
/// cell is non-empty) and its printed average PP.
pub fn read_bands_csv<R: Read>(
    input: R,
) -> Result<Vec<(BandRow, Option<u32>, f64)>, ParticipationError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    if reader.headers()?.iter().map(str::trim).ne(BANDS_HEADER) {
        return Err(ParticipationError::Malformed {
            line: 1,
            reason: format!("header must be `{}`", BANDS_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |col: &str| ParticipationError::Malformed {
            line,
            reason: format!("bad {col}"),
        };
        let cell = |i: usize| record.get(i).unwrap_or("").trim().trim_end_matches('%');
        let band: usize = cell(0).parse().map_err(|_| bad("band"))?;
        let threshold: f64 = cell(1).parse().map_err(|_| bad("threshold"))?;
        let included: u64 = cell(2).parse().map_err(|_| bad("publications"))?;
        let errors: u64 = cell(3).parse().map_err(|_| bad("errors"))?;
        if errors > included {
            return Err(bad("errors (exceeds publications)"));
        }
        let printed = match cell(4) {
            "" => None,
            v => Some(v.parse().map_err(|_| bad("error_percent"))?),
        };
        let avg: f64 = cell(5).parse().map_err(|_| bad("avg_pp"))?;
        out.push((
            BandRow::from_aggregates(band, threshold, included, errors, avg),
            printed,
            avg,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::participation::{replay_bands, select_cutoff, REFERENCE_BANDS};

    #[test]
    fn participation_round_trip() {
        let rows = vec![ParticipationRow::new("a", 3, 1), ParticipationRow::new("b", 7, 7)];
        let mut buf = Vec::new();
        write_participation_csv(&rows, &mut buf).unwrap();
        assert_eq!(read_participation_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn tampered_pp_rejected() {
        let text = "source_id,TNA,NRA,PP\na,3,1,33.3\n";
        assert!(read_participation_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn reference_table_replays() {
        let published = read_bands_csv(REFERENCE_BANDS.as_bytes()).unwrap();
        assert_eq!(published.len(), 17);
        let replay = replay_bands(&published);
        assert!(replay.mismatches.is_empty(), "{:?}", replay.mismatches);
        assert_eq!(select_cutoff(&replay.rows, 50.0).unwrap(), 25.0);
        let mut buf = Vec::new();
        write_bands_csv(&replay.rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), REFERENCE_BANDS);
    }
}
