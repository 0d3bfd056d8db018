//! CSV and JSON track files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tracker::PitchEstimate;

pub const CSV_HEADER: &str = "frame_index,time_s,voiced,f0_hz,order,p_unvoiced";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackFormat {
    Csv,
    Json,
}

pub fn format_csv(est: &[PitchEstimate]) -> String {
    let mut out = String::with_capacity(48 * (est.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for e in est {
        let _ = writeln!(
            out,
            "{},{:.6},{},{:.6},{},{:.6}",
            e.frame_index,
            e.time,
            u8::from(e.voiced),
            e.f0,
            e.order,
            e.p_unvoiced
        );
    }
    out
}

pub fn format_json(est: &[PitchEstimate]) -> String {
    let mut s = serde_json::to_string_pretty(est).expect("estimates serialize");
    s.push('\n');
    s
}

pub fn parse_csv(text: &str) -> Result<Vec<PitchEstimate>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((n, h)) => return Err(Error::Parse { line: n + 1, message: format!("unexpected header `{h}`") }),
        None => return Err(Error::Parse { line: 1, message: "missing header".into() }),
    }
    lines
        .map(|(n, line)| {
            let err = |message: String| Error::Parse { line: n + 1, message };
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 6 {
                return Err(err(format!("expected 6 columns, got {}", f.len())));
            }
            let int = |s: &str| s.parse::<usize>().map_err(|e| err(format!("`{s}`: {e}")));
            let real = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
            let voiced = match f[2] {
                "1" => true,
                "0" => false,
                other => return Err(err(format!("voiced must be 0 or 1, got `{other}`"))),
            };
            let f0 = real(f[3])?;
            let order = int(f[4])?;
            Ok(PitchEstimate {
                frame_index: int(f[0])?,
                time: real(f[1])?,
                voiced,
                f0,
                order,
                p_unvoiced: real(f[5])?,
                candidate_f0: f0,
                candidate_order: order,
            })
        })
        .collect()
}

pub fn write_track(est: &[PitchEstimate], path: impl AsRef<Path>, format: TrackFormat) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        TrackFormat::Csv => format_csv(est),
        TrackFormat::Json => format_json(est),
    };
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_track(path: impl AsRef<Path>) -> Result<Vec<PitchEstimate>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Two whitespace-separated columns, time and f0 (0 when unvoiced).
pub fn plot_data(est: &[PitchEstimate]) -> String {
    est.iter().fold(String::new(), |mut s, e| {
        let _ = writeln!(s, "{:.6} {:.6}", e.time, e.f0);
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PitchEstimate {
        PitchEstimate {
            frame_index: 0,
            time: 0.0,
            voiced: true,
            f0: 200.1953125,
            order: 3,
            p_unvoiced: 0.012345,
            candidate_f0: 200.1953125,
            candidate_order: 3,
        }
    }

    #[test]
    fn csv_row_shape() {
        let s = format_csv(&[sample()]);
        assert_eq!(s, format!("{CSV_HEADER}\n0,0.000000,1,200.195312,3,0.012345\n"));
    }

    #[test]
    fn empty_track_is_header_only() {
        assert_eq!(format_csv(&[]), format!("{CSV_HEADER}\n"));
        assert!(parse_csv(&format_csv(&[])).unwrap().is_empty());
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let v: serde_json::Value = serde_json::from_str(&format_json(&[sample()])).unwrap();
        let obj = v[0].as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["f0", "frame_index", "order", "p_unvoiced", "time", "voiced"]);
    }

    #[test]
    fn bad_rows_rejected() {
        let bad = format!("{CSV_HEADER}\n0,0.0,2,0,0,1\n");
        assert!(matches!(parse_csv(&bad), Err(Error::Parse { line: 2, .. })));
        assert!(parse_csv("a,b\n").is_err());
    }

    #[test]
    fn plot_columns() {
        assert_eq!(plot_data(&[sample()]), "0.000000 200.195312\n");
    }
}
