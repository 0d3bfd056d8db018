//! Ground truth ingestion and the TER, GER and MAE metrics.

use std::path::Path;

use crate::error::{Error, Result};
use crate::tracker::PitchEstimate;

/// Relative deviation beyond which a pitch estimate counts as a gross error.
pub const GROSS_ERROR_THRESHOLD: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthEntry {
    pub time: f64,
    /// Hz; zero or negative means unvoiced.
    pub f0: f64,
    pub excluded: bool,
}

impl TruthEntry {
    pub fn voiced(&self) -> bool {
        self.f0 > 0.0
    }
}

/// Reference pitch track with strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    entries: Vec<TruthEntry>,
}

impl GroundTruth {
    pub fn new(entries: Vec<TruthEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyInput("ground truth has no entries".into()));
        }
        if let Some(w) = entries.windows(2).find(|w| !(w[1].time > w[0].time)) {
            return Err(Error::Config(format!(
                "ground-truth times must increase strictly ({} then {})",
                w[0].time, w[1].time
            )));
        }
        if entries.iter().any(|e| !e.time.is_finite() || !e.f0.is_finite()) {
            return Err(Error::Config("ground truth contains non-finite values".into()));
        }
        Ok(Self { entries })
    }

    /// Parses `time_s f0_hz [x]` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse { line: n + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(err(format!("expected `time f0 [x]`, got {} fields", fields.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
            let excluded = match fields.get(2) {
                None => false,
                Some(&"x") | Some(&"X") => true,
                Some(other) => return Err(err(format!("third column must be `x`, got `{other}`"))),
            };
            entries.push(TruthEntry { time: num(fields[0])?, f0: num(fields[1])?, excluded });
        }
        Self::new(entries)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &[TruthEntry] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{:.6} {:.6}{}\n", e.time, e.f0, if e.excluded { " x" } else { "" }))
            .collect()
    }
}

fn median_spacing(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let mut d: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(f64::total_cmp);
    Some(d[d.len() / 2])
}

/// Pairs each estimate with the nearest non-excluded truth entry within half
/// the median estimate hop. Returns `(estimate index, truth index)` pairs.
pub fn align(est: &[PitchEstimate], truth: &GroundTruth) -> Result<Vec<(usize, usize)>> {
    let times: Vec<f64> = est.iter().map(|e| e.time).collect();
    let ref_times: Vec<f64> = truth.entries.iter().map(|e| e.time).collect();
    let hop = median_spacing(&times).or_else(|| median_spacing(&ref_times));
    let tol = hop.map_or(f64::INFINITY, |h| 0.5 * h * (1.0 + 1e-9));
    let mut pairs = Vec::new();
    for (ei, &t) in times.iter().enumerate() {
        let pos = ref_times.partition_point(|&r| r < t);
        let nearest = [pos.checked_sub(1), (pos < ref_times.len()).then_some(pos)]
            .into_iter()
            .flatten()
            .min_by(|&a, &b| (ref_times[a] - t).abs().total_cmp(&(ref_times[b] - t).abs()));
        if let Some(ti) = nearest {
            if (ref_times[ti] - t).abs() <= tol && !truth.entries[ti].excluded {
                pairs.push((ei, ti));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Alignment(format!(
            "no estimate lies within {tol:.6} s of an included ground-truth entry"
        )));
    }
    Ok(pairs)
}

/// Voicing error rate over aligned frames.
pub fn eval_ter(est: &[PitchEstimate], truth: &GroundTruth) -> Result<f64> {
    let pairs = align(est, truth)?;
    let wrong = pairs.iter().filter(|&&(e, t)| est[e].voiced != truth.entries[t].voiced()).count();
    Ok(wrong as f64 / pairs.len() as f64)
}

fn voiced_pairs(est: &[PitchEstimate], truth: &GroundTruth) -> Result<Vec<(f64, f64)>> {
    let pairs: Vec<(f64, f64)> = align(est, truth)?
        .into_iter()
        .filter(|&(_, t)| truth.entries[t].voiced())
        .map(|(e, t)| (est[e].f0, truth.entries[t].f0))
        .collect();
    if pairs.is_empty() {
        return Err(Error::Alignment("no aligned ground-truth-voiced frames".into()));
    }
    Ok(pairs)
}

/// Fraction of truth-voiced frames with `|f̂ − f| > 0.2 f`; unvoiced
/// decisions carry `f̂ = 0` and so always count.
pub fn eval_ger(est: &[PitchEstimate], truth: &GroundTruth) -> Result<f64> {
    let pairs = voiced_pairs(est, truth)?;
    let gross = pairs
        .iter()
        .filter(|&&(e, t)| {
            let e = if e > 0.0 { e } else { 0.0 };
            (e - t).abs() > GROSS_ERROR_THRESHOLD * t
        })
        .count();
    Ok(gross as f64 / pairs.len() as f64)
}

/// Mean absolute pitch error in Hz over truth-voiced frames. `est` should
/// come from an oracle-voicing pass, see [`oracle_voicing`].
pub fn eval_mae(est: &[PitchEstimate], truth: &GroundTruth) -> Result<f64> {
    let pairs = voiced_pairs(est, truth)?;
    Ok(pairs.iter().map(|(e, t)| (e - t).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Replaces each estimate's pitch and order with the voiced-state argmax,
/// marking every frame voiced.
pub fn oracle_voicing(est: &[PitchEstimate]) -> Vec<PitchEstimate> {
    est.iter()
        .map(|e| PitchEstimate { voiced: e.candidate_order > 0, f0: e.candidate_f0, order: e.candidate_order, ..*e })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub ter: f64,
    pub ger: f64,
    pub mae: f64,
}

/// TER and GER from `est`, MAE from its oracle-voicing view.
pub fn evaluate(est: &[PitchEstimate], truth: &GroundTruth) -> Result<Metrics> {
    Ok(Metrics {
        ter: eval_ter(est, truth)?,
        ger: eval_ger(est, truth)?,
        mae: eval_mae(&oracle_voicing(est), truth)?,
    })
}
