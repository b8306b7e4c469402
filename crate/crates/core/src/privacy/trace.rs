use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("line {line}: expected `<height>,<deposit|withdraw>`, found `{content}`")]
    Malformed { line: usize, content: String },
    #[error("trace is not sorted: record {index} at height {height} precedes height {previous}")]
    UnsortedTrace {
        index: usize,
        height: u64,
        previous: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    Deposit,
    Withdraw,
}

impl FromStr for TraceKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "deposit" => Ok(TraceKind::Deposit),
            "withdraw" => Ok(TraceKind::Withdraw),
            _ => Err(()),
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceKind::Deposit => "deposit",
            TraceKind::Withdraw => "withdraw",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub height: u64,
    pub kind: TraceKind,
}

/// Parses one record per line. Blank lines and `#` comments are skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || TraceError::Malformed {
            line: i + 1,
            content: raw.to_string(),
        };
        let (h, k) = line.split_once(',').ok_or_else(bad)?;
        let height = h.trim().parse().map_err(|_| bad())?;
        let kind = k.trim().parse().map_err(|_| bad())?;
        out.push(TraceRecord { height, kind });
    }
    Ok(out)
}

pub fn format_trace(records: &[TraceRecord]) -> String {
    records
        .iter()
        .map(|r| format!("{},{}\n", r.height, r.kind))
        .collect()
}

/// One deposit every `spacing` blocks starting at `spacing`, each withdrawn
/// `lag` blocks later.
pub fn uniform_trace(deposits: u64, spacing: u64, lag: u64) -> Vec<TraceRecord> {
    let mut recs: Vec<TraceRecord> = (1..=deposits)
        .flat_map(|i| {
            let h = i * spacing;
            [
                TraceRecord {
                    height: h,
                    kind: TraceKind::Deposit,
                },
                TraceRecord {
                    height: h + lag,
                    kind: TraceKind::Withdraw,
                },
            ]
        })
        .collect();
    recs.sort_by_key(|r| (r.height, r.kind == TraceKind::Withdraw));
    recs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowStat {
    pub span: u64,
    /// Mean deposit count over every span-long window inside the trace.
    pub average: f64,
    pub windows: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GapPoint {
    pub height: u64,
    pub deposits: u64,
    pub withdrawals: u64,
    pub gap: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub deposits: u64,
    pub withdrawals: u64,
    pub first_height: u64,
    pub last_height: u64,
    pub windows: Vec<WindowStat>,
    pub gap: Vec<GapPoint>,
}

impl TraceReport {
    /// Line-delimited JSON: a summary line, one line per window, then the gap series.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let summary = serde_json::json!({
            "record": "summary",
            "deposits": self.deposits,
            "withdrawals": self.withdrawals,
            "first_height": self.first_height,
            "last_height": self.last_height,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        for w in &self.windows {
            let line = serde_json::json!({
                "record": "window",
                "span": w.span,
                "average": w.average,
                "windows": w.windows,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        for g in &self.gap {
            let line = serde_json::json!({
                "record": "gap",
                "height": g.height,
                "deposits": g.deposits,
                "withdrawals": g.withdrawals,
                "gap": g.gap,
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Windows are `[s, s + span)` for every start `s` from the first record's
/// height while the window stays inside the trace; a trace shorter than
/// `span` yields one window from the first height.
pub fn analyze_trace(records: &[TraceRecord], spans: &[u64]) -> Result<TraceReport, TraceError> {
    for (i, pair) in records.windows(2).enumerate() {
        if pair[1].height < pair[0].height {
            return Err(TraceError::UnsortedTrace {
                index: i + 1,
                height: pair[1].height,
                previous: pair[0].height,
            });
        }
    }
    let deposits: Vec<u64> = records
        .iter()
        .filter(|r| r.kind == TraceKind::Deposit)
        .map(|r| r.height)
        .collect();
    let (first, last) = match (records.first(), records.last()) {
        (Some(a), Some(b)) => (a.height, b.height),
        _ => (0, 0),
    };

    let windows = spans
        .iter()
        .map(|&span| {
            if records.is_empty() || span == 0 {
                return WindowStat {
                    span,
                    average: 0.0,
                    windows: 0,
                };
            }
            let last_start = (last + 1).saturating_sub(span).max(first);
            let count_below = |h: u64| deposits.partition_point(|&d| d < h) as u64;
            let total: u64 = (first..=last_start)
                .map(|s| count_below(s.saturating_add(span)) - count_below(s))
                .sum();
            let n = last_start - first + 1;
            WindowStat {
                span,
                average: total as f64 / n as f64,
                windows: n,
            }
        })
        .collect();

    let mut gap: Vec<GapPoint> = Vec::new();
    let (mut d, mut w) = (0u64, 0u64);
    for r in records {
        match r.kind {
            TraceKind::Deposit => d += 1,
            TraceKind::Withdraw => w += 1,
        }
        let point = GapPoint {
            height: r.height,
            deposits: d,
            withdrawals: w,
            gap: d as i64 - w as i64,
        };
        match gap.last_mut() {
            Some(p) if p.height == r.height => *p = point,
            _ => gap.push(point),
        }
    }

    Ok(TraceReport {
        deposits: d,
        withdrawals: w,
        first_height: first,
        last_height: last,
        windows,
        gap,
    })
}
