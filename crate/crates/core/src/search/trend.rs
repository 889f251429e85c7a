use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};

/// One observation, grouped by an integer key such as the dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendSample {
    pub group: usize,
    pub value: f64,
}

/// Per-group summary. `growth` is `max` divided by the `max` of the smallest
/// group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub group: usize,
    pub count: usize,
    pub max: f64,
    pub mean: f64,
    pub growth: f64,
}

/// Rows sorted by group.
pub fn trend_report(samples: &[TrendSample]) -> Result<Vec<TrendRow>> {
    if samples.is_empty() {
        return input("trend report needs at least one sample");
    }
    if let Some(s) = samples.iter().find(|s| !s.value.is_finite()) {
        return input(format!("non-finite sample in group {}", s.group));
    }
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.group).or_default().push(s.value);
    }
    let mut rows: Vec<TrendRow> = groups
        .into_iter()
        .map(|(group, v)| TrendRow {
            group,
            count: v.len(),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: v.iter().sum::<f64>() / v.len() as f64,
            growth: 1.0,
        })
        .collect();
    let base = rows[0].max;
    for r in &mut rows {
        r.growth = if base == 0.0 { if r.max == 0.0 { 1.0 } else { f64::INFINITY } } else { r.max / base };
    }
    Ok(rows)
}

pub fn write_trend_csv<W: Write>(rows: &[TrendRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
