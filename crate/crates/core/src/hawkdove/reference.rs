use std::io::Write;

use serde::{Deserialize, Serialize};

use super::HdConfig;
use crate::error::{Error, Result};
use crate::refdata::{gini, Column, ColumnKind, ReferenceDataset};

pub const COLUMN: &str = "total_resource";

/// Final wealth per agent, sorted ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct WealthDistribution(Vec<f64>);

impl WealthDistribution {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        WealthDistribution(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn gini(&self) -> Result<f64> {
        gini(&self.0)
    }

    pub fn to_dataset(&self, provenance: &str) -> Result<ReferenceDataset> {
        ReferenceDataset::from_columns(
            vec![Column::new(COLUMN, ColumnKind::Numeric)],
            vec![self.0.clone()],
            provenance,
        )
    }

    pub fn from_dataset(d: &ReferenceDataset) -> Result<Self> {
        let values = d.column(COLUMN).ok_or_else(|| Error::Schema {
            missing: vec![COLUMN.into()],
            available: d.names().iter().map(|s| s.to_string()).collect(),
        })?;
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::Data("wealth values must be non-negative".into()));
        }
        Ok(WealthDistribution::new(values.to_vec()))
    }
}

/// Hand-made target distributions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Everyone ends with `value` (default: `ticks`, the "take 1" outcome).
    Equality {
        #[serde(default)]
        value: Option<f64>,
    },
    /// The poorest `split` fraction ends with `low`, the rest with `high`.
    #[serde(rename_all = "camelCase")]
    TwoTier { low: f64, high: f64, split: f64 },
    /// Expected sorted Pareto sample with tail `shape`, scaled to `mean`
    /// (default: `ticks`).
    #[serde(rename_all = "camelCase")]
    ParetoLike {
        shape: f64,
        #[serde(default)]
        mean: Option<f64>,
    },
}

pub fn make_reference(spec: &ReferenceSpec, config: &HdConfig) -> Result<WealthDistribution> {
    let n = config.n_agents;
    let bad = |m: &str| Err(Error::Config(m.to_string()));
    let values = match *spec {
        ReferenceSpec::Equality { value } => {
            let v = value.unwrap_or(config.ticks as f64);
            if !(v.is_finite() && v >= 0.0) {
                return bad("equality value must be finite and non-negative");
            }
            vec![v; n]
        }
        ReferenceSpec::TwoTier { low, high, split } => {
            if !(low >= 0.0 && high >= low && high.is_finite()) {
                return bad("two-tier needs 0 <= low <= high");
            }
            if !(0.0..=1.0).contains(&split) {
                return bad("two-tier split must lie in [0, 1]");
            }
            let n_low = (split * n as f64).round() as usize;
            (0..n).map(|i| if i < n_low { low } else { high }).collect()
        }
        ReferenceSpec::ParetoLike { shape, mean } => {
            if !(shape > 1.0 && shape.is_finite()) {
                return bad("pareto shape must exceed 1");
            }
            let mean = mean.unwrap_or(config.ticks as f64);
            if !(mean > 0.0 && mean.is_finite()) {
                return bad("pareto mean must be positive");
            }
            // Expected order statistics of a Pareto sample of size n, up to a
            // common factor: E[X(n-m+1)] is proportional to
            // Gamma(m - 1/shape) / Gamma(m).
            let mut raw = Vec::with_capacity(n);
            let mut w = 1.0;
            for m in 1..=n {
                raw.push(w);
                w *= (m as f64 - 1.0 / shape) / m as f64;
            }
            let scale = mean * n as f64 / raw.iter().sum::<f64>();
            raw.into_iter().map(|x| x * scale).collect()
        }
    };
    Ok(WealthDistribution::new(values))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bin {
    pub bin_low: f64,
    pub bin_high: f64,
    pub count: usize,
}

/// Equal-width bins spanning the data; a single bin when all values agree.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    if values.is_empty() {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi || bins <= 1 {
        return vec![Bin {
            bin_low: lo,
            bin_high: hi,
            count: values.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|b| Bin {
            bin_low: lo + width * b as f64,
            bin_high: if b + 1 == bins { hi } else { lo + width * (b + 1) as f64 },
            count: 0,
        })
        .collect();
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

pub fn write_histogram<W: Write>(bins: &[Bin], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for b in bins {
        w.serialize(b)?;
    }
    w.flush()?;
    Ok(())
}
