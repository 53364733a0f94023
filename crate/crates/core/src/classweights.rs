//! Balanced class weights: w_k = n / (K * n_k), computed at full precision
//! and rounded only for display.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::floorplan::ZoneId;

/// Per-class counts and the balanced weights derived from them, in canonical
/// zone order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeightTable {
    entries: Vec<ClassWeight>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassWeight {
    pub zone: ZoneId,
    pub count: u64,
    pub weight: f64,
}

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("class '{0}' has zero count; balanced weight is undefined")]
    ZeroCount(ZoneId),
    #[error("no classes given")]
    NoClasses,
    #[error("no weight available for class '{0}'")]
    MissingClass(ZoneId),
}

/// Compute w_k = n / (K * n_k) over the classes present in `counts`.
pub fn balanced_weights(counts: &BTreeMap<ZoneId, u64>) -> Result<ClassWeightTable, WeightError> {
    if counts.is_empty() {
        return Err(WeightError::NoClasses);
    }
    if let Some((zone, _)) = counts.iter().find(|(_, &c)| c == 0) {
        return Err(WeightError::ZeroCount(zone.clone()));
    }
    let n: u64 = counts.values().sum();
    let k = counts.len() as f64;
    let entries = counts
        .iter()
        .map(|(zone, &count)| ClassWeight {
            zone: zone.clone(),
            count,
            weight: n as f64 / (k * count as f64),
        })
        .collect();
    Ok(ClassWeightTable { entries })
}

impl ClassWeightTable {
    /// Assemble a table from explicit entries, for example when re-loading a
    /// persisted weight report. Entries are re-sorted into canonical order.
    pub fn from_entries(mut entries: Vec<ClassWeight>) -> Result<Self, WeightError> {
        if entries.is_empty() {
            return Err(WeightError::NoClasses);
        }
        entries.sort_by(|a, b| a.zone.cmp(&b.zone));
        for pair in entries.windows(2) {
            if pair[0].zone == pair[1].zone {
                return Err(WeightError::MissingClass(pair[0].zone.clone()));
            }
        }
        if let Some(e) = entries
            .iter()
            .find(|e| e.weight.is_nan() || e.weight <= 0.0 || e.count == 0)
        {
            return Err(WeightError::ZeroCount(e.zone.clone()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ClassWeight] {
        &self.entries
    }

    pub fn weight_of(&self, zone: &ZoneId) -> Result<f64, WeightError> {
        self.entries
            .iter()
            .find(|e| &e.zone == zone)
            .map(|e| e.weight)
            .ok_or_else(|| WeightError::MissingClass(zone.clone()))
    }

    /// Zone/count/weight rows as CSV, weights at full precision plus a
    /// 2-decimal display column. This is the per-zone bar+line figure feed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Zone,Count,Weight,WeightDisplay\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{:.2}\n",
                e.zone, e.count, e.weight, e.weight
            ));
        }
        out
    }

    /// Two-column text table (zone, weight rounded to 2 decimals).
    pub fn to_text(&self) -> String {
        let mut out = String::from("Zone            Weight\n");
        for e in &self.entries {
            out.push_str(&format!("{:<15} {:.2}\n", e.zone.label(), e.weight));
        }
        out
    }
}
