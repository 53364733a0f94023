//! Evaluation suite: confusion matrix, per-class precision/recall/F1,
//! macro/micro aggregates, adjacency-aware accuracy, cost-sensitive risk and
//! percentile bootstrap confidence intervals.

use thiserror::Error;

use crate::floorplan::{AdjacencyGraph, ZoneId};
use crate::rng::{domain, DetRng};

/// K x K count matrix; rows are true zones, columns predicted zones, both in
/// canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    zones: Vec<ZoneId>,
    counts: Vec<u64>,
}

/// K x K non-negative cost matrix with a zero diagonal: correct predictions
/// cost nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    zones: Vec<ZoneId>,
    costs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub support: u64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub macro_f1: f64,
    pub micro_precision: f64,
    pub micro_recall: f64,
    pub micro_f1: f64,
}

/// Percentile bootstrap interval around a point estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiEstimate {
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("label and prediction lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("unknown zone '{0}'")]
    UnknownZone(ZoneId),
    #[error("cost matrix dimension {0} does not match zone count {1}")]
    DimensionMismatch(usize, usize),
    #[error("cost matrix entry ({0}, {1}) is invalid: {2}")]
    BadCost(usize, usize, f64),
    #[error("bootstrap needs B >= 1 and 0 < level < 1")]
    BadBootstrapConfig,
    #[error("zone list is not in canonical (sorted, duplicate-free) order")]
    NonCanonicalZones,
}

fn zone_index(zones: &[ZoneId], z: &ZoneId) -> Result<usize, MetricError> {
    zones
        .binary_search(z)
        .map_err(|_| MetricError::UnknownZone(z.clone()))
}

/// Count matrix C_ij = |{m : y_m = Z_i, yhat_m = Z_j}| over the canonical
/// zone set.
pub fn confusion(
    y: &[ZoneId],
    y_hat: &[ZoneId],
    zones: &[ZoneId],
) -> Result<ConfusionMatrix, MetricError> {
    if y.len() != y_hat.len() {
        return Err(MetricError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    if !crate::floorplan::is_canonical(zones) {
        return Err(MetricError::NonCanonicalZones);
    }
    let k = zones.len();
    let mut counts = vec![0u64; k * k];
    for (t, p) in y.iter().zip(y_hat) {
        let i = zone_index(zones, t)?;
        let j = zone_index(zones, p)?;
        counts[i * k + j] += 1;
    }
    Ok(ConfusionMatrix {
        zones: zones.to_vec(),
        counts,
    })
}

impl ConfusionMatrix {
    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
    }

    pub fn k(&self) -> usize {
        self.zones.len()
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.k() + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        (0..self.k()).map(|j| self.count(i, j)).sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.k()).map(|i| self.count(i, j)).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k()).map(|i| self.count(i, i)).sum()
    }

    /// CSV with zone labels on both axes.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Zone");
        for z in &self.zones {
            out.push(',');
            out.push_str(z.label());
        }
        out.push('\n');
        for i in 0..self.k() {
            out.push_str(self.zones[i].label());
            for j in 0..self.k() {
                out.push_str(&format!(",{}", self.count(i, j)));
            }
            out.push('\n');
        }
        out
    }
}

/// Per-class precision/recall/F1 with the 0/0-as-zero convention: a class
/// never predicted has precision 0, a class with no support has recall 0,
/// and F1 is 0 whenever precision and recall are both 0.
pub fn per_class_prf(c: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..c.k())
        .map(|k| {
            let tp = c.count(k, k);
            let fp = c.col_sum(k) - tp;
            let fn_ = c.row_sum(k) - tp;
            let precision = if tp + fp > 0 {
                tp as f64 / (tp + fp) as f64
            } else {
                0.0
            };
            let recall = if tp + fn_ > 0 {
                tp as f64 / (tp + fn_) as f64
            } else {
                0.0
            };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                support: c.row_sum(k),
                tp,
                fp,
                fn_,
                precision,
                recall,
                f1,
            }
        })
        .collect()
}

/// Fraction of exact matches.
pub fn accuracy(y: &[ZoneId], y_hat: &[ZoneId]) -> Result<f64, MetricError> {
    if y.len() != y_hat.len() {
        return Err(MetricError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    let correct = y.iter().zip(y_hat).filter(|(t, p)| t == p).count();
    Ok(correct as f64 / y.len() as f64)
}

/// Macro-F1 (every class counted, including zero-support ones) and pooled
/// micro precision/recall/F1. Micro aggregates are computed from integer
/// pooled counts, so micro-F1 equals accuracy exactly in this single-label
/// setting.
pub fn macro_micro(c: &ConfusionMatrix) -> Aggregates {
    let per_class = per_class_prf(c);
    let k = c.k() as f64;
    let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / k;

    let tp: u64 = per_class.iter().map(|m| m.tp).sum();
    let fp: u64 = per_class.iter().map(|m| m.fp).sum();
    let fn_: u64 = per_class.iter().map(|m| m.fn_).sum();
    let micro_precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let micro_recall = if tp + fn_ > 0 {
        tp as f64 / (tp + fn_) as f64
    } else {
        0.0
    };
    let micro_f1 = if 2 * tp + fp + fn_ > 0 {
        (2 * tp) as f64 / (2 * tp + fp + fn_) as f64
    } else {
        0.0
    };
    Aggregates {
        macro_f1,
        micro_precision,
        micro_recall,
        micro_f1,
    }
}

/// Fraction of predictions equal or adjacent to the truth. Self-adjacency
/// makes this a pure relaxation of accuracy.
pub fn adjacency_accuracy(
    y: &[ZoneId],
    y_hat: &[ZoneId],
    adj: &AdjacencyGraph,
) -> Result<f64, MetricError> {
    if y.len() != y_hat.len() {
        return Err(MetricError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut hits = 0usize;
    for (t, p) in y.iter().zip(y_hat) {
        let ok = adj.is_adjacent(t, p).ok_or_else(|| {
            MetricError::UnknownZone(if adj.index_of(t).is_none() {
                t.clone()
            } else {
                p.clone()
            })
        })?;
        if ok {
            hits += 1;
        }
    }
    Ok(hits as f64 / y.len() as f64)
}

impl CostMatrix {
    /// Validate and wrap a row-major cost matrix over a canonical zone list.
    pub fn new(zones: Vec<ZoneId>, costs: Vec<f64>) -> Result<Self, MetricError> {
        if !crate::floorplan::is_canonical(&zones) {
            return Err(MetricError::NonCanonicalZones);
        }
        let k = zones.len();
        if costs.len() != k * k {
            return Err(MetricError::DimensionMismatch(costs.len(), k * k));
        }
        for i in 0..k {
            for j in 0..k {
                let c = costs[i * k + j];
                if !c.is_finite() || c < 0.0 || (i == j && c != 0.0) {
                    return Err(MetricError::BadCost(i, j, c));
                }
            }
        }
        Ok(Self { zones, costs })
    }

    /// Cost matrix derived from the adjacency graph: adjacent mistakes cost
    /// `adjacent_cost`, non-adjacent mistakes `non_adjacent_cost`.
    pub fn from_adjacency(
        adj: &AdjacencyGraph,
        adjacent_cost: f64,
        non_adjacent_cost: f64,
    ) -> Result<Self, MetricError> {
        let zones = adj.zones().to_vec();
        let k = zones.len();
        let mut costs = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                if i != j {
                    costs[i * k + j] = if adj.is_adjacent_idx(i, j) {
                        adjacent_cost
                    } else {
                        non_adjacent_cost
                    };
                }
            }
        }
        Self::new(zones, costs)
    }

    /// All off-diagonal entries set to 1; risk then equals one minus
    /// accuracy.
    pub fn uniform_off_diagonal(zones: Vec<ZoneId>) -> Result<Self, MetricError> {
        let k = zones.len();
        let mut costs = vec![1.0; k * k];
        for i in 0..k {
            costs[i * k + i] = 0.0;
        }
        Self::new(zones, costs)
    }

    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
    }

    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.costs[i * self.zones.len() + j]
    }
}

/// Empirical mean misclassification cost (1/n) * sum Lambda[y, yhat].
pub fn cost_risk(y: &[ZoneId], y_hat: &[ZoneId], lambda: &CostMatrix) -> Result<f64, MetricError> {
    if y.len() != y_hat.len() {
        return Err(MetricError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    let mut total = 0.0;
    for (t, p) in y.iter().zip(y_hat) {
        let i = zone_index(&lambda.zones, t)?;
        let j = zone_index(&lambda.zones, p)?;
        total += lambda.cost(i, j);
    }
    Ok(total / y.len() as f64)
}

/// Bootstrap settings for confidence intervals inside an [`EvalReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: u32,
    pub level: f64,
    pub seed: u64,
}

/// Everything the evaluation stage reports for one prediction set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub confusion: ConfusionMatrix,
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub aggregates: Aggregates,
    pub adjacency_accuracy: f64,
    pub risk: f64,
    /// (metric name, interval), present when bootstrapping was requested.
    pub cis: Vec<(String, CiEstimate)>,
}

/// Run the full metric suite over one prediction set.
pub fn evaluate(
    y: &[ZoneId],
    y_hat: &[ZoneId],
    zones: &[ZoneId],
    adj: &AdjacencyGraph,
    lambda: &CostMatrix,
    bootstrap: Option<BootstrapConfig>,
) -> Result<EvalReport, MetricError> {
    let c = confusion(y, y_hat, zones)?;
    let per_class = per_class_prf(&c);
    let acc = accuracy(y, y_hat)?;
    let aggregates = macro_micro(&c);
    let adj_acc = adjacency_accuracy(y, y_hat, adj)?;
    let risk = cost_risk(y, y_hat, lambda)?;
    let mut cis = Vec::new();
    if let Some(cfg) = bootstrap {
        let macro_f1 = |y: &[ZoneId], p: &[ZoneId]| -> Result<f64, MetricError> {
            Ok(macro_micro(&confusion(y, p, zones)?).macro_f1)
        };
        let adj_metric = |y: &[ZoneId], p: &[ZoneId]| -> Result<f64, MetricError> {
            adjacency_accuracy(y, p, adj)
        };
        cis.push((
            "accuracy".to_string(),
            bootstrap_ci(accuracy, y, y_hat, cfg.resamples, cfg.level, cfg.seed)?,
        ));
        cis.push((
            "macro_f1".to_string(),
            bootstrap_ci(macro_f1, y, y_hat, cfg.resamples, cfg.level, cfg.seed)?,
        ));
        cis.push((
            "adjacency_accuracy".to_string(),
            bootstrap_ci(adj_metric, y, y_hat, cfg.resamples, cfg.level, cfg.seed)?,
        ));
    }
    Ok(EvalReport {
        confusion: c,
        per_class,
        accuracy: acc,
        aggregates,
        adjacency_accuracy: adj_acc,
        risk,
        cis,
    })
}

impl EvalReport {
    /// Structured-text summary: aggregates, intervals, per-class table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("evaluation report\n");
        out.push_str("=================\n");
        out.push_str(&format!("rows: {}\n", self.confusion.total()));
        out.push_str(&format!("accuracy: {:.4}\n", self.accuracy));
        out.push_str(&format!("macro_f1: {:.4}\n", self.aggregates.macro_f1));
        out.push_str(&format!(
            "micro_precision: {:.4}\n",
            self.aggregates.micro_precision
        ));
        out.push_str(&format!(
            "micro_recall: {:.4}\n",
            self.aggregates.micro_recall
        ));
        out.push_str(&format!("micro_f1: {:.4}\n", self.aggregates.micro_f1));
        out.push_str(&format!(
            "adjacency_accuracy: {:.4}\n",
            self.adjacency_accuracy
        ));
        out.push_str(&format!("risk: {:.4}\n", self.risk));
        for (name, ci) in &self.cis {
            out.push_str(&format!(
                "{} {:.0}% ci: [{:.4}, {:.4}] (point {:.4})\n",
                name,
                ci.level * 100.0,
                ci.lower,
                ci.upper,
                ci.point
            ));
        }
        out.push_str("\nper-class metrics\n");
        out.push_str("zone             support  precision  recall  f1\n");
        for (zone, m) in self.confusion.zones().iter().zip(&self.per_class) {
            out.push_str(&format!(
                "{:<16} {:>7}  {:>9.4}  {:>6.4}  {:>6.4}\n",
                zone.label(),
                m.support,
                m.precision,
                m.recall,
                m.f1
            ));
        }
        out
    }

    /// Per-class metric table as CSV.
    pub fn per_class_csv(&self) -> String {
        let mut out = String::from("Zone,Support,Precision,Recall,F1\n");
        for (zone, m) in self.confusion.zones().iter().zip(&self.per_class) {
            out.push_str(&format!(
                "{},{},{:.6},{:.6},{:.6}\n",
                zone.label(),
                m.support,
                m.precision,
                m.recall,
                m.f1
            ));
        }
        out
    }

    /// Aggregate metric table as CSV, with interval columns left empty when
    /// no bootstrap ran.
    pub fn aggregates_csv(&self) -> String {
        let ci_for = |name: &str| -> (String, String) {
            self.cis
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, ci)| (format!("{:.6}", ci.lower), format!("{:.6}", ci.upper)))
                .unwrap_or_default()
        };
        let mut out = String::from("Metric,Value,CiLower,CiUpper\n");
        let rows: [(&str, f64); 6] = [
            ("accuracy", self.accuracy),
            ("macro_f1", self.aggregates.macro_f1),
            ("micro_precision", self.aggregates.micro_precision),
            ("micro_recall", self.aggregates.micro_recall),
            ("micro_f1", self.aggregates.micro_f1),
            ("adjacency_accuracy", self.adjacency_accuracy),
        ];
        for (name, value) in rows {
            let (lo, hi) = ci_for(name);
            out.push_str(&format!("{name},{value:.6},{lo},{hi}\n"));
        }
        let (lo, hi) = ci_for("risk");
        out.push_str(&format!("risk,{:.6},{lo},{hi}\n", self.risk));
        out
    }
}

/// Quantile with linear interpolation over a sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap over B seeded resamples of (y, yhat) index pairs.
/// The point estimate is the metric on the full set; each resample draws
/// indices from its own counter-based stream, so the result is independent
/// of evaluation order.
pub fn bootstrap_ci<F>(
    metric: F,
    y: &[ZoneId],
    y_hat: &[ZoneId],
    resamples: u32,
    level: f64,
    seed: u64,
) -> Result<CiEstimate, MetricError>
where
    F: Fn(&[ZoneId], &[ZoneId]) -> Result<f64, MetricError>,
{
    if y.len() != y_hat.len() {
        return Err(MetricError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(MetricError::Empty);
    }
    if resamples < 1 || !(level > 0.0 && level < 1.0) {
        return Err(MetricError::BadBootstrapConfig);
    }
    let n = y.len();
    let point = metric(y, y_hat)?;
    let mut stats = Vec::with_capacity(resamples as usize);
    for b in 0..resamples {
        let mut rng = DetRng::from_stream(seed, &[domain::BOOTSTRAP, b as u64]);
        let mut ry = Vec::with_capacity(n);
        let mut rp = Vec::with_capacity(n);
        for _ in 0..n {
            let i = rng.next_range(n as u64) as usize;
            ry.push(y[i].clone());
            rp.push(y_hat[i].clone());
        }
        stats.push(metric(&ry, &rp)?);
    }
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
    let alpha = (1.0 - level) / 2.0;
    Ok(CiEstimate {
        point,
        lower: quantile_sorted(&stats, alpha),
        upper: quantile_sorted(&stats, 1.0 - alpha),
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floorplan::Floorplan;

    fn zones(labels: &[&str]) -> Vec<ZoneId> {
        let mut v: Vec<ZoneId> = labels.iter().map(|&l| ZoneId::from(l)).collect();
        v.sort();
        v
    }

    fn ids(labels: &[&str]) -> Vec<ZoneId> {
        labels.iter().map(|&l| ZoneId::from(l)).collect()
    }

    #[test]
    fn confusion_hand_count() {
        let z = zones(&["A", "B"]);
        let c = confusion(&ids(&["A", "A", "B"]), &ids(&["A", "B", "B"]), &z).unwrap();
        assert_eq!(c.count(0, 0), 1);
        assert_eq!(c.count(0, 1), 1);
        assert_eq!(c.count(1, 0), 0);
        assert_eq!(c.count(1, 1), 1);
        assert_eq!(c.total(), 3);
    }

    #[test]
    fn confusion_diagonal_when_perfect() {
        let z = zones(&["A", "B", "C"]);
        let y = ids(&["A", "B", "C", "B"]);
        let c = confusion(&y, &y, &z).unwrap();
        for i in 0..3 {
            assert_eq!(c.count(i, i), c.row_sum(i));
        }
        assert_eq!(c.trace(), 4);
    }

    #[test]
    fn confusion_single_error_cell() {
        let z = zones(&["A", "B"]);
        let c = confusion(&ids(&["A"]), &ids(&["B"]), &z).unwrap();
        assert_eq!(c.count(0, 1), 1);
        assert_eq!(c.total(), 1);
    }

    #[test]
    fn confusion_rejects_unsorted_zone_list() {
        let unsorted = ids(&["B", "A"]);
        assert!(matches!(
            confusion(&ids(&["A"]), &ids(&["A"]), &unsorted),
            Err(MetricError::NonCanonicalZones)
        ));
        assert!(matches!(
            CostMatrix::uniform_off_diagonal(unsorted),
            Err(MetricError::NonCanonicalZones)
        ));
    }

    #[test]
    fn confusion_rejects_unknown_and_mismatch() {
        let z = zones(&["A", "B"]);
        assert!(matches!(
            confusion(&ids(&["A"]), &ids(&["Z"]), &z),
            Err(MetricError::UnknownZone(_))
        ));
        assert!(matches!(
            confusion(&ids(&["A", "B"]), &ids(&["A"]), &z),
            Err(MetricError::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn prf_derived_example() {
        let z = zones(&["A", "B"]);
        let c = confusion(&ids(&["A", "A", "B"]), &ids(&["A", "B", "B"]), &z).unwrap();
        let m = per_class_prf(&c);
        assert_eq!(m[0].precision, 1.0);
        assert_eq!(m[0].recall, 0.5);
        assert!((m[0].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m[1].precision, 0.5);
        assert_eq!(m[1].recall, 1.0);
        assert!((m[1].f1 - 2.0 / 3.0).abs() < 1e-12);
        let agg = macro_micro(&c);
        assert!((agg.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((agg.micro_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn prf_zero_conventions() {
        // Class C never true and never predicted: all zeros.
        let z = zones(&["A", "B", "C"]);
        let c = confusion(&ids(&["A", "B"]), &ids(&["A", "B"]), &z).unwrap();
        let m = per_class_prf(&c);
        assert_eq!((m[2].precision, m[2].recall, m[2].f1), (0.0, 0.0, 0.0));
        // Macro-F1 still averages over all K classes.
        assert!((macro_micro(&c).macro_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn accuracy_examples() {
        let z = ids(&["A", "A", "B", "B", "A", "B", "A", "A", "B", "A"]);
        assert_eq!(accuracy(&z, &z).unwrap(), 1.0);
        let flipped: Vec<ZoneId> = z
            .iter()
            .map(|l| {
                if l.label() == "A" {
                    ZoneId::from("B")
                } else {
                    ZoneId::from("A")
                }
            })
            .collect();
        assert_eq!(accuracy(&z, &flipped).unwrap(), 0.0);
        let mut three_right = flipped;
        three_right[0] = z[0].clone();
        three_right[1] = z[1].clone();
        three_right[2] = z[2].clone();
        assert_eq!(accuracy(&z, &three_right).unwrap(), 0.3);
    }

    #[test]
    fn diagonal_confusion_scores_one_everywhere() {
        let z = zones(&["A", "B", "C"]);
        let y = ids(&["A", "B", "C", "B", "A"]);
        let c = confusion(&y, &y, &z).unwrap();
        let agg = macro_micro(&c);
        assert_eq!(agg.macro_f1, 1.0);
        assert_eq!(agg.micro_f1, 1.0);
        // One misprediction breaks the diagonal and macro-F1 drops below 1.
        let mut p = y.clone();
        p[0] = ZoneId::from("B");
        let agg = macro_micro(&confusion(&y, &p, &z).unwrap());
        assert!(agg.macro_f1 < 1.0);
    }

    #[test]
    fn micro_equals_accuracy_exactly() {
        let z = zones(&["A", "B", "C"]);
        let y = ids(&["A", "B", "C", "A", "B", "C", "A"]);
        let p = ids(&["B", "B", "C", "A", "A", "C", "C"]);
        let c = confusion(&y, &p, &z).unwrap();
        let agg = macro_micro(&c);
        let acc = accuracy(&y, &p).unwrap();
        assert_eq!(agg.micro_f1, acc);
        assert_eq!(agg.micro_precision, acc);
        assert_eq!(agg.micro_recall, acc);
    }

    #[test]
    fn adjacency_accuracy_on_grid() {
        let fp = Floorplan::default_lab();
        let adj = fp.adjacency();
        // All true LabZoneA; predictions: two adjacent (B, E), one not (G).
        let y = ids(&["LabZoneA", "LabZoneA", "LabZoneA"]);
        let p = ids(&["LabZoneB", "LabZoneE", "LabZoneG"]);
        let v = adjacency_accuracy(&y, &p, &adj).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        // Exact predictions score 1.0 whatever the graph.
        assert_eq!(adjacency_accuracy(&y, &y, &adj).unwrap(), 1.0);
        // Self-only graph reduces to plain accuracy.
        let self_only = AdjacencyGraph::self_only(adj.zones().to_vec());
        assert_eq!(
            adjacency_accuracy(&y, &p, &self_only).unwrap(),
            accuracy(&y, &p).unwrap()
        );
    }

    #[test]
    fn cost_risk_examples() {
        let fp = Floorplan::default_lab();
        let adj = fp.adjacency();
        let zone_list = adj.zones().to_vec();
        // Perfect predictions cost nothing.
        let y = ids(&["LabZoneA", "LabZoneB"]);
        let lambda = CostMatrix::from_adjacency(&adj, 1.0, 5.0).unwrap();
        assert_eq!(cost_risk(&y, &y, &lambda).unwrap(), 0.0);

        // 2 adjacent errors + 1 non-adjacent error in n = 10 at costs 1/5.
        let mut truth = Vec::new();
        let mut pred = Vec::new();
        for _ in 0..7 {
            truth.push(ZoneId::from("LabZoneA"));
            pred.push(ZoneId::from("LabZoneA"));
        }
        truth.push(ZoneId::from("LabZoneA"));
        pred.push(ZoneId::from("LabZoneB")); // adjacent
        truth.push(ZoneId::from("LabZoneA"));
        pred.push(ZoneId::from("LabZoneE")); // adjacent
        truth.push(ZoneId::from("LabZoneA"));
        pred.push(ZoneId::from("LabZoneG")); // non-adjacent
        assert!((cost_risk(&truth, &pred, &lambda).unwrap() - 0.7).abs() < 1e-12);

        // All-ones off-diagonal risk is 1 - accuracy.
        let ones = CostMatrix::uniform_off_diagonal(zone_list).unwrap();
        let risk = cost_risk(&truth, &pred, &ones).unwrap();
        let acc = accuracy(&truth, &pred).unwrap();
        assert!((risk - (1.0 - acc)).abs() < 1e-12);
    }

    #[test]
    fn cost_matrix_rejects_nonzero_diagonal() {
        let z = zones(&["A", "B"]);
        assert!(CostMatrix::new(z, vec![0.5, 1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn bootstrap_constant_metric_degenerate_interval() {
        let y = ids(&["A", "B", "A", "B", "A"]);
        let ci = bootstrap_ci(accuracy, &y, &y, 50, 0.95, 7).unwrap();
        assert_eq!((ci.point, ci.lower, ci.upper), (1.0, 1.0, 1.0));
    }

    #[test]
    fn bootstrap_single_resample_is_degenerate() {
        let y = ids(&["A", "B", "A", "B"]);
        let p = ids(&["A", "A", "A", "B"]);
        let ci = bootstrap_ci(accuracy, &y, &p, 1, 0.95, 3).unwrap();
        assert_eq!(ci.lower, ci.upper);
    }

    #[test]
    fn bootstrap_is_reproducible_and_brackets_point() {
        let y: Vec<ZoneId> = (0..500)
            .map(|i| ZoneId::from(if i % 3 == 0 { "A" } else { "B" }))
            .collect();
        let p: Vec<ZoneId> = (0..500)
            .map(|i| ZoneId::from(if i % 5 == 0 { "A" } else { "B" }))
            .collect();
        let a = bootstrap_ci(accuracy, &y, &p, 1000, 0.95, 42).unwrap();
        let b = bootstrap_ci(accuracy, &y, &p, 1000, 0.95, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.lower <= a.point && a.point <= a.upper);
        // Wider level widens or preserves the interval.
        let narrow = bootstrap_ci(accuracy, &y, &p, 1000, 0.5, 42).unwrap();
        assert!(narrow.lower >= a.lower && narrow.upper <= a.upper);
    }

    #[test]
    fn quantile_interpolation() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&xs, 0.0), 1.0);
        assert_eq!(quantile_sorted(&xs, 1.0), 4.0);
        assert_eq!(quantile_sorted(&xs, 0.5), 2.5);
    }
}
