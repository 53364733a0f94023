//! Weighted decision-tree classifier over the three read features, with
//! exhaustive threshold search, impurity criteria, structured-text
//! serialization and a parseable rule export.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classweights::{ClassWeightTable, WeightError};
use crate::dataset::{FeatureRow, LabeledDataset, FEATURE_NAMES};
use crate::floorplan::ZoneId;

/// Serialized tree document version.
pub const TREE_FORMAT_VERSION: u32 = 1;

/// Gains at or below this are treated as numerically flat; a node with no
/// candidate above the floor becomes a leaf.
pub const MIN_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitCriterion {
    Gini,
    Entropy,
}

impl std::fmt::Display for SplitCriterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitCriterion::Gini => f.write_str("gini"),
            SplitCriterion::Entropy => f.write_str("entropy"),
        }
    }
}

impl std::str::FromStr for SplitCriterion {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gini" => Ok(SplitCriterion::Gini),
            "entropy" => Ok(SplitCriterion::Entropy),
            other => Err(TreeError::BadCriterion(other.to_string())),
        }
    }
}

/// Induction hyperparameters. `class_weights: None` means uniform sample
/// weights.
#[derive(Debug, Clone)]
pub struct Hyperparams {
    pub criterion: SplitCriterion,
    pub max_depth: u32,
    pub min_samples_split: usize,
    pub class_weights: Option<ClassWeightTable>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            criterion: SplitCriterion::Gini,
            max_depth: 8,
            min_samples_split: 20,
            class_weights: None,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_depth < 1 {
            return Err(TreeError::BadHyperparams("max_depth must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(TreeError::BadHyperparams(
                "min_samples_split must be >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// One threshold rule: rows with `feature <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRule {
    pub feature: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        rule: SplitRule,
        samples: usize,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    Leaf {
        /// Weighted class tallies in canonical zone order.
        tallies: Vec<f64>,
        samples: usize,
        prediction: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub depth: u32,
    pub node_count: usize,
    pub leaf_count: usize,
}

/// A fitted tree. Immutable; prediction is read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub zones: Vec<ZoneId>,
    pub criterion: SplitCriterion,
    pub max_depth: u32,
    pub min_samples_split: usize,
    pub root: TreeNode,
    pub stats: TreeStats,
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("training data is empty")]
    EmptyTrainingSet,
    #[error("invalid hyperparameters: {0}")]
    BadHyperparams(String),
    #[error("unknown split criterion '{0}', expected gini or entropy")]
    BadCriterion(String),
    #[error("impurity of empty node: total tally weight is not > 0")]
    ZeroTotalWeight,
    #[error("inconsistent tallies: {0}")]
    InconsistentTallies(String),
    #[error("label '{0}' is not in the training zone set")]
    UnknownLabel(ZoneId),
    #[error("zone list is not in canonical (sorted, duplicate-free) order")]
    NonCanonicalZones,
    #[error("tree document error: {0}")]
    Document(String),
    #[error("unsupported tree format version {0}")]
    UnsupportedVersion(u32),
    #[error("rule text parse error at line {line}: {message}")]
    RuleParse { line: usize, message: String },
    #[error(transparent)]
    Weight(#[from] WeightError),
}

/// Gini impurity of weighted class tallies: 1 - sum((w_k / W)^2).
pub fn gini(tallies: &[f64]) -> Result<f64, TreeError> {
    let total: f64 = tallies.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(TreeError::ZeroTotalWeight);
    }
    let mut sum_sq = 0.0;
    for &w in tallies {
        let p = w / total;
        sum_sq += p * p;
    }
    Ok(1.0 - sum_sq)
}

/// Natural-log entropy of weighted class tallies, with 0 * ln 0 = 0.
pub fn entropy(tallies: &[f64]) -> Result<f64, TreeError> {
    let total: f64 = tallies.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(TreeError::ZeroTotalWeight);
    }
    let mut h = 0.0;
    for &w in tallies {
        if w > 0.0 {
            let p = w / total;
            h -= p * p.ln();
        }
    }
    Ok(h)
}

fn impurity(tallies: &[f64], criterion: SplitCriterion) -> Result<f64, TreeError> {
    match criterion {
        SplitCriterion::Gini => gini(tallies),
        SplitCriterion::Entropy => entropy(tallies),
    }
}

/// Weighted impurity reduction of a split. Child tallies must sum back to
/// the parent within 1e-9 relative per class.
pub fn information_gain(
    parent: &[f64],
    left: &[f64],
    right: &[f64],
    criterion: SplitCriterion,
) -> Result<f64, TreeError> {
    if parent.len() != left.len() || parent.len() != right.len() {
        return Err(TreeError::InconsistentTallies(
            "tally lengths differ".into(),
        ));
    }
    for (k, ((&p, &l), &r)) in parent.iter().zip(left).zip(right).enumerate() {
        let diff = (p - (l + r)).abs();
        if diff > 1e-9 * p.abs().max(1.0) {
            return Err(TreeError::InconsistentTallies(format!(
                "class {k}: parent {p} != left {l} + right {r}"
            )));
        }
    }
    let parent_impurity = impurity(parent, criterion)?;
    let total: f64 = parent.iter().sum();
    let left_mass: f64 = left.iter().sum();
    let right_mass: f64 = right.iter().sum();
    let left_term = if left_mass > 0.0 {
        left_mass / total * impurity(left, criterion)?
    } else {
        0.0
    };
    let right_term = if right_mass > 0.0 {
        right_mass / total * impurity(right, criterion)?
    } else {
        0.0
    };
    Ok(parent_impurity - left_term - right_term)
}

fn weighted_tallies(labels: &[usize], weights: &[f64], num_classes: usize) -> Vec<f64> {
    let mut tallies = vec![0.0; num_classes];
    for (&label, &w) in labels.iter().zip(weights) {
        tallies[label] += w;
    }
    tallies
}

/// Exhaustive best split over every feature and every midpoint between
/// consecutive distinct observed values. Ties go to the smaller feature
/// index, then the smaller threshold. Returns `None` when no candidate
/// threshold exists or no candidate clears the minimum-gain floor.
///
/// Candidate gains are computed from per-candidate tallies summed in row
/// order, so that exact ties resolve identically in any re-evaluation of the
/// same candidate set.
pub fn best_split(
    rows: &[FeatureRow],
    labels: &[usize],
    weights: &[f64],
    num_classes: usize,
    criterion: SplitCriterion,
) -> Option<(SplitRule, f64)> {
    let n = rows.len();
    if n < 2 {
        return None;
    }
    let parent = weighted_tallies(labels, weights, num_classes);
    let parent_impurity = impurity(&parent, criterion).ok()?;
    let total: f64 = parent.iter().sum();

    let mut best: Option<(SplitRule, f64)> = None;
    for feature in 0..FEATURE_NAMES.len() {
        let mut values: Vec<f64> = rows.iter().map(|r| r.feature(feature)).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let mut left = vec![0.0; num_classes];
            let mut right = vec![0.0; num_classes];
            let mut left_count = 0usize;
            for i in 0..n {
                if rows[i].feature(feature) <= threshold {
                    left[labels[i]] += weights[i];
                    left_count += 1;
                } else {
                    right[labels[i]] += weights[i];
                }
            }
            if left_count == 0 || left_count == n {
                // Midpoint rounded onto an observed value; not a real split.
                continue;
            }
            let left_mass: f64 = left.iter().sum();
            let right_mass: f64 = right.iter().sum();
            let gain = parent_impurity
                - left_mass / total * impurity(&left, criterion).ok()?
                - right_mass / total * impurity(&right, criterion).ok()?;
            if gain <= MIN_GAIN {
                continue;
            }
            if best.as_ref().is_none_or(|&(_, g)| gain > g) {
                best = Some((SplitRule { feature, threshold }, gain));
            }
        }
    }
    best
}

/// Fit a tree by recursive greedy induction. A node becomes a leaf at the
/// depth limit, below the split size, when pure, or when no split clears the
/// gain floor. Per-sample weight is the class weight of its label.
pub fn fit(train: &LabeledDataset, hp: &Hyperparams) -> Result<DecisionTree, TreeError> {
    hp.validate()?;
    if train.is_empty() {
        return Err(TreeError::EmptyTrainingSet);
    }
    if !crate::floorplan::is_canonical(&train.zones) {
        return Err(TreeError::NonCanonicalZones);
    }
    let zones = train.zones.clone();
    let mut label_idx = Vec::with_capacity(train.len());
    for label in &train.labels {
        let idx = zones
            .binary_search(label)
            .map_err(|_| TreeError::UnknownLabel(label.clone()))?;
        label_idx.push(idx);
    }
    let mut sample_weights = Vec::with_capacity(train.len());
    match &hp.class_weights {
        None => sample_weights.resize(train.len(), 1.0),
        Some(table) => {
            for label in &train.labels {
                sample_weights.push(table.weight_of(label)?);
            }
        }
    }

    let indices: Vec<usize> = (0..train.len()).collect();
    let root = build_node(
        train,
        &label_idx,
        &sample_weights,
        zones.len(),
        hp,
        &indices,
        0,
    );
    let mut stats = TreeStats {
        depth: 0,
        node_count: 0,
        leaf_count: 0,
    };
    collect_stats(&root, 0, &mut stats);
    Ok(DecisionTree {
        zones,
        criterion: hp.criterion,
        max_depth: hp.max_depth,
        min_samples_split: hp.min_samples_split,
        root,
        stats,
    })
}

fn build_node(
    train: &LabeledDataset,
    label_idx: &[usize],
    sample_weights: &[f64],
    num_classes: usize,
    hp: &Hyperparams,
    indices: &[usize],
    depth: u32,
) -> TreeNode {
    let mut tallies = vec![0.0; num_classes];
    let mut seen_class: Option<usize> = None;
    let mut pure = true;
    for &i in indices {
        tallies[label_idx[i]] += sample_weights[i];
        match seen_class {
            None => seen_class = Some(label_idx[i]),
            Some(c) if c != label_idx[i] => pure = false,
            _ => {}
        }
    }
    let make_leaf = |tallies: Vec<f64>| {
        let prediction = argmax(&tallies);
        TreeNode::Leaf {
            tallies,
            samples: indices.len(),
            prediction,
        }
    };
    if pure || depth >= hp.max_depth || indices.len() < hp.min_samples_split {
        return make_leaf(tallies);
    }

    let sub_rows: Vec<FeatureRow> = indices.iter().map(|&i| train.rows[i]).collect();
    let sub_labels: Vec<usize> = indices.iter().map(|&i| label_idx[i]).collect();
    let sub_weights: Vec<f64> = indices.iter().map(|&i| sample_weights[i]).collect();
    let Some((rule, _gain)) = best_split(
        &sub_rows,
        &sub_labels,
        &sub_weights,
        num_classes,
        hp.criterion,
    ) else {
        return make_leaf(tallies);
    };

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .iter()
        .partition(|&&i| train.rows[i].feature(rule.feature) <= rule.threshold);
    debug_assert!(!left_idx.is_empty() && !right_idx.is_empty());
    let left = build_node(
        train,
        label_idx,
        sample_weights,
        num_classes,
        hp,
        &left_idx,
        depth + 1,
    );
    let right = build_node(
        train,
        label_idx,
        sample_weights,
        num_classes,
        hp,
        &right_idx,
        depth + 1,
    );
    TreeNode::Internal {
        rule,
        samples: indices.len(),
        left: Box::new(left),
        right: Box::new(right),
    }
}

fn argmax(tallies: &[f64]) -> usize {
    let mut best = 0;
    for (k, &w) in tallies.iter().enumerate() {
        if w > tallies[best] {
            best = k;
        }
    }
    best
}

fn collect_stats(node: &TreeNode, depth: u32, stats: &mut TreeStats) {
    stats.node_count += 1;
    match node {
        TreeNode::Leaf { .. } => {
            stats.leaf_count += 1;
            stats.depth = stats.depth.max(depth);
        }
        TreeNode::Internal { left, right, .. } => {
            collect_stats(left, depth + 1, stats);
            collect_stats(right, depth + 1, stats);
        }
    }
}

impl DecisionTree {
    /// Root-to-leaf descent; `feature <= threshold` goes left.
    pub fn predict(&self, row: &FeatureRow) -> &ZoneId {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { prediction, .. } => return &self.zones[*prediction],
                TreeNode::Internal {
                    rule, left, right, ..
                } => {
                    node = if row.feature(rule.feature) <= rule.threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }

    pub fn predict_dataset(&self, ds: &LabeledDataset) -> Vec<ZoneId> {
        ds.rows.iter().map(|r| self.predict(r).clone()).collect()
    }

    /// Verify the structural constraints the hyperparameters promise: depth
    /// within bounds and no internal node below the split size.
    pub fn audit(&self) -> Result<(), TreeError> {
        fn walk(node: &TreeNode, depth: u32, tree: &DecisionTree) -> Result<(), TreeError> {
            match node {
                TreeNode::Leaf { .. } => {
                    if depth > tree.max_depth {
                        return Err(TreeError::Document(format!(
                            "leaf at depth {depth} exceeds max_depth {}",
                            tree.max_depth
                        )));
                    }
                    Ok(())
                }
                TreeNode::Internal {
                    samples,
                    left,
                    right,
                    ..
                } => {
                    if *samples < tree.min_samples_split {
                        return Err(TreeError::Document(format!(
                            "internal node with {samples} samples is below min_samples_split {}",
                            tree.min_samples_split
                        )));
                    }
                    if depth >= tree.max_depth {
                        return Err(TreeError::Document(format!(
                            "internal node at depth {depth} violates max_depth {}",
                            tree.max_depth
                        )));
                    }
                    walk(left, depth + 1, tree)?;
                    walk(right, depth + 1, tree)
                }
            }
        }
        walk(&self.root, 0, self)
    }

    pub fn to_json(&self) -> String {
        let doc = TreeDoc {
            format_version: TREE_FORMAT_VERSION,
            criterion: self.criterion,
            max_depth: self.max_depth,
            min_samples_split: self.min_samples_split,
            zones: self.zones.iter().map(|z| z.label().to_string()).collect(),
            stats: self.stats,
            root: self.root.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("tree serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let doc: TreeDoc =
            serde_json::from_str(text).map_err(|e| TreeError::Document(e.to_string()))?;
        if doc.format_version != TREE_FORMAT_VERSION {
            return Err(TreeError::UnsupportedVersion(doc.format_version));
        }
        let zones: Vec<ZoneId> = doc.zones.iter().map(|z| ZoneId::new(z.clone())).collect();
        if !crate::floorplan::is_canonical(&zones) {
            return Err(TreeError::NonCanonicalZones);
        }
        let tree = DecisionTree {
            zones,
            criterion: doc.criterion,
            max_depth: doc.max_depth,
            min_samples_split: doc.min_samples_split,
            root: doc.root,
            stats: doc.stats,
        };
        tree.check_indices(&tree.root)?;
        Ok(tree)
    }

    fn check_indices(&self, node: &TreeNode) -> Result<(), TreeError> {
        match node {
            TreeNode::Leaf {
                tallies,
                prediction,
                ..
            } => {
                if tallies.len() != self.zones.len() || *prediction >= self.zones.len() {
                    return Err(TreeError::Document(
                        "leaf tallies or prediction out of range for zone set".into(),
                    ));
                }
                Ok(())
            }
            TreeNode::Internal {
                rule, left, right, ..
            } => {
                if rule.feature >= FEATURE_NAMES.len() {
                    return Err(TreeError::Document(format!(
                        "feature index {} out of range",
                        rule.feature
                    )));
                }
                self.check_indices(left)?;
                self.check_indices(right)
            }
        }
    }

    /// Deterministic indented if/else listing of the tree. One line per
    /// node; a depth-1 tree prints as three lines (rule plus two leaves).
    /// `parse_rules` reconstructs an equivalent predictor from this text.
    pub fn export_rules(&self) -> String {
        fn write_node(
            node: &TreeNode,
            tree: &DecisionTree,
            depth: usize,
            prefix: &str,
            out: &mut String,
        ) {
            let indent = "  ".repeat(depth);
            match node {
                TreeNode::Leaf {
                    tallies,
                    prediction,
                    ..
                } => {
                    let tally_text: Vec<String> = tallies.iter().map(|t| format!("{t}")).collect();
                    out.push_str(&format!(
                        "{indent}{prefix}predict {} [{}]\n",
                        tree.zones[*prediction],
                        tally_text.join(" ")
                    ));
                }
                TreeNode::Internal {
                    rule, left, right, ..
                } => {
                    out.push_str(&format!(
                        "{indent}{prefix}if {} <= {}\n",
                        FEATURE_NAMES[rule.feature],
                        format_threshold(rule.threshold)
                    ));
                    write_node(left, tree, depth + 1, "then: ", out);
                    write_node(right, tree, depth + 1, "else: ", out);
                }
            }
        }
        let mut out = String::new();
        write_node(&self.root, self, 0, "", &mut out);
        out
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    format_version: u32,
    criterion: SplitCriterion,
    max_depth: u32,
    min_samples_split: usize,
    zones: Vec<String>,
    stats: TreeStats,
    root: TreeNode,
}

/// Thresholds print with 6 significant digits when that representation
/// parses back to the exact value; otherwise the full shortest round-trip
/// form is used so that re-parsed rules route every input identically.
fn format_threshold(t: f64) -> String {
    if t != 0.0 && t.is_finite() {
        let magnitude = t.abs().log10().floor() as i32;
        let decimals = 5 - magnitude;
        if (0..=17).contains(&decimals) {
            let rounded = format!("{t:.*}", decimals as usize);
            if rounded.parse::<f64>() == Ok(t) {
                return rounded;
            }
        }
    }
    format!("{t}")
}

/// Predictor re-built from exported rule text.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTree {
    root: RuleNode,
}

#[derive(Debug, Clone, PartialEq)]
enum RuleNode {
    Leaf {
        label: String,
    },
    Internal {
        feature: usize,
        threshold: f64,
        left: Box<RuleNode>,
        right: Box<RuleNode>,
    },
}

impl RuleTree {
    pub fn predict(&self, row: &FeatureRow) -> &str {
        let mut node = &self.root;
        loop {
            match node {
                RuleNode::Leaf { label } => return label,
                RuleNode::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row.feature(*feature) <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

/// Parse text produced by [`DecisionTree::export_rules`].
pub fn parse_rules(text: &str) -> Result<RuleTree, TreeError> {
    struct Line<'a> {
        number: usize,
        depth: usize,
        content: &'a str,
    }
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let stripped = raw.trim_start_matches(' ');
        let spaces = raw.len() - stripped.len();
        if spaces % 2 != 0 {
            return Err(TreeError::RuleParse {
                line: i + 1,
                message: "odd indentation".into(),
            });
        }
        lines.push(Line {
            number: i + 1,
            depth: spaces / 2,
            content: stripped,
        });
    }
    if lines.is_empty() {
        return Err(TreeError::RuleParse {
            line: 0,
            message: "empty rule text".into(),
        });
    }

    fn parse_node(
        lines: &[Line<'_>],
        cursor: &mut usize,
        depth: usize,
        expect_prefix: &str,
    ) -> Result<RuleNode, TreeError> {
        let line = lines.get(*cursor).ok_or(TreeError::RuleParse {
            line: 0,
            message: "unexpected end of rule text".into(),
        })?;
        if line.depth != depth {
            return Err(TreeError::RuleParse {
                line: line.number,
                message: format!("expected indent {depth}, found {}", line.depth),
            });
        }
        let content =
            line.content
                .strip_prefix(expect_prefix)
                .ok_or_else(|| TreeError::RuleParse {
                    line: line.number,
                    message: format!("expected prefix '{expect_prefix}'"),
                })?;
        let number = line.number;
        *cursor += 1;
        if let Some(rest) = content.strip_prefix("predict ") {
            let label = rest.split(" [").next().unwrap_or(rest).trim().to_string();
            if label.is_empty() {
                return Err(TreeError::RuleParse {
                    line: number,
                    message: "empty leaf label".into(),
                });
            }
            Ok(RuleNode::Leaf { label })
        } else if let Some(rest) = content.strip_prefix("if ") {
            let (name, threshold_text) = rest.split_once(" <= ").ok_or(TreeError::RuleParse {
                line: number,
                message: "rule line is missing ' <= '".into(),
            })?;
            let feature = FEATURE_NAMES
                .iter()
                .position(|&f| f == name)
                .ok_or_else(|| TreeError::RuleParse {
                    line: number,
                    message: format!("unknown feature '{name}'"),
                })?;
            let threshold: f64 =
                threshold_text
                    .trim()
                    .parse()
                    .map_err(|_| TreeError::RuleParse {
                        line: number,
                        message: format!("bad threshold '{threshold_text}'"),
                    })?;
            let left = parse_node(lines, cursor, depth + 1, "then: ")?;
            let right = parse_node(lines, cursor, depth + 1, "else: ")?;
            Ok(RuleNode::Internal {
                feature,
                threshold,
                left: Box::new(left),
                right: Box::new(right),
            })
        } else {
            Err(TreeError::RuleParse {
                line: number,
                message: format!("unrecognized line '{content}'"),
            })
        }
    }

    let mut cursor = 0;
    let root = parse_node(&lines, &mut cursor, 0, "")?;
    if cursor != lines.len() {
        return Err(TreeError::RuleParse {
            line: lines[cursor].number,
            message: "trailing content after tree".into(),
        });
    }
    Ok(RuleTree { root })
}
