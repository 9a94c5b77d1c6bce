use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;

use super::{BaselineError, FeatureVector};
use crate::label::BinLabel;
use crate::stats::compensated_sum;

pub const GBT_FORMAT_VERSION: u32 = 1;
const MIN_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbtConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Upper bound on candidate thresholds per feature, plus one.
    pub n_bins: usize,
    pub min_samples_leaf: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 4,
            learning_rate: 0.1,
            n_bins: 64,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(f64),
}

/// Nodes in preorder; the root is node 0 and children always follow their parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn new(nodes: Vec<Node>) -> Result<Self, BaselineError> {
        if nodes.is_empty() {
            return Err(BaselineError::Format("tree has no nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    threshold, left, right, ..
                } => {
                    if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                        return Err(BaselineError::Format(format!("node {i} has invalid children")));
                    }
                    if !threshold.is_finite() {
                        return Err(BaselineError::Format(format!("node {i} has a non-finite threshold")));
                    }
                }
                Node::Leaf(v) if !v.is_finite() => {
                    return Err(BaselineError::Format(format!("node {i} has a non-finite leaf")));
                }
                Node::Leaf(_) => {}
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Least-squares boosted trees: `base_score + shrinkage * Σ tree(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtModel {
    width: usize,
    base_score: f64,
    shrinkage: f64,
    trees: Vec<Tree>,
}

fn cmp_rows(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Candidate thresholds: midpoints between adjacent distinct values, thinned
/// to quantile cuts when there are more than `n_bins` distinct values.
fn thresholds(column: &[f64], n_bins: usize) -> Vec<f64> {
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    let mid = |lo: f64, hi: f64| {
        let m = lo + (hi - lo) / 2.0;
        if m > lo {
            m
        } else {
            hi
        }
    };
    if distinct.len() <= n_bins {
        return distinct.windows(2).map(|w| mid(w[0], w[1])).collect();
    }
    let n = sorted.len();
    let mut out: Vec<f64> = Vec::with_capacity(n_bins);
    for j in 1..n_bins {
        let lo = sorted[j * n / n_bins - 1];
        let next = sorted.partition_point(|&v| v <= lo);
        if next < n {
            out.push(mid(lo, sorted[next]));
        }
    }
    out.dedup();
    out
}

struct Trainer<'a> {
    config: &'a GbtConfig,
    // bins[f][row]: number of thresholds of feature f that are <= the value.
    bins: Vec<Vec<u16>>,
    cuts: Vec<Vec<f64>>,
}

struct Best {
    gain: f64,
    feature: usize,
    cut: usize,
}

impl Trainer<'_> {
    fn best_split(&self, rows: &[u32], residual: &[f64], total: f64) -> Option<Best> {
        let n = rows.len() as f64;
        let min_leaf = self.config.min_samples_leaf.max(1);
        let parent = total * total / n;
        let candidates: Vec<Option<Best>> = (0..self.bins.len())
            .into_par_iter()
            .map(|f| {
                let n_cuts = self.cuts[f].len();
                if n_cuts == 0 {
                    return None;
                }
                let mut sums = vec![0.0; n_cuts + 1];
                let mut counts = vec![0usize; n_cuts + 1];
                let col = &self.bins[f];
                for &r in rows {
                    let b = col[r as usize] as usize;
                    sums[b] += residual[r as usize];
                    counts[b] += 1;
                }
                let mut best: Option<Best> = None;
                let (mut sl, mut nl) = (0.0, 0usize);
                for cut in 0..n_cuts {
                    sl += sums[cut];
                    nl += counts[cut];
                    let nr = rows.len() - nl;
                    if nl < min_leaf || nr < min_leaf {
                        continue;
                    }
                    let sr = total - sl;
                    let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - parent;
                    if best.as_ref().is_none_or(|b| gain > b.gain) {
                        best = Some(Best { gain, feature: f, cut });
                    }
                }
                best
            })
            .collect();
        // Sequential reduction in feature order keeps the choice deterministic.
        let mut best: Option<Best> = None;
        for c in candidates.into_iter().flatten() {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
        best
    }

    fn grow(&self, rows: Vec<u32>, depth: usize, residual: &[f64], nodes: &mut Vec<Node>) -> usize {
        let at = nodes.len();
        nodes.push(Node::Leaf(0.0));
        let total = compensated_sum(rows.iter().map(|&r| residual[r as usize]));
        let n = rows.len();
        if depth < self.config.max_depth && n >= 2 * self.config.min_samples_leaf.max(1) {
            let sse = compensated_sum(rows.iter().map(|&r| residual[r as usize].powi(2))) - total * total / n as f64;
            if let Some(best) = self.best_split(&rows, residual, total) {
                if best.gain > 0.0 && best.gain > 1e-12 * sse.max(0.0) {
                    let col = &self.bins[best.feature];
                    let (left, right): (Vec<u32>, Vec<u32>) =
                        rows.into_iter().partition(|&r| (col[r as usize] as usize) <= best.cut);
                    let l = self.grow(left, depth + 1, residual, nodes);
                    let r = self.grow(right, depth + 1, residual, nodes);
                    nodes[at] = Node::Split {
                        feature: best.feature,
                        threshold: self.cuts[best.feature][best.cut],
                        left: l,
                        right: r,
                    };
                    return at;
                }
            }
        }
        nodes[at] = Node::Leaf(total / n as f64);
        at
    }
}

fn mse(y: &[f64], pred: &[f64]) -> f64 {
    compensated_sum(y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b))) / y.len() as f64
}

impl GbtModel {
    pub fn new(width: usize, base_score: f64, shrinkage: f64, trees: Vec<Tree>) -> Self {
        Self {
            width,
            base_score,
            shrinkage,
            trees,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn fit(rows: &[Vec<f64>], labels: &[f64], config: &GbtConfig) -> Result<Self, BaselineError> {
        Self::fit_with_trace(rows, labels, config).map(|(m, _)| m)
    }

    /// Fits and also returns the mean squared training error after the base
    /// score and after every round (`n_trees + 1` entries, or 1 when the
    /// labels are constant).
    ///
    /// Rows are put into a canonical order first, so the model does not
    /// depend on the order of the training data. Constant labels give a
    /// model with no trees.
    pub fn fit_with_trace(
        rows: &[Vec<f64>],
        labels: &[f64],
        config: &GbtConfig,
    ) -> Result<(Self, Vec<f64>), BaselineError> {
        if rows.len() < MIN_ROWS {
            return Err(BaselineError::InsufficientTrainingData {
                need: MIN_ROWS,
                got: rows.len(),
            });
        }
        if labels.len() != rows.len() {
            return Err(BaselineError::Format(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let width = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(BaselineError::FeatureWidthMismatch {
                    expected: width,
                    got: row.len(),
                });
            }
            if !labels[i].is_finite() || row.iter().any(|v| !v.is_finite()) {
                return Err(BaselineError::NonFinite(i));
            }
        }
        if config.n_bins < 2 || config.n_bins > u16::MAX as usize || !(config.learning_rate > 0.0) {
            return Err(BaselineError::Format(format!("unusable config {config:?}")));
        }

        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| cmp_rows(&rows[a], &rows[b]).then(labels[a].total_cmp(&labels[b])));
        let x: Vec<&[f64]> = order.iter().map(|&i| rows[i].as_slice()).collect();
        let y: Vec<f64> = order.iter().map(|&i| labels[i]).collect();
        let n = y.len();

        let base = compensated_sum(y.iter().copied()) / n as f64;
        let mut pred = vec![base; n];
        let mut trace = vec![mse(&y, &pred)];
        let constant = y.iter().all(|&v| v == y[0]);
        if constant {
            log::info!("constant training labels; model is the mean {base}");
            return Ok((Self::new(width, base, config.learning_rate, Vec::new()), trace));
        }

        let columns: Vec<Vec<f64>> = (0..width).map(|f| x.iter().map(|r| r[f]).collect()).collect();
        let cuts: Vec<Vec<f64>> = columns.par_iter().map(|c| thresholds(c, config.n_bins)).collect();
        let bins: Vec<Vec<u16>> = columns
            .par_iter()
            .zip(&cuts)
            .map(|(c, t)| c.iter().map(|&v| t.partition_point(|&th| th <= v) as u16).collect())
            .collect();
        let trainer = Trainer { config, bins, cuts };

        let mut trees = Vec::with_capacity(config.n_trees);
        let mut residual = vec![0.0; n];
        for _ in 0..config.n_trees {
            for i in 0..n {
                residual[i] = y[i] - pred[i];
            }
            let mut nodes = Vec::new();
            trainer.grow((0..n as u32).collect(), 0, &residual, &mut nodes);
            let tree = Tree { nodes };
            for i in 0..n {
                pred[i] += config.learning_rate * tree.eval(x[i]);
            }
            trace.push(mse(&y, &pred));
            trees.push(tree);
        }
        Ok((Self::new(width, base, config.learning_rate, trees), trace))
    }

    pub fn predict_raw(&self, x: &[f64]) -> Result<f64, BaselineError> {
        if x.len() != self.width {
            return Err(BaselineError::FeatureWidthMismatch {
                expected: self.width,
                got: x.len(),
            });
        }
        let sum = compensated_sum(self.trees.iter().map(|t| t.eval(x)));
        Ok(self.base_score + self.shrinkage * sum)
    }

    /// Raw score clamped to the label scale and snapped to a tenth.
    pub fn predict(&self, x: &[f64]) -> Result<BinLabel, BaselineError> {
        Ok(BinLabel::snap(self.predict_raw(x)?))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "geollm-gbt {GBT_FORMAT_VERSION}\nwidth {}\nbase_score {}\nshrinkage {}\ntrees {}\n",
            self.width,
            self.base_score,
            self.shrinkage,
            self.trees.len()
        );
        for (i, tree) in self.trees.iter().enumerate() {
            s.push_str(&format!("tree {i} {}\n", tree.nodes.len()));
            for node in &tree.nodes {
                match node {
                    Node::Split {
                        feature,
                        threshold,
                        left,
                        right,
                    } => s.push_str(&format!("split {feature} {threshold} {left} {right}\n")),
                    Node::Leaf(v) => s.push_str(&format!("leaf {v}\n")),
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, BaselineError> {
        let mut lines = text.lines().enumerate();
        fn expect<'t>(
            lines: &mut impl Iterator<Item = (usize, &'t str)>,
            want: &str,
        ) -> Result<(usize, Vec<&'t str>), BaselineError> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| BaselineError::Format(format!("unexpected end, expected {want}")))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.first() != Some(&want) {
                return Err(BaselineError::Format(format!("line {}: expected {want}", no + 1)));
            }
            Ok((no + 1, parts))
        }
        let mut next = |want: &str| expect(&mut lines, want);
        fn num<T: std::str::FromStr>(parts: &[&str], i: usize, line: usize) -> Result<T, BaselineError> {
            parts
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| BaselineError::Format(format!("line {line}: bad field {i}")))
        }

        let (l, p) = next("geollm-gbt")?;
        let version: u32 = num(&p, 1, l)?;
        if version != GBT_FORMAT_VERSION {
            return Err(BaselineError::Format(format!("unsupported version {version}")));
        }
        let (l, p) = next("width")?;
        let width: usize = num(&p, 1, l)?;
        let (l, p) = next("base_score")?;
        let base_score: f64 = num(&p, 1, l)?;
        let (l, p) = next("shrinkage")?;
        let shrinkage: f64 = num(&p, 1, l)?;
        let (l, p) = next("trees")?;
        let n_trees: usize = num(&p, 1, l)?;
        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let (l, p) = expect(&mut lines, "tree")?;
            if num::<usize>(&p, 1, l)? != t {
                return Err(BaselineError::Format(format!("line {l}: trees out of order")));
            }
            let n_nodes: usize = num(&p, 2, l)?;
            let mut nodes = Vec::with_capacity(n_nodes);
            for _ in 0..n_nodes {
                let (no, line) = lines
                    .next()
                    .ok_or_else(|| BaselineError::Format("unexpected end inside tree".into()))?;
                let parts: Vec<&str> = line.split_whitespace().collect();
                let node = match parts.first() {
                    Some(&"split") => {
                        let feature: usize = num(&parts, 1, no + 1)?;
                        if feature >= width {
                            return Err(BaselineError::Format(format!("line {}: feature out of range", no + 1)));
                        }
                        Node::Split {
                            feature,
                            threshold: num(&parts, 2, no + 1)?,
                            left: num(&parts, 3, no + 1)?,
                            right: num(&parts, 4, no + 1)?,
                        }
                    }
                    Some(&"leaf") => Node::Leaf(num(&parts, 1, no + 1)?),
                    _ => return Err(BaselineError::Format(format!("line {}: expected node", no + 1))),
                };
                nodes.push(node);
            }
            trees.push(Tree::new(nodes)?);
        }
        if !base_score.is_finite() || !shrinkage.is_finite() {
            return Err(BaselineError::Format("non-finite model parameters".into()));
        }
        Ok(Self::new(width, base_score, shrinkage, trees))
    }

    pub fn save(&self, path: &Path) -> Result<(), BaselineError> {
        crate::io::write_string_atomic(path, &self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BaselineError> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

pub fn gbt_fit(features: &[FeatureVector], labels: &[f64], config: &GbtConfig) -> Result<GbtModel, BaselineError> {
    let rows: Vec<Vec<f64>> = features.iter().map(|f| f.values().to_vec()).collect();
    GbtModel::fit(&rows, labels, config)
}

pub fn gbt_predict(model: &GbtModel, features: &FeatureVector) -> Result<BinLabel, BaselineError> {
    model.predict(features.values())
}
