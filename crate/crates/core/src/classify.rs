//! Stratified splits, KNN on raw band values, and the accuracy metrics.
//!
//! Labels here are class ids `1..=class_count`; 0 only appears in map
//! images, for unlabeled pixels.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cube_io::{self, GroundTruthMap};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::selectors::BandTable;

/// Positions into the labeled-pixel order.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub fraction: f64,
    pub seed: u64,
}

/// `max(1, round_half_up(fraction * n))`.
pub fn train_count(n: usize, fraction: f64) -> usize {
    // The slack keeps decimal halves such as 0.1 * 25 rounding up.
    let r = (fraction * n as f64 + 0.5 + 1e-9).floor() as usize;
    r.clamp(1, n.max(1))
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::config(format!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    Ok(())
}

/// Per-class random split over a sequence of labels.
///
/// Classes are visited in ascending id order and each is shuffled by one
/// ChaCha8 stream seeded from `seed`; index lists come back sorted.
pub fn stratified_split_labels(labels: &[u16], fraction: f64, seed: u64) -> Result<SplitPlan> {
    check_fraction(fraction)?;
    let max = labels.iter().copied().max().unwrap_or(0) as usize;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); max + 1];
    for (pos, &l) in labels.iter().enumerate() {
        by_class[l as usize].push(pos);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for members in by_class.iter_mut().skip(1).filter(|m| !m.is_empty()) {
        let n_train = train_count(members.len(), fraction);
        members.shuffle(&mut rng);
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    if train.is_empty() {
        return Err(Error::EmptySample);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitPlan {
        train_indices: train,
        test_indices: test,
        fraction,
        seed,
    })
}

pub fn stratified_split(gt: &GroundTruthMap, fraction: f64, seed: u64) -> Result<SplitPlan> {
    let order = cube_io::labeled_pixel_order(gt);
    let labels: Vec<u16> = order.iter().map(|&p| gt.labels()[p]).collect();
    stratified_split_labels(&labels, fraction, seed)
}

/// Row-major sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    dims: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(dims: usize, data: Vec<f64>) -> Result<Self> {
        if dims == 0 || !data.len().is_multiple_of(dims) {
            return Err(Error::Dimension(format!(
                "{} values do not split into rows of {dims}",
                data.len()
            )));
        }
        Ok(FeatureMatrix { dims, data })
    }

    /// Rows `rows` of the table's raw values restricted to `bands`.
    pub fn from_table(table: &BandTable, bands: &[usize], rows: &[usize]) -> Result<Self> {
        if let Some(&b) = bands.iter().find(|&&b| b >= table.band_count()) {
            return Err(Error::config(format!(
                "band {b} out of range for a {}-band table",
                table.band_count()
            )));
        }
        let mut data = Vec::with_capacity(bands.len() * rows.len());
        for &r in rows {
            data.extend(bands.iter().map(|&b| table.raw_band(b)[r]));
        }
        FeatureMatrix::new(bands.len().max(1), data)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }
}

/// Majority vote of the `k` nearest training rows under Euclidean distance.
///
/// Distance ties go to the lower training index; vote ties go to the
/// smallest class id among the tied classes.
pub fn knn_classify(
    train: &FeatureMatrix,
    train_labels: &[u16],
    test: &FeatureMatrix,
    k: usize,
    exec: Execution,
) -> Result<Vec<u16>> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if train.is_empty() {
        return Err(Error::config("training set is empty"));
    }
    if k > train.len() {
        return Err(Error::config(format!(
            "k = {k} exceeds the {} training samples",
            train.len()
        )));
    }
    if train_labels.len() != train.len() {
        return Err(Error::LengthMismatch(train.len(), train_labels.len()));
    }
    if train.dims() != test.dims() {
        return Err(Error::Dimension(format!(
            "train has {} bands, test has {}",
            train.dims(),
            test.dims()
        )));
    }
    let classes = train_labels.iter().copied().max().unwrap_or(0) as usize + 1;
    Ok(exec::map_range(exec, test.len(), |q| {
        predict_one(train, train_labels, test.row(q), k, classes)
    }))
}

fn predict_one(train: &FeatureMatrix, labels: &[u16], query: &[f64], k: usize, classes: usize) -> u16 {
    // Sorted by (distance, index); at most k entries.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for i in 0..train.len() {
        let d: f64 = train.row(i).iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let at = best.partition_point(|&(bd, bi)| (bd, bi) < (d, i));
        best.insert(at, (d, i));
        best.truncate(k);
    }
    let mut votes = vec![0usize; classes];
    for &(_, i) in &best {
        votes[labels[i] as usize] += 1;
    }
    let top = *votes.iter().max().unwrap();
    votes.iter().position(|&v| v == top).unwrap() as u16
}

/// Rows are true classes, columns predicted classes, both `1..=class_count`
/// stored at offset 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    class_count: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn from_counts(rows: &[Vec<u64>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("confusion matrix must be square".into()));
        }
        Ok(ConfusionMatrix {
            class_count: k,
            counts: rows.concat(),
        })
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Count for true class `t` predicted as `p` (1-based ids).
    pub fn get(&self, t: usize, p: usize) -> u64 {
        self.counts[(t - 1) * self.class_count + (p - 1)]
    }

    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.counts.chunks(self.class_count).map(<[u64]>::to_vec).collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        let k = self.class_count;
        self.counts.iter().enumerate().all(|(i, &c)| c == 0 || i / k == i % k)
    }

    pub fn metrics(&self) -> MetricsReport {
        let k = self.class_count;
        let total = self.total() as f64;
        let row_sum = |t: usize| -> u64 { self.counts[t * k..(t + 1) * k].iter().sum() };
        let col_sum = |p: usize| -> u64 { (0..k).map(|t| self.counts[t * k + p]).sum() };
        let diag: u64 = (0..k).map(|i| self.counts[i * k + i]).sum();

        let per_class: Vec<Option<f64>> = (0..k)
            .map(|t| {
                let n = row_sum(t);
                (n > 0).then(|| self.counts[t * k + t] as f64 / n as f64)
            })
            .collect();
        let present: Vec<f64> = per_class.iter().flatten().copied().collect();
        let aa = if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };

        let (oa, kappa) = if total > 0.0 {
            let po = diag as f64 / total;
            let pe = (0..k).map(|i| row_sum(i) as f64 * col_sum(i) as f64).sum::<f64>() / (total * total);
            let kappa = if pe >= 1.0 {
                if po >= 1.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (po - pe) / (1.0 - pe)
            };
            (po, kappa)
        } else {
            (0.0, 0.0)
        };

        MetricsReport {
            per_class_accuracy: per_class,
            overall_accuracy: oa,
            average_accuracy: aa,
            kappa,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// `None` for classes without test samples; those are left out of AA.
    pub per_class_accuracy: Vec<Option<f64>>,
    pub overall_accuracy: f64,
    pub average_accuracy: f64,
    pub kappa: f64,
}

impl MetricsReport {
    /// `{"oa":…,"aa":…,"kappa":…,"per_class":[…],"confusion":[[…]]}` with
    /// reals at 6 decimals; absent per-class accuracies are `null`.
    pub fn to_json(&self, confusion: &ConfusionMatrix) -> String {
        let per_class: Vec<String> = self
            .per_class_accuracy
            .iter()
            .map(|a| a.map_or_else(|| "null".to_string(), |v| format!("{v:.6}")))
            .collect();
        let rows: Vec<String> = confusion
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(u64::to_string).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        format!(
            "{{\"oa\":{:.6},\"aa\":{:.6},\"kappa\":{:.6},\"per_class\":[{}],\"confusion\":[{}]}}\n",
            self.overall_accuracy,
            self.average_accuracy,
            self.kappa,
            per_class.join(","),
            rows.join(",")
        )
    }
}

pub fn confusion_and_metrics(
    truth: &[u16],
    predicted: &[u16],
    class_count: usize,
) -> Result<(ConfusionMatrix, MetricsReport)> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    let mut counts = vec![0u64; class_count * class_count];
    for (&t, &p) in truth.iter().zip(predicted) {
        let (t, p) = (t as usize, p as usize);
        if t == 0 || p == 0 || t > class_count || p > class_count {
            return Err(Error::Dimension(format!(
                "label pair ({t}, {p}) outside 1..={class_count}"
            )));
        }
        counts[(t - 1) * class_count + (p - 1)] += 1;
    }
    let cm = ConfusionMatrix { class_count, counts };
    let report = cm.metrics();
    Ok((cm, report))
}

/// Predicted label image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    pub rows: usize,
    pub cols: usize,
    pub labels: Vec<u16>,
}

/// Black for 0, then 16 class colors; ids above 16 wrap around.
const PALETTE: [[u8; 3]; 17] = [
    [0, 0, 0],
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
];

impl LabelImage {
    pub fn color(label: u16) -> [u8; 3] {
        match label {
            0 => PALETTE[0],
            l => PALETTE[1 + (l as usize - 1) % 16],
        }
    }

    /// Plain-text (P3) portable pixmap.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "P3")?;
        writeln!(w, "{} {}", self.cols, self.rows)?;
        writeln!(w, "255")?;
        for row in self.labels.chunks(self.cols) {
            let px: Vec<String> = row
                .iter()
                .map(|&l| {
                    let [r, g, b] = Self::color(l);
                    format!("{r} {g} {b}")
                })
                .collect();
            writeln!(w, "{}", px.join(" "))?;
        }
        Ok(())
    }
}

/// Outcome of a KNN evaluation of one band subset.
#[derive(Debug, Clone)]
pub struct Evaluation {
    /// Prediction for each entry of `split.test_indices`.
    pub predictions: Vec<u16>,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

/// Trains KNN on the split's training samples over `bands` and scores the
/// test samples.
pub fn evaluate_bands(
    table: &BandTable,
    bands: &[usize],
    split: &SplitPlan,
    neighbors: usize,
    exec: Execution,
) -> Result<Evaluation> {
    if bands.is_empty() {
        return Err(Error::config("no bands to classify with"));
    }
    let labels = table.labels();
    let class_count = table.class_var().cardinality() as usize;
    let train = FeatureMatrix::from_table(table, bands, &split.train_indices)?;
    let train_labels: Vec<u16> = split.train_indices.iter().map(|&i| labels[i]).collect();
    let test = FeatureMatrix::from_table(table, bands, &split.test_indices)?;
    let predictions = if test.is_empty() {
        Vec::new()
    } else {
        knn_classify(&train, &train_labels, &test, neighbors, exec)?
    };
    let truth: Vec<u16> = split.test_indices.iter().map(|&i| labels[i]).collect();
    let (confusion, metrics) = confusion_and_metrics(&truth, &predictions, class_count)?;
    Ok(Evaluation {
        predictions,
        confusion,
        metrics,
    })
}

/// Full-scene map: training pixels keep their true label, test pixels get
/// their prediction, unlabeled pixels stay 0.
pub fn full_scene_map(gt: &GroundTruthMap, split: &SplitPlan, predictions: &[u16]) -> Result<LabelImage> {
    if predictions.len() != split.test_indices.len() {
        return Err(Error::LengthMismatch(split.test_indices.len(), predictions.len()));
    }
    let order = cube_io::labeled_pixel_order(gt);
    let mut labels = vec![0u16; gt.rows() * gt.cols()];
    for &i in &split.train_indices {
        let p = order[i];
        labels[p] = gt.labels()[p];
    }
    for (&i, &pred) in split.test_indices.iter().zip(predictions) {
        labels[order[i]] = pred;
    }
    Ok(LabelImage {
        rows: gt.rows(),
        cols: gt.cols(),
        labels,
    })
}
