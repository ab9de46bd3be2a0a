//! In-memory dataset: features, labels, sensitive groups and the estimated
//! group-membership probabilities `eta(x) = P(S = s+ | x)`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math;
use crate::optim::{self, MinimizeOptions, Objective};

/// Tolerance of the calibration-in-the-mean invariant `mean(eta) = p`.
pub const CALIBRATION_TOL: f64 = 1e-6;
/// Default clipping margin for eta estimates.
pub const DEFAULT_ETA_CLIP: f64 = 1e-4;

/// Value of the binary sensitive attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    /// `s-`, the group protected by the fairness constraint.
    Protected,
    /// `s+`, the non-sensitive reference group.
    Reference,
}

impl Group {
    pub fn is_reference(self) -> bool {
        self == Group::Reference
    }

    /// 1 for the reference group, 0 otherwise.
    pub fn indicator(self) -> f64 {
        if self.is_reference() {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    /// Finitely many values (one-hot indicators, binarized columns).
    Discrete,
    Continuous,
}

/// How eta estimates were produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EtaSource {
    GroupFrequency,
    Model,
    Supplied,
}

impl EtaSource {
    pub fn name(self) -> &'static str {
        match self {
            EtaSource::GroupFrequency => "group-frequency",
            EtaSource::Model => "probabilistic-model",
            EtaSource::Supplied => "user-supplied",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EtaMethod {
    /// Per-cell frequency of the reference group among identical feature
    /// rows, with a Laplace pseudo-count pulling towards `p`.
    GroupFrequency { smoothing: f64 },
    /// L2-regularized logistic regression of the group on the features.
    Model { regularization: f64 },
    /// Externally computed estimates, one per row.
    Supplied(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtaEstimator {
    pub method: EtaMethod,
    /// Estimates are clipped to `[clip, 1 - clip]` before calibration.
    pub clip: f64,
}

impl EtaEstimator {
    pub fn group_frequency(smoothing: f64) -> Self {
        EtaEstimator { method: EtaMethod::GroupFrequency { smoothing }, clip: DEFAULT_ETA_CLIP }
    }

    pub fn model(regularization: f64) -> Self {
        EtaEstimator { method: EtaMethod::Model { regularization }, clip: DEFAULT_ETA_CLIP }
    }

    pub fn supplied(values: Vec<f64>) -> Self {
        EtaEstimator { method: EtaMethod::Supplied(values), clip: DEFAULT_ETA_CLIP }
    }

    pub fn with_clip(mut self, clip: f64) -> Self {
        self.clip = clip;
        self
    }
}

/// Feature matrix (row-major), `±1` labels and sensitive groups.
///
/// Invariants: at least two rows, both groups present, labels in `{-1, +1}`,
/// finite features and, when present, eta estimates in `[0, 1]` whose mean
/// equals the reference-group rate within [`CALIBRATION_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_rows: usize,
    n_features: usize,
    labels: Vec<i8>,
    sensitive: Vec<Group>,
    feature_names: Vec<String>,
    column_kinds: Vec<ColumnKind>,
    group_rate: f64,
    eta: Option<Vec<f64>>,
    eta_source: Option<EtaSource>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<i8>,
        sensitive: Vec<Group>,
        feature_names: Vec<String>,
        column_kinds: Vec<ColumnKind>,
    ) -> Result<Self> {
        let n_rows = labels.len();
        if n_rows < 2 {
            return Err(Error::TooFewRows { needed: 2, found: n_rows });
        }
        if sensitive.len() != n_rows {
            return Err(Error::LengthMismatch { expected: n_rows, found: sensitive.len() });
        }
        if features.len() != n_rows * n_features {
            return Err(Error::LengthMismatch { expected: n_rows * n_features, found: features.len() });
        }
        if feature_names.len() != n_features {
            return Err(Error::LengthMismatch { expected: n_features, found: feature_names.len() });
        }
        if column_kinds.len() != n_features {
            return Err(Error::LengthMismatch { expected: n_features, found: column_kinds.len() });
        }
        if let Some((row, &value)) = labels.iter().enumerate().find(|(_, &y)| y != 1 && y != -1) {
            return Err(Error::InvalidLabel { row, value });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteFeature { row: pos / n_features, column: pos % n_features });
        }
        let group_rate = reference_rate(&sensitive)?;
        Ok(Dataset {
            features,
            n_rows,
            n_features,
            labels,
            sensitive,
            feature_names,
            column_kinds,
            group_rate,
            eta: None,
            eta_source: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.n_rows).map(move |i| self.row(i))
    }

    /// Row-major feature matrix.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn sensitive(&self) -> &[Group] {
        &self.sensitive
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column_kinds(&self) -> &[ColumnKind] {
        &self.column_kinds
    }

    /// `p = P(S = s+)` on this dataset.
    pub fn group_rate(&self) -> f64 {
        self.group_rate
    }

    pub fn eta(&self) -> Option<&[f64]> {
        self.eta.as_deref()
    }

    pub fn eta_source(&self) -> Option<EtaSource> {
        self.eta_source
    }

    pub fn require_eta(&self) -> Result<&[f64]> {
        self.eta().ok_or(Error::MissingEta)
    }

    /// Number of rows in the reference and protected groups.
    pub fn group_counts(&self) -> (usize, usize) {
        let n_ref = self.sensitive.iter().filter(|g| g.is_reference()).count();
        (n_ref, self.n_rows - n_ref)
    }

    /// Attaches eta estimates after validating range and calibration.
    pub fn with_eta(mut self, eta: Vec<f64>, source: EtaSource) -> Result<Self> {
        validate_eta(&eta, self.n_rows, self.group_rate)?;
        self.eta = Some(eta);
        self.eta_source = Some(source);
        Ok(self)
    }

    pub fn without_eta(mut self) -> Self {
        self.eta = None;
        self.eta_source = None;
        self
    }

    /// Rows at `indices`, in that order. Eta estimates are carried over and
    /// recalibrated to the subset's group rate.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        let mut out = Dataset::new(
            features,
            self.n_features,
            indices.iter().map(|&i| self.labels[i]).collect(),
            indices.iter().map(|&i| self.sensitive[i]).collect(),
            self.feature_names.clone(),
            self.column_kinds.clone(),
        )?;
        if let (Some(eta), Some(source)) = (&self.eta, self.eta_source) {
            let mut sub: Vec<f64> = indices.iter().map(|&i| eta[i]).collect();
            calibrate_mean(&mut sub, out.group_rate)?;
            out = out.with_eta(sub, source)?;
        }
        Ok(out)
    }

    /// Fills in eta estimates.
    ///
    /// Group-frequency estimates are `(n+(x) + smoothing p) / (n(x) + smoothing)`
    /// over rows identical to `x`. Every method clips to `[clip, 1 - clip]` and
    /// finishes with a shift of all log-odds so that `mean(eta) = p`.
    pub fn estimate_eta(&self, est: &EtaEstimator) -> Result<Dataset> {
        if !(0.0..0.5).contains(&est.clip) {
            return Err(Error::param("clip", "must lie in [0, 0.5)"));
        }
        let (mut eta, source) = match &est.method {
            EtaMethod::GroupFrequency { smoothing } => (self.group_frequency(*smoothing)?, EtaSource::GroupFrequency),
            EtaMethod::Model { regularization } => (self.logistic_group_model(*regularization)?, EtaSource::Model),
            EtaMethod::Supplied(values) => {
                if values.len() != self.n_rows {
                    return Err(Error::LengthMismatch { expected: self.n_rows, found: values.len() });
                }
                if let Some((row, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::EtaOutOfRange { row, value });
                }
                (values.clone(), EtaSource::Supplied)
            }
        };
        if est.clip > 0.0 {
            for v in &mut eta {
                *v = v.clamp(est.clip, 1.0 - est.clip);
            }
        }
        calibrate_mean(&mut eta, self.group_rate)?;
        self.clone().with_eta(eta, source)
    }

    fn group_frequency(&self, smoothing: f64) -> Result<Vec<f64>> {
        if !(smoothing >= 0.0) {
            return Err(Error::param("smoothing", "must be non-negative"));
        }
        if let Some(j) = self.column_kinds.iter().position(|k| *k == ColumnKind::Continuous) {
            return Err(Error::ContinuousFeature(self.feature_names[j].clone()));
        }
        let mut cells: BTreeMap<Vec<u64>, (usize, usize)> = BTreeMap::new();
        for (row, g) in self.rows().zip(&self.sensitive) {
            let cell = cells.entry(row_key(row)).or_insert((0, 0));
            cell.0 += 1;
            cell.1 += usize::from(g.is_reference());
        }
        let p = self.group_rate;
        Ok(self
            .rows()
            .map(|row| {
                let (n, n_ref) = cells[&row_key(row)];
                (n_ref as f64 + smoothing * p) / (n as f64 + smoothing)
            })
            .collect())
    }

    fn logistic_group_model(&self, regularization: f64) -> Result<Vec<f64>> {
        if !(regularization >= 0.0) {
            return Err(Error::param("regularization", "must be non-negative"));
        }
        let fit = GroupLogistic { data: self, l2: regularization };
        let mut x0 = vec![0.0; self.n_features + 1];
        x0[self.n_features] = math::logit(self.group_rate);
        let opts = MinimizeOptions { max_iters: 5_000, grad_tol: 1e-9, ..MinimizeOptions::default() };
        let theta = optim::minimize(&fit, x0, &opts)?.x;
        let (w, b) = theta.split_at(self.n_features);
        Ok(self.rows().map(|row| math::sigmoid(math::dot(w, row) + b[0])).collect())
    }

    /// Deterministic k-fold split stratified on (label, group) cells, or on
    /// groups alone when some cell has fewer than `k` rows.
    pub fn split(&self, k: usize, seed: u64) -> Result<SplitPlan> {
        if k < 2 {
            return Err(Error::param("folds", "need at least two folds"));
        }
        if k > self.n_rows {
            return Err(Error::TooFewRows { needed: k, found: self.n_rows });
        }
        let mut joint: BTreeMap<(i8, Group), Vec<usize>> = BTreeMap::new();
        for i in 0..self.n_rows {
            joint.entry((self.labels[i], self.sensitive[i])).or_default().push(i);
        }
        let (cells, stratification) = if joint.values().all(|c| c.len() >= k) {
            (joint.into_values().collect::<Vec<_>>(), Stratification::LabelAndGroup)
        } else {
            let mut by_group: BTreeMap<Group, Vec<usize>> = BTreeMap::new();
            for i in 0..self.n_rows {
                by_group.entry(self.sensitive[i]).or_default().push(i);
            }
            if by_group.values().any(|c| c.len() < k) {
                return Err(Error::DegenerateGroup);
            }
            (by_group.into_values().collect(), Stratification::GroupOnly)
        };

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut assignment = vec![0usize; self.n_rows];
        let mut offset = 0;
        for mut cell in cells {
            cell.shuffle(&mut rng);
            for (j, &i) in cell.iter().enumerate() {
                assignment[i] = (offset + j) % k;
            }
            offset += cell.len();
        }

        let mut folds = Vec::with_capacity(k);
        for f in 0..k {
            let test_idx: Vec<usize> = (0..self.n_rows).filter(|&i| assignment[i] == f).collect();
            let train_idx: Vec<usize> = (0..self.n_rows).filter(|&i| assignment[i] != f).collect();
            folds.push(Fold { train: self.subset(&train_idx)?, test: self.subset(&test_idx)?, test_indices: test_idx });
        }
        Ok(SplitPlan { folds, stratification })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratification {
    LabelAndGroup,
    /// Fallback when a (label, group) cell is smaller than the fold count.
    GroupOnly,
}

#[derive(Debug, Clone)]
pub struct Fold {
    pub train: Dataset,
    pub test: Dataset,
    /// Row indices of `test` in the parent dataset.
    pub test_indices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub folds: Vec<Fold>,
    pub stratification: Stratification,
}

fn row_key(row: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 must land in the same cell
    row.iter().map(|v| (v + 0.0).to_bits()).collect()
}

fn reference_rate(sensitive: &[Group]) -> Result<f64> {
    let n_ref = sensitive.iter().filter(|g| g.is_reference()).count();
    if n_ref == 0 || n_ref == sensitive.len() {
        return Err(Error::DegenerateGroup);
    }
    Ok(n_ref as f64 / sensitive.len() as f64)
}

fn validate_eta(eta: &[f64], n_rows: usize, p: f64) -> Result<()> {
    if eta.len() != n_rows {
        return Err(Error::LengthMismatch { expected: n_rows, found: eta.len() });
    }
    if let Some((row, &value)) = eta.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::EtaOutOfRange { row, value });
    }
    let mean = mean(eta);
    if (mean - p).abs() > CALIBRATION_TOL {
        return Err(Error::EtaNotCalibrated { mean, p });
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Shifts every log-odds by a common constant so that `mean(eta) = p`.
/// Entries at exactly 0 or 1 are left in place.
pub fn calibrate_mean(eta: &mut [f64], p: f64) -> Result<()> {
    if eta.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    if (mean(eta) - p).abs() <= 1e-12 {
        return Ok(());
    }
    let logits: Vec<f64> = eta.iter().map(|&v| math::logit(v)).collect();
    let shifted_mean = |t: f64| logits.iter().map(|&z| math::sigmoid(z + t)).sum::<f64>() / logits.len() as f64;
    let t = math::bisect_increasing(|t| shifted_mean(t) - p, -60.0, 60.0, 1e-15);
    for (v, z) in eta.iter_mut().zip(&logits) {
        *v = math::sigmoid(z + t);
    }
    let m = mean(eta);
    if (m - p).abs() > CALIBRATION_TOL {
        return Err(Error::EtaNotCalibrated { mean: m, p });
    }
    Ok(())
}

/// Logistic regression of the reference-group indicator on the features.
struct GroupLogistic<'a> {
    data: &'a Dataset,
    l2: f64,
}

impl Objective for GroupLogistic<'_> {
    fn dim(&self) -> usize {
        self.data.n_features + 1
    }

    fn eval(&self, theta: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.data.n_features;
        let n = self.data.n_rows as f64;
        let (w, b) = theta.split_at(d);
        grad.fill(0.0);
        let mut value = 0.0;
        for (row, g) in self.data.rows().zip(&self.data.sensitive) {
            let s = 2.0 * g.indicator() - 1.0;
            let z = math::dot(w, row) + b[0];
            value += math::softplus(-s * z);
            let coef = -s * math::sigmoid(-s * z) / n;
            for (gj, xj) in grad[..d].iter_mut().zip(row) {
                *gj += coef * xj;
            }
            grad[d] += coef;
        }
        value /= n;
        for j in 0..d {
            value += 0.5 * self.l2 * w[j] * w[j];
            grad[j] += self.l2 * w[j];
        }
        value
    }
}

/// Names `x0, x1, ...` for anonymous feature columns.
pub fn default_feature_names(n: usize) -> Vec<String> {
    (0..n).map(|j| alloc::format!("x{j}")).collect()
}

pub(crate) fn discrete_kinds(n: usize) -> Vec<ColumnKind> {
    vec![ColumnKind::Discrete; n]
}

impl core::fmt::Display for Group {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Group::Protected => "protected",
            Group::Reference => "reference",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn tiny() -> Dataset {
        Dataset::new(
            vec![1.0, 0.0, 1.0, 0.0],
            1,
            vec![1, -1, 1, -1],
            vec![Group::Reference, Group::Reference, Group::Protected, Group::Protected],
            default_feature_names(1),
            discrete_kinds(1),
        )
        .unwrap()
    }

    #[test]
    fn group_rate_is_reference_fraction() {
        assert_eq!(tiny().group_rate(), 0.5);
        assert_eq!(tiny().group_counts(), (2, 2));
    }

    #[test]
    fn rejects_single_group_and_bad_labels() {
        let one_group = Dataset::new(
            vec![0.0, 1.0],
            1,
            vec![1, -1],
            vec![Group::Reference; 2],
            default_feature_names(1),
            discrete_kinds(1),
        );
        assert_eq!(one_group.unwrap_err(), Error::DegenerateGroup);
        let bad_label = Dataset::new(
            vec![0.0, 1.0],
            1,
            vec![1, 0],
            vec![Group::Reference, Group::Protected],
            default_feature_names(1),
            discrete_kinds(1),
        );
        assert_eq!(bad_label.unwrap_err(), Error::InvalidLabel { row: 1, value: 0 });
    }

    #[test]
    fn students_group_frequency() {
        let d = synthetic::students();
        assert_eq!(d.n_rows(), 200);
        assert_eq!(d.group_rate(), 0.5);
        let d = d.estimate_eta(&EtaEstimator::group_frequency(0.0)).unwrap();
        let eta = d.eta().unwrap();
        for (row, &e) in d.rows().zip(eta) {
            let expected = if row[0] == 1.0 { 51.0 / 99.0 } else { 49.0 / 101.0 };
            assert_eq!(e, expected);
        }
    }

    #[test]
    fn group_frequency_counts_are_integers_before_clipping() {
        let d = synthetic::random_discrete(&mut ChaCha8Rng::seed_from_u64(3), 300, 6);
        let est = d.estimate_eta(&EtaEstimator::group_frequency(0.0).with_clip(0.0)).unwrap();
        let eta = est.eta().unwrap();
        let mut cells: BTreeMap<Vec<u64>, (usize, usize)> = BTreeMap::new();
        for (row, g) in d.rows().zip(d.sensitive()) {
            let c = cells.entry(row_key(row)).or_default();
            c.0 += 1;
            c.1 += usize::from(g.is_reference());
        }
        for (row, &e) in d.rows().zip(eta) {
            let (n, n_ref) = cells[&row_key(row)];
            assert!((e * n as f64 - n_ref as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_feature_gives_eta_equal_to_p() {
        let d = Dataset::new(
            vec![3.0; 5],
            1,
            vec![1, 1, -1, -1, 1],
            vec![Group::Reference, Group::Protected, Group::Reference, Group::Protected, Group::Protected],
            default_feature_names(1),
            discrete_kinds(1),
        )
        .unwrap();
        let d = d.estimate_eta(&EtaEstimator::group_frequency(2.0)).unwrap();
        for &e in d.eta().unwrap() {
            assert!((e - 0.4).abs() < 1e-15);
        }
    }

    #[test]
    fn group_frequency_rejects_continuous_columns() {
        let d = synthetic::biased_family(&synthetic::BiasedFamily { n: 50, ..Default::default() }).unwrap();
        let err = d.estimate_eta(&EtaEstimator::group_frequency(0.0)).unwrap_err();
        assert!(matches!(err, Error::ContinuousFeature(_)));
    }

    #[test]
    fn every_method_is_calibrated_in_the_mean() {
        let d = synthetic::biased_family(&synthetic::BiasedFamily { n: 400, ..Default::default() }).unwrap();
        let p = d.group_rate();
        let model = d.estimate_eta(&EtaEstimator::model(1e-3)).unwrap();
        let m = model.eta().unwrap().iter().sum::<f64>() / 400.0;
        assert!((m - p).abs() <= CALIBRATION_TOL);
        assert!(model.eta().unwrap().iter().all(|&e| (DEFAULT_ETA_CLIP * 0.5..=1.0 - DEFAULT_ETA_CLIP * 0.5).contains(&e)));

        let skewed: Vec<f64> = (0..400).map(|i| if i % 3 == 0 { 0.9 } else { 0.0 }).collect();
        let sup = d.estimate_eta(&EtaEstimator::supplied(skewed)).unwrap();
        let m = sup.eta().unwrap().iter().sum::<f64>() / 400.0;
        assert!((m - p).abs() <= CALIBRATION_TOL);

        let disc = synthetic::random_discrete(&mut ChaCha8Rng::seed_from_u64(9), 200, 5);
        let freq = disc.estimate_eta(&EtaEstimator::group_frequency(1.0)).unwrap();
        let m = freq.eta().unwrap().iter().sum::<f64>() / 200.0;
        assert!((m - disc.group_rate()).abs() <= CALIBRATION_TOL);
    }

    #[test]
    fn supplied_eta_is_validated() {
        let d = tiny();
        assert!(matches!(
            d.estimate_eta(&EtaEstimator::supplied(vec![0.5; 3])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            d.estimate_eta(&EtaEstimator::supplied(vec![0.5, 1.5, 0.5, 0.5])),
            Err(Error::EtaOutOfRange { row: 1, .. })
        ));
        assert!(matches!(d.clone().with_eta(vec![0.9; 4], EtaSource::Supplied), Err(Error::EtaNotCalibrated { .. })));
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = Dataset::new(
            (0..10).map(f64::from).collect(),
            1,
            vec![1, 1, 1, 1, 1, -1, -1, -1, -1, -1],
            vec![
                Group::Reference,
                Group::Protected,
                Group::Reference,
                Group::Protected,
                Group::Reference,
                Group::Protected,
                Group::Reference,
                Group::Protected,
                Group::Reference,
                Group::Protected,
            ],
            default_feature_names(1),
            vec![ColumnKind::Continuous],
        )
        .unwrap();
        let plan = d.split(5, 7).unwrap();
        // (y, s) cells have 2 or 3 rows, fewer than 5 folds
        assert_eq!(plan.stratification, Stratification::GroupOnly);
        assert!(plan.folds.iter().all(|f| f.test.n_rows() == 2));
        assert!(plan.folds.iter().all(|f| f.test.group_counts() == (1, 1)));
        let again = d.split(5, 7).unwrap();
        for (a, b) in plan.folds.iter().zip(&again.folds) {
            assert_eq!(a.test_indices, b.test_indices);
        }
        let mut all: Vec<usize> = plan.folds.iter().flat_map(|f| f.test_indices.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn split_stratifies_jointly_when_possible() {
        let d = synthetic::biased_family(&synthetic::BiasedFamily { n: 500, ..Default::default() }).unwrap();
        let plan = d.split(5, 1).unwrap();
        assert_eq!(plan.stratification, Stratification::LabelAndGroup);
        for f in &plan.folds {
            assert!((f.test.group_rate() - d.group_rate()).abs() < 0.02);
        }
        assert!(d.split(1, 0).is_err());
        assert!(d.split(501, 0).is_err());
    }

    #[test]
    fn subset_recalibrates_eta() {
        let d = synthetic::biased_family(&synthetic::BiasedFamily { n: 300, ..Default::default() })
            .unwrap()
            .estimate_eta(&EtaEstimator::model(1e-3))
            .unwrap();
        let idx: Vec<usize> = (0..300).filter(|i| i % 3 != 0).collect();
        let sub = d.subset(&idx).unwrap();
        let m = sub.eta().unwrap().iter().sum::<f64>() / sub.n_rows() as f64;
        assert!((m - sub.group_rate()).abs() <= CALIBRATION_TOL);
    }
}
