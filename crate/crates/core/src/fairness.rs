//! Fairness quantities: empirical and surrogate risk differences, the
//! extreme classifiers `f_max` / `f_min`, the constraint-free criterion, the
//! bounds on the true risk difference of a scoring function, and the
//! alternative notions (risk ratio, equalized odds, equal opportunity).
//!
//! Predictions follow `sign(0) = +1` throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Group};
use crate::error::{Error, Result};
use crate::surrogate::{self, PsiTransform, Side, Surrogate};

/// Label of a score under the `sign(0) = +1` convention.
#[inline]
pub fn sign(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

/// Which estimate of `P(S = s+ | x)` weights the rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Weighting {
    /// Observed group membership: exact empirical group means.
    Indicator,
    /// Smoothed estimates stored on the dataset.
    Estimated,
}

/// Per-row weights `eta_i / (p N)` and `(1 - eta_i) / ((1 - p) N)`.
///
/// Every risk difference in this module has the form
/// `sum_i [pos_i g(h_i) + neg_i g(-h_i)] - 1` for some `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct RowWeights {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

impl RowWeights {
    pub fn from_eta(eta: &[f64], p: f64) -> Result<Self> {
        if eta.is_empty() {
            return Err(Error::TooFewRows { needed: 1, found: 0 });
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", "group rate must lie in (0, 1)"));
        }
        let n = eta.len() as f64;
        Ok(RowWeights {
            pos: eta.iter().map(|e| e / (p * n)).collect(),
            neg: eta.iter().map(|e| (1.0 - e) / ((1.0 - p) * n)).collect(),
        })
    }

    /// Indicator weights: `1 / n+` on reference rows and `1 / n-` on the rest.
    pub fn from_groups(sensitive: &[Group]) -> Result<Self> {
        let mask = vec![true; sensitive.len()];
        Self::from_groups_masked(sensitive, &mask)
    }

    fn from_groups_masked(sensitive: &[Group], mask: &[bool]) -> Result<Self> {
        let n_ref = sensitive.iter().zip(mask).filter(|(g, &m)| m && g.is_reference()).count();
        let n_prot = sensitive.iter().zip(mask).filter(|(g, &m)| m && !g.is_reference()).count();
        if n_ref == 0 || n_prot == 0 {
            return Err(Error::DegenerateGroup);
        }
        let (wr, wp) = (1.0 / n_ref as f64, 1.0 / n_prot as f64);
        let mut pos = vec![0.0; sensitive.len()];
        let mut neg = vec![0.0; sensitive.len()];
        for (i, (g, &m)) in sensitive.iter().zip(mask).enumerate() {
            if m {
                if g.is_reference() {
                    pos[i] = wr;
                } else {
                    neg[i] = wp;
                }
            }
        }
        Ok(RowWeights { pos, neg })
    }

    pub fn for_dataset(data: &Dataset, weighting: Weighting) -> Result<Self> {
        match weighting {
            Weighting::Indicator => Self::from_groups(data.sensitive()),
            Weighting::Estimated => Self::from_eta(data.require_eta()?, data.group_rate()),
        }
    }

    /// Weights of the risk difference among rows with the given label; the
    /// other rows get zero weight. With estimated weighting the group rate
    /// is the mean estimate within the label.
    pub fn conditional_on_label(data: &Dataset, label: i8, weighting: Weighting) -> Result<Self> {
        let mask: Vec<bool> = data.labels().iter().map(|&y| y == label).collect();
        match weighting {
            Weighting::Indicator => Self::from_groups_masked(data.sensitive(), &mask),
            Weighting::Estimated => {
                let eta = data.require_eta()?;
                let n = mask.iter().filter(|&&m| m).count();
                if n == 0 {
                    return Err(Error::DegenerateGroup);
                }
                let p_y = eta.iter().zip(&mask).filter(|(_, &m)| m).map(|(e, _)| e).sum::<f64>() / n as f64;
                if !(p_y > 0.0 && p_y < 1.0) {
                    return Err(Error::DegenerateGroup);
                }
                let nf = n as f64;
                let mut pos = vec![0.0; eta.len()];
                let mut neg = vec![0.0; eta.len()];
                for i in 0..eta.len() {
                    if mask[i] {
                        pos[i] = eta[i] / (p_y * nf);
                        neg[i] = (1.0 - eta[i]) / ((1.0 - p_y) * nf);
                    }
                }
                Ok(RowWeights { pos, neg })
            }
        }
    }

    /// Same weights with the roles of the two groups exchanged.
    pub fn swapped(&self) -> Self {
        RowWeights { pos: self.neg.clone(), neg: self.pos.clone() }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    pub fn pos(&self) -> &[f64] {
        &self.pos
    }

    pub fn neg(&self) -> &[f64] {
        &self.neg
    }

    fn check_len(&self, scores: &[f64]) -> Result<()> {
        if scores.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: scores.len() });
        }
        Ok(())
    }

    /// Risk difference of `sign(h)` under these weights.
    pub fn indicator_rd(&self, scores: &[f64]) -> Result<f64> {
        self.check_len(scores)?;
        let mut total = 0.0;
        for ((&h, &a), &b) in scores.iter().zip(&self.pos).zip(&self.neg) {
            total += if h >= 0.0 { a } else { b };
        }
        Ok(total - 1.0)
    }

    /// `sum_i [pos_i g(h_i) + neg_i g(-h_i)] - 1` with `g` the kappa or
    /// delta form of `s`.
    pub fn surrogate_rd(&self, scores: &[f64], s: &Surrogate, side: Side) -> Result<f64> {
        self.check_len(scores)?;
        let mut total = 0.0;
        for ((&h, &a), &b) in scores.iter().zip(&self.pos).zip(&self.neg) {
            total += a * s.side_value(side, h) + b * s.side_value(side, -h);
        }
        Ok(total - 1.0)
    }

    /// Gradient of [`RowWeights::surrogate_rd`] with respect to each score.
    pub fn surrogate_rd_score_gradient(&self, scores: &[f64], s: &Surrogate, side: Side, out: &mut [f64]) {
        for (i, &h) in scores.iter().enumerate() {
            out[i] = self.pos[i] * s.side_derivative(side, h) - self.neg[i] * s.side_derivative(side, -h);
        }
    }
}

fn group_positive_rates(predictions: &[i8], sensitive: &[Group], mask: Option<&[bool]>) -> Result<(f64, f64)> {
    if predictions.len() != sensitive.len() {
        return Err(Error::LengthMismatch { expected: sensitive.len(), found: predictions.len() });
    }
    let mut counts = [[0usize; 2]; 2];
    for (i, (&y, g)) in predictions.iter().zip(sensitive).enumerate() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let gi = usize::from(g.is_reference());
        counts[gi][0] += 1;
        counts[gi][1] += usize::from(y == 1);
    }
    if counts[0][0] == 0 || counts[1][0] == 0 {
        return Err(Error::DegenerateGroup);
    }
    Ok((
        counts[1][1] as f64 / counts[1][0] as f64,
        counts[0][1] as f64 / counts[0][0] as f64,
    ))
}

/// `P(f = +1 | s+) - P(f = +1 | s-)` from group counts.
pub fn risk_difference(predictions: &[i8], sensitive: &[Group]) -> Result<f64> {
    let (r, q) = group_positive_rates(predictions, sensitive, None)?;
    Ok(r - q)
}

/// Risk difference of `sign(h)` with rows weighted by eta estimates.
pub fn risk_difference_weighted(scores: &[f64], eta: &[f64], p: f64) -> Result<f64> {
    if scores.len() != eta.len() {
        return Err(Error::LengthMismatch { expected: eta.len(), found: scores.len() });
    }
    RowWeights::from_eta(eta, p)?.indicator_rd(scores)
}

/// Surrogate risk difference `RD_kappa(h)` (convex side) or `RD_delta(h)`.
pub fn surrogate_rd(scores: &[f64], weights: &RowWeights, s: &Surrogate, side: Side) -> Result<f64> {
    weights.surrogate_rd(scores, s, side)
}

/// Indicator extremes: `H+(eta) = max(a, b) - 1`, `H-(eta) = min(a, b) - 1`.
pub fn indicator_h_plus(eta: f64, p: f64) -> f64 {
    let (a, b) = surrogate::group_weights(eta, p);
    a.max(b) - 1.0
}

pub fn indicator_h_minus(eta: f64, p: f64) -> f64 {
    let (a, b) = surrogate::group_weights(eta, p);
    a.min(b) - 1.0
}

/// The maximal and minimal risk-difference classifiers and their values.
#[derive(Debug, Clone, PartialEq)]
pub struct Extremes {
    /// `+1` exactly where `eta >= p`.
    pub f_max: Vec<i8>,
    pub f_min: Vec<i8>,
    pub rd_plus: f64,
    pub rd_minus: f64,
}

impl Extremes {
    /// Width `RD+ - RD-` of the attainable interval.
    pub fn width(&self) -> f64 {
        self.rd_plus - self.rd_minus
    }
}

pub fn extreme_classifiers(eta: &[f64], p: f64) -> Result<Extremes> {
    if eta.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", "group rate must lie in (0, 1)"));
    }
    let n = eta.len() as f64;
    let f_max: Vec<i8> = eta.iter().map(|&e| if e >= p { 1 } else { -1 }).collect();
    let f_min = f_max.iter().map(|y| -y).collect();
    let rd_plus = eta.iter().map(|&e| indicator_h_plus(e, p)).sum::<f64>() / n;
    let rd_minus = eta.iter().map(|&e| indicator_h_minus(e, p)).sum::<f64>() / n;
    Ok(Extremes { f_max, f_min, rd_plus, rd_minus })
}

/// Extreme surrogate risk differences `RD-_kappa = mean H-_kappa(eta)` and
/// `RD+_delta = mean H+_delta(eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateExtremes {
    pub rd_kappa_min: f64,
    pub rd_delta_max: f64,
}

pub fn surrogate_extremes(eta: &[f64], p: f64, kappa: &Surrogate, delta: &Surrogate) -> Result<SurrogateExtremes> {
    if eta.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    let n = eta.len() as f64;
    Ok(SurrogateExtremes {
        rd_kappa_min: eta.iter().map(|&e| surrogate::h_minus(kappa, e, p)).sum::<f64>() / n,
        rd_delta_max: eta.iter().map(|&e| surrogate::h_plus_delta(delta, e, p)).sum::<f64>() / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Notion {
    RiskDifference,
    /// `P(f = +1 | s+) <= tau P(f = +1 | s-)`.
    RiskRatio,
    EqualizedOdds,
    EqualOpportunity,
}

impl Notion {
    pub fn name(self) -> &'static str {
        match self {
            Notion::RiskDifference => "risk-difference",
            Notion::RiskRatio => "risk-ratio",
            Notion::EqualizedOdds => "equalized-odds",
            Notion::EqualOpportunity => "equal-opportunity",
        }
    }
}

/// Fairness budget: the risk difference is required to lie in `[-c2, c1]`.
/// For the risk ratio `c1` holds the ratio threshold `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessBudget {
    pub notion: Notion,
    pub c1: f64,
    pub c2: f64,
}

impl FairnessBudget {
    pub fn symmetric(tau: f64) -> Result<Self> {
        Self::asymmetric(tau, tau)
    }

    pub fn asymmetric(c1: f64, c2: f64) -> Result<Self> {
        Self::with_notion(Notion::RiskDifference, c1, c2)
    }

    pub fn risk_ratio(tau: f64) -> Result<Self> {
        Self::with_notion(Notion::RiskRatio, tau, tau)
    }

    pub fn with_notion(notion: Notion, c1: f64, c2: f64) -> Result<Self> {
        match notion {
            Notion::RiskRatio => {
                if !(c1 > 0.0 && c1.is_finite()) {
                    return Err(Error::param("tau", "risk-ratio threshold must be positive"));
                }
            }
            _ => {
                if !((0.0..=2.0).contains(&c1) && (0.0..=2.0).contains(&c2)) {
                    return Err(Error::param("budget", "c1 and c2 must lie in [0, 2]"));
                }
            }
        }
        Ok(FairnessBudget { notion, c1, c2 })
    }
}

/// Outcome of the constraint-free criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionReport {
    pub rd_plus: f64,
    pub rd_minus: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c1 - RD+`; negative when the upper side fails.
    pub upper_margin: f64,
    /// `RD- + c2`; negative when the lower side fails.
    pub lower_margin: f64,
    pub pass: bool,
}

/// Every classifier learned from the data is fair iff `RD+ <= c1` and
/// `RD- >= -c2`.
pub fn constraint_free_check(data: &Dataset, budget: &FairnessBudget) -> Result<CriterionReport> {
    if budget.notion != Notion::RiskDifference {
        return Err(Error::param("notion", "the criterion applies to the risk difference"));
    }
    let ex = extreme_classifiers(data.require_eta()?, data.group_rate())?;
    let upper_margin = budget.c1 - ex.rd_plus;
    let lower_margin = ex.rd_minus + budget.c2;
    Ok(CriterionReport {
        rd_plus: ex.rd_plus,
        rd_minus: ex.rd_minus,
        c1: budget.c1,
        c2: budget.c2,
        upper_margin,
        lower_margin,
        pass: upper_margin >= 0.0 && lower_margin >= 0.0,
    })
}

/// Certified interval for the weighted risk difference of `sign(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub rd_minus: f64,
    pub rd_plus: f64,
    pub rd_kappa_min: f64,
    pub rd_delta_max: f64,
    pub rd_kappa_of_h: f64,
    pub rd_delta_of_h: f64,
    /// `RD- + psi_kappa^-1(RD_kappa(h) - RD-_kappa)`.
    pub upper_bound: f64,
    /// `RD+ - psi_delta^-1(RD+_delta - RD_delta(h))`.
    pub lower_bound: f64,
    /// The inverse saturated; the upper bound falls back to `RD+`.
    pub upper_vacuous: bool,
    pub lower_vacuous: bool,
    /// A slightly negative surrogate excess was treated as zero.
    pub upper_clamped: bool,
    pub lower_clamped: bool,
}

impl BoundsReport {
    pub fn contains(&self, rd: f64, slack: f64) -> bool {
        rd >= self.lower_bound - slack && rd <= self.upper_bound + slack
    }
}

/// Bounds on the true risk difference implied by the surrogate risk
/// differences of `scores`, using eta weighting throughout.
pub fn rd_bounds(scores: &[f64], data: &Dataset, kappa: &Surrogate, delta: &Surrogate) -> Result<BoundsReport> {
    let eta = data.require_eta()?;
    bounds_from_eta(scores, eta, data.group_rate(), kappa, delta)
}

/// [`rd_bounds`] on raw eta estimates.
pub fn bounds_from_eta(scores: &[f64], eta: &[f64], p: f64, kappa: &Surrogate, delta: &Surrogate) -> Result<BoundsReport> {
    let weights = RowWeights::from_eta(eta, p)?;
    let ex = extreme_classifiers(eta, p)?;
    let sx = surrogate_extremes(eta, p, kappa, delta)?;
    let rd_kappa_of_h = weights.surrogate_rd(scores, kappa, Side::Convex)?;
    let rd_delta_of_h = weights.surrogate_rd(scores, delta, Side::Concave)?;
    let psi_k = PsiTransform::new(*kappa, p, Side::Convex)?;
    let psi_d = PsiTransform::new(*delta, p, Side::Concave)?;

    let up = psi_k.inverse(rd_kappa_of_h - sx.rd_kappa_min);
    let lo = psi_d.inverse(sx.rd_delta_max - rd_delta_of_h);
    let upper_bound = if up.saturated { ex.rd_plus } else { ex.rd_minus + up.mu };
    let lower_bound = if lo.saturated { ex.rd_minus } else { ex.rd_plus - lo.mu };
    Ok(BoundsReport {
        rd_minus: ex.rd_minus,
        rd_plus: ex.rd_plus,
        rd_kappa_min: sx.rd_kappa_min,
        rd_delta_max: sx.rd_delta_max,
        rd_kappa_of_h,
        rd_delta_of_h,
        upper_bound,
        lower_bound,
        upper_vacuous: up.saturated,
        lower_vacuous: lo.saturated,
        upper_clamped: up.clamped_negative,
        lower_clamped: lo.clamped_negative,
    })
}

/// `P(f = +1 | s+) / P(f = +1 | s-)`, or `+inf` when the protected group
/// receives no positive prediction.
pub fn risk_ratio(predictions: &[i8], sensitive: &[Group]) -> Result<f64> {
    let (r, q) = group_positive_rates(predictions, sensitive, None)?;
    Ok(if q == 0.0 { f64::INFINITY } else { r / q })
}

/// Convex surrogate of `P(f = +1 | s+) - tau P(f = +1 | s-) <= 0`:
/// `sum [pos kappa(h) + tau neg kappa(-h)] - tau`. Non-positive means
/// satisfied.
pub fn rr_constraint_value(scores: &[f64], weights: &RowWeights, tau: f64, kappa: &Surrogate) -> Result<f64> {
    weights.check_len(scores)?;
    let mut total = 0.0;
    for ((&h, &a), &b) in scores.iter().zip(weights.pos()).zip(weights.neg()) {
        total += a * kappa.kappa(h) + tau * b * kappa.kappa(-h);
    }
    Ok(total - tau)
}

/// The same constraint with the groups exchanged, bounding the ratio from
/// below by `1 / tau`.
pub fn rr_constraint_value_mirrored(scores: &[f64], weights: &RowWeights, tau: f64, kappa: &Surrogate) -> Result<f64> {
    rr_constraint_value(scores, &weights.swapped(), tau, kappa)
}

/// Positive-rate gaps conditioned on each true label. A gap is `None` when
/// one of its (label, group) cells is empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualizedOdds {
    pub given_negative: Option<f64>,
    pub given_positive: Option<f64>,
}

pub fn equalized_odds(predictions: &[i8], labels: &[i8], sensitive: &[Group]) -> Result<EqualizedOdds> {
    if labels.len() != sensitive.len() {
        return Err(Error::LengthMismatch { expected: sensitive.len(), found: labels.len() });
    }
    let gap = |y: i8| -> Result<Option<f64>> {
        let mask: Vec<bool> = labels.iter().map(|&l| l == y).collect();
        match group_positive_rates(predictions, sensitive, Some(&mask)) {
            Ok((r, q)) => Ok(Some(r - q)),
            Err(Error::DegenerateGroup) => Ok(None),
            Err(e) => Err(e),
        }
    };
    Ok(EqualizedOdds { given_negative: gap(-1)?, given_positive: gap(1)? })
}

/// Positive-rate gap among rows whose true label is `+1`.
pub fn equal_opportunity(predictions: &[i8], labels: &[i8], sensitive: &[Group]) -> Result<Option<f64>> {
    Ok(equalized_odds(predictions, labels, sensitive)?.given_positive)
}
