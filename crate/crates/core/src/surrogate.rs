//! Surrogate functions and their calibration transforms.
//!
//! A [`Surrogate`] is described by its convex form `kappa`, an upper
//! replacement for the indicator `1{alpha > 0}`. The same function serves
//! three roles:
//!
//! * the classification loss in margin form, `loss(m) = kappa(-m)`
//!   (hinge `max(0, 1 - m)`, square `(1 - m)^2`, logistic `ln(1 + e^-m)`,
//!   exponential `e^-m`);
//! * the convex constraint surrogate `kappa`;
//! * the concave constraint surrogate `delta(alpha) = 1 - kappa(-alpha)`.
//!
//! With `a = eta / p` and `b = (1 - eta) / (1 - p)` the conditional surrogate
//! risk difference is `C(alpha) = a kappa(alpha) + b kappa(-alpha) - 1`. The
//! `h_*` functions are its extrema, and [`PsiTransform`] maps an excess of
//! the true risk difference over its minimum to the smallest possible excess
//! of the surrogate risk difference.

use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{self, golden_section, ScalarMin};

/// Half-width of the bracket used by the numeric extremum searches.
pub const NUMERIC_BRACKET: f64 = 30.0;
/// Bracket tolerance of the golden-section searches.
pub const NUMERIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SurrogateKind {
    Hinge,
    Square,
    Logistic,
    Exponential,
}

impl SurrogateKind {
    pub const ALL: [SurrogateKind; 4] = [
        SurrogateKind::Hinge,
        SurrogateKind::Square,
        SurrogateKind::Logistic,
        SurrogateKind::Exponential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SurrogateKind::Hinge => "hinge",
            SurrogateKind::Square => "square",
            SurrogateKind::Logistic => "logistic",
            SurrogateKind::Exponential => "exponential",
        }
    }
}

impl fmt::Display for SurrogateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SurrogateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hinge" => Ok(SurrogateKind::Hinge),
            "square" => Ok(SurrogateKind::Square),
            "logistic" => Ok(SurrogateKind::Logistic),
            "exponential" | "exp" => Ok(SurrogateKind::Exponential),
            _ => Err(Error::param("surrogate", "expected hinge, square, logistic or exponential")),
        }
    }
}

/// Which constraint surrogate is meant: the convex `kappa` bounding the risk
/// difference from above, or the concave `delta` bounding it from below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Convex,
    Concave,
}

/// A convex surrogate of the positive-prediction indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Surrogate {
    kind: SurrogateKind,
}

impl Surrogate {
    pub const fn new(kind: SurrogateKind) -> Self {
        Surrogate { kind }
    }

    pub const fn hinge() -> Self {
        Self::new(SurrogateKind::Hinge)
    }

    pub const fn square() -> Self {
        Self::new(SurrogateKind::Square)
    }

    pub const fn logistic() -> Self {
        Self::new(SurrogateKind::Logistic)
    }

    pub const fn exponential() -> Self {
        Self::new(SurrogateKind::Exponential)
    }

    pub fn kind(&self) -> SurrogateKind {
        self.kind
    }

    /// Convex form `kappa(alpha)`.
    pub fn kappa(&self, alpha: f64) -> f64 {
        match self.kind {
            SurrogateKind::Hinge => (alpha + 1.0).max(0.0),
            SurrogateKind::Square => (alpha + 1.0) * (alpha + 1.0),
            SurrogateKind::Logistic => math::softplus(alpha),
            SurrogateKind::Exponential => math::exp(alpha),
        }
    }

    /// Derivative of `kappa`; the right derivative at the hinge kink.
    pub fn kappa_derivative(&self, alpha: f64) -> f64 {
        match self.kind {
            SurrogateKind::Hinge => {
                if alpha >= -1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            SurrogateKind::Square => 2.0 * (alpha + 1.0),
            SurrogateKind::Logistic => math::sigmoid(alpha),
            SurrogateKind::Exponential => math::exp(alpha),
        }
    }

    /// Concave form `delta(alpha) = 1 - kappa(-alpha)`.
    pub fn delta(&self, alpha: f64) -> f64 {
        1.0 - self.kappa(-alpha)
    }

    /// Derivative of `delta`; the right derivative at the hinge kink.
    pub fn delta_derivative(&self, alpha: f64) -> f64 {
        match self.kind {
            SurrogateKind::Hinge => {
                if alpha < 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.kappa_derivative(-alpha),
        }
    }

    /// Classification loss of a margin `y * h(x)`.
    pub fn loss(&self, margin: f64) -> f64 {
        self.kappa(-margin)
    }

    /// Derivative of [`Surrogate::loss`]; the right derivative at the hinge kink.
    pub fn loss_derivative(&self, margin: f64) -> f64 {
        match self.kind {
            SurrogateKind::Hinge => {
                if margin < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            _ => -self.kappa_derivative(-margin),
        }
    }

    /// Surrogate value on the requested side.
    pub fn side_value(&self, side: Side, alpha: f64) -> f64 {
        match side {
            Side::Convex => self.kappa(alpha),
            Side::Concave => self.delta(alpha),
        }
    }

    pub fn side_derivative(&self, side: Side, alpha: f64) -> f64 {
        match side {
            Side::Convex => self.kappa_derivative(alpha),
            Side::Concave => self.delta_derivative(alpha),
        }
    }
}

impl fmt::Display for Surrogate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

/// Empirical phi-loss `(1/N) sum phi(y_i h_i)`.
pub fn phi_loss(scores: &[f64], labels: &[i8], phi: &Surrogate) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch { expected: scores.len(), found: labels.len() });
    }
    if scores.is_empty() {
        return Err(Error::TooFewRows { needed: 1, found: 0 });
    }
    let total: f64 = scores.iter().zip(labels).map(|(&h, &y)| phi.loss(f64::from(y) * h)).sum();
    Ok(total / scores.len() as f64)
}

/// Group weights `(eta / p, (1 - eta) / (1 - p))`.
#[inline]
pub fn group_weights(eta: f64, p: f64) -> (f64, f64) {
    (eta / p, (1.0 - eta) / (1.0 - p))
}

/// Conditional kappa-risk difference `C(alpha)`.
pub fn conditional_kappa_risk(s: &Surrogate, eta: f64, p: f64, alpha: f64) -> f64 {
    let (a, b) = group_weights(eta, p);
    a * s.kappa(alpha) + b * s.kappa(-alpha) - 1.0
}

/// Conditional delta-risk difference.
pub fn conditional_delta_risk(s: &Surrogate, eta: f64, p: f64, alpha: f64) -> f64 {
    let (a, b) = group_weights(eta, p);
    a * s.delta(alpha) + b * s.delta(-alpha) - 1.0
}

/// Minimal conditional kappa-risk difference over all `alpha`, in closed form.
pub fn h_minus(s: &Surrogate, eta: f64, p: f64) -> f64 {
    let (a, b) = group_weights(eta, p);
    min_pair_objective(s.kind, a, b) - 1.0
}

/// `min over alpha of a kappa(alpha) + b kappa(-alpha)`.
fn min_pair_objective(kind: SurrogateKind, a: f64, b: f64) -> f64 {
    match kind {
        SurrogateKind::Hinge => 2.0 * a.min(b),
        SurrogateKind::Square => {
            if a + b == 0.0 {
                0.0
            } else {
                4.0 * a * b / (a + b)
            }
        }
        SurrogateKind::Exponential => 2.0 * math::sqrt(a * b),
        // stationary point sigmoid(alpha) = b / (a + b)
        SurrogateKind::Logistic => -math::xlogx_over(a, a + b) - math::xlogx_over(b, a + b),
    }
}

/// [`h_minus`] by golden-section search on `[-30, 30]`.
pub fn h_minus_numeric(s: &Surrogate, eta: f64, p: f64) -> ScalarMin {
    golden_section(
        |alpha| conditional_kappa_risk(s, eta, p, alpha),
        -NUMERIC_BRACKET,
        NUMERIC_BRACKET,
        NUMERIC_TOL,
    )
}

/// Minimal conditional kappa-risk difference over `alpha (eta - p) >= 0`.
/// By convexity the minimum sits at `alpha = 0`.
pub fn h_circ(s: &Surrogate, eta: f64, p: f64) -> f64 {
    let (a, b) = group_weights(eta, p);
    (a + b) * s.kappa(0.0) - 1.0
}

/// [`h_circ`] by golden-section search over the admissible half-line.
pub fn h_circ_numeric(s: &Surrogate, eta: f64, p: f64) -> ScalarMin {
    let (lo, hi) = restricted_bracket(eta, p, true);
    golden_section(|alpha| conditional_kappa_risk(s, eta, p, alpha), lo, hi, NUMERIC_TOL)
}

/// Maximal conditional delta-risk difference over all `alpha`, in closed form.
pub fn h_plus_delta(s: &Surrogate, eta: f64, p: f64) -> f64 {
    let (a, b) = group_weights(eta, p);
    // a delta(x) + b delta(-x) = a + b - (a kappa(-x) + b kappa(x))
    a + b - min_pair_objective(s.kind, a, b) - 1.0
}

/// [`h_plus_delta`] by golden-section search on `[-30, 30]`.
pub fn h_plus_delta_numeric(s: &Surrogate, eta: f64, p: f64) -> ScalarMin {
    let m = golden_section(
        |alpha| -conditional_delta_risk(s, eta, p, alpha),
        -NUMERIC_BRACKET,
        NUMERIC_BRACKET,
        NUMERIC_TOL,
    );
    ScalarMin { value: -m.value, ..m }
}

/// Maximal conditional delta-risk difference over the half-line
/// `alpha (eta - p) <= 0`, where predictions disagree with the maximal
/// risk-difference classifier. By concavity the maximum sits at `alpha = 0`.
pub fn h_circ_delta(s: &Surrogate, eta: f64, p: f64) -> f64 {
    let (a, b) = group_weights(eta, p);
    (a + b) * s.delta(0.0) - 1.0
}

/// [`h_circ_delta`] by golden-section search over the admissible half-line.
pub fn h_circ_delta_numeric(s: &Surrogate, eta: f64, p: f64) -> ScalarMin {
    let (lo, hi) = restricted_bracket(eta, p, false);
    let m = golden_section(|alpha| -conditional_delta_risk(s, eta, p, alpha), lo, hi, NUMERIC_TOL);
    ScalarMin { value: -m.value, ..m }
}

/// Bracket for `alpha (eta - p) >= 0` (`agree = true`) or `<= 0`.
fn restricted_bracket(eta: f64, p: f64, agree: bool) -> (f64, f64) {
    let above = eta > p;
    if eta == p {
        (-NUMERIC_BRACKET, NUMERIC_BRACKET)
    } else if above == agree {
        (0.0, NUMERIC_BRACKET)
    } else {
        (-NUMERIC_BRACKET, 0.0)
    }
}

/// Pointwise calibration gap for `eta`: `H°κ - H⁻κ` on the convex side or
/// `H⁺δ - H°δ` on the concave side.
pub fn calibration_gap(s: &Surrogate, side: Side, eta: f64, p: f64) -> f64 {
    match side {
        Side::Convex => h_circ(s, eta, p) - h_minus(s, eta, p),
        Side::Concave => h_plus_delta(s, eta, p) - h_circ_delta(s, eta, p),
    }
}

/// [`calibration_gap`] with both extrema found numerically.
pub fn calibration_gap_numeric(s: &Surrogate, side: Side, eta: f64, p: f64) -> f64 {
    match side {
        Side::Convex => h_circ_numeric(s, eta, p).value - h_minus_numeric(s, eta, p).value,
        Side::Concave => h_plus_delta_numeric(s, eta, p).value - h_circ_delta_numeric(s, eta, p).value,
    }
}

/// Gap evaluated only at `eta = p + p (1 - p) mu`, i.e. on the side of the
/// group rate where `eta` exceeds `p`.
pub fn upper_side_gap_numeric(s: &Surrogate, side: Side, p: f64, mu: f64) -> f64 {
    calibration_gap_numeric(s, side, p + p * (1.0 - p) * mu, p)
}

/// Value of a calibration transform, with the clamping applied to `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValue {
    pub value: f64,
    /// `mu` was outside `(0, mu_max]` and was clamped.
    pub clamped: bool,
}

/// Inverse of a calibration transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiInverse {
    pub mu: f64,
    /// The target exceeded the transform's range; `mu` is `mu_max` and the
    /// resulting bound carries no information.
    pub saturated: bool,
    /// The target was negative (numerical noise) and was treated as zero.
    pub clamped_negative: bool,
}

/// Calibration transform `psi` of a surrogate for a group rate `p`.
///
/// For a risk-difference excess `mu` the transform returns the least
/// surrogate excess any subpopulation can show:
/// `psi(mu) = min over eta with |eta - p| = p (1 - p) mu of gap(eta)`.
/// For rates `p <= 1/2` the minimum is attained on the side `eta > p`;
/// otherwise on the mirror side. The domain is `(0, 1 / min(p, 1 - p)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiTransform {
    surrogate: Surrogate,
    p: f64,
    side: Side,
}

impl PsiTransform {
    /// Builds the transform and checks that it is invertible, i.e. that the
    /// calibration gap is positive for every `eta != p` on a grid.
    pub fn new(surrogate: Surrogate, p: f64, side: Side) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param("p", "group rate must lie in (0, 1)"));
        }
        let t = PsiTransform { surrogate, p, side };
        for i in 0..=100 {
            let eta = f64::from(i) / 100.0;
            if (eta - p).abs() < 1e-9 {
                continue;
            }
            if !(calibration_gap(&surrogate, side, eta, p) > 0.0) {
                return Err(Error::NonInvertible(surrogate.kind.name()));
            }
        }
        Ok(t)
    }

    pub fn surrogate(&self) -> Surrogate {
        self.surrogate
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Largest meaningful argument, `1 / min(p, 1 - p)`.
    pub fn mu_max(&self) -> f64 {
        1.0 / self.minority_rate()
    }

    fn minority_rate(&self) -> f64 {
        self.p.min(1.0 - self.p)
    }

    /// Whether [`PsiTransform::eval`] uses a closed-form expression.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.surrogate.kind, SurrogateKind::Logistic)
    }

    /// `psi(mu)` with `mu` clamped into `[0, mu_max]`.
    pub fn eval(&self, mu: f64) -> PsiValue {
        let clamped = !(mu > 0.0 && mu <= self.mu_max());
        let mu = mu.clamp(0.0, self.mu_max());
        PsiValue { value: self.eval_unclamped(mu), clamped }
    }

    fn eval_unclamped(&self, mu: f64) -> f64 {
        let q = self.minority_rate();
        match self.surrogate.kind {
            SurrogateKind::Hinge => mu,
            SurrogateKind::Square => mu * mu / (2.0 + (1.0 - 2.0 * q) * mu),
            SurrogateKind::Exponential => {
                let d = math::sqrt(1.0 + (1.0 - q) * mu) - math::sqrt((1.0 - q * mu).max(0.0));
                d * d
            }
            SurrogateKind::Logistic => self.eval_from_gaps(mu, |eta| calibration_gap(&self.surrogate, self.side, eta, self.p)),
        }
    }

    /// `psi(mu)` from numerically located extrema, minimised over both sides
    /// of `p`. Used to cross-check the closed forms.
    pub fn eval_numeric(&self, mu: f64) -> f64 {
        let mu = mu.clamp(0.0, self.mu_max());
        self.eval_from_gaps(mu, |eta| calibration_gap_numeric(&self.surrogate, self.side, eta, self.p))
    }

    fn eval_from_gaps<F: Fn(f64) -> f64>(&self, mu: f64, gap: F) -> f64 {
        let shift = self.p * (1.0 - self.p) * mu;
        let mut best = f64::INFINITY;
        for eta in [self.p + shift, self.p - shift] {
            // both ends are admissible up to rounding
            if (-1e-12..=1.0 + 1e-12).contains(&eta) {
                best = best.min(gap(eta.clamp(0.0, 1.0)));
            }
        }
        best
    }

    /// `psi^-1(target)`, saturating at `mu_max`.
    pub fn inverse(&self, target: f64) -> PsiInverse {
        if !(target > 0.0) {
            return PsiInverse { mu: 0.0, saturated: false, clamped_negative: target < 0.0 };
        }
        let mu_max = self.mu_max();
        if target >= self.eval_unclamped(mu_max) {
            return PsiInverse { mu: mu_max, saturated: true, clamped_negative: false };
        }
        let mu = match self.surrogate.kind {
            SurrogateKind::Hinge => target,
            SurrogateKind::Square => {
                let c = 1.0 - 2.0 * self.minority_rate();
                let tc = target * c;
                0.5 * (tc + math::sqrt(tc * tc + 8.0 * target))
            }
            _ => math::bisect_increasing(|mu| self.eval_unclamped(mu) - target, 0.0, mu_max, 1e-15),
        };
        PsiInverse { mu, saturated: false, clamped_negative: false }
    }
}
