//! Analytic losses whose derivative has an everywhere-convergent power series.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use libm::{erf, erfc};

use crate::error::{Error, Result};
use crate::series::{arith, CoefficientStream};

/// How the prediction `a = <w, Psi(x)>` and the label enter the loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFamily {
    /// `l(y a)`
    Classification,
    /// `l(a - y)`
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum LossKind {
    /// `l(a) = a^2`, regression.
    Squared,
    /// `l(a) = e^a`, classification.
    Exponential,
    /// Antiderivative of `Erf(s a)` with `l(0) = 0`, regression.
    SmoothedAbsolute { s: f64 },
    /// Antiderivative of `(Erf(s (a - 1)) - 1) / 2` vanishing at `+inf`, classification.
    SmoothedHinge { s: f64 },
}

/// Config-file form: `{"name": ..., "s": ..., "family": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    #[serde(flatten)]
    pub kind: LossKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<LossFamily>,
}

#[derive(Debug, Clone)]
pub struct AnalyticLoss {
    kind: LossKind,
    deriv_series: CoefficientStream,
}

impl LossKind {
    pub fn family(&self) -> LossFamily {
        match self {
            LossKind::Squared | LossKind::SmoothedAbsolute { .. } => LossFamily::Regression,
            LossKind::Exponential | LossKind::SmoothedHinge { .. } => LossFamily::Classification,
        }
    }
}

fn check_smoothing(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("smoothing parameter must be positive, got {s}")))
    }
}

impl AnalyticLoss {
    pub fn new(kind: LossKind) -> Result<Self> {
        let deriv_series = match kind {
            LossKind::Squared => CoefficientStream::polynomial("2a", vec![0.0, 2.0]),
            LossKind::Exponential => CoefficientStream::exp_linear(1.0),
            LossKind::SmoothedAbsolute { s } => {
                check_smoothing(s)?;
                arith::erf_scaled(s)
            }
            LossKind::SmoothedHinge { s } => {
                check_smoothing(s)?;
                // Erf(s (a - 1)) = Erf(-s) + (2 s / sqrt(pi)) * int_0^a exp(-s^2 (t - 1)^2) dt
                let bump = CoefficientStream::gaussian_bump(s, 1.0);
                let shifted_erf = arith::integrate(&arith::scale(&bump, 2.0 * s / PI.sqrt()), -erf(s));
                let minus_one = CoefficientStream::polynomial("-1", vec![-1.0]);
                arith::scale(&arith::add(&shifted_erf, &minus_one), 0.5)
            }
        };
        Ok(Self { kind, deriv_series })
    }

    pub fn squared() -> Self {
        Self::new(LossKind::Squared).expect("no parameters")
    }

    pub fn exponential() -> Self {
        Self::new(LossKind::Exponential).expect("no parameters")
    }

    pub fn smoothed_absolute(s: f64) -> Result<Self> {
        Self::new(LossKind::SmoothedAbsolute { s })
    }

    pub fn smoothed_hinge(s: f64) -> Result<Self> {
        Self::new(LossKind::SmoothedHinge { s })
    }

    pub fn kind(&self) -> LossKind {
        self.kind
    }

    pub fn family(&self) -> LossFamily {
        self.kind.family()
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LossKind::Squared => "squared",
            LossKind::Exponential => "exponential",
            LossKind::SmoothedAbsolute { .. } => "smoothed_absolute",
            LossKind::SmoothedHinge { .. } => "smoothed_hinge",
        }
    }

    /// `l(a)`.
    pub fn value(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => a * a,
            LossKind::Exponential => a.exp(),
            LossKind::SmoothedAbsolute { s } => {
                let c = 1.0 / (s * PI.sqrt());
                a * erf(s * a) + c * ((-s * s * a * a).exp() - 1.0)
            }
            LossKind::SmoothedHinge { s } => {
                let b = a - 1.0;
                let c = 1.0 / (s * PI.sqrt());
                0.5 * (-b * erfc(s * b) + c * (-s * s * b * b).exp())
            }
        }
    }

    /// `l'(a)`.
    pub fn deriv(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0 * a,
            LossKind::Exponential => a.exp(),
            LossKind::SmoothedAbsolute { s } => erf(s * a),
            LossKind::SmoothedHinge { s } => -0.5 * erfc(s * (a - 1.0)),
        }
    }

    /// Coefficients `gamma_n` of `l'(a) = sum_n gamma_n a^n`.
    pub fn deriv_series(&self) -> &CoefficientStream {
        &self.deriv_series
    }

    /// `l'_+(a) = sum_n |gamma_n| a^n` for `a >= 0`.
    pub fn deriv_plus(&self, a: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0 * a,
            LossKind::Exponential => a.exp(),
            _ => self.deriv_series.eval_abs(a),
        }
    }

    /// Closed-form upper bound on `l'_+(sqrt((p - 1) u))`; exact for the
    /// squared and exponential losses.
    ///
    /// With `x = sqrt((p - 1) u)` and `z = s x`:
    /// - smoothed absolute: `2 (e^(z^2) - 1) / (z sqrt(pi))`, from
    ///   `int_0^z e^(t^2) dt <= (e^(z^2) - 1) / z`;
    /// - smoothed hinge: `1 + e^(-2 s^2) (e^(s^2 (x+1)^2) - 1) / (s (x+1) sqrt(pi))`,
    ///   from the majorant `e^(-s^2) e^(2 s^2 t) e^(s^2 t^2)` of the shifted
    ///   Gaussian's coefficients.
    ///
    /// The smoothed-absolute form is twice the commonly quoted
    /// `1/2 + (e^(z^2) - 1) / (z sqrt(pi))`, which `l'_+` exceeds once `z >= 1`
    /// (e.g. `l'_+(1) = 1.6504...` against `1.4694...` at `s = 1`).
    pub fn deriv_plus_bound(&self, p: f64, u: f64) -> Result<f64> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::invalid(format!("p must exceed 1, got {p}")));
        }
        if !(u > 0.0 && u.is_finite()) {
            return Err(Error::invalid(format!("u must be positive, got {u}")));
        }
        let x = ((p - 1.0) * u).sqrt();
        Ok(match self.kind {
            LossKind::Squared => 2.0 * x,
            LossKind::Exponential => x.exp(),
            LossKind::SmoothedAbsolute { s } => {
                let z = s * x;
                2.0 * (z * z).exp_m1() / (z * PI.sqrt())
            }
            LossKind::SmoothedHinge { s } => {
                let r = x + 1.0;
                1.0 + (-2.0 * s * s).exp() * (s * s * r * r).exp_m1() / (s * r * PI.sqrt())
            }
        })
    }

    /// Argument fed to `l`: `y a` for classification, `a - y` for regression.
    pub fn argument(&self, prediction: f64, y: f64) -> f64 {
        match self.family() {
            LossFamily::Classification => y * prediction,
            LossFamily::Regression => prediction - y,
        }
    }

    /// Loss of a prediction against a label.
    pub fn loss(&self, prediction: f64, y: f64) -> f64 {
        self.value(self.argument(prediction, y))
    }

    /// Derivative of [`loss`](Self::loss) with respect to the prediction.
    pub fn loss_slope(&self, prediction: f64, y: f64) -> f64 {
        let d = self.deriv(self.argument(prediction, y));
        match self.family() {
            LossFamily::Classification => y * d,
            LossFamily::Regression => d,
        }
    }
}

impl TryFrom<LossSpec> for AnalyticLoss {
    type Error = Error;

    fn try_from(spec: LossSpec) -> Result<Self> {
        if let Some(family) = spec.family {
            if family != spec.kind.family() {
                return Err(Error::config(
                    "loss.family",
                    format!("{:?} loss is a {:?} loss", spec.kind, spec.kind.family()),
                ));
            }
        }
        AnalyticLoss::new(spec.kind)
    }
}

impl From<&AnalyticLoss> for LossSpec {
    fn from(loss: &AnalyticLoss) -> Self {
        LossSpec {
            kind: loss.kind,
            family: Some(loss.family()),
        }
    }
}

/// Squared, exponential, smoothed absolute and smoothed hinge losses, the
/// smoothed ones with parameter `s`.
pub fn loss_catalogue(s: f64) -> Result<Vec<AnalyticLoss>> {
    Ok(vec![
        AnalyticLoss::squared(),
        AnalyticLoss::exponential(),
        AnalyticLoss::smoothed_absolute(s)?,
        AnalyticLoss::smoothed_hinge(s)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;

    #[test]
    fn squared_and_exponential_bounds_are_exact() {
        let sq = AnalyticLoss::squared();
        // (p - 1) u = 4
        assert_eq!(sq.deriv_plus_bound(2.0, 4.0).unwrap(), 4.0);
        let ex = AnalyticLoss::exponential();
        assert!((ex.deriv_plus_bound(3.0, 0.5).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let x = (1.5f64 * 2.0).sqrt();
        assert!(rel_diff(sq.deriv_plus(x), 2.0 * x, 1.0) < 1e-15);
    }

    #[test]
    fn smoothed_hinge_at_margin() {
        let h = AnalyticLoss::smoothed_hinge(1.0).unwrap();
        assert_eq!(h.deriv(1.0), -0.5);
        let h2 = AnalyticLoss::smoothed_hinge(2.0).unwrap();
        let d = h2.deriv(10.0);
        assert!(d > -1e-8 && d <= 0.0);
        let h4 = AnalyticLoss::smoothed_hinge(4.0).unwrap();
        assert!((h4.value(0.0) - 1.0).abs() < 0.05);
    }

    #[test]
    fn smoothed_absolute_shape() {
        let l = AnalyticLoss::smoothed_absolute(1.0).unwrap();
        assert_eq!(l.deriv(0.0), 0.0);
        assert_eq!(l.value(0.0), 0.0);
        // Erf(1) to 16 digits.
        let err = (l.deriv(1.0) - 0.842_700_792_949_714_9).abs();
        assert!(err < 1e-15, "erf(1) off by {err:e}");
        let v = l.value(5.0);
        assert!(v >= 5.0 - 1.0 / PI.sqrt() - 1e-6 && v <= 5.0);
    }

    #[test]
    fn smoothed_absolute_bound_value_and_dominance() {
        let l = AnalyticLoss::smoothed_absolute(1.0).unwrap();
        let bound = l.deriv_plus_bound(2.0, 1.0).unwrap();
        assert!((bound - 2.0 * (std::f64::consts::E - 1.0) / PI.sqrt()).abs() < 1e-14);
        // erfi(1) = 1.650425758797542876...
        let plus = l.deriv_plus(1.0);
        assert!((plus - 1.650_425_758_797_542_9).abs() < 1e-13);
        assert!(plus <= bound);
        let quoted = 0.5 + (std::f64::consts::E - 1.0) / PI.sqrt();
        assert!(plus > quoted);
    }

    #[test]
    fn classification_and_regression_arguments() {
        let sq = AnalyticLoss::squared();
        assert_eq!(sq.argument(3.0, 1.0), 2.0);
        assert_eq!(sq.loss_slope(3.0, 1.0), 4.0);
        let ex = AnalyticLoss::exponential();
        assert_eq!(ex.argument(3.0, -1.0), -3.0);
        assert!((ex.loss_slope(0.0, -1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_smoothing_rejected() {
        assert!(AnalyticLoss::smoothed_absolute(0.0).is_err());
        assert!(AnalyticLoss::smoothed_hinge(-1.0).is_err());
        assert!(loss_catalogue(f64::NAN).is_err());
    }

    #[test]
    fn invalid_bound_parameters_rejected() {
        let sq = AnalyticLoss::squared();
        assert!(sq.deriv_plus_bound(1.0, 1.0).is_err());
        assert!(sq.deriv_plus_bound(2.0, 0.0).is_err());
    }

    #[test]
    fn spec_family_must_match() {
        let spec: LossSpec = serde_json::from_str(r#"{"name":"squared","family":"classification"}"#).unwrap();
        assert!(AnalyticLoss::try_from(spec).is_err());
        let spec: LossSpec = serde_json::from_str(r#"{"name":"smoothed_hinge","s":2.0}"#).unwrap();
        let l = AnalyticLoss::try_from(spec).unwrap();
        assert_eq!(l.family(), LossFamily::Classification);
    }
}
