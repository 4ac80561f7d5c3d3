//! The concrete dynamical model under verification.

use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::Expr;
use crate::interval::{DomainError, Interval, IntervalBox};

/// `ẋ = f(x) + d` with `‖d‖ ≤ δ`, confined to a box domain, together
/// with the safety query (initial box, bad box, time horizon).
#[derive(Debug, Clone)]
pub struct DynamicalModel {
    pub name: String,
    pub variables: Vec<String>,
    pub flow: Vec<Expr>,
    pub delta: f64,
    pub domain: IntervalBox,
    pub init: IntervalBox,
    pub bad: IntervalBox,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("model has {flows} flow components but {vars} variables")]
    DimensionMismatch { flows: usize, vars: usize },
    #[error("{field} must have dimension {expected}, got {got}")]
    BadRegionDim {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("initial set leaves the domain on axis {axis}")]
    InitOutsideDomain { axis: usize },
    #[error("time horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("disturbance radius must be non-negative, got {0}")]
    NegativeDelta(f64),
    #[error("flow component {component} undefined over the domain: {source}")]
    FlowUndefined {
        component: usize,
        source: DomainError,
    },
    #[error("flow component {component} references variable index {index} >= dimension {dim}")]
    VarOutOfRange {
        component: usize,
        index: usize,
        dim: usize,
    },
}

/// Non-fatal validation findings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelWarning {
    /// The bad set does not meet the domain, so the safety query is
    /// vacuously satisfied.
    VacuousBadSet,
}

impl DynamicalModel {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    /// Evaluate the vector field at a point.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, DomainError> {
        self.flow.iter().map(|e| e.eval_point(x)).collect()
    }

    /// Sound enclosure of the vector field over a box.
    pub fn eval_interval(&self, b: &IntervalBox) -> Result<Vec<Interval>, DomainError> {
        self.flow.iter().map(|e| e.eval_interval(b.axes())).collect()
    }

    /// Structural and domain validation. `f` must evaluate soundly over
    /// the whole domain; points where partial functions are undefined
    /// are rejected here rather than silently resampled later.
    pub fn validate(&self) -> Result<Vec<ModelWarning>, ModelError> {
        let n = self.dim();
        if self.flow.len() != n {
            return Err(ModelError::DimensionMismatch {
                flows: self.flow.len(),
                vars: n,
            });
        }
        for (field, b) in [
            ("domain", &self.domain),
            ("init", &self.init),
            ("bad", &self.bad),
        ] {
            if b.dim() != n {
                return Err(ModelError::BadRegionDim {
                    field,
                    expected: n,
                    got: b.dim(),
                });
            }
        }
        if self.horizon <= 0.0 {
            return Err(ModelError::NonPositiveHorizon(self.horizon));
        }
        if self.delta < 0.0 {
            return Err(ModelError::NegativeDelta(self.delta));
        }
        for axis in 0..n {
            let d = self.domain.axis(axis);
            let i = self.init.axis(axis);
            if i.lo < d.lo || i.hi > d.hi {
                return Err(ModelError::InitOutsideDomain { axis });
            }
        }
        for (component, e) in self.flow.iter().enumerate() {
            if let Some(index) = e.max_var() {
                if index >= n {
                    return Err(ModelError::VarOutOfRange {
                        component,
                        index,
                        dim: n,
                    });
                }
            }
            // Interval evaluation over the full domain both proves the
            // flow is defined everywhere and exercises every partial
            // function's guard.
            e.eval_interval(self.domain.axes())
                .map_err(|source| ModelError::FlowUndefined { component, source })?;
        }
        let mut warnings = Vec::new();
        if !self.domain.intersects(&self.bad) {
            warnings.push(ModelWarning::VacuousBadSet);
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use alloc::vec;

    fn water_tank() -> DynamicalModel {
        DynamicalModel {
            name: "water".into(),
            variables: vec!["x".into()],
            flow: vec![parse("1.5 - sqrt(x)", &["x"]).unwrap()],
            delta: 0.0,
            domain: IntervalBox::from_bounds(&[(0.0, 3.0)]),
            init: IntervalBox::from_bounds(&[(0.0, 0.01)]),
            bad: IntervalBox::from_bounds(&[(2.0, 3.0)]),
            horizon: 2.0,
        }
    }

    #[test]
    fn water_tank_validates() {
        assert_eq!(water_tank().validate().unwrap(), vec![]);
    }

    #[test]
    fn init_outside_domain_rejected() {
        let mut m = water_tank();
        m.init = IntervalBox::from_bounds(&[(2.0, 3.5)]);
        assert_eq!(m.validate(), Err(ModelError::InitOutsideDomain { axis: 0 }));
    }

    #[test]
    fn undefined_flow_rejected() {
        let mut m = water_tank();
        m.domain = IntervalBox::from_bounds(&[(-1.0, 1.0)]);
        m.init = IntervalBox::from_bounds(&[(0.0, 0.01)]);
        assert!(matches!(
            m.validate(),
            Err(ModelError::FlowUndefined { component: 0, .. })
        ));
    }

    #[test]
    fn vacuous_bad_set_warns() {
        let mut m = water_tank();
        m.bad = IntervalBox::from_bounds(&[(5.0, 6.0)]);
        assert_eq!(m.validate().unwrap(), vec![ModelWarning::VacuousBadSet]);
    }
}
