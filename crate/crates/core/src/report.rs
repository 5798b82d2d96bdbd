//! Numeric comparisons recorded in pipeline certificates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::scalar::{ser_rational, Rational};

/// `lhs <= rhs` for an exact left side and an enclosed right side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: Rational,
    pub rhs: Interval,
    /// Not refuted: `lhs <= rhs.hi`.
    pub holds: bool,
    /// Decided without the enclosure width: `lhs <= rhs.lo` or `lhs > rhs.hi`.
    pub certain: bool,
    pub hypotheses_met: bool,
    /// A failing asserted check is an error; others are reported only.
    pub asserted: bool,
}

impl BoundCheck {
    pub fn new(name: impl Into<String>, lhs: Rational, rhs: Interval, hypotheses_met: bool, asserted: bool) -> Self {
        let holds = lhs <= rhs.hi;
        let certain = lhs <= rhs.lo || !holds;
        BoundCheck { name: name.into(), lhs, rhs, holds, certain, hypotheses_met, asserted }
    }

    pub fn enforce(self) -> Result<Self> {
        if self.asserted && !self.holds {
            return Err(Error::assertion(format!("{}: {} > {}", self.name, self.lhs, self.rhs)));
        }
        Ok(self)
    }
}
