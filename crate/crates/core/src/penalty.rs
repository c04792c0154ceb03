//! Extended-real costs and the forward/backward edge penalties.
//!
//! An infinite penalty is carried symbolically: an [`ExtReal`] is a pair
//! `(units, finite)` standing for `units · ∞ + finite`. Totals built from
//! non-negative terms are infinite exactly when `units > 0`, which gives the
//! saturating behaviour (`∞ + x = ∞`, `∞ >` every finite value), while the
//! unit count keeps differences such as "this move removes one infinitely
//! penalized edge" well defined.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::Error;

/// Lexicographically ordered `units · ∞ + finite`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtReal {
    units: i64,
    finite: f64,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal {
        units: 0,
        finite: 0.0,
    };
    pub const INFINITY: ExtReal = ExtReal {
        units: 1,
        finite: 0.0,
    };

    pub fn finite(value: f64) -> Self {
        debug_assert!(value.is_finite(), "finite part must be finite: {value}");
        ExtReal {
            units: 0,
            finite: value,
        }
    }

    pub fn new(units: i64, finite: f64) -> Self {
        ExtReal { units, finite }
    }

    /// Number of infinite units (negative for `-∞` deltas).
    pub fn infinite_units(self) -> i64 {
        self.units
    }

    pub fn finite_part(self) -> f64 {
        self.finite
    }

    pub fn is_finite(self) -> bool {
        self.units == 0
    }

    /// Collapses to an `f64`, mapping any non-zero unit count to `±∞`.
    pub fn to_f64(self) -> f64 {
        match self.units.cmp(&0) {
            Ordering::Greater => f64::INFINITY,
            Ordering::Less => f64::NEG_INFINITY,
            Ordering::Equal => self.finite,
        }
    }

    /// Equality with a relative tolerance on the finite part:
    /// `|a - b| <= tol · max(1, |a|, |b|)`; unit counts must match exactly.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        self.units == other.units && rel_close(self.finite, other.finite, tol)
    }
}

/// `|a - b| <= tol · max(1, |a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.units
            .cmp(&other.units)
            .then_with(|| self.finite.total_cmp(&other.finite))
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal {
            units: self.units + rhs.units,
            finite: self.finite + rhs.finite,
        }
    }
}

impl Sub for ExtReal {
    type Output = ExtReal;
    fn sub(self, rhs: ExtReal) -> ExtReal {
        ExtReal {
            units: self.units - rhs.units,
            finite: self.finite - rhs.finite,
        }
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        ExtReal {
            units: -self.units,
            finite: -self.finite,
        }
    }
}

impl AddAssign for ExtReal {
    fn add_assign(&mut self, rhs: ExtReal) {
        *self = *self + rhs;
    }
}

impl SubAssign for ExtReal {
    fn sub_assign(&mut self, rhs: ExtReal) {
        *self = *self - rhs;
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: f64) -> ExtReal {
        self + ExtReal::finite(rhs)
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = ExtReal>>(iter: I) -> ExtReal {
        iter.fold(ExtReal::ZERO, Add::add)
    }
}

impl From<f64> for ExtReal {
    fn from(value: f64) -> Self {
        ExtReal::finite(value)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.units.cmp(&0) {
            Ordering::Greater => f.write_str("inf"),
            Ordering::Less => f.write_str("-inf"),
            Ordering::Equal => write!(f, "{}", self.finite),
        }
    }
}

/// Weight charged per cross edge of one direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Penalty {
    Finite(f64),
    Infinite,
}

impl Penalty {
    pub fn new(value: f64) -> Result<Self, Error> {
        if value.is_nan() || value < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "penalty must be non-negative, got {value}"
            )));
        }
        Ok(if value.is_infinite() {
            Penalty::Infinite
        } else {
            Penalty::Finite(value)
        })
    }

    /// Penalty for `count` edges (`count` may be negative for deltas).
    /// Zero edges cost zero even when the weight is infinite.
    pub fn times(self, count: i64) -> ExtReal {
        match self {
            Penalty::Finite(w) => ExtReal::finite(w * count as f64),
            Penalty::Infinite => ExtReal::new(count, 0.0),
        }
    }

    /// The penalty of a single edge.
    pub fn unit(self) -> ExtReal {
        self.times(1)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Penalty::Infinite)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Penalty::Finite(w) => w,
            Penalty::Infinite => f64::INFINITY,
        }
    }
}

impl FromStr for Penalty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" => Ok(Penalty::Infinite),
            _ => {
                let value: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("invalid penalty '{s}'")))?;
                Penalty::new(value)
            }
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Finite(w) => write!(f, "{w}"),
            Penalty::Infinite => f.write_str("inf"),
        }
    }
}

/// The `(λ_f, λ_b)` weight pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penalties {
    pub forward: Penalty,
    pub backward: Penalty,
}

impl Penalties {
    pub fn new(forward: Penalty, backward: Penalty) -> Self {
        Penalties { forward, backward }
    }

    /// Finite weights; panics on negative or NaN input.
    pub fn finite(forward: f64, backward: f64) -> Self {
        Penalties {
            forward: Penalty::new(forward).expect("invalid forward penalty"),
            backward: Penalty::new(backward).expect("invalid backward penalty"),
        }
    }

    pub fn zero() -> Self {
        Penalties::finite(0.0, 0.0)
    }

    /// `λ_f · forward + λ_b · backward`.
    pub fn edge_cost(&self, forward: i64, backward: i64) -> ExtReal {
        self.forward.times(forward) + self.backward.times(backward)
    }
}
