//! Fixed-point units for funds and energy.
//!
//! Funds are held in integer minor units (1 currency = 100 000 minor) and
//! energy in centi-kWh, so that `energy x price` lands exactly on the minor
//! grid and escrow conservation can be checked with `==`.

use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Minor units per whole currency unit.
pub const MINOR_PER_UNIT: i64 = 100_000;

/// Centi-kWh per kWh.
pub const CKWH_PER_KWH: i64 = 100;

/// Milli-currency per currency, the grid prices are quoted on (per kWh).
pub const MILLI_PER_UNIT: i64 = 1_000;

/// An amount of funds in minor units.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize, Hash,
)]
#[serde(transparent)]
pub struct Money(pub i64);

impl Money {
    pub const ZERO: Money = Money(0);

    pub fn from_units(units: f64) -> Money {
        Money(libm::round(units * MINOR_PER_UNIT as f64) as i64)
    }

    pub fn minor(self) -> i64 {
        self.0
    }

    /// Value in whole currency units, for reporting only.
    pub fn units(self) -> f64 {
        self.0 as f64 / MINOR_PER_UNIT as f64
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Scale by a dimensionless factor, rounding to the nearest minor unit.
    /// Exact whenever `factor` is 1.0.
    pub fn scale(self, factor: f64) -> Money {
        Money(libm::round(self.0 as f64 * factor) as i64)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        Money(self.0 - rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Money {
    fn sub_assign(&mut self, rhs: Money) {
        self.0 -= rhs.0;
    }
}

impl Neg for Money {
    type Output = Money;
    fn neg(self) -> Money {
        Money(-self.0)
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        Money(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(
            f,
            "{sign}{}.{:05}",
            abs / MINOR_PER_UNIT as u64,
            abs % MINOR_PER_UNIT as u64
        )
    }
}

/// Energy in centi-kWh.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize, Hash,
)]
#[serde(transparent)]
pub struct Energy(pub i64);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub fn from_kwh(kwh: f64) -> Energy {
        Energy(libm::round(kwh * CKWH_PER_KWH as f64) as i64)
    }

    pub fn ckwh(self) -> i64 {
        self.0
    }

    pub fn kwh(self) -> f64 {
        self.0 as f64 / CKWH_PER_KWH as f64
    }

    pub fn min(self, other: Energy) -> Energy {
        Energy(self.0.min(other.0))
    }

    pub fn saturating_sub(self, other: Energy) -> Energy {
        Energy((self.0 - other.0).max(0))
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl Sub for Energy {
    type Output = Energy;
    fn sub(self, rhs: Energy) -> Energy {
        Energy(self.0 - rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        Energy(iter.map(|e| e.0).sum())
    }
}

/// A unit price in milli-currency per kWh.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize, Hash,
)]
#[serde(transparent)]
pub struct Price(pub i64);

impl Price {
    pub fn from_units_per_kwh(p: f64) -> Price {
        Price(libm::round(p * MILLI_PER_UNIT as f64) as i64)
    }

    pub fn milli(self) -> i64 {
        self.0
    }

    pub fn units_per_kwh(self) -> f64 {
        self.0 as f64 / MILLI_PER_UNIT as f64
    }
}

// centi-kWh x milli/kWh = 10^-5 currency = one minor unit, exactly.
impl Mul<Price> for Energy {
    type Output = Money;
    fn mul(self, rhs: Price) -> Money {
        Money(self.0 * rhs.0)
    }
}
