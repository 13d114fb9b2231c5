//! Campaign economics: realized profit of a contact campaign and the profit of
//! contacting only the persuadable customers.
//!
//! Amounts are plain reals in the caller's currency.

use serde::{Deserialize, Serialize};

use crate::model::{CounterfactualQuantity, Interval};
use crate::scalar::Real;
use crate::{Error, Result};

/// Inputs of the profit analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitInputs<T> {
    pub n_contacted: u64,
    /// Campaign uplift `s0 - s1`.
    pub uplift: T,
    pub customer_value: T,
    pub contact_cost: T,
    pub population_size: u64,
    pub beta_interval: Interval<T>,
    pub beta_point: T,
}

impl<T: Real> ProfitInputs<T> {
    pub fn validate(&self) -> Result<()> {
        if self.customer_value.is_nan() || self.customer_value < T::zero() {
            return Err(Error::Domain {
                what: "customer value",
                value: self.customer_value.as_f64(),
            });
        }
        if self.contact_cost.is_nan() || self.contact_cost < T::zero() {
            return Err(Error::Domain {
                what: "contact cost",
                value: self.contact_cost.as_f64(),
            });
        }
        if self.uplift.is_nan() || self.uplift.abs() > T::one() {
            return Err(Error::Domain {
                what: "uplift",
                value: self.uplift.as_f64(),
            });
        }
        if self.beta_interval.quantity != CounterfactualQuantity::Beta {
            return Err(Error::InvalidParameter(format!(
                "expected an interval on beta, got {}",
                self.beta_interval.quantity
            )));
        }
        Ok(())
    }
}

/// `n * uplift * value - n * cost`.
pub fn realized_profit<T: Real>(n: u64, uplift: T, value: T, cost: T) -> T {
    let n = T::from_u64(n).expect("count fits");
    n * uplift * value - n * cost
}

/// Nearest integer with ties to even; negative inputs give zero.
fn round_count<T: Real>(x: T) -> u64 {
    let x = x.as_f64();
    if x.is_nan() || x <= 0.0 {
        return 0;
    }
    let r = x.round_ties_even();
    r as u64
}

/// Persuadable head counts at the point estimate and at both bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersuadableCounts {
    pub point: u64,
    pub lower: u64,
    pub upper: u64,
}

pub fn persuadable_counts<T: Real>(
    population: u64,
    beta_point: T,
    beta_interval: &Interval<T>,
) -> PersuadableCounts {
    let n = T::from_u64(population).expect("count fits");
    PersuadableCounts {
        point: round_count(n * beta_point),
        lower: round_count(n * beta_interval.lower),
        upper: round_count(n * beta_interval.upper),
    }
}

/// Profit of contacting exactly `persuadables` customers, each of whom converts:
/// `persuadables * (value - cost)`.
pub fn persuadable_profit<T: Real>(persuadables: u64, value: T, cost: T) -> T {
    T::from_u64(persuadables).expect("count fits") * (value - cost)
}

/// Persuadable-only profit at both endpoints of the beta interval.
pub fn profit_range<T: Real>(
    population: u64,
    beta_interval: &Interval<T>,
    value: T,
    cost: T,
) -> (T, T) {
    let counts = persuadable_counts(population, beta_interval.lower, beta_interval);
    (
        persuadable_profit(counts.lower, value, cost),
        persuadable_profit(counts.upper, value, cost),
    )
}

/// Amount rounded to cents, for reporting.
pub fn round_cents(x: f64) -> f64 {
    let c = (x * 100.0).round() / 100.0;
    if c == 0.0 {
        0.0
    } else {
        c
    }
}

/// All profit figures derived from one set of inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitReport<T> {
    pub inputs: ProfitInputs<T>,
    pub realized: T,
    pub persuadables: PersuadableCounts,
    /// Profit of contacting only the estimated persuadables.
    pub persuadable_only: T,
    pub range: (T, T),
}

impl<T: Real> ProfitReport<T> {
    pub fn new(inputs: ProfitInputs<T>) -> Result<Self> {
        inputs.validate()?;
        let counts = persuadable_counts(
            inputs.population_size,
            inputs.beta_point,
            &inputs.beta_interval,
        );
        Ok(ProfitReport {
            realized: realized_profit(
                inputs.n_contacted,
                inputs.uplift,
                inputs.customer_value,
                inputs.contact_cost,
            ),
            persuadables: counts,
            persuadable_only: persuadable_profit(
                counts.point,
                inputs.customer_value,
                inputs.contact_cost,
            ),
            range: profit_range(
                inputs.population_size,
                &inputs.beta_interval,
                inputs.customer_value,
                inputs.contact_cost,
            ),
            inputs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use CounterfactualQuantity::Beta;

    fn beta(lo: f64, hi: f64) -> Interval<f64> {
        Interval::new(Beta, lo, hi).unwrap()
    }

    #[test]
    fn realized_examples() {
        assert_eq!(realized_profit(0, 0.3, 120.0, 1.0), 0.0);
        let p: f64 = realized_profit(7500, 0.0082, 120.0, 1.0);
        assert!((p + 120.0).abs() < 1e-9);
        assert_eq!(round_cents(p), -120.0);
        assert_eq!(realized_profit(483, 1.0, 120.0, 1.0), 57477.0);
        assert_eq!(realized_profit(10, 0.0, 120.0, 2.5), -25.0);
    }

    #[test]
    fn count_examples() {
        let c = persuadable_counts(11268, 0.0429, &beta(0.0052, 0.0449));
        assert_eq!((c.point, c.lower, c.upper), (483, 59, 506));
        let c = persuadable_counts(0, 0.3, &beta(0.1, 0.9));
        assert_eq!((c.point, c.lower, c.upper), (0, 0, 0));
        let c = persuadable_counts(1000, 0.5, &beta(0.25, 0.75));
        assert_eq!((c.point, c.lower, c.upper), (500, 250, 750));
    }

    #[test]
    fn ties_round_to_even() {
        assert_eq!(round_count(2.5), 2);
        assert_eq!(round_count(3.5), 4);
        assert_eq!(round_count(3.4999), 3);
    }

    #[test]
    fn range_examples() {
        assert_eq!(
            profit_range(11268, &beta(0.0052, 0.0449), 120.0, 1.0),
            (7021.0, 60214.0)
        );
        assert_eq!(profit_range(11268, &beta(0.0, 0.0), 120.0, 1.0), (0.0, 0.0));
        assert_eq!(profit_range(11268, &beta(0.01, 0.2), 5.0, 5.0), (0.0, 0.0));
    }

    #[test]
    fn report_and_validation() {
        let inputs = ProfitInputs {
            n_contacted: 7500,
            uplift: 0.0082,
            customer_value: 120.0,
            contact_cost: 1.0,
            population_size: 11268,
            beta_interval: beta(0.0052, 0.0449),
            beta_point: 0.0429,
        };
        let r = ProfitReport::new(inputs).unwrap();
        assert_eq!(r.persuadable_only, 57477.0);
        assert_eq!(r.range, (7021.0, 60214.0));
        let mut bad = inputs;
        bad.contact_cost = -1.0;
        assert!(ProfitReport::new(bad).is_err());
        let mut bad = inputs;
        bad.uplift = 1.5;
        assert!(ProfitReport::new(bad).is_err());
    }
}
