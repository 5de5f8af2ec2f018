//! Pearson and Spearman correlation with explicit handling of zero variance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorrelationError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
}

/// A coefficient, or `Undefined` when either side has zero variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correlation {
    Value(f64),
    Undefined,
}

impl Correlation {
    pub fn value(self) -> Option<f64> {
        match self {
            Correlation::Value(v) => Some(v),
            Correlation::Undefined => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Correlation::Undefined)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

impl CorrelationMethod {
    pub fn apply(self, x: &[f64], y: &[f64]) -> Result<Correlation, CorrelationError> {
        match self {
            CorrelationMethod::Pearson => pearson(x, y),
            CorrelationMethod::Spearman => spearman(x, y),
        }
    }
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::Spearman => "spearman",
        })
    }
}

impl FromStr for CorrelationMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pearson" => Ok(CorrelationMethod::Pearson),
            "spearman" => Ok(CorrelationMethod::Spearman),
            _ => Err(format!("unknown correlation method {s:?}")),
        }
    }
}

fn check(x: &[f64], y: &[f64]) -> Result<(), CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(CorrelationError::TooShort(x.len()));
    }
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(CorrelationError::NonFinite(i % x.len()));
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|&a| a == v[0])
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, CorrelationError> {
    check(x, y)?;
    if is_constant(x) || is_constant(y) {
        return Ok(Correlation::Undefined);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Correlation::Undefined);
    }
    Ok(Correlation::Value((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// 1-based ranks, ties sharing the average of the ranks they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Correlation, CorrelationError> {
    check(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v(c: Correlation) -> f64 {
        c.value().expect("defined")
    }

    #[test]
    fn pearson_examples() {
        let x = [1.0, 2.0, 3.0];
        assert_abs_diff_eq!(v(pearson(&x, &x).unwrap()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v(pearson(&x, &[-1.0, -2.0, -3.0]).unwrap()), -1.0, epsilon = 1e-12);
        // closed form: Sxy = 5, Sxx = 2, Syy = 38/3
        let expected = 5.0 / (2.0f64 * 38.0 / 3.0).sqrt();
        assert_abs_diff_eq!(expected, 0.9933992677987828, epsilon = 1e-15);
        assert_abs_diff_eq!(v(pearson(&x, &[2.0, 4.0, 7.0]).unwrap()), expected, epsilon = 1e-12);
    }

    #[test]
    fn pearson_errors_and_degenerate() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(CorrelationError::LengthMismatch(2, 1))
        );
        assert_eq!(pearson(&[1.0], &[1.0]), Err(CorrelationError::TooShort(1)));
        assert_eq!(pearson(&[1.0, 2.0], &[0.3, 0.3]).unwrap(), Correlation::Undefined);
        assert_eq!(pearson(&[0.1, 0.1, 0.1], &[1.0, 2.0, 3.0]).unwrap(), Correlation::Undefined);
        assert!(matches!(pearson(&[1.0, f64::NAN], &[1.0, 2.0]), Err(CorrelationError::NonFinite(_))));
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let cubed: Vec<f64> = x.iter().map(|a: &f64| a.powi(3)).collect();
        assert_abs_diff_eq!(v(spearman(&x, &cubed).unwrap()), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v(spearman(&x, &[4.0, 3.0, 2.0, 1.0]).unwrap()), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v(spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap()), 0.5, epsilon = 1e-12);
        assert!(spearman(&[1.0, 2.0], &[5.0, 5.0]).unwrap().is_undefined());
    }

    #[test]
    fn method_names() {
        assert_eq!("spearman".parse::<CorrelationMethod>().unwrap(), CorrelationMethod::Spearman);
        assert_eq!(CorrelationMethod::Pearson.to_string(), "pearson");
        assert!("kendall".parse::<CorrelationMethod>().is_err());
    }
}
