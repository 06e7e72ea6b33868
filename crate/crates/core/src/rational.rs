//! Exact arithmetic helpers.
//!
//! Every quantity in this crate whose denominator is an entity count is
//! kept as an exact rational. Floats only appear in rendered reports.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<i128>;

pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `num/den`, always with an explicit denominator.
pub fn to_fraction_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `4/3 (1.3333)`.
pub fn render(r: &Rational) -> String {
    format!("{} ({:.4})", to_fraction_string(r), to_f64(r))
}

/// Parses `"2/3"`, `"1"`, or a finite decimal such as `"0.75"` exactly.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().ok()?;
        let d: i128 = d.trim().parse().ok()?;
        return (d != 0).then(|| Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().ok()? };
        let scale = 10i128.pow(frac.len() as u32);
        let frac: i128 = frac.parse().ok()?;
        let magnitude = int.abs() * scale + frac;
        return Some(Rational::new(if negative { -magnitude } else { magnitude }, scale));
    }
    s.parse::<i128>().ok().map(Rational::from_integer)
}

/// Wire form of an exact value: the fraction plus a float approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactJson {
    pub exact: String,
    pub approx: f64,
}

impl From<&Rational> for ExactJson {
    fn from(r: &Rational) -> Self {
        ExactJson {
            exact: to_fraction_string(r),
            approx: to_f64(r),
        }
    }
}

/// serde adapter for `Rational` fields.
pub mod exact_serde {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        ExactJson::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let repr = ExactJson::deserialize(d)?;
        parse_rational(&repr.exact).ok_or_else(|| serde::de::Error::custom(format!("bad rational {:?}", repr.exact)))
    }
}

/// The fraction of a concept's entities that match a pattern, kept as
/// the raw counts. Comparisons cross-multiply and never round.
#[derive(Debug, Clone, Copy, Eq)]
pub struct Probability {
    matches: u64,
    total: u64,
}

impl Probability {
    /// `matches / total`. Panics if `total` is zero or `matches > total`.
    pub fn new(matches: u64, total: u64) -> Self {
        assert!(total > 0, "probability with zero denominator");
        assert!(matches <= total, "probability above one");
        Probability { matches, total }
    }

    pub fn matches(&self) -> u64 {
        self.matches
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_zero(&self) -> bool {
        self.matches == 0
    }

    /// Strictly above one half.
    pub fn is_majority(&self) -> bool {
        2 * self.matches as u128 > self.total as u128
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.matches as i128, self.total as i128)
    }

    pub fn to_f64(&self) -> f64 {
        self.matches as f64 / self.total as f64
    }
}

impl PartialEq for Probability {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl PartialOrd for Probability {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Probability {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.matches as u128 * other.total as u128;
        let rhs = other.matches as u128 * self.total as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.matches, self.total)
    }
}

pub(crate) fn sum<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Rational {
    values.into_iter().fold(Rational::zero(), |acc, v| acc + v)
}
