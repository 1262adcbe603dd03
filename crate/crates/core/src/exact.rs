//! Exact rational arithmetic for small instances.
//!
//! The brute-force enumerations here are the ground truth the floating-point
//! engines are tested against. Two enumerations are provided, one over
//! occupation vectors and one over non-decreasing index tuples; each tuple
//! corresponds to exactly one occupation vector, so they must agree.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::chi::{grouped_h_series, recursive_h_series, ChiScalar, Spectrum};
use crate::error::{Error, Result};
use crate::schmidt::{Group, SchmidtDistribution};

/// Largest `N` the brute-force oracle accepts.
pub const ORACLE_MAX_N: u64 = 12;
/// Largest number of modes the brute-force oracle accepts.
pub const ORACLE_MAX_MODES: u64 = 8;

impl ChiScalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }

    fn ratio(&self, num: u64, den: u64) -> Self {
        self * BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn power(&self, n: u64) -> Self {
        Pow::pow(self, n as u32)
    }
}

/// Parses `"3/8"`, `"0.125"` or `"1.25e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }

    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32 - 1;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(digits);
    if scale >= 0 {
        value *= BigRational::from_integer(Pow::pow(&ten, scale as u32));
    } else {
        value /= BigRational::from_integer(Pow::pow(&ten, (-scale) as u32));
    }
    Ok(if negative { -value } else { value })
}

/// A finite distribution with exact rational coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    values: Vec<BigRational>,
}

impl ExactDistribution {
    /// Validates positivity and an exact unit sum.
    pub fn new(values: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("distribution needs at least one coefficient".into()));
        }
        if values.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidInput("Schmidt coefficients must be positive".into()));
        }
        let total: BigRational = values.iter().sum();
        if !total.is_one() {
            return Err(Error::NotNormalized { total: total.to_f64().unwrap_or(f64::NAN) });
        }
        let mut values = values;
        values.sort_by(|a, b| b.cmp(a));
        Ok(ExactDistribution { values })
    }

    pub fn parse(values: &[&str]) -> Result<Self> {
        Self::new(values.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?)
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn num_modes(&self) -> u64 {
        self.values.len() as u64
    }

    /// Equal values grouped, largest first.
    pub fn spectrum(&self) -> Spectrum<BigRational> {
        let mut groups: Vec<(BigRational, u64)> = Vec::new();
        for v in &self.values {
            match groups.last_mut() {
                Some((prev, k)) if prev == v => *k += 1,
                _ => groups.push((v.clone(), 1)),
            }
        }
        Spectrum { groups, tail: None }
    }

    /// The nearest floating-point distribution.
    pub fn to_distribution(&self) -> Result<SchmidtDistribution> {
        let groups = self.spectrum().groups.into_iter().map(|(v, k)| Group::new(v.to_f64().unwrap_or(f64::NAN), k));
        SchmidtDistribution::new(groups, 0.0, true)
    }

    fn check_oracle_size(&self, n: u64) -> Result<()> {
        if n > ORACLE_MAX_N || self.num_modes() > ORACLE_MAX_MODES {
            return Err(Error::TooLarge(format!(
                "brute-force oracle is limited to N <= {ORACLE_MAX_N} and at most {ORACLE_MAX_MODES} modes"
            )));
        }
        Ok(())
    }
}

fn factorial(n: u64) -> BigRational {
    BigRational::from_integer((1..=n).map(BigInt::from).product())
}

/// Exact image of a finite floating-point distribution, renormalized to unit sum.
pub fn exact_from_distribution(d: &SchmidtDistribution) -> Result<ExactDistribution> {
    if d.has_tail() {
        return Err(Error::InvalidInput("the brute-force oracle needs a finite distribution without tail".into()));
    }
    let values: Vec<BigRational> = d
        .coefficients()
        .map(|v| BigRational::from_float(v).ok_or_else(|| Error::InvalidInput(format!("{v} is not finite"))))
        .collect::<Result<_>>()?;
    let total: BigRational = values.iter().sum();
    // Binary fractions rarely sum to exactly one; renormalize exactly.
    Ok(ExactDistribution { values: values.into_iter().map(|v| v / &total).collect() })
}

/// `χ_N` by enumerating occupation vectors `(m_1, …, m_S)` with `Σ m_j = N`.
pub fn chi_bruteforce_exact(d: &ExactDistribution, n: u64) -> Result<BigRational> {
    d.check_oracle_size(n)?;
    let powers: Vec<Vec<BigRational>> =
        d.values.iter().map(|v| (0..=n).map(|m| Pow::pow(v, m as u32)).collect()).collect();

    fn walk(powers: &[Vec<BigRational>], left: usize, acc: &BigRational, total: &mut BigRational) {
        match powers.split_first() {
            None if left == 0 => *total += acc,
            None => {}
            Some((row, _)) if powers.len() == 1 => *total += acc * &row[left],
            Some((row, rest)) => {
                for (m, power) in row.iter().enumerate().take(left + 1) {
                    walk(rest, left - m, &(acc * power), total);
                }
            }
        }
    }

    let mut total = <BigRational as Zero>::zero();
    walk(&powers, n as usize, &<BigRational as One>::one(), &mut total);
    Ok(total * factorial(n))
}

/// `χ_N` by enumerating non-decreasing index tuples `p_1 ≤ … ≤ p_N`.
pub fn chi_bruteforce_tuples(d: &ExactDistribution, n: u64) -> Result<BigRational> {
    d.check_oracle_size(n)?;

    fn walk(values: &[BigRational], start: usize, left: u64, acc: &BigRational, total: &mut BigRational) {
        if left == 0 {
            *total += acc;
            return;
        }
        for p in start..values.len() {
            walk(values, p, left - 1, &(acc * &values[p]), total);
        }
    }

    let mut total = <BigRational as Zero>::zero();
    walk(&d.values, 0, n, &<BigRational as One>::one(), &mut total);
    Ok(total * factorial(n))
}

fn to_chi(h: Vec<BigRational>) -> Vec<BigRational> {
    let mut fact = <BigRational as One>::one();
    h.into_iter()
        .enumerate()
        .map(|(k, v)| {
            if k > 0 {
                fact *= BigRational::from_integer(BigInt::from(k));
            }
            v * &fact
        })
        .collect()
}

/// `χ_0 … χ_N` by the Newton-Girard recursion in exact arithmetic.
pub fn chi_recursive_exact(d: &ExactDistribution, n: u64) -> Vec<BigRational> {
    to_chi(recursive_h_series(&d.spectrum(), n))
}

/// `χ_0 … χ_N` by the grouped engine in exact arithmetic.
pub fn chi_grouped_exact(d: &ExactDistribution, n: u64) -> Vec<BigRational> {
    to_chi(grouped_h_series(&d.spectrum(), n))
}
