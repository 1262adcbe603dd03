//! Log-domain special functions.
//!
//! Normalization factors grow like `N!` and beyond, so everything on that
//! scale is carried as a natural logarithm in [`LogValue`]. The gamma-type
//! functions here only cover what the closed forms need: `ln Γ` for real
//! arguments, the upper incomplete gamma function of integer order and the
//! terminating series `₂F₁(1, -N; c; z)`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Div, Mul};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-negative real stored as its natural logarithm.
///
/// Zero is represented by a log magnitude of `-inf`.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogValue(f64);

impl LogValue {
    pub const ZERO: LogValue = LogValue(f64::NEG_INFINITY);
    pub const ONE: LogValue = LogValue(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan() && ln != f64::INFINITY, "bad log magnitude {ln}");
        LogValue(ln)
    }

    /// Panics on negative or NaN input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0, "LogValue::from_f64 on {x}");
        LogValue(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn powi(self, n: u64) -> Self {
        if n == 0 {
            LogValue::ONE
        } else if self.is_zero() {
            LogValue::ZERO
        } else {
            LogValue(self.0 * n as f64)
        }
    }

    /// Multiplies by the exact ratio `num / den`.
    pub fn scale(self, num: u64, den: u64) -> Self {
        if num == 0 {
            return LogValue::ZERO;
        }
        if self.is_zero() {
            return self;
        }
        LogValue(self.0 + (num as f64 / den as f64).ln())
    }
}

impl fmt::Debug for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({})", self.0)
    }
}

impl PartialOrd for LogValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl Add for LogValue {
    type Output = LogValue;

    fn add(self, rhs: LogValue) -> LogValue {
        let (hi, lo) = if self.0 >= rhs.0 { (self.0, rhs.0) } else { (rhs.0, self.0) };
        if lo == f64::NEG_INFINITY {
            return LogValue(hi);
        }
        LogValue(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for LogValue {
    type Output = LogValue;

    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue(self.0 + rhs.0)
    }
}

impl Div for LogValue {
    type Output = LogValue;

    fn div(self, rhs: LogValue) -> LogValue {
        assert!(!rhs.is_zero(), "division of LogValue by zero");
        if self.is_zero() {
            return LogValue::ZERO;
        }
        LogValue(self.0 - rhs.0)
    }
}

/// A real with explicit sign, used only for alternating partial sums.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLogValue {
    pub negative: bool,
    pub magnitude: LogValue,
}

impl SignedLogValue {
    pub fn to_f64(self) -> f64 {
        let m = self.magnitude.to_f64();
        if self.negative {
            -m
        } else {
            m
        }
    }

    /// The magnitude, or an error if the value is negative.
    pub fn positive(self) -> Result<LogValue> {
        if self.negative && !self.magnitude.is_zero() {
            return Err(Error::Numerical(format!("expected a positive quantity, got -exp({})", self.magnitude.ln())));
        }
        Ok(self.magnitude)
    }
}

/// `ln Σ exp(tᵢ)`, shifted by the maximum. An empty slice gives zero.
pub fn log_sum_exp(terms: &[LogValue]) -> LogValue {
    let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogValue::ZERO;
    }
    let s: f64 = terms.iter().map(|t| (t.0 - max).exp()).sum();
    LogValue(max + s.ln())
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

const STIRLING_MIN: f64 = 10.0;
const FACTORIAL_TABLE_LEN: usize = 171;

fn ln_factorial_table() -> &'static [f64; FACTORIAL_TABLE_LEN] {
    static TABLE: OnceLock<[f64; FACTORIAL_TABLE_LEN]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; FACTORIAL_TABLE_LEN];
        let mut prod = 1.0f64;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            prod *= n as f64;
            *slot = prod.ln();
        }
        table
    })
}

fn stirling(y: f64) -> f64 {
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        corr += c * pow;
        pow *= inv2;
    }
    (y - 0.5) * y.ln() - y + HALF_LN_2PI + corr
}

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("log_gamma needs x > 0, got {x}")));
    }
    if x.fract() == 0.0 && x <= FACTORIAL_TABLE_LEN as f64 {
        return Ok(ln_factorial_table()[x as usize - 1]);
    }
    if x >= STIRLING_MIN {
        return Ok(stirling(x));
    }
    // Shift into the asymptotic range: Γ(x) = Γ(x + k) / (x (x+1) ... (x+k-1)).
    let mut y = x;
    let mut prod = 1.0;
    while y < STIRLING_MIN {
        prod *= y;
        y += 1.0;
    }
    Ok(stirling(y) - prod.ln())
}

/// `ln n!`.
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < FACTORIAL_TABLE_LEN {
        ln_factorial_table()[n as usize]
    } else {
        stirling(n as f64 + 1.0)
    }
}

/// `ln (a (a+1) ... (a+n-1)) = ln Γ(a+n) - ln Γ(a)` for `a > 0`.
pub fn log_rising_factorial(a: f64, n: u64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::InvalidInput(format!("rising factorial needs a > 0, got {a}")));
    }
    if n <= 64 {
        return Ok((0..n).map(|j| (a + j as f64).ln()).sum());
    }
    Ok(log_gamma(a + n as f64)? - log_gamma(a)?)
}

// Relative size below which the remaining terms of a log-concave sum are dropped.
const SUM_CUTOFF: f64 = 1e-18;

/// `ln Σ_{k=0}^{n-1} (n-1)!/k! · x^k`, i.e. `ln(e^x Γ(n, x))`.
///
/// The terms are log-concave in `k`. Summation starts at the largest term and
/// walks outwards in both directions, so partial logs stay small and the walk
/// stops once the geometric tail bound drops below the cutoff.
fn log_scaled_gamma_sum(n: u64, x: f64) -> f64 {
    debug_assert!(n >= 1 && x >= 0.0);
    let top = n - 1;
    if x == 0.0 {
        return log_factorial(top);
    }
    let lx = x.ln();
    let peak = if x >= top as f64 { top } else { x.floor() as u64 };
    // ln((n-1)!/peak!) + peak ln x
    let log_fact_ratio = if top - peak <= 32 {
        ((peak + 1)..=top).map(|j| (j as f64).ln()).sum()
    } else {
        log_factorial(top) - log_factorial(peak)
    };
    let anchor = log_fact_ratio + peak as f64 * lx;

    let mut sum = 1.0;
    // Upwards: v_{k} = v_{k-1} + ln(x / k).
    let mut rel = 0.0;
    let mut k = peak + 1;
    while k <= top {
        rel += lx - (k as f64).ln();
        let term = rel.exp();
        sum += term;
        let next_ratio = x / (k + 1) as f64;
        if next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) < SUM_CUTOFF * sum {
            break;
        }
        k += 1;
    }
    // Downwards: v_{k} = v_{k+1} - ln(x / (k+1)).
    let mut rel = 0.0;
    let mut k = peak;
    while k > 0 {
        rel += (k as f64).ln() - lx;
        let term = rel.exp();
        sum += term;
        let next_ratio = (k - 1) as f64 / x;
        if next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) < SUM_CUTOFF * sum {
            break;
        }
        k -= 1;
    }
    anchor + sum.ln()
}

fn check_gamma_args(n: u64, x: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidInput("incomplete gamma order must be >= 1".into()));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::InvalidInput(format!("incomplete gamma needs finite x >= 0, got {x}")));
    }
    Ok(())
}

/// `ln Γ(n, x)` for integer order `n >= 1`, from the finite sum
/// `Γ(n, x) = (n-1)! e^{-x} Σ_{k<n} x^k / k!`.
pub fn log_upper_incomplete_gamma_int(n: u64, x: f64) -> Result<LogValue> {
    check_gamma_args(n, x)?;
    Ok(LogValue(log_scaled_gamma_sum(n, x) - x))
}

/// `ln(e^x Γ(n, x))`, free of the cancellation between `e^x` and `e^{-x}`.
pub fn log_scaled_upper_incomplete_gamma_int(n: u64, x: f64) -> Result<LogValue> {
    check_gamma_args(n, x)?;
    Ok(LogValue(log_scaled_gamma_sum(n, x)))
}

/// `Γ(n+1, x) / Γ(n, x) = n + x^n e^{-x} / Γ(n, x)`.
pub fn upper_incomplete_gamma_ratio(n: u64, x: f64) -> Result<f64> {
    check_gamma_args(n, x)?;
    if x == 0.0 {
        return Ok(n as f64);
    }
    let excess = (n as f64 * x.ln() - log_scaled_gamma_sum(n, x)).exp();
    Ok(n as f64 + excess)
}

/// `₂F₁(1, -n; c; z) = Σ_{k=0}^{n} (-n)_k / (c)_k · z^k`.
///
/// Fails if `(c)_k` vanishes for some `k < n`, i.e. the series meets a pole
/// before it terminates.
pub fn log_2f1_terminating(n: u64, c: f64, z: f64) -> Result<SignedLogValue> {
    if !c.is_finite() || !z.is_finite() {
        return Err(Error::InvalidInput(format!("2F1 needs finite c and z, got c={c}, z={z}")));
    }
    let mut positive = Vec::with_capacity(n as usize + 1);
    let mut negative = Vec::new();
    positive.push(LogValue::ONE);
    if z == 0.0 {
        return Ok(SignedLogValue { negative: false, magnitude: LogValue::ONE });
    }
    let lz = z.abs().ln();
    let mut log_term = 0.0;
    let mut sign_negative = false;
    for k in 0..n {
        let denom = c + k as f64;
        if denom == 0.0 {
            return Err(Error::Pole { term: k });
        }
        let numer = k as f64 - n as f64;
        log_term += (numer / denom).abs().ln() + lz;
        if (numer / denom < 0.0) != (z < 0.0) {
            sign_negative = !sign_negative;
        }
        if sign_negative {
            negative.push(LogValue(log_term));
        } else {
            positive.push(LogValue(log_term));
        }
    }
    let pos = log_sum_exp(&positive);
    let neg = log_sum_exp(&negative);
    Ok(match pos.partial_cmp(&neg) {
        Some(Ordering::Less) => SignedLogValue { negative: true, magnitude: log_diff_exp(neg, pos) },
        _ => SignedLogValue { negative: false, magnitude: log_diff_exp(pos, neg) },
    })
}

/// `ln(e^a - e^b)` for `a >= b`.
pub fn log_diff_exp(a: LogValue, b: LogValue) -> LogValue {
    if b.is_zero() {
        return a;
    }
    if a.0 == b.0 {
        return LogValue::ZERO;
    }
    LogValue(a.0 + (-(b.0 - a.0).exp()).ln_1p())
}

/// `ln √π`, handy for checks of `Γ(1/2)`.
pub fn ln_sqrt_pi() -> f64 {
    0.5 * PI.ln()
}
