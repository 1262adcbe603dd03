//! Bounds on `χ_N` and `χ_{N+1}/χ_N`.
//!
//! The tight bounds at fixed `(λ₁, P)` are the χ series of the two extremal
//! distributions. The weak bounds depend on `P` alone or on `λ₁` alone and
//! come from closed forms for the four boundary distributions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::chi::{chi_grouped, ChiSeries};
use crate::error::{Error, Result};
use crate::extremal::{build_lambda_max, build_lambda_min, ExtremalConstruction};
use crate::schmidt::{lambda1_min, pmax_multiplicity, snapped, uniform_mode_count};
use crate::special::{
    log_2f1_terminating, log_diff_exp, log_factorial, log_rising_factorial, log_scaled_upper_incomplete_gamma_int,
    log_sum_exp, upper_incomplete_gamma_ratio, LogValue,
};

/// Largest `N` accepted by the closed forms.
pub const CLOSED_FORM_MAX_N: u64 = 10_000_000;

/// Default cap on `N` for bounds that need a χ engine run.
pub const ENGINE_MAX_N: u64 = 10_000;

fn check_unit(name: &str, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0 + 1e-12) {
        return Err(Error::InvalidInput(format!("{name} must lie in (0, 1], got {x}")));
    }
    Ok(x.min(1.0))
}

fn check_closed_form_n(n: u64) -> Result<()> {
    if n > CLOSED_FORM_MAX_N {
        return Err(Error::TooLarge(format!("N = {n} exceeds the closed-form limit {CLOSED_FORM_MAX_N}")));
    }
    Ok(())
}

/// Ratio bounds that depend on the purity only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PurityBounds {
    /// `PN + 1`, attained by the uniform distribution.
    pub lower: f64,
    /// `√P Γ(N+2, x)/Γ(N+1, x)` with `x = (1-√P)/√P`, attained by the peaked distribution.
    pub middle: f64,
    /// `√P N + 1`, the simpler cap on the middle value.
    pub cap: f64,
}

/// Ratio bounds that depend on `λ₁` only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lambda1Bounds {
    /// `λ₁(N+1)`, a weaker floor below the middle value.
    pub floor: f64,
    /// `λ₁ Γ(N+2, x)/Γ(N+1, x)` with `x = (1-λ₁)/λ₁`, attained at `P = λ₁²`.
    pub middle: f64,
    /// `λ₁N + 1`.
    pub upper: f64,
}

pub fn purity_bounds(purity: f64, n: u64) -> Result<PurityBounds> {
    let p = check_unit("purity", purity)?;
    check_closed_form_n(n)?;
    let root = p.sqrt();
    let x = (1.0 - root) / root;
    Ok(PurityBounds {
        lower: p * n as f64 + 1.0,
        middle: root * upper_incomplete_gamma_ratio(n + 1, x)?,
        cap: root * n as f64 + 1.0,
    })
}

pub fn lambda1_bounds(lambda1: f64, n: u64) -> Result<Lambda1Bounds> {
    let l1 = check_unit("lambda1", lambda1)?;
    check_closed_form_n(n)?;
    let x = (1.0 - l1) / l1;
    Ok(Lambda1Bounds {
        floor: l1 * (n + 1) as f64,
        middle: l1 * upper_incomplete_gamma_ratio(n + 1, x)?,
        upper: l1 * n as f64 + 1.0,
    })
}

/// Everything known about `χ_N` and `χ_{N+1}/χ_N` at one `(λ₁, P, N)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundBundle {
    pub n: u64,
    pub lambda1: f64,
    pub purity: f64,
    pub tight_lower: LogValue,
    pub tight_upper: LogValue,
    pub ratio_tight_lower: f64,
    pub ratio_tight_upper: f64,
    pub purity_bounds: PurityBounds,
    pub lambda1_bounds: Lambda1Bounds,
}

/// χ series of `Λ_min(λ₁, P)` and `Λ_max(λ₁, P)`, reusable across `N`.
#[derive(Clone, Debug)]
pub struct TightBounds {
    lambda1: f64,
    purity: f64,
    min: ExtremalConstruction,
    max: ExtremalConstruction,
    min_series: ChiSeries,
    max_series: ChiSeries,
}

impl TightBounds {
    /// Prepares bounds for every `N <= max_n`.
    pub fn new(lambda1: f64, purity: f64, max_n: u64) -> Result<Self> {
        let min = build_lambda_min(lambda1, purity)?;
        let max = build_lambda_max(lambda1, purity)?;
        let (min_series, max_series) =
            (chi_grouped(&min.distribution, max_n + 1), chi_grouped(&max.distribution, max_n + 1));
        Ok(TightBounds { lambda1, purity, min, max, min_series, max_series })
    }

    pub fn max_n(&self) -> u64 {
        self.min_series.max_n() - 1
    }

    pub fn minimizer(&self) -> &ExtremalConstruction {
        &self.min
    }

    pub fn maximizer(&self) -> &ExtremalConstruction {
        &self.max
    }

    fn check_n(&self, n: u64) -> Result<()> {
        if n > self.max_n() {
            return Err(Error::InvalidInput(format!("N = {n} beyond the prepared range {}", self.max_n())));
        }
        Ok(())
    }

    pub fn chi_range(&self, n: u64) -> Result<(LogValue, LogValue)> {
        self.check_n(n)?;
        Ok((self.min_series.chi(n), self.max_series.chi(n)))
    }

    pub fn ratio_range(&self, n: u64) -> Result<(f64, f64)> {
        self.check_n(n)?;
        Ok((self.min_series.ratio(n).unwrap(), self.max_series.ratio(n).unwrap()))
    }

    pub fn bundle(&self, n: u64) -> Result<BoundBundle> {
        let (tight_lower, tight_upper) = self.chi_range(n)?;
        let (ratio_tight_lower, ratio_tight_upper) = self.ratio_range(n)?;
        Ok(BoundBundle {
            n,
            lambda1: self.lambda1,
            purity: self.purity,
            tight_lower,
            tight_upper,
            ratio_tight_lower,
            ratio_tight_upper,
            purity_bounds: purity_bounds(self.purity, n)?,
            lambda1_bounds: lambda1_bounds(self.lambda1, n)?,
        })
    }
}

/// The full bound bundle at a single `N`.
pub fn tight_bounds(lambda1: f64, purity: f64, n: u64) -> Result<BoundBundle> {
    if n < 1 {
        return Err(Error::InvalidInput("bounds need N >= 1".into()));
    }
    TightBounds::new(lambda1, purity, n)?.bundle(n)
}

/// Distributions and envelopes with a closed-form `χ_N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    /// Uniform distribution of purity `P`.
    Uniform,
    /// Peaked distribution of purity `P`.
    Peaked,
    /// `λ₁` plus tail.
    PminLimit,
    /// `⌊1/λ₁⌋` copies of `λ₁` plus remainder.
    Pmax,
    /// `P^N Γ(N+1/P)/Γ(1/P)`.
    PurityLowerEnvelope,
    /// `P^{N/2} Γ(N+1/√P)/Γ(1/√P)`.
    PurityUpperEnvelope,
    /// `λ₁^N N!`.
    Lambda1LowerEnvelope,
    /// `λ₁^N Γ(N+1/λ₁)/Γ(1/λ₁)`.
    Lambda1UpperEnvelope,
}

impl ClosedFormKind {
    pub const ALL: [ClosedFormKind; 8] = [
        ClosedFormKind::Uniform,
        ClosedFormKind::Peaked,
        ClosedFormKind::PminLimit,
        ClosedFormKind::Pmax,
        ClosedFormKind::PurityLowerEnvelope,
        ClosedFormKind::PurityUpperEnvelope,
        ClosedFormKind::Lambda1LowerEnvelope,
        ClosedFormKind::Lambda1UpperEnvelope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormKind::Uniform => "uniform",
            ClosedFormKind::Peaked => "peaked",
            ClosedFormKind::PminLimit => "pmin_limit",
            ClosedFormKind::Pmax => "pmax",
            ClosedFormKind::PurityLowerEnvelope => "purity_lower_envelope",
            ClosedFormKind::PurityUpperEnvelope => "purity_upper_envelope",
            ClosedFormKind::Lambda1LowerEnvelope => "lambda1_lower_envelope",
            ClosedFormKind::Lambda1UpperEnvelope => "lambda1_upper_envelope",
        }
    }

    /// True if the parameter is the purity, false if it is `λ₁`.
    pub fn takes_purity(self) -> bool {
        matches!(
            self,
            ClosedFormKind::Uniform
                | ClosedFormKind::Peaked
                | ClosedFormKind::PurityLowerEnvelope
                | ClosedFormKind::PurityUpperEnvelope
        )
    }
}

impl fmt::Display for ClosedFormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClosedFormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ClosedFormKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown closed-form kind {s:?}")))
    }
}

/// `λ^N (a)_N ₂F₁(1, -N; 1-N-a; z)`: `a` copies of `λ` plus one coefficient `zλ`.
fn copies_plus_one(lambda: f64, copies: u64, z: f64, n: u64) -> Result<LogValue> {
    let rising = log_rising_factorial(copies as f64, n)?;
    let f = log_2f1_terminating(n, 1.0 - n as f64 - copies as f64, z)?.positive()?;
    Ok(LogValue::from_ln(n as f64 * lambda.ln() + rising) * f)
}

/// `λ^N e^x Γ(N+1, x)` with `x = (1-λ)/λ`: one coefficient `λ` plus tail.
fn one_plus_tail(lambda: f64, n: u64) -> Result<LogValue> {
    let x = (1.0 - lambda) / lambda;
    Ok(LogValue::from_ln(n as f64 * lambda.ln()) * log_scaled_upper_incomplete_gamma_int(n + 1, x.max(0.0))?)
}

/// `χ_N` of a boundary distribution or envelope from its closed form.
pub fn chi_closed_form(kind: ClosedFormKind, parameter: f64, n: u64) -> Result<LogValue> {
    let name = if kind.takes_purity() { "purity" } else { "lambda1" };
    let a = check_unit(name, parameter)?;
    check_closed_form_n(n)?;
    let nf = n as f64;
    match kind {
        ClosedFormKind::Uniform => {
            let s = uniform_mode_count(a);
            if s == 1 {
                return Ok(LogValue::from_ln(log_factorial(n)));
            }
            let (l1, last) = if snapped(1.0 / a).is_some() {
                (1.0 / s as f64, 1.0 / s as f64)
            } else {
                let l1 = lambda1_min(a);
                (l1, 1.0 - (s - 1) as f64 * l1)
            };
            copies_plus_one(l1, s - 1, last / l1, n)
        }
        ClosedFormKind::Peaked => one_plus_tail(a.sqrt(), n),
        ClosedFormKind::PminLimit => one_plus_tail(a, n),
        ClosedFormKind::Pmax => {
            let f = pmax_multiplicity(a);
            let rest = (1.0 - f as f64 * a).max(0.0);
            let z = if rest <= 1e-12 { 0.0 } else { rest / a };
            copies_plus_one(a, f, z, n)
        }
        ClosedFormKind::PurityLowerEnvelope => Ok(LogValue::from_ln(nf * a.ln() + log_rising_factorial(1.0 / a, n)?)),
        ClosedFormKind::PurityUpperEnvelope => {
            Ok(LogValue::from_ln(0.5 * nf * a.ln() + log_rising_factorial(1.0 / a.sqrt(), n)?))
        }
        ClosedFormKind::Lambda1LowerEnvelope => Ok(LogValue::from_ln(nf * a.ln() + log_factorial(n))),
        ClosedFormKind::Lambda1UpperEnvelope => Ok(LogValue::from_ln(nf * a.ln() + log_rising_factorial(1.0 / a, n)?)),
    }
}

/// `χ_N(Λ_max)` as a single sum over incomplete gamma functions.
///
/// Independent of the χ engines; used to cross-check them.
pub fn chi_lambda_max_gamma_sum(lambda1: f64, purity: f64, n: u64) -> Result<LogValue> {
    check_closed_form_n(n)?;
    let c = build_lambda_max(lambda1, purity)?;
    let l = c.diagnostics.threshold_count.unwrap_or(1);
    let remainder = c.diagnostics.remainder.unwrap_or(c.distribution.lambda1());
    let tail = c.distribution.tail_mass();
    let l1 = c.distribution.lambda1();
    if l < 2 {
        // Only λ_L and the tail: λ_L^N e^x Γ(N+1, x).
        return Ok(LogValue::from_ln(n as f64 * remainder.ln())
            * log_scaled_upper_incomplete_gamma_int(n + 1, tail / remainder)?);
    }
    let x = tail / remainder;
    let mut terms = Vec::with_capacity(n as usize + 1);
    // ln C(M+L-2, L-2), advanced by (M+L-2)/M.
    let mut log_binom = 0.0;
    for m in 0..=n {
        if m > 0 {
            log_binom += ((m + l - 2) as f64 / m as f64).ln();
        }
        let k = n - m;
        let gamma = log_scaled_upper_incomplete_gamma_int(k + 1, x)?;
        terms.push(
            LogValue::from_ln(m as f64 * l1.ln() + k as f64 * remainder.ln() - log_factorial(k) + log_binom) * gamma,
        );
    }
    Ok(LogValue::from_ln(log_factorial(n)) * log_sum_exp(&terms))
}

/// `χ_N(Λ_min)` as a single sum with the inner geometric series summed.
///
/// Independent of the χ engines; used to cross-check them.
pub fn chi_lambda_min_geometric_sum(lambda1: f64, purity: f64, n: u64) -> Result<LogValue> {
    check_closed_form_n(n)?;
    let c = build_lambda_min(lambda1, purity)?;
    let (s, middle, smallest) = match (c.diagnostics.mode_count, c.diagnostics.middle, c.diagnostics.smallest) {
        (Some(s), Some(mid), Some(last)) if s >= 3 && c.diagnostics.delegated_to.is_none() => (s, mid, last),
        _ => return Err(Error::InvalidInput("the geometric-sum form needs a minimizer with a middle group".into())),
    };
    let l1 = c.distribution.lambda1();
    let smallest = smallest.max(0.0);
    let gap = l1 - smallest;
    let mut terms = Vec::with_capacity(n as usize + 1);
    let mut log_binom = 0.0;
    for m in 0..=n {
        if m > 0 && s > 3 {
            log_binom += ((m + s - 3) as f64 / m as f64).ln();
        }
        let a = (1 + n - m) as f64;
        let top = LogValue::from_ln(a * l1.ln());
        let bottom = if smallest > 0.0 { LogValue::from_ln(a * smallest.ln()) } else { LogValue::ZERO };
        let diff = log_diff_exp(top, bottom);
        terms.push(LogValue::from_ln(m as f64 * middle.ln() + log_binom - gap.ln()) * diff);
    }
    Ok(LogValue::from_ln(log_factorial(n)) * log_sum_exp(&terms))
}

/// Slack of the four ratio inequalities at one `n`, on a log scale.
///
/// With `r_n = χ_n/χ_{n-1}`: (a) `1 ≤ r_n`, (b) `r_n ≤ r_{n+1}`,
/// (c) `r_{n+1} ≤ (n+1)/n · r_n`, (d) `r_n ≤ n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HierarchyRow {
    pub n: u64,
    pub slack: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HierarchyReport {
    pub rows: Vec<HierarchyRow>,
    /// Smallest slack per inequality.
    pub worst_slack: [f64; 4],
    /// `n` at which the smallest slack occurs.
    pub worst_at: [u64; 4],
    pub tolerance: f64,
}

impl HierarchyReport {
    pub fn holds(&self, which: usize) -> bool {
        self.worst_slack[which] >= -self.tolerance
    }

    pub fn passed(&self) -> bool {
        (0..4).all(|i| self.holds(i))
    }
}

/// Slack below which an inequality counts as violated.
pub const HIERARCHY_TOLERANCE: f64 = 1e-10;

pub fn check_hierarchy(series: &ChiSeries) -> Result<HierarchyReport> {
    if series.max_n() < 2 {
        return Err(Error::InvalidInput("hierarchy check needs χ_0, χ_1 and χ_2".into()));
    }
    let mut rows = Vec::with_capacity(series.max_n() as usize);
    let mut worst_slack = [f64::INFINITY; 4];
    let mut worst_at = [0; 4];
    for n in 1..series.max_n() {
        let r_n = series.log_ratio(n - 1).unwrap();
        let r_next = series.log_ratio(n).unwrap();
        let nf = n as f64;
        let slack = [r_n, r_next - r_n, ((nf + 1.0) / nf).ln() + r_n - r_next, nf.ln() - r_n];
        for i in 0..4 {
            if slack[i] < worst_slack[i] {
                worst_slack[i] = slack[i];
                worst_at[i] = n;
            }
        }
        rows.push(HierarchyRow { n, slack });
    }
    Ok(HierarchyReport { rows, worst_slack, worst_at, tolerance: HIERARCHY_TOLERANCE })
}
