//! Distributions that extremize the power sums at fixed `(λ₁, P)`, and the
//! four boundary distributions of the feasible region.
//!
//! `Λ_max` puts as many coefficients at `λ₁` as the purity allows, one
//! remainder coefficient `λ_L`, and spreads the rest over infinitely many
//! infinitesimal modes (the tail). `Λ_min` spreads everything after `λ₁` as
//! evenly as possible over the fewest modes that reach purity `P`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schmidt::{
    ceil_snapped, feasible_purity_range, lambda1_min, pmax_multiplicity, snapped, uniform_mode_count, Group,
    SchmidtDistribution,
};

/// Relative slack on the feasibility constraints `λ₁² ≤ P ≤ P_max(λ₁)`.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-12;

// Discriminants and residual masses in [-CLAMP, 0) are rounding noise.
const CLAMP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalKind {
    Max,
    Min,
    Uniform,
    Peaked,
    PminLimit,
    Pmax,
}

impl ExtremalKind {
    pub const ALL: [ExtremalKind; 6] = [
        ExtremalKind::Max,
        ExtremalKind::Min,
        ExtremalKind::Uniform,
        ExtremalKind::Peaked,
        ExtremalKind::PminLimit,
        ExtremalKind::Pmax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExtremalKind::Max => "max",
            ExtremalKind::Min => "min",
            ExtremalKind::Uniform => "uniform",
            ExtremalKind::Peaked => "peaked",
            ExtremalKind::PminLimit => "pmin_limit",
            ExtremalKind::Pmax => "pmax",
        }
    }

    pub fn needs_lambda1(self) -> bool {
        !matches!(self, ExtremalKind::Uniform | ExtremalKind::Peaked)
    }

    pub fn needs_purity(self) -> bool {
        !matches!(self, ExtremalKind::PminLimit | ExtremalKind::Pmax)
    }
}

impl fmt::Display for ExtremalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExtremalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        ExtremalKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown distribution kind {s:?}")))
    }
}

/// Intermediate quantities of a construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `L = ⌈P/λ₁²⌉` for `Λ_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_count: Option<u64>,
    /// Number of finite modes for `Λ_min` and the uniform distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_count: Option<u64>,
    /// `λ_L`, the remainder coefficient of `Λ_max`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remainder: Option<f64>,
    /// `λ_Σ`, the tail weight.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_mass: Option<f64>,
    /// `R'` of the `Λ_min` quadratic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<f64>,
    /// `λ₂ = … = λ_{S-1}` of `Λ_min`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub middle: Option<f64>,
    /// `λ_S`, the smallest coefficient of `Λ_min` or the uniform distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smallest: Option<f64>,
    /// Set when a boundary case was handed to another construction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delegated_to: Option<ExtremalKind>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalConstruction {
    pub kind: ExtremalKind,
    pub distribution: SchmidtDistribution,
    pub diagnostics: Diagnostics,
}

impl ExtremalConstruction {
    fn delegated(kind: ExtremalKind, mut inner: ExtremalConstruction) -> Self {
        inner.diagnostics.delegated_to = Some(inner.kind);
        inner.kind = kind;
        inner
    }
}

fn unit_interval(name: &str, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0 + CLAMP) {
        return Err(Error::InvalidInput(format!("{name} must lie in (0, 1], got {x}")));
    }
    Ok(x.min(1.0))
}

fn check_feasible(lambda1: f64, purity: f64) -> Result<(f64, f64)> {
    let l1 = unit_interval("lambda1", lambda1)?;
    let p = unit_interval("purity", purity)?;
    let range = feasible_purity_range(l1)?;
    if !range.contains(p, FEASIBILITY_TOLERANCE * p) {
        return Err(Error::Infeasible { lambda1, purity });
    }
    Ok((l1, p))
}

fn clamp_small_negative(x: f64, what: &'static str) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NegativeDiscriminant { what, value: x })
    }
}

/// The power-sum maximizing distribution, in the limit of infinitely many modes.
pub fn build_lambda_max(lambda1: f64, purity: f64) -> Result<ExtremalConstruction> {
    let (l1, p) = check_feasible(lambda1, purity)?;
    let kind = ExtremalKind::Max;
    let p_max = feasible_purity_range(l1)?.max;
    if l1 < 1.0 && (p - p_max).abs() <= FEASIBILITY_TOLERANCE * p {
        return Ok(ExtremalConstruction::delegated(kind, build_pmax(l1)?));
    }

    let count = p / (l1 * l1);
    let l = ceil_snapped(count).max(1);
    let full = (l - 1) as f64;
    let remainder = if snapped(count).is_some() {
        l1
    } else {
        clamp_small_negative(p - full * l1 * l1, "remainder coefficient")?.sqrt()
    };
    let mut tail = clamp_small_negative(1.0 - full * l1 - remainder, "tail mass")?;
    if tail <= CLAMP {
        tail = 0.0;
    }

    let mut groups = vec![Group::new(remainder, 1)];
    if l > 1 {
        groups.push(Group::new(l1, l - 1));
    }
    let distribution = SchmidtDistribution::new(groups, tail, false)?;
    Ok(ExtremalConstruction {
        kind,
        distribution,
        diagnostics: Diagnostics {
            threshold_count: Some(l),
            remainder: Some(remainder),
            tail_mass: Some(tail),
            ..Diagnostics::default()
        },
    })
}

/// The power-sum minimizing distribution: `λ₁`, then `S-2` equal values, then `λ_S`.
pub fn build_lambda_min(lambda1: f64, purity: f64) -> Result<ExtremalConstruction> {
    let (l1, p) = check_feasible(lambda1, purity)?;
    let kind = ExtremalKind::Min;
    if p - l1 * l1 < 1e-12 {
        return Ok(ExtremalConstruction::delegated(kind, build_pmin_limit(l1)?));
    }
    if (l1 - lambda1_min(p)).abs() <= 1e-12 {
        return Ok(ExtremalConstruction::delegated(kind, build_uniform(p)?));
    }

    let rest = 1.0 - l1;
    let spread = rest * rest / (p - l1 * l1);
    let s = 1 + ceil_snapped(spread).max(1);
    if s == 2 {
        let distribution = SchmidtDistribution::new([Group::new(l1, 1), Group::new(rest, 1)], 0.0, false)?;
        return Ok(ExtremalConstruction {
            kind,
            distribution,
            diagnostics: Diagnostics { mode_count: Some(2), smallest: Some(rest), ..Diagnostics::default() },
        });
    }

    let s_f = s as f64;
    // The bracket cancels to O(1/S); its rounding error scales with S.
    let disc = (s_f - 2.0) * (l1 * (2.0 - s_f * l1) + (s_f - 1.0) * p - 1.0);
    let scale = (s_f - 2.0) * (1.0 + s_f * (l1 * l1 + p));
    let root = if snapped(spread).is_some() || (disc < 0.0 && disc >= -CLAMP * scale) {
        0.0
    } else {
        clamp_small_negative(disc, "R'")?.sqrt()
    };
    let middle = rest / (s_f - 1.0) + root / ((s_f - 2.0) * (s_f - 1.0));
    let smallest = (rest - root) / (s_f - 1.0);

    let mut groups = vec![Group::new(l1, 1), Group::new(middle, s - 2)];
    if smallest > CLAMP * l1 {
        groups.push(Group::new(smallest, 1));
    }
    let distribution = SchmidtDistribution::new(groups, 0.0, false)?;
    Ok(ExtremalConstruction {
        kind,
        distribution,
        diagnostics: Diagnostics {
            mode_count: Some(s),
            root: Some(root),
            middle: Some(middle),
            smallest: Some(smallest),
            ..Diagnostics::default()
        },
    })
}

/// `S-1` copies of `λ₁,min(P)` and one smaller coefficient; the minimum-`λ₁` boundary.
pub fn build_uniform(purity: f64) -> Result<ExtremalConstruction> {
    let p = unit_interval("purity", purity)?;
    let s = uniform_mode_count(p);
    let (groups, smallest) = if s == 1 {
        (vec![Group::new(1.0, 1)], 1.0)
    } else if snapped(1.0 / p).is_some() {
        let v = 1.0 / s as f64;
        (vec![Group::new(v, s)], v)
    } else {
        let l1 = lambda1_min(p);
        let last = 1.0 - (s - 1) as f64 * l1;
        (vec![Group::new(l1, s - 1), Group::new(last, 1)], last)
    };
    let distribution = SchmidtDistribution::new(groups, 0.0, false)?;
    Ok(ExtremalConstruction {
        kind: ExtremalKind::Uniform,
        distribution,
        diagnostics: Diagnostics { mode_count: Some(s), smallest: Some(smallest), ..Diagnostics::default() },
    })
}

/// `√P` plus a tail of weight `1-√P`; the maximum-`λ₁` boundary.
pub fn build_peaked(purity: f64) -> Result<ExtremalConstruction> {
    let p = unit_interval("purity", purity)?;
    let l1 = p.sqrt();
    with_tail(ExtremalKind::Peaked, l1)
}

/// `λ₁` plus a tail of weight `1-λ₁`; the minimum-purity boundary `P = λ₁²`.
pub fn build_pmin_limit(lambda1: f64) -> Result<ExtremalConstruction> {
    let l1 = unit_interval("lambda1", lambda1)?;
    with_tail(ExtremalKind::PminLimit, l1)
}

fn with_tail(kind: ExtremalKind, l1: f64) -> Result<ExtremalConstruction> {
    let tail = if 1.0 - l1 <= CLAMP { 0.0 } else { 1.0 - l1 };
    let value = if tail == 0.0 { 1.0 } else { l1 };
    let distribution = SchmidtDistribution::new([Group::new(value, 1)], tail, false)?;
    Ok(ExtremalConstruction {
        kind,
        distribution,
        diagnostics: Diagnostics { tail_mass: Some(tail), ..Diagnostics::default() },
    })
}

/// `⌊1/λ₁⌋` copies of `λ₁` and the remainder; the maximum-purity boundary.
pub fn build_pmax(lambda1: f64) -> Result<ExtremalConstruction> {
    let l1 = unit_interval("lambda1", lambda1)?;
    let f = pmax_multiplicity(l1);
    let remainder = 1.0 - f as f64 * l1;
    let mut groups = vec![Group::new(l1, f)];
    if remainder > CLAMP {
        groups.push(Group::new(remainder, 1));
    }
    let distribution = SchmidtDistribution::new(groups, 0.0, false)?;
    Ok(ExtremalConstruction {
        kind: ExtremalKind::Pmax,
        distribution,
        diagnostics: Diagnostics {
            mode_count: Some(f + u64::from(remainder > CLAMP)),
            remainder: Some(remainder.max(0.0)),
            ..Diagnostics::default()
        },
    })
}

/// Dispatches on `kind`; each kind reads only the parameters it needs.
pub fn build(kind: ExtremalKind, lambda1: Option<f64>, purity: Option<f64>) -> Result<ExtremalConstruction> {
    let need = |x: Option<f64>, name: &str| {
        x.ok_or_else(|| Error::InvalidInput(format!("the {kind} distribution needs {name}")))
    };
    match kind {
        ExtremalKind::Max => build_lambda_max(need(lambda1, "lambda1")?, need(purity, "purity")?),
        ExtremalKind::Min => build_lambda_min(need(lambda1, "lambda1")?, need(purity, "purity")?),
        ExtremalKind::Uniform => build_uniform(need(purity, "purity")?),
        ExtremalKind::Peaked => build_peaked(need(purity, "purity")?),
        ExtremalKind::PminLimit => build_pmin_limit(need(lambda1, "lambda1")?),
        ExtremalKind::Pmax => build_pmax(need(lambda1, "lambda1")?),
    }
}
