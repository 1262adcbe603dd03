//! Schmidt-coefficient distributions and the `(λ₁, P)` feasibility geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::LogValue;

/// Absolute tolerance on `Σλ + tail = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Values closer than this (relative) are merged into one group.
pub const MERGE_TOLERANCE: f64 = 1e-14;

// Relative slack for snapping ceil/floor arguments that are integers up to rounding.
const SNAP_TOLERANCE: f64 = 1e-12;

pub(crate) fn snapped(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP_TOLERANCE * r.abs().max(1.0)).then_some(r)
}

pub(crate) fn ceil_snapped(x: f64) -> u64 {
    snapped(x).unwrap_or_else(|| x.ceil()) as u64
}

pub(crate) fn floor_snapped(x: f64) -> u64 {
    snapped(x).unwrap_or_else(|| x.floor()) as u64
}

/// `multiplicity` equal Schmidt coefficients of size `value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub value: f64,
    #[serde(rename = "mult")]
    pub multiplicity: u64,
}

impl Group {
    pub fn new(value: f64, multiplicity: u64) -> Self {
        Group { value, multiplicity }
    }
}

/// Number of Schmidt modes in a distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModeCount {
    Finite(u64),
    /// Finitely many listed modes plus infinitely many infinitesimal ones.
    InfiniteTail {
        finite: u64,
    },
}

/// A validated multiset of Schmidt coefficients.
///
/// Coefficients are kept as groups of equal values in strictly descending
/// order. `tail_mass` is the total weight of infinitely many infinitesimal
/// coefficients: it counts towards normalization but contributes nothing to
/// any power sum `M(m)` with `m >= 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchmidtDistribution {
    groups: Vec<Group>,
    tail_mass: f64,
    lambda1: f64,
    purity: f64,
}

impl SchmidtDistribution {
    /// Builds a distribution from coefficient groups.
    ///
    /// Groups may arrive in any order and may repeat values; equal values are
    /// merged. With `normalize` set, coefficients and tail are rescaled to
    /// unit total instead of being rejected when they do not sum to one.
    pub fn new(groups: impl IntoIterator<Item = Group>, tail_mass: f64, normalize: bool) -> Result<Self> {
        let mut groups: Vec<Group> = groups.into_iter().collect();
        if groups.is_empty() {
            return Err(Error::InvalidInput("distribution needs at least one coefficient".into()));
        }
        for g in &groups {
            if !g.value.is_finite() || g.value < 0.0 {
                return Err(Error::InvalidInput(format!("Schmidt coefficient {} is negative or not finite", g.value)));
            }
            if g.value == 0.0 {
                return Err(Error::InvalidInput("Schmidt coefficients must be positive".into()));
            }
            if g.multiplicity == 0 {
                return Err(Error::InvalidInput("group multiplicity must be at least 1".into()));
            }
        }
        if !tail_mass.is_finite() || tail_mass < 0.0 {
            return Err(Error::InvalidInput(format!("tail mass {tail_mass} must be finite and non-negative")));
        }

        let total: f64 = groups.iter().map(|g| g.value * g.multiplicity as f64).sum::<f64>() + tail_mass;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidInput("total mass must be positive and finite".into()));
        }
        let mut tail_mass = tail_mass;
        if normalize {
            for g in &mut groups {
                g.value /= total;
            }
            tail_mass /= total;
        } else if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::NotNormalized { total });
        }
        if tail_mass >= 1.0 {
            return Err(Error::InvalidInput("tail mass must be below 1".into()));
        }

        groups.sort_by(|a, b| b.value.total_cmp(&a.value));
        let mut merged: Vec<Group> = Vec::with_capacity(groups.len());
        for g in groups {
            match merged.last_mut() {
                Some(prev) if prev.value - g.value <= MERGE_TOLERANCE * prev.value => {
                    prev.multiplicity += g.multiplicity;
                }
                _ => merged.push(g),
            }
        }

        let lambda1 = merged[0].value;
        let purity = merged.iter().map(|g| g.multiplicity as f64 * g.value * g.value).sum();
        Ok(SchmidtDistribution { groups: merged, tail_mass, lambda1, purity })
    }

    /// A finite distribution from a flat list of coefficients summing to one.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Group::new(v, 1)), 0.0, false)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn has_tail(&self) -> bool {
        self.tail_mass > 0.0
    }

    /// The largest Schmidt coefficient.
    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// `P = M(2)`.
    pub fn purity(&self) -> f64 {
        self.purity
    }

    pub fn total_modes(&self) -> ModeCount {
        let finite = self.groups.iter().map(|g| g.multiplicity).sum();
        if self.has_tail() {
            ModeCount::InfiniteTail { finite }
        } else {
            ModeCount::Finite(finite)
        }
    }

    /// Number of coefficients equal to `λ₁`.
    pub fn lambda1_multiplicity(&self) -> u64 {
        self.groups[0].multiplicity
    }

    /// Power sum `M(m) = Σ λⱼ^m`; the tail only enters `M(1) = 1`.
    pub fn power_sum(&self, m: u64) -> Result<f64> {
        match m {
            0 => Err(Error::InvalidInput("power sum order must be >= 1".into())),
            1 => Ok(1.0),
            _ => Ok(self.groups.iter().map(|g| g.multiplicity as f64 * g.value.powf(m as f64)).sum()),
        }
    }

    /// `ln M(m)` without underflow for large `m`.
    pub fn log_power_sum(&self, m: u64) -> Result<LogValue> {
        if m == 0 {
            return Err(Error::InvalidInput("power sum order must be >= 1".into()));
        }
        if m == 1 {
            return Ok(LogValue::ONE);
        }
        let terms: Vec<LogValue> = self
            .groups
            .iter()
            .map(|g| LogValue::from_ln((g.multiplicity as f64).ln() + m as f64 * g.value.ln()))
            .collect();
        Ok(crate::special::log_sum_exp(&terms))
    }

    /// Geometric measure of entanglement `1 - λ₁` and Schmidt number `1/P`.
    pub fn entanglement_measures(&self) -> EntanglementMeasures {
        EntanglementMeasures { geometric: 1.0 - self.lambda1, schmidt_number: 1.0 / self.purity }
    }

    /// Iterates over every individual finite coefficient, largest first.
    pub fn coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.groups.iter().flat_map(|g| std::iter::repeat_n(g.value, g.multiplicity as usize))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntanglementMeasures {
    /// `E_G = 1 - λ₁`.
    pub geometric: f64,
    /// `K = 1/P`.
    pub schmidt_number: f64,
}

/// The admissible interval of `λ₁` for a given purity, or of `P` for a given `λ₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FeasibilityRange {
    pub min: f64,
    pub max: f64,
}

impl FeasibilityRange {
    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.min - tol && x <= self.max + tol
    }
}

fn check_unit_interval(name: &str, x: f64) -> Result<f64> {
    if !(x > 0.0) || x > 1.0 + NORMALIZATION_TOLERANCE || !x.is_finite() {
        return Err(Error::InvalidInput(format!("{name} must lie in (0, 1], got {x}")));
    }
    Ok(x.min(1.0))
}

/// `[λ₁,min(P), √P]`.
pub fn feasible_lambda1_range(purity: f64) -> Result<FeasibilityRange> {
    let p = check_unit_interval("purity", purity)?;
    Ok(FeasibilityRange { min: lambda1_min(p), max: p.sqrt() })
}

/// `[λ₁², P_max(λ₁)]`.
pub fn feasible_purity_range(lambda1: f64) -> Result<FeasibilityRange> {
    let l1 = check_unit_interval("lambda1", lambda1)?;
    Ok(FeasibilityRange { min: l1 * l1, max: purity_max(l1) })
}

/// Mode count `S = ⌈1/P⌉` of the uniform distribution with purity `P`.
pub(crate) fn uniform_mode_count(p: f64) -> u64 {
    ceil_snapped(1.0 / p).max(1)
}

/// `λ₁,min(P) = (1/S)(√((PS-1)/(S-1)) + 1)`.
pub(crate) fn lambda1_min(p: f64) -> f64 {
    let s = uniform_mode_count(p);
    if s == 1 {
        return 1.0;
    }
    let s_f = s as f64;
    let excess = p * s_f - 1.0;
    // P·S = 1 up to representation error means P = 1/S exactly.
    let excess = if excess.abs() <= 1e-14 { 0.0 } else { excess.max(0.0) };
    ((excess / (s_f - 1.0)).sqrt() + 1.0) / s_f
}

/// `⌊1/λ₁⌋`, snapped so that e.g. `λ₁ = 1/3` gives 3.
pub(crate) fn pmax_multiplicity(l1: f64) -> u64 {
    floor_snapped(1.0 / l1).max(1)
}

/// `P_max(λ₁) = λ₁²⌊1/λ₁⌋ + (1 - λ₁⌊1/λ₁⌋)²`.
pub(crate) fn purity_max(l1: f64) -> f64 {
    let f = pmax_multiplicity(l1) as f64;
    let rest = (1.0 - l1 * f).max(0.0);
    l1 * l1 * f + rest * rest
}

/// The JSON form of a distribution accepted by the command line.
///
/// Either `{"values": [...]}` or
/// `{"groups": [{"value": v, "mult": k}, ...], "tail_mass": t, "normalize": b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistributionSpec {
    Values {
        values: Vec<f64>,
        #[serde(default)]
        tail_mass: f64,
        #[serde(default)]
        normalize: bool,
    },
    Groups {
        groups: Vec<Group>,
        #[serde(default)]
        tail_mass: f64,
        #[serde(default)]
        normalize: bool,
    },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<SchmidtDistribution> {
        match self {
            DistributionSpec::Values { values, tail_mass, normalize } => {
                SchmidtDistribution::new(values.iter().map(|&v| Group::new(v, 1)), *tail_mass, *normalize)
            }
            DistributionSpec::Groups { groups, tail_mass, normalize } => {
                SchmidtDistribution::new(groups.iter().copied(), *tail_mass, *normalize)
            }
        }
    }
}
