//! Counting statistics of composites in a single Schmidt mode.
//!
//! The probability of `m` composites in a mode of weight `λ` is
//! `P(m) = λ^m h'_{N-m} / h_N`, where `h'` belongs to the distribution with
//! that one mode removed. `Σ_m λ^m h'_{N-m}` is itself `h_N`, so the
//! normalization of the pmf is an independent check on both series.

use serde::{Deserialize, Serialize};

use crate::chi::{grouped_h_series, Spectrum};
use crate::error::{Error, Result};
use crate::schmidt::SchmidtDistribution;
use crate::special::LogValue;

// exp(-745) is below the smallest subnormal double.
const LOG_UNDERFLOW: f64 = -745.0;

/// Picks one mode: `group` indexes the groups largest-first, `index` the copy within it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSelector {
    pub group: usize,
    pub index: u64,
}

impl ModeSelector {
    /// The first mode of the largest coefficient.
    pub const LARGEST: ModeSelector = ModeSelector { group: 0, index: 0 };

    fn resolve(self, d: &SchmidtDistribution) -> Result<f64> {
        match d.groups().get(self.group) {
            Some(g) if self.index < g.multiplicity => Ok(g.value),
            _ => Err(Error::NoSuchMode { group: self.group, index: self.index }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationPmf {
    pub mode_value: f64,
    pub n: u64,
    /// `P(m)` for `m = 0 … N`.
    pub pmf: Vec<f64>,
    pub mean: f64,
    pub fraction: f64,
}

/// Full and reduced `ln h` series for one mode, reusable for every `N` up to a maximum.
#[derive(Clone, Debug)]
pub struct OccupationCurve {
    mode_value: f64,
    full: Vec<f64>,
    reduced: Vec<f64>,
}

fn log_series(spectrum: &Spectrum<LogValue>, n: u64) -> Vec<f64> {
    grouped_h_series(spectrum, n).into_iter().map(LogValue::ln).collect()
}

impl OccupationCurve {
    pub fn new(d: &SchmidtDistribution, mode: ModeSelector, max_n: u64) -> Result<Self> {
        let mode_value = mode.resolve(d)?;
        let full = Spectrum::from_distribution(d);
        let mut reduced = full.clone();
        reduced.groups[mode.group].1 -= 1;
        reduced.groups.retain(|(_, k)| *k > 0);
        Ok(OccupationCurve { mode_value, full: log_series(&full, max_n), reduced: log_series(&reduced, max_n) })
    }

    pub fn max_n(&self) -> u64 {
        self.full.len() as u64 - 1
    }

    pub fn mode_value(&self) -> f64 {
        self.mode_value
    }

    fn check_n(&self, n: u64) -> Result<()> {
        if n < 1 {
            return Err(Error::InvalidInput("occupation statistics need N >= 1".into()));
        }
        if n > self.max_n() {
            return Err(Error::InvalidInput(format!("N = {n} beyond the prepared range {}", self.max_n())));
        }
        Ok(())
    }

    /// `ln P(m)` for `m = 0 … N`.
    fn log_pmf(&self, n: u64) -> impl Iterator<Item = f64> + '_ {
        let ln_l = self.mode_value.ln();
        let denom = self.full[n as usize];
        (0..=n).map(move |m| m as f64 * ln_l + self.reduced[(n - m) as usize] - denom)
    }

    pub fn pmf(&self, n: u64) -> Result<OccupationPmf> {
        self.check_n(n)?;
        let pmf: Vec<f64> =
            self.log_pmf(n).map(|lp| if lp < LOG_UNDERFLOW { 0.0 } else { lp.exp().min(1.0) }).collect();
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!("occupation pmf sums to {total}")));
        }
        let mean: f64 = pmf.iter().enumerate().map(|(m, p)| m as f64 * p).sum();
        Ok(OccupationPmf { mode_value: self.mode_value, n, pmf, mean, fraction: (mean / n as f64).clamp(0.0, 1.0) })
    }

    /// `⟨N⟩` in the mode, without materializing the pmf.
    pub fn mean(&self, n: u64) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.log_pmf(n).enumerate().filter(|(_, lp)| *lp >= LOG_UNDERFLOW).map(|(m, lp)| m as f64 * lp.exp()).sum())
    }

    /// `⟨N⟩ / N`.
    pub fn fraction(&self, n: u64) -> Result<f64> {
        Ok((self.mean(n)? / n as f64).clamp(0.0, 1.0))
    }
}

pub fn mode_occupation_pmf(d: &SchmidtDistribution, n: u64, mode: ModeSelector) -> Result<OccupationPmf> {
    OccupationCurve::new(d, mode, n)?.pmf(n)
}

/// Mean occupation and its fraction of `N`.
pub fn mean_occupation(d: &SchmidtDistribution, n: u64, mode: ModeSelector) -> Result<(f64, f64)> {
    let curve = OccupationCurve::new(d, mode, n)?;
    let mean = curve.mean(n)?;
    Ok((mean, (mean / n as f64).clamp(0.0, 1.0)))
}

/// Particle bookkeeping over all modes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SumRule {
    /// `Σ` of mean occupations over every finite mode.
    pub finite_modes: f64,
    /// What is left for the tail, `N - finite_modes`; zero without a tail.
    pub tail: f64,
}

impl SumRule {
    pub fn total(&self) -> f64 {
        self.finite_modes + self.tail
    }
}

pub fn occupation_sum_rule(d: &SchmidtDistribution, n: u64) -> Result<SumRule> {
    let finite_modes =
        group_means(d, n)?.iter().zip(d.groups()).map(|(mean, g)| mean * g.multiplicity as f64).sum::<f64>();
    let tail = if d.has_tail() { n as f64 - finite_modes } else { 0.0 };
    Ok(SumRule { finite_modes, tail })
}

fn group_means(d: &SchmidtDistribution, n: u64) -> Result<Vec<f64>> {
    (0..d.groups().len()).map(|group| mean_occupation(d, n, ModeSelector { group, index: 0 }).map(|(m, _)| m)).collect()
}

/// `1 + 2 Σ_j λ_j ⟨n_j⟩` over the finite modes.
///
/// Infinitesimal tail modes contribute nothing to the sum, since each carries
/// a vanishing weight while their total occupation stays below `N`.
pub fn commutator_from_occupations(d: &SchmidtDistribution, n: u64) -> Result<f64> {
    let weighted: f64 =
        group_means(d, n)?.iter().zip(d.groups()).map(|(mean, g)| g.value * g.multiplicity as f64 * mean).sum();
    Ok(1.0 + 2.0 * weighted)
}
