//! The normalization factor `χ_N` and its ratio series.
//!
//! `χ_N = N! · h_N(λ)`, where `h_N` is the complete homogeneous symmetric
//! polynomial of degree `N` in the Schmidt coefficients. The engines below
//! compute the whole prefix `h_0 … h_N` at once; [`ChiSeries`] stores
//! `ln h_n` and adds `ln n!` on demand, which keeps ratios like
//! `χ_{n+1}/χ_n = (n+1) h_{n+1}/h_n` free of huge cancelling logarithms.
//!
//! Two engines share the same scalar-generic code, so they run both on
//! [`LogValue`] (production) and on exact rationals (validation):
//!
//! * [`chi_recursive`]: the Newton-Girard recursion `n h_n = Σ_m M(m) h_{n-m}`.
//! * [`chi_grouped`]: closed forms for each group of equal coefficients,
//!   `h_n = λⁿ C(n+S-1, S-1)`, the infinitesimal tail `h_n = λ_Σⁿ / n!`, and
//!   binomial convolution between groups. A group of small multiplicity is
//!   folded in one mode at a time via `h_n ← h_n + λ h_{n-1}`, which is the
//!   same convolution with a single-mode factor and costs `O(N)` instead of
//!   `O(N²)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::schmidt::SchmidtDistribution;
use crate::special::{log_factorial, LogValue};

/// Arithmetic needed by the χ engines.
pub trait ChiScalar: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    /// Multiplication by the exact ratio `num / den`.
    fn ratio(&self, num: u64, den: u64) -> Self;
    fn power(&self, n: u64) -> Self;

    /// `Σ_{i=0}^{n} a[i] · b[n-i]`.
    fn convolve_at(a: &[Self], b: &[Self], n: usize) -> Self {
        (0..=n).fold(Self::zero(), |acc, i| acc.plus(&a[i].times(&b[n - i])))
    }
}

impl ChiScalar for LogValue {
    fn zero() -> Self {
        LogValue::ZERO
    }

    fn one() -> Self {
        LogValue::ONE
    }

    fn plus(&self, other: &Self) -> Self {
        *self + *other
    }

    fn times(&self, other: &Self) -> Self {
        *self * *other
    }

    fn ratio(&self, num: u64, den: u64) -> Self {
        self.scale(num, den)
    }

    fn power(&self, n: u64) -> Self {
        self.powi(n)
    }

    fn convolve_at(a: &[Self], b: &[Self], n: usize) -> Self {
        let mut max = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = a[i].ln() + b[n - i].ln();
            if t > max {
                max = t;
            }
        }
        if max == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        let mut s = 0.0;
        for i in 0..=n {
            s += (a[i].ln() + b[n - i].ln() - max).exp();
        }
        LogValue::from_ln(max + s.ln())
    }
}

/// An unnormalized multiset of coefficients: groups `(value, multiplicity)`
/// plus an optional infinitesimal tail of total weight `tail`.
///
/// Engines work on spectra rather than on [`SchmidtDistribution`] because
/// counting statistics need the distribution with one mode removed.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum<T> {
    pub groups: Vec<(T, u64)>,
    pub tail: Option<T>,
}

impl Spectrum<LogValue> {
    pub fn from_distribution(d: &SchmidtDistribution) -> Self {
        Spectrum {
            groups: d.groups().iter().map(|g| (LogValue::from_f64(g.value), g.multiplicity)).collect(),
            tail: d.has_tail().then(|| LogValue::from_f64(d.tail_mass())),
        }
    }
}

impl<T: ChiScalar> Spectrum<T> {
    /// `M(m)`; the tail only contributes at `m = 1`.
    pub fn power_sum(&self, m: u64) -> T {
        let mut total = self.groups.iter().fold(T::zero(), |acc, (v, k)| acc.plus(&v.power(m).ratio(*k, 1)));
        if m == 1 {
            if let Some(t) = &self.tail {
                total = total.plus(t);
            }
        }
        total
    }
}

/// `h_k = λ^k C(k+S-1, S-1)` for `S` equal coefficients.
fn group_series<T: ChiScalar>(value: &T, mult: u64, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    let mut binom = T::one();
    out.push(T::one());
    for k in 1..len as u64 {
        binom = binom.ratio(k + mult - 1, k);
        out.push(binom.times(&value.power(k)));
    }
    out
}

/// `h_k = λ_Σ^k / k!` for the infinitesimal tail.
fn tail_series<T: ChiScalar>(tail: &T, len: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(len);
    out.push(T::one());
    for k in 1..len {
        let next = out[k - 1].times(tail).ratio(1, k as u64);
        out.push(next);
    }
    out
}

/// Multiplies the generating function by `1/(1 - λt)`.
fn fold_single_mode<T: ChiScalar>(acc: &mut [T], value: &T) {
    for k in 1..acc.len() {
        let carried = value.times(&acc[k - 1]);
        acc[k] = acc[k].plus(&carried);
    }
}

/// `h_0 … h_n` by closed-form groups and convolution.
pub fn grouped_h_series<T: ChiScalar>(spectrum: &Spectrum<T>, n: u64) -> Vec<T> {
    let len = n as usize + 1;
    let mut groups: Vec<&(T, u64)> = spectrum.groups.iter().filter(|(_, k)| *k > 0).collect();
    groups.sort_by_key(|g| std::cmp::Reverse(g.1));

    let mut acc: Option<Vec<T>> = spectrum.tail.as_ref().map(|t| tail_series(t, len));
    for (value, mult) in groups {
        acc = Some(match acc {
            None => group_series(value, *mult, len),
            Some(mut a) if (*mult as u128) * 2 <= len as u128 => {
                for _ in 0..*mult {
                    fold_single_mode(&mut a, value);
                }
                a
            }
            Some(a) => {
                let g = group_series(value, *mult, len);
                (0..len).map(|k| T::convolve_at(&a, &g, k)).collect()
            }
        });
    }
    acc.unwrap_or_else(|| {
        let mut id = vec![T::zero(); len];
        id[0] = T::one();
        id
    })
}

/// `h_0 … h_n` by the Newton-Girard recursion.
pub fn recursive_h_series<T: ChiScalar>(spectrum: &Spectrum<T>, n: u64) -> Vec<T> {
    let sums: Vec<T> = (1..=n).map(|m| spectrum.power_sum(m)).collect();
    h_from_power_sums(&sums)
}

/// `h_0 … h_n` from `M(1) … M(n)`.
fn h_from_power_sums<T: ChiScalar>(sums: &[T]) -> Vec<T> {
    let len = sums.len() + 1;
    let mut h = Vec::with_capacity(len);
    h.push(T::one());
    for k in 1..len {
        // Σ_{m=1}^{k} M(m) h_{k-m}
        let s = T::convolve_at(&sums[..k], &h, k - 1);
        h.push(s.ratio(1, k as u64));
    }
    h
}

/// `χ_0 … χ_N` of one distribution, stored as `ln(χ_n / n!)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSeries {
    log_h: Vec<f64>,
}

impl ChiSeries {
    pub(crate) fn from_h(h: Vec<LogValue>) -> Self {
        ChiSeries { log_h: h.into_iter().map(LogValue::ln).collect() }
    }

    /// Largest `n` in the series.
    pub fn max_n(&self) -> u64 {
        self.log_h.len() as u64 - 1
    }

    /// `ln h_n = ln(χ_n / n!)`.
    pub fn log_h(&self, n: u64) -> f64 {
        self.log_h[n as usize]
    }

    pub fn log_chi(&self, n: u64) -> f64 {
        self.log_h[n as usize] + log_factorial(n)
    }

    pub fn chi(&self, n: u64) -> LogValue {
        LogValue::from_ln(self.log_chi(n))
    }

    /// `χ_{n+1} / χ_n`, if `n+1` is in the series.
    pub fn ratio(&self, n: u64) -> Option<f64> {
        let i = n as usize;
        (i + 1 < self.log_h.len()).then(|| (n + 1) as f64 * (self.log_h[i + 1] - self.log_h[i]).exp())
    }

    /// `ln(χ_{n+1} / χ_n)`.
    pub fn log_ratio(&self, n: u64) -> Option<f64> {
        let i = n as usize;
        (i + 1 < self.log_h.len()).then(|| ((n + 1) as f64).ln() + self.log_h[i + 1] - self.log_h[i])
    }

    pub fn values(&self) -> impl Iterator<Item = LogValue> + '_ {
        (0..=self.max_n()).map(|n| self.chi(n))
    }
}

/// Newton-Girard engine, `O(N²)`.
pub fn chi_recursive(d: &SchmidtDistribution, n: u64) -> ChiSeries {
    let sums: Vec<LogValue> = (1..=n).map(|m| d.log_power_sum(m).expect("order >= 1")).collect();
    ChiSeries::from_h(h_from_power_sums(&sums))
}

/// Grouped closed-form engine.
pub fn chi_grouped(d: &SchmidtDistribution, n: u64) -> ChiSeries {
    chi_grouped_spectrum(&Spectrum::from_distribution(d), n)
}

pub fn chi_grouped_spectrum(spectrum: &Spectrum<LogValue>, n: u64) -> ChiSeries {
    ChiSeries::from_h(grouped_h_series(spectrum, n))
}

/// `χ_{n+1}/χ_n` for every `n` the series allows.
pub fn normalization_ratio_series(series: &ChiSeries) -> Result<Vec<f64>> {
    if series.max_n() < 1 {
        return Err(Error::InvalidInput("ratio series needs at least two χ values".into()));
    }
    Ok((0..series.max_n()).map(|n| series.ratio(n).unwrap()).collect())
}

/// `⟨N|[c, c†]|N⟩ = 2 χ_{N+1}/χ_N - 1`.
pub fn commutator_expectation(d: &SchmidtDistribution, n: u64) -> f64 {
    let series = chi_grouped(d, n + 1);
    2.0 * series.ratio(n).unwrap() - 1.0
}
