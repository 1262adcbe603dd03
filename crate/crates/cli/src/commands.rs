//! The table-producing commands.

use cobose_core::bounds::{TightBounds, ENGINE_MAX_N};
use cobose_core::chi::{chi_grouped, chi_recursive, ChiSeries};
use cobose_core::exact::chi_bruteforce_exact;
use cobose_core::occupation::{ModeSelector, OccupationCurve};
use cobose_core::schmidt::SchmidtDistribution;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::args::{Command, Engine, Flags};
use crate::error::{CliError, CliResult, Failure};
use crate::figures;
use crate::grid::{parse_count, parse_lin_grid, parse_log_grid};
use crate::source::Source;
use crate::table::{Cell, Table};

/// Relative disagreement tolerated by `--verify`.
pub const VERIFY_TOLERANCE: f64 = 1e-9;

/// A fully resolved invocation.
#[derive(Clone, Debug)]
pub struct Job {
    pub command: Command,
    pub source: Option<Source>,
    /// Requested particle numbers, ascending; `None` when no N flag was given.
    pub ns: Option<Vec<u64>>,
    /// True when the request was a single `--n`.
    pub single_n: bool,
    pub engine: Option<Engine>,
    pub verify: bool,
    pub max_n: Option<u64>,
    pub mode: ModeSelector,
}

impl Job {
    pub fn new(command: Command, flags: &Flags) -> CliResult<Job> {
        let given = [&flags.n, &flags.n_grid, &flags.n_lin].iter().filter(|f| f.is_some()).count();
        if given > 1 {
            return Err(CliError::parse("give only one of --n, --n-grid, --n-lin"));
        }
        let ns = match (&flags.n, &flags.n_grid, &flags.n_lin) {
            (Some(n), _, _) => Some(vec![parse_count(n)?]),
            (_, Some(g), _) => Some(parse_log_grid(g)?),
            (_, _, Some(g)) => Some(parse_lin_grid(g)?),
            _ => None,
        };
        Ok(Job {
            command,
            source: Source::from_flags(flags)?,
            ns,
            single_n: flags.n.is_some(),
            engine: flags.engine,
            verify: flags.verify,
            max_n: flags.max_n.as_deref().map(parse_count).transpose()?,
            mode: ModeSelector { group: flags.mode_group.unwrap_or(0), index: flags.mode_index.unwrap_or(0) },
        })
    }

    pub fn run(&self) -> CliResult<Table> {
        match self.command {
            Command::Chi => self.chi(),
            Command::Ratio => self.ratio(),
            Command::Bounds => self.bounds(),
            Command::Occupation => self.occupation(),
            Command::Figure { which } => figures::run(which, self),
        }
    }

    pub fn cap(&self) -> u64 {
        self.max_n.unwrap_or(ENGINE_MAX_N)
    }

    /// Fails with the resource-cap exit code when `top` exceeds the engine cap.
    pub fn check_cap(&self, top: u64) -> CliResult<()> {
        if top > self.cap() {
            return Err(CliError::new(
                Failure::ResourceCap,
                format!("N = {top} exceeds the engine cap {} (raise it with --max-n)", self.cap()),
            ));
        }
        Ok(())
    }

    fn requested_ns(&self) -> CliResult<&[u64]> {
        let ns = self.ns.as_deref().ok_or_else(|| CliError::parse("give --n, --n-grid or --n-lin"))?;
        self.check_cap(*ns.last().expect("grids are non-empty"))?;
        Ok(ns)
    }

    fn source(&self) -> CliResult<&Source> {
        self.source.as_ref().ok_or_else(|| CliError::parse("give --values, --groups or --lambda1/--purity"))
    }

    /// Commands other than chi/ratio always run the grouped engine.
    pub fn require_grouped(&self) -> CliResult<()> {
        match self.engine {
            None | Some(Engine::Grouped) => Ok(()),
            Some(other) => {
                Err(CliError::parse(format!("--engine {other:?} only applies to chi and ratio").to_lowercase()))
            }
        }
    }

    /// `ln χ_n` for `n = 0 … top` from one engine.
    fn log_chi(&self, engine: Engine, top: u64) -> CliResult<Vec<f64>> {
        let source = self.source()?;
        let from_series = |s: ChiSeries| (0..=top).map(|n| s.log_chi(n)).collect();
        Ok(match engine {
            Engine::Grouped => from_series(chi_grouped(&source.distribution()?, top)),
            Engine::Recursive => from_series(chi_recursive(&source.distribution()?, top)),
            Engine::Oracle => {
                let exact = source.exact()?;
                (0..=top)
                    .map(|n| {
                        let chi = chi_bruteforce_exact(&exact, n)?;
                        Ok(chi.to_f64().unwrap_or(f64::NAN).ln())
                    })
                    .collect::<CliResult<_>>()?
            }
        })
    }

    /// `ln χ_n` from the chosen engine, checked against a second one under `--verify`.
    fn checked_log_chi(&self, top: u64) -> CliResult<Vec<f64>> {
        let engine = self.engine.unwrap_or_default();
        let logs = self.log_chi(engine, top)?;
        if self.verify {
            let other = match engine {
                Engine::Grouped => Engine::Recursive,
                Engine::Recursive | Engine::Oracle => Engine::Grouped,
            };
            let check = self.log_chi(other, top)?;
            for (n, (a, b)) in logs.iter().zip(&check).enumerate() {
                verify_close(&format!("chi at N = {n}"), log_relative_diff(*a, *b))?;
            }
        }
        Ok(logs)
    }

    fn chi(&self) -> CliResult<Table> {
        let ns = self.requested_ns()?;
        let top = *ns.last().unwrap();
        let logs = self.checked_log_chi(top)?;
        let mut table = Table::new(&["n", "log_chi", "chi", "ratio"]);
        for &n in ns {
            let i = n as usize;
            let ratio = logs.get(i + 1).map(|next| (next - logs[i]).exp());
            table.push(vec![n.into(), logs[i].into(), logs[i].exp().into(), ratio.into()]);
        }
        Ok(table)
    }

    fn ratio(&self) -> CliResult<Table> {
        let ns = self.requested_ns()?;
        let top = *ns.last().unwrap();
        let logs = self.checked_log_chi(top + 1)?;
        let mut table = Table::new(&["n", "ratio", "commutator"]);
        for &n in ns {
            let r = (logs[n as usize + 1] - logs[n as usize]).exp();
            table.push(vec![n.into(), r.into(), (2.0 * r - 1.0).into()]);
        }
        Ok(table)
    }

    /// `(λ₁, P)` from an explicit pair or from a distribution.
    fn lambda1_purity(&self) -> CliResult<(f64, f64)> {
        match self.source()? {
            Source::Pair { lambda1: Some(l1), purity: Some(p), .. } => Ok((*l1, *p)),
            Source::Pair { .. } => Err(CliError::parse("bounds need both --lambda1 and --purity")),
            other => {
                let d = other.distribution()?;
                Ok((d.lambda1(), d.purity()))
            }
        }
    }

    fn bounds(&self) -> CliResult<Table> {
        self.require_grouped()?;
        let ns = self.requested_ns()?;
        if ns[0] < 1 {
            return Err(CliError::parse("bounds need N >= 1"));
        }
        let (l1, p) = self.lambda1_purity()?;
        let tight = TightBounds::new(l1, p, *ns.last().unwrap())?;
        if self.verify {
            verify_tight(&tight, ns)?;
        }
        let rows = bound_rows(&tight, ns, 0.0)?;
        let mut table = Table::new(&BOUND_COLUMNS);
        rows.into_iter().for_each(|r| table.push(r));
        Ok(table)
    }

    fn occupation(&self) -> CliResult<Table> {
        self.require_grouped()?;
        let ns = self.requested_ns()?;
        if ns[0] < 1 {
            return Err(CliError::parse("occupation statistics need N >= 1"));
        }
        let d = self.source()?.distribution()?;
        let top = *ns.last().unwrap();
        let curve = OccupationCurve::new(&d, self.mode, top)?;
        if self.verify {
            verify_means(&d, &curve, self.mode, ns)?;
        }
        if self.single_n {
            let pmf = curve.pmf(top)?;
            let mut table = Table::new(&["m", "prob"]);
            for (m, prob) in pmf.pmf.iter().enumerate() {
                table.push(vec![(m as u64).into(), (*prob).into()]);
            }
            table.trailer = vec![("mean".into(), pmf.mean.into()), ("fraction".into(), pmf.fraction.into())];
            return Ok(table);
        }
        let rows: Vec<Vec<Cell>> = ns
            .par_iter()
            .map(|&n| Ok(vec![n.into(), curve.mean(n)?.into(), curve.fraction(n)?.into()]))
            .collect::<CliResult<_>>()?;
        let mut table = Table::new(&["n", "mean", "fraction"]);
        rows.into_iter().for_each(|r| table.push(r));
        Ok(table)
    }
}

pub const BOUND_COLUMNS: [&str; 9] =
    ["n", "tight_lo", "tight_hi", "p_lo", "p_mid", "p_cap", "l1_floor", "l1_mid", "l1_hi"];

/// One row of ratio bounds per N, each reduced by `shift`.
pub fn bound_rows(tight: &TightBounds, ns: &[u64], shift: f64) -> CliResult<Vec<Vec<Cell>>> {
    ns.par_iter()
        .map(|&n| {
            let b = tight.bundle(n)?;
            let (pb, lb) = (b.purity_bounds, b.lambda1_bounds);
            let mut row = vec![Cell::Int(n)];
            row.extend(
                [b.ratio_tight_lower, b.ratio_tight_upper, pb.lower, pb.middle, pb.cap, lb.floor, lb.middle, lb.upper]
                    .map(|v| Cell::Real(v - shift)),
            );
            Ok(row)
        })
        .collect()
}

/// Relative difference of two values given by their logarithms.
fn log_relative_diff(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).exp_m1().abs()
    }
}

fn verify_close(what: &str, relative: f64) -> CliResult<()> {
    if relative.is_nan() || relative > VERIFY_TOLERANCE {
        return Err(CliError::new(
            Failure::VerifyMismatch,
            format!("engines disagree on {what}: relative difference {relative:e}"),
        ));
    }
    Ok(())
}

fn verify_tight(tight: &TightBounds, ns: &[u64]) -> CliResult<()> {
    let top = *ns.last().unwrap();
    for (name, c) in [("lower", tight.minimizer()), ("upper", tight.maximizer())] {
        let check = chi_recursive(&c.distribution, top + 1);
        for &n in ns {
            let (lo, hi) = tight.ratio_range(n)?;
            let want = if name == "lower" { lo } else { hi };
            verify_close(&format!("the tight {name} bound at N = {n}"), (check.ratio(n).unwrap() / want - 1.0).abs())?;
        }
    }
    Ok(())
}

/// `⟨n_j⟩ = Σ_{k≥1} λ_j^k h_{N-k} / h_N`, from the recursive engine.
fn verify_means(d: &SchmidtDistribution, curve: &OccupationCurve, mode: ModeSelector, ns: &[u64]) -> CliResult<()> {
    let top = *ns.last().unwrap();
    let series = chi_recursive(d, top);
    let ln_l = d.groups()[mode.group].value.ln();
    for &n in ns {
        let mean: f64 = (1..=n).map(|k| (k as f64 * ln_l + series.log_h(n - k) - series.log_h(n)).exp()).sum();
        let got = curve.mean(n)?;
        let scale = got.abs().max(mean.abs()).max(f64::MIN_POSITIVE);
        verify_close(&format!("the mean occupation at N = {n}"), (got - mean).abs() / scale)?;
    }
    Ok(())
}
