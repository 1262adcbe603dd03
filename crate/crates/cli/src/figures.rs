//! Figure data tables.
//!
//! fig3 defaults to the purities {1e-6, 1e-5, 1e-4}, which span the
//! admissible range at λ₁ = 8e-4.

use cobose_core::bounds::TightBounds;
use cobose_core::extremal::{build_lambda_max, build_lambda_min, ExtremalConstruction};
use cobose_core::occupation::{ModeSelector, OccupationCurve};
use rayon::prelude::*;

use crate::args::Figure;
use crate::commands::{bound_rows, Job, BOUND_COLUMNS};
use crate::error::{CliError, CliResult};
use crate::grid::log_grid;
use crate::source::Source;
use crate::table::{Cell, Table};

pub const FIG2_LAMBDA1: f64 = 0.31;
pub const FIG2_PURITY: f64 = 0.205;
pub const FIG3_LAMBDA1: f64 = 8e-4;
pub const FIG3_PURITIES: [f64; 3] = [1e-6, 1e-5, 1e-4];
pub const FIG4_PURITY: f64 = 1e-4;
pub const FIG4_LAMBDA1S: [f64; 5] = [1e-2, 8e-3, 4e-3, 1e-3, 1e-4];
pub const POINTS_PER_DECADE: u64 = 25;
/// Both figures sweep N over `1 … 10⁵`.
pub const DEFAULT_TOP_N: u64 = 100_000;

pub fn run(which: Figure, job: &Job) -> CliResult<Table> {
    job.require_grouped()?;
    if job.verify {
        return Err(CliError::parse("--verify applies to chi, ratio, bounds and occupation"));
    }
    let (lambda1, purity) = match &job.source {
        None => (None, None),
        Some(Source::Pair { lambda1, purity, .. }) => (*lambda1, *purity),
        Some(_) => return Err(CliError::parse("figures take --lambda1/--purity, not a distribution")),
    };
    match which {
        Figure::Fig2 => fig2(lambda1.unwrap_or(FIG2_LAMBDA1), purity.unwrap_or(FIG2_PURITY)),
        Figure::Fig3 => {
            let purities = purity.map_or(FIG3_PURITIES.to_vec(), |p| vec![p]);
            fig3(lambda1.unwrap_or(FIG3_LAMBDA1), &purities, &grid(job)?)
        }
        Figure::Fig4 => {
            let lambda1s = lambda1.map_or(FIG4_LAMBDA1S.to_vec(), |l| vec![l]);
            fig4(&lambda1s, purity.unwrap_or(FIG4_PURITY), &grid(job)?)
        }
    }
}

/// The requested N values, or the built-in log grid which the engine cap does not limit.
fn grid(job: &Job) -> CliResult<Vec<u64>> {
    match &job.ns {
        Some(ns) => {
            job.check_cap(*ns.last().expect("grids are non-empty"))?;
            if ns[0] < 1 {
                return Err(CliError::parse("figure sweeps need N >= 1"));
            }
            Ok(ns.clone())
        }
        None => Ok(log_grid(1, DEFAULT_TOP_N, POINTS_PER_DECADE)),
    }
}

fn construction_rows(name: &str, c: &ExtremalConstruction, table: &mut Table) {
    let d = &c.distribution;
    for g in d.groups() {
        table.push(vec![name.into(), "coefficient".into(), g.value.into(), g.multiplicity.into()]);
    }
    if d.has_tail() {
        table.push(vec![name.into(), "tail".into(), d.tail_mass().into(), Cell::Empty]);
    }
}

/// Coefficient lists of both extremal distributions.
pub fn fig2(lambda1: f64, purity: f64) -> CliResult<Table> {
    let mut table = Table::new(&["distribution", "kind", "value", "multiplicity"]);
    construction_rows("max", &build_lambda_max(lambda1, purity)?, &mut table);
    construction_rows("min", &build_lambda_min(lambda1, purity)?, &mut table);
    Ok(table)
}

/// Ratio bounds minus one, per purity and N.
pub fn fig3(lambda1: f64, purities: &[f64], ns: &[u64]) -> CliResult<Table> {
    let top = *ns.last().expect("grids are non-empty");
    let blocks: Vec<Vec<Vec<Cell>>> = purities
        .par_iter()
        .map(|&p| {
            let tight = TightBounds::new(lambda1, p, top)?;
            Ok(bound_rows(&tight, ns, 1.0)?
                .into_iter()
                .map(|row| [vec![Cell::Real(lambda1), Cell::Real(p)], row].concat())
                .collect())
        })
        .collect::<CliResult<_>>()?;
    let mut columns = vec!["lambda1", "purity"];
    columns.extend(BOUND_COLUMNS);
    let mut table = Table::new(&columns);
    blocks.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table)
}

/// Fraction of particles in the largest mode of both extremal distributions.
pub fn fig4(lambda1s: &[f64], purity: f64, ns: &[u64]) -> CliResult<Table> {
    let top = *ns.last().expect("grids are non-empty");
    let blocks: Vec<Vec<Vec<Cell>>> = lambda1s
        .par_iter()
        .map(|&l1| {
            let min = build_lambda_min(l1, purity)?.distribution;
            let max = build_lambda_max(l1, purity)?.distribution;
            let (min_curve, max_curve) = rayon::join(
                || OccupationCurve::new(&min, ModeSelector::LARGEST, top),
                || OccupationCurve::new(&max, ModeSelector::LARGEST, top),
            );
            let (min_curve, max_curve) = (min_curve?, max_curve?);
            let multiplicity = max.lambda1_multiplicity();
            ns.par_iter()
                .map(|&n| {
                    Ok(vec![
                        l1.into(),
                        n.into(),
                        min_curve.fraction(n)?.into(),
                        max_curve.fraction(n)?.into(),
                        multiplicity.into(),
                    ])
                })
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<_>>()?;
    let mut table = Table::new(&["lambda1", "n", "fraction_min", "fraction_max", "multiplicity_max"]);
    blocks.into_iter().flatten().for_each(|r| table.push(r));
    Ok(table)
}
