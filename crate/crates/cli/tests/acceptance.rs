//! Acceptance criteria, one pass/fail line each.
//!
//! Run with `cargo test -p cobose-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use cobose_core::bounds::{
    check_hierarchy, chi_closed_form, lambda1_bounds, purity_bounds, ClosedFormKind, TightBounds,
};
use cobose_core::chi::{chi_grouped, chi_recursive};
use cobose_core::exact::{
    chi_bruteforce_exact, chi_grouped_exact, chi_recursive_exact, parse_rational, ExactDistribution,
};
use cobose_core::extremal::{
    build_lambda_max, build_lambda_min, build_peaked, build_pmax, build_pmin_limit, build_uniform,
};
use cobose_core::occupation::{mode_occupation_pmf, occupation_sum_rule, ModeSelector, OccupationCurve};
use cobose_core::schmidt::{Group, SchmidtDistribution};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn within(limit: Duration, elapsed: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn random_rational(rng: &mut ChaCha8Rng) -> ExactDistribution {
    let s = rng.gen_range(1..=6);
    let weights: Vec<u32> = (0..s).map(|_| rng.gen_range(1..=12)).collect();
    let total: u32 = weights.iter().sum();
    let text: Vec<String> = weights.iter().map(|w| format!("{w}/{total}")).collect();
    let refs: Vec<&str> = text.iter().map(String::as_str).collect();
    ExactDistribution::parse(&refs).unwrap()
}

fn random_distribution(rng: &mut ChaCha8Rng, tailed: bool) -> SchmidtDistribution {
    let s = rng.gen_range(1..=8);
    let tail = if tailed { rng.gen_range(0.0..0.9) } else { 0.0 };
    let w: Vec<f64> = (0..s).map(|_| rng.gen_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let groups = w.iter().map(|x| Group::new(x / total * (1.0 - tail), rng.gen_range(1..=3)));
    SchmidtDistribution::new(groups, tail, true).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let d = random_rational(&mut rng);
        let (recursive, grouped) = (chi_recursive_exact(&d, 8), chi_grouped_exact(&d, 8));
        let float = d.to_distribution().unwrap();
        let (rec_f, grp_f) = (chi_recursive(&float, 8), chi_grouped(&float, 8));
        for n in 0..=8u64 {
            let oracle = chi_bruteforce_exact(&d, n).unwrap();
            let i = n as usize;
            ensure(recursive[i] == oracle && grouped[i] == oracle, || format!("case {case}, N = {n}: exact mismatch"))?;
            let want = oracle.to_f64().unwrap();
            for got in [rec_f.chi(n).to_f64(), grp_f.chi(n).to_f64()] {
                worst = worst.max(rel(got, want));
            }
        }
    }
    ensure(worst <= 1e-12, || format!("log-mode relative error {worst:e} > 1e-12"))?;
    within(Duration::from_secs(30), start.elapsed())?;
    Ok(format!("200 distributions, N <= 8, exact match, log-mode error {worst:.1e}"))
}

fn chi_two_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for case in 0..100 {
        let d = random_distribution(&mut rng, case % 2 == 0);
        let purity: f64 = d.groups().iter().map(|g| g.multiplicity as f64 * g.value * g.value).sum();
        for chi2 in [chi_grouped(&d, 2).chi(2).to_f64(), chi_recursive(&d, 2).chi(2).to_f64()] {
            worst = worst.max(rel(chi2, 1.0 + purity));
        }
    }
    ensure(worst <= 1e-12, || format!("relative error {worst:e}"))?;
    Ok(format!("100 distributions, half with tails, error {worst:.1e}"))
}

fn ratio_hierarchy() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = [f64::INFINITY; 4];
    for case in 0..500 {
        let d = random_distribution(&mut rng, case % 2 == 1);
        let report = check_hierarchy(&chi_grouped(&d, 60)).unwrap();
        for (w, s) in worst.iter_mut().zip(report.worst_slack) {
            *w = w.min(s);
        }
        ensure(report.passed(), || format!("case {case}: slacks {:?}", report.worst_slack))?;
    }
    let single = chi_grouped_exact(&ExactDistribution::parse(&["1"]).unwrap(), 61);
    for n in 0..61usize {
        let factor = parse_rational(&(n + 1).to_string()).unwrap();
        ensure(single[n + 1] == &single[n] * factor, || format!("single mode: ratio at N = {n} is not N+1"))?;
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!(
        "500 distributions to N = 60, worst slacks {:.1e} {:.1e} {:.1e} {:.1e}; single mode exact",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn extremal_sandwich() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst = f64::INFINITY;
    let mut worst_one = 0.0f64;
    for case in 0..200 {
        let d = random_distribution(&mut rng, case % 3 == 0);
        let series = chi_grouped(&d, 100);
        let bounds = TightBounds::new(d.lambda1(), d.purity(), 100).unwrap();
        for n in 0..=100 {
            let (lo, hi) = bounds.chi_range(n).unwrap();
            let v = series.log_chi(n);
            worst = worst.min(v - lo.ln()).min(hi.ln() - v);
        }
        let (lo, hi) = bounds.ratio_range(1).unwrap();
        worst_one = worst_one.max(rel(lo, 1.0 + d.purity())).max(rel(hi, 1.0 + d.purity()));
    }
    ensure(worst >= -1e-9, || format!("log-slack {worst:e} < -1e-9"))?;
    ensure(worst_one <= 1e-12, || format!("N = 1 bounds differ from 1+P by {worst_one:e}"))?;
    Ok(format!("200 distributions, N <= 100, worst log-slack {worst:.1e}; N = 1 error {worst_one:.1e}"))
}

fn closed_forms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut worst = 0.0f64;
    let kinds = [ClosedFormKind::Uniform, ClosedFormKind::Peaked, ClosedFormKind::PminLimit, ClosedFormKind::Pmax];
    for kind in kinds {
        for point in 0..50 {
            let a = 10f64.powf(rng.gen_range(-3.0..0.0));
            let d = match kind {
                ClosedFormKind::Uniform => build_uniform(a),
                ClosedFormKind::Peaked => build_peaked(a),
                ClosedFormKind::PminLimit => build_pmin_limit(a),
                _ => build_pmax(a),
            }
            .unwrap()
            .distribution;
            let series = chi_grouped(&d, 300);
            for n in 0..=300 {
                let closed = chi_closed_form(kind, a, n).unwrap().ln();
                let err = (closed - series.log_chi(n)).exp_m1().abs();
                ensure(err <= 1e-10, || format!("{kind}({a}) point {point}, N = {n}: relative error {err:e}"))?;
                worst = worst.max(err);
            }
        }
    }
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!("4 closed forms x 50 points, N <= 300, worst error {worst:.1e}"))
}

fn fig3_regimes() -> Outcome {
    let start = Instant::now();
    let l1 = 8e-4;
    let top = 100_000u64;
    let mut notes = Vec::new();
    for p in [1e-6f64, 1e-5, 1e-4] {
        let tight = TightBounds::new(l1, p, top).unwrap();
        let bosonic_end = (0.1 / p.sqrt()).floor() as u64;
        for n in 1..=bosonic_end {
            let (_, hi) = tight.ratio_range(n).unwrap();
            ensure(hi - 1.0 < 1.0, || format!("P = {p}, N = {n}: upper ratio - 1 = {}", hi - 1.0))?;
        }
        let super_start = (10.0 / l1).ceil() as u64;
        for n in super_start..=top {
            let (lo, _) = tight.ratio_range(n).unwrap();
            ensure(lo - 1.0 > 1.0, || format!("P = {p}, N = {n}: lower ratio - 1 = {}", lo - 1.0))?;
        }
        let n = (100.0 / p.sqrt()).round() as u64;
        let b = purity_bounds(p, n).unwrap();
        let gap = rel(b.middle, p.sqrt() * n as f64 + 1.0);
        ensure(gap < 0.01, || format!("P = {p}: purity middle off by {:.3}% at N = {n}", 100.0 * gap))?;
        notes.push(format!("{:.2}%", 100.0 * gap));
    }
    let n = (100.0 / l1).round() as u64;
    let b = lambda1_bounds(l1, n).unwrap();
    let gap = rel(b.middle, l1 * n as f64 + 1.0);
    ensure(gap < 0.01, || format!("λ₁ middle off by {:.3}% at N = {n}", 100.0 * gap))?;
    within(Duration::from_secs(60), start.elapsed())?;
    Ok(format!(
        "λ₁ = 8e-4, P in {{1e-6, 1e-5, 1e-4}}; regimes hold to N = 1e5; purity middles {}; λ₁ middle {:.2}%",
        notes.join(" "),
        100.0 * gap
    ))
}

fn fig4_condensation() -> Outcome {
    let start = Instant::now();
    let p = 1e-4;
    let min = build_lambda_min(0.01, p).unwrap().distribution;
    let curve = OccupationCurve::new(&min, ModeSelector::LARGEST, 1000).unwrap();
    let (at10, at1000) = (curve.fraction(10).unwrap(), curve.fraction(1000).unwrap());
    ensure(rel(at10, 0.01) <= 0.3, || format!("minimizer fraction {at10} at N = 10"))?;
    ensure(at1000 >= 0.9, || format!("minimizer fraction {at1000} at N = 1000"))?;

    let mut plateaus = Vec::new();
    let mut multiplicities = Vec::new();
    for l1 in [1e-2, 8e-3, 4e-3, 1e-3, 1e-4] {
        let d = build_lambda_max(l1, p).unwrap().distribution;
        let k = d.lambda1_multiplicity();
        multiplicities.push(k);
        let n = (50.0 / l1).round() as u64;
        let f = OccupationCurve::new(&d, ModeSelector::LARGEST, n).unwrap().fraction(n).unwrap();
        let off = (f * k as f64 - 1.0).abs();
        ensure(off <= 0.2, || format!("λ₁ = {l1}: plateau {f} vs 1/{k}"))?;
        plateaus.push(format!("{:.0}%", 100.0 * off));
    }
    ensure(multiplicities == [1, 1, 6, 100, 10_000], || format!("multiplicities {multiplicities:?}"))?;

    let uniform = build_uniform(p).unwrap().distribution;
    let curve = OccupationCurve::new(&uniform, ModeSelector::LARGEST, 1000).unwrap();
    let fractions: Vec<f64> = (1..=1000).map(|n| curve.fraction(n).unwrap()).collect();
    let spread = fractions.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(spread < 1e-10, || format!("uniform fraction varies by {spread:e}"))?;
    within(Duration::from_secs(120), start.elapsed())?;
    Ok(format!(
        "minimizer {at10:.4} -> {at1000:.3}; multiplicities {multiplicities:?}; plateau offsets {}; uniform spread {spread:.1e}",
        plateaus.join(" ")
    ))
}

fn counting_statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut worst_sum = 0.0f64;
    for case in 0..100 {
        let d = random_distribution(&mut rng, case % 2 == 0);
        let n = rng.gen_range(1..=200);
        let group = rng.gen_range(0..d.groups().len());
        let pmf = mode_occupation_pmf(&d, n, ModeSelector { group, index: 0 }).unwrap();
        worst_sum = worst_sum.max((pmf.pmf.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst_sum <= 1e-10, || format!("pmf sum off by {worst_sum:e}"))?;

    let two = SchmidtDistribution::from_values(&[0.5, 0.5]).unwrap();
    let mut worst_flat = 0.0f64;
    for n in 1..=50u64 {
        let pmf = mode_occupation_pmf(&two, n, ModeSelector::LARGEST).unwrap();
        for p in pmf.pmf {
            worst_flat = worst_flat.max((p - 1.0 / (n + 1) as f64).abs());
        }
    }
    ensure(worst_flat <= 1e-12, || format!("uniform S = 2 pmf off by {worst_flat:e}"))?;

    let mut worst_rule = 0.0f64;
    for _ in 0..50 {
        let d = random_distribution(&mut rng, false);
        let n = rng.gen_range(1..=200);
        let rule = occupation_sum_rule(&d, n).unwrap();
        worst_rule = worst_rule.max(rel(rule.total(), n as f64));
    }
    ensure(worst_rule <= 1e-8, || format!("sum rule off by {worst_rule:e}"))?;
    Ok(format!("pmf sums {worst_sum:.1e}; flat pmf {worst_flat:.1e}; sum rule {worst_rule:.1e}"))
}

fn cli_output(args: &[&str], threads: &str) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_cobose")).args(args).env("RAYON_NUM_THREADS", threads).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn determinism() -> Outcome {
    let jobs: [&[&str]; 5] = [
        &["figure", "fig3", "--n-grid", "1:10000:25"],
        &["figure", "fig4", "--purity", "1e-4", "--n-grid", "1:10000:25"],
        &["bounds", "--lambda1", "0.01", "--purity", "2e-4", "--n-grid", "1:10000:25", "--format", "json"],
        &[
            "occupation",
            "--groups",
            r#"{"groups": [{"value": 0.1, "mult": 3}], "tail_mass": 0.7}"#,
            "--n-lin",
            "1:2000:7",
        ],
        &["chi", "--values", "0.4,0.3,0.2,0.1", "--n-grid", "1:5000:10", "--verify"],
    ];
    let mut bytes = 0;
    for job in jobs {
        let reference = cli_output(job, "1");
        for threads in ["1", "4", "16"] {
            ensure(cli_output(job, threads) == reference, || format!("{job:?} differs with {threads} threads"))?;
        }
        bytes += reference.len();
    }
    Ok(format!("5 jobs x 4 runs on 1, 4 and 16 threads, {bytes} bytes identical"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("chi_2 = 1 + P", chi_two_identity),
        ("ratio hierarchy", ratio_hierarchy),
        ("extremal sandwich", extremal_sandwich),
        ("closed forms", closed_forms),
        ("fig3 regimes", fig3_regimes),
        ("fig4 super-condensation", fig4_condensation),
        ("counting statistics", counting_statistics),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.1} s): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1} s): {reason}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
