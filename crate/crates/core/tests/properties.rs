use cobose_core::bounds::{check_hierarchy, TightBounds};
use cobose_core::chi::{chi_grouped, chi_recursive};
use cobose_core::exact::{
    chi_bruteforce_exact, chi_bruteforce_tuples, chi_grouped_exact, chi_recursive_exact, ExactDistribution,
};
use cobose_core::schmidt::{Group, SchmidtDistribution};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_exact(rng: &mut ChaCha8Rng, max_modes: usize) -> ExactDistribution {
    let s = rng.gen_range(1..=max_modes);
    let weights: Vec<u32> = (0..s).map(|_| rng.gen_range(1..=9)).collect();
    let total: u32 = weights.iter().sum();
    ExactDistribution::new(weights.iter().map(|&w| BigRational::new(BigInt::from(w), BigInt::from(total))).collect())
        .unwrap()
}

fn random_distribution(rng: &mut ChaCha8Rng, tailed: bool) -> SchmidtDistribution {
    let s = rng.gen_range(1..=8);
    let tail = if tailed { rng.gen_range(0.0..0.8) } else { 0.0 };
    let w: Vec<f64> = (0..s).map(|_| rng.gen_range(0.02..1.0)).collect();
    let total: f64 = w.iter().sum();
    SchmidtDistribution::new(w.iter().map(|x| Group::new(x / total * (1.0 - tail), 1)), tail, false).unwrap()
}

#[test]
fn engines_match_bruteforce_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..60 {
        let d = random_exact(&mut rng, 6);
        let n = rng.gen_range(0..=8u64);
        let oracle = chi_bruteforce_exact(&d, n).unwrap();
        assert_eq!(chi_bruteforce_tuples(&d, n).unwrap(), oracle);
        assert_eq!(chi_recursive_exact(&d, n)[n as usize], oracle);
        assert_eq!(chi_grouped_exact(&d, n)[n as usize], oracle);

        let float = d.to_distribution().unwrap();
        let want = oracle.to_f64().unwrap();
        for got in [chi_recursive(&float, n).chi(n).to_f64(), chi_grouped(&float, n).chi(n).to_f64()] {
            assert!((got - want).abs() <= 1e-12 * want);
        }
    }
}

#[test]
fn random_distributions_obey_ratio_hierarchy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let d = random_distribution(&mut rng, i % 2 == 0);
        let report = check_hierarchy(&chi_grouped(&d, 60)).unwrap();
        assert!(report.passed(), "{:?}", report.worst_slack);
    }
}

#[test]
fn chi_lies_between_extremal_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for i in 0..50 {
        let d = random_distribution(&mut rng, i % 3 == 0);
        let series = chi_grouped(&d, 100);
        let bounds = TightBounds::new(d.lambda1(), d.purity(), 99).unwrap();
        for n in 0..=99 {
            let (lo, hi) = bounds.chi_range(n).unwrap();
            let v = series.log_chi(n);
            assert!(lo.ln() <= v + 1e-9 && v <= hi.ln() + 1e-9, "n={n}");
            let (rlo, rhi) = bounds.ratio_range(n).unwrap();
            let r = series.ratio(n).unwrap();
            assert!(rlo <= r * (1.0 + 1e-9) && r <= rhi * (1.0 + 1e-9), "n={n}");
        }
    }
}
