use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

use spiked::detect::{toh_exhaustive_test, toh_satisfied_edges, wishart_min_quadratic_test, Candidates, Rule};
use spiked::groups::GroupSpec;
use spiked::models::{sample_gaussian_wigner, sample_toh, sample_wishart};
use spiked::output::{write_csv, CsvHeader, ExperimentConfig};
use spiked::priors::{subgaussian_proxy, FiniteLaw, SpikePrior};
use spiked::thresholds::{bernoulli_second_moment, hyptest_tradeoff, second_moment_spherical_exact};

fn all_sign_vectors(n: usize) -> Vec<DVector<f64>> {
    let s = 1.0 / (n as f64).sqrt();
    (0..1usize << n)
        .map(|mask| DVector::from_fn(n, |i, _| if mask >> i & 1 == 1 { -s } else { s }))
        .collect()
}

fn assignments(n: usize, l: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..l.pow(n as u32)).map(move |mut k| {
        (0..n)
            .map(|_| {
                let d = k % l;
                k /= l;
                d
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tradeoff_round_trips_through_bernoulli(alpha in 0.01f64..0.99, frac in 0.0f64..1.0) {
        // the Bernoulli pair (α, β) attains its own second moment exactly
        let beta = frac * (1.0 - alpha);
        let m = bernoulli_second_moment(alpha, beta);
        let b = hyptest_tradeoff(m, alpha).unwrap();
        prop_assert!((b - beta).abs() < 1e-7, "{} vs {}", b, beta);
    }

    #[test]
    fn tradeoff_bounds_and_monotonicity(alpha in 0.01f64..0.99, m1 in 1.0f64..50.0, dm in 0.0f64..50.0) {
        let b1 = hyptest_tradeoff(m1, alpha).unwrap();
        let b2 = hyptest_tradeoff(m1 + dm, alpha).unwrap();
        prop_assert!((0.0..=1.0 - alpha).contains(&b1));
        prop_assert!(b2 <= b1 + 1e-15);
    }

    #[test]
    fn spherical_moment_increases_with_n(lambda in 0.05f64..0.98, n in 2usize..400) {
        let a = second_moment_spherical_exact(Some(n), lambda).unwrap().value;
        let b = second_moment_spherical_exact(Some(n + 1), lambda).unwrap().value;
        let lim = second_moment_spherical_exact(None, lambda).unwrap().value;
        prop_assert!(a >= 1.0);
        prop_assert!(b >= a * (1.0 - 1e-12));
        prop_assert!(b <= lim * (1.0 + 1e-9));
    }

    #[test]
    fn proxy_dominates_variance_and_scanned_ratio(p in 0.05f64..0.95, t in 0.01f64..6.0) {
        let law = FiniteLaw::new(
            vec![((1.0 - p) / p).sqrt(), -(p / (1.0 - p)).sqrt()],
            vec![p, 1.0 - p],
        ).unwrap();
        let proxy = subgaussian_proxy(&law);
        let ratio = 2.0 * law.product_cgf(t) / (t * t);
        prop_assert!(proxy >= 1.0);
        prop_assert!(proxy >= ratio * (1.0 - 1e-9), "{} < {}", proxy, ratio);
    }

    #[test]
    fn samplers_are_deterministic(seed in any::<u64>(), n in 2usize..30, lambda in 0.0f64..3.0) {
        let a = sample_gaussian_wigner(lambda, &SpikePrior::IidRademacher, n, seed).unwrap();
        let b = sample_gaussian_wigner(lambda, &SpikePrior::IidRademacher, n, seed).unwrap();
        prop_assert_eq!(a, b);
        let g = GroupSpec::from_id("zl:3").unwrap();
        prop_assert_eq!(sample_toh(1.0, &g, n, seed).unwrap(), sample_toh(1.0, &g, n, seed).unwrap());
    }

    #[test]
    fn config_round_trips_through_toml(
        seed in any::<u64>(),
        n in prop::collection::vec(1usize..5000, 0..4),
        lambda in prop::option::of(-5.0f64..5.0),
        prior in prop::option::of("[a-z_:.0-9]{1,12}"),
    ) {
        let c = ExperimentConfig { seed, n, lambda, prior, ..ExperimentConfig::default() };
        let text = toml::to_string(&c).unwrap();
        let back = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn csv_fields_round_trip(fields in prop::collection::vec(".{0,12}", 1..6), seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let header = CsvHeader { config_hash: "0123456789abcdef".into(), seed };
        let rows: Vec<Vec<String>> = fields.iter().enumerate().map(|(i, f)| vec![i.to_string(), f.clone()]).collect();
        let path = write_csv(dir.path().join("t.csv"), &header, &["i", "text"], &rows).unwrap();
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
        let read: Vec<Vec<String>> = r
            .records()
            .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
            .collect();
        prop_assert_eq!(read, rows);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hypercube_search_matches_listed_candidates(n in 2usize..=9, seed in any::<u64>(), beta in -0.9f64..0.0) {
        let b = sample_wishart(0.5, beta, &SpikePrior::IidRademacher, n, seed).unwrap();
        let gray = wishart_min_quadratic_test(&b, &Candidates::Hypercube, beta, 0.5, 0.0, Rule::Asymptotic).unwrap();
        let list = Candidates::List(all_sign_vectors(n));
        let brute = wishart_min_quadratic_test(&b, &list, beta, 0.5, 0.0, Rule::Asymptotic).unwrap();
        prop_assert!((gray.statistic - brute.statistic).abs() <= 1e-9 * (1.0 + brute.statistic.abs()));
        prop_assert_eq!(gray.decision, brute.decision);
    }

    #[test]
    fn toh_search_matches_brute_force(n in 2usize..=6, l in 2usize..=3, seed in any::<u64>(), p in 0.0f64..1.0) {
        let g = GroupSpec::from_id(&format!("zl:{l}")).unwrap();
        let b = sample_toh(p * (n as f64).sqrt(), &g, n, seed).unwrap();
        let fg = g.finite().unwrap();
        let brute = assignments(n, l).map(|a| toh_satisfied_edges(&b, fg, &a).unwrap()).max().unwrap();
        let out = toh_exhaustive_test(&b, &g, 1.0, Rule::Asymptotic).unwrap();
        prop_assert_eq!(out.statistic, brute as f64);
    }

    #[test]
    fn toh_statistic_is_shift_invariant(n in 2usize..12, seed in any::<u64>(), id in prop::sample::select(vec!["zl:2", "zl:5", "s3", "q8"])) {
        let g = GroupSpec::from_id(id).unwrap();
        let fg = g.finite().unwrap();
        let b = sample_toh(1.0, &g, n, seed).unwrap();
        let mut rng = spiked::rng::seeded(seed ^ 0x5eed);
        let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..fg.order())).collect();
        let base = toh_satisfied_edges(&b, fg, &a).unwrap();
        for h in 0..fg.order() {
            let shifted: Vec<usize> = a.iter().map(|&x| fg.mul(x, h)).collect();
            prop_assert_eq!(toh_satisfied_edges(&b, fg, &shifted).unwrap(), base);
        }
    }
}
