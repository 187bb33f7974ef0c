//! Statistical properties of the generator, checked against analytic values.

use predvar_core::rng::{self, Domain};
use predvar_core::{
    auc_point, cv_reduction_report, delong_ci, generate, generate_dataset, summarize, variability,
    Assignment, Averaging, GeneratorConfig, PerFinding,
};

fn config(
    n_models: usize,
    n_cases: usize,
    separation: f64,
    model_sd: f64,
    seed: u64,
) -> GeneratorConfig {
    GeneratorConfig {
        n_models,
        n_cases,
        n_findings: 1,
        finding_names: None,
        prevalence: PerFinding::Uniform(0.3),
        separation: PerFinding::Uniform(separation),
        model_noise_sd: model_sd,
        case_noise_sd: 1.0,
        seed,
    }
}

fn scores(cfg: &GeneratorConfig) -> (Vec<f64>, Vec<bool>) {
    let (p, l) = generate(cfg).unwrap();
    (p.model_finding(0, 0), l.finding_labels(0))
}

#[test]
fn no_separation_gives_chance_auc() {
    for seed in 0..5 {
        let (s, l) = scores(&config(1, 4000, 0.0, 0.5, seed));
        let n1 = l.iter().filter(|&&x| x).count() as f64;
        let n0 = l.len() as f64 - n1;
        // Mann-Whitney null standard error
        let se = ((n1 + n0 + 1.0) / (12.0 * n1 * n0)).sqrt();
        let auc = auc_point(&s, &l).unwrap().auc;
        assert!((auc - 0.5).abs() < 3.0 * se, "seed {seed}: {auc}");
    }
}

#[test]
fn prevalence_matches_config() {
    let cfg = GeneratorConfig {
        n_findings: 3,
        prevalence: PerFinding::Each(vec![0.02, 0.2, 0.6]),
        ..config(2, 20_000, 1.0, 0.3, 4)
    };
    let (_, labels) = generate(&cfg).unwrap();
    for f in 0..3 {
        let p = cfg.prevalence.get(f);
        let frac = labels.positives(f).len() as f64 / cfg.n_cases as f64;
        let se = (p * (1.0 - p) / cfg.n_cases as f64).sqrt();
        assert!((frac - p).abs() < 3.0 * se, "finding {f}: {frac} vs {p}");
    }
}

#[test]
fn empirical_auc_tracks_population_auc() {
    for (seed, sep) in [(1u64, 0.8), (2, 1.6), (3, 2.5)] {
        let cfg = config(1, 6000, sep, 0.5, seed);
        let (s, l) = scores(&cfg);
        let est = delong_ci(&s, &l, 0.95).unwrap();
        let se = est.variance.unwrap().sqrt();
        let target = cfg.population_auc(0);
        assert!(
            (est.auc - target).abs() < 3.0 * se,
            "sep {sep}: {} vs {target}",
            est.auc
        );
    }
}

#[test]
fn cv_increases_with_model_noise() {
    for seed in 0..20 {
        let mean_cv = |sd: f64| {
            let (p, _) = generate(&config(10, 300, 1.0, sd, seed)).unwrap();
            summarize(&variability::tensor_case_metrics(&p).unwrap())
                .unwrap()
                .overall
                .mean_cv
        };
        let (a, b, c) = (mean_cv(0.1), mean_cv(0.3), mean_cv(0.9));
        assert!(a < b && b < c, "seed {seed}: {a} {b} {c}");
    }
}

#[test]
fn group_means_follow_clt() {
    let data = generate_dataset(&config(50, 2000, 1.0, 0.3, 8)).unwrap();
    let r = cv_reduction_report(&data, 10, Assignment::Ordered, Averaging::Probability).unwrap();
    let target = 1.0 / 10f64.sqrt();
    assert!(
        (r.cv_ratio / target - 1.0).abs() < 0.15,
        "ratio {}",
        r.cv_ratio
    );
    assert!(r.t_test.unwrap().p_value < 1e-4);
}

/// AUC is the probability that a random positive outscores a random negative.
#[test]
fn random_pairs_estimate_auc() {
    let (s, l) = scores(&config(1, 3000, 1.2, 0.5, 5));
    let pos: Vec<f64> = s.iter().zip(&l).filter(|p| *p.1).map(|p| *p.0).collect();
    let neg: Vec<f64> = s.iter().zip(&l).filter(|p| !*p.1).map(|p| *p.0).collect();
    let mut g = rng::substream(17, Domain::Generate, 0);
    let pairs = 100_000;
    let mut wins = 0.0;
    for _ in 0..pairs {
        let x = pos[rng::index(&mut g, pos.len())];
        let y = neg[rng::index(&mut g, neg.len())];
        wins += if x > y {
            1.0
        } else if x == y {
            0.5
        } else {
            0.0
        };
    }
    let auc = auc_point(&s, &l).unwrap().auc;
    let se = (auc * (1.0 - auc) / pairs as f64).sqrt();
    assert!((wins / pairs as f64 - auc).abs() < 3.0 * se);
}

#[test]
fn delong_width_shrinks_as_root_n() {
    let width = |n: usize| {
        let (s, l) = scores(&config(1, n, 1.2, 0.5, 21));
        delong_ci(&s, &l, 0.95).unwrap().width()
    };
    let ratio = width(2000) / width(8000);
    assert!((1.7..2.3).contains(&ratio), "ratio {ratio}");
}

#[test]
fn zero_model_noise_means_identical_models() {
    let (p, _) = generate(&config(5, 200, 1.0, 0.0, 2)).unwrap();
    for case in 0..p.n_cases() {
        let row = p.case_finding(case, 0);
        assert!(row.iter().all(|&x| x == row[0]));
    }
}
