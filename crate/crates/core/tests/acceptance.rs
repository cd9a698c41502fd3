//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use bivsurv::betaproc2d::{
    noninformative_estimate, posterior_mean_mass, recover_distribution, update,
    BivariateBetaParams, BivariateMass,
};
use bivsurv::cli::run_with;
use bivsurv::dabrowska::{dabrowska_estimate, mass_audit, rectangle_mass, SurvivalSurface};
use bivsurv::exact::{int, ratio, to_f64, Rational};
use bivsurv::exec::Execution;
use bivsurv::pruittlab::{asymptotic_limit, run_replications, PruittConfig};
use bivsurv::simharness::{observation_law, run_study_with, Estimator, ScenarioConfig};
use bivsurv::survdata::{compute_counts, reparametrize, Dataset, Observation, Time, TimeGrid};
use common::*;
use num::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn masses_exact() -> Outcome {
    let m = noninformative_estimate(&compute_counts(&worked_example()).unwrap()).unwrap();
    let got = by_time(&m);
    let expected = [
        ((".51", ".02"), ratio(1, 4)),
        ((".11", ".62"), ratio(1, 4)),
        ((".68", ".68"), ratio(1, 2)),
    ]
    .into_iter()
    .map(|((a, b), p)| ((time(a), time(b)), p))
    .collect();
    let shown: Vec<String> = got
        .iter()
        .map(|((a, b), p)| format!("({a},{b})={p}"))
        .collect();
    check(
        got == expected && m.total() == int(1),
        format!("masses {}", shown.join(" ")),
    )
}

fn comparison_table() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let data = dir.path().join("d.csv");
    let queries = dir.path().join("q.csv");
    let out = dir.path().join("t.csv");
    std::fs::write(&data, WORKED_CSV).unwrap();
    std::fs::write(
        &queries,
        "s,t\n0,0\n.11,0\n.24,0\n.51,0\n.68,0\n0,.02\n0,.24\n0,.62\n0,.68\n.51,.02\n",
    )
    .unwrap();
    let start = Instant::now();
    let code = run_with(
        [
            "bivsurv",
            "table",
            "--input",
            data.to_str().unwrap(),
            "--queries",
            queries.to_str().unwrap(),
            "--output",
            out.to_str().unwrap(),
        ],
        &mut std::io::sink(),
        &mut std::io::sink(),
    );
    let elapsed = start.elapsed();
    if code != 0 {
        return Err(format!("table exited with {code}"));
    }
    let dab = [1.0, 0.75, 0.75, 0.375, 0.0, 0.75, 0.75, 0.75, 0.0, 0.5];
    let non = [1.0, 0.75, 0.75, 0.5, 0.0, 0.75, 0.75, 0.5, 0.0, 0.5];
    let mut reader = csv::Reader::from_path(&out).unwrap();
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for (k, row) in reader.records().enumerate() {
        let row = row.unwrap();
        let d: f64 = row[2].parse().unwrap();
        let n: f64 = row[3].parse().unwrap();
        worst = worst.max((d - dab[k]).abs()).max((n - non[k]).abs());
        rows += 1;
    }
    // The last row holds for every (x, y) in [.11, .68) x [.02, .68) on both surfaces.
    let ds = worked_example();
    let (ds_dab, ds_non) = (
        dabrowska_estimate(&ds).unwrap(),
        SurvivalSurface::from_mass(
            &noninformative_estimate(&compute_counts(&ds).unwrap()).unwrap(),
        ),
    );
    let xs = [".11", ".2", ".24", ".4", ".51", ".6", ".62", ".67"];
    let ys = [".02", ".11", ".24", ".5", ".51", ".62", ".67"];
    let band = xs.iter().all(|x| {
        ys.iter().all(|y| {
            ds_dab.at(time(x), time(y)) == ratio(1, 2) && ds_non.at(time(x), time(y)) == ratio(1, 2)
        })
    });
    check(
        rows == 10 && worst < 1e-9 && band && elapsed < Duration::from_secs(1),
        format!("{rows} rows, max deviation {worst:e}, last-row band {band}, {elapsed:?}"),
    )
}

fn negative_mass() -> Outcome {
    let ds = worked_example();
    let dab = dabrowska_estimate(&ds).unwrap();
    let audit = mass_audit(&dab);
    let rect = rectangle_mass(&dab, time(".51"), time(".68"), Time::ZERO, time(".02"));
    let non = SurvivalSurface::from_mass(
        &noninformative_estimate(&compute_counts(&ds).unwrap()).unwrap(),
    );
    let clean = mass_audit(&non).negatives.len();
    let listed = audit.negatives.iter().any(|c| c.mass == ratio(-1, 8));
    check(
        !audit.negatives.is_empty() && listed && rect == ratio(-1, 8) && clean == 0,
        format!(
            "{} negative cell(s), -1/8 listed {listed}, mass of (.51,.68]x(0,.02] = {rect}, noninformative negatives {clean}",
            audit.negatives.len()
        ),
    )
}

fn pruitt() -> Outcome {
    let limit_exact = asymptotic_limit() == ratio(1, 6);
    let start = Instant::now();
    let reports = run_replications(
        &PruittConfig {
            n: 100_000,
            m_conc: 1.0,
            seed: 1,
        },
        5,
        Execution::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    let seeds: BTreeSet<u64> = reports.iter().map(|r| r.seed).collect();
    let near = reports
        .iter()
        .all(|r| (r.estimate - 1.0 / 6.0).abs() < 0.01);
    let gap = reports.iter().all(|r| r.gap_to_truth > 0.1);
    let estimates: Vec<String> = reports
        .iter()
        .map(|r| format!("{:.5}", r.estimate))
        .collect();
    check(
        limit_exact && seeds.len() == 5 && near && gap && elapsed < Duration::from_secs(5),
        format!("limit = 1/6 exactly: {limit_exact}; estimates {estimates:?}; {elapsed:?}"),
    )
}

fn minimum_censoring_identity() -> Outcome {
    let mut agree = 0;
    for t1 in 1..=4 {
        for t2 in 1..=4 {
            for c1 in 1..=4 {
                for c2 in 1..=4 {
                    let definition = t1.min(t2) <= c1.min(c2);
                    let (z1, z2, d1, d2) = (t1.min(c1), t2.min(c2), t1 <= c1, t2 <= c2);
                    let by_order = (z1 > z2 && d2) || (z1 < z2 && d1) || (z1 == z2 && (d1 || d2));
                    let library =
                        reparametrize(&Observation::censor((t(t1), t(t2)), (t(c1), t(c2))))
                            .delta_star;
                    if definition == by_order && by_order == library {
                        agree += 1;
                    }
                }
            }
        }
    }
    check(agree == 256, format!("{agree}/256 tuples agree"))
}

fn random_mass<R: Rng>(rng: &mut R, cells: &[(Time, Time)]) -> BivariateMass {
    let weights: Vec<u64> = cells.iter().map(|_| rng.random_range(1..=20)).collect();
    let total: u64 = weights.iter().sum();
    let atoms: Vec<_> = cells
        .iter()
        .zip(&weights)
        .map(|(&c, &w)| (c, Rational::new(w.into(), total.into())))
        .collect();
    BivariateMass::from_points(&atoms).unwrap()
}

fn random_cells<R: Rng>(rng: &mut R, times: &[Time], p: f64) -> Vec<(Time, Time)> {
    let mut cells: Vec<_> = times
        .iter()
        .flat_map(|&a| times.iter().map(move |&b| (a, b)))
        .filter(|_| rng.random_bool(p))
        .collect();
    if cells.is_empty() {
        cells.push((
            times[rng.random_range(0..times.len())],
            times[rng.random_range(0..times.len())],
        ));
    }
    cells
}

fn recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(1..=4);
        let mut times = BTreeSet::new();
        while times.len() < k {
            times.insert(Time::from_units(rng.random_range(1..=50) * 10i128.pow(16)));
        }
        let times: Vec<Time> = times.into_iter().collect();
        let p0_cells = random_cells(&mut rng, &times, 0.5);
        let p0 = random_mass(&mut rng, &p0_cells);
        // Censoring on the same times plus a point beyond, which dominates
        // every support point of p0.
        let top = Time::from_int(1);
        let mut g_times = times.clone();
        g_times.push(top);
        let mut g_cells = random_cells(&mut rng, &g_times, 0.3);
        if !g_cells.contains(&(top, top)) {
            g_cells.push((top, top));
        }
        let g = random_mass(&mut rng, &g_cells);
        let recovered = match recover_distribution(&observation_law(&p0, &g).unwrap()) {
            Ok(m) => m,
            Err(e) => return Err(format!("recovery failed: {e}")),
        };
        worst = worst.max(sup_distance(&recovered, &p0));
    }
    check(
        worst <= 1e-12,
        format!("100 instances, max atom error {worst:e}"),
    )
}

fn random_dataset<R: Rng>(rng: &mut R) -> Dataset {
    let n = rng.random_range(1..=30);
    let obs = (0..n)
        .map(|_| {
            Observation::new(
                t(rng.random_range(1..=8)),
                rng.random_bool(0.7),
                t(rng.random_range(1..=8)),
                rng.random_bool(0.7),
            )
            .unwrap()
        })
        .collect();
    Dataset::new(obs)
}

fn vanishing_prior_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let eps = ratio(1, 100_000_000);
    let (mut worst, mut unmasked_worst): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let c = compute_counts(&random_dataset(&mut rng)).unwrap();
        let limit = noninformative_estimate(&c).unwrap();
        let posterior = update(&vanishing_prior(&c, &eps), &c).unwrap();
        worst = worst.max(sup_distance(
            &posterior_mean_mass(&posterior).unwrap(),
            &limit,
        ));
        let full = update(
            &BivariateBetaParams::constant(c.grid.clone(), eps.clone()),
            &c,
        )
        .unwrap();
        unmasked_worst =
            unmasked_worst.max(sup_distance(&posterior_mean_mass(&full).unwrap(), &limit));
    }
    println!("  note: with weight also where nobody is at risk the gap is {unmasked_worst:.3e} (prior means persist there)");
    check(worst < 1e-6, format!("50 datasets, max atom gap {worst:e}"))
}

fn consistency() -> Outcome {
    let uniform: Vec<_> = (1..=3)
        .flat_map(|i| (1..=3).map(move |j| ((t(i), t(j)), ratio(1, 9))))
        .collect();
    let p0 = BivariateMass::from_points(&uniform).unwrap();
    let g = BivariateMass::from_points(&[
        ((t(1), t(4)), ratio(3, 10)),
        ((t(4), t(1)), ratio(3, 10)),
        ((t(2), t(2)), ratio(3, 10)),
        ((t(4), t(4)), ratio(1, 10)),
    ])
    .unwrap();
    let law = observation_law(&p0, &g).unwrap();
    let censored = law.iter().fold(Rational::zero(), |acc, (o, p)| {
        acc + p * int(u64::from(!o.d1) + u64::from(!o.d2)) / int(2)
    });
    let cfg = ScenarioConfig {
        grid: TimeGrid::default(),
        p0,
        g,
        sample_sizes: vec![100, 1000, 10_000],
        replications: 50,
        seed: 8,
        include_dabrowska: false,
    };
    let start = Instant::now();
    let report = run_study_with(&cfg, Execution::default()).unwrap();
    let elapsed = start.elapsed();
    let medians: Vec<f64> = cfg
        .sample_sizes
        .iter()
        .map(|&n| report.summary(n, Estimator::Noninformative).unwrap().median)
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let factor = medians[0] / medians[2];
    let proper = report.records.iter().all(|r| {
        r.error.is_none()
            && r.nonnegative == Some(true)
            && r.total_mass.is_some_and(|m| (m - 1.0).abs() <= 1e-12)
    });
    check(
        decreasing && factor >= 3.0 && proper && elapsed < Duration::from_secs(120),
        format!(
            "censored coordinates {:.0}%, medians {medians:.4?}, factor {factor:.2}, all estimates proper {proper}, {elapsed:?}",
            100.0 * to_f64(&censored)
        ),
    )
}

fn batching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut equal = 0;
    for _ in 0..100 {
        let ds = random_dataset(&mut rng);
        let cut = rng.random_range(0..=ds.observations.len());
        let (a, b) = ds.observations.split_at(cut);
        let counts = |obs: &[Observation]| {
            compute_counts(&Dataset::with_grid(obs.to_vec(), ds.grid.clone()).unwrap()).unwrap()
        };
        let w = ratio(rng.random_range(0..=6), rng.random_range(1..=3));
        let prior = BivariateBetaParams::constant(ds.grid.clone(), w);
        let joint = update(&prior, &counts(&ds.observations)).unwrap();
        let staged = update(&update(&prior, &counts(a)).unwrap(), &counts(b)).unwrap();
        if joint == staged {
            equal += 1;
        }
    }
    check(equal == 100, format!("{equal}/100 splits identical"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 worked-example masses", masses_exact),
        ("2 comparison table", comparison_table),
        ("3 negative-mass audit", negative_mass),
        ("4 Dirichlet-process inconsistency", pruitt),
        ("5 minimum-censoring identity", minimum_censoring_identity),
        ("6 recovery from the exact law", recovery),
        (
            "7 noninformative as vanishing-prior limit",
            vanishing_prior_limit,
        ),
        ("8 empirical consistency", consistency),
        ("9 batching invariance", batching),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
