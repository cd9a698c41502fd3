//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use bivsurv::betaproc2d::BivariateMass;
use bivsurv::exact::{int, to_f64, Rational};
use bivsurv::survdata::{parse_dataset, Dataset, Format, Observation, Time};
use num::{One, Zero};
use proptest::prelude::*;

pub const WORKED_CSV: &str = "z1,d1,z2,d2\n.51,1,.02,1\n.11,1,.62,0\n.24,0,.24,0\n.68,1,.68,1\n";

pub fn worked_example() -> Dataset {
    parse_dataset(WORKED_CSV.as_bytes(), Format::Csv).unwrap()
}

pub fn t(x: i64) -> Time {
    Time::from_int(x)
}

pub fn time(s: &str) -> Time {
    s.parse().unwrap()
}

/// Small integer times so that ties, within and across pairs, are common.
pub fn observation(max_time: i64) -> impl Strategy<Value = Observation> {
    (1..=max_time, any::<bool>(), 1..=max_time, any::<bool>())
        .prop_map(|(z1, d1, z2, d2)| Observation::new(t(z1), d1, t(z2), d2).unwrap())
}

pub fn dataset(max_n: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec(observation(6), 1..=max_n).prop_map(Dataset::new)
}

pub fn uncensored_dataset(max_n: usize) -> impl Strategy<Value = Dataset> {
    prop::collection::vec((1..=5i64, 1..=5i64), 1..=max_n).prop_map(|v| {
        Dataset::new(
            v.into_iter()
                .map(|(a, b)| Observation::new(t(a), true, t(b), true).unwrap())
                .collect(),
        )
    })
}

/// A probability mass over `points` with random positive integer weights.
pub fn mass_on(points: Vec<(i64, i64)>) -> impl Strategy<Value = BivariateMass> {
    let n = points.len();
    prop::collection::vec(1u64..=9, n).prop_map(move |w| {
        let total: u64 = w.iter().sum();
        let atoms: Vec<_> = points
            .iter()
            .zip(&w)
            .map(|(&(a, b), &k)| ((t(a), t(b)), Rational::new(k.into(), total.into())))
            .collect();
        BivariateMass::from_points(&atoms).unwrap()
    })
}

/// Distinct support points in `{1..k}^2`.
pub fn support(k: i64, max_points: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::btree_set((1..=k, 1..=k), 1..=max_points)
        .prop_map(|s| s.into_iter().collect())
}

/// A survival law on `{1..k}^2` (k <= 3) and a censoring law on
/// `{1..k+1}^2` that always keeps mass at `(k+1, k+1)`, so every support
/// point of the survival law is strictly dominated by a censoring point.
pub fn identified_pair() -> impl Strategy<Value = (BivariateMass, BivariateMass)> {
    (1..=3i64)
        .prop_flat_map(|k| (Just(k), support(k, 6), support(k + 1, 4)))
        .prop_flat_map(|(k, p_support, mut g_support)| {
            if !g_support.contains(&(k + 1, k + 1)) {
                g_support.push((k + 1, k + 1));
            }
            (mass_on(p_support), mass_on(g_support))
        })
}

/// Textbook product-limit survival just after `at`, straight from the pairs.
pub fn product_limit(pairs: &[(Time, bool)], at: Time) -> Rational {
    let mut times: Vec<Time> = pairs.iter().filter(|p| p.1).map(|p| p.0).collect();
    times.sort();
    times.dedup();
    let mut s = Rational::one();
    for u in times.into_iter().filter(|&u| u <= at) {
        let at_risk = pairs.iter().filter(|p| p.0 >= u).count() as u64;
        let deaths = pairs.iter().filter(|p| p.1 && p.0 == u).count() as u64;
        s *= Rational::one() - Rational::new(deaths.into(), at_risk.into());
    }
    s
}

/// `#{j : z1 > s, z2 > t} / n`.
pub fn empirical_survival(ds: &Dataset, s: Time, t: Time) -> Rational {
    let n = ds.observations.len() as u64;
    let k = ds
        .observations
        .iter()
        .filter(|o| o.z1 > s && o.z2 > t)
        .count() as u64;
    Rational::new(k.into(), n.into())
}

/// Located masses keyed by time pairs, dropping zeros.
pub fn by_time(m: &BivariateMass) -> BTreeMap<(Time, Time), Rational> {
    m.located_masses()
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|((i, j), p)| ((m.grid().get(i), m.grid().get(j)), p))
        .collect()
}

/// Largest absolute difference between two masses, cell by cell.
pub fn sup_distance(a: &BivariateMass, b: &BivariateMass) -> f64 {
    let (a, b) = (by_time(a), by_time(b));
    let zero = Rational::zero();
    a.keys()
        .chain(b.keys())
        .map(|k| to_f64(&(a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero))).abs())
        .fold(0.0, f64::max)
}

pub fn empirical_mass(ds: &Dataset) -> BTreeMap<(Time, Time), Rational> {
    let n = ds.observations.len() as u64;
    let mut out = BTreeMap::new();
    for o in &ds.observations {
        *out.entry((o.z1, o.z2)).or_insert_with(Rational::zero) +=
            Rational::new(1.into(), n.into());
    }
    out
}

pub fn one() -> Rational {
    int(1)
}

/// Every weight equal to `eps`, then zeroed wherever the matching at-risk
/// count is zero. Posterior means there stay 0/0 and the placements of the
/// residual masses match the empirical ones.
pub fn vanishing_prior(
    c: &bivsurv::survdata::CountStatistics,
    eps: &Rational,
) -> bivsurv::betaproc2d::BivariateBetaParams {
    use bivsurv::survdata::Side;
    let mut p = bivsurv::betaproc2d::BivariateBetaParams::constant(c.grid.clone(), eps.clone());
    for i in 0..c.grid.len() {
        if c.y_star[i] == 0 {
            p.star.a[i] = Rational::zero();
            p.star.b[i] = Rational::zero();
        }
        for side in Side::BOTH {
            let cond = &mut p.cond[i][side.slot()];
            for d in 1..c.grid.len() - i {
                if c.y_cond(i, side, d) == 0 {
                    cond.a[d - 1] = Rational::zero();
                    cond.b[d - 1] = Rational::zero();
                }
            }
        }
    }
    p
}
