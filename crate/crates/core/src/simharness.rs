//! Seeded consistency studies: draw censored samples from a known discrete
//! law and censoring law, estimate, and record sup-norm errors of the
//! survival surface against the truth.
//!
//! Replication `r` of sample size number `s` (both zero-based) draws from
//! `ChaCha8Rng::seed_from_u64(seed + s * replications + r)`, so sequential
//! and parallel runs give identical reports.

use std::io::Write;

use num::{Signed, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::betaproc2d::{noninformative_estimate, recover_distribution, BivariateMass};
use crate::dabrowska::{dabrowska_estimate, mass_audit, SurvivalSurface};
use crate::error::{Error, Result};
use crate::exact::{to_f64, Rational};
use crate::exec::{map_indexed, Execution};
use crate::survdata::{compute_counts, Dataset, Observation, ObservationLaw, Time, TimeGrid};

/// Exact law of the censored observation under survival law `p0` and an
/// independent censoring law `g` (defects count at their placements).
pub fn observation_law(p0: &BivariateMass, g: &BivariateMass) -> Result<ObservationLaw> {
    let mut law = ObservationLaw::new();
    let located = |m: &BivariateMass| {
        m.located_masses()
            .into_iter()
            .map(|((i, j), p)| ((m.grid().get(i), m.grid().get(j)), p))
            .collect::<Vec<_>>()
    };
    let censoring = located(g);
    for (t, p) in located(p0) {
        for (c, q) in &censoring {
            law.add(Observation::censor(t, *c), &p * q)?;
        }
    }
    Ok(law)
}

struct MassSampler {
    points: Vec<(Time, Time)>,
    index: WeightedIndex<f64>,
}

impl MassSampler {
    fn new(m: &BivariateMass) -> Result<MassSampler> {
        let (points, weights): (Vec<_>, Vec<_>) = m
            .located_masses()
            .into_iter()
            .map(|((i, j), p)| ((m.grid().get(i), m.grid().get(j)), to_f64(&p)))
            .unzip();
        let index = WeightedIndex::new(weights)
            .map_err(|e| Error::InvalidParameter(format!("cannot sample from mass: {e}")))?;
        Ok(MassSampler { points, index })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (Time, Time) {
        self.points[self.index.sample(rng)]
    }
}

/// `n` i.i.d. observations `min(T, C)` with `T ~ p0` and `C ~ g`.
pub fn simulate_dataset<R: Rng>(
    p0: &BivariateMass,
    g: &BivariateMass,
    n: usize,
    rng: &mut R,
) -> Result<Dataset> {
    let truth = MassSampler::new(p0)?;
    let censoring = MassSampler::new(g)?;
    let observations = (0..n)
        .map(|_| {
            let t = truth.draw(rng);
            let c = censoring.draw(rng);
            Observation::censor(t, c)
        })
        .collect();
    Ok(Dataset::new(observations))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Extra evaluation times for the sup-norm (the truth's grid and each
    /// sample's grid are always included).
    #[serde(default)]
    pub grid: TimeGrid,
    pub p0: BivariateMass,
    pub g: BivariateMass,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    #[serde(default)]
    pub include_dabrowska: bool,
}

impl ScenarioConfig {
    /// Valid masses, and the truth is identified by the observation law.
    pub fn validate(&self) -> Result<()> {
        self.p0.validate()?;
        self.g.validate()?;
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) || self.replications == 0
        {
            return Err(Error::InvalidParameter(
                "need positive sample sizes and replications".into(),
            ));
        }
        recover_distribution(&observation_law(&self.p0, &self.g)?).map(|_| ())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Noninformative,
    Dabrowska,
}

impl Estimator {
    pub fn name(self) -> &'static str {
        match self {
            Estimator::Noninformative => "noninformative",
            Estimator::Dabrowska => "dabrowska",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub n: usize,
    pub replication: usize,
    pub estimator: Estimator,
    pub sup_error: Option<f64>,
    pub negative_cells: usize,
    /// Total mass (atoms plus defects) of a mass-valued estimate.
    pub total_mass: Option<f64>,
    /// Whether every atom and defect of a mass-valued estimate is nonnegative.
    pub nonnegative: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub n: usize,
    pub estimator: Estimator,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub records: Vec<StudyRecord>,
    pub summaries: Vec<ErrorSummary>,
}

impl ConvergenceReport {
    pub fn summary(&self, n: usize, estimator: Estimator) -> Option<&ErrorSummary> {
        self.summaries
            .iter()
            .find(|s| s.n == n && s.estimator == estimator)
    }

    /// Columns `n,replication,estimator,sup_error,negative_cells`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record([
            "n",
            "replication",
            "estimator",
            "sup_error",
            "negative_cells",
        ])
        .map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.n.to_string(),
                r.replication.to_string(),
                r.estimator.name().to_string(),
                r.sup_error
                    .map_or_else(|| "NA".to_string(), |e| format!("{e:.17e}")),
                r.negative_cells.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `sup |a - b|` over all pairs of evaluation times.
fn sup_distance(a: &SurvivalSurface, b: &SurvivalSurface, times: &[Time]) -> f64 {
    let mut worst = Rational::zero();
    for &s in times {
        for &t in times {
            let d = (a.at(s, t) - b.at(s, t)).abs();
            if d > worst {
                worst = d;
            }
        }
    }
    to_f64(&worst)
}

fn evaluation_times(cfg: &ScenarioConfig, sample: &TimeGrid) -> Vec<Time> {
    let mut times = vec![Time::ZERO];
    times.extend_from_slice(cfg.grid.times());
    times.extend_from_slice(cfg.p0.grid().times());
    times.extend_from_slice(sample.times());
    TimeGrid::from_unsorted(times).times().to_vec()
}

fn replicate(
    cfg: &ScenarioConfig,
    truth: &SurvivalSurface,
    n: usize,
    replication: usize,
    seed: u64,
) -> Vec<StudyRecord> {
    let blank = |estimator| StudyRecord {
        n,
        replication,
        estimator,
        sup_error: None,
        negative_cells: 0,
        total_mass: None,
        nonnegative: None,
        error: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ds = match simulate_dataset(&cfg.p0, &cfg.g, n, &mut rng) {
        Ok(ds) => ds,
        Err(e) => {
            return vec![StudyRecord {
                error: Some(e.to_string()),
                ..blank(Estimator::Noninformative)
            }];
        }
    };
    let times = evaluation_times(cfg, &ds.grid);
    let mut records = Vec::with_capacity(2);

    let mut rec = blank(Estimator::Noninformative);
    match compute_counts(&ds).and_then(|c| noninformative_estimate(&c)) {
        Ok(m) => {
            let surface = SurvivalSurface::from_mass(&m);
            rec.sup_error = Some(sup_distance(&surface, truth, &times));
            rec.negative_cells = mass_audit(&surface).negatives.len();
            rec.total_mass = Some(to_f64(&m.total()));
            rec.nonnegative = Some(m.located().all(|(_, p)| !p.is_negative()));
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    records.push(rec);

    if cfg.include_dabrowska {
        let mut rec = blank(Estimator::Dabrowska);
        match dabrowska_estimate(&ds) {
            Ok(surface) => {
                rec.sup_error = Some(sup_distance(&surface, truth, &times));
                rec.negative_cells = mass_audit(&surface).negatives.len();
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        records.push(rec);
    }
    records
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(records: &[StudyRecord], sizes: &[usize]) -> Vec<ErrorSummary> {
    let mut out = Vec::new();
    for &n in sizes {
        for estimator in [Estimator::Noninformative, Estimator::Dabrowska] {
            let group: Vec<&StudyRecord> = records
                .iter()
                .filter(|r| r.n == n && r.estimator == estimator)
                .collect();
            if group.is_empty() {
                continue;
            }
            let mut errors: Vec<f64> = group.iter().filter_map(|r| r.sup_error).collect();
            errors.sort_by(f64::total_cmp);
            out.push(ErrorSummary {
                n,
                estimator,
                median: quantile(&errors, 0.5),
                q1: quantile(&errors, 0.25),
                q3: quantile(&errors, 0.75),
                failures: group.len() - errors.len(),
            });
        }
    }
    out
}

pub fn run_study(cfg: &ScenarioConfig) -> Result<ConvergenceReport> {
    run_study_with(cfg, Execution::default())
}

pub fn run_study_with(cfg: &ScenarioConfig, mode: Execution) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let truth = SurvivalSurface::from_mass(&cfg.p0);
    let reps = cfg.replications;
    let jobs = cfg.sample_sizes.len() * reps;
    let records = map_indexed(jobs, mode, |k| {
        let n = cfg.sample_sizes[k / reps];
        replicate(cfg, &truth, n, k % reps, cfg.seed.wrapping_add(k as u64))
    })
    .into_iter()
    .flatten()
    .collect::<Vec<_>>();
    let summaries = summarize(&records, &cfg.sample_sizes);
    Ok(ConvergenceReport { records, summaries })
}
