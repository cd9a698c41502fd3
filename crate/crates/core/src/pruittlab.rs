//! Pruitt's censoring design, where the Dirichlet-process Bayes estimate of
//! `P(B)` for `B = [1,2] x [2,3]` converges to 1/6 although the true value
//! is 0.
//!
//! Survival pairs are uniform on `[1,2]^2 ∪ [2,3]^2`; censoring pairs put
//! mass 1/3 on each of (1,3), (3,1) and (4,4). The prior is a Dirichlet
//! process with base measure `M` times the uniform law on `[1,3]^2`.

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ratio, to_f64};
use crate::exec::{map_indexed, Execution};

/// Base-measure probability of `B` under the uniform law on `[1,3]^2`.
const BASE_MEASURE_OF_B: f64 = 0.25;
const CENSORING: [(f64, f64); 3] = [(1.0, 3.0), (3.0, 1.0), (4.0, 4.0)];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruittConfig {
    pub n: usize,
    pub m_conc: f64,
    pub seed: u64,
}

impl PruittConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter(
                "sample size must be at least 1".into(),
            ));
        }
        if !(self.m_conc > 0.0 && self.m_conc.is_finite()) {
            return Err(Error::InvalidParameter(
                "concentration M must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Float-valued censored pair (the design is continuous, ties have probability zero).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruittObservation {
    pub z1: f64,
    pub d1: bool,
    pub z2: f64,
    pub d2: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruittSample {
    pub observations: Vec<PruittObservation>,
}

pub fn generate<R: Rng>(cfg: &PruittConfig, rng: &mut R) -> Result<PruittSample> {
    cfg.validate()?;
    let observations = (0..cfg.n)
        .map(|_| {
            let offset = if rng.random_bool(0.5) { 1.0 } else { 2.0 };
            let t1 = offset + rng.random::<f64>();
            let t2 = offset + rng.random::<f64>();
            let (c1, c2) = CENSORING[rng.random_range(0..CENSORING.len())];
            PruittObservation {
                z1: t1.min(c1),
                d1: t1 <= c1,
                z2: t2.min(c2),
                d2: t2 <= c2,
            }
        })
        .collect();
    Ok(PruittSample { observations })
}

fn in_interval(x: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&x)
}

/// Posterior expectation of `1{t in B}` given one observation, with `t`
/// drawn from the base measure conditioned on what was observed.
fn contribution(o: &PruittObservation) -> Result<f64> {
    if !(o.z1.is_finite() && o.z2.is_finite()) {
        return Err(Error::InvalidObservation("non-finite time".into()));
    }
    Ok(match (o.d1, o.d2) {
        (true, true) => f64::from(u8::from(
            in_interval(o.z1, 1.0, 2.0) && in_interval(o.z2, 2.0, 3.0),
        )),
        // second coordinate known, first uniform on [1,3]: half its range is in [1,2]
        (false, true) => 0.5 * f64::from(u8::from(in_interval(o.z2, 2.0, 3.0))),
        (true, false) => 0.5 * f64::from(u8::from(in_interval(o.z1, 1.0, 2.0))),
        (false, false) => {
            return Err(Error::InvalidObservation(
                "both coordinates censored cannot occur under this design".into(),
            ))
        }
    })
}

/// `M/(M+n) * alpha(B) + 1/(M+n) * sum_i c_i`.
pub fn dp_estimate_b(sample: &PruittSample, m_conc: f64) -> Result<f64> {
    if !(m_conc >= 0.0 && m_conc.is_finite()) {
        return Err(Error::InvalidParameter(
            "concentration M must be nonnegative".into(),
        ));
    }
    let n = sample.observations.len() as f64;
    let mut sum = 0.0;
    for o in &sample.observations {
        sum += contribution(o)?;
    }
    let denom = m_conc + n;
    if denom == 0.0 {
        return Err(Error::EmptyDataset);
    }
    Ok(m_conc / denom * BASE_MEASURE_OF_B + sum / denom)
}

/// The large-sample limit of the estimate: half of
/// `P{Z2 in [2,3], D = (0,1)} + P{Z1 in [1,2], D = (1,0)}`.
pub fn asymptotic_limit() -> BigRational {
    let each = ratio(1, 2) * ratio(1, 3);
    ratio(1, 2) * (each.clone() + each)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruittReport {
    pub n: usize,
    #[serde(rename = "M")]
    pub m_conc: f64,
    pub seed: u64,
    pub estimate: f64,
    pub limit: f64,
    /// Distance from the true value `P0(B) = 0`.
    pub gap_to_truth: f64,
}

pub fn run(cfg: &PruittConfig) -> Result<PruittReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sample = generate(cfg, &mut rng)?;
    let estimate = dp_estimate_b(&sample, cfg.m_conc)?;
    Ok(PruittReport {
        n: cfg.n,
        m_conc: cfg.m_conc,
        seed: cfg.seed,
        estimate,
        limit: to_f64(&asymptotic_limit()),
        gap_to_truth: estimate.abs(),
    })
}

/// `count` independent replications; replication `r` uses seed `cfg.seed + r`.
pub fn run_replications(
    cfg: &PruittConfig,
    count: usize,
    mode: Execution,
) -> Result<Vec<PruittReport>> {
    map_indexed(count, mode, |r| {
        run(&PruittConfig {
            seed: cfg.seed.wrapping_add(r as u64),
            ..*cfg
        })
    })
    .into_iter()
    .collect()
}
