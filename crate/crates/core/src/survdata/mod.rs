//! Observations, the minimum-time reparametrization, dataset ingestion and
//! the counting statistics every estimator is built from.

mod counts;
mod parse;
mod time;

pub use counts::{compute_counts, CountStatistics, Side};
pub use parse::{parse_dataset, Format};
pub use time::{Time, TimeGrid, TimeParseError};

use std::collections::BTreeMap;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Rational;

/// A censored pair: `z_j = min(T_j, C_j)` and `d_j = 1` iff `T_j <= C_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Observation {
    pub z1: Time,
    #[serde(with = "flag")]
    pub d1: bool,
    pub z2: Time,
    #[serde(with = "flag")]
    pub d2: bool,
}

impl Observation {
    pub fn new(z1: Time, d1: bool, z2: Time, d2: bool) -> Result<Observation> {
        if z1.is_negative() || z2.is_negative() {
            return Err(Error::InvalidObservation(format!(
                "negative time in ({z1}, {z2})"
            )));
        }
        Ok(Observation { z1, d1, z2, d2 })
    }

    /// The observation produced by survival pair `t` under censoring pair `c`.
    pub fn censor(t: (Time, Time), c: (Time, Time)) -> Observation {
        Observation {
            z1: t.0.min(c.0),
            d1: t.0 <= c.0,
            z2: t.1.min(c.1),
            d2: t.1 <= c.1,
        }
    }
}

/// Which coordinate of the pair is strictly later than the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Order {
    Tied,
    FirstLater,
    SecondLater,
}

impl Order {
    pub fn index(self) -> usize {
        match self {
            Order::Tied => 0,
            Order::FirstLater => 1,
            Order::SecondLater => 2,
        }
    }

    pub fn side(self) -> Option<Side> {
        match self {
            Order::Tied => None,
            Order::FirstLater => Some(Side::First),
            Order::SecondLater => Some(Side::Second),
        }
    }
}

/// An observation expressed through its minimum time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReparamObservation {
    pub z_star: Time,
    /// Whether the minimum survival time is observed uncensored.
    pub delta_star: bool,
    pub eta: Order,
    /// The later coordinate's time (equals `z_star` for ties).
    pub z_eta: Time,
    /// Censor flag of the later coordinate (`d1 || d2` for ties).
    pub delta_eta: bool,
    /// Order of the event at the minimum. Equals `eta` except for a tie
    /// with exactly one uncensored coordinate: the censored one is known to
    /// outlive the minimum, so it is the later coordinate, censored at the
    /// minimum itself.
    pub split: Order,
}

pub fn reparametrize(obs: &Observation) -> ReparamObservation {
    let (eta, z_eta, delta_eta) = match obs.z1.cmp(&obs.z2) {
        std::cmp::Ordering::Equal => (Order::Tied, obs.z1, obs.d1 || obs.d2),
        std::cmp::Ordering::Greater => (Order::FirstLater, obs.z1, obs.d1),
        std::cmp::Ordering::Less => (Order::SecondLater, obs.z2, obs.d2),
    };
    // The minimum is uncensored iff the earlier coordinate is, or either
    // coordinate is when they tie.
    let delta_star = match eta {
        Order::FirstLater => obs.d2,
        Order::SecondLater => obs.d1,
        Order::Tied => obs.d1 || obs.d2,
    };
    let split = match (eta, obs.d1, obs.d2) {
        (Order::Tied, false, true) => Order::FirstLater,
        (Order::Tied, true, false) => Order::SecondLater,
        _ => eta,
    };
    ReparamObservation {
        z_star: obs.z1.min(obs.z2),
        delta_star,
        eta,
        z_eta,
        delta_eta,
        split,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub observations: Vec<Observation>,
    pub grid: TimeGrid,
}

impl Dataset {
    /// Dataset whose grid is the distinct union of all observed times.
    pub fn new(observations: Vec<Observation>) -> Dataset {
        let grid = TimeGrid::from_unsorted(observations.iter().flat_map(|o| [o.z1, o.z2]));
        Dataset { observations, grid }
    }

    /// Dataset on an externally supplied grid; every time must lie on it.
    pub fn with_grid(observations: Vec<Observation>, grid: TimeGrid) -> Result<Dataset> {
        for o in &observations {
            grid.require_index(o.z1)?;
            grid.require_index(o.z2)?;
        }
        Ok(Dataset { observations, grid })
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// First-coordinate `(time, event)` pairs.
    pub fn first_margin(&self) -> Vec<(Time, bool)> {
        self.observations.iter().map(|o| (o.z1, o.d1)).collect()
    }

    pub fn second_margin(&self) -> Vec<(Time, bool)> {
        self.observations.iter().map(|o| (o.z2, o.d2)).collect()
    }
}

/// An exact probability law over observations `(z1, d1, z2, d2)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ObservationLaw {
    cells: BTreeMap<Observation, Rational>,
}

impl ObservationLaw {
    pub fn new() -> ObservationLaw {
        ObservationLaw::default()
    }

    pub fn add(&mut self, obs: Observation, probability: Rational) -> Result<()> {
        if probability.is_negative() {
            return Err(Error::InvalidParameter(
                "negative probability in observation law".into(),
            ));
        }
        if probability.is_zero() {
            return Ok(());
        }
        *self.cells.entry(obs).or_insert_with(Rational::zero) += probability;
        Ok(())
    }

    /// The empirical law of a dataset (mass 1/n per observation).
    pub fn empirical(ds: &Dataset) -> Result<ObservationLaw> {
        if ds.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let unit = Rational::new(1.into(), ds.len().into());
        let mut law = ObservationLaw::new();
        for o in &ds.observations {
            law.add(*o, unit.clone())?;
        }
        Ok(law)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Observation, &Rational)> {
        self.cells.iter()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.cells.values().fold(Rational::zero(), |acc, p| acc + p)
    }

    pub fn grid(&self) -> TimeGrid {
        TimeGrid::from_unsorted(self.cells.keys().flat_map(|o| [o.z1, o.z2]))
    }
}

mod flag {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(u8::from(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
        match u8::deserialize(d)? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(serde::de::Error::custom(format!(
                "censor flag must be 0 or 1, got {other}"
            ))),
        }
    }
}
