use serde::{Deserialize, Serialize};

use super::{reparametrize, Dataset, TimeGrid};
use crate::error::{Error, Result};

/// The coordinate that outlives the minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::First, Side::Second];

    /// Position in the per-side tables (0 for the first coordinate).
    pub fn slot(self) -> usize {
        match self {
            Side::First => 0,
            Side::Second => 1,
        }
    }

    /// Grid-index pair `(first, second)` for a minimum at `base` and the
    /// later coordinate at `later`.
    pub fn cell(self, base: usize, later: usize) -> (usize, usize) {
        match self {
            Side::First => (later, base),
            Side::Second => (base, later),
        }
    }
}

/// Risk-set and event counts on a grid.
///
/// Conditional tables are indexed `[i][side.slot()][d - 1]` for offsets
/// `d = 1..grid.len() - i`, i.e. grid positions strictly after `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountStatistics {
    pub grid: TimeGrid,
    pub y_star: Vec<u64>,
    pub dn_star: Vec<u64>,
    pub n_eps: Vec<[u64; 3]>,
    pub y_cond: Vec<[Vec<u64>; 2]>,
    pub dn_cond: Vec<[Vec<u64>; 2]>,
}

impl CountStatistics {
    pub fn zeros(grid: TimeGrid) -> CountStatistics {
        let g = grid.len();
        let tables = (0..g)
            .map(|i| [vec![0; g - 1 - i], vec![0; g - 1 - i]])
            .collect::<Vec<_>>();
        CountStatistics {
            y_star: vec![0; g],
            dn_star: vec![0; g],
            n_eps: vec![[0; 3]; g],
            y_cond: tables.clone(),
            dn_cond: tables,
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn y_cond(&self, i: usize, side: Side, d: usize) -> u64 {
        self.y_cond[i][side.slot()][d - 1]
    }

    pub fn dn_cond(&self, i: usize, side: Side, d: usize) -> u64 {
        self.dn_cond[i][side.slot()][d - 1]
    }

    /// Number of observations counted (those at risk at the first grid point).
    pub fn sample_size(&self) -> u64 {
        self.y_star.first().copied().unwrap_or(0)
    }

    /// Elementwise sum of counts from disjoint samples on the same grid.
    pub fn merge(&self, other: &CountStatistics) -> Result<CountStatistics> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "cannot merge counts on different grids".into(),
            ));
        }
        let add = |a: &[u64], b: &[u64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        let add_tables = |a: &[[Vec<u64>; 2]], b: &[[Vec<u64>; 2]]| {
            a.iter()
                .zip(b)
                .map(|(x, y)| [add(&x[0], &y[0]), add(&x[1], &y[1])])
                .collect::<Vec<_>>()
        };
        Ok(CountStatistics {
            grid: self.grid.clone(),
            y_star: add(&self.y_star, &other.y_star),
            dn_star: add(&self.dn_star, &other.dn_star),
            n_eps: self
                .n_eps
                .iter()
                .zip(&other.n_eps)
                .map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
                .collect(),
            y_cond: add_tables(&self.y_cond, &other.y_cond),
            dn_cond: add_tables(&self.dn_cond, &other.dn_cond),
        })
    }
}

/// Counts on the dataset's grid. Observations whose minimum is censored
/// only enter the minimum-time risk sets.
pub fn compute_counts(ds: &Dataset) -> Result<CountStatistics> {
    let g = ds.grid.len();
    let mut counts = CountStatistics::zeros(ds.grid.clone());
    let mut at_min = vec![0u64; g];
    for obs in &ds.observations {
        let r = reparametrize(obs);
        let i = ds.grid.require_index(r.z_star)?;
        at_min[i] += 1;
        if !r.delta_star {
            continue;
        }
        counts.dn_star[i] += 1;
        counts.n_eps[i][r.split.index()] += 1;
        let Some(side) = r.split.side() else { continue };
        let later = ds.grid.require_index(r.z_eta)?;
        let span = later - i;
        for d in 1..=span {
            counts.y_cond[i][side.slot()][d - 1] += 1;
        }
        if r.delta_eta && span > 0 {
            counts.dn_cond[i][side.slot()][span - 1] += 1;
        }
    }
    let mut at_risk = 0;
    for i in (0..g).rev() {
        at_risk += at_min[i];
        counts.y_star[i] = at_risk;
    }
    Ok(counts)
}
