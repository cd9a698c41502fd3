//! Dabrowska's bivariate product-limit surface and a rectangle-mass audit.
//!
//! The surface is
//!
//! ```text
//! S(s,t) = S1(s) S2(t) prod_{0<u<=s, 0<v<=t} [1 - L(u,v)]
//! L = (L10 L01 - L11) / ((1 - L10)(1 - L01))
//! ```
//!
//! where `S1`, `S2` are the marginal Kaplan–Meier curves and `L10`, `L01`,
//! `L11` are the single and double event hazards among pairs with
//! `z1 >= u` and `z2 >= v`. Nothing forces it to be a survival function, so
//! some rectangles can receive negative mass; [`mass_audit`] finds them.

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::betaproc2d::BivariateMass;
use crate::error::{Error, Result};
use crate::exact::{int, ratio_or_zero, serde_exact, Rational};
use crate::survdata::{Dataset, Time, TimeGrid};
use crate::univariate::km_survival;

/// Surface values on the grid closure: index 0 stands for time zero (below
/// every grid point) and index `k >= 1` for grid time `k - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSurface {
    pub grid: TimeGrid,
    #[serde(with = "serde_exact")]
    pub values: Vec<Vec<Rational>>,
}

impl SurvivalSurface {
    pub fn value(&self, k: usize, l: usize) -> &Rational {
        &self.values[k][l]
    }

    /// `S(s, t)` for arbitrary times (the surface is a right-continuous step
    /// function of both arguments).
    pub fn at(&self, s: Time, t: Time) -> Rational {
        self.values[self.grid.count_at_or_below(s)][self.grid.count_at_or_below(t)].clone()
    }

    /// The survival surface of a discrete mass, defects at their placements.
    pub fn from_mass(m: &BivariateMass) -> SurvivalSurface {
        let g = m.grid().len();
        let mut cells = vec![vec![Rational::zero(); g + 1]; g + 1];
        for ((i, j), p) in m.located() {
            cells[i + 1][j + 1] += p;
        }
        // values[k][l] = mass on cells with first index >= k and second >= l
        let mut values = vec![vec![Rational::zero(); g + 2]; g + 2];
        for k in (0..=g).rev() {
            for l in (0..=g).rev() {
                let own = if k < g && l < g {
                    cells[k + 1][l + 1].clone()
                } else {
                    Rational::zero()
                };
                values[k][l] = own + &values[k + 1][l] + &values[k][l + 1] - &values[k + 1][l + 1];
            }
        }
        values.truncate(g + 1);
        for row in &mut values {
            row.truncate(g + 1);
        }
        SurvivalSurface {
            grid: m.grid().clone(),
            values,
        }
    }
}

pub fn dabrowska_estimate(ds: &Dataset) -> Result<SurvivalSurface> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let grid = &ds.grid;
    let g = grid.len();
    let s1 = km_survival(&ds.first_margin(), grid)?;
    let s2 = km_survival(&ds.second_margin(), grid)?;

    // counts at exact grid pairs, then suffix sums over the "later" axis
    let mut any = vec![vec![0u64; g + 1]; g + 1];
    let mut first_event = vec![vec![0u64; g + 1]; g + 1];
    let mut second_event = vec![vec![0u64; g + 1]; g + 1];
    let mut both = vec![vec![0u64; g]; g];
    for o in &ds.observations {
        let (i, j) = (grid.require_index(o.z1)?, grid.require_index(o.z2)?);
        any[i][j] += 1;
        if o.d1 {
            first_event[i][j] += 1;
        }
        if o.d2 {
            second_event[i][j] += 1;
        }
        if o.d1 && o.d2 {
            both[i][j] += 1;
        }
    }
    // at_risk[i][j] = #{z1 >= t_i, z2 >= t_j}
    let mut at_risk = vec![vec![0u64; g + 1]; g + 1];
    for i in (0..g).rev() {
        for j in (0..g).rev() {
            at_risk[i][j] =
                any[i][j] + at_risk[i + 1][j] + at_risk[i][j + 1] - at_risk[i + 1][j + 1];
        }
    }
    // first_at[i][j] = #{z1 = t_i, d1, z2 >= t_j}; second_at[i][j] = #{z1 >= t_i, z2 = t_j, d2}
    let mut first_at = vec![vec![0u64; g + 1]; g + 1];
    let mut second_at = vec![vec![0u64; g + 1]; g + 1];
    for i in (0..g).rev() {
        for j in (0..g).rev() {
            first_at[i][j] = first_event[i][j] + first_at[i][j + 1];
            second_at[i][j] = second_event[i][j] + second_at[i + 1][j];
        }
    }

    let factor = |i: usize, j: usize| -> Rational {
        let y = int(at_risk[i][j]);
        let l10 = ratio_or_zero(&int(first_at[i][j]), &y);
        let l01 = ratio_or_zero(&int(second_at[i][j]), &y);
        let l11 = ratio_or_zero(&int(both[i][j]), &y);
        let denom = (Rational::one() - &l10) * (Rational::one() - &l01);
        if denom.is_zero() {
            return Rational::one();
        }
        Rational::one() - (&l10 * &l01 - &l11) / denom
    };

    let mut values = vec![vec![Rational::zero(); g + 1]; g + 1];
    values[0][0] = Rational::one();
    for k in 1..=g {
        values[k][0] = s1[k - 1].clone();
        values[0][k] = s2[k - 1].clone();
    }
    // cross[k][l] = prod over u <= t_k, v <= t_l of the correction factor
    let mut cross = vec![vec![Rational::one(); g + 1]; g + 1];
    for k in 1..=g {
        let mut row = Rational::one();
        for l in 1..=g {
            row *= factor(k - 1, l - 1);
            cross[k][l] = &cross[k - 1][l] * &row;
            values[k][l] = &s1[k - 1] * &s2[l - 1] * &cross[k][l];
        }
    }
    Ok(SurvivalSurface {
        grid: grid.clone(),
        values,
    })
}

/// Signed mass of one finest rectangle `(u1, u2] x (v1, v2]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellMass {
    pub u1: Time,
    pub u2: Time,
    pub v1: Time,
    pub v2: Time,
    #[serde(with = "serde_exact")]
    pub mass: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassAudit {
    pub cells: Vec<CellMass>,
    pub negatives: Vec<CellMass>,
}

impl MassAudit {
    pub fn total(&self) -> Rational {
        self.cells.iter().fold(Rational::zero(), |a, c| a + &c.mass)
    }
}

/// Inclusion–exclusion mass of every cell between adjacent closure points.
pub fn mass_audit(s: &SurvivalSurface) -> MassAudit {
    let g = s.grid.len();
    let time = |k: usize| {
        if k == 0 {
            Time::ZERO
        } else {
            s.grid.get(k - 1)
        }
    };
    let mut cells = Vec::with_capacity(g * g);
    for k in 1..=g {
        for l in 1..=g {
            let mass =
                s.value(k - 1, l - 1) - s.value(k, l - 1) - s.value(k - 1, l) + s.value(k, l);
            cells.push(CellMass {
                u1: time(k - 1),
                u2: time(k),
                v1: time(l - 1),
                v2: time(l),
                mass,
            });
        }
    }
    let negatives = cells
        .iter()
        .filter(|c| c.mass.is_negative())
        .cloned()
        .collect();
    MassAudit { cells, negatives }
}

/// Mass of an arbitrary rectangle `(u1, u2] x (v1, v2]`.
pub fn rectangle_mass(s: &SurvivalSurface, u1: Time, u2: Time, v1: Time, v2: Time) -> Rational {
    s.at(u1, v1) - s.at(u2, v1) - s.at(u1, v2) + s.at(u2, v2)
}
