//! Assembly of a joint mass from the minimum-time hazards, the order split
//! and the later coordinate's conditional hazards:
//!
//! ```text
//! P{T1 = t_{i+d}, T2 = t_i} = S*(i-) h*(i) p(1|i) prod_{d'<d} (1 - h_1(d'|i)) h_1(d|i)
//! ```
//!
//! with the mirror image for the second coordinate and `S*(i-) h*(i) p(0|i)`
//! on the diagonal. Each stratum's residual survival is kept as a defect.

use num::{One, Zero};

use super::mass::{BivariateMass, Stratum};
use super::params::BivariateBetaParams;
use crate::error::{Error, Result};
use crate::exact::{int, ratio_or_zero, Rational};
use crate::survdata::{reparametrize, CountStatistics, ObservationLaw, Side, TimeGrid};

/// Source of the factors in the product formula.
pub(crate) trait Strata {
    fn grid(&self) -> &TimeGrid;
    fn min_hazard(&mut self, i: usize) -> Result<Rational>;
    /// Grid position receiving the minimum-time residual.
    fn min_placement(&self) -> usize;
    /// Order probabilities (tie, first later, second later); `None` if undefined.
    fn split(&mut self, i: usize) -> Result<Option<[Rational; 3]>>;
    fn cond_hazard(&mut self, i: usize, side: Side, d: usize) -> Result<Rational>;
    /// Offset receiving a conditional stratum's residual.
    fn cond_placement(&self, i: usize, side: Side) -> Option<usize>;
}

pub(crate) fn assemble<S: Strata>(strata: &mut S) -> Result<BivariateMass> {
    let grid = strata.grid().clone();
    let g = grid.len();
    let mut out = BivariateMass::empty(grid);
    let mut survival = Rational::one();
    for i in 0..g {
        if survival.is_zero() {
            break;
        }
        let released = &survival * strata.min_hazard(i)?;
        survival -= &released;
        if released.is_zero() {
            continue;
        }
        let Some(split) = strata.split(i)? else {
            out.add_defect(Stratum::Unsplit { index: i }, (i, i), released);
            continue;
        };
        out.add_atom((i, i), &released * &split[0])?;
        for side in Side::BOTH {
            let mut remaining = &released * &split[side.slot() + 1];
            for d in 1..g - i {
                if remaining.is_zero() {
                    break;
                }
                let m = &remaining * strata.cond_hazard(i, side, d)?;
                remaining -= &m;
                out.add_atom(side.cell(i, i + d), m)?;
            }
            if !remaining.is_zero() {
                let cell = strata
                    .cond_placement(i, side)
                    .map_or((i, i), |d| side.cell(i, i + d));
                out.add_defect(Stratum::Conditional { index: i, side }, cell, remaining);
            }
        }
    }
    if !survival.is_zero() {
        let p = strata.min_placement();
        out.add_defect(Stratum::Minimum, (p, p), survival);
    }
    Ok(out)
}

struct PosteriorMeans<'a>(&'a BivariateBetaParams);

impl Strata for PosteriorMeans<'_> {
    fn grid(&self) -> &TimeGrid {
        &self.0.grid
    }

    fn min_hazard(&mut self, i: usize) -> Result<Rational> {
        Ok(self.0.star.mean_at(i))
    }

    fn min_placement(&self) -> usize {
        self.0.star.last_weighted().unwrap_or(self.0.grid.len() - 1)
    }

    fn split(&mut self, i: usize) -> Result<Option<[Rational; 3]>> {
        let w = &self.0.dirichlet[i];
        let total = &w[0] + &w[1] + &w[2];
        Ok((!total.is_zero()).then(|| w.clone().map(|x| x / &total)))
    }

    fn cond_hazard(&mut self, i: usize, side: Side, d: usize) -> Result<Rational> {
        Ok(self.0.cond_for(i, side).mean_at(d - 1))
    }

    fn cond_placement(&self, i: usize, side: Side) -> Option<usize> {
        self.0.cond_for(i, side).last_weighted().map(|k| k + 1)
    }
}

/// Posterior-mean joint mass. The components stay independent under the
/// update, so the mean of each product is the product of the means.
pub fn posterior_mean_mass(p: &BivariateBetaParams) -> Result<BivariateMass> {
    p.validate()?;
    if p.grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    assemble(&mut PosteriorMeans(p))
}

/// Risk sets and event counts with rational weights: integer counts for a
/// sample, probabilities for an exact observation law.
pub(crate) struct RiskTable {
    grid: TimeGrid,
    y_star: Vec<Rational>,
    dn_star: Vec<Rational>,
    n_eps: Vec<[Rational; 3]>,
    y_cond: Vec<[Vec<Rational>; 2]>,
    dn_cond: Vec<[Vec<Rational>; 2]>,
}

impl RiskTable {
    fn from_counts(c: &CountStatistics) -> RiskTable {
        let ints = |v: &[u64]| v.iter().map(|&x| int(x)).collect::<Vec<_>>();
        let tables = |t: &[[Vec<u64>; 2]]| t.iter().map(|p| [ints(&p[0]), ints(&p[1])]).collect();
        RiskTable {
            grid: c.grid.clone(),
            y_star: ints(&c.y_star),
            dn_star: ints(&c.dn_star),
            n_eps: c.n_eps.iter().map(|n| n.map(int)).collect(),
            y_cond: tables(&c.y_cond),
            dn_cond: tables(&c.dn_cond),
        }
    }

    fn from_law(law: &ObservationLaw) -> Result<RiskTable> {
        let grid = law.grid();
        let g = grid.len();
        let zero = Rational::zero;
        let mut at_min = vec![zero(); g];
        let mut t = RiskTable {
            y_star: vec![zero(); g],
            dn_star: vec![zero(); g],
            n_eps: vec![[zero(), zero(), zero()]; g],
            y_cond: (0..g)
                .map(|i| [vec![zero(); g - 1 - i], vec![zero(); g - 1 - i]])
                .collect(),
            dn_cond: (0..g)
                .map(|i| [vec![zero(); g - 1 - i], vec![zero(); g - 1 - i]])
                .collect(),
            grid,
        };
        for (obs, p) in law.iter() {
            let r = reparametrize(obs);
            let i = t.grid.require_index(r.z_star)?;
            at_min[i] += p;
            if !r.delta_star {
                continue;
            }
            t.dn_star[i] += p;
            t.n_eps[i][r.split.index()] += p;
            let Some(side) = r.split.side() else { continue };
            let span = t.grid.require_index(r.z_eta)? - i;
            for d in 1..=span {
                t.y_cond[i][side.slot()][d - 1] += p;
            }
            if r.delta_eta && span > 0 {
                t.dn_cond[i][side.slot()][span - 1] += p;
            }
        }
        let mut running = zero();
        for i in (0..g).rev() {
            running += &at_min[i];
            t.y_star[i] = running.clone();
        }
        Ok(t)
    }
}

/// Empirical ratios `dN / Y` in every stratum, 0/0 read as zero.
struct EmpiricalRatios<'a>(&'a RiskTable);

impl Strata for EmpiricalRatios<'_> {
    fn grid(&self) -> &TimeGrid {
        &self.0.grid
    }

    fn min_hazard(&mut self, i: usize) -> Result<Rational> {
        Ok(ratio_or_zero(&self.0.dn_star[i], &self.0.y_star[i]))
    }

    fn min_placement(&self) -> usize {
        let t = self.0;
        (0..t.grid.len())
            .rev()
            .find(|&i| !t.y_star[i].is_zero())
            .unwrap_or(t.grid.len() - 1)
    }

    fn split(&mut self, i: usize) -> Result<Option<[Rational; 3]>> {
        let events = &self.0.dn_star[i];
        Ok(Some(
            self.0.n_eps[i].clone().map(|n| ratio_or_zero(&n, events)),
        ))
    }

    fn cond_hazard(&mut self, i: usize, side: Side, d: usize) -> Result<Rational> {
        let s = side.slot();
        Ok(ratio_or_zero(
            &self.0.dn_cond[i][s][d - 1],
            &self.0.y_cond[i][s][d - 1],
        ))
    }

    fn cond_placement(&self, i: usize, side: Side) -> Option<usize> {
        let risk = &self.0.y_cond[i][side.slot()];
        (0..risk.len())
            .rev()
            .find(|&k| !risk[k].is_zero())
            .map(|k| k + 1)
    }
}

/// The limit of the posterior mean as every prior weight shrinks to zero:
/// each hazard becomes its empirical ratio.
pub fn noninformative_estimate(c: &CountStatistics) -> Result<BivariateMass> {
    if c.is_empty() || c.sample_size() == 0 {
        return Err(Error::EmptyDataset);
    }
    assemble(&mut EmpiricalRatios(&RiskTable::from_counts(c)))
}

/// Inverts an exact observation law back to the joint law of `(T1, T2)`
/// using only the parts with an uncensored minimum. Fails when some stratum
/// keeps residual mass the law cannot locate.
pub fn recover_distribution(law: &ObservationLaw) -> Result<BivariateMass> {
    if law.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let m = assemble(&mut EmpiricalRatios(&RiskTable::from_law(law)?))?;
    if let Some(d) = m.defects().first() {
        return Err(Error::Identifiability(format!(
            "mass {} in stratum {:?} falls beyond the censoring support",
            d.mass, d.stratum
        )));
    }
    Ok(m)
}
