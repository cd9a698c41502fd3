//! One-dimensional censoring machinery shared by every stratum of the
//! bivariate estimators: discrete hazards, product-limit curves and the
//! conjugate Beta update of grid hazards.

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, is_nonnegative, ratio_or_zero, serde_exact, Rational};
use crate::survdata::{Time, TimeGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardCurve {
    pub grid: TimeGrid,
    #[serde(with = "serde_exact")]
    pub h: Vec<Rational>,
    /// Grid positions where the hazard was 0/0 and set to zero.
    #[serde(default)]
    pub no_risk: Vec<usize>,
}

impl HazardCurve {
    pub fn new(grid: TimeGrid, h: Vec<Rational>) -> Result<HazardCurve> {
        if grid.is_empty() || grid.len() != h.len() {
            return Err(Error::InvalidParameter(
                "hazard curve needs one hazard per point of a nonempty grid".into(),
            ));
        }
        if h.iter().any(|v| !is_nonnegative(v) || *v > Rational::one()) {
            return Err(Error::InvalidParameter("hazards must lie in [0, 1]".into()));
        }
        Ok(HazardCurve {
            grid,
            h,
            no_risk: Vec::new(),
        })
    }
}

/// Residual probability left unassigned by a product-limit construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    #[serde(with = "serde_exact")]
    pub mass: Rational,
    /// Grid position the residual is attributed to.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassCurve {
    pub grid: TimeGrid,
    #[serde(with = "serde_exact")]
    pub mass: Vec<Rational>,
    pub defect: Option<Defect>,
}

impl MassCurve {
    /// Total assigned mass plus defect.
    pub fn total(&self) -> Rational {
        let placed = self.mass.iter().fold(Rational::zero(), |a, m| a + m);
        placed
            + self
                .defect
                .as_ref()
                .map_or_else(Rational::zero, |d| d.mass.clone())
    }

    /// `P{T > t}` with the defect counted at its placement.
    pub fn survival(&self, t: Time) -> Rational {
        let first_after = self.grid.count_at_or_below(t);
        let mut s: Rational = self.mass[first_after..]
            .iter()
            .fold(Rational::zero(), |a, m| a + m);
        if let Some(d) = &self.defect {
            if d.index >= first_after {
                s += &d.mass;
            }
        }
        s
    }
}

/// Point masses `h(i) * prod_{j<i} (1 - h(j))`, with any residual placed at
/// the last grid point.
pub fn hazards_to_mass(h: &HazardCurve) -> MassCurve {
    hazards_to_mass_at(h, h.grid.len() - 1)
}

pub(crate) fn hazards_to_mass_at(h: &HazardCurve, placement: usize) -> MassCurve {
    let mut survival = Rational::one();
    let mut mass = Vec::with_capacity(h.h.len());
    for hazard in &h.h {
        let m = &survival * hazard;
        survival -= &m;
        mass.push(m);
    }
    let defect = (!survival.is_zero()).then_some(Defect {
        mass: survival,
        index: placement,
    });
    MassCurve {
        grid: h.grid.clone(),
        mass,
        defect,
    }
}

struct RiskCounts {
    at_risk: Vec<u64>,
    events: Vec<u64>,
    last_observed: usize,
}

fn risk_counts(pairs: &[(Time, bool)], grid: &TimeGrid) -> Result<RiskCounts> {
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let mut at = vec![0u64; grid.len()];
    let mut events = vec![0u64; grid.len()];
    let mut last_observed = 0;
    for &(t, event) in pairs {
        let i = grid.require_index(t)?;
        at[i] += 1;
        events[i] += u64::from(event);
        last_observed = last_observed.max(i);
    }
    let mut at_risk = vec![0u64; grid.len()];
    let mut running = 0;
    for i in (0..grid.len()).rev() {
        running += at[i];
        at_risk[i] = running;
    }
    Ok(RiskCounts {
        at_risk,
        events,
        last_observed,
    })
}

/// Kaplan–Meier hazards `dN / Y` on the grid (0/0 counts as zero and is
/// recorded in `no_risk`).
pub fn km_hazards(pairs: &[(Time, bool)], grid: &TimeGrid) -> Result<HazardCurve> {
    let rc = risk_counts(pairs, grid)?;
    let mut no_risk = Vec::new();
    let h = rc
        .at_risk
        .iter()
        .zip(&rc.events)
        .enumerate()
        .map(|(i, (&y, &dn))| {
            if y == 0 {
                no_risk.push(i);
            }
            ratio_or_zero(&int(dn), &int(y))
        })
        .collect();
    Ok(HazardCurve {
        grid: grid.clone(),
        h,
        no_risk,
    })
}

/// Kaplan–Meier estimate as a mass curve. A residual (last observation
/// censored) is placed at the largest observed time.
pub fn km(pairs: &[(Time, bool)], grid: &TimeGrid) -> Result<MassCurve> {
    let hazards = km_hazards(pairs, grid)?;
    let placement = risk_counts(pairs, grid)?.last_observed;
    Ok(hazards_to_mass_at(&hazards, placement))
}

/// Product-limit survival `S(t_i) = prod_{j<=i} (1 - h(j))` at every grid point.
pub fn km_survival(pairs: &[(Time, bool)], grid: &TimeGrid) -> Result<Vec<Rational>> {
    let hazards = km_hazards(pairs, grid)?;
    let mut s = Rational::one();
    Ok(hazards
        .h
        .iter()
        .map(|h| {
            s = &s * (Rational::one() - h);
            s.clone()
        })
        .collect())
}

/// Independent Beta weights for the hazard at each grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior1D {
    pub grid: TimeGrid,
    #[serde(with = "serde_exact")]
    pub a: Vec<Rational>,
    #[serde(with = "serde_exact")]
    pub b: Vec<Rational>,
}

impl BetaPrior1D {
    pub fn new(grid: TimeGrid, a: Vec<Rational>, b: Vec<Rational>) -> Result<BetaPrior1D> {
        if a.len() != grid.len() || b.len() != grid.len() {
            return Err(Error::InvalidParameter(
                "one weight pair per grid point required".into(),
            ));
        }
        if a.iter().chain(&b).any(|w| !is_nonnegative(w)) {
            return Err(Error::InvalidParameter(
                "Beta weights must be nonnegative".into(),
            ));
        }
        Ok(BetaPrior1D { grid, a, b })
    }

    /// All-zero weights: the noninformative limit.
    pub fn zeros(grid: TimeGrid) -> BetaPrior1D {
        let g = grid.len();
        BetaPrior1D {
            grid,
            a: vec![Rational::zero(); g],
            b: vec![Rational::zero(); g],
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn scaled(&self, factor: &Rational) -> BetaPrior1D {
        BetaPrior1D {
            grid: self.grid.clone(),
            a: self.a.iter().map(|w| w * factor).collect(),
            b: self.b.iter().map(|w| w * factor).collect(),
        }
    }

    pub fn is_weighted(&self, i: usize) -> bool {
        !(self.a[i].is_zero() && self.b[i].is_zero())
    }

    /// Posterior mean hazard at one point (`a / (a + b)`, zero when unweighted).
    pub fn mean_at(&self, i: usize) -> Rational {
        ratio_or_zero(&self.a[i], &(&self.a[i] + &self.b[i]))
    }

    /// Last grid position carrying any weight.
    pub fn last_weighted(&self) -> Option<usize> {
        (0..self.len()).rev().find(|&i| self.is_weighted(i))
    }
}

/// Conjugate update: `a + dN`, `b + Y - dN`.
pub fn beta_posterior_1d(prior: &BetaPrior1D, dn: &[u64], y: &[u64]) -> Result<BetaPrior1D> {
    if dn.len() != prior.len() || y.len() != prior.len() {
        return Err(Error::GridMismatch(
            "counts and prior have different lengths".into(),
        ));
    }
    if let Some(i) = (0..y.len()).find(|&i| dn[i] > y[i]) {
        return Err(Error::Consistency(format!(
            "{} events exceed {} at risk at grid position {i}",
            dn[i], y[i]
        )));
    }
    Ok(BetaPrior1D {
        grid: prior.grid.clone(),
        a: prior.a.iter().zip(dn).map(|(a, &d)| a + int(d)).collect(),
        b: prior
            .b
            .iter()
            .zip(dn.iter().zip(y))
            .map(|(b, (&d, &y))| b + int(y - d))
            .collect(),
    })
}

pub fn posterior_mean_hazard(p: &BetaPrior1D) -> HazardCurve {
    let mut no_risk = Vec::new();
    let h = (0..p.len())
        .map(|i| {
            if !p.is_weighted(i) {
                no_risk.push(i);
            }
            p.mean_at(i)
        })
        .collect();
    HazardCurve {
        grid: p.grid.clone(),
        h,
        no_risk,
    }
}
