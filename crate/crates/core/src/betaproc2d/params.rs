use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize};

use super::mass::BivariateMass;
use crate::error::{Error, Result};
use crate::exact::{int, ratio, ratio_or_zero, serde_exact, Rational};
use crate::survdata::{CountStatistics, Side, TimeGrid};
use crate::univariate::{beta_posterior_1d, BetaPrior1D};

/// Parameters of a discrete-time bivariate Beta process.
///
/// * `star`: Beta weights for the hazard of the minimum time;
/// * `dirichlet[i]`: weights for which coordinate outlives a minimum at `i`
///   (tie, first later, second later);
/// * `cond[i][side]`: Beta weights for the later coordinate's hazard over the
///   grid positions after `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BivariateBetaParams {
    pub grid: TimeGrid,
    pub star: BetaPrior1D,
    #[serde(with = "serde_exact")]
    pub dirichlet: Vec<[Rational; 3]>,
    pub cond: Vec<[BetaPrior1D; 2]>,
}

impl BivariateBetaParams {
    /// Every weight zero (the noninformative limit).
    pub fn zeros(grid: TimeGrid) -> BivariateBetaParams {
        Self::constant(grid, Rational::zero())
    }

    /// Every weight equal to `w`.
    pub fn constant(grid: TimeGrid, w: Rational) -> BivariateBetaParams {
        let g = grid.len();
        let uniform = |grid: TimeGrid| {
            let n = grid.len();
            BetaPrior1D {
                grid,
                a: vec![w.clone(); n],
                b: vec![w.clone(); n],
            }
        };
        BivariateBetaParams {
            star: uniform(grid.clone()),
            dirichlet: vec![[w.clone(), w.clone(), w.clone()]; g],
            cond: (0..g)
                .map(|i| [uniform(grid.tail(i)), uniform(grid.tail(i))])
                .collect(),
            grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = self.grid.len();
        let shape_ok = self.star.grid == self.grid
            && self.star.a.len() == g
            && self.star.b.len() == g
            && self.dirichlet.len() == g
            && self.cond.len() == g
            && self.cond.iter().enumerate().all(|(i, pair)| {
                pair.iter().all(|c| {
                    c.grid == self.grid.tail(i) && c.a.len() == g - 1 - i && c.b.len() == g - 1 - i
                })
            });
        if !shape_ok {
            return Err(Error::InvalidParameter(
                "parameter tables do not match the grid".into(),
            ));
        }
        let negative = self
            .star
            .a
            .iter()
            .chain(&self.star.b)
            .chain(self.dirichlet.iter().flatten())
            .chain(
                self.cond
                    .iter()
                    .flatten()
                    .flat_map(|c| c.a.iter().chain(&c.b)),
            )
            .any(|w| w.is_negative());
        if negative {
            return Err(Error::InvalidParameter(
                "weights must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// All weights multiplied by `factor`.
    pub fn scaled(&self, factor: &Rational) -> BivariateBetaParams {
        BivariateBetaParams {
            grid: self.grid.clone(),
            star: self.star.scaled(factor),
            dirichlet: self
                .dirichlet
                .iter()
                .map(|d| d.clone().map(|w| w * factor))
                .collect(),
            cond: self
                .cond
                .iter()
                .map(|pair| pair.clone().map(|c| c.scaled(factor)))
                .collect(),
        }
    }

    pub fn cond_for(&self, i: usize, side: Side) -> &BetaPrior1D {
        &self.cond[i][side.slot()]
    }
}

/// Conjugate update under the incomplete likelihood: minimum-time weights
/// absorb every observation, the split and conditional weights only those
/// with an uncensored minimum.
pub fn update(prior: &BivariateBetaParams, c: &CountStatistics) -> Result<BivariateBetaParams> {
    if prior.grid != c.grid {
        return Err(Error::GridMismatch(
            "prior and counts are defined on different grids".into(),
        ));
    }
    prior.validate()?;
    let star = beta_posterior_1d(&prior.star, &c.dn_star, &c.y_star)?;
    let dirichlet = prior
        .dirichlet
        .iter()
        .zip(&c.n_eps)
        .map(|(w, n)| [&w[0] + int(n[0]), &w[1] + int(n[1]), &w[2] + int(n[2])])
        .collect();
    let cond = prior
        .cond
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            Ok([
                beta_posterior_1d(&pair[0], &c.dn_cond[i][0], &c.y_cond[i][0])?,
                beta_posterior_1d(&pair[1], &c.dn_cond[i][1], &c.y_cond[i][1])?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BivariateBetaParams {
        grid: prior.grid.clone(),
        star,
        dirichlet,
        cond,
    })
}

/// A prior guess `f0` for the joint law together with concentration weights
/// for each Beta / Dirichlet component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorGuess {
    pub f0: BivariateMass,
    #[serde(with = "serde_exact")]
    pub w_star: Vec<Rational>,
    #[serde(with = "serde_exact")]
    pub w_cond: Vec<[Vec<Rational>; 2]>,
    #[serde(with = "serde_exact")]
    pub w_dir: Vec<Rational>,
}

impl PriorGuess {
    /// The same concentration `w` for every component.
    pub fn with_concentration(f0: BivariateMass, w: Rational) -> PriorGuess {
        let g = f0.grid().len();
        PriorGuess {
            w_star: vec![w.clone(); g],
            w_cond: (0..g)
                .map(|i| [vec![w.clone(); g - 1 - i], vec![w.clone(); g - 1 - i]])
                .collect(),
            w_dir: vec![w; g],
            f0,
        }
    }
}

impl<'de> Deserialize<'de> for PriorGuess {
    /// Either full per-component weights, or a single `concentration`.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<PriorGuess, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        struct Repr {
            f0: BivariateMass,
            #[serde(default, with = "serde_exact")]
            concentration: Option<Rational>,
            #[serde(default, with = "serde_exact")]
            w_star: Option<Vec<Rational>>,
            #[serde(default, with = "serde_exact")]
            w_cond: Option<Vec<[Vec<Rational>; 2]>>,
            #[serde(default, with = "serde_exact")]
            w_dir: Option<Vec<Rational>>,
        }
        let r = Repr::deserialize(d)?;
        match (r.w_star, r.w_cond, r.w_dir, r.concentration) {
            (Some(w_star), Some(w_cond), Some(w_dir), None) => Ok(PriorGuess {
                f0: r.f0,
                w_star,
                w_cond,
                w_dir,
            }),
            (None, None, None, Some(w)) => Ok(PriorGuess::with_concentration(r.f0, w)),
            _ => Err(D::Error::custom(
                "prior needs either `concentration` or all of `w_star`, `w_cond`, `w_dir`",
            )),
        }
    }
}

/// The guess distribution expressed through the minimum time: hazards of the
/// minimum, order probabilities given the minimum, and hazards of the later
/// coordinate given the minimum and order.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub min_hazard: Vec<Rational>,
    pub order: Vec<[Rational; 3]>,
    pub cond_hazard: Vec<[Vec<Rational>; 2]>,
}

/// Undefined conditionals (zero-probability conditioning events) become
/// hazard 0 and order probabilities 1/3 each.
pub fn decompose(m: &BivariateMass) -> Decomposition {
    let g = m.grid().len();
    let cells = m.located_masses();
    let mut at_min = vec![Rational::zero(); g];
    let mut by_order = vec![[Rational::zero(), Rational::zero(), Rational::zero()]; g];
    let mut later = vec![[vec![Rational::zero(); g], vec![Rational::zero(); g]]; g];
    for (&(i1, i2), p) in &cells {
        let i = i1.min(i2);
        at_min[i] += p;
        let (order, slot_later) = match i1.cmp(&i2) {
            std::cmp::Ordering::Equal => (0, None),
            std::cmp::Ordering::Greater => (1, Some((0, i1))),
            std::cmp::Ordering::Less => (2, Some((1, i2))),
        };
        by_order[i][order] += p;
        if let Some((slot, k)) = slot_later {
            later[i][slot][k] += p;
        }
    }
    let hazards = |masses: &[Rational]| {
        let mut tail: Rational = masses.iter().fold(Rational::zero(), |a, p| a + p);
        masses
            .iter()
            .map(|p| {
                let h = ratio_or_zero(p, &tail);
                tail -= p;
                h
            })
            .collect::<Vec<_>>()
    };
    let third = ratio(1, 3);
    Decomposition {
        min_hazard: hazards(&at_min),
        order: (0..g)
            .map(|i| {
                if at_min[i].is_zero() {
                    [third.clone(), third.clone(), third.clone()]
                } else {
                    by_order[i].clone().map(|p| p / &at_min[i])
                }
            })
            .collect(),
        cond_hazard: (0..g)
            .map(|i| {
                [
                    hazards(&later[i][0][i + 1..]),
                    hazards(&later[i][1][i + 1..]),
                ]
            })
            .collect(),
    }
}

/// Beta weights `w * h0`, `w * (1 - h0)` and Dirichlet weights `w * p0`
/// from a prior guess.
pub fn prior_from_guess(g: &PriorGuess) -> Result<BivariateBetaParams> {
    let grid = g.f0.grid().clone();
    let n = grid.len();
    if g.w_star.len() != n
        || g.w_dir.len() != n
        || g.w_cond.len() != n
        || g.w_cond
            .iter()
            .enumerate()
            .any(|(i, w)| w[0].len() != n - 1 - i || w[1].len() != n - 1 - i)
    {
        return Err(Error::InvalidParameter(
            "concentration tables do not match the grid".into(),
        ));
    }
    let all = g
        .w_star
        .iter()
        .chain(&g.w_dir)
        .chain(g.w_cond.iter().flatten().flatten());
    if all.clone().any(|w| !w.is_positive()) {
        return Err(Error::InvalidParameter(
            "concentrations must be positive".into(),
        ));
    }
    g.f0.validate()?;
    let dec = decompose(&g.f0);
    let beta = |grid: TimeGrid, w: &[Rational], h: &[Rational]| BetaPrior1D {
        grid,
        a: w.iter().zip(h).map(|(w, h)| w * h).collect(),
        b: w.iter()
            .zip(h)
            .map(|(w, h)| w * (Rational::one() - h))
            .collect(),
    };
    Ok(BivariateBetaParams {
        star: beta(grid.clone(), &g.w_star, &dec.min_hazard),
        dirichlet: dec
            .order
            .iter()
            .zip(&g.w_dir)
            .map(|(p, w)| p.clone().map(|p| p * w))
            .collect(),
        cond: (0..n)
            .map(|i| {
                [
                    beta(grid.tail(i), &g.w_cond[i][0], &dec.cond_hazard[i][0]),
                    beta(grid.tail(i), &g.w_cond[i][1], &dec.cond_hazard[i][1]),
                ]
            })
            .collect(),
        grid,
    })
}
