use num::{One, Zero};
use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use super::estimate::{assemble, Strata};
use super::mass::BivariateMass;
use super::params::BivariateBetaParams;
use crate::error::{Error, Result};
use crate::exact::{to_f64, Rational};
use crate::survdata::{Side, TimeGrid};

struct Draws<'a, R: Rng> {
    params: &'a BivariateBetaParams,
    rng: &'a mut R,
}

fn exact(v: f64) -> Result<Rational> {
    Rational::from_float(v).ok_or_else(|| Error::InvalidParameter(format!("non-finite draw {v}")))
}

/// Beta draw; a zero weight on one side makes the draw degenerate.
fn draw_beta<R: Rng>(rng: &mut R, a: &Rational, b: &Rational, at: &str) -> Result<Rational> {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => Err(Error::InvalidParameter(format!(
            "zero Beta weights at {at}"
        ))),
        (false, true) => Ok(Rational::one()),
        (true, false) => Ok(Rational::zero()),
        (false, false) => {
            let dist = Beta::new(to_f64(a), to_f64(b))
                .map_err(|e| Error::InvalidParameter(format!("Beta at {at}: {e}")))?;
            exact(dist.sample(rng))
        }
    }
}

impl<R: Rng> Strata for Draws<'_, R> {
    fn grid(&self) -> &TimeGrid {
        &self.params.grid
    }

    fn min_hazard(&mut self, i: usize) -> Result<Rational> {
        let star = &self.params.star;
        draw_beta(
            self.rng,
            &star.a[i],
            &star.b[i],
            &format!("minimum position {i}"),
        )
    }

    fn min_placement(&self) -> usize {
        self.params
            .star
            .last_weighted()
            .unwrap_or(self.params.grid.len() - 1)
    }

    fn split(&mut self, i: usize) -> Result<Option<[Rational; 3]>> {
        let mut gammas = [Rational::zero(), Rational::zero(), Rational::zero()];
        for (k, w) in self.params.dirichlet[i].iter().enumerate() {
            if !w.is_zero() {
                let dist = Gamma::new(to_f64(w), 1.0)
                    .map_err(|e| Error::InvalidParameter(format!("Dirichlet at {i}: {e}")))?;
                gammas[k] = exact(dist.sample(self.rng))?;
            }
        }
        let total = &gammas[0] + &gammas[1] + &gammas[2];
        if total.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "zero Dirichlet weights at position {i}"
            )));
        }
        Ok(Some(gammas.map(|x| x / &total)))
    }

    fn cond_hazard(&mut self, i: usize, side: Side, d: usize) -> Result<Rational> {
        let c = self.params.cond_for(i, side);
        draw_beta(
            self.rng,
            &c.a[d - 1],
            &c.b[d - 1],
            &format!("conditional ({i}, {side:?}, {d})"),
        )
    }

    fn cond_placement(&self, i: usize, side: Side) -> Option<usize> {
        self.params.cond_for(i, side).last_weighted().map(|k| k + 1)
    }
}

/// One joint mass drawn from the prior. Components are drawn lazily, only
/// where mass reaches them, so the stream of draws is a deterministic
/// function of the parameters and the generator state.
pub fn sample_prior<R: Rng>(p: &BivariateBetaParams, rng: &mut R) -> Result<BivariateMass> {
    p.validate()?;
    if p.grid.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    assemble(&mut Draws { params: p, rng })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::survdata::Time;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_point(a: Rational, b: Rational) -> BivariateBetaParams {
        let grid = TimeGrid::from_unsorted([Time::from_int(1)]);
        let mut p = BivariateBetaParams::constant(grid, int(0));
        p.star.a[0] = a;
        p.star.b[0] = b;
        p.dirichlet[0] = [int(1), int(0), int(0)];
        p
    }

    #[test]
    fn concentrated_prior_gives_unit_hazard() {
        let p = single_point(int(1_000_000_000_000), int(1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = sample_prior(&p, &mut rng).unwrap();
        assert!((to_f64(&m.atom((0, 0))) - 1.0).abs() < 1e-5);
        assert_eq!(m.total(), int(1));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let grid = TimeGrid::from_unsorted([1, 2, 3].map(Time::from_int));
        let p = BivariateBetaParams::constant(grid, int(2));
        let a = sample_prior(&p, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_prior(&p, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.total(), int(1));
    }

    #[test]
    fn hazard_mean_matches_beta_mean() {
        let p = single_point(int(2), int(3));
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| to_f64(&sample_prior(&p, &mut rng).unwrap().atom((0, 0))))
            .sum::<f64>()
            / n as f64;
        // sd of Beta(2,3) is 0.2, so the standard error is 0.002
        assert!((mean - 0.4).abs() < 0.01, "{mean}");
    }

    #[test]
    fn zero_weights_where_required_fail() {
        let p = single_point(int(0), int(0));
        assert!(sample_prior(&p, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
        let mut p = single_point(int(1), int(0));
        p.dirichlet[0] = [int(0), int(0), int(0)];
        assert!(sample_prior(&p, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
