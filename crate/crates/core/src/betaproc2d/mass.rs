use std::collections::BTreeMap;

use num::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{format_rational, from_f64_decimal, parse_rational, to_f64, Rational};
use crate::survdata::{Side, Time, TimeGrid};

/// Where a residual (defective) piece of probability came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stratum {
    /// The minimum-time curve never reached zero.
    Minimum,
    /// The later coordinate's curve after a minimum at grid position `index`.
    Conditional { index: usize, side: Side },
    /// Mass released at `index` with no way to split it among the three orders.
    Unsplit { index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectRecord {
    pub stratum: Stratum,
    /// Grid-index pair the residual is attributed to.
    pub cell: (usize, usize),
    pub mass: Rational,
}

/// Discrete joint law of `(T1, T2)` on grid pairs, plus defect records.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariateMass {
    grid: TimeGrid,
    atoms: BTreeMap<(usize, usize), Rational>,
    defects: Vec<DefectRecord>,
}

impl BivariateMass {
    pub fn empty(grid: TimeGrid) -> BivariateMass {
        BivariateMass {
            grid,
            atoms: BTreeMap::new(),
            defects: Vec::new(),
        }
    }

    /// Builds a proper mass from `((t1, t2), probability)` points; the grid is
    /// the union of the coordinates. Probabilities must be nonnegative and sum
    /// to one within 1e-12.
    pub fn from_points(points: &[((Time, Time), Rational)]) -> Result<BivariateMass> {
        let grid = TimeGrid::from_unsorted(points.iter().flat_map(|((a, b), _)| [*a, *b]));
        let mut m = BivariateMass::empty(grid);
        for ((t1, t2), p) in points {
            let cell = (m.grid.require_index(*t1)?, m.grid.require_index(*t2)?);
            m.add_atom(cell, p.clone())?;
        }
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn add_atom(&mut self, cell: (usize, usize), p: Rational) -> Result<()> {
        if p.is_negative() {
            return Err(Error::InvalidParameter("negative probability mass".into()));
        }
        if cell.0 >= self.grid.len() || cell.1 >= self.grid.len() {
            return Err(Error::InvalidParameter("atom outside the grid".into()));
        }
        if !p.is_zero() {
            *self.atoms.entry(cell).or_insert_with(Rational::zero) += p;
        }
        Ok(())
    }

    pub(crate) fn add_defect(&mut self, stratum: Stratum, cell: (usize, usize), mass: Rational) {
        if !mass.is_zero() {
            self.defects.push(DefectRecord {
                stratum,
                cell,
                mass,
            });
        }
    }

    /// Checks nonnegativity and a total of one within 1e-12.
    pub fn validate(&self) -> Result<()> {
        if self.located().any(|(_, p)| p.is_negative()) {
            return Err(Error::InvalidParameter("negative probability mass".into()));
        }
        let total = to_f64(&self.total());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "masses total {total}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Proper (non-defective) mass at a grid-index pair.
    pub fn atom(&self, cell: (usize, usize)) -> Rational {
        self.atoms
            .get(&cell)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Proper mass at a pair of times (zero off the grid).
    pub fn atom_at(&self, t1: Time, t2: Time) -> Rational {
        match (self.grid.index_of(t1), self.grid.index_of(t2)) {
            (Some(i), Some(j)) => self.atom((i, j)),
            _ => Rational::zero(),
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> {
        self.atoms.iter().map(|(c, p)| (*c, p))
    }

    pub fn defects(&self) -> &[DefectRecord] {
        &self.defects
    }

    pub fn defect_total(&self) -> Rational {
        self.defects
            .iter()
            .fold(Rational::zero(), |a, d| a + &d.mass)
    }

    /// Atoms and defects, each at its grid cell.
    pub fn located(&self) -> impl Iterator<Item = ((usize, usize), &Rational)> {
        self.atoms()
            .chain(self.defects.iter().map(|d| (d.cell, &d.mass)))
    }

    /// Atoms with defects merged into their placement cells.
    pub fn located_masses(&self) -> BTreeMap<(usize, usize), Rational> {
        let mut out = BTreeMap::new();
        for (cell, p) in self.located() {
            *out.entry(cell).or_insert_with(Rational::zero) += p;
        }
        out
    }

    pub fn total(&self) -> Rational {
        self.located().fold(Rational::zero(), |a, (_, p)| a + p)
    }

    /// `P{T1 > s, T2 > t}`, defects counted at their placements.
    pub fn survival(&self, s: Time, t: Time) -> Rational {
        let (k, l) = (
            self.grid.count_at_or_below(s),
            self.grid.count_at_or_below(t),
        );
        self.located()
            .filter(|((i, j), _)| *i >= k && *j >= l)
            .fold(Rational::zero(), |a, (_, p)| a + p)
    }

    /// Same law moved onto a finer grid containing every current grid time.
    pub fn regrid(&self, grid: &TimeGrid) -> Result<BivariateMass> {
        let map = |i: usize| grid.require_index(self.grid.get(i));
        let mut out = BivariateMass::empty(grid.clone());
        for (cell, p) in self.atoms() {
            out.add_atom((map(cell.0)?, map(cell.1)?), p.clone())?;
        }
        for d in &self.defects {
            let stratum = match d.stratum {
                Stratum::Minimum => Stratum::Minimum,
                Stratum::Conditional { index, side } => Stratum::Conditional {
                    index: map(index)?,
                    side,
                },
                Stratum::Unsplit { index } => Stratum::Unsplit { index: map(index)? },
            };
            out.add_defect(stratum, (map(d.cell.0)?, map(d.cell.1)?), d.mass.clone());
        }
        Ok(out)
    }
}

/// `P{T1 > s, T2 > t}` under `m`.
pub fn survival_surface(m: &BivariateMass, s: Time, t: Time) -> Rational {
    m.survival(s, t)
}

#[derive(Serialize, Deserialize)]
struct AtomRepr {
    t1: Time,
    t2: Time,
    #[serde(default)]
    mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct DefectRepr {
    stratum: Stratum,
    t1: Time,
    t2: Time,
    #[serde(default)]
    mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct MassRepr {
    #[serde(default)]
    grid: Option<TimeGrid>,
    atoms: Vec<AtomRepr>,
    #[serde(default)]
    defects: Vec<DefectRepr>,
}

/// `exact` wins when both are given.
fn read_mass(value: Option<f64>, exact: &Option<String>) -> std::result::Result<Rational, String> {
    match (exact, value) {
        (Some(text), _) => {
            parse_rational(text).ok_or_else(|| format!("invalid exact mass `{text}`"))
        }
        (None, Some(v)) => from_f64_decimal(v).ok_or_else(|| format!("invalid mass {v}")),
        (None, None) => Err("each atom and defect needs `mass` or `exact`".into()),
    }
}

impl Serialize for BivariateMass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let t = |i: usize| self.grid.get(i);
        let repr = MassRepr {
            grid: Some(self.grid.clone()),
            atoms: self
                .atoms()
                .map(|((i, j), p)| AtomRepr {
                    t1: t(i),
                    t2: t(j),
                    mass: Some(to_f64(p)),
                    exact: Some(format_rational(p)),
                })
                .collect(),
            defects: self
                .defects
                .iter()
                .map(|d| DefectRepr {
                    stratum: d.stratum,
                    t1: t(d.cell.0),
                    t2: t(d.cell.1),
                    mass: Some(to_f64(&d.mass)),
                    exact: Some(format_rational(&d.mass)),
                })
                .collect(),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BivariateMass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<BivariateMass, D::Error> {
        use serde::de::Error as _;
        let repr = MassRepr::deserialize(d)?;
        let grid = repr.grid.unwrap_or_else(|| {
            TimeGrid::from_unsorted(
                repr.atoms
                    .iter()
                    .flat_map(|a| [a.t1, a.t2])
                    .chain(repr.defects.iter().flat_map(|a| [a.t1, a.t2])),
            )
        });
        let mut m = BivariateMass::empty(grid);
        let cell = |m: &BivariateMass, t1: Time, t2: Time| {
            Ok::<_, D::Error>((
                m.grid.require_index(t1).map_err(D::Error::custom)?,
                m.grid.require_index(t2).map_err(D::Error::custom)?,
            ))
        };
        for a in &repr.atoms {
            let p = read_mass(a.mass, &a.exact).map_err(D::Error::custom)?;
            let c = cell(&m, a.t1, a.t2)?;
            m.add_atom(c, p).map_err(D::Error::custom)?;
        }
        for r in &repr.defects {
            let p = read_mass(r.mass, &r.exact).map_err(D::Error::custom)?;
            if p.is_negative() {
                return Err(D::Error::custom("negative defect mass"));
            }
            let c = cell(&m, r.t1, r.t2)?;
            m.add_defect(r.stratum, c, p);
        }
        Ok(m)
    }
}
