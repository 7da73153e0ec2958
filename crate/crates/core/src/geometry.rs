//! Exact points of the hyperplane `{t : t_1 + ... + t_n = 1}`, the probability
//! simplex inside it, the orthogonal projection onto a lower-dimensional
//! copy, and polytopes given by generator lists.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::indep_system::IndexSubset;
use crate::rational::{format_rational, serde_rational_vec, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("coordinates sum to {0}, not 1")]
    NotOnHyperplane(String),
    #[error("a point needs at least one coordinate")]
    EmptyPoint,
    #[error("index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("target dimension {target} is outside 1..={n}")]
    TargetDimension { target: usize, n: usize },
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{points} points but {weights} weights")]
    WeightCount { points: usize, weights: usize },
    #[error("weight {0} is negative")]
    NegativeWeight(String),
    #[error("weights sum to {0}, not 1")]
    WeightSum(String),
    #[error("a state space needs at least one generator")]
    NoGenerators,
    #[error("{labels} labels for {generators} generators")]
    LabelCount { labels: usize, generators: usize },
}

/// A point whose coordinates sum to exactly one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RPoint {
    coords: Vec<Rational>,
}

impl RPoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self, GeometryError> {
        if coords.is_empty() {
            return Err(GeometryError::EmptyPoint);
        }
        let sum: Rational = coords.iter().sum();
        if !sum.is_one() {
            return Err(GeometryError::NotOnHyperplane(format_rational(&sum)));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    /// 1-based coordinate access.
    pub fn coord(&self, j: usize) -> &Rational {
        &self.coords[j - 1]
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.coords
    }
}

impl fmt::Debug for RPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(c))?;
        }
        f.write_str(")")
    }
}

/// The `j`-th vertex of the `n`-simplex (1-based).
pub fn simplex_vertex(j: usize, n: usize) -> Result<RPoint, GeometryError> {
    if j == 0 || j > n {
        return Err(GeometryError::IndexOutOfRange { index: j, n });
    }
    let mut coords = vec![Rational::zero(); n];
    coords[j - 1] = Rational::one();
    Ok(RPoint { coords })
}

/// 0/1 indicator vector of `h` in `R^n`. Not an [`RPoint`] unless `|h| = 1`.
pub fn indicator(h: &IndexSubset, n: usize) -> Result<Vec<Rational>, GeometryError> {
    if h.ground_size() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            found: h.ground_size(),
        });
    }
    Ok((1..=n)
        .map(|j| {
            if h.contains(j) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect())
}

/// Orthogonal projection onto the first `m` coordinates of the hyperplane:
/// the mass of the dropped coordinates is spread evenly over the kept ones.
pub fn project(p: &RPoint, m: usize) -> Result<RPoint, GeometryError> {
    let n = p.dim();
    if m == 0 || m > n {
        return Err(GeometryError::TargetDimension { target: m, n });
    }
    let tail: Rational = p.coords[m..].iter().sum();
    let shift = tail / Rational::from_integer(m.into());
    let coords = p.coords[..m].iter().map(|t| t + &shift).collect();
    Ok(RPoint { coords })
}

pub fn in_simplex(p: &RPoint) -> bool {
    p.coords.iter().all(|c| !c.is_negative())
}

pub fn convex_combination(points: &[RPoint], weights: &[Rational]) -> Result<RPoint, GeometryError> {
    if points.len() != weights.len() {
        return Err(GeometryError::WeightCount {
            points: points.len(),
            weights: weights.len(),
        });
    }
    let Some(first) = points.first() else {
        return Err(GeometryError::WeightSum("0".into()));
    };
    if let Some(w) = weights.iter().find(|w| w.is_negative()) {
        return Err(GeometryError::NegativeWeight(format_rational(w)));
    }
    let total: Rational = weights.iter().sum();
    if !total.is_one() {
        return Err(GeometryError::WeightSum(format_rational(&total)));
    }
    let n = first.dim();
    let mut coords = vec![Rational::zero(); n];
    for (p, w) in points.iter().zip(weights) {
        if p.dim() != n {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
        if w.is_zero() {
            continue;
        }
        for (acc, c) in coords.iter_mut().zip(&p.coords) {
            *acc += w * c;
        }
    }
    Ok(RPoint { coords })
}

/// A polytope in the hyperplane given as the convex hull of its generators.
/// Redundant generators are kept as given.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SpaceJson", into = "SpaceJson")]
pub struct StateSpace {
    n: usize,
    generators: Vec<RPoint>,
    labels: Vec<Option<String>>,
}

impl StateSpace {
    pub fn new(n: usize, generators: Vec<RPoint>) -> Result<Self, GeometryError> {
        let labels = vec![None; generators.len()];
        Self::with_labels(n, generators, labels)
    }

    pub fn with_labels(n: usize, generators: Vec<RPoint>, labels: Vec<Option<String>>) -> Result<Self, GeometryError> {
        if generators.is_empty() {
            return Err(GeometryError::NoGenerators);
        }
        if labels.len() != generators.len() {
            return Err(GeometryError::LabelCount {
                labels: labels.len(),
                generators: generators.len(),
            });
        }
        if let Some(g) = generators.iter().find(|g| g.dim() != n) {
            return Err(GeometryError::DimensionMismatch {
                expected: n,
                found: g.dim(),
            });
        }
        Ok(Self { n, generators, labels })
    }

    /// The `n`-simplex, generated by its vertices labelled `s1..sn`.
    pub fn simplex(n: usize) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::EmptyPoint);
        }
        let generators = (1..=n).map(|j| simplex_vertex(j, n)).collect::<Result<_, _>>()?;
        let labels = (1..=n).map(|j| Some(format!("s{j}"))).collect();
        Self::with_labels(n, generators, labels)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[RPoint] {
        &self.generators
    }

    /// 0-based generator access.
    pub fn generator(&self, pos: usize) -> Option<&RPoint> {
        self.generators.get(pos)
    }

    pub fn label(&self, pos: usize) -> Option<&str> {
        self.labels.get(pos).and_then(|l| l.as_deref())
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Same polytope with the generator list reordered: position `i` of the
    /// result holds generator `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            n: self.n,
            generators: order.iter().map(|&i| self.generators[i].clone()).collect(),
            labels: order.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }
}

impl fmt::Debug for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateSpace")
            .field("n", &self.n)
            .field("generators", &self.generators)
            .finish()
    }
}

#[derive(Clone, Serialize, Deserialize)]
struct GeneratorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(with = "serde_rational_vec")]
    coords: Vec<Rational>,
}

#[derive(Clone, Serialize, Deserialize)]
struct SpaceJson {
    n: usize,
    generators: Vec<GeneratorJson>,
}

impl From<StateSpace> for SpaceJson {
    fn from(s: StateSpace) -> Self {
        SpaceJson {
            n: s.n,
            generators: s
                .generators
                .into_iter()
                .zip(s.labels)
                .map(|(g, label)| GeneratorJson {
                    label,
                    coords: g.coords,
                })
                .collect(),
        }
    }
}

impl TryFrom<SpaceJson> for StateSpace {
    type Error = GeometryError;

    fn try_from(j: SpaceJson) -> Result<Self, GeometryError> {
        let mut generators = Vec::with_capacity(j.generators.len());
        let mut labels = Vec::with_capacity(j.generators.len());
        for g in j.generators {
            generators.push(RPoint::new(g.coords)?);
            labels.push(g.label);
        }
        StateSpace::with_labels(j.n, generators, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn pt(c: &[(i64, i64)]) -> RPoint {
        RPoint::new(c.iter().map(|&(p, q)| frac(p, q)).collect()).unwrap()
    }

    #[test]
    fn vertices() {
        assert_eq!(simplex_vertex(1, 3).unwrap(), pt(&[(1, 1), (0, 1), (0, 1)]));
        assert_eq!(simplex_vertex(2, 2).unwrap(), pt(&[(0, 1), (1, 1)]));
        assert_eq!(simplex_vertex(3, 3).unwrap(), pt(&[(0, 1), (0, 1), (1, 1)]));
        assert!(simplex_vertex(0, 3).is_err());
        assert!(simplex_vertex(4, 3).is_err());
    }

    #[test]
    fn indicators() {
        let h = IndexSubset::new(3, &[1, 3]).unwrap();
        assert_eq!(indicator(&h, 3).unwrap(), vec![int(1), int(0), int(1)]);
        for j in 1..=4 {
            let single = IndexSubset::singleton(4, j).unwrap();
            assert_eq!(
                indicator(&single, 4).unwrap(),
                simplex_vertex(j, 4).unwrap().into_coords()
            );
        }
        assert_eq!(
            indicator(&IndexSubset::empty(2).unwrap(), 2).unwrap(),
            vec![int(0), int(0)]
        );
        assert!(indicator(&h, 4).is_err());
    }

    #[test]
    fn rpoint_rejects_off_hyperplane() {
        assert!(matches!(
            RPoint::new(vec![int(1), int(1)]),
            Err(GeometryError::NotOnHyperplane(s)) if s == "2"
        ));
        assert!(RPoint::new(vec![]).is_err());
    }

    #[test]
    fn projection_examples() {
        let p = pt(&[(1, 2), (1, 4), (1, 4)]);
        assert_eq!(project(&p, 2).unwrap(), pt(&[(5, 8), (3, 8)]));

        let padded = pt(&[(1, 3), (2, 3), (0, 1), (0, 1)]);
        assert_eq!(project(&padded, 2).unwrap(), pt(&[(1, 3), (2, 3)]));

        let q = pt(&[(14, 27), (14, 27), (-1, 27)]);
        assert_eq!(project(&q, 2).unwrap(), pt(&[(1, 2), (1, 2)]));

        assert_eq!(project(&p, 3).unwrap(), p);
        assert!(project(&p, 0).is_err());
        assert!(project(&p, 4).is_err());
    }

    #[test]
    fn simplex_membership() {
        assert!(in_simplex(&pt(&[(1, 2), (1, 2)])));
        assert!(!in_simplex(&pt(&[(-1, 27), (14, 27), (14, 27)])));
        assert!(in_simplex(&pt(&[(0, 1), (1, 1), (0, 1)])));
    }

    #[test]
    fn convex_combinations() {
        let e1 = pt(&[(1, 1), (0, 1)]);
        let e2 = pt(&[(0, 1), (1, 1)]);
        assert_eq!(
            convex_combination(&[e1.clone(), e2.clone()], &[frac(1, 2), frac(1, 2)]).unwrap(),
            pt(&[(1, 2), (1, 2)])
        );
        assert_eq!(convex_combination(std::slice::from_ref(&e1), &[int(1)]).unwrap(), e1);
        let verts: Vec<_> = (1..=3).map(|j| simplex_vertex(j, 3).unwrap()).collect();
        let third = frac(1, 3);
        assert_eq!(
            convex_combination(&verts, &[third.clone(), third.clone(), third]).unwrap(),
            pt(&[(1, 3), (1, 3), (1, 3)])
        );
        assert!(matches!(
            convex_combination(&[e1.clone(), e2.clone()], &[frac(1, 2), frac(1, 3)]),
            Err(GeometryError::WeightSum(_))
        ));
        assert!(matches!(
            convex_combination(&[e1.clone(), e2.clone()], &[int(2), int(-1)]),
            Err(GeometryError::NegativeWeight(_))
        ));
        assert!(convex_combination(&[e1], &[]).is_err());
    }

    #[test]
    fn space_json() {
        let text = r#"{"n": 3, "generators": [{"label":"s1","coords":["1","0","0"]}, {"label":"q_{1,2,3}^1","coords":["-1/27","14/27","14/27"]}]}"#;
        let space: StateSpace = serde_json::from_str(text).unwrap();
        assert_eq!(space.len(), 2);
        assert_eq!(space.label(1), Some("q_{1,2,3}^1"));
        assert_eq!(space.generator(1).unwrap(), &pt(&[(-1, 27), (14, 27), (14, 27)]));
        let back: StateSpace = serde_json::from_str(&serde_json::to_string(&space).unwrap()).unwrap();
        assert_eq!(back, space);

        let bad = r#"{"n": 2, "generators": [{"coords":["1","1"]}]}"#;
        assert!(serde_json::from_str::<StateSpace>(bad).is_err());
        let wrong_dim = r#"{"n": 3, "generators": [{"coords":["1","0"]}]}"#;
        assert!(serde_json::from_str::<StateSpace>(wrong_dim).is_err());
        assert!(serde_json::from_str::<StateSpace>(r#"{"n": 3, "generators": []}"#).is_err());
    }
}
