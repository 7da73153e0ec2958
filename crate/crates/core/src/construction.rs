//! Realization of an independence system as a polytope state space.
//!
//! Starting from the simplex vertices `s_1..s_n`, every circuit `H` of the
//! system contributes one extra generator `q_H^(j)` per element `j ∈ H`. Each
//! such point sits just outside the simplex (its `j`-th coordinate is
//! slightly negative), which is enough to break joint perfect
//! distinguishability of `(s_i)_{i∈H}` without disturbing any independent
//! subset.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::json;

use crate::geometry::{GeometryError, RPoint, StateSpace};
use crate::indep_system::{IndependenceSystem, IndexSubset};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("the construction needs n >= 2, got {0}")]
    GroundTooSmall(usize),
    #[error("index {j} is not an element of {subset}")]
    NotInSubset { j: usize, subset: IndexSubset },
    #[error("{0} has fewer than two elements")]
    SubsetTooSmall(IndexSubset),
    #[error("subset is over [{found}], expected [{expected}]")]
    GroundMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn rat(v: usize) -> Rational {
    Rational::from_integer(v.into())
}

/// The perturbation size `1 / (3 n^2)`.
pub fn epsilon(n: usize) -> Result<Rational, ConstructionError> {
    if n < 2 {
        return Err(ConstructionError::GroundTooSmall(n));
    }
    Ok(Rational::new(1.into(), (3 * n * n).into()))
}

/// The extra generator `q_H^(j)` for a dependent set `H ∋ j`.
///
/// For `|H| = m < n`:
/// `-2ε·1_{j} + (1 - ε(m-2))/(m-1)·1_{H∖j} + εm/(n-m)·1_{[n]∖H}`;
/// for `H = [n]`: `-ε·1_{j} + (1 + ε)/(n-1)·1_{[n]∖j}`.
pub fn ruin_point(h: &IndexSubset, j: usize, n: usize) -> Result<RPoint, ConstructionError> {
    let eps = epsilon(n)?;
    if h.ground_size() != n {
        return Err(ConstructionError::GroundMismatch {
            expected: n,
            found: h.ground_size(),
        });
    }
    if !h.contains(j) {
        return Err(ConstructionError::NotInSubset { j, subset: *h });
    }
    let m = h.len();
    if m < 2 {
        return Err(ConstructionError::SubsetTooSmall(*h));
    }
    let (own, inside, outside) = if m < n {
        (
            -(&eps * rat(2)),
            (Rational::one() - &eps * rat(m - 2)) / rat(m - 1),
            &eps * rat(m) / rat(n - m),
        )
    } else {
        (-eps.clone(), (Rational::one() + &eps) / rat(n - 1), Rational::zero())
    };
    let coords = (1..=n)
        .map(|i| {
            if i == j {
                own.clone()
            } else if h.contains(i) {
                inside.clone()
            } else {
                outside.clone()
            }
        })
        .collect();
    Ok(RPoint::new(coords)?)
}

/// Label for the generator `q_H^(j)`, e.g. `q_{1,2,3}^1`.
pub fn ruin_label(h: &IndexSubset, j: usize) -> String {
    format!("q_{h}^{j}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionOutput {
    pub space: StateSpace,
    /// `vertex_positions[j - 1]` is the generator position of `s_j`.
    pub vertex_positions: Vec<usize>,
    /// Generator position of each `q_H^(j)`, keyed by `(H, j)`.
    pub ruin_positions: BTreeMap<(IndexSubset, usize), usize>,
    /// `None` only for `n = 1`, where no perturbation is ever needed.
    pub epsilon: Option<Rational>,
}

impl ConstructionOutput {
    /// `(H, j, q_H^(j))` in generator order.
    pub fn ruin_points(&self) -> impl Iterator<Item = (&IndexSubset, usize, &RPoint)> + '_ {
        self.ruin_positions
            .iter()
            .map(move |((h, j), &pos)| (h, *j, &self.space.generators()[pos]))
    }

    /// State-space JSON with an extra `epsilon` field. The output still
    /// parses as a plain state space.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.space).expect("state space serializes");
        if let Some(eps) = &self.epsilon {
            v["epsilon"] = json!(format_rational(eps));
        }
        v
    }
}

/// Generators are `s_1..s_n` followed by `q_H^(j)` sorted by `(H, j)`.
pub fn build(system: &IndependenceSystem) -> Result<ConstructionOutput, ConstructionError> {
    let n = system.ground_size();
    let simplex = StateSpace::simplex(n)?;
    let mut generators = simplex.generators().to_vec();
    let mut labels: Vec<Option<String>> = (0..n).map(|i| simplex.label(i).map(str::to_owned)).collect();
    let vertex_positions = (0..n).collect();
    let mut ruin_positions = BTreeMap::new();

    let circuits = system.circuits();
    if n >= 2 {
        for h in &circuits {
            for j in h.iter() {
                ruin_positions.insert((*h, j), generators.len());
                generators.push(ruin_point(h, j, n)?);
                labels.push(Some(ruin_label(h, j)));
            }
        }
    }
    Ok(ConstructionOutput {
        space: StateSpace::with_labels(n, generators, labels)?,
        vertex_positions,
        ruin_positions,
        epsilon: if n >= 2 { Some(epsilon(n)?) } else { None },
    })
}
