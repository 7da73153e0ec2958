//! Joint perfect distinguishability and minimum symmetric error.
//!
//! A measurement with `m` outcomes on a polytope in `R^n` is represented by
//! an `m × n` matrix `M` whose columns each sum to one, so `M` maps the
//! hyperplane of unit coordinate sum into the `m`-dimensional one. It is a
//! valid measurement on a state space iff `M v ≥ 0` for every generator
//! `v`; convexity then covers the whole polytope.
//!
//! States are addressed by 0-based generator positions. For a list of `m`
//! states the outcome assignment is fixed to the identity: state `k` should
//! produce outcome `k`. Any other assignment is a row permutation of `M`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{RPoint, StateSpace};
use crate::indep_system::{IndepError, IndependenceSystem, IndexSubset, MAX_GROUND_SIZE};
use crate::lp::{self, LinearProgram, LpError, LpStatus, Relation};
use crate::rational::{format_rational, serde_rational, serde_rational_matrix, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistinguishError {
    #[error("no states given")]
    NoStates,
    #[error("state position {position} is out of range for {len} generators")]
    PositionOutOfRange { position: usize, len: usize },
    #[error("state position {0} is listed twice")]
    DuplicateState(usize),
    #[error("{0} states exceed the supported ground-set size {MAX_GROUND_SIZE}")]
    TooManyStates(usize),
    #[error("matrix is not a measurement: {0}")]
    InvalidMeasurement(String),
    #[error("solver returned {0:?} for a problem that always has an optimum")]
    UnexpectedStatus(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Family(#[from] IndepError),
}

/// Linear extension of an affine measurement, as an `m × n` matrix.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Measurement {
    #[serde(with = "serde_rational_matrix")]
    matrix: Vec<Vec<Rational>>,
}

impl Measurement {
    /// Accepts any rectangular matrix whose columns each sum to one.
    pub fn new(matrix: Vec<Vec<Rational>>) -> Result<Self, DistinguishError> {
        let Some(first) = matrix.first() else {
            return Err(DistinguishError::InvalidMeasurement("no rows".into()));
        };
        let n = first.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(DistinguishError::InvalidMeasurement("ragged or empty rows".into()));
        }
        let m = Self { matrix };
        if let Some(c) = (0..n).find(|&c| !m.column_sum(c).is_one()) {
            return Err(DistinguishError::InvalidMeasurement(format!(
                "column {} sums to {}",
                c + 1,
                format_rational(&m.column_sum(c))
            )));
        }
        Ok(m)
    }

    /// The one-outcome measurement: every state yields outcome 1.
    pub fn trivial(n: usize) -> Self {
        Self {
            matrix: vec![vec![Rational::one(); n]],
        }
    }

    /// The orthogonal projection onto the coordinates listed in `order`
    /// (1-based), with outcome `r` reading coordinate `order[r]`: the mass of
    /// every unlisted coordinate is shared equally among the outcomes.
    pub fn from_projection(n: usize, order: &[usize]) -> Result<Self, DistinguishError> {
        let m = order.len();
        if m == 0 {
            return Err(DistinguishError::NoStates);
        }
        if let Some(&bad) = order.iter().find(|&&j| j == 0 || j > n) {
            return Err(DistinguishError::PositionOutOfRange { position: bad, len: n });
        }
        let share = Rational::new(1.into(), m.into());
        let matrix = order
            .iter()
            .map(|&target| {
                (1..=n)
                    .map(|c| {
                        if c == target {
                            Rational::one()
                        } else if order.contains(&c) {
                            Rational::zero()
                        } else {
                            share.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(matrix)
    }

    pub fn outcomes(&self) -> usize {
        self.matrix.len()
    }

    pub fn dim(&self) -> usize {
        self.matrix[0].len()
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    fn column_sum(&self, c: usize) -> Rational {
        self.matrix.iter().map(|r| &r[c]).sum()
    }

    /// Outcome distribution (possibly with negative entries if the point is
    /// outside the measurement's domain).
    pub fn apply(&self, p: &RPoint) -> Vec<Rational> {
        self.apply_coords(p.coords())
    }

    fn apply_coords(&self, v: &[Rational]) -> Vec<Rational> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect()
    }

    /// Every generator is sent to a probability vector.
    pub fn is_valid_for(&self, space: &StateSpace) -> bool {
        self.dim() == space.dim()
            && space
                .generators()
                .iter()
                .all(|g| self.apply(g).iter().all(|x| !x.is_negative()))
    }

    /// Valid on `space` and sends state `k` to the `k`-th outcome with
    /// certainty. Checked directly, without the solver.
    pub fn certifies_jpd(&self, space: &StateSpace, states: &[usize]) -> bool {
        self.outcomes() == states.len()
            && self.is_valid_for(space)
            && states
                .iter()
                .enumerate()
                .all(|(k, &pos)| space.generator(pos).is_some_and(|g| self.apply(g)[k].is_one()))
    }

    /// Sum of the misidentification probabilities for the given states.
    pub fn symmetric_error(&self, space: &StateSpace, states: &[usize]) -> Rational {
        states
            .iter()
            .enumerate()
            .map(|(k, &pos)| Rational::one() - &self.apply(&space.generators()[pos])[k])
            .sum()
    }
}

impl fmt::Debug for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .matrix
            .iter()
            .map(|r| r.iter().map(format_rational).collect())
            .collect();
        f.debug_tuple("Measurement").field(&rows).finish()
    }
}

fn check_states(space: &StateSpace, states: &[usize]) -> Result<(), DistinguishError> {
    if states.is_empty() {
        return Err(DistinguishError::NoStates);
    }
    let len = space.len();
    for (i, &p) in states.iter().enumerate() {
        if p >= len {
            return Err(DistinguishError::PositionOutOfRange { position: p, len });
        }
        if states[..i].contains(&p) {
            return Err(DistinguishError::DuplicateState(p));
        }
    }
    Ok(())
}

/// Position of the single nonzero coordinate if `p` is a simplex vertex.
fn vertex_index(p: &RPoint) -> Option<usize> {
    let mut nz = p.coords().iter().enumerate().filter(|(_, c)| !c.is_zero());
    let (c, _) = nz.next()?;
    nz.next().is_none().then_some(c)
}

/// Variables `M[k][c]` at index `k * n + c`, free, with the column-sum
/// equalities and nonnegativity of `M v` for every generator `v` except
/// those in `skip`. Generators that are simplex vertices become variable
/// bounds instead of rows.
fn measurement_lp(space: &StateSpace, m: usize, skip: &[usize]) -> Result<LinearProgram, LpError> {
    let n = space.dim();
    let mut lp = LinearProgram::new(m * n);
    for c in 0..n {
        let mut coeffs = vec![Rational::zero(); m * n];
        for k in 0..m {
            coeffs[k * n + c] = Rational::one();
        }
        lp.add_constraint(coeffs, Relation::Eq, Rational::one())?;
    }
    let mut seen: Vec<&RPoint> = Vec::new();
    for (pos, g) in space.generators().iter().enumerate() {
        if skip.contains(&pos) || seen.contains(&g) {
            continue;
        }
        seen.push(g);
        if let Some(c) = vertex_index(g) {
            for k in 0..m {
                lp.set_nonnegative(k * n + c)?;
            }
            continue;
        }
        for k in 0..m {
            let mut coeffs = vec![Rational::zero(); m * n];
            for (c, x) in g.coords().iter().enumerate() {
                coeffs[k * n + c] = x.clone();
            }
            lp.add_constraint(coeffs, Relation::Ge, Rational::zero())?;
        }
    }
    Ok(lp)
}

fn witness_matrix(x: Vec<Rational>, m: usize, n: usize) -> Vec<Vec<Rational>> {
    let mut it = x.into_iter();
    (0..m).map(|_| it.by_ref().take(n).collect()).collect()
}

/// Decides whether the listed states are jointly perfectly
/// distinguishable; on success returns a witnessing measurement.
pub fn is_jpd(space: &StateSpace, states: &[usize]) -> Result<Option<Measurement>, DistinguishError> {
    check_states(space, states)?;
    let n = space.dim();
    let m = states.len();
    if m == 1 {
        return Ok(Some(Measurement::trivial(n)));
    }
    let mut lp = measurement_lp(space, m, states)?;
    for (k, &pos) in states.iter().enumerate() {
        let v = &space.generators()[pos];
        for i in 0..m {
            let mut coeffs = vec![Rational::zero(); m * n];
            for (c, x) in v.coords().iter().enumerate() {
                coeffs[i * n + c] = x.clone();
            }
            let target = if i == k { Rational::one() } else { Rational::zero() };
            lp.add_constraint(coeffs, Relation::Eq, target)?;
        }
    }
    Ok(lp::feasible(&lp)?.map(|x| Measurement {
        matrix: witness_matrix(x, m, n),
    }))
}

/// Two distinct states form an antipodal pair iff they are jointly
/// perfectly distinguishable.
pub fn is_antipodal(space: &StateSpace, a: usize, b: usize) -> Result<bool, DistinguishError> {
    Ok(is_jpd(space, &[a, b])?.is_some())
}

/// Minimum over measurements of the summed error probabilities.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorReport {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub optimal_measurement: Measurement,
}

impl ErrorReport {
    /// Average-convention error: the summed error divided by the number of
    /// states.
    pub fn average(&self) -> Rational {
        &self.value / Rational::from_integer(self.optimal_measurement.outcomes().into())
    }
}

impl fmt::Debug for ErrorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ErrorReport")
            .field("value", &format_rational(&self.value))
            .field("optimal_measurement", &self.optimal_measurement)
            .finish()
    }
}

pub fn symmetric_error(space: &StateSpace, states: &[usize]) -> Result<ErrorReport, DistinguishError> {
    check_states(space, states)?;
    let n = space.dim();
    let m = states.len();
    let mut lp = measurement_lp(space, m, &[])?;
    let mut objective = vec![Rational::zero(); m * n];
    for (k, &pos) in states.iter().enumerate() {
        for (c, x) in space.generators()[pos].coords().iter().enumerate() {
            objective[k * n + c] = -x;
        }
    }
    lp.set_objective(objective)?;
    let res = lp::solve(&lp)?;
    match (res.status, res.witness, res.objective_value) {
        (LpStatus::Optimal, Some(x), Some(v)) => Ok(ErrorReport {
            value: Rational::from_integer(m.into()) + v,
            optimal_measurement: Measurement {
                matrix: witness_matrix(x, m, n),
            },
        }),
        (status, ..) => Err(DistinguishError::UnexpectedStatus(status)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetVerdict {
    pub jpd: bool,
    /// 1 if the verdict came from the solver, 0 if it was implied.
    pub lp_calls: usize,
}

/// Verdicts for every subset of `[N]`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyScan {
    ground: usize,
    verdicts: Vec<SubsetVerdict>,
}

impl FamilyScan {
    pub fn ground_size(&self) -> usize {
        self.ground
    }

    pub fn verdict(&self, h: &IndexSubset) -> SubsetVerdict {
        self.verdicts[h.bits() as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (IndexSubset, SubsetVerdict)> + '_ {
        self.verdicts
            .iter()
            .enumerate()
            .map(|(b, v)| (IndexSubset::from_bits_unchecked(self.ground, b as u32), *v))
    }

    pub fn lp_calls(&self) -> usize {
        self.verdicts.iter().map(|v| v.lp_calls).sum()
    }

    /// The family of jointly distinguishable subsets, validated.
    pub fn system(&self) -> Result<IndependenceSystem, IndepError> {
        let members: Vec<IndexSubset> = self.iter().filter(|(_, v)| v.jpd).map(|(h, _)| h).collect();
        IndependenceSystem::from_member_list(self.ground, &members)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pruning {
    /// Skip the solver for any superset of a failed subset.
    Enabled,
    /// Ask the solver about every subset with at least two elements.
    Disabled,
}

/// Tests every subset of the listed states, layer by layer in increasing
/// cardinality. Within a layer the solver calls run in parallel.
pub fn jpd_scan(space: &StateSpace, states: &[usize], pruning: Pruning) -> Result<FamilyScan, DistinguishError> {
    check_states(space, states)?;
    let ground = states.len();
    if ground > MAX_GROUND_SIZE {
        return Err(DistinguishError::TooManyStates(ground));
    }
    let size = 1usize << ground;
    let mut verdicts = vec![
        SubsetVerdict {
            jpd: false,
            lp_calls: 0
        };
        size
    ];
    for (bits, v) in verdicts.iter_mut().enumerate() {
        if bits.count_ones() <= 1 {
            v.jpd = true;
        }
    }
    for k in 2..=ground {
        let layer: Vec<usize> = (0..size)
            .filter(|b| b.count_ones() as usize == k)
            .filter(|&b| {
                pruning == Pruning::Disabled || (0..ground).all(|i| b & (1 << i) == 0 || verdicts[b ^ (1 << i)].jpd)
            })
            .collect();
        let results: Vec<(usize, bool)> = layer
            .par_iter()
            .map(|&b| {
                let chosen: Vec<usize> = (0..ground).filter(|i| b & (1 << i) != 0).map(|i| states[i]).collect();
                is_jpd(space, &chosen).map(|w| (b, w.is_some()))
            })
            .collect::<Result<_, _>>()?;
        for (b, jpd) in results {
            verdicts[b] = SubsetVerdict { jpd, lp_calls: 1 };
        }
    }
    Ok(FamilyScan { ground, verdicts })
}

/// The independence system `{H ⊆ [N] : (states[j])_{j∈H} is j.p.d.}`.
pub fn jpd_family(space: &StateSpace, states: &[usize]) -> Result<IndependenceSystem, DistinguishError> {
    Ok(jpd_scan(space, states, Pruning::Enabled)?.system()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build;
    use crate::geometry::simplex_vertex;
    use crate::rational::{frac, int};

    fn pt(c: &[(i64, i64)]) -> RPoint {
        RPoint::new(c.iter().map(|&(p, q)| frac(p, q)).collect()).unwrap()
    }

    fn s(n: usize, e: &[usize]) -> IndexSubset {
        IndexSubset::new(n, e).unwrap()
    }

    fn pairs_on_3() -> IndependenceSystem {
        IndependenceSystem::from_maximal(3, &[s(3, &[1, 2]), s(3, &[1, 3]), s(3, &[2, 3])]).unwrap()
    }

    fn no12_on_3() -> IndependenceSystem {
        IndependenceSystem::from_maximal(3, &[s(3, &[1, 3]), s(3, &[2, 3])]).unwrap()
    }

    #[test]
    fn simplex_vertices_are_jpd_with_identity() {
        for n in 1..=4 {
            let space = StateSpace::simplex(n).unwrap();
            let all: Vec<usize> = (0..n).collect();
            let w = is_jpd(&space, &all).unwrap().expect("simplex vertices are jpd");
            assert!(w.certifies_jpd(&space, &all));
            if n > 1 {
                let identity: Vec<Vec<Rational>> = (0..n)
                    .map(|i| (0..n).map(|j| if i == j { int(1) } else { int(0) }).collect())
                    .collect();
                assert_eq!(w.matrix(), &identity[..]);
            }
        }
    }

    #[test]
    fn construction_verdicts_on_three() {
        let space = build(&pairs_on_3()).unwrap().space;
        let w = is_jpd(&space, &[0, 1]).unwrap().unwrap();
        assert!(w.certifies_jpd(&space, &[0, 1]));
        assert!(is_jpd(&space, &[0, 1, 2]).unwrap().is_none());
    }

    #[test]
    fn antipodal_pairs() {
        let d2 = StateSpace::simplex(2).unwrap();
        assert!(is_antipodal(&d2, 0, 1).unwrap());
        assert_eq!(is_antipodal(&d2, 1, 1), Err(DistinguishError::DuplicateState(1)));

        let space = StateSpace::new(3, vec![simplex_vertex(1, 3).unwrap(), pt(&[(0, 1), (1, 2), (1, 2)])]).unwrap();
        assert!(is_antipodal(&space, 0, 1).unwrap());
        let explicit = Measurement::new(vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(1)]]).unwrap();
        assert!(explicit.certifies_jpd(&space, &[0, 1]));
    }

    #[test]
    fn state_list_errors() {
        let d3 = StateSpace::simplex(3).unwrap();
        assert_eq!(is_jpd(&d3, &[]), Err(DistinguishError::NoStates));
        assert_eq!(
            is_jpd(&d3, &[0, 3]),
            Err(DistinguishError::PositionOutOfRange { position: 3, len: 3 })
        );
        assert!(symmetric_error(&d3, &[2, 2]).is_err());
    }

    #[test]
    fn single_state_uses_trivial_measurement() {
        let space = build(&pairs_on_3()).unwrap().space;
        let w = is_jpd(&space, &[4]).unwrap().unwrap();
        assert_eq!(w, Measurement::trivial(3));
        assert!(w.certifies_jpd(&space, &[4]));
    }

    #[test]
    fn error_zero_for_jpd_collection() {
        let space = build(&pairs_on_3()).unwrap().space;
        let r = symmetric_error(&space, &[0, 2]).unwrap();
        assert_eq!(r.value, int(0));
        assert!(r.optimal_measurement.is_valid_for(&space));
    }

    #[test]
    fn error_one_for_duplicated_generator() {
        let v = pt(&[(1, 3), (2, 3)]);
        let space = StateSpace::new(
            2,
            vec![
                simplex_vertex(1, 2).unwrap(),
                v.clone(),
                v,
                simplex_vertex(2, 2).unwrap(),
            ],
        )
        .unwrap();
        let r = symmetric_error(&space, &[1, 2]).unwrap();
        assert_eq!(r.value, int(1));
        assert_eq!(r.average(), frac(1, 2));
    }

    #[test]
    fn error_positive_when_circuit() {
        let space = build(&no12_on_3()).unwrap().space;
        let r = symmetric_error(&space, &[0, 1]).unwrap();
        assert!(r.value.is_positive());
        assert!(r.value <= int(1));
        assert!(r.optimal_measurement.is_valid_for(&space));
        assert_eq!(r.optimal_measurement.symmetric_error(&space, &[0, 1]), r.value);
    }

    #[test]
    fn families() {
        let d3 = StateSpace::simplex(3).unwrap();
        assert_eq!(
            jpd_family(&d3, &[0, 1, 2]).unwrap(),
            IndependenceSystem::power_set(3).unwrap()
        );
        let space = build(&pairs_on_3()).unwrap().space;
        assert_eq!(jpd_family(&space, &[0, 1, 2]).unwrap(), pairs_on_3());
        let space = build(&no12_on_3()).unwrap().space;
        let fam = jpd_family(&space, &[0, 1, 2]).unwrap();
        assert_eq!(fam, no12_on_3());
        assert_eq!(fam.len(), 6);
    }

    #[test]
    fn pruning_skips_supersets() {
        let space = build(&no12_on_3()).unwrap().space;
        let pruned = jpd_scan(&space, &[0, 1, 2], Pruning::Enabled).unwrap();
        let full = jpd_scan(&space, &[0, 1, 2], Pruning::Disabled).unwrap();
        assert_eq!(pruned.system().unwrap(), full.system().unwrap());
        assert_eq!(pruned.verdict(&s(3, &[1, 2, 3])).lp_calls, 0);
        assert_eq!(full.verdict(&s(3, &[1, 2, 3])).lp_calls, 1);
        assert_eq!(pruned.lp_calls(), 3);
        assert_eq!(full.lp_calls(), 4);
    }

    #[test]
    fn projection_measurement() {
        let m = Measurement::from_projection(3, &[1, 2]).unwrap();
        assert_eq!(
            m.matrix(),
            &[vec![int(1), int(0), frac(1, 2)], vec![int(0), int(1), frac(1, 2)]][..]
        );
        assert_eq!(
            m.apply(&pt(&[(14, 27), (14, 27), (-1, 27)])),
            vec![frac(1, 2), frac(1, 2)]
        );
        assert!(Measurement::from_projection(3, &[4]).is_err());
    }

    #[test]
    fn measurement_rejects_bad_columns() {
        assert!(Measurement::new(vec![vec![int(1), int(0)], vec![int(1), int(1)]]).is_err());
        assert!(Measurement::new(vec![]).is_err());
        assert!(Measurement::new(vec![vec![int(1)], vec![]]).is_err());
        let json = serde_json::to_string(&Measurement::from_projection(2, &[2, 1]).unwrap()).unwrap();
        assert_eq!(json, r#"[["0","1"],["1","0"]]"#);
    }
}
