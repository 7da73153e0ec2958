//! Exact rational linear programming.
//!
//! Two-phase primal simplex on a compact (Tucker) tableau that stores only
//! the nonbasic columns, with Bland's smallest-index rule for both the
//! entering and the leaving variable. Free variables are pivoted into the
//! basis up front and their rows are never chosen to leave again, which
//! eliminates them without the usual `x = x⁺ - x⁻` split. Every quantity is
//! a reduced big rational, so verdicts are exact.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, Rational};

/// Environment variable overriding the pivot ceiling (debug only).
pub const PIVOT_LIMIT_ENV: &str = "GPTD_LP_PIVOT_LIMIT";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("constraint {index} has {found} coefficients, expected {expected}")]
    CoefficientCount {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("objective has {found} coefficients, expected {expected}")]
    ObjectiveLength { expected: usize, found: usize },
    #[error("variable {0} does not exist")]
    NoSuchVariable(usize),
    #[error("variable {var} has lower bound {lower} above upper bound {upper}")]
    EmptyBounds { var: usize, lower: String, upper: String },
    #[error("pivot limit of {0} exceeded")]
    PivotLimit(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coeffs: Vec<_> = self.coeffs.iter().map(format_rational).collect();
        let rel = match self.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        write!(f, "[{}] {rel} {}", coeffs.join(", "), format_rational(&self.rhs))
    }
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

/// `minimize objective·x` subject to the constraints and bounds.
/// Variables are free unless bounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    bounds: Vec<Bounds>,
}

impl LinearProgram {
    /// A pure feasibility problem over `num_vars` free variables.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![Bounds::default(); num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self) -> &[Bounds] {
        &self.bounds
    }

    pub fn set_objective(&mut self, objective: Vec<Rational>) -> Result<(), LpError> {
        if objective.len() != self.num_vars {
            return Err(LpError::ObjectiveLength {
                expected: self.num_vars,
                found: objective.len(),
            });
        }
        self.objective = objective;
        Ok(())
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> Result<(), LpError> {
        if coeffs.len() != self.num_vars {
            return Err(LpError::CoefficientCount {
                index: self.constraints.len(),
                expected: self.num_vars,
                found: coeffs.len(),
            });
        }
        self.constraints.push(Constraint { coeffs, relation, rhs });
        Ok(())
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<Rational>, upper: Option<Rational>) -> Result<(), LpError> {
        let slot = self.bounds.get_mut(var).ok_or(LpError::NoSuchVariable(var))?;
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if l > u {
                return Err(LpError::EmptyBounds {
                    var,
                    lower: format_rational(l),
                    upper: format_rational(u),
                });
            }
        }
        *slot = Bounds { lower, upper };
        Ok(())
    }

    pub fn set_nonnegative(&mut self, var: usize) -> Result<(), LpError> {
        self.set_bounds(var, Some(Rational::zero()), None)
    }

    /// Checks every constraint and bound exactly.
    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.constraints.iter().all(|c| c.is_satisfied_by(x))
            && self
                .bounds
                .iter()
                .zip(x)
                .all(|(b, v)| b.lower.as_ref().is_none_or(|l| v >= l) && b.upper.as_ref().is_none_or(|u| v <= u))
    }

    pub fn objective_at(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Number of constraint rows counting two-sided bounds as one row each.
    pub fn num_rows(&self) -> usize {
        self.constraints.len()
            + self
                .bounds
                .iter()
                .filter(|b| b.lower.is_some() && b.upper.is_some())
                .count()
    }

    /// `C(num_vars + rows, rows)`, saturating. A sanity ceiling on the
    /// number of pivots a solve should ever take on this program.
    pub fn pivot_ceiling(&self) -> u64 {
        binomial(self.num_vars + self.num_rows(), self.num_rows())
    }
}

/// Saturating binomial coefficient.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub witness: Option<Vec<Rational>>,
    /// Present iff `status == Optimal`; equals the objective at `witness`.
    pub objective_value: Option<Rational>,
    pub pivots: u64,
}

impl fmt::Debug for LpResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("LpResult");
        d.field("status", &self.status);
        if let Some(v) = &self.objective_value {
            d.field("value", &format_rational(v));
        }
        if let Some(w) = &self.witness {
            d.field("witness", &w.iter().map(format_rational).collect::<Vec<_>>());
        }
        d.field("pivots", &self.pivots).finish()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Overrides both the environment and the Bland bound when set.
    pub pivot_limit: Option<u64>,
}

pub fn solve(lp: &LinearProgram) -> Result<LpResult, LpError> {
    solve_with(lp, &SolveOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SolveOptions) -> Result<LpResult, LpError> {
    Tableau::build(lp, opts, true)?.run(lp)
}

/// Phase one only. Returns a point satisfying every constraint, or `None`.
pub fn feasible(lp: &LinearProgram) -> Result<Option<Vec<Rational>>, LpError> {
    let res = Tableau::build(lp, &SolveOptions::default(), false)?.run(lp)?;
    Ok(res.witness)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Structural,
    Slack,
    Artificial,
}

/// `x = offset + sign * y` for the internal variable `y`.
struct VarMap {
    offset: Rational,
    negate: bool,
    free: bool,
}

/// Row `i` reads `x_{basic[i]} + Σ_j t[i][j] x_{nonbasic[j]} = rhs[i]`;
/// the objective reads `z = z_val + Σ_j cbar[j] x_{nonbasic[j]}`.
struct Tableau {
    kinds: Vec<Kind>,
    maps: Vec<VarMap>,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    t: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    /// Rows whose basic variable is free; never leave the basis.
    locked: Vec<bool>,
    cbar: Vec<Rational>,
    z_val: Rational,
    /// Free structural variables that appear in no row; pinned to zero.
    orphans: Vec<usize>,
    pivots: u64,
    limit: u64,
    optimize: bool,
}

impl Tableau {
    fn build(lp: &LinearProgram, opts: &SolveOptions, optimize: bool) -> Result<Self, LpError> {
        let n = lp.num_vars;
        if lp.objective.len() != n {
            return Err(LpError::ObjectiveLength {
                expected: n,
                found: lp.objective.len(),
            });
        }
        for (index, c) in lp.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::CoefficientCount {
                    index,
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
        }

        let mut kinds = vec![Kind::Structural; n];
        let mut maps = Vec::with_capacity(n);
        // (coeffs over y, relation, rhs) with relation in {Le, Eq}.
        let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::new();
        for (var, b) in lp.bounds.iter().enumerate() {
            let map = match (&b.lower, &b.upper) {
                (Some(l), Some(u)) => {
                    let mut coeffs = vec![Rational::zero(); n];
                    coeffs[var] = Rational::one();
                    rows.push((coeffs, Relation::Le, u - l));
                    VarMap {
                        offset: l.clone(),
                        negate: false,
                        free: false,
                    }
                }
                (Some(l), None) => VarMap {
                    offset: l.clone(),
                    negate: false,
                    free: false,
                },
                (None, Some(u)) => VarMap {
                    offset: u.clone(),
                    negate: true,
                    free: false,
                },
                (None, None) => VarMap {
                    offset: Rational::zero(),
                    negate: false,
                    free: true,
                },
            };
            maps.push(map);
        }
        for c in &lp.constraints {
            let mut shift = Rational::zero();
            let mut coeffs = Vec::with_capacity(n);
            for (a, m) in c.coeffs.iter().zip(&maps) {
                if !a.is_zero() && !m.offset.is_zero() {
                    shift += a * &m.offset;
                }
                coeffs.push(if m.negate { -a } else { a.clone() });
            }
            let rhs = &c.rhs - shift;
            match c.relation {
                Relation::Le => rows.push((coeffs, Relation::Le, rhs)),
                Relation::Eq => rows.push((coeffs, Relation::Eq, rhs)),
                Relation::Ge => rows.push((coeffs.into_iter().map(|a| -a).collect(), Relation::Le, -rhs)),
            }
        }

        let mut basic = Vec::with_capacity(rows.len());
        let mut t = Vec::with_capacity(rows.len());
        let mut rhs = Vec::with_capacity(rows.len());
        for (coeffs, rel, b) in rows {
            basic.push(kinds.len());
            kinds.push(if rel == Relation::Le {
                Kind::Slack
            } else {
                Kind::Artificial
            });
            t.push(coeffs);
            rhs.push(b);
        }

        // Bland guarantees no basis repeats within a phase; twice the number
        // of bases (plus the free-variable pivots) bounds the whole run.
        let total_cols = kinds.len() + basic.len();
        let limit = opts
            .pivot_limit
            .or_else(|| std::env::var(PIVOT_LIMIT_ENV).ok().and_then(|v| v.parse().ok()))
            .unwrap_or_else(|| {
                binomial(total_cols, basic.len())
                    .saturating_mul(2)
                    .saturating_add(n as u64)
            });

        let m = basic.len();
        Ok(Self {
            kinds,
            maps,
            basic,
            nonbasic: (0..n).collect(),
            t,
            rhs,
            locked: vec![false; m],
            cbar: vec![Rational::zero(); n],
            z_val: Rational::zero(),
            orphans: Vec::new(),
            pivots: 0,
            limit,
            optimize,
        })
    }

    fn pivot(&mut self, r: usize, c: usize) -> Result<(), LpError> {
        self.pivots += 1;
        if self.pivots > self.limit {
            return Err(LpError::PivotLimit(self.limit));
        }
        let inv = self.t[r][c].recip();
        for (j, v) in self.t[r].iter_mut().enumerate() {
            if j != c && !v.is_zero() {
                *v *= &inv;
            }
        }
        self.t[r][c] = inv.clone();
        self.rhs[r] *= &inv;

        let support: Vec<usize> = (0..self.t[r].len())
            .filter(|&j| j != c && !self.t[r][j].is_zero())
            .collect();
        let (before, rest) = self.t.split_at_mut(r);
        let (prow, after) = rest.split_first_mut().expect("pivot row");
        let prhs = self.rhs[r].clone();
        for (i, row) in before.iter_mut().chain(after.iter_mut()).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = take(&mut row[c]);
            if f.is_zero() {
                continue;
            }
            for &j in &support {
                row[j] -= &f * &prow[j];
            }
            if !prhs.is_zero() {
                self.rhs[i] -= &f * &prhs;
            }
            row[c] = -(&f * &inv);
        }
        let f = take(&mut self.cbar[c]);
        if !f.is_zero() {
            for &j in &support {
                self.cbar[j] -= &f * &prow[j];
            }
            self.z_val += &f * &prhs;
            self.cbar[c] = -(&f * &inv);
        }

        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[c]);
        Ok(())
    }

    fn remove_column(&mut self, c: usize) {
        self.nonbasic.remove(c);
        self.cbar.remove(c);
        for row in &mut self.t {
            row.remove(c);
        }
    }

    fn remove_row(&mut self, r: usize) {
        self.basic.remove(r);
        self.t.remove(r);
        self.rhs.remove(r);
        self.locked.remove(r);
    }

    /// Pivots each free structural variable into some row and locks it there.
    fn eliminate_free(&mut self) -> Result<(), LpError> {
        let free: Vec<usize> = (0..self.maps.len()).filter(|&v| self.maps[v].free).collect();
        for var in free {
            let c = self.nonbasic.iter().position(|&x| x == var).expect("free var nonbasic");
            let candidates = |want_artificial: bool| {
                (0..self.basic.len()).find(|&i| {
                    !self.locked[i]
                        && !self.t[i][c].is_zero()
                        && (self.kinds[self.basic[i]] == Kind::Artificial) == want_artificial
                })
            };
            match candidates(true).or_else(|| candidates(false)) {
                Some(r) => {
                    self.pivot(r, c)?;
                    self.locked[r] = true;
                    if self.kinds[self.nonbasic[c]] == Kind::Artificial {
                        self.remove_column(c);
                    }
                }
                // Zero in every unlocked row, now and after any later pivot;
                // the column stays so locked rows keep track of it.
                None => self.orphans.push(var),
            }
        }
        Ok(())
    }

    /// Bland: smallest-index entering variable with negative reduced cost,
    /// then the minimum-ratio row, ties going to the smallest basic index.
    fn bland_step(&mut self) -> Result<Step, LpError> {
        let entering = (0..self.nonbasic.len())
            .filter(|&j| self.cbar[j].is_negative())
            .min_by_key(|&j| self.nonbasic[j]);
        let Some(c) = entering else {
            return Ok(Step::Optimal);
        };
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.basic.len() {
            if self.locked[i] || !self.t[i][c].is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / &self.t[i][c];
            let better = match &best {
                None => true,
                Some((b, r)) => ratio < *r || (ratio == *r && self.basic[i] < self.basic[*b]),
            };
            if better {
                best = Some((i, ratio));
            }
        }
        match best {
            None => Ok(Step::Unbounded),
            Some((r, _)) => {
                let leaving_artificial = self.kinds[self.basic[r]] == Kind::Artificial;
                self.pivot(r, c)?;
                if leaving_artificial {
                    self.remove_column(c);
                }
                Ok(Step::Pivoted)
            }
        }
    }

    /// Returns false if the constraints are infeasible.
    fn phase_one(&mut self) -> Result<bool, LpError> {
        for i in 0..self.basic.len() {
            if self.locked[i] || !self.rhs[i].is_negative() {
                continue;
            }
            match self.kinds[self.basic[i]] {
                // An artificial is only a residual; its sign convention is free.
                Kind::Artificial => {
                    for v in &mut self.t[i] {
                        *v = -take(v);
                    }
                    self.rhs[i] = -take(&mut self.rhs[i]);
                }
                Kind::Slack => {
                    // Swap in a fresh artificial; the slack becomes nonbasic.
                    let slack = self.basic[i];
                    let art = self.kinds.len();
                    self.kinds.push(Kind::Artificial);
                    for (k, row) in self.t.iter_mut().enumerate() {
                        if k == i {
                            for v in row.iter_mut() {
                                *v = -take(v);
                            }
                            row.push(-Rational::one());
                        } else {
                            row.push(Rational::zero());
                        }
                    }
                    self.nonbasic.push(slack);
                    self.cbar.push(Rational::zero());
                    self.basic[i] = art;
                    self.rhs[i] = -take(&mut self.rhs[i]);
                }
                Kind::Structural => unreachable!("structural basics are locked"),
            }
        }

        let art_rows: Vec<usize> = (0..self.basic.len())
            .filter(|&i| !self.locked[i] && self.kinds[self.basic[i]] == Kind::Artificial)
            .collect();
        if art_rows.is_empty() {
            return Ok(true);
        }
        self.z_val = art_rows.iter().map(|&i| &self.rhs[i]).sum();
        self.cbar = (0..self.nonbasic.len())
            .map(|j| -art_rows.iter().map(|&i| &self.t[i][j]).sum::<Rational>())
            .collect();

        loop {
            match self.bland_step()? {
                Step::Pivoted => {}
                Step::Optimal => break,
                Step::Unbounded => unreachable!("phase one objective is bounded below by zero"),
            }
        }
        if self.z_val.is_positive() {
            return Ok(false);
        }

        // Drive zero-level artificials out, dropping redundant rows.
        let mut i = 0;
        while i < self.basic.len() {
            if self.locked[i] || self.kinds[self.basic[i]] != Kind::Artificial {
                i += 1;
                continue;
            }
            let col = (0..self.nonbasic.len())
                .filter(|&j| !self.t[i][j].is_zero())
                .min_by_key(|&j| self.nonbasic[j]);
            match col {
                Some(c) => {
                    self.pivot(i, c)?;
                    self.remove_column(c);
                    i += 1;
                }
                None => self.remove_row(i),
            }
        }
        Ok(true)
    }

    fn internal_cost(&self, lp: &LinearProgram, var: usize) -> Rational {
        match self.kinds[var] {
            Kind::Structural => {
                let c = &lp.objective[var];
                if self.maps[var].negate {
                    -c
                } else {
                    c.clone()
                }
            }
            _ => Rational::zero(),
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpResult, LpError> {
        self.eliminate_free()?;
        if !self.phase_one()? {
            return Ok(self.finish(LpStatus::Infeasible, lp));
        }
        if self.optimize {
            let row_costs: Vec<Rational> = self.basic.iter().map(|&b| self.internal_cost(lp, b)).collect();
            self.z_val = Rational::zero();
            self.cbar = (0..self.nonbasic.len())
                .map(|j| {
                    let mut v = self.internal_cost(lp, self.nonbasic[j]);
                    for (i, cb) in row_costs.iter().enumerate() {
                        if !cb.is_zero() && !self.t[i][j].is_zero() {
                            v -= cb * &self.t[i][j];
                        }
                    }
                    v
                })
                .collect();
            let orphan_moves = self.orphans.iter().any(|v| {
                let j = self
                    .nonbasic
                    .iter()
                    .position(|x| x == v)
                    .expect("orphan stays nonbasic");
                !self.cbar[j].is_zero()
            });
            if orphan_moves {
                return Ok(self.finish(LpStatus::Unbounded, lp));
            }
            loop {
                match self.bland_step()? {
                    Step::Pivoted => {}
                    Step::Optimal => break,
                    Step::Unbounded => return Ok(self.finish(LpStatus::Unbounded, lp)),
                }
            }
        }
        Ok(self.finish(LpStatus::Optimal, lp))
    }

    fn finish(self, status: LpStatus, lp: &LinearProgram) -> LpResult {
        if status != LpStatus::Optimal {
            return LpResult {
                status,
                witness: None,
                objective_value: None,
                pivots: self.pivots,
            };
        }
        let n = self.maps.len();
        let mut y = vec![Rational::zero(); n];
        for (i, &b) in self.basic.iter().enumerate() {
            if b < n {
                y[b] = self.rhs[i].clone();
            }
        }
        let x: Vec<Rational> = y
            .into_iter()
            .zip(&self.maps)
            .map(|(v, m)| if m.negate { &m.offset - v } else { &m.offset + v })
            .collect();
        debug_assert!(lp.is_satisfied_by(&x), "simplex produced an infeasible witness");
        let value = if self.optimize {
            lp.objective_at(&x)
        } else {
            Rational::zero()
        };
        LpResult {
            status,
            witness: Some(x),
            objective_value: Some(value),
            pivots: self.pivots,
        }
    }
}

fn take(v: &mut Rational) -> Rational {
    std::mem::replace(v, Rational::zero())
}

enum Step {
    Pivoted,
    Optimal,
    Unbounded,
}
