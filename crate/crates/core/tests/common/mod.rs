//! Test-only oracles, independent of the library's solver paths.

#![allow(dead_code)]

use gptd_core::lp::{LinearProgram, Relation};
use gptd_core::rational::{frac, int};
use gptd_core::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub fn rand_rational<R: Rng>(rng: &mut R, max: i64) -> Rational {
    frac(rng.gen_range(-max..=max), rng.gen_range(1..=max))
}

/// A random point of the simplex with small denominators.
pub fn rand_simplex_point<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..n)
            .map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(0..=20) })
            .collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.into_iter().map(|x| frac(x, total)).collect();
        }
    }
}

/// A random point of the unit-sum hyperplane (coordinates may be negative).
pub fn rand_hyperplane_point<R: Rng>(rng: &mut R, n: usize) -> Vec<Rational> {
    let mut v: Vec<Rational> = (0..n - 1).map(|_| rand_rational(rng, 10)).collect();
    let rest = Rational::one() - v.iter().sum::<Rational>();
    v.push(rest);
    v
}

/// Projection formula evaluated with integers only: with a common
/// denominator `D` and `a_k = t_k D`, output `i` is `(m a_i + Σ_{k>m} a_k) / (m D)`.
pub fn projection_by_integers(t: &[Rational], m: usize) -> Vec<Rational> {
    let d: BigInt = t.iter().fold(BigInt::one(), |acc, x| acc * x.denom());
    let a: Vec<BigInt> = t.iter().map(|x| x.numer() * (&d / x.denom())).collect();
    let tail: BigInt = a[m..].iter().sum();
    let mb = BigInt::from(m);
    (0..m).map(|i| Rational::new(&mb * &a[i] + &tail, &mb * &d)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    Infeasible,
    Unbounded,
    Optimal(Rational),
}

/// Solves `a x = b` for square `a` by Gaussian elimination; `None` if singular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let k = b.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot_row).skip(col) {
                    *x -= &f * p;
                }
                let delta = &f * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some((0..k).map(|i| &b[i] / &a[i][i]).collect())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum over the vertices of the program intersected with the box
/// `|x_i| <= big` on every side the program leaves open. Vertices are
/// found by solving every square subsystem of active hyperplanes.
fn boxed_vertex_min(lp: &LinearProgram, big: &Rational) -> Option<Rational> {
    let k = lp.num_vars();
    let mut planes: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for c in lp.constraints() {
        planes.push((c.coeffs.clone(), c.rhs.clone()));
    }
    let unit = |i: usize| -> Vec<Rational> { (0..k).map(|j| if i == j { int(1) } else { int(0) }).collect() };
    for (i, b) in lp.bounds().iter().enumerate() {
        planes.push((unit(i), b.lower.clone().unwrap_or_else(|| -big.clone())));
        planes.push((unit(i), b.upper.clone().unwrap_or_else(|| big.clone())));
    }
    let inside = |x: &[Rational]| {
        lp.is_satisfied_by(x)
            && lp
                .bounds()
                .iter()
                .zip(x)
                .all(|(b, v)| (b.lower.is_some() || *v >= -big.clone()) && (b.upper.is_some() || v <= big))
    };
    let mut best: Option<Rational> = None;
    for combo in combinations(planes.len(), k) {
        let a = combo.iter().map(|&i| planes[i].0.clone()).collect();
        let b = combo.iter().map(|&i| planes[i].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if inside(&x) {
                let v = lp.objective_at(&x);
                if best.as_ref().is_none_or(|cur| v < *cur) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

/// Basic-feasible-solution enumeration. Any vertex of a program whose
/// data have numerators and denominators at most 10 in three variables
/// has coordinates far below `10^15`, so the box never cuts off an
/// optimum; a bounded program reports the same minimum for both box
/// sizes while an unbounded one keeps decreasing.
pub fn enumerate_bfs(lp: &LinearProgram) -> Oracle {
    let b1 = Rational::from_integer(BigInt::from(10u64).pow(15));
    let b2 = &b1 * int(2);
    match boxed_vertex_min(lp, &b1) {
        None => Oracle::Infeasible,
        Some(v1) => {
            let v2 = boxed_vertex_min(lp, &b2).expect("larger box keeps feasibility");
            if v1 == v2 {
                Oracle::Optimal(v1)
            } else {
                assert!(v2 < v1);
                Oracle::Unbounded
            }
        }
    }
}

/// Random program with at most 3 variables and at most 6 rows (explicit
/// constraints plus two-sided bounds), entries with numerators and
/// denominators bounded by 10.
pub fn random_small_lp<R: Rng>(rng: &mut R) -> LinearProgram {
    let k = rng.gen_range(1..=3);
    let mut lp = LinearProgram::new(k);
    if rng.gen_bool(0.8) {
        lp.set_objective((0..k).map(|_| rand_rational(rng, 10)).collect())
            .unwrap();
    }
    let mut boxed = 0;
    for v in 0..k {
        match rng.gen_range(0..5) {
            0 => {}
            1 => lp.set_bounds(v, Some(rand_rational(rng, 10)), None).unwrap(),
            2 => lp.set_bounds(v, None, Some(rand_rational(rng, 10))).unwrap(),
            3 => {
                let (a, b) = (rand_rational(rng, 10), rand_rational(rng, 10));
                let (l, u) = if a <= b { (a, b) } else { (b, a) };
                lp.set_bounds(v, Some(l), Some(u)).unwrap();
                boxed += 1;
            }
            _ => lp.set_nonnegative(v).unwrap(),
        }
    }
    let rows = rng.gen_range(1..=6 - boxed);
    for _ in 0..rows {
        let coeffs: Vec<Rational> = (0..k)
            .map(|_| {
                if rng.gen_bool(0.2) {
                    int(0)
                } else {
                    rand_rational(rng, 10)
                }
            })
            .collect();
        let rel = match rng.gen_range(0..5) {
            0 => Relation::Eq,
            1 | 2 => Relation::Le,
            _ => Relation::Ge,
        };
        lp.add_constraint(coeffs, rel, rand_rational(rng, 10)).unwrap();
    }
    debug_assert!(lp.num_rows() <= 6);
    lp
}

pub fn is_nonneg(v: &[Rational]) -> bool {
    v.iter().all(|x| !x.is_negative())
}
