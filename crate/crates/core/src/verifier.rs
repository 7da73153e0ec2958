//! End-to-end checks: build the state space for an independence system,
//! recover its distinguishability family with the solver, and compare.
//! Also hosts the exhaustive and random system drivers and the error
//! profile table.

use std::time::Instant;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::construction::{build, ConstructionError, ConstructionOutput};
use crate::distinguish::{jpd_scan, symmetric_error, DistinguishError, Pruning};
use crate::geometry::StateSpace;
use crate::indep_system::{full_mask, IndepError, IndependenceSystem, IndexSubset};
use crate::rational::{format_rational, serde_rational, Rational};

/// Largest ground set [`enumerate_systems`] accepts without an override.
pub const ENUMERATION_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("exhaustive enumeration is limited to n <= {ENUMERATION_LIMIT} (got {0}); sample instead")]
    Guardrail(usize),
    #[error(transparent)]
    Indep(#[from] IndepError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error(transparent)]
    Distinguish(#[from] DistinguishError),
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsetRecord {
    pub subset: IndexSubset,
    pub expected: bool,
    pub got: bool,
    pub lp_calls: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizationReport {
    pub input_system: IndependenceSystem,
    pub realized_system: IndependenceSystem,
    #[serde(rename = "match")]
    pub matched: bool,
    /// One record per subset of `[n]`, in canonical order.
    pub verdicts: Vec<SubsetRecord>,
    pub generators: usize,
    pub ruin_points: usize,
    #[serde(skip_serializing_if = "Option::is_none", with = "opt_rational")]
    pub epsilon: Option<Rational>,
    /// Violated inequalities among the added generators; empty when sound.
    pub invariant_violations: Vec<String>,
    pub lp_calls: usize,
    pub elapsed_ms: f64,
}

mod opt_rational {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.serialize_str(&format_rational(v)),
            None => s.serialize_none(),
        }
    }
}

impl RealizationReport {
    /// No subset is reported distinguishable while one of its subsets is not.
    pub fn is_downward_consistent(&self) -> bool {
        self.verdicts.iter().filter(|r| r.got).all(|r| {
            r.subset
                .iter()
                .all(|j| self.verdicts.iter().any(|q| q.subset == r.subset.without(j) && q.got))
        })
    }

    pub fn summary_line(&self) -> String {
        let status = if self.matched && self.invariant_violations.is_empty() {
            "ok"
        } else {
            "MISMATCH"
        };
        let mut line = format!(
            "{status}  {}  generators={} lp_calls={} {:.1}ms",
            self.input_system, self.generators, self.lp_calls, self.elapsed_ms
        );
        for r in self.verdicts.iter().filter(|r| r.expected != r.got) {
            line.push_str(&format!("\n    {}: expected {} got {}", r.subset, r.expected, r.got));
        }
        for v in &self.invariant_violations {
            line.push_str(&format!("\n    invariant: {v}"));
        }
        line
    }

    pub fn passed(&self) -> bool {
        self.matched && self.invariant_violations.is_empty()
    }
}

/// Builds the state space for `system` and compares its distinguishability
/// family on `s_1..s_n` against `system`.
pub fn verify_realization(system: &IndependenceSystem) -> Result<RealizationReport, VerifyError> {
    let start = Instant::now();
    let out = build(system)?;
    let invariant_violations = construction_violations(&out);
    let scan = jpd_scan(&out.space, &out.vertex_positions, Pruning::Enabled)?;
    let realized_system = scan.system()?;
    let mut verdicts: Vec<SubsetRecord> = scan
        .iter()
        .map(|(h, v)| SubsetRecord {
            subset: h,
            expected: system.contains(&h),
            got: v.jpd,
            lp_calls: v.lp_calls,
        })
        .collect();
    verdicts.sort_by_key(|r| r.subset);
    Ok(RealizationReport {
        matched: realized_system == *system,
        input_system: system.clone(),
        realized_system,
        verdicts,
        generators: out.space.len(),
        ruin_points: out.ruin_positions.len(),
        epsilon: out.epsilon.clone(),
        invariant_violations,
        lp_calls: scan.lp_calls(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Checks the coordinate bounds every added generator must satisfy:
/// unit sum, a negative own coordinate above `-2ε`, positive other
/// coordinates, at least `2nε` on `H∖{j}`, and for `1 < |H| < n` the
/// `H∖{j}` coordinates strictly above the `[n]∖H` ones.
pub fn construction_violations(out: &ConstructionOutput) -> Vec<String> {
    let mut bad = Vec::new();
    let Some(eps) = &out.epsilon else {
        return bad;
    };
    let n = out.space.dim();
    let nr = Rational::from_integer(n.into());
    let floor = -(eps * Rational::from_integer(2.into()));
    let inner_floor = eps * &nr * Rational::from_integer(2.into());

    // min{(1 - ε(m-2))/(m-1), (1+ε)/(n-1)} >= 2/(3n) for every 2 <= m <= n.
    let two_thirds_n = Rational::new(2.into(), (3 * n).into());
    for m in 2..=n {
        let a = (Rational::one() - eps * Rational::from_integer((m as i64 - 2).into()))
            / Rational::from_integer((m - 1).into());
        let b = (Rational::one() + eps) / Rational::from_integer((n - 1).into());
        if a.min(b) < two_thirds_n {
            bad.push(format!("coordinate floor fails at m={m}"));
        }
    }

    for (h, j, q) in out.ruin_points() {
        let tag = format!("q_{h}^{j}");
        let c = q.coords();
        let sum: Rational = c.iter().sum();
        if !sum.is_one() {
            bad.push(format!("{tag}: coordinates sum to {}", format_rational(&sum)));
        }
        if !c[j - 1].is_negative() {
            bad.push(format!("{tag}: own coordinate is not negative"));
        }
        for i in 1..=n {
            let v = &c[i - 1];
            if *v < floor {
                bad.push(format!("{tag}: coordinate {i} below -2ε"));
            }
            if i != j && !v.is_positive() {
                bad.push(format!("{tag}: coordinate {i} not positive"));
            }
            if i != j && h.contains(i) && *v < inner_floor {
                bad.push(format!("{tag}: coordinate {i} below 2nε"));
            }
        }
        let m = h.len();
        if m > 1 && m < n {
            let inside = h.iter().filter(|&i| i != j).map(|i| &c[i - 1]).min();
            let outside = (1..=n).filter(|&i| !h.contains(i)).map(|i| &c[i - 1]).max();
            if let (Some(lo), Some(hi)) = (inside, outside) {
                if lo <= hi {
                    bad.push(format!("{tag}: H coordinates do not dominate the rest"));
                }
            }
        }
    }
    bad
}

/// Every independence system on `[n]`, each once, for `n <= 4`.
pub fn enumerate_systems(n: usize) -> Result<Vec<IndependenceSystem>, VerifyError> {
    if n > ENUMERATION_LIMIT {
        return Err(VerifyError::Guardrail(n));
    }
    enumerate_systems_unchecked(n)
}

/// As [`enumerate_systems`] without the size guardrail. The count grows
/// doubly exponentially; n = 5 already yields thousands of systems.
///
/// Systems are in one-to-one correspondence with antichains of their
/// maximal sets; equivalently, with downward-closed choices over the
/// layer of subsets of size at least two. The search walks that layer in
/// order of cardinality and only admits a set whose one-smaller subsets
/// are already admitted, so each closed family is produced exactly once.
pub fn enumerate_systems_unchecked(n: usize) -> Result<Vec<IndependenceSystem>, VerifyError> {
    IndexSubset::full(n)?;
    let mut layer: Vec<u32> = (0..=full_mask(n)).filter(|b| b.count_ones() >= 2).collect();
    layer.sort_by_key(|b| (b.count_ones(), *b));
    let mut member = vec![false; 1 << n];
    member[0] = true;
    for j in 0..n {
        member[1 << j] = true;
    }
    let mut out = Vec::new();
    enumerate_rec(n, &layer, 0, &mut member, &mut out);
    Ok(out)
}

fn enumerate_rec(n: usize, layer: &[u32], idx: usize, member: &mut Vec<bool>, out: &mut Vec<IndependenceSystem>) {
    let Some(&bits) = layer.get(idx) else {
        out.push(IndependenceSystem::from_flags(n, member.clone()));
        return;
    };
    enumerate_rec(n, layer, idx + 1, member, out);
    let closed = (0..n).all(|k| bits & (1 << k) == 0 || member[(bits ^ (1 << k)) as usize]);
    if closed {
        member[bits as usize] = true;
        enumerate_rec(n, layer, idx + 1, member, out);
        member[bits as usize] = false;
    }
}

/// A random system: up to `n + 1` random subsets of size at least two are
/// drawn, any draw comparable with an earlier one is discarded, and the
/// surviving antichain is closed downward with all singletons added.
pub fn random_system<R: Rng>(n: usize, rng: &mut R) -> Result<IndependenceSystem, VerifyError> {
    IndexSubset::full(n)?;
    if n < 2 {
        return Ok(IndependenceSystem::power_set(n)?);
    }
    let draws = rng.gen_range(0..=n + 1);
    let mut antichain: Vec<IndexSubset> = Vec::new();
    for _ in 0..draws {
        let h = loop {
            let bits = rng.gen_range(0..=full_mask(n));
            if bits.count_ones() >= 2 {
                break IndexSubset::from_bits(n, bits)?;
            }
        };
        if antichain.iter().all(|a| !a.is_subset_of(&h) && !h.is_subset_of(a)) {
            antichain.push(h);
        }
    }
    Ok(IndependenceSystem::from_maximal_with(n, &antichain, false)?)
}

/// `count` random systems from a ChaCha8 stream seeded with `seed`.
pub fn random_systems(n: usize, count: usize, seed: u64) -> Result<Vec<IndependenceSystem>, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_system(n, &mut rng)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub systems: usize,
    pub passed: usize,
    pub lp_calls: usize,
    pub elapsed_ms: f64,
    /// Full reports of every failing system.
    pub failures: Vec<RealizationReport>,
}

impl BatchSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.systems
    }
}

/// Verifies each system; with `parallel`, systems are spread over the
/// rayon pool. Results are merged in input order either way.
pub fn verify_batch(
    n: usize,
    seed: Option<u64>,
    systems: &[IndependenceSystem],
    parallel: bool,
) -> Result<BatchSummary, VerifyError> {
    let start = Instant::now();
    let reports: Vec<RealizationReport> = if parallel {
        systems.par_iter().map(verify_realization).collect::<Result<_, _>>()?
    } else {
        systems.iter().map(verify_realization).collect::<Result<_, _>>()?
    };
    Ok(BatchSummary {
        n,
        seed,
        systems: reports.len(),
        passed: reports.iter().filter(|r| r.passed()).count(),
        lp_calls: reports.iter().map(|r| r.lp_calls).sum(),
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        failures: reports.into_iter().filter(|r| !r.passed()).collect(),
    })
}

pub fn verify_all(n: usize, parallel: bool) -> Result<BatchSummary, VerifyError> {
    verify_batch(n, None, &enumerate_systems(n)?, parallel)
}

pub fn verify_random(n: usize, count: usize, seed: u64, parallel: bool) -> Result<BatchSummary, VerifyError> {
    verify_batch(n, Some(seed), &random_systems(n, count, seed)?, parallel)
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileEntry {
    pub subset: IndexSubset,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

/// `F(L) ≤ F(H)` and `F(H) ≤ F(L) + 1` for `H = L ∪ {j}`.
#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub smaller: IndexSubset,
    pub larger: IndexSubset,
    pub monotone: bool,
    pub lipschitz: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeProfile {
    pub states: Vec<usize>,
    /// `F(H)` for every `H` with at least two elements.
    pub entries: Vec<ProfileEntry>,
    pub pairs: Vec<PairCheck>,
}

impl PeProfile {
    pub fn all_pass(&self) -> bool {
        self.pairs.iter().all(|p| p.monotone && p.lipschitz)
    }

    pub fn value(&self, h: &IndexSubset) -> Option<&Rational> {
        self.entries.iter().find(|e| e.subset == *h).map(|e| &e.value)
    }
}

/// Exact `F(H) = P_e*((states[j])_{j∈H})` over all subsets, with the
/// monotonicity and `+1` step checks on every covering pair `L ⊂ H`
/// (`|L| ≥ 1`). Singletons have `F = 0` and are not listed.
pub fn pe_profile(space: &StateSpace, states: &[usize]) -> Result<PeProfile, VerifyError> {
    let scan_n = states.len();
    IndexSubset::full(scan_n)?;
    let subsets: Vec<IndexSubset> = (1..=full_mask(scan_n))
        .filter(|b| b.count_ones() >= 2)
        .map(|b| IndexSubset::from_bits_unchecked(scan_n, b))
        .collect();
    let values: Vec<Rational> = subsets
        .par_iter()
        .map(|h| {
            let chosen: Vec<usize> = h.iter().map(|j| states[j - 1]).collect();
            symmetric_error(space, &chosen).map(|r| r.value)
        })
        .collect::<Result<_, _>>()?;
    let mut table = vec![Rational::zero(); 1 << scan_n];
    for (h, v) in subsets.iter().zip(&values) {
        table[h.bits() as usize] = v.clone();
    }
    let mut pairs = Vec::new();
    for h in &subsets {
        for j in h.iter() {
            let l = h.without(j);
            let (fl, fh) = (&table[l.bits() as usize], &table[h.bits() as usize]);
            pairs.push(PairCheck {
                smaller: l,
                larger: *h,
                monotone: fl <= fh,
                lipschitz: *fh <= fl + Rational::one(),
            });
        }
    }
    let mut entries: Vec<ProfileEntry> = subsets
        .into_iter()
        .zip(values)
        .map(|(subset, value)| ProfileEntry { subset, value })
        .collect();
    entries.sort_by_key(|e| e.subset);
    Ok(PeProfile {
        states: states.to_vec(),
        entries,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn s(n: usize, e: &[usize]) -> IndexSubset {
        IndexSubset::new(n, e).unwrap()
    }

    #[test]
    fn power_set_of_four_needs_no_ruin_points() {
        let r = verify_realization(&IndependenceSystem::power_set(4).unwrap()).unwrap();
        assert!(r.matched);
        assert_eq!(r.ruin_points, 0);
        assert!(r.invariant_violations.is_empty());
    }

    #[test]
    fn pairs_on_three_realized() {
        let a = IndependenceSystem::from_maximal(3, &[s(3, &[1, 2]), s(3, &[1, 3]), s(3, &[2, 3])]).unwrap();
        let r = verify_realization(&a).unwrap();
        assert!(r.passed(), "{}", r.summary_line());
        assert!(r.is_downward_consistent());
    }

    #[test]
    fn two_disjoint_circuits_on_four() {
        let a =
            IndependenceSystem::from_maximal(4, &[s(4, &[1, 3]), s(4, &[1, 4]), s(4, &[2, 3]), s(4, &[2, 4])]).unwrap();
        assert_eq!(a.circuits(), vec![s(4, &[1, 2]), s(4, &[3, 4])]);
        let r = verify_realization(&a).unwrap();
        assert!(r.passed(), "{}", r.summary_line());
        let got = |e: &[usize]| r.verdicts.iter().find(|v| v.subset == s(4, e)).unwrap().got;
        assert!(got(&[1, 3]));
        assert!(!got(&[1, 2]));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_systems(1).unwrap().len(), 1);
        let two = enumerate_systems(2).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.contains(&IndependenceSystem::power_set(2).unwrap()));
        assert_eq!(enumerate_systems(5), Err(VerifyError::Guardrail(5)));
    }

    #[test]
    fn random_systems_are_seeded() {
        let a = random_systems(5, 10, 7).unwrap();
        let b = random_systems(5, 10, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_systems(5, 10, 8).unwrap());
    }

    #[test]
    fn simplex_profile_is_zero() {
        let p = pe_profile(&StateSpace::simplex(3).unwrap(), &[0, 1, 2]).unwrap();
        assert_eq!(p.entries.len(), 4);
        assert!(p.entries.iter().all(|e| e.value == int(0)));
        assert!(p.all_pass());
    }

    #[test]
    fn circuit_profile_pattern() {
        let a = IndependenceSystem::from_maximal(3, &[s(3, &[1, 2]), s(3, &[1, 3]), s(3, &[2, 3])]).unwrap();
        let out = build(&a).unwrap();
        let p = pe_profile(&out.space, &out.vertex_positions).unwrap();
        for pair in [[1, 2], [1, 3], [2, 3]] {
            assert_eq!(p.value(&s(3, &pair)), Some(&int(0)));
        }
        assert!(p.value(&s(3, &[1, 2, 3])).unwrap().is_positive());
        assert!(p.all_pass());
        let check = p
            .pairs
            .iter()
            .find(|c| c.smaller == s(3, &[1, 2]) && c.larger == s(3, &[1, 2, 3]))
            .unwrap();
        assert!(check.lipschitz);
    }

    #[test]
    fn report_serializes() {
        let r = verify_realization(&IndependenceSystem::power_set(2).unwrap()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["match"], true);
        assert_eq!(v["input_system"]["maximal_independent"], serde_json::json!([[1, 2]]));
        assert_eq!(v["verdicts"][0]["subset"], serde_json::json!([]));
    }
}
