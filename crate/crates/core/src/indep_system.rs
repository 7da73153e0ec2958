//! Independence systems on a finite ground set `[n] = {1, ..., n}`.
//!
//! Subsets are bitmasks (bit `j - 1` set when `j` is present). Indices are
//! 1-based everywhere in the public API and on the wire; only the bit layout
//! is 0-based.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported ground set. Systems store all `2^n` membership flags.
pub const MAX_GROUND_SIZE: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IndepError {
    #[error("ground set size {0} is outside 1..={MAX_GROUND_SIZE}")]
    GroundSize(usize),
    #[error("element {element} is outside the ground set [1..={n}]")]
    ElementOutOfRange { element: usize, n: usize },
    #[error("subset is defined over [{found}] but the system is over [{expected}]")]
    GroundMismatch { expected: usize, found: usize },
    #[error("family is not downward closed: {present} is a member but its subset {missing} is not")]
    NotDownwardClosed { present: IndexSubset, missing: IndexSubset },
    #[error("singleton {{{0}}} is not a member")]
    MissingSingleton(usize),
    #[error("system JSON must carry exactly one of `members` or `maximal_independent`")]
    AmbiguousEncoding,
}

/// A subset of `[n]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexSubset {
    bits: u32,
    n: u8,
}

fn check_ground(n: usize) -> Result<(), IndepError> {
    if n == 0 || n > MAX_GROUND_SIZE {
        Err(IndepError::GroundSize(n))
    } else {
        Ok(())
    }
}

impl IndexSubset {
    /// Builds a subset from 1-based elements. Repeated elements are allowed.
    pub fn new(n: usize, elements: &[usize]) -> Result<Self, IndepError> {
        check_ground(n)?;
        let mut bits = 0u32;
        for &e in elements {
            if e == 0 || e > n {
                return Err(IndepError::ElementOutOfRange { element: e, n });
            }
            bits |= 1 << (e - 1);
        }
        Ok(Self { bits, n: n as u8 })
    }

    pub fn from_bits(n: usize, bits: u32) -> Result<Self, IndepError> {
        check_ground(n)?;
        if n < 32 && bits >> n != 0 {
            let element = 32 - bits.leading_zeros() as usize;
            return Err(IndepError::ElementOutOfRange { element, n });
        }
        Ok(Self { bits, n: n as u8 })
    }

    pub(crate) fn from_bits_unchecked(n: usize, bits: u32) -> Self {
        debug_assert!(n <= MAX_GROUND_SIZE && bits >> n == 0);
        Self { bits, n: n as u8 }
    }

    pub fn empty(n: usize) -> Result<Self, IndepError> {
        Self::from_bits(n, 0)
    }

    pub fn full(n: usize) -> Result<Self, IndepError> {
        check_ground(n)?;
        Ok(Self {
            bits: full_mask(n),
            n: n as u8,
        })
    }

    pub fn singleton(n: usize, j: usize) -> Result<Self, IndepError> {
        Self::new(n, &[j])
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn ground_size(&self) -> usize {
        self.n as usize
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Is the 1-based index `j` in the subset?
    pub fn contains(&self, j: usize) -> bool {
        j >= 1 && j <= self.n as usize && self.bits & (1 << (j - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_proper_subset_of(&self, other: &Self) -> bool {
        self.is_subset_of(other) && self.bits != other.bits
    }

    /// Copy with `j` removed. `j` must lie in `[n]`.
    pub fn without(&self, j: usize) -> Self {
        debug_assert!(j >= 1 && j <= self.n as usize);
        Self {
            bits: self.bits & !(1 << (j - 1)),
            n: self.n,
        }
    }

    /// Copy with `j` added. `j` must lie in `[n]`.
    pub fn with(&self, j: usize) -> Self {
        debug_assert!(j >= 1 && j <= self.n as usize);
        Self {
            bits: self.bits | (1 << (j - 1)),
            n: self.n,
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: !self.bits & full_mask(self.n as usize),
            n: self.n,
        }
    }

    /// Ascending 1-based elements.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (1..=self.n as usize).filter(move |j| bits & (1 << (j - 1)) != 0)
    }

    pub fn elements(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// Canonical order: ground size, then lexicographic on the sorted element
/// tuple (so `{} < {1} < {1,2} < {1,2,3} < {1,3} < {2}`).
impl Ord for IndexSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n.cmp(&other.n).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for IndexSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for IndexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{j}")?;
        }
        f.write_str("}")
    }
}

/// Serialized as its sorted 1-based elements.
impl Serialize for IndexSubset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl fmt::Debug for IndexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}/{}", self.n)
    }
}

/// A downward-closed family of subsets of `[n]` that contains every
/// singleton.
///
/// All `2^n` membership flags are kept, so membership is a table lookup.
/// The maximal members are derived once and used for serialization.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SystemJson", into = "SystemJson")]
pub struct IndependenceSystem {
    n: usize,
    member: Vec<bool>,
    maximal: Vec<IndexSubset>,
}

impl IndependenceSystem {
    /// Validates an explicit member list. Nothing is added implicitly.
    pub fn from_member_list(n: usize, sets: &[IndexSubset]) -> Result<Self, IndepError> {
        check_ground(n)?;
        let mut member = vec![false; 1 << n];
        for s in sets {
            if s.ground_size() != n {
                return Err(IndepError::GroundMismatch {
                    expected: n,
                    found: s.ground_size(),
                });
            }
            member[s.bits as usize] = true;
        }
        for j in 1..=n {
            if !member[1 << (j - 1)] {
                return Err(IndepError::MissingSingleton(j));
            }
        }
        // Closure under single-element removal implies closure under subsets.
        for bits in 0..member.len() as u32 {
            if !member[bits as usize] {
                continue;
            }
            let mut rest = bits;
            while rest != 0 {
                let low = rest & rest.wrapping_neg();
                rest ^= low;
                if !member[(bits ^ low) as usize] {
                    return Err(IndepError::NotDownwardClosed {
                        present: IndexSubset::from_bits_unchecked(n, bits),
                        missing: IndexSubset::from_bits_unchecked(n, bits ^ low),
                    });
                }
            }
        }
        Ok(Self::from_flags(n, member))
    }

    /// Downward closure of the given sets, in strict mode: every singleton
    /// must be covered by some input set.
    pub fn from_maximal(n: usize, maximal_sets: &[IndexSubset]) -> Result<Self, IndepError> {
        Self::from_maximal_with(n, maximal_sets, true)
    }

    /// Downward closure of the given sets. With `strict == false`, uncovered
    /// singletons are added instead of rejected.
    pub fn from_maximal_with(n: usize, maximal_sets: &[IndexSubset], strict: bool) -> Result<Self, IndepError> {
        check_ground(n)?;
        let mut member = vec![false; 1 << n];
        let mut covered = 0u32;
        for s in maximal_sets {
            if s.ground_size() != n {
                return Err(IndepError::GroundMismatch {
                    expected: n,
                    found: s.ground_size(),
                });
            }
            covered |= s.bits;
            member[s.bits as usize] = true;
        }
        for j in 1..=n {
            if covered & (1 << (j - 1)) == 0 {
                if strict {
                    return Err(IndepError::MissingSingleton(j));
                }
                member[1 << (j - 1)] = true;
            }
        }
        member[0] = true;
        // Sweep from the top: each member pulls in its one-smaller subsets.
        for bits in (1..member.len() as u32).rev() {
            if !member[bits as usize] {
                continue;
            }
            let mut rest = bits;
            while rest != 0 {
                let low = rest & rest.wrapping_neg();
                rest ^= low;
                member[(bits ^ low) as usize] = true;
            }
        }
        Ok(Self::from_flags(n, member))
    }

    pub fn power_set(n: usize) -> Result<Self, IndepError> {
        Self::from_maximal(n, &[IndexSubset::full(n)?])
    }

    /// Builds from a membership table already known to be a valid system.
    pub(crate) fn from_flags(n: usize, member: Vec<bool>) -> Self {
        debug_assert_eq!(member.len(), 1 << n);
        let mut maximal = Vec::new();
        for bits in 0..member.len() as u32 {
            if !member[bits as usize] {
                continue;
            }
            let extendable = (0..n).any(|k| bits & (1 << k) == 0 && member[(bits | (1 << k)) as usize]);
            if !extendable {
                maximal.push(IndexSubset::from_bits_unchecked(n, bits));
            }
        }
        maximal.sort();
        Self { n, member, maximal }
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    /// Is `h` a member? Subsets over a different ground set are never members.
    pub fn contains(&self, h: &IndexSubset) -> bool {
        h.ground_size() == self.n && self.member[h.bits as usize]
    }

    /// Number of members, counting the empty set.
    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Members in canonical order.
    pub fn members(&self) -> Vec<IndexSubset> {
        let mut out: Vec<IndexSubset> = (0..self.member.len() as u32)
            .filter(|&b| self.member[b as usize])
            .map(|b| IndexSubset::from_bits_unchecked(self.n, b))
            .collect();
        out.sort();
        out
    }

    /// Inclusion-maximal members in canonical order.
    pub fn maximal(&self) -> &[IndexSubset] {
        &self.maximal
    }

    /// The minimally dependent sets: non-members all of whose
    /// one-smaller subsets are members. Returned in canonical order.
    pub fn circuits(&self) -> Vec<IndexSubset> {
        let mut out = Vec::new();
        for bits in 0..self.member.len() as u32 {
            if self.member[bits as usize] {
                continue;
            }
            let mut rest = bits;
            let mut minimal = true;
            while rest != 0 {
                let low = rest & rest.wrapping_neg();
                rest ^= low;
                if !self.member[(bits ^ low) as usize] {
                    minimal = false;
                    break;
                }
            }
            if minimal {
                out.push(IndexSubset::from_bits_unchecked(self.n, bits));
            }
        }
        out.sort();
        out
    }
}

impl fmt::Debug for IndependenceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndependenceSystem")
            .field("n", &self.n)
            .field("maximal", &self.maximal)
            .finish()
    }
}

impl fmt::Display for IndependenceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} maximal=[", self.n)?;
        for (i, m) in self.maximal.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("]")
    }
}

/// Wire form: `{"n": 3, "maximal_independent": [[1,2],[3]]}` or
/// `{"n": 3, "members": [[], [1], ...]}`. Serialization always emits the
/// sorted maximal sets.
#[derive(Clone, Serialize, Deserialize)]
struct SystemJson {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    maximal_independent: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    members: Option<Vec<Vec<usize>>>,
}

impl From<IndependenceSystem> for SystemJson {
    fn from(a: IndependenceSystem) -> Self {
        SystemJson {
            n: a.n,
            maximal_independent: Some(a.maximal.iter().map(IndexSubset::elements).collect()),
            members: None,
        }
    }
}

impl TryFrom<SystemJson> for IndependenceSystem {
    type Error = IndepError;

    fn try_from(j: SystemJson) -> Result<Self, IndepError> {
        let to_sets = |lists: &[Vec<usize>]| -> Result<Vec<IndexSubset>, IndepError> {
            lists.iter().map(|l| IndexSubset::new(j.n, l)).collect()
        };
        match (&j.maximal_independent, &j.members) {
            (Some(max), None) => Self::from_maximal(j.n, &to_sets(max)?),
            (None, Some(mem)) => Self::from_member_list(j.n, &to_sets(mem)?),
            _ => Err(IndepError::AmbiguousEncoding),
        }
    }
}
