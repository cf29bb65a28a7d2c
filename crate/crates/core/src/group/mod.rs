//! Group backends: canonical element forms, products, inverses and
//! breadth-first exploration of balls.
//!
//! Four backends are supported:
//!
//! * `finite_table`: a group given by its full multiplication table,
//! * `finite_perm`: the permutation group generated by a list of
//!   permutations in one-line notation,
//! * `free_abelian`: the lattice `Z^d` written multiplicatively,
//! * `free_group`: the free group on `k` letters.
//!
//! Every element has exactly one canonical form, and elements are ordered
//! lexicographically on that form. Measures iterate in this order, which makes
//! floating-point summation reproducible.

mod explore;
mod parse;

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, WalkError};

pub use explore::{ball, Explorer};

/// Default bound on the number of distinct elements held by any exploration.
pub const DEFAULT_CAP: usize = 10_000_000;

/// Tables up to this order are checked for associativity exhaustively.
const FULL_ASSOCIATIVITY_LIMIT: usize = 64;
const SAMPLED_TRIPLES: usize = 10_000;

/// Descriptor of a group backend.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    FiniteTable {
        /// `table[a][b]` is the index of the product `a * b`.
        table: Vec<Vec<u32>>,
        /// Derived from the table when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        identity: Option<u32>,
        /// Derived from the table when omitted.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inverse: Option<Vec<u32>>,
    },
    FinitePerm {
        degree: usize,
        generators: Vec<Vec<u32>>,
    },
    FreeAbelian {
        rank: usize,
    },
    FreeGroup {
        rank: usize,
    },
}

/// Canonical form of a group element.
///
/// Free-group words store letter `i` as `i + 1` and its inverse as
/// `-(i + 1)`; a word is canonical when no letter is followed by its inverse.
/// Permutations are full image arrays, `perm[i]` being the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElem {
    Table(u32),
    Perm(Vec<u32>),
    Vector(Vec<i64>),
    Word(Vec<i16>),
}

impl GroupElem {
    fn backend(&self) -> &'static str {
        match self {
            GroupElem::Table(_) => "finite_table",
            GroupElem::Perm(_) => "finite_perm",
            GroupElem::Vector(_) => "free_abelian",
            GroupElem::Word(_) => "free_group",
        }
    }
}

impl GroupSpec {
    pub fn free_abelian(rank: usize) -> Self {
        GroupSpec::FreeAbelian { rank }
    }

    pub fn free_group(rank: usize) -> Self {
        GroupSpec::FreeGroup { rank }
    }

    pub fn finite_perm(degree: usize, generators: Vec<Vec<u32>>) -> Self {
        GroupSpec::FinitePerm { degree, generators }
    }

    /// Cyclic group `Z_m` as a multiplication table (`a * b = a + b mod m`).
    pub fn cyclic_table(m: usize) -> Self {
        let table = (0..m)
            .map(|a| (0..m).map(|b| ((a + b) % m) as u32).collect())
            .collect();
        GroupSpec::FiniteTable {
            table,
            identity: None,
            inverse: None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GroupSpec::FiniteTable { .. } => "finite_table",
            GroupSpec::FinitePerm { .. } => "finite_perm",
            GroupSpec::FreeAbelian { .. } => "free_abelian",
            GroupSpec::FreeGroup { .. } => "free_group",
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, GroupSpec::FiniteTable { .. } | GroupSpec::FinitePerm { .. })
    }

    /// Checks the structural invariants of the descriptor. Tables are tested
    /// for associativity exhaustively up to order 64 and on 10^4 seeded random
    /// triples above that; identity and inverse data are checked (or derived)
    /// in full. Missing identity/inverse data is filled in.
    pub fn validated(mut self) -> Result<Self> {
        let bad = |m: String| Err(WalkError::InvalidGroup(m));
        match &mut self {
            GroupSpec::FiniteTable {
                table,
                identity,
                inverse,
            } => {
                let m = table.len();
                if m == 0 {
                    return bad("empty multiplication table".into());
                }
                for (a, row) in table.iter().enumerate() {
                    if row.len() != m {
                        return bad(format!("row {a} has length {} (expected {m})", row.len()));
                    }
                    let mut seen = vec![false; m];
                    for &v in row {
                        if v as usize >= m || std::mem::replace(&mut seen[v as usize], true) {
                            return bad(format!("row {a} is not a permutation of 0..{m}"));
                        }
                    }
                }
                let e = match identity {
                    Some(e) => *e,
                    None => match (0..m as u32).find(|&e| table[e as usize][0] == 0) {
                        Some(e) => e,
                        None => return bad("no identity element".into()),
                    },
                };
                if e as usize >= m {
                    return bad(format!("identity index {e} out of range"));
                }
                for a in 0..m {
                    if table[e as usize][a] != a as u32 || table[a][e as usize] != a as u32 {
                        return bad(format!("{e} is not a two-sided identity (fails at {a})"));
                    }
                }
                let inv = match inverse {
                    Some(inv) => inv.clone(),
                    None => (0..m)
                        .map(|a| table[a].iter().position(|&v| v == e).unwrap_or(0) as u32)
                        .collect(),
                };
                if inv.len() != m {
                    return bad("inverse table has wrong length".into());
                }
                for a in 0..m {
                    let b = inv[a] as usize;
                    if b >= m || table[a][b] != e || table[b][a] != e {
                        return bad(format!("inverse table inconsistent at {a}"));
                    }
                }
                let assoc = |a: usize, b: usize, c: usize| {
                    let ab = table[a][b] as usize;
                    let bc = table[b][c] as usize;
                    table[ab][c] == table[a][bc]
                };
                if m <= FULL_ASSOCIATIVITY_LIMIT {
                    for a in 0..m {
                        for b in 0..m {
                            for c in 0..m {
                                if !assoc(a, b, c) {
                                    return bad(format!("not associative at ({a},{b},{c})"));
                                }
                            }
                        }
                    }
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
                    for _ in 0..SAMPLED_TRIPLES {
                        let (a, b, c) = (rng.random_range(0..m), rng.random_range(0..m), rng.random_range(0..m));
                        if !assoc(a, b, c) {
                            return bad(format!("not associative at ({a},{b},{c})"));
                        }
                    }
                }
                *identity = Some(e);
                *inverse = Some(inv);
            }
            GroupSpec::FinitePerm { degree, generators } => {
                if *degree == 0 {
                    return bad("permutation degree must be at least 1".into());
                }
                for (i, g) in generators.iter().enumerate() {
                    if !is_permutation(g, *degree) {
                        return bad(format!("generator {i} is not a bijection of 0..{degree}"));
                    }
                }
            }
            GroupSpec::FreeAbelian { rank } | GroupSpec::FreeGroup { rank } => {
                if *rank == 0 {
                    return bad("rank must be at least 1".into());
                }
                if matches!(self, GroupSpec::FreeGroup { rank } if rank > 26) {
                    return bad("free groups of rank > 26 have no letter encoding".into());
                }
            }
        }
        Ok(self)
    }

    pub fn identity(&self) -> GroupElem {
        match self {
            GroupSpec::FiniteTable { table, identity, .. } => GroupElem::Table(
                identity.unwrap_or_else(|| {
                    (0..table.len() as u32)
                        .find(|&e| table[e as usize].first() == Some(&0))
                        .unwrap_or(0)
                }),
            ),
            GroupSpec::FinitePerm { degree, .. } => GroupElem::Perm((0..*degree as u32).collect()),
            GroupSpec::FreeAbelian { rank } => GroupElem::Vector(vec![0; *rank]),
            GroupSpec::FreeGroup { .. } => GroupElem::Word(Vec::new()),
        }
    }

    /// Checks that `a` is a canonical element of this backend.
    pub fn check(&self, a: &GroupElem) -> Result<()> {
        let ok = match (self, a) {
            (GroupSpec::FiniteTable { table, .. }, GroupElem::Table(i)) => (*i as usize) < table.len(),
            (GroupSpec::FinitePerm { degree, .. }, GroupElem::Perm(p)) => is_permutation(p, *degree),
            (GroupSpec::FreeAbelian { rank }, GroupElem::Vector(v)) => v.len() == *rank,
            (GroupSpec::FreeGroup { rank }, GroupElem::Word(w)) => {
                w.iter().all(|&l| l != 0 && (l.unsigned_abs() as usize) <= *rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            _ => return Err(mismatch(self, a)),
        };
        if ok {
            Ok(())
        } else {
            Err(WalkError::NotInGroup(format!("{a:?} is not canonical for {}", self.kind())))
        }
    }

    /// Group product `a * b`.
    pub fn mul(&self, a: &GroupElem, b: &GroupElem) -> Result<GroupElem> {
        match (self, a, b) {
            (GroupSpec::FiniteTable { table, .. }, GroupElem::Table(x), GroupElem::Table(y)) => {
                let row = table
                    .get(*x as usize)
                    .ok_or_else(|| WalkError::NotInGroup(format!("index {x}")))?;
                let v = row
                    .get(*y as usize)
                    .ok_or_else(|| WalkError::NotInGroup(format!("index {y}")))?;
                Ok(GroupElem::Table(*v))
            }
            (GroupSpec::FinitePerm { degree, .. }, GroupElem::Perm(p), GroupElem::Perm(q)) => {
                if p.len() != *degree || q.len() != *degree {
                    return Err(WalkError::NotInGroup("permutation of wrong degree".into()));
                }
                // apply p first, then q
                Ok(GroupElem::Perm(p.iter().map(|&i| q[i as usize]).collect()))
            }
            (GroupSpec::FreeAbelian { rank }, GroupElem::Vector(u), GroupElem::Vector(v)) => {
                if u.len() != *rank || v.len() != *rank {
                    return Err(WalkError::NotInGroup("vector of wrong rank".into()));
                }
                Ok(GroupElem::Vector(u.iter().zip(v).map(|(x, y)| x + y).collect()))
            }
            (GroupSpec::FreeGroup { .. }, GroupElem::Word(u), GroupElem::Word(v)) => {
                Ok(GroupElem::Word(reduce_concat(u, v)))
            }
            _ => {
                self.check_backend(a)?;
                Err(mismatch(self, b))
            }
        }
    }

    pub fn inv(&self, a: &GroupElem) -> Result<GroupElem> {
        match (self, a) {
            (GroupSpec::FiniteTable { table, inverse, .. }, GroupElem::Table(x)) => {
                let x = *x as usize;
                if x >= table.len() {
                    return Err(WalkError::NotInGroup(format!("index {x}")));
                }
                let y = match inverse {
                    Some(inv) => inv[x],
                    None => {
                        let e = self.identity();
                        let GroupElem::Table(e) = e else { unreachable!() };
                        table[x].iter().position(|&v| v == e).unwrap_or(0) as u32
                    }
                };
                Ok(GroupElem::Table(y))
            }
            (GroupSpec::FinitePerm { .. }, GroupElem::Perm(p)) => {
                let mut out = vec![0u32; p.len()];
                for (i, &pi) in p.iter().enumerate() {
                    *out.get_mut(pi as usize)
                        .ok_or_else(|| WalkError::NotInGroup(format!("{p:?}")))? = i as u32;
                }
                Ok(GroupElem::Perm(out))
            }
            (GroupSpec::FreeAbelian { .. }, GroupElem::Vector(v)) => {
                Ok(GroupElem::Vector(v.iter().map(|x| -x).collect()))
            }
            (GroupSpec::FreeGroup { .. }, GroupElem::Word(w)) => {
                Ok(GroupElem::Word(w.iter().rev().map(|l| -l).collect()))
            }
            _ => Err(mismatch(self, a)),
        }
    }

    /// `a^-1 * b`.
    pub fn left_div(&self, a: &GroupElem, b: &GroupElem) -> Result<GroupElem> {
        self.mul(&self.inv(a)?, b)
    }

    /// Integer power `a^k` for `k >= 0`.
    pub fn pow(&self, a: &GroupElem, k: usize) -> Result<GroupElem> {
        let mut acc = self.identity();
        for _ in 0..k {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    fn check_backend(&self, a: &GroupElem) -> Result<()> {
        if self.kind() == a.backend() {
            Ok(())
        } else {
            Err(mismatch(self, a))
        }
    }

    /// All elements of a finite group in canonical order. For `finite_perm`
    /// this is the closure of the generators.
    pub fn elements(&self, cap: usize) -> Result<Vec<GroupElem>> {
        match self {
            GroupSpec::FiniteTable { table, .. } => {
                if table.len() > cap {
                    return Err(WalkError::CapExceeded { cap, reached: None });
                }
                Ok((0..table.len() as u32).map(GroupElem::Table).collect())
            }
            GroupSpec::FinitePerm { generators, .. } => {
                let gens: Vec<GroupElem> = generators.iter().cloned().map(GroupElem::Perm).collect();
                let e = self.identity();
                let mut seen: HashSet<GroupElem> = HashSet::from([e.clone()]);
                let mut queue = VecDeque::from([e]);
                while let Some(x) = queue.pop_front() {
                    for g in &gens {
                        let y = self.mul(&x, g)?;
                        if seen.insert(y.clone()) {
                            if seen.len() > cap {
                                return Err(WalkError::CapExceeded { cap, reached: None });
                            }
                            queue.push_back(y);
                        }
                    }
                }
                let mut out: Vec<GroupElem> = seen.into_iter().collect();
                out.sort();
                Ok(out)
            }
            _ => Err(WalkError::Unsupported(format!(
                "a finite group (got {})",
                self.kind()
            ))),
        }
    }

    /// Whether `a` belongs to the group. For `finite_perm` this tests
    /// membership in the generated subgroup, given its element list.
    pub fn contains(&self, a: &GroupElem, finite_elements: Option<&[GroupElem]>) -> bool {
        if self.check(a).is_err() {
            return false;
        }
        match (self, finite_elements) {
            (GroupSpec::FinitePerm { .. }, Some(all)) => all.binary_search(a).is_ok(),
            _ => true,
        }
    }

    pub fn parse_elem(&self, text: &str) -> Result<GroupElem> {
        parse::parse_elem(self, text)
    }

    pub fn format_elem(&self, a: &GroupElem) -> String {
        parse::format_elem(a)
    }
}

fn mismatch(spec: &GroupSpec, a: &GroupElem) -> WalkError {
    WalkError::BackendMismatch(format!(
        "element of {} used with a {} group",
        a.backend(),
        spec.kind()
    ))
}

fn is_permutation(p: &[u32], degree: usize) -> bool {
    if p.len() != degree {
        return false;
    }
    let mut seen = vec![false; degree];
    p.iter()
        .all(|&i| (i as usize) < degree && !std::mem::replace(&mut seen[i as usize], true))
}

/// Concatenates two reduced words and cancels at the junction.
fn reduce_concat(u: &[i16], v: &[i16]) -> Vec<i16> {
    let mut out = u.to_vec();
    let mut rest = v;
    while let (Some(&last), Some(&first)) = (out.last(), rest.first()) {
        if last != -first {
            break;
        }
        out.pop();
        rest = &rest[1..];
    }
    out.extend_from_slice(rest);
    out
}

/// Freely reduces an arbitrary letter sequence.
pub(crate) fn reduce_word(letters: &[i16]) -> Vec<i16> {
    let mut out: Vec<i16> = Vec::with_capacity(letters.len());
    for &l in letters {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}
