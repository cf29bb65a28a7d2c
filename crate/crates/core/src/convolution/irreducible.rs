use serde::Serialize;

use crate::error::{Result, WalkError};
use crate::group::{GroupElem, GroupSpec};
use crate::weight::Weight;

use super::{SparseMeasure, SupportPowers};

/// Outcome of the irreducibility test: does the semigroup generated by the
/// support equal the whole group?
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Irreducibility {
    CertifiedYes,
    CertifiedNo { reason: String },
    /// No certificate either way. `ball_covered` is the largest `n` for which
    /// `S^1, ..., S^n` were explored.
    Unknown { ball_covered: usize, symmetric_support: bool },
}

impl Irreducibility {
    pub fn is_certified_no(&self) -> bool {
        matches!(self, Irreducibility::CertifiedNo { .. })
    }
}

/// Finite groups: closure of the semigroup generated by the support,
/// compared with the whole group. Infinite groups: a coordinate half-space
/// containing every support vector (after abelianization for free groups)
/// certifies reducibility; otherwise the answer is unknown and the semigroup
/// is explored up to `horizon` steps or until `cap` elements.
pub fn irreducibility_check<W: Weight>(
    m: &SparseMeasure<W>,
    horizon: usize,
    cap: usize,
) -> Result<Irreducibility> {
    let spec = m.spec();
    let support = m.support_vec();
    if spec.is_finite() {
        let order = spec.elements(cap)?.len();
        let mut powers = SupportPowers::new(spec.clone(), support, cap)?;
        let mut reached = vec![false; 1];
        let mut count = 0usize;
        // union of S^n over n >= 1; once a power adds nothing, no later one can
        loop {
            powers.advance()?;
            let mut grew = false;
            for &id in powers.ids() {
                let i = id as usize;
                if i >= reached.len() {
                    reached.resize(i + 1, false);
                }
                if !reached[i] {
                    reached[i] = true;
                    count += 1;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        return Ok(if count == order {
            Irreducibility::CertifiedYes
        } else {
            Irreducibility::CertifiedNo {
                reason: format!("semigroup generated by the support has {count} of {order} elements"),
            }
        });
    }

    let coords: Vec<Vec<i64>> = support
        .iter()
        .map(|g| abelianize(spec, g))
        .collect::<Result<_>>()?;
    let rank = coords[0].len();
    for i in 0..rank {
        for sign in [1i64, -1] {
            if coords.iter().all(|c| sign * c[i] >= 0) {
                let axis = match spec.as_ref() {
                    GroupSpec::FreeGroup { .. } => format!("exponent sum of letter {}", (b'a' + i as u8) as char),
                    _ => format!("coordinate {}", i + 1),
                };
                let side = if sign > 0 { ">= 0" } else { "<= 0" };
                return Ok(Irreducibility::CertifiedNo {
                    reason: format!("every support element has {axis} {side}"),
                });
            }
        }
    }

    let mut powers = SupportPowers::new(spec.clone(), support, cap)?;
    let mut covered = 0;
    while covered < horizon {
        match powers.advance() {
            Ok(()) => covered += 1,
            Err(WalkError::CapExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(Irreducibility::Unknown {
        ball_covered: covered,
        symmetric_support: m.is_symmetric(),
    })
}

fn abelianize(spec: &GroupSpec, g: &GroupElem) -> Result<Vec<i64>> {
    match (spec, g) {
        (GroupSpec::FreeAbelian { .. }, GroupElem::Vector(v)) => Ok(v.clone()),
        (GroupSpec::FreeGroup { rank }, GroupElem::Word(w)) => {
            let mut out = vec![0i64; *rank];
            for &l in w {
                out[l.unsigned_abs() as usize - 1] += l.signum() as i64;
            }
            Ok(out)
        }
        _ => Err(WalkError::Unsupported("an infinite backend".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_CAP;
    use std::sync::Arc;

    #[test]
    fn one_sided_walk_on_integers_is_reducible() {
        let z = Arc::new(GroupSpec::free_abelian(1));
        let m = SparseMeasure::<f64>::from_text(z, &[("(1)", "1")]).unwrap();
        assert!(irreducibility_check(&m, 10, DEFAULT_CAP).unwrap().is_certified_no());
    }

    #[test]
    fn lazy_one_sided_walk_is_reducible() {
        let z = Arc::new(GroupSpec::free_abelian(1));
        let m = SparseMeasure::<f64>::from_text(z, &[("(1)", "0.5"), ("(0)", "0.5")]).unwrap();
        assert!(irreducibility_check(&m, 10, DEFAULT_CAP).unwrap().is_certified_no());
    }

    #[test]
    fn transpositions_generate_s3() {
        let s3 = Arc::new(GroupSpec::finite_perm(3, vec![vec![1, 0, 2], vec![2, 1, 0]]));
        let m = SparseMeasure::<f64>::from_text(s3, &[("[1,0,2]", "0.5"), ("[2,1,0]", "0.5")]).unwrap();
        assert_eq!(irreducibility_check(&m, 10, DEFAULT_CAP).unwrap(), Irreducibility::CertifiedYes);
    }

    #[test]
    fn proper_subgroup_support_is_reducible() {
        let s3 = Arc::new(GroupSpec::finite_perm(3, vec![vec![1, 0, 2], vec![2, 1, 0]]));
        let m = SparseMeasure::<f64>::from_text(s3, &[("[1,0,2]", "1")]).unwrap();
        assert!(irreducibility_check(&m, 10, DEFAULT_CAP).unwrap().is_certified_no());
    }

    #[test]
    fn free_group_symmetric_support_is_unknown() {
        let f2 = Arc::new(GroupSpec::free_group(2));
        let m = SparseMeasure::<f64>::from_text(
            f2,
            &[("a", "0.25"), ("A", "0.25"), ("b", "0.25"), ("B", "0.25")],
        )
        .unwrap();
        match irreducibility_check(&m, 6, DEFAULT_CAP).unwrap() {
            Irreducibility::Unknown { ball_covered, symmetric_support } => {
                assert_eq!(ball_covered, 6);
                assert!(symmetric_support);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_group_positive_words_are_reducible() {
        let f2 = Arc::new(GroupSpec::free_group(2));
        let m = SparseMeasure::<f64>::from_text(f2, &[("a", "0.5"), ("bA", "0.25"), ("b", "0.25")]).unwrap();
        assert!(irreducibility_check(&m, 6, DEFAULT_CAP).unwrap().is_certified_no());
    }
}
