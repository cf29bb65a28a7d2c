use std::collections::HashMap;
use std::sync::Arc;

use super::{GroupElem, GroupSpec};
use crate::error::{Result, WalkError};

const UNKNOWN: u32 = u32::MAX;

/// Interns group elements reached from the identity and caches the right
/// multiplication `x -> x * s` by a fixed list of step elements.
///
/// Element ids are assigned in discovery order, the identity being id 0. All
/// convolution-power and support-power iterations run on ids, so each product
/// is computed once per (element, step) pair.
#[derive(Clone, Debug)]
pub struct Explorer {
    spec: Arc<GroupSpec>,
    steps: Vec<GroupElem>,
    elems: Vec<GroupElem>,
    index: HashMap<GroupElem, u32>,
    // succ[id * steps.len() + j]
    succ: Vec<u32>,
    cap: usize,
}

impl Explorer {
    pub fn new(spec: Arc<GroupSpec>, steps: Vec<GroupElem>, cap: usize) -> Result<Self> {
        for s in &steps {
            spec.check(s)?;
        }
        let mut ex = Self {
            spec,
            steps,
            elems: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
            cap: cap.max(1),
        };
        let e = ex.spec.identity();
        ex.intern(e)?;
        Ok(ex)
    }

    pub fn spec(&self) -> &Arc<GroupSpec> {
        &self.spec
    }

    pub fn steps(&self) -> &[GroupElem] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn elem(&self, id: u32) -> &GroupElem {
        &self.elems[id as usize]
    }

    pub fn id_of(&self, g: &GroupElem) -> Option<u32> {
        self.index.get(g).copied()
    }

    pub fn intern(&mut self, g: GroupElem) -> Result<u32> {
        if let Some(&id) = self.index.get(&g) {
            return Ok(id);
        }
        if self.elems.len() >= self.cap {
            return Err(WalkError::CapExceeded {
                cap: self.cap,
                reached: None,
            });
        }
        let id = self.elems.len() as u32;
        self.index.insert(g.clone(), id);
        self.elems.push(g);
        self.succ.extend(std::iter::repeat_n(UNKNOWN, self.steps.len()));
        Ok(id)
    }

    /// Id of `elem(id) * steps[j]`.
    pub fn successor(&mut self, id: u32, j: usize) -> Result<u32> {
        let slot = id as usize * self.steps.len() + j;
        let cached = self.succ[slot];
        if cached != UNKNOWN {
            return Ok(cached);
        }
        let y = self.spec.mul(&self.elems[id as usize], &self.steps[j])?;
        let yid = self.intern(y)?;
        self.succ[slot] = yid;
        Ok(yid)
    }
}

/// All products of at most `radius` generators (the identity included), in
/// canonical order.
pub fn ball(
    spec: &Arc<GroupSpec>,
    generators: &[GroupElem],
    radius: usize,
    cap: usize,
) -> Result<Vec<GroupElem>> {
    let mut ex = Explorer::new(spec.clone(), generators.to_vec(), cap)?;
    let mut frontier = vec![0u32];
    let mut seen = vec![true];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &x in &frontier {
            for j in 0..generators.len() {
                let y = ex.successor(x, j)?;
                if y as usize >= seen.len() {
                    seen.resize(y as usize + 1, false);
                }
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    next.push(y);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let mut out = ex.elems;
    out.sort();
    Ok(out)
}
