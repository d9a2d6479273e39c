//! Bubble diagrams of weight (l, r).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Result, TcgError};
use crate::symbolic::FreqExpr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bubble {
    pub left: usize,
    pub right: usize,
}

/// Ordered bubbles; `bubbles[0]` acts closest to the density matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagram {
    pub bubbles: Vec<Bubble>,
    pub l: usize,
    pub r: usize,
}

impl Diagram {
    pub fn len(&self) -> usize {
        self.bubbles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bubbles.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        let sl: usize = self.bubbles.iter().map(|b| b.left).sum();
        let sr: usize = self.bubbles.iter().map(|b| b.right).sum();
        sl == self.l
            && sr == self.r
            && self.bubbles.iter().all(|b| b.left + b.right >= 1)
            && self.bubbles.last().is_some_and(|b| b.left >= 1)
    }
}

fn check_weight(l: usize, r: usize) -> Result<()> {
    if l == 0 {
        return Err(TcgError::InvalidWeight {
            l,
            r,
            msg: "the special mode needs at least one left slot".into(),
        });
    }
    Ok(())
}

/// Streams diagrams depth first, adding left slots before right slots.
pub fn for_each_diagram(l: usize, r: usize, f: &mut dyn FnMut(&Diagram)) -> Result<()> {
    check_weight(l, r)?;
    let mut stack = Vec::new();
    walk(l, r, l, r, &mut stack, f);
    Ok(())
}

fn walk(l: usize, r: usize, lrem: usize, rrem: usize, stack: &mut Vec<Bubble>, f: &mut dyn FnMut(&Diagram)) {
    if lrem == 0 && rrem == 0 {
        if stack.last().is_some_and(|b| b.left >= 1) {
            f(&Diagram {
                bubbles: stack.clone(),
                l,
                r,
            });
        }
        return;
    }
    for bl in (0..=lrem).rev() {
        for br in (0..=rrem).rev() {
            if bl + br == 0 {
                continue;
            }
            // once the left slots run out the diagram has to close here
            if lrem == bl && br != rrem {
                continue;
            }
            stack.push(Bubble { left: bl, right: br });
            walk(l, r, lrem - bl, rrem - br, stack, f);
            stack.pop();
        }
    }
}

pub fn enumerate_diagrams(l: usize, r: usize) -> Result<Vec<Diagram>> {
    let mut out = Vec::new();
    for_each_diagram(l, r, &mut |d| out.push(d.clone()))?;
    Ok(out)
}

type Cache = Mutex<HashMap<(usize, usize), Arc<Vec<Diagram>>>>;

/// Shared, materialized diagram list.
pub fn diagrams_cached(l: usize, r: usize) -> Result<Arc<Vec<Diagram>>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(l, r)) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_diagrams(l, r)?);
    cache.lock().unwrap().insert((l, r), v.clone());
    Ok(v)
}

/// Per-bubble contiguous blocks of the frequency vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySlicing {
    pub blocks: Vec<(Vec<FreqExpr>, Vec<FreqExpr>)>,
}

pub fn slice_frequencies(d: &Diagram, mu: &[FreqExpr], nu: &[FreqExpr]) -> Result<FrequencySlicing> {
    if mu.len() != d.l || nu.len() != d.r {
        return Err(TcgError::Shape(format!(
            "diagram weight ({},{}) but vectors of length ({},{})",
            d.l,
            d.r,
            mu.len(),
            nu.len()
        )));
    }
    let (mut i, mut j) = (0, 0);
    let mut blocks = Vec::with_capacity(d.len());
    for b in &d.bubbles {
        blocks.push((mu[i..i + b.left].to_vec(), nu[j..j + b.right].to_vec()));
        i += b.left;
        j += b.right;
    }
    Ok(FrequencySlicing { blocks })
}
