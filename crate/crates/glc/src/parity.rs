//! Parity classification of vertex threads.
//!
//! A thread is even (odd) when every small-enough clopen neighborhood of it
//! is crossed by an even (odd) number of edges. At finite depth the clopen
//! candidates are the fibre neighborhoods A_k of the thread, and "every
//! clopen C inside A with v ∈ C has even cut" reduces to degree parities in
//! the fibre: the thread's own class decides, provided every other class in
//! the fibre has even degree. That reduction is cross-validated by a
//! brute-force subset oracle on small fibres.
//!
//! The strong/weak degree notions instead stabilize the maximum number of
//! edge-disjoint arcs from outside the neighborhood into the thread.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{MultiGraph, VertexId};
use crate::prosys::{CylinderSet, InverseSystem, VertexThread};

/// Number of consecutive levels a certificate must hold for before it is
/// reported; keeps one-level coincidences from certifying.
pub const DEFAULT_WINDOW: usize = 3;

/// Largest fibre the subset oracle will enumerate.
pub const DEFAULT_ORACLE_BOUND: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParityVerdict {
    /// All clopen cuts around the thread inside the level-n fibre
    /// neighborhood are even, through the probed depth.
    EvenCertified {
        level: usize,
    },
    OddCertified {
        level: usize,
    },
    /// Two cylinder neighborhoods of the thread with opposite cut parity.
    NeitherCertified {
        witnesses: [CylinderSet; 2],
    },
    Undetermined {
        depth: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrongDegreeVerdict {
    /// The max number of edge-disjoint arcs into the thread stabilized at
    /// this even value over the terminal window of fibre neighborhoods.
    StronglyEven {
        value: usize,
    },
    StronglyOdd {
        value: usize,
    },
    /// The arc numbers did not agree over the terminal window.
    Unstable {
        depth: usize,
    },
    Undetermined {
        depth: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeakDegreeVerdict {
    WeaklyEven,
    WeaklyOdd,
    /// Neither strong property certified, so at this depth the thread
    /// qualifies as both weakly even and weakly odd.
    Both,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleVerdict {
    AllEven,
    AllOdd,
    Mixed,
}

fn clamp_depth(sys: &InverseSystem, depth: usize) -> usize {
    depth.min(sys.depth())
}

/// The fibre of the thread's level-n class, viewed at level m >= n.
fn fibre_at(
    sys: &InverseSystem,
    t: &VertexThread,
    n: usize,
    m: usize,
) -> Result<BTreeSet<VertexId>> {
    sys.fiber(
        m,
        &CylinderSet {
            level: n,
            cells: BTreeSet::from([t.vertices[n].clone()]),
        },
    )
}

/// Does "every clopen around the thread inside the level-n fibre is even
/// (resp. odd)" hold when inspected at level m? True iff the thread's class
/// has the stated parity and every other fibre class has even degree.
fn reduction_holds(
    g: &MultiGraph,
    fibre: &BTreeSet<VertexId>,
    v: &VertexId,
    want_odd: bool,
) -> Result<bool> {
    let own = g.degree(v)?;
    if (own % 2 == 1) != want_odd {
        return Ok(false);
    }
    for u in fibre {
        if u != v && g.degree(u)? % 2 != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn vertex_parity(sys: &InverseSystem, t: &VertexThread, depth: usize) -> Result<ParityVerdict> {
    sys.check_thread(t)?;
    let depth = clamp_depth(sys, depth);
    let window = DEFAULT_WINDOW;
    if depth + 1 >= window {
        // Candidate neighborhoods leave at least `window` levels to probe.
        for n in 0..=(depth + 1 - window) {
            let mut even_ok = true;
            let mut odd_ok = true;
            for m in n..=depth {
                let fibre = fibre_at(sys, t, n, m)?;
                let g = sys.level(m)?;
                even_ok = even_ok && reduction_holds(g, &fibre, &t.vertices[m], false)?;
                odd_ok = odd_ok && reduction_holds(g, &fibre, &t.vertices[m], true)?;
                if !even_ok && !odd_ok {
                    break;
                }
            }
            if even_ok {
                return Ok(ParityVerdict::EvenCertified { level: n });
            }
            if odd_ok {
                return Ok(ParityVerdict::OddCertified { level: n });
            }
        }
    }
    // Look for two cylinder neighborhoods of opposite cut parity, deepest
    // first so they sit inside every candidate fibre neighborhood.
    let mut deepest_even = None;
    let mut deepest_odd = None;
    for m in (0..=depth).rev() {
        let cyl = CylinderSet {
            level: m,
            cells: BTreeSet::from([t.vertices[m].clone()]),
        };
        let cut = sys.cylinder_cut(&cyl)?;
        if cut.is_even() {
            deepest_even.get_or_insert(cyl);
        } else {
            deepest_odd.get_or_insert(cyl);
        }
        if deepest_even.is_some() && deepest_odd.is_some() {
            break;
        }
    }
    match (deepest_even, deepest_odd) {
        (Some(e), Some(o)) => Ok(ParityVerdict::NeitherCertified { witnesses: [e, o] }),
        _ => Ok(ParityVerdict::Undetermined { depth }),
    }
}

/// The stabilized arc number D(A_k) for the level-k fibre neighborhood:
/// the minimum over probed levels m >= k of the max number of edge-disjoint
/// trails from outside the neighborhood to the thread's class. Levels where
/// the neighborhood is everything are skipped.
fn arc_number(
    sys: &InverseSystem,
    t: &VertexThread,
    k: usize,
    depth: usize,
) -> Result<Option<usize>> {
    let mut best: Option<usize> = None;
    for m in k..=depth {
        let fibre = fibre_at(sys, t, k, m)?;
        let g = sys.level(m)?;
        let complement: BTreeSet<VertexId> = g
            .vertices()
            .filter(|v| !fibre.contains(v))
            .cloned()
            .collect();
        if complement.is_empty() {
            continue;
        }
        let target = BTreeSet::from([t.vertices[m].clone()]);
        let (flow, _) = g.max_edge_disjoint_paths(&complement, &target)?;
        best = Some(best.map_or(flow, |b| b.min(flow)));
    }
    Ok(best)
}

pub fn strong_degree(
    sys: &InverseSystem,
    t: &VertexThread,
    depth: usize,
) -> Result<StrongDegreeVerdict> {
    sys.check_thread(t)?;
    let depth = clamp_depth(sys, depth);
    let window = DEFAULT_WINDOW;
    if depth + 1 < window {
        return Ok(StrongDegreeVerdict::Undetermined { depth });
    }
    // Mature candidates leave at least `window` levels above them; the
    // verdict reads the last `window` of those.
    let last_mature = depth + 1 - window;
    let lo = last_mature.saturating_sub(window - 1);
    let mut values = Vec::new();
    for k in lo..=last_mature {
        match arc_number(sys, t, k, depth)? {
            Some(v) => values.push(v),
            None => return Ok(StrongDegreeVerdict::Undetermined { depth }),
        }
    }
    let s = values[0];
    if values.iter().all(|&v| v == s) {
        if s % 2 == 0 {
            Ok(StrongDegreeVerdict::StronglyEven { value: s })
        } else {
            Ok(StrongDegreeVerdict::StronglyOdd { value: s })
        }
    } else {
        Ok(StrongDegreeVerdict::Unstable { depth })
    }
}

pub fn weak_degree(
    sys: &InverseSystem,
    t: &VertexThread,
    depth: usize,
) -> Result<WeakDegreeVerdict> {
    Ok(match strong_degree(sys, t, depth)? {
        StrongDegreeVerdict::StronglyEven { .. } => WeakDegreeVerdict::WeaklyEven,
        StrongDegreeVerdict::StronglyOdd { .. } => WeakDegreeVerdict::WeaklyOdd,
        StrongDegreeVerdict::Unstable { .. } => WeakDegreeVerdict::Both,
        StrongDegreeVerdict::Undetermined { .. } => WeakDegreeVerdict::Undetermined,
    })
}

/// Brute-force check over every subset C of the fibre F with v ∈ C: is
/// |∂C| always even, always odd, or mixed?
pub fn parity_oracle(
    g: &MultiGraph,
    fibre: &BTreeSet<VertexId>,
    v: &VertexId,
    bound: usize,
) -> Result<OracleVerdict> {
    if fibre.len() > bound {
        return Err(Error::TooLarge(format!(
            "fibre has {} vertices, oracle bound is {bound}",
            fibre.len()
        )));
    }
    if !fibre.contains(v) {
        return Err(Error::InvalidInput(format!("{v} is not in the fibre")));
    }
    for u in fibre {
        if !g.contains_vertex(u) {
            return Err(Error::NotFound(format!("vertex {u}")));
        }
    }
    let others: Vec<&VertexId> = fibre.iter().filter(|u| *u != v).collect();
    let mut saw_even = false;
    let mut saw_odd = false;
    for mask in 0..(1u64 << others.len()) {
        let mut c = BTreeSet::from([v.clone()]);
        for (i, u) in others.iter().enumerate() {
            if mask & (1 << i) != 0 {
                c.insert((*u).clone());
            }
        }
        if g.cut(&c)?.is_even() {
            saw_even = true;
        } else {
            saw_odd = true;
        }
        if saw_even && saw_odd {
            return Ok(OracleVerdict::Mixed);
        }
    }
    Ok(if saw_even {
        OracleVerdict::AllEven
    } else {
        OracleVerdict::AllOdd
    })
}
