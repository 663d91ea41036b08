//! Edge-disjoint Menger across an inverse system: the max number of
//! edge-disjoint connections between two cylinder sets, probed per level.
//! Refinement can only cut connections, so the per-level flow values are
//! nonincreasing with depth and their minimum is the reported k.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{Trail, VertexId};
use crate::prosys::{CylinderSet, EdgeImage, InverseSystem};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MengerWitness {
    /// Minimum over the probed levels of the max-flow between the fibres.
    pub k: usize,
    /// Shallowest level achieving the minimum.
    pub achieved_at: usize,
    /// Per-level flow values (index = level offset from `start_level`).
    pub per_level: Vec<usize>,
    /// First probed level (the finer of the two cylinder levels).
    pub start_level: usize,
    /// k edge-disjoint fibre-to-fibre trails per probed level, k per tuple.
    pub tuples: Vec<Vec<Trail>>,
}

/// Max-flow between the fibres of two disjoint cylinder sets at every level
/// from the finer cylinder down to `depth`, with a per-level packing of k
/// edge-disjoint connecting trails (the per-level tuple is truncated to the
/// global minimum k so the tuples line up).
pub fn menger(
    sys: &InverseSystem,
    a: &CylinderSet,
    b: &CylinderSet,
    depth: usize,
) -> Result<MengerWitness> {
    let depth = depth.min(sys.depth());
    let start = a.level.max(b.level);
    if start > depth {
        return Err(Error::InvalidInput(format!(
            "cylinders live at level {start}, deeper than the probe depth {depth}"
        )));
    }
    let fa0 = sys.fiber(start, a)?;
    let fb0 = sys.fiber(start, b)?;
    if !fa0.is_disjoint(&fb0) {
        return Err(Error::InvalidSeparation(
            "cylinders overlap at their common refinement".into(),
        ));
    }
    let mut per_level = Vec::new();
    let mut packs: Vec<Vec<Trail>> = Vec::new();
    for m in start..=depth {
        let fa = sys.fiber(m, a)?;
        let fb = sys.fiber(m, b)?;
        let (flow, trails) = sys.level(m)?.max_edge_disjoint_paths(&fa, &fb)?;
        if let Some(prev) = per_level.last() {
            debug_assert!(flow <= *prev, "flow grew under refinement");
        }
        per_level.push(flow);
        packs.push(trails);
    }
    let k = per_level.iter().copied().min().unwrap_or(0);
    let achieved_at = start + per_level.iter().position(|&f| f == k).unwrap_or(0);
    let tuples = packs
        .into_iter()
        .map(|mut t| {
            t.truncate(k);
            t
        })
        .collect();
    Ok(MengerWitness {
        k,
        achieved_at,
        per_level,
        start_level: start,
        tuples,
    })
}

impl MengerWitness {
    /// Checks the witness against the system it came from: each tuple is a
    /// pack of k pairwise edge-disjoint trails from the A-fibre to the
    /// B-fibre of its level, and each deeper trail projects to a connected
    /// A-B connection one level down.
    pub fn verify(&self, sys: &InverseSystem, a: &CylinderSet, b: &CylinderSet) -> Result<()> {
        for (i, tuple) in self.tuples.iter().enumerate() {
            let m = self.start_level + i;
            let g = sys.level(m)?;
            let fa = sys.fiber(m, a)?;
            let fb = sys.fiber(m, b)?;
            let mut used: BTreeSet<_> = BTreeSet::new();
            if tuple.len() != self.k {
                return Err(Error::InvalidInput(format!(
                    "tuple at level {m} has {} trails, expected {}",
                    tuple.len(),
                    self.k
                )));
            }
            for trail in tuple {
                if !fa.contains(&trail.start) || !fb.contains(trail.end()) {
                    return Err(Error::InvalidInput(format!(
                        "trail at level {m} does not join the fibres"
                    )));
                }
                let mut at = trail.start.clone();
                for (e, v) in &trail.steps {
                    let (x, y) = g
                        .ends(e)
                        .ok_or_else(|| Error::NotFound(format!("edge {e} at level {m}")))?;
                    let ok = (x == &at && y == v) || (y == &at && x == v);
                    if !ok {
                        return Err(Error::InvalidInput(format!(
                            "trail step {e} does not continue the walk at level {m}"
                        )));
                    }
                    if !used.insert(e.clone()) {
                        return Err(Error::InvalidInput(format!(
                            "edge {e} reused within the level-{m} tuple"
                        )));
                    }
                    at = v.clone();
                }
            }
        }
        // Projection: the edges of each deeper trail map to a connected
        // subgraph meeting both fibres one level down.
        for i in 1..self.tuples.len() {
            let m = self.start_level + i;
            let bond = sys.bond(m - 1)?;
            let lower = sys.level(m - 1)?;
            let fa = sys.fiber(m - 1, a)?;
            let fb = sys.fiber(m - 1, b)?;
            for trail in &self.tuples[i] {
                let mut vertices: BTreeSet<VertexId> = BTreeSet::new();
                let start = bond
                    .vertex_image(&trail.start)
                    .ok_or_else(|| Error::InvalidInput(format!("unmapped {}", trail.start)))?;
                vertices.insert(start.clone());
                for (e, v) in &trail.steps {
                    match bond.edge_map.get(e) {
                        Some(EdgeImage::Edge(f)) => {
                            if !lower.contains_edge(f) {
                                return Err(Error::InvalidInput(format!(
                                    "projected edge {f} missing at level {}",
                                    m - 1
                                )));
                            }
                        }
                        Some(EdgeImage::Vertex { .. }) => {}
                        None => return Err(Error::InvalidInput(format!("edge {e} unmapped"))),
                    }
                    let img = bond
                        .vertex_image(v)
                        .ok_or_else(|| Error::InvalidInput(format!("unmapped {v}")))?;
                    vertices.insert(img.clone());
                }
                if !vertices.iter().any(|v| fa.contains(v))
                    || !vertices.iter().any(|v| fb.contains(v))
                {
                    return Err(Error::InvalidInput(format!(
                        "projection of a level-{m} trail misses a fibre below"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorKind, GeneratorSpec};
    use crate::multigraph::VertexId;
    use std::collections::BTreeSet;

    fn v(s: &str) -> VertexId {
        VertexId::new(s)
    }

    fn cyl(level: usize, names: &[&str]) -> CylinderSet {
        CylinderSet {
            level,
            cells: names.iter().map(|s| v(s)).collect(),
        }
    }

    #[test]
    fn ladder_ends_are_three_connected() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::Ladder, 5)).unwrap();
        let a = cyl(0, &["endL"]);
        let b = cyl(0, &["endR"]);
        let w = menger(&sys, &a, &b, 5).unwrap();
        assert_eq!(w.k, 3);
        assert!(w.per_level.iter().all(|&f| f == 3));
        w.verify(&sys, &a, &b).unwrap();
    }

    #[test]
    fn cbc_extreme_classes_are_two_connected() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::Cbc, 4)).unwrap();
        let a = cyl(1, &["cL"]);
        let b = cyl(1, &["cR"]);
        let w = menger(&sys, &a, &b, 4).unwrap();
        assert_eq!(w.k, 2);
        w.verify(&sys, &a, &b).unwrap();
    }

    #[test]
    fn single_bridge_gives_k_one() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::Cbs, 4)).unwrap();
        let a = cyl(1, &["cL"]);
        let b = cyl(1, &["cR"]);
        let w = menger(&sys, &a, &b, 4).unwrap();
        assert_eq!(w.k, 1);
        // The single connection is the persistent root semicircle.
        for tuple in &w.tuples {
            assert!(tuple[0]
                .edge_ids()
                .contains(&crate::multigraph::EdgeId::new("a")));
        }
        w.verify(&sys, &a, &b).unwrap();
    }

    #[test]
    fn overlapping_cylinders_are_rejected() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::Cbs, 3)).unwrap();
        let a = cyl(1, &["cL"]);
        let b = cyl(2, &["cLR", "cRL"]);
        assert!(matches!(
            menger(&sys, &a, &b, 3),
            Err(Error::InvalidSeparation(_))
        ));
    }

    #[test]
    fn flow_values_never_grow_with_depth() {
        for kind in [
            GeneratorKind::Cbs,
            GeneratorKind::Cbc,
            GeneratorKind::XlDyadic,
        ] {
            let sys = generate(&GeneratorSpec::new(kind.clone(), 4)).unwrap();
            let g1 = sys.level(1).unwrap();
            let names: Vec<VertexId> = g1.vertices().cloned().collect();
            let a = CylinderSet {
                level: 1,
                cells: BTreeSet::from([names[0].clone()]),
            };
            let b = CylinderSet {
                level: 1,
                cells: BTreeSet::from([names[1].clone()]),
            };
            let w = menger(&sys, &a, &b, 4).unwrap();
            assert!(
                w.per_level.windows(2).all(|x| x[1] <= x[0]),
                "{kind:?}: {:?}",
                w.per_level
            );
            w.verify(&sys, &a, &b).unwrap();
        }
    }

    /// Per-level flow equals the brute-force minimum cut over all vertex
    /// subsets that contain the A-fibre and avoid the B-fibre.
    #[test]
    fn flow_matches_brute_force_min_cut() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::XlDyadic, 3)).unwrap();
        let a = cyl(1, &["gL"]);
        let b = cyl(1, &["gR"]);
        let w = menger(&sys, &a, &b, 3).unwrap();
        for (i, &flow) in w.per_level.iter().enumerate() {
            let m = w.start_level + i;
            let g = sys.level(m).unwrap();
            let fa = sys.fiber(m, &a).unwrap();
            let fb = sys.fiber(m, &b).unwrap();
            let free: Vec<VertexId> = g
                .vertices()
                .filter(|x| !fa.contains(x) && !fb.contains(x))
                .cloned()
                .collect();
            assert!(free.len() <= 12, "brute force bound");
            let mut best = usize::MAX;
            for mask in 0u32..(1 << free.len()) {
                let mut s = fa.clone();
                for (j, x) in free.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        s.insert(x.clone());
                    }
                }
                best = best.min(g.cut(&s).unwrap().size());
            }
            assert_eq!(flow, best, "level {m}");
        }
    }
}
