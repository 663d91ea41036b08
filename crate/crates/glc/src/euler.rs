//! Eulerian decision and synthesis over inverse systems: closed/open
//! certification from per-level degree parities, compatible circuit chains
//! (deepest-first, projected down), constrained lifting one level up,
//! bounded per-level circuit counting, and the stabilize-or-grow probe.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::add_edge;
use crate::multigraph::{Circuit, EdgeId, MultiGraph, Trail, VertexId};
use crate::prosys::{
    project_circuit, BondingMap, CircuitChain, CylinderSet, EdgeImage, InverseSystem, VertexThread,
};

/// Outcome of closed or open Eulerian certification. Every verdict is about
/// the observed finite depth only; nothing is claimed about deeper levels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EulerVerdict {
    ClosedEulerianCertified {
        depth: usize,
    },
    OpenEulerianCertified {
        depth: usize,
        /// The two odd vertex threads (sorted by their deepest class).
        ends: [VertexThread; 2],
    },
    NotEulerian {
        /// A single odd class as a cylinder set, when one exists.
        witness: Option<CylinderSet>,
        reason: String,
    },
    Undetermined {
        depth: usize,
    },
}

impl EulerVerdict {
    pub fn is_certified(&self) -> bool {
        matches!(
            self,
            EulerVerdict::ClosedEulerianCertified { .. }
                | EulerVerdict::OpenEulerianCertified { .. }
        )
    }
}

fn require_valid(sys: &InverseSystem) -> Result<()> {
    let report = sys.validate();
    if !report.is_valid() {
        return Err(Error::InvalidSystem(
            report.first_violation().unwrap_or_else(|| "invalid".into()),
        ));
    }
    Ok(())
}

/// Closed certification: every class at every level must have even degree.
/// The first odd class found becomes the witness cylinder (its cut in the
/// level graph is odd, since loops drop out of both in pairs).
pub fn is_closed_eulerian(sys: &InverseSystem) -> Result<EulerVerdict> {
    require_valid(sys)?;
    for (n, odd) in sys.level_degree_report().into_iter().enumerate() {
        if let Some(v) = odd.first() {
            return Ok(EulerVerdict::NotEulerian {
                witness: Some(CylinderSet {
                    level: n,
                    cells: BTreeSet::from([v.clone()]),
                }),
                reason: format!("class {v} at level {n} has odd degree"),
            });
        }
    }
    Ok(EulerVerdict::ClosedEulerianCertified { depth: sys.depth() })
}

/// A compatible chain of Euler circuits: one deterministic circuit at the
/// deepest level, projected down bond by bond. Absent iff the system is not
/// closed-Eulerian certified.
pub fn euler_chain(sys: &InverseSystem) -> Result<Option<CircuitChain>> {
    if !is_closed_eulerian(sys)?.is_certified() {
        return Ok(None);
    }
    let root = sys.canonical_thread()?;
    let deep = sys
        .deepest()
        .euler_circuit(&root.vertices[sys.depth()])?
        .ok_or_else(|| {
            Error::ConstructionInvariantViolated(
                "all-even connected level has no Euler circuit".into(),
            )
        })?;
    let mut circuits = vec![deep];
    for n in (0..sys.depth()).rev() {
        let down = project_circuit(&sys.bonds[n], circuits.last().unwrap())?;
        circuits.push(down);
    }
    circuits.reverse();
    let chain = CircuitChain { circuits };
    chain.verify(sys)?;
    Ok(Some(chain))
}

/// Lifts an Euler circuit of level n to one of level n+1 that projects back
/// onto it, if any exists. The search walks level n+1 and consumes the given
/// persistent-edge sequence in order; contracted edges may be interleaved
/// freely. Deterministic: roots in id order, edges in id order.
pub fn lift_circuit(sys: &InverseSystem, n: usize, c: &Circuit) -> Result<Option<Circuit>> {
    if n >= sys.depth() {
        return Err(Error::NotFound(format!("bond {n}")));
    }
    if !c.is_euler_in(sys.level(n)?) {
        return Err(Error::InvalidInput(format!(
            "circuit is not an Euler circuit of level {n}"
        )));
    }
    let upper = sys.level(n + 1)?;
    let bond = sys.bond(n)?;
    let total = upper.edge_count();

    struct Search<'a> {
        upper: &'a MultiGraph,
        bond: &'a BondingMap,
        want: &'a [(EdgeId, VertexId)],
        total: usize,
    }
    impl Search<'_> {
        fn dfs(
            &self,
            at: &VertexId,
            root: &VertexId,
            idx: usize,
            used: &mut BTreeSet<EdgeId>,
            seq: &mut Vec<(EdgeId, VertexId)>,
        ) -> bool {
            if used.len() == self.total {
                return at == root && idx == self.want.len();
            }
            for (e, w) in self.upper.incident_edges(at) {
                if used.contains(&e) {
                    continue;
                }
                let next_idx = match self.bond.edge_map.get(&e) {
                    Some(EdgeImage::Edge(f)) => {
                        if idx >= self.want.len() || &self.want[idx].0 != f {
                            continue;
                        }
                        idx + 1
                    }
                    _ => idx,
                };
                used.insert(e.clone());
                seq.push((e.clone(), w.clone()));
                if self.dfs(&w, root, next_idx, used, seq) {
                    return true;
                }
                seq.pop();
                used.remove(&e);
            }
            false
        }
    }

    let search = Search {
        upper,
        bond,
        want: &c.steps,
        total,
    };
    for r in bond.vertex_fiber(&c.root) {
        if total == 0 {
            if c.steps.is_empty() {
                return Ok(Some(Circuit::empty(r)));
            }
            continue;
        }
        let mut used = BTreeSet::new();
        let mut seq = Vec::new();
        if search.dfs(&r, &r, 0, &mut used, &mut seq) {
            let lifted = Circuit {
                root: r,
                steps: seq,
            };
            debug_assert!(lifted.is_euler_in(upper));
            debug_assert_eq!(&project_circuit(bond, &lifted)?, c);
            return Ok(Some(lifted));
        }
    }
    Ok(None)
}

/// How the projection acts on the enumerated circuit sets of two adjacent
/// levels. Unknown (`None`) when either enumeration hit the cap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InducedMapReport {
    pub bond: usize,
    pub surjective: Option<bool>,
    pub injective: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerCounts {
    /// Rooted oriented Euler circuit count per level (root: canonical thread).
    pub counts: Vec<usize>,
    pub truncated: Vec<bool>,
    pub maps: Vec<InducedMapReport>,
}

/// Counts rooted oriented Euler circuits at every level, rooted along the
/// canonical thread, and reports whether each projection between the
/// enumerated sets is onto / one-to-one.
pub fn count_euler(sys: &InverseSystem, cap: usize) -> Result<EulerCounts> {
    if !is_closed_eulerian(sys)?.is_certified() {
        return Err(Error::PreconditionViolated(
            "count_euler needs a closed-Eulerian certified system".into(),
        ));
    }
    let root = sys.canonical_thread()?;
    let mut counts = Vec::new();
    let mut truncated = Vec::new();
    for (n, g) in sys.levels.iter().enumerate() {
        let (c, t) = g.count_euler_circuits(&root.vertices[n], cap)?;
        counts.push(c);
        truncated.push(t);
    }
    // The onto/one-to-one analysis needs the circuits themselves; it is
    // only attempted where both levels are small enough to materialize.
    const MATERIALIZE_LIMIT: usize = 20_000;
    let mut per_level = Vec::new();
    for (n, g) in sys.levels.iter().enumerate() {
        if !truncated[n] && counts[n] <= MATERIALIZE_LIMIT {
            per_level.push(Some(g.enumerate_euler_circuits(&root.vertices[n], cap)?));
        } else {
            per_level.push(None);
        }
    }
    let mut maps = Vec::new();
    for n in 0..sys.depth() {
        let (lo, hi) = match (&per_level[n], &per_level[n + 1]) {
            (Some(lo), Some(hi)) => (lo, hi),
            _ => {
                maps.push(InducedMapReport {
                    bond: n,
                    surjective: None,
                    injective: None,
                });
                continue;
            }
        };
        let mut images = Vec::new();
        for c in &hi.circuits {
            images.push(project_circuit(&sys.bonds[n], c)?);
        }
        let image_set: BTreeSet<&Circuit> = images.iter().collect();
        let surjective = lo.circuits.iter().all(|c| image_set.contains(c));
        let injective = image_set.len() == images.len();
        maps.push(InducedMapReport {
            bond: n,
            surjective: Some(surjective),
            injective: Some(injective),
        });
    }
    Ok(EulerCounts {
        counts,
        truncated,
        maps,
    })
}

/// Evidence-level outcome of the stabilize-or-grow question. A finite
/// truncation can never settle it; the verdict reports what the observed
/// levels support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DichotomyVerdict {
    /// All bonds from this level up are isomorphisms: the system observed so
    /// far literally is its level-k graph.
    StabilizedGraph(usize),
    /// The circuit count strictly increased across every non-isomorphism
    /// bond (and at least one such bond was seen).
    GrowingEvidence,
    Inconclusive,
}

fn bond_is_isomorphism(bond: &BondingMap, lower: &MultiGraph, upper: &MultiGraph) -> bool {
    upper.vertex_count() == lower.vertex_count()
        && bond
            .edge_map
            .values()
            .all(|img| matches!(img, EdgeImage::Edge(_)))
}

pub fn dichotomy_probe(sys: &InverseSystem, cap: usize) -> Result<DichotomyVerdict> {
    if !is_closed_eulerian(sys)?.is_certified() {
        return Err(Error::PreconditionViolated(
            "dichotomy_probe needs a closed-Eulerian certified system".into(),
        ));
    }
    let iso: Vec<bool> = (0..sys.depth())
        .map(|n| bond_is_isomorphism(&sys.bonds[n], &sys.levels[n], &sys.levels[n + 1]))
        .collect();
    // Least k with every bond from k on an isomorphism; k = depth means the
    // deepest observed bond still changes the graph.
    let k = iso.iter().rposition(|&b| !b).map(|i| i + 1).unwrap_or(0);
    if k < sys.depth() || (k == 0 && sys.depth() > 0) {
        return Ok(DichotomyVerdict::StabilizedGraph(k));
    }
    let counts = count_euler(sys, cap)?;
    // A truncated count is a lower bound (at least `cap` circuits exist), so
    // growth across a bond is still certifiable when only the deeper side
    // overflowed the cap.
    let mut saw_growth_bond = false;
    for (n, &bond_is_iso) in iso.iter().enumerate() {
        if bond_is_iso {
            continue;
        }
        saw_growth_bond = true;
        let grew = !counts.truncated[n]
            && (counts.truncated[n + 1] || counts.counts[n + 1] > counts.counts[n]);
        if !grew {
            return Ok(DichotomyVerdict::Inconclusive);
        }
    }
    if saw_growth_bond {
        Ok(DichotomyVerdict::GrowingEvidence)
    } else {
        Ok(DichotomyVerdict::Inconclusive)
    }
}

/// Open certification: every level must have exactly two odd classes, they
/// must line up into two vertex threads, and joining those threads by one
/// fresh edge must produce a closed-certified system.
pub fn is_open_eulerian(sys: &InverseSystem) -> Result<EulerVerdict> {
    require_valid(sys)?;
    let report = sys.level_degree_report();
    for (n, odd) in report.iter().enumerate() {
        if odd.len() != 2 {
            return Ok(EulerVerdict::NotEulerian {
                witness: odd.first().map(|v| CylinderSet {
                    level: n,
                    cells: BTreeSet::from([v.clone()]),
                }),
                reason: format!(
                    "level {n} has {} odd classes; exactly two are required",
                    odd.len()
                ),
            });
        }
    }
    // Build the two threads from the deepest pair down.
    let d = sys.depth();
    let (mut a, mut b) = (report[d][0].clone(), report[d][1].clone());
    let mut ta = vec![a.clone()];
    let mut tb = vec![b.clone()];
    for n in (0..d).rev() {
        let ia = sys.bonds[n].vertex_image(&a).cloned();
        let ib = sys.bonds[n].vertex_image(&b).cloned();
        let (ia, ib) = match (ia, ib) {
            (Some(x), Some(y)) => (x, y),
            _ => {
                return Err(Error::InvalidSystem(format!(
                    "unmapped odd class above level {n}"
                )))
            }
        };
        let expected: BTreeSet<&VertexId> = report[n].iter().collect();
        if ia == ib || !expected.contains(&ia) || !expected.contains(&ib) {
            return Ok(EulerVerdict::NotEulerian {
                witness: Some(CylinderSet {
                    level: n + 1,
                    cells: BTreeSet::from([a.clone(), b.clone()]),
                }),
                reason: format!(
                    "odd classes at level {n} are not the images of the odd classes at level {}",
                    n + 1
                ),
            });
        }
        ta.push(ia.clone());
        tb.push(ib.clone());
        a = ia;
        b = ib;
    }
    ta.reverse();
    tb.reverse();
    let (ta, tb) = (VertexThread { vertices: ta }, VertexThread { vertices: tb });
    let augmented = add_edge(sys, &ta, &tb)?;
    match is_closed_eulerian(&augmented)? {
        EulerVerdict::ClosedEulerianCertified { .. } => Ok(EulerVerdict::OpenEulerianCertified {
            depth: d,
            ends: [ta, tb],
        }),
        EulerVerdict::NotEulerian { witness, reason } => {
            Ok(EulerVerdict::NotEulerian { witness, reason })
        }
        other => Ok(other),
    }
}

/// A circuit chain through the one-edge augmentation of an open-certified
/// system; cutting each member at the marker edge yields the per-level
/// open trail between the two odd threads.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenChain {
    pub chain: CircuitChain,
    pub marker: EdgeId,
    pub augmented: InverseSystem,
}

impl OpenChain {
    /// The open trail at one level: the circuit rotated to start right after
    /// the marker edge, with the marker removed.
    pub fn open_trail(&self, level: usize) -> Result<Trail> {
        let c = self
            .chain
            .circuits
            .get(level)
            .ok_or_else(|| Error::NotFound(format!("level {level}")))?;
        let pos = c
            .steps
            .iter()
            .position(|(e, _)| e == &self.marker)
            .ok_or_else(|| Error::NotFound(format!("marker {} in circuit", self.marker)))?;
        let start = c.steps[pos].1.clone();
        let mut steps: Vec<_> = c.steps[pos + 1..].to_vec();
        steps.extend_from_slice(&c.steps[..pos]);
        Ok(Trail { start, steps })
    }
}

pub fn open_euler_chain(sys: &InverseSystem) -> Result<Option<OpenChain>> {
    let verdict = is_open_eulerian(sys)?;
    let ends = match verdict {
        EulerVerdict::OpenEulerianCertified { ends, .. } => ends,
        _ => return Ok(None),
    };
    let augmented = add_edge(sys, &ends[0], &ends[1])?;
    let marker = augmented
        .deepest()
        .edge_ids()
        .find(|e| !sys.deepest().contains_edge(e))
        .cloned()
        .ok_or_else(|| Error::ConstructionInvariantViolated("no auxiliary edge".into()))?;
    let chain = euler_chain(&augmented)?.ok_or_else(|| {
        Error::ConstructionInvariantViolated("augmented system lost certification".into())
    })?;
    Ok(Some(OpenChain {
        chain,
        marker,
        augmented,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, BaseGraph, GeneratorKind, GeneratorSpec};
    use crate::multigraph::graph_from;
    use crate::prosys::EdgeImage;
    use std::collections::BTreeMap;

    fn sysgen(kind: GeneratorKind, depth: usize) -> InverseSystem {
        generate(&GeneratorSpec::new(kind, depth)).unwrap()
    }

    fn v(s: &str) -> VertexId {
        VertexId::new(s)
    }

    #[test]
    fn closed_verdicts_on_the_examples() {
        assert_eq!(
            is_closed_eulerian(&sysgen(GeneratorKind::Cbc, 5)).unwrap(),
            EulerVerdict::ClosedEulerianCertified { depth: 5 }
        );
        match is_closed_eulerian(&sysgen(GeneratorKind::Cbs, 5)).unwrap() {
            EulerVerdict::NotEulerian {
                witness: Some(cyl), ..
            } => {
                assert_eq!(cyl.level, 1);
                assert_eq!(cyl.cells, BTreeSet::from([v("cL")]));
                let sys = sysgen(GeneratorKind::Cbs, 5);
                assert_eq!(sys.cylinder_cut(&cyl).unwrap().size(), 1);
            }
            other => panic!("expected odd witness, got {other:?}"),
        }
        assert!(matches!(
            is_closed_eulerian(&sysgen(GeneratorKind::Ladder, 5)).unwrap(),
            EulerVerdict::NotEulerian { .. }
        ));
    }

    #[test]
    fn euler_chain_constant_triangle_is_constant() {
        let sys = sysgen(GeneratorKind::Constant(BaseGraph::Triangle), 3);
        let chain = euler_chain(&sys).unwrap().unwrap();
        assert!(chain.circuits.windows(2).all(|w| w[0] == w[1]));
        chain.verify(&sys).unwrap();
    }

    #[test]
    fn euler_chain_cbc_and_absent_for_cbs() {
        let sys = sysgen(GeneratorKind::Cbc, 4);
        let chain = euler_chain(&sys).unwrap().unwrap();
        chain.verify(&sys).unwrap();
        // The level-1 member must be one of the two rooted parallel-pair circuits.
        let lvl1 = &sys.levels[1];
        let all = lvl1
            .enumerate_euler_circuits(&chain.circuits[1].root, 10)
            .unwrap();
        assert_eq!(all.circuits.len(), 2);
        assert!(all.circuits.contains(&chain.circuits[1]));
        assert!(euler_chain(&sysgen(GeneratorKind::Cbs, 4))
            .unwrap()
            .is_none());
    }

    #[test]
    fn lift_over_identity_bond_is_identity() {
        let sys = sysgen(GeneratorKind::Constant(BaseGraph::Triangle), 2);
        let c = sys.levels[0].euler_circuit(&v("a")).unwrap().unwrap();
        assert_eq!(lift_circuit(&sys, 0, &c).unwrap().unwrap(), c);
        let bad = Circuit::empty(v("a"));
        assert!(matches!(
            lift_circuit(&sys, 0, &bad),
            Err(Error::InvalidInput(_))
        ));
    }

    /// Two parallel classes of three edges over a two-vertex lower level,
    /// joined by a single contracted connector: circuits that need more side
    /// switches than the connector affords cannot lift.
    fn side_switch_system() -> InverseSystem {
        let lower = graph_from(&[
            ("e1", "u", "w"),
            ("e2", "u", "w"),
            ("e3", "u", "w"),
            ("e4", "u", "w"),
            ("e5", "u", "w"),
            ("e6", "u", "w"),
        ]);
        let upper = graph_from(&[
            ("e1", "u1", "w"),
            ("e3", "u1", "w"),
            ("e5", "u1", "w"),
            ("e2", "u2", "w"),
            ("e4", "u2", "w"),
            ("e6", "u2", "w"),
            ("f", "u1", "u2"),
        ]);
        let mut vertex_map = BTreeMap::new();
        for (a, b) in [("u1", "u"), ("u2", "u"), ("w", "w")] {
            vertex_map.insert(v(a), v(b));
        }
        let mut edge_map = BTreeMap::new();
        for e in ["e1", "e2", "e3", "e4", "e5", "e6"] {
            edge_map.insert(EdgeId::new(e), EdgeImage::Edge(EdgeId::new(e)));
        }
        edge_map.insert(EdgeId::new("f"), EdgeImage::Vertex { vertex: v("u") });
        let sys = InverseSystem {
            levels: vec![lower, upper],
            bonds: vec![BondingMap {
                vertex_map,
                edge_map,
            }],
        };
        assert!(sys.validate().is_valid());
        sys
    }

    #[test]
    fn lift_matches_enumeration_filter_oracle() {
        let sys = side_switch_system();
        let lower_circuits = sys.levels[0]
            .enumerate_euler_circuits(&v("u"), 10_000)
            .unwrap();
        assert!(!lower_circuits.truncated);
        // Oracle: every upper Euler circuit from every fiber root, projected.
        let mut liftable = BTreeSet::new();
        for r in ["u1", "u2"] {
            for c in sys.levels[1]
                .enumerate_euler_circuits(&v(r), 100_000)
                .unwrap()
                .circuits
            {
                liftable.insert(project_circuit(&sys.bonds[0], &c).unwrap());
            }
        }
        let mut some = 0;
        let mut none = 0;
        for c in &lower_circuits.circuits {
            match lift_circuit(&sys, 0, c).unwrap() {
                Some(up) => {
                    some += 1;
                    assert!(up.is_euler_in(&sys.levels[1]));
                    assert_eq!(&project_circuit(&sys.bonds[0], &up).unwrap(), c);
                    assert!(liftable.contains(c));
                }
                None => {
                    none += 1;
                    assert!(!liftable.contains(c), "oracle lifts {c:?}");
                }
            }
        }
        assert!(some > 0, "some circuits must lift");
        assert!(none > 0, "some circuits must fail to lift");
    }

    #[test]
    fn counts_on_constant_systems_match_brute_force() {
        let sys = sysgen(GeneratorKind::Constant(BaseGraph::Triangle), 3);
        let counts = count_euler(&sys, 1000).unwrap();
        assert_eq!(counts.counts, vec![2; 4]);
        assert!(counts.truncated.iter().all(|&t| !t));
        for m in &counts.maps {
            assert_eq!(m.surjective, Some(true));
            assert_eq!(m.injective, Some(true));
        }
        let sys = sysgen(GeneratorKind::Constant(BaseGraph::Parallel), 2);
        assert_eq!(count_euler(&sys, 1000).unwrap().counts, vec![2; 3]);
    }

    #[test]
    fn counts_grow_for_cbc_and_projection_is_onto() {
        let sys = sysgen(GeneratorKind::Cbc, 3);
        let counts = count_euler(&sys, 1_000_000).unwrap();
        assert!(counts.truncated.iter().all(|&t| !t));
        assert!(
            counts.counts.windows(2).all(|w| w[0] < w[1]),
            "counts {:?}",
            counts.counts
        );
        for m in &counts.maps {
            assert_eq!(m.surjective, Some(true), "bond {}", m.bond);
        }
        assert!(matches!(
            count_euler(&sysgen(GeneratorKind::Cbs, 3), 100),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn dichotomy_on_constant_cbc_and_late_split() {
        let sys = sysgen(GeneratorKind::Constant(BaseGraph::Triangle), 3);
        assert_eq!(
            dichotomy_probe(&sys, 1000).unwrap(),
            DichotomyVerdict::StabilizedGraph(0)
        );
        // Exact counts through level 3 (1, 2, 16, 1536); level 4 overflows
        // the cap, which still certifies strict growth across the last bond.
        let sys = sysgen(GeneratorKind::Cbc, 4);
        assert_eq!(
            dichotomy_probe(&sys, 2000).unwrap(),
            DichotomyVerdict::GrowingEvidence
        );
    }

    #[test]
    fn dichotomy_late_split_without_count_growth_is_inconclusive() {
        // Triangle for three levels, then one vertex split at the last bond.
        // The split turns the triangle into a 4-cycle: same circuit count
        // (two), so the probe cannot call it growing.
        let tri = crate::multigraph::triangle();
        let top = graph_from(&[
            ("e1", "a1", "b"),
            ("e2", "b", "c"),
            ("e3", "a2", "c"),
            ("f", "a1", "a2"),
        ]);
        let mut vertex_map = BTreeMap::new();
        for (x, y) in [("a1", "a"), ("a2", "a"), ("b", "b"), ("c", "c")] {
            vertex_map.insert(v(x), v(y));
        }
        let mut edge_map = BTreeMap::new();
        for e in ["e1", "e2", "e3"] {
            edge_map.insert(EdgeId::new(e), EdgeImage::Edge(EdgeId::new(e)));
        }
        edge_map.insert(EdgeId::new("f"), EdgeImage::Vertex { vertex: v("a") });
        let split_bond = BondingMap {
            vertex_map,
            edge_map,
        };
        let sys = InverseSystem {
            levels: vec![tri.clone(), tri.clone(), tri.clone(), top],
            bonds: vec![
                BondingMap::identity(&tri),
                BondingMap::identity(&tri),
                split_bond,
            ],
        };
        assert!(sys.validate().is_valid());
        assert_eq!(
            dichotomy_probe(&sys, 1000).unwrap(),
            DichotomyVerdict::Inconclusive
        );
    }

    #[test]
    fn open_verdicts_on_the_examples() {
        match is_open_eulerian(&sysgen(GeneratorKind::Ladder, 5)).unwrap() {
            EulerVerdict::OpenEulerianCertified { depth, ends } => {
                assert_eq!(depth, 5);
                assert!(ends[0].vertices.iter().all(|x| x == &v("endL")));
                assert!(ends[1].vertices.iter().all(|x| x == &v("endR")));
            }
            other => panic!("expected open certification, got {other:?}"),
        }
        assert!(matches!(
            is_open_eulerian(&sysgen(GeneratorKind::Cbs, 4)).unwrap(),
            EulerVerdict::NotEulerian { .. }
        ));
        assert!(matches!(
            is_open_eulerian(&sysgen(GeneratorKind::Cbc, 4)).unwrap(),
            EulerVerdict::NotEulerian { .. }
        ));
    }

    #[test]
    fn open_chain_on_the_ladder_cuts_to_end_to_end_trails() {
        let sys = sysgen(GeneratorKind::Ladder, 3);
        let open = open_euler_chain(&sys).unwrap().unwrap();
        open.chain.verify(&open.augmented).unwrap();
        for n in 0..=3 {
            let trail = open.open_trail(n).unwrap();
            let endpoints = BTreeSet::from([trail.start.clone(), trail.end().clone()]);
            assert_eq!(endpoints, BTreeSet::from([v("endL"), v("endR")]));
            assert_eq!(
                trail.edge_ids().len(),
                sys.levels[n].edge_count(),
                "trail covers level {n}"
            );
        }
    }

    #[test]
    fn open_chain_on_constant_path() {
        let sys = sysgen(GeneratorKind::Constant(BaseGraph::Path), 2);
        let open = open_euler_chain(&sys).unwrap().unwrap();
        let trail = open.open_trail(0).unwrap();
        assert_eq!(trail.steps.len(), 1);
        assert!(open_euler_chain(&sysgen(GeneratorKind::Cbs, 3))
            .unwrap()
            .is_none());
    }

    #[test]
    fn chain_exists_iff_closed_certified_across_generators() {
        for depth in 1..=4 {
            for kind in [
                GeneratorKind::Constant(BaseGraph::Triangle),
                GeneratorKind::Ladder,
                GeneratorKind::Cbs,
                GeneratorKind::Cbc,
                GeneratorKind::XlDyadic,
                GeneratorKind::Hawaiian,
            ] {
                let sys = sysgen(kind.clone(), depth);
                let certified = is_closed_eulerian(&sys).unwrap().is_certified();
                let chain = euler_chain(&sys).unwrap();
                assert_eq!(certified, chain.is_some(), "{kind:?} depth {depth}");
                if let Some(chain) = chain {
                    chain.verify(&sys).unwrap();
                }
            }
        }
    }
}
