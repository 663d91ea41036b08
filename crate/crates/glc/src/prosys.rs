//! Finite-depth inverse systems of multigraphs.
//!
//! A system is a chain G_0 <- G_1 <- ... <- G_d of connected multigraphs
//! with onto, simplicial, monotone bonding maps: vertices map to vertices,
//! edges map either to edges (bijectively onto the lower edge set, keeping
//! their global id) or collapse to a vertex, and every vertex fibre together
//! with its collapsed edges is connected. Points of the modelled space are
//! compatible vertex threads; clopen vertex sets are level-tagged cylinder
//! sets.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{Circuit, Cut, EdgeId, MultiGraph, VertexId};

/// Image of an upper-level edge under a bonding map: either the lower edge
/// it persists as, or the vertex it is contracted to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeImage {
    Edge(EdgeId),
    Vertex { vertex: VertexId },
}

/// A bonding map from level n+1 down to level n.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BondingMap {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeImage>,
}

impl BondingMap {
    pub fn identity(g: &MultiGraph) -> Self {
        BondingMap {
            vertex_map: g.vertices().map(|v| (v.clone(), v.clone())).collect(),
            edge_map: g
                .edge_ids()
                .map(|e| (e.clone(), EdgeImage::Edge(e.clone())))
                .collect(),
        }
    }

    pub fn vertex_image(&self, v: &VertexId) -> Option<&VertexId> {
        self.vertex_map.get(v)
    }

    /// Preimage of a lower vertex, sorted.
    pub fn vertex_fiber(&self, v: &VertexId) -> BTreeSet<VertexId> {
        self.vertex_map
            .iter()
            .filter(|(_, img)| *img == v)
            .map(|(u, _)| u.clone())
            .collect()
    }

    /// Upper edges contracted to the lower vertex `v`.
    pub fn contracted_edges_at(&self, v: &VertexId) -> BTreeSet<EdgeId> {
        self.edge_map
            .iter()
            .filter_map(|(e, img)| match img {
                EdgeImage::Vertex { vertex } if vertex == v => Some(e.clone()),
                _ => None,
            })
            .collect()
    }
}

/// A finite-depth inverse system. `bonds[n]` maps level n+1 to level n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseSystem {
    pub levels: Vec<MultiGraph>,
    pub bonds: Vec<BondingMap>,
}

/// A point of the modelled space: one vertex per level, compatible under
/// the bonds.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexThread {
    pub vertices: Vec<VertexId>,
}

/// A clopen vertex set: all threads passing through `cells` at `level`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderSet {
    pub level: usize,
    pub cells: BTreeSet<VertexId>,
}

/// A compatible sequence of circuits, one per level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitChain {
    pub circuits: Vec<Circuit>,
}

/// One named check of the validation report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub bond: usize,
    pub check: String,
    pub ok: bool,
    pub detail: String,
}

/// Validation is data, not an exception: the report lists every failed
/// check so a consumer can print all violations at once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub level_connected: Vec<bool>,
    pub loop_warnings: Vec<(usize, EdgeId)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.ok) && self.level_connected.iter().all(|&c| c)
    }

    pub fn first_violation(&self) -> Option<String> {
        if let Some(c) = self.checks.iter().find(|c| !c.ok) {
            return Some(format!("bond {}: {} — {}", c.bond, c.check, c.detail));
        }
        self.level_connected
            .iter()
            .position(|&ok| !ok)
            .map(|lvl| format!("level {lvl} is not connected"))
    }
}

impl InverseSystem {
    pub fn depth(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn level(&self, n: usize) -> Result<&MultiGraph> {
        self.levels
            .get(n)
            .ok_or_else(|| Error::NotFound(format!("level {n}")))
    }

    /// The bond mapping level n+1 down to level n.
    pub fn bond(&self, n: usize) -> Result<&BondingMap> {
        self.bonds
            .get(n)
            .ok_or_else(|| Error::NotFound(format!("bond {n}")))
    }

    pub fn deepest(&self) -> &MultiGraph {
        self.levels.last().expect("system has at least one level")
    }

    /// Structural + axiom validation; see module docs for the axioms.
    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let structural_ok = self.levels.len() == self.bonds.len() + 1 && !self.levels.is_empty();
        checks.push(CheckResult {
            bond: 0,
            check: "structure".into(),
            ok: structural_ok,
            detail: if structural_ok {
                String::new()
            } else {
                format!(
                    "{} levels but {} bonds",
                    self.levels.len(),
                    self.bonds.len()
                )
            },
        });
        if structural_ok {
            for n in 0..self.bonds.len() {
                self.validate_bond(n, &mut checks);
            }
        }
        ValidationReport {
            checks,
            level_connected: self.levels.iter().map(|g| g.is_connected()).collect(),
            loop_warnings: self
                .levels
                .iter()
                .enumerate()
                .flat_map(|(n, g)| {
                    g.edge_ids()
                        .filter(|e| g.is_loop(e))
                        .map(move |e| (n, e.clone()))
                })
                .collect(),
        }
    }

    fn validate_bond(&self, n: usize, checks: &mut Vec<CheckResult>) {
        let upper = &self.levels[n + 1];
        let lower = &self.levels[n];
        let bond = &self.bonds[n];
        let mut push = |check: &str, ok: bool, detail: String| {
            checks.push(CheckResult {
                bond: n,
                check: check.into(),
                ok,
                detail,
            });
        };

        // Totality: every upper vertex and edge has an image in the lower graph.
        let mut total = Vec::new();
        for v in upper.vertices() {
            match bond.vertex_map.get(v) {
                None => total.push(format!("vertex {v} unmapped")),
                Some(img) if !lower.contains_vertex(img) => {
                    total.push(format!("vertex {v} maps outside the lower level"))
                }
                _ => {}
            }
        }
        for e in upper.edge_ids() {
            match bond.edge_map.get(e) {
                None => total.push(format!("edge {e} unmapped")),
                Some(EdgeImage::Edge(f)) if !lower.contains_edge(f) => {
                    total.push(format!("edge {e} maps to unknown edge {f}"))
                }
                Some(EdgeImage::Vertex { vertex }) if !lower.contains_vertex(vertex) => {
                    total.push(format!("edge {e} contracts to unknown vertex {vertex}"))
                }
                _ => {}
            }
        }
        push("totality", total.is_empty(), total.join("; "));

        // Surjectivity of the vertex map.
        let images: BTreeSet<&VertexId> = bond.vertex_map.values().collect();
        let missing: Vec<String> = lower
            .vertices()
            .filter(|v| !images.contains(v))
            .map(|v| v.to_string())
            .collect();
        push("surjectivity", missing.is_empty(), missing.join("; "));

        // Edge persistence: edge-valued entries form a bijection onto the
        // lower edge set and keep their (global) id.
        let mut persist = Vec::new();
        let mut covered: BTreeMap<&EdgeId, &EdgeId> = BTreeMap::new();
        for (e, img) in &bond.edge_map {
            if let EdgeImage::Edge(f) = img {
                if e != f {
                    persist.push(format!("edge {e} renamed to {f}"));
                }
                if let Some(prev) = covered.insert(f, e) {
                    persist.push(format!("edges {prev} and {e} both map to {f}"));
                }
            }
        }
        for f in lower.edge_ids() {
            if !covered.contains_key(f) {
                persist.push(format!("lower edge {f} has no surviving preimage"));
            }
        }
        push("edge-bijection", persist.is_empty(), persist.join("; "));

        // Endpoint compatibility.
        let mut compat = Vec::new();
        for (e, img) in &bond.edge_map {
            let Some((a, b)) = upper.ends(e) else {
                continue;
            };
            let (Some(fa), Some(fb)) = (bond.vertex_map.get(a), bond.vertex_map.get(b)) else {
                continue;
            };
            match img {
                EdgeImage::Edge(f) => {
                    if let Some((x, y)) = lower.ends(f) {
                        let ok = (fa == x && fb == y) || (fa == y && fb == x);
                        if !ok {
                            compat.push(format!(
                                "edge {e}: endpoints map to {fa},{fb}, not the ends of {f}"
                            ));
                        }
                    }
                }
                EdgeImage::Vertex { vertex } => {
                    if fa != vertex || fb != vertex {
                        compat.push(format!(
                            "edge {e} contracts to {vertex} but endpoints map to {fa},{fb}"
                        ));
                    }
                }
            }
        }
        push(
            "endpoint-compatibility",
            compat.is_empty(),
            compat.join("; "),
        );

        // Monotonicity: every vertex fibre with its contracted edges connected.
        let mut mono = Vec::new();
        for v in lower.vertices() {
            let fibre = bond.vertex_fiber(v);
            if fibre.is_empty() {
                continue; // reported by surjectivity
            }
            let mut sub = MultiGraph::new();
            for u in &fibre {
                sub.add_vertex(u.clone());
            }
            for e in bond.contracted_edges_at(v) {
                if let Some((a, b)) = upper.ends(&e) {
                    if fibre.contains(a) && fibre.contains(b) {
                        sub.add_edge(e.clone(), a.clone(), b.clone());
                    }
                }
            }
            if !sub.is_connected() {
                mono.push(format!("fibre of {v} is disconnected"));
            }
        }
        push("monotone-fibres", mono.is_empty(), mono.join("; "));
    }

    /// Composite bond from level m down to level n (n <= m); the identity
    /// when m == n.
    pub fn compose(&self, m: usize, n: usize) -> Result<BondingMap> {
        if n > m || m > self.depth() {
            return Err(Error::NotFound(format!("levels {m}->{n}")));
        }
        let mut acc = BondingMap::identity(&self.levels[m]);
        for k in (n..m).rev() {
            let step = &self.bonds[k];
            let vertex_map = acc
                .vertex_map
                .iter()
                .map(|(v, img)| {
                    let down = step.vertex_map.get(img).ok_or_else(|| {
                        Error::InvalidSystem(format!("vertex {img} unmapped at bond {k}"))
                    })?;
                    Ok((v.clone(), down.clone()))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            let edge_map = acc
                .edge_map
                .iter()
                .map(|(e, img)| {
                    let down = match img {
                        EdgeImage::Edge(f) => match step.edge_map.get(f) {
                            Some(x) => x.clone(),
                            None => {
                                return Err(Error::InvalidSystem(format!(
                                    "edge {f} unmapped at bond {k}"
                                )))
                            }
                        },
                        EdgeImage::Vertex { vertex } => {
                            let v = step.vertex_map.get(vertex).ok_or_else(|| {
                                Error::InvalidSystem(format!(
                                    "vertex {vertex} unmapped at bond {k}"
                                ))
                            })?;
                            EdgeImage::Vertex { vertex: v.clone() }
                        }
                    };
                    Ok((e.clone(), down))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            acc = BondingMap {
                vertex_map,
                edge_map,
            };
        }
        Ok(acc)
    }

    /// The level-m vertex set representing cylinder `c` (c.level <= m).
    pub fn fiber(&self, m: usize, c: &CylinderSet) -> Result<BTreeSet<VertexId>> {
        if c.level > m {
            return Err(Error::NotFound(format!(
                "fiber target {m} above cylinder level {}",
                c.level
            )));
        }
        let map = self.compose(m, c.level)?;
        Ok(map
            .vertex_map
            .iter()
            .filter(|(_, img)| c.cells.contains(img))
            .map(|(v, _)| v.clone())
            .collect())
    }

    /// The cut of a cylinder set, evaluated at its own level. Because edge
    /// ids are global, evaluating the same clopen set at any deeper level
    /// yields the identical boundary edge-id set.
    pub fn cylinder_cut(&self, c: &CylinderSet) -> Result<Cut> {
        self.level(c.level)?.cut(&c.cells)
    }

    /// Per level, the list of odd-degree vertices. Empty everywhere is the
    /// finite-depth certificate that all cuts of the modelled space are even.
    pub fn level_degree_report(&self) -> Vec<Vec<VertexId>> {
        self.levels.iter().map(|g| g.odd_vertices()).collect()
    }

    /// Lexicographically least compatible vertex thread, built greedily:
    /// least level-0 vertex, then least preimage at each deeper level.
    pub fn canonical_thread(&self) -> Result<VertexThread> {
        let mut vertices = Vec::with_capacity(self.depth() + 1);
        let v0 = self.levels[0]
            .vertices()
            .next()
            .ok_or_else(|| Error::InvalidSystem("empty level 0".into()))?
            .clone();
        vertices.push(v0);
        for n in 0..self.bonds.len() {
            let prev = vertices.last().unwrap().clone();
            let next = self.bonds[n]
                .vertex_fiber(&prev)
                .into_iter()
                .next()
                .ok_or_else(|| {
                    Error::InvalidSystem(format!("vertex {prev} has empty fibre at bond {n}"))
                })?;
            vertices.push(next);
        }
        Ok(VertexThread { vertices })
    }

    /// The thread determined by a deepest-level vertex (mapping down).
    pub fn thread_through(&self, deepest: &VertexId) -> Result<VertexThread> {
        if !self.deepest().contains_vertex(deepest) {
            return Err(Error::NotFound(format!("vertex {deepest}")));
        }
        let mut vertices = vec![deepest.clone()];
        for n in (0..self.bonds.len()).rev() {
            let at = vertices.last().unwrap();
            let down = self.bonds[n]
                .vertex_map
                .get(at)
                .ok_or_else(|| Error::InvalidSystem(format!("vertex {at} unmapped at bond {n}")))?
                .clone();
            vertices.push(down);
        }
        vertices.reverse();
        Ok(VertexThread { vertices })
    }

    /// Every thread distinguishable at the deepest level.
    pub fn all_threads(&self) -> Result<Vec<VertexThread>> {
        self.deepest()
            .vertices()
            .map(|v| self.thread_through(v))
            .collect()
    }

    pub fn check_thread(&self, t: &VertexThread) -> Result<()> {
        if t.vertices.len() != self.depth() + 1 {
            return Err(Error::InvalidThread(format!(
                "thread has {} entries, system depth is {}",
                t.vertices.len(),
                self.depth()
            )));
        }
        for (n, g) in self.levels.iter().enumerate() {
            if !g.contains_vertex(&t.vertices[n]) {
                return Err(Error::InvalidThread(format!(
                    "{} is not a level-{n} vertex",
                    t.vertices[n]
                )));
            }
        }
        for n in 0..self.bonds.len() {
            let down = self.bonds[n].vertex_map.get(&t.vertices[n + 1]);
            if down != Some(&t.vertices[n]) {
                return Err(Error::InvalidThread(format!(
                    "incompatible at bond {n}: {} does not map to {}",
                    t.vertices[n + 1],
                    t.vertices[n]
                )));
            }
        }
        Ok(())
    }

    /// Replaces every degree-2 vertex outside `keep` (with two distinct
    /// incident edges) by a single edge; loops created en route are kept.
    /// The surviving edge reuses the smaller of the two ids.
    pub fn suppress_degree2(g: &MultiGraph, keep: &BTreeSet<VertexId>) -> MultiGraph {
        let mut g = g.clone();
        loop {
            let candidate = g
                .vertex_set()
                .iter()
                .find(|v| {
                    if keep.contains(*v) {
                        return false;
                    }
                    let inc = g.incident_edges(v);
                    g.degree(v).unwrap() == 2 && inc.len() == 2
                })
                .cloned();
            let Some(v) = candidate else { break };
            let inc = g.incident_edges(&v);
            let (e1, a) = inc[0].clone();
            let (e2, b) = inc[1].clone();
            let id = if e1 < e2 { e1.clone() } else { e2.clone() };
            g.remove_edge(&e1);
            g.remove_edge(&e2);
            g.remove_vertex(&v);
            g.add_edge(id, a, b);
        }
        g
    }
}

/// Maps a circuit one level down: persistent edges keep their place,
/// contracted edges are dropped (which collapses the duplicate vertices).
pub fn project_circuit(bond: &BondingMap, c: &Circuit) -> Result<Circuit> {
    let root = bond
        .vertex_map
        .get(&c.root)
        .ok_or_else(|| Error::InvalidInput(format!("root {} unmapped", c.root)))?
        .clone();
    let mut steps = Vec::new();
    for (e, v) in &c.steps {
        match bond.edge_map.get(e) {
            Some(EdgeImage::Edge(f)) => {
                let img = bond
                    .vertex_map
                    .get(v)
                    .ok_or_else(|| Error::InvalidInput(format!("vertex {v} unmapped")))?;
                steps.push((f.clone(), img.clone()));
            }
            Some(EdgeImage::Vertex { .. }) => {}
            None => return Err(Error::InvalidInput(format!("edge {e} unmapped"))),
        }
    }
    Ok(Circuit { root, steps })
}

impl CircuitChain {
    /// Checks every member is an Euler circuit of its level and adjacent
    /// members project onto each other.
    pub fn verify(&self, sys: &InverseSystem) -> Result<()> {
        if self.circuits.len() != sys.depth() + 1 {
            return Err(Error::InvalidInput(format!(
                "chain has {} circuits for depth {}",
                self.circuits.len(),
                sys.depth()
            )));
        }
        for (n, c) in self.circuits.iter().enumerate() {
            if !c.is_euler_in(&sys.levels[n]) {
                return Err(Error::InvalidInput(format!(
                    "level-{n} member is not an Euler circuit"
                )));
            }
        }
        for n in 0..sys.bonds.len() {
            let down = project_circuit(&sys.bonds[n], &self.circuits[n + 1])?;
            if down != self.circuits[n] {
                return Err(Error::InvalidInput(format!(
                    "projection mismatch at bond {n}"
                )));
            }
        }
        Ok(())
    }
}
