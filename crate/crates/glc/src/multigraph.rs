//! Finite multigraphs (parallel edges and loops allowed) and all
//! single-level graph algorithms: degrees, cuts, connectivity, Euler
//! circuits, circuit enumeration, cycle decomposition, edge-disjoint
//! path packing and vertex-set contraction.
//!
//! Everything here is deterministic: vertices and edges are kept in
//! lexicographic id order and every search visits them in that order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque vertex identifier; ordering is plain lexicographic string order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub String);

/// Opaque edge identifier; ids are unique within a graph and (for inverse
/// systems) global across levels.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> Self {
        VertexId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl EdgeId {
    pub fn new(s: impl Into<String>) -> Self {
        EdgeId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite multigraph. Immutable in spirit: mutation is only used while
/// building; all algorithms take `&self`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
}

/// The cut induced by a vertex subset: the non-loop edges with exactly one
/// endpoint inside. The complement subset induces the same edge set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub cells: BTreeSet<VertexId>,
    pub boundary: BTreeSet<EdgeId>,
}

impl Cut {
    pub fn size(&self) -> usize {
        self.boundary.len()
    }
    pub fn is_even(&self) -> bool {
        self.size().is_multiple_of(2)
    }
}

/// A rooted, oriented closed trail: `root`, then alternating (edge, vertex)
/// steps ending back at `root`. Two circuits are equal iff their roots and
/// edge-id sequences are equal as written (no rotation/reflection quotient).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Circuit {
    pub root: VertexId,
    pub steps: Vec<(EdgeId, VertexId)>,
}

impl Circuit {
    pub fn empty(root: VertexId) -> Self {
        Circuit {
            root,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.steps.iter().map(|(e, _)| e.clone()).collect()
    }

    /// Structural validity inside `g`: consecutive incidence and the trail
    /// property (no edge repeats).
    pub fn is_valid_in(&self, g: &MultiGraph) -> bool {
        let mut seen = BTreeSet::new();
        let mut at = self.root.clone();
        for (e, v) in &self.steps {
            let Some((a, b)) = g.ends(e) else {
                return false;
            };
            if !seen.insert(e.clone()) {
                return false;
            }
            if (a != &at || b != v) && (b != &at || a != v) {
                return false;
            }
            at = v.clone();
        }
        at == self.root && g.contains_vertex(&self.root)
    }

    /// An Euler circuit additionally uses every edge exactly once.
    pub fn is_euler_in(&self, g: &MultiGraph) -> bool {
        self.is_valid_in(g) && self.steps.len() == g.edge_count()
    }

    /// A cycle visits no vertex twice except for closing at the root.
    pub fn is_cycle_in(&self, g: &MultiGraph) -> bool {
        if !self.is_valid_in(g) || self.steps.is_empty() {
            return false;
        }
        let mut seen = BTreeSet::new();
        seen.insert(self.root.clone());
        for (i, (_, v)) in self.steps.iter().enumerate() {
            let closing = i + 1 == self.steps.len();
            if closing {
                if v != &self.root {
                    return false;
                }
            } else if !seen.insert(v.clone()) {
                // Loop edges (single-step cycles) are handled by `closing`.
                return false;
            }
        }
        true
    }
}

/// An open trail (for Menger witnesses): start vertex plus steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trail {
    pub start: VertexId,
    pub steps: Vec<(EdgeId, VertexId)>,
}

impl Trail {
    pub fn end(&self) -> &VertexId {
        self.steps.last().map(|(_, v)| v).unwrap_or(&self.start)
    }
    pub fn edge_ids(&self) -> BTreeSet<EdgeId> {
        self.steps.iter().map(|(e, _)| e.clone()).collect()
    }
}

/// Result of bounded Euler-circuit enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EulerEnumeration {
    pub circuits: Vec<Circuit>,
    pub truncated: bool,
}

impl MultiGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.vertices.insert(v);
    }

    /// Adds an edge; endpoints are declared implicitly so the
    /// "every endpoint is a vertex" invariant holds by construction.
    pub fn add_edge(&mut self, id: EdgeId, a: VertexId, b: VertexId) {
        self.vertices.insert(a.clone());
        self.vertices.insert(b.clone());
        self.edges.insert(id, (a, b));
    }

    pub fn remove_edge(&mut self, id: &EdgeId) -> Option<(VertexId, VertexId)> {
        self.edges.remove(id)
    }

    pub fn remove_vertex(&mut self, v: &VertexId) {
        self.vertices.remove(v);
        self.edges.retain(|_, (a, b)| a != v && b != v);
    }

    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> {
        self.vertices.iter()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (&EdgeId, &(VertexId, VertexId))> {
        self.edges.iter()
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = &EdgeId> {
        self.edges.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn contains_edge(&self, e: &EdgeId) -> bool {
        self.edges.contains_key(e)
    }

    pub fn ends(&self, e: &EdgeId) -> Option<(&VertexId, &VertexId)> {
        self.edges.get(e).map(|(a, b)| (a, b))
    }

    pub fn is_loop(&self, e: &EdgeId) -> bool {
        matches!(self.edges.get(e), Some((a, b)) if a == b)
    }

    pub fn has_loops(&self) -> bool {
        self.edges.values().any(|(a, b)| a == b)
    }

    /// Incident edges of `v` in id order. A loop is listed once (its
    /// traversal uses the edge once, even though it adds 2 to the degree).
    pub fn incident_edges(&self, v: &VertexId) -> Vec<(EdgeId, VertexId)> {
        let mut out = Vec::new();
        for (e, (a, b)) in &self.edges {
            if a == v {
                out.push((e.clone(), b.clone()));
            } else if b == v {
                out.push((e.clone(), a.clone()));
            }
        }
        out
    }

    /// Number of edge-endpoint incidences at `v`; a loop counts 2.
    pub fn degree(&self, v: &VertexId) -> Result<usize> {
        if !self.vertices.contains(v) {
            return Err(Error::NotFound(format!("vertex {v}")));
        }
        let mut d = 0;
        for (a, b) in self.edges.values() {
            if a == v {
                d += 1;
            }
            if b == v {
                d += 1;
            }
        }
        Ok(d)
    }

    pub fn odd_vertices(&self) -> Vec<VertexId> {
        self.vertices
            .iter()
            .filter(|v| self.degree(v).unwrap() % 2 == 1)
            .cloned()
            .collect()
    }

    /// The cut induced by `S`: non-loop edges with exactly one end in `S`.
    pub fn cut(&self, s: &BTreeSet<VertexId>) -> Result<Cut> {
        for v in s {
            if !self.vertices.contains(v) {
                return Err(Error::NotFound(format!("vertex {v}")));
            }
        }
        let boundary = self
            .edges
            .iter()
            .filter(|(_, (a, b))| s.contains(a) != s.contains(b))
            .map(|(e, _)| e.clone())
            .collect();
        Ok(Cut {
            cells: s.clone(),
            boundary,
        })
    }

    /// True iff the graph has exactly one component. The empty graph is not
    /// connected; a single vertex is.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.vertices.iter().next() else {
            return false;
        };
        self.component_of(start).len() == self.vertices.len()
    }

    fn component_of(&self, start: &VertexId) -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start.clone());
        while let Some(v) = queue.pop_front() {
            for (_, w) in self.incident_edges(&v) {
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        seen
    }

    /// Connected components as sorted vertex sets, ordered by least member.
    pub fn components(&self) -> Vec<BTreeSet<VertexId>> {
        let mut remaining: BTreeSet<VertexId> = self.vertices.clone();
        let mut out = Vec::new();
        while let Some(start) = remaining.iter().next().cloned() {
            let comp = self.component_of(&start);
            for v in &comp {
                remaining.remove(v);
            }
            out.push(comp);
        }
        out
    }

    /// Vertices with at least one incident edge.
    fn support(&self) -> BTreeSet<VertexId> {
        let mut s = BTreeSet::new();
        for (a, b) in self.edges.values() {
            s.insert(a.clone());
            s.insert(b.clone());
        }
        s
    }

    fn support_connected(&self) -> bool {
        let support = self.support();
        let Some(start) = support.iter().next() else {
            return true; // no edges at all
        };
        let comp = self.component_of(start);
        support.iter().all(|v| comp.contains(v))
    }

    /// Hierholzer construction of an Euler circuit rooted at `root`.
    ///
    /// Returns `None` when no Euler circuit exists (odd degree somewhere,
    /// disconnected edge support, or root off the support). An edgeless
    /// graph yields the empty circuit at `root`.
    pub fn euler_circuit(&self, root: &VertexId) -> Result<Option<Circuit>> {
        if !self.vertices.contains(root) {
            return Err(Error::NotFound(format!("vertex {root}")));
        }
        if self.edges.is_empty() {
            return Ok(Some(Circuit::empty(root.clone())));
        }
        if self
            .vertices
            .iter()
            .any(|v| self.degree(v).unwrap() % 2 == 1)
        {
            return Ok(None);
        }
        if !self.support_connected() || self.degree(root)? == 0 {
            return Ok(None);
        }
        // Adjacency lists in edge-id order, with a monotone pointer each.
        let mut adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> = BTreeMap::new();
        for v in &self.vertices {
            adj.insert(v.clone(), self.incident_edges(v));
        }
        let mut ptr: BTreeMap<VertexId, usize> = BTreeMap::new();
        let mut used: BTreeSet<EdgeId> = BTreeSet::new();
        let mut stack: Vec<(VertexId, Option<EdgeId>)> = vec![(root.clone(), None)];
        let mut out: Vec<(VertexId, Option<EdgeId>)> = Vec::new();
        while let Some((v, _)) = stack.last().cloned() {
            let list = &adj[&v];
            let p = ptr.entry(v.clone()).or_insert(0);
            while *p < list.len() && used.contains(&list[*p].0) {
                *p += 1;
            }
            if *p < list.len() {
                let (e, w) = list[*p].clone();
                used.insert(e.clone());
                stack.push((w, Some(e)));
            } else {
                out.push(stack.pop().unwrap());
            }
        }
        out.reverse();
        let mut steps = Vec::new();
        for (v, e) in out.into_iter().skip(1) {
            steps.push((e.unwrap(), v));
        }
        let c = Circuit {
            root: root.clone(),
            steps,
        };
        debug_assert!(c.is_euler_in(self));
        Ok(Some(c))
    }

    /// All distinct rooted, oriented Euler circuits starting at `root`,
    /// in lexicographic edge-id-sequence order, up to `cap` results.
    pub fn enumerate_euler_circuits(
        &self,
        root: &VertexId,
        cap: usize,
    ) -> Result<EulerEnumeration> {
        if !self.vertices.contains(root) {
            return Err(Error::NotFound(format!("vertex {root}")));
        }
        if self.edges.is_empty() {
            return Ok(EulerEnumeration {
                circuits: vec![Circuit::empty(root.clone())],
                truncated: false,
            });
        }
        let mut adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> = BTreeMap::new();
        for v in &self.vertices {
            adj.insert(v.clone(), self.incident_edges(v));
        }
        let total = self.edge_count();
        let mut used: BTreeSet<EdgeId> = BTreeSet::new();
        let mut seq: Vec<(EdgeId, VertexId)> = Vec::new();
        let mut circuits = Vec::new();
        let mut truncated = false;

        #[allow(clippy::too_many_arguments)]
        fn dfs(
            at: &VertexId,
            root: &VertexId,
            total: usize,
            adj: &BTreeMap<VertexId, Vec<(EdgeId, VertexId)>>,
            used: &mut BTreeSet<EdgeId>,
            seq: &mut Vec<(EdgeId, VertexId)>,
            circuits: &mut Vec<Circuit>,
            cap: usize,
            truncated: &mut bool,
        ) {
            if *truncated {
                return;
            }
            if used.len() == total {
                if at == root {
                    if circuits.len() == cap {
                        *truncated = true;
                        return;
                    }
                    circuits.push(Circuit {
                        root: root.clone(),
                        steps: seq.clone(),
                    });
                }
                return;
            }
            for (e, w) in &adj[at] {
                if used.contains(e) {
                    continue;
                }
                used.insert(e.clone());
                seq.push((e.clone(), w.clone()));
                dfs(w, root, total, adj, used, seq, circuits, cap, truncated);
                seq.pop();
                used.remove(e);
                if *truncated {
                    return;
                }
            }
        }

        dfs(
            root,
            root,
            total,
            &adj,
            &mut used,
            &mut seq,
            &mut circuits,
            cap,
            &mut truncated,
        );
        Ok(EulerEnumeration {
            circuits,
            truncated,
        })
    }

    /// Counts rooted oriented Euler circuits without materializing them;
    /// same search as `enumerate_euler_circuits`, so the count matches.
    /// Returns `(count, truncated)`.
    pub fn count_euler_circuits(&self, root: &VertexId, cap: usize) -> Result<(usize, bool)> {
        if !self.vertices.contains(root) {
            return Err(Error::NotFound(format!("vertex {root}")));
        }
        if self.edges.is_empty() {
            return Ok((1, false));
        }
        let mut adj: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> = BTreeMap::new();
        for v in &self.vertices {
            adj.insert(v.clone(), self.incident_edges(v));
        }
        let total = self.edge_count();
        let mut used: BTreeSet<EdgeId> = BTreeSet::new();
        let mut count = 0usize;
        let mut truncated = false;

        #[allow(clippy::too_many_arguments)]
        fn dfs(
            at: &VertexId,
            root: &VertexId,
            total: usize,
            adj: &BTreeMap<VertexId, Vec<(EdgeId, VertexId)>>,
            used: &mut BTreeSet<EdgeId>,
            count: &mut usize,
            cap: usize,
            truncated: &mut bool,
        ) {
            if *truncated {
                return;
            }
            if used.len() == total {
                if at == root {
                    if *count == cap {
                        *truncated = true;
                        return;
                    }
                    *count += 1;
                }
                return;
            }
            for (e, w) in &adj[at] {
                if used.contains(e) {
                    continue;
                }
                used.insert(e.clone());
                dfs(w, root, total, adj, used, count, cap, truncated);
                used.remove(e);
                if *truncated {
                    return;
                }
            }
        }

        dfs(
            root,
            root,
            total,
            &adj,
            &mut used,
            &mut count,
            cap,
            &mut truncated,
        );
        Ok((count, truncated))
    }

    /// Greedy decomposition of an all-even multigraph into edge-disjoint
    /// cycles: repeatedly close the first uncovered edge through the
    /// remaining graph.
    pub fn cycle_decomposition(&self) -> Result<Vec<Circuit>> {
        if let Some(v) = self.odd_vertices().first() {
            return Err(Error::OddCutPresent(format!("odd-degree vertex {v}")));
        }
        let mut remaining: BTreeSet<EdgeId> = self.edges.keys().cloned().collect();
        let mut cycles = Vec::new();
        while let Some(e0) = remaining.iter().next().cloned() {
            let (x, y) = self.edges[&e0].clone();
            remaining.remove(&e0);
            if x == y {
                cycles.push(Circuit {
                    root: x.clone(),
                    steps: vec![(e0, x)],
                });
                continue;
            }
            let path = self
                .simple_path(&y, &x, &remaining)
                .expect("even graph: first uncovered edge lies on a cycle");
            for (e, _) in &path {
                remaining.remove(e);
            }
            let mut steps = vec![(e0, y.clone())];
            steps.extend(path);
            let c = Circuit { root: x, steps };
            debug_assert!(c.is_cycle_in(self));
            cycles.push(c);
        }
        Ok(cycles)
    }

    /// Deterministic DFS for a vertex-simple path from `from` to `to` using
    /// only `allowed` edges. Loops are skipped (useless in a simple path).
    fn simple_path(
        &self,
        from: &VertexId,
        to: &VertexId,
        allowed: &BTreeSet<EdgeId>,
    ) -> Option<Vec<(EdgeId, VertexId)>> {
        fn go(
            g: &MultiGraph,
            at: &VertexId,
            to: &VertexId,
            allowed: &BTreeSet<EdgeId>,
            visited: &mut BTreeSet<VertexId>,
            path: &mut Vec<(EdgeId, VertexId)>,
        ) -> bool {
            if at == to {
                return true;
            }
            for (e, w) in g.incident_edges(at) {
                if !allowed.contains(&e) || w == *at || visited.contains(&w) {
                    continue;
                }
                if path.iter().any(|(pe, _)| pe == &e) {
                    continue;
                }
                visited.insert(w.clone());
                path.push((e.clone(), w.clone()));
                if go(g, &w, to, allowed, visited, path) {
                    return true;
                }
                path.pop();
                visited.remove(&w);
            }
            false
        }
        let mut visited = BTreeSet::new();
        visited.insert(from.clone());
        let mut path = Vec::new();
        if go(self, from, to, allowed, &mut visited, &mut path) {
            Some(path)
        } else {
            None
        }
    }

    /// Unit-capacity max-flow between vertex sets `A` and `B`, with an
    /// explicit packing of k pairwise edge-disjoint A-B trails.
    ///
    /// k equals the minimum |∂S| over S ⊇ A with S ∩ B = ∅ (Menger).
    pub fn max_edge_disjoint_paths(
        &self,
        a: &BTreeSet<VertexId>,
        b: &BTreeSet<VertexId>,
    ) -> Result<(usize, Vec<Trail>)> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidSeparation("A and B must be nonempty".into()));
        }
        if !a.is_disjoint(b) {
            return Err(Error::InvalidSeparation("A and B overlap".into()));
        }
        for v in a.iter().chain(b.iter()) {
            if !self.vertices.contains(v) {
                return Err(Error::NotFound(format!("vertex {v}")));
            }
        }
        // Contracted picture: s = A, t = B. Loops and intra-A/intra-B edges
        // cannot carry useful flow.
        let side = |v: &VertexId| -> u8 {
            if a.contains(v) {
                1
            } else if b.contains(v) {
                2
            } else {
                0
            }
        };
        let usable: BTreeMap<EdgeId, (VertexId, VertexId)> = self
            .edges
            .iter()
            .filter(|(_, (x, y))| x != y && !(side(x) != 0 && side(x) == side(y)))
            .map(|(e, p)| (e.clone(), p.clone()))
            .collect();
        // flow: +1 = from ends.0 to ends.1, -1 = reverse, 0 = unused.
        let mut flow: BTreeMap<EdgeId, i8> = usable.keys().map(|e| (e.clone(), 0)).collect();
        let mut k = 0usize;
        loop {
            // BFS over residual edges from the A-side to the B-side.
            let mut pred: BTreeMap<VertexId, (EdgeId, VertexId)> = BTreeMap::new();
            let mut seen: BTreeSet<VertexId> = a.clone();
            let mut queue: VecDeque<VertexId> = a.iter().cloned().collect();
            let mut reached: Option<VertexId> = None;
            'bfs: while let Some(v) = queue.pop_front() {
                for (e, (x, y)) in &usable {
                    let w = if x == &v {
                        y
                    } else if y == &v {
                        x
                    } else {
                        continue;
                    };
                    let residual_ok = {
                        let f = flow[e];
                        let forward = x == &v; // traversing ends.0 -> ends.1
                        (forward && f < 1) || (!forward && f > -1)
                    };
                    if !residual_ok || seen.contains(w) || a.contains(w) {
                        continue;
                    }
                    seen.insert(w.clone());
                    pred.insert(w.clone(), (e.clone(), v.clone()));
                    if b.contains(w) {
                        reached = Some(w.clone());
                        break 'bfs;
                    }
                    queue.push_back(w.clone());
                }
            }
            let Some(mut at) = reached else { break };
            while let Some((e, from)) = pred.get(&at).cloned() {
                let (x, _) = &usable[&e];
                *flow.get_mut(&e).unwrap() += if x == &from { 1 } else { -1 };
                at = from;
                if a.contains(&at) {
                    break;
                }
            }
            k += 1;
        }
        // Decompose the integral flow into k trails from A to B.
        // Arcs: oriented edges carrying one unit.
        let mut arcs: BTreeMap<VertexId, Vec<(EdgeId, VertexId)>> = BTreeMap::new();
        for (e, f) in &flow {
            if *f == 0 {
                continue;
            }
            let (x, y) = usable[e].clone();
            let (from, to) = if *f > 0 { (x, y) } else { (y, x) };
            arcs.entry(from).or_default().push((e.clone(), to));
        }
        for list in arcs.values_mut() {
            list.sort();
        }
        let mut trails = Vec::new();
        for start in a {
            while let Some(list) = arcs.get_mut(start) {
                if list.is_empty() {
                    break;
                }
                let (e, mut at) = list.remove(0);
                let mut steps = vec![(e, at.clone())];
                while !b.contains(&at) {
                    let list = arcs
                        .get_mut(&at)
                        .expect("flow conservation: trail can always continue");
                    let (e, next) = list.remove(0);
                    steps.push((e, next.clone()));
                    at = next;
                }
                trails.push(Trail {
                    start: start.clone(),
                    steps,
                });
            }
        }
        debug_assert_eq!(trails.len(), k);
        Ok((k, trails))
    }

    /// Quotient by a partition of the vertex set. Each cell becomes one
    /// vertex named after its least member; intra-cell edges are dropped and
    /// recorded in the provenance map (edge id -> absorbing cell vertex).
    pub fn contract(
        &self,
        partition: &[BTreeSet<VertexId>],
    ) -> Result<(MultiGraph, BTreeMap<EdgeId, VertexId>)> {
        let mut cell_of: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for cell in partition {
            let Some(name) = cell.iter().next().cloned() else {
                return Err(Error::InvalidPartition("empty cell".into()));
            };
            for v in cell {
                if !self.vertices.contains(v) {
                    return Err(Error::InvalidPartition(format!("unknown vertex {v}")));
                }
                if cell_of.insert(v.clone(), name.clone()).is_some() {
                    return Err(Error::InvalidPartition(format!("vertex {v} in two cells")));
                }
            }
        }
        if cell_of.len() != self.vertices.len() {
            return Err(Error::InvalidPartition("partition does not cover V".into()));
        }
        let mut g = MultiGraph::new();
        for cell in partition {
            g.add_vertex(cell.iter().next().unwrap().clone());
        }
        let mut provenance = BTreeMap::new();
        for (e, (x, y)) in &self.edges {
            let (cx, cy) = (&cell_of[x], &cell_of[y]);
            if cx == cy {
                provenance.insert(e.clone(), cx.clone());
            } else {
                g.add_edge(e.clone(), cx.clone(), cy.clone());
            }
        }
        Ok((g, provenance))
    }

    /// Boundary submodularity:
    /// |∂Y|+|∂Z| ≥ max(|∂(Y∩Z)|+|∂(Y∪Z)|, |∂(Y∖Z)|+|∂(Z∖Y)|).
    /// Holds for every input; exposed as a checkable predicate.
    pub fn boundary_submodularity(
        &self,
        y: &BTreeSet<VertexId>,
        z: &BTreeSet<VertexId>,
    ) -> Result<bool> {
        let sz = |s: &BTreeSet<VertexId>| -> Result<usize> { Ok(self.cut(s)?.size()) };
        let lhs = sz(y)? + sz(z)?;
        let inter: BTreeSet<_> = y.intersection(z).cloned().collect();
        let union: BTreeSet<_> = y.union(z).cloned().collect();
        let ymz: BTreeSet<_> = y.difference(z).cloned().collect();
        let zmy: BTreeSet<_> = z.difference(y).cloned().collect();
        let rhs1 = sz(&inter)? + sz(&union)?;
        let rhs2 = sz(&ymz)? + sz(&zmy)?;
        Ok(lhs >= rhs1.max(rhs2))
    }

    /// DOT rendering; parallel edges become separate lines, loops allowed.
    pub fn to_dot(&self, name: &str) -> String {
        let mut s = format!("graph \"{name}\" {{\n");
        for v in &self.vertices {
            s.push_str(&format!("  \"{v}\";\n"));
        }
        for (e, (a, b)) in &self.edges {
            s.push_str(&format!("  \"{a}\" -- \"{b}\" [label=\"{e}\"];\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// Serde view: {"vertices":[...], "edges":[{"id":..., "ends":[u,v]}]}
#[derive(Serialize, Deserialize)]
struct MultiGraphJson {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    id: EdgeId,
    ends: [VertexId; 2],
}

impl Serialize for MultiGraph {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let view = MultiGraphJson {
            vertices: self.vertices.iter().cloned().collect(),
            edges: self
                .edges
                .iter()
                .map(|(e, (a, b))| EdgeJson {
                    id: e.clone(),
                    ends: [a.clone(), b.clone()],
                })
                .collect(),
        };
        view.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for MultiGraph {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let view = MultiGraphJson::deserialize(de)?;
        let mut g = MultiGraph::new();
        for v in view.vertices {
            g.add_vertex(v);
        }
        for e in view.edges {
            let [a, b] = e.ends;
            if g.contains_edge(&e.id) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate edge id {}",
                    e.id
                )));
            }
            g.add_edge(e.id, a, b);
        }
        Ok(g)
    }
}

/// Convenience constructors used across tests and generators.
pub fn graph_from(edges: &[(&str, &str, &str)]) -> MultiGraph {
    let mut g = MultiGraph::new();
    for (id, a, b) in edges {
        g.add_edge(EdgeId::new(*id), VertexId::new(*a), VertexId::new(*b));
    }
    g
}

pub fn triangle() -> MultiGraph {
    graph_from(&[("e1", "a", "b"), ("e2", "b", "c"), ("e3", "a", "c")])
}

pub fn c4() -> MultiGraph {
    graph_from(&[
        ("e1", "a", "b"),
        ("e2", "b", "c"),
        ("e3", "c", "d"),
        ("e4", "a", "d"),
    ])
}
