//! Embedding of an inverse-system model into the finite truncations of a
//! locally finite graph.
//!
//! The construction subdivides each level edge at midpoints and joins
//! midpoints of edges sharing an endpoint (the star of a graph), then runs a
//! level recursion: the skeleton built for one level is pulled back along the
//! bond and extended by the line graphs of the closed vertex fibres. The
//! skeletons form a nested family whose truncations — contract every
//! component of the part not yet built at a level — reproduce each level
//! graph up to isomorphism, with one "dummy" vertex per original vertex.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multigraph::{EdgeId, MultiGraph, VertexId};
use crate::prosys::{BondingMap, EdgeImage, InverseSystem};

/// A graph with every edge subdivided at a fresh midpoint and a line-graph
/// edge between midpoints of edges sharing an endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarGraph {
    pub graph: MultiGraph,
    /// Source edge -> its midpoint vertex.
    pub midpoints: BTreeMap<EdgeId, VertexId>,
    /// The two subdivision halves of each source edge.
    pub half_edges: BTreeSet<EdgeId>,
    /// The line-graph edges between midpoints.
    pub line_edges: BTreeSet<EdgeId>,
}

/// Subdivides every edge of `g` at a midpoint and connects two midpoints by
/// a fresh edge for every endpoint their source edges share.
pub fn star_operator(g: &MultiGraph) -> Result<StarGraph> {
    if g.has_loops() {
        return Err(Error::SubdivideFirst(
            "the star of a graph is defined for loop-free graphs".into(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::PreconditionViolated(
            "graph must be connected".into(),
        ));
    }
    let mut out = MultiGraph::new();
    let mut midpoints = BTreeMap::new();
    let mut half_edges = BTreeSet::new();
    let mut line_edges = BTreeSet::new();
    for v in g.vertices() {
        out.add_vertex(v.clone());
    }
    for (e, (a, b)) in g.edges() {
        let m = VertexId::new(format!("m.{e}"));
        let h0 = EdgeId::new(format!("{e}.h0"));
        let h1 = EdgeId::new(format!("{e}.h1"));
        out.add_edge(h0.clone(), a.clone(), m.clone());
        out.add_edge(h1.clone(), b.clone(), m.clone());
        half_edges.insert(h0);
        half_edges.insert(h1);
        midpoints.insert(e.clone(), m);
    }
    for v in g.vertices() {
        let inc = g.incident_edges(v);
        for i in 0..inc.len() {
            for j in i + 1..inc.len() {
                let (e1, e2) = (&inc[i].0, &inc[j].0);
                let id = EdgeId::new(format!("l.{e1}.{e2}@{v}"));
                out.add_edge(id.clone(), midpoints[e1].clone(), midpoints[e2].clone());
                line_edges.insert(id);
            }
        }
    }
    Ok(StarGraph {
        graph: out,
        midpoints,
        half_edges,
        line_edges,
    })
}

/// Whether a skeleton edge runs inside a level edge (a connector, part of
/// the subdivision path of that edge) or is disjoint from every level edge
/// (a line-graph edge).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkeletonEdgeKind {
    Line,
    Connector,
}

/// One level of the recursion: the skeleton built so far, the ambient graph
/// (skeleton plus the level graph subdivided by it), and where on each level
/// edge the skeleton vertices sit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedStep {
    pub level: usize,
    pub skeleton: MultiGraph,
    pub ambient: MultiGraph,
    /// Level edge -> the skeleton vertices on it, ordered from the stored
    /// first endpoint to the stored second endpoint.
    pub placements: BTreeMap<EdgeId, Vec<VertexId>>,
}

/// One truncation level: the deepest skeleton with every not-yet-built
/// component contracted to a dummy vertex, together with the isomorphism
/// onto the ambient graph of the matching step and the witness subgraph
/// realizing the level graph as a subdivision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationStep {
    pub level: usize,
    pub graph: MultiGraph,
    /// Original level vertex -> its dummy vertex in `graph`.
    pub dummies: BTreeMap<VertexId, VertexId>,
    /// Original level vertex -> the deep skeleton vertices contracted into
    /// its dummy.
    pub components: BTreeMap<VertexId, BTreeSet<VertexId>>,
    /// Ambient vertex -> `graph` vertex; a graph isomorphism.
    pub phi: BTreeMap<VertexId, VertexId>,
    /// Edges of the witness subgraph: the subdivided image of the level
    /// graph inside `graph` (its vertex set is all of `graph`).
    pub witness_edges: BTreeSet<EdgeId>,
}

/// The full record of the recursion over a system prefix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingTrace {
    pub steps: Vec<EmbedStep>,
    /// Step at which each skeleton vertex was added.
    pub vertex_era: BTreeMap<VertexId, usize>,
    /// For vertices of era >= 1: the original vertex (one level up) whose
    /// fibre block introduced them.
    pub vertex_block: BTreeMap<VertexId, VertexId>,
    /// Step at which each skeleton edge was added.
    pub edge_era: BTreeMap<EdgeId, usize>,
    pub edge_kind: BTreeMap<EdgeId, SkeletonEdgeKind>,
    pub truncations: Vec<TruncationStep>,
}

/// Orients the lower placement list of a persistent edge to match the
/// stored endpoint order of its upper copy.
fn oriented_lower_placements(
    upper_ends: (&VertexId, &VertexId),
    lower_ends: (&VertexId, &VertexId),
    bond: &BondingMap,
    lower_list: &[VertexId],
) -> Result<Vec<VertexId>> {
    let ix = bond
        .vertex_image(upper_ends.0)
        .ok_or_else(|| Error::InvalidSystem(format!("unmapped vertex {}", upper_ends.0)))?;
    let iy = bond
        .vertex_image(upper_ends.1)
        .ok_or_else(|| Error::InvalidSystem(format!("unmapped vertex {}", upper_ends.1)))?;
    if (ix, iy) == lower_ends {
        Ok(lower_list.to_vec())
    } else if (iy, ix) == lower_ends {
        Ok(lower_list.iter().rev().cloned().collect())
    } else {
        Err(Error::InvalidSystem(
            "persistent edge endpoints do not project onto its lower endpoints".into(),
        ))
    }
}

fn ambient_of(
    g: &MultiGraph,
    skeleton: &MultiGraph,
    placements: &BTreeMap<EdgeId, Vec<VertexId>>,
) -> MultiGraph {
    let mut h = skeleton.clone();
    for v in g.vertices() {
        h.add_vertex(v.clone());
    }
    for (e, (a, b)) in g.edges() {
        let ps = &placements[e];
        h.add_edge(EdgeId::new(format!("s.{e}.a")), a.clone(), ps[0].clone());
        h.add_edge(
            EdgeId::new(format!("s.{e}.b")),
            ps[ps.len() - 1].clone(),
            b.clone(),
        );
    }
    h
}

/// Checks the step invariants: the skeleton is connected and disjoint from
/// the level vertices, every skeleton vertex sits on exactly one level edge,
/// every level edge carries a path of connectors whose end vertices are new
/// at this step, and no edge of the skeleton spans more than one era.
fn verify_step(
    n: usize,
    g: &MultiGraph,
    skeleton: &MultiGraph,
    placements: &BTreeMap<EdgeId, Vec<VertexId>>,
    vertex_era: &BTreeMap<VertexId, usize>,
    edge_kind: &BTreeMap<EdgeId, SkeletonEdgeKind>,
) -> Result<()> {
    let fail = |what: &str| {
        Err(Error::ConstructionInvariantViolated(format!(
            "step {n}: {what}"
        )))
    };
    if skeleton.vertex_count() == 0 {
        if g.edge_count() != 0 {
            return fail("empty skeleton over a level with edges");
        }
        return Ok(());
    }
    if !skeleton.is_connected() {
        return fail("skeleton is disconnected");
    }
    for v in g.vertices() {
        if skeleton.contains_vertex(v) {
            return fail(&format!("level vertex {v} lies in the skeleton"));
        }
    }
    let mut seen: BTreeMap<&VertexId, usize> = BTreeMap::new();
    for ps in placements.values() {
        for p in ps {
            *seen.entry(p).or_insert(0) += 1;
        }
    }
    for v in skeleton.vertices() {
        if seen.get(v).copied() != Some(1) {
            return fail(&format!(
                "skeleton vertex {v} does not lie on exactly one edge"
            ));
        }
    }
    for (e, _) in g.edges() {
        let ps = match placements.get(e) {
            Some(ps) if !ps.is_empty() => ps,
            _ => return fail(&format!("edge {e} carries no skeleton vertices")),
        };
        for endpoint in [&ps[0], &ps[ps.len() - 1]] {
            if vertex_era.get(endpoint).copied() != Some(n) {
                return fail(&format!("path endpoint {endpoint} on {e} is not new"));
            }
        }
        for w in ps.windows(2) {
            let joined = skeleton.edges().any(|(id, (a, b))| {
                edge_kind.get(id) == Some(&SkeletonEdgeKind::Connector)
                    && ((a == &w[0] && b == &w[1]) || (a == &w[1] && b == &w[0]))
            });
            if !joined {
                return fail(&format!("placements on {e} are not joined by a connector"));
            }
        }
    }
    for (id, (a, b)) in skeleton.edges() {
        let (ea, eb) = (vertex_era[a], vertex_era[b]);
        if ea.abs_diff(eb) > 1 {
            return fail(&format!("edge {id} spans eras {ea} and {eb}"));
        }
    }
    Ok(())
}

/// Runs the level recursion over `sys` down to `depth`, verifying the
/// construction invariants at every step, and derives the truncation levels
/// with their isomorphisms and witness subgraphs.
pub fn build_embedding(sys: &InverseSystem, depth: usize) -> Result<EmbeddingTrace> {
    let depth = depth.min(sys.depth());
    let report = sys.validate();
    if !report.is_valid() {
        return Err(Error::PreconditionViolated(format!(
            "system does not validate: {}",
            report.first_violation().unwrap_or_default()
        )));
    }
    for (n, g) in sys.levels.iter().take(depth + 1).enumerate() {
        if g.has_loops() {
            return Err(Error::SubdivideFirst(format!("level {n} has a loop")));
        }
    }
    if sys.level(depth)?.edge_count() == 0 {
        return Err(Error::InvalidInput(
            "the system has no edges to embed".into(),
        ));
    }

    let mut skeleton = MultiGraph::new();
    let mut vertex_era: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut vertex_block: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut edge_era: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut edge_kind: BTreeMap<EdgeId, SkeletonEdgeKind> = BTreeMap::new();
    let mut steps: Vec<EmbedStep> = Vec::new();

    // Base step: midpoints and line-graph edges of the coarsest level.
    let g0 = sys.level(0)?;
    let mut placements: BTreeMap<EdgeId, Vec<VertexId>> = BTreeMap::new();
    for (e, _) in g0.edges() {
        let m = VertexId::new(format!("m0.{e}"));
        skeleton.add_vertex(m.clone());
        vertex_era.insert(m.clone(), 0);
        placements.insert(e.clone(), vec![m]);
    }
    for v in g0.vertices() {
        let inc = g0.incident_edges(v);
        for i in 0..inc.len() {
            for j in i + 1..inc.len() {
                let (e1, e2) = (&inc[i].0, &inc[j].0);
                let id = EdgeId::new(format!("l0.{e1}.{e2}@{v}"));
                skeleton.add_edge(
                    id.clone(),
                    placements[e1][0].clone(),
                    placements[e2][0].clone(),
                );
                edge_era.insert(id.clone(), 0);
                edge_kind.insert(id, SkeletonEdgeKind::Line);
            }
        }
    }
    verify_step(0, g0, &skeleton, &placements, &vertex_era, &edge_kind)?;
    steps.push(EmbedStep {
        level: 0,
        skeleton: skeleton.clone(),
        ambient: ambient_of(g0, &skeleton, &placements),
        placements: placements.clone(),
    });

    // Recursion: pull the skeleton back and extend it by the line graphs of
    // the closed vertex fibres.
    for n in 0..depth {
        let era = n + 1;
        let bond = sys.bond(n)?;
        let g_lo = sys.level(n)?;
        let g_up = sys.level(era)?;
        let mut next_placements: BTreeMap<EdgeId, Vec<VertexId>> = BTreeMap::new();

        // Oriented lower placement list per persistent upper edge.
        let mut oriented: BTreeMap<EdgeId, Vec<VertexId>> = BTreeMap::new();
        for (e, (x, y)) in g_up.edges() {
            if let Some(EdgeImage::Edge(le)) = bond.edge_map.get(e) {
                let lower_ends = g_lo
                    .ends(le)
                    .ok_or_else(|| Error::InvalidSystem(format!("missing lower edge {le}")))?;
                let list = oriented_lower_placements((x, y), lower_ends, bond, &placements[le])?;
                oriented.insert(e.clone(), list);
            }
        }

        for v in g_lo.vertices() {
            // The closed fibre of v: the fibre vertices, the edges contracted
            // onto v, and a stub of every persistent edge end attached at v,
            // reaching the nearest skeleton vertex on that edge.
            let mut kv = MultiGraph::new();
            for u in bond.vertex_fiber(v) {
                kv.add_vertex(u);
            }
            // Kv edge -> (its midpoint, and for stubs the attachment point
            // plus the upper edge and side it belongs to).
            let mut mids: BTreeMap<EdgeId, VertexId> = BTreeMap::new();
            let mut stubs: Vec<(EdgeId, VertexId, EdgeId, char)> = Vec::new();
            for c in bond.contracted_edges_at(v) {
                let (a, b) = g_up
                    .ends(&c)
                    .ok_or_else(|| Error::InvalidSystem(format!("missing edge {c}")))?;
                kv.add_edge(c.clone(), a.clone(), b.clone());
                mids.insert(c.clone(), VertexId::new(format!("m{era}.{c}")));
            }
            for (e, list) in &oriented {
                let (x, y) = g_up.ends(e).expect("persistent edge present");
                for (end, side, p) in [(x, 'a', &list[0]), (y, 'b', &list[list.len() - 1])] {
                    if bond.vertex_image(end) == Some(v) {
                        let sid = EdgeId::new(format!("{e}.stub.{side}"));
                        kv.add_edge(sid.clone(), end.clone(), p.clone());
                        mids.insert(sid.clone(), VertexId::new(format!("m{era}.{e}.{side}")));
                        stubs.push((sid, p.clone(), e.clone(), side));
                    }
                }
            }
            if kv.edge_count() > 0 && !kv.is_connected() {
                return Err(Error::ConstructionInvariantViolated(format!(
                    "step {era}: closed fibre of {v} is disconnected"
                )));
            }
            for m in mids.values() {
                skeleton.add_vertex(m.clone());
                vertex_era.insert(m.clone(), era);
                vertex_block.insert(m.clone(), v.clone());
            }
            // Line-graph edges of the closed fibre.
            for u in kv.vertex_set().clone() {
                let inc = kv.incident_edges(&u);
                for i in 0..inc.len() {
                    for j in i + 1..inc.len() {
                        let (k1, k2) = (&inc[i].0, &inc[j].0);
                        let id = EdgeId::new(format!("l{era}.{k1}.{k2}@{u}"));
                        skeleton.add_edge(id.clone(), mids[k1].clone(), mids[k2].clone());
                        edge_era.insert(id.clone(), era);
                        edge_kind.insert(id, SkeletonEdgeKind::Line);
                    }
                }
            }
            // Connectors from the stub midpoints to the inherited path
            // endpoints; each runs inside its upper edge.
            for (sid, p, e, side) in &stubs {
                let id = EdgeId::new(format!("cn{era}.{e}.{side}"));
                skeleton.add_edge(id.clone(), mids[sid].clone(), p.clone());
                edge_era.insert(id.clone(), era);
                edge_kind.insert(id, SkeletonEdgeKind::Connector);
            }
            for c in bond.contracted_edges_at(v) {
                next_placements.insert(c.clone(), vec![mids[&c].clone()]);
            }
        }
        for (e, list) in oriented {
            let mut ps = vec![VertexId::new(format!("m{era}.{e}.a"))];
            ps.extend(list);
            ps.push(VertexId::new(format!("m{era}.{e}.b")));
            next_placements.insert(e, ps);
        }
        placements = next_placements;
        verify_step(era, g_up, &skeleton, &placements, &vertex_era, &edge_kind)?;
        steps.push(EmbedStep {
            level: era,
            skeleton: skeleton.clone(),
            ambient: ambient_of(g_up, &skeleton, &placements),
            placements: placements.clone(),
        });
    }

    let mut trace = EmbeddingTrace {
        steps,
        vertex_era,
        vertex_block,
        edge_era,
        edge_kind,
        truncations: Vec::new(),
    };
    build_truncations(sys, depth, &mut trace)?;
    Ok(trace)
}

/// Image of a level-`k` vertex at level `n <= k` under the composed bonds.
fn ancestor(sys: &InverseSystem, k: usize, n: usize, w: &VertexId) -> Result<VertexId> {
    let mut cur = w.clone();
    for m in (n..k).rev() {
        cur = sys.bonds[m]
            .vertex_image(&cur)
            .ok_or_else(|| Error::InvalidSystem(format!("unmapped vertex {cur}")))?
            .clone();
    }
    Ok(cur)
}

fn dummy_name(v: &VertexId) -> VertexId {
    VertexId::new(format!("end.{v}"))
}

/// For every level `n < depth`, contracts each component of the deepest
/// skeleton not yet built at step `n` to a dummy vertex, checks that the
/// components are in bijection with the level-`n` vertices, that the result
/// is isomorphic to the ambient graph of step `n`, and that the connector
/// edges realize the level graph as a subdivision.
fn build_truncations(sys: &InverseSystem, depth: usize, trace: &mut EmbeddingTrace) -> Result<()> {
    let deep_skeleton = trace.steps[depth].skeleton.clone();
    for n in 0..depth {
        let fail = |what: String| {
            Err(Error::ConstructionInvariantViolated(format!(
                "truncation {n}: {what}"
            )))
        };
        let g_n = sys.level(n)?;

        // Components of the not-yet-built part, predicted by block ancestry.
        let mut induced = MultiGraph::new();
        let mut predicted: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for u in deep_skeleton.vertices() {
            let era = trace.vertex_era[u];
            if era <= n {
                continue;
            }
            induced.add_vertex(u.clone());
            let owner = ancestor(sys, era - 1, n, &trace.vertex_block[u])?;
            predicted.entry(owner).or_default().insert(u.clone());
        }
        for (id, (a, b)) in deep_skeleton.edges() {
            if induced.contains_vertex(a) && induced.contains_vertex(b) {
                induced.add_edge(id.clone(), a.clone(), b.clone());
            }
        }
        let found: BTreeSet<BTreeSet<VertexId>> = induced.components().into_iter().collect();
        let want: BTreeSet<BTreeSet<VertexId>> = predicted.values().cloned().collect();
        if found != want {
            return fail("deep components do not match the vertex fibre blocks".into());
        }
        for v in predicted.keys() {
            if !g_n.contains_vertex(v) {
                return fail(format!("block owner {v} is not a level vertex"));
            }
        }

        // The truncation graph: the step-n skeleton, one dummy per
        // component, and the step-(n+1) connectors as boundary edges.
        let mut l = trace.steps[n].skeleton.clone();
        let mut dummies: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for v in predicted.keys() {
            let d = dummy_name(v);
            if l.contains_vertex(&d) {
                return fail(format!("dummy name {d} collides with a skeleton vertex"));
            }
            l.add_vertex(d.clone());
            dummies.insert(v.clone(), d);
        }
        for (id, (a, b)) in deep_skeleton.edges() {
            let a_in = trace.vertex_era[a] <= n;
            let b_in = trace.vertex_era[b] <= n;
            if a_in == b_in {
                continue; // inner edges are in the skeleton copy; deep edges vanish
            }
            let (shallow, deep) = if a_in { (a, b) } else { (b, a) };
            if trace.edge_era[id] != n + 1 || trace.edge_kind[id] != SkeletonEdgeKind::Connector {
                return fail(format!("unexpected boundary edge {id}"));
            }
            let owner = trace.vertex_block[deep].clone();
            l.add_edge(id.clone(), shallow.clone(), dummies[&owner].clone());
        }

        // Isomorphism onto the ambient graph of step n.
        let ambient = &trace.steps[n].ambient;
        let mut phi: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for u in ambient.vertices() {
            let image = if trace.vertex_era.contains_key(u) {
                u.clone()
            } else {
                match dummies.get(u) {
                    Some(d) => d.clone(),
                    None => return fail(format!("level vertex {u} has no dummy")),
                }
            };
            phi.insert(u.clone(), image);
        }
        if phi.len() != l.vertex_count() || ambient.edge_count() != l.edge_count() {
            return fail("truncation and ambient graph differ in size".into());
        }
        let pair = |g: &MultiGraph, map: Option<&BTreeMap<VertexId, VertexId>>| {
            let mut pairs: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
            for (_, (a, b)) in g.edges() {
                let (a, b) = match map {
                    Some(m) => (m[a].clone(), m[b].clone()),
                    None => (a.clone(), b.clone()),
                };
                let key = if a <= b { (a, b) } else { (b, a) };
                *pairs.entry(key).or_insert(0) += 1;
            }
            pairs
        };
        if pair(ambient, Some(&phi)) != pair(&l, None) {
            return fail("truncation is not isomorphic to the ambient graph".into());
        }

        // Witness subgraph: every level edge becomes a dummy-to-dummy path
        // of connector edges through its placements.
        let witness_edges: BTreeSet<EdgeId> = l
            .edge_ids()
            .filter(|e| trace.edge_kind.get(e) == Some(&SkeletonEdgeKind::Connector))
            .cloned()
            .collect();
        for (e, (a, b)) in g_n.edges() {
            let mut walk = vec![dummies[a].clone()];
            walk.extend(trace.steps[n].placements[e].iter().cloned());
            walk.push(dummies[b].clone());
            for w in walk.windows(2) {
                let joined = l.edges().any(|(id, (x, y))| {
                    witness_edges.contains(id)
                        && ((x == &w[0] && y == &w[1]) || (x == &w[1] && y == &w[0]))
                });
                if !joined {
                    return fail(format!("witness path for {e} is broken at {}", w[0]));
                }
            }
        }

        // Commuting square on dummies: each deep component refines the one
        // of its image a level down.
        if n > 0 {
            let bond = sys.bond(n - 1)?;
            let below = &trace.truncations[n - 1];
            for (w, members) in &predicted {
                let img = bond
                    .vertex_image(w)
                    .ok_or_else(|| Error::InvalidSystem(format!("unmapped vertex {w}")))?;
                let lower_members = match below.components.get(img) {
                    Some(s) => s,
                    None => return fail(format!("no lower component for {img}")),
                };
                if !members.is_subset(lower_members) {
                    return fail(format!("component of {w} does not refine that of {img}"));
                }
            }
        }

        trace.truncations.push(TruncationStep {
            level: n,
            graph: l,
            dummies,
            components: predicted,
            phi,
            witness_edges,
        });
    }
    Ok(())
}

/// Assembles the truncation levels of a trace into an inverse system: the
/// bonds send shared vertices and edges to themselves, fresh skeleton
/// vertices and dummies to the dummy of their block, and everything that
/// disappears to the vertex it is contracted onto. The result is validated
/// and the witness subgraphs are checked to form a subsystem.
pub fn freudenthal_truncations(trace: &EmbeddingTrace, depth: usize) -> Result<InverseSystem> {
    let take = (depth + 1).min(trace.truncations.len());
    if take == 0 {
        return Err(Error::InvalidInput(
            "the trace has no truncation levels; build the embedding with depth >= 1".into(),
        ));
    }
    let truncs = &trace.truncations[..take];
    let mut levels = Vec::with_capacity(take);
    let mut bonds = Vec::with_capacity(take.saturating_sub(1));
    levels.push(truncs[0].graph.clone());
    for n in 0..take - 1 {
        let (lower, upper) = (&truncs[n], &truncs[n + 1]);
        // Reverse lookups: dummy -> original, deep member -> lower dummy.
        let upper_original: BTreeMap<&VertexId, &VertexId> =
            upper.dummies.iter().map(|(v, d)| (d, v)).collect();
        let mut member_dummy: BTreeMap<&VertexId, &VertexId> = BTreeMap::new();
        for (v, members) in &lower.components {
            for u in members {
                member_dummy.insert(u, &lower.dummies[v]);
            }
        }
        let mut bond = BondingMap::default();
        for u in upper.graph.vertices() {
            let image = if lower.graph.contains_vertex(u) {
                u.clone()
            } else if let Some(v) = upper_original.get(u) {
                // A dummy one level up contracts into the dummy whose
                // component contains its component.
                let member = upper.components[*v].iter().next().ok_or_else(|| {
                    Error::ConstructionInvariantViolated(format!("empty component for {v}"))
                })?;
                (*member_dummy.get(member).ok_or_else(|| {
                    Error::ConstructionInvariantViolated(format!("{member} not in a component"))
                })?)
                .clone()
            } else {
                // A skeleton vertex fresh at step n+1.
                (*member_dummy.get(u).ok_or_else(|| {
                    Error::ConstructionInvariantViolated(format!("{u} not in a component"))
                })?)
                .clone()
            };
            bond.vertex_map.insert(u.clone(), image);
        }
        for e in upper.graph.edge_ids() {
            if lower.graph.contains_edge(e) {
                bond.edge_map.insert(e.clone(), EdgeImage::Edge(e.clone()));
            } else {
                let (a, b) = upper.graph.ends(e).expect("edge present");
                let (ia, ib) = (&bond.vertex_map[a], &bond.vertex_map[b]);
                if ia != ib {
                    return Err(Error::ConstructionInvariantViolated(format!(
                        "edge {e} would contract across {ia} and {ib}"
                    )));
                }
                bond.edge_map
                    .insert(e.clone(), EdgeImage::Vertex { vertex: ia.clone() });
            }
        }
        // Witness subsystem: the witness vertices a level up cover every
        // vertex below.
        let images: BTreeSet<&VertexId> = bond.vertex_map.values().collect();
        for v in lower.graph.vertices() {
            if !images.contains(v) {
                return Err(Error::ConstructionInvariantViolated(format!(
                    "witness vertex {v} is not covered from above"
                )));
            }
        }
        levels.push(upper.graph.clone());
        bonds.push(bond);
    }
    let sys = InverseSystem { levels, bonds };
    let report = sys.validate();
    if !report.is_valid() {
        return Err(Error::ConstructionInvariantViolated(format!(
            "truncation system does not validate: {}",
            report.first_violation().unwrap_or_default()
        )));
    }
    Ok(sys)
}

impl EmbeddingTrace {
    /// DOT rendering of the ambient graph at a step: level vertices black,
    /// inherited skeleton red, fresh skeleton blue; subdivision segments
    /// black, line edges of the newest era blue, fresh connectors green,
    /// older skeleton edges red.
    pub fn ambient_dot(&self, level: usize) -> Result<String> {
        let step = self
            .steps
            .get(level)
            .ok_or_else(|| Error::NotFound(format!("embedding step {level}")))?;
        let mut out = format!("graph ambient_{level} {{\n");
        for v in step.ambient.vertices() {
            let color = match self.vertex_era.get(v) {
                None => "black",
                Some(&e) if e == level => "blue",
                Some(_) => "red",
            };
            out.push_str(&format!("  \"{v}\" [color={color}];\n"));
        }
        for (id, (a, b)) in step.ambient.edges() {
            let color = match (self.edge_kind.get(id), self.edge_era.get(id)) {
                (None, _) => "black",
                (Some(SkeletonEdgeKind::Connector), Some(&e)) if e == level => "green",
                (Some(SkeletonEdgeKind::Line), Some(&e)) if e == level => "blue",
                _ => "red",
            };
            out.push_str(&format!(
                "  \"{a}\" -- \"{b}\" [label=\"{id}\", color={color}];\n"
            ));
        }
        out.push_str("}\n");
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{
        figure_one_system, generate, subdivide_loops, BaseGraph, GeneratorKind, GeneratorSpec,
    };
    use crate::multigraph::{c4, graph_from, triangle};

    #[test]
    fn star_counts_match_the_small_graphs() {
        let star = star_operator(&c4()).unwrap();
        assert_eq!(star.graph.vertex_count(), 8);
        assert_eq!(star.graph.edge_count(), 12);
        assert_eq!(star.line_edges.len(), 4);

        let star = star_operator(&triangle()).unwrap();
        assert_eq!(star.graph.vertex_count(), 6);
        assert_eq!(star.graph.edge_count(), 9);

        let single = graph_from(&[("e", "a", "b")]);
        let star = star_operator(&single).unwrap();
        assert_eq!(star.graph.vertex_count(), 3);
        assert_eq!(star.graph.edge_count(), 2);
        assert!(star.line_edges.is_empty());
    }

    #[test]
    fn star_counting_invariant_holds_on_random_graphs() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for extra in 0..6 {
            let g = crate::generators::random_multigraph(&mut rng, 6, extra);
            if g.has_loops() {
                continue;
            }
            let star = star_operator(&g).unwrap();
            assert_eq!(star.graph.vertex_count(), g.vertex_count() + g.edge_count());
            let line: usize = g
                .vertices()
                .map(|v| {
                    let d = g.incident_edges(v).len();
                    d * (d - 1) / 2
                })
                .sum();
            assert_eq!(star.graph.edge_count(), 2 * g.edge_count() + line);
            assert_eq!(star.line_edges.len(), line);
        }
    }

    #[test]
    fn star_rejects_loops() {
        let g = BaseGraph::FigureEight.graph();
        assert!(matches!(star_operator(&g), Err(Error::SubdivideFirst(_))));
    }

    #[test]
    fn figure_one_trace_matches_the_figure() {
        let sys = figure_one_system(1);
        let trace = build_embedding(&sys, 1).unwrap();

        // The base skeleton is the 4-cycle of edge midpoints.
        let f0 = &trace.steps[0].skeleton;
        assert_eq!(f0.vertex_count(), 4);
        assert_eq!(f0.edge_count(), 4);
        assert!(f0.vertices().all(|v| f0.degree(v).unwrap() == 2));
        assert!(f0.is_connected());

        // One step later: the inherited 4-cycle, a line-graph block per
        // original vertex (one edge for each degree-2 corner, a 5-vertex
        // block over the split vertex), and one connector per edge end.
        let f1 = &trace.steps[1].skeleton;
        assert_eq!(f1.vertex_count(), 15);
        assert_eq!(f1.edge_count(), 22);
        let connectors = f1
            .edge_ids()
            .filter(|e| trace.edge_kind[e] == SkeletonEdgeKind::Connector)
            .count();
        assert_eq!(connectors, 8);
    }

    #[test]
    fn figure_one_truncation_is_the_starred_base_level() {
        let sys = figure_one_system(1);
        let trace = build_embedding(&sys, 1).unwrap();
        assert_eq!(trace.truncations.len(), 1);
        let t0 = &trace.truncations[0];
        let dummy_names: Vec<&str> = t0.dummies.values().map(|d| d.as_str()).collect();
        assert_eq!(dummy_names, ["end.v", "end.x", "end.y", "end.z"]);
        // The truncation is isomorphic to the ambient base step, which is
        // the starred 4-cycle.
        assert_eq!(t0.graph.vertex_count(), 8);
        assert_eq!(t0.graph.edge_count(), 12);
        assert_eq!(t0.witness_edges.len(), 8);
    }

    #[test]
    fn constant_triangle_builds_and_truncations_stabilize() {
        let spec = GeneratorSpec::new(GeneratorKind::Constant(BaseGraph::Triangle), 3);
        let sys = generate(&spec).unwrap();
        let trace = build_embedding(&sys, 3).unwrap();
        assert_eq!(trace.steps.len(), 4);
        let truncs = freudenthal_truncations(&trace, 3).unwrap();
        assert!(truncs.validate().is_valid());
        // Dummy degrees reproduce the level degrees at every truncation.
        for (n, t) in trace.truncations.iter().enumerate() {
            for (v, d) in &t.dummies {
                assert_eq!(
                    t.graph.degree(d).unwrap(),
                    sys.level(n).unwrap().degree(v).unwrap()
                );
            }
        }
    }

    #[test]
    fn cbc_trace_passes_all_internal_checks() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::Cbc, 3)).unwrap();
        let trace = build_embedding(&sys, 3).unwrap();
        let truncs = freudenthal_truncations(&trace, 3).unwrap();
        assert_eq!(truncs.depth(), 2);
        assert!(truncs.validate().is_valid());
    }

    #[test]
    fn ladder_truncations_reproduce_level_degrees() {
        let sys = generate(&GeneratorSpec::new(GeneratorKind::Ladder, 3)).unwrap();
        let trace = build_embedding(&sys, 3).unwrap();
        freudenthal_truncations(&trace, 3).unwrap();
        for (n, t) in trace.truncations.iter().enumerate() {
            let g = sys.level(n).unwrap();
            assert_eq!(t.dummies.len(), g.vertex_count());
            for (v, d) in &t.dummies {
                assert_eq!(t.graph.degree(d).unwrap(), g.degree(v).unwrap());
            }
        }
    }

    #[test]
    fn edgeless_base_levels_are_handled() {
        // Both bouquets start from a single classless vertex with no edges;
        // the skeleton stays empty until edges appear.
        for kind in [GeneratorKind::Cbs, GeneratorKind::Hawaiian] {
            let sys = generate(&GeneratorSpec::new(kind.clone(), 3)).unwrap();
            let trace = build_embedding(&sys, 3).unwrap();
            assert_eq!(trace.steps[0].skeleton.vertex_count(), 0, "{kind:?}");
            let truncs = freudenthal_truncations(&trace, 3).unwrap();
            assert!(truncs.validate().is_valid(), "{kind:?}");
            // The base truncation is a single dummy, matching the base level.
            assert_eq!(truncs.level(0).unwrap().vertex_count(), 1, "{kind:?}");
            assert_eq!(truncs.level(0).unwrap().edge_count(), 0, "{kind:?}");
        }
    }

    #[test]
    fn loopy_system_is_rejected_until_subdivided() {
        let spec = GeneratorSpec::new(GeneratorKind::Constant(BaseGraph::FigureEight), 2);
        let sys = generate(&spec).unwrap();
        assert!(matches!(
            build_embedding(&sys, 2),
            Err(Error::SubdivideFirst(_))
        ));
        let smooth = subdivide_loops(&sys);
        let trace = build_embedding(&smooth, 2).unwrap();
        freudenthal_truncations(&trace, 2).unwrap();
    }

    #[test]
    fn ambient_dot_uses_the_color_tags() {
        let trace = build_embedding(&figure_one_system(1), 1).unwrap();
        let dot = trace.ambient_dot(1).unwrap();
        for color in ["black", "red", "blue", "green"] {
            assert!(dot.contains(color), "missing {color}");
        }
    }
}
