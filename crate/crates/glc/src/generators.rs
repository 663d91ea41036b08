//! Generators: validated inverse systems for the worked examples
//! (ladder with diagonals, Cantor bouquet of semicircles and its doubled
//! variant, dyadic circle chain, Hawaiian earring, tangent circle chains),
//! plus constant systems, seeded random systems, and the add-edge /
//! subdivide-loops utilities.
//!
//! Naming conventions (ids are stable and lexicographically ordered):
//! * cbs/cbc: classes `c<w>` for binary words w over {L,R}; the semicircle
//!   spanning construction interval w is `a<w>` (doubled: `a<w>.t/.b`).
//! * xl_dyadic: gap classes `g<w>`; the circle splitting interval w gives
//!   parallel edges `d<w>.t/.b`.
//! * ladder: interior vertices `t<i>`/`b<i>`, dummy ends `endL`/`endR`;
//!   edges `tr<i>` (top rail i..i+1), `br<i>`, `rg<i>` (rung), `dg<i>`
//!   (diagonal b_i to t_{i-1}).
//! * hawaiian: base `b`, subdivision points `m<k>`; loop k is `lp<k>.a/.b`.
//! * tangent_chain: tangency vertices `t<k>`, limit class `lim`; circle k
//!   gives `ci<k>.a/.b` plus chord `ci<k>.c` when its pattern bit is 1.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::multigraph::{graph_from, EdgeId, MultiGraph, VertexId};
use crate::prosys::{BondingMap, EdgeImage, InverseSystem, VertexThread};

/// Named finite base graphs for `constant` systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseGraph {
    Triangle,
    Path,
    Parallel,
    FigureEight,
    C4,
}

impl BaseGraph {
    pub fn graph(self) -> MultiGraph {
        match self {
            BaseGraph::Triangle => crate::multigraph::triangle(),
            BaseGraph::Path => graph_from(&[("e1", "a", "b")]),
            BaseGraph::Parallel => graph_from(&[("e1", "a", "b"), ("e2", "a", "b")]),
            BaseGraph::FigureEight => graph_from(&[("l1", "a", "a"), ("l2", "a", "a")]),
            BaseGraph::C4 => crate::multigraph::c4(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "triangle" => BaseGraph::Triangle,
            "path" => BaseGraph::Path,
            "parallel" => BaseGraph::Parallel,
            "figure8" => BaseGraph::FigureEight,
            "c4" => BaseGraph::C4,
            other => return Err(Error::InvalidSpec(format!("unknown base graph {other}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorKind {
    Constant(BaseGraph),
    Ladder,
    Cbs,
    Cbc,
    XlDyadic,
    Hawaiian,
    TangentChain,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub depth: usize,
    /// Chord pattern for tangent_chain, one bit per circle (cyclic).
    pub pattern: Option<String>,
    /// Seed for the random generator.
    pub seed: Option<u64>,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, depth: usize) -> Self {
        GeneratorSpec {
            kind,
            depth,
            pattern: None,
            seed: None,
        }
    }
}

/// Assembles levels from per-level vertex/edge listings and derives the
/// bonds: a persistent edge is one whose id already exists a level down;
/// everything else contracts to the image of its endpoints.
fn assemble(
    depth: usize,
    vertices_at: impl Fn(usize) -> Vec<VertexId>,
    project: impl Fn(usize, &VertexId) -> VertexId,
    edges_at: impl Fn(usize) -> Vec<(EdgeId, VertexId, VertexId)>,
) -> InverseSystem {
    let mut levels = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let mut g = MultiGraph::new();
        for v in vertices_at(n) {
            g.add_vertex(v);
        }
        for (e, a, b) in edges_at(n) {
            g.add_edge(e, a, b);
        }
        levels.push(g);
    }
    let mut bonds = Vec::with_capacity(depth);
    for n in 0..depth {
        let (lower, upper) = (&levels[n], &levels[n + 1]);
        let mut bond = BondingMap::default();
        for v in upper.vertices() {
            bond.vertex_map.insert(v.clone(), project(n, v));
        }
        for (e, (a, _)) in upper.edges() {
            let img = if lower.contains_edge(e) {
                EdgeImage::Edge(e.clone())
            } else {
                EdgeImage::Vertex {
                    vertex: project(n, a),
                }
            };
            bond.edge_map.insert(e.clone(), img);
        }
        bonds.push(bond);
    }
    InverseSystem { levels, bonds }
}

fn binary_words(len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| [format!("{w}L"), format!("{w}R")])
            .collect();
    }
    out.sort();
    out
}

fn all_words_upto(len: usize) -> Vec<String> {
    let mut out = Vec::new();
    for k in 0..len {
        out.extend(binary_words(k));
    }
    out
}

/// Cantor bouquet of semicircles. Level-n classes are the 2^n depth-n
/// construction intervals; the semicircle over interval w spans its two
/// endpoint classes `w·L…L` and `w·R…R`.
fn cbs(depth: usize, doubled: bool) -> InverseSystem {
    let edge_ends = move |n: usize, w: &str| {
        let pad = n - w.len();
        let a = VertexId::new(format!("c{}{}", w, "L".repeat(pad)));
        let b = VertexId::new(format!("c{}{}", w, "R".repeat(pad)));
        (a, b)
    };
    assemble(
        depth,
        |n| {
            binary_words(n)
                .into_iter()
                .map(|w| VertexId::new(format!("c{w}")))
                .collect()
        },
        |_, v| {
            let s = v.as_str();
            VertexId::new(s[..s.len() - 1].to_string())
        },
        move |n| {
            let mut edges = Vec::new();
            for w in all_words_upto(n) {
                let (a, b) = edge_ends(n, &w);
                if doubled {
                    edges.push((EdgeId::new(format!("a{w}.b")), a.clone(), b.clone()));
                    edges.push((EdgeId::new(format!("a{w}.t")), a, b));
                } else {
                    edges.push((EdgeId::new(format!("a{w}")), a, b));
                }
            }
            edges
        },
    )
}

/// Chain of circles at dyadic points: level-n classes are the 2^n closed
/// gaps between the circles of denominator <= 2^n; each circle contributes
/// two parallel edges between the gaps flanking it.
fn xl_dyadic(depth: usize) -> InverseSystem {
    assemble(
        depth,
        |n| {
            binary_words(n)
                .into_iter()
                .map(|w| VertexId::new(format!("g{w}")))
                .collect()
        },
        |_, v| {
            let s = v.as_str();
            VertexId::new(s[..s.len() - 1].to_string())
        },
        |n| {
            let mut edges = Vec::new();
            for w in all_words_upto(n) {
                let pad = n - w.len() - 1;
                let a = VertexId::new(format!("g{}L{}", w, "R".repeat(pad)));
                let b = VertexId::new(format!("g{}R{}", w, "L".repeat(pad)));
                edges.push((EdgeId::new(format!("d{w}.b")), a.clone(), b.clone()));
                edges.push((EdgeId::new(format!("d{w}.t")), a, b));
            }
            edges
        },
    )
}

/// Two-way infinite ladder with single diagonals; level n resolves rungs
/// -n..n and contracts the two tails into dummy classes of degree 3.
fn ladder(depth: usize) -> InverseSystem {
    let t = |n: usize, i: i64| -> VertexId {
        let bound = n as i64;
        if i < -bound {
            VertexId::new("endL")
        } else if i > bound {
            VertexId::new("endR")
        } else {
            VertexId::new(format!("t{i}"))
        }
    };
    let b = |n: usize, i: i64| -> VertexId {
        let bound = n as i64;
        if i < -bound {
            VertexId::new("endL")
        } else if i > bound {
            VertexId::new("endR")
        } else {
            VertexId::new(format!("b{i}"))
        }
    };
    assemble(
        depth,
        |n| {
            let bound = n as i64;
            let mut vs = vec![VertexId::new("endL"), VertexId::new("endR")];
            for i in -bound..=bound {
                vs.push(VertexId::new(format!("t{i}")));
                vs.push(VertexId::new(format!("b{i}")));
            }
            vs
        },
        |n, v| {
            let s = v.as_str();
            if let Some(i) = s.strip_prefix('t').and_then(|x| x.parse::<i64>().ok()) {
                t(n, i)
            } else if let Some(i) = s.strip_prefix('b').and_then(|x| x.parse::<i64>().ok()) {
                b(n, i)
            } else {
                v.clone()
            }
        },
        move |n| {
            let bound = n as i64;
            let mut edges = Vec::new();
            for i in -(bound + 1)..=bound {
                edges.push((EdgeId::new(format!("tr{i}")), t(n, i), t(n, i + 1)));
                edges.push((EdgeId::new(format!("br{i}")), b(n, i), b(n, i + 1)));
            }
            for i in -bound..=bound {
                edges.push((EdgeId::new(format!("rg{i}")), t(n, i), b(n, i)));
            }
            for i in -bound..=(bound + 1) {
                edges.push((EdgeId::new(format!("dg{i}")), b(n, i), t(n, i - 1)));
            }
            edges
        },
    )
}

/// Hawaiian earring: the base class plus the n largest loops at level n,
/// each loop pre-subdivided once (so no stored loop edges).
fn hawaiian(depth: usize) -> InverseSystem {
    assemble(
        depth,
        |n| {
            let mut vs = vec![VertexId::new("b")];
            for k in 1..=n {
                vs.push(VertexId::new(format!("m{k}")));
            }
            vs
        },
        |n, v| match v
            .as_str()
            .strip_prefix('m')
            .and_then(|x| x.parse::<usize>().ok())
        {
            Some(k) if k > n => VertexId::new("b"),
            _ => v.clone(),
        },
        |n| {
            let mut edges = Vec::new();
            for k in 1..=n {
                let m = VertexId::new(format!("m{k}"));
                edges.push((
                    EdgeId::new(format!("lp{k}.a")),
                    VertexId::new("b"),
                    m.clone(),
                ));
                edges.push((EdgeId::new(format!("lp{k}.b")), VertexId::new("b"), m));
            }
            edges
        },
    )
}

/// Chain of pairwise tangent circles converging to a limit class; circle k
/// joins tangency t_{k-1} to t_k with two parallel edges plus a chord iff
/// its pattern bit is 1 (bits are read cyclically).
fn tangent_chain(depth: usize, pattern: &str) -> Result<InverseSystem> {
    if pattern.is_empty() || pattern.len() < depth {
        return Err(Error::InvalidSpec(format!(
            "pattern must have at least {depth} bits"
        )));
    }
    if pattern.bytes().any(|b| b != b'0' && b != b'1') {
        return Err(Error::InvalidSpec("pattern must be a bit string".into()));
    }
    let bits: Vec<bool> = pattern.bytes().map(|b| b == b'1').collect();
    let bit = move |k: usize| bits[(k - 1) % bits.len()]; // circle k, 1-based
    let vertex = |n: usize, k: usize| -> VertexId {
        if k > n {
            VertexId::new("lim")
        } else {
            VertexId::new(format!("t{k}"))
        }
    };
    Ok(assemble(
        depth,
        |n| {
            let mut vs = vec![VertexId::new("lim")];
            for k in 0..=n {
                vs.push(VertexId::new(format!("t{k}")));
            }
            vs
        },
        |n, v| match v
            .as_str()
            .strip_prefix('t')
            .and_then(|x| x.parse::<usize>().ok())
        {
            Some(k) if k > n => VertexId::new("lim"),
            _ => v.clone(),
        },
        move |n| {
            let mut edges = Vec::new();
            for k in 1..=(n + 1) {
                let (a, b) = (vertex(n, k - 1), vertex(n, k));
                edges.push((EdgeId::new(format!("ci{k}.a")), a.clone(), b.clone()));
                edges.push((EdgeId::new(format!("ci{k}.b")), a.clone(), b.clone()));
                if bit(k) {
                    edges.push((EdgeId::new(format!("ci{k}.c")), a, b));
                }
            }
            edges
        },
    ))
}

fn constant(base: &MultiGraph, depth: usize) -> InverseSystem {
    let levels = vec![base.clone(); depth + 1];
    let bonds = vec![BondingMap::identity(base); depth];
    InverseSystem { levels, bonds }
}

/// Random valid system: starts from a small parallel-edge graph and splits
/// one uniformly chosen vertex per level, reattaching its incidences at
/// random and joining the two halves by fresh contracted edges. Monotone,
/// simplicial bonds hold by construction; reproducible from the seed.
fn random_system(depth: usize, seed: u64) -> InverseSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g0 = MultiGraph::new();
    let m = 1 + rng.gen_range(0..3);
    for i in 0..m {
        g0.add_edge(
            EdgeId::new(format!("y{i}")),
            VertexId::new("x0"),
            VertexId::new("x1"),
        );
    }
    let mut levels = vec![g0];
    let mut bonds = Vec::new();
    for n in 0..depth {
        let lower = levels[n].clone();
        let verts: Vec<VertexId> = lower.vertices().cloned().collect();
        let split = verts[rng.gen_range(0..verts.len())].clone();
        let va = VertexId::new(format!("{}a", split.as_str()));
        let vb = VertexId::new(format!("{}b", split.as_str()));
        let mut upper = MultiGraph::new();
        let mut bond = BondingMap::default();
        for v in &verts {
            if v == &split {
                upper.add_vertex(va.clone());
                upper.add_vertex(vb.clone());
                bond.vertex_map.insert(va.clone(), split.clone());
                bond.vertex_map.insert(vb.clone(), split.clone());
            } else {
                upper.add_vertex(v.clone());
                bond.vertex_map.insert(v.clone(), v.clone());
            }
        }
        for (e, (x, y)) in lower.edges() {
            let lift = |end: &VertexId, rng: &mut ChaCha8Rng| -> VertexId {
                if end == &split {
                    if rng.gen_bool(0.5) {
                        va.clone()
                    } else {
                        vb.clone()
                    }
                } else {
                    end.clone()
                }
            };
            let (nx, ny) = (lift(x, &mut rng), lift(y, &mut rng));
            upper.add_edge(e.clone(), nx, ny);
            bond.edge_map.insert(e.clone(), EdgeImage::Edge(e.clone()));
        }
        let fresh = 1 + rng.gen_range(0..2);
        for i in 0..fresh {
            let id = EdgeId::new(format!("z{n}.{i}"));
            upper.add_edge(id.clone(), va.clone(), vb.clone());
            bond.edge_map.insert(
                id,
                EdgeImage::Vertex {
                    vertex: split.clone(),
                },
            );
        }
        levels.push(upper);
        bonds.push(bond);
    }
    InverseSystem { levels, bonds }
}

/// A standalone random connected multigraph (for fuzzing single-level
/// algorithms), reproducible from the rng state.
pub fn random_multigraph(rng: &mut ChaCha8Rng, nv: usize, extra_edges: usize) -> MultiGraph {
    let mut g = MultiGraph::new();
    let vs: Vec<VertexId> = (0..nv).map(|i| VertexId::new(format!("v{i:02}"))).collect();
    for v in &vs {
        g.add_vertex(v.clone());
    }
    // Spanning tree first so the graph is connected.
    for i in 1..nv {
        let j = rng.gen_range(0..i);
        g.add_edge(
            EdgeId::new(format!("e{i:03}")),
            vs[i].clone(),
            vs[j].clone(),
        );
    }
    for k in 0..extra_edges {
        let i = rng.gen_range(0..nv);
        let j = rng.gen_range(0..nv);
        g.add_edge(
            EdgeId::new(format!("x{k:03}")),
            vs[i].clone(),
            vs[j].clone(),
        );
    }
    g
}

pub fn generate(spec: &GeneratorSpec) -> Result<InverseSystem> {
    if spec.depth == 0 && !matches!(spec.kind, GeneratorKind::Constant(_)) {
        return Err(Error::InvalidSpec("depth must be at least 1".into()));
    }
    Ok(match &spec.kind {
        GeneratorKind::Constant(base) => constant(&base.graph(), spec.depth),
        GeneratorKind::Ladder => ladder(spec.depth),
        GeneratorKind::Cbs => cbs(spec.depth, false),
        GeneratorKind::Cbc => cbs(spec.depth, true),
        GeneratorKind::XlDyadic => xl_dyadic(spec.depth),
        GeneratorKind::Hawaiian => hawaiian(spec.depth),
        GeneratorKind::TangentChain => {
            let pattern = spec
                .pattern
                .as_deref()
                .ok_or_else(|| Error::InvalidSpec("tangent_chain needs --pattern".into()))?;
            tangent_chain(spec.depth, pattern)?
        }
        GeneratorKind::Random => random_system(spec.depth, spec.seed.unwrap_or(0)),
    })
}

/// The two-level system from the embedding construction's figure: a
/// 4-cycle whose vertex v is split into a triangle one level down the
/// chain, extended by identity bonds to the requested depth.
pub fn figure_one_system(depth: usize) -> InverseSystem {
    let g0 = graph_from(&[
        ("xy", "x", "y"),
        ("xz", "x", "z"),
        ("yv", "y", "v"),
        ("zv", "z", "v"),
    ]);
    let g1 = graph_from(&[
        ("xy", "x", "y"),
        ("xz", "x", "z"),
        ("yv", "y", "v2"),
        ("zv", "z", "v1"),
        ("vv12", "v1", "v2"),
        ("vv13", "v1", "v3"),
        ("vv23", "v2", "v3"),
    ]);
    let mut bond = BondingMap::default();
    for (u, d) in [
        ("x", "x"),
        ("y", "y"),
        ("z", "z"),
        ("v1", "v"),
        ("v2", "v"),
        ("v3", "v"),
    ] {
        bond.vertex_map.insert(VertexId::new(u), VertexId::new(d));
    }
    for e in ["xy", "xz", "yv", "zv"] {
        bond.edge_map
            .insert(EdgeId::new(e), EdgeImage::Edge(EdgeId::new(e)));
    }
    for e in ["vv12", "vv13", "vv23"] {
        bond.edge_map.insert(
            EdgeId::new(e),
            EdgeImage::Vertex {
                vertex: VertexId::new("v"),
            },
        );
    }
    let mut levels = vec![g0, g1.clone()];
    let mut bonds = vec![bond];
    while levels.len() <= depth {
        levels.push(g1.clone());
        bonds.push(BondingMap::identity(&g1));
    }
    InverseSystem { levels, bonds }
}

/// Adds one fresh persistent edge joining two distinct threads at every
/// level. At shallow levels where the threads coincide the edge is stored
/// as a loop (validate warns about it).
pub fn add_edge(sys: &InverseSystem, a: &VertexThread, b: &VertexThread) -> Result<InverseSystem> {
    sys.check_thread(a)?;
    sys.check_thread(b)?;
    if a == b {
        return Err(Error::WouldCreateLoop("threads are equal".into()));
    }
    let mut k = 0;
    let id = loop {
        let candidate = EdgeId::new(format!("aux{k}"));
        if !sys.levels.iter().any(|g| g.contains_edge(&candidate)) {
            break candidate;
        }
        k += 1;
    };
    let mut out = sys.clone();
    for (n, g) in out.levels.iter_mut().enumerate() {
        g.add_edge(id.clone(), a.vertices[n].clone(), b.vertices[n].clone());
    }
    for bond in out.bonds.iter_mut() {
        bond.edge_map
            .insert(id.clone(), EdgeImage::Edge(id.clone()));
    }
    Ok(out)
}

/// Replaces every edge that is a loop at some level by two half edges
/// through a fresh persistent vertex, at every level where the edge exists.
/// Loop-free systems are returned unchanged; Euler parities are unaffected.
pub fn subdivide_loops(sys: &InverseSystem) -> InverseSystem {
    let loopy: BTreeSet<EdgeId> = sys
        .levels
        .iter()
        .flat_map(|g| {
            g.edge_ids()
                .filter(|e| g.is_loop(e))
                .cloned()
                .collect::<Vec<_>>()
        })
        .collect();
    if loopy.is_empty() {
        return sys.clone();
    }
    let midpoint = |e: &EdgeId| VertexId::new(format!("w.{}", e.as_str()));
    let halves = |e: &EdgeId| {
        (
            EdgeId::new(format!("{}.s0", e.as_str())),
            EdgeId::new(format!("{}.s1", e.as_str())),
        )
    };
    let mut levels = Vec::with_capacity(sys.levels.len());
    for g in &sys.levels {
        let mut h = MultiGraph::new();
        for v in g.vertices() {
            h.add_vertex(v.clone());
        }
        for (e, (a, b)) in g.edges() {
            if loopy.contains(e) {
                let w = midpoint(e);
                let (s0, s1) = halves(e);
                h.add_edge(s0, a.clone(), w.clone());
                h.add_edge(s1, w, b.clone());
            } else {
                h.add_edge(e.clone(), a.clone(), b.clone());
            }
        }
        levels.push(h);
    }
    let mut bonds = Vec::with_capacity(sys.bonds.len());
    for (n, bond) in sys.bonds.iter().enumerate() {
        let (lower, upper) = (&sys.levels[n], &sys.levels[n + 1]);
        let mut nb = BondingMap {
            vertex_map: bond.vertex_map.clone(),
            edge_map: BTreeMap::new(),
        };
        for (e, img) in &bond.edge_map {
            if !loopy.contains(e) {
                nb.edge_map.insert(e.clone(), img.clone());
                continue;
            }
            let w = midpoint(e);
            let (s0, s1) = halves(e);
            match img {
                EdgeImage::Edge(_) => {
                    // The edge exists at both levels: halves persist and the
                    // midpoint maps to itself.
                    debug_assert!(lower.contains_edge(e) || lower.contains_vertex(&w));
                    nb.edge_map.insert(s0.clone(), EdgeImage::Edge(s0));
                    nb.edge_map.insert(s1.clone(), EdgeImage::Edge(s1));
                    nb.vertex_map.insert(w.clone(), w);
                }
                EdgeImage::Vertex { vertex } => {
                    // Below the edge's birth level everything collapses to
                    // the same class as before.
                    let _ = upper;
                    nb.edge_map.insert(
                        s0,
                        EdgeImage::Vertex {
                            vertex: vertex.clone(),
                        },
                    );
                    nb.edge_map.insert(
                        s1,
                        EdgeImage::Vertex {
                            vertex: vertex.clone(),
                        },
                    );
                    nb.vertex_map.insert(w, vertex.clone());
                }
            }
        }
        bonds.push(nb);
    }
    InverseSystem { levels, bonds }
}

impl InverseSystem {
    /// Thread through the vertex of this name at every level; panics if the
    /// name is not constant across levels (test/CLI convenience).
    pub fn thread_through_named(&self, name: &str) -> VertexThread {
        let t = VertexThread {
            vertices: (0..=self.depth()).map(|_| VertexId::new(name)).collect(),
        };
        self.check_thread(&t)
            .unwrap_or_else(|e| panic!("no constant thread named {name}: {e}"));
        t
    }
}
