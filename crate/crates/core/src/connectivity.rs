//! The connectivity graph of a presentation and the horizontal-meridian
//! criterion.
//!
//! Cut the manifold along every level that carries an unnested saddle or an
//! external extremum. Vertices of the connectivity graph are the resulting
//! 3-dimensional pieces, which are exactly the worldlines of inside faces
//! between consecutive cut levels; edges are the cross-section components at
//! the cut levels themselves (with the critical point removed, so a face
//! born or dying at the cut contributes nothing). A Fox reimbedding with
//! every horizontal circle bounding a complementary meridian disk exists
//! exactly when this graph is a tree; when it is not, some cut-level
//! component is non-separating and an edge on a cycle witnesses it.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::sweep::{simulate, EventKind, Presentation, SimError, Trace};
use crate::sym::Sym;

/// A 3-dimensional piece: one inside face's worldline over a run of regular
/// gaps bounded by cut levels (or by the face's own birth or death).
#[derive(Clone, Debug, Serialize)]
pub struct GammaVertex {
    pub id: usize,
    pub face: Sym,
    /// First and last regular gap the piece crosses, inclusive.
    pub first_gap: usize,
    pub last_gap: usize,
}

/// A cross-section component at a cut level, joining the pieces just below
/// and just above it.
#[derive(Clone, Debug, Serialize)]
pub struct GammaEdge {
    pub below: usize,
    pub above: usize,
    pub cut: usize,
    pub face: Sym,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConnectivityGraph {
    pub vertices: Vec<GammaVertex>,
    pub edges: Vec<GammaEdge>,
    pub cut_levels: Vec<usize>,
    #[serde(skip)]
    by_gap: BTreeMap<(usize, Sym), usize>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectivityError {
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Build the connectivity graph from a simulated trace.
pub fn build_connectivity_graph(trace: &Trace) -> ConnectivityGraph {
    let n = trace.len();
    let mut vertices: Vec<GammaVertex> = Vec::new();
    let mut edges: Vec<GammaEdge> = Vec::new();
    let mut by_gap: BTreeMap<(usize, Sym), usize> = BTreeMap::new();
    let mut cut_levels = Vec::new();
    // Live worldline pieces: face name -> vertex id.
    let mut live: BTreeMap<Sym, usize> = BTreeMap::new();

    let new_vertex = |vertices: &mut Vec<GammaVertex>, face: &Sym, gap: usize| -> usize {
        let id = vertices.len();
        vertices.push(GammaVertex {
            id,
            face: face.clone(),
            first_gap: gap,
            last_gap: gap,
        });
        id
    };

    for ordinal in 1..=n {
        let class = trace.class(ordinal);
        let before = trace.state_at_gap(ordinal - 1);
        let after = trace.state_at_gap(ordinal);
        if !class.is_cut() {
            // Nested events never touch inside-face names; the worldlines
            // simply continue.
            for f in after.in_faces() {
                let id = live[&f];
                vertices[id].last_gap = ordinal;
            }
            for (key, _) in live.iter() {
                debug_assert!(after.has_face(key));
            }
            continue;
        }
        cut_levels.push(ordinal);
        // Every worldline crossing the cut is severed; faces born or dying
        // exactly here contribute no edge.
        let mut next_live: BTreeMap<Sym, usize> = BTreeMap::new();
        let straight_through = |f: &Sym,
                                    vertices: &mut Vec<GammaVertex>,
                                    edges: &mut Vec<GammaEdge>,
                                    next_live: &mut BTreeMap<Sym, usize>| {
            let old = live[f];
            let new = new_vertex(vertices, f, ordinal);
            edges.push(GammaEdge {
                below: old,
                above: new,
                cut: ordinal,
                face: f.clone(),
            });
            next_live.insert(f.clone(), new);
        };
        match &trace_event_kind(trace, ordinal) {
            EventKind::Birth { face, .. } => {
                for f in before.in_faces() {
                    straight_through(&f, &mut vertices, &mut edges, &mut next_live);
                }
                let id = new_vertex(&mut vertices, face, ordinal);
                next_live.insert(face.clone(), id);
            }
            EventKind::Death { circle } => {
                // Recover the dying face: the inside face of `before` missing
                // from `after`.
                let dying = before
                    .in_faces()
                    .into_iter()
                    .find(|f| !after.has_face(f))
                    .unwrap_or_else(|| {
                        // Internal max at a cut level cannot happen (it is not
                        // a cut); external max always removes an inside face.
                        unreachable!("external max at {ordinal} removes an inside face ({circle})")
                    });
                for f in before.in_faces() {
                    if f != dying {
                        straight_through(&f, &mut vertices, &mut edges, &mut next_live);
                    }
                }
            }
            EventKind::Merge { a, b, via, .. } => {
                let far_a = before.far_face(a, via).expect("valid trace");
                let far_b = before.far_face(b, via).expect("valid trace");
                // The fused face keeps far_a's name.
                let fused = new_vertex(&mut vertices, &far_a, ordinal);
                next_live.insert(far_a.clone(), fused);
                for side in [&far_a, &far_b] {
                    edges.push(GammaEdge {
                        below: live[side],
                        above: fused,
                        cut: ordinal,
                        face: side.clone(),
                    });
                }
                for f in before.in_faces() {
                    if f != far_a && f != far_b {
                        straight_through(&f, &mut vertices, &mut edges, &mut next_live);
                    }
                }
            }
            EventKind::Split {
                via,
                a: (_, fa),
                b: (_, fb),
                ..
            } => {
                let old = live[via];
                for child in [fa, fb] {
                    let id = new_vertex(&mut vertices, child, ordinal);
                    edges.push(GammaEdge {
                        below: old,
                        above: id,
                        cut: ordinal,
                        face: child.clone(),
                    });
                    next_live.insert(child.clone(), id);
                }
                for f in before.in_faces() {
                    if f != *via {
                        straight_through(&f, &mut vertices, &mut edges, &mut next_live);
                    }
                }
            }
        }
        live = next_live;
    }
    debug_assert!(live.is_empty() || trace.state_at_gap(n).in_face_count() > 0);

    for v in &vertices {
        for g in v.first_gap..=v.last_gap {
            by_gap.insert((g, v.face.clone()), v.id);
        }
    }
    ConnectivityGraph {
        vertices,
        edges,
        cut_levels,
        by_gap,
    }
}

fn trace_event_kind(trace: &Trace, ordinal: usize) -> EventKind {
    // Reconstructing the kind from states is possible but the trace owner
    // always has the presentation at hand; to keep the trace self-contained
    // we diff the states instead.
    let before = trace.state_at_gap(ordinal - 1);
    let after = trace.state_at_gap(ordinal);
    let gone_circles: Vec<Sym> = before
        .circles()
        .filter(|(c, _)| !after.has_circle(c))
        .map(|(c, _)| c.clone())
        .collect();
    let new_circles: Vec<Sym> = after
        .circles()
        .filter(|(c, _)| !before.has_circle(c))
        .map(|(c, _)| c.clone())
        .collect();
    match (gone_circles.len(), new_circles.len()) {
        (0, 1) => {
            let c = new_circles[0].clone();
            let (x, y) = after.circle_faces(&c).unwrap();
            let (host, face) = if before.has_face(x) { (x, y) } else { (y, x) };
            EventKind::Birth {
                host: host.clone(),
                circle: c.clone(),
                face: face.clone(),
            }
        }
        (1, 0) => EventKind::Death {
            circle: gone_circles[0].clone(),
        },
        (2, 1) => {
            let (a, b) = (gone_circles[0].clone(), gone_circles[1].clone());
            let c = new_circles[0].clone();
            let (x, y) = after.circle_faces(&c).unwrap();
            let via = if before.has_face(x) && before.face_circles(x).any(|cc| *cc == a) {
                x.clone()
            } else {
                y.clone()
            };
            // Order a/b so that the fused face is far(a): the fused face kept
            // its name, so far(a) must still exist after the event.
            let fa = before.far_face(&a, &via).unwrap();
            let (a, b) = if after.has_face(&fa) { (a, b) } else { (b, a) };
            EventKind::Merge { a, b, via, circle: c }
        }
        (1, 2) => {
            let c = gone_circles[0].clone();
            let ca = new_circles[0].clone();
            let cb = new_circles[1].clone();
            let via = before
                .circle_faces(&c)
                .map(|(x, y)| if after.has_face(x) { y.clone() } else { x.clone() })
                .unwrap();
            let pick_child = |cc: &Sym| {
                let (x, y) = after.circle_faces(cc).unwrap();
                if before.has_face(x) {
                    y.clone()
                } else {
                    x.clone()
                }
            };
            let fa = pick_child(&ca);
            let fb = pick_child(&cb);
            let side_a: Vec<Sym> = after
                .face_circles(&fa)
                .filter(|cc| **cc != ca && before.has_circle(cc))
                .cloned()
                .collect();
            EventKind::Split {
                circle: c,
                via,
                side_a,
                a: (ca, fa),
                b: (cb, fb),
            }
        }
        other => unreachable!("impossible circle delta {other:?}"),
    }
}

impl ConnectivityGraph {
    /// The vertex whose worldline crosses regular gap `g` as face `face`.
    pub fn vertex_at(&self, gap: usize, face: &Sym) -> Option<usize> {
        self.by_gap.get(&(gap, face.clone())).copied()
    }

    /// Connected components as lists of vertex ids.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.below), find(&mut parent, e.above));
            if a != b {
                parent[b] = a;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        groups.into_values().collect()
    }

    /// Graphviz rendering, vertices labelled with their slab gap ranges.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph gamma {\n");
        for v in &self.vertices {
            out.push_str(&format!(
                "  v{} [label=\"{} [{}..{}]\"];\n",
                v.id, v.face, v.first_gap, v.last_gap
            ));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -- v{} [label=\"cut {} ({})\"];\n",
                e.below, e.above, e.cut, e.face
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Witness for a failed tree criterion: an edge on a cycle, so a cut-level
/// component whose removal leaves its piece of the graph connected.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CycleWitness {
    pub cut: usize,
    pub face: Sym,
    pub below: usize,
    pub above: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub vertices: usize,
    pub edges: usize,
    pub tree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoxDecision {
    /// True when every component of the connectivity graph is a tree.
    #[serde(serialize_with = "yes_no")]
    pub verdict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<CycleWitness>,
    pub components: Vec<ComponentReport>,
}

fn yes_no<S: serde::Serializer>(v: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(if *v { "yes" } else { "no" })
}

/// Decide the tree criterion for a whole presentation.
pub fn fox_decision(p: &Presentation) -> Result<FoxDecision, ConnectivityError> {
    let trace = simulate(p)?;
    Ok(fox_decision_graph(&build_connectivity_graph(&trace)))
}

/// Decide the tree criterion on an already-built graph, reporting per
/// component and aggregating: yes exactly when every component is a tree.
pub fn fox_decision_graph(gamma: &ConnectivityGraph) -> FoxDecision {
    let comps = gamma.components();
    let mut reports = Vec::new();
    let mut witness = None;
    for comp in &comps {
        let vset: std::collections::BTreeSet<usize> = comp.iter().copied().collect();
        let edge_ids: Vec<usize> = gamma
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| vset.contains(&e.below))
            .map(|(i, _)| i)
            .collect();
        let tree_by_count = edge_ids.len() == comp.len() - 1;
        let tree_by_dfs = !has_cycle(gamma, comp, &edge_ids);
        assert_eq!(
            tree_by_count, tree_by_dfs,
            "edge arithmetic and cycle search must agree"
        );
        reports.push(ComponentReport {
            vertices: comp.len(),
            edges: edge_ids.len(),
            tree: tree_by_count,
        });
        if !tree_by_count && witness.is_none() {
            let spare = first_non_forest_edge(gamma, comp, &edge_ids);
            let e = &gamma.edges[spare];
            witness = Some(CycleWitness {
                cut: e.cut,
                face: e.face.clone(),
                below: e.below,
                above: e.above,
            });
        }
    }
    FoxDecision {
        verdict: reports.iter().all(|r| r.tree),
        witness,
        components: reports,
    }
}

fn has_cycle(gamma: &ConnectivityGraph, comp: &[usize], edge_ids: &[usize]) -> bool {
    // Undirected DFS cycle detection over a component.
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &ei in edge_ids {
        let e = &gamma.edges[ei];
        adj.entry(e.below).or_default().push((e.above, ei));
        adj.entry(e.above).or_default().push((e.below, ei));
    }
    let mut seen: std::collections::BTreeSet<usize> = Default::default();
    let start = comp[0];
    let mut stack: Vec<(usize, Option<usize>)> = vec![(start, None)];
    while let Some((v, via_edge)) = stack.pop() {
        if !seen.insert(v) {
            return true;
        }
        for &(w, ei) in adj.get(&v).into_iter().flatten() {
            if Some(ei) != via_edge && !seen.contains(&w) {
                stack.push((w, Some(ei)));
            } else if Some(ei) != via_edge && seen.contains(&w) {
                return true;
            }
        }
    }
    false
}

/// First edge, in construction order, outside some spanning forest of the
/// component. Deleting it cannot disconnect anything.
fn first_non_forest_edge(gamma: &ConnectivityGraph, comp: &[usize], edge_ids: &[usize]) -> usize {
    let mut parent: BTreeMap<usize, usize> = comp.iter().map(|&v| (v, v)).collect();
    fn find(parent: &mut BTreeMap<usize, usize>, mut x: usize) -> usize {
        while parent[&x] != x {
            let up = parent[&parent[&x]];
            parent.insert(x, up);
            x = up;
        }
        x
    }
    for &ei in edge_ids {
        let e = &gamma.edges[ei];
        let (a, b) = (find(&mut parent, e.below), find(&mut parent, e.above));
        if a == b {
            return ei;
        }
        parent.insert(b, a);
    }
    unreachable!("component with a cycle has a non-forest edge")
}

/// Independent check of the connected-cross-section property: cells are
/// (inside face, inter-event slab) pairs, linked across every nested event by
/// the face correspondence and across no cut. The resulting union-find
/// components must be exactly the sweep's worldline vertices, and no
/// component may meet a slab twice.
#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub cells: usize,
    pub components: usize,
    pub pass: bool,
    pub failures: Vec<String>,
}

pub fn cross_section_oracle(p: &Presentation) -> Result<OracleReport, ConnectivityError> {
    let trace = simulate(p)?;
    Ok(cross_section_oracle_trace(&trace))
}

pub fn cross_section_oracle_trace(trace: &Trace) -> OracleReport {
    let n = trace.len();
    let mut cells: Vec<(usize, Sym)> = Vec::new();
    let mut cell_id: BTreeMap<(usize, Sym), usize> = BTreeMap::new();
    for g in 0..=n {
        for f in trace.state_at_gap(g).in_faces() {
            let id = cells.len();
            cells.push((g, f.clone()));
            cell_id.insert((g, f), id);
        }
    }
    let mut parent: Vec<usize> = (0..cells.len()).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for ordinal in 1..=n {
        if trace.class(ordinal).is_cut() {
            continue;
        }
        // Nested events carry every inside face across unchanged; link the
        // cells on both sides of the event.
        let before = trace.state_at_gap(ordinal - 1);
        let after = trace.state_at_gap(ordinal);
        for f in before.in_faces() {
            assert!(
                after.has_face(&f),
                "nested event {ordinal} must preserve inside face {f}"
            );
            let a = cell_id[&(ordinal - 1, f.clone())];
            let b = cell_id[&(ordinal, f.clone())];
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[rb] = ra;
            }
        }
    }

    let mut failures = Vec::new();
    // (a) components agree with the sweep's worldline vertices.
    let gamma = build_connectivity_graph(trace);
    let mut root_to_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertex_to_root: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, (g, f)) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        match gamma.vertex_at(*g, f) {
            None => failures.push(format!("cell ({g},{f}) has no worldline vertex")),
            Some(v) => {
                if let Some(&v2) = root_to_vertex.get(&root) {
                    if v2 != v {
                        failures.push(format!(
                            "component of ({g},{f}) spans worldline vertices {v2} and {v}"
                        ));
                    }
                } else {
                    root_to_vertex.insert(root, v);
                }
                if let Some(&r2) = vertex_to_root.get(&v) {
                    if r2 != root {
                        failures.push(format!(
                            "worldline vertex {v} split across two oracle components"
                        ));
                    }
                } else {
                    vertex_to_root.insert(v, root);
                }
            }
        }
    }
    // (b) every component meets each slab in at most one cell.
    let mut seen: std::collections::BTreeSet<(usize, usize)> = Default::default();
    for (i, (g, f)) in cells.iter().enumerate() {
        let root = find(&mut parent, i);
        if !seen.insert((root, *g)) {
            failures.push(format!("component of ({g},{f}) meets slab {g} twice"));
        }
    }
    let roots: std::collections::BTreeSet<usize> =
        (0..cells.len()).map(|i| find(&mut parent, i)).collect();
    OracleReport {
        cells: cells.len(),
        components: roots.len(),
        pass: failures.is_empty(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::parse_presentation;

    pub(crate) const DONUT_FLAT: &str = "min c1 in f0 new f1\nsplit c1 thru f0 as c2:f2[] c3:f3\nmerge c2 c3 in f1 as c4\nmax c4\n";
    pub(crate) const DONUT_VERTICAL: &str = "min c1 in f0 new f1\nsplit c1 thru f1 as c2:f2[] c3:f3\nmerge c2 c3 in f0 as c4\nmax c4\n";
    pub(crate) const TWO_BALLS: &str =
        "min c1 in f0 new f1\nmin c2 in f0 new f2\nmerge c1 c2 in f0 as c3\nmax c3\n";

    fn gamma_of(src: &str) -> ConnectivityGraph {
        let p = parse_presentation("fixture", src).unwrap();
        build_connectivity_graph(&simulate(&p).unwrap())
    }

    fn degrees(g: &ConnectivityGraph) -> Vec<usize> {
        let mut d = vec![0usize; g.vertices.len()];
        for e in &g.edges {
            d[e.below] += 1;
            d[e.above] += 1;
        }
        d.sort();
        d
    }

    #[test]
    fn donut_flat_is_a_single_vertex() {
        let g = gamma_of(DONUT_FLAT);
        assert_eq!(g.vertices.len(), 1);
        assert_eq!(g.edges.len(), 0);
        assert_eq!(g.cut_levels, [1, 4]);
        let fox = fox_decision_graph(&g);
        assert!(fox.verdict);
        assert!(fox.witness.is_none());
    }

    #[test]
    fn two_balls_is_a_path() {
        let g = gamma_of(TWO_BALLS);
        assert_eq!(g.vertices.len(), 4);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(g.cut_levels, [1, 2, 3, 4]);
        assert_eq!(degrees(&g), [1, 1, 2, 2]);
        assert_eq!(g.components().len(), 1);
        assert!(fox_decision_graph(&g).verdict);
    }

    #[test]
    fn donut_vertical_is_a_four_cycle() {
        let g = gamma_of(DONUT_VERTICAL);
        assert_eq!(g.vertices.len(), 4);
        assert_eq!(g.edges.len(), 4);
        assert_eq!(degrees(&g), [2, 2, 2, 2]);
        assert_eq!(g.components().len(), 1);
        let fox = fox_decision_graph(&g);
        assert!(!fox.verdict);
        let w = fox.witness.expect("cycle witness");
        // Removing the witness edge keeps the graph connected.
        let mut trimmed = g.clone();
        let pos = trimmed
            .edges
            .iter()
            .position(|e| e.cut == w.cut && e.face == w.face && e.below == w.below)
            .unwrap();
        trimmed.edges.remove(pos);
        assert_eq!(trimmed.components().len(), 1);
    }

    #[test]
    fn edge_census_matches_face_counts_at_cuts() {
        for src in [DONUT_FLAT, DONUT_VERTICAL, TWO_BALLS] {
            let p = parse_presentation("fixture", src).unwrap();
            let t = simulate(&p).unwrap();
            let g = build_connectivity_graph(&t);
            for &cut in &g.cut_levels {
                let at_cut = g.edges.iter().filter(|e| e.cut == cut).count();
                let before = t.state_at_gap(cut - 1).in_face_count();
                let after = t.state_at_gap(cut).in_face_count();
                // An unnested saddle level has one component per face on its
                // bigger side; an external extremum level loses the face that
                // is born or dies right there.
                let expected = if t.class(cut).is_saddle() {
                    before.max(after)
                } else {
                    before.min(after)
                };
                assert_eq!(at_cut, expected, "cut {cut} in {src:?}");
            }
        }
    }

    #[test]
    fn oracle_agrees_on_fixtures() {
        for (src, comps) in [(DONUT_FLAT, 1), (DONUT_VERTICAL, 4), (TWO_BALLS, 4)] {
            let p = parse_presentation("fixture", src).unwrap();
            let r = cross_section_oracle(&p).unwrap();
            assert!(r.pass, "{:?}", r.failures);
            assert_eq!(r.components, comps);
        }
    }

    #[test]
    fn oracle_agrees_on_random_words() {
        use crate::sweep::{PresentationGen, PresentationGenConfig};
        let mut gen = PresentationGen::new(3);
        let cfg = PresentationGenConfig::default();
        for i in 0..300 {
            let p = gen.gen_presentation(&format!("w{i}"), &cfg);
            let r = cross_section_oracle(&p).unwrap();
            assert!(r.pass, "word {i}: {:?}", r.failures);
        }
    }
}
