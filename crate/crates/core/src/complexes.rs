//! Square complexes of dimension at most two.
//!
//! A square is a closed 4-dart path `[d0, d1, d2, d3]` in the 1-skeleton.
//! The corner at `src(d_i)` joins the ends `bar(d_{i-1})` and `d_i`, so the
//! link of a vertex has one vertex per dart leaving it and one edge per
//! square corner sitting at it.
//!
//! Hyperplane pathologies, for a hyperplane `H` (a class of edges under
//! the opposite-sides relation):
//! - self-intersecting: two consecutive sides of one square lie in `H`;
//! - one-sided: the sides cannot be oriented so that opposite sides of
//!   every square point the same way;
//! - directly self-osculating: two distinct darts of `H` leave one vertex,
//!   are not joined by a corner, and point to the same side of `H`;
//! - inter-osculating: `H` crosses `H'` in some square and also has darts
//!   leaving a common vertex that are not joined by a corner.
//!
//! A complex is special when no hyperplane has any of these.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    bar, dart, dart_edge, dart_forward, Dart, Edge, GraphMorphism, LabeledGraph, UnionFind,
};
use crate::words::{FreeWord, Letter};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SquareComplex {
    graph: LabeledGraph,
    squares: Vec<[Dart; 4]>,
}

/// Least of the eight rotations and reflections of a square boundary.
pub fn canonical_square(s: [Dart; 4]) -> [Dart; 4] {
    let rev = [bar(s[3]), bar(s[2]), bar(s[1]), bar(s[0])];
    let mut best = s;
    for base in [s, rev] {
        for k in 0..4 {
            let r = [
                base[k],
                base[(k + 1) % 4],
                base[(k + 2) % 4],
                base[(k + 3) % 4],
            ];
            best = best.min(r);
        }
    }
    best
}

impl SquareComplex {
    pub fn new(graph: LabeledGraph, squares: Vec<[Dart; 4]>) -> Result<Self> {
        let nd = 2 * graph.num_edges();
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(squares.len());
        for (i, s) in squares.into_iter().enumerate() {
            if s.iter().any(|&d| d >= nd) {
                return Err(Error::InvalidComplex(format!(
                    "square {i} uses an unknown edge"
                )));
            }
            for k in 0..4 {
                let (d, e) = (s[k], s[(k + 1) % 4]);
                if graph.dart_dst(d) != graph.dart_src(e) {
                    return Err(Error::InvalidComplex(format!(
                        "square {i} boundary is not a closed path"
                    )));
                }
                if e == bar(d) {
                    return Err(Error::InvalidComplex(format!(
                        "square {i} boundary backtracks"
                    )));
                }
            }
            if seen.insert(canonical_square(s)) {
                out.push(s);
            }
        }
        Ok(SquareComplex {
            graph,
            squares: out,
        })
    }

    pub fn from_graph(graph: LabeledGraph) -> Self {
        SquareComplex {
            graph,
            squares: Vec::new(),
        }
    }

    /// One vertex, one loop per generator, and one square per length-4 word.
    pub fn from_words(rank: usize, square_words: &[FreeWord]) -> Result<Self> {
        let graph = LabeledGraph::bouquet(rank);
        let mut squares = Vec::new();
        for w in square_words {
            if w.len() != 4 {
                return Err(Error::InvalidComplex(format!(
                    "square word of length {} is not 4",
                    w.len()
                )));
            }
            let mut s = [0; 4];
            for (k, l) in w.letters().iter().enumerate() {
                if l.generator() as usize >= rank {
                    return Err(Error::InvalidComplex(
                        "square word uses an unknown generator".into(),
                    ));
                }
                s[k] = dart(l.generator() as usize, !l.is_inverse());
            }
            squares.push(s);
        }
        Self::new(graph, squares)
    }

    pub fn graph(&self) -> &LabeledGraph {
        &self.graph
    }

    pub fn squares(&self) -> &[[Dart; 4]] {
        &self.squares
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    /// Darts leaving `v`, in dart order.
    pub fn ends_at(&self, v: usize) -> Vec<Dart> {
        let mut ends = self.graph.darts_at(v).to_vec();
        ends.sort_unstable();
        ends
    }

    pub fn vertex_link(&self, v: usize) -> Result<LinkGraph> {
        if v >= self.num_vertices() {
            return Err(Error::UnknownVertex(v));
        }
        let ends = self.ends_at(v);
        let mut edges = Vec::new();
        for (si, s) in self.squares.iter().enumerate() {
            for k in 0..4 {
                if self.graph.dart_src(s[k]) == v {
                    let a = bar(s[(k + 3) % 4]);
                    let b = s[k];
                    edges.push(LinkEdge {
                        a: a.min(b),
                        b: a.max(b),
                        square: si,
                        corner: k,
                    });
                }
            }
        }
        edges.sort();
        Ok(LinkGraph {
            vertex: v,
            ends,
            edges,
        })
    }

    pub fn check_npc(&self) -> NpcReport {
        let failures: Vec<NpcFailure> = (0..self.num_vertices())
            .into_par_iter()
            .flat_map_iter(|v| self.vertex_link(v).expect("vertex in range").defects())
            .collect();
        NpcReport {
            passed: failures.is_empty(),
            failures,
        }
    }

    pub fn hyperplanes(&self) -> Vec<Hyperplane> {
        let ne = self.num_edges();
        let mut uf = UnionFind::new(ne);
        for s in &self.squares {
            uf.union(dart_edge(s[0]), dart_edge(s[2]));
            uf.union(dart_edge(s[1]), dart_edge(s[3]));
        }
        let mut class_of = vec![usize::MAX; ne];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        let mut root_class = std::collections::HashMap::new();
        for e in 0..ne {
            let r = uf.find(e);
            let c = *root_class.entry(r).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            classes[c].push(e);
            class_of[e] = c;
        }

        // Co-orientation parity: sign[e] relative to the class root.
        let orient = self.coorientation();
        let links: Vec<LinkGraph> = (0..self.num_vertices())
            .map(|v| self.vertex_link(v).unwrap())
            .collect();

        let mut hs: Vec<Hyperplane> = classes
            .iter()
            .map(|edges| Hyperplane {
                edges: edges.clone(),
                carrier: Vec::new(),
                self_intersecting: false,
                one_sided: false,
                self_osculating: false,
                inter_osculating: false,
            })
            .collect();
        let mut crosses = BTreeSet::new();
        for (si, s) in self.squares.iter().enumerate() {
            let c = [0, 1, 2, 3].map(|k| class_of[dart_edge(s[k])]);
            for &x in &c {
                if hs[x].carrier.last() != Some(&si) {
                    hs[x].carrier.push(si);
                }
            }
            for k in 0..4 {
                let (x, y) = (c[k], c[(k + 1) % 4]);
                if x == y {
                    hs[x].self_intersecting = true;
                } else {
                    crosses.insert((x.min(y), x.max(y)));
                }
            }
        }
        for (e, o) in orient.iter().enumerate() {
            if o.is_none() {
                hs[class_of[e]].one_sided = true;
            }
        }
        let mut osculate = BTreeSet::new();
        for link in &links {
            for (i, &d) in link.ends.iter().enumerate() {
                for &d2 in &link.ends[i + 1..] {
                    if link.adjacent(d, d2) {
                        continue;
                    }
                    let (x, y) = (class_of[dart_edge(d)], class_of[dart_edge(d2)]);
                    if x == y {
                        if let (Some(a), Some(b)) = (orient[dart_edge(d)], orient[dart_edge(d2)]) {
                            let side = |d: Dart, s: bool| s == dart_forward(d);
                            if side(d, a) == side(d2, b) {
                                hs[x].self_osculating = true;
                            }
                        }
                    } else {
                        osculate.insert((x.min(y), x.max(y)));
                    }
                }
            }
        }
        for &(x, y) in crosses.intersection(&osculate) {
            hs[x].inter_osculating = true;
            hs[y].inter_osculating = true;
        }
        hs
    }

    /// Per edge, an orientation sign making opposite square sides parallel,
    /// or `None` on classes where none exists.
    fn coorientation(&self) -> Vec<Option<bool>> {
        let ne = self.num_edges();
        // Parity union-find: parity[e] relates e to its parent.
        let mut parent: Vec<usize> = (0..ne).collect();
        let mut parity = vec![false; ne];
        let mut bad = vec![false; ne];
        fn find(parent: &mut [usize], parity: &mut [bool], x: usize) -> (usize, bool) {
            let mut path = Vec::new();
            let mut cur = x;
            while parent[cur] != cur {
                path.push(cur);
                cur = parent[cur];
            }
            let root = cur;
            // Recompute parities from the top down.
            let mut acc = false;
            for &p in path.iter().rev() {
                acc ^= parity[p];
                parity[p] = acc;
                parent[p] = root;
            }
            (root, if path.is_empty() { false } else { parity[x] })
        }
        for s in &self.squares {
            for (d, e) in [(s[0], bar(s[2])), (s[1], bar(s[3]))] {
                // orient(d) == orient(e) where orient = sign(edge) xor !forward.
                let need = dart_forward(d) != dart_forward(e);
                let (ra, pa) = find(&mut parent, &mut parity, dart_edge(d));
                let (rb, pb) = find(&mut parent, &mut parity, dart_edge(e));
                if ra == rb {
                    if (pa ^ pb) != need {
                        bad[ra] = true;
                    }
                } else {
                    parent[rb] = ra;
                    parity[rb] = pa ^ pb ^ need;
                    bad[ra] |= bad[rb];
                }
            }
        }
        (0..ne)
            .map(|e| {
                let (r, p) = find(&mut parent, &mut parity, e);
                (!bad[r]).then_some(!p)
            })
            .collect()
    }

    pub fn specialness(&self) -> SpecialnessReport {
        let hs = self.hyperplanes();
        let failures: Vec<usize> = hs
            .iter()
            .enumerate()
            .filter(|(_, h)| !h.is_clean())
            .map(|(i, _)| i)
            .collect();
        SpecialnessReport {
            special: failures.is_empty(),
            hyperplanes: hs,
            failures,
        }
    }

    /// Splits every edge in two and every square in four. Edge `e` becomes
    /// `e` (first half, same label) and `E + e` (second half, label shifted
    /// by the label rank); square `s` side `k` gives a new edge from the
    /// side's midpoint to the square's centre.
    pub fn subdivide(&self) -> SquareComplex {
        let (nv, ne, ns) = (self.num_vertices(), self.num_edges(), self.squares.len());
        let r = self.graph.label_rank() as u32;
        let mid = |e: usize| nv + e;
        let centre = |s: usize| nv + ne + s;
        let mut edges = Vec::with_capacity(2 * ne + 4 * ns);
        for e in self.graph.edges() {
            let m = mid(edges.len());
            edges.push(Edge {
                src: e.src,
                dst: m,
                label: e.label,
            });
        }
        for (i, e) in self.graph.edges().iter().enumerate() {
            edges.push(Edge {
                src: mid(i),
                dst: e.dst,
                label: e.label + r,
            });
        }
        // Half `h` (0 = first along the dart) of dart `d`.
        let half = |d: Dart, h: usize| {
            let e = dart_edge(d);
            let fwd = dart_forward(d);
            let which = if fwd { h } else { 1 - h };
            dart(e + which * ne, fwd)
        };
        let mut squares = Vec::with_capacity(4 * ns);
        for (si, s) in self.squares.iter().enumerate() {
            let base = edges.len();
            for k in 0..4 {
                edges.push(Edge {
                    src: mid(dart_edge(s[k])),
                    dst: centre(si),
                    label: 2 * r + 4 * si as u32 + k as u32,
                });
            }
            for k in 0..4 {
                let prev = (k + 3) % 4;
                squares.push([
                    half(s[k], 0),
                    dart(base + k, true),
                    dart(base + prev, false),
                    half(s[prev], 1),
                ]);
            }
        }
        let graph = LabeledGraph::new(nv + ne + ns, edges, self.graph.basepoint())
            .expect("subdivision is well formed");
        SquareComplex::new(graph, squares).expect("subdivided squares are valid")
    }
}

/// The subdivided word: letter `x` becomes `x x̂` and `x⁻¹` becomes
/// `x̂⁻¹ x⁻¹`, where `x̂` is generator `x + rank`.
pub fn subdivide_word(w: &FreeWord, rank: usize) -> FreeWord {
    let r = rank as u32;
    let mut out = Vec::with_capacity(2 * w.len());
    for l in w.letters() {
        let hat = Letter::new(l.generator() + r, l.is_inverse());
        if l.is_inverse() {
            out.extend([hat, *l]);
        } else {
            out.extend([*l, hat]);
        }
    }
    FreeWord::new(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct LinkEdge {
    pub a: Dart,
    pub b: Dart,
    pub square: usize,
    pub corner: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkGraph {
    pub vertex: usize,
    /// Darts leaving the vertex.
    pub ends: Vec<Dart>,
    pub edges: Vec<LinkEdge>,
}

impl LinkGraph {
    pub fn adjacent(&self, x: Dart, y: Dart) -> bool {
        let (a, b) = (x.min(y), x.max(y));
        self.edges.iter().any(|e| e.a == a && e.b == b)
    }

    fn defects(&self) -> Vec<NpcFailure> {
        let mut out = Vec::new();
        let mut count: std::collections::BTreeMap<(Dart, Dart), usize> = Default::default();
        for e in &self.edges {
            *count.entry((e.a, e.b)).or_default() += 1;
        }
        for (&(a, b), &n) in &count {
            if a == b {
                out.push(NpcFailure {
                    vertex: self.vertex,
                    kind: NpcDefect::Loop,
                    ends: vec![a],
                });
            } else if n > 1 {
                out.push(NpcFailure {
                    vertex: self.vertex,
                    kind: NpcDefect::MultiEdge,
                    ends: vec![a, b],
                });
            }
        }
        let pairs: Vec<(Dart, Dart)> = count.keys().copied().filter(|(a, b)| a != b).collect();
        let adj = |x: Dart, y: Dart| pairs.binary_search(&(x.min(y), x.max(y))).is_ok();
        for (i, &(x, y)) in pairs.iter().enumerate() {
            for &(x2, z) in &pairs[i + 1..] {
                if x2 != x {
                    break;
                }
                if adj(y, z) {
                    out.push(NpcFailure {
                        vertex: self.vertex,
                        kind: NpcDefect::Triangle,
                        ends: vec![x, y, z],
                    });
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NpcDefect {
    Loop,
    MultiEdge,
    /// Three pairwise-adjacent ends with no cube filling them.
    Triangle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NpcFailure {
    pub vertex: usize,
    pub kind: NpcDefect,
    pub ends: Vec<Dart>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NpcReport {
    pub passed: bool,
    pub failures: Vec<NpcFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hyperplane {
    /// Edges dual to the hyperplane, ascending.
    pub edges: Vec<usize>,
    /// Squares meeting the hyperplane, ascending.
    pub carrier: Vec<usize>,
    pub self_intersecting: bool,
    pub one_sided: bool,
    pub self_osculating: bool,
    pub inter_osculating: bool,
}

impl Hyperplane {
    pub fn is_embedded(&self) -> bool {
        !self.self_intersecting
    }

    pub fn is_two_sided(&self) -> bool {
        !self.one_sided
    }

    pub fn is_clean(&self) -> bool {
        !(self.self_intersecting || self.one_sided || self.self_osculating || self.inter_osculating)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpecialnessReport {
    pub special: bool,
    pub hyperplanes: Vec<Hyperplane>,
    pub failures: Vec<usize>,
}

/// A combinatorial map of square complexes: vertices to vertices, and each
/// edge's forward dart to a dart of the target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CombinatorialMap {
    pub vertex_map: Vec<usize>,
    pub dart_map: Vec<Dart>,
}

impl CombinatorialMap {
    pub fn identity(c: &SquareComplex) -> Self {
        CombinatorialMap {
            vertex_map: (0..c.num_vertices()).collect(),
            dart_map: (0..c.num_edges()).map(|e| dart(e, true)).collect(),
        }
    }

    pub fn from_morphism(m: &GraphMorphism) -> Self {
        CombinatorialMap {
            vertex_map: m.vertex_map.clone(),
            dart_map: m.edge_map.iter().map(|&e| dart(e, true)).collect(),
        }
    }

    pub fn image(&self, d: Dart) -> Dart {
        let img = self.dart_map[dart_edge(d)];
        if dart_forward(d) {
            img
        } else {
            bar(img)
        }
    }

    pub fn compose(&self, then: &CombinatorialMap) -> CombinatorialMap {
        CombinatorialMap {
            vertex_map: self
                .vertex_map
                .iter()
                .map(|&v| then.vertex_map[v])
                .collect(),
            dart_map: self.dart_map.iter().map(|&d| then.image(d)).collect(),
        }
    }

    /// Checks incidences and that every square maps onto a square.
    pub fn validate(&self, y: &SquareComplex, x: &SquareComplex) -> Result<()> {
        if self.vertex_map.len() != y.num_vertices() || self.dart_map.len() != y.num_edges() {
            return Err(Error::NotCombinatorial(
                "map sizes do not match the domain".into(),
            ));
        }
        if self.vertex_map.iter().any(|&v| v >= x.num_vertices())
            || self.dart_map.iter().any(|&d| d >= 2 * x.num_edges())
        {
            return Err(Error::NotCombinatorial("map leaves the target".into()));
        }
        for e in 0..y.num_edges() {
            let d = dart(e, true);
            let img = self.image(d);
            if x.graph().dart_src(img) != self.vertex_map[y.graph().dart_src(d)]
                || x.graph().dart_dst(img) != self.vertex_map[y.graph().dart_dst(d)]
            {
                return Err(Error::NotCombinatorial(format!(
                    "edge {e} is not mapped compatibly with its endpoints"
                )));
            }
        }
        let target: BTreeSet<[Dart; 4]> =
            x.squares().iter().map(|&s| canonical_square(s)).collect();
        for (i, s) in y.squares().iter().enumerate() {
            let img = canonical_square(s.map(|d| self.image(d)));
            if !target.contains(&img) {
                return Err(Error::NotCombinatorial(format!(
                    "square {i} does not map onto a square"
                )));
            }
        }
        Ok(())
    }

    /// Immersion whose link maps are injections onto full subgraphs.
    pub fn check_local_isometry(
        &self,
        y: &SquareComplex,
        x: &SquareComplex,
    ) -> Result<LocalIsometryReport> {
        self.validate(y, x)?;
        let failures: Vec<LocalIsometryFailure> = (0..y.num_vertices())
            .into_par_iter()
            .flat_map_iter(|v| {
                let ly = y.vertex_link(v).unwrap();
                let lx = x.vertex_link(self.vertex_map[v]).unwrap();
                let mut out = Vec::new();
                for (i, &d) in ly.ends.iter().enumerate() {
                    for &d2 in &ly.ends[i + 1..] {
                        let (a, b) = (self.image(d), self.image(d2));
                        if a == b {
                            out.push(LocalIsometryFailure {
                                vertex: v,
                                ends: (d, d2),
                                kind: LinkFailure::NotInjective,
                            });
                        } else if lx.adjacent(a, b) && !ly.adjacent(d, d2) {
                            out.push(LocalIsometryFailure {
                                vertex: v,
                                ends: (d, d2),
                                kind: LinkFailure::NotFull,
                            });
                        }
                    }
                }
                out
            })
            .collect();
        Ok(LocalIsometryReport {
            passed: failures.is_empty(),
            failures,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LinkFailure {
    NotInjective,
    NotFull,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalIsometryFailure {
    pub vertex: usize,
    pub ends: (Dart, Dart),
    pub kind: LinkFailure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalIsometryReport {
    pub passed: bool,
    pub failures: Vec<LocalIsometryFailure>,
}
