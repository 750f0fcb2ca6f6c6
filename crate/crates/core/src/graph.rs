//! Labeled graphs over a bouquet of circles: Stallings folding, core graphs
//! of finitely generated subgroups of free groups, and fiber products.
//!
//! Every edge carries a positive orientation and a generator label. Each
//! edge `e` has two darts: `2e` traverses it forwards (reading the
//! generator) and `2e + 1` backwards (reading its inverse). The involution
//! `bar` is `d ^ 1`, so it is fixed-point free by construction.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::words::{FreeWord, Letter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub label: u32,
}

pub type Dart = usize;

#[inline]
pub fn dart(edge: usize, forward: bool) -> Dart {
    2 * edge + (!forward) as usize
}

#[inline]
pub fn dart_edge(d: Dart) -> usize {
    d / 2
}

#[inline]
pub fn dart_forward(d: Dart) -> bool {
    d % 2 == 0
}

#[inline]
pub fn bar(d: Dart) -> Dart {
    d ^ 1
}

#[derive(Clone, Debug, Serialize)]
pub struct LabeledGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
    basepoint: Option<usize>,
    #[serde(skip)]
    adjacency: Vec<Vec<Dart>>,
}

impl PartialEq for LabeledGraph {
    fn eq(&self, other: &Self) -> bool {
        self.num_vertices == other.num_vertices
            && self.edges == other.edges
            && self.basepoint == other.basepoint
    }
}

impl Eq for LabeledGraph {}

impl LabeledGraph {
    pub fn new(num_vertices: usize, edges: Vec<Edge>, basepoint: Option<usize>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.src >= num_vertices || e.dst >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has an endpoint out of range"
                )));
            }
        }
        if let Some(b) = basepoint {
            if b >= num_vertices {
                return Err(Error::UnknownVertex(b));
            }
        }
        let mut adjacency = vec![Vec::new(); num_vertices];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.src].push(dart(i, true));
            adjacency[e.dst].push(dart(i, false));
        }
        Ok(LabeledGraph {
            num_vertices,
            edges,
            basepoint,
            adjacency,
        })
    }

    /// One vertex and one loop per generator.
    pub fn bouquet(rank: usize) -> Self {
        let edges = (0..rank)
            .map(|g| Edge {
                src: 0,
                dst: 0,
                label: g as u32,
            })
            .collect();
        Self::new(1, edges, Some(0)).expect("bouquet is well formed")
    }

    /// The cycle spelled by a nonempty word; vertex `i` sits before letter
    /// `i` and edge `i` carries letter `i`.
    pub fn cycle(word: &FreeWord) -> Result<Self> {
        let n = word.len();
        if n == 0 {
            return Err(Error::EmptyWord);
        }
        let edges = word
            .letters()
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let (a, b) = (i, (i + 1) % n);
                if l.is_inverse() {
                    Edge {
                        src: b,
                        dst: a,
                        label: l.generator(),
                    }
                } else {
                    Edge {
                        src: a,
                        dst: b,
                        label: l.generator(),
                    }
                }
            })
            .collect();
        Self::new(n, edges, Some(0))
    }

    /// Wedge of closed paths at a common basepoint, one per word (unfolded).
    pub fn petals(words: &[FreeWord]) -> Self {
        let mut n = 1;
        let mut edges = Vec::new();
        for w in words {
            let len = w.len();
            for (i, l) in w.letters().iter().enumerate() {
                let a = if i == 0 { 0 } else { n + i - 1 };
                let b = if i + 1 == len { 0 } else { n + i };
                edges.push(if l.is_inverse() {
                    Edge {
                        src: b,
                        dst: a,
                        label: l.generator(),
                    }
                } else {
                    Edge {
                        src: a,
                        dst: b,
                        label: l.generator(),
                    }
                });
            }
            n += len.saturating_sub(1);
        }
        Self::new(n, edges, Some(0)).expect("petals are well formed")
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    pub fn with_basepoint(mut self, b: usize) -> Self {
        assert!(b < self.num_vertices);
        self.basepoint = Some(b);
        self
    }

    pub fn darts_at(&self, v: usize) -> &[Dart] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn dart_src(&self, d: Dart) -> usize {
        let e = self.edges[dart_edge(d)];
        if dart_forward(d) {
            e.src
        } else {
            e.dst
        }
    }

    pub fn dart_dst(&self, d: Dart) -> usize {
        self.dart_src(bar(d))
    }

    pub fn dart_letter(&self, d: Dart) -> Letter {
        Letter::new(self.edges[dart_edge(d)].label, !dart_forward(d))
    }

    /// Largest generator index used plus one.
    pub fn label_rank(&self) -> usize {
        self.edges
            .iter()
            .map(|e| e.label as usize + 1)
            .max()
            .unwrap_or(0)
    }

    /// First dart at `v` reading `letter`.
    pub fn step_dart(&self, v: usize, letter: Letter) -> Option<Dart> {
        self.adjacency[v]
            .iter()
            .copied()
            .find(|&d| self.dart_letter(d) == letter)
    }

    pub fn step(&self, v: usize, letter: Letter) -> Option<usize> {
        self.step_dart(v, letter).map(|d| self.dart_dst(d))
    }

    /// Endpoint of the path spelling `word` from `v`, if it exists (folded
    /// graphs have at most one such path).
    pub fn read_from(&self, v: usize, word: &FreeWord) -> Option<usize> {
        word.letters()
            .iter()
            .try_fold(v, |cur, &l| self.step(cur, l))
    }

    /// True iff the reduced form of `word` labels a closed path at the
    /// basepoint. Meaningful on folded graphs.
    pub fn accepts(&self, word: &FreeWord) -> bool {
        let b = self.basepoint.expect("accepts needs a basepoint");
        self.read_from(b, &word.reduce()) == Some(b)
    }

    pub fn is_folded(&self) -> bool {
        (0..self.num_vertices).all(|v| {
            let mut seen: Vec<Letter> = self.adjacency[v]
                .iter()
                .map(|&d| self.dart_letter(d))
                .collect();
            let n = seen.len();
            seen.sort();
            seen.dedup();
            seen.len() == n
        })
    }

    /// A graph covers the bouquet when every vertex has every letter.
    pub fn is_covering(&self, rank: usize) -> bool {
        self.is_folded() && self.adjacency.iter().all(|a| a.len() == 2 * rank)
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.num_vertices];
        let mut out = Vec::new();
        for s in 0..self.num_vertices {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut i = 0;
            while i < members.len() {
                let v = members[i];
                i += 1;
                for &d in &self.adjacency[v] {
                    let w = self.dart_dst(d);
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Rank of the fundamental group of a connected graph.
    pub fn pi1_rank(&self) -> usize {
        (self.edges.len() + self.components().len()).saturating_sub(self.num_vertices)
    }

    /// Breadth-first distances (in edges) from `src`.
    pub fn distances_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.num_vertices];
        dist[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            for &d in &self.adjacency[v] {
                let w = self.dart_dst(d);
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// Diameter of a connected graph in edges.
    pub fn diameter(&self) -> usize {
        (0..self.num_vertices)
            .map(|v| {
                self.distances_from(v)
                    .into_iter()
                    .filter(|&d| d != usize::MAX)
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// Tree diameter by double sweep. Only valid on trees.
    pub fn tree_diameter(&self) -> usize {
        if self.num_vertices == 0 {
            return 0;
        }
        let d0 = self.distances_from(0);
        let far = (0..self.num_vertices)
            .max_by_key(|&v| (d0[v], std::cmp::Reverse(v)))
            .unwrap();
        self.distances_from(far).into_iter().max().unwrap_or(0)
    }

    /// Length of the shortest closed reduced path (the systole); `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for s in 0..self.num_vertices {
            let mut dist = vec![usize::MAX; self.num_vertices];
            let mut parent_edge = vec![usize::MAX; self.num_vertices];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                if let Some(b) = best {
                    if 2 * dist[v] + 1 >= b {
                        break;
                    }
                }
                for &d in &self.adjacency[v] {
                    let e = dart_edge(d);
                    if e == parent_edge[v] {
                        continue;
                    }
                    let w = self.dart_dst(d);
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent_edge[w] = e;
                        q.push_back(w);
                    } else {
                        let c = dist[v] + dist[w] + 1;
                        best = Some(best.map_or(c, |b| b.min(c)));
                    }
                }
            }
        }
        best
    }

    /// For every vertex, the shortlex-least reduced word labelling a path
    /// from the basepoint (`None` if unreachable).
    pub fn words_from_basepoint(&self) -> Vec<Option<FreeWord>> {
        let b = self.basepoint.expect("needs a basepoint");
        let mut out: Vec<Option<Vec<Letter>>> = vec![None; self.num_vertices];
        out[b] = Some(Vec::new());
        let mut q = VecDeque::from([b]);
        while let Some(v) = q.pop_front() {
            let mut darts = self.adjacency[v].clone();
            darts.sort_by_key(|&d| (self.dart_letter(d), d));
            for d in darts {
                let w = self.dart_dst(d);
                if out[w].is_none() {
                    let mut p = out[v].clone().unwrap();
                    p.push(self.dart_letter(d));
                    out[w] = Some(p);
                    q.push_back(w);
                }
            }
        }
        out.into_iter()
            .map(|o| o.map(FreeWord::reduced_from))
            .collect()
    }

    /// Reduced closed paths at the basepoint of length `≤ max_len`, as words.
    pub fn loop_words(&self, max_len: usize) -> Vec<FreeWord> {
        let b = self.basepoint.expect("needs a basepoint");
        let mut out = Vec::new();
        let mut path: Vec<Dart> = Vec::new();
        fn rec(
            g: &LabeledGraph,
            v: usize,
            b: usize,
            max_len: usize,
            path: &mut Vec<Dart>,
            out: &mut Vec<FreeWord>,
        ) {
            if !path.is_empty() && v == b {
                out.push(FreeWord::new(
                    path.iter().map(|&d| g.dart_letter(d)).collect(),
                ));
            }
            if path.len() == max_len {
                return;
            }
            for &d in g.darts_at(v) {
                if path.last().map(|&p| bar(p) == d).unwrap_or(false) {
                    continue;
                }
                path.push(d);
                rec(g, g.dart_dst(d), b, max_len, path, out);
                path.pop();
            }
        }
        rec(self, b, b, max_len, &mut path, &mut out);
        out.sort_by(|x, y| x.shortlex_cmp(y));
        out.dedup();
        out
    }

    /// Stallings folding: identifies edges with a common origin and label
    /// until the graph is folded.
    pub fn fold(&self) -> (LabeledGraph, GraphMorphism) {
        let n = self.num_vertices;
        let mut uf = UnionFind::new(n);
        let mut out: Vec<HashMap<Letter, usize>> = vec![HashMap::new(); n];
        let mut pending: Vec<(usize, usize)> = Vec::new();

        fn insert(
            uf: &mut UnionFind,
            out: &mut [HashMap<Letter, usize>],
            pending: &mut Vec<(usize, usize)>,
            v: usize,
            l: Letter,
            t: usize,
        ) {
            let r = uf.find(v);
            match out[r].get(&l) {
                Some(&t0) => {
                    if uf.find(t0) != uf.find(t) {
                        pending.push((t0, t));
                    }
                }
                None => {
                    out[r].insert(l, t);
                }
            }
        }

        for e in &self.edges {
            insert(
                &mut uf,
                &mut out,
                &mut pending,
                e.src,
                Letter::pos(e.label),
                e.dst,
            );
            insert(
                &mut uf,
                &mut out,
                &mut pending,
                e.dst,
                Letter::neg(e.label),
                e.src,
            );
        }
        while let Some((x, y)) = pending.pop() {
            let (rx, ry) = (uf.find(x), uf.find(y));
            if rx == ry {
                continue;
            }
            let keep = uf.union(rx, ry);
            let gone = if keep == rx { ry } else { rx };
            let moved: Vec<(Letter, usize)> = out[gone].drain().collect();
            let mut moved = moved;
            moved.sort();
            for (l, t) in moved {
                insert(&mut uf, &mut out, &mut pending, keep, l, t);
            }
        }

        // New vertex ids ordered by smallest original member.
        let mut rep_id: HashMap<usize, usize> = HashMap::new();
        let mut vertex_map = vec![0; n];
        for v in 0..n {
            let r = uf.find(v);
            let next = rep_id.len();
            vertex_map[v] = *rep_id.entry(r).or_insert(next);
        }
        let mut key_id: BTreeMap<(usize, usize, u32), usize> = BTreeMap::new();
        let mut new_edges = Vec::new();
        let mut edge_map = vec![0; self.edges.len()];
        for (i, e) in self.edges.iter().enumerate() {
            let key = (vertex_map[e.src], vertex_map[e.dst], e.label);
            let id = *key_id.entry(key).or_insert_with(|| {
                new_edges.push(Edge {
                    src: key.0,
                    dst: key.1,
                    label: key.2,
                });
                new_edges.len() - 1
            });
            edge_map[i] = id;
        }
        let g = LabeledGraph::new(
            rep_id.len(),
            new_edges,
            self.basepoint.map(|b| vertex_map[b]),
        )
        .expect("folded graph is well formed");
        (
            g,
            GraphMorphism {
                vertex_map,
                edge_map,
            },
        )
    }

    /// Removes, repeatedly, vertices of degree at most one other than the
    /// basepoint. Returns the trimmed graph and the old id of each new vertex.
    pub fn trim(&self) -> (LabeledGraph, Vec<usize>) {
        let n = self.num_vertices;
        let mut alive_v = vec![true; n];
        let mut alive_e = vec![true; self.edges.len()];
        let mut deg: Vec<usize> = (0..n).map(|v| self.degree(v)).collect();
        let mut stack: Vec<usize> = (0..n)
            .filter(|&v| deg[v] <= 1 && Some(v) != self.basepoint)
            .collect();
        while let Some(v) = stack.pop() {
            if !alive_v[v] {
                continue;
            }
            alive_v[v] = false;
            for &d in &self.adjacency[v] {
                let e = dart_edge(d);
                if !alive_e[e] {
                    continue;
                }
                alive_e[e] = false;
                let w = self.dart_dst(d);
                deg[w] -= 1;
                if w != v {
                    deg[v] -= 1;
                }
                if alive_v[w] && deg[w] <= 1 && Some(w) != self.basepoint {
                    stack.push(w);
                }
            }
        }
        let old_ids: Vec<usize> = (0..n).filter(|&v| alive_v[v]).collect();
        let mut new_id = vec![usize::MAX; n];
        for (i, &v) in old_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .zip(&alive_e)
            .filter(|(_, &a)| a)
            .map(|(e, _)| Edge {
                src: new_id[e.src],
                dst: new_id[e.dst],
                label: e.label,
            })
            .collect();
        let g = LabeledGraph::new(old_ids.len(), edges, self.basepoint.map(|b| new_id[b]))
            .expect("trimmed graph is well formed");
        (g, old_ids)
    }

    /// Renumbers vertices in breadth-first order from the basepoint (or
    /// vertex 0), visiting darts by letter. Two connected folded graphs with
    /// basepoints are isomorphic iff their canonical forms are equal.
    pub fn canonical(&self) -> LabeledGraph {
        if self.num_vertices == 0 {
            return self.clone();
        }
        let start = self.basepoint.unwrap_or(0);
        let mut new_id = vec![usize::MAX; self.num_vertices];
        let mut order = Vec::new();
        for s in std::iter::once(start).chain(0..self.num_vertices) {
            if new_id[s] != usize::MAX {
                continue;
            }
            new_id[s] = order.len();
            order.push(s);
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                let mut darts = self.adjacency[v].clone();
                darts.sort_by_key(|&d| (self.dart_letter(d), d));
                for d in darts {
                    let w = self.dart_dst(d);
                    if new_id[w] == usize::MAX {
                        new_id[w] = order.len();
                        order.push(w);
                        q.push_back(w);
                    }
                }
            }
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                src: new_id[e.src],
                dst: new_id[e.dst],
                label: e.label,
            })
            .collect();
        edges.sort();
        LabeledGraph::new(self.num_vertices, edges, self.basepoint.map(|b| new_id[b]))
            .expect("canonical graph is well formed")
    }
}

/// Vertex and edge maps between labeled graphs. Edges map
/// orientation-preservingly, so the dart map is `d ↦ 2·edge_map[d/2] + d%2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphMorphism {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
}

impl GraphMorphism {
    pub fn identity(g: &LabeledGraph) -> Self {
        GraphMorphism {
            vertex_map: (0..g.num_vertices()).collect(),
            edge_map: (0..g.num_edges()).collect(),
        }
    }

    /// Label- and incidence-preserving, basepoint-preserving when both have one.
    pub fn is_valid(&self, source: &LabeledGraph, target: &LabeledGraph) -> bool {
        if self.vertex_map.len() != source.num_vertices()
            || self.edge_map.len() != source.num_edges()
        {
            return false;
        }
        if self.vertex_map.iter().any(|&v| v >= target.num_vertices())
            || self.edge_map.iter().any(|&e| e >= target.num_edges())
        {
            return false;
        }
        let edges_ok = source.edges().iter().zip(&self.edge_map).all(|(e, &f)| {
            let t = target.edge(f);
            t.label == e.label && t.src == self.vertex_map[e.src] && t.dst == self.vertex_map[e.dst]
        });
        let base_ok = match (source.basepoint(), target.basepoint()) {
            (Some(a), Some(b)) => self.vertex_map[a] == b,
            _ => true,
        };
        edges_ok && base_ok
    }

    /// The label-determined map of a graph to the bouquet.
    pub fn to_bouquet(g: &LabeledGraph) -> Self {
        GraphMorphism {
            vertex_map: vec![0; g.num_vertices()],
            edge_map: g.edges().iter().map(|e| e.label as usize).collect(),
        }
    }

    pub fn compose(&self, then: &GraphMorphism) -> GraphMorphism {
        GraphMorphism {
            vertex_map: self
                .vertex_map
                .iter()
                .map(|&v| then.vertex_map[v])
                .collect(),
            edge_map: self.edge_map.iter().map(|&e| then.edge_map[e]).collect(),
        }
    }
}

/// Folded core graph of the subgroup generated by `generators` in the free
/// group of the given rank. The empty list gives a single vertex.
pub fn core_graph(generators: &[FreeWord], rank: usize) -> Result<LabeledGraph> {
    for w in generators {
        if let Some(l) = w.letters().iter().find(|l| l.generator() as usize >= rank) {
            return Err(Error::InvalidArgument(format!(
                "generator uses symbol {} outside rank {rank}",
                l.generator()
            )));
        }
    }
    let words: Vec<FreeWord> = generators
        .iter()
        .map(|w| w.reduce())
        .filter(|w| !w.is_empty())
        .collect();
    let (folded, _) = LabeledGraph::petals(&words).fold();
    Ok(folded.trim().0.canonical())
}

#[derive(Clone, Debug)]
pub struct FiberComponent {
    pub graph: LabeledGraph,
    /// Vertex `i` of `graph` is the pair `(proj_a[i], proj_b[i])`.
    pub proj_a: Vec<usize>,
    pub proj_b: Vec<usize>,
    /// Edge `k` of `graph` is the pair `(edge_a[k], edge_b[k])`.
    pub edge_a: Vec<usize>,
    pub edge_b: Vec<usize>,
}

impl FiberComponent {
    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    /// Connected component with nontrivial fundamental group.
    pub fn has_cycle(&self) -> bool {
        self.num_edges() >= self.num_vertices()
    }

    pub fn contains(&self, a: usize, b: usize) -> Option<usize> {
        (0..self.num_vertices()).find(|&i| self.proj_a[i] == a && self.proj_b[i] == b)
    }

    /// Projection onto the A side is a bijection onto all of `a`.
    pub fn covers_a_bijectively(&self, a: &LabeledGraph) -> bool {
        self.num_vertices() == a.num_vertices()
            && self.num_edges() == a.num_edges()
            && is_permutation(&self.proj_a)
            && is_permutation(&self.edge_a)
    }

    pub fn covers_b_bijectively(&self, b: &LabeledGraph) -> bool {
        self.num_vertices() == b.num_vertices()
            && self.num_edges() == b.num_edges()
            && is_permutation(&self.proj_b)
            && is_permutation(&self.edge_b)
    }
}

fn is_permutation(v: &[usize]) -> bool {
    let mut seen = vec![false; v.len()];
    v.iter()
        .all(|&x| x < seen.len() && !std::mem::replace(&mut seen[x], true))
}

/// Edge-carrying components of a fiber product, plus the number of
/// vertex pairs that carry no edge.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    pub components: Vec<FiberComponent>,
    pub isolated_vertices: usize,
}

impl FiberProduct {
    /// Fiber product over the bouquet (immersions given by labels).
    pub fn over_bouquet(a: &LabeledGraph, b: &LabeledGraph) -> Self {
        Self::build(a, b, None, None)
    }

    /// Fiber product over a folded graph `X`, with vertex maps `a → X`,
    /// `b → X` of label-preserving immersions.
    pub fn over(a: &LabeledGraph, a_to_x: &[usize], b: &LabeledGraph, b_to_x: &[usize]) -> Self {
        Self::build(a, b, Some(a_to_x), Some(b_to_x))
    }

    fn build(
        a: &LabeledGraph,
        b: &LabeledGraph,
        amap: Option<&[usize]>,
        bmap: Option<&[usize]>,
    ) -> Self {
        let (na, nb) = (a.num_vertices(), b.num_vertices());
        let same_image = |u: usize, v: usize| match (amap, bmap) {
            (Some(am), Some(bm)) => am[u] == bm[v],
            _ => true,
        };

        let mut by_label: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, e) in b.edges().iter().enumerate() {
            by_label.entry(e.label).or_default().push(i);
        }
        let mut pair_edges: Vec<(usize, usize)> = Vec::new();
        for (i, e) in a.edges().iter().enumerate() {
            if let Some(list) = by_label.get(&e.label) {
                for &j in list {
                    if same_image(e.src, b.edge(j).src) {
                        pair_edges.push((i, j));
                    }
                }
            }
        }

        let mut index = PairIndex::new(na, nb);
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut endpoints: Vec<(usize, usize)> = Vec::with_capacity(pair_edges.len());
        for &(i, j) in &pair_edges {
            let (ea, eb) = (a.edge(i), b.edge(j));
            let s = index.get_or_insert(ea.src, eb.src, &mut pairs);
            let t = index.get_or_insert(ea.dst, eb.dst, &mut pairs);
            endpoints.push((s, t));
        }
        let mut uf = UnionFind::new(pairs.len());
        for &(s, t) in &endpoints {
            uf.union(s, t);
        }

        // Group vertices and edges per component; order components by their
        // least vertex pair, vertices by pair, edges by pair.
        let mut comp_vertices: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for p in 0..pairs.len() {
            comp_vertices.entry(uf.find(p)).or_default().push(p);
        }
        let mut comp_edges: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, &(s, _)) in endpoints.iter().enumerate() {
            comp_edges.entry(uf.find(s)).or_default().push(k);
        }
        let mut comps: Vec<(usize, Vec<usize>)> = comp_vertices.into_iter().collect();
        for (_, vs) in comps.iter_mut() {
            vs.sort_by_key(|&p| pairs[p]);
        }
        comps.sort_by_key(|(_, vs)| pairs[vs[0]]);

        let mut components = Vec::with_capacity(comps.len());
        let mut local = vec![0usize; pairs.len()];
        for (root, vs) in comps {
            for (i, &p) in vs.iter().enumerate() {
                local[p] = i;
            }
            let mut es = comp_edges.remove(&root).unwrap_or_default();
            es.sort_by_key(|&k| pair_edges[k]);
            let edges: Vec<Edge> = es
                .iter()
                .map(|&k| Edge {
                    src: local[endpoints[k].0],
                    dst: local[endpoints[k].1],
                    label: a.edge(pair_edges[k].0).label,
                })
                .collect();
            let graph = LabeledGraph::new(vs.len(), edges, None).expect("component is well formed");
            components.push(FiberComponent {
                graph,
                proj_a: vs.iter().map(|&p| pairs[p].0).collect(),
                proj_b: vs.iter().map(|&p| pairs[p].1).collect(),
                edge_a: es.iter().map(|&k| pair_edges[k].0).collect(),
                edge_b: es.iter().map(|&k| pair_edges[k].1).collect(),
            });
        }

        let total_pairs: usize = match (amap, bmap) {
            (Some(am), Some(bm)) => {
                let mut count: HashMap<usize, usize> = HashMap::new();
                for &x in bm {
                    *count.entry(x).or_default() += 1;
                }
                am.iter().map(|x| count.get(x).copied().unwrap_or(0)).sum()
            }
            _ => na * nb,
        };
        FiberProduct {
            components,
            isolated_vertices: total_pairs - pairs.len(),
        }
    }

    /// Index of the edge-carrying component containing `(a, b)`.
    pub fn component_of(&self, a: usize, b: usize) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.contains(a, b).is_some())
    }
}

/// Core graph of `H ∩ K` for core graphs of `H` and `K` (basepointed, folded).
pub fn intersection(h: &LabeledGraph, k: &LabeledGraph) -> LabeledGraph {
    let (bh, bk) = (
        h.basepoint().expect("basepoint"),
        k.basepoint().expect("basepoint"),
    );
    let fp = FiberProduct::over_bouquet(h, k);
    match fp.component_of(bh, bk) {
        Some(ci) => {
            let c = &fp.components[ci];
            let b = c.contains(bh, bk).unwrap();
            c.graph.clone().with_basepoint(b).trim().0.canonical()
        }
        None => LabeledGraph::new(1, Vec::new(), Some(0)).unwrap(),
    }
}

struct PairIndex {
    nb: usize,
    dense: Option<Vec<u32>>,
    sparse: HashMap<(usize, usize), u32>,
}

impl PairIndex {
    fn new(na: usize, nb: usize) -> Self {
        let dense = (na.saturating_mul(nb) <= 1 << 26).then(|| vec![u32::MAX; na * nb]);
        PairIndex {
            nb,
            dense,
            sparse: HashMap::new(),
        }
    }

    fn get_or_insert(&mut self, u: usize, v: usize, pairs: &mut Vec<(usize, usize)>) -> usize {
        let slot = match &mut self.dense {
            Some(d) => &mut d[u * self.nb + v],
            None => self.sparse.entry((u, v)).or_insert(u32::MAX),
        };
        if *slot == u32::MAX {
            *slot = pairs.len() as u32;
            pairs.push((u, v));
        }
        *slot as usize
    }
}

#[derive(Clone, Debug)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns the surviving root.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] || (self.size[ra] == self.size[rb] && rb < ra) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        ra
    }
}
