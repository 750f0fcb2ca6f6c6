//! Graphical cubical presentations, piece enumeration and the small
//! cancellation checkers.
//!
//! Cones are folded graph immersions into the base graph. Cycle cones carry
//! their cyclically reduced word; vertex `i` of a cycle cone is the point
//! before letter `i` and edge `i` carries letter `i`.
//!
//! Cone pieces are the edge-carrying components of fiber products of cones.
//! For a cone with itself, components on which both projections are
//! bijective come from the deck group and are not pieces. When the cone
//! word is a proper power `u^d`, its rotation by a multiple `s` of `|u|`
//! overlaps the cycle with itself along `n - s` edges; these overlaps are
//! reported as periodic pieces.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::complexes::SquareComplex;
use crate::error::{Error, Result};
use crate::graph::{dart_edge, dart_forward, Dart, FiberComponent, FiberProduct, LabeledGraph};
use crate::wallspace::Wall;
use crate::words::{FreeWord, Letter};
use crate::Rational;

/// A length that may be infinite (a fiber-product component with a cycle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extent {
    Finite(usize),
    Unbounded,
}

impl Extent {
    pub fn finite(self) -> Option<usize> {
        match self {
            Extent::Finite(n) => Some(n),
            Extent::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        self == Extent::Unbounded
    }
}

impl PartialOrd for Extent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extent::Finite(a), Extent::Finite(b)) => a.cmp(b),
            (Extent::Finite(_), Extent::Unbounded) => Ordering::Less,
            (Extent::Unbounded, Extent::Finite(_)) => Ordering::Greater,
            (Extent::Unbounded, Extent::Unbounded) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(n) => write!(f, "{n}"),
            Extent::Unbounded => write!(f, "unbounded"),
        }
    }
}

impl Serialize for Extent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extent::Finite(n) => s.serialize_u64(*n as u64),
            Extent::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Cone {
    pub graph: LabeledGraph,
    /// Vertex map to the base graph.
    pub base_map: Vec<usize>,
    /// The generating word of a cycle cone.
    pub word: Option<FreeWord>,
}

impl Cone {
    pub fn cycle(word: &FreeWord) -> Result<Self> {
        if word.is_empty() {
            return Err(Error::EmptyWord);
        }
        if !word.is_cyclically_reduced() {
            return Err(Error::NotCyclicallyReduced(word.to_string()));
        }
        let graph = LabeledGraph::cycle(word)?;
        Ok(Cone {
            base_map: vec![0; graph.num_vertices()],
            graph,
            word: Some(word.clone()),
        })
    }

    /// The cycle of `word` mapped into a folded base graph by reading it from
    /// `start`; the word must spell a closed path there.
    pub fn cycle_over(word: &FreeWord, base: &LabeledGraph, start: usize) -> Result<Self> {
        let mut cone = Cone::cycle(word)?;
        let mut v = start;
        for (k, &l) in word.letters().iter().enumerate() {
            cone.base_map[k] = v;
            v = base.step(v, l).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "letter {k} of the cone word has no image in the base"
                ))
            })?;
        }
        if v != start {
            return Err(Error::InvalidArgument(
                "cone word does not close up in the base".into(),
            ));
        }
        Ok(cone)
    }

    pub fn is_cycle(&self) -> bool {
        self.word.is_some()
    }

    /// Length of the shortest essential closed path.
    pub fn systole(&self) -> Option<usize> {
        match &self.word {
            Some(w) => Some(w.len()),
            None => self.graph.girth(),
        }
    }

    /// The dart of cycle edge `k` that runs in the cycle's direction.
    fn cycle_dart(&self, k: usize) -> Dart {
        let w = self.word.as_ref().expect("cycle cone");
        2 * k + w.letters()[k].is_inverse() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CubicalPresentation {
    pub base: SquareComplex,
    pub cones: Vec<Cone>,
    pub alpha: Rational,
    /// Cones are finite complexes; a declared non-compact list blocks certificates.
    pub compact: bool,
}

impl CubicalPresentation {
    /// Cycle cones over a bouquet of `rank` circles.
    pub fn graphical(rank: usize, words: &[FreeWord], alpha: Rational) -> Result<Self> {
        let cones = words.iter().map(Cone::cycle).collect::<Result<Vec<_>>>()?;
        Self::new(
            SquareComplex::from_graph(LabeledGraph::bouquet(rank)),
            cones,
            alpha,
        )
    }

    pub fn new(base: SquareComplex, cones: Vec<Cone>, alpha: Rational) -> Result<Self> {
        if alpha < Rational::from_integer(1) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} is below 1")));
        }
        let bg = base.graph();
        for (i, c) in cones.iter().enumerate() {
            let g = &c.graph;
            if g.num_vertices() == 0 || g.num_edges() == 0 {
                return Err(Error::InvalidArgument(format!("cone {i} is empty")));
            }
            if !g.is_connected() {
                return Err(Error::InvalidArgument(format!("cone {i} is not connected")));
            }
            if !g.is_folded() {
                return Err(Error::InvalidArgument(format!(
                    "cone {i} is not an immersion (not folded)"
                )));
            }
            if c.base_map.len() != g.num_vertices()
                || c.base_map.iter().any(|&v| v >= bg.num_vertices())
            {
                return Err(Error::InvalidArgument(format!(
                    "cone {i} has an invalid vertex map"
                )));
            }
            for e in g.edges() {
                let img = c.base_map[e.src];
                let ok = bg.darts_at(img).iter().any(|&d| {
                    dart_forward(d)
                        && bg.edge(dart_edge(d)).label == e.label
                        && bg.dart_dst(d) == c.base_map[e.dst]
                });
                if !ok {
                    return Err(Error::InvalidArgument(format!(
                        "cone {i} edge label {} has no image in the base",
                        e.label
                    )));
                }
            }
        }
        Ok(CubicalPresentation {
            base,
            cones,
            alpha,
            compact: true,
        })
    }

    pub fn is_graphical(&self) -> bool {
        self.base.squares().is_empty()
    }

    pub fn rank(&self) -> usize {
        self.base.graph().label_rank()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PieceKind {
    Cone,
    Periodic,
    Wall,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub kind: PieceKind,
    /// The cone carrying the piece path.
    pub cone: usize,
    /// Other cone (cone pieces), rotation shift (periodic), base edge (wall).
    pub other: usize,
    /// A longest path of the piece, as darts of the carrying cone.
    pub path: Vec<Dart>,
    pub length: Extent,
    #[serde(skip)]
    support: Support,
}

/// Vertices and edges of a cone touched by a piece.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Support {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

/// A run of consecutive cycle edges `start, start + 1, …` of length `len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Arc {
    pub start: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeStats {
    pub cone: usize,
    /// |σ|: the cycle length, or the systole of a graph cone.
    pub length: Option<usize>,
    pub max_piece: Extent,
    /// Fewest pieces concatenating to the cycle; `None` when some edge lies
    /// in no piece, or for graph cones.
    pub min_cover: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceReport {
    pub cones: Vec<ConeStats>,
    pub d: Extent,
    pub m: Extent,
    pub k: Extent,
    /// Set when some cone is not a cycle, so essential paths were
    /// represented by the systole only.
    pub bounded_verification: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceEnumeration {
    pub pieces: Vec<Piece>,
    pub report: PieceReport,
}

/// Longest path in a tree, as a dart sequence.
fn tree_diameter_path(g: &LabeledGraph) -> Vec<Dart> {
    let bfs = |src: usize| {
        let mut parent: Vec<Option<Dart>> = vec![None; g.num_vertices()];
        let mut seen = vec![false; g.num_vertices()];
        seen[src] = true;
        let mut order = vec![src];
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            let mut ds = g.darts_at(v).to_vec();
            ds.sort_unstable();
            for d in ds {
                let w = g.dart_dst(d);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d);
                    order.push(w);
                }
            }
        }
        (*order.last().unwrap(), parent)
    };
    let (far, _) = bfs(0);
    let (other, parent) = bfs(far);
    let mut path = Vec::new();
    let mut cur = other;
    while let Some(d) = parent[cur] {
        path.push(d);
        cur = g.dart_src(d);
    }
    path.reverse();
    path
}

/// Some closed reduced path through every edge of a connected graph that
/// has a cycle: used only to name unbounded pieces.
fn some_cycle(g: &LabeledGraph) -> Vec<Dart> {
    let trimmed_len = g.girth().unwrap_or(0);
    // Shortest cycle through BFS from every vertex; fine for reporting.
    for s in 0..g.num_vertices() {
        let mut dist = vec![usize::MAX; g.num_vertices()];
        let mut parent: Vec<Option<Dart>> = vec![None; g.num_vertices()];
        dist[s] = 0;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &d in g.darts_at(v) {
                if parent[v]
                    .map(|p| dart_edge(p) == dart_edge(d))
                    .unwrap_or(false)
                {
                    continue;
                }
                let w = g.dart_dst(d);
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = Some(d);
                    q.push_back(w);
                } else if dist[v] + dist[w] + 1 == trimmed_len {
                    let up = |mut x: usize| {
                        let mut p = Vec::new();
                        while let Some(d) = parent[x] {
                            p.push(d);
                            x = g.dart_src(d);
                        }
                        p.reverse();
                        p
                    };
                    let mut path = up(v);
                    path.push(d);
                    let back: Vec<Dart> = up(w).into_iter().rev().map(crate::graph::bar).collect();
                    path.extend(back);
                    return path;
                }
            }
        }
    }
    Vec::new()
}

fn component_support(c: &FiberComponent, on_a: bool) -> Support {
    let mut vertices: Vec<usize> = if on_a {
        c.proj_a.clone()
    } else {
        c.proj_b.clone()
    };
    let mut edges: Vec<usize> = if on_a {
        c.edge_a.clone()
    } else {
        c.edge_b.clone()
    };
    vertices.sort_unstable();
    vertices.dedup();
    edges.sort_unstable();
    edges.dedup();
    Support { vertices, edges }
}

fn project(c: &FiberComponent, path: &[Dart], on_a: bool) -> Vec<Dart> {
    path.iter()
        .map(|&d| {
            let k = dart_edge(d);
            let e = if on_a { c.edge_a[k] } else { c.edge_b[k] };
            2 * e + (d % 2)
        })
        .collect()
}

fn piece_from_component(c: &FiberComponent, cone: usize, other: usize, on_a: bool) -> Piece {
    let (path, length) = if c.has_cycle() {
        (some_cycle(&c.graph), Extent::Unbounded)
    } else {
        let p = tree_diameter_path(&c.graph);
        let n = p.len();
        (p, Extent::Finite(n))
    };
    Piece {
        kind: PieceKind::Cone,
        cone,
        other,
        path: project(c, &path, on_a),
        length,
        support: component_support(c, on_a),
    }
}

/// Rotations `s` in `1..n` with `rotate(s) == word`, the deck symmetries.
fn rotation_symmetries(word: &FreeWord) -> Vec<usize> {
    let (root, _) = word.root();
    let p = root.len();
    (1..word.len() / p).map(|k| k * p).collect()
}

/// How much of the piece structure to keep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum PieceDetail {
    /// One piece per fiber-product component and projection.
    #[default]
    Full,
    /// For cycle cones, only pieces not contained in a longer piece of the
    /// same cone. Coverage, proximity and every checker verdict are
    /// unchanged; long cycles stay tractable.
    Maximal,
}

/// A maximal run of matching letters along one diagonal of the fiber
/// product of two cycles. Components of that fiber product are exactly
/// these runs.
struct Run {
    a_start: usize,
    /// First edge of the run on the second cycle, in its own orientation.
    b_start: usize,
    /// `None` when the whole diagonal matches (a cycle in the product).
    len: Option<usize>,
    inverted: bool,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Runs of the fiber product of cycle words `a` and `b`, whose vertex `k`
/// (before letter `k`) lies over base vertex `va[k]` (resp. `vb[k]`). With
/// `same`, the two are one cone and fully matching forward diagonals (the
/// identity and deck rotations) are dropped.
fn cycle_runs(
    a: &[Letter],
    va: &[usize],
    b: &[Letter],
    vb: &[usize],
    same: bool,
    mut emit: impl FnMut(Run),
) {
    let (n, m) = (a.len(), b.len());
    let g = gcd(n, m);
    let l = n / g * m;
    let rev: Vec<Letter> = b.iter().rev().map(|x| x.inverse()).collect();
    let vrev: Vec<usize> = (0..m).map(|j| vb[(m - j) % m]).collect();
    for (inverted, bb, vbb) in [(false, b, vb), (true, &rev[..], &vrev[..])] {
        // B edge of position `j` of `bb`, and the first B edge of a run of
        // length `r` starting there.
        let b_edge = |j: usize, r: usize| {
            if inverted {
                (2 * m - j % m - r % m) % m
            } else {
                j % m
            }
        };
        for d in 0..g {
            let hit = |t: usize| a[t % n] == bb[(d + t) % m] && va[t % n] == vbb[(d + t) % m];
            let Some(t0) = (0..l).find(|&t| !hit(t)) else {
                if !(same && !inverted) {
                    emit(Run {
                        a_start: 0,
                        b_start: b_edge(d, 0),
                        len: None,
                        inverted,
                    });
                }
                continue;
            };
            let mut t = t0 + 1;
            while t <= t0 + l {
                if !hit(t) {
                    t += 1;
                    continue;
                }
                let s = t;
                while hit(t) {
                    t += 1;
                }
                let r = t - s;
                emit(Run {
                    a_start: s % n,
                    b_start: b_edge(d + s, r),
                    len: Some(r),
                    inverted,
                });
            }
        }
    }
}

fn arc_piece(
    cone: &Cone,
    i: usize,
    other: usize,
    start: usize,
    len: Option<usize>,
    backwards: bool,
) -> Piece {
    let n = cone.word.as_ref().expect("cycle cone").len();
    let (count, length) = match len {
        Some(r) => (r, Extent::Finite(r)),
        None => (n, Extent::Unbounded),
    };
    let mut path: Vec<Dart> = (0..count)
        .map(|k| cone.cycle_dart((start + k) % n))
        .collect();
    if backwards {
        path.reverse();
        for d in &mut path {
            *d = crate::graph::bar(*d);
        }
    }
    let mut edges: Vec<usize> = (0..count.min(n)).map(|k| (start + k) % n).collect();
    let mut vertices: Vec<usize> = (0..=count.min(n)).map(|k| (start + k) % n).collect();
    edges.sort_unstable();
    edges.dedup();
    vertices.sort_unstable();
    vertices.dedup();
    Piece {
        kind: PieceKind::Cone,
        cone: i,
        other,
        path,
        length,
        support: Support { vertices, edges },
    }
}

/// Longest piece starting at each edge of a cycle cone, with the least
/// other cone realizing it; `usize::MAX` length means unbounded.
type BestArcs = Vec<(usize, usize)>;

fn improve(best: &mut BestArcs, start: usize, len: usize, other: usize) {
    let cur = &mut best[start];
    if len > cur.0 || (len == cur.0 && len > 0 && other < cur.1) {
        *cur = (len, other);
    }
}

fn cycle_pair(
    p: &CubicalPresentation,
    i: usize,
    j: usize,
    detail: PieceDetail,
) -> (Vec<Piece>, Vec<(usize, BestArcs)>) {
    let (ci, cj) = (&p.cones[i], &p.cones[j]);
    let (a, b) = (
        ci.word.as_ref().unwrap().letters(),
        cj.word.as_ref().unwrap().letters(),
    );
    let mut pieces = Vec::new();
    let mut best_a: BestArcs = vec![(0, usize::MAX); a.len()];
    let mut best_b: BestArcs = vec![(0, usize::MAX); b.len()];
    cycle_runs(
        a,
        &ci.base_map,
        b,
        &cj.base_map,
        i == j,
        |run| match detail {
            PieceDetail::Full => {
                pieces.push(arc_piece(ci, i, j, run.a_start, run.len, false));
                if i != j {
                    pieces.push(arc_piece(cj, j, i, run.b_start, run.len, run.inverted));
                }
            }
            PieceDetail::Maximal => {
                let r = run.len.unwrap_or(usize::MAX);
                improve(&mut best_a, run.a_start, r, j);
                if i != j {
                    improve(&mut best_b, run.b_start, r, i);
                }
            }
        },
    );
    let mut best = Vec::new();
    if detail == PieceDetail::Maximal {
        best.push((i, best_a));
        if i != j {
            best.push((j, best_b));
        }
    }
    (pieces, best)
}

fn graph_pair(p: &CubicalPresentation, i: usize, j: usize) -> Vec<Piece> {
    let (ci, cj) = (&p.cones[i], &p.cones[j]);
    let fp = FiberProduct::over(&ci.graph, &ci.base_map, &cj.graph, &cj.base_map);
    let mut out = Vec::new();
    for c in &fp.components {
        if i == j && c.covers_a_bijectively(&ci.graph) && c.covers_b_bijectively(&cj.graph) {
            continue;
        }
        out.push(piece_from_component(c, i, j, true));
        if i != j {
            out.push(piece_from_component(c, j, i, false));
        }
    }
    out
}

fn periodic_pieces(p: &CubicalPresentation, i: usize) -> Vec<Piece> {
    let ci = &p.cones[i];
    let Some(w) = &ci.word else { return Vec::new() };
    let n = w.len();
    rotation_symmetries(w)
        .into_iter()
        .map(|s| Piece {
            kind: PieceKind::Periodic,
            cone: i,
            other: s,
            path: (0..n - s).map(|k| ci.cycle_dart(k)).collect(),
            length: Extent::Finite(n - s),
            support: Support {
                vertices: (0..n).collect(),
                edges: (0..n).collect(),
            },
        })
        .collect()
}

/// Arcs of `best` not contained in the arc starting one edge earlier.
fn maximal_arcs(cone: &Cone, i: usize, best: &BestArcs) -> Vec<Piece> {
    let n = best.len();
    if let Some(&(_, other)) = best.iter().find(|b| b.0 == usize::MAX) {
        return vec![arc_piece(cone, i, other, 0, None, false)];
    }
    (0..n)
        .filter(|&s| best[s].0 > 0 && best[(s + n - 1) % n].0 < best[s].0 + 1)
        .map(|s| arc_piece(cone, i, best[s].1, s, Some(best[s].0), false))
        .collect()
}

fn piece_order(a: &Piece, b: &Piece) -> Ordering {
    (a.cone, a.kind, a.other, &a.path).cmp(&(b.cone, b.kind, b.other, &b.path))
}

pub fn enumerate_pieces(p: &CubicalPresentation) -> Result<PieceEnumeration> {
    enumerate_pieces_with(p, PieceDetail::Full)
}

pub fn enumerate_pieces_with(
    p: &CubicalPresentation,
    detail: PieceDetail,
) -> Result<PieceEnumeration> {
    if !p.is_graphical() {
        return Err(Error::UnsupportedDimension(
            "piece enumeration needs a graph base; square bases are supported by the complexes checks only".into(),
        ));
    }
    let r = p.cones.len();
    let pairs: Vec<(usize, usize)> = (0..r).flat_map(|i| (i..r).map(move |j| (i, j))).collect();
    let results: Vec<(Vec<Piece>, Vec<(usize, BestArcs)>)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            if p.cones[i].is_cycle() && p.cones[j].is_cycle() {
                cycle_pair(p, i, j, detail)
            } else {
                (graph_pair(p, i, j), Vec::new())
            }
        })
        .collect();
    let mut pieces = Vec::new();
    let mut best: Vec<Option<BestArcs>> = vec![None; r];
    for (ps, bs) in results {
        pieces.extend(ps);
        for (c, b) in bs {
            match &mut best[c] {
                None => best[c] = Some(b),
                Some(acc) => {
                    for (s, &(len, other)) in b.iter().enumerate() {
                        improve(acc, s, len, other);
                    }
                }
            }
        }
    }
    for (i, b) in best.iter().enumerate() {
        if let Some(b) = b {
            pieces.extend(maximal_arcs(&p.cones[i], i, b));
        }
    }
    for i in 0..r {
        pieces.extend(periodic_pieces(p, i));
        for e in 0..p.base.num_edges() {
            pieces.push(Piece {
                kind: PieceKind::Wall,
                cone: i,
                other: e,
                path: Vec::new(),
                length: Extent::Finite(0),
                support: Support::default(),
            });
        }
    }
    pieces.sort_by(piece_order);

    let mut cones = Vec::with_capacity(r);
    let mut d = Extent::Finite(0);
    for (i, cone) in p.cones.iter().enumerate() {
        let max_piece = pieces
            .iter()
            .filter(|pc| pc.cone == i && pc.kind != PieceKind::Wall)
            .map(|pc| pc.length)
            .max()
            .unwrap_or(Extent::Finite(0));
        d = d.max(max_piece);
        let min_cover = if cone.is_cycle() {
            min_cover(cone.word.as_ref().unwrap().len(), &arcs_of(p, &pieces, i))
        } else {
            None
        };
        cones.push(ConeStats {
            cone: i,
            length: cone.systole(),
            max_piece,
            min_cover,
        });
    }
    let m = Extent::Finite(0);
    let report = PieceReport {
        cones,
        d,
        m,
        k: d.max(m),
        bounded_verification: p.cones.iter().any(|c| !c.is_cycle()),
    };
    Ok(PieceEnumeration { pieces, report })
}

/// Maximal arcs of cone `i` covered by pieces (cycle cones only). Periodic
/// pieces contribute an arc at every start.
pub fn arcs_of(p: &CubicalPresentation, pieces: &[Piece], i: usize) -> Vec<Arc> {
    let cone = &p.cones[i];
    let n = cone.word.as_ref().expect("cycle cone").len();
    let mut arcs = BTreeSet::new();
    for pc in pieces.iter().filter(|pc| pc.cone == i) {
        match (pc.kind, pc.length) {
            (PieceKind::Wall, _) => {}
            (_, Extent::Unbounded) => {
                arcs.insert(Arc { start: 0, len: n });
            }
            (PieceKind::Periodic, Extent::Finite(l)) => {
                for s in 0..n {
                    arcs.insert(Arc { start: s, len: l });
                }
            }
            (PieceKind::Cone, Extent::Finite(l)) => {
                if l == 0 {
                    continue;
                }
                let first = pc.path[0];
                let along = first == cone.cycle_dart(dart_edge(first));
                let start = if along {
                    cone.graph.dart_src(first)
                } else {
                    cone.graph.dart_dst(*pc.path.last().unwrap())
                };
                arcs.insert(Arc { start, len: l });
            }
        }
    }
    arcs.into_iter().collect()
}

/// Fewest arcs (sub-arcs allowed) tiling a cycle of length `n`; `None` if
/// some edge is in no arc.
pub fn min_cover(n: usize, arcs: &[Arc]) -> Option<usize> {
    if arcs.iter().any(|a| a.len >= n) {
        return Some(1);
    }
    // reach[x] = furthest unrolled point reachable by one arc containing
    // the edge starting at x.
    let mut reach = vec![0usize; n];
    for a in arcs {
        for k in 0..a.len {
            let x = (a.start + k) % n;
            reach[x] = reach[x].max(a.len - k);
        }
    }
    if reach.iter().any(|&r| r == 0) {
        return None;
    }
    let starts: BTreeSet<usize> = arcs.iter().map(|a| a.start).collect();
    starts
        .into_iter()
        .map(|s| cover_from(s, s + n, &reach))
        .min()
        .flatten()
}

/// Greedy count of arcs tiling the unrolled segment `[from, to)`.
fn cover_from(from: usize, to: usize, reach: &[usize]) -> Option<usize> {
    let n = reach.len();
    let (mut pos, mut count) = (from, 0);
    while pos < to {
        let r = reach[pos % n];
        if r == 0 {
            return None;
        }
        pos += r;
        count += 1;
    }
    Some(count)
}

/// Fewest pieces concatenating to the unrolled segment of `len` edges
/// starting at `start` on a cycle whose per-edge reach is `reach`.
fn segment_cover(start: usize, len: usize, reach: &[usize]) -> Option<usize> {
    if len == 0 {
        return Some(0);
    }
    cover_from(start, start + len, reach)
}

fn reach_table(n: usize, arcs: &[Arc]) -> Vec<usize> {
    let mut reach = vec![0usize; n];
    for a in arcs {
        let len = a.len.min(4 * n + 4);
        for k in 0..len.min(n) {
            let x = (a.start + k) % n;
            reach[x] = reach[x].max(if a.len >= n {
                usize::MAX / 4
            } else {
                a.len - k
            });
        }
    }
    reach
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CPrimeFailure {
    pub cone: usize,
    pub piece_kind: PieceKind,
    pub other: usize,
    pub piece_length: Extent,
    pub cone_length: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CPrimeReport {
    pub alpha: Rational,
    pub passed: bool,
    pub failures: Vec<CPrimeFailure>,
    pub bounded_verification: bool,
}

/// `|μ| < |σ| / α` for every cone piece `μ` of every cone.
pub fn check_c_prime(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
    alpha: Rational,
) -> CPrimeReport {
    let (num, den) = (*alpha.numer() as u128, *alpha.denom() as u128);
    let mut failures = Vec::new();
    for pc in e.pieces.iter().filter(|pc| pc.kind != PieceKind::Wall) {
        let sigma = p.cones[pc.cone].systole().unwrap_or(0);
        let ok = match pc.length {
            Extent::Finite(mu) => (mu as u128) * num < (sigma as u128) * den,
            Extent::Unbounded => false,
        };
        if !ok {
            failures.push(CPrimeFailure {
                cone: pc.cone,
                piece_kind: pc.kind,
                other: pc.other,
                piece_length: pc.length,
                cone_length: sigma,
            });
        }
    }
    failures.dedup();
    CPrimeReport {
        alpha,
        passed: failures.is_empty(),
        failures,
        bounded_verification: e.report.bounded_verification,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CpReport {
    pub p: usize,
    pub passed: bool,
    /// Per cycle cone: fewest pieces tiling the cycle.
    pub min_covers: Vec<(usize, Option<usize>)>,
    pub failures: Vec<usize>,
}

pub fn check_c_p(p: &CubicalPresentation, e: &PieceEnumeration, p_count: usize) -> CpReport {
    let mut min_covers = Vec::new();
    let mut failures = Vec::new();
    for s in &e.report.cones {
        if !p.cones[s.cone].is_cycle() {
            continue;
        }
        min_covers.push((s.cone, s.min_cover));
        if matches!(s.min_cover, Some(m) if m < p_count) {
            failures.push(s.cone);
        }
    }
    CpReport {
        p: p_count,
        passed: failures.is_empty(),
        min_covers,
        failures,
    }
}

/// Steps available in a graph cone: every piece support and every edge.
fn step_supports(p: &CubicalPresentation, e: &PieceEnumeration, i: usize) -> Vec<Support> {
    let g = &p.cones[i].graph;
    let mut out: Vec<Support> = e
        .pieces
        .iter()
        .filter(|pc| pc.cone == i && pc.kind != PieceKind::Wall)
        .map(|pc| pc.support.clone())
        .collect();
    for (k, ed) in g.edges().iter().enumerate() {
        out.push(Support {
            vertices: vec![ed.src, ed.dst],
            edges: vec![k],
        });
    }
    out
}

/// Proximity tables for one cone.
pub struct Proximity {
    kind: ProximityKind,
    num_edges: usize,
}

enum ProximityKind {
    /// Cycle cones: every step is an arc, so reachable sets are arcs.
    /// `fwd[x]`/`bwd[x]` is how far one step from vertex `x` reaches.
    Cycle { fwd: Vec<usize>, bwd: Vec<usize> },
    Graph {
        supports: Vec<Support>,
        by_vertex: Vec<Vec<usize>>,
    },
}

impl Proximity {
    pub fn new(p: &CubicalPresentation, e: &PieceEnumeration, cone: usize) -> Self {
        let c = &p.cones[cone];
        let num_edges = c.graph.num_edges();
        if let Some(w) = &c.word {
            let n = w.len();
            let (mut fwd, mut bwd) = (vec![1usize; n], vec![1usize; n]);
            for a in arcs_of(p, &e.pieces, cone) {
                if a.len >= n {
                    fwd.iter_mut().for_each(|f| *f = n);
                    bwd.iter_mut().for_each(|b| *b = n);
                    break;
                }
                for k in 0..=a.len {
                    let x = (a.start + k) % n;
                    fwd[x] = fwd[x].max(a.len - k);
                    bwd[x] = bwd[x].max(k);
                }
            }
            return Proximity {
                kind: ProximityKind::Cycle { fwd, bwd },
                num_edges,
            };
        }
        let supports = step_supports(p, e, cone);
        let mut by_vertex = vec![Vec::new(); c.graph.num_vertices()];
        for (k, s) in supports.iter().enumerate() {
            for &v in &s.vertices {
                if by_vertex[v].last() != Some(&k) {
                    by_vertex[v].push(k);
                }
            }
        }
        Proximity {
            kind: ProximityKind::Graph {
                supports,
                by_vertex,
            },
            num_edges,
        }
    }

    /// On a cycle cone: the `m`-proximate edges of `v` as an arc
    /// `(first edge, number of edges)`.
    pub fn proximate_arc(&self, v: usize, m: usize) -> Option<Arc> {
        let ProximityKind::Cycle { fwd, bwd } = &self.kind else {
            return None;
        };
        let n = fwd.len();
        let (mut back, mut ahead) = (0usize, 0usize);
        for _ in 0..m {
            let (mut nb, mut na) = (back, ahead);
            for off in 0..=(back + ahead).min(n) {
                let x = (v + n - back % n + off) % n;
                // Offset of x from v, signed.
                let rel = off as isize - back as isize;
                na = na.max((rel + fwd[x] as isize).max(0) as usize);
                nb = nb.max((bwd[x] as isize - rel).max(0) as usize);
            }
            back = nb;
            ahead = na;
            if back + ahead >= n {
                return Some(Arc { start: 0, len: n });
            }
        }
        Some(Arc {
            start: (v + n - back % n) % n,
            len: back + ahead,
        })
    }

    /// Edges whose hyperplanes are `m`-proximate to `v`: reached by at most
    /// `m` steps, each a single edge or a path inside a piece.
    pub fn proximate_edges(&self, v: usize, m: usize) -> Vec<bool> {
        let mut hit = vec![false; self.num_edges];
        match &self.kind {
            ProximityKind::Cycle { .. } => {
                if m > 0 {
                    let a = self.proximate_arc(v, m).unwrap();
                    for k in 0..a.len {
                        hit[(a.start + k) % self.num_edges] = true;
                    }
                }
            }
            ProximityKind::Graph {
                supports,
                by_vertex,
            } => {
                let mut dist = vec![usize::MAX; by_vertex.len()];
                dist[v] = 0;
                let mut frontier = vec![v];
                for level in 0..m {
                    let mut next = Vec::new();
                    for &x in &frontier {
                        for &k in &by_vertex[x] {
                            let s = &supports[k];
                            for &e in &s.edges {
                                hit[e] = true;
                            }
                            if level + 1 < m {
                                for &y in &s.vertices {
                                    if dist[y] == usize::MAX {
                                        dist[y] = level + 1;
                                        next.push(y);
                                    }
                                }
                            }
                        }
                    }
                    frontier = next;
                }
            }
        }
        hit
    }
}

/// Whether the hyperplane dual to edge `u` of cone `cone` is
/// `m`-proximate to vertex `v`.
pub fn proximity(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
    cone: usize,
    v: usize,
    u: usize,
    m: usize,
) -> Result<bool> {
    if m < 1 {
        return Err(Error::InvalidArgument("proximity needs m ≥ 1".into()));
    }
    let c = p
        .cones
        .get(cone)
        .ok_or_else(|| Error::InvalidArgument(format!("no cone {cone}")))?;
    if v >= c.graph.num_vertices() {
        return Err(Error::UnknownVertex(v));
    }
    if u >= c.graph.num_edges() {
        return Err(Error::InvalidArgument(format!(
            "cone {cone} has no edge {u}"
        )));
    }
    Ok(Proximity::new(p, e, cone).proximate_edges(v, m)[u])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvexityFailure {
    pub cone: usize,
    pub hyperplane: usize,
    pub translate_distance: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvexityReport {
    pub k: Extent,
    pub passed: bool,
    pub failures: Vec<ConvexityFailure>,
}

/// For each cycle-cone hyperplane, the distance between distinct
/// translates of its carrier in the universal cover is the translation
/// length of the cone word's root; it must exceed `K`.
pub fn check_pieceful_convexity(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
) -> Result<ConvexityReport> {
    check_pieceful_convexity_with(p, e.report.k)
}

pub fn check_pieceful_convexity_with(
    p: &CubicalPresentation,
    k: Extent,
) -> Result<ConvexityReport> {
    let mut failures = Vec::new();
    for (i, c) in p.cones.iter().enumerate() {
        let w = c
            .word
            .as_ref()
            .ok_or_else(|| Error::UnsupportedCone(format!("cone {i} is not a cycle")))?;
        let shift = w.root().0.len();
        if Extent::Finite(shift) <= k {
            for u in 0..w.len() {
                failures.push(ConvexityFailure {
                    cone: i,
                    hyperplane: u,
                    translate_distance: shift,
                });
            }
        }
    }
    Ok(ConvexityReport {
        k,
        passed: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct B6Item {
    pub item: usize,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct B6Report {
    pub passed: bool,
    pub items: Vec<B6Item>,
}

/// Cap on the number of pieces in the convexity items.
pub const B6_PIECES: usize = 7;

fn validate_cone_walls(n: usize, walls: &[Wall]) -> std::result::Result<(), String> {
    let mut owner = vec![usize::MAX; n];
    for (wi, w) in walls.iter().enumerate() {
        if w.hyperplanes.is_empty() {
            return Err(format!("wall {wi} has no hyperplane"));
        }
        for &h in &w.hyperplanes {
            if h >= n {
                return Err(format!("wall {wi} names edge {h} outside the cycle"));
            }
            if owner[h] != usize::MAX {
                return Err(format!("edge {h} lies in walls {} and {wi}", owner[h]));
            }
            owner[h] = wi;
        }
        // Carriers of distinct hyperplanes of one wall are disjoint edges.
        for (x, &a) in w.hyperplanes.iter().enumerate() {
            for &b in &w.hyperplanes[x + 1..] {
                let (a1, b1) = ((a + 1) % n, (b + 1) % n);
                if a == b1 || b == a1 {
                    return Err(format!(
                        "wall {wi} has adjacent hyperplanes {a}, {b}: carriers meet"
                    ));
                }
            }
        }
        if let Err(reason) = w.check_axioms(n) {
            return Err(format!("wall {wi}: {reason}"));
        }
        if !w.separates_cycle(n) {
            return Err(format!("wall {wi} does not separate the cone"));
        }
    }
    if let Some(h) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(format!("edge {h} lies in no wall"));
    }
    Ok(())
}

/// Items (1)–(5) of B(6) for even cycle cones with the given walls.
pub fn check_b6(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
    walls: &[Vec<Wall>],
) -> Result<B6Report> {
    if walls.len() != p.cones.len() {
        return Err(Error::InvalidArgument(
            "one wall list per cone is required".into(),
        ));
    }
    for (i, c) in p.cones.iter().enumerate() {
        let w = c
            .word
            .as_ref()
            .ok_or_else(|| Error::UnsupportedCone(format!("cone {i} is not a cycle")))?;
        if w.len() % 2 == 1 {
            return Err(Error::OddCycle(w.len()));
        }
    }
    let mut items = Vec::new();

    let threshold = Rational::from_integer(14);
    let cp = check_c_prime(p, e, p.alpha);
    let item1 = if p.alpha < threshold {
        B6Item {
            item: 1,
            passed: false,
            detail: format!("alpha {} is below the B(6) threshold alpha >= 14", p.alpha),
        }
    } else if !cp.passed {
        B6Item {
            item: 1,
            passed: false,
            detail: format!("C'(1/{}) fails on {} pieces", p.alpha, cp.failures.len()),
        }
    } else {
        B6Item {
            item: 1,
            passed: true,
            detail: format!("C'(1/{}) holds with alpha >= 14", p.alpha),
        }
    };
    items.push(item1);

    let mut bad2 = Vec::new();
    for (i, ws) in walls.iter().enumerate() {
        let n = p.cones[i].word.as_ref().unwrap().len();
        if let Err(reason) = validate_cone_walls(n, ws) {
            bad2.push(format!("cone {i}: {reason}"));
        }
    }
    items.push(B6Item {
        item: 2,
        passed: bad2.is_empty(),
        detail: if bad2.is_empty() {
            "walls partition the hyperplanes of every cone".into()
        } else {
            bad2.join("; ")
        },
    });

    let results: Vec<(Vec<String>, Vec<String>, Vec<String>)> = (0..p.cones.len())
        .into_par_iter()
        .map(|i| {
            let n = p.cones[i].word.as_ref().unwrap().len();
            let reach = reach_table(n, &arcs_of(p, &e.pieces, i));
            let within = |start: usize, len: usize| matches!(segment_cover(start, len, &reach), Some(c) if c <= B6_PIECES);
            let mut b3 = Vec::new();
            // A path between distinct lifts of an edge's carrier runs over
            // the other n - 1 edges.
            for u in 0..n {
                if n > 1 && within(u + 1, n - 1) {
                    b3.push(format!("cone {i}: the complement of edge {u} is at most {B6_PIECES} pieces"));
                    break;
                }
            }
            let mut b4 = Vec::new();
            for (wi, w) in walls[i].iter().enumerate() {
                for &a in &w.hyperplanes {
                    for &b in &w.hyperplanes {
                        // Path starting with edge a and ending with edge b.
                        let len = if a == b { n + 1 } else { (b + n - a) % n + 1 };
                        if within(a, len) {
                            b4.push(format!("cone {i}: wall {wi} from edge {a} to edge {b} is at most {B6_PIECES} pieces"));
                        }
                    }
                }
                if b4.len() > 4 {
                    break;
                }
            }
            let mut b5 = Vec::new();
            let word = p.cones[i].word.as_ref().unwrap();
            let sets: BTreeSet<Vec<usize>> = walls[i].iter().map(|w| sorted(&w.hyperplanes)).collect();
            for s in rotation_symmetries(word) {
                for w in &walls[i] {
                    let moved = sorted(&w.hyperplanes.iter().map(|&h| (h + s) % n).collect::<Vec<_>>());
                    if !sets.contains(&moved) {
                        b5.push(format!("cone {i}: rotation by {s} does not preserve the walls"));
                        break;
                    }
                }
            }
            (b3, b4, b5)
        })
        .collect();
    for (item, name, pick) in [
        (3usize, "hyperplane convexity", 0usize),
        (4, "wall convexity", 1),
        (5, "equivariance", 2),
    ] {
        let bad: Vec<String> = results
            .iter()
            .flat_map(|r| match pick {
                0 => r.0.clone(),
                1 => r.1.clone(),
                _ => r.2.clone(),
            })
            .collect();
        items.push(B6Item {
            item,
            passed: bad.is_empty(),
            detail: if bad.is_empty() {
                format!("{name} holds")
            } else {
                bad.join("; ")
            },
        });
    }
    Ok(B6Report {
        passed: items.iter().all(|it| it.passed),
        items,
    })
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationFailure {
    pub cone: usize,
    pub p: usize,
    pub q: usize,
    pub w1: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeparationReport {
    pub passed: bool,
    /// Configurations (arc, w₁) meeting the premise.
    pub configurations: usize,
    pub failures: Vec<SeparationFailure>,
}

/// For every geodesic arc `k` from `p` to `q` on each cycle cone that
/// traverses an edge dual to `w₁`, where another hyperplane `w₁'` of
/// `w₁`'s wall is 1-proximate to `q` or also traversed: some wall has a
/// hyperplane in `k`, separates `p` from `q`, and has no hyperplane
/// 2-proximate to `p` or `q`.
pub fn check_wall_separation(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
    walls: &[Vec<Wall>],
) -> Result<SeparationReport> {
    if walls.len() != p.cones.len() {
        return Err(Error::InvalidArgument(
            "one wall list per cone is required".into(),
        ));
    }
    let per_cone: Vec<Result<(usize, Vec<SeparationFailure>)>> = (0..p.cones.len())
        .into_par_iter()
        .map(|i| separation_in_cone(p, e, &walls[i], i))
        .collect();
    let mut configurations = 0;
    let mut failures = Vec::new();
    for r in per_cone {
        let (c, f) = r?;
        configurations += c;
        failures.extend(f);
    }
    Ok(SeparationReport {
        passed: failures.is_empty(),
        configurations,
        failures,
    })
}

fn separation_in_cone(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
    walls: &[Wall],
    i: usize,
) -> Result<(usize, Vec<SeparationFailure>)> {
    let w = p.cones[i]
        .word
        .as_ref()
        .ok_or_else(|| Error::UnsupportedCone(format!("cone {i} is not a cycle")))?;
    let n = w.len();
    let prox = Proximity::new(p, e, i);
    let p1: Vec<Arc> = (0..n).map(|v| prox.proximate_arc(v, 1).unwrap()).collect();
    let p2: Vec<Arc> = (0..n).map(|v| prox.proximate_arc(v, 2).unwrap()).collect();
    let inside = |h: usize, a: &Arc| (h + n - a.start % n) % n < a.len;
    let mut wall_of = vec![usize::MAX; n];
    for (wi, wall) in walls.iter().enumerate() {
        for &h in &wall.hyperplanes {
            if h < n {
                wall_of[h] = wi;
            }
        }
    }
    let partners = |h: usize| -> Vec<usize> {
        match wall_of[h] {
            usize::MAX => Vec::new(),
            wi => walls[wi]
                .hyperplanes
                .iter()
                .copied()
                .filter(|&x| x != h && x < n)
                .collect(),
        }
    };

    // Witness for the arc of `len` edges from `start`: a separating wall
    // through the arc with no hyperplane 2-proximate to either end. Edges
    // still inside the 2-proximity arc of `start` cannot qualify.
    let witness = |start: usize, len: usize| -> bool {
        let end = (start + len) % n;
        let (a, b) = (&p2[start], &p2[end]);
        if a.len >= n || b.len >= n {
            return false;
        }
        let skip = (a.start + a.len + n - start) % n;
        let skip = if inside(start, a) { skip.min(len) } else { 0 };
        (skip..len).any(|k| {
            let wi = wall_of[(start + k) % n];
            if wi == usize::MAX {
                return false;
            }
            let wall = &walls[wi];
            let sides = (wall.side_of(start), wall.side_of(end));
            matches!(sides, (Some(x), Some(y)) if x != y)
                && wall
                    .hyperplanes
                    .iter()
                    .all(|&h| !inside(h, a) && !inside(h, b))
        })
    };

    let close = walls.iter().any(|wall| {
        wall.hyperplanes.iter().any(|&x| {
            wall.hyperplanes.iter().any(|&y| {
                let d = (y + n - x) % n;
                x != y && d.min(n - d) < n / 2
            })
        })
    });

    let mut configs = 0;
    let mut failures = Vec::new();
    if close {
        for start in 0..n {
            for len in 1..=n / 2 {
                let end = (start + len) % n;
                let seg = Arc { start, len };
                let mut ok: Option<bool> = None;
                for (pp, qq) in [(start, end), (end, start)] {
                    for k in 0..len {
                        let h = (start + k) % n;
                        if partners(h)
                            .iter()
                            .any(|&h2| inside(h2, &p1[qq]) || inside(h2, &seg))
                        {
                            configs += 1;
                            if !*ok.get_or_insert_with(|| witness(start, len)) {
                                failures.push(SeparationFailure {
                                    cone: i,
                                    p: pp,
                                    q: qq,
                                    w1: h,
                                });
                            }
                        }
                    }
                }
            }
        }
    } else {
        // Hyperplanes whose wall has another hyperplane 1-proximate to q,
        // as offsets back from q and forward from q.
        let mut back: Vec<Vec<usize>> = Vec::with_capacity(n);
        let mut ahead: Vec<Vec<usize>> = Vec::with_capacity(n);
        for q in 0..n {
            let a = &p1[q];
            let mut hs: Vec<usize> = (0..a.len.min(n))
                .flat_map(|k| partners((a.start + k) % n))
                .collect();
            hs.sort_unstable();
            hs.dedup();
            let mut b: Vec<usize> = hs.iter().map(|&h| (q + 2 * n - 1 - h) % n).collect();
            let mut f: Vec<usize> = hs.iter().map(|&h| (h + n - q) % n).collect();
            b.sort_unstable();
            f.sort_unstable();
            back.push(b);
            ahead.push(f);
        }
        for start in 0..n {
            for len in 1..=n / 2 {
                let end = (start + len) % n;
                // p = start, q = end: h in the arc iff its offset back from end is < len.
                let to_end = back[end].partition_point(|&o| o < len);
                // p = end, q = start.
                let to_start = ahead[start].partition_point(|&o| o < len);
                if to_end + to_start == 0 {
                    continue;
                }
                configs += to_end + to_start;
                if !witness(start, len) {
                    for &o in &back[end][..to_end] {
                        failures.push(SeparationFailure {
                            cone: i,
                            p: start,
                            q: end,
                            w1: (end + 2 * n - 1 - o) % n,
                        });
                    }
                    for &o in &ahead[start][..to_start] {
                        failures.push(SeparationFailure {
                            cone: i,
                            p: end,
                            q: start,
                            w1: (start + o) % n,
                        });
                    }
                }
            }
        }
    }
    failures.sort_by_key(|f| (f.cone, f.p, f.q, f.w1));
    failures.dedup();
    Ok((configs, failures))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HyperbolicityCertificate {
    pub issued: bool,
    pub alpha: Rational,
    pub c_prime_verified: bool,
    pub base_hyperbolic: bool,
    pub compact: bool,
    pub conclusion: Option<String>,
    pub refusal: Option<String>,
}

/// Records the checked premises of the hyperbolicity theorem for cubical
/// presentations: C'(1/α) with α ≥ 14, hyperbolic base, compactness.
pub fn hyperbolicity_certificate(
    p: &CubicalPresentation,
    e: &PieceEnumeration,
) -> HyperbolicityCertificate {
    let cp = check_c_prime(p, e, p.alpha);
    let base_hyperbolic = p.is_graphical();
    let refusal = if p.alpha < Rational::from_integer(14) {
        Some(format!("alpha {} is below 14", p.alpha))
    } else if !p.compact {
        Some("cone list is declared non-compact".to_string())
    } else if !cp.passed {
        Some(format!("C'(1/{}) fails", p.alpha))
    } else if !base_hyperbolic {
        Some("base is not a graph; hyperbolicity of its fundamental group is not known by construction".to_string())
    } else {
        None
    };
    HyperbolicityCertificate {
        issued: refusal.is_none(),
        alpha: p.alpha,
        c_prime_verified: cp.passed,
        base_hyperbolic,
        compact: p.compact,
        conclusion: refusal
            .is_none()
            .then(|| "the fundamental group of the coned-off space is hyperbolic".to_string()),
        refusal,
    }
}

/// Piece lengths grouped by ordered cone pair, for symmetry checks.
pub fn piece_lengths_by_pair(e: &PieceEnumeration) -> BTreeMap<(usize, usize), Vec<Extent>> {
    let mut out: BTreeMap<(usize, usize), Vec<Extent>> = BTreeMap::new();
    for pc in e.pieces.iter().filter(|pc| pc.kind == PieceKind::Cone) {
        out.entry((pc.cone, pc.other)).or_default().push(pc.length);
    }
    for v in out.values_mut() {
        v.sort();
    }
    out
}
