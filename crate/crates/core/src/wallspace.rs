//! Walls on cone cycles, the induced equivalence on base hyperplanes,
//! Sageev duals of finite wallspaces, and axis cutting.
//!
//! On a cycle of length `2n`, edge `j` joins vertex `j` to vertex `j + 1`.
//! A crossing wall is an antipodal pair `{j, j + n}`; its half-spaces are
//! the two arcs of vertices between the pair. A wall made of a single
//! non-crossing hyperplane leaves the whole cycle on one side.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{dart_forward, UnionFind};
use crate::smallcancel::CubicalPresentation;
use crate::words::FreeWord;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Wall {
    /// Dual edges (hyperplanes) of the wall, ascending.
    pub hyperplanes: Vec<usize>,
    /// Points on each side, ascending.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// The wall's hyperplanes cross the cone's generator.
    pub crossing: bool,
}

impl Wall {
    /// A wall given only by its half-spaces.
    pub fn from_halves(left: Vec<usize>, right: Vec<usize>) -> Self {
        let mut w = Wall {
            hyperplanes: Vec::new(),
            left,
            right,
            crossing: true,
        };
        w.left.sort_unstable();
        w.right.sort_unstable();
        w
    }

    /// Both wallspace axioms over `points` points: the half-spaces cover
    /// every point and are disjoint.
    pub fn check_axioms(&self, points: usize) -> std::result::Result<(), String> {
        let l: BTreeSet<usize> = self.left.iter().copied().collect();
        let r: BTreeSet<usize> = self.right.iter().copied().collect();
        if l.len() != self.left.len() || r.len() != self.right.len() {
            return Err("a half-space lists a point twice".into());
        }
        if let Some(x) = l.intersection(&r).next() {
            return Err(format!("point {x} lies in both half-spaces"));
        }
        let all: BTreeSet<usize> = l.union(&r).copied().collect();
        if all != (0..points).collect() {
            return Err("half-spaces do not cover the points".into());
        }
        Ok(())
    }

    pub fn side_of(&self, x: usize) -> Option<bool> {
        if self.left.binary_search(&x).is_ok() {
            Some(false)
        } else if self.right.binary_search(&x).is_ok() {
            Some(true)
        } else {
            None
        }
    }

    /// On an `n`-cycle: both sides nonempty, wall edges join the sides and
    /// every other edge stays on one side.
    pub fn separates_cycle(&self, n: usize) -> bool {
        if self.left.is_empty() || self.right.is_empty() {
            return false;
        }
        (0..n).all(|e| {
            let cut = self.side_of(e) != self.side_of((e + 1) % n);
            cut == self.hyperplanes.contains(&e)
        })
    }

    /// Four-corner test.
    pub fn crosses(&self, other: &Wall) -> bool {
        let meet = |a: &[usize], b: &[usize]| a.iter().any(|x| b.binary_search(x).is_ok());
        meet(&self.left, &other.left)
            && meet(&self.left, &other.right)
            && meet(&self.right, &other.left)
            && meet(&self.right, &other.right)
    }
}

/// Walls on a cycle of the given length: crossing hyperplanes are paired
/// antipodally, non-crossing ones are singleton walls.
pub fn cone_walls(cycle_length: usize, crossing: &[bool]) -> Result<Vec<Wall>> {
    if cycle_length % 2 == 1 {
        return Err(Error::OddCycle(cycle_length));
    }
    if crossing.len() != cycle_length {
        return Err(Error::InvalidArgument(format!(
            "{} crossing flags for a cycle of length {cycle_length}",
            crossing.len()
        )));
    }
    let l = cycle_length;
    let n = l / 2;
    let mut walls = Vec::new();
    for j in 0..l {
        if crossing[j] {
            if !crossing[(j + n) % l] {
                return Err(Error::InvalidWall {
                    index: j,
                    reason: format!(
                        "crossing hyperplane {j} has a non-crossing antipode {}",
                        (j + n) % l
                    ),
                });
            }
            if j < n {
                let left: Vec<usize> = (j + 1..=j + n).map(|v| v % l).collect();
                let mut right: Vec<usize> = (j + n + 1..=j + l).map(|v| v % l).collect();
                let mut left_sorted = left;
                left_sorted.sort_unstable();
                right.sort_unstable();
                walls.push(Wall {
                    hyperplanes: vec![j, j + n],
                    left: left_sorted,
                    right,
                    crossing: true,
                });
            }
        } else {
            walls.push(Wall {
                hyperplanes: vec![j],
                left: (0..l).collect(),
                right: Vec::new(),
                crossing: false,
            });
        }
    }
    walls.sort_by(|a, b| a.hyperplanes.cmp(&b.hyperplanes));
    Ok(walls)
}

/// Antipodal walls on every edge of an even cycle.
pub fn antipodal_walls(cycle_length: usize) -> Result<Vec<Wall>> {
    cone_walls(cycle_length, &vec![true; cycle_length])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallClass {
    /// Base hyperplane indices, ascending.
    pub hyperplanes: Vec<usize>,
    /// Cones whose walls contributed an identification.
    pub witnesses: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WallEquivalence {
    pub classes: Vec<WallClass>,
    /// Identifications are computed on the finite complex, not on
    /// translates in the universal cover.
    pub quotient_only: bool,
}

/// Transitive closure on base hyperplanes of "two cone hyperplanes in one
/// wall of a cone".
pub fn wall_equivalence(p: &CubicalPresentation, walls: &[Vec<Wall>]) -> Result<WallEquivalence> {
    if walls.len() != p.cones.len() {
        return Err(Error::InvalidArgument(
            "one wall list per cone is required".into(),
        ));
    }
    let base = &p.base;
    let bg = base.graph();
    let hs = base.hyperplanes();
    let mut class_of_edge = vec![0; base.num_edges()];
    for (k, h) in hs.iter().enumerate() {
        for &e in &h.edges {
            class_of_edge[e] = k;
        }
    }
    let mut uf = UnionFind::new(hs.len());
    let mut links: Vec<(usize, usize, usize)> = Vec::new();
    for (i, cone) in p.cones.iter().enumerate() {
        let image = |e: usize| -> Result<usize> {
            let ed = cone.graph.edge(e);
            let v = cone.base_map[ed.src];
            bg.darts_at(v)
                .iter()
                .copied()
                .find(|&d| dart_forward(d) && bg.edge(d / 2).label == ed.label)
                .map(|d| class_of_edge[d / 2])
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("cone {i} edge {e} has no base image"))
                })
        };
        for w in &walls[i] {
            for &h in &w.hyperplanes {
                if h >= cone.graph.num_edges() {
                    return Err(Error::InvalidWall {
                        index: h,
                        reason: format!("cone {i} has no edge {h}"),
                    });
                }
            }
            let imgs = w
                .hyperplanes
                .iter()
                .map(|&h| image(h))
                .collect::<Result<Vec<_>>>()?;
            for pair in imgs.windows(2) {
                uf.union(pair[0], pair[1]);
                links.push((pair[0], pair[1], i));
            }
        }
    }
    let mut groups: BTreeMap<usize, (Vec<usize>, BTreeSet<usize>)> = BTreeMap::new();
    let mut root_min: HashMap<usize, usize> = HashMap::new();
    for k in 0..hs.len() {
        let r = uf.find(k);
        let key = *root_min.entry(r).or_insert(k);
        groups.entry(key).or_default().0.push(k);
    }
    for (a, _, i) in links {
        let key = root_min[&uf.find(a)];
        groups.get_mut(&key).unwrap().1.insert(i);
    }
    let classes = groups
        .into_values()
        .map(|(hyperplanes, w)| WallClass {
            hyperplanes,
            witnesses: w.into_iter().collect(),
        })
        .collect();
    Ok(WallEquivalence {
        classes,
        quotient_only: true,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteWallspace {
    pub points: usize,
    pub walls: Vec<Wall>,
}

impl FiniteWallspace {
    pub fn new(points: usize, walls: Vec<Wall>) -> Result<Self> {
        if points == 0 {
            return Err(Error::InvalidArgument(
                "a wallspace needs at least one point".into(),
            ));
        }
        for (index, w) in walls.iter().enumerate() {
            w.check_axioms(points)
                .map_err(|reason| Error::InvalidWall { index, reason })?;
        }
        Ok(FiniteWallspace { points, walls })
    }

    /// Orientation of point `x`: for each wall, `true` when `x` is on the right.
    pub fn principal(&self, x: usize) -> Vec<bool> {
        self.walls
            .iter()
            .map(|w| w.side_of(x) == Some(true))
            .collect()
    }

    fn half(&self, w: usize, right: bool) -> &[usize] {
        if right {
            &self.walls[w].right
        } else {
            &self.walls[w].left
        }
    }

    /// Chosen half-spaces are nonempty and pairwise intersect.
    pub fn is_consistent(&self, o: &[bool]) -> bool {
        let m = self.walls.len();
        for a in 0..m {
            let ha = self.half(a, o[a]);
            if ha.is_empty() {
                return false;
            }
            for b in a + 1..m {
                let hb = self.half(b, o[b]);
                if !ha.iter().any(|x| hb.binary_search(x).is_ok()) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualComplex {
    pub num_walls: usize,
    /// Consistent orientations, sorted.
    pub vertices: Vec<Vec<bool>>,
    /// `(u, v, wall)` with `u < v`, sorted.
    pub edges: Vec<(usize, usize, usize)>,
    /// Corners `[v, v^a, v^ab, v^b]` with `v` least and `a < b`, sorted.
    pub squares: Vec<[usize; 4]>,
    /// Vertex of each point's orientation.
    pub principal: Vec<usize>,
}

pub fn orientation_label(o: &[bool]) -> String {
    o.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Classes of walls inducing the same partition of the points.
fn partition_classes(ws: &FiniteWallspace) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (k, w) in ws.walls.iter().enumerate() {
        let same = |c: &&mut Vec<usize>| {
            let first = &ws.walls[c[0]];
            (first.left == w.left && first.right == w.right)
                || (first.left == w.right && first.right == w.left)
        };
        match classes.iter_mut().find(same) {
            Some(c) => c.push(k),
            None => classes.push(vec![k]),
        }
    }
    classes
}

/// Sageev dual: consistent orientations reached from principal ones by
/// flipping one wall at a time. Walls with the same partition flip
/// together; an edge is labelled by the least wall of its class.
pub fn sageev_dual(ws: &FiniteWallspace, max_vertices: usize) -> Result<DualComplex> {
    let classes = partition_classes(ws);
    let flip_class = |o: &[bool], c: usize| {
        let mut f = o.to_vec();
        for &w in &classes[c] {
            f[w] = !f[w];
        }
        f
    };
    let mut seen: HashMap<Vec<bool>, ()> = HashMap::new();
    let mut queue = VecDeque::new();
    let budget = |n: usize| {
        if n > max_vertices {
            Err(Error::BudgetExceeded(format!(
                "dual complex exceeds {max_vertices} vertices"
            )))
        } else {
            Ok(())
        }
    };
    for x in 0..ws.points {
        let o = ws.principal(x);
        if seen.insert(o.clone(), ()).is_none() {
            budget(seen.len())?;
            queue.push_back(o);
        }
    }
    while let Some(o) = queue.pop_front() {
        for c in 0..classes.len() {
            let f = flip_class(&o, c);
            if !seen.contains_key(&f) && ws.is_consistent(&f) {
                seen.insert(f.clone(), ());
                budget(seen.len())?;
                queue.push_back(f);
            }
        }
    }
    let mut vertices: Vec<Vec<bool>> = seen.into_keys().collect();
    vertices.sort();
    let index: HashMap<&Vec<bool>, usize> =
        vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let flip = |v: usize, c: usize| index.get(&flip_class(&vertices[v], c)).copied();
    let mut edges = Vec::new();
    let mut squares = BTreeSet::new();
    for v in 0..vertices.len() {
        for a in 0..classes.len() {
            if let Some(u) = flip(v, a) {
                if v < u {
                    edges.push((v, u, classes[a][0]));
                }
                for b in a + 1..classes.len() {
                    if let (Some(vb), Some(vab)) = (flip(v, b), flip(u, b)) {
                        let mut cyc = [v, u, vab, vb];
                        let least = (0..4).min_by_key(|&k| cyc[k]).unwrap();
                        cyc.rotate_left(least);
                        if cyc[1] > cyc[3] {
                            cyc.swap(1, 3);
                        }
                        squares.insert(cyc);
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    let principal = (0..ws.points).map(|x| index[&ws.principal(x)]).collect();
    Ok(DualComplex {
        num_walls: ws.walls.len(),
        vertices,
        edges,
        squares: squares.into_iter().collect(),
        principal,
    })
}

impl DualComplex {
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut uf = UnionFind::new(n);
        for &(u, v, _) in &self.edges {
            uf.union(u, v);
        }
        let r = uf.find(0);
        (0..n).all(|v| uf.find(v) == r)
    }

    /// 2ⁿ vertices, n·2ⁿ⁻¹ edges, every vertex of degree n.
    pub fn is_cube(&self, dim: usize) -> bool {
        let n = self.vertices.len();
        let mut deg = vec![0; n];
        for &(u, v, _) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        n == 1 << dim
            && self.edges.len() == if dim == 0 { 0 } else { dim << (dim - 1) }
            && deg.iter().all(|&d| d == dim)
    }

    /// Graphviz export; vertices are labelled by orientation bit strings.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph dual {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"{}\"];", orientation_label(v));
        }
        for &(u, v, w) in &self.edges {
            let _ = writeln!(s, "  v{u} -- v{v} [label=\"w{w}\"];");
        }
        for (k, q) in self.squares.iter().enumerate() {
            let _ = writeln!(
                s,
                "  // square {k}: v{} v{} v{} v{}",
                q[0], q[1], q[2], q[3]
            );
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxisCheck {
    /// Translation length along the unrolled cycle.
    pub translation: usize,
    pub cut: bool,
    /// The first crossing wall that cuts, if any.
    pub wall: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CutReport {
    pub passed: bool,
    pub generator: AxisCheck,
    /// Nontrivial rotations of the cone word (only for proper powers).
    pub rotations: Vec<AxisCheck>,
    pub remedy: Option<String>,
}

/// Shortest arc covering all hyperplanes of a wall on an `l`-cycle, as
/// (first edge, number of edges).
fn hull(hyperplanes: &[usize], l: usize) -> (usize, usize) {
    let mut hs = hyperplanes.to_vec();
    hs.sort_unstable();
    hs.dedup();
    if hs.len() == 1 {
        return (hs[0], 1);
    }
    // Largest gap between cyclically consecutive hyperplanes.
    let k = hs.len();
    let (gap_after, gap) = (0..k)
        .map(|i| (i, (hs[(i + 1) % k] + l - hs[i]) % l))
        .max_by_key(|&(i, g)| (g, std::cmp::Reverse(i)))
        .unwrap();
    let first = hs[(gap_after + 1) % k];
    (first, l - gap + 1)
}

/// Axis-cutting on the unrolled cycle: translates of a crossing wall's
/// hull by the translation must be pairwise disjoint, so each translate
/// meets the axis within its own period.
pub fn check_cut_by_wall(word: &FreeWord, walls: &[Wall]) -> CutReport {
    let l = word.len();
    let crossing: Vec<usize> = (0..walls.len())
        .filter(|&i| walls[i].crossing && !walls[i].hyperplanes.is_empty())
        .collect();
    let check = |t: usize| {
        let wall = crossing.iter().copied().find(|&i| {
            let (_, span) = hull(&walls[i].hyperplanes, l);
            span <= t
        });
        AxisCheck {
            translation: t,
            cut: wall.is_some(),
            wall,
        }
    };
    let generator = check(l);
    let (root, exp) = word.root();
    let rotations: Vec<AxisCheck> = if exp > 1 {
        vec![check(root.len())]
    } else {
        Vec::new()
    };
    let passed = generator.cut && rotations.iter().all(|r| r.cut);
    let remedy = if crossing.is_empty() {
        Some("no crossing walls: mark the hyperplanes that cross the generator".to_string())
    } else if !passed {
        Some("a translate of every crossing wall overlaps its neighbour on the axis".to_string())
    } else {
        None
    };
    CutReport {
        passed,
        generator,
        rotations,
        remedy,
    }
}
