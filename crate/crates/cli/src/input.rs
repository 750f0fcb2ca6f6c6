//! Line-oriented input files. Blank lines and `#` comments are ignored;
//! the first directive must be `kind <presentation|graph|wallspace|noise|malnormal>`.
//! Words are whitespace-separated generator names, `'` marking inverses.
//!
//! ```text
//! kind presentation      kind graph               kind wallspace
//! generators a           generators a b           points 4
//! relator a a            vertices 2               wall 0 1 | 2 3
//! rank 2                 basepoint 0              wall 0 2 | 1 3
//!                        dart e 0 1 a
//!                        dart e' 1 0 a'
//!                        cone 0 a b a' b'
//! ```
//!
//! `noise` files take `generators`, two `lambda` lines, `gamma` and `k`;
//! `malnormal` files take `generators` and any number of `subgroup`
//! lines (words separated by `,`) and `h` lines.

use std::fmt::Write as _;
use std::path::Path;

use cubicate::graph::{Edge, LabeledGraph};
use cubicate::wallspace::{FiniteWallspace, Wall};
use cubicate::{Alphabet, FreeWord};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InputError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    File(String),
}

type Result<T> = std::result::Result<T, InputError>;

fn at(line: usize, message: impl Into<String>) -> InputError {
    InputError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentationSpec {
    pub alphabet: Alphabet,
    pub relators: Vec<FreeWord>,
    /// Rank of the free group `G` for the Rips pipeline.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphSpec {
    pub alphabet: Alphabet,
    pub graph: LabeledGraph,
    /// Name of each edge's forward dart.
    pub edge_names: Vec<String>,
    /// Cone words with the base vertex they are read from.
    pub cones: Vec<(usize, FreeWord)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoiseSpec {
    pub alphabet: Alphabet,
    pub lambda1: FreeWord,
    pub lambda2: FreeWord,
    pub gamma: FreeWord,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MalnormalSpec {
    pub alphabet: Alphabet,
    pub subgroups: Vec<Vec<FreeWord>>,
    pub h: Vec<FreeWord>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Presentation(PresentationSpec),
    Graph(GraphSpec),
    Wallspace(FiniteWallspace),
    Noise(NoiseSpec),
    Malnormal(MalnormalSpec),
}

impl Input {
    pub fn kind(&self) -> &'static str {
        match self {
            Input::Presentation(_) => "presentation",
            Input::Graph(_) => "graph",
            Input::Wallspace(_) => "wallspace",
            Input::Noise(_) => "noise",
            Input::Malnormal(_) => "malnormal",
        }
    }
}

pub fn parse_input(path: &Path) -> Result<Input> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_str(&text)
}

struct Lines<'a> {
    items: Vec<(usize, &'a str, &'a str)>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| {
                let l = l.split('#').next().unwrap().trim();
                if l.is_empty() {
                    return None;
                }
                let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
                Some((i + 1, key, rest.trim()))
            })
            .collect();
        Lines { items }
    }

    fn all(&self, key: &str) -> impl Iterator<Item = (usize, &'a str)> + '_ {
        let key = key.to_string();
        self.items
            .iter()
            .filter(move |it| it.1 == key)
            .map(|it| (it.0, it.2))
    }

    fn one(&self, key: &str) -> Result<Option<(usize, &'a str)>> {
        let mut it = self.all(key);
        let first = it.next();
        if let Some((line, _)) = it.next() {
            return Err(at(line, format!("`{key}` given twice")));
        }
        Ok(first)
    }

    fn required(&self, key: &str) -> Result<(usize, &'a str)> {
        self.one(key)?
            .ok_or_else(|| InputError::File(format!("missing `{key}` line")))
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        match self
            .items
            .iter()
            .find(|it| it.1 != "kind" && !allowed.contains(&it.1))
        {
            Some(it) => Err(at(it.0, format!("unknown directive `{}`", it.1))),
            None => Ok(()),
        }
    }
}

fn number(line: usize, what: &str, s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| {
        at(
            line,
            format!("{what} must be a non-negative integer, got `{}`", s.trim()),
        )
    })
}

fn word(line: usize, al: &Alphabet, s: &str) -> Result<FreeWord> {
    al.parse_word(s).map_err(|e| at(line, e.to_string()))
}

fn alphabet(lines: &Lines) -> Result<Alphabet> {
    let (line, rest) = lines.required("generators")?;
    Alphabet::new(rest.split_whitespace().map(String::from).collect())
        .map_err(|e| at(line, e.to_string()))
}

pub fn parse_str(text: &str) -> Result<Input> {
    let lines = Lines::new(text);
    let (line, kind) = match lines.items.first() {
        Some(&(line, "kind", rest)) => (line, rest),
        Some(&(line, _, _)) => return Err(at(line, "the first directive must be `kind`")),
        None => return Err(InputError::File("empty input".into())),
    };
    lines.one("kind")?;
    match kind {
        "presentation" => presentation(&lines).map(Input::Presentation),
        "graph" => graph(&lines).map(Input::Graph),
        "wallspace" => wallspace(&lines).map(Input::Wallspace),
        "noise" => noise(&lines).map(Input::Noise),
        "malnormal" => malnormal(&lines).map(Input::Malnormal),
        other => Err(at(line, format!("unknown kind `{other}`"))),
    }
}

fn presentation(lines: &Lines) -> Result<PresentationSpec> {
    lines.check_keys(&["generators", "relator", "rank"])?;
    let al = alphabet(lines)?;
    let mut relators = Vec::new();
    for (line, rest) in lines.all("relator") {
        let w = word(line, &al, rest)?;
        if w.is_empty() {
            return Err(at(line, "relator is trivial"));
        }
        if !w.is_cyclically_reduced() {
            return Err(at(line, "relator is not cyclically reduced"));
        }
        relators.push(w);
    }
    let rank = match lines.one("rank")? {
        Some((line, s)) => {
            let r = number(line, "rank", s)?;
            if r == 0 {
                return Err(at(line, "rank must be at least 1"));
            }
            r
        }
        None => 2,
    };
    Ok(PresentationSpec {
        alphabet: al,
        relators,
        rank,
    })
}

fn bar_name(n: &str) -> String {
    match n.strip_suffix('\'') {
        Some(b) => b.to_string(),
        None => format!("{n}'"),
    }
}

fn graph(lines: &Lines) -> Result<GraphSpec> {
    lines.check_keys(&["generators", "vertices", "basepoint", "dart", "cone"])?;
    let al = alphabet(lines)?;
    let (vline, v) = lines.required("vertices")?;
    let nv = number(vline, "vertices", v)?;
    let vertex = |line: usize, s: &str| -> Result<usize> {
        let x = number(line, "vertex", s)?;
        if x >= nv {
            return Err(at(line, format!("vertex {x} out of range (vertices {nv})")));
        }
        Ok(x)
    };
    let basepoint = match lines.one("basepoint")? {
        Some((line, s)) => Some(vertex(line, s)?),
        None => None,
    };
    // name -> (line, src, dst, letter)
    let mut darts: Vec<(usize, String, usize, usize, cubicate::Letter)> = Vec::new();
    for (line, rest) in lines.all("dart") {
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(at(line, "expected `dart <name> <src> <dst> <letter>`"));
        }
        let name = toks[0].to_string();
        if darts.iter().any(|d| d.1 == name) {
            return Err(at(line, format!("dart `{name}` defined twice")));
        }
        let letter = al
            .parse_letter(toks[3])
            .map_err(|e| at(line, e.to_string()))?;
        darts.push((
            line,
            name,
            vertex(line, toks[1])?,
            vertex(line, toks[2])?,
            letter,
        ));
    }
    let mut edges = Vec::new();
    let mut edge_names = Vec::new();
    for d in &darts {
        let (line, name, src, dst, letter) = d;
        let bn = bar_name(name);
        let b = darts.iter().find(|e| e.1 == bn).ok_or_else(|| {
            at(
                *line,
                format!("edge `{name}`: dart has no bar `{bn}`, the bar involution is unmatched"),
            )
        })?;
        if b.2 != *dst || b.3 != *src || b.4 != letter.inverse() {
            return Err(at(
                *line,
                format!(
                    "edge `{name}`: bar `{bn}` must run {dst} -> {src} with the inverse letter"
                ),
            ));
        }
        if !letter.is_inverse() {
            edges.push(Edge {
                src: *src,
                dst: *dst,
                label: letter.generator(),
            });
            edge_names.push(name.clone());
        }
    }
    let graph =
        LabeledGraph::new(nv, edges, basepoint).map_err(|e| InputError::File(e.to_string()))?;
    let mut cones = Vec::new();
    for (line, rest) in lines.all("cone") {
        let (v, w) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        let start = vertex(line, v)?;
        let w = word(line, &al, w)?;
        if w.is_empty() || !w.is_cyclically_reduced() {
            return Err(at(
                line,
                "cone word must be nonempty and cyclically reduced",
            ));
        }
        if graph.read_from(start, &w) != Some(start) {
            return Err(at(
                line,
                "cone word does not spell a closed path from its vertex",
            ));
        }
        cones.push((start, w));
    }
    if !cones.is_empty() && !graph.is_folded() {
        return Err(InputError::File(
            "the base graph of a cone list must be folded".into(),
        ));
    }
    Ok(GraphSpec {
        alphabet: al,
        graph,
        edge_names,
        cones,
    })
}

fn wallspace(lines: &Lines) -> Result<FiniteWallspace> {
    lines.check_keys(&["points", "wall"])?;
    let (pline, p) = lines.required("points")?;
    let points = number(pline, "points", p)?;
    let mut walls = Vec::new();
    for (line, rest) in lines.all("wall") {
        let (l, r) = rest
            .split_once('|')
            .ok_or_else(|| at(line, "expected `wall <left points> | <right points>`"))?;
        let side = |s: &str| {
            s.split_whitespace()
                .map(|t| number(line, "point", t))
                .collect::<Result<Vec<_>>>()
        };
        let wall = Wall::from_halves(side(l)?, side(r)?);
        wall.check_axioms(points).map_err(|reason| {
            at(
                line,
                format!("wall is not a partition of the points: {reason}"),
            )
        })?;
        walls.push(wall);
    }
    FiniteWallspace::new(points, walls).map_err(|e| InputError::File(e.to_string()))
}

fn noise(lines: &Lines) -> Result<NoiseSpec> {
    lines.check_keys(&["generators", "lambda", "gamma", "k"])?;
    let al = alphabet(lines)?;
    let lambdas: Vec<(usize, &str)> = lines.all("lambda").collect();
    if lambdas.len() != 2 {
        return Err(InputError::File(format!(
            "expected two `lambda` lines, found {}",
            lambdas.len()
        )));
    }
    let l1 = word(lambdas[0].0, &al, lambdas[0].1)?;
    let l2 = word(lambdas[1].0, &al, lambdas[1].1)?;
    let (gline, g) = lines.required("gamma")?;
    let gamma = word(gline, &al, g)?;
    let (kline, k) = lines.required("k")?;
    Ok(NoiseSpec {
        alphabet: al,
        lambda1: l1,
        lambda2: l2,
        gamma,
        k: number(kline, "k", k)?,
    })
}

fn malnormal(lines: &Lines) -> Result<MalnormalSpec> {
    lines.check_keys(&["generators", "subgroup", "h"])?;
    let al = alphabet(lines)?;
    let mut subgroups = Vec::new();
    for (line, rest) in lines.all("subgroup") {
        let gens = rest
            .split(',')
            .map(|s| word(line, &al, s))
            .collect::<Result<Vec<_>>>()?;
        if gens.iter().all(|g| g.is_empty()) {
            return Err(at(line, "subgroup has no nontrivial generator"));
        }
        subgroups.push(gens);
    }
    let h = lines
        .all("h")
        .map(|(line, s)| word(line, &al, s))
        .collect::<Result<Vec<_>>>()?;
    if subgroups.is_empty() && h.is_empty() {
        return Err(InputError::File(
            "a malnormal file needs `subgroup` or `h` lines".into(),
        ));
    }
    Ok(MalnormalSpec {
        alphabet: al,
        subgroups,
        h,
    })
}

/// Text that parses back to the same input.
pub fn serialize(input: &Input) -> String {
    let mut s = format!("kind {}\n", input.kind());
    let gens = |s: &mut String, al: &Alphabet| {
        let _ = writeln!(s, "generators {}", al.names().join(" "));
    };
    match input {
        Input::Presentation(p) => {
            gens(&mut s, &p.alphabet);
            for r in &p.relators {
                let _ = writeln!(s, "relator {}", p.alphabet.format_word(r));
            }
            let _ = writeln!(s, "rank {}", p.rank);
        }
        Input::Graph(g) => {
            gens(&mut s, &g.alphabet);
            let _ = writeln!(s, "vertices {}", g.graph.num_vertices());
            if let Some(b) = g.graph.basepoint() {
                let _ = writeln!(s, "basepoint {b}");
            }
            for (e, name) in g.graph.edges().iter().zip(&g.edge_names) {
                let l = cubicate::Letter::pos(e.label);
                let _ = writeln!(
                    s,
                    "dart {name} {} {} {}",
                    e.src,
                    e.dst,
                    g.alphabet.format_letter(l)
                );
                let _ = writeln!(
                    s,
                    "dart {} {} {} {}",
                    bar_name(name),
                    e.dst,
                    e.src,
                    g.alphabet.format_letter(l.inverse())
                );
            }
            for (v, w) in &g.cones {
                let _ = writeln!(s, "cone {v} {}", g.alphabet.format_word(w));
            }
        }
        Input::Wallspace(ws) => {
            let _ = writeln!(s, "points {}", ws.points);
            for w in &ws.walls {
                let side = |v: &[usize]| {
                    v.iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let _ = writeln!(s, "wall {} | {}", side(&w.left), side(&w.right));
            }
        }
        Input::Noise(n) => {
            gens(&mut s, &n.alphabet);
            let _ = writeln!(s, "lambda {}", n.alphabet.format_word(&n.lambda1));
            let _ = writeln!(s, "lambda {}", n.alphabet.format_word(&n.lambda2));
            let _ = writeln!(s, "gamma {}", n.alphabet.format_word(&n.gamma));
            let _ = writeln!(s, "k {}", n.k);
        }
        Input::Malnormal(m) => {
            gens(&mut s, &m.alphabet);
            for sg in &m.subgroups {
                let ws: Vec<String> = sg.iter().map(|w| m.alphabet.format_word(w)).collect();
                let _ = writeln!(s, "subgroup {}", ws.join(", "));
            }
            for h in &m.h {
                let _ = writeln!(s, "h {}", m.alphabet.format_word(h));
            }
        }
    }
    s
}
