//! Subgroups of free groups through their core graphs: malnormality,
//! the piece bound `K` of a malnormal family, noise words inside a
//! subgroup, rank-two malnormal subgroups built around given words, and
//! conjugators avoiding a list of subgroups.
//!
//! Conjugation convention: `H^g = g⁻¹ H g`.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    core_graph, intersection, FiberComponent, FiberProduct, LabeledGraph, UnionFind,
};
use crate::smallcancel::{enumerate_pieces_with, CubicalPresentation, Extent, PieceDetail};
use crate::words::{shortlex_words, FreeWord, Letter};
use crate::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupGraph {
    /// Folded core graph with the basepoint kept.
    pub core: LabeledGraph,
    pub generators: Vec<FreeWord>,
    /// Rank of the ambient free group.
    pub rank: usize,
}

impl SubgroupGraph {
    pub fn new(generators: Vec<FreeWord>, rank: usize) -> Result<Self> {
        let core = core_graph(&generators, rank)?;
        Ok(SubgroupGraph {
            core,
            generators,
            rank,
        })
    }

    pub fn contains(&self, w: &FreeWord) -> bool {
        self.core.accepts(w)
    }

    /// Rank of the subgroup itself.
    pub fn subgroup_rank(&self) -> usize {
        self.core.pi1_rank()
    }

    pub fn is_finite_index(&self) -> bool {
        self.core.is_covering(self.rank)
    }

    /// `g⁻¹ H g`.
    pub fn conjugate(&self, g: &FreeWord) -> Result<SubgroupGraph> {
        let gi = g.inverse();
        let gens = self.generators.iter().map(|h| gi.mul(h).mul(g)).collect();
        SubgroupGraph::new(gens, self.rank)
    }
}

/// `w = c r^e c⁻¹` with `r` a primitive cyclically reduced root, taken
/// up to inversion.
#[derive(Clone, Debug, PartialEq, Eq)]
struct PowerKey {
    conj: FreeWord,
    root: FreeWord,
    exp: usize,
}

impl PowerKey {
    fn of(w: &FreeWord) -> PowerKey {
        let (conj, core) = w.reduce().cyclic_reduction();
        let (r, exp) = core.root();
        let ri = r.inverse();
        PowerKey {
            conj,
            root: r.min(ri),
            exp,
        }
    }

    fn related(&self, other: &PowerKey) -> bool {
        if self.exp == 0 || other.exp == 0 {
            return self.root.is_empty() && other.root.is_empty();
        }
        self.conj == other.conj
            && self.root == other.root
            && (self.exp % other.exp == 0 || other.exp % self.exp == 0)
    }
}

/// `u = v^m` or `v = u^m` for some `m ≠ 0`.
pub fn power_related(u: &FreeWord, v: &FreeWord) -> bool {
    PowerKey::of(u).related(&PowerKey::of(v))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MalnormalWitness {
    pub i: usize,
    pub j: usize,
    /// Component of the fiber product `core(H_i) × core(H_j)`.
    pub component: usize,
    /// `w ≠ 1` lies in `H_i^g ∩ H_j`, and `g ∉ H_i` when `i = j`.
    pub g: FreeWord,
    pub w: FreeWord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MalnormalReport {
    pub passed: bool,
    /// One per offending component, for pairs `i ≤ j`.
    pub witnesses: Vec<MalnormalWitness>,
}

fn is_diagonal(c: &FiberComponent, h: &LabeledGraph, same: bool) -> bool {
    same && c.covers_a_bijectively(h) && c.covers_b_bijectively(h) && c.proj_a == c.proj_b
}

/// Shortlex-least nontrivial reduced loop at vertex `x` of a folded graph.
fn loop_at(g: &LabeledGraph, x: usize) -> Option<FreeWord> {
    let words = g.clone().with_basepoint(x).words_from_basepoint();
    g.edges()
        .iter()
        .filter_map(|e| {
            let (s, t) = (words[e.src].as_ref()?, words[e.dst].as_ref()?);
            let c = s
                .mul(&FreeWord::new(vec![Letter::pos(e.label)]))
                .mul(&t.inverse());
            (!c.is_empty()).then_some(c)
        })
        .min_by(|a, b| a.shortlex_cmp(b))
}

fn witness(
    c: &FiberComponent,
    i: usize,
    j: usize,
    k: usize,
    pi: &[Option<FreeWord>],
    pj: &[Option<FreeWord>],
) -> MalnormalWitness {
    // g = p q⁻¹ where p, q reach the vertex from the two basepoints; the
    // least g over the component's vertices.
    let x = (0..c.num_vertices())
        .min_by(|&x, &y| {
            let gx = pi[c.proj_a[x]]
                .as_ref()
                .unwrap()
                .mul(&pj[c.proj_b[x]].as_ref().unwrap().inverse());
            let gy = pi[c.proj_a[y]]
                .as_ref()
                .unwrap()
                .mul(&pj[c.proj_b[y]].as_ref().unwrap().inverse());
            gx.shortlex_cmp(&gy).then(x.cmp(&y))
        })
        .unwrap();
    let p = pi[c.proj_a[x]].clone().unwrap();
    let q = pj[c.proj_b[x]].clone().unwrap();
    let loop_word = loop_at(&c.graph, x).expect("component carries a cycle");
    MalnormalWitness {
        i,
        j,
        component: k,
        g: p.mul(&q.inverse()),
        w: q.mul(&loop_word).mul(&q.inverse()),
    }
}

/// Whether some component of `a × b` other than the diagonal (when
/// `same`) carries a cycle; union-find only, no components are built.
fn has_offending_component(a: &LabeledGraph, b: &LabeledGraph, same: bool) -> bool {
    let nb = b.num_vertices();
    let mut uf = UnionFind::new(a.num_vertices() * nb);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut by_label: HashMap<u32, Vec<usize>> = HashMap::new();
    for (j, e) in b.edges().iter().enumerate() {
        by_label.entry(e.label).or_default().push(j);
    }
    for ea in a.edges() {
        for &j in by_label.get(&ea.label).map_or(&[][..], |v| &v[..]) {
            let eb = b.edge(j);
            let (s, t) = (ea.src * nb + eb.src, ea.dst * nb + eb.dst);
            uf.union(s, t);
            edges.push((s, t));
        }
    }
    let n = a.num_vertices() * nb;
    let (mut ecount, mut vcount, mut touched) = (vec![0usize; n], vec![0usize; n], vec![false; n]);
    for &(s, t) in &edges {
        let r = uf.find(s);
        ecount[r] += 1;
        for x in [s, t] {
            if !std::mem::replace(&mut touched[x], true) {
                vcount[r] += 1;
            }
        }
    }
    let diagonal = match (same, a.basepoint()) {
        (true, Some(base)) => Some(uf.find(base * nb + base)),
        _ => None,
    };
    (0..n).any(|r| ecount[r] > 0 && ecount[r] >= vcount[r] && Some(r) != diagonal)
}

/// Exact malnormality of a collection: for `i ≠ j` no component of
/// `core(H_i) × core(H_j)` carries a cycle, and for `i = j` only the
/// diagonal one does.
pub fn check_malnormal(collection: &[SubgroupGraph]) -> MalnormalReport {
    let words: Vec<std::cell::OnceCell<Vec<Option<FreeWord>>>> =
        collection.iter().map(|_| Default::default()).collect();
    let words_of = |i: usize| words[i].get_or_init(|| collection[i].core.words_from_basepoint());
    let mut witnesses = Vec::new();
    for i in 0..collection.len() {
        for j in i..collection.len() {
            let (a, b) = (&collection[i].core, &collection[j].core);
            if !has_offending_component(a, b, i == j) {
                continue;
            }
            let fp = FiberProduct::over_bouquet(a, b);
            for (k, c) in fp.components.iter().enumerate() {
                if c.has_cycle() && !is_diagonal(c, a, i == j) {
                    witnesses.push(witness(c, i, j, k, words_of(i), words_of(j)));
                }
            }
        }
    }
    MalnormalReport {
        passed: witnesses.is_empty(),
        witnesses,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PieceBound {
    /// Largest diameter of an off-diagonal fiber product component.
    pub d: usize,
    /// Wall-pieces; always 0 over a graph.
    pub m: usize,
    pub k: usize,
}

/// `D`, `M` and `K = max{D, M}` for a malnormal collection over a bouquet.
pub fn compute_k(collection: &[SubgroupGraph]) -> Result<PieceBound> {
    let report = check_malnormal(collection);
    if let Some(w) = report.witnesses.first() {
        return Err(Error::NotMalnormal(format!(
            "H_{} and H_{}: component {} of their fiber product carries a cycle (g = {}, w = {})",
            w.i, w.j, w.component, w.g, w.w
        )));
    }
    let mut d = 0;
    for i in 0..collection.len() {
        for j in i..collection.len() {
            let (a, b) = (&collection[i].core, &collection[j].core);
            for c in &FiberProduct::over_bouquet(a, b).components {
                if !is_diagonal(c, a, i == j) {
                    d = d.max(c.graph.tree_diameter());
                }
            }
        }
    }
    Ok(PieceBound { d, m: 0, k: d })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsolationReport {
    pub isolated: bool,
    /// `(u, u^n)` with `u^n` in the subgroup and `u` not.
    pub root_witness: Option<(FreeWord, FreeWord)>,
    pub generator_malnormal: bool,
    pub generator_witness: Option<MalnormalWitness>,
    /// Loop words up to this length were examined.
    pub budget: usize,
    pub exhaustive: bool,
}

impl IsolationReport {
    pub fn malnormal(&self) -> bool {
        self.isolated && self.generator_malnormal
    }
}

/// Root of a reduced word as a group element: `c · root(core) · c⁻¹`.
fn element_root(w: &FreeWord) -> (FreeWord, usize) {
    let (c, core) = w.cyclic_reduction();
    let (r, e) = core.root();
    (c.mul(&r).mul(&c.inverse()), e)
}

/// Bounded isolation (roots of loop words up to `budget` stay inside) and
/// malnormality against each generator's cyclic subgroup.
pub fn check_isolated_and_gen_malnormal(j: &SubgroupGraph, budget: usize) -> IsolationReport {
    let root_witness = j.core.loop_words(budget).into_iter().find_map(|w| {
        let (u, e) = element_root(&w);
        (e > 1 && !j.contains(&u)).then_some((u, w))
    });
    let words = j.core.words_from_basepoint();
    let mut generator_witness = None;
    'gens: for (k, h) in j.generators.iter().enumerate() {
        let Ok(cyclic) = SubgroupGraph::new(vec![element_root(&h.reduce()).0], j.rank) else {
            continue;
        };
        if cyclic.core.num_edges() == 0 {
            continue;
        }
        let cw = cyclic.core.words_from_basepoint();
        let fp = FiberProduct::over_bouquet(&j.core, &cyclic.core);
        let base = fp.component_of(
            j.core.basepoint().unwrap(),
            cyclic.core.basepoint().unwrap(),
        );
        for (ci, c) in fp.components.iter().enumerate() {
            if c.has_cycle() && Some(ci) != base {
                let mut w = witness(c, 0, 0, ci, &words, &cw);
                w.j = k;
                generator_witness = Some(w);
                break 'gens;
            }
        }
    }
    IsolationReport {
        isolated: root_witness.is_none(),
        root_witness,
        generator_malnormal: generator_witness.is_none(),
        generator_witness,
        budget,
        exhaustive: false,
    }
}

/// The first `g` in length-lexicographic order with `H^g ∩ S_t = 1` for
/// every `t`. An empty list needs no conjugation.
pub fn find_avoiding_conjugate(
    h: &SubgroupGraph,
    s: &[SubgroupGraph],
    budget: usize,
) -> Result<FreeWord> {
    if s.is_empty() {
        return Ok(FreeWord::empty());
    }
    if h.is_finite_index() {
        return Err(Error::Precondition(
            "subgroup has finite index, so every conjugate meets every nontrivial subgroup".into(),
        ));
    }
    let avoids = |g: &FreeWord| -> Result<bool> {
        let hg = h.conjugate(g)?;
        Ok(s.iter()
            .all(|t| intersection(&hg.core, &t.core).num_edges() == 0))
    };
    for g in std::iter::once(FreeWord::empty()).chain(shortlex_words(h.rank as u32, budget)) {
        if avoids(&g)? {
            return Ok(g);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no avoiding conjugator of length at most {budget}"
    )))
}

// ---------------------------------------------------------------------------
// Rank-two malnormal subgroups around given words.

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum BetaViolation {
    /// Slots `s` and `t` are powers of a common element.
    PowerRelated { s: usize, t: usize },
    /// Slot `s` is a power of its own `h_i`.
    InSubgroup { s: usize },
    /// Slot `s` cancels against a neighbouring `h`.
    Cancellation { s: usize },
}

/// Slots `0..k` hold `β_1…β_k`, slots `k..2k` hold `β'_1…β'_k`.
fn slot_violation(
    h: &[FreeWord],
    hcores: &[LabeledGraph],
    chosen: &[PowerKey],
    cand: &FreeWord,
    key: &PowerKey,
) -> Option<BetaViolation> {
    let k = h.len();
    let s = chosen.len();
    if cand.is_empty() || hcores[s % k].accepts(cand) {
        return Some(BetaViolation::InSubgroup { s });
    }
    if let Some(t) = chosen.iter().position(|b| b.related(key)) {
        return Some(BetaViolation::PowerRelated { s, t });
    }
    let inv = |l: Option<Letter>| l.map(Letter::inverse);
    let (first, last) = (cand.first(), cand.last());
    let cancels = if s < k {
        // a = h_1 β_1 … h_k β_k
        first == inv(h[s].last()) || last == inv(h[(s + 1) % k].first())
    } else {
        // b = β'_1 h_1 … β'_k h_k
        let i = s - k;
        last == inv(h[i].first()) || first == inv(h[(i + k - 1) % k].last())
    };
    cancels.then_some(BetaViolation::Cancellation { s })
}

fn cyclic_cores(h: &[FreeWord], rank: usize) -> Result<Vec<LabeledGraph>> {
    h.iter()
        .map(|w| core_graph(std::slice::from_ref(w), rank))
        .collect()
}

/// Every violation of the constraints on a full choice of `β`, `β'`.
pub fn beta_violations(
    h: &[FreeWord],
    betas: &[FreeWord],
    betas_prime: &[FreeWord],
    rank: usize,
) -> Result<Vec<BetaViolation>> {
    if betas.len() != h.len() || betas_prime.len() != h.len() {
        return Err(Error::InvalidArgument("one β and one β' per h".into()));
    }
    let hcores = cyclic_cores(h, rank)?;
    let all: Vec<FreeWord> = betas.iter().chain(betas_prime).cloned().collect();
    let keys: Vec<PowerKey> = all.iter().map(PowerKey::of).collect();
    Ok((0..all.len())
        .filter_map(|s| slot_violation(h, &hcores, &keys[..s], &all[s], &keys[s]))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MalnormalPair {
    pub j: SubgroupGraph,
    pub a: FreeWord,
    pub b: FreeWord,
    pub betas: Vec<FreeWord>,
    pub betas_prime: Vec<FreeWord>,
    /// Candidate tuples whose subgroup was tested.
    pub tested: usize,
}

/// Most candidate tuples handed to the exact malnormality test.
pub const MAX_PAIR_TESTS: usize = 2048;

fn assemble(h: &[FreeWord], slots: &[FreeWord]) -> (FreeWord, FreeWord) {
    let k = h.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..k {
        a.extend_from_slice(h[i].letters());
        a.extend_from_slice(slots[i].letters());
        b.extend_from_slice(slots[k + i].letters());
        b.extend_from_slice(h[i].letters());
    }
    (FreeWord::new(a), FreeWord::new(b))
}

struct PairSearch<'a> {
    h: &'a [FreeWord],
    hcores: Vec<LabeledGraph>,
    rank: usize,
    tested: usize,
    /// Candidate words in length-lexicographic order, with their keys.
    cands: Vec<(FreeWord, PowerKey)>,
}

impl PairSearch<'_> {
    /// Tuples with every word of length `≤ max` and at least one of length
    /// exactly `max`, in lexicographic order of the slots.
    fn search(
        &mut self,
        chosen: &mut Vec<FreeWord>,
        keys: &mut Vec<PowerKey>,
        max: usize,
        has_max: bool,
    ) -> Result<Option<SubgroupGraph>> {
        let slots = 2 * self.h.len();
        if chosen.len() == slots {
            if !has_max {
                return Ok(None);
            }
            if self.tested == MAX_PAIR_TESTS {
                return Err(Error::BudgetExceeded(format!(
                    "{MAX_PAIR_TESTS} candidate pairs tested without a malnormal one"
                )));
            }
            self.tested += 1;
            let (a, b) = assemble(self.h, chosen);
            let j = SubgroupGraph::new(vec![a, b], self.rank)?;
            return Ok((j.subgroup_rank() == 2
                && check_malnormal(std::slice::from_ref(&j)).passed)
                .then_some(j));
        }
        // The last slot must reach the maximal length if no earlier one did.
        let must_max = !has_max && chosen.len() + 1 == slots;
        let end = self.cands.partition_point(|(w, _)| w.len() <= max);
        for c in 0..end {
            let (cand, key) = &self.cands[c];
            if must_max && cand.len() < max {
                continue;
            }
            if slot_violation(self.h, &self.hcores, keys, cand, key).is_some() {
                continue;
            }
            let hm = has_max || cand.len() == max;
            chosen.push(cand.clone());
            keys.push(key.clone());
            let found = self.search(chosen, keys, max, hm)?;
            if found.is_some() {
                return Ok(found);
            }
            chosen.pop();
            keys.pop();
        }
        Ok(None)
    }
}

/// `J = ⟨a, b⟩` with `a = h_1 β_1 … h_k β_k` and `b = β'_1 h_1 … β'_k h_k`,
/// the `β`-tuple chosen as the first admissible one (ordered by longest
/// entry, then slot by slot in length-lexicographic order) whose `J` is
/// verified malnormal of rank two.
pub fn build_malnormal_pair(
    h: &[FreeWord],
    rank: usize,
    budget: Option<usize>,
) -> Result<MalnormalPair> {
    if h.is_empty() {
        return Err(Error::Precondition("at least one word h is needed".into()));
    }
    for (i, w) in h.iter().enumerate() {
        if w.is_empty() || !w.is_reduced() || !w.is_cyclically_reduced() {
            return Err(Error::Precondition(format!(
                "h_{} must be nontrivial and cyclically reduced",
                i + 1
            )));
        }
        for (j, v) in h.iter().enumerate().skip(i + 1) {
            if power_related(w, v) {
                return Err(Error::Precondition(format!(
                    "h_{} and h_{} are powers of a common element",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let budget = budget.unwrap_or(2 * h.iter().map(FreeWord::len).max().unwrap() + 4);
    let mut search = PairSearch {
        h,
        hcores: cyclic_cores(h, rank)?,
        rank,
        tested: 0,
        cands: Vec::new(),
    };
    for max in 1..=budget {
        search.cands.extend(
            shortlex_words(rank as u32, max)
                .skip_while(|w| w.len() < max)
                .map(|w| {
                    let key = PowerKey::of(&w);
                    (w, key)
                }),
        );
        let mut chosen = Vec::new();
        if let Some(j) = search.search(&mut chosen, &mut Vec::new(), max, false)? {
            let k = h.len();
            let (a, b) = (j.generators[0].clone(), j.generators[1].clone());
            return Ok(MalnormalPair {
                j,
                a,
                b,
                betas: chosen[..k].to_vec(),
                betas_prime: chosen[k..].to_vec(),
                tested: search.tested,
            });
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no admissible β-words of length at most {budget}"
    )))
}

// ---------------------------------------------------------------------------
// Noise words.

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoiseInput {
    pub index: usize,
    pub subgroup: SubgroupGraph,
    pub gamma: FreeWord,
    pub lambda1: FreeWord,
    pub lambda2: FreeWord,
    pub k: usize,
    pub alpha: Rational,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum NoiseMethod {
    /// `λ₁λ₂λ₁λ₂²…λ₁λ₂^t`.
    Staircase,
    /// Seeded reduced word in `λ₁^{±1}, λ₂^{±1}` with no repeated window of
    /// the given number of `λ`-letters.
    LowRepetition { attempt: usize, window: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NoiseRecipe {
    pub index: usize,
    pub gamma: FreeWord,
    pub lambda1: FreeWord,
    pub lambda2: FreeWord,
    pub k: usize,
    pub alpha: Rational,
    /// Staircase depth, or the number of `λ`-letters.
    pub t: usize,
    pub sigma_prime: FreeWord,
    pub sigma: FreeWord,
    pub method: NoiseMethod,
    /// Exact longest self-piece of `σ`.
    pub self_piece: usize,
    /// Why the staircase candidates were rejected.
    pub staircase_rejections: Vec<String>,
}

const STAIRCASE_DEPTHS: usize = 2;
const NOISE_ATTEMPTS: usize = 96;

struct Thresholds {
    /// `K_eff · α` with `K_eff = max(K, 1)`.
    ka: Rational,
    min_len: usize,
    rank: usize,
}

impl Thresholds {
    fn piece_ok(&self, p: usize) -> bool {
        Rational::from_integer(p as u64 + 1) <= self.ka
    }
}

fn ceil(r: Rational) -> usize {
    r.ceil().to_integer() as usize
}

/// Whether two distinct lifts of the cyclic word (either orientation)
/// share a subword of length `len`. Such a subword is a self-piece.
fn repeated_window(sigma: &FreeWord, len: usize) -> bool {
    let n = sigma.len();
    if len == 0 || len >= n {
        return false;
    }
    let fwd: Vec<Letter> = sigma
        .letters()
        .iter()
        .chain(sigma.letters())
        .copied()
        .collect();
    let inv = sigma.inverse();
    let bwd: Vec<Letter> = inv.letters().iter().chain(inv.letters()).copied().collect();
    let mut seen: HashSet<&[Letter]> = HashSet::with_capacity(n);
    (0..n).any(|i| !seen.insert(&fwd[i..i + len]))
        || (0..n).any(|i| seen.contains(&bwd[i..i + len]))
}

/// Checks a candidate `σ'`; on success returns `(σ, self_piece)`.
fn verify_noise(
    inp: &NoiseInput,
    th: &Thresholds,
    sp: &FreeWord,
) -> std::result::Result<(FreeWord, usize), String> {
    if sp.is_empty() || !sp.is_cyclically_reduced() {
        return Err("σ' is not cyclically reduced".into());
    }
    if !inp.subgroup.contains(sp) {
        return Err("σ' is not in H".into());
    }
    let g = &inp.gamma;
    if let (Some(f), Some(l)) = (g.first(), g.last()) {
        if sp.last() == Some(f.inverse()) || sp.first() == Some(l.inverse()) {
            return Err("σ'γ has a backtrack".into());
        }
    }
    let sigma = sp.concat(g);
    if !sigma.is_reduced() || !sigma.is_cyclically_reduced() {
        return Err("σ'γ has a backtrack".into());
    }
    if sigma.len() < th.min_len {
        return Err(format!(
            "|σ| = {} is below Kα² = {}",
            sigma.len(),
            th.min_len
        ));
    }
    if sigma.root().1 > 1 {
        return Err("σ is a proper power".into());
    }
    let too_long = ceil(th.ka);
    if repeated_window(&sigma, too_long) {
        return Err(format!(
            "a subword of length {too_long} recurs, so the self-piece exceeds Kα − 1"
        ));
    }
    let p = CubicalPresentation::graphical(th.rank, std::slice::from_ref(&sigma), inp.alpha)
        .map_err(|e| e.to_string())?;
    let e = enumerate_pieces_with(&p, PieceDetail::Maximal).map_err(|e| e.to_string())?;
    match e.report.cones[0].max_piece {
        Extent::Finite(x) if th.piece_ok(x) => Ok((sigma, x)),
        x => Err(format!(
            "self-piece {x} exceeds Kα − 1 = {}",
            th.ka - Rational::from_integer(1)
        )),
    }
}

/// `λ₁λ₂λ₁λ₂²…λ₁λ₂^t`, reduced.
pub fn staircase_word(l1: &FreeWord, l2: &FreeWord, t: usize) -> FreeWord {
    let mut w = FreeWord::empty();
    for j in 1..=t {
        w = w.mul(l1).mul(&l2.pow(j));
    }
    w
}

/// A reduced sequence of `λ`-letters (0: `λ₁`, 1: `λ₁⁻¹`, 2: `λ₂`, 3: `λ₂⁻¹`)
/// avoiding repeated windows of length `window`, read either way.
fn low_repetition(
    rng: &mut ChaCha8Rng,
    letters: &[FreeWord; 4],
    window: usize,
    min_len: usize,
) -> (Vec<usize>, FreeWord) {
    let inv = |x: usize| x ^ 1;
    let mut seq: Vec<usize> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut word = FreeWord::empty();
    // Both λ's must occur; the x-length must reach the target.
    while word.len() < min_len || !(seq.iter().any(|&x| x < 2) && seq.iter().any(|&x| x >= 2)) {
        let mut options: Vec<usize> = (0..4)
            .filter(|&x| seq.last().map_or(true, |&p| x != inv(p)))
            .collect();
        options.shuffle(rng);
        let fresh = |x: usize, seen: &HashSet<Vec<usize>>| {
            if seq.len() + 1 < window {
                return true;
            }
            let mut w: Vec<usize> = seq[seq.len() + 1 - window..].to_vec();
            w.push(x);
            !seen.contains(&w)
        };
        let x = options
            .iter()
            .copied()
            .find(|&x| fresh(x, &seen))
            .unwrap_or(options[0]);
        seq.push(x);
        if seq.len() >= window {
            let w: Vec<usize> = seq[seq.len() - window..].to_vec();
            let wi: Vec<usize> = w.iter().rev().map(|&x| inv(x)).collect();
            seen.insert(w);
            seen.insert(wi);
        }
        word = word.mul(&letters[x]);
    }
    (seq, word)
}

/// Noise word `σ = σ'γ` with `σ' ∈ H`: the staircase at depth `⌈Kα⌉` is
/// tried first, then seeded low-repetition words. Every candidate is
/// verified exactly.
pub fn generate_noise_word(inp: &NoiseInput) -> Result<NoiseRecipe> {
    if inp.subgroup.subgroup_rank() < 2 {
        return Err(Error::Precondition(
            "H has rank below 2; the recipe needs two generators".into(),
        ));
    }
    let (l1, l2) = (inp.lambda1.reduce(), inp.lambda2.reduce());
    if l1.is_empty()
        || l2.is_empty()
        || l1 == l2
        || !inp.subgroup.contains(&l1)
        || !inp.subgroup.contains(&l2)
    {
        return Err(Error::InvalidArgument(
            "λ₁, λ₂ must be distinct nontrivial elements of H".into(),
        ));
    }
    if core_graph(&[l1.clone(), l2.clone()], inp.subgroup.rank)?.pi1_rank() != 2 {
        return Err(Error::InvalidArgument(
            "λ₁, λ₂ do not generate a free group of rank 2".into(),
        ));
    }
    let ka = Rational::from_integer(inp.k.max(1) as u64) * inp.alpha;
    let rank = inp
        .gamma
        .letters()
        .iter()
        .map(|l| l.generator() as usize + 1)
        .max()
        .unwrap_or(0)
        .max(inp.subgroup.rank);
    let th = Thresholds {
        ka,
        min_len: ceil(ka * inp.alpha),
        rank,
    };
    let recipe = |sp: FreeWord,
                  sigma: FreeWord,
                  t: usize,
                  method: NoiseMethod,
                  self_piece: usize,
                  rej: Vec<String>| NoiseRecipe {
        index: inp.index,
        gamma: inp.gamma.clone(),
        lambda1: l1.clone(),
        lambda2: l2.clone(),
        k: inp.k,
        alpha: inp.alpha,
        t,
        sigma_prime: sp,
        sigma,
        method,
        self_piece,
        staircase_rejections: rej,
    };

    let mut rejections = Vec::new();
    let t0 = ceil(ka);
    for t in t0..t0 + STAIRCASE_DEPTHS {
        let sp = staircase_word(&l1, &l2, t);
        match verify_noise(inp, &th, &sp) {
            Ok((sigma, x)) => {
                return Ok(recipe(sp, sigma, t, NoiseMethod::Staircase, x, rejections))
            }
            Err(why) => rejections.push(format!("t = {t}: {why}")),
        }
    }

    let letters = [l1.clone(), l1.inverse(), l2.clone(), l2.inverse()];
    let longest = l1.len().max(l2.len());
    // A repeat of `w − 1` λ-letters plus partial λ's at both ends must stay
    // below Kα.
    let w0 = (t0.saturating_sub(1) / longest).saturating_sub(1).max(2);
    let target = th.min_len.saturating_sub(inp.gamma.len());
    for attempt in 0..NOISE_ATTEMPTS {
        let window = (w0.saturating_sub(attempt / 8)).max(2);
        let seed = inp.seed ^ ((inp.index as u64) << 32) ^ attempt as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (seq, sp) = low_repetition(&mut rng, &letters, window, target);
        if let Ok((sigma, x)) = verify_noise(inp, &th, &sp) {
            return Ok(recipe(
                sp,
                sigma,
                seq.len(),
                NoiseMethod::LowRepetition { attempt, window },
                x,
                rejections,
            ));
        }
    }
    Err(Error::BudgetExceeded(format!(
        "no verified noise word for cone {} in {NOISE_ATTEMPTS} attempts",
        inp.index
    )))
}
