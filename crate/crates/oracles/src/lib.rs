//! Exhaustive reference computations. Each one is deliberately naive and
//! shares no algorithm with the library it checks.

use std::collections::{BTreeSet, HashSet};

use cubicate::words::reduced_words_up_to;
use cubicate::{FreeWord, Letter};

/// Longest common subword of the cyclic words `u` and `v`, reading `v`
/// forwards or inverted, at every pair of offsets. When `same` is set the
/// trivial alignment (forward, equal offsets) is skipped. `None` when some
/// match runs past `|u| + |v|` letters.
pub fn max_common_cyclic_subword(u: &FreeWord, v: &FreeWord, same: bool) -> Option<usize> {
    per_position_reach(u, &[(v.clone(), same)])
        .into_iter()
        .try_fold(0, |acc, r| r.map(|r| acc.max(r)))
}

/// For each offset `s` of the cyclic word `u`: the longest run starting at
/// `s` that also reads along some cyclic word in `others` (forwards or
/// inverted). The flag marks `u` itself, where the trivial alignment is
/// skipped. `None` entries are runs longer than the cap.
pub fn per_position_reach(u: &FreeWord, others: &[(FreeWord, bool)]) -> Vec<Option<usize>> {
    let ul = u.letters();
    let n = ul.len();
    let mut out = vec![Some(0); n];
    for (v, same) in others {
        let cap = n + v.len();
        for (inverted, vv) in [(false, v.clone()), (true, v.inverse())] {
            let vl = vv.letters();
            let m = vl.len();
            for s in 0..n {
                for t in 0..m {
                    if *same && !inverted && s == t {
                        continue;
                    }
                    let mut k = 0;
                    while k <= cap && ul[(s + k) % n] == vl[(t + k) % m] {
                        k += 1;
                    }
                    out[s] = match out[s] {
                        None => None,
                        Some(_) if k > cap => None,
                        Some(r) => Some(r.max(k)),
                    };
                }
            }
        }
    }
    out
}

/// Fewest segments tiling an `n`-cycle where the segment starting at `s`
/// may have any length up to `reach[s]`, by trying every set of cut
/// points. Exponential; `n ≤ 20`.
pub fn tiling_min_cover(reach: &[usize]) -> Option<usize> {
    let n = reach.len();
    assert!(n <= 20);
    let mut best: Option<usize> = None;
    for mask in 1u32..(1 << n) {
        let k = mask.count_ones() as usize;
        if best.map_or(false, |b| k >= b) {
            continue;
        }
        let cuts: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let ok = (0..k).all(|i| {
            let a = cuts[i];
            let b = if i + 1 < k { cuts[i + 1] } else { cuts[0] + n };
            b - a <= reach[a]
        });
        if ok {
            best = Some(k);
        }
    }
    best
}

/// Elements of length `≤ max_len` of the subgroup generated by `gens`,
/// found by multiplying generators while reduced length stays `≤ cap`.
pub fn subgroup_elements(gens: &[FreeWord], max_len: usize, cap: usize) -> BTreeSet<FreeWord> {
    let mut seen: BTreeSet<FreeWord> = BTreeSet::from([FreeWord::empty()]);
    let mut stack = vec![FreeWord::empty()];
    let steps: Vec<FreeWord> = gens
        .iter()
        .flat_map(|g| [g.reduce(), g.reduce().inverse()])
        .collect();
    while let Some(x) = stack.pop() {
        for s in &steps {
            let y = x.mul(s);
            if y.len() <= cap && seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    seen.into_iter().filter(|x| x.len() <= max_len).collect()
}

/// Searches `g`, `y ∈ H_i`, `x ∈ H_j`, all of length `≤ len`, with
/// `g y g⁻¹ = x ≠ 1`, and `g ∉ H_i` when `i = j`. Returns the first
/// `(i, j, g, x)` found.
pub fn malnormal_witness(
    collection: &[Vec<FreeWord>],
    rank: u32,
    len: usize,
    cap: usize,
) -> Option<(usize, usize, FreeWord, FreeWord)> {
    let elems: Vec<BTreeSet<FreeWord>> = collection
        .iter()
        .map(|g| subgroup_elements(g, len, cap))
        .collect();
    let sets: Vec<HashSet<FreeWord>> = elems.iter().map(|e| e.iter().cloned().collect()).collect();
    let conjugators = reduced_words_up_to(rank, len);
    for i in 0..collection.len() {
        for j in 0..collection.len() {
            for g in &conjugators {
                if i == j && sets[i].contains(g) {
                    continue;
                }
                for y in elems[i].iter().filter(|y| !y.is_empty()) {
                    let x = g.mul(y).mul(&g.inverse());
                    if sets[j].contains(&x) {
                        return Some((i, j, g.clone(), x));
                    }
                }
            }
        }
    }
    None
}

/// All orientations of the walls (given as `(left, right)` point lists)
/// whose chosen half-spaces are nonempty and pairwise intersect.
pub fn consistent_orientations(walls: &[(Vec<usize>, Vec<usize>)]) -> Vec<Vec<bool>> {
    let m = walls.len();
    assert!(m <= 20);
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let o: Vec<bool> = (0..m).map(|k| mask & (1 << k) != 0).collect();
        let pick = |k: usize| if o[k] { &walls[k].1 } else { &walls[k].0 };
        let ok = (0..m).all(|a| {
            !pick(a).is_empty()
                && (0..m).all(|b| a == b || pick(a).iter().any(|x| pick(b).contains(x)))
        });
        if ok {
            out.push(o);
        }
    }
    out.sort();
    out
}

/// Longest `|v| - |u|` over cyclic subwords `v = u^m`, `m ≥ 2`, `|v| ≤ n`.
pub fn periodic_overlap(word: &FreeWord) -> usize {
    let n = word.len();
    let l = word.letters();
    let mut best = 0;
    for start in 0..n {
        for len in 2..=n {
            let v: Vec<Letter> = (0..len).map(|k| l[(start + k) % n]).collect();
            for p in 1..len {
                if len % p == 0 && (p..len).all(|k| v[k] == v[k - p]) {
                    best = best.max(len - p);
                }
            }
        }
    }
    best
}

/// Whether `u` and `v` are conjugate (cyclic rotations of one another up to
/// inversion), for cyclically reduced words.
pub fn cyclically_related(u: &FreeWord, v: &FreeWord) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let vi = v.inverse();
    (0..u.len()).any(|k| u.rotate(k) == *v || u.rotate(k) == vi)
}

/// Same root up to rotation and inversion: the two cycles share an axis.
pub fn commensurable_cycles(u: &FreeWord, v: &FreeWord) -> bool {
    let (ru, _) = u.root();
    let (rv, _) = v.root();
    cyclically_related(&ru, &rv)
}
