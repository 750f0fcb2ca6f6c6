use cubicate::graph::FiberProduct;
use cubicate::noise::*;
use cubicate::{Alphabet, Error, FreeWord, Letter, Rational};
use cubicate_oracles as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn w(rank: usize, s: &str) -> FreeWord {
    Alphabet::standard(rank).parse_word(s).unwrap()
}

fn sub(rank: usize, gens: &[&str]) -> SubgroupGraph {
    SubgroupGraph::new(gens.iter().map(|s| w(rank, s)).collect(), rank).unwrap()
}

fn random_reduced(rng: &mut ChaCha8Rng, rank: u32, len: usize) -> FreeWord {
    let mut letters: Vec<Letter> = Vec::with_capacity(len);
    while letters.len() < len {
        let l = Letter::new(rng.gen_range(0..rank), rng.gen_bool(0.5));
        if letters.last().map_or(true, |p| *p != l.inverse()) {
            letters.push(l);
        }
    }
    FreeWord::new(letters)
}

fn random_cyclic(rng: &mut ChaCha8Rng, rank: u32, len: usize) -> FreeWord {
    loop {
        let word = random_reduced(rng, rank, len);
        if word.is_cyclically_reduced() {
            return word;
        }
    }
}

/// A witness must certify non-malnormality on its face.
fn assert_witness_valid(c: &[SubgroupGraph], wit: &MalnormalWitness) {
    assert!(!wit.w.is_empty());
    assert!(c[wit.j].contains(&wit.w));
    assert!(c[wit.i].contains(&wit.g.mul(&wit.w).mul(&wit.g.inverse())));
    if wit.i == wit.j {
        assert!(!c[wit.i].contains(&wit.g));
    }
}

#[test]
fn malnormal_examples() {
    assert!(check_malnormal(&[sub(2, &["a"])]).passed);
    assert!(check_malnormal(&[sub(2, &["a"]), sub(2, &["b"])]).passed);

    let c = [sub(2, &["a a"])];
    let r = check_malnormal(&c);
    assert!(!r.passed);
    assert_eq!(r.witnesses.len(), 1);
    assert_eq!(r.witnesses[0].g, w(2, "a"));
    assert_eq!(r.witnesses[0].w, w(2, "a a"));
    assert_witness_valid(&c, &r.witnesses[0]);

    // Conjugate subgroups are never a malnormal pair.
    let c = [sub(2, &["a b"]), sub(2, &["b a"])];
    let r = check_malnormal(&c);
    assert!(!r.passed && r.witnesses.iter().all(|x| (x.i, x.j) == (0, 1)));
    assert_witness_valid(&c, &r.witnesses[0]);
}

fn random_collection(rng: &mut ChaCha8Rng) -> Vec<SubgroupGraph> {
    let count = rng.gen_range(1..=2);
    (0..count)
        .map(|_| {
            let gens = rng.gen_range(1..=2);
            let words = (0..gens)
                .map(|_| {
                    let len = rng.gen_range(1..=3);
                    random_reduced(rng, 2, len)
                })
                .collect();
            SubgroupGraph::new(words, 2).unwrap()
        })
        .collect()
}

#[test]
fn malnormality_matches_element_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut pass, mut fail) = (0, 0);
    for _ in 0..60 {
        let c = random_collection(&mut rng);
        let r = check_malnormal(&c);
        let gens: Vec<Vec<FreeWord>> = c.iter().map(|h| h.generators.clone()).collect();
        let found = oracle::malnormal_witness(&gens, 2, 6, 10);
        assert_eq!(r.passed, found.is_none(), "{gens:?}: {r:?} vs {found:?}");
        for wit in &r.witnesses {
            assert_witness_valid(&c, wit);
        }
        if r.passed {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    assert!(pass > 5 && fail > 5, "{pass} / {fail}");
}

#[test]
fn piece_bound_of_cyclic_subgroups() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut rounds = 0;
    while rounds < 40 {
        let count = rng.gen_range(1..=4);
        let words: Vec<FreeWord> = (0..count)
            .map(|_| {
                let len = rng.gen_range(2..=40);
                random_cyclic(&mut rng, 2, len)
            })
            .collect();
        // Primitive and pairwise non-conjugate: a malnormal family.
        let ok = words.iter().all(|u| u.root().1 == 1)
            && (0..count)
                .all(|i| (i + 1..count).all(|j| !oracle::cyclically_related(&words[i], &words[j])));
        if !ok {
            continue;
        }
        rounds += 1;
        let c: Vec<SubgroupGraph> = words
            .iter()
            .map(|u| SubgroupGraph::new(vec![u.clone()], 2).unwrap())
            .collect();
        let bound = compute_k(&c).unwrap();
        let mut expected = 0;
        for i in 0..count {
            for j in i..count {
                expected = expected
                    .max(oracle::max_common_cyclic_subword(&words[i], &words[j], i == j).unwrap());
            }
        }
        assert_eq!(bound.d, expected, "{words:?}");
        assert_eq!((bound.m, bound.k), (0, expected));
    }
}

#[test]
fn piece_bound_examples() {
    let b = compute_k(&[sub(2, &["a b"])]).unwrap();
    assert_eq!(b, PieceBound { d: 0, m: 0, k: 0 });
    let e = compute_k(&[sub(2, &["a a"])]).unwrap_err();
    assert!(matches!(e, Error::NotMalnormal(ref s) if s.contains("H_0 and H_0")));
}

#[test]
fn isolation_examples() {
    let r = check_isolated_and_gen_malnormal(&sub(2, &["a a", "b"]), 6);
    assert!(!r.isolated);
    let (u, p) = r.root_witness.clone().unwrap();
    assert_eq!(u, w(2, "a"));
    assert_eq!(p, w(2, "a a"));
    assert!(!r.exhaustive && r.budget == 6);

    let j = sub(2, &["a b a", "b a b"]);
    let r = check_isolated_and_gen_malnormal(&j, 8);
    assert_eq!(
        r.malnormal(),
        check_malnormal(std::slice::from_ref(&j)).passed
    );
    assert_eq!(r.root_witness, Some((w(2, "a b"), w(2, "a b a b a b"))));

    let r = check_isolated_and_gen_malnormal(&sub(2, &["a", "b"]), 6);
    assert!(r.isolated && r.generator_malnormal);
}

#[test]
fn isolation_is_implied_by_malnormality() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..80 {
        let c = random_collection(&mut rng);
        let j = &c[0];
        let exact = check_malnormal(std::slice::from_ref(j)).passed;
        let r = check_isolated_and_gen_malnormal(j, 6);
        if exact {
            assert!(r.malnormal(), "{:?}", j.generators);
        }
        if let Some((u, p)) = &r.root_witness {
            assert!(j.contains(p) && !j.contains(u));
            assert!(!exact);
        }
        if r.generator_witness.is_some() {
            assert!(!exact);
        }
    }
}

#[test]
fn avoiding_conjugates() {
    let h = sub(2, &["a"]);
    assert_eq!(
        find_avoiding_conjugate(&h, &[], 4).unwrap(),
        FreeWord::empty()
    );
    let g = find_avoiding_conjugate(&h, &[sub(2, &["a"])], 4).unwrap();
    assert_eq!(g, w(2, "b"));
    let full = sub(2, &["a", "b"]);
    assert!(matches!(
        find_avoiding_conjugate(&full, &[h.clone()], 4),
        Err(Error::Precondition(_))
    ));

    // The oracle sees no common nontrivial element among short words.
    let s = [sub(2, &["a b"]), sub(2, &["b b a"])];
    let h = sub(2, &["a b b", "a a b a"]);
    assert!(!h.is_finite_index());
    let g = find_avoiding_conjugate(&h, &s, 4).unwrap();
    let hg: Vec<FreeWord> = h
        .generators
        .iter()
        .map(|x| g.inverse().mul(x).mul(&g))
        .collect();
    let mine = oracle::subgroup_elements(&hg, 6, 10);
    for t in &s {
        let theirs = oracle::subgroup_elements(&t.generators, 6, 10);
        assert_eq!(mine.intersection(&theirs).count(), 1);
    }
}

#[test]
fn claim_example_pair() {
    // β₁ = a, β'₁ = b is admissible, but ⟨aba, bab⟩ contains (ab)³ and
    // not ab, so the search moves past it.
    let h = [w(2, "a b")];
    assert!(beta_violations(&h, &[w(2, "a")], &[w(2, "b")], 2)
        .unwrap()
        .is_empty());
    let first = sub(2, &["a b a", "b a b"]);
    let r = check_malnormal(std::slice::from_ref(&first));
    assert!(!r.passed);
    assert!(first.contains(&w(2, "a b a b a b")) && !first.contains(&w(2, "a b")));
    assert_witness_valid(std::slice::from_ref(&first), &r.witnesses[0]);

    let p = build_malnormal_pair(&h, 2, None).unwrap();
    assert_eq!((p.a.clone(), p.b.clone()), (w(2, "a b b"), w(2, "a a b")));
    assert_eq!(p.tested, 2);
    assert!(check_malnormal(std::slice::from_ref(&p.j)).passed);
    assert_eq!(p.j.subgroup_rank(), 2);

    let p = build_malnormal_pair(&[w(2, "a"), w(2, "b")], 2, None).unwrap();
    assert!(check_malnormal(std::slice::from_ref(&p.j)).passed);
    // J meets no conjugate of ⟨a⟩ or ⟨b⟩.
    for x in [sub(2, &["a"]), sub(2, &["b"])] {
        let fp = FiberProduct::over_bouquet(&p.j.core, &x.core);
        assert!(fp.components.iter().all(|c| !c.has_cycle()));
    }
    let gens = vec![p.j.generators.clone(), vec![w(2, "a")], vec![w(2, "b")]];
    assert!(oracle::malnormal_witness(&gens, 2, 5, 10).is_none());
}

#[test]
fn beta_conditions() {
    let h = [w(2, "a b")];
    // β₁ starts with the inverse of the last letter of h₁.
    let v = beta_violations(&h, &[w(2, "b'")], &[w(2, "a a")], 2).unwrap();
    assert_eq!(v, vec![BetaViolation::Cancellation { s: 0 }]);
    let v = beta_violations(&h, &[w(2, "a")], &[w(2, "a a")], 2).unwrap();
    assert_eq!(v, vec![BetaViolation::PowerRelated { s: 1, t: 0 }]);
    let v = beta_violations(&h, &[w(2, "b' a'")], &[w(2, "b")], 2).unwrap();
    assert_eq!(v, vec![BetaViolation::InSubgroup { s: 0 }]);
    assert!(beta_violations(&h, &[w(2, "a")], &[w(2, "b")], 2)
        .unwrap()
        .is_empty());
}

#[test]
fn pair_preconditions() {
    assert!(matches!(
        build_malnormal_pair(&[w(2, "a"), w(2, "a a")], 2, None),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        build_malnormal_pair(&[w(2, "a b"), w(2, "b' a'")], 2, None),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        build_malnormal_pair(&[w(2, "a b a'")], 2, None),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        build_malnormal_pair(&[], 2, None),
        Err(Error::Precondition(_))
    ));
    assert!(matches!(
        build_malnormal_pair(&[w(2, "a b")], 2, Some(0)),
        Err(Error::BudgetExceeded(_))
    ));
}

#[test]
fn power_relation() {
    assert!(power_related(&w(2, "a b a b"), &w(2, "b' a'")));
    assert!(power_related(&w(2, "b a a b'"), &w(2, "b a b'")));
    assert!(!power_related(&w(2, "a b"), &w(2, "b a")));
    assert!(!power_related(&w(2, "a a"), &w(2, "a a a")));
}

#[test]
fn random_pairs_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut built = 0;
    for _ in 0..40 {
        let k = rng.gen_range(1..=3);
        let h: Vec<FreeWord> = (0..k)
            .map(|_| {
                let len = rng.gen_range(1..=4);
                random_cyclic(&mut rng, 2, len)
            })
            .collect();
        match build_malnormal_pair(&h, 2, None) {
            Ok(p) => {
                built += 1;
                assert!(check_malnormal(std::slice::from_ref(&p.j)).passed);
                assert!(beta_violations(&h, &p.betas, &p.betas_prime, 2)
                    .unwrap()
                    .is_empty());
                assert_eq!(p.j.subgroup_rank(), 2);
                let mut a = FreeWord::empty();
                for i in 0..k {
                    a = a.concat(&h[i]).concat(&p.betas[i]);
                }
                assert_eq!(a, p.a);
                assert!(a.is_reduced() && p.b.is_reduced());
            }
            Err(Error::Precondition(_)) | Err(Error::BudgetExceeded(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }
    assert!(built > 10);
}

fn noise_input(
    subgroup: SubgroupGraph,
    l1: FreeWord,
    l2: FreeWord,
    gamma: FreeWord,
    k: usize,
    alpha: u64,
) -> NoiseInput {
    NoiseInput {
        index: 0,
        subgroup,
        gamma,
        lambda1: l1,
        lambda2: l2,
        k,
        alpha: Rational::from_integer(alpha),
        seed: 7,
    }
}

fn assert_noise_postconditions(inp: &NoiseInput, r: &NoiseRecipe) {
    let ka = inp.k.max(1) as u64 * *inp.alpha.numer() / *inp.alpha.denom();
    let s = &r.sigma;
    assert!(s.is_reduced() && s.is_cyclically_reduced());
    assert_eq!(s.root().1, 1);
    assert!(s.len() as u64 >= ka * *inp.alpha.numer() / *inp.alpha.denom());
    assert_eq!(*s, r.sigma_prime.concat(&inp.gamma));
    assert!(inp.subgroup.contains(&r.sigma_prime));
    let piece = oracle::max_common_cyclic_subword(s, s, true).unwrap();
    assert_eq!(piece, r.self_piece);
    assert!(piece as u64 + 1 <= ka);
}

#[test]
fn noise_small_recipe() {
    let h = sub(3, &["a", "b"]);
    let inp = noise_input(h, w(3, "a"), w(3, "b"), w(3, "c"), 1, 4);
    let r = generate_noise_word(&inp).unwrap();
    assert!(r.staircase_rejections[0].starts_with("t = 4"));
    assert_eq!(
        staircase_word(&w(3, "a"), &w(3, "b"), 4),
        w(3, "a b a b b a b b b a b b b b")
    );
    assert!(matches!(r.method, NoiseMethod::LowRepetition { .. }));
    assert_noise_postconditions(&inp, &r);
    // Same input, same word.
    assert_eq!(generate_noise_word(&inp).unwrap(), r);
}

#[test]
fn noise_rejects_cyclic_subgroups() {
    let h = sub(2, &["a b"]);
    let inp = noise_input(h, w(2, "a b"), w(2, "a b a b"), w(2, "a"), 1, 4);
    assert!(matches!(
        generate_noise_word(&inp),
        Err(Error::Precondition(_))
    ));
    let h = sub(2, &["a", "b"]);
    let inp = noise_input(h, w(2, "a"), w(2, "a"), w(2, "b"), 1, 4);
    assert!(matches!(
        generate_noise_word(&inp),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn noise_words_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut done = 0;
    while done < 100 {
        let (l1, l2) = {
            let n1 = rng.gen_range(1..=2);
            let n2 = rng.gen_range(1..=2);
            (
                random_reduced(&mut rng, 2, n1),
                random_reduced(&mut rng, 2, n2),
            )
        };
        let h = SubgroupGraph::new(vec![l1.clone(), l2.clone()], 3).unwrap();
        if h.subgroup_rank() != 2 {
            continue;
        }
        // K is at least the piece bound of H itself.
        let Ok(bound) = compute_k(std::slice::from_ref(&h)) else {
            continue;
        };
        if bound.k > 3 {
            continue;
        }
        let glen = rng.gen_range(1..=6);
        let gamma = random_reduced(&mut rng, 3, glen);
        let k = rng.gen_range(bound.k..=3);
        let alpha = if rng.gen_bool(0.5) { 14 } else { 16 };
        let mut inp = noise_input(h, l1, l2, gamma, k, alpha);
        inp.index = done;
        let r = generate_noise_word(&inp).unwrap_or_else(|e| panic!("{inp:?}: {e}"));
        assert_noise_postconditions(&inp, &r);
        done += 1;
    }
}
