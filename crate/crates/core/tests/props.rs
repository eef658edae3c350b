use std::collections::HashMap;

use proptest::prelude::*;
use randsld::rng::{shuffle, RandomStream, SplitMix64};
use randsld::strategy::{drop_shuffle_tuple_probability, select_drop_shuffle, select_guard};
use randsld::term::Var;
use randsld::{apply, parse_program, parse_term, solve, unify, Limits, Strategy as Selection, Substitution, Term};

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        prop::sample::select(vec!["X", "Y", "Z", "W"]).prop_map(Term::var),
        prop::sample::select(vec!["a", "b", "nil", "hello world", "It's"]).prop_map(Term::atom),
        (-20i64..20).prop_map(Term::int),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec!["f", "g", "Odd name"]), prop::collection::vec(inner.clone(), 1..4))
                .prop_map(|(f, args)| Term::compound(f, args)),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Term::list),
            (prop::collection::vec(inner, 1..3), prop::sample::select(vec!["T", "Z"]))
                .prop_map(|(items, tail)| Term::list_with_tail(items, Term::var(tail))),
        ]
    })
}

/// Whether `a` and `b` differ only by a consistent renaming of variables.
fn variant(a: &Term, b: &Term) -> bool {
    fn go(a: &Term, b: &Term, fw: &mut HashMap<Var, Var>, bw: &mut HashMap<Var, Var>) -> bool {
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                *fw.entry(x.clone()).or_insert_with(|| y.clone()) == *y
                    && *bw.entry(y.clone()).or_insert_with(|| x.clone()) == *x
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                f == g && xs.len() == ys.len() && xs.iter().zip(ys.iter()).all(|(x, y)| go(x, y, fw, bw))
            }
            _ => a == b,
        }
    }
    go(a, b, &mut HashMap::new(), &mut HashMap::new())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn unifier_unifies(a in term(), b in term()) {
        if let Some(s) = unify(&a, &b, &Substitution::new()) {
            prop_assert_eq!(apply(&s, &a), apply(&s, &b));
        }
    }

    #[test]
    fn apply_is_idempotent(a in term(), b in term()) {
        if let Some(s) = unify(&a, &b, &Substitution::new()) {
            let once = apply(&s, &a);
            prop_assert_eq!(apply(&s, &once), once);
        }
    }

    #[test]
    fn self_unification_is_trivial(a in term()) {
        let s = unify(&a, &a, &Substitution::new()).unwrap();
        prop_assert_eq!(apply(&s, &a), a);
    }

    #[test]
    fn unification_is_symmetric(a in term(), b in term()) {
        let ab = unify(&a, &b, &Substitution::new());
        let ba = unify(&b, &a, &Substitution::new());
        prop_assert_eq!(ab.is_some(), ba.is_some());
        if let (Some(x), Some(y)) = (ab, ba) {
            prop_assert!(variant(&apply(&x, &a), &apply(&y, &a)));
        }
    }

    #[test]
    fn printed_terms_parse_back(a in term()) {
        let text = a.to_string();
        prop_assert_eq!(parse_term(&text).unwrap(), a);
    }

    #[test]
    fn engine_agrees_with_unify(a in term(), b in term()) {
        let program = parse_program("eq(X, X).").unwrap();
        let query = [Term::compound("eq", vec![a.clone(), b.clone()])];
        let sols: Vec<_> = solve(&program, &query, Selection::Standard, SplitMix64::new(0), Limits::unlimited())
            .collect::<Result<_, _>>()
            .unwrap();
        let mgu = unify(&a, &b, &Substitution::new());
        prop_assert_eq!(sols.len(), mgu.is_some() as usize);
        if let (Some(sol), Some(s)) = (sols.first(), mgu) {
            let ea = apply(&sol.bindings, &a);
            prop_assert_eq!(&ea, &apply(&sol.bindings, &b));
            prop_assert!(variant(&ea, &apply(&s, &a)));
        }
    }

    #[test]
    fn shuffle_permutes(n in 0usize..12, seed in any::<u64>()) {
        let mut v: Vec<usize> = (0..n).collect();
        shuffle(&mut v, &mut SplitMix64::new(seed));
        v.sort();
        prop_assert_eq!(v, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn guard_selection_keeps_order(g in prop::collection::vec(0.0f64..=1.0, 0..6), seed in any::<u64>()) {
        let items: Vec<usize> = (0..g.len()).collect();
        let kept = select_guard(&items, |&i| g[i], &mut SplitMix64::new(seed));
        prop_assert!(kept.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(kept.iter().all(|&i| g[i] > 0.0));
        prop_assert!(items.iter().filter(|&&i| g[i] == 1.0).all(|i| kept.contains(i)));
    }

    #[test]
    fn drop_shuffle_returns_distinct_items(n in 0usize..8, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let items: Vec<usize> = (0..n).collect();
        let mut kept = select_drop_shuffle(&items, p, &mut SplitMix64::new(seed));
        kept.sort();
        kept.dedup();
        prop_assert!(kept.len() <= n);
        if p == 0.0 {
            prop_assert_eq!(kept.len(), n);
        }
    }
}

/// Stream returning scripted unit floats.
struct Scripted(Vec<f64>);

impl RandomStream for Scripted {
    fn next_u64(&mut self) -> u64 {
        unreachable!()
    }
    fn next_unit_float(&mut self) -> f64 {
        self.0.remove(0)
    }
}

#[test]
fn guard_keep_set_law_is_exact() {
    let g = [0.2, 0.5, 0.9, 0.35];
    for n in 1..=4 {
        let items: Vec<usize> = (0..n).collect();
        let mut total = 0.0;
        for mask in 0u32..1 << n {
            let draws: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { g[i] - 1e-9 } else { g[i] }).collect();
            let kept = select_guard(&items, |&i| g[i], &mut Scripted(draws));
            let expect: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            assert_eq!(kept, expect);
            total += (0..n).map(|i| if mask >> i & 1 == 1 { g[i] } else { 1.0 - g[i] }).product::<f64>();
        }
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn guard_keep_set_frequencies() {
    let g = [0.2, 0.5, 0.9];
    let items = [0usize, 1, 2];
    let n = 100_000;
    let mut counts = [0usize; 8];
    let mut rng = SplitMix64::new(31);
    for _ in 0..n {
        let kept = select_guard(&items, |&i| g[i], &mut rng);
        counts[kept.iter().map(|&i| 1 << i).sum::<usize>()] += 1;
    }
    for (mask, &c) in counts.iter().enumerate() {
        let p: f64 = (0..3).map(|i| if mask >> i & 1 == 1 { g[i] } else { 1.0 - g[i] }).product();
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((c as f64 / n as f64 - p).abs() < 4.0 * sd, "mask {mask}");
    }
}

#[test]
fn drop_shuffle_with_no_drops_is_uniform() {
    let n = 100_000;
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    let mut rng = SplitMix64::new(5);
    for _ in 0..n {
        *counts.entry(select_drop_shuffle(&[1u8, 2, 3], 0.0, &mut rng)).or_default() += 1;
    }
    assert_eq!(counts.len(), 6);
    let sd = (1.0 / 6.0 * 5.0 / 6.0 / n as f64).sqrt();
    for c in counts.values() {
        assert!((*c as f64 / n as f64 - 1.0 / 6.0).abs() < 3.0 * sd);
    }
}

#[test]
fn drop_shuffle_tuple_law() {
    assert_eq!(drop_shuffle_tuple_probability(2, 2, 0.5), 0.125);
    let n = 100_000;
    let mut rng = SplitMix64::new(17);
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for _ in 0..n {
        *counts.entry(select_drop_shuffle(&[1u8, 2, 3], 0.4, &mut rng)).or_default() += 1;
    }
    let mut total = 0.0;
    for (t, c) in &counts {
        let p = drop_shuffle_tuple_probability(3, t.len(), 0.4);
        total += p;
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        assert!((*c as f64 / n as f64 - p).abs() < 4.0 * sd, "{t:?}");
    }
    assert_eq!(counts.len(), 16);
    assert!((total - 1.0).abs() < 1e-12);
}
