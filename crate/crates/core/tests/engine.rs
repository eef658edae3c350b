use randsld::engine::LimitKind;
use randsld::programs::{command_sequence, commands_program, commands_source_disjunctive};
use randsld::rng::derive_seed;
use randsld::{
    count_run, parse_program, parse_query, parse_term, solve, solve_loop, CountingStream, EngineError, GuardParams,
    Limits, Probability, SplitMix64, Strategy, Target, Term,
};

fn answers(program: &str, query: &str, var: &str) -> Vec<String> {
    let p = parse_program(program).unwrap();
    let q = parse_query(query).unwrap();
    solve(&p, &q, Strategy::Standard, SplitMix64::new(0), Limits::unlimited())
        .map(|s| s.unwrap().bindings.lookup(var).map_or("_".into(), ToString::to_string))
        .collect()
}

#[test]
fn standard_order_is_depth_first_left_to_right() {
    let prog = "
        p(X, Y) :- q(X), r(Y).
        p(z, z).
        q(a). q(b).
        r(1). r(2).
    ";
    let got = answers(prog, "p(X, Y), true_", "X");
    assert!(got.is_empty(), "undefined goal fails");
    let p = parse_program(prog).unwrap();
    let q = parse_query("p(X, Y)").unwrap();
    let pairs: Vec<String> = solve(&p, &q, Strategy::Standard, SplitMix64::new(0), Limits::unlimited())
        .map(|s| {
            let s = s.unwrap().bindings;
            format!("{}{}", s.lookup("X").unwrap(), s.lookup("Y").unwrap())
        })
        .collect();
    assert_eq!(pairs, vec!["a1", "a2", "b1", "b2", "zz"]);
}

#[test]
fn append_enumerates_splits() {
    let prog = "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).";
    let got = answers(prog, "app(X, Y, [1,2,3])", "X");
    assert_eq!(got, vec!["[]", "[1]", "[1,2]", "[1,2,3]"]);
    let got = answers(prog, "app([1], [2], Z)", "Z");
    assert_eq!(got, vec!["[1,2]"]);
}

#[test]
fn occurs_check_in_engine() {
    assert!(answers("eq(X, X).", "eq(Y, f(Y))", "Y").is_empty());
    assert_eq!(answers("eq(X, X).", "eq(Y, f(Z))", "Y"), vec!["f(Z)"]);
}

#[test]
fn disjunction_equals_separate_clauses() {
    let a = "p(X) :- q(X) ; r(X), s(X) ; eq(X, c).\nq(a). r(b). r(c). s(c). eq(X, X).";
    let b = "p(X) :- q(X).\np(X) :- r(X), s(X).\np(X) :- eq(X, c).\nq(a). r(b). r(c). s(c). eq(X, X).";
    assert_eq!(answers(a, "p(X)", "X"), answers(b, "p(X)", "X"));
    assert_eq!(answers(a, "p(X)", "X"), vec!["a", "c", "c"]);
}

#[test]
fn commands_program_standard_strategy_walks_left_spine() {
    let p = parse_program(&commands_source_disjunctive(3)).unwrap();
    let q = parse_query("t(X)").unwrap();
    let limits = Limits::new(Some(5), None).unwrap();
    let mut sols = solve(&p, &q, Strategy::Standard, SplitMix64::new(0), limits);
    let mut seen = Vec::new();
    let err = loop {
        match sols.next() {
            Some(Ok(s)) => seen.push(s.bindings.lookup("X").unwrap().to_string()),
            Some(Err(e)) => break e,
            None => panic!("should hit the depth limit"),
        }
    };
    assert_eq!(seen, vec!["[]", "[first]"]);
    assert!(matches!(err, EngineError::LimitExceeded { kind: LimitKind::Depth, .. }));
    assert!(sols.next().is_none());

    let unlimited = solve(&p, &q, Strategy::Standard, SplitMix64::new(0), Limits::unlimited());
    let first: Vec<String> = unlimited.take(4).map(|s| s.unwrap().bindings.lookup("X").unwrap().to_string()).collect();
    assert_eq!(first, vec!["[]", "[first]", "[first,first]", "[first,first,first]"]);
}

#[test]
fn guard_without_recursion_yields_only_empty_list() {
    let g = GuardParams::uniform(3, 1.0 / 3.0, 0.0).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    for seed in 0..50 {
        let sols: Vec<_> =
            solve(&p, &q, Strategy::Guard, SplitMix64::new(seed), Limits::unlimited()).map(Result::unwrap).collect();
        assert_eq!(sols.len(), 1);
        assert_eq!(sols[0].bindings.lookup("X"), Some(&Term::nil()));
    }
}

#[test]
fn drop_everything_yields_nothing() {
    let p = commands_program(3, None);
    let q = parse_query("t(X)").unwrap();
    let s = Strategy::DropShuffle { p_drop: Probability::ONE };
    let mut sols = solve(&p, &q, s, SplitMix64::new(1), Limits::unlimited());
    assert!(sols.next().is_none());
    assert!(sols.is_exhausted());
    assert_eq!(sols.stats().steps, 1);
    let stats = count_run(&p, &q, s, SplitMix64::new(1), Limits::unlimited()).unwrap();
    assert_eq!(stats.results, 0);
}

#[test]
fn drop_nothing_keeps_every_clause() {
    let p = commands_program(3, None);
    let q = parse_query("command(X)").unwrap();
    let s = Strategy::DropShuffle { p_drop: Probability::ZERO };
    for seed in 0..20 {
        let mut got: Vec<String> = solve(&p, &q, s, SplitMix64::new(seed), Limits::unlimited())
            .map(|s| s.unwrap().bindings.lookup("X").unwrap().to_string())
            .collect();
        got.sort();
        assert_eq!(got, vec!["first", "second", "third"]);
    }
}

#[test]
fn exhaustion_restores_machine() {
    let g = GuardParams::uniform(3, 0.5, 0.5).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    for seed in 0..200 {
        let mut sols = solve(&p, &q, Strategy::Guard, SplitMix64::new(seed), Limits::unlimited());
        for s in sols.by_ref() {
            s.unwrap();
        }
        let f = sols.footprint();
        assert!(sols.is_exhausted());
        assert_eq!((f.heap, f.trail, f.choice_points, f.pending_alternatives), (0, 0, 0, 0));
    }
}

#[test]
fn determinism() {
    let g = GuardParams::uniform(3, 0.4, 0.6).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    let run = |seed| {
        solve(&p, &q, Strategy::Guard, SplitMix64::new(seed), Limits::unlimited())
            .map(|s| {
                let s = s.unwrap();
                (s.bindings.to_string(), s.stats)
            })
            .collect::<Vec<_>>()
    };
    for seed in 0..20 {
        assert_eq!(run(seed), run(seed));
    }
    let ds = Strategy::DropShuffle { p_drop: Probability::new(0.5).unwrap() };
    let p = commands_program(3, None);
    let a: Vec<_> =
        solve(&p, &q, ds, SplitMix64::new(4), Limits::unlimited()).map(|s| s.unwrap().bindings.to_string()).collect();
    let b: Vec<_> =
        solve(&p, &q, ds, SplitMix64::new(4), Limits::unlimited()).map(|s| s.unwrap().bindings.to_string()).collect();
    assert_eq!(a, b);
}

#[test]
fn guard_draws_one_per_clause_per_reduction() {
    let g = GuardParams::uniform(3, 0.5, 0.5).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    for seed in 0..50 {
        let mut rng = CountingStream::new(SplitMix64::new(seed));
        let stats = count_run(&p, &q, Strategy::Guard, &mut rng, Limits::unlimited()).unwrap();
        // 2 draws per t/1 reduction, 3 per command/1 reduction
        let draws = rng.draws();
        assert!(draws >= 2);
        assert!(draws <= 3 * stats.steps);
    }
    // exact count for a single reduction of command/1
    let q = parse_query("command(X)").unwrap();
    let mut rng = CountingStream::new(SplitMix64::new(1));
    count_run(&p, &q, Strategy::Guard, &mut rng, Limits::unlimited()).unwrap();
    assert_eq!(rng.draws(), 3);
}

#[test]
fn drop_shuffle_draws_match_survivors() {
    let p = commands_program(3, None);
    let q = parse_query("command(X)").unwrap();
    let ds = Strategy::DropShuffle { p_drop: Probability::new(0.3).unwrap() };
    for seed in 0..200 {
        let mut rng = CountingStream::new(SplitMix64::new(seed));
        let stats = count_run(&p, &q, ds, &mut rng, Limits::unlimited()).unwrap();
        let k = stats.results;
        assert_eq!(rng.draws(), 3 + k.saturating_sub(1));
    }
    // only head-unifiable clauses are candidates
    let q = parse_query("command(second)").unwrap();
    let mut rng = CountingStream::new(SplitMix64::new(3));
    count_run(&p, &q, ds, &mut rng, Limits::unlimited()).unwrap();
    assert_eq!(rng.draws(), 1);
}

#[test]
fn solve_loop_first_output_is_empty_list() {
    let g = GuardParams::uniform(3, 1.0 / 3.0, 0.5).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    let target = Target::equals("X", Term::nil());
    let stats = solve_loop(&p, &q, &target, Strategy::Guard, SplitMix64::new(1), Limits::unlimited()).unwrap();
    assert_eq!((stats.iterations, stats.results), (1, 1));
}

#[test]
fn solve_loop_reports_unreachable_targets() {
    let g = GuardParams::uniform(3, 1.0 / 3.0, 0.5).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    let target = Target::equals("X", parse_term("[fourth]").unwrap());
    let limits = Limits::new(None, Some(10_000)).unwrap();
    let err = solve_loop(&p, &q, &target, Strategy::Guard, SplitMix64::new(1), limits).unwrap_err();
    match err {
        EngineError::LimitExceeded { kind, stats } => {
            assert_eq!(kind, LimitKind::Steps);
            assert!(stats.iterations > 1);
        }
        other => panic!("{other}"),
    }
    let missing = Target::equals("Y", Term::nil());
    assert!(matches!(
        solve_loop(&p, &q, &missing, Strategy::Guard, SplitMix64::new(1), limits),
        Err(EngineError::UnknownTargetVariable(_))
    ));
}

#[test]
fn predicate_targets_need_ground_solutions() {
    let p = parse_program("open(f(_)).").unwrap();
    let q = parse_query("open(X)").unwrap();
    let t = Target::matches("X", |_| true);
    let err = solve_loop(&p, &q, &t, Strategy::Standard, SplitMix64::new(0), Limits::unlimited()).unwrap_err();
    assert!(matches!(err, EngineError::NonGroundSolution(_)));
}

#[test]
fn geometric_iterations_for_second_second() {
    let g = GuardParams::uniform(3, 1.0 / 3.0, 0.5).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("t(X)").unwrap();
    let target = Target::equals("X", command_sequence(&[2, 2]));
    let n = 20_000u64;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for i in 0..n {
        let rng = SplitMix64::new(derive_seed(17, i));
        let s = solve_loop(&p, &q, &target, Strategy::Guard, rng, Limits::unlimited()).unwrap();
        let x = s.iterations as f64;
        sum += x;
        sq += x * x;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - 36.0).abs() < 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn counting_outputs_below_the_root() {
    let g = GuardParams::uniform(3, 1.0 / 3.0, 0.5).unwrap();
    let p = commands_program(3, Some(&g));
    let q = parse_query("command(H), t(T)").unwrap();
    let n = 50_000u64;
    let mut sum = 0.0;
    let mut sq = 0.0;
    for i in 0..n {
        let s = count_run(&p, &q, Strategy::Guard, SplitMix64::new(derive_seed(3, i)), Limits::unlimited()).unwrap();
        let x = s.results as f64;
        sum += x;
        sq += x * x;
    }
    let mean = sum / n as f64;
    let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean} se {se}");

    let g0 = GuardParams::uniform(3, 1.0 / 3.0, 0.0).unwrap();
    let p0 = commands_program(3, Some(&g0));
    let mean0: f64 = (0..n)
        .map(|i| {
            count_run(&p0, &q, Strategy::Guard, SplitMix64::new(derive_seed(5, i)), Limits::unlimited())
                .unwrap()
                .results as f64
        })
        .sum::<f64>()
        / n as f64;
    assert!((mean0 - 1.0).abs() < 0.02, "{mean0}");
}

#[test]
fn fresh_randomness_every_reduction() {
    // The same goal reduced twice in one derivation must not reuse a draw.
    let p = parse_program("pair(X, Y) :- c(X), c(Y).\nc(a) :- guard(0.5).\nc(b) :- guard(0.5).").unwrap();
    let q = parse_query("pair(X, Y)").unwrap();
    let mut differ = 0;
    for seed in 0..2000 {
        let sols: Vec<_> = solve(&p, &q, Strategy::Guard, SplitMix64::new(seed), Limits::unlimited())
            .map(|s| s.unwrap().bindings.to_string())
            .collect();
        if sols.len() == 1 && (sols[0].contains("X = a, Y = b") || sols[0].contains("X = b, Y = a")) {
            differ += 1;
        }
    }
    assert!(differ > 0);
}

#[test]
fn zero_limits_are_rejected() {
    assert!(Limits::new(Some(0), None).is_err());
    assert!(Limits::new(None, Some(0)).is_err());
}
