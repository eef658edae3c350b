use std::collections::HashSet;

use randsld::analytics::{ds, guard};
use randsld::chain::mc::{guard_counts, hitting_time};
use randsld::chain::{
    exact_truncated, mc_counts_guard, mc_hitting, ChainModel, DsChain, DsChainState, FiniteChain, Frame, GuardChain,
    GuardChainState, McConfig, Sel, Truncation,
};
use randsld::rng::{RandomStream, SplitMix64};
use randsld::{DropShuffleParams, GuardParams};

fn gp(r: usize, p: f64, pc: f64) -> GuardParams {
    GuardParams::uniform(r, p, pc).unwrap()
}

fn dp(p_d: f64, r: usize) -> DropShuffleParams {
    DropShuffleParams::new(p_d, r).unwrap()
}

fn check_stochastic<M: ChainModel>(m: &M, depth: usize) {
    let fc = FiniteChain::build(m, &m.initial(), depth, 100_000, Truncation::Absorb).unwrap();
    for s in &fc.states {
        let t = m.transitions(s);
        let total: f64 = t.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12, "{s:?} sums to {total}");
    }
}

#[test]
fn transitions_are_stochastic() {
    for r in 1..=4 {
        check_stochastic(&GuardChain::new(gp(r, 0.3, 0.6)), 4);
        check_stochastic(&GuardChain::new(GuardParams::new(0.2, &vec![0.9; r]).unwrap()), 4);
        check_stochastic(&GuardChain::looped(gp(r, 0.3, 0.6)), 4);
    }
    for r in 1..=4 {
        let depth = if r <= 2 { 4 } else { 2 };
        check_stochastic(&DsChain::new(dp(0.4, r)), depth);
        check_stochastic(&DsChain::looped(dp(0.7, r)), depth);
    }
}

#[test]
fn guard_step_examples() {
    let l = GuardChain::looped(gp(3, 1.0 / 3.0, 0.5));
    let mut rng = SplitMix64::new(3);
    for _ in 0..100 {
        let mut s = GuardChainState::Root;
        l.step(&mut s, &mut rng);
        assert_eq!(s, GuardChainState::s(1, &[]));
    }
    let g = GuardChain::new(gp(3, 1.0 / 3.0, 0.5));
    let t = g.transitions(&GuardChainState::c(3, &[3, 3]));
    assert!(t.contains(&(GuardChainState::Dead, 0.5)));
    assert!(!g.is_output(&GuardChainState::s(1, &[])));
    assert!(g.is_output(&GuardChainState::Root));
    assert!(!l.is_output(&GuardChainState::Root));
}

#[test]
fn ds_step_examples() {
    let c = DsChain::new(dp(0.5, 3));
    let w = DsChainState::new(vec![Frame::new(Sel::Cons, &[1])], None);
    let t = c.transitions(&w);
    let to = DsChainState::new(vec![Frame::new(Sel::Cons, &[1])], Some(Sel::ConsNil));
    assert!(t.contains(&(to, 0.125)));
    let nil = DsChainState::new(vec![Frame::new(Sel::Cons, &[1])], Some(Sel::Nil));
    assert_eq!(c.transitions(&nil), vec![(nil.pop(), 1.0)]);
    assert_eq!(c.transitions(&DsChainState::empty()).last().unwrap(), &(DsChainState::Dead, 0.25));
    let l = DsChain::looped(dp(0.5, 3));
    assert_eq!(l.transitions(&DsChainState::Dead), vec![(DsChainState::empty(), 1.0)]);
}

#[test]
fn guard_counts_match_expectations() {
    let cfg = McConfig::new(100_000, 11);
    let g = gp(3, 1.0 / 3.0, 0.5);
    let (o, n) = mc_counts_guard(&g, &cfg).unwrap();
    let (eo, en) = guard::guard_expectations(&g).unwrap();
    assert!(o.within(eo, 3.0) && n.within(en, 3.0), "{o:?} {n:?}");
    let (o, n) = mc_counts_guard(&gp(3, 0.0, 0.5), &cfg).unwrap();
    assert_eq!((o.mean, n.mean, o.stderr), (0.0, 3.0, 0.0));
    let g = GuardParams::new(0.0, &[0.2, 0.7, 0.4]).unwrap();
    let (o, n) = mc_counts_guard(&g, &cfg).unwrap();
    assert!(o.within(1.3, 3.0) && n.within(4.3, 3.0));
}

#[test]
fn guard_trajectories_never_revisit() {
    let g = GuardChain::new(gp(3, 0.4, 0.6));
    for i in 0..2000 {
        let mut rng = SplitMix64::for_trial(5, i);
        let mut s = g.initial();
        let mut seen = HashSet::new();
        while s != GuardChainState::Dead {
            assert!(seen.insert(s.clone()), "revisited {s}");
            g.step(&mut s, &mut rng);
        }
    }
}

#[test]
fn truncation_vanishes_as_cap_grows() {
    let g = GuardChain::new(gp(3, 1.0 / 3.0, 0.8));
    let d = DsChain::new(dp(0.45, 3));
    let truncated = |cap: u64| {
        let mut g_cut = 0;
        let mut d_cut = 0;
        for i in 0..5000 {
            let mut rng = SplitMix64::for_trial(8, i);
            g_cut += guard_counts(&g, &mut rng, cap).is_none() as u32;
            d_cut += hitting_time(&d, &d.initial(), |s| *s == DsChainState::Dead, &mut rng, cap).is_none() as u32;
        }
        (g_cut, d_cut)
    };
    let (g10, d10) = truncated(10);
    let (g1k, d1k) = truncated(1000);
    assert!(g10 > g1k && d10 > d1k, "{g10} {g1k} {d10} {d1k}");
    assert!(g1k < 50 && d1k < 50);
}

#[test]
fn ds_leaves_subtrees_through_exit() {
    let c = DsChain::new(dp(0.5, 3));
    let roots = [
        DsChainState::empty(),
        DsChainState::new(vec![Frame::new(Sel::ConsNil, &[2, 1])], None),
        DsChainState::new(vec![Frame::new(Sel::Cons, &[3]), Frame::new(Sel::ConsNil, &[1, 2, 3])], None),
    ];
    for root in roots {
        let exit = root.pop();
        for i in 0..3000 {
            let mut rng = SplitMix64::for_trial(21, i);
            let mut s = root.clone();
            loop {
                c.step(&mut s, &mut rng);
                if !s.is_below(&root) {
                    assert_eq!(s, exit, "left {root} through {s}");
                    break;
                }
            }
        }
    }
}

#[test]
fn mc_hitting_examples() {
    let cfg = McConfig::new(100_000, 2);
    let l = GuardChain::looped(gp(3, 1.0 / 3.0, 0.5));
    let e = mc_hitting(&l, &GuardChainState::Root, |s| *s == GuardChainState::s(2, &[]), &cfg).unwrap();
    assert!(e.within(1.0 + 8.0 / 3.0, 3.0), "{e:?}");
    let d = DsChain::new(dp(0.5, 3));
    let e = mc_hitting(&d, &d.initial(), |s| *s == DsChainState::Dead, &cfg).unwrap();
    assert!(e.within(8.0, 3.0), "{e:?}");
    let e = mc_hitting(&d, &d.initial(), |s| s.is_subtree_root(), &cfg).unwrap();
    assert_eq!((e.mean, e.stderr), (0.0, 0.0));
}

#[test]
fn ds_sure_drop_is_exact() {
    let d = DsChain::new(dp(1.0, 3));
    let e = mc_hitting(&d, &d.initial(), |s| *s == DsChainState::Dead, &McConfig::new(1000, 1)).unwrap();
    assert_eq!((e.mean, e.stderr), (1.0, 0.0));
    let x = exact_truncated(&d, &d.initial(), |s| *s == DsChainState::Dead, 3).unwrap();
    assert_eq!((x.hit_probability, x.conditional_mht), (1.0, 1.0));
}

#[test]
fn exact_block_reach() {
    let g = GuardChain::new(gp(3, 1.0 / 3.0, 0.5));
    let x = exact_truncated(&g, &GuardChainState::Root, |s| s.block() == Some(&[2][..]), 4).unwrap();
    assert!((x.hit_probability - 1.0 / 12.0).abs() <= x.truncation_mass + 1e-12, "{x:?}");
    assert!(x.truncation_mass < 1e-2);
    let x = exact_truncated(
        &GuardChain::new(gp(3, 1.0 / 3.0, 0.0)),
        &GuardChainState::Root,
        |s| s.block() == Some(&[1][..]),
        3,
    )
    .unwrap();
    assert_eq!(x.hit_probability, 0.0);
    for alpha in [vec![], vec![1], vec![3, 1], vec![2, 2, 2]] {
        let want = guard::block_reach_prob(&alpha, &g.params, true).unwrap();
        let block: Vec<u32> = alpha.iter().map(|&a| a as u32).collect();
        let x =
            exact_truncated(&g, &GuardChainState::Root, |s| s.block() == Some(&block[..]), alpha.len() + 1).unwrap();
        assert!(x.hit_probability <= want + 1e-12);
        assert!(want - x.hit_probability <= x.truncation_mass + 1e-12);
    }
}

#[test]
fn exact_guard_hitting_time_approaches_formula() {
    let l = GuardChain::looped(gp(3, 1.0 / 3.0, 0.5));
    let want = guard::guard_hitting_time(&[], 2, &l.params).unwrap();
    let mut errs = Vec::new();
    for cap in 1..=4 {
        let fc = FiniteChain::build(&l, &GuardChainState::Root, cap, 10_000, Truncation::Restart).unwrap();
        let target = fc.mask(|s| *s == GuardChainState::s(2, &[]));
        let t = fc.mean_hitting_times(&target).unwrap();
        errs.push((t[0] - want).abs());
    }
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[3] < 0.05 * want);
}

#[test]
fn mht_decomposition_identity() {
    let chains: Vec<FiniteChain<GuardChainState>> = vec![
        FiniteChain::build(&GuardChain::looped(gp(3, 0.3, 0.5)), &GuardChainState::Root, 2, 2000, Truncation::Restart)
            .unwrap(),
        FiniteChain::build(&GuardChain::looped(gp(2, 0.6, 0.4)), &GuardChainState::Root, 3, 2000, Truncation::Restart)
            .unwrap(),
    ];
    let ds =
        FiniteChain::build(&DsChain::looped(dp(0.6, 2)), &DsChainState::empty(), 2, 2000, Truncation::Restart).unwrap();
    let mut rng = SplitMix64::new(99);
    let mut check = |n: usize, mht: &dyn Fn(&[bool]) -> Vec<f64>, before: &dyn Fn(usize, &[bool]) -> Vec<f64>| {
        for _ in 0..5 {
            let mut a = vec![false; n];
            for _ in 0..1 + rng.next_below(3) {
                a[rng.next_below(n as u64) as usize] = true;
            }
            let pick = |rng: &mut SplitMix64| loop {
                let k = rng.next_below(n as u64) as usize;
                if !a[k] {
                    break k;
                }
            };
            let x = pick(&mut rng);
            let y = loop {
                let y = pick(&mut rng);
                if y != x {
                    break y;
                }
            };
            let lhs = mht(&a)[x];
            let mut ay = a.clone();
            ay[y] = true;
            let rhs = mht(&ay)[x] + before(y, &a)[x] * mht(&a)[y];
            assert!((lhs - rhs).abs() <= 1e-8 * lhs.max(1.0), "{lhs} vs {rhs}");
        }
    };
    for fc in &chains {
        check(fc.len(), &|t| fc.mean_hitting_times(t).unwrap(), &|y, t| fc.hit_before(y, t).unwrap());
    }
    check(ds.len(), &|t| ds.mean_hitting_times(t).unwrap(), &|y, t| ds.hit_before(y, t).unwrap());
}

#[test]
fn ds_exit_probability_from_subtree_roots() {
    let c = DsChain::new(dp(0.5, 3));
    let cfg = McConfig::new(40_000, 6);
    let root = DsChainState::new(vec![Frame::new(Sel::ConsNil, &[2, 3])], None);
    let exit = root.pop();
    for l in 0..=2 {
        let rho: Vec<u32> = std::iter::once(2).chain(std::iter::repeat_n(1, l)).collect();
        let [q] = randsld::chain::mc_estimate(&cfg, |rng| {
            let mut s = root.clone();
            loop {
                c.step(&mut s, rng);
                if s == exit {
                    return Some([1.0]);
                }
                if s.emits(&rho) {
                    return Some([0.0]);
                }
            }
        })
        .unwrap();
        assert!(q.within(ds::ds_q(l, 0.5), 3.5), "l={l} {q:?}");
    }
}

#[test]
fn ds_looped_hitting_time_small_l() {
    let c = DsChain::looped(dp(0.5, 3));
    let e = mc_hitting(&c, &c.initial(), |s| s.emits(&[]), &McConfig::new(100_000, 12)).unwrap();
    let want = ds::ds_hitting_time(0, &c.params).unwrap();
    assert!(e.within(want, 3.0), "{e:?} vs {want}");
}
