mod common;

use frameless_mud::analysis::{
    cloud_exit_probability, evolve, initial_state_distribution, transition_distribution, DecoderState,
    TransitionDelta,
};
use frameless_mud::{analyze, analyze_with, degree_distribution, exact_per, AnalysisOptions, Analyzer, SystemParams};
use proptest::prelude::*;

fn params(n: usize, m: usize, k: usize, beta: f64) -> SystemParams {
    SystemParams::new(n, m, k, beta).unwrap()
}

fn state_strategy() -> impl Strategy<Value = (usize, DecoderState, usize, f64)> {
    (1usize..=3, 0u32..=20, prop::array::uniform3(0u32..=20), 1usize..=50, 0.0f64..=1.0).prop_filter_map(
        "at least one non-empty ripple",
        |(k, c, mut r, u, q)| {
            r[k..].iter_mut().for_each(|x| *x = 0);
            (r.iter().sum::<u32>() > 0).then(|| (k, DecoderState::new(c, &r[..k]), u, q))
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1500))]

    #[test]
    fn transition_rows_sum_to_one((k, state, u, q) in state_strategy()) {
        let p = params(60, 10, k, 2.0);
        let row = transition_distribution(&state, u, q, &p).unwrap();
        let total: f64 = row.iter().map(|(_, w)| w).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "total {}", total);
        for (delta, w) in &row {
            prop_assert!(*w >= 0.0);
            prop_assert!(delta.apply(&state, k).is_some(), "{:?} infeasible from {:?}", delta, state);
        }
    }
}

#[test]
fn k1_transition_table_by_hand() {
    let q = 0.3;
    let p = params(5, 4, 1, 1.0);
    let state = DecoderState::new(1, &[2]);
    let mut row = transition_distribution(&state, 2, q, &p).unwrap();
    row.sort_by_key(|(d, _)| (d.b, d.a));
    let delta = |b, a1| TransitionDelta { b, a: [a1, 0, 0] };
    let want = [
        (delta(0, 1), (1.0 - q) / 2.0),
        (delta(0, 2), (1.0 - q) / 2.0),
        (delta(1, 1), q / 2.0),
        (delta(1, 2), q / 2.0),
    ];
    assert_eq!(row.len(), want.len());
    for ((d, w), (dw, ww)) in row.iter().zip(want) {
        assert_eq!(*d, dw);
        assert!((w - ww).abs() < 1e-15);
    }
}

#[test]
fn q_u_is_a_probability() {
    for n in [5usize, 17, 50, 100, 200] {
        for beta in [0.3, 1.0, 2.5, 4.0, 5.0] {
            if beta > n as f64 {
                continue;
            }
            for k in 1..=3 {
                let an = Analyzer::new(&params(n, 1, k, beta), AnalysisOptions::default()).unwrap();
                for u in 1..=n {
                    let q = an.cloud_exit_probability(u);
                    assert!((0.0..=1.0).contains(&q), "n={n} beta={beta} k={k} u={u}: {q}");
                    if u <= k {
                        assert_eq!(q, 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn q_n_matches_brute_force_conditioning() {
    // One slot, three users, p = 1/3: condition on the slot being in the cloud
    // (degree >= 2) and resolve one of the three users uniformly.
    let (n, p) = (3usize, 1.0f64 / 3.0);
    let (mut joint, mut cloud) = (0.0, 0.0);
    for pattern in 0u32..8 {
        let deg = pattern.count_ones() as i32;
        let w = p.powi(deg) * (1.0 - p).powi(3 - deg);
        if deg < 2 {
            continue;
        }
        cloud += w;
        for v in 0..n {
            let red = (pattern & !(1 << v)).count_ones();
            if red == 1 {
                joint += w / n as f64;
            }
        }
    }
    let want = joint / cloud;
    assert!((want - 4.0 / 7.0).abs() < 1e-15);
    let par = params(3, 1, 1, 1.0);
    let got = cloud_exit_probability(&par, &degree_distribution(&par), 3);
    assert!((got - want).abs() < 1e-15, "{got} vs {want}");
}

#[test]
fn stage_occupancies_match_enumeration() {
    for (n, m, k, beta) in [(3, 3, 2, 1.5), (3, 3, 1, 1.5), (4, 3, 2, 2.0), (4, 4, 3, 1.0)] {
        let par = params(n, m, k, beta);
        let exact = common::enumerate_stage_occupancy(n, m, k, par.p());
        let an = Analyzer::new(&par, AnalysisOptions::exact()).unwrap();
        let mut dist = an.initial_state_distribution(m);
        loop {
            let u = dist.u();
            if u == 0 {
                let reached: f64 = exact[0].values().sum();
                assert!((dist.success_mass() - reached).abs() <= 1e-10);
                break;
            }
            for (key, &want) in &exact[u] {
                let state = DecoderState::new(key[0], &key[1..]);
                let got = dist.probability(&state);
                assert!((got - want).abs() <= 1e-10, "n={n} m={m} k={k} u={u} {state:?}: {got} vs {want}");
            }
            // States the decoder cannot reach may still hold rounding residue.
            for (state, pr) in dist.states() {
                let key: Vec<u32> = std::iter::once(state.cloud).chain(state.ripples[..k].iter().copied()).collect();
                assert!(exact[u].contains_key(&key) || pr <= 1e-15, "u={u} {state:?} holds {pr:e}");
            }
            dist = an.evolve(&dist);
        }
    }
}

#[test]
fn collision_channel_specialization() {
    for (n, m, beta) in [(5, 6, 1.5), (10, 12, 2.0), (20, 26, 2.4), (30, 40, 2.5), (40, 30, 3.0), (25, 10, 0.7)] {
        let general = analyze_with(&params(n, m, 1, beta), AnalysisOptions::exact()).unwrap().per;
        let special = common::collision_channel_per(n, m, beta);
        assert!((general - special).abs() <= 1e-12, "n={n} m={m} beta={beta}: {general} vs {special}");
    }
}

#[test]
fn more_detection_never_hurts() {
    for n in [10usize, 20, 40] {
        for beta in [1.0, 2.5, 4.0] {
            for m in [n / 4, n / 2, n, 3 * n / 2] {
                let per: Vec<f64> = (1..=3).map(|k| analyze(&params(n, m, k, beta)).unwrap().per).collect();
                assert!(per[1] <= per[0] + 1e-9, "n={n} beta={beta} m={m}: {per:?}");
                assert!(per[2] <= per[1] + 1e-9, "n={n} beta={beta} m={m}: {per:?}");
            }
        }
    }
}

#[test]
fn mass_is_conserved() {
    for (n, m, k, beta) in [(50, 66, 1, 2.47), (50, 31, 2, 3.56), (60, 22, 3, 4.5), (30, 90, 2, 6.0)] {
        let r = analyze(&params(n, m, k, beta)).unwrap();
        assert!(r.max_mass_drift <= 1e-9, "{}", r.max_mass_drift);
        let halted: f64 = r.halt_mass.iter().sum();
        assert!((halted + r.pruned_mass - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn matches_oracle_on_small_grid() {
    for n in 1..=4usize {
        for m in 1..=4usize {
            for k in 1..=2 {
                let mut betas = vec![0.5, 1.0, 2.0, n as f64];
                betas.retain(|&b| b <= n as f64);
                for beta in betas {
                    let par = params(n, m, k, beta);
                    let a = analyze_with(&par, AnalysisOptions::exact()).unwrap().per;
                    let o = exact_per(&par).unwrap();
                    assert!((a - o).abs() <= 1e-10, "n={n} m={m} k={k} beta={beta}: {a} vs {o}");
                }
            }
        }
    }
}

#[test]
fn documented_examples() {
    let r = analyze(&params(1, 1, 1, 1.0)).unwrap();
    assert_eq!((r.per, r.throughput), (0.0, 1.0));
    assert_eq!(analyze(&params(9, 0, 2, 3.0)).unwrap().per, 1.0);

    let par = params(2, 1, 1, 2.0);
    let om = degree_distribution(&par);
    let init = initial_state_distribution(&par, &om, 0.0).unwrap();
    assert_eq!(init.states(), vec![(DecoderState::new(1, &[0]), 1.0)]);
    let next = evolve(&init, &par, &om, 0.0);
    assert_eq!(next.terminal_mass(2), 1.0);

    let r = analyze(&params(3, 2, 2, 1.5)).unwrap();
    assert!((r.per - exact_per(&params(3, 2, 2, 1.5)).unwrap()).abs() <= 1e-10);
}

#[test]
fn trace_records_every_stage() {
    let opts = AnalysisOptions {
        trace: true,
        ..AnalysisOptions::default()
    };
    let r = analyze_with(&params(20, 15, 2, 3.0), opts).unwrap();
    let trace = r.trace.unwrap();
    assert_eq!(trace.len(), 20);
    assert_eq!(trace[0].u, 20);
    assert!(trace.iter().all(|s| (0.0..=1.0).contains(&s.q_u)));
}
