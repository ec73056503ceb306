//! Property tests over seeded random instances.

use proptest::prelude::*;
use proptest::sample::subsequence;

use lpadapt::inverse::{update_estimate, CutSet, Observation, DEFAULT_WINDOW, MARGIN_EPS};
use lpadapt::lp::{
    canonicalize, enumerate_vertices, maximize, polytope_vertices, solve_lp, LpInstance,
    UnitPreference,
};
use lpadapt::operator::{choose, evaluate, OperatorConfig};
use lpadapt::rng::operator_rng;
use lpadapt::scenario::{GeneratorConfig, PreferenceSchedule, ScheduleKind, SituationGenerator};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn generated(n: usize, seed: u64) -> LpInstance {
    let ranges = GeneratorConfig {
        redraw_matrix: true,
        ..Default::default()
    };
    SituationGenerator::new(n, n, ranges, seed)
        .unwrap()
        .next_situation()
        .unwrap()
}

/// Small-integer instances: ties between objectives and degenerate vertices
/// are common, which is what the tie-breaking properties need.
fn integer_instance() -> impl Strategy<Value = LpInstance> {
    (2usize..=4).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::collection::vec(1u8..=3, n), 1..=3),
            prop::collection::vec(0u8..=6, 3),
            prop::collection::vec(1u8..=4, n),
        )
            .prop_map(|(rows, avail, bounds)| {
                let a: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| r.iter().map(|&v| v as f64).collect())
                    .collect();
                let a0: Vec<f64> = avail[..a.len()].iter().map(|&v| v as f64).collect();
                let b: Vec<f64> = bounds.iter().map(|&v| v as f64).collect();
                canonicalize(&a, &a0, &b).unwrap()
            })
    })
}

fn any_instance() -> impl Strategy<Value = LpInstance> {
    prop_oneof![
        (2usize..=4, any::<u64>()).prop_map(|(n, s)| generated(n, s)),
        integer_instance(),
    ]
}

fn direction(n: usize) -> impl Strategy<Value = UnitPreference> {
    prop::collection::vec(0.0f64..1.0, n)
        .prop_filter_map("zero vector", |v| UnitPreference::normalized(&v).ok())
}

fn instance_and_direction() -> impl Strategy<Value = (LpInstance, UnitPreference)> {
    any_instance().prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), direction(n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn simplex_matches_enumeration((inst, c) in instance_and_direction()) {
        let sol = solve_lp(&inst, &c).unwrap();
        let best = enumerate_vertices(&inst)
            .unwrap()
            .iter()
            .map(|v| dot(c.as_slice(), &v.x))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((sol.value - best).abs() <= 1e-6, "{} vs {}", sol.value, best);
    }

    #[test]
    fn solution_is_a_feasible_vertex((inst, c) in instance_and_direction()) {
        let v = solve_lp(&inst, &c).unwrap().vertex;
        prop_assert!(inst.is_feasible(&v.x, 1e-7));
        prop_assert!(v.active_set.len() >= inst.n());
    }

    #[test]
    fn edge_walk_equals_brute_force(inst in any_instance()) {
        // Same set and order; coordinates may differ in the last bit.
        let walk = polytope_vertices(&inst).unwrap();
        let brute = enumerate_vertices(&inst).unwrap();
        prop_assert_eq!(walk.len(), brute.len());
        for (w, b) in walk.iter().zip(&brute) {
            prop_assert!(w.same_point(&b.x), "{:?} vs {:?}", w.x, b.x);
            prop_assert_eq!(&w.active_set, &b.active_set);
        }
    }

    #[test]
    fn row_order_does_not_change_the_answer(
        inst in integer_instance(),
        seed in any::<u64>(),
    ) {
        // Uniform objectives on integer data tie often; the reported vertex must
        // still not depend on how the rows are listed.
        let c = UnitPreference::uniform(inst.n());
        let mut order: Vec<usize> = (0..inst.m()).collect();
        let k = order.len();
        for i in (1..k).rev() {
            order.swap(i, (seed.rotate_left(i as u32) % (i as u64 + 1)) as usize);
        }
        let a = solve_lp(&inst, &c).unwrap().vertex;
        let b = solve_lp(&inst.permute_rows(&order).unwrap(), &c).unwrap().vertex;
        prop_assert!(a.same_point(&b.x), "{:?} vs {:?}", a.x, b.x);
    }

    #[test]
    fn positive_scaling_keeps_the_vertex(
        (inst, c) in instance_and_direction(),
        scale in 0.01f64..100.0,
    ) {
        let scaled: Vec<f64> = c.as_slice().iter().map(|v| v * scale).collect();
        let a = solve_lp(&inst, &c).unwrap();
        let b = maximize(&inst, &scaled).unwrap();
        prop_assert!(a.vertex.same_point(&b.vertex.x));
        prop_assert!((a.value * scale - b.value).abs() <= 1e-9 * (1.0 + b.value.abs()));
    }

    #[test]
    fn schedule_always_yields_unit_nonnegative(
        kind in prop_oneof![Just(ScheduleKind::Fixed), Just(ScheduleKind::Step), Just(ScheduleKind::Drift)],
        a in direction(3),
        b in direction(3),
        epoch in 1usize..50,
        rate in 0.0f64..0.2,
        t in 0usize..1000,
    ) {
        let s = PreferenceSchedule::new(kind, epoch, vec![a, b], rate).unwrap();
        let p = s.preference_at(t);
        let len = dot(p.as_slice(), p.as_slice()).sqrt();
        prop_assert!((len - 1.0).abs() <= 1e-9);
        prop_assert!(p.as_slice().iter().all(|&v| v >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Under a noiseless operator the true preference satisfies every
    /// retained cut; the estimate is a unit nonnegative vector that
    /// reproduces the latest observed decision; and while nothing is evicted,
    /// adding observations can only shrink the margin.
    #[test]
    fn estimator_invariants(n in 2usize..=4, seed in any::<u64>(), raw in prop::collection::vec(0.05f64..1.0, 4)) {
        let c_true = UnitPreference::normalized(&raw[..n]).unwrap();
        let op = OperatorConfig::default();
        let mut gen = SituationGenerator::new(
            n,
            n,
            GeneratorConfig { redraw_matrix: true, ..Default::default() },
            seed,
        ).unwrap();
        let mut rng = operator_rng(seed);
        let mut state = CutSet::new(n, DEFAULT_WINDOW).unwrap();
        let mut last_margin = f64::INFINITY;
        for k in 0..30u64 {
            let inst = gen.next_situation().unwrap();
            let chosen = choose(&inst, &c_true, &op, &mut rng).unwrap();
            let label = evaluate(&inst, &chosen, &c_true, &op).unwrap();
            let obs = Observation::new(k, inst.clone(), chosen.clone(), label).unwrap();
            let (next, est) = update_estimate(&state, &obs).unwrap();
            state = next;

            for cut in state.cuts() {
                prop_assert!(cut.slack(c_true.as_slice()) >= -1e-9);
            }
            let c_hat = est.c_hat.as_slice();
            prop_assert!((dot(c_hat, c_hat).sqrt() - 1.0).abs() <= 1e-9);
            prop_assert!(c_hat.iter().all(|&v| v >= 0.0));
            prop_assert!(est.margin >= MARGIN_EPS);
            prop_assert!(est.margin <= last_margin + 1e-12);
            last_margin = est.margin;

            let replay = solve_lp(&inst, &est.c_hat).unwrap().vertex;
            prop_assert!(replay.same_point(&chosen.x), "{:?} vs {:?}", replay.x, chosen.x);
        }
    }

    /// Row permutations also leave the generated cut set unchanged up to order.
    #[test]
    fn observation_cuts_ignore_row_order(
        inst in integer_instance(),
        keep in subsequence(vec![0usize, 1, 2], 0..=3),
    ) {
        let c = UnitPreference::uniform(inst.n());
        let chosen = solve_lp(&inst, &c).unwrap().vertex;
        let mut order: Vec<usize> = keep.into_iter().filter(|&i| i < inst.m()).collect();
        order.reverse();
        for i in 0..inst.m() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        let permuted = inst.permute_rows(&order).unwrap();
        let a = lpadapt::inverse::cuts_from_observation(
            &Observation::new(0, inst.clone(), chosen.clone(), lpadapt::Label::Good).unwrap(),
        ).unwrap();
        let chosen_p = permuted.vertex_at(chosen.x.clone());
        let b = lpadapt::inverse::cuts_from_observation(
            &Observation::new(0, permuted, chosen_p, lpadapt::Label::Good).unwrap(),
        ).unwrap();
        let key = |cuts: &[lpadapt::Cut]| {
            let mut v: Vec<Vec<i64>> = cuts
                .iter()
                .map(|c| c.normal().iter().map(|x| (x * 1e9).round() as i64).collect())
                .collect();
            v.sort();
            v
        };
        prop_assert_eq!(key(&a), key(&b));
    }
}
