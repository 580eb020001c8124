//! Cross-module properties: the reduction against the exhaustive searcher as
//! oracle, generator/axiom agreement, and structural search invariants.

use proptest::prelude::*;
use tfm_core::axioms;
use tfm_core::contract::verify_witness;
use tfm_core::lemma_checks::{check_monotonicity, check_nonbossiness, Direction};
use tfm_core::reduce::{canonicalize, reduce_to_2sc, LocalizeMode, StageRecord};
use tfm_core::search::{find_c_sc, is_c_scp_on_grid, SearchLimits, SearchOutcome};
use tfm_core::tabulated::{random_tabulated, GenAxioms};
use tfm_core::{zoo, MinerModel, Money};

fn grid(xs: &[&str]) -> Vec<Money> {
    xs.iter().map(|s| s.parse().unwrap()).collect()
}

fn small_grid() -> Vec<Money> {
    grid(&["0", "1", "2"])
}

/// The central property: on a tie-consistent mechanism, any full-coalition
/// witness reduces to a verified witness of order at most 2, and the
/// exhaustive order-2 search agrees one exists.
#[test]
fn reduction_matches_exhaustive_oracle_over_seeds() {
    let g = small_grid();
    let n = 3;
    let mut reduced = 0;
    for seed in 0..60u64 {
        let mech = random_tabulated(&g, n, seed, GenAxioms::all()).unwrap();
        let full = find_c_sc(
            mech.as_ref(),
            &g,
            n,
            n,
            MinerModel::Passive,
            &SearchLimits::default(),
        )
        .unwrap();
        let SearchOutcome::Found(w) = full else {
            continue;
        };
        let trace = reduce_to_2sc(mech.as_ref(), &w, LocalizeMode::Grid).unwrap();
        let small = trace
            .reduced_witness()
            .unwrap_or_else(|| panic!("seed {seed}: reduction failed"));
        assert!(small.order() <= 2, "seed {seed}");
        assert!(verify_witness(mech.as_ref(), small), "seed {seed}");

        let two = find_c_sc(
            mech.as_ref(),
            &g,
            n,
            2,
            MinerModel::Passive,
            &SearchLimits::default(),
        )
        .unwrap();
        assert!(
            matches!(two, SearchOutcome::Found(_)),
            "seed {seed}: oracle finds no order-2 witness"
        );
        reduced += 1;
    }
    assert!(reduced >= 20, "only {reduced} seeds produced witnesses");
}

/// Contrapositive of the highest-bids lemma: order-2 robustness plus
/// consistent tie-breaking implies prefix confirmation on the grid.
#[test]
fn two_robust_tie_consistent_mechanisms_confirm_prefixes() {
    let g = small_grid();
    let n = 3;
    // Known-robust mechanisms anchor the implication; random tables are
    // almost always collusion-prone and only exercise the filter.
    let mut mechs = vec![
        zoo::first_price_burned_reserve("1".parse().unwrap()),
        zoo::fully_burned_posted_price("1".parse().unwrap()),
    ];
    for seed in 0..40u64 {
        mechs.push(random_tabulated(&g, n, seed, GenAxioms::all()).unwrap());
    }
    let mut hit = 0;
    for mech in &mechs {
        let ctb = axioms::check_consistent_tie_breaking(mech.as_ref(), &g, n).unwrap();
        if !ctb.pass {
            continue;
        }
        let verdict = is_c_scp_on_grid(
            mech.as_ref(),
            &g,
            n,
            2,
            MinerModel::Passive,
            &SearchLimits::default(),
        )
        .unwrap();
        if verdict.holds() {
            hit += 1;
            let prefix = axioms::check_prefix_confirmation(mech.as_ref(), &g, n).unwrap();
            assert!(prefix.pass, "{}: {:?}", mech.name(), prefix.violation);
        }
    }
    assert!(hit >= 2, "robust anchors missing from the sample");
}

/// Canonical reordering never lowers the gain on prefix-confirming
/// mechanisms.
#[test]
fn canonical_reordering_never_hurts() {
    let g = small_grid();
    let n = 3;
    for seed in 0..60u64 {
        let mech = random_tabulated(&g, n, seed, GenAxioms::all()).unwrap();
        let multi = find_c_sc(
            mech.as_ref(),
            &g,
            n,
            n,
            MinerModel::Passive,
            &SearchLimits {
                min_coalition: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let SearchOutcome::Found(w) = multi else {
            continue;
        };
        let (_, rec) = canonicalize(mech.as_ref(), &w).unwrap();
        let StageRecord::Canonicalize {
            delta_before,
            delta_after,
            ..
        } = rec
        else {
            panic!()
        };
        assert!(
            delta_after >= delta_before,
            "seed {seed}: {delta_after} < {delta_before}"
        );
    }
}

/// A witness found at order c is found at every larger order, and a passive
/// witness is also an active-model witness.
#[test]
fn monotone_in_order_and_model() {
    let g = grid(&["1", "8", "9", "10"]);
    let mech = zoo::salsa_counterexample();
    let mut previous: Option<tfm_core::Witness> = None;
    for c in 2..=3 {
        for model in [MinerModel::Passive, MinerModel::Active] {
            let out = find_c_sc(mech.as_ref(), &g, 3, c, model, &SearchLimits::default()).unwrap();
            let SearchOutcome::Found(w) = out else {
                panic!("c={c} {model}: expected a witness");
            };
            assert!(verify_witness(mech.as_ref(), &w));
            if model == MinerModel::Passive {
                if let Some(prev) = &previous {
                    // The same first witness qualifies at the larger order.
                    assert_eq!(prev.setting_a, w.setting_a);
                    assert_eq!(prev.delta, w.delta);
                }
                previous = Some(w);
            }
        }
    }
}

/// The pipeline's certificates on a healthy mechanism: no guarantee
/// violations and maintained order, all the way to a verified small witness.
#[test]
fn decomposition_certificates_hold_on_tie_consistent_mechanisms() {
    let g = small_grid();
    let n = 3;
    for seed in 0..40u64 {
        let mech = random_tabulated(&g, n, seed, GenAxioms::all()).unwrap();
        let multi = find_c_sc(
            mech.as_ref(),
            &g,
            n,
            n,
            MinerModel::Passive,
            &SearchLimits {
                min_coalition: 2,
                ..Default::default()
            },
        )
        .unwrap();
        let SearchOutcome::Found(w) = multi else {
            continue;
        };
        let trace = reduce_to_2sc(mech.as_ref(), &w, LocalizeMode::Grid).unwrap();
        for stage in &trace.stages {
            if let StageRecord::Decompose {
                steps,
                guarantees,
                order_maintained,
                ..
            } = stage
            {
                assert!(
                    guarantees.iter().all(|g| g.holds),
                    "seed {seed}: guarantee violated: {guarantees:?}"
                );
                assert!(
                    order_maintained.iter().all(|&ok| ok),
                    "seed {seed}: order broken"
                );
                // Structure: one move per adjacent pair, last step is the
                // collusion profile.
                assert!(steps.len() >= 1);
            }
            if let StageRecord::IsolateSingleMover {
                telescoping_residual,
                ..
            } = stage
            {
                assert!(telescoping_residual.is_zero(), "seed {seed}");
            }
        }
    }
}

/// Non-bossiness and monotonicity hold for the generator's tie-consistent
/// output, not just the hand-written zoo.
#[test]
fn generated_tie_consistent_mechanisms_pass_lemma_checks() {
    let g = small_grid();
    for seed in 0..12u64 {
        let mech = random_tabulated(&g, 2, seed, GenAxioms::all()).unwrap();
        let ctb = axioms::check_consistent_tie_breaking(mech.as_ref(), &g, 2).unwrap();
        assert!(ctb.pass, "generator broke its tie-consistency contract");
        // Monotonicity may still fail for collusion-prone tables; only the
        // confirmation-shift half is guaranteed by the threshold family.
        let nb = check_nonbossiness(mech.as_ref(), &g, 2).unwrap();
        if let Some(v) = &nb.violation {
            assert!(
                !v.detail.contains("flips confirmation"),
                "threshold confirmation cannot shift others: {v:?}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Generator honors each requested axiom subset.
    #[test]
    fn generator_respects_requested_axioms(seed in 0u64..500) {
        let g = small_grid();
        let mech = random_tabulated(&g, 2, seed, GenAxioms::all()).unwrap();
        for report in axioms::check_all(mech.as_ref(), &g, 2).unwrap() {
            prop_assert!(report.pass, "{}: {:?}", report.axiom, report.violation);
        }
    }

    /// Search determinism: two runs, same witness.
    #[test]
    fn search_is_deterministic(seed in 0u64..200) {
        let g = small_grid();
        let mech = random_tabulated(&g, 2, seed, GenAxioms::all()).unwrap();
        let a = find_c_sc(mech.as_ref(), &g, 2, 2, MinerModel::Passive, &SearchLimits::default()).unwrap();
        let b = find_c_sc(mech.as_ref(), &g, 2, 2, MinerModel::Passive, &SearchLimits::default()).unwrap();
        match (a, b) {
            (SearchOutcome::Found(x), SearchOutcome::Found(y)) => prop_assert_eq!(x, y),
            (SearchOutcome::NoneFound, SearchOutcome::NoneFound) => {}
            other => prop_assert!(false, "mismatch: {:?}", other),
        }
    }
}

/// Zoo mechanisms pass both monotonicity directions on a slightly larger
/// grid, pinning the lemma checks beyond the acceptance grids.
#[test]
fn zoo_monotonicity_on_wider_grid() {
    let g = grid(&["0", "1", "3/2", "2", "3"]);
    for mech in [
        zoo::first_price_burned_reserve("1".parse().unwrap()),
        zoo::fully_burned_posted_price("3/2".parse().unwrap()),
    ] {
        for dir in [Direction::Increase, Direction::Decrease] {
            let r = check_monotonicity(mech.as_ref(), &g, 3, dir).unwrap();
            assert!(r.pass, "{} {dir:?}: {:?}", mech.name(), r.violation);
        }
    }
}
