//! Exhaustive axiom checkers over finite bid grids.
//!
//! Each checker sweeps every profile in `grid^n` (anonymity samples once the
//! permutation count explodes), reports the first violation in enumeration
//! order, and never treats a violation as an error: a bad mechanism is a
//! finding, not a failure.
//!
//! A grid verdict certifies the grid only; the CLI report says so explicitly.

use crate::error::MechError;
use crate::mechanism::{BidVector, Mechanism, Outcome};
use crate::money::Money;
use crate::tabulated::{decode_profile, encode_profile};
use crate::utility::{bidder_utility_from, classify_zero_utility_from, UtilityClass};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Outcome of one axiom check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxiomReport {
    pub axiom: String,
    pub pass: bool,
    /// Number of (profile, case) combinations examined.
    pub checked: u64,
    /// Grid verdicts certify only the checked grid.
    pub scope: String,
    pub violation: Option<Violation>,
}

/// First violation found, with the profile(s) exhibiting it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub profile: Vec<Money>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alt_profile: Option<Vec<Money>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bidder: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mover: Option<usize>,
    pub detail: String,
    /// A verified side contract recovered from the violation, when one
    /// follows directly (the bid-swap contract for prefix violations).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_witness: Option<crate::contract::Witness>,
}

impl AxiomReport {
    fn pass(axiom: &str, checked: u64) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            pass: true,
            checked,
            scope: "grid certificate only".into(),
            violation: None,
        }
    }

    fn fail(axiom: &str, checked: u64, violation: Violation) -> Self {
        AxiomReport {
            axiom: axiom.into(),
            pass: false,
            checked,
            scope: "grid certificate only".into(),
            violation: Some(violation),
        }
    }
}

/// All rows of `grid^n`, evaluated once. Row order is lexicographic in the
/// profile's value indices.
pub struct GridRows {
    pub grid: Vec<Money>,
    pub n: usize,
    pub rows: Vec<Outcome>,
}

impl GridRows {
    pub fn build(mech: &dyn Mechanism, grid: &[Money], n: usize) -> Result<Self, MechError> {
        let k = grid.len();
        let total = k.pow(n as u32);
        let mut rows = Vec::with_capacity(total);
        for code in 0..total {
            let profile = decode_profile(code, k, n);
            let bids = BidVector::new(profile.iter().map(|&i| grid[i].clone()).collect());
            rows.push(mech.evaluate(&bids)?);
        }
        Ok(GridRows {
            grid: grid.to_vec(),
            n,
            rows,
        })
    }

    pub fn outcome(&self, profile: &[usize]) -> &Outcome {
        &self.rows[encode_profile(profile, self.grid.len())]
    }

    pub fn bids_of(&self, profile: &[usize]) -> Vec<Money> {
        profile.iter().map(|&i| self.grid[i].clone()).collect()
    }

    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let k = self.grid.len();
        let n = self.n;
        (0..k.pow(n as u32)).map(move |code| decode_profile(code, k, n))
    }
}

/// Truthful bidding never yields negative utility: for every profile and
/// bidder, `b_i * a_i - p_i >= 0`.
pub fn check_individual_rationality(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<AxiomReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let mut checked = 0u64;
    for profile in rows.profiles() {
        let out = rows.outcome(&profile);
        let bids = rows.bids_of(&profile);
        for i in 0..n {
            checked += 1;
            let u = bidder_utility_from(out, i, &bids[i]);
            if u.is_negative() {
                return Ok(AxiomReport::fail(
                    "individual-rationality",
                    checked,
                    Violation {
                        profile: bids.clone(),
                        alt_profile: None,
                        bidder: Some(i),
                        mover: None,
                        detail: format!("truthful utility {u} < 0"),
                    },
                ));
            }
        }
    }
    Ok(AxiomReport::pass("individual-rationality", checked))
}

/// Burns never exceed payments: `0 <= burn_i <= pay_i` everywhere.
pub fn check_burn_balance(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<AxiomReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let mut checked = 0u64;
    for profile in rows.profiles() {
        let out = rows.outcome(&profile);
        for i in 0..n {
            checked += 1;
            if out.burn[i] > out.pay[i] {
                return Ok(AxiomReport::fail(
                    "burn-balance",
                    checked,
                    Violation {
                        profile: rows.bids_of(&profile),
                        alt_profile: None,
                        bidder: Some(i),
                        mover: None,
                        detail: format!("burn {} exceeds pay {}", out.burn[i], out.pay[i]),
                    },
                ));
            }
        }
    }
    Ok(AxiomReport::pass("burn-balance", checked))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut result = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    heap_permute(&mut items, n, &mut result);
    result.sort();
    result
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Maximum sampled (profile, permutation) pairs once `n >= 5`.
const ANONYMITY_SAMPLE_CAP: usize = 10_000;

/// Outcomes are a function of the bid multiset: permuting the bids permutes
/// the outcome assignment. Compared at the multiset level, so equal bids are
/// interchangeable and a deterministic index tie-break is not a violation.
pub fn check_anonymity(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<AxiomReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let k = grid.len();
    let total = k.pow(n as u32);

    let signature = |profile: &[usize], out: &Outcome| -> Vec<(usize, bool, Money, Money)> {
        let mut sig: Vec<(usize, bool, Money, Money)> = (0..n)
            .map(|i| {
                (
                    profile[i],
                    out.confirmed[i],
                    out.pay[i].clone(),
                    out.burn[i].clone(),
                )
            })
            .collect();
        sig.sort();
        sig
    };

    let mut cases: Vec<(usize, Vec<usize>)> = Vec::new();
    if n < 5 {
        let perms = permutations(n);
        for code in 0..total {
            for p in &perms {
                cases.push((code, p.clone()));
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0a40);
        for _ in 0..ANONYMITY_SAMPLE_CAP {
            let code = (0..total).collect::<Vec<_>>()[..]
                .choose(&mut rng)
                .copied()
                .unwrap();
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            cases.push((code, p));
        }
    }

    let mut checked = 0u64;
    for (code, perm) in cases {
        checked += 1;
        let profile = decode_profile(code, k, n);
        // permuted[i] = profile[perm[i]]
        let permuted: Vec<usize> = perm.iter().map(|&j| profile[j]).collect();
        let base_sig = signature(&profile, rows.outcome(&profile));
        let perm_sig = signature(&permuted, rows.outcome(&permuted));
        if base_sig != perm_sig {
            return Ok(AxiomReport::fail(
                "anonymity",
                checked,
                Violation {
                    profile: rows.bids_of(&profile),
                    alt_profile: Some(rows.bids_of(&permuted)),
                    bidder: None,
                    mover: None,
                    detail: "outcome multiset changed under a bid permutation".into(),
                },
            ));
        }
    }
    Ok(AxiomReport::pass("anonymity", checked))
}

/// Consistent tie-breaking towards zero-utility bidders: when a mover is
/// unconfirmed under both of its bids, every bidder that is zero-utility in
/// both settings keeps its confirmation status.
pub fn check_consistent_tie_breaking(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<AxiomReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let k = grid.len();
    let mut checked = 0u64;
    for profile in rows.profiles() {
        for mover in 0..n {
            // Unordered value pairs: the condition is symmetric in A and B.
            for alt in (profile[mover] + 1)..k {
                let mut alt_profile = profile.clone();
                alt_profile[mover] = alt;
                checked += 1;

                let out_a = rows.outcome(&profile);
                let out_b = rows.outcome(&alt_profile);
                if out_a.confirmed[mover] || out_b.confirmed[mover] {
                    continue;
                }
                let bids_a = rows.bids_of(&profile);
                let bids_b = rows.bids_of(&alt_profile);
                let class_a = classify_zero_utility_from(out_a, &bids_a);
                let class_b = classify_zero_utility_from(out_b, &bids_b);
                for i in 0..n {
                    if class_a[i] == UtilityClass::ZeroUtility
                        && class_b[i] == UtilityClass::ZeroUtility
                        && out_a.confirmed[i] != out_b.confirmed[i]
                    {
                        return Ok(AxiomReport::fail(
                            "consistent-tie-breaking",
                            checked,
                            Violation {
                                profile: bids_a,
                                alt_profile: Some(bids_b),
                                bidder: Some(i),
                                mover: Some(mover),
                                detail: format!(
                                    "zero-utility bidder {i} flips confirmation when \
                                     unconfirmed bidder {mover} moves"
                                ),
                            },
                        ));
                    }
                }
            }
        }
    }
    Ok(AxiomReport::pass("consistent-tie-breaking", checked))
}

/// A subset of the highest bids is confirmed: no unconfirmed bid strictly
/// exceeds a confirmed one. Necessary-condition screen for small-coalition
/// robustness; a violation yields the swap side contract directly.
pub fn check_prefix_confirmation(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<AxiomReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let mut checked = 0u64;
    for profile in rows.profiles() {
        checked += 1;
        let out = rows.outcome(&profile);
        let bids = rows.bids_of(&profile);
        for lo in 0..n {
            if !out.confirmed[lo] {
                continue;
            }
            for hi in 0..n {
                if !out.confirmed[hi] && bids[hi] > bids[lo] {
                    return Ok(AxiomReport::fail(
                        "prefix-confirmation",
                        checked,
                        Violation {
                            profile: bids.clone(),
                            alt_profile: None,
                            bidder: Some(hi),
                            mover: Some(lo),
                            detail: format!(
                                "bid {} (bidder {hi}) is unconfirmed while lower bid {} \
                                 (bidder {lo}) is confirmed; swapping their bids is the \
                                 candidate side contract",
                                bids[hi], bids[lo]
                            ),
                        },
                    ));
                }
            }
        }
    }
    Ok(AxiomReport::pass("prefix-confirmation", checked))
}

/// Truthful bidding is a best response in isolation: no unilateral deviation
/// beats bidding one's value.
pub fn check_uic(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<AxiomReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let k = grid.len();
    let mut checked = 0u64;
    for profile in rows.profiles() {
        let bids = rows.bids_of(&profile);
        let truthful = rows.outcome(&profile);
        for i in 0..n {
            let honest_u = bidder_utility_from(truthful, i, &bids[i]);
            for dev in 0..k {
                if dev == profile[i] {
                    continue;
                }
                checked += 1;
                let mut dev_profile = profile.clone();
                dev_profile[i] = dev;
                let dev_u = bidder_utility_from(rows.outcome(&dev_profile), i, &bids[i]);
                if dev_u > honest_u {
                    return Ok(AxiomReport::fail(
                        "uic",
                        checked,
                        Violation {
                            profile: bids.clone(),
                            alt_profile: Some(rows.bids_of(&dev_profile)),
                            bidder: Some(i),
                            mover: Some(i),
                            detail: format!(
                                "deviating to {} yields {dev_u} > truthful {honest_u}",
                                grid[dev]
                            ),
                        },
                    ));
                }
            }
        }
    }
    Ok(AxiomReport::pass("uic", checked))
}

/// Runs the five standard checks in a fixed order.
pub fn check_all(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<Vec<AxiomReport>, MechError> {
    Ok(vec![
        check_individual_rationality(mech, grid, n)?,
        check_burn_balance(mech, grid, n)?,
        check_anonymity(mech, grid, n)?,
        check_consistent_tie_breaking(mech, grid, n)?,
        check_prefix_confirmation(mech, grid, n)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabulated::{random_tabulated, GenAxioms};
    use crate::zoo;

    fn grid(xs: &[&str]) -> Vec<Money> {
        xs.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn first_price_passes_everything_on_small_grids() {
        let g = grid(&["0", "1", "2"]);
        let mech = zoo::first_price_burned_reserve("1".parse().unwrap());
        for report in check_all(mech.as_ref(), &g, 3).unwrap() {
            assert!(report.pass, "{}: {:?}", report.axiom, report.violation);
        }
    }

    #[test]
    fn zoo_mechanisms_pass_core_axioms_up_to_n4() {
        let g = grid(&["0", "1/2", "1", "3/2", "2"]);
        let mechs = vec![
            zoo::first_price_burned_reserve("1".parse().unwrap()),
            zoo::fully_burned_posted_price("1".parse().unwrap()),
            zoo::fully_burned_second_price(),
            zoo::discount_auction("1".parse().unwrap()),
            zoo::salsa_counterexample(),
        ];
        for mech in mechs {
            for n in 1..=4 {
                let ir = check_individual_rationality(mech.as_ref(), &g, n).unwrap();
                assert!(ir.pass, "{} IR n={n}", mech.name());
                let bb = check_burn_balance(mech.as_ref(), &g, n).unwrap();
                assert!(bb.pass, "{} BB n={n}", mech.name());
                let anon = check_anonymity(mech.as_ref(), &g, n).unwrap();
                assert!(anon.pass, "{} anonymity n={n}", mech.name());
            }
        }
    }

    #[test]
    fn tie_break_by_index_is_anonymous_at_multiset_level() {
        let g = grid(&["0", "1", "2"]);
        let mech = zoo::first_price_burned_reserve("1".parse().unwrap());
        let report = check_anonymity(mech.as_ref(), &g, 2).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn index_favoritism_violates_anonymity() {
        // Confirms bidder 0 whenever its bid clears the reserve, regardless
        // of the other bids.
        struct FavorZero;
        impl Mechanism for FavorZero {
            fn name(&self) -> String {
                "favor-zero".into()
            }
            fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
                let mut out = Outcome::all_zero(bids.len());
                if !bids.is_empty() && !bids.get(0).unwrap().is_zero() {
                    out.confirmed[0] = true;
                    out.pay[0] = bids.get(0).unwrap().clone();
                }
                Ok(out)
            }
        }
        let g = grid(&["0", "1", "2"]);
        let report = check_anonymity(&FavorZero, &g, 2).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn charging_the_unconfirmed_fails_ir() {
        struct ChargeLoser;
        impl Mechanism for ChargeLoser {
            fn name(&self) -> String {
                "charge-loser".into()
            }
            fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
                let mut out = Outcome::all_zero(bids.len());
                for i in 1..bids.len() {
                    out.pay[i] = Money::from_int(1);
                }
                Ok(out)
            }
        }
        let g = grid(&["0", "1"]);
        let report = check_individual_rationality(&ChargeLoser, &g, 2).unwrap();
        assert!(!report.pass);
        assert_eq!(report.violation.unwrap().bidder, Some(1));
    }

    #[test]
    fn overburning_fails_burn_balance() {
        struct OverBurn;
        impl Mechanism for OverBurn {
            fn name(&self) -> String {
                "over-burn".into()
            }
            fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
                let mut out = Outcome::all_zero(bids.len());
                out.confirmed[0] = true;
                out.pay[0] = bids.get(0).unwrap().clone();
                out.burn[0] = &out.pay[0] + &Money::from_int(1);
                Ok(out)
            }
        }
        let g = grid(&["0", "1"]);
        let report = check_burn_balance(&OverBurn, &g, 2).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn salsa_counterexample_breaks_tie_consistency() {
        let g = grid(&["1", "8", "9", "10"]);
        let mech = zoo::salsa_counterexample();
        let report = check_consistent_tie_breaking(mech.as_ref(), &g, 2).unwrap();
        assert!(!report.pass);
        let v = report.violation.unwrap();
        assert!(v.mover.is_some());
    }

    #[test]
    fn first_price_and_posted_price_tie_consistently() {
        let g = grid(&["0", "1", "2"]);
        for mech in [
            zoo::first_price_burned_reserve("1".parse().unwrap()),
            zoo::fully_burned_posted_price("1".parse().unwrap()),
        ] {
            let report = check_consistent_tie_breaking(mech.as_ref(), &g, 3).unwrap();
            assert!(report.pass, "{}", mech.name());
        }
    }

    #[test]
    fn prefix_confirmation_examples() {
        let g = grid(&["0", "1", "2"]);
        let mech = zoo::fully_burned_posted_price("1".parse().unwrap());
        assert!(check_prefix_confirmation(mech.as_ref(), &g, 3)
            .unwrap()
            .pass);

        // Confirms only the second-highest bid.
        struct SecondOnly;
        impl Mechanism for SecondOnly {
            fn name(&self) -> String {
                "second-only".into()
            }
            fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
                let mut out = Outcome::all_zero(bids.len());
                let mut order: Vec<usize> = (0..bids.len()).collect();
                order.sort_by(|&a, &b| {
                    bids.get(b).unwrap().cmp(bids.get(a).unwrap()).then(a.cmp(&b))
                });
                if order.len() >= 2 {
                    let i = order[1];
                    out.confirmed[i] = true;
                }
                Ok(out)
            }
        }
        let report = check_prefix_confirmation(&SecondOnly, &g, 2).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn salsa_prefix_holds_at_ten_eight_one() {
        let g = grid(&["1", "8", "10"]);
        let mech = zoo::salsa_counterexample();
        let report = check_prefix_confirmation(mech.as_ref(), &g, 3).unwrap();
        assert!(report.pass);
    }

    #[test]
    fn generator_honors_requested_axioms() {
        let g = grid(&["0", "1", "2"]);
        let mech = random_tabulated(&g, 2, 1, GenAxioms::all()).unwrap();
        for report in check_all(mech.as_ref(), &g, 2).unwrap() {
            assert!(report.pass, "{}: {:?}", report.axiom, report.violation);
        }
    }

    #[test]
    fn unconstrained_generator_eventually_breaks_tie_consistency() {
        let g = grid(&["0", "1", "2"]);
        let mut broke = false;
        for seed in 0..40 {
            let mech = random_tabulated(
                &g,
                3,
                seed,
                GenAxioms {
                    individually_rational: true,
                    burn_balanced: true,
                    anonymous: true,
                    prefix_confirmation: false,
                    consistent_tie_breaking: false,
                },
            )
            .unwrap();
            if !check_consistent_tie_breaking(mech.as_ref(), &g, 3)
                .unwrap()
                .pass
            {
                broke = true;
                break;
            }
        }
        assert!(broke, "no seed in 0..40 violated tie consistency");
    }

    #[test]
    fn posted_price_is_uic() {
        let g = grid(&["0", "1/2", "1", "2"]);
        let mech = zoo::fully_burned_posted_price("1".parse().unwrap());
        assert!(check_uic(mech.as_ref(), &g, 3).unwrap().pass);
    }
}
