//! Grid checkers for the structural consequences of small-collusion
//! robustness that the reduction pipeline leans on: a form of non-bossiness
//! for zero-utility movers, and confirmation monotonicity under single-bid
//! raises and cuts.

use crate::contract::{SideContract, Witness};
use crate::error::MechError;
use crate::mechanism::{Mechanism, Setting};
use crate::money::Money;
use crate::utility::{classify_zero_utility_from, count_non_zero_utility, UtilityClass};
use serde::{Deserialize, Serialize};

use crate::axioms::GridRows;

/// Outcome of a lemma-shaped check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub pass: bool,
    pub checked: u64,
    pub violation: Option<LemmaViolation>,
}

/// First violating move, with the side contract the argument constructs from
/// it whenever one direction is strictly beneficial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LemmaViolation {
    pub profile: Vec<Money>,
    pub alt_profile: Vec<Money>,
    pub mover: usize,
    pub detail: String,
    /// The two-party contract recovered from the violation, when beneficial.
    pub derived_witness: Option<Witness>,
}

/// Builds the two-party contract the non-bossiness argument derives from a
/// qualifying move: the mover plus the bidder whose zero-utility status
/// flipped, tried in both directions.
fn derived_two_party(
    mech: &dyn Mechanism,
    bids_a: &[Money],
    bids_b: &[Money],
    mover: usize,
    flipper: usize,
) -> Option<Witness> {
    for (from, to) in [(bids_a, bids_b), (bids_b, bids_a)] {
        let contract = SideContract::passive(
            [mover, flipper].into_iter().collect(),
            [(mover, to[mover].clone())].into_iter().collect(),
        );
        if let Ok(Some(w)) = Witness::build(mech, Setting::honest(from.to_vec()), contract) {
            return Some(w);
        }
    }
    None
}

/// Non-bossiness of zero-utility movers: when a bidder that is zero-utility
/// in both settings changes its bid without changing its own confirmation,
/// the count of non-zero-utility bidders stays fixed; and when that mover is
/// unconfirmed on both sides, nobody else's confirmation may move either
/// (that is the combination with consistent tie-breaking the decomposition
/// stage relies on).
pub fn check_nonbossiness(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<LemmaReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let k = grid.len();
    let mut checked = 0u64;
    for profile in rows.profiles() {
        for mover in 0..n {
            for alt in (profile[mover] + 1)..k {
                let mut alt_profile = profile.clone();
                alt_profile[mover] = alt;
                checked += 1;

                let out_a = rows.outcome(&profile);
                let out_b = rows.outcome(&alt_profile);
                let bids_a = rows.bids_of(&profile);
                let bids_b = rows.bids_of(&alt_profile);
                let class_a = classify_zero_utility_from(out_a, &bids_a);
                let class_b = classify_zero_utility_from(out_b, &bids_b);

                let mover_zero_both = class_a[mover] == UtilityClass::ZeroUtility
                    && class_b[mover] == UtilityClass::ZeroUtility;
                let mover_same_status = out_a.confirmed[mover] == out_b.confirmed[mover];
                if !(mover_zero_both && mover_same_status) {
                    continue;
                }

                let count_a = count_non_zero_utility(out_a, &bids_a);
                let count_b = count_non_zero_utility(out_b, &bids_b);
                if count_a != count_b {
                    let flipper = (0..n)
                        .find(|&i| i != mover && class_a[i] != class_b[i])
                        .unwrap_or(mover);
                    let derived =
                        derived_two_party(mech, &bids_a, &bids_b, mover, flipper);
                    return Ok(LemmaReport {
                        lemma: "non-bossiness".into(),
                        pass: false,
                        checked,
                        violation: Some(LemmaViolation {
                            profile: bids_a,
                            alt_profile: bids_b,
                            mover,
                            detail: format!(
                                "non-zero-utility count changed {count_a} -> {count_b} \
                                 under a zero-utility mover"
                            ),
                            derived_witness: derived,
                        }),
                    });
                }

                if !out_a.confirmed[mover] {
                    // Unconfirmed-on-both-sides movers must not shift anyone.
                    if let Some(i) =
                        (0..n).find(|&i| i != mover && out_a.confirmed[i] != out_b.confirmed[i])
                    {
                        let derived = derived_two_party(mech, &bids_a, &bids_b, mover, i);
                        return Ok(LemmaReport {
                            lemma: "non-bossiness".into(),
                            pass: false,
                            checked,
                            violation: Some(LemmaViolation {
                                profile: bids_a,
                                alt_profile: bids_b,
                                mover,
                                detail: format!(
                                    "bidder {i} flips confirmation when unconfirmed \
                                     bidder {mover} moves"
                                ),
                                derived_witness: derived,
                            }),
                        });
                    }
                }
            }
        }
    }
    Ok(LemmaReport {
        lemma: "non-bossiness".into(),
        pass: true,
        checked,
        violation: None,
    })
}

/// Direction of a single-bid move for the monotonicity check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
}

/// Monotonicity of confirmations under single moves.
///
/// Increase: an unconfirmed bidder raising its bid while staying below the
/// lowest confirmed bid either becomes confirmed, or the move leaves every
/// confirmation unchanged. Decrease: a confirmed bidder lowering its bid
/// while staying above the highest unconfirmed bid either becomes
/// unconfirmed, or the unconfirmed set only grows.
pub fn check_monotonicity(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
    direction: Direction,
) -> Result<LemmaReport, MechError> {
    let rows = GridRows::build(mech, grid, n)?;
    let k = grid.len();
    let lemma = match direction {
        Direction::Increase => "increase-monotonicity",
        Direction::Decrease => "decrease-monotonicity",
    };
    let mut checked = 0u64;
    for profile in rows.profiles() {
        let out_a = rows.outcome(&profile);
        let bids_a = rows.bids_of(&profile);
        for mover in 0..n {
            let alts: Vec<usize> = match direction {
                Direction::Increase => ((profile[mover] + 1)..k).collect(),
                Direction::Decrease => (0..profile[mover]).rev().collect(),
            };
            for alt in alts {
                let mut alt_profile = profile.clone();
                alt_profile[mover] = alt;
                let out_b = rows.outcome(&alt_profile);
                let bids_b = rows.bids_of(&alt_profile);

                let violation = match direction {
                    Direction::Increase => {
                        if out_a.confirmed[mover] {
                            continue;
                        }
                        // The raised bid must stay below the lowest confirmed
                        // bid (vacuous when nothing is confirmed).
                        let lowest_confirmed = (0..n)
                            .filter(|&i| out_a.confirmed[i])
                            .map(|i| bids_a[i].clone())
                            .min();
                        if let Some(low) = lowest_confirmed {
                            if bids_b[mover] >= low {
                                continue;
                            }
                        }
                        checked += 1;
                        if out_b.confirmed[mover] {
                            None
                        } else {
                            // Mover stays unconfirmed (zero-utility on both
                            // sides): everyone keeps their confirmation.
                            (0..n)
                                .find(|&i| i != mover && out_a.confirmed[i] != out_b.confirmed[i])
                                .map(|i| {
                                    format!(
                                        "bidder {i} flips confirmation although the raised \
                                         bid stays unconfirmed"
                                    )
                                })
                        }
                    }
                    Direction::Decrease => {
                        if !out_a.confirmed[mover] {
                            continue;
                        }
                        let highest_unconfirmed = (0..n)
                            .filter(|&i| !out_a.confirmed[i])
                            .map(|i| bids_a[i].clone())
                            .max();
                        if let Some(high) = highest_unconfirmed {
                            if bids_b[mover] <= high {
                                continue;
                            }
                        }
                        checked += 1;
                        if !out_b.confirmed[mover] {
                            None
                        } else {
                            // Unconfirmed set must weakly grow.
                            (0..n)
                                .find(|&i| !out_a.confirmed[i] && out_b.confirmed[i])
                                .map(|i| {
                                    format!(
                                        "unconfirmed bidder {i} becomes confirmed after an \
                                         unrelated cut"
                                    )
                                })
                        }
                    }
                };

                if let Some(detail) = violation {
                    return Ok(LemmaReport {
                        lemma: lemma.into(),
                        pass: false,
                        checked,
                        violation: Some(LemmaViolation {
                            profile: bids_a,
                            alt_profile: bids_b,
                            mover,
                            detail,
                            derived_witness: None,
                        }),
                    });
                }
            }
        }
    }
    Ok(LemmaReport {
        lemma: lemma.into(),
        pass: true,
        checked,
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn grid(xs: &[&str]) -> Vec<Money> {
        xs.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn standard_mechanisms_are_non_bossy() {
        let g = grid(&["0", "1", "2"]);
        for mech in [
            zoo::first_price_burned_reserve("1".parse().unwrap()),
            zoo::fully_burned_posted_price("1".parse().unwrap()),
        ] {
            let r = check_nonbossiness(mech.as_ref(), &g, 3).unwrap();
            assert!(r.pass, "{}: {:?}", mech.name(), r.violation);
        }
    }

    #[test]
    fn counterexample_is_bossy() {
        let g = grid(&["1", "8", "9", "10"]);
        let mech = zoo::salsa_counterexample();
        let r = check_nonbossiness(mech.as_ref(), &g, 2).unwrap();
        assert!(!r.pass);
        let v = r.violation.unwrap();
        assert!(v.detail.contains("flips confirmation"), "{}", v.detail);
    }

    #[test]
    fn standard_mechanisms_are_monotone_both_ways() {
        let g = grid(&["0", "1/2", "1", "3/2", "2"]);
        for mech in [
            zoo::first_price_burned_reserve("1".parse().unwrap()),
            zoo::fully_burned_posted_price("1".parse().unwrap()),
        ] {
            for dir in [Direction::Increase, Direction::Decrease] {
                let r = check_monotonicity(mech.as_ref(), &g, 3, dir).unwrap();
                assert!(r.pass, "{} {dir:?}: {:?}", mech.name(), r.violation);
            }
        }
    }

    #[test]
    fn counterexample_fails_increase_monotonicity() {
        let g = grid(&["1", "8", "9", "10"]);
        let mech = zoo::salsa_counterexample();
        let r = check_monotonicity(mech.as_ref(), &g, 2, Direction::Increase).unwrap();
        assert!(!r.pass);
        let v = r.violation.unwrap();
        // A raise from an unconfirmed bid hands someone else confirmation.
        assert!(v.detail.contains("flips confirmation"), "{}", v.detail);
    }
}
