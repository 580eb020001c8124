//! Exact utility accounting for bidders and the miner.
//!
//! A bidder confirmed with value `v` and payment `p` gets `v - p`; an
//! unconfirmed bidder pays nothing here because individual rationality plus
//! burn-balance force unconfirmed payments to zero (a table that says
//! otherwise is surfaced by the axiom checkers, and its stated payment is
//! charged as written).
//!
//! The miner collects every real bidder's payment net of burn, and loses the
//! burn on each of its own fake bids: a fake bid's payment is money the miner
//! pays to itself, so only the burned part is a real loss.

use crate::error::MechError;
use crate::mechanism::{evaluate_setting, Mechanism, Outcome, Setting};
use crate::money::{Money, SignedMoney};

/// Utility of bidder `i` judged at value `v`, given a precomputed outcome.
pub fn bidder_utility_from(outcome: &Outcome, i: usize, v: &Money) -> SignedMoney {
    if outcome.confirmed[i] {
        v - &outcome.pay[i]
    } else {
        &SignedMoney::zero() - &outcome.pay[i].signed()
    }
}

/// Miner utility given a precomputed outcome and the number of real bidders.
pub fn miner_utility_from(outcome: &Outcome, n_real: usize) -> SignedMoney {
    let mut total = SignedMoney::zero();
    for i in 0..outcome.len() {
        if i < n_real {
            total += &(&outcome.pay[i] - &outcome.burn[i]);
        } else {
            total -= &outcome.burn[i].signed();
        }
    }
    total
}

/// Utility of bidder `i` in setting `s`, judged at value `v`.
///
/// `v` may differ from the stored true value; the reduction pipeline
/// evaluates coalitions against intermediate value profiles.
pub fn bidder_utility(
    mech: &dyn Mechanism,
    s: &Setting,
    i: usize,
    v: &Money,
) -> Result<SignedMoney, MechError> {
    if i >= s.n_total() {
        return Err(MechError::IndexOutOfRange {
            index: i,
            len: s.n_total(),
        });
    }
    let out = evaluate_setting(mech, s)?;
    Ok(bidder_utility_from(&out, i, v))
}

/// Miner utility in setting `s`: payments net of burns over real bids, minus
/// the burn on each fake bid.
pub fn miner_utility(mech: &dyn Mechanism, s: &Setting) -> Result<SignedMoney, MechError> {
    let out = evaluate_setting(mech, s)?;
    Ok(miner_utility_from(&out, s.n_real()))
}

/// Sum of coalition members' utilities: outcomes from `outcome_setting`,
/// values from `value_setting`.
pub fn coalition_utility(
    mech: &dyn Mechanism,
    outcome_setting: &Setting,
    value_setting: &Setting,
    coalition: &[usize],
) -> Result<SignedMoney, MechError> {
    for &i in coalition {
        if i >= outcome_setting.n_real() || i >= value_setting.n_real() {
            return Err(MechError::IdentityMismatch(format!(
                "coalition member {i} is not a real bidder in both settings"
            )));
        }
    }
    let out = evaluate_setting(mech, outcome_setting)?;
    let mut total = SignedMoney::zero();
    for &i in coalition {
        total += &bidder_utility_from(&out, i, value_setting.true_value(i).unwrap());
    }
    Ok(total)
}

/// Joint utility of the miner and a coalition: outcomes (and the miner's fake
/// bids) from `outcome_setting`, coalition values from `value_setting`.
pub fn joint_utility(
    mech: &dyn Mechanism,
    outcome_setting: &Setting,
    value_setting: &Setting,
    coalition: &[usize],
) -> Result<SignedMoney, MechError> {
    let m = miner_utility(mech, outcome_setting)?;
    let c = coalition_utility(mech, outcome_setting, value_setting, coalition)?;
    Ok(&m + &c)
}

/// Zero-utility classification: unconfirmed, or confirmed paying exactly the
/// bid. All other bidders are non-zero-utility.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UtilityClass {
    ZeroUtility,
    NonZeroUtility,
}

/// Classifies every bidder of a setting.
pub fn classify_zero_utility(
    mech: &dyn Mechanism,
    s: &Setting,
) -> Result<Vec<UtilityClass>, MechError> {
    let out = evaluate_setting(mech, s)?;
    Ok(classify_zero_utility_from(&out, s.bids().bids()))
}

/// Classification from a precomputed outcome.
pub fn classify_zero_utility_from(outcome: &Outcome, bids: &[Money]) -> Vec<UtilityClass> {
    bids.iter()
        .enumerate()
        .map(|(i, b)| {
            if !outcome.confirmed[i] || outcome.pay[i] == *b {
                UtilityClass::ZeroUtility
            } else {
                UtilityClass::NonZeroUtility
            }
        })
        .collect()
}

/// Count of non-zero-utility bidders in an outcome.
pub fn count_non_zero_utility(outcome: &Outcome, bids: &[Money]) -> usize {
    classify_zero_utility_from(outcome, bids)
        .into_iter()
        .filter(|c| *c == UtilityClass::NonZeroUtility)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::BidVector;
    use crate::zoo;

    fn money(s: &str) -> Money {
        s.parse().unwrap()
    }

    #[test]
    fn pay_as_bid_winner_has_zero_utility() {
        let mech = zoo::first_price_burned_reserve(money("1"));
        let s = Setting::honest(vec![money("2"), money("3/2")]);
        let u0 = bidder_utility(mech.as_ref(), &s, 0, &money("2")).unwrap();
        assert_eq!(u0, SignedMoney::zero());
        let u1 = bidder_utility(mech.as_ref(), &s, 1, &money("3/2")).unwrap();
        assert_eq!(u1, SignedMoney::zero());
    }

    #[test]
    fn bidder_index_out_of_range() {
        let mech = zoo::first_price_burned_reserve(money("1"));
        let s = Setting::honest(vec![money("2")]);
        assert!(matches!(
            bidder_utility(mech.as_ref(), &s, 3, &money("1")),
            Err(MechError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn miner_keeps_payment_above_burned_reserve() {
        let mech = zoo::first_price_burned_reserve(money("1"));
        let s = Setting::honest(vec![money("2"), money("3/2")]);
        // Winner pays 2, reserve 1 is burned.
        assert_eq!(
            miner_utility(mech.as_ref(), &s).unwrap(),
            SignedMoney::from_int(1)
        );
    }

    #[test]
    fn fully_burned_posted_price_gives_miner_nothing() {
        let mech = zoo::fully_burned_posted_price(money("1"));
        let s = Setting::honest(vec![money("2"), money("1")]);
        assert_eq!(miner_utility(mech.as_ref(), &s).unwrap(), SignedMoney::zero());
    }

    #[test]
    fn fake_bid_costs_the_miner_its_burn() {
        // Fake bid confirmed with payment p and burn b contributes -b.
        let mech = zoo::fully_burned_posted_price(money("1"));
        let bids = BidVector::new(vec![money("2"), money("3")]);
        let s = Setting::new(bids, vec![money("2")], Default::default()).unwrap();
        // Real bidder: pay 1 burn 1 -> net 0. Fake: burn 1 -> -1.
        assert_eq!(
            miner_utility(mech.as_ref(), &s).unwrap(),
            SignedMoney::from_int(-1)
        );
    }

    #[test]
    fn empty_coalition_sums_to_zero() {
        let mech = zoo::first_price_burned_reserve(money("1"));
        let s = Setting::honest(vec![money("2"), money("3/2")]);
        assert_eq!(
            coalition_utility(mech.as_ref(), &s, &s, &[]).unwrap(),
            SignedMoney::zero()
        );
    }

    #[test]
    fn classify_matches_definition() {
        let mech = zoo::fully_burned_posted_price(money("1"));
        let s = Setting::honest(vec![money("2"), money("1"), money("1/2")]);
        let classes = classify_zero_utility(mech.as_ref(), &s).unwrap();
        assert_eq!(
            classes,
            vec![
                UtilityClass::NonZeroUtility, // pays 1 < 2
                UtilityClass::ZeroUtility,    // pays its bid
                UtilityClass::ZeroUtility,    // unconfirmed
            ]
        );
    }
}
