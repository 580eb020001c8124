//! Concrete mechanisms: the standard formats plus the tie-breaking
//! counterexample, used both as search targets and as acceptance oracles.
//!
//! Tie-breaking is lowest-index-wins among equal bids throughout. That choice
//! is deterministic, anonymous at the bid-multiset level, and consistent
//! towards zero-utility bidders by construction.

use crate::error::MechError;
use crate::mechanism::{BidVector, MechRef, Mechanism, Outcome};
use crate::money::Money;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Index of the highest bid, lowest index on ties. `None` for an empty vector.
pub fn winner_index(bids: &BidVector) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, b) in bids.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(j) if b > bids.get(j).unwrap() => best = Some(i),
            _ => {}
        }
    }
    best
}

fn debug_check(bids: &BidVector, out: &Outcome) {
    debug_assert_eq!(out.len(), bids.len());
    for i in 0..out.len() {
        if out.confirmed[i] {
            debug_assert!(out.pay[i] <= *bids.get(i).unwrap(), "pay exceeds bid");
        } else {
            debug_assert!(out.pay[i].is_zero(), "unconfirmed bidder charged");
        }
        debug_assert!(out.burn[i] <= out.pay[i], "burn exceeds pay");
    }
}

struct FirstPriceBurnedReserve {
    reserve: Money,
    /// Winner's payment is `max(bid - discount, reserve)`; zero discount is
    /// the plain pay-as-bid rule.
    discount: Money,
}

impl Mechanism for FirstPriceBurnedReserve {
    fn name(&self) -> String {
        if self.discount.is_zero() {
            "first-price-burned-reserve".into()
        } else {
            "first-price-burned-reserve-discounted".into()
        }
    }

    fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("r".into(), self.reserve.to_string());
        if !self.discount.is_zero() {
            p.insert("d".into(), self.discount.to_string());
        }
        p
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        let mut out = Outcome::all_zero(bids.len());
        if let Some(w) = winner_index(bids) {
            let top = bids.get(w).unwrap();
            if *top >= self.reserve {
                let pay = Money::max(top.saturating_sub(&self.discount), self.reserve.clone());
                out.confirmed[w] = true;
                out.pay[w] = pay;
                out.burn[w] = self.reserve.clone();
            }
        }
        debug_check(bids, &out);
        Ok(out)
    }
}

/// Single item, highest bidder at or above the reserve wins, pays its own
/// bid, and the reserve is burned.
pub fn first_price_burned_reserve(reserve: Money) -> MechRef {
    Arc::new(FirstPriceBurnedReserve {
        reserve,
        discount: Money::zero(),
    })
}

/// Pay-as-bid with the payment discounted to `max(bid - discount, reserve)`.
/// A deliberately broken variant: the winner keeps surplus the miner and a
/// losing bidder can recapture, so a 1-party side contract exists.
pub fn first_price_discounted(reserve: Money, discount: Money) -> MechRef {
    Arc::new(FirstPriceBurnedReserve { reserve, discount })
}

struct FullyBurnedPostedPrice {
    price: Money,
}

impl Mechanism for FullyBurnedPostedPrice {
    fn name(&self) -> String {
        "fully-burned-posted-price".into()
    }

    fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("r".into(), self.price.to_string());
        p
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        let mut out = Outcome::all_zero(bids.len());
        for (i, b) in bids.iter().enumerate() {
            if *b >= self.price {
                out.confirmed[i] = true;
                out.pay[i] = self.price.clone();
                out.burn[i] = self.price.clone();
            }
        }
        debug_check(bids, &out);
        Ok(out)
    }
}

/// Infinite block size: every bid at or above `price` is confirmed, pays
/// `price`, and the whole payment is burned.
pub fn fully_burned_posted_price(price: Money) -> MechRef {
    Arc::new(FullyBurnedPostedPrice { price })
}

struct FullyBurnedSecondPrice;

impl Mechanism for FullyBurnedSecondPrice {
    fn name(&self) -> String {
        "fully-burned-second-price".into()
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        let mut out = Outcome::all_zero(bids.len());
        if let Some(w) = winner_index(bids) {
            // Second-highest bid; 0 for a single bidder.
            let second = bids
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != w)
                .map(|(_, b)| b.clone())
                .max()
                .unwrap_or_else(Money::zero);
            out.confirmed[w] = true;
            out.pay[w] = second.clone();
            out.burn[w] = second;
        }
        debug_check(bids, &out);
        Ok(out)
    }
}

/// Single highest bidder wins, pays the second-highest bid, and the payment
/// is fully burned.
pub fn fully_burned_second_price() -> MechRef {
    Arc::new(FullyBurnedSecondPrice)
}

struct DiscountAuction {
    reserve: Money,
}

impl DiscountAuction {
    fn threshold(&self, t: usize) -> Money {
        if t <= 10 {
            self.reserve.clone()
        } else {
            Money::midpoint(&self.reserve, &Money::zero())
        }
    }
}

impl Mechanism for DiscountAuction {
    fn name(&self) -> String {
        "discount-auction".into()
    }

    fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        p.insert("r".into(), self.reserve.to_string());
        p
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        let mut out = Outcome::all_zero(bids.len());
        // t* = the largest t such that at least t bids strictly exceed the
        // threshold f(t); f drops to r/2 once more than 10 bids qualify.
        let mut chosen: Option<(usize, Money)> = None;
        for t in (1..=bids.len()).rev() {
            let f = self.threshold(t);
            let count = bids.iter().filter(|b| **b > f).count();
            if count >= t {
                chosen = Some((t, f));
                break;
            }
        }
        if let Some((_, f)) = chosen {
            for (i, b) in bids.iter().enumerate() {
                if *b > f {
                    out.confirmed[i] = true;
                    out.pay[i] = f.clone();
                    out.burn[i] = f.clone();
                }
            }
        }
        debug_check(bids, &out);
        Ok(out)
    }
}

/// Volume-discount posted price, fully burned: the per-unit price halves once
/// more than ten bids clear it.
pub fn discount_auction(reserve: Money) -> MechRef {
    assert!(!reserve.is_zero(), "discount auction needs r > 0");
    Arc::new(DiscountAuction { reserve })
}

struct SalsaCounterexample;

impl Mechanism for SalsaCounterexample {
    fn name(&self) -> String {
        "salsa-counterexample".into()
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        let mut out = Outcome::all_zero(bids.len());
        let eight = Money::from_int(8);
        let ten = Money::from_int(10);
        let Some(w) = winner_index(bids) else {
            return Ok(out);
        };
        // Nothing is confirmed unless some losing bid reaches 8.
        let losing_at_least_8 = bids
            .iter()
            .enumerate()
            .any(|(i, b)| i != w && *b >= eight);
        if !losing_at_least_8 {
            return Ok(out);
        }
        if bids.iter().any(|b| *b >= ten) {
            // 13/2 = 6.5, below every qualifying bid.
            let price = Money::from_ratio(13, 2);
            for (i, b) in bids.iter().enumerate() {
                if *b >= eight {
                    out.confirmed[i] = true;
                    out.pay[i] = price.clone();
                    out.burn[i] = price.clone();
                }
            }
        } else {
            let bid = bids.get(w).unwrap().clone();
            out.confirmed[w] = true;
            out.pay[w] = bid.clone();
            out.burn[w] = bid;
        }
        debug_check(bids, &out);
        Ok(out)
    }
}

/// The fully-burned auction whose tie-breaking towards zero-utility bidders
/// is inconsistent: the winner is confirmed only when a losing bid reaches 8,
/// and once any bid reaches 10 everything at or above 8 is confirmed at a
/// flat 6.5. Multi-party collusion against it cannot be decomposed into
/// single moves, which is exactly what the reduction diagnostics surface.
pub fn salsa_counterexample() -> MechRef {
    Arc::new(SalsaCounterexample)
}

/// Looks up a zoo mechanism by its CLI name.
pub fn by_name(name: &str, params: &BTreeMap<String, String>) -> Result<MechRef, String> {
    let get_money = |key: &str, default: Option<&str>| -> Result<Money, String> {
        match params.get(key) {
            Some(s) => s
                .parse::<Money>()
                .map_err(|e| format!("bad parameter {key}: {e}")),
            None => match default {
                Some(d) => Ok(d.parse().unwrap()),
                None => Err(format!("mechanism {name:?} requires parameter {key}")),
            },
        }
    };
    match name {
        "first-price-burned-reserve" => Ok(first_price_burned_reserve(get_money("r", None)?)),
        "first-price-burned-reserve-discounted" => Ok(first_price_discounted(
            get_money("r", None)?,
            get_money("d", Some("1/2"))?,
        )),
        "fully-burned-posted-price" => Ok(fully_burned_posted_price(get_money("r", None)?)),
        "fully-burned-second-price" => Ok(fully_burned_second_price()),
        "discount-auction" => Ok(discount_auction(get_money("r", None)?)),
        "salsa-counterexample" => Ok(salsa_counterexample()),
        other => Err(format!(
            "unknown mechanism {other:?}; known: first-price-burned-reserve, \
             first-price-burned-reserve-discounted, fully-burned-posted-price, \
             fully-burned-second-price, discount-auction, salsa-counterexample"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn money(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn bids(xs: &[&str]) -> BidVector {
        BidVector::new(xs.iter().map(|s| money(s)).collect())
    }

    #[test]
    fn first_price_winner_pays_bid_and_burns_reserve() {
        let m = first_price_burned_reserve(money("1"));
        let out = m.evaluate(&bids(&["2", "3/2"])).unwrap();
        assert_eq!(out.confirmed, vec![true, false]);
        assert_eq!(out.pay, vec![money("2"), money("0")]);
        assert_eq!(out.burn, vec![money("1"), money("0")]);
    }

    #[test]
    fn first_price_below_reserve_confirms_nobody() {
        let m = first_price_burned_reserve(money("1"));
        let out = m.evaluate(&bids(&["1/2", "3/4"])).unwrap();
        assert!(out.confirmed.iter().all(|c| !c));
    }

    #[test]
    fn first_price_tie_goes_to_lowest_index() {
        let m = first_price_burned_reserve(money("0"));
        let out = m.evaluate(&bids(&["5", "5"])).unwrap();
        assert_eq!(out.confirmed, vec![true, false]);
        assert_eq!(out.pay[0], money("5"));
        assert_eq!(out.burn[0], money("0"));
    }

    #[test]
    fn posted_price_confirms_everyone_at_or_above() {
        let m = fully_burned_posted_price(money("1"));
        let out = m.evaluate(&bids(&["2", "1", "1/2"])).unwrap();
        assert_eq!(out.confirmed, vec![true, true, false]);
        assert_eq!(out.pay, vec![money("1"), money("1"), money("0")]);
        assert_eq!(out.burn, vec![money("1"), money("1"), money("0")]);
    }

    #[test]
    fn posted_price_zero_confirms_all_for_free() {
        let m = fully_burned_posted_price(money("0"));
        let out = m.evaluate(&bids(&["0", "7"])).unwrap();
        assert_eq!(out.confirmed, vec![true, true]);
        assert!(out.pay.iter().all(Money::is_zero));
    }

    #[test]
    fn posted_price_above_all_bids_confirms_none() {
        let m = fully_burned_posted_price(money("3"));
        let out = m.evaluate(&bids(&["1", "2"])).unwrap();
        assert!(out.confirmed.iter().all(|c| !c));
    }

    #[test]
    fn second_price_pays_second_and_burns_it() {
        let m = fully_burned_second_price();
        let out = m.evaluate(&bids(&["3", "2"])).unwrap();
        assert_eq!(out.confirmed, vec![true, false]);
        assert_eq!(out.pay[0], money("2"));
        assert_eq!(out.burn[0], money("2"));
    }

    #[test]
    fn second_price_tie_break_and_singleton() {
        let m = fully_burned_second_price();
        let out = m.evaluate(&bids(&["2", "2"])).unwrap();
        assert_eq!(out.confirmed, vec![true, false]);
        assert_eq!(out.pay[0], money("2"));

        let out = m.evaluate(&bids(&["4"])).unwrap();
        assert_eq!(out.confirmed, vec![true]);
        assert_eq!(out.pay[0], money("0"));
    }

    #[test]
    fn discount_auction_halves_price_past_ten_bids() {
        let m = discount_auction(money("2"));
        let eleven = BidVector::new(vec![money("4"); 11]);
        let out = m.evaluate(&eleven).unwrap();
        assert!(out.confirmed.iter().all(|c| *c));
        assert!(out.pay.iter().all(|p| *p == money("1")));

        let ten = BidVector::new(vec![money("4"); 10]);
        let out = m.evaluate(&ten).unwrap();
        assert!(out.confirmed.iter().all(|c| *c));
        assert!(out.pay.iter().all(|p| *p == money("2")));
    }

    #[test]
    fn discount_auction_single_qualifier() {
        let m = discount_auction(money("2"));
        let out = m.evaluate(&bids(&["4", "1/2"])).unwrap();
        assert_eq!(out.confirmed, vec![true, false]);
        assert_eq!(out.pay[0], money("2"));
        assert_eq!(out.burn[0], money("2"));
    }

    #[test]
    fn salsa_needs_a_losing_bid_of_eight() {
        let m = salsa_counterexample();
        let out = m.evaluate(&bids(&["10", "1"])).unwrap();
        assert!(out.confirmed.iter().all(|c| !c));

        let out = m.evaluate(&bids(&["9", "8"])).unwrap();
        assert_eq!(out.confirmed, vec![true, false]);
        assert_eq!(out.pay[0], money("9"));
        assert_eq!(out.burn[0], money("9"));
    }

    #[test]
    fn salsa_flat_price_once_ten_present() {
        let m = salsa_counterexample();
        let out = m.evaluate(&bids(&["10", "8"])).unwrap();
        assert_eq!(out.confirmed, vec![true, true]);
        assert_eq!(out.pay, vec![money("13/2"), money("13/2")]);
        assert_eq!(out.burn, vec![money("13/2"), money("13/2")]);
    }

    #[test]
    fn salsa_prefix_on_three_bidders() {
        let m = salsa_counterexample();
        let out = m.evaluate(&bids(&["10", "8", "1"])).unwrap();
        assert_eq!(out.confirmed, vec![true, true, false]);
    }

    #[test]
    fn registry_finds_every_mechanism() {
        let mut params = BTreeMap::new();
        params.insert("r".to_string(), "1".to_string());
        for name in [
            "first-price-burned-reserve",
            "fully-burned-posted-price",
            "fully-burned-second-price",
            "discount-auction",
            "salsa-counterexample",
        ] {
            assert!(by_name(name, &params).is_ok(), "missing {name}");
        }
        assert!(by_name("nope", &params).is_err());
    }
}
