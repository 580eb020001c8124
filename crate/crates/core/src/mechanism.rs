//! Core auction types: bid vectors, outcomes, settings, and the mechanism trait.

use crate::error::MechError;
use crate::money::Money;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// An ordered vector of bids. Indices are stable bidder identities within a
/// scenario: the same index refers to the same bidder across settings.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BidVector(Vec<Money>);

impl BidVector {
    pub fn new(bids: Vec<Money>) -> Self {
        BidVector(bids)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Money> {
        self.0.get(i)
    }

    pub fn bids(&self) -> &[Money] {
        &self.0
    }

    pub fn set(&mut self, i: usize, v: Money) {
        self.0[i] = v;
    }

    pub fn push(&mut self, v: Money) {
        self.0.push(v);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Money> {
        self.0.iter()
    }
}

impl fmt::Debug for BidVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<Money>> for BidVector {
    fn from(v: Vec<Money>) -> Self {
        BidVector(v)
    }
}

/// The result of running a mechanism on a bid vector: confirmation bits,
/// payments, and burns, all aligned with the input indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    pub confirmed: Vec<bool>,
    pub pay: Vec<Money>,
    pub burn: Vec<Money>,
}

impl Outcome {
    pub fn all_zero(n: usize) -> Self {
        Outcome {
            confirmed: vec![false; n],
            pay: vec![Money::zero(); n],
            burn: vec![Money::zero(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.confirmed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.confirmed.is_empty()
    }
}

/// A bid profile together with the true-value profile it is judged against.
///
/// The first `n` indices are real bidders whose true values are known; any
/// further indices are miner-injected fake bids with no true value. A real bid
/// the miner omitted is kept in place as bid 0 and flagged, so indices stay
/// stable across the settings of a scenario.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Setting {
    bids: BidVector,
    true_values: Vec<Money>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    omitted: BTreeSet<usize>,
}

impl Setting {
    /// The honest setting: every real bidder bids its true value.
    pub fn honest(values: Vec<Money>) -> Self {
        Setting {
            bids: BidVector::new(values.clone()),
            true_values: values,
            omitted: BTreeSet::new(),
        }
    }

    /// A setting with explicit bids and values; bids beyond `values.len()`
    /// are fake bids.
    pub fn new(
        bids: BidVector,
        true_values: Vec<Money>,
        omitted: BTreeSet<usize>,
    ) -> Result<Self, MechError> {
        if true_values.len() > bids.len() {
            return Err(MechError::MalformedSetting(format!(
                "{} true values but only {} bids",
                true_values.len(),
                bids.len()
            )));
        }
        if let Some(&i) = omitted.iter().next_back() {
            if i >= true_values.len() {
                return Err(MechError::MalformedSetting(format!(
                    "omitted index {i} is not a real bidder"
                )));
            }
        }
        for &i in &omitted {
            if !bids.get(i).map(Money::is_zero).unwrap_or(false) {
                return Err(MechError::MalformedSetting(format!(
                    "omitted bidder {i} must have bid 0"
                )));
            }
        }
        Ok(Setting {
            bids,
            true_values,
            omitted,
        })
    }

    pub fn bids(&self) -> &BidVector {
        &self.bids
    }

    /// Number of real bidders (those with a true value).
    pub fn n_real(&self) -> usize {
        self.true_values.len()
    }

    /// Total number of bids, including fakes.
    pub fn n_total(&self) -> usize {
        self.bids.len()
    }

    pub fn is_fake(&self, i: usize) -> bool {
        i >= self.true_values.len()
    }

    pub fn fake_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.true_values.len()..self.bids.len()
    }

    pub fn true_values(&self) -> &[Money] {
        &self.true_values
    }

    pub fn true_value(&self, i: usize) -> Option<&Money> {
        self.true_values.get(i)
    }

    pub fn omitted(&self) -> &BTreeSet<usize> {
        &self.omitted
    }

    /// True when every real bid equals its true value and there are no miner
    /// actions in effect.
    pub fn is_honest(&self) -> bool {
        self.omitted.is_empty()
            && self.bids.len() == self.true_values.len()
            && self
                .true_values
                .iter()
                .zip(self.bids.iter())
                .all(|(v, b)| v == b)
    }
}

/// Declared evaluation domain of a mechanism.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    /// Evaluable at any non-negative rational bid.
    Continuous,
    /// Evaluable only at the listed values (ascending).
    Grid(Vec<Money>),
}

/// A deterministic map from a bid vector to an outcome.
///
/// Implementations must be pure: identical bid vectors yield identical
/// outcomes, and the output vectors match the input length.
pub trait Mechanism: Send + Sync {
    fn name(&self) -> String;

    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::new()
    }

    fn domain(&self) -> Domain {
        Domain::Continuous
    }

    /// `Some(n)` when the mechanism is only defined for exactly `n` bids.
    fn arity(&self) -> Option<usize> {
        None
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError>;
}

/// Shared handle to a mechanism; cheap to clone across workers.
pub type MechRef = Arc<dyn Mechanism>;

/// Evaluates a setting's bid vector, checking output shape.
pub fn evaluate_setting(mech: &dyn Mechanism, s: &Setting) -> Result<Outcome, MechError> {
    let out = mech.evaluate(s.bids())?;
    debug_assert_eq!(out.len(), s.n_total(), "mechanism changed vector length");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_setting_is_honest() {
        let s = Setting::honest(vec![Money::from_int(2), Money::from_ratio(3, 2)]);
        assert!(s.is_honest());
        assert_eq!(s.n_real(), 2);
        assert_eq!(s.n_total(), 2);
        assert!(!s.is_fake(1));
    }

    #[test]
    fn omitted_bid_must_be_zero() {
        let bids = BidVector::new(vec![Money::from_int(3), Money::from_int(2)]);
        let vals = vec![Money::from_int(3), Money::from_int(2)];
        let omitted: BTreeSet<usize> = [1].into_iter().collect();
        assert!(Setting::new(bids, vals.clone(), omitted.clone()).is_err());

        let bids = BidVector::new(vec![Money::from_int(3), Money::zero()]);
        let s = Setting::new(bids, vals, omitted).unwrap();
        assert!(!s.is_honest());
    }

    #[test]
    fn fake_indices_follow_real_ones() {
        let bids = BidVector::new(vec![
            Money::from_int(3),
            Money::from_int(2),
            Money::from_int(9),
        ]);
        let s = Setting::new(bids, vec![Money::from_int(3), Money::from_int(2)], BTreeSet::new())
            .unwrap();
        assert_eq!(s.fake_indices().collect::<Vec<_>>(), vec![2]);
        assert!(s.is_fake(2));
        assert!(!s.is_honest());
    }
}
