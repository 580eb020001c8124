//! Side contracts between the miner and a coalition of bidders, and verified
//! witnesses of beneficial collusion.

use crate::error::ContractError;
use crate::mechanism::{Mechanism, Setting};
use crate::money::{Money, SignedMoney};
use crate::utility::joint_utility;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Whether the miner may drop real bids and inject fake ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinerModel {
    Passive,
    Active,
}

impl std::fmt::Display for MinerModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinerModel::Passive => write!(f, "passive"),
            MinerModel::Active => write!(f, "active"),
        }
    }
}

/// A coordinated deviation: coalition members change bids; an active miner
/// may additionally omit real bids and append fake ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideContract {
    pub model: MinerModel,
    pub coalition: BTreeSet<usize>,
    pub new_bids: BTreeMap<usize, Money>,
    pub omitted: BTreeSet<usize>,
    pub fakes: Vec<Money>,
}

impl SideContract {
    pub fn passive(coalition: BTreeSet<usize>, new_bids: BTreeMap<usize, Money>) -> Self {
        SideContract {
            model: MinerModel::Passive,
            coalition,
            new_bids,
            omitted: BTreeSet::new(),
            fakes: Vec::new(),
        }
    }

    /// The contract's order: how many bidders participate.
    pub fn order(&self) -> usize {
        self.coalition.len()
    }

    pub fn is_identity(&self) -> bool {
        self.new_bids.is_empty() && self.omitted.is_empty() && self.fakes.is_empty()
    }

    fn validate(&self, baseline: &Setting) -> Result<(), ContractError> {
        let n = baseline.n_real();
        for &i in &self.coalition {
            if i >= n {
                return Err(ContractError::BadBidder { index: i, len: n });
            }
        }
        for &i in self.new_bids.keys() {
            if !self.coalition.contains(&i) {
                return Err(ContractError::NewBidOutsideCoalition { index: i });
            }
        }
        for &i in &self.omitted {
            if i >= n {
                return Err(ContractError::BadBidder { index: i, len: n });
            }
        }
        if self.model == MinerModel::Passive && (!self.omitted.is_empty() || !self.fakes.is_empty())
        {
            return Err(ContractError::PassiveWithMinerActions);
        }
        Ok(())
    }
}

/// Applies a contract to a baseline setting: coalition bids replaced, omitted
/// bids zeroed and flagged, fake bids appended.
pub fn apply_contract(baseline: &Setting, sc: &SideContract) -> Result<Setting, ContractError> {
    sc.validate(baseline)?;
    let mut bids = baseline.bids().clone();
    for (&i, b) in &sc.new_bids {
        bids.set(i, b.clone());
    }
    let mut omitted = baseline.omitted().clone();
    for &i in &sc.omitted {
        bids.set(i, Money::zero());
        omitted.insert(i);
    }
    for f in &sc.fakes {
        bids.push(f.clone());
    }
    Ok(Setting::new(bids, baseline.true_values().to_vec(), omitted)?)
}

/// Joint utility change of the miner and the coalition, judged at the
/// baseline's true values: `[u_miner(B;A) + u_C(B;A)] - [u_miner(A;A) + u_C(A;A)]`.
///
/// The baseline must be honest (bids equal true values); a collusion is
/// defined relative to truthful play.
pub fn joint_utility_delta(
    mech: &dyn Mechanism,
    baseline: &Setting,
    sc: &SideContract,
) -> Result<SignedMoney, ContractError> {
    if !baseline.is_honest() {
        let bad = baseline
            .true_values()
            .iter()
            .zip(baseline.bids().iter())
            .position(|(v, b)| v != b)
            .unwrap_or(0);
        return Err(ContractError::DishonestBaseline { index: bad });
    }
    let after = apply_contract(baseline, sc)?;
    let coalition: Vec<usize> = sc.coalition.iter().copied().collect();
    let before_u = joint_utility(mech, baseline, baseline, &coalition)?;
    let after_u = joint_utility(mech, &after, baseline, &coalition)?;
    Ok(&after_u - &before_u)
}

/// A verified beneficial collusion: the contract, both settings, and the
/// recomputed joint-utility gain (strictly positive).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub contract: SideContract,
    pub setting_a: Setting,
    pub setting_b: Setting,
    pub delta: SignedMoney,
}

impl Witness {
    /// Builds and verifies a witness from a baseline and contract. Returns
    /// `None` when the contract is not strictly beneficial.
    pub fn build(
        mech: &dyn Mechanism,
        baseline: Setting,
        contract: SideContract,
    ) -> Result<Option<Witness>, ContractError> {
        let delta = joint_utility_delta(mech, &baseline, &contract)?;
        if !delta.is_positive() {
            return Ok(None);
        }
        let setting_b = apply_contract(&baseline, &contract)?;
        Ok(Some(Witness {
            contract,
            setting_a: baseline,
            setting_b,
            delta,
        }))
    }

    pub fn order(&self) -> usize {
        self.contract.order()
    }
}

/// Recomputes a witness from scratch: structural invariants plus a strictly
/// positive recomputed delta that matches the stored one. Every witness any
/// module hands out must pass this.
pub fn verify_witness(mech: &dyn Mechanism, w: &Witness) -> bool {
    verify_witness_detailed(mech, w).is_ok()
}

/// Like [`verify_witness`] but says what broke.
pub fn verify_witness_detailed(mech: &dyn Mechanism, w: &Witness) -> Result<(), String> {
    let rebuilt = apply_contract(&w.setting_a, &w.contract)
        .map_err(|e| format!("contract does not apply to its baseline: {e}"))?;
    if rebuilt != w.setting_b {
        return Err("stored post-collusion setting differs from applying the contract".into());
    }
    let delta = joint_utility_delta(mech, &w.setting_a, &w.contract)
        .map_err(|e| format!("delta recomputation failed: {e}"))?;
    if delta != w.delta {
        return Err(format!(
            "stored delta {} differs from recomputed {}",
            w.delta, delta
        ));
    }
    if !delta.is_positive() {
        return Err(format!("delta {delta} is not strictly positive"));
    }
    Ok(())
}

/// On-disk witness format. `A` is the honest profile, which doubles as the
/// coalition's true values.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    #[serde(rename = "A")]
    pub a: Vec<Money>,
    pub coalition: Vec<usize>,
    pub new_bids: BTreeMap<String, Money>,
    pub omitted: Vec<usize>,
    pub fakes: Vec<Money>,
    pub delta: SignedMoney,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<MinerModel>,
}

impl WitnessFile {
    pub fn from_witness(w: &Witness) -> Self {
        WitnessFile {
            a: w.setting_a.bids().bids().to_vec(),
            coalition: w.contract.coalition.iter().copied().collect(),
            new_bids: w
                .contract
                .new_bids
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect(),
            omitted: w.contract.omitted.iter().copied().collect(),
            fakes: w.contract.fakes.clone(),
            delta: w.delta.clone(),
            model: Some(w.contract.model),
        }
    }

    /// Reconstructs and verifies the witness against a mechanism. The stored
    /// delta must match the recomputation exactly.
    pub fn into_witness(self, mech: &dyn Mechanism) -> Result<Witness, String> {
        let model = self.model.unwrap_or({
            if self.omitted.is_empty() && self.fakes.is_empty() {
                MinerModel::Passive
            } else {
                MinerModel::Active
            }
        });
        let mut new_bids = BTreeMap::new();
        for (k, v) in self.new_bids {
            let idx: usize = k
                .parse()
                .map_err(|_| format!("new_bids key {k:?} is not a bidder index"))?;
            new_bids.insert(idx, v);
        }
        let contract = SideContract {
            model,
            coalition: self.coalition.into_iter().collect(),
            new_bids,
            omitted: self.omitted.into_iter().collect(),
            fakes: self.fakes,
        };
        let baseline = Setting::honest(self.a);
        let w = Witness::build(mech, baseline, contract)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| "witness file describes a non-beneficial contract".to_string())?;
        if w.delta != self.delta {
            return Err(format!(
                "witness file claims delta {}, recomputed {}",
                self.delta, w.delta
            ));
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn money(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn values(xs: &[&str]) -> Vec<Money> {
        xs.iter().map(|s| money(s)).collect()
    }

    #[test]
    fn identity_contract_changes_nothing() {
        let mech = zoo::salsa_counterexample();
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("10")), (1, money("1"))].into_iter().collect(),
        );
        let b = apply_contract(&a, &sc).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            joint_utility_delta(mech.as_ref(), &a, &sc).unwrap(),
            SignedMoney::zero()
        );
    }

    #[test]
    fn coalition_rebid_reaches_the_example_profile() {
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [1usize].into_iter().collect(),
            [(1, money("8"))].into_iter().collect(),
        );
        let b = apply_contract(&a, &sc).unwrap();
        assert_eq!(b.bids().bids(), &values(&["10", "8"])[..]);
    }

    #[test]
    fn omission_zeroes_and_flags() {
        let a = Setting::honest(values(&["3", "2"]));
        let sc = SideContract {
            model: MinerModel::Active,
            coalition: BTreeSet::new(),
            new_bids: BTreeMap::new(),
            omitted: [1usize].into_iter().collect(),
            fakes: Vec::new(),
        };
        let b = apply_contract(&a, &sc).unwrap();
        assert_eq!(b.bids().bids(), &values(&["3", "0"])[..]);
        assert!(b.omitted().contains(&1));
    }

    #[test]
    fn passive_contract_rejects_miner_actions() {
        let a = Setting::honest(values(&["3", "2"]));
        let sc = SideContract {
            model: MinerModel::Passive,
            coalition: BTreeSet::new(),
            new_bids: BTreeMap::new(),
            omitted: [1usize].into_iter().collect(),
            fakes: Vec::new(),
        };
        assert_eq!(
            apply_contract(&a, &sc),
            Err(ContractError::PassiveWithMinerActions)
        );
    }

    #[test]
    fn out_of_range_member_is_rejected() {
        let a = Setting::honest(values(&["3", "2"]));
        let sc = SideContract::passive(
            [7usize].into_iter().collect(),
            [(7, money("1"))].into_iter().collect(),
        );
        assert!(matches!(
            apply_contract(&a, &sc),
            Err(ContractError::BadBidder { index: 7, .. })
        ));
    }

    #[test]
    fn example_collusion_gains_exactly_one() {
        let mech = zoo::salsa_counterexample();
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("9")), (1, money("8"))].into_iter().collect(),
        );
        assert_eq!(
            joint_utility_delta(mech.as_ref(), &a, &sc).unwrap(),
            SignedMoney::from_int(1)
        );
    }

    #[test]
    fn overbidding_against_first_price_never_helps() {
        let mech = zoo::first_price_burned_reserve(money("1"));
        let a = Setting::honest(values(&["2", "3/2"]));
        let sc = SideContract::passive(
            [1usize].into_iter().collect(),
            [(1, money("3"))].into_iter().collect(),
        );
        let delta = joint_utility_delta(mech.as_ref(), &a, &sc).unwrap();
        assert!(!delta.is_positive(), "delta = {delta}");
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let mech = zoo::salsa_counterexample();
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("9")), (1, money("8"))].into_iter().collect(),
        );
        let mut w = Witness::build(mech.as_ref(), a, sc).unwrap().unwrap();
        assert!(verify_witness(mech.as_ref(), &w));
        w.delta = SignedMoney::from_int(-1);
        assert!(!verify_witness(mech.as_ref(), &w));
    }

    #[test]
    fn structural_garbage_fails_verification_with_diagnostic() {
        let mech = zoo::salsa_counterexample();
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("9")), (1, money("8"))].into_iter().collect(),
        );
        let mut w = Witness::build(mech.as_ref(), a, sc).unwrap().unwrap();
        w.contract.coalition.insert(7);
        let err = verify_witness_detailed(mech.as_ref(), &w).unwrap_err();
        assert!(err.contains("contract does not apply"), "{err}");
    }

    #[test]
    fn witness_file_round_trip() {
        let mech = zoo::salsa_counterexample();
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("9")), (1, money("8"))].into_iter().collect(),
        );
        let w = Witness::build(mech.as_ref(), a, sc).unwrap().unwrap();
        let file = WitnessFile::from_witness(&w);
        let json = serde_json::to_string(&file).unwrap();
        let parsed: WitnessFile = serde_json::from_str(&json).unwrap();
        let back = parsed.into_witness(mech.as_ref()).unwrap();
        assert_eq!(back, w);
    }
}
