//! The constructive reduction from any beneficial collusion to a beneficial
//! collusion of the miner and at most two bidders.
//!
//! Every stage re-derives its guarantee at runtime instead of trusting it:
//! confirmation guarantees, order maintenance, and the telescoping identity
//! are all checked on the actual mechanism, and a violated assumption is
//! returned as a structured diagnostic carrying the concrete profiles. On
//! mechanisms with consistent tie-breaking the pipeline succeeds; on the
//! tie-breaking counterexample it fails exactly where the theory says the
//! single-move decomposition stops being beneficial.

use crate::contract::{verify_witness, verify_witness_detailed, MinerModel, SideContract, Witness};
use crate::error::{MechError, ReductionError};
use crate::mechanism::{BidVector, Domain, Mechanism, Setting};
use crate::money::{ratio, scale, Money, SignedMoney};
use crate::search::{find_c_sc, SearchLimits, SearchOutcome};
use crate::utility::{bidder_utility_from, miner_utility_from};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// Joint utility of the miner and `coalition` at `bids`, with coalition
/// members valued by `values`. All-real, passive accounting.
fn joint_at(
    mech: &dyn Mechanism,
    bids: &[Money],
    values: &[Money],
    coalition: &[usize],
) -> Result<SignedMoney, MechError> {
    let out = mech.evaluate(&BidVector::new(bids.to_vec()))?;
    let mut joint = miner_utility_from(&out, bids.len());
    for &i in coalition {
        joint += &bidder_utility_from(&out, i, &values[i]);
    }
    Ok(joint)
}

/// How a coalition member moves between the endpoints of a collusion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoverClass {
    /// Raises its bid and ends confirmed.
    RaiseConfirmed,
    /// Raises its bid and ends unconfirmed.
    RaiseUnconfirmed,
    /// Lowers its bid and ends confirmed.
    LowerConfirmed,
    /// Lowers its bid and ends unconfirmed.
    LowerUnconfirmed,
}

/// One bid change inside a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRec {
    pub bidder: usize,
    pub from: Money,
    pub to: Money,
    pub class: MoverClass,
}

/// Partition of the movers by direction and final confirmation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classes {
    pub raise_confirmed: Vec<usize>,
    pub raise_unconfirmed: Vec<usize>,
    pub lower_confirmed: Vec<usize>,
    pub lower_unconfirmed: Vec<usize>,
}

/// Confirmation guarantee at one step: raise-and-end-unconfirmed movers must
/// be unconfirmed right after their move, lower-and-end-confirmed movers
/// confirmed right after theirs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepGuarantee {
    pub step: usize,
    pub bidder: usize,
    pub class: MoverClass,
    pub expected_confirmed: Option<bool>,
    pub actual_confirmed: bool,
    pub holds: bool,
}

/// Side condition of the monotonicity lemmas at one step: a raised bid should
/// stay below the lowest confirmed bid, a lowered bid above the highest
/// unconfirmed bid, both measured before the move. Recorded, not enforced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepSideCondition {
    pub step: usize,
    pub bidder: usize,
    pub vacuous: bool,
    pub holds: bool,
}

/// A one-bid-at-a-time path from the honest setting to the collusion:
/// confirmed raisers first (descending), then all lowerers (ascending), then
/// unconfirmed raisers (descending).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Decomposition {
    /// Bid vectors along the path; first is A, last is B.
    pub steps: Vec<Vec<Money>>,
    pub coalition: Vec<usize>,
    pub movers: Vec<MoveRec>,
    pub classes: Classes,
    pub guarantees: Vec<StepGuarantee>,
    /// Canonical ordering preserved across each adjacent pair.
    pub order_maintained: Vec<bool>,
    pub side_conditions: Vec<StepSideCondition>,
}

impl Decomposition {
    pub fn guarantee_violations(&self) -> Vec<&StepGuarantee> {
        self.guarantees.iter().filter(|g| !g.holds).collect()
    }
}

/// One adjacent pair of a decomposition evaluated as a candidate collusion:
/// coalition values are frozen at the pair's starting bids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairEval {
    pub from: Vec<Money>,
    pub to: Vec<Money>,
    pub mover: usize,
    pub joint_from: SignedMoney,
    pub joint_to: SignedMoney,
    pub beneficial: bool,
}

/// Structured diagnostic for a stage that could not produce a witness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionFailure {
    pub stage: String,
    pub message: String,
    /// Every single-move candidate evaluated, with its joint utilities.
    pub pairs: Vec<PairEval>,
    /// Guarantee violations observed in the decomposition, if any.
    pub guarantee_violations: Vec<StepGuarantee>,
}

/// Per-stage records of the pipeline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "kebab-case")]
pub enum StageRecord {
    Input {
        bids: Vec<Money>,
        coalition: Vec<usize>,
        model: MinerModel,
        joint_before: SignedMoney,
        joint_after: SignedMoney,
        delta: SignedMoney,
    },
    Activize {
        branch: String,
        drop_then_rebid_joints: Option<(SignedMoney, SignedMoney)>,
        output_order: usize,
        output_model: MinerModel,
    },
    Canonicalize {
        assignment: Vec<(usize, Money)>,
        delta_before: SignedMoney,
        delta_after: SignedMoney,
        delta_nondecreasing: bool,
    },
    Decompose {
        steps: Vec<Vec<Money>>,
        classes: Classes,
        guarantees: Vec<StepGuarantee>,
        order_maintained: Vec<bool>,
        side_conditions: Vec<StepSideCondition>,
    },
    IsolateSingleMover {
        pairs: Vec<PairEval>,
        chosen: Option<usize>,
        scanned_alternative_orderings: bool,
        telescoping_residual: SignedMoney,
    },
    LocalizeJump {
        mode: String,
        samples: Vec<(Money, SignedMoney)>,
        bracket: (Money, Money),
        eps: Money,
        iterations: u32,
        multi_jump: bool,
        note: String,
    },
    IsolateBeneficiary {
        mover: usize,
        gains: Vec<(usize, SignedMoney)>,
        chosen: String,
        pair_delta: SignedMoney,
    },
    ExhaustiveFallback {
        found: bool,
        note: String,
    },
}

/// Final disposition of a reduction run.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ReductionOutcome {
    /// The pipeline produced a verified witness of order at most 2.
    Reduced { witness: Witness },
    /// The pipeline could not isolate a smaller collusion, but the input
    /// already involves at most 2 bidders, so it stands as the output.
    /// The diagnostic explains where isolation stopped.
    PassThrough {
        witness: Witness,
        failure: ReductionFailure,
    },
    /// No witness of order at most 2 could be produced.
    Failed { failure: ReductionFailure },
}

/// Full record of a reduction: input, per-stage certificates, and outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub input: Witness,
    pub stages: Vec<StageRecord>,
    pub outcome: ReductionOutcome,
}

impl ReductionTrace {
    pub fn reduced_witness(&self) -> Option<&Witness> {
        match &self.outcome {
            ReductionOutcome::Reduced { witness } => Some(witness),
            ReductionOutcome::PassThrough { witness, .. } => Some(witness),
            ReductionOutcome::Failed { .. } => None,
        }
    }

    pub fn failure(&self) -> Option<&ReductionFailure> {
        match &self.outcome {
            ReductionOutcome::Reduced { .. } => None,
            ReductionOutcome::PassThrough { failure, .. } => Some(failure),
            ReductionOutcome::Failed { failure } => Some(failure),
        }
    }

    /// Telescoping residuals recorded by single-mover isolation; all must be
    /// exactly zero.
    pub fn telescoping_residuals(&self) -> Vec<&SignedMoney> {
        self.stages
            .iter()
            .filter_map(|s| match s {
                StageRecord::IsolateSingleMover {
                    telescoping_residual,
                    ..
                } => Some(telescoping_residual),
                _ => None,
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Stage 1: active-to-passive rewrite
// ---------------------------------------------------------------------------

/// Rewrites an active-miner witness into a passive one, or into a collusion
/// of the miner and at most one bidder.
///
/// Fake bids become value-0 colluders bidding the fake amount. For omissions,
/// the intermediate setting X (omissions applied, no bid changes) splits the
/// collusion: either X-to-B is beneficial with bid changes only, or A-to-X is
/// beneficial with no bid changes, which collapses to a miner-plus-at-most-one
/// contract or to a passive rebid by zero-value stand-ins.
pub fn activize_to_passive(
    mech: &dyn Mechanism,
    w: &Witness,
) -> Result<(Witness, StageRecord), ReductionError> {
    if w.contract.model == MinerModel::Passive {
        return Ok((
            w.clone(),
            StageRecord::Activize {
                branch: "already-passive".into(),
                drop_then_rebid_joints: None,
                output_order: w.order(),
                output_model: MinerModel::Passive,
            },
        ));
    }

    // Step 1: fake bids -> value-0 colluders.
    let (w, fake_note) = if w.contract.fakes.is_empty() {
        (w.clone(), "")
    } else {
        if mech.arity().is_some() {
            return Err(ReductionError::InternalConsistency {
                stage: "activize".into(),
                detail: "fake-bid rewrite needs a mechanism defined at every bidder count".into(),
            });
        }
        let n = w.setting_a.n_real();
        let mut values = w.setting_a.true_values().to_vec();
        let mut new_bids = w.contract.new_bids.clone();
        for (j, f) in w.contract.fakes.iter().enumerate() {
            values.push(Money::zero());
            if !f.is_zero() {
                new_bids.insert(n + j, f.clone());
            }
        }
        let mut coalition = w.contract.coalition.clone();
        coalition.extend(n..n + w.contract.fakes.len());
        let contract = SideContract {
            model: if w.contract.omitted.is_empty() {
                MinerModel::Passive
            } else {
                MinerModel::Active
            },
            coalition,
            new_bids,
            omitted: w.contract.omitted.clone(),
            fakes: Vec::new(),
        };
        let baseline = Setting::honest(values);
        let rewritten = Witness::build(mech, baseline, contract)?.ok_or_else(|| {
            ReductionError::InternalConsistency {
                stage: "activize".into(),
                detail: "fake-to-colluder rewrite lost the benefit; the mechanism treats \
                         appended zero bids non-neutrally"
                    .into(),
            }
        })?;
        (rewritten, "fakes-to-zero-value-colluders; ")
    };

    if w.contract.omitted.is_empty() {
        let order = w.order();
        debug_assert_eq!(w.contract.model, MinerModel::Passive);
        return Ok((
            w.clone(),
            StageRecord::Activize {
                branch: format!("{fake_note}no-omissions"),
                drop_then_rebid_joints: None,
                output_order: order,
                output_model: MinerModel::Passive,
            },
        ));
    }

    // Step 2: omissions. X = omissions applied, no bid changes.
    let a_bids = w.setting_a.bids().bids().to_vec();
    let coalition: Vec<usize> = w.contract.coalition.iter().copied().collect();
    let mut x_bids = a_bids.clone();
    for &i in &w.contract.omitted {
        x_bids[i] = Money::zero();
    }
    let b_bids = w.setting_b.bids().bids().to_vec();

    let joint_a = joint_at(mech, &a_bids, &a_bids, &coalition)?;
    let joint_x_at_a = joint_at(mech, &x_bids, &a_bids, &coalition)?;
    let joint_x_self = joint_at(mech, &x_bids, &x_bids, &coalition)?;
    let joint_b_at_x = joint_at(mech, &b_bids, &x_bids, &coalition)?;

    // Branch X -> B: passive rebid over the post-omission world, with the
    // post-omission bids as the carried value profile.
    if joint_b_at_x > joint_x_self {
        let new_bids: BTreeMap<usize, Money> = coalition
            .iter()
            .filter(|&&i| b_bids[i] != x_bids[i])
            .map(|&i| (i, b_bids[i].clone()))
            .collect();
        let contract = SideContract::passive(w.contract.coalition.clone(), new_bids);
        if let Some(out) = Witness::build(mech, Setting::honest(x_bids.clone()), contract)? {
            let order = out.order();
            return Ok((
                out,
                StageRecord::Activize {
                    branch: format!("{fake_note}rebid-after-omissions"),
                    drop_then_rebid_joints: Some((joint_x_self, joint_b_at_x)),
                    output_order: order,
                    output_model: MinerModel::Passive,
                },
            ));
        }
    }

    // Branch A -> X: the omissions alone are beneficial.
    if joint_x_at_a > joint_a {
        let miner_a = joint_at(mech, &a_bids, &a_bids, &[])?;
        let miner_x = joint_at(mech, &x_bids, &a_bids, &[])?;

        // Miner alone, then miner plus the single best-gaining member.
        let mut candidates: Vec<BTreeSet<usize>> = vec![BTreeSet::new()];
        let mut by_gain: Vec<(SignedMoney, usize)> = Vec::new();
        for &i in &coalition {
            let gain = &joint_at(mech, &x_bids, &a_bids, &[i])? - &miner_x;
            let base = &joint_at(mech, &a_bids, &a_bids, &[i])? - &miner_a;
            by_gain.push((&gain - &base, i));
        }
        by_gain.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (_, i) in &by_gain {
            candidates.push([*i].into_iter().collect());
        }
        for cand in candidates {
            let contract = SideContract {
                model: MinerModel::Active,
                coalition: cand,
                new_bids: BTreeMap::new(),
                omitted: w.contract.omitted.clone(),
                fakes: Vec::new(),
            };
            if let Some(out) = Witness::build(mech, Setting::honest(a_bids.clone()), contract)? {
                let order = out.order();
                return Ok((
                    out,
                    StageRecord::Activize {
                        branch: format!("{fake_note}omissions-only"),
                        drop_then_rebid_joints: Some((joint_a.clone(), joint_x_at_a.clone())),
                        output_order: order,
                        output_model: MinerModel::Active,
                    },
                ));
            }
        }

        // Last resort: zero-value stand-ins for the omitted bidders rebid
        // the original amounts, turning the omission gain into a passive
        // contract in the post-omission world.
        let restore: BTreeMap<usize, Money> = w
            .contract
            .omitted
            .iter()
            .map(|&i| (i, a_bids[i].clone()))
            .collect();
        let mut cand_coalition: BTreeSet<usize> = w.contract.coalition.clone();
        cand_coalition.extend(w.contract.omitted.iter().copied());
        let contract = SideContract::passive(cand_coalition, restore);
        if let Some(out) = Witness::build(mech, Setting::honest(x_bids.clone()), contract)? {
            let order = out.order();
            return Ok((
                out,
                StageRecord::Activize {
                    branch: format!("{fake_note}stand-ins-rebid"),
                    drop_then_rebid_joints: Some((joint_a, joint_x_at_a)),
                    output_order: order,
                    output_model: MinerModel::Passive,
                },
            ));
        }
    }

    Err(ReductionError::InternalConsistency {
        stage: "activize".into(),
        detail: format!(
            "neither split verifies: joint(A)={joint_a}, joint(X;A)={joint_x_at_a}, \
             joint(X;X)={joint_x_self}, joint(B;X)={joint_b_at_x}"
        ),
    })
}

// ---------------------------------------------------------------------------
// Stage 2: canonical ordering
// ---------------------------------------------------------------------------

/// Reassigns the coalition's new bids so the k-th highest starting bid moves
/// to the k-th highest ending bid. Under prefix confirmation this cannot
/// lower the benefit; the rewritten witness is verified either way.
pub fn canonicalize(
    mech: &dyn Mechanism,
    w: &Witness,
) -> Result<(Option<Witness>, StageRecord), ReductionError> {
    debug_assert_eq!(w.contract.model, MinerModel::Passive);
    let a_bids = w.setting_a.bids().bids();
    let b_bids = w.setting_b.bids().bids();

    let mut members: Vec<usize> = w.contract.coalition.iter().copied().collect();
    members.sort_by(|&x, &y| a_bids[y].cmp(&a_bids[x]).then(x.cmp(&y)));
    let mut ends: Vec<Money> = members.iter().map(|&i| b_bids[i].clone()).collect();
    ends.sort_by(|x, y| y.cmp(x));

    let assignment: Vec<(usize, Money)> = members.iter().copied().zip(ends).collect();
    let new_bids: BTreeMap<usize, Money> = assignment
        .iter()
        .filter(|(i, b)| a_bids[*i] != *b)
        .map(|(i, b)| (*i, b.clone()))
        .collect();
    let contract = SideContract::passive(w.contract.coalition.clone(), new_bids);
    let delta_before = w.delta.clone();
    let delta_after = crate::contract::joint_utility_delta(mech, &w.setting_a, &contract)?;
    let nondecreasing = delta_after >= delta_before;

    let record = StageRecord::Canonicalize {
        assignment,
        delta_before,
        delta_after: delta_after.clone(),
        delta_nondecreasing: nondecreasing,
    };
    if !delta_after.is_positive() {
        return Ok((None, record));
    }
    let out = Witness::build(mech, w.setting_a.clone(), contract)?
        .expect("positive delta just computed");
    Ok((Some(out), record))
}

// ---------------------------------------------------------------------------
// Stage 3: the one-bid-at-a-time decomposition
// ---------------------------------------------------------------------------

/// Builds the three-phase decomposition and records its confirmation
/// guarantees, order maintenance, and monotonicity side conditions.
/// Guarantee violations are recorded, not fatal: downstream isolation decides.
pub fn salsa_decompose(mech: &dyn Mechanism, w: &Witness) -> Result<Decomposition, MechError> {
    let a_bids = w.setting_a.bids().bids().to_vec();
    let b_bids = w.setting_b.bids().bids().to_vec();
    let coalition: Vec<usize> = w.contract.coalition.iter().copied().collect();

    let out_b = mech.evaluate(w.setting_b.bids())?;
    let mut classes = Classes::default();
    let mut movers: Vec<(usize, MoverClass)> = Vec::new();
    for &i in &coalition {
        if a_bids[i] == b_bids[i] {
            continue;
        }
        let raising = b_bids[i] > a_bids[i];
        let confirmed = out_b.confirmed[i];
        let class = match (raising, confirmed) {
            (true, true) => MoverClass::RaiseConfirmed,
            (true, false) => MoverClass::RaiseUnconfirmed,
            (false, true) => MoverClass::LowerConfirmed,
            (false, false) => MoverClass::LowerUnconfirmed,
        };
        match class {
            MoverClass::RaiseConfirmed => classes.raise_confirmed.push(i),
            MoverClass::RaiseUnconfirmed => classes.raise_unconfirmed.push(i),
            MoverClass::LowerConfirmed => classes.lower_confirmed.push(i),
            MoverClass::LowerUnconfirmed => classes.lower_unconfirmed.push(i),
        }
        movers.push((i, class));
    }

    // Phase order: confirmed raisers descending by starting bid, all lowerers
    // ascending, unconfirmed raisers descending. Ties break by index.
    let desc = |xs: &mut Vec<usize>, bids: &Vec<Money>| {
        xs.sort_by(|&p, &q| bids[q].cmp(&bids[p]).then(p.cmp(&q)))
    };
    let asc = |xs: &mut Vec<usize>, bids: &Vec<Money>| {
        xs.sort_by(|&p, &q| bids[p].cmp(&bids[q]).then(p.cmp(&q)))
    };
    let mut phase1 = classes.raise_confirmed.clone();
    desc(&mut phase1, &a_bids);
    let mut phase2: Vec<usize> = classes
        .lower_confirmed
        .iter()
        .chain(classes.lower_unconfirmed.iter())
        .copied()
        .collect();
    asc(&mut phase2, &a_bids);
    let mut phase3 = classes.raise_unconfirmed.clone();
    desc(&mut phase3, &a_bids);

    let class_of = |i: usize| movers.iter().find(|(j, _)| *j == i).unwrap().1;

    let mut steps = vec![a_bids.clone()];
    let mut move_recs = Vec::new();
    let mut guarantees = Vec::new();
    let mut side_conditions = Vec::new();
    let mut current = a_bids.clone();
    for (step, &i) in phase1.iter().chain(&phase2).chain(&phase3).enumerate() {
        let class = class_of(i);
        let before_out = mech.evaluate(&BidVector::new(current.clone()))?;

        let mut next = current.clone();
        next[i] = b_bids[i].clone();
        let after_out = mech.evaluate(&BidVector::new(next.clone()))?;

        let expected = match class {
            MoverClass::RaiseUnconfirmed => Some(false),
            MoverClass::LowerConfirmed => Some(true),
            _ => None,
        };
        let actual = after_out.confirmed[i];
        guarantees.push(StepGuarantee {
            step,
            bidder: i,
            class,
            expected_confirmed: expected,
            actual_confirmed: actual,
            holds: expected.map_or(true, |e| e == actual),
        });

        let raising = b_bids[i] > a_bids[i];
        let side = if raising {
            let low_confirmed = (0..current.len())
                .filter(|&j| before_out.confirmed[j])
                .map(|j| current[j].clone())
                .min();
            match low_confirmed {
                None => StepSideCondition {
                    step,
                    bidder: i,
                    vacuous: true,
                    holds: true,
                },
                Some(low) => StepSideCondition {
                    step,
                    bidder: i,
                    vacuous: false,
                    holds: next[i] < low,
                },
            }
        } else {
            let high_unconfirmed = (0..current.len())
                .filter(|&j| !before_out.confirmed[j] && j != i)
                .map(|j| current[j].clone())
                .max();
            match high_unconfirmed {
                None => StepSideCondition {
                    step,
                    bidder: i,
                    vacuous: true,
                    holds: true,
                },
                Some(high) => StepSideCondition {
                    step,
                    bidder: i,
                    vacuous: false,
                    holds: next[i] > high,
                },
            }
        };
        side_conditions.push(side);

        move_recs.push(MoveRec {
            bidder: i,
            from: a_bids[i].clone(),
            to: b_bids[i].clone(),
            class,
        });
        steps.push(next.clone());
        current = next;
    }

    // Canonical ordering across each adjacent pair: coalition members sorted
    // by the earlier bids keep a non-increasing order in the later bids.
    let mut order_maintained = Vec::new();
    for pair in steps.windows(2) {
        let (prev, next) = (&pair[0], &pair[1]);
        let mut members = coalition.clone();
        members.sort_by(|&p, &q| prev[q].cmp(&prev[p]).then(p.cmp(&q)));
        let ok = members.windows(2).all(|m| next[m[0]] >= next[m[1]]);
        order_maintained.push(ok);
    }

    debug_assert_eq!(*steps.last().unwrap(), b_bids);
    Ok(Decomposition {
        steps,
        coalition,
        movers: move_recs,
        classes,
        guarantees,
        order_maintained,
        side_conditions,
    })
}

// ---------------------------------------------------------------------------
// Stage 4: single mover
// ---------------------------------------------------------------------------

fn eval_pair(
    mech: &dyn Mechanism,
    from: &[Money],
    to: &[Money],
    mover: usize,
    coalition: &[usize],
) -> Result<PairEval, MechError> {
    let joint_from = joint_at(mech, from, from, coalition)?;
    let joint_to = joint_at(mech, to, from, coalition)?;
    let beneficial = joint_to > joint_from;
    Ok(PairEval {
        from: from.to_vec(),
        to: to.to_vec(),
        mover,
        joint_from,
        joint_to,
        beneficial,
    })
}

/// Telescoping identity: with sigma the coalition members confirmed at the
/// end, the value shift accounted across the sequence cancels exactly.
fn telescoping_residual(
    mech: &dyn Mechanism,
    d: &Decomposition,
) -> Result<SignedMoney, MechError> {
    if d.movers.is_empty() {
        return Ok(SignedMoney::zero());
    }
    let a = &d.steps[0];
    let b = d.steps.last().unwrap();
    let before_last = &d.steps[d.steps.len() - 2];
    let last_mover = d.movers.last().unwrap().bidder;

    let out_b = mech.evaluate(&BidVector::new(b.clone()))?;
    let mut u_b_at_a = SignedMoney::zero();
    let mut u_b_at_xk = SignedMoney::zero();
    for &i in &d.coalition {
        u_b_at_a += &bidder_utility_from(&out_b, i, &a[i]);
        u_b_at_xk += &bidder_utility_from(&out_b, i, &before_last[i]);
    }
    let mut shift = SignedMoney::zero();
    for m in &d.movers {
        if m.bidder != last_mover && out_b.confirmed[m.bidder] {
            shift += &(&m.to - &m.from);
        }
    }
    Ok(&(&u_b_at_a - &u_b_at_xk) + &shift)
}

fn lex_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}

const FALLBACK_MAX_MOVERS: usize = 6;

/// Scans adjacent pairs of the decomposition for one that is beneficial on
/// its own; the coalition's values are frozen at the pair's starting bids, so
/// the emitted witness carries its own type profile. When the given ordering
/// yields nothing, every alternative one-at-a-time ordering is scanned before
/// giving up.
pub fn isolate_single_mover(
    mech: &dyn Mechanism,
    d: &Decomposition,
) -> Result<(Result<Witness, ReductionFailure>, StageRecord), MechError> {
    let residual = telescoping_residual(mech, d)?;
    debug_assert!(residual.is_zero(), "telescoping residual {residual} != 0");

    let mut pairs: Vec<PairEval> = Vec::new();
    let mut chosen: Option<usize> = None;
    for (t, pair) in d.steps.windows(2).enumerate() {
        let ev = eval_pair(mech, &pair[0], &pair[1], d.movers[t].bidder, &d.coalition)?;
        let hit = ev.beneficial;
        pairs.push(ev);
        if hit {
            chosen = Some(t);
            break;
        }
    }

    let mut scanned_alternatives = false;
    let mut winner: Option<(Vec<Money>, Vec<Money>, usize)> = None;
    if let Some(t) = chosen {
        let p = &pairs[t];
        winner = Some((p.from.clone(), p.to.clone(), p.mover));
    } else if d.movers.len() >= 2 && d.movers.len() <= FALLBACK_MAX_MOVERS {
        scanned_alternatives = true;
        let a = &d.steps[0];
        let mut seen: BTreeSet<(Vec<String>, Vec<String>)> = pairs
            .iter()
            .map(|p| {
                (
                    p.from.iter().map(Money::to_string).collect(),
                    p.to.iter().map(Money::to_string).collect(),
                )
            })
            .collect();
        'orderings: for perm in lex_permutations(d.movers.len()) {
            let mut current = a.clone();
            for &slot in &perm {
                let m = &d.movers[slot];
                let mut next = current.clone();
                next[m.bidder] = m.to.clone();
                let key = (
                    current.iter().map(Money::to_string).collect(),
                    next.iter().map(Money::to_string).collect(),
                );
                if seen.insert(key) {
                    let ev = eval_pair(mech, &current, &next, m.bidder, &d.coalition)?;
                    let hit = ev.beneficial;
                    pairs.push(ev);
                    if hit {
                        let p = pairs.last().unwrap();
                        winner = Some((p.from.clone(), p.to.clone(), p.mover));
                        break 'orderings;
                    }
                }
                current = next;
            }
        }
    }

    let record = StageRecord::IsolateSingleMover {
        pairs: pairs.clone(),
        chosen,
        scanned_alternative_orderings: scanned_alternatives,
        telescoping_residual: residual,
    };

    match winner {
        Some((from, to, mover)) => {
            let contract = SideContract::passive(
                d.coalition.iter().copied().collect(),
                [(mover, to[mover].clone())].into_iter().collect(),
            );
            let w = Witness::build(mech, Setting::honest(from), contract)
                .map_err(|e| MechError::MalformedSetting(e.to_string()))?
                .expect("pair was evaluated beneficial");
            Ok((Ok(w), record))
        }
        None => {
            let failure = ReductionFailure {
                stage: "isolate-single-mover".into(),
                message: "no single-move step of any one-at-a-time decomposition is \
                          beneficial; consistent tie-breaking fails for this collusion"
                    .into(),
                pairs,
                guarantee_violations: d.guarantee_violations().into_iter().cloned().collect(),
            };
            Ok((Err(failure), record))
        }
    }
}

// ---------------------------------------------------------------------------
// Stage 5: jump localization
// ---------------------------------------------------------------------------

/// How the mover's critical bid is bracketed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LocalizeMode {
    /// Walk the declared grid between the endpoints; exact and complete.
    Grid,
    /// Exact-rational bisection for continuous mechanisms.
    Bisect { max_iters: u32 },
}

/// Narrows a single-mover witness to an adjacent pair of mover bids across
/// which the coalition's joint value jumps. In a mechanism robust to 2-party
/// contracts the jump is unique and carries the whole gain; more than one
/// jump is itself evidence against robustness and is flagged.
pub fn localize_jump(
    mech: &dyn Mechanism,
    w: &Witness,
    mode: LocalizeMode,
    eps_target: Option<Money>,
) -> Result<(Witness, StageRecord), ReductionError> {
    let mover = single_mover_of(w).ok_or_else(|| ReductionError::InternalConsistency {
        stage: "localize-jump".into(),
        detail: "witness is not single-mover".into(),
    })?;
    let a_bids = w.setting_a.bids().bids().to_vec();
    let coalition: Vec<usize> = w.contract.coalition.iter().copied().collect();
    let from = a_bids[mover].clone();
    let to = w.setting_b.bids().bids()[mover].clone();

    let g = |x: &Money| -> Result<SignedMoney, MechError> {
        let mut bids = a_bids.clone();
        bids[mover] = x.clone();
        joint_at(mech, &bids, &a_bids, &coalition)
    };

    let build = |lo: &Money, hi: &Money| -> Result<Option<Witness>, ReductionError> {
        let mut base = a_bids.clone();
        base[mover] = lo.clone();
        let contract = SideContract::passive(
            w.contract.coalition.clone(),
            [(mover, hi.clone())].into_iter().collect(),
        );
        Ok(Witness::build(mech, Setting::honest(base), contract)?)
    };

    match mode {
        LocalizeMode::Grid => {
            let Domain::Grid(values) = mech.domain() else {
                // No declared grid to walk; fall back to bisection.
                return localize_jump(mech, w, LocalizeMode::Bisect { max_iters: 64 }, eps_target);
            };
            let (lo, hi) = if from <= to {
                (from.clone(), to.clone())
            } else {
                (to.clone(), from.clone())
            };
            let mut path: Vec<Money> = values
                .into_iter()
                .filter(|v| *v >= lo && *v <= hi)
                .collect();
            if from > to {
                path.reverse();
            }
            let mut samples = Vec::with_capacity(path.len());
            for x in &path {
                samples.push((x.clone(), g(x)?));
            }
            let mut jumps = 0usize;
            let mut best: Option<(usize, SignedMoney)> = None;
            for t in 0..samples.len().saturating_sub(1) {
                let diff = &samples[t + 1].1 - &samples[t].1;
                if !diff.is_zero() {
                    jumps += 1;
                }
                if diff.is_positive() && best.as_ref().map_or(true, |(_, d)| diff > *d) {
                    best = Some((t, diff));
                }
            }
            let (t, _) = best.ok_or_else(|| ReductionError::InternalConsistency {
                stage: "localize-jump".into(),
                detail: "no positive step along the grid path despite a beneficial witness".into(),
            })?;
            let (x_lo, x_hi) = (samples[t].0.clone(), samples[t + 1].0.clone());
            let eps = match &x_hi - &x_lo {
                d if d.is_negative() => (&x_lo - &x_hi).to_money().unwrap(),
                d => d.to_money().unwrap(),
            };
            let multi_jump = jumps > 1;
            let (out, note) = match build(&x_lo, &x_hi)? {
                Some(out) => (out, String::new()),
                // Re-valuing the mover at the bracket edge can absorb the
                // gain; the original witness stands in that case.
                None => (w.clone(), "bracket not beneficial after re-valuing; kept input".into()),
            };
            let record = StageRecord::LocalizeJump {
                mode: "grid".into(),
                samples,
                bracket: (x_lo, x_hi),
                eps,
                iterations: 0,
                multi_jump,
                note,
            };
            Ok((out, record))
        }
        LocalizeMode::Bisect { max_iters } => {
            let mut lo = from.clone();
            let mut hi = to.clone();
            let g_lo0 = g(&lo)?;
            let g_hi0 = g(&hi)?;
            let mut target = &g_hi0 - &g_lo0;
            if !target.is_positive() {
                return Err(ReductionError::InternalConsistency {
                    stage: "localize-jump".into(),
                    detail: "witness delta not visible in the mover's value function".into(),
                });
            }
            let mut multi_jump = false;
            let mut iterations = 0u32;
            let width = |lo: &Money, hi: &Money| -> Money {
                match &*hi - &*lo {
                    d if d.is_negative() => (lo - hi).to_money().unwrap(),
                    d => d.to_money().unwrap(),
                }
            };
            while iterations < max_iters {
                if let Some(t) = &eps_target {
                    if width(&lo, &hi) < *t {
                        break;
                    }
                }
                let mid = Money::midpoint(&lo, &hi);
                if mid == lo || mid == hi {
                    break;
                }
                let g_lo = g(&lo)?;
                let g_mid = g(&mid)?;
                let g_hi = g(&hi)?;
                let d_low = &g_mid - &g_lo;
                let d_high = &g_hi - &g_mid;
                if d_high >= target {
                    lo = mid;
                } else if d_low >= target {
                    hi = mid;
                } else {
                    // The gain splits across both halves: more than one jump.
                    multi_jump = true;
                    if d_high >= d_low {
                        target = d_high;
                        lo = mid;
                    } else {
                        target = d_low;
                        hi = mid;
                    }
                    if !target.is_positive() {
                        return Err(ReductionError::InternalConsistency {
                            stage: "localize-jump".into(),
                            detail: "bisection lost the positive step".into(),
                        });
                    }
                }
                iterations += 1;
            }
            let eps = width(&lo, &hi);
            let (out, note) = match build(&lo, &hi)? {
                Some(out) => (out, String::new()),
                None => (w.clone(), "bracket not beneficial after re-valuing; kept input".into()),
            };
            let record = StageRecord::LocalizeJump {
                mode: "bisect".into(),
                samples: vec![(lo.clone(), g(&lo)?), (hi.clone(), g(&hi)?)],
                bracket: (lo, hi),
                eps,
                iterations,
                multi_jump,
                note,
            };
            Ok((out, record))
        }
    }
}

fn single_mover_of(w: &Witness) -> Option<usize> {
    let a = w.setting_a.bids().bids();
    let b = w.setting_b.bids().bids();
    let movers: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
    match movers[..] {
        [i] => Some(i),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Stage 6: one beneficiary
// ---------------------------------------------------------------------------

/// Shrinks a single-mover coalition to the mover plus its best-gaining
/// beneficiary. Tries the straightforward pair first, then the mover alone in
/// both directions and every other pairing before reporting failure with the
/// full gains table.
pub fn isolate_beneficiary(
    mech: &dyn Mechanism,
    w: &Witness,
) -> Result<(Result<Witness, ReductionFailure>, StageRecord), ReductionError> {
    let mover = single_mover_of(w).ok_or_else(|| ReductionError::InternalConsistency {
        stage: "isolate-beneficiary".into(),
        detail: "witness is not single-mover".into(),
    })?;
    let a_bids = w.setting_a.bids().bids().to_vec();
    let b_bids = w.setting_b.bids().bids().to_vec();

    let out_a = mech.evaluate(w.setting_a.bids())?;
    let out_b = mech.evaluate(w.setting_b.bids())?;
    let mut gains: Vec<(usize, SignedMoney)> = Vec::new();
    for &j in &w.contract.coalition {
        if j == mover {
            continue;
        }
        let gain = &bidder_utility_from(&out_b, j, &a_bids[j])
            - &bidder_utility_from(&out_a, j, &a_bids[j]);
        gains.push((j, gain));
    }
    gains.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));

    if gains.is_empty() {
        // Already miner plus one bidder.
        let record = StageRecord::IsolateBeneficiary {
            mover,
            gains,
            chosen: "mover-only (coalition already minimal)".into(),
            pair_delta: w.delta.clone(),
        };
        return Ok((Ok(w.clone()), record));
    }

    let try_coalition = |members: &[usize]| -> Result<Option<Witness>, ReductionError> {
        let coalition: BTreeSet<usize> = members.iter().copied().collect();
        let new_bids: BTreeMap<usize, Money> = if coalition.contains(&mover) {
            [(mover, b_bids[mover].clone())].into_iter().collect()
        } else {
            return Ok(None);
        };
        let contract = SideContract::passive(coalition, new_bids);
        Ok(Witness::build(mech, Setting::honest(a_bids.clone()), contract)?)
    };

    let mut candidates: Vec<Vec<usize>> = Vec::new();
    candidates.push(vec![mover, gains[0].0]);
    candidates.push(vec![mover]);
    for (j, _) in gains.iter().skip(1) {
        candidates.push(vec![mover, *j]);
    }

    for cand in &candidates {
        if let Some(out) = try_coalition(cand)? {
            let chosen = format!("{cand:?}");
            let record = StageRecord::IsolateBeneficiary {
                mover,
                gains,
                chosen,
                pair_delta: out.delta.clone(),
            };
            return Ok((Ok(out), record));
        }
    }

    // Reversed move: the post-collusion bids as the honest world, the mover
    // returning to its original bid.
    let reversed = SideContract::passive(
        [mover].into_iter().collect(),
        [(mover, a_bids[mover].clone())].into_iter().collect(),
    );
    if let Some(out) = Witness::build(mech, Setting::honest(b_bids.clone()), reversed)? {
        let record = StageRecord::IsolateBeneficiary {
            mover,
            gains,
            chosen: "reversed mover-only".into(),
            pair_delta: out.delta.clone(),
        };
        return Ok((Ok(out), record));
    }

    let failure = ReductionFailure {
        stage: "isolate-beneficiary".into(),
        message: format!(
            "no pairing of the mover with a beneficiary is beneficial; gains: {}",
            gains
                .iter()
                .map(|(j, g)| format!("{j}:{g}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        pairs: vec![],
        guarantee_violations: vec![],
    };
    let record = StageRecord::IsolateBeneficiary {
        mover,
        gains,
        chosen: "none".into(),
        pair_delta: SignedMoney::zero(),
    };
    Ok((Err(failure), record))
}

// ---------------------------------------------------------------------------
// The full pipeline
// ---------------------------------------------------------------------------

/// Runs the whole reduction: active-to-passive, canonical ordering, the
/// decomposition, single-mover isolation, jump localization, and beneficiary
/// isolation. On grid mechanisms an exhaustive order-2 search backs the
/// pipeline when a stage fails on an input that genuinely involves more than
/// two bidders.
pub fn reduce_to_2sc(
    mech: &dyn Mechanism,
    w: &Witness,
    mode: LocalizeMode,
) -> Result<ReductionTrace, ReductionError> {
    verify_witness_detailed(mech, w).map_err(ReductionError::InputDoesNotVerify)?;

    let mut stages = Vec::new();
    let coalition: Vec<usize> = w.contract.coalition.iter().copied().collect();
    let joint_before = crate::utility::joint_utility(mech, &w.setting_a, &w.setting_a, &coalition)?;
    let joint_after = crate::utility::joint_utility(mech, &w.setting_b, &w.setting_a, &coalition)?;
    stages.push(StageRecord::Input {
        bids: w.setting_a.bids().bids().to_vec(),
        coalition,
        model: w.contract.model,
        joint_before,
        joint_after,
        delta: w.delta.clone(),
    });

    let finish = |witness: Witness,
                  mut stages: Vec<StageRecord>,
                  extra: Option<StageRecord>|
     -> Result<ReductionTrace, ReductionError> {
        if let Some(s) = extra {
            stages.push(s);
        }
        debug_assert!(witness.order() <= 2);
        debug_assert!(verify_witness(mech, &witness));
        Ok(ReductionTrace {
            input: w.clone(),
            stages,
            outcome: ReductionOutcome::Reduced { witness },
        })
    };

    let fail = |failure: ReductionFailure,
                stages: Vec<StageRecord>|
     -> Result<ReductionTrace, ReductionError> {
        // The input itself already satisfies the size bound: keep it.
        let outcome = if w.order() <= 2 {
            ReductionOutcome::PassThrough {
                witness: w.clone(),
                failure,
            }
        } else if let Some(rescued) = grid_fallback(mech)? {
            return finish(
                rescued,
                stages,
                Some(StageRecord::ExhaustiveFallback {
                    found: true,
                    note: "stage failed; exhaustive order-2 search over the declared grid \
                           found an independent witness"
                        .into(),
                }),
            );
        } else {
            ReductionOutcome::Failed { failure }
        };
        Ok(ReductionTrace {
            input: w.clone(),
            stages,
            outcome,
        })
    };

    // Stage: active-to-passive.
    let (w1, rec) = activize_to_passive(mech, w)?;
    stages.push(rec);
    if w1.order() <= 1 {
        return finish(w1, stages, None);
    }
    if w1.contract.model == MinerModel::Active {
        return Err(ReductionError::InternalConsistency {
            stage: "activize".into(),
            detail: "multi-bidder output still active".into(),
        });
    }

    // Stage: canonical ordering.
    let (canon, rec) = canonicalize(mech, &w1)?;
    stages.push(rec);
    let Some(w2) = canon else {
        let failure = ReductionFailure {
            stage: "canonicalize".into(),
            message: "order-preserving reassignment of the coalition's bids is not \
                      beneficial; highest-bids confirmation fails here"
                .into(),
            pairs: vec![],
            guarantee_violations: vec![],
        };
        return fail(failure, stages);
    };

    // Stage: decomposition.
    let d = salsa_decompose(mech, &w2)?;
    stages.push(StageRecord::Decompose {
        steps: d.steps.clone(),
        classes: d.classes.clone(),
        guarantees: d.guarantees.clone(),
        order_maintained: d.order_maintained.clone(),
        side_conditions: d.side_conditions.clone(),
    });

    // Stage: single mover.
    let (iso, rec) = isolate_single_mover(mech, &d)?;
    stages.push(rec);
    let w3 = match iso {
        Ok(w3) => w3,
        Err(failure) => return fail(failure, stages),
    };

    // Stage: localization. For small coalitions the separation bound
    // eps < delta / (2|C| + 1) fixes the bisection target.
    let eps_target = ratio(
        &w3.delta,
        &scale(&SignedMoney::from_int(1), 2 * w3.order() as i64 + 1),
    )
    .to_money();
    let (w4, rec) = localize_jump(mech, &w3, mode, eps_target)?;
    stages.push(rec);

    // Stage: one beneficiary.
    let (ben, rec) = isolate_beneficiary(mech, &w4)?;
    stages.push(rec);
    match ben {
        Ok(w5) => finish(w5, stages, None),
        Err(failure) => fail(failure, stages),
    }
}

/// Exhaustive passive order-2 search over the mechanism's own grid, used as
/// the completeness backstop for tabulated mechanisms.
fn grid_fallback(mech: &dyn Mechanism) -> Result<Option<Witness>, ReductionError> {
    let Domain::Grid(values) = mech.domain() else {
        return Ok(None);
    };
    let Some(n) = mech.arity() else {
        return Ok(None);
    };
    match find_c_sc(
        mech,
        &values,
        n,
        2,
        MinerModel::Passive,
        &SearchLimits::default(),
    )
    .map_err(ReductionError::Mech)?
    {
        SearchOutcome::Found(w) => Ok(Some(w)),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::apply_contract;
    use crate::zoo;

    fn money(s: &str) -> Money {
        s.parse().unwrap()
    }

    fn values(xs: &[&str]) -> Vec<Money> {
        xs.iter().map(|s| money(s)).collect()
    }

    fn example_witness(mech: &dyn Mechanism) -> Witness {
        let a = Setting::honest(values(&["10", "1"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("9")), (1, money("8"))].into_iter().collect(),
        );
        Witness::build(mech, a, sc).unwrap().unwrap()
    }

    #[test]
    fn canonicalize_sort_matches_bids() {
        // Starting bids (5, 3), ending bids (4, 6): reassigned so 5 -> 6
        // and 3 -> 4.
        let mech = zoo::fully_burned_posted_price(money("1"));
        let a = Setting::honest(values(&["5", "3"]));
        let sc = SideContract::passive(
            [0usize, 1].into_iter().collect(),
            [(0, money("4")), (1, money("6"))].into_iter().collect(),
        );
        // Not beneficial against posted price, so probe via the assignment
        // record rather than a built witness.
        let w = Witness {
            setting_b: apply_contract(&a, &sc).unwrap(),
            contract: sc,
            setting_a: a,
            delta: SignedMoney::from_int(1), // placeholder; bypassed below
        };
        let (_, rec) = canonicalize(mech.as_ref(), &w).unwrap();
        let StageRecord::Canonicalize { assignment, .. } = rec else {
            panic!()
        };
        assert_eq!(
            assignment,
            vec![(0, money("6")), (1, money("4"))]
        );
    }

    #[test]
    fn decomposition_orders_phases_correctly() {
        // Movers: 0 raises 5->7 (confirmed in B), 1 lowers 6->2,
        // 2 raises 3->4 but ends unconfirmed.
        let mech = zoo::fully_burned_posted_price(money("5"));
        let a = Setting::honest(values(&["5", "6", "3"]));
        let sc = SideContract::passive(
            [0usize, 1, 2].into_iter().collect(),
            [(0, money("7")), (1, money("2")), (2, money("4"))]
                .into_iter()
                .collect(),
        );
        let b = apply_contract(&a, &sc).unwrap();
        let w = Witness {
            contract: sc,
            setting_a: a,
            setting_b: b,
            delta: SignedMoney::from_int(1),
        };
        let d = salsa_decompose(mech.as_ref(), &w).unwrap();
        let seq: Vec<Vec<Money>> = vec![
            values(&["5", "6", "3"]),
            values(&["7", "6", "3"]),
            values(&["7", "2", "3"]),
            values(&["7", "2", "4"]),
        ];
        assert_eq!(d.steps, seq);
        assert_eq!(d.classes.raise_confirmed, vec![0]);
        assert_eq!(d.classes.lower_unconfirmed, vec![1]);
        assert_eq!(d.classes.raise_unconfirmed, vec![2]);
        assert!(d.guarantees.iter().all(|g| g.holds));
    }

    #[test]
    fn identity_witness_decomposes_to_a_single_step() {
        let mech = zoo::fully_burned_posted_price(money("1"));
        let a = Setting::honest(values(&["2", "1"]));
        let sc = SideContract::passive([0usize].into_iter().collect(), BTreeMap::new());
        let b = apply_contract(&a, &sc).unwrap();
        let w = Witness {
            contract: sc,
            setting_a: a,
            setting_b: b,
            delta: SignedMoney::from_int(1),
        };
        let d = salsa_decompose(mech.as_ref(), &w).unwrap();
        assert_eq!(d.steps.len(), 1);
        assert!(d.movers.is_empty());
    }

    #[test]
    fn counterexample_reduction_fails_with_all_four_candidate_moves() {
        let mech = zoo::salsa_counterexample();
        let w = example_witness(mech.as_ref());
        let trace = reduce_to_2sc(mech.as_ref(), &w, LocalizeMode::Bisect { max_iters: 16 })
            .unwrap();
        let failure = trace.failure().expect("isolation must fail");
        assert_eq!(failure.stage, "isolate-single-mover");

        let find = |from: &[&str], to: &[&str]| -> &PairEval {
            let (f, t) = (values(from), values(to));
            failure
                .pairs
                .iter()
                .find(|p| p.from == f && p.to == t)
                .unwrap_or_else(|| panic!("missing pair {from:?} -> {to:?}"))
        };
        // The four single-move candidates and their joint utilities.
        assert_eq!(find(&["10", "1"], &["9", "1"]).joint_from, SignedMoney::zero());
        assert_eq!(find(&["10", "1"], &["9", "1"]).joint_to, SignedMoney::zero());
        assert_eq!(find(&["9", "1"], &["9", "8"]).joint_from, SignedMoney::zero());
        assert_eq!(find(&["9", "1"], &["9", "8"]).joint_to, SignedMoney::zero());
        assert_eq!(
            find(&["10", "1"], &["10", "8"]).joint_to,
            SignedMoney::from_int(-2)
        );
        assert_eq!(
            find(&["10", "8"], &["9", "8"]).joint_from,
            SignedMoney::from_int(5)
        );
        assert_eq!(
            find(&["10", "8"], &["9", "8"]).joint_to,
            SignedMoney::from_int(1)
        );
        // Two-party input passes through as its own output.
        assert!(matches!(
            trace.outcome,
            ReductionOutcome::PassThrough { .. }
        ));
        assert!(verify_witness(mech.as_ref(), trace.reduced_witness().unwrap()));
    }

    #[test]
    fn telescoping_residual_is_exactly_zero_on_the_counterexample() {
        let mech = zoo::salsa_counterexample();
        let w = example_witness(mech.as_ref());
        let d = salsa_decompose(mech.as_ref(), &w).unwrap();
        assert!(telescoping_residual(mech.as_ref(), &d).unwrap().is_zero());
    }

    #[test]
    fn second_price_active_witness_reduces_to_one_bidder() {
        let g = values(&["0", "1", "2", "3"]);
        let mech = zoo::fully_burned_second_price();
        let out = find_c_sc(
            mech.as_ref(),
            &g,
            2,
            1,
            MinerModel::Active,
            &SearchLimits::default(),
        )
        .unwrap();
        let SearchOutcome::Found(w) = out else {
            panic!("expected active witness")
        };
        let trace =
            reduce_to_2sc(mech.as_ref(), &w, LocalizeMode::Bisect { max_iters: 32 }).unwrap();
        let small = trace.reduced_witness().expect("reduction must succeed");
        assert!(small.order() <= 1);
        assert!(verify_witness(mech.as_ref(), small));
    }

    #[test]
    fn fake_bid_becomes_zero_value_colluder_with_same_delta() {
        // Active witness with one fake bid against the counterexample
        // auction: bidder 0 drops to 9 while the miner fakes a losing 8,
        // unlocking confirmation at pay-as-bid for a joint gain of 1.
        let mech = zoo::salsa_counterexample();
        let a = Setting::honest(values(&["10"]));
        let sc = SideContract {
            model: MinerModel::Active,
            coalition: [0usize].into_iter().collect(),
            new_bids: [(0usize, money("9"))].into_iter().collect(),
            omitted: BTreeSet::new(),
            fakes: vec![money("8")],
        };
        let w = Witness::build(mech.as_ref(), a, sc).unwrap().unwrap();
        assert_eq!(w.delta, SignedMoney::from_int(1));
        let (p, rec) = activize_to_passive(mech.as_ref(), &w).unwrap();
        let StageRecord::Activize { branch, .. } = &rec else {
            panic!()
        };
        assert!(branch.contains("fakes-to-zero-value-colluders"), "{branch}");
        assert_eq!(p.contract.model, MinerModel::Passive);
        assert_eq!(p.delta, w.delta);
        assert_eq!(p.order(), 2);
        assert!(verify_witness(mech.as_ref(), &p));
    }

    #[test]
    fn passive_input_passes_activize_unchanged() {
        let mech = zoo::salsa_counterexample();
        let w = example_witness(mech.as_ref());
        let (p, _) = activize_to_passive(mech.as_ref(), &w).unwrap();
        assert_eq!(p, w);
    }

    #[test]
    fn bisection_brackets_a_single_jump() {
        // Posted price at 1: a bidder raising 0 -> 2 with an outside
        // beneficiary is not beneficial here, so craft the jump directly:
        // coalition {0,1}, mover 1 raises 0 -> 2, bidder 0 fixed at 2.
        // Joint value jumps where the mover crosses the posted price.
        let mech = zoo::fully_burned_posted_price(money("1"));
        let a = Setting::honest(values(&["2", "0"]));
        let sc = SideContract::passive(
            [1usize].into_iter().collect(),
            [(1, money("2"))].into_iter().collect(),
        );
        // Mover's own value is 0, so this is NOT beneficial; bisection is
        // exercised through its g probe instead.
        assert!(Witness::build(mech.as_ref(), a, sc).unwrap().is_none());

        // A genuinely beneficial single-mover witness: first price discounted
        // payment lets a losing bidder hand the win back at a profit.
        let mech = zoo::first_price_discounted(money("1"), money("1/2"));
        let a = Setting::honest(values(&["3/2", "5/4"]));
        let sc = SideContract::passive(
            [1usize].into_iter().collect(),
            [(1, money("6"))].into_iter().collect(),
        );
        let w = Witness::build(mech.as_ref(), a, sc).unwrap().unwrap();
        let (narrow, rec) = localize_jump(
            mech.as_ref(),
            &w,
            LocalizeMode::Bisect { max_iters: 24 },
            Some(money("1/1024")),
        )
        .unwrap();
        let StageRecord::LocalizeJump { eps, .. } = &rec else {
            panic!()
        };
        assert!(*eps < money("1/1024"));
        assert!(verify_witness(mech.as_ref(), &narrow));
    }
}
