//! Exhaustive side-contract search over discretized bid spaces.
//!
//! The search enumerates honest settings, coalitions, replacement bids, and
//! (with an active miner) omission subsets and fake-bid multisets, in a fixed
//! lexicographic order, and returns the first strictly beneficial contract.
//! A `Holds` verdict is only ever issued after exhaustive enumeration; when a
//! candidate budget is configured and would be exceeded, the result is an
//! explicit `Truncated`, never a silent `None`.
//!
//! The outer loop over honest settings partitions across workers; the first
//! witness in iterator order wins, so output is schedule-independent.

use crate::contract::{
    verify_witness, MinerModel, SideContract, Witness,
};
use crate::error::MechError;
use crate::mechanism::{BidVector, Domain, Mechanism, Outcome, Setting};
use crate::money::{Money, SignedMoney};
use crate::tabulated::decode_profile;
use crate::utility::{bidder_utility_from, miner_utility_from};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Resource bounds for a search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SearchLimits {
    /// Maximum number of fake bids per contract (active model). Fake bids
    /// reduce to zero-value colluders, so a small budget loses no generality.
    pub fake_limit: usize,
    /// Refuse searches whose candidate count exceeds this bound.
    pub max_candidates: Option<u64>,
    /// Only consider coalitions of at least this size.
    pub min_coalition: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            fake_limit: 2,
            max_candidates: None,
            min_coalition: 0,
        }
    }
}

/// Result of a side-contract search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SearchOutcome {
    Found(Witness),
    NoneFound,
    Truncated(String),
}

/// Tri-state robustness verdict on a grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ScpVerdict {
    Holds,
    Refuted(Witness),
    Truncated(String),
}

impl ScpVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ScpVerdict::Holds)
    }

    pub fn refuted(&self) -> Option<&Witness> {
        match self {
            ScpVerdict::Refuted(w) => Some(w),
            _ => None,
        }
    }
}

/// All subsets of `0..n` of size at most `max_size`, in tuple-lexicographic
/// order: (), (0), (0,1), (0,1,2), (0,2), (1), ...
fn subsets_lex(n: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut stack: Vec<Vec<usize>> = (0..n).rev().map(|i| vec![i]).collect();
    while let Some(s) = stack.pop() {
        if s.len() <= max_size {
            let last = *s.last().unwrap();
            for next in ((last + 1)..n).rev() {
                let mut child = s.clone();
                child.push(next);
                stack.push(child);
            }
            out.push(s);
        }
    }
    out
}

/// Non-decreasing index tuples of each size up to `max_size`: the fake-bid
/// multisets over the grid, in lexicographic order, sizes interleaved by the
/// tuple ordering (smaller tuples first when prefixes).
fn multisets_lex(k: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut stack: Vec<Vec<usize>> = (0..k).rev().map(|i| vec![i]).collect();
    while let Some(s) = stack.pop() {
        if s.len() <= max_size {
            let last = *s.last().unwrap();
            for next in (last..k).rev() {
                let mut child = s.clone();
                child.push(next);
                stack.push(child);
            }
            out.push(s);
        }
    }
    out
}

struct Row {
    out: Outcome,
    /// Sum of pay minus burn over all slots (the passive miner's utility).
    miner_net: SignedMoney,
}

struct SearchCtx<'a> {
    mech: &'a dyn Mechanism,
    grid: &'a [Money],
    n: usize,
    k: usize,
    /// `rows_by_fakes[f]` holds all profiles of length `n + f` (real bids
    /// first, fake bids appended), with the miner's utility computed for
    /// `n` real bidders.
    rows_by_fakes: Vec<Vec<Row>>,
    coalitions: Vec<Vec<usize>>,
    fake_multisets: Vec<Vec<usize>>,
    omission_sets: Vec<Vec<usize>>,
    zero_index: Option<usize>,
    model: MinerModel,
}

impl<'a> SearchCtx<'a> {
    fn row(&self, profile: &[usize]) -> &Row {
        &self.rows_by_fakes[0][crate::tabulated::encode_profile(profile, self.k)]
    }

    fn row_with_fakes(&self, profile: &[usize], fakes: &[usize]) -> &Row {
        let mut code = crate::tabulated::encode_profile(profile, self.k);
        for &f in fakes {
            code = code * self.k + f;
        }
        &self.rows_by_fakes[fakes.len()][code]
    }

    fn bids_of(&self, profile: &[usize]) -> Vec<Money> {
        profile.iter().map(|&i| self.grid[i].clone()).collect()
    }
}

/// Searches for a beneficial side contract of the miner and at most `c`
/// bidders over honest settings drawn from `grid^n`.
///
/// Fake bids are only enumerated for mechanisms defined at every bidder
/// count; omissions are only enumerated when bid 0 is evaluable (always, for
/// continuous mechanisms; for grid mechanisms, when 0 is a grid value).
pub fn find_c_sc(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
    c: usize,
    model: MinerModel,
    limits: &SearchLimits,
) -> Result<SearchOutcome, MechError> {
    assert!(n >= 1, "need at least one bidder");
    assert!(!grid.is_empty(), "empty grid");
    let k = grid.len();
    let total = k.pow(n as u32) as u64;

    let c = c.min(n);
    let min_c = limits.min_coalition;
    let coalitions: Vec<Vec<usize>> = subsets_lex(n, c)
        .into_iter()
        .filter(|s| {
            s.len() >= min_c && (model == MinerModel::Active || !s.is_empty())
        })
        .collect();

    let fakes_available = model == MinerModel::Active && mech.arity().is_none();
    let fake_multisets = if fakes_available {
        multisets_lex(k, limits.fake_limit)
    } else {
        vec![vec![]]
    };

    let zero_index = grid.iter().position(Money::is_zero);
    let omissions_available = model == MinerModel::Active
        && (zero_index.is_some() || matches!(mech.domain(), Domain::Continuous));
    let omission_sets = if omissions_available {
        subsets_lex(n, n)
    } else {
        vec![vec![]]
    };

    if let Some(budget) = limits.max_candidates {
        // Conservative upper bound on the enumeration size.
        let per_a: u64 = coalitions
            .iter()
            .map(|s| (k as u64).pow(s.len() as u32))
            .sum::<u64>()
            .saturating_mul(omission_sets.len() as u64)
            .saturating_mul(fake_multisets.len() as u64);
        let bound = total.saturating_mul(per_a);
        if bound > budget {
            return Ok(SearchOutcome::Truncated(format!(
                "candidate bound {bound} exceeds budget {budget}; verdict withheld"
            )));
        }
    }

    let max_fakes = if fakes_available { limits.fake_limit } else { 0 };
    let mut rows_by_fakes = Vec::with_capacity(max_fakes + 1);
    for f in 0..=max_fakes {
        rows_by_fakes.push(build_rows(mech, grid, n, f)?);
    }
    let ctx = SearchCtx {
        mech,
        grid,
        n,
        k,
        rows_by_fakes,
        coalitions,
        fake_multisets,
        omission_sets,
        zero_index,
        model,
    };

    let found = (0..total as usize)
        .into_par_iter()
        .find_map_first(|code| scan_baseline(&ctx, code).transpose())
        .transpose()?;

    Ok(match found {
        Some(w) => {
            debug_assert!(verify_witness(mech, &w));
            SearchOutcome::Found(w)
        }
        None => SearchOutcome::NoneFound,
    })
}

/// Evaluates every profile of length `n_real + fakes` over the grid; the
/// miner utility treats the last `fakes` slots as the miner's own bids.
fn build_rows(
    mech: &dyn Mechanism,
    grid: &[Money],
    n_real: usize,
    fakes: usize,
) -> Result<Vec<Row>, MechError> {
    let k = grid.len();
    let len = n_real + fakes;
    let total = k.pow(len as u32);
    let mut rows = Vec::with_capacity(total);
    for code in 0..total {
        let profile = decode_profile(code, k, len);
        let bids = BidVector::new(profile.iter().map(|&i| grid[i].clone()).collect());
        let out = mech.evaluate(&bids)?;
        let miner_net = miner_utility_from(&out, n_real);
        rows.push(Row { out, miner_net });
    }
    Ok(rows)
}

/// Scans every contract for one honest baseline; returns the first witness.
fn scan_baseline(ctx: &SearchCtx<'_>, code: usize) -> Result<Option<Witness>, MechError> {
    let a_profile = decode_profile(code, ctx.k, ctx.n);
    let a_bids = ctx.bids_of(&a_profile);

    for coalition in &ctx.coalitions {
        // Joint utility of the honest baseline for this coalition.
        let a_row = ctx.row(&a_profile);
        let mut base = a_row.miner_net.clone();
        for &i in coalition {
            base += &bidder_utility_from(&a_row.out, i, &a_bids[i]);
        }

        let m = coalition.len();
        let assignments = (ctx.k as u64).pow(m as u32);
        for asg_code in 0..assignments {
            let mut asg = vec![0usize; m];
            let mut rem = asg_code;
            for slot in (0..m).rev() {
                asg[slot] = (rem % ctx.k as u64) as usize;
                rem /= ctx.k as u64;
            }
            let identity_asg = (0..m).all(|j| asg[j] == a_profile[coalition[j]]);

            let mut b_profile = a_profile.clone();
            for (j, &i) in coalition.iter().enumerate() {
                b_profile[i] = asg[j];
            }

            for omission in &ctx.omission_sets {
                // Omitting an already-zero bid is a no-op; skip duplicates.
                let feasible = omission.iter().all(|&i| match ctx.zero_index {
                    Some(z) => b_profile[i] != z,
                    None => !ctx.grid[b_profile[i]].is_zero(),
                });
                if !feasible {
                    continue;
                }
                for fakes in &ctx.fake_multisets {
                    if identity_asg && omission.is_empty() && fakes.is_empty() {
                        continue;
                    }
                    if let Some(w) = try_candidate(
                        ctx,
                        &a_profile,
                        &a_bids,
                        &base,
                        coalition,
                        &asg,
                        omission,
                        fakes,
                    )? {
                        return Ok(Some(w));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn try_candidate(
    ctx: &SearchCtx<'_>,
    a_profile: &[usize],
    a_bids: &[Money],
    base: &SignedMoney,
    coalition: &[usize],
    asg: &[usize],
    omission: &[usize],
    fakes: &[usize],
) -> Result<Option<Witness>, MechError> {
    let n = ctx.n;
    let mut b_profile: Vec<usize> = a_profile.to_vec();
    for (j, &i) in coalition.iter().enumerate() {
        b_profile[i] = asg[j];
    }

    // Fast path: the omitted slots map onto a grid zero, so the candidate is
    // a precomputed row (fake bids are appended grid values, also cached).
    let joint = if omission.is_empty() || ctx.zero_index.is_some() {
        for &i in omission {
            b_profile[i] = ctx.zero_index.unwrap();
        }
        let row = ctx.row_with_fakes(&b_profile, fakes);
        let mut joint = row.miner_net.clone();
        for &i in coalition {
            joint += &bidder_utility_from(&row.out, i, &a_bids[i]);
        }
        joint
    } else {
        // Continuous mechanism without a grid zero: evaluate directly.
        let mut bids: Vec<Money> = b_profile.iter().map(|&i| ctx.grid[i].clone()).collect();
        for &i in omission {
            bids[i] = Money::zero();
        }
        for &f in fakes {
            bids.push(ctx.grid[f].clone());
        }
        let out = ctx.mech.evaluate(&BidVector::new(bids))?;
        let mut joint = miner_utility_from(&out, n);
        for &i in coalition {
            joint += &bidder_utility_from(&out, i, &a_bids[i]);
        }
        joint
    };

    if joint <= *base {
        return Ok(None);
    }

    // Strictly beneficial: materialize and verify the witness.
    let contract = SideContract {
        model: ctx.model,
        coalition: coalition.iter().copied().collect(),
        new_bids: coalition
            .iter()
            .enumerate()
            .filter(|(j, &i)| asg[*j] != a_profile[i])
            .map(|(j, &i)| (i, ctx.grid[asg[j]].clone()))
            .collect(),
        omitted: omission.iter().copied().collect(),
        fakes: fakes.iter().map(|&f| ctx.grid[f].clone()).collect(),
    };
    let baseline = Setting::honest(a_bids.to_vec());
    let w = Witness::build(ctx.mech, baseline, contract)
        .map_err(|e| MechError::MalformedSetting(e.to_string()))?
        .expect("joint > base implies a positive delta");
    Ok(Some(w))
}

/// Thin tri-state wrapper over [`find_c_sc`].
pub fn is_c_scp_on_grid(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
    c: usize,
    model: MinerModel,
    limits: &SearchLimits,
) -> Result<ScpVerdict, MechError> {
    Ok(match find_c_sc(mech, grid, n, c, model, limits)? {
        SearchOutcome::Found(w) => ScpVerdict::Refuted(w),
        SearchOutcome::NoneFound => ScpVerdict::Holds,
        SearchOutcome::Truncated(why) => ScpVerdict::Truncated(why),
    })
}

/// Convenience: a contract and its delta for a manually specified deviation,
/// wrapped as (unverified) search input for diagnostics.
pub fn delta_of(
    mech: &dyn Mechanism,
    honest: &[Money],
    contract: &SideContract,
) -> Result<SignedMoney, MechError> {
    let baseline = Setting::honest(honest.to_vec());
    crate::contract::joint_utility_delta(mech, &baseline, contract)
        .map_err(|e| MechError::MalformedSetting(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;

    fn grid(xs: &[&str]) -> Vec<Money> {
        xs.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn subset_order_is_tuple_lexicographic() {
        let subs = subsets_lex(3, 3);
        let expect: Vec<Vec<usize>> = vec![
            vec![],
            vec![0],
            vec![0, 1],
            vec![0, 1, 2],
            vec![0, 2],
            vec![1],
            vec![1, 2],
            vec![2],
        ];
        assert_eq!(subs, expect);
    }

    #[test]
    fn multiset_order_is_lexicographic() {
        let ms = multisets_lex(2, 2);
        let expect: Vec<Vec<usize>> = vec![
            vec![],
            vec![0],
            vec![0, 0],
            vec![0, 1],
            vec![1],
            vec![1, 1],
        ];
        assert_eq!(ms, expect);
    }

    #[test]
    fn first_price_holds_passive_on_small_grid() {
        let g = grid(&["0", "1", "3/2", "2"]);
        let mech = zoo::first_price_burned_reserve("1".parse().unwrap());
        let v = is_c_scp_on_grid(
            mech.as_ref(),
            &g,
            3,
            3,
            MinerModel::Passive,
            &SearchLimits::default(),
        )
        .unwrap();
        assert!(v.holds(), "{v:?}");
    }

    #[test]
    fn counterexample_two_party_witness_is_the_known_one() {
        let g = grid(&["1", "8", "9", "10"]);
        let mech = zoo::salsa_counterexample();
        let out = find_c_sc(
            mech.as_ref(),
            &g,
            2,
            2,
            MinerModel::Passive,
            &SearchLimits::default(),
        )
        .unwrap();
        let SearchOutcome::Found(w) = out else {
            panic!("expected a witness, got {out:?}");
        };
        // Lexicographically first over the ascending grid: the mirror image
        // of the usual presentation, same gain of 1.
        assert_eq!(w.setting_a.bids().bids(), &grid(&["1", "10"])[..]);
        assert_eq!(w.setting_b.bids().bids(), &grid(&["8", "9"])[..]);
        assert_eq!(w.delta, SignedMoney::from_int(1));
    }

    #[test]
    fn second_price_passive_holds_but_active_omits_runner_up() {
        let g = grid(&["0", "1", "2", "3"]);
        let mech = zoo::fully_burned_second_price();
        for n in 2..=3 {
            let passive = is_c_scp_on_grid(
                mech.as_ref(),
                &g,
                n,
                1,
                MinerModel::Passive,
                &SearchLimits::default(),
            )
            .unwrap();
            assert!(passive.holds(), "n={n} {passive:?}");

            let active = is_c_scp_on_grid(
                mech.as_ref(),
                &g,
                n,
                1,
                MinerModel::Active,
                &SearchLimits::default(),
            )
            .unwrap();
            let w = active.refuted().expect("active model must be refuted");
            assert!(!w.contract.omitted.is_empty(), "witness should omit a bid");
        }
    }

    #[test]
    fn posted_price_holds_up_to_full_coalitions() {
        let g = grid(&["0", "1/2", "1", "2"]);
        let mech = zoo::fully_burned_posted_price("1".parse().unwrap());
        let v = is_c_scp_on_grid(
            mech.as_ref(),
            &g,
            3,
            3,
            MinerModel::Passive,
            &SearchLimits::default(),
        )
        .unwrap();
        assert!(v.holds());
    }

    #[test]
    fn budget_truncates_explicitly() {
        let g = grid(&["0", "1", "2", "3"]);
        let mech = zoo::fully_burned_second_price();
        let limits = SearchLimits {
            max_candidates: Some(10),
            ..Default::default()
        };
        let out = find_c_sc(mech.as_ref(), &g, 3, 3, MinerModel::Passive, &limits).unwrap();
        assert!(matches!(out, SearchOutcome::Truncated(_)));
    }

    #[test]
    fn monotone_in_coalition_size() {
        // A witness found at order 2 is still found at order 3.
        let g = grid(&["1", "8", "9", "10"]);
        let mech = zoo::salsa_counterexample();
        for c in 2..=3 {
            let out = find_c_sc(
                mech.as_ref(),
                &g,
                3,
                c,
                MinerModel::Passive,
                &SearchLimits::default(),
            )
            .unwrap();
            assert!(matches!(out, SearchOutcome::Found(_)), "c={c}");
        }
    }

    #[test]
    fn same_result_across_worker_counts() {
        let g = grid(&["1", "8", "9", "10"]);
        let mech = zoo::salsa_counterexample();
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                find_c_sc(
                    mech.as_ref(),
                    &g,
                    2,
                    2,
                    MinerModel::Passive,
                    &SearchLimits::default(),
                )
                .unwrap()
            })
        };
        let (a, b) = (run(1), run(8));
        match (a, b) {
            (SearchOutcome::Found(w1), SearchOutcome::Found(w2)) => assert_eq!(w1, w2),
            other => panic!("expected witnesses, got {other:?}"),
        }
    }
}
