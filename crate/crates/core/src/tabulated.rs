//! Tabulated mechanisms: finite-grid auctions stored as explicit outcome
//! tables, their JSON file format, and a seeded random generator used to
//! fuzz the reduction pipeline.

use crate::error::{MechError, TableError};
use crate::mechanism::{BidVector, Domain, MechRef, Mechanism, Outcome};
use crate::money::Money;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

/// Mixed-radix profile index helpers: profile `[i0, i1, ..]` over `k` values
/// encodes as `i0*k^(n-1) + i1*k^(n-2) + ..`, so row order matches
/// lexicographic profile order.
pub fn encode_profile(profile: &[usize], k: usize) -> usize {
    profile.iter().fold(0, |acc, &i| acc * k + i)
}

pub fn decode_profile(mut code: usize, k: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in (0..n).rev() {
        out[slot] = code % k;
        code /= k;
    }
    out
}

/// A finite-grid mechanism backed by a full outcome table.
///
/// Total over `values^n`: evaluation outside the declared grid or at a
/// different bidder count is an error, not a guess.
pub struct TabulatedMechanism {
    name: String,
    values: Vec<Money>,
    n: usize,
    rows: Vec<Outcome>,
    index: BTreeMap<Money, usize>,
}

impl TabulatedMechanism {
    pub fn new(
        name: String,
        values: Vec<Money>,
        n: usize,
        rows: Vec<Outcome>,
    ) -> Result<Self, TableError> {
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TableError::UnsortedValues);
        }
        let expected = values.len().pow(n as u32);
        if rows.len() != expected {
            return Err(TableError::NonTotal {
                expected,
                found: rows.len(),
            });
        }
        let index = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        Ok(TabulatedMechanism {
            name,
            values,
            n,
            rows,
            index,
        })
    }

    pub fn values(&self) -> &[Money] {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Outcome for a profile given as value indices.
    pub fn row(&self, profile: &[usize]) -> &Outcome {
        &self.rows[encode_profile(profile, self.values.len())]
    }
}

impl Mechanism for TabulatedMechanism {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn domain(&self) -> Domain {
        Domain::Grid(self.values.clone())
    }

    fn arity(&self) -> Option<usize> {
        Some(self.n)
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        if bids.len() != self.n {
            return Err(MechError::ArityMismatch {
                name: self.name.clone(),
                expected: self.n,
                got: bids.len(),
            });
        }
        let mut profile = Vec::with_capacity(self.n);
        for b in bids.iter() {
            match self.index.get(b) {
                Some(&i) => profile.push(i),
                None => {
                    return Err(MechError::OutOfGrid {
                        name: self.name.clone(),
                        bid: b.to_string(),
                    })
                }
            }
        }
        Ok(self.row(&profile).clone())
    }
}

#[derive(Serialize, Deserialize)]
struct TableRowFile {
    profile: Vec<usize>,
    confirm: Vec<u8>,
    pay: Vec<Money>,
    burn: Vec<Money>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    name: String,
    values: Vec<Money>,
    n: usize,
    table: Vec<TableRowFile>,
}

/// Loads a tabulated mechanism from its JSON file.
pub fn load_tabulated(path: &Path) -> Result<MechRef, TableError> {
    let text = std::fs::read_to_string(path)?;
    load_tabulated_str(&text)
}

/// Loads a tabulated mechanism from JSON text.
pub fn load_tabulated_str(text: &str) -> Result<MechRef, TableError> {
    let file: TableFile = serde_json::from_str(text)?;
    if file.values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TableError::UnsortedValues);
    }
    let k = file.values.len();
    let expected = k.pow(file.n as u32);
    if file.table.len() != expected {
        return Err(TableError::NonTotal {
            expected,
            found: file.table.len(),
        });
    }
    let mut rows: Vec<Option<Outcome>> = vec![None; expected];
    for row in &file.table {
        if row.profile.len() != file.n {
            return Err(TableError::BadRowWidth {
                profile: row.profile.clone(),
                field: "profile",
                got: row.profile.len(),
                expected: file.n,
            });
        }
        for &i in &row.profile {
            if i >= k {
                return Err(TableError::BadProfileIndex {
                    index: i,
                    values: k,
                });
            }
        }
        for (field, len) in [
            ("confirm", row.confirm.len()),
            ("pay", row.pay.len()),
            ("burn", row.burn.len()),
        ] {
            if len != file.n {
                return Err(TableError::BadRowWidth {
                    profile: row.profile.clone(),
                    field,
                    got: len,
                    expected: file.n,
                });
            }
        }
        let code = encode_profile(&row.profile, k);
        if rows[code].is_some() {
            return Err(TableError::DuplicateRow(row.profile.clone()));
        }
        rows[code] = Some(Outcome {
            confirmed: row.confirm.iter().map(|&c| c != 0).collect(),
            pay: row.pay.clone(),
            burn: row.burn.clone(),
        });
    }
    let rows: Vec<Outcome> = rows
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or(TableError::NonTotal {
            expected,
            found: file.table.len(),
        })?;
    let mech = TabulatedMechanism::new(file.name, file.values, file.n, rows)?;
    Ok(Arc::new(mech))
}

/// Tabulates any mechanism over `grid^n` and writes the JSON file.
pub fn save_tabulated(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
    path: &Path,
) -> Result<(), TableError> {
    let text = tabulate_to_string(mech, grid, n)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Tabulates any mechanism over `grid^n` as JSON text.
pub fn tabulate_to_string(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<String, TableError> {
    let tab = tabulate(mech, grid, n)?;
    let file = TableFile {
        name: tab.name.clone(),
        values: tab.values.clone(),
        n,
        table: (0..tab.rows.len())
            .map(|code| {
                let profile = decode_profile(code, grid.len(), n);
                let out = &tab.rows[code];
                TableRowFile {
                    profile,
                    confirm: out.confirmed.iter().map(|&c| c as u8).collect(),
                    pay: out.pay.clone(),
                    burn: out.burn.clone(),
                }
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file).expect("table serialization cannot fail"))
}

/// Materializes any mechanism into an in-memory table over `grid^n`.
pub fn tabulate(
    mech: &dyn Mechanism,
    grid: &[Money],
    n: usize,
) -> Result<TabulatedMechanism, TableError> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TableError::UnsortedValues);
    }
    let k = grid.len();
    let total = k.pow(n as u32);
    let mut rows = Vec::with_capacity(total);
    for code in 0..total {
        let profile = decode_profile(code, k, n);
        let bids = BidVector::new(profile.iter().map(|&i| grid[i].clone()).collect());
        let out = mech.evaluate(&bids).map_err(|e| {
            TableError::GenerationFailed {
                retries: 0,
                reason: format!("source mechanism failed at {profile:?}: {e}"),
            }
        })?;
        rows.push(out);
    }
    TabulatedMechanism::new(mech.name(), grid.to_vec(), n, rows)
}

/// Axioms the random generator can be asked to satisfy by construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenAxioms {
    pub individually_rational: bool,
    pub burn_balanced: bool,
    pub anonymous: bool,
    pub prefix_confirmation: bool,
    pub consistent_tie_breaking: bool,
}

impl GenAxioms {
    pub fn all() -> Self {
        GenAxioms {
            individually_rational: true,
            burn_balanced: true,
            anonymous: true,
            prefix_confirmation: true,
            consistent_tie_breaking: true,
        }
    }

    pub fn none() -> Self {
        GenAxioms {
            individually_rational: false,
            burn_balanced: false,
            anonymous: false,
            prefix_confirmation: false,
            consistent_tie_breaking: false,
        }
    }
}

const PAY_FRACTIONS: [(i64, i64); 5] = [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)];
const BURN_FRACTIONS: [(i64, i64); 4] = [(0, 1), (1, 4), (1, 2), (1, 1)];

/// Generates a random tabulated mechanism over `grid^n` satisfying the
/// requested axioms by construction. Deterministic in the seed.
///
/// With consistent tie-breaking requested, confirmation is an own-bid
/// threshold rule (the one shape that keeps other bidders' confirmations
/// independent of a mover), and only payments and burns are randomized.
/// Without it, the confirmed set may depend on the whole profile.
pub fn random_tabulated(
    grid: &[Money],
    n: usize,
    seed: u64,
    axioms: GenAxioms,
) -> Result<MechRef, TableError> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(TableError::UnsortedValues);
    }
    let k = grid.len();
    assert!(k >= 1 && n >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = k.pow(n as u32);

    // Threshold for the tie-breaking-safe confirmation family.
    let threshold = grid[rng.gen_range(0..k)].clone();

    // Per sorted profile, a confirmation pattern and per-rank pay/burn
    // fractions. Keying on the sorted profile makes the rule anonymous.
    let mut sorted_cache: BTreeMap<Vec<usize>, (Vec<bool>, Vec<(i64, i64)>, Vec<(i64, i64)>)> =
        BTreeMap::new();

    let mut rows = Vec::with_capacity(total);
    for code in 0..total {
        let profile = decode_profile(code, k, n);
        // Rank bidders by (value desc, index asc).
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| profile[b].cmp(&profile[a]).then(a.cmp(&b)));
        let mut sorted_profile: Vec<usize> = profile.clone();
        sorted_profile.sort_unstable_by(|a, b| b.cmp(a));

        let key: Vec<usize> = if axioms.anonymous {
            sorted_profile.clone()
        } else {
            profile.clone()
        };
        let (confirm_by_rank, pay_fracs, burn_fracs) =
            sorted_cache.entry(key).or_insert_with(|| {
                let confirm_by_rank: Vec<bool> = if axioms.consistent_tie_breaking {
                    sorted_profile
                        .iter()
                        .map(|&vi| grid[vi] >= threshold)
                        .collect()
                } else if axioms.prefix_confirmation {
                    let len = rng.gen_range(0..=n);
                    (0..n).map(|r| r < len).collect()
                } else {
                    (0..n).map(|_| rng.gen_bool(0.5)).collect()
                };
                let pay_fracs: Vec<(i64, i64)> = (0..n)
                    .map(|_| PAY_FRACTIONS[rng.gen_range(0..PAY_FRACTIONS.len())])
                    .collect();
                let burn_fracs: Vec<(i64, i64)> = (0..n)
                    .map(|_| BURN_FRACTIONS[rng.gen_range(0..BURN_FRACTIONS.len())])
                    .collect();
                (confirm_by_rank, pay_fracs, burn_fracs)
            });

        let mut out = Outcome::all_zero(n);
        for (rank, &bidder) in order.iter().enumerate() {
            if !confirm_by_rank[rank] {
                continue;
            }
            let bid = &grid[profile[bidder]];
            let (pn, pd) = pay_fracs[rank];
            let mut pay = bid * &Money::from_ratio(pn, pd);
            if !axioms.individually_rational && pn == 1 && pd == 1 {
                // Occasionally overcharge so the IR checker has something
                // to find.
                pay = &pay + &Money::from_ratio(1, 2);
            }
            let (bn, bd) = burn_fracs[rank];
            let mut burn = &pay * &Money::from_ratio(bn, bd);
            if !axioms.burn_balanced && bn == 1 && bd == 1 {
                burn = &burn + &Money::from_ratio(1, 2);
            }
            out.confirmed[bidder] = true;
            out.pay[bidder] = pay;
            out.burn[bidder] = burn;
        }
        rows.push(out);
    }

    let mech = TabulatedMechanism::new(
        format!("random-tabulated-{seed}"),
        grid.to_vec(),
        n,
        rows,
    )?;
    Ok(Arc::new(mech))
}
