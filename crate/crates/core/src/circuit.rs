//! Boolean-circuit-represented auctions, the order-2 robustness decision
//! problem over them, and the reduction from tautology checking.

use crate::contract::{MinerModel, SideContract, Witness};
use crate::error::{CircuitError, MechError};
use crate::mechanism::{BidVector, Domain, MechRef, Mechanism, Outcome, Setting};
use crate::money::{Money, SignedMoney};
use crate::tabulated::{decode_profile, TabulatedMechanism};
use crate::utility::{bidder_utility_from, miner_utility_from};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// One gate of a combinational circuit. Operands reference earlier gates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args")]
pub enum GateOp {
    #[serde(rename = "AND")]
    And(usize, usize),
    #[serde(rename = "OR")]
    Or(usize, usize),
    #[serde(rename = "NOT")]
    Not(usize),
    #[serde(rename = "CONST0")]
    Const0,
    #[serde(rename = "CONST1")]
    Const1,
    #[serde(rename = "INPUT")]
    Input(usize),
}

/// A gate-list DAG: topologically ordered gates over a fixed input width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoolCircuit {
    pub inputs: usize,
    pub gates: Vec<GateOp>,
    pub outputs: Vec<usize>,
}

impl BoolCircuit {
    pub fn validate(&self) -> Result<(), CircuitError> {
        for (g, op) in self.gates.iter().enumerate() {
            let check = |r: usize| -> Result<(), CircuitError> {
                if r >= g {
                    Err(CircuitError::ForwardReference { gate: g, reference: r })
                } else {
                    Ok(())
                }
            };
            match *op {
                GateOp::And(a, b) | GateOp::Or(a, b) => {
                    check(a)?;
                    check(b)?;
                }
                GateOp::Not(a) => check(a)?,
                GateOp::Input(i) => {
                    if i >= self.inputs {
                        return Err(CircuitError::BadInput {
                            gate: g,
                            input: i,
                            inputs: self.inputs,
                        });
                    }
                }
                GateOp::Const0 | GateOp::Const1 => {}
            }
        }
        for &o in &self.outputs {
            if o >= self.gates.len() {
                return Err(CircuitError::BadOutput {
                    reference: o,
                    wires: self.gates.len(),
                });
            }
        }
        Ok(())
    }
}

/// Gate-by-gate evaluation.
pub fn eval_circuit(c: &BoolCircuit, bits: &[bool]) -> Result<Vec<bool>, CircuitError> {
    if bits.len() != c.inputs {
        return Err(CircuitError::ArityMismatch {
            expected: c.inputs,
            got: bits.len(),
        });
    }
    let mut wires = Vec::with_capacity(c.gates.len());
    for op in &c.gates {
        let v = match *op {
            GateOp::And(a, b) => wires[a] && wires[b],
            GateOp::Or(a, b) => wires[a] || wires[b],
            GateOp::Not(a) => !wires[a],
            GateOp::Const0 => false,
            GateOp::Const1 => true,
            GateOp::Input(i) => bits[i],
        };
        wires.push(v);
    }
    Ok(c.outputs.iter().map(|&o| wires[o]).collect())
}

/// Enumeration bound for the brute-force tautology check.
const TAUTOLOGY_INPUT_CAP: usize = 20;

/// True iff every assignment makes every output 1.
pub fn is_tautology_bruteforce(c: &BoolCircuit) -> Result<bool, CircuitError> {
    if c.inputs > TAUTOLOGY_INPUT_CAP {
        return Err(CircuitError::TooManyInputs(c.inputs));
    }
    c.validate()?;
    let total = 1usize << c.inputs;
    for code in 0..total {
        let bits: Vec<bool> = (0..c.inputs).map(|i| (code >> (c.inputs - 1 - i)) & 1 == 1).collect();
        if eval_circuit(c, &bits)?.iter().any(|b| !b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Incremental circuit builder.
#[derive(Default)]
pub struct Builder {
    pub inputs: usize,
    pub gates: Vec<GateOp>,
}

impl Builder {
    pub fn new(inputs: usize) -> Self {
        Builder {
            inputs,
            gates: Vec::new(),
        }
    }

    fn push(&mut self, op: GateOp) -> usize {
        self.gates.push(op);
        self.gates.len() - 1
    }

    pub fn input(&mut self, i: usize) -> usize {
        assert!(i < self.inputs);
        self.push(GateOp::Input(i))
    }

    pub fn const0(&mut self) -> usize {
        self.push(GateOp::Const0)
    }

    pub fn const1(&mut self) -> usize {
        self.push(GateOp::Const1)
    }

    pub fn not(&mut self, a: usize) -> usize {
        self.push(GateOp::Not(a))
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.push(GateOp::And(a, b))
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.push(GateOp::Or(a, b))
    }

    pub fn and_all(&mut self, xs: &[usize]) -> usize {
        match xs {
            [] => self.const1(),
            [x] => *x,
            [x, rest @ ..] => {
                let mut acc = *x;
                for &y in rest {
                    acc = self.and(acc, y);
                }
                acc
            }
        }
    }

    pub fn or_all(&mut self, xs: &[usize]) -> usize {
        match xs {
            [] => self.const0(),
            [x] => *x,
            [x, rest @ ..] => {
                let mut acc = *x;
                for &y in rest {
                    acc = self.or(acc, y);
                }
                acc
            }
        }
    }

    /// Splices a sub-circuit in, with its inputs driven by existing wires.
    /// Returns the wires carrying the sub-circuit's outputs.
    pub fn embed(&mut self, sub: &BoolCircuit, input_wires: &[usize]) -> Vec<usize> {
        assert_eq!(input_wires.len(), sub.inputs);
        let mut map = Vec::with_capacity(sub.gates.len());
        for op in &sub.gates {
            let wire = match *op {
                GateOp::Input(i) => input_wires[i],
                GateOp::Const0 => self.const0(),
                GateOp::Const1 => self.const1(),
                GateOp::Not(a) => self.not(map[a]),
                GateOp::And(a, b) => self.and(map[a], map[b]),
                GateOp::Or(a, b) => self.or(map[a], map[b]),
            };
            map.push(wire);
        }
        sub.outputs.iter().map(|&o| map[o]).collect()
    }

    pub fn finish(self, outputs: Vec<usize>) -> BoolCircuit {
        BoolCircuit {
            inputs: self.inputs,
            gates: self.gates,
            outputs,
        }
    }
}

/// An auction whose confirmation, payment, and burn rules are circuits over
/// the bit-encoded bid profile.
///
/// Bidder `i`'s bits occupy positions `[i*w, (i+1)*w)` with the most
/// significant bit first, where `w = max(1, ceil(log2(k)))` for `k` declared
/// values. Decoded payments and burns index into the value list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircuitAuction {
    pub values: Vec<Money>,
    pub n: usize,
    pub confirm: Vec<BoolCircuit>,
    pub pay: Vec<BoolCircuit>,
    pub burn: Vec<BoolCircuit>,
}

pub fn bits_per_value(k: usize) -> usize {
    let mut w = 0;
    while (1usize << w) < k {
        w += 1;
    }
    w.max(1)
}

impl CircuitAuction {
    pub fn validate(&self) -> Result<(), CircuitError> {
        if self.values.is_empty() || self.n == 0 {
            return Err(CircuitError::Malformed("empty values or no bidders".into()));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CircuitError::Malformed(
                "values must be strictly ascending".into(),
            ));
        }
        let w = bits_per_value(self.values.len());
        let want_inputs = self.n * w;
        for (kind, list, outs) in [
            ("confirm", &self.confirm, 1),
            ("pay", &self.pay, w),
            ("burn", &self.burn, w),
        ] {
            if list.len() != self.n {
                return Err(CircuitError::Malformed(format!(
                    "{kind}: expected {} circuits, got {}",
                    self.n,
                    list.len()
                )));
            }
            for c in list.iter() {
                c.validate()?;
                if c.inputs != want_inputs {
                    return Err(CircuitError::Malformed(format!(
                        "{kind}: circuit takes {} bits, expected {want_inputs}",
                        c.inputs
                    )));
                }
                if c.outputs.len() != outs {
                    return Err(CircuitError::Malformed(format!(
                        "{kind}: circuit emits {} bits, expected {outs}",
                        c.outputs.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Profile (as value indices) to input bits.
    pub fn encode(&self, profile: &[usize]) -> Vec<bool> {
        let w = bits_per_value(self.values.len());
        let mut bits = Vec::with_capacity(self.n * w);
        for &v in profile {
            for b in (0..w).rev() {
                bits.push((v >> b) & 1 == 1);
            }
        }
        bits
    }

    /// Evaluates the circuits on a profile of value indices.
    pub fn outcome_at(&self, profile: &[usize]) -> Result<Outcome, CircuitError> {
        let bits = self.encode(profile);
        let k = self.values.len();
        let mut out = Outcome::all_zero(self.n);
        for i in 0..self.n {
            out.confirmed[i] = eval_circuit(&self.confirm[i], &bits)?[0];
            let decode = |c: &BoolCircuit| -> Result<usize, CircuitError> {
                let bits_out = eval_circuit(c, &bits)?;
                let mut idx = 0usize;
                for b in bits_out {
                    idx = (idx << 1) | (b as usize);
                }
                if idx >= k {
                    return Err(CircuitError::ValueIndexOutOfRange { index: idx, len: k });
                }
                Ok(idx)
            };
            out.pay[i] = self.values[decode(&self.pay[i])?].clone();
            out.burn[i] = self.values[decode(&self.burn[i])?].clone();
        }
        Ok(out)
    }
}

/// Adapter exposing a circuit auction as an ordinary grid mechanism,
/// evaluating the circuits on every call.
struct CircuitMechanism {
    auction: CircuitAuction,
    index: BTreeMap<Money, usize>,
}

impl Mechanism for CircuitMechanism {
    fn name(&self) -> String {
        "circuit-auction".into()
    }

    fn domain(&self) -> Domain {
        Domain::Grid(self.auction.values.clone())
    }

    fn arity(&self) -> Option<usize> {
        Some(self.auction.n)
    }

    fn evaluate(&self, bids: &BidVector) -> Result<Outcome, MechError> {
        if bids.len() != self.auction.n {
            return Err(MechError::ArityMismatch {
                name: self.name(),
                expected: self.auction.n,
                got: bids.len(),
            });
        }
        let mut profile = Vec::with_capacity(self.auction.n);
        for b in bids.iter() {
            match self.index.get(b) {
                Some(&i) => profile.push(i),
                None => {
                    return Err(MechError::OutOfGrid {
                        name: self.name(),
                        bid: b.to_string(),
                    })
                }
            }
        }
        self.auction
            .outcome_at(&profile)
            .map_err(|e| MechError::MalformedSetting(e.to_string()))
    }
}

/// Wraps the auction as a mechanism that evaluates circuits per call.
pub fn circuit_mechanism(ca: &CircuitAuction) -> Result<MechRef, CircuitError> {
    ca.validate()?;
    let index = ca
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    Ok(Arc::new(CircuitMechanism {
        auction: ca.clone(),
        index,
    }))
}

/// Materializes the full table by evaluating the circuits on every profile.
pub fn circuit_auction_to_mechanism(ca: &CircuitAuction) -> Result<MechRef, CircuitError> {
    ca.validate()?;
    let k = ca.values.len();
    let total = k.pow(ca.n as u32);
    let mut rows = Vec::with_capacity(total);
    for code in 0..total {
        let profile = decode_profile(code, k, ca.n);
        rows.push(ca.outcome_at(&profile)?);
    }
    let tab = TabulatedMechanism::new("circuit-auction".into(), ca.values.clone(), ca.n, rows)
        .map_err(|e| CircuitError::Malformed(e.to_string()))?;
    Ok(Arc::new(tab))
}

/// Encodes a finite-grid mechanism as lookup-table circuits, inverse to
/// [`circuit_auction_to_mechanism`] on its grid.
pub fn tabulated_to_circuits(
    mech: &dyn Mechanism,
    values: &[Money],
    n: usize,
) -> Result<CircuitAuction, CircuitError> {
    let k = values.len();
    let w = bits_per_value(k);
    let total = k.pow(n as u32);
    let value_index = |m: &Money| -> Result<usize, CircuitError> {
        values
            .iter()
            .position(|v| v == m)
            .ok_or_else(|| CircuitError::Malformed(format!("amount {m} is not a declared value")))
    };

    // Gather rows first.
    let mut rows = Vec::with_capacity(total);
    for code in 0..total {
        let profile = decode_profile(code, k, n);
        let bids = BidVector::new(profile.iter().map(|&i| values[i].clone()).collect());
        let out = mech
            .evaluate(&bids)
            .map_err(|e| CircuitError::Malformed(e.to_string()))?;
        rows.push((profile, out));
    }

    // Minterm for one profile: conjunction over all input bits.
    let minterm = |b: &mut Builder, profile: &[usize]| -> usize {
        let mut lits = Vec::with_capacity(n * w);
        for (i, &v) in profile.iter().enumerate() {
            for bit in (0..w).rev() {
                let wire = b.input(i * w + (w - 1 - bit));
                if (v >> bit) & 1 == 1 {
                    lits.push(wire);
                } else {
                    let inv = b.not(wire);
                    lits.push(inv);
                }
            }
        }
        b.and_all(&lits)
    };

    let lut = |selector: &dyn Fn(&Outcome, usize) -> bool, bidder: usize| -> BoolCircuit {
        let mut b = Builder::new(n * w);
        let mut hits = Vec::new();
        for (profile, out) in &rows {
            if selector(out, bidder) {
                hits.push(minterm(&mut b, profile));
            }
        }
        let o = b.or_all(&hits);
        b.finish(vec![o])
    };

    let lut_value = |extract: &dyn Fn(&Outcome, usize) -> Money,
                     bidder: usize|
     -> Result<BoolCircuit, CircuitError> {
        let mut b = Builder::new(n * w);
        let mut per_bit: Vec<Vec<usize>> = vec![Vec::new(); w];
        for (profile, out) in &rows {
            let idx = value_index(&extract(out, bidder))?;
            if idx == 0 {
                continue;
            }
            let m = minterm(&mut b, profile);
            for bit in 0..w {
                if (idx >> (w - 1 - bit)) & 1 == 1 {
                    per_bit[bit].push(m);
                }
            }
        }
        let outs: Vec<usize> = per_bit
            .into_iter()
            .map(|hits| b.or_all(&hits))
            .collect();
        Ok(b.finish(outs))
    };

    let mut confirm = Vec::with_capacity(n);
    let mut pay = Vec::with_capacity(n);
    let mut burn = Vec::with_capacity(n);
    for i in 0..n {
        confirm.push(lut(&|out, i| out.confirmed[i], i));
        pay.push(lut_value(&|out, i| out.pay[i].clone(), i)?);
        burn.push(lut_value(&|out, i| out.burn[i].clone(), i)?);
    }
    let ca = CircuitAuction {
        values: values.to_vec(),
        n,
        confirm,
        pay,
        burn,
    };
    ca.validate()?;
    Ok(ca)
}

/// Decision for the order-2 robustness problem on a circuit auction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum ScpdpDecision {
    Yes,
    No(Witness),
}

impl ScpdpDecision {
    pub fn is_yes(&self) -> bool {
        matches!(self, ScpdpDecision::Yes)
    }
}

/// Decides whether the circuit-represented auction resists every contract of
/// the miner with at most two bidders.
///
/// The miner model is active: coalition bid changes plus omissions (a bid
/// forced to 0, available when 0 is a declared value). Fake bids cannot
/// extend a fixed-arity circuit auction and are not enumerated. Requires the
/// table to be individually rational and burn-balanced; a violation is
/// reported as an error before deciding.
pub fn decide_2scpdp(
    ca: &CircuitAuction,
    model: MinerModel,
) -> Result<ScpdpDecision, CircuitError> {
    ca.validate()?;
    let k = ca.values.len();
    let n = ca.n;
    let total = k.pow(n as u32);

    // Memoized rows plus the IR/BB precondition sweep.
    let mut rows: Vec<(Outcome, SignedMoney)> = Vec::with_capacity(total);
    for code in 0..total {
        let profile = decode_profile(code, k, n);
        let out = ca.outcome_at(&profile)?;
        for i in 0..n {
            let bid = &ca.values[profile[i]];
            if bidder_utility_from(&out, i, bid).is_negative() {
                return Err(CircuitError::Malformed(format!(
                    "precondition: not individually rational at profile {profile:?}, bidder {i}"
                )));
            }
            if out.burn[i] > out.pay[i] {
                return Err(CircuitError::Malformed(format!(
                    "precondition: not burn-balanced at profile {profile:?}, bidder {i}"
                )));
            }
        }
        let net = miner_utility_from(&out, n);
        rows.push((out, net));
    }

    let zero_index = ca.values.iter().position(Money::is_zero);
    let omissions = model == MinerModel::Active && zero_index.is_some();

    // Coalitions of size 0 (miner alone; only meaningful with omissions),
    // 1, and 2, in lexicographic order.
    let mut coalitions: Vec<Vec<usize>> = Vec::new();
    if model == MinerModel::Active {
        coalitions.push(vec![]);
    }
    for i in 0..n {
        coalitions.push(vec![i]);
        for j in (i + 1)..n {
            coalitions.push(vec![i, j]);
        }
    }
    coalitions.sort();

    let encode = |profile: &[usize]| -> usize { profile.iter().fold(0, |acc, &i| acc * k + i) };

    for a_code in 0..total {
        let a_profile = decode_profile(a_code, k, n);
        let a_bids: Vec<Money> = a_profile.iter().map(|&i| ca.values[i].clone()).collect();
        let (a_out, a_net) = &rows[a_code];

        for coalition in &coalitions {
            let mut base = a_net.clone();
            for &i in coalition {
                base += &bidder_utility_from(a_out, i, &a_bids[i]);
            }

            let m = coalition.len();
            let asg_total = k.pow(m as u32);
            for asg_code in 0..asg_total {
                let mut b_profile = a_profile.clone();
                let mut rem = asg_code;
                for slot in (0..m).rev() {
                    b_profile[coalition[slot]] = rem % k;
                    rem /= k;
                }

                let omission_subsets: Vec<Vec<usize>> = if omissions {
                    let candidates: Vec<usize> = (0..n)
                        .filter(|&i| b_profile[i] != zero_index.unwrap())
                        .collect();
                    let mut subsets = vec![vec![]];
                    for size in 1..=candidates.len() {
                        subsets.extend(combinations(&candidates, size));
                    }
                    subsets.sort();
                    subsets
                } else {
                    vec![vec![]]
                };

                for omission in &omission_subsets {
                    let mut final_profile = b_profile.clone();
                    for &i in omission {
                        final_profile[i] = zero_index.unwrap();
                    }
                    if final_profile == a_profile {
                        continue;
                    }
                    let (b_out, b_net) = &rows[encode(&final_profile)];
                    let mut joint = b_net.clone();
                    for &i in coalition {
                        joint += &bidder_utility_from(b_out, i, &a_bids[i]);
                    }
                    if joint > base {
                        let contract = SideContract {
                            model,
                            coalition: coalition.iter().copied().collect(),
                            new_bids: coalition
                                .iter()
                                .filter(|&&i| b_profile[i] != a_profile[i])
                                .map(|&i| (i, ca.values[b_profile[i]].clone()))
                                .collect(),
                            omitted: omission.iter().copied().collect(),
                            fakes: vec![],
                        };
                        let mech = circuit_mechanism(ca)?;
                        let w = Witness::build(
                            mech.as_ref(),
                            Setting::honest(a_bids.clone()),
                            contract,
                        )
                        .map_err(|e| CircuitError::Malformed(e.to_string()))?
                        .expect("joint > base implies positive delta");
                        return Ok(ScpdpDecision::No(w));
                    }
                }
            }
        }
    }
    Ok(ScpdpDecision::Yes)
}

fn combinations(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(
        items: &[usize],
        size: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            rec(items, size, i + 1, current, out);
            current.pop();
        }
    }
    rec(items, size, 0, &mut current, &mut out);
    out
}

/// Builds the auction whose order-2 robustness decides whether `c` is a
/// tautology: `n+2` bidders over values {0, 1}, pay-as-bid with no burn.
///
/// Bidder 1 wins on (1,0,q) exactly when `c(q)` is 1, bidder 2 wins there
/// when it is 0; with both selector bids set, bidder 1 wins outright; below
/// the selectors, the lowest-index bidder with a 1 among the rest wins. A
/// falsifying assignment thus makes a lower bid win over a higher one, which
/// two bidders exploit by swapping.
pub fn tautology_to_scpdp(c: &BoolCircuit) -> Result<CircuitAuction, CircuitError> {
    c.validate()?;
    if c.outputs.len() != 1 {
        return Err(CircuitError::Malformed(format!(
            "tautology instance must have one output, got {}",
            c.outputs.len()
        )));
    }
    let q = c.inputs;
    let n = q + 2;

    let make_confirm = |bidder: usize| -> BoolCircuit {
        let mut b = Builder::new(n);
        let s1 = b.input(0);
        let s2 = b.input(1);
        let q_wires: Vec<usize> = (0..q).map(|t| b.input(2 + t)).collect();
        let cq = b.embed(c, &q_wires)[0];
        let not_s1 = b.not(s1);
        let not_s2 = b.not(s2);
        let not_cq = b.not(cq);
        let out = match bidder {
            0 => {
                // s1 & s2  |  s1 & !s2 & c(q)  |  !s1 & s2 & !c(q)
                let both = b.and(s1, s2);
                let t1 = b.and_all(&[s1, not_s2, cq]);
                let t2 = b.and_all(&[not_s1, s2, not_cq]);
                b.or_all(&[both, t1, t2])
            }
            1 => {
                // s1 & !s2 & !c(q)  |  !s1 & s2 & c(q)
                let t1 = b.and_all(&[s1, not_s2, not_cq]);
                let t2 = b.and_all(&[not_s1, s2, cq]);
                b.or(t1, t2)
            }
            j => {
                // Own bit set and every earlier bit clear.
                let own = q_wires[j - 2];
                let mut terms = vec![own, not_s1, not_s2];
                for t in 0..(j - 2) {
                    let neg = b.not(q_wires[t]);
                    terms.push(neg);
                }
                b.and_all(&terms)
            }
        };
        b.finish(vec![out])
    };

    let mut confirm = Vec::with_capacity(n);
    let mut pay = Vec::with_capacity(n);
    let mut burn = Vec::with_capacity(n);
    for bidder in 0..n {
        let conf = make_confirm(bidder);
        confirm.push(conf.clone());

        // pay = confirmed & own bid (one-bit values).
        let mut b = Builder::new(n);
        let input_wires: Vec<usize> = (0..n).map(|i| b.input(i)).collect();
        let conf_wire = b.embed(&conf, &input_wires)[0];
        let own = input_wires[bidder];
        let p = b.and(conf_wire, own);
        pay.push(b.finish(vec![p]));

        let mut b = Builder::new(n);
        let z = b.const0();
        burn.push(b.finish(vec![z]));
    }

    let ca = CircuitAuction {
        values: vec![Money::zero(), Money::from_int(1)],
        n,
        confirm,
        pay,
        burn,
    };
    ca.validate()?;
    Ok(ca)
}

/// Structured circuit family: constants, literals, and depth-two formulas
/// over up to `max_inputs` variables, with and without output negation.
pub fn structured_circuits(max_inputs: usize) -> Vec<BoolCircuit> {
    let mut out = Vec::new();
    for inputs in 0..=max_inputs {
        // Constants at every arity.
        for op in [GateOp::Const0, GateOp::Const1] {
            out.push(BoolCircuit {
                inputs,
                gates: vec![op],
                outputs: vec![0],
            });
        }
        if inputs == 0 {
            continue;
        }
        // Literals.
        let literal = |b: &mut Builder, i: usize, neg: bool| -> usize {
            let w = b.input(i);
            if neg {
                b.not(w)
            } else {
                w
            }
        };
        for i in 0..inputs {
            for neg in [false, true] {
                let mut b = Builder::new(inputs);
                let w = literal(&mut b, i, neg);
                out.push(b.finish(vec![w]));
            }
        }
        // Binary ops over literal pairs, optionally negated.
        for i in 0..inputs {
            for j in 0..inputs {
                for (ni, nj) in [(false, false), (false, true), (true, false), (true, true)] {
                    for and in [false, true] {
                        for neg_out in [false, true] {
                            let mut b = Builder::new(inputs);
                            let wi = literal(&mut b, i, ni);
                            let wj = literal(&mut b, j, nj);
                            let w = if and { b.and(wi, wj) } else { b.or(wi, wj) };
                            let w = if neg_out { b.not(w) } else { w };
                            out.push(b.finish(vec![w]));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Seeded random circuit over AND/OR/NOT and constants.
pub fn random_circuit(inputs: usize, extra_gates: usize, seed: u64) -> BoolCircuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new(inputs);
    let mut wires: Vec<usize> = (0..inputs).map(|i| b.input(i)).collect();
    if wires.is_empty() {
        wires.push(b.const1());
    }
    for _ in 0..extra_gates {
        let pick = |rng: &mut ChaCha8Rng, wires: &[usize]| wires[rng.gen_range(0..wires.len())];
        let w = match rng.gen_range(0..8) {
            0 => {
                let a = pick(&mut rng, &wires);
                b.not(a)
            }
            1 => b.const1(),
            2..=4 => {
                let a = pick(&mut rng, &wires);
                let c = pick(&mut rng, &wires);
                b.or(a, c)
            }
            _ => {
                let a = pick(&mut rng, &wires);
                let c = pick(&mut rng, &wires);
                b.and(a, c)
            }
        };
        wires.push(w);
    }
    let last = *wires.last().unwrap();
    b.finish(vec![last])
}

/// On-disk circuit-auction format.
#[derive(Serialize, Deserialize)]
pub struct CircuitAuctionFile {
    pub values: Vec<Money>,
    pub n: usize,
    pub confirm: Vec<BoolCircuit>,
    pub pay: Vec<BoolCircuit>,
    pub burn: Vec<BoolCircuit>,
}

impl From<CircuitAuction> for CircuitAuctionFile {
    fn from(ca: CircuitAuction) -> Self {
        CircuitAuctionFile {
            values: ca.values,
            n: ca.n,
            confirm: ca.confirm,
            pay: ca.pay,
            burn: ca.burn,
        }
    }
}

impl From<CircuitAuctionFile> for CircuitAuction {
    fn from(f: CircuitAuctionFile) -> Self {
        CircuitAuction {
            values: f.values,
            n: f.n,
            confirm: f.confirm,
            pay: f.pay,
            burn: f.burn,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn const1() -> BoolCircuit {
        BoolCircuit {
            inputs: 1,
            gates: vec![GateOp::Const1],
            outputs: vec![0],
        }
    }

    fn input0(inputs: usize) -> BoolCircuit {
        BoolCircuit {
            inputs,
            gates: vec![GateOp::Input(0)],
            outputs: vec![0],
        }
    }

    fn excluded_middle() -> BoolCircuit {
        BoolCircuit {
            inputs: 1,
            gates: vec![GateOp::Input(0), GateOp::Not(0), GateOp::Or(0, 1)],
            outputs: vec![2],
        }
    }

    #[test]
    fn gate_evaluation_basics() {
        assert_eq!(eval_circuit(&const1(), &[false]).unwrap(), vec![true]);
        let not0 = BoolCircuit {
            inputs: 1,
            gates: vec![GateOp::Input(0), GateOp::Not(0)],
            outputs: vec![1],
        };
        assert_eq!(eval_circuit(&not0, &[true]).unwrap(), vec![false]);
        assert_eq!(eval_circuit(&excluded_middle(), &[false]).unwrap(), vec![true]);
        assert_eq!(eval_circuit(&excluded_middle(), &[true]).unwrap(), vec![true]);
    }

    #[test]
    fn arity_mismatch_is_an_error() {
        assert!(matches!(
            eval_circuit(&const1(), &[true, false]),
            Err(CircuitError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn forward_reference_is_rejected() {
        let bad = BoolCircuit {
            inputs: 0,
            gates: vec![GateOp::Not(0)],
            outputs: vec![0],
        };
        assert!(matches!(
            bad.validate(),
            Err(CircuitError::ForwardReference { .. })
        ));
    }

    #[test]
    fn tautology_brute_force_basics() {
        assert!(is_tautology_bruteforce(&const1()).unwrap());
        assert!(!is_tautology_bruteforce(&input0(1)).unwrap());
        assert!(is_tautology_bruteforce(&excluded_middle()).unwrap());
    }

    #[test]
    fn reduction_yes_and_no_instances() {
        let yes = tautology_to_scpdp(&const1()).unwrap();
        assert!(decide_2scpdp(&yes, MinerModel::Active).unwrap().is_yes());

        let no = tautology_to_scpdp(&input0(1)).unwrap();
        let decision = decide_2scpdp(&no, MinerModel::Active).unwrap();
        let ScpdpDecision::No(w) = decision else {
            panic!("expected a refutation");
        };
        assert!(w.order() <= 2);

        let yes2 = tautology_to_scpdp(&excluded_middle()).unwrap();
        assert!(decide_2scpdp(&yes2, MinerModel::Active).unwrap().is_yes());
    }

    #[test]
    fn all_zero_auction_is_robust() {
        // No confirmations, no payments: nothing to gain.
        let n = 2;
        let zero = |outs: usize| -> BoolCircuit {
            let mut b = Builder::new(n);
            let z = b.const0();
            b.finish(vec![z; outs])
        };
        let ca = CircuitAuction {
            values: vec![Money::zero(), Money::from_int(1)],
            n,
            confirm: vec![zero(1), zero(1)],
            pay: vec![zero(1), zero(1)],
            burn: vec![zero(1), zero(1)],
        };
        assert!(decide_2scpdp(&ca, MinerModel::Active).unwrap().is_yes());
    }

    #[test]
    fn table_to_circuits_round_trip() {
        let values: Vec<Money> = ["0", "1", "2", "3"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        let mech = crate::zoo::first_price_burned_reserve("1".parse().unwrap());
        let ca = tabulated_to_circuits(mech.as_ref(), &values, 2).unwrap();
        let back = circuit_auction_to_mechanism(&ca).unwrap();
        for a in 0..values.len() {
            for b in 0..values.len() {
                let bids = BidVector::new(vec![values[a].clone(), values[b].clone()]);
                assert_eq!(
                    mech.evaluate(&bids).unwrap(),
                    back.evaluate(&bids).unwrap(),
                    "profile ({a},{b})"
                );
            }
        }
    }

    #[test]
    fn circuit_file_round_trip() {
        let ca = tautology_to_scpdp(&excluded_middle()).unwrap();
        let file: CircuitAuctionFile = ca.clone().into();
        let json = serde_json::to_string(&file).unwrap();
        let parsed: CircuitAuctionFile = serde_json::from_str(&json).unwrap();
        let back: CircuitAuction = parsed.into();
        assert_eq!(back.confirm, ca.confirm);
        assert_eq!(back.values, ca.values);
    }
}
