//! Python bindings: the mechanism zoo, axiom checkers, side-contract search,
//! witness reduction, and the circuit decision problem, driven in-process.
//!
//! Amounts cross the boundary as exact rational strings ("3/2", "0.5", "2");
//! structured results come back as plain dicts and lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyList, PyString};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use tfm_core::circuit::{
    decide_2scpdp as core_decide, is_tautology_bruteforce, tautology_to_scpdp, BoolCircuit,
    CircuitAuction, CircuitAuctionFile, ScpdpDecision,
};
use tfm_core::contract::WitnessFile;
use tfm_core::reduce::{reduce_to_2sc, LocalizeMode};
use tfm_core::tabulated::{load_tabulated, random_tabulated, GenAxioms};
use tfm_core::{axioms, find_c_sc, zoo, BidVector, MechRef, MinerModel, Money, SearchLimits, SearchOutcome};

fn value_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any().unbind(),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any().unbind()
            } else if let Some(u) = n.as_u64() {
                u.into_pyobject(py)?.into_any().unbind()
            } else {
                n.as_f64()
                    .unwrap_or(f64::NAN)
                    .into_pyobject(py)?
                    .into_any()
                    .unbind()
            }
        }
        Value::String(s) => PyString::new(py, s).into_any().unbind(),
        Value::Array(xs) => {
            let list = PyList::empty(py);
            for x in xs {
                list.append(value_to_py(py, x)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(map) => {
            let d = PyDict::new(py);
            for (k, x) in map {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

fn parse_money(s: &str) -> PyResult<Money> {
    s.parse::<Money>()
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn parse_grid(grid: Vec<String>) -> PyResult<Vec<Money>> {
    let mut g = grid
        .iter()
        .map(|s| parse_money(s))
        .collect::<PyResult<Vec<_>>>()?;
    g.sort();
    g.dedup();
    if g.is_empty() {
        return Err(PyValueError::new_err("empty grid"));
    }
    Ok(g)
}

fn parse_model(model: &str) -> PyResult<MinerModel> {
    match model {
        "passive" => Ok(MinerModel::Passive),
        "active" => Ok(MinerModel::Active),
        other => Err(PyValueError::new_err(format!(
            "model must be 'passive' or 'active', got {other:?}"
        ))),
    }
}

/// A deterministic auction: confirmation, payments, and burns per bid vector.
#[pyclass]
struct Mechanism {
    inner: MechRef,
}

#[pymethods]
impl Mechanism {
    fn name(&self) -> String {
        self.inner.name()
    }

    /// Evaluate on a list of rational-string bids; returns a dict with
    /// "confirmed", "pay", and "burn" lists.
    fn evaluate(&self, py: Python<'_>, bids: Vec<String>) -> PyResult<Py<PyAny>> {
        let bids = bids
            .iter()
            .map(|s| parse_money(s))
            .collect::<PyResult<Vec<_>>>()?;
        let out = self
            .inner
            .evaluate(&BidVector::new(bids))
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        to_py(py, &out)
    }

    /// Run the five axiom checkers over grid^n; returns a list of reports.
    fn check_axioms(&self, py: Python<'_>, grid: Vec<String>, n: usize) -> PyResult<Py<PyAny>> {
        let grid = parse_grid(grid)?;
        let reports = axioms::check_all(self.inner.as_ref(), &grid, n)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        to_py(py, &reports)
    }

    /// Exhaustive side-contract search; returns a dict with "status" and,
    /// when refuted, the witness.
    #[pyo3(signature = (grid, n, c, model="passive", fake_limit=2))]
    fn find_side_contract(
        &self,
        py: Python<'_>,
        grid: Vec<String>,
        n: usize,
        c: usize,
        model: &str,
        fake_limit: usize,
    ) -> PyResult<Py<PyAny>> {
        let grid = parse_grid(grid)?;
        let model = parse_model(model)?;
        let limits = SearchLimits {
            fake_limit,
            ..Default::default()
        };
        let outcome = find_c_sc(self.inner.as_ref(), &grid, n, c, model, &limits)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        let v = match outcome {
            SearchOutcome::Found(w) => serde_json::json!({
                "status": "refuted",
                "witness": WitnessFile::from_witness(&w),
            }),
            SearchOutcome::NoneFound => serde_json::json!({ "status": "holds" }),
            SearchOutcome::Truncated(why) => {
                serde_json::json!({ "status": "truncated", "reason": why })
            }
        };
        value_to_py(py, &v)
    }

    /// Reduce a witness (as a dict in the witness-file shape) to a collusion
    /// of the miner and at most two bidders; returns the full trace.
    #[pyo3(signature = (witness, mode="grid"))]
    fn reduce_witness(
        &self,
        py: Python<'_>,
        witness: &Bound<'_, PyAny>,
        mode: &str,
    ) -> PyResult<Py<PyAny>> {
        let json_mod = py.import("json")?;
        let text: String = json_mod
            .call_method1("dumps", (witness,))?
            .extract()?;
        let file: WitnessFile =
            serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let w = file
            .into_witness(self.inner.as_ref())
            .map_err(PyValueError::new_err)?;
        let mode = match mode {
            "grid" => LocalizeMode::Grid,
            "bisect" => LocalizeMode::Bisect { max_iters: 64 },
            other => {
                return Err(PyValueError::new_err(format!(
                    "mode must be 'grid' or 'bisect', got {other:?}"
                )))
            }
        };
        let trace = reduce_to_2sc(self.inner.as_ref(), &w, mode)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        to_py(py, &trace)
    }
}

/// Construct a zoo mechanism by name, e.g. zoo("first-price-burned-reserve", {"r": "1"}).
#[pyfunction]
#[pyo3(signature = (name, params=None))]
fn zoo_mechanism(name: &str, params: Option<HashMap<String, String>>) -> PyResult<Mechanism> {
    let params: BTreeMap<String, String> = params.unwrap_or_default().into_iter().collect();
    let inner = zoo::by_name(name, &params).map_err(PyValueError::new_err)?;
    Ok(Mechanism { inner })
}

/// Load a tabulated mechanism from its JSON file.
#[pyfunction]
fn load_tabulated_mechanism(path: &str) -> PyResult<Mechanism> {
    let inner = load_tabulated(Path::new(path)).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(Mechanism { inner })
}

/// Seeded random tabulated mechanism; axioms is a list drawn from
/// {"ir", "bb", "anonymous", "prefix", "ctb"} or the string "all".
#[pyfunction]
#[pyo3(signature = (grid, n, seed, axioms=None))]
fn random_mechanism(
    grid: Vec<String>,
    n: usize,
    seed: u64,
    axioms: Option<Vec<String>>,
) -> PyResult<Mechanism> {
    let grid = parse_grid(grid)?;
    let ax = match axioms {
        None => GenAxioms::all(),
        Some(list) => {
            let mut ax = GenAxioms::none();
            for a in list {
                match a.as_str() {
                    "all" => ax = GenAxioms::all(),
                    "ir" => ax.individually_rational = true,
                    "bb" => ax.burn_balanced = true,
                    "anonymous" => ax.anonymous = true,
                    "prefix" => ax.prefix_confirmation = true,
                    "ctb" => ax.consistent_tie_breaking = true,
                    other => {
                        return Err(PyValueError::new_err(format!("unknown axiom {other:?}")))
                    }
                }
            }
            ax
        }
    };
    let inner =
        random_tabulated(&grid, n, seed, ax).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(Mechanism { inner })
}

/// Brute-force tautology check on a circuit given as JSON text.
#[pyfunction]
fn is_tautology(circuit_json: &str) -> PyResult<bool> {
    let c: BoolCircuit =
        serde_json::from_str(circuit_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    is_tautology_bruteforce(&c).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Build the circuit auction deciding a tautology instance; returns its JSON.
#[pyfunction]
fn taut_reduce(circuit_json: &str) -> PyResult<String> {
    let c: BoolCircuit =
        serde_json::from_str(circuit_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let auction = tautology_to_scpdp(&c).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let file: CircuitAuctionFile = auction.into();
    serde_json::to_string(&file).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Decide order-2 robustness of a circuit auction given as JSON text.
#[pyfunction]
#[pyo3(signature = (auction_json, model="active"))]
fn decide_scpdp(py: Python<'_>, auction_json: &str, model: &str) -> PyResult<Py<PyAny>> {
    let file: CircuitAuctionFile =
        serde_json::from_str(auction_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let auction: CircuitAuction = file.into();
    let model = parse_model(model)?;
    let decision = core_decide(&auction, model).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let v = match decision {
        ScpdpDecision::Yes => serde_json::json!({ "answer": "yes" }),
        ScpdpDecision::No(w) => serde_json::json!({
            "answer": "no",
            "witness": WitnessFile::from_witness(&w),
        }),
    };
    value_to_py(py, &v)
}

#[pymodule]
fn pytfm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Mechanism>()?;
    m.add_function(wrap_pyfunction!(zoo_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(load_tabulated_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(random_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(is_tautology, m)?)?;
    m.add_function(wrap_pyfunction!(taut_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(decide_scpdp, m)?)?;
    Ok(())
}
