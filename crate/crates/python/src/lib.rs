//! Python bindings: hashes, the Merkle accumulator, the lending market,
//! the scenario runner and the analysis tools.

use amr_core::amount::{format_amount, parse_amount};
use amr_core::cli::{analyze_trace_text, run_scenario, GasModel, Scenario};
use amr_core::fieldhash::{self, params::render_constants_file, FieldElement, HashKind};
use amr_core::lending::LendingState;
use amr_core::merkle::{MerklePath, MerkleTree as CoreTree};
use amr_core::privacy::frontrun_cost as core_frontrun_cost;
use amr_core::zkrelation::{count_constraints, CircuitCostModel};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind_of(name: &str) -> PyResult<HashKind> {
    name.parse().map_err(err)
}

fn fe(hex: &str) -> PyResult<FieldElement> {
    FieldElement::from_hex(hex).map_err(err)
}

/// Two-to-one compression of two field elements given as hex strings.
#[pyfunction]
#[pyo3(signature = (left, right, kind = "mimc"))]
fn hash2(left: &str, right: &str, kind: &str) -> PyResult<String> {
    Ok(fieldhash::h_2p(kind_of(kind)?, fe(left)?, fe(right)?).to_hex())
}

/// Hash of an arbitrary byte string into the field.
#[pyfunction]
#[pyo3(signature = (data, kind = "mimc"))]
fn hash_bytes(data: &[u8], kind: &str) -> PyResult<String> {
    Ok(fieldhash::h_p(kind_of(kind)?, data).to_hex())
}

#[pyfunction]
#[pyo3(signature = (k, r, kind = "mimc"))]
fn commitment(k: &[u8], r: &[u8], kind: &str) -> PyResult<String> {
    Ok(fieldhash::commit(kind_of(kind)?, k, r)
        .map_err(err)?
        .to_hex())
}

#[pyfunction]
#[pyo3(signature = (k, kind = "mimc"))]
fn nullifier(k: &[u8], kind: &str) -> PyResult<String> {
    Ok(fieldhash::nullifier(kind_of(kind)?, k)
        .map_err(err)?
        .to_hex())
}

#[pyfunction]
fn parse_units(text: &str) -> PyResult<u128> {
    parse_amount(text).map_err(err)
}

#[pyfunction]
fn format_units(value: u128) -> String {
    format_amount(value)
}

#[pyclass(name = "MerkleTree")]
struct PyMerkleTree {
    inner: CoreTree,
}

#[pymethods]
impl PyMerkleTree {
    #[new]
    #[pyo3(signature = (depth, kind = "mimc"))]
    fn new(depth: u32, kind: &str) -> PyResult<Self> {
        Ok(PyMerkleTree {
            inner: CoreTree::init(depth, kind_of(kind)?).map_err(err)?,
        })
    }

    #[getter]
    fn depth(&self) -> u32 {
        self.inner.depth()
    }

    #[getter]
    fn capacity(&self) -> u64 {
        self.inner.capacity()
    }

    fn root(&self) -> String {
        self.inner.root().to_hex()
    }

    fn leaf(&self, index: u64) -> PyResult<String> {
        Ok(self.inner.leaf(index).map_err(err)?.to_hex())
    }

    /// Sets a leaf and returns the new root.
    fn update(&mut self, index: u64, value: &str) -> PyResult<String> {
        Ok(self.inner.update(index, fe(value)?).map_err(err)?.to_hex())
    }

    /// Sibling hashes from the leaf up to the root.
    fn prove(&self, index: u64) -> PyResult<Vec<String>> {
        let path = self.inner.prove(index).map_err(err)?;
        Ok(path.siblings.iter().map(|s| s.to_hex()).collect())
    }

    fn verify(&self, index: u64, leaf: &str, siblings: Vec<String>, root: &str) -> PyResult<bool> {
        let siblings = siblings
            .iter()
            .map(|s| fe(s))
            .collect::<PyResult<Vec<_>>>()?;
        let path = MerklePath { index, siblings };
        amr_core::merkle::verify_path(
            self.inner.kind(),
            self.inner.depth(),
            index,
            fe(leaf)?,
            fe(root)?,
            &path,
        )
        .map_err(err)
    }
}

/// Share-based lending market. Amounts are integer base units (1e18 per coin).
#[pyclass(name = "LendingMarket")]
struct PyLendingMarket {
    inner: LendingState,
}

#[pymethods]
impl PyLendingMarket {
    #[new]
    fn new(rate_per_block: &str) -> PyResult<Self> {
        let rate = parse_amount(rate_per_block).map_err(err)?;
        Ok(PyLendingMarket {
            inner: LendingState::new(rate).map_err(err)?,
        })
    }

    fn deposit(&mut self, amount: u128) -> PyResult<u128> {
        self.inner.deposit(amount).map_err(err)
    }

    fn redeem(&mut self, shares: u128) -> PyResult<u128> {
        self.inner.redeem(shares).map_err(err)
    }

    fn accrue(&mut self, blocks: u64) {
        self.inner.accrue(blocks)
    }

    fn value_of(&self, shares: u128) -> u128 {
        self.inner.value_of(shares)
    }

    #[getter]
    fn exchange_rate(&self) -> u128 {
        self.inner.exchange_rate
    }

    #[getter]
    fn total_underlying(&self) -> u128 {
        self.inner.total_underlying
    }

    #[getter]
    fn total_shares(&self) -> u128 {
        self.inner.total_shares
    }
}

/// Runs a scenario given as TOML text and returns `(exit_code, summary_json, event_log)`.
#[pyfunction]
fn run_scenario_toml(text: &str) -> PyResult<(i32, String, String)> {
    let scenario = Scenario::from_toml(text).map_err(err)?;
    let report = run_scenario(scenario).map_err(err)?;
    Ok((
        report.exit_code(),
        report.summary_json(),
        report.event_log.clone(),
    ))
}

#[pyfunction]
fn constraints(kind: &str, depth: u32) -> PyResult<u64> {
    count_constraints(kind_of(kind)?, depth, &CircuitCostModel::default()).map_err(err)
}

/// Returns `(deposit, withdraw, redeem)` gas.
#[pyfunction]
#[pyo3(signature = (kind, depth, with_lending = false))]
fn gas_estimate(kind: &str, depth: u32, with_lending: bool) -> PyResult<(u64, u64, u64)> {
    let g = GasModel::default().estimate(kind_of(kind)?, depth, with_lending);
    Ok((g.deposit, g.withdraw, g.redeem))
}

/// Returns `(total, sunk_fees)` in base units.
#[pyfunction]
fn frontrun_cost(k: u64, amount: u128, deposit_fee: u128) -> (u128, u128) {
    let c = core_frontrun_cost(k, amount, deposit_fee);
    (c.total, c.sunk_fees)
}

/// Sliding-window anonymity analysis of a deposit/withdraw trace, as JSON lines.
#[pyfunction]
#[pyo3(signature = (text, windows = Vec::new()))]
fn analyze_trace(text: &str, windows: Vec<u64>) -> PyResult<String> {
    analyze_trace_text(text, &windows).map_err(err)
}

#[pyfunction]
fn constants_toml() -> String {
    render_constants_file()
}

#[pymodule]
fn amr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hash2, m)?)?;
    m.add_function(wrap_pyfunction!(hash_bytes, m)?)?;
    m.add_function(wrap_pyfunction!(commitment, m)?)?;
    m.add_function(wrap_pyfunction!(nullifier, m)?)?;
    m.add_function(wrap_pyfunction!(parse_units, m)?)?;
    m.add_function(wrap_pyfunction!(format_units, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario_toml, m)?)?;
    m.add_function(wrap_pyfunction!(constraints, m)?)?;
    m.add_function(wrap_pyfunction!(gas_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(frontrun_cost, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_trace, m)?)?;
    m.add_function(wrap_pyfunction!(constants_toml, m)?)?;
    m.add_class::<PyMerkleTree>()?;
    m.add_class::<PyLendingMarket>()?;
    Ok(())
}
