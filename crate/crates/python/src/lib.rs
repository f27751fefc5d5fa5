use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use orbitbound::arith::parse_rational;
use orbitbound::instance::Instance;
use orbitbound::invariants::EvalConfig;
use orbitbound::report::{self, Report};
use orbitbound::Error;

create_exception!(orbitbound, OrbitboundError, PyException, "Evaluation failed; `args[1]` is the CLI exit code.");

fn to_py(e: Error) -> PyErr {
    let code = orbitbound_cli::exit_code(&e);
    OrbitboundError::new_err((e.to_string(), code))
}

fn parse(text: &str, constants: Option<&str>) -> PyResult<Instance> {
    let mut inst = Instance::parse(text).map_err(to_py)?;
    if let Some(spec) = constants {
        inst.constants = orbitbound_cli::parse_constants(spec, &inst.constants).map_err(to_py)?;
    }
    Ok(inst)
}

fn config(inst: Option<&Instance>, precision_max: Option<u32>) -> EvalConfig {
    let mut cfg = EvalConfig::default();
    if let Some(inst) = inst {
        cfg.constants = inst.constants.clone();
    }
    if let Some(m) = precision_max {
        cfg.policy.extra_max = m;
    }
    cfg
}

fn single(
    text: &str,
    constants: Option<&str>,
    precision_max: Option<u32>,
    f: fn(&Instance, &EvalConfig) -> orbitbound::Result<Report>,
) -> PyResult<String> {
    let inst = parse(text, constants)?;
    f(&inst, &config(Some(&inst), precision_max)).map(|r| r.to_json()).map_err(to_py)
}

/// JSON report of the test invariant for one instance (given as text).
#[pyfunction]
#[pyo3(signature = (text, constants=None, precision_max=None))]
fn tau(text: &str, constants: Option<&str>, precision_max: Option<u32>) -> PyResult<String> {
    single(text, constants, precision_max, report::tau_report)
}

#[pyfunction]
#[pyo3(signature = (text, constants=None, precision_max=None))]
fn bounds(text: &str, constants: Option<&str>, precision_max: Option<u32>) -> PyResult<String> {
    single(text, constants, precision_max, report::bounds_report)
}

#[pyfunction]
#[pyo3(signature = (text, constants=None, precision_max=None))]
fn defects(text: &str, constants: Option<&str>, precision_max: Option<u32>) -> PyResult<String> {
    single(text, constants, precision_max, report::defects_report)
}

#[pyfunction]
#[pyo3(signature = (texts, threshold, precision_max=None))]
fn classify(texts: Vec<String>, threshold: &str, precision_max: Option<u32>) -> PyResult<String> {
    let thr = parse_rational(threshold)
        .ok_or_else(|| to_py(Error::Invalid(format!("bad threshold '{threshold}'"))))?;
    let items = texts.iter().map(|t| parse(t, None)).collect::<PyResult<Vec<_>>>()?;
    let cfg = config(items.first(), precision_max);
    report::classify_report(&items, &thr, &cfg).map(|r| r.to_json()).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (texts, precision_max=None))]
fn intersect(texts: Vec<String>, precision_max: Option<u32>) -> PyResult<String> {
    let items = texts.iter().map(|t| parse(t, None)).collect::<PyResult<Vec<_>>>()?;
    report::intersect_report(&items, &config(None, precision_max)).map(|r| r.to_json()).map_err(to_py)
}

/// Re-evaluate a JSON report and return the fresh JSON.
#[pyfunction]
fn reevaluate(json: &str) -> PyResult<String> {
    let r = Report::from_json(json).map_err(to_py)?;
    r.reevaluate(&EvalConfig::default()).map(|r| r.to_json()).map_err(to_py)
}

/// Run the command line with `args` (without the program name).
/// Returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run(args: Vec<String>) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("orbitbound".to_string()).chain(args);
    let code = orbitbound_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}

#[pymodule]
#[pyo3(name = "orbitbound")]
fn orbitbound_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("OrbitboundError", m.py().get_type::<OrbitboundError>())?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(defects, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(intersect, m)?)?;
    m.add_function(wrap_pyfunction!(reevaluate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
