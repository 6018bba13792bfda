use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn with_module(script: &std::ffi::CStr) {
    Python::initialize();
    Python::attach(|py| {
        let m = PyModule::new(py, "wellscape_py").unwrap();
        wellscape_py::wellscape_py(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("ws", m).unwrap();
        py.run(script, Some(&globals), None).unwrap();
    });
}

#[test]
fn energies_and_constructions() {
    with_module(
        c"
g = ws.Grid(1.0, 32, 64)
assert (g.nx, g.ny) == (32, 64)
u = ws.branched_seed(0.05, g)
assert len(u) == 33 * 64
e = [ws.energy(u, 0.05, 0.3, variant=v)['total'] for v in (1, 2, 3)]
assert e[0] <= e[1] <= e[2]
assert ws.Field.from_wsf(u.to_wsf()).values() == u.values()
assert ws.lemma1_check(ws.potential_seed(3, g))['holds']
qp = ws.obstacle_qp(0.0, 0.5, nodes=128)
assert abs(qp['value'] / 8.0 - 1.0) < 0.01
",
    );
}

#[test]
fn errors_map_to_value_error() {
    with_module(
        c"
g = ws.Grid(1.0, 16, 16)
for bad in (lambda: ws.Grid(-1.0, 4, 4),
            lambda: ws.energy(ws.Field.zeros(g), 0.1, 0.1, variant=7),
            lambda: ws.Field.zeros(g).at(17, 0)):
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError('accepted bad input')
",
    );
}

#[test]
fn minimize_from_zero_stays_at_zero() {
    with_module(
        c"
g = ws.Grid(1.0, 16, 16)
f, b = ws.minimize(ws.Field.zeros(g), 0.05, 0.2, max_iters=3)
assert f.l2_norm() == 0.0 and abs(b['total'] - 0.2) < 1e-15
",
    );
}
