"""Smoke test for the prony_py extension.

Run after `cargo build -p prony-py --features extension-module`:

    python3 python/smoke_test.py [path/to/libprony_py.so]

With no argument the debug build under target/ is loaded. An installed
module (e.g. from `pip install ./crates/python`) is used when importable.
"""

import cmath
import importlib.machinery
import importlib.util
import sys
from pathlib import Path


def load():
    if len(sys.argv) < 2:
        try:
            import prony_py

            return prony_py
        except ImportError:
            pass
    root = Path(__file__).resolve().parent.parent
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else root / "target" / "debug" / "libprony_py.so"
    loader = importlib.machinery.ExtensionFileLoader("prony_py", str(path))
    spec = importlib.util.spec_from_loader("prony_py", loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b, strict=True))


def main():
    p = load()

    # Classical: two spikes, moments written out by hand.
    nodes, amps = [-0.4, 0.5], [1.5, -0.7]
    m = [sum(a * x**k for x, a in zip(nodes, amps)) for k in range(4)]
    sol = p.solve_prony(m, 2)
    assert close([z.real for z in sol.nodes], nodes, 1e-10), sol
    assert close([z.real for z in sol.amplitudes], amps, 1e-10), sol
    assert close(sol.moments(4), m, 1e-12)
    bounds = sol.error_bounds(1e-6)
    assert len(bounds.node_bounds) == 2 and bounds.gautschi_bound >= bounds.constant

    # Confluent: one node carrying a value and a derivative term.
    x, a0, a1 = 0.3, 1.0, 0.5
    m = [a0 * x**k + a1 * k * x ** (k - 1) if k else a0 for k in range(4)]
    conf = p.solve_confluent(m, [2])
    assert conf.multiplicities == [2]
    assert abs(conf.nodes[0] - x) < 1e-8
    assert close(conf.amplitudes[0], [a0, a1], 1e-7)

    # Two dimensions: two points with distinct amplitudes.
    points, weights = [(0.2, -0.5), (0.7, 0.4)], [1.0, 2.0]
    axes = [[sum(w * pt[d] ** r for pt, w in zip(points, weights)) for r in range(4)] for d in range(2)]
    md = p.solve_md(axes, 2)
    assert close([c.real for c in md.amplitudes], weights, 1e-8)
    assert close([c.real for c in md.points[1]], points[1], 1e-8)

    # Shifted unit boxes at -0.4 and 0.5.
    shifts, amps = [-0.4, 0.5], [1.5, -0.7]
    box = [1.0 / (k + 1) for k in range(4)]
    m = [sum(a * ((s + 1) ** (k + 1) - s ** (k + 1)) / (k + 1) for s, a in zip(shifts, amps)) for k in range(4)]
    sol = p.shifts_from_moments(box, m, 2)
    assert close([z.real for z in sol.nodes], shifts, 1e-8)

    # Fourier data with a flat kernel transform.
    shifts, amps = [0.7, 2.1], [1.0, 0.5]
    c = [sum(a * cmath.exp(1j * k * s) for s, a in zip(shifts, amps)) for k in range(4)]
    got, _ = p.shifts_from_fourier(c, [1.0] * 4, 2)
    assert close(sorted(got), shifts, 1e-10)

    # Piecewise constant: 1.5 on [-0.4, 0.5).
    m = [1.5 * (0.5 ** (k + 1) - (-0.4) ** (k + 1)) / (k + 1) for k in range(5)]
    sig = p.reconstruct_pwc(m, 2)
    assert close(sig.jumps, [-0.4, 0.5], 1e-10)
    assert close(sig.values, [1.5], 1e-10)
    assert sig(0.0) == sig.values[0] and sig(0.9) == 0.0

    try:
        p.solve_prony([1.0], 1)
    except p.PronyError as e:
        assert "moments" in str(e).lower(), e
    else:
        raise AssertionError("too few moments accepted")

    print("prony_py smoke test passed")


if __name__ == "__main__":
    main()
