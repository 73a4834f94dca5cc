import json
import math

import numpy as np
import pytest

import ashjb


def small_grid():
    g = ashjb.GridSpec(24, 17, 9, n_control=15)
    g.refine_iters = 10
    return g


def test_band_and_boundary_closed_forms():
    spec = ashjb.ModelSpec.dominated()
    lo, hi = ashjb.band(spec, 0.0)
    assert lo == 0.0
    assert hi == pytest.approx(10.0 * (1.0 - math.exp(-0.2)), rel=1e-12)
    assert ashjb.boundary_closed_form(spec, 0.0)[0] == pytest.approx(-0.49261, abs=5e-6)
    a_lo, a_hi = ashjb.extremal_gaps(ashjb.ModelSpec.nondominated())
    assert (a_lo, a_hi) == pytest.approx((-1.0, 1.0))


def test_structural_constants():
    k = ashjb.structural_constants(ashjb.ModelSpec.nondominated())
    assert set(k) == {"C0", "N0", "C", "rho"}
    assert k["rho"] > 0


def test_errors_map_to_python_exceptions():
    with pytest.raises(ashjb.DomainError):
        ashjb.band(ashjb.ModelSpec.dominated(), 3.0)
    spec = ashjb.ModelSpec.dominated()
    spec.kappa = -1.0
    with pytest.raises(ashjb.ConfigError):
        spec.validate()
    with pytest.raises(ValueError):
        ashjb.run(json.dumps({"model": {"xxx": 1}}))


def test_small_solve_ordering():
    spec = ashjb.ModelSpec.nondominated()
    sol = ashjb.solve(spec, small_grid())
    assert sol.values.shape == (24, 17, 9)
    assert np.isfinite(sol.values).all()
    for p0 in (0.25, 0.5, 0.75):
        vc = sol.v_conditional(p0)
        vuc = sol.v_unconditional(p0)
        vs = sol.v_screening(p0)
        assert vc["value"] <= vs["value"] + 1e-2
        assert vs["value"] <= vuc["value"] + 1e-2
        assert sol.value_sc(vc["y0"], vc["y1"], p0) == pytest.approx(vc["value"], rel=1e-12)


def test_run_band_stage(tmp_path):
    cfg = {"emit": ["band", "summary"], "output_dir": str(tmp_path)}
    r = ashjb.run(json.dumps(cfg))
    assert r["exit_code"] == 0
    assert (tmp_path / "band.csv").read_text().splitlines()[0] == "t,W_lower,W_upper"
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["all_checks_pass"] is True
    assert r["checks"]["band_terminal_collapse"]
