"""End-to-end workflow: produce the standard analysis artifacts via the CLI
and check they agree with each other and with the library."""

import json
import math

import numpy as np
import pytest

from firingmap import iterate, pi_rotation, parse_signal
from firingmap.cli import main

from helpers import cosine_lif


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_cosine_family_workflow(capsys, tmp_path):
    # 1. staircase over the cosine family (cos coefficient = PARAM)
    scan_path = tmp_path / "scan.csv"
    code, _, _ = run(
        capsys, "scan", "--sigma", "1", "--signal", "trig:2;1,PARAM,0",
        "--param-grid", "0:0.88:0.08", "--n", "5000", "--out", str(scan_path),
    )
    assert code == 0
    rows = [ln.split(",") for ln in scan_path.read_text().strip().splitlines()[1:]]
    assert len(rows) == 12
    scan_rho = {float(r[0]): float(r[1]) for r in rows}

    # 2. rotation JSON at one family member must agree with the scan row
    code, out, _ = run(
        capsys, "rotation", "--sigma", "1", "--signal", "trig:2;1,0.48,0",
        "--tol", "2e-4",
    )
    assert code == 0
    rot = json.loads(out)
    assert abs(rot["rho"] - scan_rho[0.48]) < 1.0 / 5000 + rot["error_bound"]

    # 3. ISI artifacts at the same member: histogram mass and mean vs library
    hist_path = tmp_path / "hist.csv"
    code, out, _ = run(
        capsys, "isi", "--sigma", "1", "--signal", "trig:2;1,0.48,0",
        "--n", "20000", "--out", str(hist_path),
    )
    assert code == 0
    summary = json.loads(out)
    hist_rows = [ln.split(",") for ln in hist_path.read_text().strip().splitlines()[1:]]
    counts = np.array([int(r[2]) for r in hist_rows])
    freqs = np.array([float(r[3]) for r in hist_rows])
    assert counts.sum() == 20000
    assert float(freqs.sum()) == pytest.approx(1.0, abs=1e-9)
    orbit = iterate(cosine_lif(0.24), 0.0, 20000)
    assert summary["mean"] == pytest.approx(float(orbit.isi.mean()), abs=1e-9)
    assert summary["mean"] == pytest.approx(rot["rho"], abs=5e-4)

    # 4. perfect-integrator density artifact integrates to ~1 over its grid
    dens_path = tmp_path / "density.csv"
    a0 = (3 + math.sqrt(5)) / 2
    code, _, _ = run(
        capsys, "density", "--sigma", "0", "--signal", f"trig:{a0!r};1,0.5,0",
        "--out", str(dens_path),
    )
    assert code == 0
    dens_rows = [ln.split(",") for ln in dens_path.read_text().strip().splitlines()[1:]]
    ys = np.array([float(r[0]) for r in dens_rows])
    ds = np.array([float(r[1]) for r in dens_rows])
    assert float(np.trapezoid(ds, ys)) == pytest.approx(1.0, abs=0.02)
    # the density support is the displacement range around the rotation number
    rho_pi = pi_rotation(parse_signal(f"trig:{a0!r};1,0.5,0")).value
    assert ys[0] < rho_pi < ys[-1]

    # 5. comparison report: perturbing the cosine coefficient a little gives
    #    small but nonzero deviations
    code, out, _ = run(
        capsys, "compare", "--sigma", "1", "--signal", "trig:2;1,0.48,0",
        "--signal2", "trig:2;1,0.5,0", "--n", "10000",
    )
    assert code == 0
    report = json.loads(out)
    assert 0 < report["sup_phi_dev"] < 0.05
    assert 0 < report["d_F_isi"] < 0.05
