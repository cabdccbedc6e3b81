"""Smoke test for the redspec_py extension module.

Build the module first:

    cargo build -p redspec-py --release --features extension-module

then run `python3 python/smoke_test.py` from the repository root.
"""

import json
import math
import os
import shutil
import sys
import tempfile


def import_module():
    try:
        import redspec_py

        return redspec_py
    except ImportError:
        pass
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    for profile in ("release", "debug"):
        for name in ("libredspec_py.so", "libredspec_py.dylib", "redspec_py.dll"):
            built = os.path.join(root, "target", profile, name)
            if os.path.exists(built):
                staging = tempfile.mkdtemp(prefix="redspec_py_")
                suffix = ".pyd" if name.endswith(".dll") else ".so"
                shutil.copy(built, os.path.join(staging, "redspec_py" + suffix))
                sys.path.insert(0, staging)
                import redspec_py

                return redspec_py
    sys.exit("redspec_py is not built; see the module docstring")


def main():
    rs = import_module()
    harmonic = rs.Potential.harmonic()

    sector = rs.Sector("so2", 1, harmonic)
    levels, errors = sector.spectrum(0.05, 0.0, 1.1)
    exact = [2 * 0.05 * (2 * k + 2) for k in range(len(levels))]
    assert len(levels) == 5, levels
    assert all(abs(a - b) < 1e-6 for a, b in zip(levels, exact)), levels
    assert max(errors) < 1e-6

    volume, _ = rs.reduced_volume("so2", harmonic, 1.0, 2.0)
    assert abs(volume - math.pi / 2) < 1e-8, volume
    assert abs(sector.weyl_prediction(1.0, 2.0, 0.01) - 25.0) < 1e-6

    period, action = rs.period_action("so2", harmonic, 1.0)
    assert abs(period - math.pi / 2) < 1e-9
    assert abs(action - math.pi / 2) < 1e-9

    so3 = rs.Sector("so3", 1, harmonic)
    assert so3.degree() == 3 and so3.multiplicity() == 1

    report = rs.Sector("so2", 0, harmonic).weyl_verify(1.0, 2.0, [0.05, 0.03, 0.02, 0.01, 0.007, 0.005])
    assert report.passed, report
    assert abs(report.fitted_exponent + 1.0) < 0.05
    assert json.loads(report.to_json())["kind"] == "weyl"

    peaks = rs.Sector("so2", 0, harmonic).peaks(1.0, 0.01, 3.5)
    assert any(abs(t - math.pi / 2) < 0.05 for t, _ in peaks), peaks

    status, _ = rs.projector_oracle(0.1, harmonic)
    assert status == "pass", status

    try:
        rs.Sector("so5", 0, harmonic)
    except ValueError as err:
        assert "group" in str(err)
    else:
        raise AssertionError("unknown group accepted")

    assert "harmonic-so2" in rs.presets()
    toml = rs.preset_toml("cylinder-classical")
    with tempfile.TemporaryDirectory() as out:
        toml = toml.replace('output_dir = "redspec-out"', "output_dir = %s" % json.dumps(os.path.join(out, "run")))
        toml = toml.replace('cache_dir = ".redspec-cache"', "cache_dir = %s" % json.dumps(os.path.join(out, "cache")))
        code, manifest = rs.run_experiment(toml)
        manifest = json.loads(manifest)
        assert code == 0, manifest
        assert [s["suite"] for s in manifest["suites"]] == ["classical"]

    print("redspec_py %s smoke test passed" % rs.__version__)


if __name__ == "__main__":
    main()
