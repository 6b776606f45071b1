#!/usr/bin/env python3
"""Import the compiled extension module and exercise the main surface.

Build it first:

    cargo build -p canard-py

The script copies the produced cdylib into a temp directory under the
import name python expects, so no install step is needed.
"""

import shutil
import sys
import tempfile
from pathlib import Path


def locate_library() -> Path:
    root = Path(__file__).resolve().parents[1]
    for profile in ("debug", "release"):
        for name in ("libcanard_py.so", "canard_py.so", "libcanard_py.dylib"):
            p = root / "target" / profile / name
            if p.is_file():
                return p
    raise SystemExit("extension not found; run: cargo build -p canard-py")


def main() -> None:
    lib = locate_library()
    with tempfile.TemporaryDirectory() as td:
        shutil.copy2(lib, Path(td) / "canard_py.so")
        sys.path.insert(0, td)
        import canard_py as cp

        # turning-point family: exact boundary values, one critical point
        h = cp.HopfModel()
        assert h.phi(1.2) == 1.0 and h.phi(-1.2) == -1.0
        assert abs(h.big_f(0.3) - 0.045) < 1e-3
        rep = h.validate()
        assert rep["pass"] and rep["interior_critical_count"] == 1

        # one certified simple zero near the planted seed
        prof = h.sdi_profile()
        zeros = prof["zeros"]
        assert len(zeros) == 1, zeros
        assert abs(zeros[0]["x"] - 0.3) < 0.03 and zeros[0]["simple"]

        # fold family: three critical points, two zeros, and the
        # leading-order integral vanishing at a planted seed
        j = cp.JumpModel()
        jrep = j.validate()
        assert jrep["pass"] and jrep["interior_critical_count"] == 3
        jprof = j.sdi_profile()
        assert len(jprof["zeros"]) == 2, jprof["zeros"]
        assert abs(j.i1(0.85)) < 1e-8

        # breaking the fold moves the jump points apart
        broken = j.with_b(0.01)
        a, b = broken.jump_points()
        assert a == a and b == b  # both finite

        # a sweep at large eps returns a clean, possibly empty report
        cyc = h.sweep_cycles(0.5)
        assert isinstance(cyc["fixed_points"], list)
        assert len(cyc["sweep"]) >= 21

        # fast invariant suite
        checks = cp.verify_quick()
        failed = [c["name"] for c in checks if not c["passed"]]
        assert not failed, failed

    print(f"smoke test passed: {len(checks)} checks, "
          f"hopf zero at x={zeros[0]['x']:.6f}, "
          f"{len(cyc['fixed_points'])} cycles at eps=0.5")


if __name__ == "__main__":
    main()
