#!/usr/bin/env python3
"""Smoke test for the chordflow_py extension module.

Builds the cdylib if needed, loads it from the cargo target directory, and
exercises the main surfaces: circle leaves, chord geometry, the
semiclassical Wigner field, tips-of-the-chord transport, and the quartic
closed forms.
"""
import math
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    subprocess.run(
        ["cargo", "build", "-p", "chordflow-py", "--release"],
        cwd=ROOT,
        check=True,
    )
    libdir = ROOT / "target" / "release"
    src = libdir / "libchordflow_py.so"
    dst = libdir / "chordflow_py.so"
    if src.exists():
        shutil.copyfile(src, dst)
    sys.path.insert(0, str(libdir))
    import chordflow_py

    return chordflow_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    cf = load_module()

    # conventions
    approx(cf.wedge(1.0, 0.0, 0.0, 1.0), 1.0)
    p, q = cf.flow_endpoint("harmonic", 0.0, 1.0, math.pi / 2, 1e-12)
    approx(p, -1.0, 1e-9)
    approx(q, 0.0, 1e-9)

    # quartic closed forms
    r, th = cf.quartic_flow(2.0, 0.0, 0.25)
    approx(r, 2.0)
    approx(th, 1.0)
    ds = cf.quartic_delta_s(0.8, 1.2, 0.3, 0.3, 0.5)
    approx(ds, 0.032332891552, 1e-9)

    # leaf geometry
    leaf = cf.make_circle_leaf(0.0, 0.0, 1.0, 256)
    approx(leaf.enclosed_area(), math.pi, 1e-7)
    chords = leaf.chords_at(0.0, 0.6, 1e-10)
    assert len(chords) == 1
    (tm, tp, action, _, _) = chords[0]
    approx(abs(tm[0]), 0.8, 1e-7)
    approx(action, math.acos(0.6) - 0.6 * 0.8, 1e-7)

    # semiclassical Wigner value vs the exact Fock-20 Wigner function
    hbar = 1.0
    n = 20
    leaf20 = cf.make_circle_leaf(0.0, 0.0, math.sqrt((2 * n + 1) * hbar), 256)
    w = leaf20.wigner(hbar, 0.0, 3.0)
    assert w is not None and abs(w) < 1.0

    # transport: closed-form check of the evolved center and phase
    spec = (0.8, 1.2, 0.3, 0.3, 0.5)
    rt, tht = cf.quartic_new_center(*spec)
    leaf_b = cf.make_circle_leaf(1.1, 0.0, 0.8, 256)
    branches = cf.propagate_point(leaf_b, 0.05, 0.9, 0.2, "quartic", 0.4, 1e-11)
    assert branches, "expected at least one transported branch"
    (_, _, s0, s_t, a0, a_t) = branches[0]
    assert a0 is not None and a_t is not None
    assert abs(s_t - s0) > 0.0
    assert rt > 0.0 and -math.pi < tht <= math.pi

    # evolved leaf keeps its area
    ev = leaf_b.evolve("quartic", 0.8, 1e-10)
    approx(ev.enclosed_area(), leaf_b.enclosed_area(), 1e-6)

    print("chordflow_py smoke test: OK")


if __name__ == "__main__":
    main()
