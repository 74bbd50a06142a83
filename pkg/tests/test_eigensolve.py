"""Analytic bases and the discrete Sturm-Liouville route."""
import math

import numpy as np
import pytest

from equiweyl import eigensolve, geometry, specfun
from equiweyl.errors import DomainError


def test_sphere_basis_census():
    b = eigensolve.sphere_basis(200.0)
    # k(k+1) <= 200 -> k <= 13, so (13+1)^2 modes
    assert len(b.modes) == 196
    assert b.lambda_max == 200.0
    lams = [md.eigenvalue for md in b.modes]
    assert lams == sorted(lams)
    ms = {md.label.m for md in b.modes}
    assert ms == set(range(-13, 14))


def test_sphere_mode_evaluator_matches_specfun():
    b = eigensolve.sphere_basis(30.0)
    x = geometry.sphere_point(0.8, 1.9)
    for md in b.modes:
        k, m = md.quantum
        want = specfun.spherical_harmonic(k, m, 0.8, 1.9).value
        assert md.evaluator(x) == pytest.approx(want, rel=1e-11, abs=1e-13)
        assert md.density(x) == pytest.approx(abs(want) ** 2, rel=1e-10, abs=1e-13)


def test_torus_basis_circle():
    b = eigensolve.torus_basis(200.0)
    # lattice points with 4 pi^2 |k|^2 <= 200, |k|^2 <= 5.066: |k|^2 in {0,1,2,4,5}
    want = sum(1 for k1 in range(-3, 4) for k2 in range(-3, 4)
               if 4 * math.pi ** 2 * (k1 * k1 + k2 * k2) <= 200.0)
    assert len(b.modes) == want
    x = (0.3, 0.7)
    for md in b.modes:
        assert abs(md.evaluator(x)) == pytest.approx(1.0, abs=1e-14)


def test_torus_basis_cyclic_labels():
    b = eigensolve.torus_basis(300.0, group=("cyclic", 3))
    assert b.group_order == 3
    for md in b.modes:
        k1, _ = md.quantum
        assert md.label.m == k1 % 3
    b2 = eigensolve.torus_basis(300.0, group="cyclic:3")
    assert len(b2.modes) == len(b.modes)
    with pytest.raises(DomainError):
        eigensolve.torus_basis(100.0, group="dihedral")


def test_sor_eigenvalues_match_sphere():
    prof = geometry.sphere_profile()
    b = eigensolve.surface_of_revolution_basis(prof, 2, 8, 1000)
    worst = 0.0
    for md in b.modes:
        m, j = md.quantum
        k = abs(m) + j
        exact = k * (k + 1.0)
        if exact == 0.0:
            assert abs(md.eigenvalue) <= 1e-9
            continue
        worst = max(worst, abs(md.eigenvalue - exact) / exact)
    assert worst <= 2e-3


def test_sor_degenerate_pairs():
    # +m and -m share the radial problem exactly
    prof = geometry.sphere_profile()
    b = eigensolve.surface_of_revolution_basis(prof, 2, 5, 600)
    by_quantum = {md.quantum: md.eigenvalue for md in b.modes}
    for (m, j), lam in by_quantum.items():
        if m > 0:
            assert lam == by_quantum[(-m, j)]


def test_sor_grid_convergence_monotone():
    """Eigenvalues approach k(k+1) monotonically as the grid refines."""
    prof = geometry.sphere_profile()
    lams = []
    for grid in (250, 500, 1000):
        b = eigensolve.surface_of_revolution_basis(prof, 0, 4, grid)
        lams.append([md.eigenvalue for md in b.modes])
    lams = np.array(lams)
    exact = np.array([k * (k + 1.0) for k in range(4)])
    errs = np.abs(lams - exact[None, :])
    assert np.all(errs[1] <= errs[0] + 1e-12)
    assert np.all(errs[2] <= errs[1] + 1e-12)
    # discrete values sit below the continuum limit on this scheme
    assert np.all(lams[0][1:] <= exact[1:])


def test_torus_profile_basis_smoke():
    prof = geometry.torus_profile()
    b = eigensolve.surface_of_revolution_basis(prof, 1, 4, 600)
    lams = [md.eigenvalue for md in b.modes]
    assert lams == sorted(lams)
    assert lams[0] == pytest.approx(0.0, abs=1e-9)
    assert all(l >= -1e-9 for l in lams)


def test_sor_determinism():
    prof = geometry.sphere_profile()
    a = eigensolve.surface_of_revolution_basis(prof, 1, 4, 400)
    b = eigensolve.surface_of_revolution_basis(prof, 1, 4, 400)
    for ma, mb in zip(a.modes, b.modes):
        assert ma.eigenvalue == mb.eigenvalue


def test_export_import_roundtrip(tmp_path):
    prof = geometry.sphere_profile()
    b = eigensolve.surface_of_revolution_basis(prof, 1, 4, 400)
    path = tmp_path / "basis.npz"
    eigensolve.export_basis(b, path)
    b2 = eigensolve.import_basis(path, prof)
    assert len(b2.modes) == len(b.modes)
    for ma, mb in zip(b.modes, b2.modes):
        assert ma.eigenvalue == mb.eigenvalue
        assert ma.label.m == mb.label.m
    x = (1.1, 0.4)
    for ma, mb in zip(b.modes, b2.modes):
        assert ma.density(x) == pytest.approx(mb.density(x), rel=1e-12, abs=1e-15)


def test_sphere_k_max():
    assert eigensolve.sphere_k_max(200.0) == 13
    assert eigensolve.sphere_k_max(1e6) == 999
    assert eigensolve.sphere_k_max(0.0) == 0
