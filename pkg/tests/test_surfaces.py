import numpy as np
import pytest

from conegeo.errors import GeometryError
from conegeo.pseudo_euclidean import LIE
from conegeo.sphere_models import HomSphere, sphere_data
from conegeo.surfaces import (central_sphere_congruence, cmc_residual, guichard_surface_residual,
                              isothermic_residual, lift_surface, linear_weingarten_fit,
                              linear_weingarten_residual, make_surface, revolution_surface,
                              willmore_energy)
from conegeo.symmetry_breaking import SubgeometryGauge

KINDS = [("plane", {}), ("sphere", {"r": 1.0}), ("cylinder", {"r": 1.0}), ("catenoid", {"a": 1.0}),
         ("cone", {"alpha": 0.4}), ("torus", {"R": 2.0, "rho": 1.0})]


def test_generator_examples():
    s = make_surface("sphere", {"r": 1.0})
    assert np.allclose(s.k1, 1, atol=1e-12) and np.allclose(s.k2, 1, atol=1e-12)
    c = make_surface("cylinder", {"r": 1.0})
    assert np.allclose(c.k1, 1) and np.allclose(c.k2, 0) and np.allclose(c.H, 0.5)
    cat = make_surface("catenoid", {"a": 1.3})
    assert np.max(np.abs(cat.H)) < 1e-13
    t = make_surface("torus", {"R": 2.0, "rho": 1.0})
    assert t.periodic_u and t.periodic_v and t.curvature_line
    assert np.allclose(np.linalg.norm(t.n, axis=-1), 1)


def test_generator_rejects_bad_params():
    with pytest.raises(GeometryError):
        make_surface("cylinder", {"r": -1.0})
    with pytest.raises(GeometryError):
        make_surface("torus", {"R": 1.0, "rho": 2.0})
    with pytest.raises(GeometryError):
        make_surface("klein_bottle")


@pytest.mark.parametrize("kind,params", KINDS, ids=[k for k, _ in KINDS])
def test_normals_and_curvatures_match_finite_differences(kind, params):
    # the analytic fundamental forms agree with difference quotients of f
    s = make_surface(kind, params, nu=41, nv=41)
    fu = np.gradient(s.f, s.u, axis=0)[2:-2, 2:-2]
    fv = np.gradient(s.f, s.v, axis=1)[2:-2, 2:-2]
    E = np.einsum("...i,...i", fu, fu)
    G = np.einsum("...i,...i", fv, fv)
    assert np.max(np.abs(E - s.E[2:-2, 2:-2]) / s.E[2:-2, 2:-2]) < 1e-2
    assert np.max(np.abs(G - s.G[2:-2, 2:-2]) / s.G[2:-2, 2:-2]) < 1e-2
    n = s.n[2:-2, 2:-2]
    assert np.max(np.abs(np.einsum("...i,...i", fu, n))) < 1e-2 * np.sqrt(E.max())


def test_revolution_surface_matches_catenoid():
    v = np.linspace(-1, 1, 201)
    rev = revolution_surface(v, np.cosh(v), v, nu=16)
    assert rev.provenance == "estimated"
    ref = make_surface("catenoid", {"a": 1.0}, nu=16, nv=201, v_range=(-1, 1))
    # one-sided stencils at the profile ends are less accurate
    assert np.max(np.abs(rev.H[:, 2:-2])) < 1e-4
    assert np.allclose(rev.k1[:, 2:-2], ref.k1[:, 2:-2], atol=1e-4)


@pytest.mark.parametrize("kind,params", KINDS, ids=[k for k, _ in KINDS])
def test_lift_audit(kind, params):
    ls = lift_surface(make_surface(kind, params))
    assert max(ls.audit().values()) < 1e-12


def test_lift_examples():
    ls = lift_surface(make_surface("plane"))
    ref = np.zeros(6)
    ref[3] = ref[5] = 1.0
    assert np.allclose(ls.nu, ref)
    ls = lift_surface(make_surface("sphere"))
    assert np.max(np.abs(ls.gauge.space.inner(ls.xi, ls.nu))) < 1e-12
    with pytest.raises(GeometryError):
        lift_surface(make_surface("sphere"), SubgeometryGauge.spherical())


def _sphere_of(g):
    return sphere_data(HomSphere(ls_space().vec(g), LIE))


def ls_space():
    return SubgeometryGauge.euclidean().space


def test_central_congruence_examples():
    cat = lift_surface(make_surface("catenoid"))
    assert np.array_equal(central_sphere_congruence(cat, 0.0), cat.nu)
    assert np.max(np.abs(central_sphere_congruence(cat) - cat.nu)) < 1e-12

    sph = lift_surface(make_surface("sphere", {"r": 1.0}, nu=9, nv=9))
    gam = central_sphere_congruence(sph)
    sp = ls_space()
    assert np.max(np.abs(sp.inner(gam, gam))) < 1e-12
    for g in gam.reshape(-1, 6)[::7]:
        d = _sphere_of(g)
        assert np.allclose(d.center, 0, atol=1e-12) and abs(d.radius - 1) < 1e-12

    cyl = make_surface("cylinder", {"r": 1.0}, nu=8, nv=5)
    gam = central_sphere_congruence(lift_surface(cyl))
    for (i, j) in [(0, 0), (3, 2), (7, 4)]:
        d = _sphere_of(gam[i, j])
        assert abs(d.radius - 2) < 1e-12
        assert np.allclose(d.center, cyl.f[i, j] + 2 * cyl.n[i, j], atol=1e-12)


def test_cmc_examples():
    assert cmc_residual(lift_surface(make_surface("catenoid")), 0.0) < 1e-10
    assert cmc_residual(lift_surface(make_surface("sphere")), 1.0) < 1e-10
    cyl = lift_surface(make_surface("cylinder", {"r": 1.0}))
    assert cmc_residual(cyl, 0.5) < 1e-10
    assert cmc_residual(cyl, 1.0) > 1e-2
    # a torus does not have constant mean curvature
    assert cmc_residual(lift_surface(make_surface("torus")), 0.0) > 1e-2


def test_cmc_residual_in_curved_gauge():
    # a sphere of radius 2 about the origin is CMC in the spherical gauge too
    ls = lift_surface(make_surface("sphere", {"r": 2.0}))
    q = SubgeometryGauge.spherical().q
    gamma = central_sphere_congruence(ls)
    h = -float(ls.gauge.space.inner(gamma[0, 0], q.coords))
    assert cmc_residual(ls, h, q) < 1e-12
    # torus(sqrt 2, 1) is the stereographic image of the Clifford torus, minimal in S^3
    assert cmc_residual(lift_surface(make_surface("torus")), 0.0, q) < 1e-12
    assert cmc_residual(lift_surface(make_surface("torus", {"R": 2.0, "rho": 1.0})), 0.0, q) > 1e-2


def test_cmc_refinement():
    vals = [cmc_residual(lift_surface(make_surface("cylinder", nu=n, nv=n)), 0.5) for n in (16, 32, 64)]
    for a, b in zip(vals, vals[1:]):
        assert b < 1e-11 or 1.7 <= a / b <= 2.3


def test_willmore_examples():
    assert willmore_energy(make_surface("sphere")) < 1e-12
    assert willmore_energy(make_surface("plane")) == 0.0
    w = [willmore_energy(make_surface("torus", nu=n, nv=n)) for n in (32, 64, 128)]
    assert 3.5 <= (w[0] - w[1]) / (w[1] - w[2]) <= 4.5
    rich = w[2] + (w[2] - w[1]) / 3
    assert abs(rich - 2 * np.pi ** 2) < 1e-3


def test_willmore_cylinder_patch():
    # W = 1/4 * (1/r)^2 * area
    s = make_surface("cylinder", {"r": 2.0}, nu=16, nv=9, v_range=(0.0, 3.0))
    assert abs(willmore_energy(s) - 0.25 * 0.25 * (2 * np.pi * 2 * 3)) < 1e-12


def test_isothermic_examples():
    assert max(isothermic_residual(make_surface("catenoid", {"a": 0.7}))) < 1e-12
    assert max(isothermic_residual(make_surface("cylinder", {"r": 1.0}))) < 1e-12
    assert isothermic_residual(make_surface("sphere"))[0] > 0.1
    assert max(isothermic_residual(make_surface("sphere", {"param": "mercator"},
                                                v_range=(-2, 2)))) < 1e-12


def test_guichard_examples():
    cat = make_surface("catenoid")
    assert guichard_surface_residual(cat, 0.0, 1) < 1e-12
    assert guichard_surface_residual(make_surface("sphere"), 0.0, 1) > 0.1
    with pytest.raises(ValueError):
        guichard_surface_residual(cat, 0.0, 0)


def test_linear_weingarten_examples():
    assert linear_weingarten_residual(make_surface("sphere"), 1, 0, -1) < 1e-12
    assert linear_weingarten_residual(make_surface("cylinder"), 0, 1, -1) < 1e-12
    assert linear_weingarten_residual(make_surface("catenoid"), 0, 1, 0) < 1e-12


def _angle(x, y):
    x, y = np.asarray(x) / np.linalg.norm(x), np.asarray(y) / np.linalg.norm(y)
    return float(np.arccos(min(1.0, abs(x @ y))))


@pytest.mark.parametrize("rho,R", [(1.0, np.sqrt(2.0)), (0.5, 2.0)])
def test_weingarten_fit_on_torus(rho, R):
    # the tube curvature 1/rho is constant: rho K - 2H + 1/rho = 0
    fit = linear_weingarten_fit(make_surface("torus", {"R": R, "rho": rho}))
    assert _angle(fit.coefficients, (rho, -1.0, 1 / rho)) < 1e-8
    assert fit.residual < 1e-10
    assert abs(np.linalg.norm(fit.coefficients) - 1) < 1e-14
    a, b, c = fit.coefficients
    assert fit.discriminant == pytest.approx(b * b - a * c)


def test_weingarten_fit_sphere_is_degenerate():
    # K and H are constant: a two dimensional family of relations
    assert linear_weingarten_fit(make_surface("sphere")).kernel_dim == 2
