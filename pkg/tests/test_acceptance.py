"""Acceptance criteria, each measured at its stated tolerance.

Every test records its measurements through the ``criterion`` fixture; the
pytest summary prints one PASS/FAIL line per criterion followed by the
individual measurements.
"""
import numpy as np
import pytest

from conegeo.configurations import (PointQuadruple, antipodal_normalization, desmic_centres,
                                   in_ex_centres, incenter, interior_centre, stereographic)
from conegeo.connections import (CQClass, DEFAULT_TS, characteristic_polynomial, classify_cq,
                                 cmc_coefficients, cmc_pair, flatness_residual, gauge_exp_tau,
                                 gram_det, lw_conserved_quantities, middle_connection,
                                 parallel_residual, tau_nilpotency)
from conegeo.discrete_nets import (QuadNet, admissible_cauchy_data, christoffel_closure,
                                   christoffel_dual, cross_ratio, darboux_transform_discrete,
                                   exp_net, invert_points, isothermic_residual_discrete,
                                   miquel_completion, rectangle_net, ribaucour_audit,
                                   ribaucour_propagate, similarity_residual)
from conegeo.pseudo_euclidean import EPS_SIG, LIE, Space
from conegeo.sphere_models import (EuclideanSphereData, incidence_residual, lift_point,
                                   lift_sphere)
from conegeo.surfaces import cmc_residual, lift_surface, make_surface, willmore_energy
from conegeo.symmetry_breaking import (CyclideDecomposition, PencilType, SpherePencil,
                                       SubgeometryGauge, classify_cyclide, classify_pencil,
                                       cyclide_contact_elements, pencil_base_points,
                                       space_form_projection_batch, sphere_mean_curvature)

S = Space(3, LIE)
SEED = 20240607
# a residual this small is at machine precision; a refinement ratio of two
# such numbers is noise, so the level counts as converged
FLOOR = 1e-13


def fmt(x):
    return f"{x:.3e}"


@pytest.mark.criterion(1)
def test_model_identities(criterion):
    rng = np.random.default_rng(SEED)
    q = SubgeometryGauge.euclidean().q
    sig = unit = unit_abs = inc = inc_plain = curv = 0.0
    for _ in range(10_000):
        c = rng.uniform(-10, 10, 3)
        r = rng.uniform(0.1, 10) * rng.choice([-1.0, 1.0])
        x = rng.uniform(-10, 10, 3)
        mob, lie = lift_sphere(EuclideanSphereData.sphere(c, r), S)
        # forward error of a bilinear form is bounded by the Euclidean size
        # of the coordinates; measure relative to that
        sig = max(sig, abs(lie.v.norm2()) / (lie.v.coords @ lie.v.coords))
        unit = max(unit, abs(mob.v.norm2() - 1) / (mob.v.coords @ mob.v.coords))
        unit_abs = max(unit_abs, abs(mob.v.norm2() - 1))
        val = incidence_residual(lift_point(x, S), mob)
        ref = -(np.sum((x - c) ** 2) - r * r) / (2 * r)
        terms = (x @ x + c @ c + r * r) / (2 * abs(r))
        inc = max(inc, abs(val - ref) / terms)
        inc_plain = max(inc_plain, abs(val - ref) / max(1.0, abs(ref)))
        if r > 0:
            curv = max(curv, abs(sphere_mean_curvature(mob, q) - 1 / r) * r)
    kappa = -q.norm2()
    ok = [
        criterion("(sigma,sigma)=0, relative to |sigma|^2", fmt(sig), sig < 1e-12),
        criterion("(s,s)=1, relative to |s|^2", fmt(unit), unit < 1e-12),
        criterion("(s,s)-1 absolute (informational, grows with |c|^2/r)", fmt(unit_abs), True),
        criterion("incidence formula, relative to term size", fmt(inc), inc < 1e-12),
        criterion("incidence formula, relative to max(1,|ref|)", fmt(inc_plain), inc_plain < 1e-12),
        criterion("kappa = -(q,q) = 0 for q = 2 inf", kappa, kappa == 0.0),
        criterion("H = -(s,q) = 1/r, relative", fmt(curv), curv < 1e-12),
    ]
    assert all(ok)


def _pencil(c1, r1, c2, r2):
    a = lift_sphere(EuclideanSphereData.sphere(c1, r1), S)[0]
    b = lift_sphere(EuclideanSphereData.sphere(c2, r2), S)[0]
    return SpherePencil.from_spheres(a, b)


@pytest.mark.criterion(2)
def test_pencil_trichotomy(criterion):
    unit = lift_sphere(EuclideanSphereData.sphere([0, 0, 0], 1), S)[0]
    plane0 = lift_sphere(EuclideanSphereData.plane([0, 0, 1], 0), S)[0]
    plane1 = lift_sphere(EuclideanSphereData.plane([0, 0, 1], 1), S)[0]
    cases = [("intersecting", SpherePencil.from_spheres(unit, plane0), PencilType.ELLIPTIC, 0),
             ("tangent", SpherePencil.from_spheres(unit, plane1), PencilType.PARABOLIC, 1),
             ("concentric", _pencil([0, 0, 0], 1, [0, 0, 0], 2), PencilType.HYPERBOLIC, 2)]
    ok = []
    for name, pc, kind, count in cases:
        got = classify_pencil(pc), len(pencil_base_points(pc))
        ok.append(criterion(f"{name} pencil", f"{got[0].value}/{got[1]}", got == (kind, count)))
    rng = np.random.default_rng(SEED)
    roots = {PencilType.ELLIPTIC: 0, PencilType.PARABOLIC: 1, PencilType.HYPERBOLIC: 2}
    agree = checked = 0
    for _ in range(1000):
        pc = _pencil(rng.uniform(-2, 2, 3), rng.uniform(0.2, 3), rng.uniform(-2, 2, 3), rng.uniform(0.2, 3))
        g = pc.gram
        if abs(np.linalg.det(g)) <= EPS_SIG:
            continue
        checked += 1
        # real roots of (s1 + l s2, s1 + l s2) = 0, with l = inf when (s2,s2) = 0
        disc = g[0, 1] ** 2 - g[0, 0] * g[1, 1]
        n_real = 2 if disc > 0 else 0
        kind = classify_pencil(pc)
        agree += roots[kind] == n_real and len(pencil_base_points(pc)) == n_real
    ok.append(criterion("random pencils agreeing with root count", f"{agree}/{checked}",
                        agree == checked and checked > 900))
    assert all(ok)


@pytest.mark.criterion(3)
def test_dupin_cyclide(criterion):
    R, rho = 2.0, 1.0
    cd = CyclideDecomposition.torus(R, rho)
    th = np.linspace(0, 2 * np.pi, 96, endpoint=False)
    a, b = np.meshgrid(th, th, indexing="ij")
    sp_, sm_ = cyclide_contact_elements(cd, a, b)
    xi, _ = space_form_projection_batch(sp_, sm_, SubgeometryGauge.euclidean())
    x = xi[..., 1:4]
    impl = float(np.max(np.abs((np.hypot(x[..., 0], x[..., 1]) - R) ** 2 + x[..., 2] ** 2 - rho ** 2)))
    rep = classify_cyclide(cd, SubgeometryGauge.euclidean())
    total = abs(rep.p_plus_sq + rep.p_minus_sq + 1)
    ok = [criterion("torus implicit equation on 96x96 contact elements", fmt(impl), impl < 1e-10),
          criterion("(p+,p+) + (p-,p-) + 1", fmt(total), total < 1e-12)]
    assert all(ok)


@pytest.mark.criterion(4)
def test_thomsen_instance(criterion):
    cat = cmc_residual(lift_surface(make_surface("catenoid")), 0.0)
    cyl = cmc_residual(lift_surface(make_surface("cylinder", {"r": 1.0})), 1.0)
    ok = [criterion("catenoid cmc_residual(H0=0, q=2 inf)", fmt(cat), cat < 1e-10),
          criterion("cylinder(1) cmc_residual(H0=1) (negative control)", fmt(cyl), cyl > 1e-2)]
    assert all(ok)


def _patch(kind, n, **params):
    return lift_surface(make_surface(kind, params, nu=n, nv=n, u_range=(0.3, 0.7), v_range=(-0.2, 0.2)))


LEVELS = (5, 9, 17, 33)  # three halvings of the grid step
T = 0.3


def _refinement(kind, abc, params):
    flat, par = [], []
    for n in LEVELS:
        ls = _patch(kind, n, **params)
        conn = middle_connection(ls, *abc, t=[T])
        P_, Q_ = lw_conserved_quantities(ls, *abc)
        flat.append(flatness_residual(conn, T))
        par.append(max(parallel_residual(conn, P_, T), parallel_residual(conn, Q_, T)))
    return np.array(flat), np.array(par)


def _ratios_in(vals, lo, hi):
    vals = np.asarray(vals)
    ratios = vals[:-1] / vals[1:]
    good = [(b < FLOOR) or (lo <= r <= hi) for r, b in zip(ratios, vals[1:])]
    return ratios, all(good)


CASES_5 = [("sphere(1)", "sphere", (1.0, 0.0, -1.0), {"r": 1.0}),
           ("catenoid", "catenoid", (0.0, 1.0, 0.0), {})]


@pytest.mark.criterion(5)
@pytest.mark.parametrize("name,kind,abc,params", CASES_5, ids=["sphere", "catenoid"])
def test_connection_refinement(criterion, name, kind, abc, params):
    flat, par = _refinement(kind, abc, params)
    fr, fok = _ratios_in(flat, 6, 10)
    pr, pok = _ratios_in(par, 3.5, 4.5)
    ok = [criterion(f"{name} holonomy defect ratios in [6,10]",
                    f"defects {[fmt(v) for v in flat]} ratios {np.round(fr, 2).tolist()}", fok),
          criterion(f"{name} parallel residual ratios in [3.5,4.5]",
                    f"residuals {[fmt(v) for v in par]} ratios {np.round(pr, 2).tolist()}", pok)]
    assert all(ok)


@pytest.mark.criterion(5)
def test_connection_algebra(criterion):
    ok = []
    for name, kind, abc, params in CASES_5 + [("cylinder(1)", "cylinder", (0.0, 1.0, -1.0), {"r": 1.0})]:
        ls = lift_surface(make_surface(kind, params))
        a, b, c = abc
        P_, Q_ = lw_conserved_quantities(ls, *abc)
        rep = gram_det(P_, Q_, 0.0, *abc)
        ok.append(criterion(f"{name} det G = kappa + 2(a kappa + c)t + 4(ac-b^2)t^2", fmt(rep.residual),
                            rep.residual < 1e-10))
        pp = np.abs(characteristic_polynomial(P_)[:2] - [-1, -2 * a]).max()
        qq = np.abs(characteristic_polynomial(Q_)[:2] - [0.0, -2 * c]).max()
        pq = np.abs(rep.pq[:2] - [0.0, 2 * b]).max()
        worst = max(pp, qq, pq)
        ok.append(criterion(f"{name} (p,p)=-1-2at, (q,q)=-kappa-2ct, (p,q)=2bt", fmt(worst), worst < 1e-10))
    ls = lift_surface(make_surface("sphere"))
    P_, _ = lw_conserved_quantities(ls, *cmc_coefficients(1.0))
    cls = classify_cq(characteristic_polynomial(P_))
    ok.append(criterion("CMC quantity p + (t/2) xi classified", cls.value, cls is CQClass.ISOTHERMIC))
    assert all(ok)


@pytest.mark.criterion(6)
def test_nilpotent_gauge(criterion):
    worst = 0.0
    for kind, params in [("sphere", {"r": 1.0}), ("catenoid", {}), ("cylinder", {"r": 1.0}),
                         ("torus", {}), ("cone", {"alpha": 0.4})]:
        ls = lift_surface(make_surface(kind, params))
        worst = max(worst, tau_nilpotency(*cmc_pair(ls), S))
    ls = lift_surface(make_surface("sphere", {"r": 1.0}))
    gp, gm = cmc_pair(ls)
    P_, _ = lw_conserved_quantities(ls, *cmc_coefficients(1.0))
    gauge = 0.0
    for t in DEFAULT_TS:
        pm = np.einsum("...ij,...j->...i", gauge_exp_tau(gp, gm, t / 2, S), P_(t))
        gauge = max(gauge, float(np.max(np.abs(pm - S.p.coords))))
    ok = [criterion("||tau^2|| / ||tau||^2 on all envelope samples", fmt(worst), worst < 1e-12),
          criterion("exp(t tau/2) p(t) - p on the CMC sphere", fmt(gauge), gauge < 1e-13)]
    assert all(ok)


def _face_instance(rng):
    q = exp_net(1, 1, rng.uniform(0.1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1))
    v = invert_points(q.vertices, rng.normal(size=3) * 3, 1.0)
    size = np.ptp(v.reshape(-1, 3), axis=0).max()
    row, col = admissible_cauchy_data(QuadNet(v), v[0, 0] + rng.normal(size=3) * 0.5 * size,
                                      rng.uniform(0.3, 2.5, 1), rng.uniform(0.3, 2.5, 1))
    return [v[0, 0], v[1, 0], v[1, 1], v[0, 1], row[0], row[1], col[1]]


@pytest.mark.criterion(7)
def test_miquel_ribaucour(criterion):
    rng = np.random.default_rng(SEED)
    third = equi = 0.0
    for k in range(1000):
        args = _face_instance(rng)
        r = miquel_completion(*args)
        third = max(third, r.residuals["face"])
        if k < 200:
            c = rng.normal(size=3) * 3
            img = miquel_completion(*invert_points(np.array(args), c, 1.0)).point
            ref = invert_points(r.point, c, 1.0)
            equi = max(equi, np.linalg.norm(img - ref) / max(1.0, np.linalg.norm(ref - c)))
    net = exp_net(8, 8, 0.2)
    row, col = admissible_cauchy_data(net, net.vertices[0, 0] + [0.1, -0.05, 0.2],
                                      rng.uniform(0.2, 1, 8), rng.uniform(0.2, 1, 8))
    audit = ribaucour_audit(net, ribaucour_propagate(net, row, col))
    circ = max(audit["faces"], audit["transformed_faces"], audit["edges"])
    ok = [criterion("third-constraint residual over 1000 faces", fmt(third), third < 1e-9),
          criterion(f"8x8 propagation, {audit['count']} circularity constraints", fmt(circ), circ < 1e-8),
          criterion("Moebius equivariance (inversions)", fmt(equi), equi < 1e-8)]
    assert all(ok)


@pytest.mark.criterion(8)
def test_discrete_isothermic(criterion):
    sq = abs(cross_ratio([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]]) + 1)
    rect = max(abs(cross_ratio([[0, 0, 0], [a, 0, 0], [a, b, 0], [0, b, 0]]) + a * a / (b * b))
               for a, b in [(2, 1), (0.5, 3), (1.7, 0.9)])
    closure, dd = 0.0, 0.0
    for net in (rectangle_net([1.0, 2.0, 0.5], [1.0, 1.5]), exp_net(8, 8, 0.2)):
        closure = max(closure, christoffel_closure(net))
        dd = max(dd, similarity_residual(net, christoffel_dual(christoffel_dual(net))))
    dar_c = dar_i = 0.0
    for lam in (0.7, -1.3, 3.0):
        res = darboux_transform_discrete(exp_net(8, 8, 0.2), lam, np.array([0.3, 0.4, 0.5]))
        dar_c = max(dar_c, res.closure)
        dar_i = max(dar_i, isothermic_residual_discrete(res.net))
    ok = [criterion("square grid cr + 1", fmt(sq), sq < 1e-12),
          criterion("rectangle cr + a^2/b^2", fmt(rect), rect < 1e-12),
          criterion("Christoffel closure", fmt(closure), closure < 1e-12),
          criterion("dual of dual vs original up to similarity", fmt(dd), dd < 1e-10),
          criterion("Darboux face closure", fmt(dar_c), dar_c < 1e-9),
          criterion("Darboux transform isothermic residual", fmt(dar_i), dar_i < 1e-8)]
    assert all(ok)


@pytest.mark.criterion(9)
def test_in_ex_centres_desmic(criterion):
    rng = np.random.default_rng(SEED)
    inc = conc = des = anti = 0.0
    interior_counts = set()
    for _ in range(100):
        P = rng.normal(size=(4, 3))
        q = PointQuadruple(P / np.linalg.norm(P, axis=1)[:, None])
        ie = in_ex_centres(q)
        pole = q.points[3]
        x = stereographic(q.points[:3], pole)
        y = stereographic(ie.centres[3:], pole)[0]
        inc = max(inc, float(np.linalg.norm(y - incenter(*x))))
        conc = max(conc, float(ie.concurrency.max()))
        ds = desmic_centres(q, ie)
        des = max(des, max(d.residual for d in ds))
        interior_counts.add(sum(d.interior for d in ds))
        anti = max(anti, antipodal_normalization(q, ie, interior_centre(ds)).residual)
    ok = [criterion("incenter vs Euclidean oracle", fmt(inc), inc < 1e-10),
          criterion("three-circle concurrency", fmt(conc), conc < 1e-9),
          criterion("desmic concurrency (all four pairings)", fmt(des), des < 1e-8),
          criterion("interior centres per quadruple", sorted(interior_counts), interior_counts == {1}),
          criterion("antipodality after normalisation", fmt(anti), anti < 1e-8)]
    assert all(ok)


@pytest.mark.criterion(10)
def test_willmore_quadrature(criterion):
    sphere = willmore_energy(make_surface("sphere", {"r": 1.0}, nu=65, nv=65))
    levels = (16, 32, 64, 128, 256, 512)
    W = np.array([willmore_energy(make_surface("torus", {"R": np.sqrt(2.0), "rho": 1.0}, nu=n, nv=n))
                  for n in levels])
    d = np.diff(W)
    ratios = d[:-1] / d[1:]
    rich = W[1:] + d / 3
    stable = abs(rich[-1] - rich[-2])
    ok = [criterion("sphere W", fmt(sphere), abs(sphere) < 1e-12),
          criterion("torus self-convergence ratios in [3.5,4.5]", np.round(ratios, 4).tolist(),
                    bool(np.all((ratios >= 3.5) & (ratios <= 4.5)))),
          criterion(f"Richardson value {rich[-1]:.10f}, change between finest levels", fmt(stable),
                    stable < 1e-6)]
    assert all(ok)
