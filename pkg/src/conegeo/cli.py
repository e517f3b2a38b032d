"""Command line front end: JSON scenes in, JSON reports (and OBJ meshes) out.

    conegeo <command> --scene scene.json [--out DIR] [--tolerance X] [--t LIST]

Exit codes: 0 success, 2 invalid scene, 3 geometric degeneracy.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import configurations as cf
from . import connections as cn
from . import discrete_nets as dn
from . import surfaces as sf
from .errors import GeometryError
from .pseudo_euclidean import LIE, MOEBIUS, Space, Vec
from .sphere_models import (EuclideanSphereData, HomPoint, HomSphere, lift_point,
                            lift_sphere, project_point, sphere_data)
from .symmetry_breaking import (CyclideDecomposition, SpherePencil, SubgeometryGauge,
                                classify_cyclide, classify_pencil, pencil_base_points,
                                sphere_mean_curvature)

EXIT_OK, EXIT_SCHEMA, EXIT_GEOMETRY = 0, 2, 3

DEFAULT_TOLERANCES = {
    "cmc": 1e-10,
    "flatness": 1e-6,
    "parallel": 1e-6,
    "gram": 1e-10,
    "christoffel": 1e-10,
    "darboux": 1e-9,
    "miquel": 1e-9,
    "circularity": 1e-8,
    "isothermic": 1e-8,
    "concurrency": 1e-8,
    "antipodal": 1e-8,
    "incenter": 1e-10,
}


class SceneError(Exception):
    """Scene is valid JSON but not a valid scene (exit code 2)."""


# --------------------------------------------------------------------------
# output

def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        if x == 0.0:
            return "0.0"
        s = format(x, ".17g")
        if "e" not in s and "." not in s:
            s += ".0"
        return s
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(type(x))


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_fmt(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    return _fmt(obj)


def export_obj(grid, path, closed_u: bool = False, closed_v: bool = False) -> Path:
    """Write a vertex grid (nu, nv, 3) as an OBJ quad mesh, row-major, 9 decimals."""
    if isinstance(grid, dn.QuadNet):
        x = grid.vertices
    elif isinstance(grid, sf.SampledSurface):
        x = grid.f
        closed_u = closed_u or grid.periodic_u
        closed_v = closed_v or grid.periodic_v
    else:
        x = np.asarray(grid, float)
    nu, nv = x.shape[:2]
    lines = [f"v {p[0]:.9f} {p[1]:.9f} {p[2]:.9f}" for p in x.reshape(-1, 3)]
    idx = lambda i, j: (i % nu) * nv + (j % nv) + 1
    fu = nu if closed_u else nu - 1
    fv = nv if closed_v else nv - 1
    for i in range(fu):
        for j in range(fv):
            lines.append(f"f {idx(i, j)} {idx(i + 1, j)} {idx(i + 1, j + 1)} {idx(i, j + 1)}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


# --------------------------------------------------------------------------
# scene handling

def _schema() -> dict:
    text = resources.files("conegeo").joinpath("schema/scene.schema.json").read_text()
    return json.loads(text)


def load_scene(path) -> dict:
    try:
        scene = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SceneError(f"cannot read scene: {exc}") from None
    validate_scene(scene)
    return scene


def validate_scene(scene: dict) -> None:
    try:
        jsonschema.validate(scene, _schema())
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path)
        raise SceneError(f"schema error at /{loc}: {exc.message}") from None
    ids = [o["id"] for o in scene["objects"]]
    if len(set(ids)) != len(ids):
        raise SceneError("duplicate object ids")
    for o in scene["objects"]:
        if o["type"] == "pencil":
            for ref in o["spheres"]:
                if ref not in ids:
                    raise SceneError(f"object {o['id']} references unknown id {ref!r}")


class Context:
    def __init__(self, scene: dict, tolerance: float = 1.0, ts=None, out=None):
        self.scene = scene
        self.n = int(scene.get("n", 3))
        g = scene.get("gauge", {})
        self.space = Space(self.n, LIE if g.get("p", True) else MOEBIUS)
        self.gauge = getattr(SubgeometryGauge, g.get("kind", "euclidean"))(self.space)
        self.params = dict(scene.get("params", {}))
        if ts is not None:
            self.params["t"] = list(ts)
        tol = dict(DEFAULT_TOLERANCES)
        tol.update(self.params.get("tolerances", {}))
        self.tol = {k: v * tolerance for k, v in tol.items()}
        self.out = Path(out) if out else None
        self.objects = {o["id"]: o for o in scene["objects"]}
        self.artifacts: list[str] = []

    def of_type(self, *types):
        return [o for o in self.scene["objects"] if o["type"] in types]

    def need(self, *types):
        objs = self.of_type(*types)
        if not objs:
            raise SceneError(f"scene has no object of type {', '.join(types)}")
        return objs

    def param(self, name, default=None):
        v = self.params.get(name, default)
        if v is None:
            raise SceneError(f"missing parameter {name!r}")
        return v

    def export(self, name: str, grid, **kw):
        if self.out is None:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        p = export_obj(grid, self.out / f"{name}.obj", **kw)
        self.artifacts.append(p.name)


def _dim_check(o, vec, n):
    if len(vec) != n:
        raise SceneError(f"object {o['id']}: expected {n} coordinates, got {len(vec)}")


def _sphere_lifts(ctx: Context, o):
    if o["type"] == "sphere":
        _dim_check(o, o["center"], ctx.n)
        d = EuclideanSphereData.sphere(o["center"], o["radius"])
    elif o["type"] == "plane":
        _dim_check(o, o["normal"], ctx.n)
        nrm = np.asarray(o["normal"], float)
        length = np.linalg.norm(nrm)
        if length == 0:
            raise GeometryError("zero plane normal", object_id=o["id"])
        d = EuclideanSphereData.plane(nrm / length, o["offset"] / length)
    else:
        raise SceneError(f"object {o['id']} is not a sphere or plane")
    return lift_sphere(d, Space(ctx.n, LIE))


def _surface(o) -> sf.SampledSurface:
    if o["kind"] == "revolution":
        prof = o.get("profile")
        if prof is None:
            raise SceneError(f"object {o['id']}: revolution surface needs a profile")
        return sf.revolution_surface(prof["v"], prof["r"], prof["z"], nu=o.get("nu", 33))
    kw = {k: o[k] for k in ("nu", "nv") if k in o}
    for k in ("u_range", "v_range"):
        if k in o:
            kw[k] = tuple(o[k])
    return sf.make_surface(o["kind"], o.get("params"), **kw)


def _net(o) -> dn.QuadNet:
    if "generator" in o:
        g = o["generator"]
        if g["kind"] == "exp":
            return dn.exp_net(g.get("U", 8), g.get("V", 8), g.get("h", 0.2))
        if "widths" not in g or "heights" not in g:
            raise SceneError(f"object {o['id']}: rectangle generator needs widths and heights")
        return dn.rectangle_net(g["widths"], g["heights"])
    return dn.QuadNet(np.array(o["vertices"], float), o.get("alpha"), o.get("beta"))


def _quadruple(o) -> cf.PointQuadruple:
    if "points" in o:
        P = np.asarray(o["points"], float)
        return cf.PointQuadruple(P / np.linalg.norm(P, axis=1)[:, None])
    return cf.PointQuadruple.from_plane(o["plane_points"])


def _coeffs(ctx):
    return float(ctx.param("a")), float(ctx.param("b")), float(ctx.param("c"))


def _ts(ctx):
    return tuple(float(t) for t in ctx.params.get("t", cn.DEFAULT_TS))


def _guard(o, fn, *args, **kw):
    """Run fn, attaching the object id to geometric errors."""
    try:
        return fn(*args, **kw)
    except GeometryError as exc:
        if exc.object_id is None:
            exc.object_id = o["id"]
        raise


# --------------------------------------------------------------------------
# commands

def cmd_lift(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("point", "sphere", "plane"):
        if o["type"] == "point":
            _dim_check(o, o["x"], ctx.n)
            hp = lift_point(o["x"], Space(ctx.n, LIE))
            out[o["id"]] = {"lie": hp.v.coords, "moebius": hp.v.coords[:-1], "norm2": hp.v.norm2()}
        else:
            mob, lie = _guard(o, _sphere_lifts, ctx, o)
            out[o["id"]] = {"lie": lie.v.coords, "lie_norm2": lie.v.norm2(),
                            "moebius": None if mob is None else mob.v.coords[:-1],
                            "moebius_norm2": None if mob is None else mob.v.norm2()}
    return {"objects": out}


def cmd_project(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("vector"):
        c = np.asarray(o["coords"], float)
        n = ctx.n
        if len(c) == n + 3:
            sp = Space(n, LIE)
        elif len(c) == n + 2:
            sp = Space(n, MOEBIUS)
        else:
            raise SceneError(f"object {o['id']}: vector has {len(c)} coordinates")
        v = Vec(sp, c)
        nn = v.norm2()
        scale = float(c @ c)
        entry = {"norm2": nn}
        is_null = abs(nn) <= 1e-9 * scale
        point_like = is_null and (sp.kind == MOEBIUS or abs(c[sp.i_p]) <= 1e-12 * np.sqrt(scale))
        model = o.get("model")
        if point_like and model != "moebius":
            entry["kind"] = "point"
            entry["x"] = _guard(o, project_point, HomPoint(v))
        else:
            if model is None:
                model = LIE if (sp.kind == LIE and is_null) else MOEBIUS
            d = _guard(o, sphere_data, HomSphere(v, model))
            if d.is_plane:
                entry.update(kind="plane", normal=d.normal, offset=d.offset)
            else:
                entry.update(kind="sphere" if d.radius != 0 else "point", center=d.center,
                             radius=d.radius)
        out[o["id"]] = entry
    return {"objects": out}


def cmd_classify_pencil(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("pencil"):
        a, b = (ctx.objects[r] for r in o["spheres"])
        la = _sphere_lifts(ctx, a)[1]
        lb = _sphere_lifts(ctx, b)[1]
        pc = _guard(o, SpherePencil.from_spheres, la, lb)
        kind = _guard(o, classify_pencil, pc)
        base = pencil_base_points(pc)
        pts = []
        for hp in base:
            try:
                pts.append(project_point(hp).tolist())
            except GeometryError:
                pts.append(None)  # point at infinity
        out[o["id"]] = {"class": kind.value, "base_points": len(base), "points": pts,
                        "signature": list(pc.signature), "gram": pc.gram}
    if len(out) == 1:
        return next(iter(out.values()))
    return {"pencils": out}


def cmd_classify_cyclide(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("cyclide"):
        if "torus" in o:
            cd = _guard(o, CyclideDecomposition.torus, o["torus"]["R"], o["torus"]["rho"])
        else:
            cd = _guard(o, CyclideDecomposition.from_plus, np.asarray(o["v_plus"], float))
        gauge = SubgeometryGauge.euclidean(Space(3, LIE)) if ctx.space.kind != LIE or ctx.n != 3 \
            else ctx.gauge
        out[o["id"]] = classify_cyclide(cd, gauge).as_dict()
    return {"cyclides": out}


def cmd_mean_curvature(ctx: Context) -> dict:
    out = {}
    q = ctx.gauge.q
    for o in ctx.need("sphere", "plane"):
        mob, lie = _guard(o, _sphere_lifts, ctx, o)
        if mob is None:
            raise GeometryError("point spheres have no mean curvature", object_id=o["id"])
        s = mob.v if ctx.space.kind == LIE else Vec(ctx.space, mob.v.coords[:-1])
        out[o["id"]] = {"H": sphere_mean_curvature(s, q)}
    return {"kappa": ctx.gauge.kappa, "objects": out}


def cmd_miquel(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("miquel_face"):
        f = np.asarray(o["face"], float)
        h = np.asarray(o["hat"], float)
        r = _guard(o, dn.miquel_completion, f[0], f[1], f[2], f[3], h[0], h[1], h[2],
                   tol=ctx.tol["miquel"])
        out[o["id"]] = {"point": r.point, "residuals": r.residuals,
                        "pass": max(r.residuals.values()) < ctx.tol["miquel"]}
    return {"faces": out}


def _cauchy(o, net):
    c = o.get("cauchy")
    if c is None:
        raise SceneError(f"object {o['id']}: Ribaucour transform needs Cauchy data")
    if "row" in c and "col" in c:
        return np.asarray(c["row"], float), np.asarray(c["col"], float)
    U, V = net.window
    try:
        return dn.admissible_cauchy_data(net, c["hat00"], c["angles_u"][:U], c["angles_v"][:V])
    except KeyError as exc:
        raise SceneError(f"object {o['id']}: incomplete Cauchy data ({exc})") from None


def cmd_ribaucour(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("net"):
        net = _net(o)
        row, col = _cauchy(o, net)
        hat = _guard(o, dn.ribaucour_propagate, net, row, col)
        audit = dn.ribaucour_audit(net, hat)
        tol = ctx.tol["circularity"]
        out[o["id"]] = {"audit": audit, "vertices": hat.vertices,
                        "pass": max(audit["faces"], audit["transformed_faces"], audit["edges"]) < tol}
        ctx.export(f"{o['id']}_net", net)
        ctx.export(f"{o['id']}_ribaucour", hat)
    return {"nets": out}


def cmd_cross_ratio(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("quad"):
        out[o["id"]] = {"cross_ratio": _guard(o, dn.cross_ratio, o["points"]),
                        "circularity": dn.circularity_residual(o["points"])}
    return {"quads": out}


def cmd_christoffel(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("net"):
        net = _net(o)
        closure = dn.christoffel_closure(net) if net.alpha is not None else None
        dual = _guard(o, dn.christoffel_dual, net, ctx.tol["christoffel"])
        dd = dn.christoffel_dual(dual)
        out[o["id"]] = {"closure": closure,
                        "isothermic_residual": dn.isothermic_residual_discrete(net),
                        "dual_isothermic_residual": dn.isothermic_residual_discrete(dual),
                        "double_dual_similarity": dn.similarity_residual(net, dd),
                        "vertices": dual.vertices}
        ctx.export(f"{o['id']}_dual", dual)
    return {"nets": out}


def cmd_darboux(ctx: Context) -> dict:
    lam = float(ctx.param("lambda"))
    out = {}
    for o in ctx.need("net"):
        net = _net(o)
        seed = o.get("seed")
        if seed is None:
            raise SceneError(f"object {o['id']}: Darboux transform needs a seed point")
        r = _guard(o, dn.darboux_transform_discrete, net, lam, np.asarray(seed, float),
                   tol=ctx.tol["darboux"])
        iso = dn.isothermic_residual_discrete(r.net)
        out[o["id"]] = {"closure": r.closure, "isothermic_residual": iso,
                        "circularity": r.net.max_face_circularity(),
                        "pass": r.closure < ctx.tol["darboux"] and iso < ctx.tol["isothermic"],
                        "vertices": r.net.vertices}
        ctx.export(f"{o['id']}_darboux", r.net)
    return {"lambda": lam, "nets": out}


def cmd_triangle_centres(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("quadruple"):
        q = _guard(o, _quadruple, o)
        ie = _guard(o, cf.in_ex_centres, q)
        X = q.points
        chart = cf.stereographic(X[:3], X[3])
        ychart = cf.stereographic(ie.centres, X[3])
        inc = cf.incenter(*chart)
        exc = cf.excenters(*chart)
        out[o["id"]] = {"centres": ie.centres, "concurrency": ie.concurrency,
                        "chart_triangle": chart, "chart_centres": ychart,
                        "incenter_error": float(np.linalg.norm(ychart[3] - inc)),
                        "excenter_error": float(np.max(np.linalg.norm(ychart[:3] - exc, axis=1)
                                                       / (1.0 + np.linalg.norm(exc, axis=1)))),
                        "pass": bool(np.max(ie.concurrency) < ctx.tol["concurrency"]
                                     and np.linalg.norm(ychart[3] - inc) < ctx.tol["incenter"])}
    return {"quadruples": out}


def cmd_desmic(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("quadruple"):
        q = _guard(o, _quadruple, o)
        ie = _guard(o, cf.in_ex_centres, q)
        centres = cf.desmic_centres(q, ie)
        entry = {"centres": [{"pairing": list(c.pairing), "point": c.point,
                              "residual": c.residual, "interior": c.interior} for c in centres],
                 "interior_count": sum(c.interior for c in centres)}
        inner = _guard(o, cf.interior_centre, centres)
        nrm = cf.antipodal_normalization(q, ie, inner)
        entry["normalization"] = {"g": nrm.g, "pairing": list(nrm.pairing),
                                  "antipodality": nrm.residual}
        entry["pass"] = bool(max(c.residual for c in centres) < ctx.tol["concurrency"]
                             and nrm.residual < ctx.tol["antipodal"])
        out[o["id"]] = entry
    return {"quadruples": out}


def _lifted(ctx, o):
    s = _guard(o, _surface, o)
    return s, sf.lift_surface(s)


def cmd_verify_conserved(ctx: Context) -> dict:
    a, b, c = _coeffs(ctx)
    ts = _ts(ctx)
    out = {}
    for o in ctx.need("surface"):
        s, ls = _lifted(ctx, o)
        P, Q = cn.lw_conserved_quantities(ls, a, b, c)
        cp = _guard(o, cn.characteristic_polynomial, P)
        cq = _guard(o, cn.characteristic_polynomial, Q)
        gram = _guard(o, cn.gram_det, P, Q, ls.gauge.kappa, a, b, c, tol=ctx.tol["gram"])
        conn = cn.middle_connection(ls, a, b, c, ts)
        par = {str(t): max(cn.parallel_residual(conn, P, t), cn.parallel_residual(conn, Q, t))
               for t in ts}
        flat = {str(t): cn.flatness_residual(conn, t) for t in ts}
        out[o["id"]] = {
            "lw_residual": sf.linear_weingarten_residual(s, a, b, c),
            "char_poly_p": cp, "char_poly_q": cq,
            "class_p": cn.classify_cq(cp).value,
            "det_G": gram.det[:3], "expected_det_G": gram.expected_det[:3],
            "gram_residual": gram.residual,
            "parallel_residual": par, "flatness_residual": flat,
            "pass": bool(gram.ok and max(par.values()) < ctx.tol["parallel"]
                         and max(flat.values()) < ctx.tol["flatness"]),
        }
    return {"coefficients": [a, b, c], "t": list(ts), "surfaces": out}


def cmd_flatness(ctx: Context) -> dict:
    ts = _ts(ctx)
    recipe = ctx.params.get("recipe", "mid")
    out = {}
    for o in ctx.need("surface"):
        s, ls = _lifted(ctx, o)
        if recipe == "mid":
            conns = {"mid": cn.middle_connection(ls, *_coeffs(ctx), ts)}
        elif recipe == "cmc":
            H = float(ctx.params.get("H", float(np.mean(s.H))))
            conns = {"cmc": cn.cmc_connection(ls, H, ts)}
        else:
            gp, gm = cn.cmc_pair(ls)
            dp, dm = _guard(o, cn.pair_connections, gp, gm, ts, ls.gauge.space,
                            s.periodic_u, s.periodic_v)
            conns = {recipe: dp if recipe == "plus" else dm}
        entry = {}
        for name, conn in conns.items():
            entry[name] = {"flatness": {str(t): cn.flatness_residual(conn, t) for t in ts},
                           "isometry": cn.isometry_residual(conn)}
        out[o["id"]] = entry
    return {"t": list(ts), "recipe": recipe, "surfaces": out}


def cmd_gram(ctx: Context) -> dict:
    a, b, c = _coeffs(ctx)
    out = {}
    for o in ctx.need("surface"):
        _, ls = _lifted(ctx, o)
        P, Q = cn.lw_conserved_quantities(ls, a, b, c)
        rep = _guard(o, cn.gram_det, P, Q, ls.gauge.kappa, a, b, c, tol=ctx.tol["gram"])
        out[o["id"]] = rep.as_dict()
    return {"coefficients": [a, b, c], "surfaces": out}


def cmd_willmore(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("surface"):
        s = _guard(o, _surface, o)
        out[o["id"]] = {"W": sf.willmore_energy(s), "grid": list(s.shape)}
        ctx.export(o["id"], s)
    return {"surfaces": out}


def cmd_surface_class(ctx: Context) -> dict:
    out = {}
    for o in ctx.need("surface"):
        s, ls = _lifted(ctx, o)
        fit = sf.linear_weingarten_fit(s)
        entry = {"isothermic": list(sf.isothermic_residual(s)),
                 "curvature_line": s.curvature_line,
                 "lw_fit": {"coefficients": list(fit.coefficients), "residual": fit.residual,
                            "discriminant": fit.discriminant, "kernel_dim": fit.kernel_dim},
                 "H_range": [float(np.min(s.H)), float(np.max(s.H))],
                 "provenance": s.provenance}
        if "H0" in ctx.params:
            entry["cmc_residual"] = sf.cmc_residual(ls, float(ctx.params["H0"]))
        if "guichard_c" in ctx.params and s.curvature_line:
            entry["guichard_residual"] = sf.guichard_surface_residual(
                s, float(ctx.params["guichard_c"]), int(ctx.params.get("eps", 1)))
        if all(k in ctx.params for k in "abc"):
            entry["lw_residual"] = sf.linear_weingarten_residual(s, *_coeffs(ctx))
        out[o["id"]] = entry
    return {"surfaces": out}


COMMANDS = {
    "lift": cmd_lift,
    "project": cmd_project,
    "classify-pencil": cmd_classify_pencil,
    "classify-cyclide": cmd_classify_cyclide,
    "mean-curvature": cmd_mean_curvature,
    "miquel": cmd_miquel,
    "ribaucour": cmd_ribaucour,
    "cross-ratio": cmd_cross_ratio,
    "christoffel": cmd_christoffel,
    "darboux": cmd_darboux,
    "triangle-centres": cmd_triangle_centres,
    "desmic": cmd_desmic,
    "verify-conserved": cmd_verify_conserved,
    "flatness": cmd_flatness,
    "gram": cmd_gram,
    "willmore": cmd_willmore,
    "surface-class": cmd_surface_class,
}


def run(command: str, scene: dict, tolerance: float = 1.0, ts=None, out=None) -> dict:
    """Validate ``scene`` and run ``command``; returns the report dict."""
    validate_scene(scene)
    ctx = Context(scene, tolerance, ts, out)
    report = COMMANDS[command](ctx)
    report["command"] = command
    if ctx.artifacts:
        report["artifacts"] = sorted(ctx.artifacts)
    return report


def _parse_ts(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad t list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conegeo", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--scene", required=True, help="scene JSON file")
    ap.add_argument("--out", help="directory for the report and OBJ files")
    ap.add_argument("--tolerance", type=float, default=1.0, help="scale all tolerances")
    ap.add_argument("--t", type=_parse_ts, help="comma separated loop parameters")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scene = load_scene(args.scene)
        report = run(args.command, scene, args.tolerance, args.t, args.out)
    except SceneError as exc:
        print(dumps({"error": str(exc), "exit_code": EXIT_SCHEMA}), file=sys.stderr)
        return EXIT_SCHEMA
    except GeometryError as exc:
        print(dumps({"error": str(exc), "object_id": exc.object_id, "type": type(exc).__name__,
                     "exit_code": EXIT_GEOMETRY}), file=sys.stderr)
        return EXIT_GEOMETRY
    text = dumps(report) + "\n"
    sys.stdout.write(text)
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{args.command}.json").write_text(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
