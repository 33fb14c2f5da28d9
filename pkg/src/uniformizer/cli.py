"""Command-line entry point: ``uniformizer <command> [config] --out DIR``.

The configuration is one JSON document (a path, or ``-`` for stdin). It is
validated against the bundled schema before anything is computed, the
schema defaults are filled in, and the completed configuration is echoed in
``report.json``. Each run writes ``report.json`` and ``data.csv`` and, for
the geometric commands, an SVG picture.

Exit codes: 0 on success, 2 for an invalid configuration (nothing is
written), 3 when the computation fails.
"""

import argparse
import copy
import csv
import io
import json
import math
import sys
import time
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .analysis import (
    FormSpec,
    automorphy_residual,
    disc_seed_norm,
    kernel_mass,
    kernel_mass_reference,
    lp_norm,
    pairing_disc_route,
    pairing_domain_route,
    theta_values,
)
from .dimensions import (
    PinchMove,
    PinchPlan,
    SurfaceType,
    area_conservation_check,
    boundary_dimension,
    dim_cusp_forms,
    hyperbolic_area,
    plan_parts,
)
from .errors import UniformizerError
from .factors import PeriodData, canonical_factor, unitary_flat_solve
from .families import (
    FamilyPath,
    annulus_core_length,
    asymptotic_sweep,
    gram_matrix,
    plumbing_length,
    plumbing_parameter,
)
from .fuchsian import (
    enumerate_elements,
    fundamental_domain_grid,
    geodesic_length,
    limit_set_sample,
    orbit,
    pinch_path,
    punctured_torus_group,
    regular_octagon_group,
    trace_squared,
    trivial_group,
)
from .moebius import b2_norm_estimate, disc_automorphism, koebe, schwarzian
from .quadrature import disc_quadrature, monte_carlo_disc

__all__ = ["COMMANDS", "load_schema", "main", "run"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3

CONVENTIONS = {
    "density": "lambda(z) = 1/(1 - |z|^2) on the unit disc (curvature -4)",
    "lengths": "geodesic lengths and areas in curvature -1",
    "complex": "complex numbers are written as (re, im) column pairs",
}

_SVG_HEAD = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="-1.05 -1.05 2.1 2.1" '
             'width="600" height="600">\n'
             '<circle cx="0" cy="0" r="1" fill="none" stroke="black" stroke-width="0.004"/>\n')


class ConfigError(Exception):
    """The configuration failed validation."""


def load_schema():
    text = resources.files("uniformizer").joinpath("schema/config.schema.json").read_text()
    return json.loads(text)


def _fill_defaults(schema, data):
    """Insert schema defaults for missing properties, recursively."""
    if schema.get("type") != "object" or not isinstance(data, dict):
        return data
    for key, sub in schema.get("properties", {}).items():
        if key not in data and "default" in sub:
            data[key] = copy.deepcopy(sub["default"])
        if key in data:
            _fill_defaults(sub, data[key])
    return data


def validate_config(config, command):
    schema = load_schema()
    try:
        jsonschema.validate(config, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    if config.get("command", command) != command:
        raise ConfigError(f"config is for {config['command']!r}, not {command!r}")
    config = _fill_defaults(schema, copy.deepcopy(config))
    config["command"] = command
    return config


def _cx(v):
    if isinstance(v, list):
        return complex(v[0], v[1])
    return complex(v)


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def _est(value, error):
    return {"value": _jsonable(value), "error": _jsonable(float(error))}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# appended to every CSV so the header names the conventions
CSV_CONVENTION_COLUMNS = (("lambda_convention", "1/(1-|z|^2)"), ("length_curvature", "-1"))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    w.writerow(list(header) + [k for k, _ in CSV_CONVENTION_COLUMNS])
    tail = [v for _, v in CSV_CONVENTION_COLUMNS]
    for r in rows:
        w.writerow([_fmt(v) for v in r] + tail)
    return buf.getvalue()


def _svg_points(points, radius=0.004, color="steelblue"):
    out = [_SVG_HEAD]
    for p in points:
        out.append(f'<circle cx="{p.real:.6f}" cy="{-p.imag:.6f}" r="{radius}" fill="{color}"/>\n')
    out.append("</svg>\n")
    return "".join(out)


def _group(cfg):
    g = cfg["group"]
    kind = g["kind"]
    if kind == "punctured-torus":
        return punctured_torus_group(g["x"], g["y"])
    if kind == "pinch":
        return pinch_path(g["u"])
    if kind == "octagon":
        return regular_octagon_group()
    return trivial_group()


def _enum(cfg):
    return enumerate_elements(_group(cfg), cfg["max_word_length"])


def _quadrature(cfg):
    q = cfg["quadrature"]
    if q["mode"] == "monte-carlo":
        return monte_carlo_disc(q["samples"], cfg["_seed"], q["rho_max"])
    return disc_quadrature(q["radial_nodes"], q["angular_nodes"], q["rho_max"])


def _seeds(cfg):
    return [[_cx(c) for c in h] for h in cfg["seeds"]]


def _points(cfg, key="points"):
    return np.array([_cx(v) for v in cfg[key]])


def _poly(h):
    coef = np.asarray(h, dtype=complex)

    def f(z):
        return np.polynomial.polynomial.polyval(z, coef)
    return f


def cmd_orbit(cfg):
    E = _enum(cfg)
    z0 = _cx(cfg["z0"])
    pts = orbit(E, z0)
    rows = [(int(k), p.real, p.imag, w) for k, p, w in zip(E.lengths, pts, E.words)]
    res = {"elements": len(E), "z0": _jsonable(z0), "max_modulus": float(np.max(np.abs(pts)))}
    return res, (["word_length", "re_z", "im_z", "word"], rows), {"orbit.svg": _svg_points(pts)}


def cmd_limit_set(cfg):
    E = _enum(cfg)
    pts = limit_set_sample(E)
    rows = [(p.real, p.imag, float(np.angle(p))) for p in pts]
    res = {"points": int(pts.size), "elements": len(E)}
    return (res, (["re_z", "im_z", "angle_rad"], rows),
            {"limit_set.svg": _svg_points(pts, 0.003, "darkred")})


def cmd_fundamental_domain(cfg):
    E = _enum(cfg)
    q = cfg["quadrature"]
    Q = fundamental_domain_grid(E, q["domain_radial_nodes"], q["domain_angular_nodes"],
                                q["cusp_cutoff"])
    area = float(np.sum(Q.weights * Q.density ** 2))
    G = E.group
    res = {"nodes": len(Q), "lambda2_area": _est(area, Q.error_estimate),
           "tail": _jsonable(Q.tail)}
    if G.rank:
        T = SurfaceType(G.genus, G.punctures)
        if T.stable:
            res["lambda2_area_reference"] = hyperbolic_area(T) / 4
    rows = [(p.real, p.imag, w) for p, w in zip(Q.nodes, Q.weights)]
    return (res, (["re_z", "im_z", "weight_euclidean_area"], rows),
            {"fundamental_domain.svg": _svg_points(Q.nodes, 0.003)})


def cmd_theta_eval(cfg):
    E = _enum(cfg)
    rho = canonical_factor(E.group, cfg["s"])
    z = _points(cfg)
    r = theta_values(_seeds(cfg), rho, E, z)
    rows = []
    out = []
    for i in range(r.value.shape[0]):
        for j, p in enumerate(z):
            v, t = complex(r.value[i, j]), float(r.tail[i, j])
            rows.append((i, p.real, p.imag, v.real, v.imag, t))
            out.append({"seed": i, "z": _jsonable(p), **_est(v, t)})
    header = ["seed_index", "re_z", "im_z", "re_theta", "im_theta", "tail_estimate"]
    return {"values": out, "elements": len(E)}, (header, rows), {}


def cmd_automorphy_check(cfg):
    E = _enum(cfg)
    rho = canonical_factor(E.group, cfg["s"])
    z = _points(cfg)
    rows = []
    worst = 0.0
    for i, h in enumerate(_seeds(cfg)):
        F = FormSpec(h, rho, E)
        for word in cfg["words"]:
            res, bound = automorphy_residual(F, word, z)
            for p, a, b in zip(z, res, bound):
                ratio = float(a / b) if b > 0 else float("inf")
                worst = max(worst, ratio)
                rows.append((i, word, p.real, p.imag, float(a), float(b), ratio))
    header = ["seed_index", "word", "re_z", "im_z", "residual", "tail_bound", "ratio"]
    return {"max_ratio": worst}, (header, rows), {}


def cmd_kernel_mass(cfg):
    Q = _quadrature(cfg)
    s = cfg["s"]
    rows = []
    out = []
    for w in _points(cfg, "w"):
        v, e = kernel_mass(w, s, Q)
        ref = kernel_mass_reference(w, s)
        rows.append((w.real, w.imag, v, e, ref, abs(v - ref) / ref))
        out.append({"w": _jsonable(w), **_est(v, e), "reference": ref})
    header = ["re_w", "im_w", "mass", "error_estimate", "reference_c_s_lambda_s",
              "relative_difference"]
    return {"masses": out, "quadrature": Q.label}, (header, rows), {}


def cmd_norms(cfg):
    Q = _quadrature(cfg)
    s = cfg["s"]
    rows = []
    out = []
    for i, h in enumerate(_seeds(cfg)):
        for p in cfg["p"]:
            pp = np.inf if p == "inf" else p
            v, e = lp_norm(_poly(h), pp, s, Q)
            ref = disc_seed_norm(h, s) if pp == 1 else float("nan")
            rows.append((i, str(p), v, e, ref))
            out.append({"seed": i, "p": p, **_est(v, e), "reference": _jsonable(ref)})
    header = ["seed_index", "p", "norm_lambda_weighted", "error_estimate", "reference"]
    return {"norms": out, "quadrature": Q.label}, (header, rows), {}


def cmd_pairing(cfg):
    E = _enum(cfg)
    s = cfg["s"]
    rho = canonical_factor(E.group, s)
    seeds = _seeds(cfg)
    rows = []
    out = {}
    if "disc" in cfg["routes"]:
        v, e = pairing_disc_route(seeds, seeds, rho, E)
        out["disc"] = {"value": _jsonable(v), "error": _jsonable(e)}
        rows += [("disc", i, j, v[i, j].real, v[i, j].imag, e[i, j])
                 for i in range(len(seeds)) for j in range(len(seeds))]
    if "domain" in cfg["routes"]:
        q = cfg["quadrature"]
        Q = fundamental_domain_grid(E, q["domain_radial_nodes"], q["domain_angular_nodes"],
                                    q["cusp_cutoff"])
        forms = [FormSpec(h, rho, E) for h in seeds]
        v, e = pairing_domain_route(forms, forms, s, Q)
        out["domain"] = {"value": _jsonable(v), "error": _jsonable(e)}
        rows += [("domain", i, j, v[i, j].real, v[i, j].imag, e[i, j])
                 for i in range(len(seeds)) for j in range(len(seeds))]
    header = ["route", "i", "j", "re_pairing", "im_pairing", "error_estimate"]
    return out, (header, rows), {}


def _family(cfg):
    seeds = _seeds(cfg)
    L = cfg["max_word_length"]
    if cfg["group"]["kind"] == "pinch":
        p = cfg["path"]
        return FamilyPath.pinch(cfg["s"], seeds, 0.0, p["u_max"], L)
    return FamilyPath.constant(_group(cfg), cfg["s"], seeds, max_word_length=L)


def cmd_gram(cfg):
    P = _family(cfg)
    u = cfg["u"] if cfg["group"]["kind"] == "pinch" else P.u_max
    rep = gram_matrix(P, u)
    rel = cfg["tolerances"]["rank_rel"]
    cut = max(rel * max(float(rep.eigenvalues[0]), 0.0), rep.error)
    rank = int(np.sum(rep.eigenvalues > cut))
    n = len(P.seeds)
    rows = [(i, j, rep.matrix[i, j].real, rep.matrix[i, j].imag, rep.entry_errors[i, j])
            for i in range(n) for j in range(n)]
    res = {"u": u, "matrix": _jsonable(rep.matrix), "entry_errors": _jsonable(rep.entry_errors),
           "eigenvalues": _jsonable(rep.eigenvalues), "rank": rank, "tolerance": cut,
           "error": rep.error, "rank_relative": rep.rank_relative,
           "positive_semidefinite": rep.positive_semidefinite}
    try:
        res["fibre_dimension"] = P.fibre_dimension(u)
    except (UniformizerError, ValueError):
        res["fibre_dimension"] = None
    header = ["i", "j", "re_gram", "im_gram", "error_estimate"]
    return res, (header, rows), {}


def cmd_dimension(cfg):
    T = SurfaceType(*cfg["surface"])
    s = cfg["s"]
    d = dim_cusp_forms(T, s)
    area = hyperbolic_area(T)
    res = {"g": T.g, "n": T.n, "s": s, "dimension": d, "hyperbolic_area": _est(area, 0.0)}
    return res, (["g", "n", "s", "dimension", "area_curvature_minus_1"],
                 [(T.g, T.n, s, d, area)]), {}


def _plan(cfg):
    moves = []
    for m in cfg["plan"]:
        if m["separating"]:
            moves.append(PinchMove(True, m["part"], tuple(tuple(c) for c in m["children"])))
        else:
            moves.append(PinchMove(False, m["part"]))
    return PinchPlan(moves)


def cmd_boundary_dimension(cfg):
    T = SurfaceType(*cfg["surface"])
    P = _plan(cfg)
    s = cfg["s"]
    d = boundary_dimension(T, s, P)
    parts = plan_parts(T, P)
    ok = area_conservation_check(T, P)
    rows = [(k, p.g, p.n, dim_cusp_forms(p, s), hyperbolic_area(p)) for k, p in enumerate(parts)]
    res = {"dimension": d, "top_down": dim_cusp_forms(T, s) - len(P),
           "bottom_up": sum(r[3] for r in rows), "area_conserved": ok,
           "parts": [[p.g, p.n] for p in parts]}
    return res, (["part", "g", "n", "dimension", "area_curvature_minus_1"], rows), {}


def cmd_flat_solve(cfg):
    p = cfg["period"]
    P = PeriodData([[_cx(v) for v in row] for row in p["tau"]],
                   [_cx(v) for v in p["sigma"]], [_cx(v) for v in p["sigma_prime"]])
    r = unitary_flat_solve(P, cfg["tolerances"]["flat"])
    g = P.genus
    rows = [(j, i, r.C[j, i].real, r.C[j, i].imag) for j in range(g) for i in range(g)]
    res = {"C": _jsonable(r.C), "residual": r.residual,
           "flagged": r.flagged, "basis": r.basis}
    return res, (["row", "col", "re_C", "im_C"], rows), {}


def cmd_schwarzian_check(cfg):
    n = cfg["schwarzian"]["grid_points"]
    r0 = cfg["schwarzian"]["contour_radius"]
    x = -np.linspace(0.0, 0.999, n)

    def sampler(f):
        def S(z):
            out = np.empty(z.shape, complex)
            for k, p in enumerate(z.ravel()):
                r = min(r0, 0.5 * (1 - abs(p)))
                out.flat[k] = schwarzian(f, p, r).value
            return out
        return S

    k_sup = b2_norm_estimate(sampler(koebe), x)
    mob = disc_automorphism(0.3 + 0.2j, 0.7)
    m_sup = b2_norm_estimate(sampler(mob), x)
    rows = [("koebe", k_sup, 6.0, abs(k_sup - 6.0)), ("moebius", m_sup, 0.0, m_sup)]
    res = {"koebe_b2": _est(k_sup, abs(k_sup - 6)), "moebius_b2": _est(m_sup, m_sup),
           "grid_points": n}
    return res, (["map", "b2_norm_estimate", "reference", "difference"], rows), {}


def _sweep_us(cfg):
    p = cfg["path"]
    return np.geomspace(p["u_max"], p["u_min"], p["samples"])


def cmd_pinch_sweep(cfg):
    rows = []
    for u in _sweep_us(cfg):
        G = pinch_path(u)
        ell = geodesic_length(G.element("a"))
        ref = 2 * math.acosh((2 + u) / 2)
        t = plumbing_parameter(ell)
        back = plumbing_length(t)
        rows.append((float(u), float(trace_squared(G, "a").real), ell, ref, abs(ell - ref), t,
                     abs(back - ell), annulus_core_length(t)))
    tr2 = [r[1] for r in rows]
    res = {"samples": len(rows), "trace_squared_decreasing": bool(np.all(np.diff(tr2) < 0)),
           "max_length_error": max(r[4] for r in rows),
           "max_roundtrip_error": max(r[6] for r in rows)}
    header = ["u", "trace_squared", "length_curvature_minus_1", "length_reference",
              "length_error", "plumbing_abs_t", "roundtrip_error", "annulus_core_length"]
    return res, (header, rows), {}


def cmd_asymptotic_sweep(cfg):
    p = cfg["path"]
    P = FamilyPath.pinch(cfg["s"], _seeds(cfg), 0.0, p["u_max"], cfg["max_word_length"])
    sweep = asymptotic_sweep(P, p["samples"], p["u_min"])
    rows = []
    n = len(P.seeds)
    for r in sweep:
        for i in range(n):
            for j in range(n):
                rows.append((r.u, r.length, r.trace_squared, r.plumbing, r.embedding,
                             r.embedding_error, i, j, r.gram[i, j].real, r.gram[i, j].imag,
                             r.gram_error[i, j], bool(r.bound_ok[i, j])))
    res = {"samples": len(sweep), "bound_holds": bool(all(r.bound_ok.all() for r in sweep)),
           "seed_norms": _jsonable(sweep[0].seed_norms)}
    header = ["u", "length_curvature_minus_1", "trace_squared", "plumbing_abs_t",
              "embedding_constant", "embedding_error", "i", "j", "re_gram", "im_gram",
              "gram_error", "bound_ok"]
    return res, (header, rows), {}


COMMANDS = {
    "orbit": cmd_orbit,
    "limit-set": cmd_limit_set,
    "fundamental-domain": cmd_fundamental_domain,
    "theta-eval": cmd_theta_eval,
    "automorphy-check": cmd_automorphy_check,
    "kernel-mass": cmd_kernel_mass,
    "norms": cmd_norms,
    "pairing": cmd_pairing,
    "gram": cmd_gram,
    "dimension": cmd_dimension,
    "boundary-dimension": cmd_boundary_dimension,
    "flat-solve": cmd_flat_solve,
    "schwarzian-check": cmd_schwarzian_check,
    "pinch-sweep": cmd_pinch_sweep,
    "asymptotic-sweep": cmd_asymptotic_sweep,
}


def run(command, config, seed=0):
    """Validate ``config`` and run ``command``.

    Returns
    -------
    report : dict
    csv_text : str
    svgs : dict
        File name to SVG text.

    Raises
    ------
    ConfigError
        If validation fails.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    cfg = validate_config(config, command)
    cfg["_seed"] = int(seed)
    t0 = time.perf_counter()
    results, (header, rows), svgs = COMMANDS[command](cfg)
    elapsed = time.perf_counter() - t0
    del cfg["_seed"]
    report = {
        "version": __version__,
        "command": command,
        "inputs": cfg,
        "conventions": CONVENTIONS,
        "results": _jsonable(results),
        "timing": {"seconds": elapsed},
    }
    if cfg["quadrature"]["mode"] == "monte-carlo":
        report["seed"] = int(seed)
    return report, _csv_text(header, rows), svgs


def _parser():
    p = argparse.ArgumentParser(prog="uniformizer", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", nargs="?", default=None,
                   help="JSON config file, or - for stdin (default: all defaults)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="sample seed for the monte-carlo quadrature mode")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    args = _parser().parse_intermixed_args(argv)
    try:
        if args.config is None:
            config = {}
        elif args.config == "-":
            config = json.load(sys.stdin)
        else:
            config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"uniformizer: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report, csv_text, svgs = run(args.command, config, args.seed)
    except ConfigError as exc:
        print(f"uniformizer: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UniformizerError, ArithmeticError, ValueError, MemoryError,
            np.linalg.LinAlgError) as exc:
        print(f"uniformizer: {args.command} failed: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_COMPUTE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    with open(out / "data.csv", "w", newline="") as fh:
        fh.write(csv_text)
    for name, text in svgs.items():
        (out / name).write_text(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
