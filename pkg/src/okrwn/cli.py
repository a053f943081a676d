"""Command-line front end.

Every subcommand reads JSON inputs, runs one pipeline and writes one report
(JSON or CSV).  Reports are deterministic: keys sorted, floats with 17
significant digits.  Exit codes: 0 success, 2 certified negative (a criterion
evaluated to false, a divergent integral), 1 error.
"""
from __future__ import annotations

import os

_threads = os.environ.get("OKRWN_THREADS")
if _threads:
    # must happen before numpy loads its BLAS
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from okrwn.errors import DivergenceError, InvariantError, OkrwnError

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class CliError(OkrwnError):
    pass


# -- report emission ------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"+inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, 17-digit floats, infinities as strings."""
    pad, inner = " " * indent, " " * (indent + 2)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 2)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 2) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag])
    return json.dumps(str(obj))


def _csv_cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return _fmt_float(float(v)).strip('"')
    return str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_csv_cell(v) for v in r) + "\n")
    return buf.getvalue()


def emit_report(result: dict, fmt: str, path: str | None, table=None) -> None:
    """Write ``result`` as JSON, or ``table = (header, rows)`` as CSV.

    An empty result is an error and no file is written.
    """
    if fmt == "csv":
        if table is None:
            raise CliError("this command has no tabular output; use --format json")
        header, rows = table
        if not rows:
            raise CliError("empty result: nothing written")
        text = to_csv(header, rows)
    else:
        if not result:
            raise CliError("empty result: nothing written")
        text = dumps(result) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- input helpers --------------------------------------------------------------------


def _load_json(path: str | None) -> dict:
    if path is None:
        raise CliError("missing input file (--input/-i)")
    p = Path(path)
    if not p.is_file():
        raise CliError(f"input file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed JSON in {path}: {exc}") from exc


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise CliError(f"expected comma-separated numbers, got {text!r}") from exc


def _exact_point(text: str) -> tuple:
    try:
        return tuple(Fraction(x.strip()) for x in text.split(","))
    except ValueError as exc:
        raise CliError(f"expected comma-separated rationals, got {text!r}") from exc


def _grid(text):
    from okrwn.convex.grids import Grid1D

    return None if text is None else Grid1D.parse(text)


def _vector(text: str, N: int) -> np.ndarray:
    """``e2`` (basis vector, 1-based) or comma-separated coefficients."""
    text = text.strip()
    if text.startswith("e") and text[1:].isdigit():
        j = int(text[1:])
        if not 1 <= j <= N:
            raise CliError(f"basis index {j} out of range 1..{N}")
        v = np.zeros(N, dtype=complex)
        v[j - 1] = 1.0
        return v
    vals = [complex(x.strip().replace("i", "j")) for x in text.split(",")]
    if len(vals) != N:
        raise CliError(f"vector has {len(vals)} entries, family has N={N}")
    return np.array(vals)


def load_curve(data: dict, alpha_grid=None):
    """A test curve from a serialized table or a family spec
    (``{"family": "ad0", "E": [...]}`` or ``{"family": "linear", "G": [...], "lam": 1}``)."""
    from okrwn import rwn

    fam = data.get("family")
    ag = alpha_grid or (_grid(data["alpha_grid"]) if "alpha_grid" in data else rwn.DEFAULT_ALPHA_GRID)
    if fam == "ad0":
        return rwn.ad0_curve(data["E"], ag)
    if fam == "linear":
        return rwn.linear_curve(data["G"], float(data.get("lam", 1.0)), ag)
    if fam == "sphere":
        model = rwn.SphereModel.from_params(int(data.get("n_radial", 201)))
        return rwn.theoremA_family(model, ag, cross_check_tol=None)
    if data.get("kind") == "test_curve":
        return rwn.TestCurve.from_json(data)
    raise InvariantError(f"unknown curve family {fam!r}", field="family")


def load_model(data: dict):
    from okrwn.toric import ToricModel

    return ToricModel.from_json(data.get("model", data))


def load_family(data: dict):
    from okrwn.filtrations import GramFamily

    return GramFamily.from_json(data.get("family", data))


def load_domain(data: dict):
    from okrwn.chebyshev import ReinhardtDomain

    return ReinhardtDomain.from_json(data.get("domain", data))


def _okounkov_body(model):
    from okrwn.okounkov import ValuationSample, accumulate_body
    from okrwn.toric import sections_basis

    samples = [ValuationSample(1, u) for u in sections_basis(model, 1)]
    return accumulate_body(samples, source="toric")


# -- commands --------------------------------------------------------------------
# Each returns (exit_code, result_dict, table_or_None).


def cmd_transform(args):
    from okrwn import rwn

    data = _load_json(args.input)
    if args.direction == "hat":
        v = load_curve(data)
        u = rwn.hat_transform(v, _grid(args.grid) or rwn.DEFAULT_T_GRID)
        res = u.to_json()
        rows = [(p, t, val) for p, row in zip(u.points.ids, u.values) for t, val in zip(u.t_grid.nodes, row)]
        return EXIT_OK, res, (["point", "t", "value"], rows)
    u = rwn.SubgeodesicRay.from_json(data)
    v = rwn.check_transform(u, _grid(args.grid) or rwn.DEFAULT_ALPHA_GRID)
    rows = [(p, a, val) for p, row in zip(v.points.ids, v.values) for a, val in zip(v.alpha_grid.nodes, row)]
    return EXIT_OK, v.to_json(), (["point", "alpha", "value"], rows)


def cmd_roundtrip(args):
    from okrwn import rwn

    v = load_curve(_load_json(args.input), _grid(args.alpha_grid))
    t_grid = _grid(args.grid) or rwn.DEFAULT_T_GRID
    u = rwn.hat_transform(v, t_grid)
    defect = rwn.roundtrip_defect(v, t_grid)
    lv, lu = v.lambda_v, u.lambda_u
    res = {
        "defect": defect,
        "t_grid": t_grid.to_json(),
        "alpha_grid": v.alpha_grid.to_json(),
        "lambda_v": {"value": lv.value, "lower": lv.lower, "upper": lv.upper, "converged": lv.converged},
        "lambda_u": {"value": lu.value, "lower": lu.lower, "upper": lu.upper, "converged": lu.converged},
    }
    code = EXIT_OK
    if args.tol is not None:
        res["tol"] = args.tol
        res["pass"] = bool(defect < args.tol)
        code = EXIT_OK if res["pass"] else EXIT_NEGATIVE
    return code, res, None


def cmd_body(args):
    from okrwn.okounkov import volume_identity_check

    model = load_model(_load_json(args.input))
    ob = _okounkov_body(model)
    verts = ob.body.sorted_vertices()
    n = model.n
    top = None
    if model.tag == "fubini_study":
        top = model.params["d"] ** n
    res = {"body": ob.body.to_json(), "volume": ob.body.volume()}
    if top is not None:
        chk = volume_identity_check(ob, top)
        res["volume_identity"] = {"vol": chk.vol, "target": chk.target, "gap": chk.gap}
    header = [f"x{j + 1}" for j in range(n)]
    return EXIT_OK, res, (header, [tuple(str(c) for c in v) for v in verts])


def cmd_certify(args):
    from okrwn.okounkov import default_margin, interior_certificate

    model = load_model(_load_json(args.input))
    ob = _okounkov_body(model)
    point = _exact_point(args.point)
    if len(point) != model.n:
        raise InvariantError(f"point has {len(point)} coordinates, body dimension {model.n}", field="point")
    margin = args.margin if args.margin is not None else default_margin(ob.body)
    ok = interior_certificate(ob, point, margin)
    res = {"interior": ok, "point": [str(c) for c in point], "margin": margin}
    return (EXIT_OK if ok else EXIT_NEGATIVE), res, None


def cmd_jets(args):
    from okrwn.okounkov import SuccessiveMinima, criterion_E, default_margin, jet_certificate

    if args.minima is not None:
        eps = _exact_point(args.minima)
        crit = criterion_E(SuccessiveMinima(eps), args.k)
        res = {"criterion": crit.holds, "lhs": crit.lhs, "k": args.k, "minima": [str(e) for e in eps]}
        return (EXIT_OK if crit.holds else EXIT_NEGATIVE), res, None
    if args.input is None:
        raise CliError("jets needs --model or --minima")
    model = load_model(_load_json(args.input))
    ob = _okounkov_body(model)
    margin = args.margin if args.margin is not None else default_margin(ob.body)
    ok = jet_certificate(ob, args.k, margin)
    res = {"jets": ok, "k": args.k, "margin": margin}
    return (EXIT_OK if ok else EXIT_NEGATIVE), res, None


def cmd_chebyshev(args):
    from okrwn.chebyshev import chebyshev_body

    data = _load_json(args.input)
    dom = load_domain(data)
    row = _floats(args.weight) if args.weight else data.get("weight", [1.0] * dom.n)
    rep = chebyshev_body(dom, row, which=args.which)
    res = rep.to_json()
    if args.tol is not None and rep.gap is not None:
        res["pass"] = bool(abs(rep.gap) <= args.tol * rep.exact_kernel)
    return EXIT_OK, res, None


def cmd_azukawa(args):
    from okrwn.chebyshev import azukawa_1_explicit, azukawa_n, homogeneity_defect

    data = _load_json(args.input)
    dom = load_domain(data)
    row = _floats(args.weight) if args.weight else data.get("weight", [1.0] * dom.n)
    xi = _floats(args.xi)
    if args.which == "1":
        A = azukawa_1_explicit(dom, row)
    else:
        def A(z):
            return azukawa_n(dom, row, z, method=args.method)
    res = {"value": A(xi), "xi": xi, "weight_row": row, "which": args.which,
           "homogeneity_defect": homogeneity_defect(A, row, xi)}
    return EXIT_OK, res, None


def cmd_bergman(args):
    from okrwn.toric import bergman_fixed_point_check

    model = load_model(_load_json(args.input))
    chk = bergman_fixed_point_check(model)
    res = {"K0": chk.K0, "integral": chk.integral, "K0_times_integral": chk.K0_times_integral,
           "basis": [list(u) for u in chk.basis], "gram_diagonal": list(chk.gram_diagonal),
           "convention": chk.convention}
    code = EXIT_OK
    if args.tol is not None:
        res["pass"] = bool(abs(chk.K0_times_integral - 1) <= args.tol)
        code = EXIT_OK if res["pass"] else EXIT_NEGATIVE
    return code, res, None


def cmd_integral(args):
    from okrwn.convex.grids import Grid1D
    from okrwn.toric import growth_condition, toric_integral

    model = load_model(_load_json(args.input))
    if args.grid:
        model = model.with_axes((Grid1D.parse(args.grid),) * model.n)
    shift = _floats(args.shift) if args.shift else [1.0] * model.n
    phi_x = growth_condition(model).phi_x
    try:
        rep = toric_integral(phi_x, shift, args.margin)
    except DivergenceError as exc:
        return EXIT_NEGATIVE, {"divergent": True, "shift": shift, "reason": str(exc)}, None
    res = rep.to_json()
    res["divergent"] = False
    res["shift"] = shift
    return EXIT_OK, res, None


def cmd_filtration(args):
    from okrwn import filtrations as fl

    fam = load_family(_load_json(args.input))
    if args.action == "spectrum":
        spec = fl.jumping_spectrum(fam, args.T)
        res = {"values": list(spec.values), "multiplicities": list(spec.multiplicities),
               "rates": list(spec.rates), "converged": spec.converged, "N": fam.N}
        rows = [(a, m) for a, m in zip(spec.values, spec.multiplicities)]
        return EXIT_OK, res, (["alpha", "multiplicity"], rows)
    if args.alpha is None or args.F is None:
        raise CliError(f"filtration {args.action} needs --alpha and --F")
    F = _vector(args.F, fam.N)
    spec = fl.jumping_spectrum(fam, args.T)
    if args.action == "trace":
        from okrwn.convex.grids import Grid1D

        ts = Grid1D.parse(args.grid or "0:20:41").nodes
        tr = fl.quotient_trace(fam, F, args.alpha, ts, spec)
        res = {"alpha": tr.alpha, "t": list(tr.t), "values": list(tr.values),
               "monotone": tr.is_monotone(), "degenerate": tr.degenerate}
        code = EXIT_OK if res["monotone"] else EXIT_NEGATIVE
        return code, res, (["t", "value"], tr.to_rows())
    rep = fl.extension_verify(fam, F, args.alpha, args.T, spec)
    res = {"lhs": rep.lhs, "rhs": rep.rhs, "slack": rep.slack, "ok": rep.ok, "vacuous": rep.vacuous,
           "alpha": args.alpha}
    return (EXIT_OK if rep.ok else EXIT_NEGATIVE), res, None


def demo_fmt(degree: int = 4, lam: float = 1.0, alphas=(0.25, 0.5, 0.75), T: float = 60.0) -> dict:
    """Extension estimate on P^1 with ``L = O(degree)`` and the linear test curve,
    plus the sharpness probe at the first jump of a flat family."""
    from okrwn import filtrations as fl
    from okrwn.toric import fubini_study, radial_gram_family

    fam = radial_gram_family(fubini_study(1, degree), lam)
    spec = fl.jumping_spectrum(fam, T)
    checks = []
    for a in alphas:
        for j in range(fam.N):
            F = np.zeros(fam.N, dtype=complex)
            F[j] = 1.0
            rep = fl.extension_verify(fam, F, a, T, spec)
            checks.append({"alpha": a, "section": j, "lhs": rep.lhs, "rhs": rep.rhs, "slack": rep.slack,
                           "ok": rep.ok, "vacuous": rep.vacuous})
    flat = fl.GramFamily.diagonal([1.0, 3.0])
    probe = fl.extension_verify(flat, np.array([1.0, 0.0]), 1.0, T)
    return {
        "degree": degree,
        "lam": lam,
        "spectrum": {"values": list(spec.values), "multiplicities": list(spec.multiplicities)},
        "checks": checks,
        "min_slack": min(c["slack"] for c in checks),
        "sharpness_probe": {"family": [1.0, 3.0], "alpha": 1.0, "lhs": probe.lhs, "rhs": probe.rhs,
                            "slack": probe.slack},
        "ok": all(c["ok"] for c in checks) and abs(probe.slack) < 1e-6,
    }


def cmd_demo_fmt(args):
    res = demo_fmt(args.degree, args.lam)
    return (EXIT_OK if res["ok"] else EXIT_NEGATIVE), res, None


# -- parser ------------------------------------------------------------------------


def _common(p, input_name="--input", input_required=True, extra_names=()):
    p.add_argument(input_name, *extra_names, "-i", dest="input", default=None,
                   help="input JSON file" + ("" if input_required else " (optional)"))
    p.add_argument("-o", "--output", default=None, help="report path (stdout when omitted)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--grid", default=None, help="grid lo:hi:n")
    p.add_argument("--margin", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="okrwn", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None, help="JSON file of defaults; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="hat (curve -> ray) or check (ray -> curve)")
    _common(p, extra_names=("--curve",))
    p.add_argument("--direction", choices=("hat", "check"), default="hat")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("roundtrip", help="check(hat(v)) defect and critical values")
    _common(p, extra_names=("--curve",))
    p.add_argument("--alpha-grid", default=None)
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("body", help="Okounkov body of a toric model (vertices)")
    _common(p, extra_names=("--model",))
    p.set_defaults(func=cmd_body)

    p = sub.add_parser("certify", help="interior certificate for a point")
    _common(p, extra_names=("--model",))
    p.add_argument("--point", required=True)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("jets", help="jet certificate or the successive-minima criterion")
    _common(p, input_required=False, extra_names=("--model",))
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--minima", default=None, help="comma-separated successive minima")
    p.set_defaults(func=cmd_jets)

    p = sub.add_parser("chebyshev", help="Chebyshev body volume and Bergman bound")
    _common(p, extra_names=("--domain",))
    p.add_argument("--weight", default=None, help="first weight row, comma-separated")
    p.add_argument("--which", choices=("n", "1"), default="n")
    p.set_defaults(func=cmd_chebyshev)

    p = sub.add_parser("azukawa", help="Azukawa function value and homogeneity defect")
    _common(p, extra_names=("--domain",))
    p.add_argument("--weight", default=None)
    p.add_argument("--xi", required=True)
    p.add_argument("--which", choices=("n", "1"), default="n")
    p.add_argument("--method", choices=("primal", "closed"), default="primal")
    p.set_defaults(func=cmd_azukawa)

    p = sub.add_parser("bergman", help="K(0) * int e^-phi on a toric model")
    _common(p, extra_names=("--model",))
    p.set_defaults(func=cmd_bergman)

    p = sub.add_parser("integral", help="toric integral with divergence detection")
    _common(p, extra_names=("--model",))
    p.add_argument("--shift", default=None)
    p.set_defaults(func=cmd_integral)

    p = sub.add_parser("filtration", help="jumping spectrum, quotient trace, extension estimate")
    p.add_argument("action", choices=("spectrum", "trace", "verify"))
    _common(p, extra_names=("--family",))
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--F", default=None, help="e<j> or comma-separated coefficients")
    p.add_argument("--T", type=float, default=60.0)
    p.set_defaults(func=cmd_filtration)

    p = sub.add_parser("demo-fmt", help="end-to-end extension check on P^1")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--lam", type=float, default=1.0)
    p.set_defaults(func=cmd_demo_fmt)

    # group aliases: `okrwn rwn roundtrip ...`, `okrwn okounkov certify ...`
    return parser


_GROUPS = {"rwn": {"transform", "roundtrip"}, "okounkov": {"body", "certify", "jets"},
           "toric": {"bergman", "integral"}}


def _strip_group(argv: list) -> list:
    for i, tok in enumerate(argv):
        if tok.startswith("-"):
            continue
        if tok in _GROUPS and i + 1 < len(argv) and argv[i + 1] in _GROUPS[tok]:
            return argv[:i] + argv[i + 1:]
        break
    return argv


def _with_config(parser: argparse.ArgumentParser, argv: list):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config:
        cfg = _load_json(known.config)
        if not isinstance(cfg, dict):
            raise CliError("config must be a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                sp.set_defaults(**cfg)
    return parser.parse_args(argv)


def _origin(exc: BaseException) -> str:
    """Module of the innermost okrwn frame that raised ``exc``."""
    tb, mod = exc.__traceback__, "okrwn"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("okrwn"):
            mod = name
        tb = tb.tb_next
    return mod


def main(argv=None) -> int:
    argv = _strip_group(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = _with_config(parser, argv)
        code, result, table = args.func(args)
        emit_report(result, getattr(args, "format", "json"), args.output, table)
        return code
    except InvariantError as exc:
        mod = _origin(exc)
        print(f"error [{mod}] {exc}", file=sys.stderr)
    except OkrwnError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
    except (OSError, KeyError, ValueError, TypeError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
