"""Command-line interface: ``capbound {bound,flow,validate,wulff}``.

Exit codes: 0 success, 1 I/O or parameter error, 2 hypothesis or ellipticity
failure, 3 flow breakdown, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .anisotropic import EllipticityError, anisotropic_summary, parse_norm, wulff_radial_graph, wulff_shape
from .bounds import BoundInputError, thm1_bound, thm2_bound, thm3_bound, thm4_bound, thm5_bound, thm6_bound
from .flows import SAMPLE_DT, FlowBreakdownError, FlowSample, FlowTrace, normal_flow_area, run_iamcf_r3, run_imcf_h3
from .hyperbolic import quermassintegrals, sphere_area
from .surface import (
    CurvatureSummary,
    RadialGraphSurface,
    SurfaceValidationError,
    check_hypotheses,
    euclidean_sphere_summary,
    geodesic_sphere_summary,
    read_obj,
    summarize_mesh,
    summarize_radial_graph,
    write_obj,
)
from .validation import GRIDS, render_table, report_json, run_suite

EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_BREAKDOWN, EXIT_VALIDATION = 0, 1, 2, 3, 4

THEOREM_AMBIENT = {"thm1": "h3", "thm2": "h2", "thm3": "h3", "thm4": "h3", "thm5": "r3", "thm6": "r3"}
FLOW_AMBIENT = {"imcf-h3": "h3", "iamcf-r3": "r3", "normal-hn": "h3"}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# output


def write_atomic(path: str | Path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, output: str | None) -> None:
    if output:
        try:
            write_atomic(output, text)
        except OSError as exc:
            raise CliError(f"cannot write {output}: {exc}") from None
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# surfaces


@dataclass
class Builtin:
    name: str
    params: dict


BUILTIN_ARGS = {
    "sphere": ("r",),
    "circle": ("r",),
    "ellipsoid": ("a", "b", "c"),
    "perturbed": ("r", "amp", "mode"),
    "wulff": ("r0",),
}
BUILTIN_DEFAULTS = {
    "sphere": {"r": 1.0},
    "circle": {"r": 1.0},
    "ellipsoid": {"a": 1.0, "b": 1.0, "c": 1.5},
    "perturbed": {"r": 1.0, "amp": 0.2, "mode": 2},
    "wulff": {"r0": 1.0},
}


def parse_builtin(spec: str) -> Builtin:
    """``name[:v1,v2,...]`` with positional values or ``key=value`` pairs."""
    name, _, rest = spec.partition(":")
    name = name.strip().lower()
    if name not in BUILTIN_ARGS:
        raise CliError(f"unknown builtin {name!r}; expected one of {sorted(BUILTIN_ARGS)}")
    keys = BUILTIN_ARGS[name]
    params = dict(BUILTIN_DEFAULTS[name])
    items = [s.strip() for s in rest.split(",") if s.strip()] if rest else []
    if len(items) > len(keys):
        raise CliError(f"builtin {name} takes at most {len(keys)} values: {', '.join(keys)}")
    for i, item in enumerate(items):
        key, eq, val = item.partition("=")
        if not eq:
            key, val = keys[i], item
        key = key.strip()
        if key not in keys:
            raise CliError(f"builtin {name} has no parameter {key!r}; expected {', '.join(keys)}")
        try:
            params[key] = float(val)
        except ValueError:
            raise CliError(f"builtin {name}: {key}={val!r} is not a number") from None
    for key, val in params.items():
        if key != "amp" and not val > 0:
            raise CliError(f"builtin {name}: {key} must be positive, got {val}")
    if name == "perturbed":
        if params["mode"] != int(params["mode"]):
            raise CliError("builtin perturbed: mode must be an integer degree")
        params["mode"] = int(params["mode"])
    return Builtin(name, params)


def _ambient_dim(ambient: str) -> int:
    return 3 if ambient == "r3" else int(ambient[1:])


def _check_ambient(ambient: str) -> str:
    a = ambient.lower()
    if a == "r3" or (a.startswith("h") and a[1:].isdigit() and int(a[1:]) >= 2):
        return a
    raise CliError(f"ambient must be r3 or hN (N >= 2), got {ambient!r}")


def _grid(args) -> tuple[int, int]:
    return GRIDS[args.grid]


def load_radial_grid(path: str) -> RadialGraphSurface:
    """``.npz`` with a 2-D ``radius`` array and an ``ambient`` string (r3 or h3)."""
    try:
        with np.load(path, allow_pickle=False) as data:
            radius = np.array(data["radius"], dtype=float)
            ambient = str(data["ambient"]) if "ambient" in data else "r3"
    except (OSError, KeyError, ValueError) as exc:
        raise CliError(f"cannot read radial grid {path}: {exc}") from None
    try:
        return RadialGraphSurface(radius, ambient)
    except (ValueError, SurfaceValidationError) as exc:
        raise CliError(f"invalid radial grid {path}: {exc}") from None


def load_surface(args, ambient: str, norm=None):
    """A TriangleMesh, a RadialGraphSurface, or an exact CurvatureSummary."""
    sources = [s for s in (args.builtin, args.obj, args.radial_grid) if s]
    if len(sources) != 1:
        raise CliError("give exactly one of --builtin, --obj, --radial-grid")
    nt, nphi = _grid(args)
    if args.obj:
        if ambient != "r3":
            raise CliError("OBJ meshes are Euclidean; use --ambient r3")
        try:
            mesh = read_obj(args.obj)
            mesh.validate()
        except OSError as exc:
            raise CliError(f"cannot read {args.obj}: {exc}") from None
        except (ValueError, SurfaceValidationError) as exc:
            raise CliError(f"invalid mesh {args.obj}: {exc}") from None
        return mesh
    if args.radial_grid:
        surf = load_radial_grid(args.radial_grid)
        if surf.ambient != ambient:
            raise CliError(f"radial grid ambient {surf.ambient} does not match --ambient {ambient}")
        return surf
    b = parse_builtin(args.builtin)
    n = _ambient_dim(ambient)
    if b.name == "circle":
        if ambient != "h2":
            raise CliError("builtin circle lives in H^2; use --ambient h2")
        return geodesic_sphere_summary(2, b.params["r"])
    if b.name == "sphere":
        if ambient == "r3":
            return euclidean_sphere_summary(b.params["r"])
        return geodesic_sphere_summary(n, b.params["r"])
    if ambient not in ("r3", "h3"):
        raise CliError(f"builtin {b.name} is available in r3 and h3 only")
    if b.name == "ellipsoid":
        if ambient != "r3":
            raise CliError("builtin ellipsoid is Euclidean; use --ambient r3")
        return RadialGraphSurface.ellipsoid(b.params["a"], b.params["b"], b.params["c"], nt, nphi)
    if b.name == "perturbed":
        p = b.params
        return RadialGraphSurface.perturbed_sphere(p["r"], p["amp"], p["mode"], 0, ambient, nt, nphi)
    if norm is None:
        raise CliError("builtin wulff needs --norm")
    if ambient != "r3":
        raise CliError("builtin wulff is Euclidean; use --ambient r3")
    return wulff_radial_graph(norm, b.params["r0"], nt, nphi)


def summarize(surface) -> CurvatureSummary:
    if isinstance(surface, CurvatureSummary):
        return surface
    if isinstance(surface, RadialGraphSurface):
        return summarize_radial_graph(surface)
    return summarize_mesh(surface)


def _parse_norm(spec: str | None):
    if not spec:
        return None
    try:
        norm = parse_norm(spec)
    except EllipticityError as exc:
        raise CliError(str(exc), EXIT_HYPOTHESIS) from None
    except (ValueError, TypeError) as exc:
        raise CliError(str(exc)) from None
    try:
        norm.check_ellipticity()
    except EllipticityError as exc:
        raise CliError(str(exc), EXIT_HYPOTHESIS) from None
    return norm


# ---------------------------------------------------------------------------
# commands


def cmd_bound(args) -> int:
    theorem = args.theorem
    ambient = _check_ambient(args.ambient or THEOREM_AMBIENT[theorem])
    p = args.p
    if p is None:
        raise CliError("--p is required")
    norm = _parse_norm(args.norm)
    if theorem == "thm6" and norm is None:
        raise CliError("thm6 needs --norm")
    surface = load_surface(args, ambient, norm)
    summary = summarize(surface)

    wulff = anis = None
    min_hf = None
    if theorem == "thm6":
        if isinstance(surface, CurvatureSummary):
            # exact round sphere: sample it on the grid for the anisotropic data
            nt, nphi = _grid(args)
            surface = RadialGraphSurface.sphere(math.sqrt(summary.area / (4 * math.pi)), "r3", nt, nphi)
        try:
            wulff = wulff_shape(norm, *_grid(args))
        except EllipticityError as exc:
            raise CliError(str(exc), EXIT_HYPOTHESIS) from None
        anis = anisotropic_summary(surface, norm, wulff)
        min_hf = anis.min_HF

    hyp = check_hypotheses(summary, theorem, p, min_HF=min_hf)
    if not hyp.passed and not args.force:
        raise CliError(f"{theorem} hypotheses fail: " + "; ".join(hyp.failures), EXIT_HYPOTHESIS)

    n = _ambient_dim(ambient)
    try:
        if theorem == "thm1":
            w2 = None
            if n >= 3:
                w2 = quermassintegrals(n, summary.enclosed_volume, summary.area, summary.sigma1_integral).W2
            report = thm1_bound(n, w2, summary.area, p)
        elif theorem == "thm2":
            if n != 2:
                raise CliError("thm2 is stated in H^2")
            k = summary.sigma1_integral / summary.area if summary.min_principal == summary.max_principal else None
            if k is None:
                raise CliError("thm2 needs a geodesic circle (builtin circle)")
            report = thm2_bound(summary.area, summary.area * k ** (p - 1.0), p, summary.sigma1_integral)
        elif theorem == "thm3":
            report = thm3_bound(summary.area, summary.sigma1_sq_integral, p)
        elif theorem == "thm4":
            report = thm4_bound(summary.sigma_integrals, n, p)
        elif theorem == "thm5":
            report = thm5_bound(summary.area, summary.sigma1_sq_integral, p)
        else:
            report = thm6_bound(anis, wulff, p)
    except BoundInputError as exc:
        raise CliError(f"{theorem}: {exc}", EXIT_HYPOTHESIS) from None
    report.hypotheses = hyp.as_dict()
    _emit(report.to_json(), args.output)
    return EXIT_OK


def _normal_flow_trace(summary: CurvatureSummary, n: int, t_end: float) -> FlowTrace:
    """Closed-form trace of the unit-speed normal flow in H^n.

    Principal curvatures of parallel hypersurfaces evolve as
    (k cosh t + sinh t) / (cosh t + k sinh t), which is increasing in k.
    """
    trace = FlowTrace("NormalFlow_Hn", dt_policy={"scheme": "closed-form", "sample_dt": SAMPLE_DT})
    count = int(round(t_end / SAMPLE_DT))
    times = [0.0] + [min(SAMPLE_DT * (k + 1), t_end) for k in range(count)]
    if times[-1] < t_end:
        times.append(t_end)

    def evolve(k, t):
        return (k * math.cosh(t) + math.sinh(t)) / (math.cosh(t) + k * math.sinh(t))

    for t in times:
        trace.append(FlowSample(
            t, normal_flow_area(summary, n, t), math.nan,
            evolve(summary.min_principal, t), evolve(summary.max_principal, t),
        ))
    return trace


def cmd_flow(args) -> int:
    kind = args.kind
    if not (args.t_end is not None and math.isfinite(args.t_end) and args.t_end > 0):
        raise CliError(f"invalid parameter: --t-end must be positive, got {args.t_end}")
    if args.dt is not None and not args.dt > 0:
        raise CliError(f"invalid parameter: --dt must be positive, got {args.dt}")
    ambient = _check_ambient(args.ambient or FLOW_AMBIENT[kind])
    norm = _parse_norm(args.norm)
    nt, nphi = _grid(args)
    if kind == "normal-hn":
        if not ambient.startswith("h"):
            raise CliError("normal-hn runs in H^n; use --ambient hN")
        surface = load_surface(args, ambient, norm)
        summary = summarize(surface)
        if not summary.min_principal >= 0:
            raise CliError("normal flow closed form needs a convex surface", EXIT_HYPOTHESIS)
        _emit(_normal_flow_trace(summary, _ambient_dim(ambient), args.t_end).to_csv(), args.output)
        return EXIT_OK
    if ambient != FLOW_AMBIENT[kind]:
        raise CliError(f"{kind} runs in {FLOW_AMBIENT[kind]}, not {ambient}")
    surface = load_surface(args, ambient, norm)
    if isinstance(surface, CurvatureSummary):
        r = math.sqrt(surface.area / (4 * math.pi)) if ambient == "r3" else _sphere_radius_h3(surface.area)
        surface = RadialGraphSurface.sphere(r, ambient, nt, nphi)
    if not isinstance(surface, RadialGraphSurface):
        raise CliError("flows need a star-shaped radial graph (builtin or --radial-grid), not a mesh")
    try:
        if kind == "imcf-h3":
            trace = run_imcf_h3(surface, args.t_end, args.dt)
        else:
            if norm is None:
                raise CliError("iamcf-r3 needs --norm")
            try:
                wulff = wulff_shape(norm, nt, nphi)
            except EllipticityError as exc:
                raise CliError(str(exc), EXIT_HYPOTHESIS) from None
            trace = run_iamcf_r3(surface, norm, wulff, args.t_end, args.dt)
    except FlowBreakdownError as exc:
        _emit(exc.trace.to_csv(), args.output)
        print(f"capbound: flow breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    _emit(trace.to_csv(), args.output)
    return EXIT_OK


def _sphere_radius_h3(area: float) -> float:
    return math.asinh(math.sqrt(area / (4 * math.pi)))


def cmd_validate(args) -> int:
    try:
        results = run_suite(args.only, args.grid)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    sys.stdout.write(render_table(results, args.grid))
    if args.output:
        _emit(report_json(results, args.grid), args.output)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


def cmd_wulff(args) -> int:
    if not args.norm:
        raise CliError("wulff needs --norm")
    norm = _parse_norm(args.norm)
    try:
        w = wulff_shape(norm, *_grid(args))
    except EllipticityError as exc:
        raise CliError(str(exc), EXIT_HYPOTHESIS) from None
    mesh = w.mesh()
    output = args.output or "wulff.obj"
    try:
        tmp = Path(output)
        fd, tmp_name = tempfile.mkstemp(dir=tmp.parent or ".", prefix=f".{tmp.name}.", suffix=".tmp")
        os.close(fd)
        write_obj(tmp_name, mesh.vertices, mesh.faces, comment=f"Wulff shape of {norm.describe()}")
        os.replace(tmp_name, output)
    except OSError as exc:
        raise CliError(f"cannot write {output}: {exc}") from None
    print(json.dumps({
        "norm": norm.describe(),
        "output": str(output),
        "wulff_area_F": w.anisotropic_area,
        "volume": w.volume,
        "identity_residual": w.identity_residual,
        "min_ellipticity": w.min_ellipticity,
    }, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parsing


def _add_surface_args(p):
    p.add_argument("--builtin", help="sphere:r=1 | circle:r=1 | ellipsoid:a,b,c | perturbed:r,amp,mode | wulff[:r0]")
    p.add_argument("--obj", help="closed triangle mesh (OBJ)")
    p.add_argument("--radial-grid", help=".npz with 'radius' (n_theta x n_phi) and 'ambient'")
    p.add_argument("--ambient", help="r3 or hN")
    p.add_argument("--norm", help="euclidean | ellipsoid:a,b,c | lq:q[,eps]")


def _add_common(p):
    p.add_argument("--grid", choices=sorted(GRIDS), default="default", help="radial grid resolution")
    p.add_argument("--output", "-o", help="output path (default: stdout)")
    p.add_argument("--no-banner", action="store_true", default=argparse.SUPPRESS, help="suppress the version banner on stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capbound", description="Sharp p-capacity bounds, flows and validation.")
    parser.add_argument("--config", help="key = value file mirroring flags; command-line flags win")
    parser.add_argument("--no-banner", action="store_true", help="suppress the version banner on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bound", help="evaluate a capacity bound")
    b.add_argument("--theorem", required=True, choices=sorted(THEOREM_AMBIENT))
    b.add_argument("--p", type=float)
    b.add_argument("--force", action="store_true", help="evaluate even if shape hypotheses fail")
    _add_surface_args(b)
    _add_common(b)

    f = sub.add_parser("flow", help="run a curvature flow and write a CSV trace")
    f.add_argument("--kind", required=True, choices=sorted(FLOW_AMBIENT))
    f.add_argument("--t-end", type=float, required=True)
    f.add_argument("--dt", type=float, help="upper limit on the internal step")
    _add_surface_args(f)
    _add_common(f)

    v = sub.add_parser("validate", help="run the acceptance suite")
    v.add_argument("--only", help="comma-separated criterion numbers or names")
    _add_common(v)

    w = sub.add_parser("wulff", help="export the Wulff shape as OBJ")
    w.add_argument("--norm")
    _add_common(w)
    return parser


def read_config(path: str) -> list[str]:
    """Turn ``key = value`` lines into flag tokens. Blank lines and # comments are skipped."""
    tokens = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise CliError(f"{path}:{num}: expected 'key = value'")
        flag = "--" + key.strip().replace("_", "-")
        val = val.strip()
        if val.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif val.lower() in ("false", "no", "off"):
            continue
        else:
            tokens.extend([flag, val])
    return tokens


def _splice_config(argv: list[str]) -> list[str]:
    """Insert config tokens right after the subcommand so later flags override them."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return argv
    tokens = read_config(known.config)
    commands = ("bound", "flow", "validate", "wulff")
    idx = next((i for i, a in enumerate(rest) if a in commands), None)
    if idx is None:
        return rest
    return rest[: idx + 1] + tokens + rest[idx + 1:]


COMMANDS = {"bound": cmd_bound, "flow": cmd_flow, "validate": cmd_validate, "wulff": cmd_wulff}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _splice_config(argv)
    except CliError as exc:
        print(f"capbound: error: {exc}", file=sys.stderr)
        return exc.code
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if not args.no_banner:
        print(f"capbound {__version__}: {args.command}", file=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"capbound: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
