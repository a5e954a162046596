"""Command-line front end.

Exit status: 0 success, 2 invalid arguments, 3 domain error, 4 numerical
failure or a verification that missed its tolerance.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import parabolic, rotational
from .barriers import BarrierQuery, bounds
from .errors import ClassificationError, DomainError, NumericalFailure, ValidationError
from .graph_curvature import GraphSample, convergence_orders, divergence_residual
from .profiles import ClosedProfile, load_profile, revolution_mesh

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_NUMERIC = 0, 2, 3, 4

# (file stem, n, H) for the datasets behind the three figures, all with r = 2
FIGURES = [
    ("figure1_n3_H1-3", 3, Fraction(1, 3)),
    ("figure1_n3_H1-5", 3, Fraction(1, 5)),
    ("figure2_n4_H1-2", 4, Fraction(1, 2)),
    ("figure2_n4_H1-3", 4, Fraction(1, 3)),
    ("figure3_n4_H1", 4, Fraction(1)),
]


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("must be an integer >= 2")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hrsurf", description="Constant H_r hypersurfaces in H^n x R")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="entire graph or compact sphere for d = 0")
    c.add_argument("n", type=int)
    c.add_argument("r", type=int)
    c.add_argument("H", type=_fraction)

    pr = sub.add_parser("profile", help="write a generating curve")
    kinds = pr.add_subparsers(dest="kind", required=True)

    def common(sp, mesh=False):
        sp.add_argument("--samples", type=_positive_int, default=512)
        sp.add_argument("-o", "--out", type=Path, help="output file (default: stdout)")
        choices = ["csv", "json", "mesh"] if mesh else ["csv", "json"]
        sp.add_argument("--format", choices=choices, default=None)

    k = kinds.add_parser("rotational")
    k.add_argument("n", type=int)
    k.add_argument("r", type=int)
    k.add_argument("H", type=_fraction)
    k.add_argument("--rho-max", type=float, default=rotational.RHO_MAX)
    k.add_argument("--closed", action="store_true", help="glue compact spheres with their reflection")
    k.add_argument("--segments", type=int, default=48, help="angular segments for mesh output")
    common(k, mesh=True)

    k = kinds.add_parser("parabolic-minimal")
    k.add_argument("n", type=int)
    k.add_argument("r", type=int)
    k.add_argument("c", type=float)
    common(k)

    k = kinds.add_parser("screw-flat")
    k.add_argument("c", type=float)
    k.add_argument("l", type=float)
    common(k)

    k = kinds.add_parser("screw-ode")
    k.add_argument("n", type=int)
    k.add_argument("S2", type=float, help="constant S_2")
    k.add_argument("d", type=float, help="initial value of (z/W^2) y^(4-n)")
    k.add_argument("y0", type=float)
    k.add_argument("y1", type=float)
    k.add_argument("--l", type=_floats, default=None, help="pitch l_1,...,l_{n-1}")
    common(k)

    k = kinds.add_parser("entire-log")
    k.add_argument("n", type=int)
    k.add_argument("k", type=float, help="constant H_2 in (0, (n-2)/n)")
    common(k)

    v = sub.add_parser("verify", help="check a profile file against its declared constant")
    v.add_argument("file", type=Path)

    res = sub.add_parser("residual", help="divergence-form residual of graph samples")
    res.add_argument("files", type=Path, nargs="+", help="one file, or nested refinements coarse to fine")
    res.add_argument("r", type=int, help="order r, so S_{r+1} is checked")

    b = sub.add_parser("bound", help="barrier height and slope bounds")
    b.add_argument("n", type=int)
    b.add_argument("r", type=int)
    b.add_argument("R", type=float)

    f = sub.add_parser("figures", help="regenerate the figure datasets")
    f.add_argument("-o", "--out-dir", type=Path, default=Path("figures"))
    f.add_argument("--samples", type=_positive_int, default=512)
    return p


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _serialise(obj, fmt: str | None, out: Path | None, segments: int = 48) -> str:
    if fmt is None:
        fmt = "json" if out is not None and out.suffix.lower() == ".json" else \
              "mesh" if out is not None and out.suffix.lower() == ".off" else "csv"
    if fmt == "mesh":
        return revolution_mesh(obj, segments)
    return obj.to_json() + "\n" if fmt == "json" else obj.to_csv()


def _cmd_classify(a):
    spec = rotational.RotationalSpec(a.n, a.r, a.H)
    shape = rotational.classify(spec)
    thr = spec.threshold
    print(shape.value)
    print(f"threshold (n-r)/n = {thr} = {float(thr)!r}")
    return EXIT_OK


def _build_profile(a):
    if a.kind == "rotational":
        spec = rotational.RotationalSpec(a.n, a.r, a.H)
        curve = rotational.profile(spec, a.samples, a.rho_max)
        if a.closed:
            return rotational.glue_closed_profile(curve, spec)
        return curve
    if a.kind == "parabolic-minimal":
        return parabolic.minimal_parabolic_profile(a.n, a.r, a.c, a.samples)
    if a.kind == "screw-flat":
        return parabolic.kext_zero_screw_profile(a.c, a.l, a.samples)
    if a.kind == "screw-ode":
        l = tuple(a.l) if a.l is not None else ()
        spec = parabolic.ScrewSpec(a.n, 2, l, a.S2)
        return parabolic.screw_ode_solve(spec, a.d, a.y0, a.y1, a.samples - 1)
    if a.kind == "entire-log":
        return parabolic.entire_log_profile(a.n, a.k, a.samples)
    raise ValidationError(f"unknown profile kind {a.kind}")


def _cmd_profile(a):
    obj = _build_profile(a)
    _emit(_serialise(obj, a.format, a.out, getattr(a, "segments", 48)), a.out)
    return EXIT_OK


def verify_file(path: Path):
    obj = load_profile(path)
    curve = obj.upper if isinstance(obj, ClosedProfile) else obj
    if curve.param == "rho":
        return rotational.verify_constant_hr(curve)
    return parabolic.verify_screw_profile(curve)


def _cmd_verify(a):
    rep = verify_file(a.file)
    out = rep.summary()
    out["passed"] = rep.passed
    sys.stdout.write(_dump(out))
    return EXIT_OK if rep.passed else EXIT_NUMERIC


def _cmd_residual(a):
    samples = [GraphSample.load(p) for p in a.files]
    out = {"r": a.r, "checked": f"S_{a.r + 1}"}
    if len(samples) == 1:
        out["reports"] = [divergence_residual(samples[0], a.r).summary()]
    else:
        orders, rms, reports = convergence_orders(samples, a.r)
        out["reports"] = [rep.summary() for rep in reports]
        out["rms_on_coarse_nodes"] = rms
        out["orders"] = orders
    sys.stdout.write(_dump(out))
    return EXIT_OK


def _cmd_bound(a):
    sys.stdout.write(_dump(bounds(BarrierQuery(a.n, a.r, a.R))))
    return EXIT_OK


def write_figures(out_dir: Path, samples: int = 512) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    manifest = []
    for stem, n, H in FIGURES:
        spec = rotational.RotationalSpec(n, 2, H)
        curve = rotational.profile(spec, samples)
        obj = rotational.glue_closed_profile(curve, spec) \
            if rotational.classify(spec) is rotational.Shape.COMPACT_SPHERE else curve
        path = out_dir / f"{stem}.csv"
        path.write_text(obj.to_csv())
        written.append(path)
        manifest.append({"file": path.name, "n": n, "r": 2, "H": str(H),
                         "shape": rotational.classify(spec).value})
    mesh = out_dir / "figure3_n4_H1.off"
    spec = rotational.RotationalSpec(4, 2, 1)
    mesh.write_text(revolution_mesh(rotational.glue_closed_profile(rotational.profile(spec, 128), spec)))
    written.append(mesh)
    man = out_dir / "manifest.json"
    man.write_text(_dump({"schema": 1, "datasets": manifest, "mesh": mesh.name}))
    written.append(man)
    return written


def _cmd_figures(a):
    for path in write_figures(a.out_dir, a.samples):
        print(path)
    return EXIT_OK


COMMANDS = {
    "classify": _cmd_classify,
    "profile": _cmd_profile,
    "verify": _cmd_verify,
    "residual": _cmd_residual,
    "bound": _cmd_bound,
    "figures": _cmd_figures,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ValidationError, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"hrsurf: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ClassificationError) as exc:
        print(f"hrsurf: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalFailure as exc:
        print(f"hrsurf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
