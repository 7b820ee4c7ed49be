"""Command-line frontend.

Subcommands: model, constellation, gen, analyze, laplacian-check,
divergence-audit.  Outputs are byte-deterministic (shortest round-trip
floats, sorted JSON keys).  Exit codes: 0 success, 2 spec or parse error,
3 numerical failure, 4 input mismatch.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from . import extrinsic as ex
from . import iso_comparison as ic
from . import model_space as ms
from .errors import DomainError, MeshError, NumericalError, SpecError
from .mesh import read_off, write_off
from .surfaces import KINDS, generate_surface

log = logging.getLogger("cheegerlab")

EXIT_OK, EXIT_SPEC, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4


class Mismatch(Exception):
    """Inputs are individually valid but do not fit together."""


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w", newline="\n") as fh:
            fh.write(text)


def _dumps(obj):
    return json.dumps(ic.jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(x):
    x = float(x)
    return repr(x) if math.isfinite(x) else "nan"


# ---------------------------------------------------------------------------
# model


def _warping_from_args(args):
    given = [args.b is not None, args.w_csv is not None, args.profile is not None]
    if sum(given) != 1:
        raise SpecError("give exactly one of --b, --w-csv, --profile")
    if args.b is not None:
        return ms.SpaceForm(args.b)
    if args.w_csv is not None:
        return ms.load_profile_csv(args.w_csv)
    return ms.analytic_profile(args.profile)


def cmd_model(args):
    w = _warping_from_args(args)
    M = ms.ModelSpace(args.m, w)
    r_max = args.rmax
    if r_max is None:
        r_max = min(w.domain_end * (1 - 1e-9), 10.0) if math.isfinite(w.domain_end) else 10.0
    if not 0 < args.rmin < r_max:
        raise SpecError("need 0 < --rmin < --rmax")
    r = ms.log_grid(args.rmin, r_max, args.n) if args.spacing == "log" else np.linspace(args.rmin, r_max, args.n)
    cols = [r, ms.eval_w(w, r), ms.eta_w(w, r), ms.curvature_K_w(w, r), ms.sphere_volume(M, r),
            ms.ball_volume(M, r), ms.isoperimetric_quotient(M, r)]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["r", "w", "eta_w", "K_w", "vol_S", "vol_B", "q_w"])
    for row in zip(*cols):
        wr.writerow([_fmt(v) for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# constellation


def cmd_constellation(args):
    con = ic.load_constellation(args.spec)
    rep = ic.constellation_report(con, grid_points=args.grid_points, r_min=args.rmin, r_max=args.rmax,
                                  limit_rmax=args.limit_rmax)
    _emit(_dumps(rep), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# meshes


def cmd_gen(args):
    mesh = generate_surface(args.kind, args.tmax, n_theta=args.n_theta, n_rings=args.n_rings, refine=args.refine,
                            a=args.a, pitch=args.pitch, b=args.b)
    write_off(mesh, args.out)
    log.info("wrote %s (%d faces)", args.out, mesh.n_faces)
    return EXIT_OK


def _load_pair(args):
    mesh = read_off(args.mesh)
    con = ic.load_constellation(args.constellation)
    if con.m != mesh.m:
        raise Mismatch(f"constellation has m={con.m} but the mesh is {mesh.m}-dimensional")
    if con.ambient_b is not None and con.ambient_b != mesh.ambient.b:
        raise Mismatch(f"mesh ambient is {mesh.ambient.header()[1:]} but the constellation has b={con.ambient_b!r}")
    return mesh, con


def _t_grid(args, mesh):
    if args.tmax is not None and args.tmax > mesh.truncation_radius:
        raise MeshError(f"--tmax {args.tmax!r} beyond the mesh truncation radius {mesh.truncation_radius!r}")
    if args.spacing == "linear":
        return ex.default_t_grid(mesh, n=args.n, t_max=args.tmax, t_min=args.tmin)
    t = ex.default_t_grid(mesh, n=2, t_max=args.tmax, t_min=args.tmin)
    return np.geomspace(t[0], t[-1], args.n)


def cmd_analyze(args):
    mesh, con = _load_pair(args)
    t = _t_grid(args, mesh)
    profile = ex.compute_profile(mesh, con.space, t)
    cheeger = ex.cheeger_estimate(mesh, con.space, t, profile=profile, tol=args.tol)
    report = {
        "mesh": mesh.summary(),
        "constellation": {"m": con.m, "ambient": con.ambient_spec, "h": con.h.describe()},
        "isoperimetric": ex.verify_isoperimetric_inequality(profile),
        "monotonicity": ex.monotonicity_report(profile),
        "coarea": ex.coarea_report(profile),
        "cheeger": cheeger.to_dict(),
    }
    if args.laplacian:
        report["laplacian"] = ex.discrete_laplacian_check(mesh, con.space)
    if args.divergence_t is not None:
        report["divergence"] = ex.divergence_audit(mesh, con.space, args.divergence_t)
    os.makedirs(args.out_dir, exist_ok=True)
    ex.write_profile_csv(profile, os.path.join(args.out_dir, "profile.csv"))
    _emit(_dumps(report), os.path.join(args.out_dir, "report.json"))
    summary = {
        "upper_estimate_from_exhaustion": cheeger.upper_estimate_from_exhaustion,
        "sandwich_verdict": cheeger.sandwich_verdict,
        "isoperimetric_pass": report["isoperimetric"]["pass"],
        "monotonicity_pass": report["monotonicity"]["pass"],
    }
    sys.stdout.write(_dumps(summary))
    return EXIT_OK


def cmd_laplacian(args):
    mesh, con = _load_pair(args)
    rep = ex.discrete_laplacian_check(mesh, con.space, slack=args.slack)
    _emit(_dumps(rep), args.out)
    return EXIT_OK


def cmd_divergence(args):
    mesh, con = _load_pair(args)
    rep = ex.divergence_audit(mesh, con.space, args.t)
    _emit(_dumps(rep), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="cheegerlab", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("model", help="tabulate a model space")
    s.add_argument("--b", type=float)
    s.add_argument("--w-csv")
    s.add_argument("--profile", help="named analytic warping, e.g. exp-r2")
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--rmin", type=float, default=1e-3)
    s.add_argument("--rmax", type=float)
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--spacing", choices=("linear", "log"), default="log")
    s.add_argument("--out", "-o")
    s.set_defaults(fn=cmd_model)

    s = sub.add_parser("constellation", help="balance verdicts and Cheeger bounds")
    s.add_argument("spec")
    s.add_argument("--grid-points", type=int, default=1000)
    s.add_argument("--rmin", type=float, default=1e-3)
    s.add_argument("--rmax", type=float)
    s.add_argument("--limit-rmax", type=float, default=40.0)
    s.add_argument("--out", "-o")
    s.set_defaults(fn=cmd_constellation)

    s = sub.add_parser("gen", help="generate a test surface mesh")
    s.add_argument("--kind", choices=KINDS, required=True)
    s.add_argument("--tmax", type=float, required=True)
    s.add_argument("--a", type=float, default=1.0, help="catenoid neck radius")
    s.add_argument("--pitch", type=float, default=2 * math.pi, help="helicoid pitch")
    s.add_argument("--b", type=float, default=-1.0, help="curvature for h2-in-h3")
    s.add_argument("--n-theta", type=int, default=4096)
    s.add_argument("--n-rings", type=int)
    s.add_argument("--refine", type=int, default=0)
    s.add_argument("--out", "-o", required=True)
    s.set_defaults(fn=cmd_gen)

    def mesh_args(s):
        s.add_argument("mesh")
        s.add_argument("--constellation", "-c", required=True)

    s = sub.add_parser("analyze", help="growth profile, isoperimetry and Cheeger estimate of a mesh")
    mesh_args(s)
    s.add_argument("--tmin", type=float)
    s.add_argument("--tmax", type=float)
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--spacing", choices=("linear", "log"), default="linear")
    s.add_argument("--tol", type=float, default=ex.SANDWICH_TOL)
    s.add_argument("--laplacian", action="store_true")
    s.add_argument("--divergence-t", type=float)
    s.add_argument("--out-dir", default=".")
    s.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("laplacian-check", help="discrete Laplacian comparison")
    mesh_args(s)
    s.add_argument("--slack", type=float, default=ex.LAPLACIAN_SLACK)
    s.add_argument("--out", "-o")
    s.set_defaults(fn=cmd_laplacian)

    s = sub.add_parser("divergence-audit", help="divergence theorem audit on D_t")
    mesh_args(s)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--out", "-o")
    s.set_defaults(fn=cmd_divergence)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.fn(args)
    except (Mismatch, MeshError) as exc:
        code, msg = EXIT_MISMATCH, exc
    except NumericalError as exc:
        code, msg = EXIT_NUMERIC, exc
    except (SpecError, DomainError, ValueError, OSError) as exc:
        code, msg = EXIT_SPEC, exc
    sys.stderr.write(f"cheegerlab: error: {msg}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
