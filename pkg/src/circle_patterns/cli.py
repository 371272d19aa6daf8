"""Command-line interface.

Every subcommand writes one JSON document to standard output (or ``--output``)
and a short human-readable summary to standard error.

Exit codes: 0 success, 1 validation failure, 2 solver failure, 3 I/O or
format error.  Structured failures still emit a JSON error object.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from . import crossratio as cr
from . import forms
from . import holonomy as ho
from . import io
from . import tangent as tg
from .surface import TriangulationError, fundamental_domain

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_FORMAT = 0, 1, 2, 3

EXAMPLES = {"hex-torus": cr.example_hex_torus, "bolza": cr.example_bolza}


class ValidationFailure(Exception):
    def __init__(self, message: str, payload: dict):
        super().__init__(message)
        self.payload = payload


def _summary(msg: str) -> None:
    print(msg, file=sys.stderr)


def _develop(X: cr.CrossRatioSystem, args) -> ho.DevelopedPattern:
    T = X.triangulation
    face = getattr(args, "seed_face", 0) or 0
    if not 0 <= face < T.n_faces:
        raise ValidationFailure(f"seed face {face} out of range", {"seed_face": face})
    return ho.develop(X, fundamental_domain(T, face))


def _tri_summary(T) -> dict:
    return {"genus": T.genus, "n_vertices": T.n_vertices, "n_edges": T.n_edges,
            "n_faces": T.n_faces, "degrees": [link.degree for link in T.links]}


def _residuals(X) -> dict:
    T = X.triangulation
    return {
        "max_product": max(abs(cr.product_residual(X, i)) for i in range(T.n_vertices)),
        "max_sum": max(abs(cr.sum_residual(X, i)) for i in range(T.n_vertices)),
    }


# --- subcommands ---------------------------------------------------------------------

def cmd_example(args):
    T, X = EXAMPLES[args.name]()
    _summary(f"{args.name}: genus {T.genus}, {T.n_edges} edges")
    return X.to_dict()


def cmd_validate(args):
    X = io.load_pattern(args.pattern)
    T = X.triangulation
    res = _residuals(X)
    delaunay = cr.is_delaunay(T, X.theta, args.max_cycle_len)
    ok = max(res.values()) <= args.tol and delaunay.ok
    out = {"valid": ok, "tol": args.tol, "triangulation": _tri_summary(T), "residuals": res,
           "delaunay": delaunay.to_dict()}
    _summary(f"valid={ok} residual={max(res.values()):.3e} delaunay={delaunay.ok}")
    if not ok:
        raise ValidationFailure("pattern failed validation", out)
    return out


def cmd_solve(args):
    X = io.load_pattern(args.pattern)
    T = X.triangulation
    theta = io.load_vector(args.theta, "theta") if args.theta else X.theta
    u0 = io.load_vector(args.init, "log_mag") if args.init else X.log_mag
    if theta.shape != (T.n_edges,) or u0.shape != (T.n_edges,):
        raise io.FormatError(f"expected {T.n_edges} values per edge")
    result = cr.gauss_newton(T, theta, u0, tol=args.tol, max_iter=args.max_iter)
    _summary(f"converged in {result.iterations} iterations, residual {result.residual:.3e}")
    return {"pattern": result.system.to_dict(), "iterations": result.iterations,
            "residual": result.residual, "history": result.history}


def cmd_tangent(args):
    X = io.load_pattern(args.pattern)
    K = tg.kernel_real(X, args.tol) if args.field == "real" else tg.kernel_complex(X, args.tol)
    other = tg.kernel_complex(X, args.tol) if args.field == "real" else tg.kernel_real(X, args.tol)
    dims = {K.field: K.dim, other.field: other.dim}
    _summary(f"dim W complex={dims['complex']} real={dims['real']}")
    out = K.to_dict()
    out.update({"dims": dims, "basis": K.basis.T})
    return out


def cmd_holonomy(args):
    X = io.load_pattern(args.pattern)
    P = _develop(X, args)
    D = P.domain
    gens = [{"index": r, "edge": int(X.triangulation.edge_of[h]), "half_edge": h, "matrix": P.rho[r]}
            for r, h in enumerate(D.positive)]
    out = {"generators": gens, "relator_defect": P.relator_defect(),
           "vertex_cycle_defects": P.vertex_cycle_defects(),
           "cross_ratio_defect": P.cross_ratio_defect(), "root_face": D.root}
    _summary(f"{len(gens)} generators, relator defect {out['relator_defect']:.3e}")
    return out


def cmd_forms(args):
    X = io.load_pattern(args.pattern)
    P = _develop(X, args)
    K = tg.kernel_complex(X, args.tol)
    G, C, H = forms.gram_matrices(X, K.basis, P)
    Kr = tg.kernel_real(X, args.tol)
    R, _, _ = forms.gram_matrices(X, Kr.basis.astype(complex), P)
    _summary(f"Gram matrices on {K.dim} complex and {Kr.dim} real basis vectors")
    return {"pairs": args.pairs, "complex_dim": K.dim, "real_dim": Kr.dim,
            "goldman": G, "cup": C, "half_penner": H, "real_goldman": R}


def cmd_check_theorem(args):
    X = io.load_pattern(args.pattern)
    P = _develop(X, args)
    report = forms.check_theorem(X, args.tol, P)
    out = report.to_dict()
    _summary(f"passed={report.passed} max discrepancy {report.max_discrepancy:.3e}")
    if not report.passed:
        raise ValidationFailure("forms disagree beyond tolerance", out)
    return out


def cmd_rigidity(args):
    X = io.load_pattern(args.pattern)
    P = _develop(X, args)
    report = tg.rigidity_check(X, P, args.tol)
    _summary(f"rigid={report.rigid} rank {report.rank}/{report.n_fields}")
    return report.to_dict()


def build_report(X: cr.CrossRatioSystem, P: ho.DevelopedPattern, tol: float = 1e-9,
                 max_cycle_len: int = 12) -> dict:
    """Everything known about a pattern in one JSON-ready dictionary."""
    T = X.triangulation
    Kc, Kr = tg.kernel_complex(X, tol), tg.kernel_real(X, tol)
    theorem = forms.check_theorem(X, tol, P)
    return {
        "version": __version__,
        "tolerances": {"rank": tol, "theorem": tol, "max_cycle_len": max_cycle_len},
        "triangulation": _tri_summary(T),
        "residuals": _residuals(X),
        "delaunay": cr.is_delaunay(T, X.theta, max_cycle_len).to_dict(),
        "kernel": {"complex": Kc.to_dict(), "real": Kr.to_dict()},
        "holonomy": {"relator_defect": P.relator_defect(),
                     "vertex_cycle_defects": P.vertex_cycle_defects(),
                     "cross_ratio_defect": P.cross_ratio_defect()},
        "rigidity": tg.rigidity_check(X, P, tol).to_dict(),
        "theorem": theorem.to_dict(),
    }


def cmd_report(args):
    X = io.load_pattern(args.pattern)
    P = _develop(X, args)
    out = build_report(X, P, args.tol, args.max_cycle_len)
    if args.figures:
        from . import plotting

        d = args.figures
        th = out["theorem"]
        out["figures"] = {
            "developed": plotting.plot_developed(P, os.path.join(d, "developed.png")),
            "spectra": plotting.plot_spectra(
                {"complex": out["kernel"]["complex"]["singular_values"],
                 "real": out["kernel"]["real"]["singular_values"]}, args.tol,
                os.path.join(d, "spectra.png")),
            "gram": plotting.plot_gram(
                {"goldman": th["goldman"], "half_penner": th["half_penner"],
                 "real_goldman": th["real_goldman"]}, os.path.join(d, "gram.png")),
        }
    _summary(f"theorem passed={out['theorem']['passed']}, "
             f"dims complex={out['kernel']['complex']['dim']} real={out['kernel']['real']['dim']}")
    return out


# --- argument parsing ---------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="circle-patterns", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write JSON here instead of standard output")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, pattern=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if pattern:
            sp.add_argument("pattern", help="pattern JSON file")
        sp.set_defaults(func=func)
        return sp

    sp = add("example", cmd_example, "print a built-in example pattern", pattern=False)
    sp.add_argument("name", choices=sorted(EXAMPLES))

    sp = add("validate", cmd_validate, "check the cross-ratio equations and Delaunay angles")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--max-cycle-len", type=int, default=12)

    sp = add("solve", cmd_solve, "solve for log-magnitudes with the angles fixed")
    sp.add_argument("--theta", help="JSON file with angles (list or {'theta': [...]})")
    sp.add_argument("--init", help="JSON file with initial log-magnitudes")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-iter", type=int, default=100)

    sp = add("tangent", cmd_tangent, "kernel of the linearized equations")
    sp.add_argument("--field", choices=("real", "complex"), default="complex")
    sp.add_argument("--tol", type=float, default=1e-9)

    for name, func, help_ in (("holonomy", cmd_holonomy, "developing map holonomy"),
                              ("forms", cmd_forms, "Gram matrices of the three forms"),
                              ("check-theorem", cmd_check_theorem, "compare the three forms"),
                              ("rigidity", cmd_rigidity, "infinitesimal rigidity test"),
                              ("report", cmd_report, "full report, optionally with figures")):
        sp = add(name, func, help_)
        sp.add_argument("--seed-face", type=int, default=0, help="root face of the fundamental domain")
        if name != "holonomy":
            sp.add_argument("--tol", type=float, default=1e-9)
        if name == "forms":
            sp.add_argument("--pairs", choices=("basis",), default="basis")
        if name == "report":
            sp.add_argument("--max-cycle-len", type=int, default=12)
            sp.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR")
    return p


def _emit(obj, output: str | None) -> None:
    text = io.dumps(obj) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error(kind: str, message: str, **extra) -> dict:
    err = {"type": kind, "message": message}
    err.update(extra)
    return {"error": err}


def run(argv=None) -> int:
    args = make_parser().parse_args(argv)
    output = getattr(args, "output", None)
    try:
        result = args.func(args)
        code = EXIT_OK
    except ValidationFailure as exc:
        result, code = dict(exc.payload, error={"type": "validation", "message": str(exc)}), EXIT_INVALID
    except (cr.SolverError, np.linalg.LinAlgError) as exc:
        result, code = _error(type(exc).__name__, str(exc)), EXIT_SOLVER
    except io.FormatError as exc:
        result, code = _error("FormatError", str(exc)), EXIT_FORMAT
    except (TriangulationError, cr.InvalidAngles, ho.DegenerateLayout, ho.HolonomyInconsistent,
            tg.NotInW, tg.DegenerateLink, ValueError) as exc:
        result, code = _error(type(exc).__name__, str(exc)), EXIT_INVALID
    if code != EXIT_OK:
        _summary(f"error: {result['error']['message']}")
    try:
        _emit(result, output)
    except OSError as exc:
        _summary(f"error: cannot write {output}: {exc.strerror}")
        return EXIT_FORMAT
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
