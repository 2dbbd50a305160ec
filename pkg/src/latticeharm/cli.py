"""Command-line front end: ``latticeharm <command> [options]``.

Every command reads and writes JSON.  The output is a mapping
``{"version", "command", "config", "result"}`` (or ``"error"`` in place of
``"result"``), where ``config`` is the fully resolved set of options.

Exit codes: 0 success, 2 invalid input, 3 failed numerical check.
"""

import argparse
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .errors import LatticeHarmError, ValidationError
from .generate import from_spec
from .heat import smoothing_report, trajectory, wellposedness_check
from .io import (dumps, parse_basis, parse_float, read_json, samples_from_json, samples_to_json,
                 series_from_json, series_to_json)
from .lattice import enumerate_dual_lattice
from .regularity import Thresholds, classify
from .series import analyze, pairing_E, sample
from .spaces import (MixedNormSpec, duality_gap, dual_witness, modulation_norms,
                     moderate_check, periodic_space_norm, weight_from_json)
from .stft import GaussianWindow, coefficient_via_stft, make_grid, parseval_stft, stft_dump

__all__ = ["main", "run", "build_parser"]

THREADS_ENV = "LATTICEHARM_THREADS"
# options that steer the process rather than the computation
_PLUMBING = {"command", "config", "output", "threads", "func"}


class CheckFailed(Exception):
    """A verification command ran but its identity did not hold."""

    def __init__(self, result):
        super().__init__("check failed")
        self.result = result


def _bundled(name):
    return resources.files("latticeharm").joinpath("data", name)


def _load_series(path):
    if path in (None, ""):
        raise ValidationError("an input series is required (--input)")
    if path == "-":
        import json

        return series_from_json(json.load(sys.stdin))
    if isinstance(path, str) and path.startswith("bundled:"):
        text = _bundled(path.split(":", 1)[1]).read_text()
        import json

        return series_from_json(json.loads(text))
    return series_from_json(read_json(path))


def _floats(text, name):
    if isinstance(text, (list, tuple)):
        return [parse_float(v) for v in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    try:
        return [parse_float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"--{name} must be a comma separated list of numbers",
                              value=text) from None


def _ints(text, name):
    vals = _floats(text, name)
    if any(v != int(v) for v in vals):
        raise ValidationError(f"--{name} must hold integers", value=text)
    return [int(v) for v in vals]


def _json_opt(text, name):
    if text is None or isinstance(text, dict):
        return text
    import json

    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise ValidationError(f"--{name} must be a JSON object", value=text) from None


def _spec(args, d):
    q = _floats(args.q, "q")
    if len(q) == 1:
        q = q * d
    tau = _ints(args.tau, "tau") if args.tau not in (None, "") else None
    return MixedNormSpec(tuple(q), tuple(tau) if tau else None)


def _grid(series, window, args, alphas=()):
    kw = {"tol": float(args.grid_tol)}
    if args.n is not None:
        kw["n"] = int(args.n)
    if args.xi_step is not None:
        kw["xi_step"] = float(args.xi_step)
    if getattr(args, "xi_radius", None) is not None:
        kw["xi_radius"] = float(args.xi_radius)
    return make_grid(series, window, alphas=alphas, **kw)


# ---------------------------------------------------------------- commands

def cmd_lattice(args):
    L = parse_basis(args.basis)
    D = L.dual()
    out = {"basis": L.basis.tolist(), "dual": D.basis.tolist(), "volume": L.volume,
           "dualVolume": D.volume, "condition": float(np.linalg.cond(L.basis))}
    if args.radius is not None:
        pts = enumerate_dual_lattice(L, float(args.radius))
        out["dualPoints"] = [list(p) for p in pts]
    return out


def cmd_gen(args):
    spec = {"kind": args.kind, "radius": 2 * math.pi * float(args.radius), "seed": int(args.seed)}
    if args.kind == "gevrey":
        if args.s is None or args.r is None:
            raise ValidationError("gevrey generator needs --s and --r")
        spec.update(s=float(args.s), r=float(args.r))
    else:
        if args.N is None:
            raise ValidationError("poly generator needs --N")
        spec["N"] = float(args.N)
    return series_to_json(from_spec(spec, parse_basis(args.basis)))


def cmd_analyze(args):
    samples = samples_from_json(read_json(args.input))
    if args.max_radius is None:
        raise ValidationError("analyze needs --max-radius")
    f = analyze(samples, float(args.max_radius), method=args.method, atol=float(args.atol))
    return series_to_json(f)


def cmd_synth(args):
    return samples_to_json(sample(_load_series(args.input), int(args.n)))


def cmd_stft(args):
    f = _load_series(args.input)
    w = GaussianWindow(float(args.sigma), f.dim)
    return stft_dump(f, w, _grid(f, w, args))


def cmd_coeff_stft(args):
    f = _load_series(args.input)
    w = GaussianWindow(float(args.sigma), f.dim)
    if args.alpha:
        A = np.array([_ints(a, "alpha") for a in args.alpha], dtype=np.int64).reshape(-1, f.dim)
    else:
        A = f.indices
    c = coefficient_via_stft(f, w, A, _grid(f, w, args, alphas=A))
    direct = np.array([f[tuple(a)] for a in A])
    err = float(np.max(np.abs(c - direct))) if len(A) else 0.0
    out = {"coefficients": [{"index": [int(v) for v in a], "viaStft": complex(v),
                             "direct": complex(u)} for a, v, u in zip(A, c, direct)],
           "maxError": err, "checkTol": float(args.check_tol), "ok": err < float(args.check_tol)}
    if not out["ok"]:
        raise CheckFailed(out)
    return out


def cmd_parseval_check(args):
    f = _load_series(args.input)
    g = _load_series(args.input2)
    w = GaussianWindow(float(args.sigma), f.dim)
    value, mass = parseval_stft(f, g, w, _grid([f, g], w, args))
    exact = pairing_E(f, g)
    scale = max(abs(exact), 1e-300)
    rel = abs(value - exact) / scale
    out = {"viaStft": value, "pairing": exact, "l1Mass": mass, "relativeError": rel,
           "checkTol": float(args.check_tol), "ok": rel < float(args.check_tol)}
    if not out["ok"]:
        raise CheckFailed(out)
    return out


def cmd_classify(args):
    f = _load_series(args.input)
    thr = Thresholds(residual=float(args.residual), min_shells=int(args.min_shells))
    return classify(f, thr).to_json()


def cmd_norm(args):
    f = _load_series(args.input)
    omega = weight_from_json(_json_opt(args.weight, "weight"))
    spec = _spec(args, f.dim)
    if not args.modulation:
        return {"weight": omega.to_json(), "spec": spec.to_json(),
                "periodicSpaceNorm": periodic_space_norm(f, omega, spec)}
    w = GaussianWindow(float(args.sigma), f.dim)
    out = modulation_norms(f, omega, spec, w, _grid(f, w, args))
    return {"weight": omega.to_json(), "spec": spec.to_json(), **out}


def cmd_pairing(args):
    f = _load_series(args.input)
    g = _load_series(args.input2)
    return {"pairing": pairing_E(f, g, conjugate=not args.bilinear),
            "conjugate": not args.bilinear}


def cmd_duality(args):
    f = _load_series(args.input)
    omega = weight_from_json(_json_opt(args.weight, "weight"))
    q = parse_float(args.q)
    conj = not args.bilinear
    out = {"q": q, "weight": omega.to_json(), "conjugate": conj}
    if args.input2:
        g = _load_series(args.input2)
    else:
        g = dual_witness(f, omega, q, conjugate=conj)
        out["witness"] = series_to_json(g)
    out.update(duality_gap(f, g, omega, q, conjugate=conj))
    return out


def cmd_heat(args):
    f = _load_series(args.input)
    times = _floats(args.t, "t")
    if args.mode == "trajectory":
        return trajectory(f, times).to_json()
    if args.mode == "smoothing":
        return {"reports": [{"t": t, "report": smoothing_report(f, t).to_json()} for t in times]}
    lo, hi = _floats(args.s_range, "s-range")
    out = wellposedness_check(f, (lo, hi), times)
    if not out["ok"]:
        raise CheckFailed(out)
    return out


def cmd_moderate_check(args):
    omega = weight_from_json(_json_opt(args.weight, "weight"))
    v_obj = _json_opt(args.v, "v")
    v = weight_from_json(v_obj) if v_obj is not None else omega.companion()[0]
    out = moderate_check(omega, v, float(args.radius), int(args.samples), int(args.seed),
                         int(args.dim))
    out = {"weight": omega.to_json(), "v": v.to_json(), **out}
    if not out["ok"]:
        raise CheckFailed(out)
    return out


# ---------------------------------------------------------------- parser

def _stft_opts(p, n_help="x grid points per axis (default 2K+2, K = largest |index|)"):
    p.add_argument("--sigma", type=float, default=1.0, help="Gaussian window width")
    p.add_argument("--n", type=int, default=None, help=n_help)
    p.add_argument("--xi-step", type=float, default=None,
                   help="physical xi step along the widest dual axis (default 1/(8 sigma))")
    p.add_argument("--grid-tol", type=float, default=1e-13,
                   help="window tail level fixing the xi radius (default 1e-13)")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option values; flags override it")
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help=f"BLAS threads (default: ${THREADS_ENV} or all cores)")

    parser = argparse.ArgumentParser(prog="latticeharm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"latticeharm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(func=func)
        return p

    p = add("lattice", cmd_lattice, "dual basis, volume and optional dual points")
    p.add_argument("--basis", default="id1", help="idN, JSON matrix (rows) or file")
    p.add_argument("--radius", type=float, default=None, help="list dual points up to this radius")

    p = add("gen", cmd_gen, "seeded series with planted Gevrey or polynomial decay")
    p.add_argument("--kind", choices=["gevrey", "poly"], default="gevrey")
    p.add_argument("--s", type=float, default=None, help="Gevrey order")
    p.add_argument("--r", type=float, default=None, help="rate; negative plants growth")
    p.add_argument("--N", type=float, default=None, help="polynomial order; negative is growth")
    p.add_argument("--radius", type=float, default=40.0,
                   help="support radius in units of 2 pi, so 40 keeps |alpha| <= 80 pi")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--basis", default="id1")

    p = add("analyze", cmd_analyze, "Fourier coefficients of sampled data")
    p.add_argument("--input", help="samples JSON")
    p.add_argument("--max-radius", type=float, default=None, help="largest |alpha| kept")
    p.add_argument("--method", choices=["fft", "direct"], default="fft")
    p.add_argument("--atol", type=float, default=0.0, help="drop coefficients below this")

    p = add("synth", cmd_synth, "sample a series on the n^d grid of its cell")
    p.add_argument("--input", help="series JSON")
    p.add_argument("--n", type=int, default=16)

    p = add("stft", cmd_stft, "plot-ready STFT dump")
    p.add_argument("--input", help="series JSON")
    p.add_argument("--xi-radius", type=float, default=None)
    _stft_opts(p)

    p = add("coeff-stft", cmd_coeff_stft, "recover coefficients from the STFT")
    p.add_argument("--input", help="series JSON")
    p.add_argument("--alpha", action="append", default=None,
                   help="index such as 1,0 (repeatable; default: all indices)")
    p.add_argument("--check-tol", type=float, default=1e-6)
    _stft_opts(p)

    p = add("parseval-check", cmd_parseval_check, "compare the STFT double integral with (f,g)_E")
    p.add_argument("--input", default="bundled:parseval_f.json")
    p.add_argument("--input2", default="bundled:parseval_g.json")
    p.add_argument("--check-tol", type=float, default=1e-6)
    _stft_opts(p)

    p = add("classify", cmd_classify, "decay class of a coefficient sequence")
    p.add_argument("--input", help="series JSON")
    p.add_argument("--residual", type=float, default=0.5)
    p.add_argument("--min-shells", type=int, default=8)

    p = add("norm", cmd_norm, "weighted mixed norms, optionally the M and W norms")
    p.add_argument("--input", help="series JSON")
    p.add_argument("--q", default="inf", help="exponent or comma list (default inf)")
    p.add_argument("--tau", default=None, help="1-based axis order, e.g. 2,1")
    p.add_argument("--weight", default=None, help='JSON, e.g. {"variant":"polynomial","t":1}')
    p.add_argument("--modulation", action="store_true", help="also compute M and W norms")
    _stft_opts(p)

    p = add("pairing", cmd_pairing, "(f, g)_E")
    p.add_argument("--input")
    p.add_argument("--input2")
    p.add_argument("--bilinear", action="store_true", help="omit the complex conjugate")

    p = add("duality", cmd_duality, "Hoelder ratio, with the extremal g when --input2 is absent")
    p.add_argument("--input")
    p.add_argument("--input2", default=None)
    p.add_argument("--q", default="2")
    p.add_argument("--weight", default=None)
    p.add_argument("--bilinear", action="store_true")

    p = add("heat", cmd_heat, "heat flow: trajectory, smoothing report or class check")
    p.add_argument("--input")
    p.add_argument("--t", default="0.1", help="comma list of times")
    p.add_argument("--mode", choices=["trajectory", "smoothing", "wellposedness"],
                   default="trajectory")
    p.add_argument("--s-range", default="0.45,0.55", help="accepted s interval (wellposedness)")

    p = add("moderate-check", cmd_moderate_check, "sampled moderateness constant of a weight")
    p.add_argument("--weight", default=None)
    p.add_argument("--v", default=None, help="submultiplicative weight (default: companion)")
    p.add_argument("--radius", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=1)
    return parser


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def _resolve(parser, argv):
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_json(args.config)
        if not isinstance(cfg, dict):
            raise ValidationError("--config must hold a JSON object", path=args.config)
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        if cfg.pop("command", args.command) != args.command:
            raise ValidationError("config is for another command", command=args.command)
        sp = _subparser(parser, args.command)
        known = {a.dest for a in sp._actions} - _PLUMBING - {"help"}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise ValidationError("unknown config keys", keys=unknown, allowed=sorted(known))
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in _PLUMBING}


def _threads(args):
    if args.threads is not None:
        return int(args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer", value=env) from None
    return None


def _emit(payload, args):
    text = dumps(payload)
    if args is not None and args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None):
    """Run one command; returns the process exit code."""
    parser = build_parser()
    args = None
    envelope = {"version": __version__}
    try:
        args = _resolve(parser, argv)
        envelope["command"] = args.command
        envelope["config"] = _config(args)
        n_threads = _threads(args)
        if n_threads is not None and n_threads < 1:
            raise ValidationError("thread count must be positive", threads=n_threads)
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=n_threads):
            result = args.func(args)
        envelope["result"] = result
        code = 0
    except CheckFailed as exc:
        envelope["result"] = exc.result
        envelope["error"] = {"error": "CheckFailed", "message": "numerical check did not hold"}
        code = 3
    except LatticeHarmError as exc:
        envelope["error"] = exc.to_json()
        code = exc.exit_code
    except (KeyError, TypeError) as exc:
        envelope["error"] = {"error": "ValidationError", "message": "malformed input",
                             "details": {"reason": repr(exc)}}
        code = 2
    _emit(envelope, args)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
