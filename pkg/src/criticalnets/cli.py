"""Command-line runner: ``criticalnets <subcommand> [options]``.

Options may also come from an INI file (``--config FILE``) whose section is
named after the subcommand; flags on the command line win.  Unknown keys are
rejected before anything is computed.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import math
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import experiments as ex
from . import io as cio
from . import meanfield as mf
from . import ntk
from . import scaling as sc
from .activations import get_activation
from .errors import ConvergenceError, CriticalNetsError
from .metric_factors import critical_point, omega
from .sim import (EnsembleSpec, NetworkConfig, conv_pair_trace, lyapunov_finite, measure_spread, mlp_pair_trace,
                  orthogonal_unit_inputs, random_inputs)
from .sim.config import THREADS_ENV

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(CriticalNetsError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _grid(text: str) -> list[float]:
    """'a,b,c' or 'start:stop:num' (inclusive, linear)."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use 'a,b,c' or 'start:stop:num'") from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


# -------------------------------------------------------------- arguments

def _add_activation(p, sigma_b_default=0.3):
    p.add_argument("--activation", default="tanh")
    p.add_argument("--leak", type=float, default=None)
    p.add_argument("--sigma-b", type=float, default=sigma_b_default)


def _add_output(p):
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")


def _add_ensemble(p, runs=100):
    p.add_argument("--runs", type=_positive_int, default=runs)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--block-size", type=_positive_int, default=64)


def _add_network(p, arch="mlp"):
    p.add_argument("--architecture", choices=("mlp", "conv1d", "conv2d"), default=arch)
    p.add_argument("--width", type=_positive_int, default=200)
    p.add_argument("--depth", type=_positive_int, default=100)
    p.add_argument("--channels", type=_positive_int, default=10)
    p.add_argument("--kernel-size", type=_positive_int, default=5)
    p.add_argument("--n-in", type=_positive_int, default=10)
    p.add_argument("--sigma-w", type=float, default=None, help="default: mean-field critical value")
    p.add_argument("--dtype", choices=("float64", "float32"), default="float64")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="criticalnets", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"criticalnets {__version__}")
    parser.add_argument("--config", default=None, help="INI file with a section per subcommand")
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help=f"worker processes for ensembles (default: ${THREADS_ENV} or 1)")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)

    p = sub.add_parser("critical-point", help="locate sigma_w;c (or sigma_b;c) and its metric factors")
    _add_activation(p)
    p.add_argument("--sigma-w", type=float, default=None, help="solve for sigma_b at this sigma_w instead")
    _add_output(p)

    p = sub.add_parser("phase-diagram", help="C-map Lyapunov exponent on a (sigma_w, sigma_b) grid")
    _add_activation(p)
    p.add_argument("--sigma-w-grid", type=_grid, default=_grid("0.5:3:26"))
    p.add_argument("--sigma-b-grid", type=_grid, default=_grid("0:1:11"))
    _add_output(p)

    p = sub.add_parser("meanfield-trace", help="infinite-width q, C and rho per layer")
    _add_activation(p)
    p.add_argument("--sigma-w", type=float, default=None, help="default: critical value")
    p.add_argument("--layers", type=_positive_int, default=1000)
    p.add_argument("--rho0", type=float, default=1.0, help="input cosine distance")
    p.add_argument("--n-in", type=_positive_int, default=10)
    p.add_argument("--input-norm", type=float, default=1.0, help="squared norm of each input")
    _add_output(p)

    p = sub.add_parser("metric-factors", help="all metric factors at a critical point, plus omega")
    _add_activation(p)
    p.add_argument("--n-in", type=_positive_int, default=10)
    p.add_argument("--input-norm", type=float, default=None, help="squared input norm for omega (default q*)")
    _add_output(p)

    for name, hlp in (("ntk", "NTK at one depth for several input distances"),
                      ("ntk-collapse", "NTK depth profiles rescaled onto the scaling function")):
        p = sub.add_parser(name, help=hlp)
        _add_activation(p)
        p.add_argument("--rho0-grid", type=_grid, default=_grid("1e-4,1e-3,1e-2,1e-1"))
        p.add_argument("--depth", type=_positive_int, default=1000, help="L (ntk) or L_max (ntk-collapse)")
        p.add_argument("--n-in", type=_positive_int, default=10)
        p.add_argument("--input-norm", type=float, default=1.0)
        _add_output(p)

    p = sub.add_parser("simulate", help="Monte-Carlo rho trace of a finite network")
    _add_network(p)
    p.add_argument("--activation", default="tanh")
    p.add_argument("--leak", type=float, default=None)
    p.add_argument("--sigma-b", type=float, default=0.3)
    p.add_argument("--inputs", choices=("orthogonal", "random"), default="orthogonal")
    _add_ensemble(p)
    _add_output(p)

    p = sub.add_parser("lyapunov", help="largest Lyapunov exponent of finite MLPs over a sigma_w grid")
    _add_activation(p)
    p.add_argument("--width", type=_positive_int, default=200)
    p.add_argument("--sigma-w-grid", type=_grid, default=_grid("1.35:1.45:5"))
    p.add_argument("--l-max", type=_positive_int, default=10_000)
    p.add_argument("--burn-in", type=int, default=1_000)
    _add_ensemble(p, runs=100)
    _add_output(p)

    p = sub.add_parser("spread", help="spatial spread of a single-pixel perturbation in a conv net")
    _add_network(p, arch="conv1d")
    p.add_argument("--activation", default="tanh")
    p.add_argument("--leak", type=float, default=None)
    p.add_argument("--sigma-b", type=float, default=0.3)
    p.add_argument("--threshold", type=float, default=0.1)
    _add_ensemble(p)
    _add_output(p)

    p = sub.add_parser("collapse", help="rescale trace CSV files with a scaling ansatz")
    p.add_argument("files", nargs="*")
    p.add_argument("--ansatz", choices=("offcritical", "initial-slip", "finite-size", "dp"), default="finite-size")
    p.add_argument("--exponents", choices=sorted(sc.EXPONENTS), default="meanfield")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--omega", type=float, default=1.0)
    p.add_argument("--sigma-c", type=float, default=None, help="critical sigma_w for offcritical/dp")
    p.add_argument("--rho0-grid", type=_grid, default=None, help="initial distances, one per file")
    p.add_argument("--l-min", type=float, default=None)
    p.add_argument("--l-max", type=float, default=None)
    _add_output(p)

    p = sub.add_parser("fit-mu", help="fit the finite-width metric factor mu to a trace CSV")
    p.add_argument("file", nargs="?")
    p.add_argument("--kappa", type=float, default=None, help="default: closed form for the trace's activation")
    p.add_argument("--l-min", type=float, default=None)
    p.add_argument("--l-max", type=float, default=None)
    _add_output(p)

    p = sub.add_parser("reproduce", help="run a desk-scale figure pipeline")
    p.add_argument("target", nargs="?", choices=sorted(ex.TARGETS))
    p.add_argument("--output-dir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true", help="tiny sizes for smoke testing")
    return parser


# ------------------------------------------------------------------ config

def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config or not args.command:
        return args
    path = Path(args.config)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as e:
        raise UsageError(f"cannot parse {path}: {e}") from None
    if not cp.has_section(args.command):
        return args
    sub = _subparser(parser, args.command)
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help",)}
    defaults = {}
    for key, raw in cp.items(args.command):
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("files", "file", "target"):
            raise UsageError(f"unknown key {key!r} in [{args.command}] of {path}")
        act = actions[dest]
        try:
            if isinstance(act, argparse._StoreTrueAction):
                value = cp.getboolean(args.command, key)
            elif act.type is not None:
                value = act.type(raw)
            else:
                value = raw
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise UsageError(f"bad value for {key!r} in {path}: {e}") from None
        if act.choices is not None and value not in act.choices:
            raise UsageError(f"{key} must be one of {sorted(act.choices)}, got {value!r}")
        defaults[dest] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _subparser(parser, name):
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            return a.choices[name]
    raise KeyError(name)


# --------------------------------------------------------------- commands

class _Out:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        if self.path in (None, "-"):
            self.f = sys.stdout
        else:
            Path(self.path).parent.mkdir(parents=True, exist_ok=True)
            self.f = open(self.path, "w", encoding="utf-8", newline="")
        return self.f

    def __exit__(self, *exc):
        if self.f is not sys.stdout:
            self.f.close()


def _echo(args) -> dict:
    skip = {"config", "output", "threads", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _summary(text):
    print(text, file=sys.stderr)


def _kernel(args):
    return get_activation(args.activation, args.leak)


def _critical_hp(args):
    h = _kernel(args)
    if getattr(args, "sigma_w", None) is not None:
        return h, mf.Hyperparameters(args.sigma_w, args.sigma_b)
    cp = critical_point(h, args.sigma_b)
    return h, mf.Hyperparameters(cp.sigma_w, cp.sigma_b)


def cmd_critical_point(args):
    h = _kernel(args)
    if args.sigma_w is not None:
        cp = critical_point(h, None, args.sigma_w)
    else:
        cp = critical_point(h, args.sigma_b)
    with _Out(args.output) as f:
        cio.write_json(f, cp.as_dict(), {"command": "critical-point", "args": _echo(args)})
    _summary(f"{h.name}: sigma_w;c = {cp.sigma_w:.10g}, sigma_b = {cp.sigma_b:.6g}, kappa = {cp.kappa:.8g}")


def cmd_metric_factors(args):
    h = _kernel(args)
    cp = critical_point(h, args.sigma_b)
    d = cp.as_dict()
    if not h.scale_invariant:
        d["omega"] = omega(cp.sigma_w, cp.sigma_b, cp.q_star, args.n_in, args.input_norm)
    with _Out(args.output) as f:
        cio.write_json(f, d, {"command": "metric-factors", "args": _echo(args)})
    _summary(f"{h.name}: kappa = {cp.kappa:.8g}, zeta = {cp.zeta:.8g}, gamma = {cp.gamma_lr:.8g}")


def cmd_phase_diagram(args):
    h = _kernel(args)
    lam = mf.phase_diagram(h, args.sigma_w_grid, args.sigma_b_grid)
    rows = []
    for i, sb in enumerate(args.sigma_b_grid):
        for j, sw in enumerate(args.sigma_w_grid):
            v = lam[i, j]
            phase = "nan" if not np.isfinite(v) else ("chaotic" if v > 0 else "ordered")
            rows.append((sw, sb, v, phase))
    with _Out(args.output) as f:
        cio.write_csv(f, ("sigma_w", "sigma_b", "lambda_c", "phase"), rows,
                      {"command": "phase-diagram", "args": _echo(args)})
    _summary(f"phase diagram: {len(rows)} points")


def cmd_meanfield_trace(args):
    h, hp = _critical_hp(args)
    x1, x2 = ntk.pair_with_distance(args.rho0, args.n_in, args.input_norm)
    tr = mf.meanfield_trace(x1, x2, h, hp, args.layers)
    rows = zip(tr.layers, tr.q1, tr.q2, tr.C, tr.rho)
    with _Out(args.output) as f:
        cio.write_csv(f, ("layer", "q1", "q2", "C", "rho"), rows,
                      {"command": "meanfield-trace", "args": _echo(args),
                       "config": {"activation": h.name, "sigma_w": hp.sigma_w, "sigma_b": hp.sigma_b,
                                  "leak": h.leak, "rho0": args.rho0}})
    _summary(f"rho^({args.layers}) = {tr.rho[-1]:.6g}")


def _ntk_common(args):
    h = _kernel(args)
    cp = critical_point(h, args.sigma_b)
    w = 1.0 if h.scale_invariant else omega(cp.sigma_w, cp.sigma_b, cp.q_star, args.n_in, args.input_norm)
    return cp, w


def _ntk_x(cp, w, r0, L):
    kl = cp.kappa * L
    return r0 * kl * kl if cp.activation.scale_invariant else w * r0 * kl


def cmd_ntk(args):
    cp, w = _ntk_common(args)
    hp = mf.Hyperparameters(cp.sigma_w, cp.sigma_b)
    rows = []
    for r0 in args.rho0_grid:
        x1, x2 = ntk.pair_with_distance(r0, args.n_in, args.input_norm)
        th = ntk.ntk_value(x1, x2, args.depth, cp.activation, hp)
        rows.append((r0, args.depth, th, _ntk_x(cp, w, r0, args.depth), th / (cp.q_star * args.depth)))
    with _Out(args.output) as f:
        cio.write_csv(f, ("rho0", "L", "theta", "x_rescaled", "y_rescaled"), rows,
                      {"command": "ntk", "args": _echo(args), "omega": w, **cp.as_dict()})
    _summary(f"NTK at L = {args.depth} for {len(rows)} input distances")


def cmd_ntk_collapse(args):
    cp, w = _ntk_common(args)
    profiles = ntk.ntk_profiles(cp, args.rho0_grid, args.depth, args.n_in, args.input_norm)
    col = ntk.ntk_collapse(profiles, cp, w)
    rows = []
    for p in profiles:
        for L in ex.log_depths(args.depth):
            th = float(p.theta[L - 1])
            rows.append((p.rho0, int(L), th, _ntk_x(cp, w, p.rho0, L), th / (cp.q_star * L)))
    with _Out(args.output) as f:
        cio.write_csv(f, ("rho0", "L", "theta", "x_rescaled", "y_rescaled"), rows,
                      {"command": "ntk-collapse", "args": _echo(args), "omega": w,
                       "collapse_quality": col.quality, **cp.as_dict()})
    _summary(f"NTK collapse quality {col.quality:.3g} over {len(profiles)} curves")


def _network(args):
    h = _kernel(args)
    sw = args.sigma_w
    if sw is None:
        sw = mf.critical_sigma_w(args.sigma_b, h)
    return NetworkConfig(args.architecture, args.width, args.depth, args.activation, sw, args.sigma_b,
                         leak=args.leak or 0.0, channels=args.channels, kernel_size=args.kernel_size,
                         n_in=args.n_in if args.architecture == "mlp" else 0, dtype=args.dtype)


def cmd_simulate(args):
    cfg = _network(args)
    ens = EnsembleSpec(args.runs, args.seed, args.block_size)
    if cfg.architecture == "mlp":
        x1, x2 = orthogonal_unit_inputs(cfg.n_in) if args.inputs == "orthogonal" else \
            np.random.default_rng(args.seed).standard_normal((2, cfg.n_in))
        tr = mlp_pair_trace(x1, x2, cfg, ens, workers=args.threads)
    else:
        if args.inputs == "orthogonal":
            x1, x2 = ex.orthonormal_spatial_inputs(cfg.width, cfg.spatial_dims, args.seed)
        else:
            x1, x2 = random_inputs(cfg, args.seed)
        tr = conv_pair_trace(x1, x2, cfg, ens, workers=args.threads)
    with _Out(args.output) as f:
        cio.write_csv(f, cio.TRACE_COLUMNS, cio.trace_rows(tr),
                      {"command": "simulate", **cio.trace_meta(tr), "inputs": args.inputs})
    _summary(f"{cfg.architecture} n={cfg.width}: rho^({cfg.depth}) = {tr.rho_mean[-1]:.6g} "
             f"+- {tr.rho_stderr[-1]:.2g} over {ens.runs} runs")


def cmd_lyapunov(args):
    h = _kernel(args)
    rows = []
    for sw in args.sigma_w_grid:
        cfg = NetworkConfig("mlp", args.width, 1, args.activation, sw, args.sigma_b, leak=args.leak or 0.0, n_in=1)
        est = lyapunov_finite(cfg, EnsembleSpec(args.runs, args.seed, args.block_size), args.l_max, args.burn_in,
                              workers=args.threads)
        rows.append((sw, est.value, est.stderr, 0.5 * mf.lyapunov_cmap(h, cfg.hp)))
    with _Out(args.output) as f:
        cio.write_csv(f, ("sigma_w", "lambda1", "stderr", "lambda_c_half"), rows,
                      {"command": "lyapunov", "args": _echo(args)})
    _summary(f"lyapunov: {len(rows)} sigma_w values")


def cmd_spread(args):
    cfg = _network(args)
    st = measure_spread(cfg, EnsembleSpec(args.runs, args.seed, args.block_size), args.threshold,
                        workers=args.threads)
    rows = zip(st.layers, st.width_mean, st.width_stderr, st.width_all, st.survival)
    with _Out(args.output) as f:
        cio.write_csv(f, ("layer", "width_mean", "width_stderr", "width_all", "survival"), rows,
                      {"command": "spread", "config": cfg.as_dict(), "seed": args.seed, "runs": args.runs,
                       "threshold": args.threshold})
    _summary(f"spread width at l={cfg.depth}: {st.width_mean[-1]:.4g}")


def _load_trace(path):
    with open(path, encoding="utf-8") as f:
        meta, cols, data = cio.read_csv(f)
    arr = np.array(data, dtype=float)
    if "rho_mean" in cols:
        rho = arr[:, cols.index("rho_mean")]
    elif "rho" in cols:
        rho = arr[:, cols.index("rho")]
    else:
        raise UsageError(f"{path}: no rho column")
    layers = arr[:, cols.index("layer")]
    cfg = meta.get("config") or {}
    return meta, cfg, layers, rho


def _window(args):
    if args.l_min is None and args.l_max is None:
        return None
    return (args.l_min or 0.0, args.l_max or math.inf)


def cmd_collapse(args):
    if not args.files:
        raise UsageError("collapse needs at least one trace CSV")
    loaded = [_load_trace(p) for p in args.files]
    series = [(l, r) for _, _, l, r in loaded]
    labels = [Path(p).stem for p in args.files]
    ex_set = sc.EXPONENTS[args.exponents]
    if args.ansatz == "finite-size":
        widths = [int(c.get("width", 0)) for _, c, _, _ in loaded]
        if not all(widths):
            raise UsageError("finite-size collapse needs simulate outputs with a width in the header")
        si = any(get_activation(c["activation"], c.get("leak") or None).scale_invariant for _, c, _, _ in loaded)
        col = sc.rescale_finite_size(series, widths, si, labels)
    elif args.ansatz == "initial-slip":
        if args.kappa is None or args.rho0_grid is None:
            raise UsageError("initial-slip collapse needs --kappa and --rho0-grid")
        col = sc.rescale_initial_slip(series, args.rho0_grid, args.kappa, args.omega, labels=labels)
    else:
        if args.sigma_c is None:
            raise UsageError(f"{args.ansatz} collapse needs --sigma-c")
        taus = [float(c["sigma_w"]) - args.sigma_c for _, c, _, _ in loaded]
        if args.ansatz == "dp":
            col = sc.rescale_dp(series, taus, ex_set, labels)
        else:
            if args.kappa is None or args.zeta is None:
                raise UsageError("offcritical collapse needs --kappa and --zeta")
            col = sc.rescale_offcritical(series, ex_set, args.kappa, args.zeta, taus, labels)
    q = sc.collapse_quality(col, l_window=_window(args), allow_single=True)
    with _Out(args.output) as f:
        cio.write_csv(f, ("curve", "layer", "x_rescaled", "y_rescaled"), col.rows(),
                      {"command": "collapse", "args": _echo(args), "collapse_quality": q})
    _summary(f"collapse quality {q:.4g} over {len(col.curves)} curves")


def cmd_fit_mu(args):
    if not args.file:
        raise UsageError("fit-mu needs a trace CSV")
    meta, cfg, layers, rho = _load_trace(args.file)
    if cfg.get("architecture") != "mlp":
        raise UsageError("fit-mu needs an mlp trace written by `simulate`")
    h = get_activation(cfg["activation"], cfg.get("leak") or None)
    kappa = args.kappa
    if kappa is None:
        kappa = critical_point(h, cfg["sigma_b"]).kappa
    fit = sc.fit_mu((layers, rho), kappa, int(cfg["width"]), h.scale_invariant, window=_window(args))
    payload = {"mu": fit.mu, "kappa": fit.kappa, "rho0": fit.rho0, "residual": fit.residual, "n": fit.n,
               "points": fit.n_points, "scale_invariant": fit.scale_invariant, "source": str(args.file)}
    with _Out(args.output) as f:
        cio.write_json(f, payload, {"command": "fit-mu", "args": _echo(args)})
    _summary(f"mu = {fit.mu:.5g} (n = {fit.n}, kappa = {kappa:.6g})")


def cmd_reproduce(args):
    if not args.target:
        raise UsageError(f"reproduce needs a target: {', '.join(sorted(ex.TARGETS))}")
    fn = ex.TARGETS[args.target]
    kwargs = {"quick": args.quick}
    import inspect
    params = inspect.signature(fn).parameters
    if "seed" in params:
        kwargs["seed"] = args.seed
    if "workers" in params:
        kwargs["workers"] = args.threads
    tables = fn(**kwargs)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for t in tables:
        with open(out / f"{t.name}.csv", "w", encoding="utf-8", newline="") as f:
            cio.write_csv(f, t.columns, t.rows, {"command": f"reproduce {args.target}", "quick": args.quick,
                                                 "seed": args.seed, **t.meta})
    _summary(f"{args.target}: wrote {', '.join(t.name + '.csv' for t in tables)} to {out}")


COMMANDS = {
    "critical-point": cmd_critical_point, "phase-diagram": cmd_phase_diagram,
    "meanfield-trace": cmd_meanfield_trace, "metric-factors": cmd_metric_factors,
    "ntk": cmd_ntk, "ntk-collapse": cmd_ntk_collapse, "simulate": cmd_simulate,
    "lyapunov": cmd_lyapunov, "spread": cmd_spread, "collapse": cmd_collapse,
    "fit-mu": cmd_fit_mu, "reproduce": cmd_reproduce,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        if not args.command:
            raise UsageError(parser.format_usage().rstrip() + "\ncriticalnets: error: missing subcommand")
        if args.threads is not None:
            os.environ[THREADS_ENV] = str(args.threads)
        COMMANDS[args.command](args)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    except ConvergenceError as e:
        print(f"criticalnets: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (CriticalNetsError, ValueError, OSError, KeyError) as e:
        print(f"criticalnets: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
