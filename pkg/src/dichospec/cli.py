"""Command-line front end.

Every command writes JSON (and CSV where tabular) under ``--out`` and prints
a short summary. Exit codes: 0 success, 2 usage or configuration error,
3 numeric failure or infeasibility.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import get_example, list_examples
from .dichotomy_fit import (DEFAULT_CAPS, DichotomyParams, FitCaps, FitInfeasible, growth_fit,
                            upp_check, usp_check, verify)
from .growth import GrowthRateError, make_rate, rate_from_csv
from .io import write_csv, write_json
from .kinematics import (NondegeneracyError, exp_scaling, identity_map, invariance_experiment,
                         similarity_from_csv)
from .ratio_maps import RATIO_COLUMNS, sweep_ratios
from .spectrum import SPECTRUM_CLASSES, estimate_spectrum
from .system import (EvolutionOperator, SystemError_, coordinate_projector, identity_projector,
                     system_from_csv, zero_projector)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


class NumericFailure(RuntimeError):
    pass


# config keys accepted in files and their types; flags use the same names with dashes
_KEYS = {
    "corpus": str, "params": str, "csv": str, "rate": str, "rate_csv": str, "class": str,
    "window": "pair_int", "gamma_range": "pair", "grid_step": float, "refinement_tol": float,
    "logK_cap": float, "theta_cap": float, "alpha_min": float, "beta_min": float,
    "jobs": int, "out": str, "seed": int,
}

_DEFAULTS = {
    "rate": None, "class": "nonuniform", "window": (-200, 200), "gamma_range": None,
    "grid_step": 0.05, "refinement_tol": None, "jobs": 1, "out": "dichospec-out", "seed": 0,
    "logK_cap": DEFAULT_CAPS.logK_cap, "theta_cap": DEFAULT_CAPS.theta_cap,
    "alpha_min": DEFAULT_CAPS.alpha_min, "beta_min": DEFAULT_CAPS.beta_min,
}


@dataclass
class RunConfig:
    corpus: str | None = None
    params: dict = field(default_factory=dict)
    csv: str | None = None
    rate: str | None = None
    rate_csv: str | None = None
    cls: str = "nonuniform"
    window: tuple = (-200, 200)
    gamma_range: tuple | None = None
    grid_step: float = 0.05
    refinement_tol: float | None = None
    caps: FitCaps = DEFAULT_CAPS
    jobs: int = 1
    out: str = "dichospec-out"
    seed: int = 0

    def validate(self):
        if (self.corpus is None) == (self.csv is None):
            raise ConfigError("give exactly one system source: --corpus NAME or --csv PATH")
        if self.cls not in SPECTRUM_CLASSES:
            raise ConfigError(f"unknown class {self.cls!r}; expected one of {SPECTRUM_CLASSES}")
        lo, hi = self.window
        if not lo < hi:
            raise ConfigError("window must satisfy N- < N+")
        if not self.grid_step > 0:
            raise ConfigError("grid_step must be positive")
        if self.refinement_tol is not None and not self.refinement_tol > 0:
            raise ConfigError("refinement_tol must be positive")
        if self.gamma_range is not None and not self.gamma_range[0] < self.gamma_range[1]:
            raise ConfigError("gamma_range must satisfy lo < hi")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self

    def to_dict(self):
        return {
            "system": ({"corpus": self.corpus, "params": dict(sorted(self.params.items()))}
                       if self.corpus else {"csv": self.csv}),
            "rate": self.rate, "rate_csv": self.rate_csv, "class": self.cls,
            "window": list(self.window),
            "gamma_range": None if self.gamma_range is None else list(self.gamma_range),
            "grid_step": self.grid_step,
            "refinement_tol": self.grid_step / 8.0 if self.refinement_tol is None else self.refinement_tol,
            "caps": self.caps.to_dict(), "jobs": self.jobs, "seed": self.seed,
        }


def parse_params(text) -> dict:
    """``"omega=2,a=1"`` to ``{"omega": 2.0, "a": 1.0}``."""
    out = {}
    if not text:
        return out
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise ConfigError(f"bad parameter {part!r}; expected name=value")
        k, v = (s.strip() for s in part.split("=", 1))
        try:
            out[k] = float(v)
        except ValueError:
            raise ConfigError(f"parameter {k!r} is not a number: {v!r}") from None
    return out


def _convert(key, raw):
    kind = _KEYS[key]
    try:
        if kind in ("pair", "pair_int"):
            vals = raw.replace(",", " ").split() if isinstance(raw, str) else list(raw)
            if len(vals) != 2:
                raise ValueError
            conv = int if kind == "pair_int" else float
            return (conv(vals[0]), conv(vals[1]))
        return kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys as in ``_KEYS``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        k = k.replace("-", "_")
        if k not in _KEYS:
            raise ConfigError(f"{path}:{no}: unknown key {k!r}")
        out[k] = _convert(k, v.strip().strip('"').strip("'"))
    return out


def build_config(args) -> RunConfig:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for key in _KEYS:
        val = getattr(args, key.replace("class", "cls"), None)
        if val is not None:
            merged[key] = _convert(key, val) if key in ("window", "gamma_range") else val
    try:
        caps = FitCaps(logK_cap=float(merged["logK_cap"]), theta_cap=float(merged["theta_cap"]),
                       alpha_min=float(merged["alpha_min"]), beta_min=float(merged["beta_min"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    params = merged.get("params") or {}
    if isinstance(params, str):
        params = parse_params(params)
    cfg = RunConfig(corpus=merged.get("corpus"), params=params, csv=merged.get("csv"),
                    rate=merged.get("rate"), rate_csv=merged.get("rate_csv"),
                    cls=merged["class"], window=tuple(merged["window"]),
                    gamma_range=merged["gamma_range"], grid_step=float(merged["grid_step"]),
                    refinement_tol=merged["refinement_tol"], caps=caps, jobs=int(merged["jobs"]),
                    out=merged["out"], seed=int(merged["seed"]))
    return cfg.validate()


def load_system(cfg: RunConfig):
    """``(system, rate, corpus entry or None)`` for a validated config."""
    entry = None
    try:
        if cfg.corpus:
            entry = get_example(cfg.corpus, cfg.params)
            sys_ = entry.system
        else:
            sys_ = system_from_csv(cfg.csv)
        if cfg.rate_csv:
            rate = rate_from_csv(cfg.rate_csv)
        elif cfg.rate:
            rate = make_rate(cfg.rate)
        elif entry is not None:
            rate = entry.rate
        else:
            rate = make_rate("exponential")
    except (KeyError, ValueError, OSError, SystemError_) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        raise ConfigError(msg) from None
    # record what was actually used: canonical parameter names, defaults, rate
    if entry is not None:
        cfg.params = dict(entry.params)
    if cfg.rate is None and cfg.rate_csv is None:
        cfg.rate = rate.label
    return sys_, rate, entry


def _out(cfg, name) -> Path:
    return Path(cfg.out) / name


def _fmt_iv(iv):
    l = "(" if iv.lo_open else "["
    r = ")" if iv.hi_open else "]"
    return f"{l}{iv.lo:.6g}, {iv.hi:.6g}{r}"


# ---------------------------------------------------------------------------
# commands

def cmd_spectrum(cfg: RunConfig, args=None) -> int:
    sys_, rate, entry = load_system(cfg)
    est = estimate_spectrum(sys_, rate, cfg.cls, cfg.gamma_range, cfg.grid_step, cfg.window,
                            cfg.caps, cfg.refinement_tol, cfg.jobs)
    body = {"config": cfg.to_dict(), "rate": rate.label, "spectrum": est.to_dict()}
    if entry is not None and cfg.cls in entry.references:
        body["reference"] = {"intervals": [iv.as_list() for iv in entry.references[cfg.cls]],
                             "note": entry.notes.get(cfg.cls, "")}
    js = write_json(_out(cfg, "spectrum.json"), body, kind="spectrum")
    cs = write_csv(_out(cfg, "spectrum_grid.csv"), ["gamma", "member", "margin", "rank"],
                   [(r["gamma"], r["member"], r["margin"], r["rank"]) for r in est.grid_rows()])
    ivs = ", ".join(_fmt_iv(iv) for iv in est.intervals) or "empty"
    print(f"{cfg.cls} spectrum: {ivs}")
    print(f"gap ranks: {est.gap_ranks}")
    if est.flags:
        print("flags: " + "; ".join(est.flags))
    print(f"wrote {js} and {cs}")
    return EXIT_OK


def _load_gaps(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        spec = data["spectrum"]
        gaps = [(float(a), float(b)) for a, b in spec["gaps"]]
        return gaps, list(spec["gap_ranks"])
    except (OSError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"cannot read spectrum JSON {path}: {exc}") from None


def cmd_ratios(cfg: RunConfig, args) -> int:
    sys_, rate, _ = load_system(cfg)
    if args.spectrum_json:
        gaps, ranks = _load_gaps(args.spectrum_json)
    else:
        est = estimate_spectrum(sys_, rate, "nonuniform", cfg.gamma_range, cfg.grid_step,
                                cfg.window, cfg.caps, cfg.refinement_tol, cfg.jobs)
        gaps, ranks = est.gaps, est.gap_ranks
    if args.gap is None:
        which = list(range(len(gaps)))
    else:
        if not 0 <= args.gap < len(gaps):
            raise ConfigError(f"gap index {args.gap} out of range (spectrum has {len(gaps)} gaps)")
        which = [args.gap]
    gammas = None
    if args.gammas:
        try:
            gammas = [float(g) for g in args.gammas.split(",") if g.strip()]
        except ValueError:
            raise ConfigError(f"bad --gammas list {args.gammas!r}") from None
    files = []
    for i in which:
        curve = sweep_ratios(sys_, rate, gaps[i], args.n_samples, cfg.window, cfg.caps,
                             gammas=gammas, rank=ranks[i])
        p = write_csv(_out(cfg, f"ratios_gap{i}.csv"), list(RATIO_COLUMNS),
                      [s.row() for s in curve.samples])
        files.append({"gap_index": i, "gap": list(gaps[i]), "projector": curve.projector,
                      "rank": curve.rank, "file": p.name, "flags": curve.flags})
        print(f"gap {i} {gaps[i]} projector {curve.projector}: {len(curve.samples)} samples"
              + (f" [{'; '.join(curve.flags)}]" if curve.flags else ""))
    m = write_json(_out(cfg, "ratios_manifest.json"),
                   {"config": cfg.to_dict(), "rate": rate.label, "columns": list(RATIO_COLUMNS),
                    "gaps": files}, kind="ratios")
    print(f"wrote {m}")
    return EXIT_OK


def _projector_from(spec, d):
    if spec is None or spec in ("Id", "id", "I"):
        return identity_projector(d)
    if isinstance(spec, list):
        return coordinate_projector(d, spec)
    s = str(spec)
    if s == "0":
        return zero_projector(d)
    if s.startswith("P{") and s.endswith("}"):
        return coordinate_projector(d, [int(x) for x in s[2:-1].split(",") if x.strip()])
    raise ConfigError(f"bad projector {spec!r}; use Id, 0, P{{1,3}} or a list of indices")


def _read_params(text):
    p = Path(text)
    try:
        raw = p.read_text(encoding="utf-8") if p.exists() else text
        data = json.loads(raw)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot parse params JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("params JSON must be an object")
    return data


def cmd_verify(cfg: RunConfig, args) -> int:
    sys_, rate, _ = load_system(cfg)
    data = _read_params(args.params_json)
    known = {"class", "projector", "alpha", "beta", "theta", "nu", "logK", "K", "gamma"}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown params fields: {sorted(extra)}")
    if "K" in data and "logK" in data:
        raise ConfigError("give K or logK, not both")
    logK = float(data["logK"]) if "logK" in data else math.log(float(data.get("K", 1.0)))
    params = DichotomyParams(data.get("class", cfg.cls),
                             alpha=None if data.get("alpha") is None else float(data["alpha"]),
                             beta=None if data.get("beta") is None else float(data["beta"]),
                             theta=float(data.get("theta", 0.0)), nu=float(data.get("nu", 0.0)),
                             logK=logK)
    try:
        params.check(cfg.caps.multiplier)
    except ValueError as exc:
        raise ConfigError(f"rejected: {exc}") from None
    P = _projector_from(data.get("projector"), sys_.dim)
    target = sys_
    g = float(data.get("gamma", 0.0))
    if g != 0.0:
        from .system import WeightedSystem
        target = WeightedSystem(sys_, rate, g)
    try:
        rep = verify(target, rate, P, params, cfg.window, cfg.caps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    path = write_json(_out(cfg, "verify.json"),
                      {"config": cfg.to_dict(), "rate": rate.label, "report": rep}, kind="verify")
    print(f"{params.tuple_str(P.label)} {params.cls}: "
          f"{'feasible' if rep.feasible else 'infeasible'} (worst slack {rep.worst_slack:.6g}"
          + (f" at (k, n) = {rep.binding})" if rep.binding else ")"))
    print(f"wrote {path}")
    return EXIT_OK if rep.feasible else EXIT_NUMERIC


def _similarity_map(args, rate, d):
    spec = args.map
    if args.map_csv:
        if args.map_logM is None or args.map_theta is None:
            raise ConfigError("--map-csv needs --map-logM and --map-theta")
        return similarity_from_csv(args.map_csv, rate, args.map_logM, args.map_theta)
    if spec in (None, "identity", "id"):
        return identity_map(d, rate)
    if spec.startswith("exp:"):
        try:
            sigma = float(spec[4:])
        except ValueError:
            raise ConfigError(f"bad map {spec!r}; expected exp:SIGMA") from None
        return exp_scaling(sigma, d, rate, args.map_logM or 0.0, args.map_theta)
    raise ConfigError(f"unknown map {spec!r}; use identity, exp:SIGMA or --map-csv")


def cmd_similarity(cfg: RunConfig, args) -> int:
    sys_, rate, _ = load_system(cfg)
    S = _similarity_map(args, rate, sys_.dim)
    try:
        res = invariance_experiment(sys_, S, rate, cfg.cls, cfg.gamma_range, cfg.grid_step,
                                    cfg.window, cfg.caps, cfg.refinement_tol, cfg.jobs)
    except NondegeneracyError as exc:
        write_json(_out(cfg, "similarity.json"),
                   {"config": cfg.to_dict(), "error": str(exc), "nondegeneracy": exc.report},
                   kind="similarity")
        r = exc.report
        raise NumericFailure(f"{exc}: slack S {r['slack_S']:.6g} at n={r['binding_S']}, "
                             f"slack S^-1 {r['slack_S_inv']:.6g} at n={r['binding_S_inv']}") from None
    body = {"config": cfg.to_dict(), "rate": rate.label, **res}
    path = write_json(_out(cfg, "similarity.json"), body, kind="similarity")
    a, b = res["spectrum_A"], res["spectrum_B"]
    print(f"A: {', '.join(_fmt_iv(iv) for iv in a.intervals) or 'empty'}"
          + (f" [{'; '.join(a.flags)}]" if a.flags else ""))
    print(f"B: {', '.join(_fmt_iv(iv) for iv in b.intervals) or 'empty'}"
          + (f" [{'; '.join(b.flags)}]" if b.flags else ""))
    for row in res["diff"]:
        print(f"  interval {row['interval']} {row['endpoint']}: displacement {row['quantized']:+.6g}")
    print(res["label"])
    print(f"wrote {path}")
    return EXIT_OK


def _cocycle_check(sys_, window, seed, n_triples=200):
    """Random triples ``k >= m >= n`` for the cocycle identity, relative error in scaled form."""
    rng = np.random.default_rng(seed)
    lo, hi = window
    op = EvolutionOperator(sys_)
    worst = 0.0
    for _ in range(n_triples):
        n, m, k = sorted(int(x) for x in rng.integers(lo, hi + 1, size=3))
        Mk, sk = op.transition(k, m)
        Mm, sm = op.transition(m, n)
        Mt, st = op.transition(k, n)
        lhs = Mk @ Mm * math.exp(sk + sm - st) if np.isfinite(st) else Mk @ Mm
        worst = max(worst, float(np.linalg.norm(lhs - Mt, 2)))
    return {"n_triples": n_triples, "seed": seed, "max_rel_error": worst}


def cmd_diagnose(cfg: RunConfig, args) -> int:
    sys_, rate, entry = load_system(cfg)
    report = {"config": cfg.to_dict(), "rate": rate.label}
    try:
        report["growth"] = growth_fit(sys_, rate, cfg.window, cfg.caps)
    except FitInfeasible as exc:
        report["growth"] = {"feasible": False, "message": str(exc)}
    if sys_.is_diagonal or sys_.dim == 1:
        bounded = usp_check(sys_, cfg.window, args.bound_factor)
        report["usp"] = {"bounded_directions": bounded, "usp_holds": not bounded,
                         "bound_factor": args.bound_factor}
        u = upp_check(sys_, rate, cfg.window, "slow", args.gamma, cfg.caps)
        report["upp"] = {k: v for k, v in u.items() if k != "verdicts"}
        report["upp"]["verdicts"] = [v.to_dict() for v in u["verdicts"]]
    else:
        report["usp"] = report["upp"] = "skipped: requires diagonal structure"
    lo, hi = cfg.window
    report["cocycle"] = _cocycle_check(sys_, (max(lo, -50), min(hi, 50)), cfg.seed)
    path = write_json(_out(cfg, "diagnose.json"), report, kind="diagnose")
    g = report["growth"]
    if isinstance(g, dict):
        print(f"growth: infeasible ({g['message']})")
    else:
        print(f"growth: a_hat {g.a_hat:.6g}, eps_hat {g.eps_hat:.6g}, logK_hat {g.logK_hat:.6g}")
    if isinstance(report["usp"], dict):
        print(f"USP: {'holds' if report['usp']['usp_holds'] else 'violated'}"
              f" (bounded directions {report['usp']['bounded_directions']})")
        print(f"UPP ({report['upp']['class']}, gamma={report['upp']['gamma']:g}): "
              f"{'holds' if report['upp']['upp_holds'] else 'violated' if report['upp']['upp_violated'] else 'no feasible projector'}"
              f" (feasible {report['upp']['feasible']})")
    else:
        print("USP/UPP: skipped (non-diagonal system)")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_corpus(args) -> int:
    if args.corpus_cmd == "list":
        for name, defaults, doc in list_examples():
            ps = ", ".join(f"{k}={v:g}" for k, v in defaults.items())
            print(f"{name:<12} {doc}" + (f"  [{ps}]" if ps else ""))
        return EXIT_OK
    try:
        e = get_example(args.name, parse_params(args.params))
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    s = e.summary()
    print(f"{s['name']}  (dim {s['dim']}, rate {s['rate']})")
    if s["params"]:
        print("params: " + ", ".join(f"{k}={v:g}" for k, v in s["params"].items()))
    print(s["description"])
    for cls in SPECTRUM_CLASSES:
        if cls in e.references or cls in e.notes:
            ivs = ", ".join(_fmt_iv(iv) for iv in e.references.get(cls, [])) or "empty"
            print(f"  {cls:<10} {ivs:<28} {e.notes.get(cls, '')}")
    for k, v in e.notes.items():
        if k not in SPECTRUM_CLASSES:
            print(f"  {k}: {v}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _common(p):
    g = p.add_argument_group("system and settings")
    g.add_argument("--corpus", help="corpus example name (see `corpus list`)")
    g.add_argument("--params", help='example parameters, e.g. "omega=2,a=1"')
    g.add_argument("--csv", help="system CSV with a '# window: lo hi' header")
    g.add_argument("--rate", help="growth rate kind (exponential, polynomial, quadratic, cubic)")
    g.add_argument("--rate-csv", dest="rate_csv", help="custom rate table (n, L(n))")
    g.add_argument("--class", dest="cls", help=f"dichotomy class {SPECTRUM_CLASSES}")
    g.add_argument("--window", nargs=2, metavar=("N_MINUS", "N_PLUS"), type=int)
    g.add_argument("--gamma-range", dest="gamma_range", nargs=2, metavar=("LO", "HI"), type=float)
    g.add_argument("--grid-step", dest="grid_step", type=float)
    g.add_argument("--refinement-tol", dest="refinement_tol", type=float)
    g.add_argument("--logK-cap", dest="logK_cap", type=float)
    g.add_argument("--theta-cap", dest="theta_cap", type=float)
    g.add_argument("--alpha-min", dest="alpha_min", type=float)
    g.add_argument("--beta-min", dest="beta_min", type=float)
    g.add_argument("--jobs", type=int)
    g.add_argument("--config", help="key = value settings file; flags override it")
    g.add_argument("--out", help="output directory (default dichospec-out)")
    g.add_argument("--seed", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="dichospec",
                                 description="Dichotomy spectra of discrete nonautonomous linear systems.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="estimate a dichotomy spectrum")
    _common(p)

    p = sub.add_parser("ratios", help="sample the ratio curves on spectral gaps")
    _common(p)
    p.add_argument("--gap", type=int, help="gap index (default: all gaps)")
    p.add_argument("--n-samples", dest="n_samples", type=int, default=9)
    p.add_argument("--gammas", help="comma-separated gammas instead of automatic sampling")
    p.add_argument("--spectrum-json", dest="spectrum_json", help="reuse gaps from a spectrum.json")

    p = sub.add_parser("verify", help="certify a dichotomy parameter tuple on the window")
    _common(p)
    p.add_argument("params_json", help="JSON file or inline JSON with class, projector, alpha, ...")

    p = sub.add_parser("similarity", help="spectra of a system and of its similarity transform")
    _common(p)
    p.add_argument("--map", default="identity", help="identity or exp:SIGMA for S(n) = exp(SIGMA n)")
    p.add_argument("--map-csv", dest="map_csv", help="tabulated S(n): rows n, s11, ..., sdd")
    p.add_argument("--map-logM", dest="map_logM", type=float)
    p.add_argument("--map-theta", dest="map_theta", type=float)

    p = sub.add_parser("diagnose", help="growth fit, USP and UPP diagnostics")
    _common(p)
    p.add_argument("--bound-factor", dest="bound_factor", type=float, default=10.0)
    p.add_argument("--gamma", type=float, default=0.0, help="weight for the UPP check")

    p = sub.add_parser("corpus", help="list or show corpus examples")
    cs = p.add_subparsers(dest="corpus_cmd", required=True)
    cs.add_parser("list")
    q = cs.add_parser("show")
    q.add_argument("name")
    q.add_argument("--params")
    return ap


_COMMANDS = {"spectrum": cmd_spectrum, "ratios": cmd_ratios, "verify": cmd_verify,
             "similarity": cmd_similarity, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "corpus":
            return cmd_corpus(args)
        cfg = build_config(args)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"dichospec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericFailure, FitInfeasible, SystemError_, GrowthRateError, ArithmeticError,
            np.linalg.LinAlgError, ValueError, RuntimeError) as exc:
        print(f"dichospec: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
