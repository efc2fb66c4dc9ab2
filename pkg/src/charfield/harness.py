"""Command-line entry point: scenario registry, seeded runs and JSON reports.

    charfield verify lemma1 --field fp:7 --trials 500 --seed 42
    charfield verify remark3 --m 0 --level 2 --figure remark3.png
    charfield padic sqrt --p 7 --value 2 --prec 8
    charfield dist push --field fp:5 --mu "1:1/2,4:1/2" --nu "0:1"

Exit status: 0 when every assertion holds, 1 when a counterexample was
found, 2 for a configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Any, Callable, Dict, Optional

from . import characterize as ch
from .algebra import RingSpec, is_prime
from .characterize import Report
from .errors import BadConfig, CharfieldError, IoError
from .measure import (
    HaarShift,
    JointDist,
    StepDensity,
    classify,
    degenerate,
    format_dist,
    haar_density,
    is_independent,
    parse_dist,
    push_T,
)
from .padic import (
    DEFAULT_PREC,
    PAdic,
    branch_table,
    is_square,
    norm,
    sqrt_hensel,
    sqrt_series,
)

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
SEED_ENV = "CHARFIELD_SEED"


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ScenarioConfig:
    scenario: str
    field: Optional[str] = None
    p: Optional[int] = None
    m: Optional[int] = None
    level: Optional[int] = None
    prec: int = DEFAULT_PREC
    trials: Optional[int] = None
    radius: int = 3
    denom_bound: int = 2
    seed: int = 0
    workers: int = 1
    out: Optional[str] = None
    timing: bool = False
    figure: Optional[str] = None

    def ring(self, default: str) -> RingSpec:
        try:
            return RingSpec.parse(self.field or default)
        except ValueError as exc:
            raise BadConfig(str(exc)) from exc


@dataclass(frozen=True)
class _Entry:
    run: Callable[[ScenarioConfig], Report]
    defaults: Dict[str, Any]


def _odd_p(cfg: ScenarioConfig) -> int:
    if cfg.p == 2:
        raise BadConfig(f"{cfg.scenario} needs an odd prime")
    return cfg.p


SCENARIOS: Dict[str, _Entry] = {
    "lemma1": _Entry(lambda c: ch.lemma1_verify(c.ring("fp:7"), c.trials, c.seed, c.workers),
                     {"trials": 500}),
    "theorem1": _Entry(lambda c: ch.theorem1_verify(c.ring("fp:5"), c.trials, c.seed, c.workers),
                       {"trials": 1000}),
    "theorem2": _Entry(lambda c: ch.theorem2_search(c.radius, c.denom_bound, c.trials, c.seed,
                                                    c.workers),
                       {"trials": 500}),
    "remark1": _Entry(lambda c: ch.remark1_verify(c.ring("fp:2"), c.trials, c.seed, c.workers),
                      {"trials": 200}),
    "remark2": _Entry(lambda c: ch.remark2_counterexample(c.ring("fp:5")), {}),
    "theorem3": _Entry(lambda c: ch.theorem3_verify(_odd_p(c), c.m, c.level, c.trials, c.seed,
                                                    c.workers),
                       {"p": 3, "m": 0, "level": 3, "trials": 100}),
    "remark3": _Entry(lambda c: ch.remark3_verify(c.m, c.level), {"m": 0, "level": 2}),
    "lemma3": _Entry(lambda c: ch.lemma3_verify(c.p, c.trials, c.seed, c.prec),
                     {"p": 3, "trials": 100}),
    "lemma4": _Entry(lambda c: ch.lemma4_verify(c.p, c.level), {"p": 3, "level": 5}),
    "eq12": _Entry(lambda c: ch.eq12_verify(_odd_p(c), c.level), {"p": 3, "level": 3}),
    "lemma5": _Entry(lambda c: ch.lemma5_verify(_odd_p(c), c.level), {"p": 3, "level": 4}),
}

FIGURE_SCENARIOS = ("remark1", "remark2", "theorem3", "remark3")


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Fill scenario defaults and reject bad values before anything runs."""
    entry = SCENARIOS.get(cfg.scenario)
    if entry is None:
        raise BadConfig(f"unknown scenario {cfg.scenario!r}; choose from {', '.join(SCENARIOS)}")
    for key, value in entry.defaults.items():
        if getattr(cfg, key) is None:
            setattr(cfg, key, value)
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, int) and not isinstance(value, bool) and value < 0:
            raise BadConfig(f"--{f.name.replace('_', '-')} must be nonnegative")
    if cfg.p is not None:
        if not is_prime(cfg.p):
            raise BadConfig(f"--p {cfg.p} is not prime")
    if cfg.workers < 1:
        raise BadConfig("--workers must be at least 1")
    if cfg.radius < 1 or cfg.denom_bound < 1:
        raise BadConfig("--radius and --denom-bound must be positive")
    if cfg.field is not None:
        cfg.ring("")
    if cfg.scenario == "theorem2" and cfg.field not in (None, "q"):
        raise BadConfig("theorem2 runs on the rationals only (--field q)")
    if cfg.figure and cfg.scenario not in FIGURE_SCENARIOS:
        raise BadConfig(f"--figure is available for {', '.join(FIGURE_SCENARIOS)}")
    return cfg


def run(config: ScenarioConfig) -> Report:
    """Validate ``config`` and dispatch to its verifier."""
    cfg = validate(config)
    try:
        return SCENARIOS[cfg.scenario].run(cfg)
    except CharfieldError as exc:
        # precondition failures are configuration errors, not counterexamples
        raise BadConfig(f"{cfg.scenario}: {exc}") from exc


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def canonical(obj: Any) -> Any:
    """JSON-ready copy with rationals as ``num/den`` strings and string keys."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str, float)):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (PAdic, StepDensity)):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [canonical(v) for v in obj]
        return sorted(items, key=repr) if isinstance(obj, (set, frozenset)) else items
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def report_dict(report: Report, timing: bool = False) -> dict:
    out = {
        "scenario": report.scenario,
        "params": report.params,
        "seed": report.seed,
        "pass": report.passed,
        "witnesses": report.witnesses,
        "counts": report.counts,
        "details": report.details,
    }
    if timing:
        out["runtime_ms"] = report.runtime_ms
    return canonical(out)


def dumps(obj: Any) -> str:
    return json.dumps(canonical(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def emit(report: Report, path: Optional[str] = None, timing: bool = False) -> str:
    """Write the canonical JSON report to ``path`` (stdout when ``None`` or ``-``).

    Runtime is left out unless ``timing`` is set, so identical configurations
    produce identical bytes.
    """
    text = dumps(report_dict(report, timing))
    if path is None or path == "-":
        sys.stdout.write(text)
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

def showcase_joint(cfg: ScenarioConfig) -> JointDist:
    """The joint law of (S, D) that a scenario's figure displays."""
    if cfg.scenario == "remark1":
        R = cfg.ring("fp:2")
        mu = parse_dist(R, ",".join(f"{x}:1/{R.order}" for x in R.elements()))
        return push_T(mu, mu)
    if cfg.scenario == "remark2":
        R = cfg.ring("fp:5")
        mu = parse_dist(R, f"{R.format_element(R.one)}:1/2,{R.format_element(R.neg(R.one))}:1/2")
        return push_T(mu, degenerate(R, R.zero))
    if cfg.scenario == "theorem3":
        mu = haar_density(cfg.p, cfg.m, cfg.level).to_dist()
        return push_T(mu, mu)
    mu = haar_density(2, cfg.m, cfg.level).to_dist()
    return push_T(mu, mu)


def _render(joint: JointDist, path: str, title: str) -> None:
    from .plots import joint_vs_product
    try:
        joint_vs_product(joint, path, title)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc


# ---------------------------------------------------------------------------
# padic and dist queries
# ---------------------------------------------------------------------------

def _padic_value(p: int, text: str, prec: int) -> PAdic:
    try:
        return PAdic.from_rational(p, Fraction(text), prec)
    except (ValueError, ZeroDivisionError) as exc:
        raise BadConfig(f"bad value {text!r}") from exc


def padic_query(op: str, p: int, value: Optional[str], prec: int, method: str = "hensel") -> dict:
    if not is_prime(p):
        raise BadConfig(f"--p {p} is not prime")
    if op == "branch-table":
        return branch_table(p).to_json()
    if value is None:
        raise BadConfig(f"padic {op} needs --value")
    x = _padic_value(p, value, prec)
    out: Dict[str, Any] = {"p": p, "value": value, "prec": prec}
    if op == "expand":
        out["expansion"] = x.to_json()
        out["text"] = str(x)
    elif op == "norm":
        out["norm"] = norm(x)
        out["valuation"] = None if x.is_zero else x.val
    elif op == "is-square":
        out["is_square"] = is_square(x)
    elif op == "sqrt":
        root = sqrt_series(x) if method == "series" else sqrt_hensel(x)
        out["method"] = method
        out["sqrt"] = root.to_json()
        out["text"] = str(root)
    else:
        raise BadConfig(f"unknown padic op {op!r}")
    return out


def dist_query(op: str, field: str, mu_text: str, nu_text: Optional[str]) -> dict:
    try:
        R = RingSpec.parse(field)
        mu = parse_dist(R, mu_text)
        nu = parse_dist(R, nu_text) if nu_text else mu
    except ValueError as exc:
        raise BadConfig(str(exc)) from exc
    out: Dict[str, Any] = {"field": str(R), "mu": format_dist(mu)}
    if op == "classify":
        cls = classify(mu)
        out["class"] = type(cls).__name__
        if isinstance(cls, HaarShift):
            out["subgroup"] = [R.format_element(x) for x in sorted(cls.subgroup.elements)]
            out["shift"] = R.format_element(cls.shift)
        return out
    out["nu"] = format_dist(nu)
    joint = push_T(mu, nu)
    ind = is_independent(joint)
    if op == "push":
        out["joint"] = joint.triples()
    elif op != "independent":
        raise BadConfig(f"unknown dist op {op!r}")
    out["independent"] = ind.independent
    if ind.witness is not None:
        out["witness"] = {"pair": [R.format_element(x) for x in ind.witness],
                          "joint": ind.joint, "product": ind.product}
    return out


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise BadConfig(f"{SEED_ENV}={raw!r} is not an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification scenario and emit a JSON report")
    v.add_argument("scenario", help=", ".join(SCENARIOS))
    v.add_argument("--field", help='carrier: "fp:p", "fpn:p,n", "zmod:p,N" or "q"')
    v.add_argument("--p", type=int)
    v.add_argument("--m", type=int)
    v.add_argument("--level", "--N", dest="level", type=int)
    v.add_argument("--prec", type=int, default=DEFAULT_PREC)
    v.add_argument("--trials", type=int)
    v.add_argument("--radius", type=int, default=3)
    v.add_argument("--denom-bound", type=int, default=2)
    v.add_argument("--seed", type=int, help=f"master seed (default ${SEED_ENV} or 0)")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out", help="write the report here instead of stdout")
    v.add_argument("--timing", action="store_true", help="include runtime_ms in the report")
    v.add_argument("--figure", help="also render a joint-vs-product heatmap to this file")

    pa = sub.add_parser("padic", help="p-adic arithmetic queries")
    pa.add_argument("op", choices=["sqrt", "is-square", "norm", "expand", "branch-table"])
    pa.add_argument("--p", type=int, required=True)
    pa.add_argument("--value", help="rational, e.g. 2 or -3/49")
    pa.add_argument("--prec", type=int, default=DEFAULT_PREC)
    pa.add_argument("--method", choices=["hensel", "series"], default="hensel")

    d = sub.add_parser("dist", help="distribution queries")
    d.add_argument("op", choices=["push", "independent", "classify"])
    d.add_argument("--field", required=True)
    d.add_argument("--mu", required=True, help='e.g. "0:1/2,1:1/2"')
    d.add_argument("--nu", help="second law (default: mu)")
    d.add_argument("--figure", help="render the joint-vs-product heatmap (push only)")
    return parser


def _config_from_args(args) -> ScenarioConfig:
    seed = args.seed if args.seed is not None else _env_seed()
    return ScenarioConfig(scenario=args.scenario, field=args.field, p=args.p, m=args.m,
                          level=args.level, prec=args.prec, trials=args.trials,
                          radius=args.radius, denom_bound=args.denom_bound, seed=seed,
                          workers=args.workers, out=args.out, timing=args.timing,
                          figure=args.figure)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            cfg = _config_from_args(args)
            report = run(cfg)
            emit(report, cfg.out, cfg.timing)
            if cfg.out:
                verdict = "PASS" if report.passed else "FAIL"
                print(f"{report.scenario}: {verdict} "
                      f"(trials={report.trials}, fails={report.fails}) -> {cfg.out}")
            if cfg.figure:
                _render(showcase_joint(cfg), cfg.figure, f"{cfg.scenario}: joint vs product")
            return EXIT_PASS if report.passed else EXIT_FAIL
        if args.command == "padic":
            sys.stdout.write(dumps(padic_query(args.op, args.p, args.value, args.prec,
                                               args.method)))
            return EXIT_PASS
        if args.figure and args.op != "push":
            raise BadConfig("--figure is only available for dist push")
        result = dist_query(args.op, args.field, args.mu, args.nu)
        sys.stdout.write(dumps(result))
        if args.figure:
            R = RingSpec.parse(args.field)
            mu = parse_dist(R, args.mu)
            joint = push_T(mu, parse_dist(R, args.nu) if args.nu else mu)
            _render(joint, args.figure, "push: joint vs product")
        return EXIT_PASS
    except BadConfig as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IoError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CharfieldError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
