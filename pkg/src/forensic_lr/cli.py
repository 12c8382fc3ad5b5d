"""Command-line front end: ``forensic-lr compute | verify | simulate``.

Exit codes: 0 ok, 1 verification failure, 2 validation error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .beta import HALDANE, BetaParams, NamedPrior, PriorTag, StructureParams
from .errors import DomainError, ForensicLRError, IndeterminateLimitError, OracleError, ValidationError
from .inference import (
    CaseInput,
    LrReport,
    defence_likelihood,
    haldane_lr,
    plugin_lr,
    prosecution_likelihood,
    total_lr,
)
from .oracle import (
    DEFAULT_GRID_ALPHAS,
    DEFAULT_HALDANE_EPS,
    QuadratureSpec,
    haldane_convergence,
    sample_population,
    verify_grid,
)
from .profiles import LocusCounts, read_database_csv, read_profile_csv, summarize, write_database_csv

log = logging.getLogger("forensic_lr")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3

RECIPES = ("full-bayes", "plugin", "custom")


# --- JSON with fixed key order and 17 significant digits ------------------


def _encode(value, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return '"nan"'
        if math.isinf(value):
            return '"inf"' if value > 0 else '"-inf"'
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent + 1)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in value):
            return "[" + ", ".join(_encode(v, indent + 1) for v in value) + "]"
        items = [pad + _encode(v, indent + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + "  " * indent + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: insertion key order, floats as 17 significant
    digits, infinities as the strings ``"inf"`` / ``"-inf"``."""
    return _encode(obj) + "\n"


# --- prior configuration --------------------------------------------------


@dataclass(frozen=True)
class PriorConfig:
    """Parsed prior file: exactly one of ``named``, ``structure``, ``natural``.

    Scalars broadcast over all loci; arrays must have one entry per locus.
    """

    kind: str
    named: Optional[PriorTag] = None
    p: Union[float, tuple[float, ...], None] = None
    theta: Optional[float] = None
    alpha: Union[float, tuple[float, ...], None] = None
    beta: Union[float, tuple[float, ...], None] = None

    @classmethod
    def from_dict(cls, data) -> "PriorConfig":
        if not isinstance(data, dict):
            raise ValidationError("prior config must be a JSON object")
        keys = [k for k in ("named", "structure", "natural") if k in data]
        extra = set(data) - {"named", "structure", "natural"}
        if len(keys) != 1 or extra:
            raise ValidationError(
                "prior config needs exactly one of 'named', 'structure', 'natural'"
                + (f"; unknown keys {sorted(extra)}" if extra else "")
            )
        kind = keys[0]
        body = data[kind]
        if kind == "named":
            try:
                return cls(kind, named=PriorTag(str(body).lower()))
            except ValueError:
                raise ValidationError(f"unknown named prior {body!r}; use haldane, jeffreys or laplace") from None
        if not isinstance(body, dict):
            raise ValidationError(f"'{kind}' must be an object")
        if kind == "structure":
            _require(body, kind, ("p", "theta"))
            if not _is_number(body["theta"]):
                raise ValidationError("structure.theta must be a single number")
            return cls(kind, p=_scalar_or_list(body["p"], "structure.p"), theta=float(body["theta"]))
        _require(body, kind, ("alpha", "beta"))
        return cls(
            kind,
            alpha=_scalar_or_list(body["alpha"], "natural.alpha"),
            beta=_scalar_or_list(body["beta"], "natural.beta"),
        )

    @classmethod
    def load(cls, path: Union[str, os.PathLike]) -> "PriorConfig":
        try:
            with open(path) as f:
                data = json.load(f)
        except OSError as exc:
            raise ValidationError(f"cannot read prior config {os.fspath(path)}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"prior config {os.fspath(path)} is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def priors(self, num_loci: int) -> tuple:
        try:
            if self.kind == "named":
                return (NamedPrior(self.named),) * num_loci
            if self.kind == "structure":
                return tuple(StructureParams(p, self.theta) for p in _broadcast(self.p, num_loci, "p"))
            alphas = _broadcast(self.alpha, num_loci, "alpha")
            betas = _broadcast(self.beta, num_loci, "beta")
            return tuple(BetaParams(a, b) for a, b in zip(alphas, betas))
        except DomainError as exc:
            raise ValidationError(f"invalid prior config: {exc}") from None


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _require(body: dict, kind: str, fields: Sequence[str]) -> None:
    missing = [f for f in fields if f not in body]
    extra = set(body) - set(fields)
    if missing or extra:
        raise ValidationError(f"'{kind}' needs exactly the fields {list(fields)}")


def _scalar_or_list(x, name: str):
    if _is_number(x):
        return float(x)
    if isinstance(x, list) and x and all(_is_number(v) for v in x):
        return tuple(float(v) for v in x)
    raise ValidationError(f"{name} must be a number or a non-empty array of numbers")


def _broadcast(x, num_loci: int, name: str) -> tuple[float, ...]:
    if isinstance(x, tuple):
        if len(x) != num_loci:
            raise ValidationError(f"{name} has {len(x)} entries for {num_loci} loci")
        return x
    return (x,) * num_loci


# --- commands -------------------------------------------------------------


def _report_dict(recipe: str, K: int, L: int, report: LrReport, prior_prob: Optional[float]) -> dict:
    out = {
        "recipe": recipe,
        "num_loci": K,
        "database_size": L,
        "per_locus_lr": list(report.per_locus_lr),
        "total_lr": report.total_lr,
        "log10_total": report.log10_total,
    }
    if prior_prob is not None:
        out["prior_prob_hp"] = prior_prob
        out["posterior_odds"] = report.posterior_odds
        out["posterior_prob_hp"] = report.posterior_prob_hp
    return out


def cmd_compute(args: argparse.Namespace) -> int:
    suspect = read_profile_csv(args.suspect)
    perpetrator = read_profile_csv(args.perpetrator)
    K = len(suspect)
    if len(perpetrator) != K:
        raise ValidationError(f"suspect has {K} loci, perpetrator has {len(perpetrator)}")
    if args.prior_prob is not None and not 0 < args.prior_prob < 1:
        raise ValidationError("--prior-prob must lie strictly between 0 and 1")
    config = PriorConfig.load(args.prior) if args.prior else None

    counts = LocusCounts.empty(K)
    if args.database:
        db = read_database_csv(args.database)
        if db.num_loci != K:
            raise ValidationError(f"database has {db.num_loci} loci, profiles have {K}")
        if args.recipe == "plugin":
            log.warning("plug-in recipe ignores the database (L = n_k = 0)")
        else:
            counts = summarize(db)

    if args.recipe == "full-bayes":
        if config is not None and not (config.kind == "named" and config.named is PriorTag.HALDANE):
            log.warning("full-bayes recipe always uses the Haldane limit; ignoring --prior")
        priors = (HALDANE,) * K
        report = haldane_lr(perpetrator, suspect, counts, args.prior_prob)
    elif args.recipe == "plugin":
        if config is None or config.kind != "structure":
            raise ValidationError("plugin recipe needs a 'structure' prior config (p, theta)")
        priors = config.priors(K)
        report = plugin_lr(config.p, config.theta, perpetrator, suspect, args.prior_prob)
    else:
        if config is None:
            raise ValidationError("custom recipe needs --prior")
        priors = config.priors(K)
        report = total_lr(CaseInput(suspect, perpetrator, priors, counts, args.prior_prob))

    out = _report_dict(args.recipe, K, counts.L, report, args.prior_prob)
    if args.likelihoods:
        out["prosecution_likelihood"] = prosecution_likelihood(perpetrator, suspect, priors, counts)
        out["defence_likelihood"] = defence_likelihood(perpetrator, suspect, priors, counts)
    sys.stdout.write(dumps(out))
    return EXIT_OK


def _parse_float_list(text: str, name: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError:
        raise ValidationError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ValidationError(f"{name}: empty list")
    return values


def _parse_grid(text: str) -> tuple[tuple[float, ...], int]:
    alphas_text, _, max_l_text = text.partition(":")
    alphas = _parse_float_list(alphas_text, "--grid")
    if any(not a > 0 for a in alphas):
        raise ValidationError("--grid pseudo-counts must be positive")
    try:
        max_L = int(max_l_text) if max_l_text else 20
    except ValueError:
        raise ValidationError(f"--grid: bad maximum database size {max_l_text!r}") from None
    if max_L < 0:
        raise ValidationError("--grid: maximum database size must be non-negative")
    return alphas, max_L


def cmd_verify(args: argparse.Namespace) -> int:
    alphas, max_L = _parse_grid(args.grid)
    eps = _parse_float_list(args.haldane_eps, "--haldane-eps")
    if any(not 0 < e < 1 for e in eps):
        raise ValidationError("--haldane-eps values must lie in (0, 1)")
    spec = QuadratureSpec()
    grid = verify_grid(alphas, max_L, spec, args.rel_tol)

    haldane = [
        haldane_convergence(n, L, s, eps, spec)
        for L in range(max_L + 1) for n in range(L + 1) for s in (0, 1)
    ]
    haldane_max = max((h.rel_discrepancy for h in haldane), default=0.0)
    haldane_ok = all(h.monotone for h in haldane) and haldane_max <= args.rel_tol
    passed = grid.passed and haldane_ok

    if args.table:
        with open(args.table, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["quantity", "alpha", "beta", "n", "L", "r", "s",
                             "closed_form", "oracle", "rel_discrepancy"])
            for p in grid.points:
                writer.writerow([p.quantity, repr(p.alpha), repr(p.beta), p.n, p.L,
                                 "" if p.r is None else p.r, p.s,
                                 format(p.closed_form, ".17g"), format(p.oracle, ".17g"),
                                 format(p.rel_discrepancy, ".17g")])

    out = {
        "passed": passed,
        "rel_tol": args.rel_tol,
        "grid": {"alphas": list(alphas), "max_L": max_L},
        "num_points": len(grid.points),
        "max_rel_discrepancy": grid.max_rel_discrepancy,
        "worst": [p.to_dict() for p in grid.worst(10)],
        "haldane": {
            "eps": list(eps),
            "passed": haldane_ok,
            "max_rel_discrepancy": haldane_max,
            "table": [
                {"n": h.n, "L": h.L, "s": h.s, "lr": list(h.lr), "limit": h.limit,
                 "extrapolated": h.extrapolated, "monotone": h.monotone}
                for h in haldane
            ],
        },
    }
    sys.stdout.write(dumps(out))
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def _load_q(text: str) -> tuple[float, ...]:
    if os.path.isfile(text):
        with open(text) as f:
            content = f.read().strip()
        if content.startswith("["):
            try:
                data = json.loads(content)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"--q file is not valid JSON: {exc}") from None
            if not isinstance(data, list) or not all(_is_number(v) for v in data):
                raise ValidationError("--q file must hold a JSON array of numbers")
            return tuple(float(v) for v in data)
        return _parse_float_list(content, "--q")
    return _parse_float_list(text, "--q")


def cmd_simulate(args: argparse.Namespace) -> int:
    q = _load_q(args.q)
    if any(not 0 < v < 1 for v in q):
        raise ValidationError("--q values must lie strictly between 0 and 1")
    if args.num < 0:
        raise ValidationError("--num must be non-negative")
    if not 0 <= args.seed < 2**64:
        raise ValidationError("--seed must be a 64-bit unsigned integer")
    db = sample_population(q, args.num, args.seed)
    try:
        write_database_csv(db, args.out)
    except OSError as exc:
        raise ValidationError(f"cannot write {args.out}: {exc.strerror}") from None
    counts = summarize(db)
    sys.stdout.write(dumps({
        "out": os.fspath(args.out),
        "seed": args.seed,
        "num_loci": db.num_loci,
        "database_size": counts.L,
        "counts": list(counts.n),
    }))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forensic-lr",
        description="Bayesian forensic likelihood ratios for binary-locus profiles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="compute the likelihood ratio for one case")
    p.add_argument("--suspect", required=True, help="CSV with the suspect's profile")
    p.add_argument("--perpetrator", required=True, help="CSV with the crime-scene profile")
    p.add_argument("--database", help="CSV database from the relevant population")
    p.add_argument("--prior", help="JSON prior config (named / structure / natural)")
    p.add_argument("--recipe", choices=RECIPES, default="full-bayes")
    p.add_argument("--prior-prob", type=float, help="prior probability of the prosecution hypothesis")
    p.add_argument("--likelihoods", action="store_true",
                   help="also report the prosecution and defence likelihoods")
    p.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="check closed forms against quadrature")
    v.add_argument("--grid", default=",".join(format(a, "g") for a in DEFAULT_GRID_ALPHAS) + ":20",
                   help="pseudo-count values and max database size, e.g. '0.25,0.5,1,2,5:20'")
    v.add_argument("--rel-tol", type=float, default=1e-9)
    v.add_argument("--haldane-eps", default=",".join(format(e, "g") for e in DEFAULT_HALDANE_EPS),
                   help="epsilon sequence for the Haldane limit check")
    v.add_argument("--table", help="write every grid point to this CSV file")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="sample a database from known frequencies")
    s.add_argument("--q", required=True, help="comma-separated frequencies or a file holding them")
    s.add_argument("--num", type=int, required=True, help="number of individuals")
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DomainError) as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION
    except (IndeterminateLimitError, OracleError, ArithmeticError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except ForensicLRError as exc:
        log.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
