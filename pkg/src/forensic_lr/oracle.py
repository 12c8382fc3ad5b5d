"""Brute-force checks for the closed forms in :mod:`forensic_lr.inference`.

Nothing here calls the closed-form formulas or the log-beta function to
produce an oracle value. Predictive probabilities are ratios of two beta
integrals, each computed by adaptive quadrature:

    P(s | n, L)    = I(a + s, b + 1 - s) / I(a, b)
    P(r, s | n, L) = I(a + r + s, b + 2 - r - s) / I(a, b)

with ``I(c, d) = int_0^1 x^(c-1) (1-x)^(d-1) dx``, ``a = alpha + n`` and
``b = beta + L - n``. The Monte-Carlo estimator samples ``q`` from the
posterior instead.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.special import xlog1py

from . import inference
from .beta import HALDANE, BetaParams, NamedPrior, StructureParams, from_structure
from .errors import OracleError, ValidationError
from .inference import CaseInput, HaldanePosterior, ModelParams
from .profiles import Database

__all__ = [
    "QuadratureSpec",
    "McSpec",
    "QuadResult",
    "McResult",
    "BetaIntegral",
    "beta_integral",
    "quad_predictive_single",
    "quad_predictive_pair",
    "quad_locus_lr",
    "mc_locus_lr",
    "sample_population",
    "Comparison",
    "HaldaneConvergence",
    "CaseVerification",
    "GridVerification",
    "haldane_convergence",
    "verify_case",
    "verify_grid",
    "DEFAULT_GRID_ALPHAS",
    "DEFAULT_HALDANE_EPS",
]

DEFAULT_GRID_ALPHAS = (0.25, 0.5, 1.0, 2.0, 5.0)
DEFAULT_HALDANE_EPS = (1e-4, 1e-6, 1e-8)

# Past this point e^-t is below 1e-26 and the singular piece is a pure exponential.
_T_CUT = 60.0


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 4096

    def __post_init__(self) -> None:
        if not (0 < self.abs_tol < 1 and 0 < self.rel_tol < 1):
            raise ValidationError("quadrature tolerances must lie in (0, 1)")
        if self.max_subdivisions < 1:
            raise ValidationError("max_subdivisions must be positive")


@dataclass(frozen=True)
class McSpec:
    sample_count: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ValidationError("sample_count must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float


@dataclass(frozen=True)
class McResult:
    estimate: float
    std_error: float


def _quad(f, lo: float, hi: float, spec: QuadratureSpec) -> tuple[float, float]:
    out = integrate.quad(
        f, lo, hi, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
        limit=spec.max_subdivisions, full_output=1,
    )
    if len(out) > 3:
        raise OracleError(f"quadrature on [{lo}, {hi}] did not converge: {out[3]}")
    return out[0], out[1]


def _lower_half(c: float, d: float, spec: QuadratureSpec) -> tuple[float, float, float]:
    """``int_0^(1/2) x^(c-1) (1-x)^(d-1) dx`` as ``(mantissa, error, log_scale)``.

    Substituting ``x = exp(-t)`` turns the endpoint factor ``x^(c-1) dx``
    into ``exp(-c t) dt``, which is smooth for every ``c > 0`` (including
    the integrable singularities of Jeffreys-like priors and the near-Haldane
    ``c -> 0``). Beyond ``t = 60`` the integrand is a pure exponential and
    its tail is added exactly. The integrand is divided by its peak, so the
    absolute tolerance is relative to its size and nothing underflows.
    """
    def logh(t):
        return -c * t + xlog1py(d - 1, -np.exp(-t))

    lo = math.log(2)
    shift = float(np.max(logh(np.linspace(lo, _T_CUT, 257))))
    val, err = _quad(lambda t: math.exp(logh(t) - shift), lo, _T_CUT, spec)
    tail = math.exp(-c * _T_CUT - shift) / c
    return val + tail, err, shift


@dataclass(frozen=True)
class BetaIntegral:
    """Quadrature value ``mantissa * exp(log_scale)`` with absolute error ``error * exp(log_scale)``."""

    mantissa: float
    error: float
    log_scale: float

    @property
    def value(self) -> float:
        return self.mantissa * math.exp(self.log_scale)

    @property
    def log_value(self) -> float:
        return math.log(self.mantissa) + self.log_scale

    @property
    def rel_error(self) -> float:
        return self.error / self.mantissa


@functools.lru_cache(maxsize=65536)
def beta_integral(c: float, d: float, spec: QuadratureSpec = QuadratureSpec()) -> BetaIntegral:
    """``int_0^1 x^(c-1) (1-x)^(d-1) dx`` by quadrature, split at 1/2."""
    if not (c > 0 and d > 0 and math.isfinite(c) and math.isfinite(d)):
        raise ValidationError(f"beta integral needs positive finite exponents, got ({c}, {d})")
    v1, e1, s1 = _lower_half(c, d, spec)
    v2, e2, s2 = _lower_half(d, c, spec)  # x -> 1 - x
    top = max(s1, s2)
    w1, w2 = math.exp(s1 - top), math.exp(s2 - top)
    return BetaIntegral(v1 * w1 + v2 * w2, e1 * w1 + e2 * w2, top)


def _ratio(num, den) -> QuadResult:
    if isinstance(num, BetaIntegral):
        value = num.mantissa / den.mantissa * math.exp(num.log_scale - den.log_scale)
        return QuadResult(value, value * (num.rel_error + den.rel_error))
    value = num.value / den.value
    return QuadResult(value, value * (num.error / num.value + den.error / den.value))


def _proper(prior) -> BetaParams:
    if isinstance(prior, NamedPrior):
        return prior.stand_in()
    if isinstance(prior, StructureParams):
        return from_structure(prior)
    if isinstance(prior, HaldanePosterior):
        return prior.as_beta()
    if isinstance(prior, BetaParams):
        return prior
    raise TypeError(f"unsupported prior type {type(prior).__name__}")


def _posterior(prior, n: int, L: int) -> tuple[float, float]:
    if not 0 <= n <= L:
        raise ValidationError(f"need 0 <= n <= L, got n={n}, L={L}")
    bp = _proper(prior)
    return bp.alpha + n, bp.beta + L - n


def quad_predictive_single(
    prior: BetaParams, n: int, L: int, s: int, spec: QuadratureSpec = QuadratureSpec()
) -> QuadResult:
    """``int q^s (1-q)^(1-s) Beta(q | alpha + n, beta + L - n) dq`` by quadrature."""
    a, b = _posterior(prior, n, L)
    return _ratio(beta_integral(a + s, b + 1 - s, spec), beta_integral(a, b, spec))


def quad_predictive_pair(
    prior: BetaParams, n: int, L: int, r: int, s: int, spec: QuadratureSpec = QuadratureSpec()
) -> QuadResult:
    """``int q^(r+s) (1-q)^(2-r-s) Beta(q | alpha + n, beta + L - n) dq`` by quadrature."""
    a, b = _posterior(prior, n, L)
    return _ratio(beta_integral(a + r + s, b + 2 - r - s, spec), beta_integral(a, b, spec))


def quad_locus_lr(
    prior: BetaParams, n: int, L: int, r: int, s: int, spec: QuadratureSpec = QuadratureSpec()
) -> QuadResult:
    """Prosecution over defence likelihood at one locus, both by quadrature."""
    if r != s:
        return QuadResult(0.0, 0.0)
    return _ratio(quad_predictive_single(prior, n, L, s, spec), quad_predictive_pair(prior, n, L, s, s, spec))


def mc_locus_lr(prior: BetaParams, n: int, L: int, s: int, spec: McSpec) -> McResult:
    """Monte-Carlo estimate of the matched-locus LR.

    Draws ``q`` from the posterior and forms the ratio estimator
    ``mean(x) / mean(x**2)`` with ``x = q`` (s=1) or ``1 - q`` (s=0). The
    standard error comes from the delta method.
    """
    if spec.sample_count < 2:
        raise ValidationError("need at least 2 samples to estimate a standard error")
    a, b = _posterior(prior, n, L)
    rng = np.random.default_rng(spec.seed)
    q = rng.beta(a, b, size=spec.sample_count)
    x = q if s == 1 else 1.0 - q
    y = x * x
    mx, my = x.mean(), y.mean()
    if my == 0:
        raise OracleError("no sample carried weight; increase sample_count")
    est = mx / my
    resid = x - est * y
    se = math.sqrt(resid.var(ddof=1) / spec.sample_count) / my
    return McResult(float(est), float(se))


def sample_population(q: Union[ModelParams, Sequence[float]], L: int, seed: int) -> Database:
    """Draw ``L`` iid profiles; locus ``k`` is 1 with probability ``q_k``."""
    if not isinstance(q, ModelParams):
        q = ModelParams(tuple(q))
    if L < 0:
        raise ValidationError(f"L must be non-negative, got {L}")
    if not 0 <= seed < 2**64:
        raise ValidationError("seed must be a 64-bit unsigned integer")
    rng = np.random.default_rng(seed)
    u = rng.random((L, len(q)))
    return Database((u < np.asarray(q.q)).astype(np.uint8))


# --- verification reports -------------------------------------------------


def _rel(closed: float, oracle: float) -> float:
    if closed == oracle:
        return 0.0
    if oracle == 0:
        return math.inf
    return abs(closed - oracle) / abs(oracle)


@dataclass(frozen=True)
class Comparison:
    quantity: str
    locus: int
    closed_form: float
    oracle: float
    oracle_error: float = 0.0

    @property
    def rel_discrepancy(self) -> float:
        return _rel(self.closed_form, self.oracle)

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "locus": self.locus,
            "closed_form": self.closed_form,
            "oracle": self.oracle,
            "oracle_error": self.oracle_error,
            "rel_discrepancy": self.rel_discrepancy,
        }


@dataclass(frozen=True)
class HaldaneConvergence:
    """Quadrature LRs under ``Beta(eps, eps)`` for shrinking ``eps``.

    ``extrapolated`` removes the leading O(eps) term from the last two
    values (Richardson), which is what is compared with the limit formula.
    """

    n: int
    L: int
    s: int
    eps: tuple[float, ...]
    lr: tuple[float, ...]
    limit: float
    lr_error: tuple[float, ...] = ()

    @property
    def errors(self) -> tuple[float, ...]:
        return tuple(abs(v - self.limit) for v in self.lr)

    @property
    def monotone(self) -> bool:
        """Distance to the limit never grows by more than the quadrature noise."""
        errs = self.errors
        noise = self.lr_error or (0.0,) * len(errs)
        return all(
            e2 <= e1 + q1 + q2 + 1e-15 * self.limit
            for e1, e2, q1, q2 in zip(errs, errs[1:], noise, noise[1:])
        )

    @property
    def extrapolated(self) -> float:
        if len(self.eps) < 2:
            return self.lr[-1]
        e1, e2 = self.eps[-2], self.eps[-1]
        v1, v2 = self.lr[-2], self.lr[-1]
        return (e1 * v2 - e2 * v1) / (e1 - e2)

    @property
    def rel_discrepancy(self) -> float:
        return _rel(self.limit, self.extrapolated)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "s": self.s,
            "eps": list(self.eps),
            "lr": list(self.lr),
            "lr_error": list(self.lr_error),
            "limit": self.limit,
            "extrapolated": self.extrapolated,
            "monotone": self.monotone,
            "rel_discrepancy": self.rel_discrepancy,
        }


def haldane_convergence(
    n: int, L: int, s: int,
    eps: Sequence[float] = DEFAULT_HALDANE_EPS,
    spec: QuadratureSpec = QuadratureSpec(),
) -> HaldaneConvergence:
    """Matched-locus LR under ``Beta(eps, eps)`` for each eps, by quadrature."""
    eps = tuple(sorted((float(e) for e in eps), reverse=True))
    if not eps:
        raise ValidationError("need at least one epsilon")
    results = [quad_locus_lr(BetaParams(e, e), n, L, s, s, spec) for e in eps]
    limit = inference.locus_lr(HALDANE, n, L, s, s)
    return HaldaneConvergence(
        n, L, s, eps, tuple(r.value for r in results), limit, tuple(r.error for r in results)
    )


@dataclass
class CaseVerification:
    rel_tol: float
    comparisons: list[Comparison] = field(default_factory=list)
    haldane: list[HaldaneConvergence] = field(default_factory=list)

    @property
    def max_rel_discrepancy(self) -> float:
        return max((c.rel_discrepancy for c in self.comparisons), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_discrepancy <= self.rel_tol and all(
            h.monotone and h.rel_discrepancy <= self.rel_tol for h in self.haldane
        )

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "rel_tol": self.rel_tol,
            "max_rel_discrepancy": self.max_rel_discrepancy,
            "comparisons": [c.to_dict() for c in self.comparisons],
            "haldane": [h.to_dict() for h in self.haldane],
        }


def _is_haldane(prior) -> bool:
    return (isinstance(prior, NamedPrior) and prior.is_haldane) or (
        isinstance(prior, HaldanePosterior) and not prior.is_proper
    )


def verify_case(
    case: CaseInput,
    spec: QuadratureSpec = QuadratureSpec(),
    rel_tol: float = 1e-9,
    haldane_eps: Sequence[float] = DEFAULT_HALDANE_EPS,
) -> CaseVerification:
    """Compare every closed-form quantity of a case with its oracle value.

    Proper-prior loci are checked for the suspect's predictive, the pair
    predictive and the LR. Haldane loci are checked through
    :func:`haldane_convergence`. The total prosecution and defence
    likelihoods are compared when every locus has a proper prior.
    """
    report = CaseVerification(rel_tol)
    L = case.counts.L
    hp_oracle = 1.0 if tuple(case.perpetrator) == tuple(case.suspect) else 0.0
    hd_oracle = 1.0
    all_proper = True
    for k, (pk, nk, rk, sk) in enumerate(zip(case.prior, case.counts.n, case.perpetrator, case.suspect)):
        if _is_haldane(pk):
            all_proper = False
            if rk == sk:
                ones = pk.ones if isinstance(pk, HaldanePosterior) else 0
                total = ones + (pk.zeros if isinstance(pk, HaldanePosterior) else 0)
                report.haldane.append(haldane_convergence(ones + nk, total + L, sk, haldane_eps, spec))
            else:
                report.comparisons.append(Comparison("locus_lr", k, inference.locus_lr(pk, nk, L, rk, sk), 0.0))
            continue
        single = quad_predictive_single(pk, nk, L, sk, spec)
        pair = quad_predictive_pair(pk, nk, L, rk, sk, spec)
        lr = quad_locus_lr(pk, nk, L, rk, sk, spec)
        report.comparisons += [
            Comparison("predictive_single", k, inference.predictive_single(pk, nk, L, sk), single.value, single.error),
            Comparison("predictive_pair", k, inference.predictive_pair(pk, nk, L, rk, sk), pair.value, pair.error),
            Comparison("locus_lr", k, inference.locus_lr(pk, nk, L, rk, sk), lr.value, lr.error),
        ]
        hp_oracle *= single.value
        hd_oracle *= pair.value
    if all_proper:
        report.comparisons += [
            Comparison("prosecution_likelihood", -1,
                       inference.prosecution_likelihood(case.perpetrator, case.suspect, case.prior, case.counts),
                       hp_oracle),
            Comparison("defence_likelihood", -1,
                       inference.defence_likelihood(case.perpetrator, case.suspect, case.prior, case.counts),
                       hd_oracle),
        ]
    return report


@dataclass(frozen=True)
class GridPoint:
    quantity: str
    alpha: float
    beta: float
    n: int
    L: int
    r: Optional[int]
    s: int
    closed_form: float
    oracle: float

    @property
    def rel_discrepancy(self) -> float:
        return _rel(self.closed_form, self.oracle)

    def to_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "alpha": self.alpha,
            "beta": self.beta,
            "n": self.n,
            "L": self.L,
            "r": self.r,
            "s": self.s,
            "closed_form": self.closed_form,
            "oracle": self.oracle,
            "rel_discrepancy": self.rel_discrepancy,
        }


@dataclass
class GridVerification:
    rel_tol: float
    points: list[GridPoint] = field(default_factory=list)

    @property
    def max_rel_discrepancy(self) -> float:
        return max((p.rel_discrepancy for p in self.points), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_discrepancy <= self.rel_tol

    def worst(self, count: int = 10) -> list[GridPoint]:
        return sorted(self.points, key=lambda p: p.rel_discrepancy, reverse=True)[:count]


def verify_grid(
    alphas: Iterable[float] = DEFAULT_GRID_ALPHAS,
    max_L: int = 20,
    spec: QuadratureSpec = QuadratureSpec(),
    rel_tol: float = 1e-9,
) -> GridVerification:
    """Closed form against quadrature for every ``Beta(alpha, beta)`` with
    alpha and beta drawn from ``alphas``, every ``0 <= n <= L <= max_L``,
    both single outcomes and all four pair outcomes and LRs.
    """
    alphas = tuple(float(a) for a in alphas)
    report = GridVerification(rel_tol)
    add = report.points.append
    for a in alphas:
        for b in alphas:
            prior = BetaParams(a, b)
            for L in range(max_L + 1):
                for n in range(L + 1):
                    for s in (0, 1):
                        add(GridPoint("predictive_single", a, b, n, L, None, s,
                                      inference.predictive_single(prior, n, L, s),
                                      quad_predictive_single(prior, n, L, s, spec).value))
                    for r in (0, 1):
                        for s in (0, 1):
                            add(GridPoint("predictive_pair", a, b, n, L, r, s,
                                          inference.predictive_pair(prior, n, L, r, s),
                                          quad_predictive_pair(prior, n, L, r, s, spec).value))
                            add(GridPoint("locus_lr", a, b, n, L, r, s,
                                          inference.locus_lr(prior, n, L, r, s),
                                          quad_locus_lr(prior, n, L, r, s, spec).value))
    return report
