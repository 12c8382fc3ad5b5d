"""Closed-form beta-Bernoulli inference and forensic likelihood ratios.

Every locus is an independent Bernoulli trial with unknown frequency
``q_k`` under a beta prior. Integrating ``q_k`` out against its posterior
gives predictive probabilities that are ratios of small sums:

    P(s=1 | n, L) = (alpha + n) / (alpha + beta + L)
    P(r, s | n, L) = P(r | n, L) * P(s | n + r, L + 1)

and the matched-locus likelihood ratio

    LR_k(s, s) = 1 / P(s | n + s, L + 1).

A mismatch at any locus gives an LR of exactly 0.

Haldane priors are handled by plugging ``alpha = beta = 0`` into these
formulas. The LR limit is finite everywhere. The predictives are 0/0 when
the database is empty, and asking for them raises
:class:`~forensic_lr.errors.IndeterminateLimitError`.

When both pseudo-counts are integers (Laplace, Haldane, integer natural
parameters) the ratios are formed from Python integers, so the result is
the correctly rounded value of the exact rational.
"""

from __future__ import annotations

import enum
import math
import numbers
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .beta import BetaParams, NamedPrior, StructureParams, from_structure
from .errors import DomainError, IndeterminateLimitError, ValidationError
from .profiles import LocusCounts, Profile

__all__ = [
    "ModelParams",
    "HaldanePosterior",
    "Hypothesis",
    "CaseInput",
    "LrReport",
    "profile_probability",
    "log_profile_probability",
    "posterior_update",
    "predictive_single",
    "predictive_pair",
    "prosecution_likelihood",
    "defence_likelihood",
    "locus_lr",
    "total_lr",
    "posterior_odds",
    "plugin_lr",
    "haldane_lr",
    "broadcast_priors",
]


@dataclass(frozen=True)
class ModelParams:
    """Per-locus state-1 probabilities ``q_k``; independent, need not sum to 1."""

    q: tuple[float, ...]

    def __post_init__(self) -> None:
        q = tuple(float(v) for v in self.q)
        if not q:
            raise ValidationError("ModelParams needs at least one locus")
        bad = [k for k, v in enumerate(q) if not 0 < v < 1]
        if bad:
            raise DomainError(f"q_k must lie in (0, 1); offending loci {bad}")
        object.__setattr__(self, "q", q)

    def __len__(self) -> int:
        return len(self.q)


@dataclass(frozen=True)
class HaldanePosterior:
    """Posterior of a Haldane prior, kept symbolic as accumulated counts.

    Equivalent to ``Beta(ones, zeros)`` in the limit; improper while either
    count is zero.
    """

    ones: int = 0
    zeros: int = 0

    def __post_init__(self) -> None:
        if self.ones < 0 or self.zeros < 0:
            raise ValidationError("HaldanePosterior counts must be non-negative")

    @property
    def is_proper(self) -> bool:
        return self.ones > 0 and self.zeros > 0

    def as_beta(self) -> BetaParams:
        if not self.is_proper:
            raise DomainError(f"Haldane posterior with counts ({self.ones}, {self.zeros}) is improper")
        return BetaParams(self.ones, self.zeros)


LocusPrior = Union[BetaParams, StructureParams, NamedPrior, HaldanePosterior]


class Hypothesis(str, enum.Enum):
    HP = "Hp"  # suspect and perpetrator are the same individual
    HD = "Hd"  # they are different individuals


def _pseudo_counts(prior: LocusPrior) -> tuple[Union[int, float], Union[int, float]]:
    """Natural pseudo-counts, with Haldane mapped to its (0, 0) limit."""
    if isinstance(prior, NamedPrior):
        if prior.is_haldane:
            return 0, 0
        prior = prior.materialize()
    elif isinstance(prior, HaldanePosterior):
        return prior.ones, prior.zeros
    if isinstance(prior, StructureParams):
        prior = from_structure(prior)
    if not isinstance(prior, BetaParams):
        raise TypeError(f"unsupported prior type {type(prior).__name__}")
    a, b = prior.alpha, prior.beta
    if float(a).is_integer() and float(b).is_integer():
        return int(a), int(b)
    return a, b


def _check_counts(n: int, L: int) -> tuple[int, int]:
    if not (isinstance(n, numbers.Integral) and isinstance(L, numbers.Integral)) or not 0 <= n <= L:
        raise ValidationError(f"need integers 0 <= n <= L, got n={n!r}, L={L!r}")
    return int(n), int(L)


def _check_state(name: str, x: int) -> None:
    if x not in (0, 1):
        raise ValidationError(f"{name} must be 0 or 1, got {x!r}")


def log_profile_probability(a: Profile, q: ModelParams) -> float:
    """``ln P(a | q) = sum_k [a_k ln q_k + (1 - a_k) ln(1 - q_k)]``."""
    if len(a) != len(q):
        raise ValidationError(f"profile has {len(a)} loci, q has {len(q)}")
    return math.fsum(math.log(qk) if ak else math.log1p(-qk) for ak, qk in zip(a, q.q))


def profile_probability(a: Profile, q: ModelParams) -> float:
    """Probability that a random individual has profile ``a`` when ``q`` is known."""
    return math.exp(log_profile_probability(a, q))


def posterior_update(prior: Sequence[LocusPrior], counts: LocusCounts) -> list[LocusPrior]:
    """Conjugate update ``Beta(alpha + n_k, beta + L - n_k)`` at every locus.

    Haldane entries (and earlier Haldane posteriors) stay symbolic as a
    :class:`HaldanePosterior`. With ``L = 0`` each entry is returned as is.
    """
    if len(prior) != counts.num_loci:
        raise ValidationError(f"{len(prior)} priors for {counts.num_loci} loci")
    if counts.L == 0:
        return list(prior)
    out: list[LocusPrior] = []
    for pk, nk in zip(prior, counts.n):
        ones, zeros = nk, counts.L - nk
        if isinstance(pk, HaldanePosterior):
            out.append(HaldanePosterior(pk.ones + ones, pk.zeros + zeros))
        elif isinstance(pk, NamedPrior) and pk.is_haldane:
            out.append(HaldanePosterior(ones, zeros))
        else:
            a, b = _pseudo_counts(pk)
            out.append(BetaParams(a + ones, b + zeros))
    return out


def predictive_single(prior: LocusPrior, n: int, L: int, s: int) -> float:
    """Posterior predictive probability that a new individual has state ``s``.

    With the Laplace prior this is the rule of succession ``(n + 1) / (L + 2)``.

    Raises:
        IndeterminateLimitError: for a Haldane prior with no observations.
    """
    n, L = _check_counts(n, L)
    _check_state("s", s)
    a, b = _pseudo_counts(prior)
    den = (a + b) + L
    if den == 0:
        raise IndeterminateLimitError(
            "predictive probability under the Haldane prior with an empty database is 0/0"
        )
    # integer parts grouped first so alpha = beta gives mirror-exact results
    return (a + n) / den if s == 1 else (b + (L - n)) / den


def predictive_pair(prior: LocusPrior, n: int, L: int, r: int, s: int) -> float:
    """Joint predictive ``P(r, s)`` for two further individuals at one locus.

    Computed by the chain rule: observe ``r``, add it to the counts, then
    predict ``s``. Defined for all four ``(r, s)`` outcomes.
    """
    _check_state("r", r)
    first = predictive_single(prior, n, L, r)
    return first * predictive_single(prior, n + r, L + 1, s)


def locus_lr(prior: LocusPrior, n: int, L: int, r: int, s: int) -> float:
    """Per-locus likelihood ratio ``LR_k(r, s)``.

    0 for a mismatch. For a match at state 1::

        (alpha + beta + L + 1) / (alpha + n + 1)

    and at state 0::

        (alpha + beta + L + 1) / (beta + L + 1 - n)

    Under Haldane this reduces to ``(L + 1) / (n + 1)`` and
    ``(L + 1) / (L + 1 - n)``, both finite even for ``L = 0``.
    """
    n, L = _check_counts(n, L)
    _check_state("r", r)
    _check_state("s", s)
    if r != s:
        return 0.0
    a, b = _pseudo_counts(prior)
    num = (a + b) + (L + 1)
    return num / (a + (n + 1)) if s == 1 else num / (b + (L + 1 - n))


def broadcast_priors(prior: Union[LocusPrior, Sequence[LocusPrior]], num_loci: int) -> tuple[LocusPrior, ...]:
    """Repeat a single prior over all loci, or check a per-locus sequence."""
    if isinstance(prior, (BetaParams, StructureParams, NamedPrior, HaldanePosterior)):
        return (prior,) * num_loci
    prior = tuple(prior)
    if len(prior) != num_loci:
        raise ValidationError(f"{len(prior)} priors supplied for {num_loci} loci")
    return prior


def _check_case(r: Profile, s: Profile, prior: Sequence[LocusPrior], counts: LocusCounts) -> None:
    K = len(s)
    if len(r) != K:
        raise ValidationError(f"suspect has {K} loci, perpetrator has {len(r)}")
    if counts.num_loci != K:
        raise ValidationError(f"database summarizes {counts.num_loci} loci, profiles have {K}")
    if len(prior) != K:
        raise ValidationError(f"{len(prior)} priors supplied for {K} loci")


def prosecution_likelihood(
    r: Profile, s: Profile, prior: Sequence[LocusPrior], counts: LocusCounts
) -> float:
    """``P(r, s | Hp) = delta(r, s) * prod_k P(s_k | n_k, L)``."""
    prior = broadcast_priors(prior, len(s))
    _check_case(r, s, prior, counts)
    if tuple(r) != tuple(s):
        return 0.0
    return math.prod(predictive_single(pk, nk, counts.L, sk) for pk, nk, sk in zip(prior, counts.n, s))


def defence_likelihood(
    r: Profile, s: Profile, prior: Sequence[LocusPrior], counts: LocusCounts
) -> float:
    """``P(r, s | Hd) = prod_k P(r_k, s_k | n_k, L)``; no delta factor."""
    prior = broadcast_priors(prior, len(s))
    _check_case(r, s, prior, counts)
    return math.prod(
        predictive_pair(pk, nk, counts.L, rk, sk) for pk, nk, rk, sk in zip(prior, counts.n, r, s)
    )


@dataclass(frozen=True)
class CaseInput:
    """Everything needed for one evaluation.

    ``prior`` may be a single prior (applied to every locus) or one per
    locus; ``counts`` defaults to an empty database.
    """

    suspect: Profile
    perpetrator: Profile
    prior: Union[LocusPrior, Sequence[LocusPrior]]
    counts: Optional[LocusCounts] = None
    prior_prob_hp: Optional[float] = None

    def __post_init__(self) -> None:
        K = len(self.suspect)
        object.__setattr__(self, "prior", broadcast_priors(self.prior, K))
        if self.counts is None:
            object.__setattr__(self, "counts", LocusCounts.empty(K))
        _check_case(self.perpetrator, self.suspect, self.prior, self.counts)
        if self.prior_prob_hp is not None and not 0 < self.prior_prob_hp < 1:
            raise ValidationError(f"prior probability of Hp must be in (0, 1), got {self.prior_prob_hp}")

    @property
    def num_loci(self) -> int:
        return len(self.suspect)


@dataclass(frozen=True)
class LrReport:
    """Per-locus and total likelihood ratio.

    ``log10_total`` is ``-inf`` exactly when some locus contributes 0.
    ``total_lr`` may overflow to ``inf`` for very many loci while
    ``log10_total`` stays finite.
    """

    per_locus_lr: tuple[float, ...]
    total_lr: float
    log10_total: float
    posterior_prob_hp: Optional[float] = None
    posterior_odds: Optional[float] = None

    @classmethod
    def from_factors(cls, factors: Sequence[float], prior_prob_hp: Optional[float] = None) -> "LrReport":
        factors = tuple(float(f) for f in factors)
        if any(f == 0 for f in factors):
            total, log10_total = 0.0, -math.inf
        else:
            total = math.prod(factors)
            log10_total = 0.0
            for f in factors:  # fixed ascending-locus order
                log10_total += math.log10(f)
        report = cls(factors, total, log10_total)
        if prior_prob_hp is not None:
            odds, prob = posterior_odds(report, prior_prob_hp)
            report = cls(factors, total, log10_total, prob, odds)
        return report

    @property
    def is_exclusion(self) -> bool:
        return self.total_lr == 0

    def to_dict(self) -> dict:
        d = {
            "per_locus_lr": list(self.per_locus_lr),
            "total_lr": self.total_lr,
            "log10_total": self.log10_total,
        }
        if self.posterior_prob_hp is not None:
            d["posterior_odds"] = self.posterior_odds
            d["posterior_prob_hp"] = self.posterior_prob_hp
        return d


def total_lr(case: CaseInput) -> LrReport:
    """Product of the per-locus LRs of a case, accumulated in log10."""
    L = case.counts.L
    factors = [
        locus_lr(pk, nk, L, rk, sk)
        for pk, nk, rk, sk in zip(case.prior, case.counts.n, case.perpetrator, case.suspect)
    ]
    return LrReport.from_factors(factors, case.prior_prob_hp)


def posterior_odds(lr: Union[LrReport, float], prior_prob_hp: float) -> tuple[float, float]:
    """Combine a likelihood ratio with the prior probability of Hp.

    Returns ``(posterior odds, posterior probability of Hp)`` where the odds
    are ``LR * P / (1 - P)``.
    """
    if not 0 < prior_prob_hp < 1:
        raise ValidationError(f"prior probability of Hp must be in (0, 1), got {prior_prob_hp}")
    if isinstance(lr, LrReport):
        value = lr.total_lr
        if math.isinf(value) and math.isfinite(lr.log10_total):
            # total overflowed; posterior odds may still be representable
            log_odds = lr.log10_total + math.log10(prior_prob_hp) - math.log10(1 - prior_prob_hp)
            if log_odds > 308:
                return math.inf, 1.0
            odds = 10.0 ** log_odds
            return odds, odds / (1 + odds)
    else:
        value = float(lr)
    if value < 0:
        raise DomainError(f"likelihood ratio must be non-negative, got {value}")
    if value == 0:
        return 0.0, 0.0
    odds = value * prior_prob_hp / (1 - prior_prob_hp)
    if math.isinf(odds):
        return odds, 1.0
    return odds, odds / (1 + odds)


def plugin_lr(
    p: Union[float, Sequence[float]],
    theta: float,
    r: Profile,
    s: Profile,
    prior_prob_hp: Optional[float] = None,
) -> LrReport:
    """LR from point values ``p_k`` and ``theta`` with no relevant-population data.

    Matched loci give ``1 / ((1 - theta) p_k + theta)`` (state 1) or
    ``1 / ((1 - theta)(1 - p_k) + theta)`` (state 0). Forensic practice
    usually takes theta between 0.01 and 0.05.
    """
    K = len(s)
    if len(r) != K:
        raise ValidationError(f"suspect has {K} loci, perpetrator has {len(r)}")
    ps = (float(p),) * K if isinstance(p, (int, float)) else tuple(float(v) for v in p)
    if len(ps) != K:
        raise ValidationError(f"{len(ps)} values of p supplied for {K} loci")
    for pk in ps:
        StructureParams(pk, theta)  # validation only
    factors = []
    for pk, rk, sk in zip(ps, r, s):
        if rk != sk:
            factors.append(0.0)
        else:
            freq = pk if sk == 1 else 1 - pk
            factors.append(1 / ((1 - theta) * freq + theta))
    return LrReport.from_factors(factors, prior_prob_hp)


def haldane_lr(
    r: Profile, s: Profile, counts: LocusCounts, prior_prob_hp: Optional[float] = None
) -> LrReport:
    """Fully Bayesian LR: the Haldane limit evaluated on exact integer ratios.

    Matched loci give ``(L + 1) / (n_k + 1)`` or ``(L + 1) / (L + 1 - n_k)``,
    always between 1 and ``L + 1``.
    """
    K = len(s)
    if len(r) != K or counts.num_loci != K:
        raise ValidationError("suspect, perpetrator and counts must cover the same loci")
    L = counts.L
    factors = []
    for nk, rk, sk in zip(counts.n, r, s):
        if rk != sk:
            factors.append(0.0)
        else:
            factors.append((L + 1) / (nk + 1) if sk == 1 else (L + 1) / (L + 1 - nk))
    return LrReport.from_factors(factors, prior_prob_hp)
