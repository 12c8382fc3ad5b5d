"""Beta hyper-parameters, the log-beta function and the (p, theta) reparametrization.

A beta prior on a locus frequency ``q`` can be written with natural
pseudo-counts ``(alpha, beta)`` or with the structure view ``(p, theta)``
common in forensic practice::

    alpha = (1 - theta) / theta * p
    beta  = (1 - theta) / theta * (1 - p)

so that ``p`` is the prior mean and ``theta = 1 / (alpha + beta + 1)``.

The Haldane prior (``alpha = beta -> 0``) is improper and is never stored
as ``BetaParams(0, 0)``. It is carried as a :class:`NamedPrior` and the
inference code substitutes the exact limit formulas.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .errors import DomainError

__all__ = [
    "BetaParams",
    "StructureParams",
    "PriorTag",
    "NamedPrior",
    "HALDANE",
    "JEFFREYS",
    "LAPLACE",
    "Prior",
    "log_beta_fn",
    "beta_mean_var",
    "from_structure",
    "to_structure",
]


def _check_positive_finite(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")


def _check_open_unit(name: str, value: float) -> None:
    if not (isinstance(value, (int, float)) and 0 < value < 1):
        raise DomainError(f"{name} must lie in the open interval (0, 1), got {value!r}")


@dataclass(frozen=True)
class BetaParams:
    """Proper beta distribution ``Beta(alpha, beta)``; both pseudo-counts > 0."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        _check_positive_finite("alpha", self.alpha)
        _check_positive_finite("beta", self.beta)


@dataclass(frozen=True)
class StructureParams:
    """Beta prior written as mean ``p`` and population structure ``theta``."""

    p: float
    theta: float

    def __post_init__(self) -> None:
        _check_open_unit("p", self.p)
        if self.theta in (0, 1):
            raise DomainError(
                f"theta={self.theta} is a boundary value; use NamedPrior('haldane') for "
                "theta -> 1 or the plug-in recipe's point-mass semantics for theta -> 0"
            )
        _check_open_unit("theta", self.theta)


class PriorTag(str, enum.Enum):
    HALDANE = "haldane"
    JEFFREYS = "jeffreys"
    LAPLACE = "laplace"


@dataclass(frozen=True)
class NamedPrior:
    """One of the symmetric non-informative priors.

    ``epsilon`` only applies to Haldane: it is the ``alpha = beta = epsilon``
    stand-in used when a proper approximation is needed (e.g. by the
    numerical oracle). Closed-form code ignores it and uses exact limits.
    """

    tag: PriorTag
    epsilon: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", PriorTag(self.tag))
        if self.tag is PriorTag.HALDANE:
            if self.epsilon is None:
                object.__setattr__(self, "epsilon", 1e-8)
            _check_positive_finite("epsilon", self.epsilon)
        elif self.epsilon is not None:
            raise DomainError(f"epsilon only applies to the Haldane prior, not {self.tag.value}")

    @property
    def is_haldane(self) -> bool:
        return self.tag is PriorTag.HALDANE

    def materialize(self) -> BetaParams:
        """Return the proper beta distribution for Jeffreys or Laplace."""
        if self.tag is PriorTag.JEFFREYS:
            return BetaParams(0.5, 0.5)
        if self.tag is PriorTag.LAPLACE:
            return BetaParams(1, 1)
        raise DomainError("the Haldane prior is improper; use stand_in() or the limit formulas")

    def stand_in(self) -> BetaParams:
        """Proper approximation ``Beta(eps, eps)`` for Haldane, else materialize()."""
        if self.is_haldane:
            return BetaParams(self.epsilon, self.epsilon)
        return self.materialize()


HALDANE = NamedPrior(PriorTag.HALDANE)
JEFFREYS = NamedPrior(PriorTag.JEFFREYS)
LAPLACE = NamedPrior(PriorTag.LAPLACE)

Prior = Union[BetaParams, StructureParams, NamedPrior]


def log_beta_fn(alpha: float, beta: float) -> float:
    """Natural log of ``B(alpha, beta) = Gamma(alpha) Gamma(beta) / Gamma(alpha + beta)``."""
    _check_positive_finite("alpha", alpha)
    _check_positive_finite("beta", beta)
    return math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)


def beta_mean_var(prior: BetaParams) -> tuple[float, float]:
    """Mean and variance of ``Beta(alpha, beta)``."""
    a, b = prior.alpha, prior.beta
    total = a + b
    return a / total, a * b / (total * total * (total + 1))


def from_structure(sp: StructureParams) -> BetaParams:
    """Convert ``(p, theta)`` to pseudo-counts.

    Evaluated in exact rational arithmetic on the binary values of the
    inputs, so the result is the correctly rounded pseudo-count. This is
    what makes ``(1/2, 1/3)`` land exactly on ``BetaParams(1, 1)``.
    """
    p, theta = Fraction(sp.p), Fraction(sp.theta)
    size = (1 - theta) / theta
    return BetaParams(float(size * p), float(size * (1 - p)))


def to_structure(bp: BetaParams) -> StructureParams:
    """Convert pseudo-counts to ``(p, theta)``; inverse of :func:`from_structure`."""
    a, b = Fraction(bp.alpha), Fraction(bp.beta)
    return StructureParams(float(a / (a + b)), float(1 / (a + b + 1)))
