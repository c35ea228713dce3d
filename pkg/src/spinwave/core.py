"""Shared chain parameters, mode indexing and cone-angle formulas.

Conventions used by every module in the package:

* hbar = 1 and energies are reported as the dimensionless ``E* = (2/J)<H> + N``.
* Site ``n`` is qubit ``n`` and sits at bit ``n`` of a basis-state index.
  In bitstring literals the rightmost character is site 0, so ``"0001"``
  has its flipped spin on site 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

TWO_PI = 2.0 * math.pi


class SpinwaveError(Exception):
    """Base class for all package errors."""


class DomainError(SpinwaveError, ValueError):
    pass


class UnsupportedSpin(SpinwaveError, ValueError):
    pass


class OddN(SpinwaveError, ValueError):
    """Raised by operations whose derivation assumes an even chain length."""


class NTooSmall(SpinwaveError, ValueError):
    pass


class InvariantViolation(SpinwaveError, RuntimeError):
    """An internal numerical cross-check failed."""


@dataclass(frozen=True)
class ChainConfig:
    """Periodic spin chain: ``n_sites`` spins, exchange ``coupling`` J,
    lattice ``spacing`` a and spin ``spin`` S per site."""

    n_sites: int
    coupling: float = 1.0
    spacing: float = 1.0
    spin: Fraction = Fraction(1, 2)

    def __post_init__(self):
        if isinstance(self.n_sites, bool) or int(self.n_sites) != self.n_sites:
            raise DomainError(f"n_sites must be an integer, got {self.n_sites!r}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        if self.n_sites < 2:
            raise DomainError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.coupling == 0 or not math.isfinite(self.coupling):
            raise DomainError("coupling must be finite and non-zero")
        if not self.spacing > 0 or not math.isfinite(self.spacing):
            raise DomainError("spacing must be positive")
        spin = Fraction(self.spin)
        if spin <= 0:
            raise DomainError("spin must be positive")
        object.__setattr__(self, "spin", spin)

    def require_even(self) -> None:
        if self.n_sites % 2:
            raise OddN(f"operation requires an even chain length, got N={self.n_sites}")


@dataclass(frozen=True)
class ModeIndex:
    """Mode number ``m`` of the quantized wavenumber plus a propagation tag.

    ``sign="plus"`` gives per-site phases ``+n k a``; ``"minus"`` gives ``-n k a``.
    """

    m: int
    sign: str = "plus"

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise DomainError(f"sign must be 'plus' or 'minus', got {self.sign!r}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def sign_factor(self) -> int:
        return 1 if self.sign == "plus" else -1

    def reduced(self, n_sites: int) -> int:
        return self.m % n_sites


class BlochAngles(NamedTuple):
    theta: float
    phi: float


def canonical_bloch(theta: float, phi: float) -> BlochAngles:
    """Map any (theta, phi) to the same Bloch point with 0 <= theta <= pi."""
    theta = math.fmod(theta, TWO_PI)
    if theta < 0:
        theta += TWO_PI
    if theta > math.pi:
        theta = TWO_PI - theta
        phi += math.pi
    return BlochAngles(theta, phi % TWO_PI)


def cone_angle_exact(config: ChainConfig) -> float:
    """Cone angle of one flipped spin spread over the chain: sin(theta) = sqrt(2/(N S))."""
    arg = 2.0 / (config.n_sites * float(config.spin))
    if arg > 1.0:
        raise DomainError(f"2/(N*S) = {arg} exceeds 1; need N*S >= 2")
    return math.asin(math.sqrt(arg))


def cone_angle_small(config: ChainConfig) -> float:
    """Small-angle form 2/sqrt(N), spin-1/2 only."""
    if config.spin != Fraction(1, 2):
        raise UnsupportedSpin(f"small-angle formula is for S=1/2, got S={config.spin}")
    return 2.0 / math.sqrt(config.n_sites)


def cone_angle_geometric(config: ChainConfig) -> float:
    """Cone angle from the mean z reduction per site: cos(theta) = 1 - 1/(N S)."""
    arg = 1.0 - 1.0 / (config.n_sites * float(config.spin))
    if not -1.0 <= arg <= 1.0:
        raise DomainError(f"cos(theta) = {arg} outside [-1, 1]")
    return math.acos(arg)


def wavenumber(config: ChainConfig, mode: ModeIndex) -> float:
    """k_m = 2 pi m / (N a). The sign tag is not folded in; ``m`` is used as given."""
    return TWO_PI * mode.m / (config.n_sites * config.spacing)


def reduced_phase_step(config: ChainConfig, mode: ModeIndex) -> float:
    """k_m a with m reduced mod N, i.e. the per-site phase step in [0, 2 pi)."""
    return TWO_PI * mode.reduced(config.n_sites) / config.n_sites


def canonical_modes(n_sites: int) -> list[int]:
    """Reporting range m = 0 .. N/2 (ka in [0, pi])."""
    return list(range(n_sites // 2 + 1))
