"""Product-state spin-wave ansatz.

Every site is rotated about Y by the same cone angle and then about Z by a
phase growing linearly along the chain, giving

    |psi_A> = prod_n ( cos(theta/2)|0> + exp(i phi_n) sin(theta/2)|1> ),
    phi_n = +/- n k a.

The energy of any product state is a sum of two-site Bloch-vector products,
so it is evaluated in O(N) without building the 2^N vector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .core import (
    TWO_PI,
    BlochAngles,
    ChainConfig,
    DomainError,
    ModeIndex,
    reduced_phase_step,
)
from .statevector import (
    DenseState,
    apply_y_rotation,
    apply_z_rotation,
    check_cap,
    zero_state,
)

_QUARTER = math.pi / 2


def snap_phase(phi: float) -> float:
    """Reduce to [0, 2 pi) and snap values within a few ulps of a multiple of pi/2."""
    phi = phi % TWO_PI
    q = round(phi / _QUARTER)
    if abs(phi - q * _QUARTER) <= 4 * math.ulp(TWO_PI):
        phi = (q % 4) * _QUARTER
    return phi


@dataclass(frozen=True, eq=False)
class ProductState:
    n_sites: int
    theta: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if theta.shape != (self.n_sites,) or phi.shape != (self.n_sites,):
            raise DomainError("need one (theta, phi) pair per site")
        theta.flags.writeable = False
        phi.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_angles(cls, angles) -> "ProductState":
        angles = list(angles)
        return cls(len(angles), [a[0] for a in angles], [a[1] for a in angles])

    @property
    def site_angles(self) -> list[BlochAngles]:
        return [BlochAngles(float(t), float(p)) for t, p in zip(self.theta, self.phi)]

    def site_vectors(self) -> np.ndarray:
        """(N, 2) array of single-site amplitudes."""
        return np.stack(
            [np.cos(self.theta / 2), np.exp(1j * self.phi) * np.sin(self.theta / 2)],
            axis=1,
        )

    def bloch_vectors(self) -> np.ndarray:
        """(N, 3) array of <X>, <Y>, <Z> per site."""
        s = np.sin(self.theta)
        return np.stack([s * np.cos(self.phi), s * np.sin(self.phi), np.cos(self.theta)], axis=1)


@dataclass(frozen=True)
class Gate:
    site: int
    kind: str  # "RY" or "RZ"
    angle: float


@dataclass(frozen=True)
class CircuitSpec:
    n_sites: int
    gates: tuple[Gate, ...]

    def __iter__(self) -> Iterator[Gate]:
        return iter(self.gates)

    def to_text(self) -> str:
        lines = [f"qubits {self.n_sites}"]
        lines += [f"{g.site} {g.kind} {g.angle!r}" for g in self.gates]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CircuitSpec":
        lines = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0][0] != "qubits" or len(lines[0]) != 2:
            raise DomainError("circuit text must start with 'qubits <N>'")
        n = int(lines[0][1])
        gates = []
        for parts in lines[1:]:
            if len(parts) != 3 or parts[1] not in ("RY", "RZ"):
                raise DomainError(f"bad gate line: {' '.join(parts)!r}")
            gates.append(Gate(int(parts[0]), parts[1], float(parts[2])))
        return cls(n, tuple(gates))

    def run(self) -> DenseState:
        """Execute on |0...0> with the dense engine."""
        state = zero_state(self.n_sites)
        for g in self.gates:
            rotate = apply_y_rotation if g.kind == "RY" else apply_z_rotation
            state = rotate(state, g.site, g.angle)
        return state


def optimal_theta(n_sites: int) -> float:
    """Cone angle maximizing the single-flip amplitude: sin^2(theta/2) = 1/N."""
    if n_sites < 1:
        raise DomainError("n_sites must be >= 1")
    return 2.0 * math.asin(1.0 / math.sqrt(n_sites))


def site_phases(config: ChainConfig, mode: ModeIndex) -> np.ndarray:
    step = reduced_phase_step(config, mode) * mode.sign_factor
    return np.array([snap_phase(n * step) for n in range(config.n_sites)])


def build_product_state(config: ChainConfig, mode: ModeIndex) -> ProductState:
    n = config.n_sites
    return ProductState(n, np.full(n, optimal_theta(n)), site_phases(config, mode))


def build_circuit(config: ChainConfig, mode: ModeIndex) -> CircuitSpec:
    theta = optimal_theta(config.n_sites)
    phases = site_phases(config, mode)
    gates = [Gate(n, "RY", theta) for n in range(config.n_sites)]
    gates += [Gate(n, "RZ", float(phases[n])) for n in range(config.n_sites)]
    return CircuitSpec(config.n_sites, tuple(gates))


def expand(state: ProductState) -> DenseState:
    """Tensor out the product; site 0 is the least significant bit."""
    check_cap(state.n_sites)
    vecs = state.site_vectors()
    amps = vecs[0]
    for v in vecs[1:]:
        amps = np.kron(v, amps)
    return DenseState(state.n_sites, amps)


def basis_magnitude(n_sites: int, flips: int, theta: float | None = None) -> float:
    """|amplitude| shared by every basis state with ``flips`` flipped spins."""
    if not 0 <= flips <= n_sites:
        raise DomainError(f"flips must lie in [0, {n_sites}]")
    if theta is None:
        theta = optimal_theta(n_sites)
    c, s = abs(math.cos(theta / 2)), abs(math.sin(theta / 2))
    return c ** (n_sites - flips) * s**flips


def ground_amplitude(n_sites: int) -> float:
    """cos^N(theta/2) at the optimal angle, i.e. (1 - 1/N)^(N/2).

    Increases with N toward e^(-1/2).
    """
    if n_sites < 1:
        raise DomainError("n_sites must be >= 1")
    return math.exp(n_sites / 2 * math.log1p(-1.0 / n_sites)) if n_sites > 1 else 0.0


def energy_closed_form(config: ChainConfig, mode: ModeIndex) -> float:
    """E* = 4 (1 - 1/N)(1 - cos ka) for the spin-wave ansatz."""
    n = config.n_sites
    ka = reduced_phase_step(config, mode)
    return 4.0 * (1.0 - 1.0 / n) * (1.0 - math.cos(ka))


def pair_expectations(theta_i, phi_i, theta_j, phi_j) -> tuple:
    """<XX>, <YY>, <ZZ> for two sites of a product state.

    XX and YY individually depend on the absolute phases; their sum
    sin(theta_i) sin(theta_j) cos(phi_j - phi_i) only on the difference.
    """
    s = np.sin(theta_i) * np.sin(theta_j)
    xx = s * np.cos(phi_i) * np.cos(phi_j)
    yy = s * np.sin(phi_i) * np.sin(phi_j)
    zz = np.cos(theta_i) * np.cos(theta_j)
    return xx, yy, zz


def bond_energies(state: ProductState) -> np.ndarray:
    """<XX + YY + ZZ> on every bond (n, n+1 mod N), without the -J/2 prefactor."""
    theta, phi = state.theta, state.phi
    theta_next, phi_next = np.roll(theta, -1), np.roll(phi, -1)
    xx, yy, zz = pair_expectations(theta, phi, theta_next, phi_next)
    return xx + yy + zz


def energy_factorized(state: ProductState, config: ChainConfig) -> float:
    """<H> of an arbitrary product state, summing all N bonds explicitly."""
    if state.n_sites != config.n_sites:
        raise DomainError("state and chain have different lengths")
    return -config.coupling / 2.0 * math.fsum(bond_energies(state))
