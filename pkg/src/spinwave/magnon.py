"""Exact single-magnon state on the periodic chain.

    |psi> = N^(-1/2) sum_n exp(+/- i n k a) |n>

where |n> has a single flipped spin on site n. It is an eigenstate of the
chain Hamiltonian and supplies the reference dispersion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ansatz import optimal_theta
from .core import ChainConfig, ModeIndex, reduced_phase_step
from .statevector import (
    DenseState,
    apply_hamiltonian,
    chain_hamiltonian,
    check_cap,
    dimensionless_energy,
    expectation_hamiltonian,
)


@dataclass(frozen=True)
class MagnonState:
    state: DenseState
    mode: ModeIndex

    @property
    def n_sites(self) -> int:
        return self.state.n_sites

    def single_flip_amplitudes(self) -> np.ndarray:
        """Amplitudes of |n>, ordered by flip site n = 0 .. N-1."""
        idx = 1 << np.arange(self.n_sites)
        return self.state.amplitudes[idx]


def build_magnon_state(config: ChainConfig, mode: ModeIndex) -> MagnonState:
    n = config.n_sites
    check_cap(n)
    step = reduced_phase_step(config, mode) * mode.sign_factor
    amps = np.zeros(1 << n, dtype=np.complex128)
    sites = np.arange(n)
    amps[1 << sites] = np.exp(1j * step * sites) / math.sqrt(n)
    return MagnonState(DenseState(n, amps), mode)


def magnon_energy(config: ChainConfig, mode: ModeIndex) -> float:
    """E* of the exact magnon, evaluated densely (not from the dispersion formula)."""
    magnon = build_magnon_state(config, mode)
    return dimensionless_energy(
        expectation_hamiltonian(magnon.state, chain_hamiltonian(config)), config
    )


def eigen_residual(config: ChainConfig, mode: ModeIndex) -> float:
    """|| H|psi> - <H>|psi> || for the magnon state."""
    magnon = build_magnon_state(config, mode)
    h = chain_hamiltonian(config)
    energy = expectation_hamiltonian(magnon.state, h)
    residual = apply_hamiltonian(magnon.state, h) - energy * magnon.state.amplitudes
    return float(np.linalg.norm(residual))


def ansatz_overlap(n_sites: int) -> float:
    """|<magnon|ansatz>| for matching mode and sign: sqrt(N) cos^(N-1)(t/2) sin(t/2)."""
    half = optimal_theta(n_sites) / 2
    return math.sqrt(n_sites) * math.cos(half) ** (n_sites - 1) * math.sin(half)
