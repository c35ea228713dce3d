"""Dense statevector engine used as the exact reference for every other route.

Amplitude ``k`` belongs to the basis state whose site ``n`` is ``(k >> n) & 1``.
States are treated as values: every gate returns a new :class:`DenseState`.
"""
from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ChainConfig, SpinwaveError

DEFAULT_DENSE_CAP = 24
DENSE_CAP_ENV = "SPINWAVE_DENSE_CAP"

# imaginary residue allowed on an expectation value before it is discarded
IMAG_TOL = 1e-12


class CapExceeded(SpinwaveError, MemoryError):
    pass


class IndexOutOfRange(SpinwaveError, IndexError):
    pass


class LengthMismatch(SpinwaveError, ValueError):
    pass


class SizeMismatch(SpinwaveError, ValueError):
    pass


def dense_cap() -> int:
    """Largest qubit count allowed in dense form (env override ``SPINWAVE_DENSE_CAP``)."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        return int(raw)
    except ValueError:
        raise SpinwaveError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from None


def check_cap(n_sites: int) -> None:
    cap = dense_cap()
    if n_sites > cap:
        raise CapExceeded(f"{n_sites} qubits exceeds the dense cap of {cap}")


@dataclass(frozen=True, eq=False)
class DenseState:
    n_sites: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n_sites < 1:
            raise SpinwaveError("n_sites must be >= 1")
        check_cap(self.n_sites)
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_sites,):
            raise SizeMismatch(
                f"expected {1 << self.n_sites} amplitudes, got shape {amps.shape}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class PauliPairTerm:
    kind: str  # "XX", "YY" or "ZZ"
    site_i: int
    site_j: int
    coefficient: float = 1.0

    def __post_init__(self):
        if self.kind not in ("XX", "YY", "ZZ"):
            raise SpinwaveError(f"unknown Pauli pair kind {self.kind!r}")
        if self.site_i == self.site_j:
            raise SpinwaveError("a Pauli pair needs two distinct sites")
        if self.site_i < 0 or self.site_j < 0:
            raise IndexOutOfRange("negative site index")


@dataclass(frozen=True)
class Hamiltonian:
    n_sites: int
    terms: tuple[PauliPairTerm, ...]


def chain_hamiltonian(config: ChainConfig) -> Hamiltonian:
    """H = -(J/2) sum_n (XX + YY + ZZ) on bonds (n, n+1 mod N)."""
    n = config.n_sites
    coeff = -config.coupling / 2.0
    terms = tuple(
        PauliPairTerm(kind, i, (i + 1) % n, coeff)
        for i in range(n)
        for kind in ("XX", "YY", "ZZ")
    )
    return Hamiltonian(n, terms)


def zero_state(n_sites: int) -> DenseState:
    check_cap(n_sites)
    amps = np.zeros(1 << n_sites, dtype=np.complex128)
    amps[0] = 1.0
    return DenseState(n_sites, amps)


def _check_site(n_sites: int, site: int) -> None:
    if not 0 <= site < n_sites:
        raise IndexOutOfRange(f"site {site} outside [0, {n_sites})")


def _site_view(amps: np.ndarray, site: int) -> np.ndarray:
    # axis 1 of the view is the bit belonging to ``site``
    return amps.reshape(-1, 2, 1 << site)


def apply_single_qubit(state: DenseState, site: int, matrix: np.ndarray) -> DenseState:
    """Apply a 2x2 matrix (rows/cols ordered |0>, |1>) to one site."""
    _check_site(state.n_sites, site)
    view = _site_view(state.amplitudes, site)
    out = np.einsum("ab,xby->xay", np.asarray(matrix, dtype=np.complex128), view)
    return DenseState(state.n_sites, out.reshape(-1))


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(phi: float) -> np.ndarray:
    # relative-phase form; differs from exp(-i phi Z / 2) by a global phase only
    return np.array([[1.0, 0.0], [0.0, np.exp(1j * phi)]], dtype=np.complex128)


HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
S_DAGGER = np.array([[1, 0], [0, -1j]], dtype=np.complex128)


def apply_y_rotation(state: DenseState, site: int, theta: float) -> DenseState:
    return apply_single_qubit(state, site, ry_matrix(theta))


def apply_z_rotation(state: DenseState, site: int, phi: float) -> DenseState:
    _check_site(state.n_sites, site)
    out = state.amplitudes.copy()
    _site_view(out, site)[:, 1, :] *= np.exp(1j * phi)
    return DenseState(state.n_sites, out)


def bitstring_to_index(bitstring: str, n_sites: int) -> int:
    if len(bitstring) != n_sites:
        raise LengthMismatch(f"bitstring {bitstring!r} has length {len(bitstring)}, expected {n_sites}")
    if set(bitstring) - {"0", "1"}:
        raise LengthMismatch(f"bitstring {bitstring!r} contains characters other than 0/1")
    return int(bitstring, 2)


def index_to_bitstring(index: int, n_sites: int) -> str:
    return format(index, f"0{n_sites}b")


def basis_amplitude(state: DenseState, bitstring: str) -> complex:
    return complex(state.amplitudes[bitstring_to_index(bitstring, state.n_sites)])


def inner_product(a: DenseState, b: DenseState) -> complex:
    """<a|b>, conjugating the first argument."""
    if a.n_sites != b.n_sites:
        raise SizeMismatch(f"{a.n_sites} vs {b.n_sites} sites")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def _apply_pauli(amps: np.ndarray, site: int, axis: str) -> np.ndarray:
    view = _site_view(amps, site)
    out = np.empty_like(view)
    if axis == "X":
        out[:, 0, :] = view[:, 1, :]
        out[:, 1, :] = view[:, 0, :]
    elif axis == "Y":
        out[:, 0, :] = -1j * view[:, 1, :]
        out[:, 1, :] = 1j * view[:, 0, :]
    else:
        out[:, 0, :] = view[:, 0, :]
        out[:, 1, :] = -view[:, 1, :]
    return out.reshape(-1)


def apply_pauli_pair(state: DenseState, term: PauliPairTerm) -> np.ndarray:
    """coefficient * P_i P_j |state> as a raw amplitude array."""
    _check_site(state.n_sites, term.site_i)
    _check_site(state.n_sites, term.site_j)
    axis = term.kind[0]
    out = _apply_pauli(state.amplitudes, term.site_i, axis)
    out = _apply_pauli(out, term.site_j, axis)
    return term.coefficient * out


def _real_part(value: complex, what: str, scale: float = 1.0) -> float:
    if abs(value.imag) > IMAG_TOL * max(1.0, scale):
        raise SpinwaveError(
            f"{what} has imaginary residue {value.imag:.3e}; check gate conventions"
        )
    return float(value.real)


def expectation_pauli_pair(state: DenseState, term: PauliPairTerm) -> float:
    value = complex(np.vdot(state.amplitudes, apply_pauli_pair(state, term)))
    return _real_part(
        value, f"<{term.kind}({term.site_i},{term.site_j})>", abs(term.coefficient)
    )


def apply_hamiltonian(state: DenseState, h: Hamiltonian) -> np.ndarray:
    """H|state> accumulated term by term (no matrix is formed)."""
    out = np.zeros_like(state.amplitudes)
    for term in h.terms:
        out += apply_pauli_pair(state, term)
    return out


def expectation_hamiltonian(state: DenseState, h: Hamiltonian) -> float:
    if h.n_sites != state.n_sites:
        raise SizeMismatch(f"Hamiltonian on {h.n_sites} sites, state on {state.n_sites}")
    # fsum: exactly rounded, so independent of term order
    return math.fsum(expectation_pauli_pair(state, t) for t in h.terms)


def dimensionless_energy(expectation: float, config: ChainConfig) -> float:
    """E* = (2/J) <H> + N."""
    return 2.0 / config.coupling * expectation + config.n_sites


def dump_state(state: DenseState, path: str | Path) -> None:
    """Write ``uint64 n_sites`` then little-endian (re, im) float64 pairs."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", state.n_sites))
        fh.write(state.amplitudes.astype("<c16").tobytes())


def load_state(path: str | Path) -> DenseState:
    with open(path, "rb") as fh:
        (n_sites,) = struct.unpack("<Q", fh.read(8))
        check_cap(n_sites)
        amps = np.frombuffer(fh.read(), dtype="<c16")
    return DenseState(n_sites, amps.astype(np.complex128))
