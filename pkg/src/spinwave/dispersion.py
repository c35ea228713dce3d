"""Dispersion curves and RMS error of the ansatz relative to the exact magnon."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from .ansatz import build_product_state, energy_closed_form, energy_factorized, expand
from .core import (
    ChainConfig,
    InvariantViolation,
    ModeIndex,
    NTooSmall,
    OddN,
    SpinwaveError,
    canonical_modes,
    reduced_phase_step,
)
from .sampling import Mitigation, NoiseModel, estimate_energy
from .statevector import chain_hamiltonian, dimensionless_energy, expectation_hamiltonian

CSV_FIELDS = ("m", "ka", "e_theory", "e_ansatz", "e_estimated", "stderr")


class MissingEstimates(SpinwaveError, ValueError):
    pass


class Estimator(str, Enum):
    CLOSED_FORM = "closed_form"
    DENSE = "dense"
    FACTORIZED = "factorized"
    SAMPLED = "sampled"


@dataclass
class DispersionPoint:
    m: int
    ka: float
    e_theory: float
    e_ansatz: float
    e_estimated: float | None = None
    stderr: float | None = None


@dataclass
class RmsReport:
    n_sites: int
    epsilon_closed: float
    epsilon_bruteforce: float
    relative_epsilon: float | None = None


def theory_dispersion(config: ChainConfig, mode: ModeIndex) -> float:
    """Exact single-magnon E* = 4 (1 - cos k a)."""
    return 4.0 * (1.0 - math.cos(reduced_phase_step(config, mode)))


def _ansatz_energy(config, mode, estimator: Estimator) -> float:
    if estimator is Estimator.CLOSED_FORM:
        return energy_closed_form(config, mode)
    state = build_product_state(config, mode)
    if estimator is Estimator.FACTORIZED:
        return dimensionless_energy(energy_factorized(state, config), config)
    return dimensionless_energy(
        expectation_hamiltonian(expand(state), chain_hamiltonian(config)), config
    )


def mode_seed(seed: int, m: int) -> int:
    """Independent per-mode seed derived from the run seed."""
    return int(np.random.SeedSequence(seed, spawn_key=(m,)).generate_state(1, np.uint64)[0])


def dispersion_curve(
    config: ChainConfig,
    estimator: Estimator | str = Estimator.CLOSED_FORM,
    *,
    shots: int = 10_000,
    noise: NoiseModel | None = None,
    mitigation: Mitigation | str = Mitigation.NONE,
    seed: int = 0,
    sign: str = "plus",
) -> list[DispersionPoint]:
    """One point per m = 0 .. N/2.

    Deterministic estimators fill ``e_ansatz``. The sampled estimator keeps the
    closed form in ``e_ansatz`` and reports its shot estimate in
    ``e_estimated`` with ``stderr``.
    """
    estimator = Estimator(estimator)
    points = []
    for m in canonical_modes(config.n_sites):
        mode = ModeIndex(m, sign)
        point = DispersionPoint(
            m=m,
            ka=reduced_phase_step(config, mode),
            e_theory=theory_dispersion(config, mode),
            e_ansatz=0.0,
        )
        if estimator is Estimator.SAMPLED:
            point.e_ansatz = energy_closed_form(config, mode)
            est = estimate_energy(
                config, mode, shots, noise, mitigation, seed=mode_seed(seed, m)
            )
            point.e_estimated, point.stderr = est.value, est.stderr
        else:
            point.e_ansatz = _ansatz_energy(config, mode, estimator)
        points.append(point)
    return points


def cos_sum_identity(n_sites: int) -> float:
    """Direct sum over n = 0 .. N/2 of (cos(2 pi n/N) - 1)^2.

    Equals 3N/4 + 2 for even N >= 4; N = 2 gives 4 rather than 3.5.
    """
    if n_sites % 2:
        raise OddN(f"N must be even, got {n_sites}")
    if n_sites < 2:
        raise NTooSmall("N must be >= 2")
    n = np.arange(n_sites // 2 + 1)
    return math.fsum((np.cos(2 * np.pi * n / n_sites) - 1.0) ** 2)


def _check_rms_n(n_sites: int) -> None:
    if n_sites % 2:
        raise OddN(f"N must be even, got {n_sites}")
    if n_sites < 4:
        raise NTooSmall(f"RMS formulas need N >= 4, got {n_sites}")


def rms_error_closed_form(n_sites: int) -> float:
    """(1/N) sqrt(8 (3N + 8) / (N + 2))."""
    _check_rms_n(n_sites)
    n = n_sites
    return math.sqrt(8.0 * (3 * n + 8) / (n + 2)) / n


def rms_error_bruteforce(n_sites: int) -> float:
    """RMS over m = 0 .. N/2 of theory minus ansatz, computed mode by mode."""
    _check_rms_n(n_sites)
    config = ChainConfig(n_sites)
    sq = []
    for m in canonical_modes(n_sites):
        mode = ModeIndex(m)
        delta = theory_dispersion(config, mode) - energy_closed_form(config, mode)
        sq.append(delta * delta)
    return math.sqrt(math.fsum(sq) / len(sq))


def rms_report(n_sites: int, tol: float = 1e-12) -> RmsReport:
    closed, brute = rms_error_closed_form(n_sites), rms_error_bruteforce(n_sites)
    if abs(closed - brute) > tol:
        raise InvariantViolation(f"N={n_sites}: closed {closed!r} vs brute force {brute!r}")
    return RmsReport(n_sites, closed, brute)


def rms_vs_reference(points: list[DispersionPoint], reference: str = "theory") -> float:
    """RMS of ``e_estimated`` minus the chosen reference, averaged over the given points."""
    if reference not in ("theory", "ansatz"):
        raise SpinwaveError(f"reference must be 'theory' or 'ansatz', got {reference!r}")
    if not points or any(p.e_estimated is None for p in points):
        raise MissingEstimates("every point needs an e_estimated value")
    attr = "e_theory" if reference == "theory" else "e_ansatz"
    sq = [(p.e_estimated - getattr(p, attr)) ** 2 for p in points]
    return math.sqrt(math.fsum(sq) / len(sq))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.12g}"


def points_to_csv(points: list[DispersionPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_FIELDS)
    for p in points:
        writer.writerow([_fmt(getattr(p, f)) for f in CSV_FIELDS])
    return buf.getvalue()


def points_from_csv(text: str) -> list[DispersionPoint]:
    rows = csv.DictReader(ln for ln in io.StringIO(text) if not ln.startswith("#"))
    out = []
    for row in rows:
        opt = {k: (float(row[k]) if row[k] else None) for k in ("e_estimated", "stderr")}
        out.append(
            DispersionPoint(
                int(row["m"]), float(row["ka"]), float(row["e_theory"]), float(row["e_ansatz"]), **opt
            )
        )
    return out


def points_to_records(points: list[DispersionPoint]) -> list[dict]:
    return [asdict(p) for p in points]


def points_to_json(points: list[DispersionPoint]) -> str:
    return json.dumps(points_to_records(points), indent=2)


def points_from_records(records: list[dict]) -> list[DispersionPoint]:
    return [DispersionPoint(**r) for r in records]
