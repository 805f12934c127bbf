"""Effective light-atom transfer maps for a double-pass memory in a magnetic field."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import ConfigurationError, SymplecticTransform


def validate_kappa(kappa: float) -> float:
    kappa = float(kappa)
    if not math.isfinite(kappa) or kappa < 0:
        raise ConfigurationError(f"coupling strength must be finite and >= 0, got {kappa!r}")
    return kappa


def transmission(kappa: float) -> tuple[float, float]:
    """``(c, s)`` with ``c = exp(-kappa^2/2)`` kept and ``s = sqrt(1 - exp(-kappa^2))`` swapped."""
    kappa = validate_kappa(kappa)
    # -expm1 keeps s accurate for small kappa
    return math.exp(-0.5 * kappa * kappa), math.sqrt(-math.expm1(-kappa * kappa))


def transfer_beam_splitter(kappa: float) -> SymplecticTransform:
    """Two-mode map on ``(atom, light)``, identical on x and p.

    ``atom_out = c atom_in + s light_in``, ``light_out = -s atom_in + c light_in``.
    """
    c, s = transmission(kappa)
    block = np.array([[c, s], [-s, c]])
    return SymplecticTransform(np.kron(block, np.eye(2)), f"transfer(kappa={kappa:g})")


@dataclass(frozen=True)
class ChannelCoefficients:
    c1: float
    c2: float
    c3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.c1, self.c2, self.c3


def coefficients(kappa: float) -> ChannelCoefficients:
    """Weights of write-light, read-light and atomic noise in the retrieved light.

    The retrieved light is ``-C1 L_in + C2 L'_in - C3 A_in``.
    """
    c, s = transmission(kappa)
    return ChannelCoefficients(-math.expm1(-kappa * kappa), c, c * s)


def write_read_transform(kappa: float) -> np.ndarray:
    """Composite map on ``(write light, atom, read light)`` quadratures.

    Storage acts on (atom, write light), retrieval on (atom, read light).
    Returned matrix rows/cols are ordered ``(L, A, L')`` with x/p interleaved.
    """
    bs = transfer_beam_splitter(kappa).matrix
    # index blocks: L -> 0:2, A -> 2:4, L' -> 4:6
    store = np.eye(6)
    idx = [2, 3, 0, 1]  # (atom, write light)
    store[np.ix_(idx, idx)] = bs
    read = np.eye(6)
    idx = [2, 3, 4, 5]  # (atom, read light)
    read[np.ix_(idx, idx)] = bs
    return read @ store


def composition_identity_check(kappa: float) -> float:
    """Max deviation of the composed read-light row from ``(-C1, -C3, +C2)`` on ``(L, A, L')``."""
    M = write_read_transform(kappa)
    c = coefficients(kappa)
    expected = np.kron(np.array([-c.c1, -c.c3, c.c2]), np.eye(2))
    return float(np.max(np.abs(M[4:6, :] - expected)))


def c3_maximum() -> tuple[float, float]:
    """Analytic maximiser of ``C3``: with ``u = exp(-kappa^2)``, ``sqrt(u (1-u))`` peaks at ``u = 1/2``."""
    return math.sqrt(math.log(2.0)), 0.5


def c3_grid_maximum(stop: float = 3.0, step: float = 1e-4) -> tuple[float, float]:
    kappa = np.linspace(0.0, stop, int(round(stop / step)) + 1)
    c3 = np.exp(-kappa**2 / 2) * np.sqrt(-np.expm1(-kappa**2))
    k = int(np.argmax(c3))
    return float(kappa[k]), float(c3[k])
