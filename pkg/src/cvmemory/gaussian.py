"""Gaussian states over labelled canonical modes and their symplectic evolution.

Conventions
-----------
Quadratures are ordered ``(x_1, p_1, x_2, p_2, ...)`` and obey
``[x, p] = i/2``, so the vacuum has variance 1/4 in every quadrature.
The symplectic form ``J`` carries entries of +-1; the factor 1/2 lives in
:func:`commutator_coefficient`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SYMPLECTIC_TOL = 1e-10
UNCERTAINTY_TOL = 1e-9
SYMMETRY_TOL = 1e-12
VACUUM_VARIANCE = 0.25


class ConfigurationError(ValueError):
    """Invalid construction parameters."""


class ShapeError(ValueError):
    """Array dimensions do not agree."""


class ModeKind(enum.Enum):
    LIGHT = "L"
    ATOM = "A"
    READOUT = "R"


@dataclass(frozen=True, order=True)
class ModeLabel:
    kind: ModeKind
    channel: int

    def __post_init__(self):
        if self.channel < 1:
            raise ConfigurationError(f"channel index must be >= 1, got {self.channel}")

    def __str__(self) -> str:
        return f"{self.kind.value}{self.channel}"


def light(i: int) -> ModeLabel:
    return ModeLabel(ModeKind.LIGHT, i)


def atom(i: int) -> ModeLabel:
    return ModeLabel(ModeKind.ATOM, i)


def readout(i: int) -> ModeLabel:
    return ModeLabel(ModeKind.READOUT, i)


@dataclass(frozen=True)
class QuadratureOrdering:
    """Ordered, duplicate-free list of modes; mode ``k`` owns indices ``2k, 2k+1``."""

    modes: tuple[ModeLabel, ...]

    def __init__(self, modes: Iterable[ModeLabel]):
        modes = tuple(modes)
        if len(set(modes)) != len(modes):
            raise ConfigurationError("mode labels must be unique within an ordering")
        object.__setattr__(self, "modes", modes)

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def dim(self) -> int:
        return 2 * len(self.modes)

    def position(self, mode: ModeLabel) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise KeyError(f"mode {mode} not in ordering") from None

    def x(self, mode: ModeLabel) -> int:
        return 2 * self.position(mode)

    def p(self, mode: ModeLabel) -> int:
        return 2 * self.position(mode) + 1


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def check_symplectic(S, tol: float = SYMPLECTIC_TOL) -> tuple[bool, float]:
    """Return ``(passes, max |S J S^T - J|)``."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {S.shape}")
    if S.shape[0] % 2:
        raise ShapeError(f"symplectic matrices need even dimension, got {S.shape[0]}")
    J = symplectic_form(S.shape[0] // 2)
    residual = float(np.max(np.abs(S @ J @ S.T - J)))
    return residual <= tol, residual


@dataclass(frozen=True, eq=False)
class SymplecticTransform:
    matrix: np.ndarray
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        ok, residual = check_symplectic(m)
        if not ok:
            raise ConfigurationError(
                f"transform {self.name or '<unnamed>'} is not symplectic (residual {residual:.3e})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "SymplecticTransform") -> "SymplecticTransform":
        """``(self @ other)`` applies ``other`` first."""
        return SymplecticTransform(self.matrix @ other.matrix, f"{self.name}*{other.name}")

    @classmethod
    def identity(cls, n_modes: int) -> "SymplecticTransform":
        return cls(np.eye(2 * n_modes), "identity")


@dataclass(frozen=True, eq=False)
class QuadratureCombination:
    coefficients: np.ndarray
    label: str = ""

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float).reshape(-1)
        if not np.any(c != 0.0):
            raise ConfigurationError("a quadrature combination needs a nonzero coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __len__(self) -> int:
        return self.coefficients.size

    @classmethod
    def from_terms(
        cls,
        ordering: QuadratureOrdering,
        terms: Sequence[tuple[float, str, ModeLabel]],
        label: str = "",
    ) -> "QuadratureCombination":
        """Build from ``(coefficient, 'x' | 'p', mode)`` triples."""
        c = np.zeros(ordering.dim)
        for coeff, quad, mode in terms:
            idx = ordering.x(mode) if quad == "x" else ordering.p(mode)
            c[idx] += coeff
        return cls(c, label)


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean and covariance over ``ordering``.

    ``factor`` optionally holds ``F`` with ``cov = F F^T``. States built from
    the vacuum carry it through :func:`apply`, which lets :func:`variance`
    resolve nullifiers of strongly squeezed states without the cancellation
    that ``u^T cov u`` suffers once antisqueezed entries reach ~1e13.
    """

    ordering: QuadratureOrdering
    mean: np.ndarray
    cov: np.ndarray
    factor: np.ndarray | None = None

    def __post_init__(self):
        n = self.ordering.dim
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.shape != (n,) or cov.shape != (n, n):
            raise ShapeError(
                f"ordering implies dimension {n}; got mean {mean.shape}, cov {cov.shape}"
            )
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYMMETRY_TOL:
            raise ConfigurationError("covariance matrix is not symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        if self.factor is not None:
            F = np.array(self.factor, dtype=float)
            if F.ndim != 2 or F.shape[0] != n:
                raise ShapeError(f"factor needs {n} rows, got shape {F.shape}")
            F.setflags(write=False)
            object.__setattr__(self, "factor", F)

    @property
    def n_modes(self) -> int:
        return len(self.ordering)

    def uncertainty_margin(self) -> float:
        """Smallest eigenvalue of ``cov + (i/4) J``; non-negative for physical states."""
        J = symplectic_form(self.n_modes)
        return float(np.linalg.eigvalsh(self.cov + 0.25j * J).min())

    def is_physical(self, tol: float = UNCERTAINTY_TOL) -> bool:
        return self.uncertainty_margin() >= -tol

    def displaced(self, displacement) -> "GaussianState":
        return GaussianState(
            self.ordering, self.mean + np.asarray(displacement, float), self.cov, self.factor
        )

    def reduced(self, modes: Sequence[ModeLabel]) -> "GaussianState":
        idx = _quadrature_indices(self.ordering, modes)
        F = None if self.factor is None else self.factor[idx, :]
        return GaussianState(QuadratureOrdering(modes), self.mean[idx], self.cov[np.ix_(idx, idx)], F)


def _quadrature_indices(ordering: QuadratureOrdering, modes: Sequence[ModeLabel]) -> list[int]:
    idx = []
    for m in modes:
        k = ordering.position(m)
        idx += [2 * k, 2 * k + 1]
    return idx


def vacuum_state(ordering: QuadratureOrdering) -> GaussianState:
    if len(ordering) == 0:
        raise ConfigurationError("vacuum_state needs at least one mode")
    n = ordering.dim
    return GaussianState(
        ordering, np.zeros(n), VACUUM_VARIANCE * np.eye(n), np.sqrt(VACUUM_VARIANCE) * np.eye(n)
    )


def tensor(*states: GaussianState) -> GaussianState:
    """Direct sum of independent states, orderings concatenated."""
    ordering = QuadratureOrdering(m for s in states for m in s.ordering.modes)
    mean = np.concatenate([s.mean for s in states])
    cov = np.zeros((ordering.dim, ordering.dim))
    has_factor = all(s.factor is not None for s in states)
    F = np.zeros_like(cov) if has_factor else None
    k = 0
    for s in states:
        d = s.ordering.dim
        cov[k:k + d, k:k + d] = s.cov
        if has_factor:
            F[k:k + d, k:k + d] = s.factor
        k += d
    return GaussianState(ordering, mean, cov, F)


def apply(S: SymplecticTransform, state: GaussianState) -> GaussianState:
    if S.dim != state.ordering.dim:
        raise ShapeError(f"transform acts on {S.dim} quadratures, state has {state.ordering.dim}")
    M = S.matrix
    cov = M @ state.cov @ M.T
    # symmetrize away round-off so the symmetry check stays exact
    F = None if state.factor is None else M @ state.factor
    return GaussianState(state.ordering, M @ state.mean, 0.5 * (cov + cov.T), F)


def embed(
    S_small: SymplecticTransform,
    target_modes: Sequence[ModeLabel],
    ordering: QuadratureOrdering,
) -> SymplecticTransform:
    """Lift a transform on ``target_modes`` (in the given order) to the full ordering."""
    target_modes = list(target_modes)
    if len(set(target_modes)) != len(target_modes):
        raise ConfigurationError("target modes must be distinct")
    if S_small.dim != 2 * len(target_modes):
        raise ShapeError(
            f"transform acts on {S_small.dim // 2} modes but {len(target_modes)} targets given"
        )
    idx = _quadrature_indices(ordering, target_modes)
    M = np.eye(ordering.dim)
    M[np.ix_(idx, idx)] = S_small.matrix
    return SymplecticTransform(M, S_small.name)


def variance(state: GaussianState, u: QuadratureCombination, method: str = "auto") -> float:
    """``u^T cov u``.

    ``method="cov"`` forces the explicit covariance product; ``"auto"`` uses
    the square-root factor when the state carries one.
    """
    if len(u) != state.ordering.dim:
        raise ShapeError(f"combination has {len(u)} coefficients, state has {state.ordering.dim}")
    c = u.coefficients
    if method == "auto" and state.factor is not None:
        w = state.factor.T @ c
        return float(w @ w)
    if method not in ("auto", "cov"):
        raise ValueError(f"unknown variance method {method!r}")
    return float(c @ state.cov @ c)


def commutator_coefficient(u: QuadratureCombination, v: QuadratureCombination) -> float:
    """Real ``c`` with ``[u, v] = i c``."""
    if len(u) != len(v):
        raise ShapeError(f"combination lengths differ: {len(u)} vs {len(v)}")
    J = symplectic_form(len(u) // 2)
    return 0.5 * float(u.coefficients @ J @ v.coefficients)


class ModeExpansion:
    """Heisenberg-picture bookkeeping of a transform chain.

    Every final quadrature is an explicit coefficient vector over the initial
    quadratures, which are assumed mutually uncorrelated with the given
    variances. A combination ``u`` of final quadratures is pulled back through
    the chain one transform at a time (``u <- S^T u``), and its variance is the
    weighted sum of squared pulled-back coefficients. No covariance matrix is
    ever formed, so this serves as a cross-check on :func:`apply`.
    """

    def __init__(self, chain: Sequence[SymplecticTransform], initial_variances):
        self.initial_variances = np.asarray(initial_variances, dtype=float).reshape(-1)
        dim = self.initial_variances.size
        for k, S in enumerate(chain):
            if S.dim != dim:
                raise ShapeError(f"chain element {k} acts on {S.dim} quadratures, expected {dim}")
        self.chain = tuple(chain)

    @property
    def dim(self) -> int:
        return self.initial_variances.size

    def pull_back(self, coefficients) -> np.ndarray:
        w = np.asarray(coefficients, dtype=float).copy()
        for S in reversed(self.chain):
            w = S.matrix.T @ w
        return w

    def expansion(self) -> np.ndarray:
        """Row ``i`` expresses final quadrature ``i`` over the initial quadratures."""
        return np.array([self.pull_back(e) for e in np.eye(self.dim)])

    def variance(self, u: QuadratureCombination) -> float:
        if len(u) != self.dim:
            raise ShapeError(f"combination has {len(u)} coefficients, chain has {self.dim}")
        w = self.pull_back(u.coefficients)
        return float(np.sum(w * w * self.initial_variances))


def mode_expansion_oracle(chain, initial_variances) -> ModeExpansion:
    return ModeExpansion(chain, initial_variances)
