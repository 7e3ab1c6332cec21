"""Noise coefficient models and the driving Brownian increments.

A model supplies the coefficients sigma_jk(t, u) that couple the j-th
driving Brownian motion to the k-th moving-basis mode.  The flagship
``moving_diagonal`` family acts diagonally in the moving basis with mode
weights q_j = j^(-p), which keeps the operator's range inside functions
vanishing outside the current interval; a fixed-in-space additive noise
would not.  Increments come from a counter-based Philox stream keyed by
(seed, path, step), so any path/step is reproducible on any worker.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import CoefficientState

KINDS = ("zero", "moving_diagonal", "general_matrix")


@dataclass(frozen=True, eq=False)
class DiffusionModel:
    """Structured noise coefficients sigma_jk with a declared Lipschitz bound.

    ``m`` is the number of driving Brownian motions.  For
    ``moving_diagonal``: sigma_jk = delta_jk q_j (gamma + beta A_j) with
    q_j = j^(-decay_p).  For ``general_matrix``: a constant (m, n) table.
    """

    kind: str
    m: int
    gamma: float = 0.0
    beta: float = 0.0
    decay_p: float = 1.0
    lipschitz_k: float = 0.0
    table: np.ndarray | None = None

    def mode_weights(self, count: int) -> np.ndarray:
        """q_j = j^(-p) for j = 1..count."""
        return np.arange(1, count + 1, dtype=float) ** (-self.decay_p)


def zero_model(m: int = 1) -> DiffusionModel:
    """No noise; sigma identically zero."""
    _check_m(m)
    return DiffusionModel("zero", m)


def moving_diagonal(
    gamma: float,
    beta: float,
    decay_p: float = 1.0,
    m: int = 16,
    lipschitz_k: float | None = None,
) -> DiffusionModel:
    """Diagonal action in the moving basis: sigma_jj = q_j (gamma + beta A_j).

    When ``lipschitz_k`` is omitted it is set to
    max(gamma sqrt(sum q_j^2), beta max q_j), which dominates both the
    Lipschitz and the linear-growth inequality.
    """
    _check_m(m)
    if gamma < 0 or beta < 0:
        raise ValueError("gamma and beta must be nonnegative")
    if decay_p <= 0.5:
        raise ValueError(f"decay_p must exceed 1/2 for a finite HS norm, got {decay_p}")
    q = np.arange(1, m + 1, dtype=float) ** (-decay_p)
    if lipschitz_k is None:
        lipschitz_k = max(gamma * float(np.sqrt(np.sum(q**2))), beta * float(np.max(q)))
    return DiffusionModel("moving_diagonal", m, gamma, beta, decay_p, float(lipschitz_k))


def general_matrix(table, lipschitz_k: float) -> DiffusionModel:
    """Constant coefficient table sigma_jk = table[j-1, k-1] (additive noise).

    The caller declares ``lipschitz_k``; the growth bound is checked here,
    the range condition stays the caller's obligation.
    """
    table = np.atleast_2d(np.asarray(table, dtype=float))
    if table.ndim != 2 or table.size == 0:
        raise ValueError("coefficient table must be a nonempty 2-D array")
    hs = float(np.sqrt(np.sum(table**2)))
    if lipschitz_k < hs:
        raise ValueError(
            f"declared lipschitz_k={lipschitz_k} is below the table's "
            f"Hilbert-Schmidt norm {hs:.6g}; growth bound would fail at u=0"
        )
    return DiffusionModel(
        "general_matrix", table.shape[0], lipschitz_k=float(lipschitz_k), table=table
    )


def sigma_coeff(model: DiffusionModel, j: int, k: int, state: CoefficientState) -> float:
    """Single coefficient sigma_jk at the given state."""
    if not 1 <= j <= model.m:
        raise ValueError(f"noise index j={j} outside 1..{model.m}")
    if not 1 <= k <= state.n:
        raise ValueError(f"mode index k={k} outside 1..{state.n}")
    if model.kind == "zero":
        return 0.0
    if model.kind == "moving_diagonal":
        if j != k:
            return 0.0
        return float(j) ** (-model.decay_p) * (model.gamma + model.beta * state.coeffs[j - 1])
    return float(model.table[j - 1, k - 1]) if k - 1 < model.table.shape[1] else 0.0


def hs_norm_sq(model: DiffusionModel, state: CoefficientState) -> float:
    """Squared Hilbert-Schmidt norm: sum over j <= m, k <= n of sigma_jk^2."""
    if model.kind == "zero":
        return 0.0
    if model.kind == "moving_diagonal":
        d = min(model.m, state.n)
        q = model.mode_weights(d)
        return float(np.sum((q * (model.gamma + model.beta * state.coeffs[:d])) ** 2))
    cols = min(state.n, model.table.shape[1])
    return float(np.sum(model.table[:, :cols] ** 2))


def noise_kick(model: DiffusionModel, state: CoefficientState, increment: np.ndarray) -> np.ndarray:
    """Coefficient-space kick: kick_k = sum_j sigma_jk dB_j."""
    increment = np.asarray(increment, dtype=float)
    if increment.shape != (model.m,):
        raise ValueError(f"increment has shape {increment.shape}, expected ({model.m},)")
    kick = np.zeros(state.n)
    if model.kind == "zero":
        return kick
    if model.kind == "moving_diagonal":
        d = min(model.m, state.n)
        q = model.mode_weights(d)
        kick[:d] = q * (model.gamma + model.beta * state.coeffs[:d]) * increment[:d]
        return kick
    cols = min(state.n, model.table.shape[1])
    kick[:cols] = model.table[:, :cols].T @ increment
    return kick


class NoiseStream:
    """Counter-based Gaussian increment source for one Monte Carlo path.

    Each step's draws come from a fresh Philox generator keyed by
    (seed, path_index, step_index): identical keys give bitwise identical
    increments, distinct keys give independent streams, so paths can be
    generated in any order on any worker.
    """

    def __init__(self, seed: int, path_index: int = 0, step_index: int = 0):
        if seed < 0 or path_index < 0 or step_index < 0:
            raise ValueError("seed, path_index and step_index must be nonnegative")
        self.seed = int(seed)
        self.path_index = int(path_index)
        self.step_index = int(step_index)

    def generator_at(self, step_index: int) -> np.random.Generator:
        key = np.array(
            [
                np.uint64(self.seed),
                np.uint64(((self.path_index & 0xFFFFFFFF) << 32) | (step_index & 0xFFFFFFFF)),
            ],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))


def draw_increment(stream: NoiseStream, m: int, dt: float) -> np.ndarray:
    """m independent N(0, dt) draws for the stream's current step, then advance."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    rng = stream.generator_at(stream.step_index)
    stream.step_index += 1
    return rng.standard_normal(m) * np.sqrt(dt)


def check_assumptions(
    model: DiffusionModel, n: int, t: float = 0.0, n_pairs: int = 200, seed: int = 0
) -> dict:
    """Empirical check of the Lipschitz, growth and diagonality properties.

    Draws ``n_pairs`` random state pairs on the same time slice and returns
    the worst observed ratios; a conforming model keeps lipschitz and growth
    ratios <= 1.
    """
    rng = np.random.default_rng(seed)
    worst_lip = 0.0
    worst_growth = 0.0
    for _ in range(n_pairs):
        u = CoefficientState(t, rng.normal(scale=2.0, size=n))
        v = CoefficientState(t, rng.normal(scale=2.0, size=n))
        du = float(np.linalg.norm(u.coeffs - v.coeffs))
        diff_sq = sum(
            (sigma_coeff(model, j, k, u) - sigma_coeff(model, j, k, v)) ** 2
            for j in range(1, model.m + 1)
            for k in range(1, n + 1)
        )
        if du > 0 and model.lipschitz_k > 0:
            worst_lip = max(worst_lip, np.sqrt(diff_sq) / (model.lipschitz_k * du))
        norm_u = float(np.linalg.norm(u.coeffs))
        if model.lipschitz_k > 0:
            growth = np.sqrt(hs_norm_sq(model, u)) / (model.lipschitz_k * (norm_u + 1.0))
            worst_growth = max(worst_growth, growth)
    max_offdiag = 0.0
    if model.kind == "moving_diagonal":
        u = CoefficientState(t, rng.normal(size=n))
        max_offdiag = max(
            abs(sigma_coeff(model, j, k, u))
            for j in range(1, model.m + 1)
            for k in range(1, n + 1)
            if j != k
        )
    return {
        "lipschitz_ratio": float(worst_lip),
        "growth_ratio": float(worst_growth),
        "max_offdiagonal": float(max_offdiag),
    }


def _check_m(m: int) -> None:
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"noise truncation m must be a positive integer, got {m!r}")
