"""Moving-boundary motions a(t) and their admissibility bounds.

The right endpoint of the spatial interval (0, a(t)) is a C^1 function of
time.  Every family here exposes the boundary position and its velocity,
plus sampled lower/upper bounds (``delta0``, ``big_l``) that downstream
stability heuristics rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.interpolate import CubicSpline

FAMILIES = ("constant", "linear", "sinusoidal", "exponential", "table")

_N_SAMPLE = 1000
_MARGIN = 0.01
# slack for endpoint time queries produced by floating-point step grids
_T_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class DomainMotion:
    """A validated boundary motion on [0, horizon].

    ``delta0 <= a(t)`` and ``max(a(t), |a'(t)|) <= big_l`` hold on a dense
    time sample by construction.  Instances are immutable and safe to share
    across worker processes.
    """

    kind: str
    params: dict[str, float]
    horizon: float
    delta0: float
    big_l: float
    _spline: CubicSpline | None = field(default=None, repr=False, compare=False)

    def a_at(self, t):
        """Boundary position a(t); accepts scalars or arrays."""
        t = self._check_time(t)
        p = self.params
        if self.kind == "constant":
            return np.full_like(t, p["a0"])[()] if np.ndim(t) else p["a0"]
        if self.kind == "linear":
            return p["a0"] + p["slope"] * t
        if self.kind == "sinusoidal":
            return p["a0"] + p["amp"] * np.sin(p["omega"] * t)
        if self.kind == "exponential":
            return p["a0"] * np.exp(p["slope"] * t)
        return self._spline(t)[()]

    def a_prime_at(self, t):
        """Boundary velocity a'(t); accepts scalars or arrays."""
        t = self._check_time(t)
        p = self.params
        if self.kind == "constant":
            return np.zeros_like(t)[()] if np.ndim(t) else 0.0
        if self.kind == "linear":
            return p["slope"] + 0.0 * t
        if self.kind == "sinusoidal":
            return p["amp"] * p["omega"] * np.cos(p["omega"] * t)
        if self.kind == "exponential":
            return p["slope"] * p["a0"] * np.exp(p["slope"] * t)
        return self._spline(t, 1)[()]

    def _check_time(self, t):
        slack = _T_SLACK * max(1.0, self.horizon)
        if type(t) is float or np.ndim(t) == 0:
            t = float(t)
            if t < -slack or t > self.horizon + slack:
                raise ValueError(
                    f"time {t!r} outside [0, {self.horizon}] for domain motion"
                )
            return min(max(t, 0.0), self.horizon)
        t = np.asarray(t, dtype=float)
        if np.any(t < -slack) or np.any(t > self.horizon + slack):
            raise ValueError(
                f"time array outside [0, {self.horizon}] for domain motion"
            )
        return np.clip(t, 0.0, self.horizon)


_FAMILY_PARAMS = {
    "constant": {"a0"},
    "linear": {"a0", "slope"},
    "sinusoidal": {"a0", "amp", "omega"},
    "exponential": {"a0", "slope"},
    "table": {"t", "a"},
}


def make_domain(kind: str, params: Mapping, horizon: float) -> DomainMotion:
    """Build and validate a boundary motion.

    ``params`` holds the family parameters (for ``table``: arrays ``t`` and
    ``a`` of knots, interpolated by a natural cubic spline so the motion is
    C^1).  The bounds ``delta0``/``big_l`` come from a 1000-point sample,
    shrunk/grown by 1% as a safety margin.  Raises ``ValueError`` if the
    sampled minimum of a is not strictly positive.
    """
    if kind not in FAMILIES:
        raise ValueError(f"unknown domain kind {kind!r}; expected one of {FAMILIES}")
    if not horizon > 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    expected = _FAMILY_PARAMS[kind]
    got = set(params)
    if got != expected:
        raise ValueError(
            f"domain kind {kind!r} takes parameters {sorted(expected)}, got {sorted(got)}"
        )

    spline = None
    if kind == "table":
        ts = np.asarray(params["t"], dtype=float)
        vals = np.asarray(params["a"], dtype=float)
        if ts.ndim != 1 or ts.shape != vals.shape or ts.size < 4:
            raise ValueError("table domain needs matching 1-D t/a arrays with >= 4 knots")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("table knots must be strictly increasing in t")
        if ts[0] > 0 or ts[-1] < horizon:
            raise ValueError(
                f"table knots cover [{ts[0]}, {ts[-1]}], need [0, {horizon}]"
            )
        spline = CubicSpline(ts, vals, bc_type="natural")
        clean = {"t": ts, "a": vals}
    else:
        clean = {k: float(v) for k, v in params.items()}

    probe = DomainMotion(kind, clean, float(horizon), np.nan, np.nan, spline)
    ts = np.linspace(0.0, horizon, _N_SAMPLE)
    avals = np.asarray(probe.a_at(ts), dtype=float)
    apvals = np.asarray(probe.a_prime_at(ts), dtype=float)
    a_min = float(np.min(avals))
    if a_min <= 0.0:
        raise ValueError(
            f"domain motion reaches a(t) = {a_min} <= 0 on [0, {horizon}]; not admissible"
        )
    delta0 = a_min * (1.0 - _MARGIN)
    big_l = max(float(np.max(avals)), float(np.max(np.abs(apvals)))) * (1.0 + _MARGIN)
    return DomainMotion(kind, clean, float(horizon), delta0, big_l, spline)
