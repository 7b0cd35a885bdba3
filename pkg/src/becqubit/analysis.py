"""Crossover location in the scattering length, parameter sweeps, toy spectrum.

The Markovian/non-Markovian boundary is found by bisection on a_B, classifying
each candidate by whether the rate dips below the shared noise guard anywhere
inside the scan horizon.  Classification is sign-exact, so the boundary does
not depend on the rate prefactor at all.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import dynamics, engine
from .constants import A_RB
from .params import PhysicalConfig, model_from_config

Classification = Literal["Markovian", "NonMarkovian"]

# diluteness caps on a_B per dimension, in units of a_Rb
A_B_MAX_OVER_ARB = {1: 1.0, 2: 2.0, 3: 3.0}

TOY_OMEGA_MAX_FACTOR = 8.0  # Gaussian tail cut, as in the wavenumber integral
TOY_WINDOW = 64.0  # classification window in units of 1/omega_c
TOY_GRID = 2001


class BracketError(RuntimeError):
    """Classification does not change across the requested bracket."""


def classify(model, t_max: float | None = None) -> Classification:
    """NonMarkovian exactly when a guarded negative stretch of gamma exists."""
    if t_max is None:
        t_max, _ = dynamics.choose_horizon(model)
    trace = engine.build_rate_trace(model, t_max, n_points=dynamics.DEFAULT_GRID)
    cells, _ = dynamics._detect_negative_cells(trace.gamma, dynamics.NOISE_GUARD)
    return "NonMarkovian" if cells else "Markovian"


def classify_config(config: PhysicalConfig, t_max: float | None = None) -> Classification:
    return classify(model_from_config(config), t_max)


@dataclass(frozen=True)
class CrossoverResult:
    """Critical scattering length with its final bisection bracket."""

    dimension: int
    a_crit: float  # meters
    a_crit_over_aRb: float
    bracket: tuple[float, float]  # meters, (Markovian side, NonMarkovian side)
    evaluations: int

    def __post_init__(self):
        lo, hi = self.bracket
        if not (0.0 <= lo < hi):
            raise ValueError("bracket must satisfy 0 <= lo < hi")


def find_crossover(
    dimension: int,
    config: PhysicalConfig | None = None,
    tol: float = 1e-3 * A_RB,
    a_B_max: float | None = None,
) -> CrossoverResult:
    """Bisect a_B in [0, a_B_max] for the Markovian/non-Markovian boundary.

    a_B_max defaults to the diluteness cap of the dimension.  Raises
    BracketError when both ends classify the same.
    """
    if dimension not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    from .params import default_config

    base = config if config is not None else default_config()
    base = replace(base, dimension=dimension)
    if a_B_max is None:
        a_B_max = A_B_MAX_OVER_ARB[dimension] * A_RB

    def is_nm(a_B: float) -> bool:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg = replace(base, a_B=a_B)
        return classify_config(cfg) == "NonMarkovian"

    evaluations = 2
    lo, hi = 0.0, a_B_max
    nm_lo, nm_hi = is_nm(lo), is_nm(hi)
    if nm_lo or not nm_hi:
        raise BracketError(
            f"no Markovian/non-Markovian sign change on [0, {a_B_max:.3e} m] "
            f"(ends classify {nm_lo}, {nm_hi})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        evaluations += 1
        if is_nm(mid):
            hi = mid
        else:
            lo = mid
    a_crit = 0.5 * (lo + hi)
    return CrossoverResult(
        dimension=dimension,
        a_crit=a_crit,
        a_crit_over_aRb=a_crit / A_RB,
        bracket=(lo, hi),
        evaluations=evaluations,
    )


@dataclass(frozen=True)
class SweepTable:
    """Measure values along one axis; failures are recorded, not raised."""

    axis: str
    values: tuple[float, ...]
    N: tuple[float, ...]  # nan where a point failed
    diagnostics: tuple[dict, ...] = field(repr=False)

    def __post_init__(self):
        if not (len(self.values) == len(self.N) == len(self.diagnostics)):
            raise ValueError("column lengths differ")
        if len(self.values) > 1 and not all(
            b > a for a, b in zip(self.values[:-1], self.values[1:])
        ):
            raise ValueError("axis values must be strictly increasing")


_SWEEP_FIELD = {"a_B": "a_B", "L": "L", "dimension": "dimension"}


def sweep(axis: str, values, config: PhysicalConfig) -> SweepTable:
    """measure() at every point of the axis grid, continuing past failures."""
    if axis not in _SWEEP_FIELD:
        raise ValueError(f"axis must be one of {sorted(_SWEEP_FIELD)}, got {axis!r}")
    values = [int(v) if axis == "dimension" else float(v) for v in values]
    if len(set(values)) != len(values):
        raise ValueError("sweep grid contains duplicate values")
    N_col: list[float] = []
    diag_col: list[dict] = []
    for v in values:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                cfg = replace(config, **{_SWEEP_FIELD[axis]: v})
            result = dynamics.measure(model_from_config(cfg))
            N_col.append(result.N)
            diag = dict(result.diagnostics)
            diag.update(status="ok", t_max_used=result.t_max_used, N_blp=result.N_blp)
            diag_col.append(diag)
        except Exception as exc:  # per-point failure must not kill the sweep
            N_col.append(math.nan)
            diag_col.append({"status": "error", "error": f"{type(exc).__name__}: {exc}"})
    return SweepTable(
        axis=axis, values=tuple(values), N=tuple(N_col), diagnostics=tuple(diag_col)
    )


# ---------------------------------------------------------------------------
# toy Ohmic-family spectrum with Gaussian cutoff
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyModel:
    """J(omega) = omega^s exp(-omega^2/omega_c^2), arbitrary units."""

    s: float
    omega_c: float

    def __post_init__(self):
        if not (self.s > 0.0 and math.isfinite(self.s)):
            raise ValueError(f"s must be > 0, got {self.s}")
        if not (self.omega_c > 0.0 and math.isfinite(self.omega_c)):
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")


def _toy_panels(toy: ToyModel, t: float, refine: int = 0):
    """Oscillation-aware panels on [0, 8 omega_c], geometrically graded at 0.

    The dephasing-rate integrand omega^(s-1) sin(omega t) behaves like
    t*omega^s near zero; grading removes the algebraic endpoint error for
    non-integer s so panel doubling converges spectrally.
    """
    omega_max = TOY_OMEGA_MAX_FACTOR * toy.omega_c
    n_p = max(64, int(math.ceil(omega_max * abs(t) / math.pi))) << refine
    edges = np.linspace(0.0, omega_max, n_p + 1)
    first = edges[1]
    graded = first * 0.5 ** np.arange(40, -1, -1.0)
    edges = np.concatenate(([0.0], graded[:-1], edges[1:]))
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    w = (mid[:, None] + half[:, None] * engine._NODES[None, :]).ravel()
    wt = (half[:, None] * engine._WEIGHTS[None, :]).ravel()
    return w, wt


def toy_rate(toy: ToyModel, t: float) -> float:
    """Dephasing rate of the toy spectrum: int J(omega) sin(omega t)/omega domega.

    This is the rate generated by the standard pure-dephasing decoherence
    integral Gamma(t) = int J(omega) (1 - cos omega t)/omega^2 domega; it puts
    the Markovian boundary of the Gaussian-cutoff family at s = 2.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0

    def evaluate(refine: int) -> tuple[float, float]:
        w, wt = _toy_panels(toy, t, refine)
        coeff = wt * w ** (toy.s - 1.0) * np.exp(-((w / toy.omega_c) ** 2))
        return float(coeff @ np.sin(w * t)), float(coeff.sum())

    prev, envelope = evaluate(0)
    achieved = math.inf
    for refine in range(1, engine.MAX_REFINE + 1):
        cur, _ = evaluate(refine)
        # changes below 1e-12 of the envelope are cancellation noise
        achieved = abs(cur - prev) / max(abs(cur), 1e-12 * envelope, 1e-300)
        if abs(cur - prev) <= max(engine.RATE_RTOL * abs(cur), 1e-12 * envelope):
            return cur
        prev = cur
    raise engine.ConvergenceError("toy rate quadrature did not converge", achieved)


def toy_rate_trace(toy: ToyModel, t_max: float, n_points: int = TOY_GRID):
    """Toy rate on a uniform grid via the rotation recurrence."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    times = np.linspace(0.0, t_max, n_points)
    w, wt = _toy_panels(toy, t_max)
    coeff = wt * w ** (toy.s - 1.0) * np.exp(-((w / toy.omega_c) ** 2))
    out = np.empty(n_points)
    out[0] = 0.0
    dt = times[1] - times[0]
    z = np.exp(1j * w * times[1])
    rot = np.exp(1j * w * dt)
    for j in range(1, n_points):
        out[j] = coeff @ z.imag
        z *= rot
        if j % 256 == 0:  # re-anchor against phase drift
            z = np.exp(1j * w * times[min(j + 1, n_points - 1)])
    # verify against the adaptive pointwise value at the end of the window
    ref = toy_rate(toy, float(times[-1]))
    if abs(out[-1] - ref) > 1e-6 * max(np.abs(out).max(), abs(ref)):
        raise engine.ConvergenceError("toy trace disagrees with adaptive quadrature", math.inf)
    return times, out


def toy_is_nonmarkovian(toy: ToyModel) -> bool:
    """Rate dips below the shared noise guard within the fixed scan window."""
    _, g = toy_rate_trace(toy, TOY_WINDOW / toy.omega_c)
    return bool((g < -dynamics.NOISE_GUARD * np.abs(g).max()).any())


def toy_critical_s(omega_c: float, tol: float = 1e-2) -> float:
    """Bisect the Ohmicity exponent for the Markovian boundary on s in [1, 3]."""
    if tol < 1e-3:
        raise ValueError("tol below 1e-3 is not supported")
    if omega_c <= 0:
        raise ValueError("omega_c must be positive")
    lo, hi = 1.0, 3.0
    if toy_is_nonmarkovian(ToyModel(s=lo, omega_c=omega_c)) or not toy_is_nonmarkovian(
        ToyModel(s=hi, omega_c=omega_c)
    ):
        raise BracketError("no boundary bracketed on s in [1, 3]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if toy_is_nonmarkovian(ToyModel(s=mid, omega_c=omega_c)):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
