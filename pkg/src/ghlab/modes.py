"""Periodic solutions of the mode equations D_t u + lam * c(t) * u = f.

Constant coefficients are solved frequency-by-frequency (exact division by
tau + omega*lam, which exposes the small divisors directly).  Variable
coefficients go through the two equivalent period-integral formulas, one
convolving backward over f(t - zeta), one forward over f(t + zeta); the
formula whose exponent stays nonpositive for one-signed Im(c) is selected
automatically, and all exponentials are assembled in log space with
running-maximum rescaling so sign-changing Im(c) cannot overflow silently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import (FieldSolveError, OverflowDespiteRescalingError,
                     ResonanceError)
from .spectral import EigenvalueSequence
from .torus import TWO_PI, PeriodicFunction, quadrature_nodes

if TYPE_CHECKING:  # pragma: no cover
    from .engine import OperatorSpec
    from .regularity import CoefficientField

DEFAULT_RESONANCE_TOL = 1e-10
LOG_OVERFLOW_LIMIT = 700.0


def stable_one_minus_exp(z: complex) -> complex:
    """1 - exp(z), accurate when z is tiny (relative error ~ 1e-14 for |z| <= 1)."""
    x, y = z.real, z.imag
    # exp(x)*cos(y) - 1 without cancellation: expm1(x)*cos(y) - 2*sin(y/2)**2
    real = -(math.expm1(x) * math.cos(y) - 2.0 * math.sin(0.5 * y) ** 2)
    imag = -math.exp(x) * math.sin(y)
    return complex(real, imag)


def _reduce_imag(z: complex) -> complex:
    """Shift Im(z) by a multiple of 2*pi into [-pi, pi] (exp is unchanged)."""
    k = round(z.imag / TWO_PI)
    return complex(z.real, z.imag - TWO_PI * k)


def _log_one_minus_exp(z: complex):
    """(log magnitude, phase factor) of 1 - exp(z), valid for any Re(z)."""
    z = _reduce_imag(z)
    if z.real <= 0:
        v = stable_one_minus_exp(z)
        if v == 0:
            return -math.inf, 1.0 + 0.0j
        return math.log(abs(v)), v / abs(v)
    # 1 - e^z = -e^z (1 - e^-z)
    v = stable_one_minus_exp(-z)
    logmag = z.real + math.log(abs(v))
    phase = -cmath.exp(1j * z.imag) * (v / abs(v))
    return logmag, phase


def dist_to_integers(x: float) -> float:
    return abs(x - round(x))


def resonant_set(seq: EigenvalueSequence, c0: complex, tol: float = 0.0) -> set[int]:
    """Indices j (1-based) with lam_j * c0 within tol of an integer."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    c0 = complex(c0)
    out = set()
    for j, lam in enumerate(seq.values, start=1):
        z = lam * c0
        if abs(z.imag) <= tol and dist_to_integers(z.real) <= tol:
            out.add(j)
    return out


@dataclass
class ModeSolution:
    """One solved mode with its small-divisor diagnostics."""

    u: PeriodicFunction
    lam: float
    divisor_magnitude: float
    resonant: bool
    formula_used: str
    residual_sup: float


def mode_residual_sup(u: PeriodicFunction, lam: float, c: PeriodicFunction,
                      f: PeriodicFunction, n_grid: int | None = None) -> float:
    """sup_t | D_t u + lam * c * u - f | on a grid resolving all three."""
    n = n_grid or max(u.grid_size(256), c.grid_size(64), f.grid_size(64))
    du = u.derivative(1).values_on_grid(n)
    uu = u.values_on_grid(n)
    cc = c.values_on_grid(n)
    ff = f.values_on_grid(n)
    resid = -1j * du + lam * cc * uu - ff
    return float(np.max(np.abs(resid)))


def solve_constant_mode(lam: float, omega: complex, f: PeriodicFunction,
                        resonance_tol: float = DEFAULT_RESONANCE_TOL) -> ModeSolution:
    """Divisor-form solution u_hat(tau) = f_hat(tau) / (tau + omega*lam).

    If omega*lam sits within resonance_tol of an integer the mode is
    resonant: the periodic problem has either no solution (data hits the
    resonant frequency) or a one-parameter family, in which case the
    representative with vanishing coefficient at that frequency is
    returned and flagged.
    """
    omega = complex(omega)
    z = omega * lam
    resonant = abs(z.imag) <= resonance_tol and dist_to_integers(z.real) <= resonance_tol
    res_freq = -round(z.real) if resonant else None

    freqs, coeffs = f._significant()
    if resonant and res_freq is not None:
        hit = np.nonzero(freqs == res_freq)[0]
        if hit.size and abs(coeffs[hit[0]]) > 0:
            raise ResonanceError(
                f"divisor tau + omega*lam vanishes at tau={res_freq} with f_hat != 0",
                lam=lam, frequency=res_freq)

    keep = np.ones(freqs.size, dtype=bool)
    if res_freq is not None:
        keep &= freqs != res_freq
    divisors = freqs[keep].astype(complex) + z
    u = PeriodicFunction.from_coeffs(
        {int(t): cf / dv for t, cf, dv in zip(freqs[keep], coeffs[keep], divisors)})
    u.is_exact = f.is_exact
    if not f.is_exact:
        u.n_grid = f.n_grid
        u.derivative_order_supported = f.derivative_order_supported

    div_mag = 0.0 if resonant else math.hypot(dist_to_integers(z.real), z.imag)
    residual = mode_residual_sup(u, lam, PeriodicFunction.const(omega), f)
    return ModeSolution(u=u, lam=lam, divisor_magnitude=div_mag, resonant=resonant,
                        formula_used="general-with-free-constant" if resonant else "divisor-form",
                        residual_sup=residual)


def _auto_panels(lam: float, c: PeriodicFunction, f: PeriodicFunction) -> int:
    # integrand oscillates in zeta at rate ~ lam * |c| plus the data content
    kappa = lam * c.sup_norm(1024) + f.max_freq() + c.max_freq()
    return int(max(16, math.ceil(kappa)))


def _auto_n_out(lam: float, c: PeriodicFunction, f: PeriodicFunction) -> int:
    # the solution's phase winds at rate ~ lam * |Re c|; Im c only damps
    a_sup = c.real().sup_norm(1024)
    content = lam * a_sup + f.max_freq() + c.max_freq() + math.sqrt(lam * c.sup_norm(1024))
    need = int(max(256, 6 * content))
    return 1 << (need - 1).bit_length()


def _window_increments(c: PeriodicFunction, t: np.ndarray, zeta: np.ndarray,
                       direction: int) -> np.ndarray:
    """Matrix of integral of c over the sliding window, via outer products.

    direction=-1: integral from t-zeta to t; direction=+1: from t to t+zeta.
    Both equal c0*zeta plus a sum over frequencies of rank-one terms, so the
    (t_i, zeta_q) matrix costs one outer product per coefficient.
    """
    freqs, coeffs = c._significant()
    out = np.zeros((t.size, zeta.size), dtype=np.complex128)
    for tau, coef in zip(freqs, coeffs):
        if tau == 0:
            out += coef * zeta[None, :].astype(complex)
            continue
        w = coef / (1j * tau)
        if direction < 0:
            out += np.multiply.outer(w * np.exp(1j * tau * t), 1.0 - np.exp(-1j * tau * zeta))
        else:
            out += np.multiply.outer(w * np.exp(1j * tau * t), np.exp(1j * tau * zeta) - 1.0)
    return out


def _values_on_sliding_grid(f: PeriodicFunction, t: np.ndarray, zeta: np.ndarray,
                            direction: int) -> np.ndarray:
    """f(t + direction * zeta) as a (t, zeta) matrix, one outer product per coefficient."""
    freqs, coeffs = f._significant()
    out = np.zeros((t.size, zeta.size), dtype=np.complex128)
    for tau, coef in zip(freqs, coeffs):
        out += np.multiply.outer(coef * np.exp(1j * tau * t),
                                 np.exp(1j * direction * tau * zeta))
    return out


def solve_variable_mode(lam: float, c: PeriodicFunction, f: PeriodicFunction,
                        panels: int | None = None, formula: str = "auto",
                        n_out: int | None = None,
                        resonance_tol: float = DEFAULT_RESONANCE_TOL,
                        gl_order: int = 8,
                        compute_residual: bool = True) -> ModeSolution:
    """Periodic solution via the period-integral formulas.

    ``formula`` is one of "auto", "backward" (convolution over f(t - zeta)),
    "forward" (over f(t + zeta)).  "auto" picks backward when mean(Im c) <= 0
    and forward otherwise, which keeps the real part of the exponent
    nonpositive whenever Im(c) is one-signed.
    """
    c0 = c.mean()
    z = lam * c0
    if abs(z.imag) <= resonance_tol and dist_to_integers(z.real) <= resonance_tol:
        raise ResonanceError(
            f"lam * mean(c) = {z} is within {resonance_tol} of an integer",
            lam=lam, frequency=-round(z.real))

    if formula == "auto":
        formula = "backward" if z.imag <= 0 else "forward"
    if formula not in ("backward", "forward"):
        raise ValueError(f"unknown formula {formula!r}")

    panels = panels or _auto_panels(lam, c, f)
    n_out = n_out or _auto_n_out(lam, c, f)

    zeta, weights = quadrature_nodes(0.0, TWO_PI, panels, gl_order)
    t = np.arange(n_out) * (TWO_PI / n_out)

    if formula == "backward":
        expo = -1j * lam * _window_increments(c, t, zeta, -1)
        fvals = _values_on_sliding_grid(f, t, zeta, -1)
        log_den, den_phase = _log_one_minus_exp(-TWO_PI * 1j * z)
    else:
        expo = 1j * lam * _window_increments(c, t, zeta, +1)
        fvals = _values_on_sliding_grid(f, t, zeta, +1)
        # denominator e^{2 pi i lam c0} - 1 = -(1 - e^{2 pi i lam c0})
        log_den, den_phase = _log_one_minus_exp(TWO_PI * 1j * z)
        den_phase = -den_phase

    m = np.max(expo.real, axis=1)
    integral = np.sum(weights[None, :] * np.exp(expo - m[:, None]) * fvals, axis=1)

    # u = (i / den) * e^m * integral, assembled from magnitudes in log space
    log_total = m - log_den
    mags = np.abs(integral)
    with np.errstate(divide="ignore"):
        log_mag = np.where(mags > 0, log_total + np.log(np.where(mags > 0, mags, 1.0)), -np.inf)
    worst = float(np.max(log_mag, initial=-math.inf))
    if worst > LOG_OVERFLOW_LIMIT:
        raise OverflowDespiteRescalingError(
            f"solution magnitude exp({worst:.1f}) exceeds double range at lam={lam}",
            exponent=worst)
    phase = np.where(mags > 0, integral / np.where(mags > 0, mags, 1.0), 0.0)
    uvals = 1j * np.conj(den_phase) * phase * np.exp(log_mag)

    u = PeriodicFunction.from_samples(uvals)
    residual = mode_residual_sup(u, lam, c, f, n_grid=n_out) if compute_residual else math.nan
    den_mag = math.exp(log_den) if log_den > -math.inf else 0.0
    return ModeSolution(u=u, lam=lam, divisor_magnitude=den_mag, resonant=False,
                        formula_used=formula, residual_sup=residual)


@dataclass
class FieldSolution:
    """Solved coefficient field plus per-mode diagnostics."""

    field: "CoefficientField"
    solutions: list[ModeSolution]

    @property
    def divisor_magnitudes(self) -> np.ndarray:
        return np.asarray([s.divisor_magnitude for s in self.solutions])

    @property
    def residual_sups(self) -> np.ndarray:
        return np.asarray([s.residual_sup for s in self.solutions])


def solve_field(operator: "OperatorSpec", f_field: "CoefficientField",
                panels: int | None = None, formula: str = "auto",
                resonance_tol: float = DEFAULT_RESONANCE_TOL,
                n_out: int | None = None) -> FieldSolution:
    """Solve every stored mode of f_field under the given operator."""
    from .regularity import CoefficientField

    solutions: list[ModeSolution] = []
    failures: list[tuple[int, Exception]] = []
    for j, f_j in enumerate(f_field.modes, start=1):
        lam = f_field.spectrum.lam(j)
        try:
            if operator.is_constant:
                sol = solve_constant_mode(lam, operator.coefficient, f_j,
                                          resonance_tol=resonance_tol)
            else:
                sol = solve_variable_mode(lam, operator.coefficient, f_j,
                                          panels=panels, formula=formula,
                                          n_out=n_out, resonance_tol=resonance_tol)
            solutions.append(sol)
        except Exception as exc:  # aggregated below
            failures.append((j, exc))
    if failures:
        failing = ", ".join(f"j={j}: {exc}" for j, exc in failures[:5])
        raise FieldSolveError(f"{len(failures)} mode(s) failed ({failing})", failures)
    field = CoefficientField(modes=[s.u for s in solutions], spectrum=f_field.spectrum)
    return FieldSolution(field=field, solutions=solutions)
