"""2*pi-periodic complex functions with spectral calculus.

Two representations sit behind one interface.  A trigonometric polynomial
(finite frequency/coefficient table) supports exact derivatives of every
order, exact means and exact primitives.  A uniformly sampled function is
interpolated trigonometrically through its FFT coefficients; derivatives
are spectral and limited to a configured order because the k**gamma
amplification eventually digs into the coefficient noise floor.  Smooth
cutoffs built from the exp(-1/x) profile keep an exact point evaluator
(and an analytic first derivative) alongside their sampled form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSupportError, NumericsError, UnsupportedOrderError

TWO_PI = 2.0 * math.pi

# Relative threshold below which sampled-function FFT coefficients are
# treated as noise when differentiating or estimating derivative sups.
COEFF_NOISE_FLOOR = 1e-13

DEFAULT_GRID = 4096
DEFAULT_SAMPLED_DERIVATIVE_ORDER = 32


def _wrap(t):
    return np.mod(t, TWO_PI)


class PeriodicFunction:
    """A 2*pi-periodic function of one real variable, complex-valued."""

    def __init__(self, freqs, coeffs, *, is_exact, n_grid=None,
                 derivative_order_supported=None, point_fn=None, point_fn_d1=None):
        freqs = np.asarray(freqs, dtype=np.int64)
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if freqs.shape != coeffs.shape:
            raise ValueError("frequency and coefficient arrays differ in shape")
        if freqs.size != np.unique(freqs).size:
            raise ValueError("frequencies must be distinct")
        order = np.argsort(freqs)
        self._freqs = freqs[order]
        self._coeffs = coeffs[order]
        self.is_exact = bool(is_exact)
        self.n_grid = n_grid
        if derivative_order_supported is None:
            derivative_order_supported = math.inf if is_exact else DEFAULT_SAMPLED_DERIVATIVE_ORDER
        self.derivative_order_supported = derivative_order_supported
        self._point_fn = point_fn
        self._point_fn_d1 = point_fn_d1

    # ---------------------------------------------------------------- constructors

    @classmethod
    def from_coeffs(cls, table) -> "PeriodicFunction":
        """Exact trigonometric polynomial from {frequency: coefficient}."""
        if isinstance(table, dict):
            items = sorted(table.items())
        else:
            items = sorted((int(f), complex(c)) for f, c in table)
        freqs = [f for f, _ in items]
        coeffs = [c for _, c in items]
        if not freqs:
            freqs, coeffs = [0], [0.0]
        return cls(freqs, coeffs, is_exact=True)

    @classmethod
    def from_samples(cls, samples, *, derivative_order_supported=None,
                     point_fn=None, point_fn_d1=None) -> "PeriodicFunction":
        """Trig interpolant of samples on the uniform grid 2*pi*k/N, k=0..N-1."""
        samples = np.asarray(samples, dtype=np.complex128)
        n = samples.size
        if n < 2:
            raise ValueError("need at least 2 samples")
        spec = np.fft.fft(samples) / n
        freqs = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        if n % 2 == 0:
            # Split the Nyquist coefficient symmetrically so real data keeps
            # a real interpolant and odd derivatives stay consistent.
            kny = n // 2
            idx = np.nonzero(freqs == -kny)[0][0]
            cny = spec[idx]
            freqs = np.concatenate([freqs, [kny]])
            spec = np.concatenate([spec, [0.5 * cny]])
            spec[idx] = 0.5 * cny
        return cls(freqs, spec, is_exact=False, n_grid=n,
                   derivative_order_supported=derivative_order_supported,
                   point_fn=point_fn, point_fn_d1=point_fn_d1)

    @classmethod
    def from_callable(cls, fn, n_grid=DEFAULT_GRID, *, derivative_order_supported=None,
                      d1=None) -> "PeriodicFunction":
        grid = np.arange(n_grid) * (TWO_PI / n_grid)
        vals = np.asarray(fn(grid), dtype=np.complex128)
        return cls.from_samples(vals, derivative_order_supported=derivative_order_supported,
                                point_fn=fn, point_fn_d1=d1)

    @classmethod
    def const(cls, value) -> "PeriodicFunction":
        return cls.from_coeffs({0: complex(value)})

    @classmethod
    def wave(cls, freq, amp=1.0) -> "PeriodicFunction":
        """amp * exp(i * freq * t)."""
        return cls.from_coeffs({int(freq): complex(amp)})

    @classmethod
    def cosine(cls, freq, amp=1.0) -> "PeriodicFunction":
        a = 0.5 * complex(amp)
        return cls.from_coeffs({int(freq): a, -int(freq): a})

    @classmethod
    def sine(cls, freq, amp=1.0) -> "PeriodicFunction":
        a = complex(amp) / 2j
        return cls.from_coeffs({int(freq): a, -int(freq): -a})

    # ---------------------------------------------------------------- basic access

    @property
    def freqs(self) -> np.ndarray:
        return self._freqs

    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    def coefficient(self, freq: int) -> complex:
        hits = np.nonzero(self._freqs == freq)[0]
        return complex(self._coeffs[hits[0]]) if hits.size else 0.0 + 0.0j

    def max_freq(self) -> int:
        live = self._freqs[np.abs(self._coeffs) > 0]
        return int(np.max(np.abs(live))) if live.size else 0

    def _significant(self):
        """Frequencies/coefficients above the sampled noise floor."""
        if self.is_exact:
            return self._freqs, self._coeffs
        mags = np.abs(self._coeffs)
        top = mags.max(initial=0.0)
        keep = mags > COEFF_NOISE_FLOOR * top if top > 0 else slice(0, 0)
        return self._freqs[keep], self._coeffs[keep]

    # ---------------------------------------------------------------- evaluation

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        if self._point_fn is not None:
            out = np.asarray(self._point_fn(_wrap(t_arr)), dtype=np.complex128)
        else:
            phase = np.exp(1j * np.multiply.outer(t_arr, self._freqs.astype(float)))
            out = phase @ self._coeffs
        return complex(out) if np.isscalar(t) or t_arr.ndim == 0 else out

    def values_on_grid(self, n: int) -> np.ndarray:
        """Values at t_k = 2*pi*k/n via inverse FFT.

        Exact at the grid points for any n (frequencies enter mod n, which
        is what evaluation at t_k sees); choose n > 2*max_freq() when the
        result feeds a new sampled representation.
        """
        if n < 1:
            raise ValueError("grid size must be positive")
        spec = np.zeros(n, dtype=np.complex128)
        np.add.at(spec, np.mod(self._freqs, n), self._coeffs)
        return np.fft.ifft(spec) * n

    def grid_size(self, minimum: int = 64) -> int:
        """A power-of-two grid size resolving this function's content."""
        need = max(minimum, 2 * self.max_freq() + 2)
        return 1 << (need - 1).bit_length()

    # ---------------------------------------------------------------- calculus

    def derivative(self, gamma: int = 1) -> "PeriodicFunction":
        """gamma-th derivative, exact on trig polynomials, spectral otherwise."""
        if gamma < 0:
            raise UnsupportedOrderError("derivative order must be nonnegative")
        if gamma == 0:
            return self
        if gamma > self.derivative_order_supported:
            raise UnsupportedOrderError(
                f"order {gamma} exceeds supported order {self.derivative_order_supported}"
            )
        if gamma == 1 and self._point_fn_d1 is not None and self.n_grid is not None:
            return PeriodicFunction.from_callable(
                self._point_fn_d1, self.n_grid,
                derivative_order_supported=self.derivative_order_supported - 1)
        freqs, coeffs = self._significant()
        dcoeffs = coeffs * (1j * freqs.astype(float)) ** gamma
        out = PeriodicFunction(freqs, dcoeffs, is_exact=self.is_exact, n_grid=self.n_grid)
        if not self.is_exact:
            out.derivative_order_supported = self.derivative_order_supported - gamma
        return out

    def mean(self) -> complex:
        """Average over one period (coefficient at frequency zero)."""
        return self.coefficient(0)

    def sup_norm(self, n_grid: int | None = None) -> float:
        """max |f| sampled on a dense grid (a lower bound on the true sup)."""
        n = n_grid or max(DEFAULT_GRID, self.grid_size())
        if self._point_fn is not None:
            grid = np.arange(n) * (TWO_PI / n)
            return float(np.max(np.abs(self._point_fn(grid))))
        n = max(n, self.grid_size(minimum=n))
        return float(np.max(np.abs(self.values_on_grid(n))))

    def primitive_from(self, eta: float):
        """The function t -> integral from eta to t, as a callable on R.

        Not periodic unless the mean vanishes: the constant mode integrates
        to a linear drift mean * (t - eta).
        """
        freqs, coeffs = self._freqs, self._coeffs
        nz = freqs != 0
        f_nz = freqs[nz].astype(float)
        c_nz = coeffs[nz]
        c0 = self.coefficient(0)
        base = np.exp(1j * f_nz * eta)

        def primitive(t):
            t_arr = np.asarray(t, dtype=float)
            osc = (np.exp(1j * np.multiply.outer(t_arr, f_nz)) - base) / (1j * f_nz)
            out = c0 * (t_arr - eta) + (osc @ c_nz if f_nz.size else 0.0)
            return complex(out) if np.isscalar(t) or t_arr.ndim == 0 else out

        return primitive

    # ---------------------------------------------------------------- transforms

    def conj(self) -> "PeriodicFunction":
        return PeriodicFunction(-self._freqs, np.conj(self._coeffs),
                                is_exact=self.is_exact, n_grid=self.n_grid,
                                derivative_order_supported=self.derivative_order_supported)

    def real(self) -> "PeriodicFunction":
        return 0.5 * (self + self.conj())

    def imag(self) -> "PeriodicFunction":
        return (self - self.conj()) * (1 / 2j)

    # ---------------------------------------------------------------- arithmetic

    def _merge(self, other, sign) -> "PeriodicFunction":
        table = {}
        for f, c in zip(self._freqs, self._coeffs):
            table[int(f)] = table.get(int(f), 0.0) + c
        for f, c in zip(other._freqs, other._coeffs):
            table[int(f)] = table.get(int(f), 0.0) + sign * c
        out = PeriodicFunction.from_coeffs(table)
        out.is_exact = self.is_exact and other.is_exact
        if not out.is_exact:
            out.n_grid = max(self.n_grid or 0, other.n_grid or 0) or None
            out.derivative_order_supported = min(self.derivative_order_supported,
                                                 other.derivative_order_supported)
        return out

    def __add__(self, other):
        if np.isscalar(other):
            other = PeriodicFunction.const(other)
        return self._merge(other, +1)

    __radd__ = __add__

    def __sub__(self, other):
        if np.isscalar(other):
            other = PeriodicFunction.const(other)
        return self._merge(other, -1)

    def __neg__(self):
        return self * (-1)

    def __mul__(self, other):
        if np.isscalar(other):
            out = PeriodicFunction(self._freqs, self._coeffs * complex(other),
                                   is_exact=self.is_exact, n_grid=self.n_grid,
                                   derivative_order_supported=self.derivative_order_supported)
            return out
        table = {}
        for f1, c1 in zip(self._freqs, self._coeffs):
            for f2, c2 in zip(other._freqs, other._coeffs):
                k = int(f1 + f2)
                table[k] = table.get(k, 0.0) + c1 * c2
        out = PeriodicFunction.from_coeffs(table)
        out.is_exact = self.is_exact and other.is_exact
        if not out.is_exact:
            out.n_grid = max(self.n_grid or 0, other.n_grid or 0) or None
            out.derivative_order_supported = min(self.derivative_order_supported,
                                                 other.derivative_order_supported)
        return out

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / complex(scalar))

    def __repr__(self):
        kind = "trig" if self.is_exact else f"sampled[{self.n_grid}]"
        return f"PeriodicFunction({kind}, {self._freqs.size} coefficients)"


# -------------------------------------------------------------------- log-domain sup

def log_sup_derivative(f: PeriodicFunction, gamma: int, n_grid: int | None = None) -> float:
    """log of sup_t |d^gamma f / dt^gamma|, stable for large gamma.

    Coefficients are rescaled by the dominant magnitude before synthesis so
    frequency**gamma factors never overflow.  Returns -inf for the zero
    function (or when gamma >= 1 kills a constant).
    """
    freqs, coeffs = f._significant()
    if gamma > 0:
        keep = freqs != 0
        freqs, coeffs = freqs[keep], coeffs[keep]
    live = np.abs(coeffs) > 0
    freqs, coeffs = freqs[live], coeffs[live]
    if freqs.size == 0:
        return -math.inf
    logmag = np.log(np.abs(coeffs))
    if gamma > 0:
        logmag = logmag + gamma * np.log(np.abs(freqs).astype(float))
    peak = float(np.max(logmag))
    # phases of coeff * (i*freq)**gamma
    phase = np.angle(coeffs) + gamma * (math.pi / 2.0) * np.sign(freqs)
    scaled = np.exp(logmag - peak + 1j * phase)
    n = n_grid or max(DEFAULT_GRID, 1 << int(2 * np.max(np.abs(freqs)) + 2).bit_length())
    spec = np.zeros(n, dtype=np.complex128)
    np.add.at(spec, np.mod(freqs, n), scaled)
    vals = np.fft.ifft(spec) * n
    return peak + float(np.log(np.max(np.abs(vals))))


def log_abs_derivative_on_grid(f: PeriodicFunction, gamma: int, n_grid: int) -> np.ndarray:
    """log |d^gamma f| at t_k = 2*pi*k/n_grid, stable for large gamma.

    Single-frequency functions have a t-independent derivative magnitude
    and skip synthesis entirely.
    """
    freqs, coeffs = f._significant()
    if gamma > 0:
        keep = freqs != 0
        freqs, coeffs = freqs[keep], coeffs[keep]
    live = np.abs(coeffs) > 0
    freqs, coeffs = freqs[live], coeffs[live]
    if freqs.size == 0:
        return np.full(n_grid, -math.inf)
    logmag = np.log(np.abs(coeffs))
    if gamma > 0:
        logmag = logmag + gamma * np.log(np.abs(freqs).astype(float))
    peak = float(np.max(logmag))
    if freqs.size == 1:
        return np.full(n_grid, peak)
    phase = np.angle(coeffs) + gamma * (math.pi / 2.0) * np.sign(freqs)
    scaled = np.exp(logmag - peak + 1j * phase)
    n = max(n_grid, int(2 * np.max(np.abs(freqs)) + 2))
    spec = np.zeros(n, dtype=np.complex128)
    np.add.at(spec, np.mod(freqs, n), scaled)
    vals = np.abs(np.fft.ifft(spec) * n)
    if n != n_grid:
        # resample the magnitude envelope onto the requested grid
        idx = (np.arange(n_grid) * n) // n_grid
        vals = vals[idx]
    with np.errstate(divide="ignore"):
        return peak + np.log(vals)


# -------------------------------------------------------------------- Gevrey norm

@dataclass(frozen=True)
class GevreyNormEstimate:
    """Truncated Gevrey norm sup_{gamma <= gamma_max} of the seminorm ladder."""

    sigma: float
    eta: float
    gamma_max: int
    value: float
    argmax_gamma: int


def gevrey_norm(f: PeriodicFunction, sigma: float, eta: float,
                gamma_max: int, n_grid: int | None = None) -> GevreyNormEstimate:
    """sup over gamma <= gamma_max of eta^-gamma (gamma!)^-sigma sup|d^gamma f|."""
    if sigma < 1:
        raise ValueError(f"sigma must be >= 1, got {sigma}")
    if eta <= 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if gamma_max > f.derivative_order_supported:
        raise UnsupportedOrderError(
            f"gamma_max {gamma_max} exceeds supported order {f.derivative_order_supported}")
    best, best_gamma = -math.inf, 0
    for gamma in range(gamma_max + 1):
        term = (log_sup_derivative(f, gamma, n_grid)
                - gamma * math.log(eta) - sigma * math.lgamma(gamma + 1))
        if term > best:
            best, best_gamma = term, gamma
    value = 0.0 if best == -math.inf else math.exp(best)
    return GevreyNormEstimate(sigma=sigma, eta=eta, gamma_max=gamma_max,
                              value=value, argmax_gamma=best_gamma)


# -------------------------------------------------------------------- quadrature

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(order: int):
    if order not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (x, w)
    return _GL_CACHE[order]


def quadrature_nodes(a: float, b: float, panels: int, order: int = 8):
    """Composite Gauss-Legendre nodes and weights on [a, b]."""
    if panels < 1:
        raise ValueError("panels must be >= 1")
    x, w = _gl_nodes(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def quadrature(g, a: float, b: float, panels: int, order: int = 8) -> complex:
    """Composite Gauss-Legendre integral of g over [a, b]."""
    nodes, weights = quadrature_nodes(a, b, panels, order)
    vals = np.asarray(g(nodes))
    if vals.shape != nodes.shape:
        vals = np.asarray([g(x) for x in nodes])
    bad = ~np.isfinite(vals)
    if np.any(bad):
        where = nodes[np.nonzero(bad)[0][0]]
        raise NumericsError(f"integrand not finite at t={where}", abscissa=float(where))
    return complex(np.sum(weights * vals))


def quadrature_to_tolerance(g, a: float, b: float, tol: float = 1e-12,
                            start_panels: int = 4, max_panels: int = 1 << 16,
                            order: int = 8) -> complex:
    """Double the panel count until the relative change drops below tol."""
    panels = start_panels
    prev = quadrature(g, a, b, panels, order)
    while panels < max_panels:
        panels *= 2
        cur = quadrature(g, a, b, panels, order)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise NumericsError(f"quadrature did not converge below {tol} with {max_panels} panels")


# -------------------------------------------------------------------- cutoffs

def _profile(x):
    """exp(-1/x) continued by zero for x <= 0."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def _profile_d1(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos]) / x[pos] ** 2
    return out


def _smooth_step(x):
    """0 for x <= 0, 1 for x >= 1, smooth exp(-1/x)-type transition between."""
    fx = _profile(x)
    gx = _profile(1.0 - np.asarray(x, dtype=float))
    return fx / (fx + gx)


def _smooth_step_d1(x):
    x = np.asarray(x, dtype=float)
    fx, gx = _profile(x), _profile(1.0 - x)
    dfx, dgx = _profile_d1(x), _profile_d1(1.0 - x)
    denom = (fx + gx) ** 2
    out = np.zeros_like(x)
    inside = (x > 0) & (x < 1)
    out[inside] = (dfx[inside] * gx[inside] + fx[inside] * dgx[inside]) / denom[inside]
    return out


def bump(support, plateau, n_grid: int = DEFAULT_GRID,
         derivative_order_supported: int = DEFAULT_SAMPLED_DERIVATIVE_ORDER) -> PeriodicFunction:
    """Smooth cutoff: 1 on [c, d], 0 outside [a, b], values in [0, 1].

    Requires a < c < d < b with [a, b] inside [0, 2*pi].  The function and
    its first derivative evaluate pointwise from the closed-form profile;
    higher derivatives go through the spectral representation.
    """
    a, b = support
    c, d = plateau
    if not (a < c < d < b):
        raise InvalidSupportError(f"need a < c < d < b, got {(a, c, d, b)}")
    if not (0.0 <= a and b <= TWO_PI):
        raise InvalidSupportError(f"support {support} not inside [0, 2*pi]")
    rise = c - a
    fall = b - d

    def value(t):
        t = _wrap(np.asarray(t, dtype=float))
        return _smooth_step((t - a) / rise) * _smooth_step((b - t) / fall)

    def deriv(t):
        t = _wrap(np.asarray(t, dtype=float))
        s1 = _smooth_step((t - a) / rise)
        s2 = _smooth_step((b - t) / fall)
        return (_smooth_step_d1((t - a) / rise) / rise * s2
                - s1 * _smooth_step_d1((b - t) / fall) / fall)

    return PeriodicFunction.from_callable(
        value, n_grid, derivative_order_supported=derivative_order_supported, d1=deriv)


# -------------------------------------------------------------------- peak bound

def power_exp_peak_log(tau: int, p: float, q: float, mu: float) -> float:
    """log of max over A >= 0 of A**(tau*p) * exp(-mu * A**q).

    The maximum sits at A = (tau*p/(mu*q))**(1/q); the normalized sequence
    (max)**(1/tau) / (tau!)**(p/(q*tau)) stays bounded in tau.
    """
    if min(p, q, mu) <= 0:
        raise ValueError("p, q, mu must be positive")
    if tau == 0:
        return 0.0
    r = tau * p / q
    return r * (math.log(tau * p / (mu * q)) - 1.0)
