"""Coefficient-decay classifiers for truncated eigencoefficient fields.

Membership of a field {u_j(t)} in the smooth class is read off the joint
decay of derivative sup-norms in the mode index j and the derivative
order gamma.  Every verdict here is a statement about the stored
truncation (J, M, gamma_max) with trend diagnostics: boundedness in j is
judged by fitting constants on the first half of the index range and
checking them against the second half, and factorial growth in gamma is
fitted by least squares in log space against (gamma+1)*log(C) +
sigma*lgamma(gamma+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import EigenvalueSequence
from .torus import PeriodicFunction, gevrey_norm, log_abs_derivative_on_grid, log_sup_derivative

FIT_RESIDUAL_BAND = 0.10
DIVERGENCE_RATIO = 1.5


@dataclass
class CoefficientField:
    """Truncated family {u_j}, j = 1..J, sharing one eigenvalue sequence."""

    modes: list
    spectrum: EigenvalueSequence

    def __post_init__(self):
        if len(self.modes) > len(self.spectrum):
            raise ValueError(
                f"{len(self.modes)} modes exceed spectrum length {len(self.spectrum)}")
        self._logsup_cache: dict = {}

    @property
    def J(self) -> int:
        return len(self.modes)

    def tilde_values(self) -> np.ndarray:
        return self.spectrum.tilde_values()[: self.J]

    @classmethod
    def from_generator(cls, spectrum: EigenvalueSequence, J: int, make) -> "CoefficientField":
        """Build modes via make(j, lam_j) for j = 1..J."""
        if J > len(spectrum):
            raise ValueError(f"J={J} exceeds spectrum length {len(spectrum)}")
        modes = [make(j, spectrum.lam(j)) for j in range(1, J + 1)]
        return cls(modes=modes, spectrum=spectrum)

    def log_sup_matrix(self, gamma_max: int, n_grid: int | None = None) -> np.ndarray:
        """W[j-1, gamma] = log sup_t |d^gamma u_j| (cached per grid choice)."""
        cached = self._logsup_cache.get(n_grid)
        if cached is None or cached.shape[1] < gamma_max + 1:
            out = np.empty((self.J, gamma_max + 1))
            done = 0
            if cached is not None:
                done = cached.shape[1]
                out[:, :done] = cached
            for i, u in enumerate(self.modes):
                for gamma in range(done, gamma_max + 1):
                    out[i, gamma] = log_sup_derivative(u, gamma, n_grid)
            self._logsup_cache[n_grid] = out
            cached = out
        return cached[:, : gamma_max + 1]

    def gevrey_values(self, sigma: float, eta: float, gamma_max: int) -> np.ndarray:
        return np.asarray([gevrey_norm(u, sigma, eta, gamma_max).value for u in self.modes])


def sk_norm(u, r: float, seq: EigenvalueSequence) -> float:
    """Series Sobolev norm (sum |u_j|^2 * tilde(lam_j)^(2r))^(1/2)."""
    u = np.asarray(u, dtype=np.complex128)
    if u.size > len(seq):
        raise ValueError(f"vector length {u.size} exceeds spectrum length {len(seq)}")
    lam = seq.tilde_values()[: u.size]
    return float(np.sqrt(np.sum(np.abs(u) ** 2 * lam ** (2.0 * r))))


# ------------------------------------------------------------------ envelope fit

@dataclass(frozen=True)
class EnvelopeFit:
    sigma: float
    C: float
    rel_residual: float
    envelope: np.ndarray     # z_gamma actually fitted (log scale, -inf where empty)

    def log_bound(self, gamma: int) -> float:
        return (gamma + 1) * math.log(self.C) + self.sigma * math.lgamma(gamma + 1)


def fit_factorial_envelope(z: np.ndarray) -> EnvelopeFit:
    """Fit z_gamma <= (gamma+1)*log C + sigma*lgamma(gamma+1), tight on the data.

    The factorial order sigma is read from first differences on the tail
    half of the gamma range, where dz_gamma = log C + sigma*log(gamma+1)
    holds without the small-gamma transient; C is then the smallest
    constant making the bound an upper envelope of the whole range.  The
    residual is the relative misfit of the difference regression, so
    super-factorial data (which no (sigma, C) captures) shows up as a
    large residual rather than a bogus certificate.
    """
    z = np.asarray(z, dtype=float)
    gammas = np.arange(z.size)
    finite = np.isfinite(z)

    def tight_constant(sigma: float) -> float:
        vals = (z[finite] - sigma * np.array([math.lgamma(v + 1) for v in gammas[finite]]))
        return float(np.max(vals / (gammas[finite] + 1.0)))

    if finite.sum() < 4:
        sigma = 1.0
        c_log = tight_constant(sigma) if finite.any() else 0.0
        return EnvelopeFit(sigma=sigma, C=math.exp(c_log), rel_residual=0.0, envelope=z)

    fin_idx = gammas[finite]
    consecutive = np.nonzero(np.diff(fin_idx) == 1)[0]
    dz_gamma = fin_idx[consecutive]                       # difference at gamma -> gamma+1
    dz = z[dz_gamma + 1] - z[dz_gamma]
    tail_from = max(1, fin_idx[-1] // 2)
    tail = dz_gamma >= tail_from
    if tail.sum() < 3:
        tail = np.ones_like(dz_gamma, dtype=bool)
    x = np.log(dz_gamma[tail] + 1.0)
    y = dz[tail]
    sigma, intercept = np.polyfit(x, y, 1)
    pred = sigma * x + intercept
    scale = max(1.0, float(np.max(np.abs(y))))
    rel = float(np.max(np.abs(pred - y))) / scale
    c_log = tight_constant(float(sigma))
    return EnvelopeFit(sigma=float(sigma), C=math.exp(c_log), rel_residual=rel, envelope=z)


# ------------------------------------------------------------------ condition (*)

@dataclass(frozen=True)
class SquareSumFit:
    """Result of the summed-over-j decay test at weight exponent M."""

    M: int
    gamma_max: int
    passed: bool
    sigma: float
    C: float
    rel_residual: float
    divergence_ratio: float
    failure: str | None = None
    sigma_raw: float = float("nan")


def condition_star(f_field: CoefficientField, M: int, gamma_max: int,
                   n_grid: int = 512, band: float = FIT_RESIDUAL_BAND) -> SquareSumFit:
    """Fit sup_t sum_j lam~^2M |d^gamma u_j(t)|^2 <= C^(2(gamma+1)) (gamma!)^(2 sigma).

    Fails when the j-sum shows a divergence trend (prefix sum at J vs J/2
    growing beyond the tolerated ratio) or the factorial fit leaves the
    residual band.
    """
    J = f_field.J
    lam = f_field.tilde_values()
    log_w = 2.0 * M * np.log(lam)
    half = max(1, J // 2)

    z_full = np.empty(gamma_max + 1)
    z_half = np.empty(gamma_max + 1)
    for gamma in range(gamma_max + 1):
        rows = np.empty((J, n_grid))
        for i, u in enumerate(f_field.modes):
            rows[i] = 2.0 * log_abs_derivative_on_grid(u, gamma, n_grid) + log_w[i]
        peak = rows.max()
        if not np.isfinite(peak):
            z_full[gamma] = -math.inf
            z_half[gamma] = -math.inf
            continue
        sums_full = np.log(np.sum(np.exp(rows - peak), axis=0)) + peak
        sums_half = np.log(np.sum(np.exp(rows[:half] - peak), axis=0)) + peak
        z_full[gamma] = 0.5 * float(np.max(sums_full))
        z_half[gamma] = 0.5 * float(np.max(sums_half))

    finite = np.isfinite(z_full)
    ratios = np.exp(2.0 * (z_full[finite] - z_half[finite])) if finite.any() else np.array([1.0])
    divergence = float(np.max(ratios, initial=1.0))
    fit = fit_factorial_envelope(z_full)
    if divergence > DIVERGENCE_RATIO:
        return SquareSumFit(M, gamma_max, False, fit.sigma, fit.C, fit.rel_residual,
                            divergence, failure="divergent-in-J", sigma_raw=fit.sigma)
    if fit.rel_residual > band:
        return SquareSumFit(M, gamma_max, False, fit.sigma, fit.C, fit.rel_residual,
                            divergence, failure="fit-residual", sigma_raw=fit.sigma)
    return SquareSumFit(M, gamma_max, True, max(fit.sigma, 1.0), fit.C,
                        fit.rel_residual, divergence, sigma_raw=fit.sigma)


# ------------------------------------------------------------------ condition (**)

@dataclass(frozen=True)
class PointwiseFit:
    """Result of the per-mode decay test at weight exponent M."""

    M: int
    gamma_max: int
    passed: bool
    sigma: float
    C: float
    rel_residual: float
    first_violation: tuple | None = None    # (j, gamma)
    failure: str | None = None
    envelope: np.ndarray | None = None
    sigma_raw: float = float("nan")


def condition_star_star(f_field: CoefficientField, M: int, gamma_max: int,
                        band: float = FIT_RESIDUAL_BAND,
                        n_grid: int | None = None) -> PointwiseFit:
    """Fit sup_t |d^gamma u_j| <= C^(gamma+1) (gamma!)^sigma lam~^(-M) per (j, gamma).

    Constants are fitted on the first half of the index range; the first
    pair (j, gamma), scanned j-major, that escapes the fitted bound by
    more than the residual band is reported as the violation.
    """
    J = f_field.J
    lam = f_field.tilde_values()
    W = f_field.log_sup_matrix(gamma_max, n_grid) + M * np.log(lam)[:, None]
    half = max(1, J // 2)

    with np.errstate(invalid="ignore"):
        envelope_head = np.max(W[:half], axis=0)
    fit = fit_factorial_envelope(envelope_head)
    if fit.rel_residual > band:
        return PointwiseFit(M, gamma_max, False, fit.sigma, fit.C, fit.rel_residual,
                            failure="fit-residual", envelope=envelope_head,
                            sigma_raw=fit.sigma)

    allowance = math.log(1.0 + band)
    bounds = np.asarray([fit.log_bound(g) for g in range(gamma_max + 1)])
    for i in range(J):
        over = np.nonzero(W[i] > bounds + allowance)[0]
        if over.size:
            return PointwiseFit(M, gamma_max, False, fit.sigma, fit.C, fit.rel_residual,
                                first_violation=(i + 1, int(over[0])),
                                failure="bound-violation", envelope=envelope_head,
                                sigma_raw=fit.sigma)
    return PointwiseFit(M, gamma_max, True, max(fit.sigma, 1.0), fit.C,
                        fit.rel_residual, envelope=envelope_head, sigma_raw=fit.sigma)


# ------------------------------------------------------------------ per-mode Gevrey decay

@dataclass(frozen=True)
class SeminormDecayReport:
    M: int
    B: float
    ok: bool
    per_j: np.ndarray
    first_violation: int | None = None


def seminorm_decay(f_field: CoefficientField, sigma: float, eta: float, M: int,
                   gamma_max: int = 8, band: float = FIT_RESIDUAL_BAND) -> SeminormDecayReport:
    """Check Gevrey seminorms of u_j against B * lam~^(-M), B fitted on the head."""
    norms = f_field.gevrey_values(sigma, eta, gamma_max)
    lam = f_field.tilde_values()
    weighted = norms * lam ** M
    half = max(1, f_field.J // 2)
    B = float(np.max(weighted[:half]))
    ok_per_j = weighted <= B * (1.0 + band)
    first = None
    bad = np.nonzero(~ok_per_j)[0]
    if bad.size:
        first = int(bad[0]) + 1
    return SeminormDecayReport(M=M, B=B, ok=bool(ok_per_j.all()), per_j=ok_per_j,
                               first_violation=first)


# ------------------------------------------------------------------ synthesis membership

@dataclass(frozen=True)
class SynthesisVerdict:
    member: bool
    Mprime_max: int
    slope: float
    norms: np.ndarray
    detail: str = ""


def synthesis_membership(f_field: CoefficientField, sigma: float = 2.0, eta: float = 8.0,
                         gamma_max: int = 6, Mprime_max: int = 4,
                         slope_tol: float = 0.2) -> SynthesisVerdict:
    """Decide super-polynomial decay of Gevrey seminorms by log-log slope.

    Member up to Mprime_max when the tail slope of log ||u_j|| against
    log j sits at or below -Mprime_max (within slope_tol); rejected with
    the stalling slope otherwise.
    """
    norms = f_field.gevrey_values(sigma, eta, gamma_max)
    J = f_field.J
    tail = np.arange(max(1, J // 2), J)
    pos = tail[norms[tail] > 0]
    if pos.size == 0:
        return SynthesisVerdict(True, Mprime_max, -math.inf, norms, "vacuous: tail vanishes")
    if pos.size == 1:
        slope = -math.inf if norms[pos[0]] < 1e-290 else 0.0
        return SynthesisVerdict(slope <= -Mprime_max + slope_tol, Mprime_max, slope, norms)
    x = np.log(pos + 1.0)
    y = np.log(norms[pos])
    slope = float(np.polyfit(x, y, 1)[0])
    member = slope <= -Mprime_max + slope_tol
    return SynthesisVerdict(member, Mprime_max, slope, norms)


# ------------------------------------------------------------------ distribution order

@dataclass(frozen=True)
class OrderFit:
    bounded: bool
    M: int | None
    B: float | None


def distribution_order_fit(norms, seq: EigenvalueSequence, M_cap: int = 16,
                           band: float = 1e-9) -> OrderFit:
    """Smallest integer M with norms_j / lam~^M bounded over the stored range.

    Boundedness is judged head-vs-tail: the tail half must not exceed the
    head maximum (up to band).  B is the overall supremum at the chosen M.
    """
    norms = np.asarray(norms, dtype=float)
    if np.any(norms < 0):
        raise ValueError("norms must be nonnegative")
    lam = seq.tilde_values()[: norms.size]
    half = max(1, norms.size // 2)
    for M in range(M_cap + 1):
        ratio = norms / lam ** M
        head = float(np.max(ratio[:half]))
        tail = float(np.max(ratio[half:], initial=0.0))
        if tail <= head * (1.0 + band) + band:
            return OrderFit(bounded=True, M=M, B=float(np.max(ratio)))
    return OrderFit(bounded=False, M=None, B=None)
