"""Synthetic eigenvalue sequences with Weyl-law growth.

The elliptic operator driving the time-periodic problems enters every
computation only through its eigenvalues, so the spectrum is modeled
directly: either from the two-branch Weyl asymptotics (power law for
distinct order components, ``(j/log j)`` power law for equal ones) or as
a user-supplied nondecreasing sequence with an optional polynomial
growth certificate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InconsistentKernelError, InvalidModelError


@dataclass(frozen=True)
class WeylModel:
    """Two-component order model (m, mu) in dimension d with overall scale."""

    m: float
    mu: float
    d: int
    scale: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.mu > 0):
            raise InvalidModelError(f"order components must be positive, got m={self.m}, mu={self.mu}")
        if not (isinstance(self.d, (int, np.integer)) and self.d >= 1):
            raise InvalidModelError(f"dimension must be a positive integer, got d={self.d}")
        if not self.scale > 0:
            raise InvalidModelError(f"scale must be positive, got {self.scale}")

    @property
    def exponent(self) -> float:
        """Power of j governing eigenvalue growth."""
        return min(self.m, self.mu) / self.d


@dataclass(frozen=True)
class GrowthCertificate:
    """Polynomial sandwich K' j^rho' <= lambda_j <= K j^rho on the stored range."""

    K: float
    rho: float
    K_prime: float
    rho_prime: float

    def as_tuple(self):
        return (self.K, self.rho, self.K_prime, self.rho_prime)


@dataclass(frozen=True)
class EigenvalueSequence:
    """Finite truncation of a nondecreasing eigenvalue sequence.

    The first ``kernel_dim`` entries may vanish (kernel of the operator);
    all later entries must be positive.  ``growth``, when present, is a
    certificate that the polynomial sandwich holds for every stored index.
    """

    values: np.ndarray
    kernel_dim: int = 0
    growth: GrowthCertificate | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.size == 0:
            raise InvalidModelError("eigenvalue sequence must be a nonempty 1-d array")
        if self.kernel_dim < 0 or self.kernel_dim > vals.size:
            raise InconsistentKernelError(
                f"kernel_dim={self.kernel_dim} outside [0, {vals.size}]"
            )
        if np.any(np.diff(vals) < 0):
            raise InvalidModelError("eigenvalues must be nondecreasing")
        if np.any(vals[self.kernel_dim:] <= 0):
            raise InvalidModelError("eigenvalues beyond the kernel must be positive")
        if self.growth is not None:
            ok, violations = _check_sandwich(vals, self.growth)
            if not ok:
                raise InvalidModelError(
                    f"growth certificate fails at indices {violations[:5]}"
                )

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def J(self) -> int:
        return len(self)

    def lam(self, j: int) -> float:
        """Eigenvalue at 1-based index j."""
        return float(self.values[j - 1])

    def tilde_values(self) -> np.ndarray:
        """Eigenvalues with the kernel block replaced by ones."""
        out = self.values.copy()
        out[: self.kernel_dim] = 1.0
        return out

    def to_json(self) -> str:
        payload = {
            "values": [float(v) for v in self.values],
            "kernel_dim": int(self.kernel_dim),
            "growth": list(self.growth.as_tuple()) if self.growth else None,
        }
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EigenvalueSequence":
        payload = json.loads(text)
        growth = payload.get("growth")
        return cls(
            values=np.asarray(payload["values"], dtype=float),
            kernel_dim=int(payload.get("kernel_dim", 0)),
            growth=GrowthCertificate(*growth) if growth else None,
        )

    def to_csv_rows(self):
        """Rows (j, lambda_j) for CSV export."""
        return [(j + 1, float(v)) for j, v in enumerate(self.values)]


def _check_sandwich(values: np.ndarray, cert: GrowthCertificate):
    j = np.arange(1, values.size + 1, dtype=float)
    lower = cert.K_prime * j ** cert.rho_prime
    upper = cert.K * j ** cert.rho
    bad = np.nonzero((values < lower) | (values > upper))[0] + 1
    return bad.size == 0, bad.tolist()


def generate_weyl(model: WeylModel, J: int, kernel_dim: int = 0) -> EigenvalueSequence:
    """Generate lambda_j, j = 1..J, from the Weyl-law model.

    Distinct order components give ``scale * j**(min(m,mu)/d)``.  Equal
    components give ``scale * (j/log j)**(m/d)`` for j >= 2; the formula
    is undefined at j = 1, where the value is pinned to ``scale``.
    """
    if J < 1:
        raise InvalidModelError(f"J must be >= 1, got {J}")
    p = model.exponent
    j = np.arange(1, J + 1, dtype=float)
    if model.m != model.mu:
        values = model.scale * j ** p
        growth = GrowthCertificate(model.scale, p, model.scale, p)
    else:
        values = np.empty(J)
        values[0] = model.scale
        if J >= 2:
            jj = j[1:]
            values[1:] = model.scale * (jj / np.log(jj)) ** p
        # j/log j dips below its j=2 value at j=3 (and only there, since
        # 4/log 4 = 2/log 2); a running maximum restores monotonicity, which
        # the counting function's sorted search relies on.
        values = np.maximum.accumulate(values)
        # Empirical constants on the truncation; the exponent pair carries
        # the slack the log factor needs.
        rho, rho_prime = p, 0.9 * p
        K = float(np.max(values / j ** rho)) * (1.0 + 1e-12)
        K_prime = float(np.min(values / j ** rho_prime)) * (1.0 - 1e-12)
        growth = GrowthCertificate(K, rho, K_prime, rho_prime)
    return EigenvalueSequence(values=values, kernel_dim=kernel_dim, growth=growth)


def tilde(seq: EigenvalueSequence) -> EigenvalueSequence:
    """Replace the kernel block by ones (making all weights invertible)."""
    if seq.kernel_dim > len(seq):
        raise InconsistentKernelError(
            f"kernel_dim={seq.kernel_dim} exceeds J={len(seq)}"
        )
    values = seq.tilde_values()
    growth = seq.growth
    if growth is not None and not _check_sandwich(values, growth)[0]:
        growth = None
    return EigenvalueSequence(values=values, kernel_dim=0, growth=growth)


def counting_function(seq: EigenvalueSequence, lam: float) -> int:
    """Number of stored eigenvalues <= lam."""
    return int(np.searchsorted(seq.values, lam, side="right"))


@dataclass(frozen=True)
class GrowthReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def verify_growth(seq: EigenvalueSequence, K: float, rho: float,
                  K_prime: float, rho_prime: float) -> GrowthReport:
    """Scan the sandwich K' j^rho' <= lambda_j <= K j^rho over all stored j."""
    if min(K, rho, K_prime, rho_prime) <= 0:
        raise InvalidModelError("sandwich constants and exponents must be positive")
    ok, violations = _check_sandwich(seq.values, GrowthCertificate(K, rho, K_prime, rho_prime))
    return GrowthReport(ok=ok, violations=violations)
