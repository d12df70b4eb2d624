"""Nearest-integer gap scans and the non-Liouville condition.

The condition under test: there exist eps, C > 0 with
|tau - alpha * lam_j| >= C * j**(-eps) for every mode index j and every
integer tau.  Only the nearest integer matters, so everything reduces to
gap_j = dist(alpha * lam_j, Z).  Scans report truncated evidence: "holds
up to J" with the fitted (eps, C) when the running infimum of j**eps *
gap_j stays put across doubling checkpoints, "fails" when a gap vanishes
outright or a probed subsequence collapses every tested eps.

Double precision cannot see gaps of size 10**(-(k+1)!), so scans accept
exact rationals (fractions.Fraction) and arbitrary-precision reals
(mpmath) alongside floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp
import numpy as np

from .errors import PrecisionError
from .spectral import EigenvalueSequence

DEFAULT_EPSILONS = (0.5, 1.0, 2.0, 4.0)
STABILITY_FLOOR = 0.5
COLLAPSE_TOL = 1e-3
# relative floor under which a floating-point gap counts as an exact hit
ZERO_GAP_RTOL = 8.0


def _round_fraction(x: Fraction) -> int:
    """Nearest integer to an exact rational (ties to even)."""
    floor = x.numerator // x.denominator
    frac = x - floor
    if frac > Fraction(1, 2):
        return floor + 1
    if frac < Fraction(1, 2):
        return floor
    return floor if floor % 2 == 0 else floor + 1


def nearest_integer_gap(alpha, lam):
    """(tau, gap) with tau the nearest integer to alpha*lam, gap = |tau - alpha*lam|.

    Exact when alpha is a Fraction and lam is integral; arbitrary precision
    when either input is an mpmath number; plain floats otherwise.
    """
    lam_integral = isinstance(lam, (int, np.integer)) or (
        isinstance(lam, float) and lam.is_integer())
    if isinstance(alpha, Fraction) and lam_integral:
        x = alpha * int(lam)
        tau = _round_fraction(x)
        return tau, abs(x - tau)
    if isinstance(alpha, mp.mpf) or isinstance(lam, mp.mpf):
        x = mp.mpf(alpha) * (mp.mpf(lam) if not lam_integral else int(lam))
        tau = int(mp.nint(x))
        return tau, abs(x - tau)
    x = float(alpha) * float(lam)
    tau = round(x)
    return int(tau), abs(x - float(tau))


def _gap_log10(gap) -> float:
    """log10 of a gap that may be Fraction, mpf, or float (0 -> -inf)."""
    if gap == 0:
        return -math.inf
    if isinstance(gap, Fraction):
        return float(mp.log(mp.mpf(gap.numerator), 10) - mp.log(mp.mpf(gap.denominator), 10))
    return float(mp.log(mp.mpf(gap), 10))


@dataclass(frozen=True)
class EpsilonFit:
    """Running infimum of j**epsilon * gap_j with doubling-checkpoint history."""

    epsilon: float
    C: float
    argmin_j: int
    checkpoints: list
    stable: bool


@dataclass(frozen=True)
class ProbeEvidence:
    j: int
    tau: int
    gap_log10: float


@dataclass(frozen=True)
class DiophantineReport:
    alpha_label: str
    J: int
    epsilons: tuple
    gaps: np.ndarray          # columns: j, tau, gap (floats; tiny gaps flush to 0)
    fits: list
    verdict: str              # "holds-up-to-J" | "fails-evidence"
    holds_epsilon: float | None = None
    holds_C: float | None = None
    witness: list = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {
            "alpha": self.alpha_label,
            "J": self.J,
            "epsilons": list(self.epsilons),
            "per_eps": {
                str(f.epsilon): {
                    "C": f.C,
                    "argmin_j": f.argmin_j,
                    "checkpoints": [[int(a), float(b)] for a, b in f.checkpoints],
                    "stable": f.stable,
                } for f in self.fits
            },
            "verdict": self.verdict,
            "holds_epsilon": self.holds_epsilon,
            "holds_C": self.holds_C,
            "witness": [
                {"j": str(w.j), "tau": str(w.tau), "gap_log10": w.gap_log10}
                for w in self.witness
            ],
        }

    def to_csv_rows(self):
        return [(int(j), float(g)) for j, _, g in self.gaps]


def _scan_gaps(alpha, values: np.ndarray, precision_digits: int):
    """Per-j (tau, gap) for the stored spectrum; picks the arithmetic backend."""
    integral = np.all(values == np.round(values))
    if isinstance(alpha, Fraction) and integral:
        taus, gaps = [], []
        for lam in values:
            tau, gap = nearest_integer_gap(alpha, int(lam))
            taus.append(tau)
            gaps.append(gap)
        return taus, gaps
    if precision_digits > 15 or isinstance(alpha, mp.mpf):
        with mp.workdps(max(precision_digits, 25)):
            a = mp.mpf(alpha) if not isinstance(alpha, Fraction) else mp.mpf(alpha.numerator) / alpha.denominator
            taus, gaps = [], []
            for lam in values:
                x = a * mp.mpf(float(lam))
                tau = int(mp.nint(x))
                taus.append(tau)
                gaps.append(abs(x - tau))
            return taus, gaps
    a = float(alpha)
    x = a * values
    taus = np.round(x)
    gaps = np.abs(x - taus)
    return taus.astype(np.int64).tolist(), gaps.tolist()


def check_condition_A(alpha, seq: EigenvalueSequence, J: int | None = None,
                      epsilons=DEFAULT_EPSILONS, probes=None,
                      precision_digits: int = 15,
                      stability_floor: float = STABILITY_FLOOR,
                      collapse_tol: float = COLLAPSE_TOL,
                      alpha_label: str | None = None) -> DiophantineReport:
    """Scan gap_j = dist(alpha * lam_j, Z) for j <= J and judge the evidence.

    probes: optional mode indices beyond the dense scan (spectrum must be
    the identity lam_j = j there), evaluated exactly / in high precision.
    Failure is declared when a gap vanishes, or when the probes drive
    j**eps * gap below collapse_tol for every tested eps.
    """
    if not epsilons or any(e <= 0 for e in epsilons):
        raise ValueError("epsilons must be a nonempty collection of positive reals")
    J = J or len(seq)
    if J > len(seq):
        raise ValueError(f"J={J} exceeds stored spectrum length {len(seq)}")
    values = seq.values[:J]
    label = alpha_label or str(alpha)

    taus, gaps = _scan_gaps(alpha, values, precision_digits)
    gaps_f = np.asarray([float(g) for g in gaps])
    scale = np.maximum(1.0, np.abs(float(alpha) * values)) if _is_floatable(alpha) else np.ones(J)
    exact_backend = isinstance(gaps[0], (Fraction, mp.mpf)) if gaps else False
    if exact_backend:
        zero_idx = [i for i, g in enumerate(gaps) if g == 0]
    else:
        zero_idx = np.nonzero(gaps_f <= ZERO_GAP_RTOL * np.finfo(float).eps * scale)[0].tolist()

    gap_table = np.column_stack([np.arange(1, J + 1), np.asarray(taus, dtype=float), gaps_f])

    j_idx = np.arange(1, J + 1, dtype=float)
    checkpoints_j = sorted({max(1, J // 8), max(1, J // 4), max(1, J // 2), J})
    fits = []
    for eps in epsilons:
        if exact_backend:
            logw = np.asarray([eps * math.log10(j) + _gap_log10(g)
                               for j, g in zip(range(1, J + 1), gaps)])
            weighted = np.asarray([10.0 ** max(v, -300.0) if v > -math.inf else 0.0 for v in logw])
        else:
            weighted = j_idx ** eps * gaps_f
        prefix_min = np.minimum.accumulate(weighted)
        cp = [(cj, float(prefix_min[cj - 1])) for cj in checkpoints_j]
        c_last = float(prefix_min[-1])
        c_first = cp[0][1]
        stable = c_last > 0 and (c_first == 0 or c_last >= stability_floor * c_first)
        fits.append(EpsilonFit(epsilon=float(eps), C=c_last,
                               argmin_j=int(np.argmin(weighted)) + 1,
                               checkpoints=cp, stable=stable))

    witness: list[ProbeEvidence] = []
    if zero_idx:
        for i in zero_idx[:10]:
            witness.append(ProbeEvidence(j=i + 1, tau=int(taus[i]), gap_log10=-math.inf))
        return DiophantineReport(label, J, tuple(epsilons), gap_table, fits,
                                 "fails-evidence", witness=witness)

    if probes:
        if not np.all(values == np.arange(1, J + 1)):
            raise ValueError("probes require the identity spectrum lam_j = j")
        probe_rows = []
        for pj in probes:
            tau, gap = nearest_integer_gap(_as_exact(alpha, precision_digits), int(pj))
            probe_rows.append(ProbeEvidence(j=int(pj), tau=tau, gap_log10=_gap_log10(gap)))
        collapse_all = all(
            min(eps * math.log10(row.j) + row.gap_log10 for row in probe_rows)
            <= math.log10(collapse_tol)
            for eps in epsilons
        )
        if collapse_all:
            return DiophantineReport(label, J, tuple(epsilons), gap_table, fits,
                                     "fails-evidence", witness=probe_rows)
        witness = probe_rows

    stable_fits = [f for f in fits if f.stable]
    if stable_fits:
        best = min(stable_fits, key=lambda f: f.epsilon)
        return DiophantineReport(label, J, tuple(epsilons), gap_table, fits,
                                 "holds-up-to-J", holds_epsilon=best.epsilon,
                                 holds_C=best.C, witness=witness)

    # no eps stabilized: report the record-minima subsequence of the smallest eps
    eps0 = min(epsilons)
    weighted = j_idx ** eps0 * gaps_f
    records = []
    best = math.inf
    for i, w in enumerate(weighted):
        if w < best:
            best = w
            records.append(ProbeEvidence(j=i + 1, tau=int(taus[i]),
                                         gap_log10=_gap_log10(gaps[i])))
    return DiophantineReport(label, J, tuple(epsilons), gap_table, fits,
                             "fails-evidence", witness=records[-10:])


def _is_floatable(alpha) -> bool:
    try:
        float(alpha)
        return True
    except (OverflowError, TypeError, ValueError):
        return False


def _as_exact(alpha, precision_digits: int):
    if isinstance(alpha, (Fraction, mp.mpf)):
        return alpha
    return mp.mpf(alpha)


# ------------------------------------------------------------------ construction

@dataclass(frozen=True)
class LiouvilleCertificateEntry:
    k: int
    j: int                   # 10**(k!)
    tau: int
    gap: Fraction            # exact
    bound: Fraction          # 2 * 10**(k! - (k+1)!)

    @property
    def gap_log10(self) -> float:
        return _gap_log10(self.gap)


@dataclass(frozen=True)
class LiouvilleConstruction:
    alpha: Fraction
    depth: int
    entries: list

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    def probe_indices(self):
        return [e.j for e in self.entries]


def construct_liouville(depth: int, max_digits: int = 100000) -> LiouvilleConstruction:
    """alpha = sum_{k<=depth} 10**(-k!) with an exact per-level gap certificate.

    Level k certifies j_k = 10**(k!), tau_k = nearest integer to alpha*j_k,
    and gap_k <= 2 * 10**(k! - (k+1)!); the final level has gap exactly 0
    because the truncated sum is rational with denominator 10**(depth!).
    Exact rational arithmetic is used throughout, which needs about
    (depth+1)! decimal digits.
    """
    if depth < 2:
        raise ValueError(f"depth must be >= 2, got {depth}")
    required = math.factorial(depth + 1) + 10
    if required > max_digits:
        raise PrecisionError(
            f"depth {depth} needs about {required} decimal digits (cap {max_digits})",
            required_digits=required)
    alpha = sum((Fraction(1, 10 ** math.factorial(k)) for k in range(1, depth + 1)),
                Fraction(0))
    entries = []
    for k in range(1, depth + 1):
        j = 10 ** math.factorial(k)
        x = alpha * j
        tau = _round_fraction(x)
        gap = abs(x - tau)
        bound = Fraction(2, 10 ** (math.factorial(k + 1) - math.factorial(k)))
        if gap > bound:
            raise AssertionError(f"certificate bound violated at level {k}")
        entries.append(LiouvilleCertificateEntry(k=k, j=j, tau=tau, gap=gap, bound=bound))
    return LiouvilleConstruction(alpha=alpha, depth=depth, entries=entries)


# ------------------------------------------------------------------ CLI parsing

NAMED_ALPHAS = ("sqrt2", "golden", "pi", "e")


def parse_alpha(spec, precision_digits: int = 15):
    """Resolve an alpha literal: named constant, rational, decimal, or liouville:K."""
    if isinstance(spec, (int, float, Fraction, mp.mpf)):
        return spec, str(spec)
    text = str(spec).strip()
    if text.startswith("liouville:"):
        depth = int(text.split(":", 1)[1])
        return construct_liouville(depth).alpha, text
    with mp.workdps(max(precision_digits, 25)):
        if text == "sqrt2":
            return mp.sqrt(2) if precision_digits > 15 else math.sqrt(2.0), text
        if text == "golden":
            val = (1 + mp.sqrt(5)) / 2
            return val if precision_digits > 15 else float(val), text
        if text == "pi":
            return mp.pi + 0 if precision_digits > 15 else math.pi, text
        if text == "e":
            return mp.e + 0 if precision_digits > 15 else math.e, text
    if "/" in text:
        num, den = text.split("/")
        return Fraction(int(num), int(den)), text
    try:
        return Fraction(text), text  # exact decimal literal
    except ValueError as exc:
        raise ValueError(f"cannot parse alpha literal {spec!r}") from exc
