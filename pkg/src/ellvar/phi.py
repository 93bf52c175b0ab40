"""Catalog of admissible diffusion-coefficient families and condition checks.

Each family is a closed-form antiderivative F(s) with derivative
phi(s) = F'(s); the system's quasilinear operator uses phi evaluated at
(u^2+|grad u|^2)/2.  Fourteen parametric families are built in (ids 1..14);
ids 8..14 share the formulas of 1..7 but are meant for the strengthened
lower-bound condition that additionally needs rho0 > 2*rho1/(alpha+beta).
Family id 0 is the constant coefficient phi == A used as the semilinear
sanity case.

Five conditions are certified per family:

  phi1        0 < rho0 <= phi(s) <= rho1 on [0, inf)
  phi1_prime  phi1 and additionally 2*rho1/(alpha+beta) < rho0
  phi2        s -> F(s^2) strictly convex, checked through the equivalent
              requirement that t -> t*phi(t^2/2) is strictly increasing
  phi3        phi(s) converges to a positive limit as s -> inf
  phi4        F(s) >= phi(s)*s on [0, inf), with F the family's literal
              closed form (several families carry a nonzero constant at
              s = 0; the catalog's phi4 claims refer to that literal form)

Phi_eval returns the normalized antiderivative (value at 0 subtracted), the
one the energy functional integrates; Phi_literal keeps the raw closed form
used by the phi4 check.  Normalization shifts by a constant only and never
changes phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PhiSpec",
    "ConditionReport",
    "PhiParameterError",
    "phi_eval",
    "phi_derivative",
    "Phi_eval",
    "Phi_literal",
    "phi_limit",
    "phi_bounds",
    "family_in_paper_range",
    "certify",
    "ALL_FAMILY_IDS",
]

ALL_FAMILY_IDS = tuple(range(1, 15))

# base closed form used by each family id (8..14 repeat 1..7)
_BASE_FORM = {0: 0, 1: 1, 2: 2, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7,
              8: 1, 9: 2, 10: 3, 11: 4, 12: 5, 13: 6, 14: 7}

# which auxiliary parameters each base form consumes
_NEEDS_P = {2, 3, 5, 6, 7}
_NEEDS_R = {7}


class PhiParameterError(ValueError):
    """Unknown family id or parameter outside the formula's domain."""


@dataclass(frozen=True)
class PhiSpec:
    """One parametric coefficient family.

    family_id selects the closed form; A is the linear slope parameter;
    p and r are the auxiliary exponents (only the families that use them
    accept them).
    """

    family_id: int
    A: float
    p: float | None = None
    r: float | None = None

    def __post_init__(self):
        if self.family_id not in _BASE_FORM:
            raise PhiParameterError(f"unknown family_id {self.family_id}")
        form = _BASE_FORM[self.family_id]
        if form in _NEEDS_P:
            if self.p is None:
                raise PhiParameterError(f"family {self.family_id} needs parameter p")
            self._check_p_domain(form)
        elif self.p is not None:
            raise PhiParameterError(f"family {self.family_id} takes no parameter p")
        if form in _NEEDS_R:
            if self.r is None:
                raise PhiParameterError(f"family {self.family_id} needs parameter r")
            if self.r <= 0 or self.r == 1.0 or self.r == self.p:
                raise PhiParameterError(
                    f"family {self.family_id}: r must be positive, != 1 and != p"
                )
        elif self.r is not None:
            raise PhiParameterError(f"family {self.family_id} takes no parameter r")

    def _check_p_domain(self, form):
        p = self.p
        if form in (2, 6) and not p > 1:
            raise PhiParameterError(f"family {self.family_id}: needs p > 1")
        if form in (3, 5) and not (0 <= p < 1):
            raise PhiParameterError(f"family {self.family_id}: needs 0 <= p < 1")
        if form == 7 and (p < 0 or p == 1.0):
            raise PhiParameterError(f"family {self.family_id}: needs p >= 0, p != 1")


def _decay(s, e):
    # (1+s)^(-e), stable for large s
    return np.power(1.0 + np.asarray(s, dtype=float), -e)


def phi_eval(spec: PhiSpec, s):
    """Coefficient phi(s) = F'(s); s may be a scalar or array, s >= 0."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("phi is only defined for s >= 0")
    A, p, r = spec.A, spec.p, spec.r
    form = _BASE_FORM[spec.family_id]
    if form == 0:
        return np.full_like(s, A, dtype=float)
    if form == 1:
        return A + 1.0 / (1.0 + s)
    if form == 2:
        return A - _decay(s, p)
    if form == 3:
        return A + _decay(s, p)
    if form == 4:
        return A - 1.0 / (1.0 + s)
    if form == 5:
        return A - _decay(s, p)
    if form == 6:
        return A + _decay(s, p)
    return A + _decay(s, p) - _decay(s, r)


def phi_derivative(spec: PhiSpec, s):
    """Closed-form phi'(s), used for the convexity (phi2) sign check."""
    s = np.asarray(s, dtype=float)
    A, p, r = spec.A, spec.p, spec.r
    form = _BASE_FORM[spec.family_id]
    if form == 0:
        return np.zeros_like(s)
    if form == 1:
        return -1.0 / (1.0 + s) ** 2
    if form in (2, 5):
        return p * _decay(s, p + 1.0)
    if form in (3, 6):
        return -p * _decay(s, p + 1.0)
    if form == 4:
        return 1.0 / (1.0 + s) ** 2
    return -p * _decay(s, p + 1.0) + r * _decay(s, r + 1.0)


def _power_term(s, p):
    # (1/(1-p)) * (1+s)^(1-p); caller guarantees p != 1
    return (1.0 / (1.0 - p)) * np.power(1.0 + np.asarray(s, dtype=float), 1.0 - p)


def Phi_literal(spec: PhiSpec, s):
    """The family's raw closed-form antiderivative (may be nonzero at 0)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("Phi is only defined for s >= 0")
    A, p, r = spec.A, spec.p, spec.r
    form = _BASE_FORM[spec.family_id]
    if form == 0:
        return A * s
    if form == 1:
        return np.log1p(s) + A * s
    if form in (2, 5):
        return A * s - _power_term(s, p)
    if form in (3, 6):
        return A * s + _power_term(s, p)
    if form == 4:
        return A * s - np.log1p(s)
    return A * s + _power_term(s, p) - _power_term(s, r)


def _Phi_offset(spec: PhiSpec) -> float:
    return float(Phi_literal(spec, 0.0))


def Phi_eval(spec: PhiSpec, s):
    """Normalized antiderivative: integral of phi from 0 to s, exactly 0 at 0."""
    return Phi_literal(spec, s) - _Phi_offset(spec)


def phi_limit(spec: PhiSpec) -> float:
    """Closed-form limit of phi(s) as s -> infinity."""
    A, p = spec.A, spec.p
    form = _BASE_FORM[spec.family_id]
    if form in (0, 1, 4):
        return float(A)
    if form in (2, 5):
        return float(A) if p > 0 else float(A - 1.0)
    if form in (3, 6):
        return float(A) if p > 0 else float(A + 1.0)
    if form == 7:
        return float(A + (1.0 if p == 0 else 0.0))
    return float(A)


def phi_bounds(spec: PhiSpec) -> tuple[float, float]:
    """Exact infimum and supremum (rho0, rho1) of phi over [0, inf)."""
    A, p, r = spec.A, spec.p, spec.r
    form = _BASE_FORM[spec.family_id]
    if form == 0:
        return float(A), float(A)
    if form == 1:
        return float(A), float(A + 1.0)  # decreasing from A+1 to A
    if form in (2, 5):
        if p == 0:
            return float(A - 1.0), float(A - 1.0)
        return float(A - 1.0), float(A)  # increasing from A-1 to A
    if form in (3, 6):
        if p == 0:
            return float(A + 1.0), float(A + 1.0)
        return float(A), float(A + 1.0)  # decreasing from A+1 to A
    if form == 4:
        return float(A - 1.0), float(A)
    # form 7: phi = A + (1+s)^{-p} - (1+s)^{-r}; the difference term has a
    # single interior extremum at y* = (r/p)^{1/(r-p)} (y = 1+s)
    if p == 0:
        return float(A), float(A + 1.0)  # sup approached as s -> inf
    ystar = (r / p) ** (1.0 / (r - p))
    ext = ystar ** (-p) - ystar ** (-r)
    return float(A + min(0.0, ext)), float(A + max(0.0, ext))


def family_in_paper_range(spec: PhiSpec, ab_sum: float) -> bool:
    """Whether (A, p, r) sits inside the family's documented parameter range.

    Families 8..14 need ab_sum = alpha+beta > 2 of the target system; the
    ranges are sufficient conditions, not sharp boundaries.
    """
    A, p, r = spec.A, spec.p, spec.r
    fid = spec.family_id
    if fid == 0:
        return A > 0
    if fid == 1:
        return A > 1
    if fid == 2:
        return A > 1
    if fid == 3:
        return A > 0 if p <= 0.5 else A > 2 * p - 1
    if fid == 4:
        return A > 1
    if fid == 5:
        return A > 1
    if fid == 6:
        return A > 2 * p - 1
    if fid == 7:
        if p <= 0.5 and 0.5 < r < 1:
            return A > 0
        if 0 < r < 1 < p or 1 < p < r:
            return A > 2 * p
        return False
    if ab_sum <= 2:
        return False
    edge = 2.0 / (ab_sum - 2.0)
    full = ab_sum / (ab_sum - 2.0)
    if fid == 8:
        return A > edge
    if fid == 9:
        return A > full
    if fid == 10:
        return A > edge if p <= 0.5 else A > max(2 * p - 1, edge)
    if fid in (11, 12):
        return A > full
    if fid == 13:
        return A > max(2 * p - 1, edge)
    # fid == 14
    strong = (ab_sum + 2.0) / (ab_sum - 2.0)
    if p <= 0.5 and 0.5 < r < 1:
        return A > strong
    if 0 < r < 1 < p or 1 < p < r:
        return A > max(2 * p, strong)
    return False


# ----------------------------------------------------------- certification

_REL_STRICT = 1e-12  # relative margin for "strictly increasing" in phi2


@dataclass
class ConditionReport:
    """Certified bounds and pass/fail flags for one family instance."""

    rho0: float
    rho1: float
    phi_inf: float
    pass_phi1: bool
    pass_phi1_prime: bool
    pass_phi2: bool
    pass_phi3: bool
    pass_phi4: bool
    witnesses: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "rho0": self.rho0,
            "rho1": self.rho1,
            "phi_inf": self.phi_inf,
            "pass_phi1": self.pass_phi1,
            "pass_phi1_prime": self.pass_phi1_prime,
            "pass_phi2": self.pass_phi2,
            "pass_phi3": self.pass_phi3,
            "pass_phi4": self.pass_phi4,
            "witnesses": {k: [[float(s), float(v)] for s, v in w]
                          for k, w in self.witnesses.items()},
        }


def _sample_grid(s_max, n_samples):
    # 0 plus a log-spaced sweep; dense enough to pin interior extrema
    return np.concatenate(([0.0], np.logspace(-8, math.log10(s_max), n_samples - 1)))


def _worst(svals, viol, k=3):
    order = np.argsort(viol)[:k]
    return [(float(svals[i]), float(viol[i])) for i in order if viol[i] < 0]


def certify(spec: PhiSpec, ab_sum: float, s_max: float = 1e6,
            n_samples: int = 4096) -> ConditionReport:
    """Certify conditions phi1, phi1', phi2, phi3, phi4 at desk scale.

    Closed-form bounds are used for rho0/rho1/phi_inf and cross-checked by
    dense sampling on [0, s_max]; phi2 combines a strict-increase check of
    t*phi(t^2/2) on a log-spaced t grid with the sign of its analytic
    derivative; phi3 extrapolates the tail (Aitken) and compares it with the
    closed-form limit; phi4 samples F_literal(s) - phi(s)*s.
    """
    if ab_sum <= 2:
        raise ValueError("ab_sum must exceed 2")
    if n_samples < 100:
        raise ValueError("n_samples must be at least 100")
    if s_max <= 0:
        raise ValueError("s_max must be positive")

    witnesses: dict = {}
    svals = _sample_grid(s_max, n_samples)
    ph = phi_eval(spec, svals)

    rho0, rho1 = phi_bounds(spec)
    tol1 = 1e-9 * (1.0 + abs(rho1))
    pass_phi1 = rho0 > 0 and bool(np.all(ph >= rho0 - tol1)) and bool(
        np.all(ph <= rho1 + tol1))
    if not pass_phi1:
        low = ph - rho0 if rho0 <= 0 else np.minimum(ph - rho0, rho1 - ph)
        # when rho0 <= 0 the failure is the bound itself; witness the minimum
        if rho0 <= 0:
            i = int(np.argmin(ph))
            witnesses["phi1"] = [(float(svals[i]), float(ph[i]))]
        else:
            witnesses["phi1"] = _worst(svals, low)

    pass_phi1_prime = pass_phi1 and rho0 > 2.0 * rho1 / ab_sum
    if not pass_phi1_prime:
        witnesses.setdefault("phi1_prime", [(0.0, float(rho0 - 2.0 * rho1 / ab_sum))])

    # phi2 through the equivalent monotonicity of psi(t) = t*phi(t^2/2)
    tvals = np.logspace(-6, math.log10(math.sqrt(2.0 * s_max)), n_samples)
    psi = tvals * phi_eval(spec, tvals ** 2 / 2.0)
    diffs = np.diff(psi)
    scale = np.maximum(np.abs(psi[:-1]), 1.0)
    inc_ok = diffs > _REL_STRICT * scale
    dpsi = phi_eval(spec, tvals ** 2 / 2.0) + tvals ** 2 * phi_derivative(
        spec, tvals ** 2 / 2.0)
    der_ok = dpsi > 0
    pass_phi2 = bool(np.all(inc_ok)) and bool(np.all(der_ok))
    if not pass_phi2:
        bad = np.where(~der_ok)[0]
        if bad.size == 0:
            bad = np.where(~inc_ok)[0]
            witnesses["phi2"] = [(float(tvals[i] ** 2 / 2.0), float(diffs[i]))
                                 for i in bad[:3]]
        else:
            witnesses["phi2"] = [(float(tvals[i] ** 2 / 2.0), float(dpsi[i]))
                                 for i in bad[:3]]

    # phi3: Aitken extrapolation of the geometric tail vs the closed form
    phi_inf = phi_limit(spec)
    tail = phi_eval(spec, np.array([s_max / 16.0, s_max / 4.0, s_max]))
    d1, d2 = tail[1] - tail[0], tail[2] - tail[1]
    if abs(d2 - d1) < 1e-30:
        extrap = float(tail[2])
    else:
        extrap = float(tail[2] + d2 * d2 / (d1 - d2))
    converging = abs(d2) <= abs(d1) + 1e-30
    pass_phi3 = (converging and extrap > 0
                 and abs(extrap - phi_inf) <= 1e-3 * (1.0 + abs(phi_inf)))
    if not pass_phi3:
        witnesses["phi3"] = [(float(s_max), float(tail[2] - phi_inf))]

    # phi4 against the literal closed form (see module docstring)
    gap = Phi_literal(spec, svals) - ph * svals
    tol4 = 1e-12 * (1.0 + np.abs(Phi_literal(spec, svals)))
    viol = gap + tol4
    pass_phi4 = bool(np.all(viol >= 0))
    if not pass_phi4:
        witnesses["phi4"] = _worst(svals, gap)

    return ConditionReport(
        rho0=rho0, rho1=rho1, phi_inf=phi_inf,
        pass_phi1=pass_phi1, pass_phi1_prime=pass_phi1_prime,
        pass_phi2=pass_phi2, pass_phi3=pass_phi3, pass_phi4=pass_phi4,
        witnesses=witnesses,
    )
