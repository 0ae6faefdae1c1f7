"""Global horizon theory for the massless sector.

With the scalaron frozen to a constant charge the static field equations
integrate once: h = C0**2 * (N0 - N(phi)) with N the antiderivative of the
potential, so horizons are roots of N0 - N. This module builds N (term-wise
symbolically where possible, quadrature otherwise), locates and classifies
horizon roots by derivative counting, and probes nonanalytic potentials for
fractional leading exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, root

from . import exprs as ex
from .errors import (
    BranchPointError,
    HorizonError,
    NotInvertible,
    PoleError,
    UnsupportedForm,
)
from .models import ModelSpec, build_srn
from .series import Series


class Regularity(Enum):
    REGULAR = "regular"
    SINGULAR = "singular"


@dataclass(frozen=True)
class HorizonRecord:
    phi0: float
    N0: float
    multiplicity: int
    regularity: Regularity
    leading_exponent: float
    flagged: bool = False  # derivative test inconclusive at tolerance boundary


@dataclass(frozen=True)
class Antiderivative:
    """N(phi) with N' = U. Either a closed-form expression tree or an
    adaptive-quadrature fallback anchored at phi_ref (then N(phi_ref) = 0)."""

    U: ex.Expr
    expr: Optional[ex.Expr]
    phi_ref: float
    quad_tol: float = 1e-12

    def __call__(self, phi: float) -> float:
        if self.expr is not None:
            return float(ex.eval_scalar(self.expr, {"phi": phi}))
        val, err = quad(
            lambda s: float(ex.eval_scalar(self.U, {"phi": s})),
            self.phi_ref,
            phi,
            epsabs=self.quad_tol,
            epsrel=self.quad_tol,
            limit=200,
        )
        return val

    @property
    def symbolic(self) -> bool:
        return self.expr is not None


def frozen_potential(model: ModelSpec, q0: Optional[float] = None, psi0: float = 0.0) -> ex.Expr:
    """U as a function of phi alone, with the scalaron charge and extra scalar
    frozen."""
    subs = {}
    variables = model.U.variables()
    if "q" in variables:
        subs["q"] = 0 if q0 is None else q0
    if "psi" in variables:
        subs["psi"] = psi0
    return ex.substitute(model.U, subs) if subs else model.U


def antiderivative_N(
    model: ModelSpec, q0: Optional[float] = None, psi0: float = 0.0, phi_ref: float = 1.0
) -> Antiderivative:
    """Antiderivative of the frozen potential; symbolic for sums of power
    laws, quadrature fallback otherwise."""
    U = frozen_potential(model, q0, psi0)
    try:
        nexpr = ex.integrate_power_sum(U, "phi")
    except UnsupportedForm:
        nexpr = None
    return Antiderivative(U=U, expr=nexpr, phi_ref=phi_ref)


def _derivative_chain(U: ex.Expr, count: int) -> List[ex.Expr]:
    """[U, U', U'', ...] in phi, i.e. N', N'', N''', ..."""
    out = [U]
    for _ in range(count):
        out.append(ex.diff(out[-1], "phi"))
    return out


def metric_from_N(
    model_or_N, N0: float, phi: float, C0: float = 1.0, q0: Optional[float] = None
) -> Tuple[float, float]:
    """Static metric h = C0**2*(N0 - N(phi)) and the coordinate-time
    integrand 1/(C0*(N0 - N(phi))). Raises at a horizon root."""
    N = model_or_N if isinstance(model_or_N, Antiderivative) else antiderivative_N(model_or_N, q0)
    gap = N0 - N(phi)
    if gap == 0.0:
        raise PoleError("phi=%g is a horizon root; integrand pole" % phi)
    return C0 * C0 * gap, 1.0 / (C0 * gap)


def _multiplicity_from_derivatives(
    U: ex.Expr, phi0: float, N0: float, tol_scale: float, max_order: int = 5
) -> Tuple[int, bool]:
    """Count consecutive vanishing derivatives of N beyond N(phi0)=N0.

    N' = U, N'' = U', ... A derivative counts as zero when its magnitude is
    below 1e-8 * max(1, |N0|); flagged when it falls in the gray zone within
    a decade of the threshold.
    """
    chain = _derivative_chain(U, max_order)
    tol = 1e-8 * tol_scale
    mult = 1
    flagged = False
    for i, d in enumerate(chain):
        val = abs(float(ex.eval_scalar(d, {"phi": phi0})))
        if val <= tol:
            mult = i + 2
            continue
        if val <= 10.0 * tol:
            flagged = True
        break
    return mult, flagged


def find_horizons(
    model: ModelSpec,
    N0: float,
    phi_range: Tuple[float, float],
    q0: Optional[float] = None,
    C0: float = 1.0,
    n_scan: int = 600,
) -> List[HorizonRecord]:
    """All horizon roots of N0 - N on the range, with multiplicity.

    Sign changes are bracketed on a log grid and refined; even-multiplicity
    roots (no sign change) are caught at critical points of N, i.e. roots of
    U, where |N0 - N| falls below tolerance.
    """
    lo, hi = phi_range
    if not (0.0 < lo < hi):
        raise HorizonError("phi range must satisfy 0 < lo < hi")
    N = antiderivative_N(model, q0)
    U = N.U

    def gap(phi):
        return N0 - N(phi)

    grid = np.geomspace(lo, hi, n_scan)
    gaps = np.array([gap(p) for p in grid])
    uvals = np.array([float(ex.eval_scalar(U, {"phi": p})) for p in grid])
    scale = max(1.0, abs(N0))
    roots: List[float] = []

    for i in range(len(grid) - 1):
        a, b = gaps[i], gaps[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif (a < 0.0) != (b < 0.0):
            roots.append(brentq(gap, grid[i], grid[i + 1], xtol=1e-15, rtol=8.9e-16))
    if gaps[-1] == 0.0:
        roots.append(float(grid[-1]))

    # touching roots: minima of |gap| at critical points of N
    for i in range(len(grid) - 1):
        if (uvals[i] < 0.0) != (uvals[i + 1] < 0.0):
            crit = brentq(
                lambda p: float(ex.eval_scalar(U, {"phi": p})),
                grid[i],
                grid[i + 1],
                xtol=1e-15,
                rtol=8.9e-16,
            )
            if abs(gap(crit)) <= 1e-8 * scale and not any(
                math.isclose(crit, r, rel_tol=1e-6, abs_tol=1e-12) for r in roots
            ):
                roots.append(crit)

    records = []
    for phi0 in sorted(set(roots)):
        rec = HorizonRecord(
            phi0=phi0,
            N0=N0,
            multiplicity=1,
            regularity=Regularity.REGULAR,
            leading_exponent=1.0,
        )
        records.append(classify_multiplicity(model, rec, q0=q0))
    return records


def classify_multiplicity(
    model: ModelSpec, rec: HorizonRecord, q0: Optional[float] = None
) -> HorizonRecord:
    """Derivative-count classification; nonanalytic potentials are marked
    singular and get a fitted leading exponent instead."""
    U = frozen_potential(model, q0)
    try:
        ex.eval_series(U, {"phi": Series.variable(rec.phi0, 4)})
    except (NotInvertible, BranchPointError):
        fit = singular_horizon_probe(model, rec.phi0, N0=rec.N0, q0=q0)
        return replace(
            rec,
            regularity=Regularity.SINGULAR,
            multiplicity=0,
            leading_exponent=fit.exponent,
        )
    mult, flagged = _multiplicity_from_derivatives(
        U, rec.phi0, rec.N0, max(1.0, abs(rec.N0))
    )
    return replace(
        rec,
        multiplicity=mult,
        regularity=Regularity.REGULAR,
        leading_exponent=float(mult),
        flagged=flagged,
    )


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    stderr: float
    window: Tuple[float, float]
    n_points: int


def fit_leading_exponent(
    h_of_offset: Callable[[float], float],
    window: Tuple[float, float] = (1e-5, 1e-3),
    n_points: int = 25,
    max_shrink: int = 6,
) -> ExponentFit:
    """Least-squares slope of log|h| vs log(offset) on a log-spaced window.

    The window is shrunk from above if h changes sign inside it (the fit only
    makes sense on a single-signed stretch); failure to find such a window is
    an error.
    """
    lo, hi = window
    for _ in range(max_shrink):
        xs = np.geomspace(lo, hi, n_points)
        hs = np.array([h_of_offset(float(x)) for x in xs])
        if np.any(hs == 0.0) or (np.any(hs > 0.0) and np.any(hs < 0.0)):
            hi = math.sqrt(lo * hi)
            continue
        logx = np.log(xs)
        logh = np.log(np.abs(hs))
        slope, intercept = np.polyfit(logx, logh, 1)
        resid = logh - (slope * logx + intercept)
        dof = max(n_points - 2, 1)
        sxx = float(np.sum((logx - logx.mean()) ** 2))
        stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
        return ExponentFit(float(slope), stderr, (float(lo), float(hi)), n_points)
    raise HorizonError("h changes sign throughout the fit window; no clean exponent")


def singular_horizon_probe(
    model: ModelSpec,
    phi0_guess: float,
    N0: Optional[float] = None,
    q0: Optional[float] = None,
    window: Tuple[float, float] = (1e-5, 1e-3),
) -> ExponentFit:
    """Leading exponent p of |h| ~ offset**p near phi0, from a log-log fit.

    Works for any potential, analytic or not; for nonanalytic ones the
    quadrature route is the only one available.
    """
    N = antiderivative_N(model, q0, phi_ref=phi0_guess)
    n_at = N(phi0_guess) if N.symbolic else 0.0
    n0 = n_at if N0 is None else N0

    def h_off(x: float) -> float:
        return n0 - N(phi0_guess + x)

    return fit_leading_exponent(h_off, window=window)


def degenerate_double_points(model: ModelSpec, phi_range=(1e-3, 1e3), q0=None) -> List[float]:
    """Roots of U on the range: candidate positions of double-degenerate
    horizons (each needs N0 tuned to N at the root)."""
    U = frozen_potential(model, q0)
    grid = np.geomspace(phi_range[0], phi_range[1], 600)
    vals = np.array([float(ex.eval_scalar(U, {"phi": p})) for p in grid])
    out = []
    for i in range(len(grid) - 1):
        if (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            out.append(
                brentq(
                    lambda p: float(ex.eval_scalar(U, {"phi": p})),
                    grid[i],
                    grid[i + 1],
                    xtol=1e-15,
                    rtol=8.9e-16,
                )
            )
    return out


@dataclass(frozen=True)
class TriplePoint:
    phi0: float
    Lambda: float
    relation_lhs: float  # |q0**2 * (2*Lambda)**(D-3)|
    relation_rhs: float  # (D-3)**(2*D-5)


def triple_degenerate_point(D: int, q0: float, k: int = 1) -> TriplePoint:
    """Solve U(phi0)=0, U'(phi0)=0 simultaneously for (phi0, Lambda) in the
    massless charged family, and report the parameter relation magnitudes."""
    if q0 == 0:
        raise HorizonError("triple degeneracy needs a nonzero charge")
    if D < 4:
        raise HorizonError("triple degeneracy needs D >= 4 (curvature term)")

    def system(unknowns):
        phi0, lam = unknowns
        if phi0 <= 0:
            return [1e6, 1e6]
        m = build_srn(D, lam, q0, k)
        u = float(ex.eval_scalar(m.U, {"phi": phi0}))
        up = float(ex.eval_scalar(m.U_phi, {"phi": phi0}))
        return [u, up]

    sol = root(system, x0=[q0 * q0, 0.3 / (q0 * q0)], tol=1e-14)
    if not sol.success:
        raise HorizonError("triple-degeneracy solve failed: %s" % sol.message)
    phi0, lam = float(sol.x[0]), float(sol.x[1])
    lhs = abs(q0 * q0 * (2.0 * lam) ** (D - 3))
    rhs = float((D - 3) ** (2 * D - 5))
    return TriplePoint(phi0=phi0, Lambda=lam, relation_lhs=lhs, relation_rhs=rhs)


def log_h_derivative_identity(model: ModelSpec, N0: float, phi: float, q0=None) -> float:
    """Residual of d(ln h)/dphi = -U/(N0 - N) at phi, by central differences.
    Diagnostic used in tests."""
    N = antiderivative_N(model, q0)
    step = 1e-6 * max(1.0, abs(phi))
    h_plus, _ = metric_from_N(N, N0, phi + step)
    h_minus, _ = metric_from_N(N, N0, phi - step)
    lhs = (math.log(abs(h_plus)) - math.log(abs(h_minus))) / (2 * step)
    u = float(ex.eval_scalar(N.U, {"phi": phi}))
    rhs = -u / (N0 - N(phi))
    return lhs - rhs
