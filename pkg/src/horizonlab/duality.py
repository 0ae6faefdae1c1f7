"""Vecton-scalaron duality: eliminate the Abelian gauge field on shell.

Given a nonlinear gauge coupling X(phi, psi; f2), the field equations trade
the vector for a scalar charge density q. The on-shell value fbar2 of the
field invariant solves

    2*fbar2 * X'(fbar2)**2 + q**2 = 0,      X' = dX/df2,

(the invariant is nonpositive for an electric-type field), and the scalaron
potential replacing the gauge term has the two equivalent closed forms

    X_eff = X(fbar2) - 2*fbar2*X'(fbar2) = X(fbar2) + q**2/X'(fbar2)
          = X(fbar2) + q*sqrt(-2*fbar2)      (sign-matched root).

Both are evaluated and must agree; the on-shell identities
d(X_eff)/dphi = dX/dphi |_fbar2 (and likewise for psi, and 0 for the metric)
are checked by central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from scipy.optimize import brentq

from . import exprs as ex
from .errors import AmbiguousBranch, BranchPointError, BranchSignError, DualityError, NoRealBranch
from .exact import as_exact
from .models import ModelSpec

COUPLING_VARIABLES = frozenset({"phi", "psi", "f2"})


@dataclass(frozen=True)
class GaugeCoupling:
    """Nonlinear gauge-field coupling X(phi, psi; f2) as an expression tree."""

    X: ex.Expr

    def __post_init__(self):
        bad = self.X.variables() - COUPLING_VARIABLES
        if bad:
            raise DualityError("coupling uses undeclared variables %s" % sorted(bad))
        object.__setattr__(self, "_Xp", ex.diff(self.X, "f2"))
        object.__setattr__(self, "_Xpp", ex.diff(ex.diff(self.X, "f2"), "f2"))
        object.__setattr__(self, "_Xphi", ex.diff(self.X, "phi"))
        object.__setattr__(self, "_Xpsi", ex.diff(self.X, "psi"))

    def value(self, phi, psi, f2) -> float:
        return float(ex.eval_scalar(self.X, {"phi": phi, "psi": psi, "f2": f2}))

    def xprime(self, phi, psi, f2) -> float:
        return float(ex.eval_scalar(self._Xp, {"phi": phi, "psi": psi, "f2": f2}))

    def xpp(self, phi, psi, f2) -> float:
        return float(ex.eval_scalar(self._Xpp, {"phi": phi, "psi": psi, "f2": f2}))

    def dphi(self, phi, psi, f2) -> float:
        return float(ex.eval_scalar(self._Xphi, {"phi": phi, "psi": psi, "f2": f2}))

    def dpsi(self, phi, psi, f2) -> float:
        return float(ex.eval_scalar(self._Xpsi, {"phi": phi, "psi": psi, "f2": f2}))


@dataclass(frozen=True)
class VectonField:
    """Light-cone vector components along a static trajectory."""

    a_u: float
    a_v: float


def coupling_d4(Lambda: float, lambda2: float) -> GaugeCoupling:
    """Weyl-frame spherical D=4 gauge coupling
    X = -2*Lambda*sqrt(phi)*(1 + lambda2*phi*f2/2)**(1/2)."""
    if Lambda == 0 or lambda2 == 0:
        raise DualityError("Lambda and lambda2 must be nonzero")
    from fractions import Fraction

    phi, f2 = ex.var("phi"), ex.var("f2")
    inner = ex.add(1, ex.mul(ex.const(Fraction(1, 2) * as_exact(lambda2)), phi, f2))
    X = ex.mul(ex.const(-2 * as_exact(Lambda)), ex.pow_(phi, Fraction(1, 2)), ex.sqrt(inner))
    return GaugeCoupling(X)


def coupling_d3(Lambda: float, lambda2: float) -> GaugeCoupling:
    """D=3 gauge coupling in the normalization whose dual matches the catalog
    scalaron potential: X = -2*Lambda*phi*(1 + lambda2*f2/4)."""
    if Lambda == 0 or lambda2 == 0:
        raise DualityError("Lambda and lambda2 must be nonzero")
    from fractions import Fraction

    phi, f2 = ex.var("phi"), ex.var("f2")
    X = ex.mul(
        ex.const(-2 * as_exact(Lambda)),
        phi,
        ex.add(1, ex.mul(ex.const(Fraction(1, 4) * as_exact(lambda2)), f2)),
    )
    return GaugeCoupling(X)


def x_eff_closed_d4(Lambda: float, lambda2: float, phi: float, q: float) -> float:
    return -2.0 * Lambda * math.sqrt(phi) * math.sqrt(
        1.0 + q * q / (lambda2 * Lambda * Lambda * phi * phi)
    )


def x_eff_closed_d3(Lambda: float, lambda2: float, phi: float, q: float) -> float:
    return -2.0 * Lambda * phi - q * q / (lambda2 * Lambda * phi)


def _residual(gc: GaugeCoupling, phi, psi, q, y) -> float:
    xp = gc.xprime(phi, psi, y)
    return 2.0 * y * xp * xp + q * q


def _residual_deriv(gc: GaugeCoupling, phi, psi, q, y) -> float:
    xp = gc.xprime(phi, psi, y)
    xpp = gc.xpp(phi, psi, y)
    return 2.0 * xp * xp + 4.0 * y * xp * xpp


def _scan_roots(gc, phi, psi, q, lo, hi, n=96):
    """Bracketed roots of the defining equation on [lo, hi] (hi <= 0)."""
    roots = []
    prev_y, prev_r = None, None
    for i in range(n + 1):
        y = lo + (hi - lo) * i / n
        try:
            r = _residual(gc, phi, psi, q, y)
        except (BranchPointError, ZeroDivisionError, OverflowError):
            prev_y, prev_r = None, None
            continue
        if prev_r is not None and r == 0.0 and y == hi:
            pass
        if prev_r is not None and (r < 0.0) != (prev_r < 0.0):
            roots.append(brentq(lambda t: _residual(gc, phi, psi, q, t), prev_y, y, xtol=1e-15, rtol=8.9e-16))
        prev_y, prev_r = y, r
    return roots


def _polish(gc, phi, psi, q, y) -> float:
    scale = 1.0 + q * q
    for _ in range(8):
        r = _residual(gc, phi, psi, q, y)
        if abs(r) <= 1e-14 * scale:
            break
        d = _residual_deriv(gc, phi, psi, q, y)
        if d == 0.0:
            break
        step = r / d
        y_new = y - step
        if y_new > 0.0:
            y_new = y / 2.0
        y = y_new
    return y


def solve_fbar(gc: GaugeCoupling, phi: float, psi: float, q: float) -> float:
    """On-shell gauge-field invariant fbar2 <= 0 for charge q.

    Newton from the weak-field estimate -q**2/(2*X'(0)**2) on the branch
    continuously connected to fbar2 = 0 at q = 0; falls back to bracketed
    scanning, and disambiguates multiple roots by homotopy in q.
    """
    if q == 0:
        return 0.0
    xp0 = gc.xprime(phi, psi, 0.0)
    if xp0 == 0.0:
        raise NoRealBranch("X' vanishes at zero field; no electric branch")
    guess = -q * q / (2.0 * xp0 * xp0)

    y = _polish(gc, phi, psi, q, guess)
    scale = 1.0 + q * q
    try:
        ok = abs(_residual(gc, phi, psi, q, y)) <= 1e-12 * scale and y <= 0.0
    except (BranchPointError, ZeroDivisionError, OverflowError):
        ok = False
    if ok:
        return y

    # bracketed fallback with geometric bracket growth
    B = 4.0 * abs(guess) + 1.0
    roots = []
    for _ in range(12):
        roots = _scan_roots(gc, phi, psi, q, -B, 0.0)
        if roots:
            break
        B *= 4.0
    if not roots:
        raise NoRealBranch(
            "no sign change of the defining equation for fbar2 in [-%g, 0]" % B
        )
    if len(roots) == 1:
        return _polish(gc, phi, psi, q, roots[0])

    # homotopy from small charge selects the branch connected to fbar2=0
    y = 0.0
    for step in range(1, 17):
        qs = q * step / 16.0
        y = _polish(gc, phi, psi, qs, y if y != 0.0 else -qs * qs / (2.0 * xp0 * xp0))
    if abs(_residual(gc, phi, psi, q, y)) <= 1e-10 * scale:
        best = min(roots, key=lambda r: abs(r - y))
        return _polish(gc, phi, psi, q, best)
    raise AmbiguousBranch(roots)


def x_eff(gc: GaugeCoupling, phi: float, psi: float, q: float) -> float:
    """Scalaron effective potential; both closed forms evaluated and required
    to agree to 1e-10 relative."""
    y = solve_fbar(gc, phi, psi, q)
    xval = gc.value(phi, psi, y)
    if q == 0:
        return xval
    xp = gc.xprime(phi, psi, y)
    form_a = xval + q * q / xp
    root = math.sqrt(max(-2.0 * y, 0.0))
    form_b_plus = xval + q * root
    form_b_minus = xval - q * root
    form_b = min((form_b_plus, form_b_minus), key=lambda v: abs(v - form_a))
    tol = 1e-10 * max(1.0, abs(form_a))
    if abs(form_a - form_b) > tol:
        raise BranchSignError(
            "effective-potential forms disagree: %r vs %r at (phi=%g, q=%g)"
            % (form_a, form_b, phi, q)
        )
    return form_a


@dataclass(frozen=True)
class IdentityReport:
    dphi_numeric: float
    dphi_partial: float
    dpsi_numeric: float
    dpsi_partial: float
    dh: float

    @property
    def residual_phi(self) -> float:
        return abs(self.dphi_numeric - self.dphi_partial)

    @property
    def residual_psi(self) -> float:
        return abs(self.dpsi_numeric - self.dpsi_partial)

    def max_residual(self) -> float:
        return max(self.residual_phi, self.residual_psi, abs(self.dh))


def verify_identities(
    gc: GaugeCoupling, phi: float, psi: float, q: float, h_step: float = 1e-4
) -> IdentityReport:
    """On-shell identity check: total derivatives of X_eff against partials
    of X at the frozen on-shell invariant; the metric derivative is zero by
    construction (X_eff takes no metric argument)."""

    def xe(p, s):
        return x_eff(gc, p, s, q)

    try:
        dphi_num = (xe(phi + h_step, psi) - xe(phi - h_step, psi)) / (2 * h_step)
        dpsi_num = (xe(phi, psi + h_step) - xe(phi, psi - h_step)) / (2 * h_step)
    except (NoRealBranch, AmbiguousBranch) as err:
        raise DualityError("stencil straddles branch point: %s" % err) from err
    y = solve_fbar(gc, phi, psi, q)
    return IdentityReport(
        dphi_numeric=dphi_num,
        dphi_partial=gc.dphi(phi, psi, y),
        dpsi_numeric=dpsi_num,
        dpsi_partial=gc.dpsi(phi, psi, y),
        dh=0.0,
    )


def reconstruct_vecton(model: ModelSpec, phi: float, q_dot: float) -> VectonField:
    """Vector components from the scalaron flow: a_u = qdot/(m2*phi),
    a_v = -qdot/(m2*phi) along a static trajectory."""
    if model.m2 == 0:
        raise DualityError(
            "massless limit: vecton gauge-ambiguous, q is a constant charge"
        )
    if phi <= 0:
        raise DualityError("vecton reconstruction needs phi > 0")
    m2phi = float(model.m2) * phi
    return VectonField(a_u=q_dot / m2phi, a_v=-q_dot / m2phi)


def field_tensor_lc(gc: GaugeCoupling, phi: float, psi: float, q: float, h: float) -> float:
    """Light-cone field tensor f_uv recovered from the defining relation
    q = X' * f_uv / h at the on-shell invariant."""
    y = solve_fbar(gc, phi, psi, q)
    xp = gc.xprime(phi, psi, y)
    if xp == 0.0:
        raise DualityError("X' vanishes on shell; field tensor undefined")
    return q * h / xp


def f01_from_lc(f_uv: float, h: float) -> float:
    """Space-time component of the field tensor from the light-cone one,
    f01 = eps*f_uv/2 with eps = |h|/h."""
    if h == 0:
        raise DualityError("metric factor vanishes; orientation undefined")
    eps = 1.0 if h > 0 else -1.0
    return 0.5 * eps * f_uv
