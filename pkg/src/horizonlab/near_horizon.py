"""Local power-series solution of the static equations around a horizon.

In the dilaton parametrization the static system reads

    q' = P/Zbar,   (chi*P)' = -H*U_q/2,   chi' = -H*U,   H' = -H*P**2/Zbar,

with chi the dilaton flow rate, H = h/chi, P = p/chi, and prime = d/dphi.
At a regular horizon (U and Zbar nonvanishing) every unknown is analytic in
the offset x = phi - phi0 with chi(0) = 0, and matching powers of x gives a
triangular recurrence: at each order first the next chi coefficient, then the
momentum ratio coefficient from the (chi*P) relation, then the scalaron and
metric-ratio coefficients. The free data are exactly (phi0, q0, H0); the
leading momentum ratio P0 = U_q/(2U) at the horizon is forced, not free.

Double-degenerate horizons (U and U_q both vanishing at the point) shift the
whole ladder by one power: chi and h start at x**2 and the momentum relation
becomes an affine equation for the trailing P coefficient, solved per order.

Everything here is plain coefficient algebra over the series engine, exact
when the model and the initial data are rational.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Tuple

from . import exprs as ex
from .errors import DegenerateHorizonError, HigherDegeneracyError, HorizonLabError
from .exact import Number, as_exact, exact_div, is_exact
from .models import ModelSpec
from .series import Series, radius_estimate

_DEGENERACY_RTOL = 1e-11


@dataclass(frozen=True)
class NearHorizonState:
    """Series solution around a horizon. h = H*chi coefficient-wise; chi and
    h always start at zero."""

    model: ModelSpec
    phi0: Number
    q0: Number
    H0: Number
    order: int
    chi: Series
    H: Series
    q: Series
    P: Series
    psi0: Number = 0
    degenerate: bool = False

    @property
    def h(self) -> Series:
        return (self.H * self.chi).truncate(self.order)

    def radius_estimate(self) -> float:
        return radius_estimate(self.chi)

    def leading(self) -> dict:
        """First nontrivial coefficients, handy for pinning worked examples."""
        return {
            "chi1": self.chi.coeffs[1],
            "P0": self.P.coeffs[0],
            "q1": self.q.coeffs[1],
            "H1": self.H.coeffs[1],
        }


def _conv(a: List[Number], b: List[Number], n: int) -> Number:
    """Coefficient n of the product of two coefficient lists (missing entries
    are zero)."""
    acc = 0
    for i in range(n + 1):
        if i < len(a) and (n - i) < len(b):
            acc += a[i] * b[n - i]
    return acc


def _conv3(a: List[Number], b: List[Number], c: List[Number], n: int) -> Number:
    acc = 0
    for i in range(n + 1):
        if i >= len(a):
            continue
        inner = _conv(b, c, n - i)
        acc += a[i] * inner
    return acc


class _PotentialTable:
    """Series coefficients of U, U_q and 1/Zbar re-expanded against the
    current (partial) scalaron series, zero-padded to the working order.
    The padding never leaks into coefficients at or below the known order:
    a padded q coefficient at index m only enters orders > m through the
    chain term proportional to U_q at the base point times that coefficient,
    which by construction multiplies orders above the ones consumed each
    step. Tests assert this triangularity directly."""

    def __init__(self, model: ModelSpec, phi0: Number, psi0: Number, order: int):
        self.model = model
        self.order = order
        self.phi_series = Series.variable(phi0, order)
        self.psi_series = Series.constant(psi0, phi0, order)

    def expand(self, q_coeffs: List[Number]) -> Tuple[List[Number], List[Number], List[Number]]:
        padded = list(q_coeffs) + [0] * (self.order + 1 - len(q_coeffs))
        qs = Series(self.phi_series.base_point, tuple(padded[: self.order + 1]))
        bind = {"phi": self.phi_series, "q": qs, "psi": self.psi_series}
        u = ex.eval_series(self.model.U, bind)
        uq = ex.eval_series(self.model.U_q, bind)
        zinv = ex.eval_series(self.model.zbar_inv, bind)
        return list(u.coeffs), list(uq.coeffs), list(zinv.coeffs)


def _require_regular(u0: Number, uq0: Number, scale: float):
    tol = _DEGENERACY_RTOL * scale
    if abs(float(u0)) <= tol:
        if abs(float(uq0)) <= tol:
            raise DegenerateHorizonError(
                "U and U_q vanish at the horizon: use the degenerate branch"
            )
        raise DegenerateHorizonError(
            "no regular expansion: U vanishes at the horizon while U_q does "
            "not, so the leading momentum ratio diverges"
        )


def init_quadruple(model: ModelSpec, phi0: Number, q0: Number, H0: Number, psi0: Number = 0) -> NearHorizonState:
    """Order-1 state from the forced leading coefficients:
    chi1 = -U0*H0, P0 = Uq0/(2*U0), q1 = zinv0*P0, H1 = -zinv0*P0**2*H0."""
    phi0, q0, H0 = as_exact(phi0), as_exact(q0), as_exact(H0)
    table = _PotentialTable(model, phi0, psi0, 1)
    u, uq, zinv = table.expand([q0])
    u0, uq0, z0 = u[0], uq[0], zinv[0]
    scale = max(1.0, abs(float(u0)), abs(float(uq0)))
    _require_regular(u0, uq0, scale)
    chi1 = -u0 * H0
    P0 = exact_div(uq0, 2 * u0)
    q1 = z0 * P0
    H1 = -z0 * P0 * P0 * H0
    return NearHorizonState(
        model=model,
        phi0=phi0,
        q0=q0,
        H0=H0,
        order=1,
        chi=Series(phi0, (0, chi1)),
        H=Series(phi0, (H0, H1)),
        q=Series(phi0, (q0, q1)),
        P=Series(phi0, (P0,)),
        psi0=psi0,
    )


def extend_to_order(state: NearHorizonState, N: int) -> NearHorizonState:
    """Extend a regular order-1 state through order N.

    Solve order per step: the next chi coefficient from the chi relation,
    then the trailing P coefficient from the momentum relation (divide by
    chi1 after subtracting the known convolution terms), then q, then H; the
    potentials are re-expanded against the updated scalaron series each step.
    """
    if state.degenerate:
        raise HorizonLabError("state is on the degenerate branch; already complete")
    if N <= state.order:
        return state
    model = state.model
    chi = list(state.chi.coeffs[:2])  # chi[0] = 0
    H = list(state.H.coeffs[:2])
    q = list(state.q.coeffs[:2])
    P = list(state.P.coeffs[:1])
    chi1 = chi[1]
    if chi1 == 0:
        raise HorizonLabError("internal: vanishing horizon slope on the regular branch")
    table = _PotentialTable(model, state.phi0, state.psi0, N)

    for n in range(1, N + 1):
        u, uq, zinv = table.expand(q)
        # chi_{n+1} from the chi relation at order n
        chi_next = exact_div(-_conv(u, H, n), n + 1)
        chi.append(chi_next)
        # P_n from the momentum relation at order n
        target = exact_div(-_conv(uq, H, n), 2 * (n + 1))
        known = 0
        for m in range(2, n + 2):
            idx = n + 1 - m
            if idx < len(P):
                known += chi[m] * P[idx]
        P.append(exact_div(target - known, chi1))
        if n == N:
            break  # scratch step: only P_N is needed at the last order
        q.append(exact_div(_conv(zinv, P, n), n + 1))
        H.append(exact_div(-_conv3(zinv, _sq(P, n), H, n), n + 1))

    return NearHorizonState(
        model=model,
        phi0=state.phi0,
        q0=state.q0,
        H0=state.H0,
        order=N,
        chi=Series(state.phi0, tuple(chi[: N + 1])),
        H=Series(state.phi0, tuple(H[: N + 1])),
        q=Series(state.phi0, tuple(q[: N + 1])),
        P=Series(state.phi0, tuple(P[: N + 1])),
        psi0=state.psi0,
    )


def _sq(P: List[Number], order: int) -> List[Number]:
    return [_conv(P, P, k) for k in range(order + 1)]


def expand(model: ModelSpec, phi0, q0, H0, order: int = 16, psi0=0) -> NearHorizonState:
    """Route to the regular or the double-degenerate branch automatically."""
    try:
        return extend_to_order(init_quadruple(model, phi0, q0, H0, psi0), order)
    except DegenerateHorizonError as err:
        if "degenerate branch" in str(err):
            return extend_degenerate(model, phi0, q0, H0, order, psi0)
        raise


def extend_degenerate(
    model: ModelSpec, phi0, q0, H0, N: int, psi0=0
) -> NearHorizonState:
    """Series at a double-degenerate horizon: U and U_q vanish at the point,
    chi and h start at the second power of the offset.

    The momentum relation no longer determines P at the same order; the
    trailing P coefficient enters affinely (directly, and through the
    scalaron coefficient it feeds), so each order solves a scalar linear
    equation evaluated at two trial values. Validated by residual closure.
    """
    if N < 2:
        raise DegenerateHorizonError("degenerate expansion needs order >= 2")
    phi0, q0, H0 = as_exact(phi0), as_exact(q0), as_exact(H0)
    table = _PotentialTable(model, phi0, psi0, N + 1)
    u, uq, zinv = table.expand([q0])
    scale = max(1.0, abs(float(u[1])) if len(u) > 1 else 1.0)
    if abs(float(u[0])) > _DEGENERACY_RTOL * scale or abs(float(uq[0])) > _DEGENERACY_RTOL * scale:
        raise DegenerateHorizonError(
            "not a double-degenerate point: U or U_q does not vanish"
        )
    if len(u) > 1 and abs(float(u[1])) <= _DEGENERACY_RTOL:
        raise HigherDegeneracyError(
            "higher degeneracy: unsupported (the first potential coefficient "
            "also vanishes)"
        )

    chi: List[Number] = [as_exact(0), as_exact(0)]  # chi1 = 0
    H: List[Number] = [H0]
    q: List[Number] = [q0]
    P: List[Number] = []

    for n in range(1, N + 1):
        u, uq, zinv = table.expand(q)
        chi_next = exact_div(-_conv(u, H, n), n + 1)
        chi.append(chi_next)
        if n == 1 and chi_next == 0:
            raise HigherDegeneracyError(
                "higher degeneracy: unsupported (quadratic metric coefficient vanishes)"
            )
        chi2 = chi[2]

        def momentum_residual(p_trial: Number):
            P_try = P + [p_trial]
            q_try = q + [exact_div(_conv(zinv, P_try, n - 1), n)]
            H_try = H + [exact_div(-_conv3(zinv, _sq(P_try, n - 1), H, n - 1), n)]
            u2, uq2, _ = table.expand(q_try)
            lhs = 2 * (n + 1) * _conv(chi, P_try, n + 1)
            rhs = -_conv(uq2, H_try, n)
            return lhs - rhs

        r0 = momentum_residual(as_exact(0))
        r1 = momentum_residual(as_exact(1))
        slope = r1 - r0
        if slope == 0 or (isinstance(slope, float) and abs(slope) < 1e-14):
            raise DegenerateHorizonError(
                "degenerate momentum relation is singular at order %d" % n
            )
        p_new = exact_div(-r0, slope)
        if isinstance(p_new, float):
            # one secant refinement soaks up the tolerance-size quadratic
            # contamination from the nearly-vanishing U_q at the point
            r_new = momentum_residual(p_new)
            if r_new != 0.0 and r_new != r1 and p_new != 1.0:
                p_new = p_new - r_new * (1.0 - p_new) / (r1 - r_new)
        P.append(p_new)
        q.append(exact_div(_conv(zinv, P, n - 1), n))
        H.append(exact_div(-_conv3(zinv, _sq(P, n - 1), H, n - 1), n))
        # recompute chi_{n+1} against the committed scalaron series; exact
        # arithmetic leaves it unchanged, floats pick up the tolerance-size
        # correction from the nearly-vanishing U_q at the point
        u, uq, zinv = table.expand(q)
        chi[n + 1] = exact_div(-_conv(u, H, n), n + 1)

    return NearHorizonState(
        model=model,
        phi0=phi0,
        q0=q0,
        H0=H0,
        order=N,
        chi=Series(phi0, tuple(chi[: N + 1])),
        H=Series(phi0, tuple(H[: N + 1])),
        q=Series(phi0, tuple(q[: N + 1])),
        P=Series(phi0, tuple(P)),  # trailing momentum coefficient lags one order
        psi0=psi0,
        degenerate=True,
    )


class ResidualSeries(NamedTuple):
    scalaron: Series       # q' - P/Zbar
    momentum: Series       # (chi*P)' + H*U_q/2
    dilaton_flow: Series   # chi' + H*U
    metric_ratio: Series   # H' + H*P**2/Zbar


def residual(state: NearHorizonState) -> ResidualSeries:
    """Left-minus-right of the four flow equations, as series.

    For a state produced by the recurrences every coefficient through order
    N-1 vanishes (identically in exact mode); this is the primary
    self-consistency oracle.
    """
    n = state.order
    table = _PotentialTable(state.model, state.phi0, state.psi0, n)
    u, uq, zinv = table.expand(list(state.q.coeffs))
    base = state.phi0
    u_s = Series(base, tuple(u))
    uq_s = Series(base, tuple(uq))
    zinv_s = Series(base, tuple(zinv))
    chi, H, q, P = state.chi, state.H, state.q, state.P
    r_q = q.differentiate() - (P * zinv_s).truncate(n - 1)
    r_p = (chi * P).differentiate() + ((H * uq_s) * Fraction(1, 2)).truncate(n - 1)
    r_chi = chi.differentiate() + (H * u_s).truncate(n - 1)
    r_H = H.differentiate() + (H * P * P * zinv_s).truncate(n - 1)
    return ResidualSeries(r_q, r_p, r_chi, r_H)


def constraint_residual(state: NearHorizonState) -> Series:
    """Energy-constraint combination chi*H'/H + chi' + H*U + chi*P**2/Zbar as
    a series; it is not imposed by the recurrence and must vanish on its own."""
    n = state.order
    table = _PotentialTable(state.model, state.phi0, state.psi0, n)
    u, _, zinv = table.expand(list(state.q.coeffs))
    base = state.phi0
    u_s = Series(base, tuple(u))
    zinv_s = Series(base, tuple(zinv))
    chi, H, P = state.chi, state.H, state.P
    term1 = (chi * H.differentiate()) * H.recip().truncate(n - 1)
    term2 = chi.differentiate()
    term3 = (H * u_s).truncate(n - 1)
    term4 = (chi * P * P * zinv_s).truncate(n - 1)
    return term1 + term2 + term3 + term4


def max_scaled_residual(state: NearHorizonState, through_order: Optional[int] = None) -> float:
    """max_k |residual_k| / max(1, coefficient scale at k) over all four
    equations, through the requested order (default: everything available)."""
    res = residual(state)
    worst = 0.0
    # per-order scale from the largest ingredient coefficient magnitudes
    mags = [
        [abs(float(c)) for c in s.coeffs]
        for s in (
            state.chi.differentiate(),
            state.q.differentiate(),
            state.H.differentiate(),
            (state.chi * state.P).differentiate(),
        )
    ]
    for r in res:
        hi = r.order if through_order is None else min(through_order, r.order)
        for k in range(hi + 1):
            scale = max([1.0] + [m[k] for m in mags if k < len(m)])
            worst = max(worst, abs(float(r.coeffs[k])) / scale)
    return worst


def assert_exact_closure(state: NearHorizonState):
    """Exact-mode check: every residual coefficient is identically zero."""
    if not (state.chi.is_exact() and state.H.is_exact() and state.q.is_exact()):
        raise HorizonLabError("state is not exact-rational; nothing to assert")
    for r in residual(state):
        for c in r.coeffs:
            if c != 0:
                raise HorizonLabError("exact residual is nonzero: %r" % c)


# -- integrable linear-scalaron closed form -------------------------------------------


@dataclass(frozen=True)
class LinearScalaronMap:
    """Closed-form static solution for a linear scalaron potential U = g*q
    with unit-magnitude kinetic normalization and frozen dilaton prefactors:
    the metric is exponential in coordinate time, h = exp(a + b*tau), and

        q(h)   = q0 + h*(g/(2*b**2))
        off(h) = q0*h*(g/b**2) - h**2*(g**2/(8*b**4))

    with off the dilaton offset from the horizon value. q0 != 0 gives a
    regular simple horizon; q0 = 0 gives h ~ +-sqrt(|off|).
    """

    g: float
    b: float
    q0: float

    def __post_init__(self):
        if self.b == 0:
            raise HorizonLabError("exponential rate b must be nonzero")

    def q_of_h(self, h: float) -> float:
        return self.q0 + h * (self.g / (2.0 * self.b**2))

    def offset_of_h(self, h: float) -> float:
        g, b, q0 = self.g, self.b, self.q0
        return q0 * h * (g / b**2) - h * h * (g * g / (8.0 * b**4))

    def __call__(self, h: float) -> Tuple[float, float]:
        return self.q_of_h(h), self.offset_of_h(h)

    def h_of_offset(self, off: float) -> float:
        """Invert on the branch with h -> 0 as the offset vanishes."""
        g, b, q0 = self.g, self.b, self.q0
        if q0 == 0.0:
            disc = -8.0 * b**4 * off / (g * g)
            if disc < 0:
                raise HorizonLabError("offset out of range for the charge-free branch")
            return math.sqrt(disc)
        disc = q0 * q0 - off / 2.0
        if disc < 0:
            raise HorizonLabError("offset beyond the turning point; no real metric")
        s = 1.0 if q0 > 0 else -1.0
        return (4.0 * b**2 / g) * (q0 - s * math.sqrt(disc))


def solve_linear_scalaron(g: float, b: float, q0: float, a: float = 0.0) -> LinearScalaronMap:
    """Closed-form map h -> (q, dilaton offset) for the integrable linear
    scalaron model; a is the additive constant in ln h = a + b*tau."""
    return LinearScalaronMap(g=g, b=b, q0=q0)
