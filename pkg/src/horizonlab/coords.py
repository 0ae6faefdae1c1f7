"""Coordinate charts around horizons.

The static light-cone metric -4*h*du*dv degenerates at a horizon together
with the coordinate time tau(phi) = int dphi/chi, which diverges
logarithmically there. Rescaling both chiral coordinates exponentially with
the horizon slope chi1 gives a Kruskal-type chart (a, b) = (exp(chi1*u),
exp(chi1*v)) in which the metric factor

    h_sk = h / (chi1**2 * a*b),     a*b = offset * exp(int (chi1/chi - 1/x) dx)

is finite and nonzero across any simple regular horizon, with limit
-1/U(phi0). For the massless sector the same factor has a closed quadrature
form that the series must reproduce order by order. The Schwarzschild-form
metric in (r, t) follows from phi = r**(D-2) and the inverse Weyl rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from . import exprs as ex
from .errors import DegenerateHorizonError, HorizonLabError, PoleError
from .horizons import Antiderivative, antiderivative_N
from .models import ModelSpec
from .near_horizon import NearHorizonState
from .series import Series


@dataclass(frozen=True)
class SKChart:
    """Kruskal-type chart data at a simple horizon. ab_series is the smooth
    factor of a*b with the linear offset taken out (constant term 1);
    h_sk_series has constant term -1/U at the horizon."""

    chi1: float
    ab_series: Series
    h_sk_series: Series

    def ab(self, offset) -> float:
        return offset * self.ab_series.eval_offset(offset)

    def h_sk(self, offset) -> float:
        return self.h_sk_series.eval_offset(offset)


def sk_chart(state: NearHorizonState) -> SKChart:
    """Chart from a near-horizon series state; needs a simple horizon."""
    chi = state.chi
    chi1 = chi.coeffs[1]
    if chi1 == 0 or state.degenerate:
        raise DegenerateHorizonError("SK chart undefined for degenerate horizon")
    # chi1/chi - 1/x = (chi1 - chi/x) / (chi/x) / x, a regular series; the
    # numerator is built with an exactly-vanishing constant term
    chi_over_x = chi.divide_by_offset()
    num = Series.constant(chi1, chi.base_point, chi_over_x.order) - chi_over_x
    integrand = (num / chi_over_x).divide_by_offset()
    ab_series = integrand.integrate(0).exp()
    h = state.h
    h_over_x = h.divide_by_offset()
    h_sk_series = h_over_x / ((chi1 * chi1) * ab_series)
    return SKChart(chi1=chi1, ab_series=ab_series, h_sk_series=h_sk_series)


def tau_of_phi(
    chi: Callable[[float], float],
    phi_a: float,
    phi_b: float,
    phi0: Optional[float] = None,
    chi1: Optional[float] = None,
    tol: float = 1e-12,
) -> float:
    """Coordinate time between two dilaton values, int dphi/chi.

    The interval must not contain a horizon (a root of chi); with phi0/chi1
    supplied the logarithmic part near that horizon is split off analytically
    and integrated exactly, which keeps the quadrature accurate arbitrarily
    close to the endpoint.
    """
    if phi_a == phi_b:
        return 0.0
    lo, hi = min(phi_a, phi_b), max(phi_a, phi_b)
    sign = 1.0 if phi_b >= phi_a else -1.0
    n_check = 64
    grid = np.linspace(lo, hi, n_check)
    vals = [chi(float(p)) for p in grid]
    for i in range(n_check - 1):
        if vals[i] == 0.0 or (vals[i] < 0.0) != (vals[i + 1] < 0.0):
            root_loc = brentq(chi, grid[i], grid[i + 1]) if vals[i] != 0.0 else grid[i]
            raise PoleError("chi has a root near phi=%g inside the interval" % root_loc)
    if phi0 is None or chi1 is None or chi1 == 0.0:
        val, _ = quad(lambda p: 1.0 / chi(p), phi_a, phi_b, epsabs=tol, epsrel=tol, limit=200)
        return val
    # regularized integrand plus the exact log of the linearized factor
    def reg(p):
        return 1.0 / chi(p) - 1.0 / (chi1 * (p - phi0))

    val, _ = quad(reg, phi_a, phi_b, epsabs=tol, epsrel=tol, limit=200)
    val += math.log(abs((phi_b - phi0) / (phi_a - phi0))) / chi1
    return val


def massless_chi(model: ModelSpec, N0: float, C0: float = 1.0, q0=None) -> Callable[[float], float]:
    """Dilaton flow rate chi(phi) = C0*(N0 - N(phi)) of the massless sector."""
    N = antiderivative_N(model, q0)

    def chi(phi: float) -> float:
        return C0 * (N0 - N(phi))

    return chi


def sk_closed_form_massless(
    model: ModelSpec,
    N0: float,
    phi: float,
    phi0: float,
    C0: float = 1.0,
    q0=None,
    tol: float = 1e-13,
) -> float:
    """Closed quadrature form of the Kruskal metric factor for the massless
    sector, normalized like the series chart (a*b/offset -> 1 at the horizon).

    h_sk(phi) = h(phi) / (chi1**2 * offset * exp(chi1 * T(phi))) with
    T the regularized time integral vanishing at phi0. At phi = phi0 the
    exact limit -1/U(phi0) is returned.
    """
    N = antiderivative_N(model, q0, phi_ref=phi0)
    u0 = float(ex.eval_scalar(N.U, {"phi": phi0}))
    if u0 == 0.0:
        raise DegenerateHorizonError("degenerate horizon: closed Kruskal form undefined")
    chi1 = -C0 * u0
    offset = phi - phi0
    if offset == 0.0:
        return -1.0 / u0

    def chi(p: float) -> float:
        return C0 * (N0 - N(p))

    def reg(p: float) -> float:
        return 1.0 / chi(p) - 1.0 / (chi1 * (p - phi0))

    t_reg, _ = quad(reg, phi0, phi, epsabs=tol, epsrel=tol, limit=400)
    h = C0 * C0 * (N0 - N(phi))
    return h / (chi1 * chi1 * offset * math.exp(chi1 * t_reg))


def schwarzschild_metric(
    model: ModelSpec,
    source: Union[NearHorizonState, float],
    r: float,
    C0: float = 1.0,
    q0=None,
) -> Tuple[float, float]:
    """Metric functions (H_s, chi_s) of the Schwarzschild-form line element

        ds**2 = -(D-2) * H_s * (dr**2/chi_s - chi_s*dt**2)

    at radius r, with phi = r**(D-2). `source` is either a near-horizon
    series state (local chart) or a mass constant N0 for the massless sector
    (global chart). chi_s = 0 at a horizon radius is a horizon crossing, not
    an error.
    """
    if r <= 0:
        raise HorizonLabError("radius must be positive")
    D = model.D
    nu = 1.0 / (D - 2)
    phi = r ** (D - 2)
    if isinstance(source, NearHorizonState):
        chi_val = float(source.chi.eval(phi))
        H_val = float(source.H.eval(phi))
    else:
        N0 = float(source)
        N = antiderivative_N(model, q0)
        chi_val = C0 * (N0 - N(phi))
        H_val = C0
    chi_s = nu * chi_val * r ** (3 - D)
    return H_val, chi_s


# -- orientation conventions -------------------------------------------------------


def eps_of_h(h: float) -> float:
    """Orientation sign |h|/h distinguishing static from time-dependent
    regions."""
    if h == 0:
        raise HorizonLabError("orientation undefined at a horizon (h = 0)")
    return 1.0 if h > 0 else -1.0


def rt_from_lc(u: float, v: float, eps: float) -> Tuple[float, float]:
    """(t, r) from light-cone coordinates: t = u + eps*v, r = u - eps*v."""
    return u + eps * v, u - eps * v


def lc_from_rt(t: float, r: float, eps: float) -> Tuple[float, float]:
    """Inverse of rt_from_lc."""
    return 0.5 * (t + r), 0.5 * eps * (t - r)
