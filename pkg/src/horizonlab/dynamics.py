"""Numerical integration of the static field equations.

Two equivalent parametrizations are integrated with an adaptive high-order
Runge-Kutta pair (DOP853, dense output):

* coordinate time tau: state (phi, chi, h, q, p, psi, eta_m). The metric is
  evolved through ln|h| using the redundant metric-variation equation
  (ln h)'' = -h*U_phi + (d/dphi of the inverse kinetic functions contracted
  with the momenta), which makes the energy expression
      chi * hdot/h + h*U + p**2/Zbar + eta**2/Z
  a genuine first integral whose drift is monitored along the trajectory.

* dilaton phi: state (chi, H, q, P); valid between horizons only (chi = 0
  stops integration with a horizon-approach event). Here the energy
  constraint is built into the metric-ratio equation, so the meaningful
  cross-check is agreement with the tau flow, which the tests enforce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import exprs as ex
from .errors import ConstraintError, HorizonLabError, IntegrationError, PoleError
from .models import ModelSpec
from .near_horizon import NearHorizonState
from .series import radius_estimate


@dataclass(frozen=True)
class StateTau:
    """State of the coordinate-time flow. eta_m is the extra-scalar momentum,
    frozen at zero unless the model carries a kinetic function Z. hdot is
    optional: when omitted it is solved from the energy constraint (chi must
    then be nonzero); when given, the constraint is checked and violations
    are rejected."""

    phi: float
    chi: float
    h: float
    q: float = 0.0
    p: float = 0.0
    psi: float = 0.0
    eta_m: float = 0.0
    hdot: Optional[float] = None


@dataclass(frozen=True)
class StatePhi:
    """State of the dilaton flow: H = h/chi and P = p/chi."""

    phi: float
    chi: float
    H: float
    q: float = 0.0
    P: float = 0.0
    warn_beyond_radius: bool = False
    trunc_error: float = 0.0


@dataclass
class Trajectory:
    var: str  # "tau" or "phi"
    t: np.ndarray
    columns: dict
    constraint: np.ndarray
    events: List[dict] = field(default_factory=list)
    sol: object = None  # dense output, private use

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    def max_constraint_violation(self) -> float:
        return float(np.max(np.abs(self.constraint))) if len(self.constraint) else 0.0


class _ModelFns:
    """Scalar evaluators for the potential, its partials and the inverse
    kinetic functions, shared by both flows."""

    def __init__(self, model: ModelSpec):
        self.model = model
        self._has_psi = model.Z is not None

    def _bind(self, phi, q, psi):
        return {"phi": phi, "q": q, "psi": psi}

    def U(self, phi, q, psi=0.0):
        return float(ex.eval_scalar(self.model.U, self._bind(phi, q, psi)))

    def U_phi(self, phi, q, psi=0.0):
        return float(ex.eval_scalar(self.model.U_phi, self._bind(phi, q, psi)))

    def U_q(self, phi, q, psi=0.0):
        return float(ex.eval_scalar(self.model.U_q, self._bind(phi, q, psi)))

    def U_psi(self, phi, q, psi=0.0):
        return float(ex.eval_scalar(self.model.U_psi, self._bind(phi, q, psi)))

    def zinv(self, phi):
        return float(ex.eval_scalar(self.model.zbar_inv, {"phi": phi}))

    def zinv_phi(self, phi):
        return float(ex.eval_scalar(self.model.zbar_inv_phi, {"phi": phi}))

    def Z(self, phi):
        if not self._has_psi:
            return None
        return float(ex.eval_scalar(self.model.Z, {"phi": phi}))

    def Z_phi(self, phi):
        return float(ex.eval_scalar(self.model.Z_phi, {"phi": phi}))


def energy_constraint(model: ModelSpec, st: StateTau) -> float:
    """chi*hdot/h + h*U + Zbar*qdot**2 + Z*psidot**2 in momentum variables."""
    fns = _ModelFns(model)
    if st.hdot is None:
        raise ConstraintError("energy evaluation needs hdot")
    value = st.chi * st.hdot / st.h + st.h * fns.U(st.phi, st.q, st.psi)
    value += st.p * st.p * fns.zinv(st.phi)
    z = fns.Z(st.phi)
    if z is not None and st.eta_m != 0.0:
        value += st.eta_m * st.eta_m / z
    return value


def _resolve_hdot(model: ModelSpec, st: StateTau, tol: float) -> float:
    fns = _ModelFns(model)
    if st.h == 0.0:
        raise IntegrationError("cannot start a tau trajectory on a horizon (h = 0)")
    rest = st.h * fns.U(st.phi, st.q, st.psi) + st.p * st.p * fns.zinv(st.phi)
    z = fns.Z(st.phi)
    if z is not None and st.eta_m != 0.0:
        rest += st.eta_m * st.eta_m / z
    if st.hdot is not None:
        violation = st.chi * st.hdot / st.h + rest
        scale = max(1.0, abs(rest), abs(st.chi * st.hdot / st.h))
        if abs(violation) > 100.0 * tol * scale:
            raise ConstraintError(
                "initial data violate the energy constraint by %.3e" % violation
            )
        return st.hdot
    if st.chi == 0.0:
        raise ConstraintError("turning point (chi = 0): hdot is not determined, supply it")
    return -rest * st.h / st.chi

def integrate_tau(
    model: ModelSpec,
    init: StateTau,
    tau_span: Tuple[float, float],
    tol: float = 1e-10,
    max_step: float = np.inf,
    n_samples: int = 200,
) -> Trajectory:
    """Integrate the coordinate-time flow with constraint monitoring.

    Events: horizon approach (|h| falling below 1e-8 of its initial size) and
    dilaton origin (phi -> 0) stop integration and are logged.
    """
    fns = _ModelFns(model)
    hdot0 = _resolve_hdot(model, init, tol)
    h_sign = 1.0 if init.h > 0 else -1.0
    has_psi = model.Z is not None
    y0 = [
        init.phi,
        init.chi,
        math.log(abs(init.h)),
        hdot0 / init.h,
        init.q,
        init.p,
        init.psi,
        init.eta_m,
    ]

    def rhs(_t, y):
        phi, chi, ell, g, q, p, psi, eta = y
        h = h_sign * math.exp(ell)
        u = fns.U(phi, q, psi)
        zinv = fns.zinv(phi)
        dphi = chi
        dchi = -h * u
        dell = g
        dg = -h * fns.U_phi(phi, q, psi) - p * p * fns.zinv_phi(phi)
        dq = p * zinv
        dp = -0.5 * h * fns.U_q(phi, q, psi)
        if has_psi:
            z = fns.Z(phi)
            zphi = fns.Z_phi(phi)
            dg += eta * eta * zphi / (z * z)
            dpsi = eta / z
            deta = -0.5 * h * fns.U_psi(phi, q, psi)
        else:
            dpsi = 0.0
            deta = 0.0
        return [dphi, dchi, dell, dg, dq, dp, dpsi, deta]

    ell_floor = math.log(abs(init.h)) + math.log(1e-8)

    def ev_horizon(_t, y):
        return y[2] - ell_floor

    ev_horizon.terminal = True

    def ev_origin(_t, y):
        return y[0] - 1e-9

    ev_origin.terminal = True

    sol = solve_ivp(
        rhs,
        tau_span,
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        max_step=max_step,
        events=[ev_horizon, ev_origin],
    )
    if sol.status == -1:
        raise IntegrationError("integration failed: %s" % sol.message)

    t_end = sol.t[-1]
    ts = np.linspace(tau_span[0], t_end, n_samples)
    ys = sol.sol(ts)
    phi, chi, ell, g, q, p, psi, eta = ys
    h = h_sign * np.exp(ell)
    constraint = np.empty_like(ts)
    for i in range(len(ts)):
        c = chi[i] * g[i] + h[i] * fns.U(phi[i], q[i], psi[i]) + p[i] * p[i] * fns.zinv(phi[i])
        if has_psi and eta[i] != 0.0:
            c += eta[i] * eta[i] / fns.Z(phi[i])
        constraint[i] = c

    events = []
    if sol.t_events[0].size:
        events.append({"kind": "horizon_approach", "tau": float(sol.t_events[0][0])})
    if sol.t_events[1].size:
        events.append({"kind": "dilaton_origin", "tau": float(sol.t_events[1][0])})

    return Trajectory(
        var="tau",
        t=ts,
        columns={
            "phi": phi,
            "chi": chi,
            "h": h,
            "hdot_over_h": g,
            "q": q,
            "p": p,
            "psi": psi,
            "eta_m": eta,
        },
        constraint=constraint,
        events=events,
        sol=sol,
    )


def integrate_phi(
    model: ModelSpec,
    init: StatePhi,
    phi_span: Tuple[float, float],
    tol: float = 1e-10,
    n_samples: int = 200,
) -> Trajectory:
    """Integrate the dilaton flow; phi is only a valid evolution parameter
    while chi keeps its sign, so a chi zero-crossing stops the run."""
    fns = _ModelFns(model)
    if init.chi == 0.0:
        raise IntegrationError("dilaton flow cannot start at a horizon (chi = 0)")
    chi_floor = 1e-8 * abs(init.chi)
    y0 = [init.chi, init.H, init.q, init.P]

    def rhs(phi, y):
        chi, H, q, P = y
        u = fns.U(phi, q)
        zinv = fns.zinv(phi)
        dchi = -H * u
        dH = -H * P * P * zinv
        dq = P * zinv
        dP = (H * u * P - 0.5 * H * fns.U_q(phi, q)) / chi
        return [dchi, dH, dq, dP]

    def ev_horizon(_phi, y):
        return abs(y[0]) - chi_floor

    ev_horizon.terminal = True

    sol = solve_ivp(
        rhs,
        phi_span,
        y0,
        method="DOP853",
        rtol=tol,
        atol=tol,
        dense_output=True,
        events=[ev_horizon],
    )
    if sol.status == -1:
        raise IntegrationError("integration failed: %s" % sol.message)

    ts = np.linspace(phi_span[0], sol.t[-1], n_samples)
    ys = sol.sol(ts)
    chi, H, q, P = ys
    h = H * chi
    p = P * chi
    # the energy combination is identically built into the metric-ratio
    # equation of this flow; evaluate it anyway as a numerical sanity column
    constraint = np.empty_like(ts)
    for i in range(len(ts)):
        u = fns.U(ts[i], q[i])
        zinv = fns.zinv(ts[i])
        dchi = -H[i] * u
        dH = -H[i] * P[i] * P[i] * zinv
        constraint[i] = chi[i] * dH / H[i] + dchi + H[i] * u + chi[i] * P[i] * P[i] * zinv

    events = []
    if sol.t_events[0].size:
        events.append({"kind": "horizon_approach", "phi": float(sol.t_events[0][0])})

    return Trajectory(
        var="phi",
        t=ts,
        columns={"chi": chi, "H": H, "q": q, "P": P, "h": h, "p": p},
        constraint=constraint,
        events=events,
        sol=sol,
    )


def launch_from_horizon(
    state: NearHorizonState, epsilon: float, direction: int = +1
) -> StatePhi:
    """Evaluate the near-horizon series at offset +-epsilon to produce
    initial data for the dilaton flow. Past the estimated convergence radius
    the state is flagged, not rejected."""
    if epsilon <= 0:
        raise HorizonLabError("epsilon must be positive")
    off = epsilon if direction >= 0 else -epsilon
    radius = state.radius_estimate()
    trunc = max(
        state.chi.tail_bound(off),
        state.H.tail_bound(off),
        state.q.tail_bound(off),
        state.P.tail_bound(off),
    )
    return StatePhi(
        phi=float(state.phi0) + off,
        chi=float(state.chi.eval_offset(off)),
        H=float(state.H.eval_offset(off)),
        q=float(state.q.eval_offset(off)),
        P=float(state.P.eval_offset(off)),
        warn_beyond_radius=bool(epsilon > radius),
        trunc_error=float(trunc),
    )


def tau_state_from_phi(model: ModelSpec, sp: StatePhi) -> StateTau:
    """Convert dilaton-flow data to coordinate-time data (h = H*chi,
    p = P*chi; hdot from the constraint)."""
    return StateTau(
        phi=sp.phi,
        chi=sp.chi,
        h=sp.H * sp.chi,
        q=sp.q,
        p=sp.P * sp.chi,
    )


def phi_state_from_tau(st: StateTau) -> StatePhi:
    if st.chi == 0.0:
        raise IntegrationError("conversion undefined at a turning point (chi = 0)")
    return StatePhi(phi=st.phi, chi=st.chi, H=st.h / st.chi, q=st.q, P=st.p / st.chi)


def sample_phi_of_tau(traj: Trajectory, phi_target: float) -> float:
    """Coordinate time at which a tau trajectory passes a dilaton value."""
    if traj.var != "tau":
        raise HorizonLabError("needs a tau trajectory")
    ts, phis = traj.t, traj.column("phi")
    lo, hi = None, None
    for i in range(len(ts) - 1):
        a, b = phis[i] - phi_target, phis[i + 1] - phi_target
        if a == 0.0:
            return float(ts[i])
        if (a < 0.0) != (b < 0.0):
            lo, hi = ts[i], ts[i + 1]
            break
    if lo is None:
        raise HorizonLabError("trajectory does not reach phi=%g" % phi_target)
    return float(brentq(lambda t: traj.sol.sol(t)[0] - phi_target, lo, hi, xtol=1e-14))
