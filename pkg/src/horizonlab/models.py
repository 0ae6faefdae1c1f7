"""Catalog of reduced two-dimensional dilaton-gravity models.

Each entry packages the scalaron-frame potential U, the inverse scalaron
kinetic function (zero in the massless limit), an optional extra-scalar
kinetic function Z, and the dimensional constants. Potentials are expression
trees over {phi, q, psi}, built with exact rational constants whenever the
supplied couplings are rational, so the near-horizon golden tests can run in
exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

from . import exprs as ex
from .errors import ModelError
from .exact import Number, as_exact, exact_div, is_exact

ALLOWED_VARIABLES = frozenset({"phi", "q", "psi"})

PHI = ex.var("phi")
Q = ex.var("q")
PSI = ex.var("psi")


@dataclass(frozen=True)
class ModelSpec:
    """A reduced gravity model. Immutable; partial-derivative trees are
    precomputed at construction and shared."""

    name: str
    D: int
    Lambda: Number
    lambda2: Number
    m2: Number
    k: int
    U: ex.Expr
    zbar_inv: ex.Expr
    Z: Optional[ex.Expr] = None
    provenance: str = ""
    params: dict = field(default_factory=dict)

    nu: Fraction = field(init=False)
    k_nu: Number = field(init=False)
    U_phi: ex.Expr = field(init=False)
    U_q: ex.Expr = field(init=False)
    U_psi: ex.Expr = field(init=False)
    zbar_inv_phi: ex.Expr = field(init=False)
    Z_phi: Optional[ex.Expr] = field(init=False)

    def __post_init__(self):
        if self.D < 3:
            raise ModelError("spacetime dimension must be at least 3")
        bad = self.U.variables() - ALLOWED_VARIABLES
        if bad:
            raise ModelError("potential uses undeclared variables %s" % sorted(bad))
        bad = self.zbar_inv.variables() - ALLOWED_VARIABLES
        if bad:
            raise ModelError("kinetic function uses undeclared variables %s" % sorted(bad))
        object.__setattr__(self, "nu", Fraction(1, self.D - 2))
        object.__setattr__(self, "k_nu", self.k * (self.D - 2) * (self.D - 3))
        object.__setattr__(self, "U_phi", ex.diff(self.U, "phi"))
        object.__setattr__(self, "U_q", ex.diff(self.U, "q"))
        object.__setattr__(self, "U_psi", ex.diff(self.U, "psi"))
        object.__setattr__(self, "zbar_inv_phi", ex.diff(self.zbar_inv, "phi"))
        object.__setattr__(self, "Z_phi", ex.diff(self.Z, "phi") if self.Z is not None else None)

    @property
    def massless(self) -> bool:
        z = self.zbar_inv
        return z.kind == "const" and z.value == 0

    @property
    def Zbar(self) -> Optional[ex.Expr]:
        """Scalaron kinetic function; undefined (None) in the massless limit."""
        if self.massless:
            return None
        return ex.pow_(self.zbar_inv, -1)

    def U_at(self, phi: Number, q: Number = 0, psi: Number = 0) -> Number:
        return ex.eval_scalar(self.U, {"phi": phi, "q": q, "psi": psi})

    def zbar_inv_at(self, phi: Number, q: Number = 0, psi: Number = 0) -> Number:
        return ex.eval_scalar(self.zbar_inv, {"phi": phi, "q": q, "psi": psi})


def _zbar_inv(m2: Number) -> ex.Expr:
    # inverse of Zbar = -1/(m^2 phi); identically zero when the vecton mass is off
    if m2 == 0:
        return ex.const(0)
    return ex.mul(ex.const(-as_exact(m2)), PHI)


def build_spherical(D: int, Lambda: Number, lambda2: Number, m2: Number, k: int) -> ModelSpec:
    """Spherically reduced model with the scalaron potential from the exact
    on-shell gauge-field elimination. Closed form exists for D=4 (D=3 has its
    own builder); other dimensions only admit the massless family, see
    build_srn."""
    if D < 3:
        raise ModelError("spacetime dimension must be at least 3")
    if D == 3:
        return build_d3(Lambda, lambda2, m2)
    if D != 4:
        raise ModelError(
            "no closed-form scalaron potential for D=%d; use build_srn for the "
            "massless family" % D
        )
    if Lambda == 0:
        raise ModelError(
            "scalaron potential undefined at Lambda=0 (use build_srn with a "
            "frozen charge instead)"
        )
    if lambda2 == 0:
        raise ModelError("lambda2 must be nonzero")
    Lambda, lambda2, m2 = as_exact(Lambda), as_exact(lambda2), as_exact(m2)
    c = exact_div(1, lambda2 * Lambda * Lambda)
    curv = ex.mul(ex.const(2 * k), ex.pow_(PHI, Fraction(-1, 2)))
    x_eff = ex.mul(
        ex.const(-2 * Lambda),
        ex.pow_(PHI, Fraction(1, 2)),
        ex.sqrt(ex.add(1, ex.mul(ex.const(c), ex.pow_(Q, 2), ex.pow_(PHI, -2)))),
    )
    U = ex.add(curv, x_eff)
    return ModelSpec(
        name="d4",
        D=4,
        Lambda=Lambda,
        lambda2=lambda2,
        m2=m2,
        k=k,
        U=U,
        zbar_inv=_zbar_inv(m2),
        provenance="spherical reduction, D=4, exact scalaron potential",
        params={"D": 4, "Lambda": Lambda, "lambda2": lambda2, "m2": m2, "k": k},
    )


def build_d3(Lambda: Number, lambda2: Number, m2: Number) -> ModelSpec:
    """Three-dimensional reduction in scalaron form:
    U = -2*Lambda*phi - q**2/(lambda2*Lambda*phi)."""
    if Lambda == 0 or lambda2 == 0:
        raise ModelError("Lambda*lambda2 must be nonzero for the D=3 model")
    Lambda, lambda2, m2 = as_exact(Lambda), as_exact(lambda2), as_exact(m2)
    c = exact_div(-1, lambda2 * Lambda)
    U = ex.add(
        ex.mul(ex.const(-2 * Lambda), PHI),
        ex.mul(ex.const(c), ex.pow_(Q, 2), ex.pow_(PHI, -1)),
    )
    return ModelSpec(
        name="d3",
        D=3,
        Lambda=Lambda,
        lambda2=lambda2,
        m2=m2,
        k=0,
        U=U,
        zbar_inv=_zbar_inv(m2),
        provenance="spherical reduction, D=3, scalaron form",
        params={"Lambda": Lambda, "lambda2": lambda2, "m2": m2},
    )


def build_srn(D: int, Lambda: Number, q0: Number, k: int) -> ModelSpec:
    """Massless charged family in any dimension:
    U = k_nu*phi**(-nu) - 2*Lambda*phi**nu - q0**2*phi**(nu-2),
    the Schwarzschild / Reissner-Nordstrom / Lambda black-hole potential with
    the charge frozen into the potential."""
    if D < 3:
        raise ModelError("spacetime dimension must be at least 3")
    Lambda, q0 = as_exact(Lambda), as_exact(q0)
    nu = Fraction(1, D - 2)
    k_nu = k * (D - 2) * (D - 3)
    terms = []
    if k_nu != 0:
        terms.append(ex.mul(ex.const(k_nu), ex.pow_(PHI, -nu)))
    if Lambda != 0:
        terms.append(ex.mul(ex.const(-2 * Lambda), ex.pow_(PHI, nu)))
    if q0 != 0:
        terms.append(ex.mul(ex.const(-(q0 * q0)), ex.pow_(PHI, nu - 2)))
    U = ex.add(*terms) if terms else ex.const(0)
    return ModelSpec(
        name="srn",
        D=D,
        Lambda=Lambda,
        lambda2=as_exact(1),
        m2=0,
        k=k,
        U=U,
        zbar_inv=ex.const(0),
        provenance="massless charged black-hole family, any dimension",
        params={"D": D, "Lambda": Lambda, "q0": q0, "k": k},
    )


def build_cyl3(Q_charge: Number) -> ModelSpec:
    """Cylindrical reduction of the three-dimensional theory:
    U = -8*Q**2*phi**(-3). Massless; has a horizon whenever Q != 0."""
    Qc = as_exact(Q_charge)
    U = ex.mul(ex.const(-8 * Qc * Qc), ex.pow_(PHI, -3)) if Qc != 0 else ex.const(0)
    return ModelSpec(
        name="cyl3",
        D=3,
        Lambda=0,
        lambda2=as_exact(1),
        m2=0,
        k=0,
        U=U,
        zbar_inv=ex.const(0),
        provenance="cylindrical reduction, D=3, geometric gauge charge",
        params={"Q": Qc},
    )


def build_cyl4_special(Q_charge: Number, with_eta: bool = True) -> ModelSpec:
    """Cylindrical D=4 special case with one geometric charge and one extra
    scalar: U = -(Q**2/2)*phi**(-5/2)*exp(-psi), Z = -phi/2. with_eta=False
    freezes the scalar at zero."""
    Qc = as_exact(Q_charge)
    coeff = ex.const(exact_div(-(Qc * Qc), 2))
    body = ex.mul(coeff, ex.pow_(PHI, Fraction(-5, 2)))
    if with_eta:
        U = ex.mul(body, ex.exp(ex.neg(PSI)))
    else:
        U = body
    return ModelSpec(
        name="cyl4",
        D=4,
        Lambda=0,
        lambda2=as_exact(1),
        m2=0,
        k=0,
        U=U,
        zbar_inv=ex.const(0),
        Z=ex.mul(ex.const(Fraction(-1, 2)), PHI),
        provenance="cylindrical reduction, D=4, single-charge special case",
        params={"Q": Qc, "with_eta": with_eta},
    )


@dataclass(frozen=True)
class CylCharges:
    Q1: float
    Q2: float


def v_eff_cyl(phi: float, xi: float, eta: float, charges: CylCharges) -> float:
    """Effective geometric potential of the general cylindrical reduction,
    produced by eliminating the nonpropagating Abelian gauge fields."""
    if phi <= 0:
        raise ModelError("v_eff_cyl needs phi > 0")
    q1, q2 = charges.Q1, charges.Q2
    bracket = (
        q1 * q1 * math.exp(-eta)
        - 2.0 * q1 * q2 * math.tanh(xi)
        + q2 * q2 * math.exp(eta)
    )
    return -math.cosh(xi) / (2.0 * phi * phi) * bracket


def custom_model(
    name: str,
    U: ex.Expr,
    zbar_inv: ex.Expr = None,
    Z: ex.Expr = None,
    D: int = 4,
    provenance: str = "user-supplied potential",
    **consts,
) -> ModelSpec:
    """Wrap user-supplied expression trees as a model. Variable names are
    validated against {phi, q, psi}."""
    return ModelSpec(
        name=name,
        D=D,
        Lambda=consts.get("Lambda", 0),
        lambda2=consts.get("lambda2", 1),
        m2=consts.get("m2", 0),
        k=consts.get("k", 0),
        U=U,
        zbar_inv=zbar_inv if zbar_inv is not None else ex.const(0),
        Z=Z,
        provenance=provenance,
        params=dict(consts),
    )


def model_from_json(obj: Mapping) -> ModelSpec:
    """Custom-potential input format: {"name": ..., "D": ..., "U": <expr>,
    "zbar_inv": <expr>?, "Z": <expr>?, "params": {...}?}."""
    if "U" not in obj:
        raise ModelError("custom model needs a 'U' expression")
    U = ex.from_json(obj["U"])
    zinv = ex.from_json(obj["zbar_inv"]) if "zbar_inv" in obj else None
    Z = ex.from_json(obj["Z"]) if "Z" in obj else None
    return custom_model(
        name=obj.get("name", "custom"),
        U=U,
        zbar_inv=zinv,
        Z=Z,
        D=int(obj.get("D", 4)),
        **obj.get("params", {}),
    )


# -- registry for the CLI ----------------------------------------------------------

CATALOG = {
    "d4": (
        build_spherical,
        {"D": 4, "Lambda": -1, "lambda2": 1, "m2": 1, "k": 1},
        "spherical D=4, massive scalaron",
    ),
    "d3": (
        build_d3,
        {"Lambda": -1, "lambda2": 1, "m2": 1},
        "spherical D=3, massive scalaron",
    ),
    "srn": (
        build_srn,
        {"D": 4, "Lambda": 0, "q0": 0, "k": 1},
        "massless charged family (any D)",
    ),
    "cyl3": (build_cyl3, {"Q": 1}, "cylindrical D=3"),
    "cyl4": (
        build_cyl4_special,
        {"Q": 1, "with_eta": True},
        "cylindrical D=4 special case",
    ),
}


def build_catalog_model(name: str, **overrides) -> ModelSpec:
    if name not in CATALOG:
        raise ModelError(
            "unknown catalog model %r (have: %s)" % (name, ", ".join(sorted(CATALOG)))
        )
    builder, defaults, _ = CATALOG[name]
    args = dict(defaults)
    for key, val in overrides.items():
        if val is None:
            continue
        if key not in args:
            raise ModelError("model %r does not take parameter %r" % (name, key))
        args[key] = val
    if name == "cyl3" or name == "cyl4":
        args["Q_charge"] = args.pop("Q")
    return builder(**args)
