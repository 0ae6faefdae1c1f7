"""Symbolic expression trees for the model potentials.

The grammar is deliberately tiny: constants, named variables, sums, products,
rational powers, sqrt, exp and negation. That is enough to write every
catalog potential and every custom potential the CLI accepts, while keeping
scalar evaluation, evaluation over truncated series, partial differentiation
and term-wise antiderivatives easy to verify. This is not a computer algebra
system: no simplification beyond constant folding, no complex branches.

JSON form (the CLI custom-potential format):
    {"op": "add"|"mul"|"pow"|"sqrt"|"exp"|"neg"|"const"|"var",
     "args": [...], "value": number, "exponent": [num, den], "name": string}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .errors import BranchPointError, ExprError, NotInvertible, UnboundVariable, UnsupportedForm
from .exact import Number, as_exact, check_finite, exact_exp, exact_pow
from .series import Series

_KINDS = ("const", "var", "add", "mul", "pow", "sqrt", "exp", "neg")


@dataclass(frozen=True)
class Expr:
    kind: str
    children: tuple = ()
    value: Optional[Number] = None
    name: Optional[str] = None
    exponent: Optional[Fraction] = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ExprError("unknown node kind %r" % self.kind)

    # -- operator sugar -------------------------------------------------------

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __neg__(self):
        return neg(self)

    def __sub__(self, other):
        return add(self, neg(_lift(other)))

    def __rsub__(self, other):
        return add(_lift(other), neg(self))

    def __truediv__(self, other):
        return mul(self, pow_(_lift(other), -1))

    def __rtruediv__(self, other):
        return mul(_lift(other), pow_(self, -1))

    def __pow__(self, p):
        return pow_(self, p)

    # -- niceties --------------------------------------------------------------

    def variables(self) -> frozenset:
        if self.kind == "var":
            return frozenset((self.name,))
        out = frozenset()
        for c in self.children:
            out |= c.variables()
        return out

    def to_text(self) -> str:
        k = self.kind
        if k == "const":
            return str(self.value)
        if k == "var":
            return self.name
        if k == "add":
            return "(" + " + ".join(c.to_text() for c in self.children) + ")"
        if k == "mul":
            return "(" + "*".join(c.to_text() for c in self.children) + ")"
        if k == "pow":
            return "%s^(%s)" % (self.children[0].to_text(), self.exponent)
        if k == "neg":
            return "(-%s)" % self.children[0].to_text()
        return "%s(%s)" % (k, self.children[0].to_text())

    def __str__(self):
        return self.to_text()


def _lift(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


# -- folding constructors -------------------------------------------------------


def const(value: Number) -> Expr:
    return Expr("const", value=as_exact(value))


def var(name: str) -> Expr:
    if not isinstance(name, str) or not name:
        raise ExprError("variable needs a nonempty name")
    return Expr("var", name=name)


def add(*terms) -> Expr:
    flat, c_acc = [], 0
    for t in map(_lift, terms):
        if t.kind == "add":
            flat.extend(t.children)
        else:
            flat.append(t)
    rest = []
    for t in flat:
        if t.kind == "const":
            c_acc = c_acc + t.value
        else:
            rest.append(t)
    if c_acc != 0 or not rest:
        rest.append(const(c_acc))
    if len(rest) == 1:
        return rest[0]
    return Expr("add", children=tuple(rest))


def mul(*factors) -> Expr:
    flat, c_acc = [], as_exact(1)
    for f in map(_lift, factors):
        if f.kind == "mul":
            flat.extend(f.children)
        else:
            flat.append(f)
    rest = []
    for f in flat:
        if f.kind == "const":
            c_acc = c_acc * f.value
        else:
            rest.append(f)
    if c_acc == 0:
        return const(0)
    if c_acc != 1 or not rest:
        rest.insert(0, const(c_acc))
    if len(rest) == 1:
        return rest[0]
    return Expr("mul", children=tuple(rest))


def pow_(base, p: Union[int, Fraction]) -> Expr:
    base = _lift(base)
    p = Fraction(p)
    if p == 0:
        return const(1)
    if p == 1:
        return base
    if base.kind == "const" and p.denominator == 1:
        return const(exact_pow(base.value, p))
    return Expr("pow", children=(base,), exponent=p)


def sqrt(x) -> Expr:
    return Expr("sqrt", children=(_lift(x),))


def exp(x) -> Expr:
    x = _lift(x)
    if x.kind == "const" and x.value == 0:
        return const(1)
    return Expr("exp", children=(x,))


def neg(x) -> Expr:
    x = _lift(x)
    if x.kind == "const":
        return const(-x.value)
    if x.kind == "neg":
        return x.children[0]
    return Expr("neg", children=(x,))


# -- evaluation -------------------------------------------------------------------


def eval_scalar(e: Expr, bindings: Mapping[str, Number]) -> Number:
    """Evaluate at a point. Exact for rational inputs and rational-power trees."""
    k = e.kind
    if k == "const":
        return e.value
    if k == "var":
        if e.name not in bindings:
            raise UnboundVariable("unbound variable %r" % e.name)
        return as_exact(bindings[e.name])
    if k == "add":
        acc = 0
        for c in e.children:
            acc = acc + eval_scalar(c, bindings)
        return acc
    if k == "mul":
        acc = as_exact(1)
        for c in e.children:
            acc = acc * eval_scalar(c, bindings)
        return acc
    if k == "neg":
        return -eval_scalar(e.children[0], bindings)
    if k == "exp":
        return exact_exp(eval_scalar(e.children[0], bindings))
    if k == "sqrt":
        v = eval_scalar(e.children[0], bindings)
        if v < 0:
            raise BranchPointError("negative radicand in %s" % e.to_text())
        return exact_pow(v, Fraction(1, 2))
    if k == "pow":
        v = eval_scalar(e.children[0], bindings)
        p = e.exponent
        if v == 0 and p < 0:
            raise BranchPointError("zero base with negative power in %s" % e.to_text())
        if v < 0 and p.denominator != 1:
            raise BranchPointError("negative base with fractional power in %s" % e.to_text())
        return check_finite(exact_pow(v, p))
    raise ExprError("unreachable kind %r" % k)


def eval_series(e: Expr, bindings: Mapping[str, Series]) -> Series:
    """Evaluate the tree with truncated power series in the variable slots.

    All bound series must share a base point; the result order is the minimum
    over the bindings. Degree-0 bindings reproduce eval_scalar in the constant
    coefficient.
    """
    if not bindings:
        raise ExprError("series evaluation needs at least one binding")
    ref = next(iter(bindings.values()))
    base = ref.base_point
    order = min(s.order for s in bindings.values())

    def go(node: Expr) -> Series:
        k = node.kind
        if k == "const":
            return Series.constant(node.value, base, order)
        if k == "var":
            if node.name not in bindings:
                raise UnboundVariable("unbound variable %r" % node.name)
            return bindings[node.name].truncate(order)
        if k == "add":
            acc = go(node.children[0])
            for c in node.children[1:]:
                acc = acc + go(c)
            return acc
        if k == "mul":
            acc = go(node.children[0])
            for c in node.children[1:]:
                acc = acc * go(c)
            return acc
        if k == "neg":
            return -go(node.children[0])
        if k == "exp":
            return go(node.children[0]).exp()
        try:
            if k == "sqrt":
                return go(node.children[0]).sqrt()
            if k == "pow":
                return go(node.children[0]).pow(node.exponent)
        except NotInvertible as err:
            raise BranchPointError("%s in %s" % (err, node.to_text())) from err
        raise ExprError("unreachable kind %r" % k)

    return go(e)


def eval_expr(e: Expr, bindings: Mapping[str, Series]) -> Series:
    return eval_series(e, bindings)


# -- differentiation and substitution ------------------------------------------------


def diff(e: Expr, name: str) -> Expr:
    k = e.kind
    if k == "const":
        return const(0)
    if k == "var":
        return const(1 if e.name == name else 0)
    if k == "add":
        return add(*(diff(c, name) for c in e.children))
    if k == "mul":
        terms = []
        ch = e.children
        for i in range(len(ch)):
            di = diff(ch[i], name)
            if di.kind == "const" and di.value == 0:
                continue
            terms.append(mul(*(ch[:i] + (di,) + ch[i + 1:])))
        return add(*terms) if terms else const(0)
    if k == "neg":
        return neg(diff(e.children[0], name))
    if k == "exp":
        return mul(e, diff(e.children[0], name))
    if k == "sqrt":
        u = e.children[0]
        return mul(const(Fraction(1, 2)), pow_(u, Fraction(-1, 2)), diff(u, name))
    if k == "pow":
        u = e.children[0]
        return mul(const(e.exponent), pow_(u, e.exponent - 1), diff(u, name))
    raise ExprError("unreachable kind %r" % k)


def substitute(e: Expr, values: Mapping[str, Number]) -> Expr:
    """Freeze some variables to constants."""
    k = e.kind
    if k == "const":
        return e
    if k == "var":
        if e.name in values:
            return const(values[e.name])
        return e
    kids = tuple(substitute(c, values) for c in e.children)
    if k == "add":
        return add(*kids)
    if k == "mul":
        return mul(*kids)
    if k == "neg":
        return neg(kids[0])
    if k == "exp":
        return exp(kids[0])
    if k == "sqrt":
        return sqrt(kids[0])
    if k == "pow":
        return pow_(kids[0], e.exponent)
    raise ExprError("unreachable kind %r" % k)


# -- term-wise antiderivative -----------------------------------------------------


def _as_power_term(e: Expr, name: str):
    """Decompose into coeff * name**p, or None if not of that shape."""
    k = e.kind
    if k == "const":
        return e.value, Fraction(0)
    if k == "var":
        if e.name == name:
            return as_exact(1), Fraction(1)
        return None
    if k == "neg":
        t = _as_power_term(e.children[0], name)
        if t is None:
            return None
        return -t[0], t[1]
    if k == "sqrt":
        t = _as_power_term(e.children[0], name)
        if t is None or t[0] < 0:
            return None
        return exact_pow(t[0], Fraction(1, 2)), t[1] / 2
    if k == "pow":
        t = _as_power_term(e.children[0], name)
        if t is None:
            return None
        c, p = t
        if c < 0 and e.exponent.denominator != 1:
            return None
        return exact_pow(c, e.exponent), p * e.exponent
    if k == "mul":
        coeff, p = as_exact(1), Fraction(0)
        for ch in e.children:
            t = _as_power_term(ch, name)
            if t is None:
                return None
            coeff = coeff * t[0]
            p = p + t[1]
        return coeff, p
    return None


def integrate_power_sum(e: Expr, name: str) -> Expr:
    """Term-wise antiderivative of a sum of power laws in `name`.

    Raises UnsupportedForm when a term is not a power law (exp factors, mixed
    variables) or when an exponent of -1 would need a logarithm, which the
    grammar does not contain; callers fall back to quadrature.
    """
    terms = e.children if e.kind == "add" else (e,)
    out = []
    for t in terms:
        pt = _as_power_term(t, name)
        if pt is None:
            raise UnsupportedForm(
                "term %s is not a power law in %s; use the quadrature fallback"
                % (t.to_text(), name)
            )
        coeff, p = pt
        if p == -1:
            raise UnsupportedForm(
                "term %s integrates to a logarithm, which the expression "
                "grammar does not represent" % t.to_text()
            )
        out.append(mul(const(exact_div_frac(coeff, p + 1)), pow_(var(name), p + 1)))
    return add(*out)


def exact_div_frac(a, b):
    from .exact import exact_div

    return exact_div(a, b)


# -- JSON grammar -----------------------------------------------------------------


def to_json(e: Expr) -> dict:
    k = e.kind
    if k == "const":
        v = e.value
        if isinstance(v, Fraction) and v.denominator == 1:
            return {"op": "const", "value": int(v)}
        return {"op": "const", "value": float(v)}
    if k == "var":
        return {"op": "var", "name": e.name}
    node = {"op": k, "args": [to_json(c) for c in e.children]}
    if k == "pow":
        node["exponent"] = [e.exponent.numerator, e.exponent.denominator]
    return node


def from_json(obj) -> Expr:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if not isinstance(obj, dict) or "op" not in obj:
        raise ExprError("expression node must be an object with an 'op' key")
    op = obj["op"]
    if op == "const":
        if "value" not in obj or isinstance(obj["value"], bool) or not isinstance(
            obj["value"], (int, float)
        ):
            raise ExprError("const node needs a numeric 'value'")
        return const(obj["value"])
    if op == "var":
        return var(obj.get("name") or "")
    args = [from_json(a) for a in obj.get("args", ())]
    if op == "add":
        return add(*args)
    if op == "mul":
        return mul(*args)
    if op == "neg" or op == "sqrt" or op == "exp":
        if len(args) != 1:
            raise ExprError("%s takes exactly one argument" % op)
        return {"neg": neg, "sqrt": sqrt, "exp": exp}[op](args[0])
    if op == "pow":
        if len(args) != 1:
            raise ExprError("pow takes exactly one argument")
        exponent = obj.get("exponent")
        if isinstance(exponent, (list, tuple)) and len(exponent) == 2:
            p = Fraction(int(exponent[0]), int(exponent[1]))
        elif isinstance(exponent, int):
            p = Fraction(exponent)
        else:
            raise ExprError("pow needs an 'exponent' of the form [num, den] or int")
        return pow_(args[0], p)
    raise ExprError("unknown op %r" % op)
