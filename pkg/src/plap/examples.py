"""Closed-form solution families used as ground truth.

Two constructions live here:

* the *theta family* ``u_theta = 1 - |x|^theta`` with a drift ``b`` and linear
  reaction ``lam * s`` for which two members are ordered but touch at ``x = 0``;
* the *plateau pair* (``plateau_*``): constant negative drift, no reaction, and a
  pair ``u <= v`` that coincide on ``[-1, -1/2]``, where ``v`` also has a flat
  top on ``[-1/2, x_s]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coretypes import (GridFunction, ProblemInstance, ReactionField, ScalarField,
                        SolutionProfile, check_exponent, conjugate_exponent)
from .errors import DomainError, InadmissibleParameters, MissingDerivative, SingularAtZero

_SLACK = 1e-12


def _as_domain(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size and (np.min(arr) < -1 - _SLACK or np.max(arr) > 1 + _SLACK):
        raise DomainError("x must lie in [-1, 1]")
    return np.clip(arr, -1.0, 1.0)


def _out(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


def _fmt(c: float) -> str:
    return repr(float(c))


# ---------------------------------------------------------------------------
# theta family


@dataclass(frozen=True)
class ThetaFamilyParams:
    """Parameters ``p, theta1 <= theta2, lam`` of the theta family.

    Requires ``p/(p-2) < theta1 <= theta2`` and ``lam >= lambda_min``.
    ``theta1 == theta2`` is allowed so the degenerate pair can be reported.
    """

    p: float = 4.0
    theta1: float = 3.0
    theta2: float = 4.0
    lam: float = field(default=float("nan"))

    def __post_init__(self):
        p = check_exponent(self.p)
        object.__setattr__(self, "p", p)
        if math.isnan(self.lam):
            object.__setattr__(self, "lam", self.lambda_min)
        if not p / (p - 2) < self.theta1:
            raise InadmissibleParameters(
                f"theta1={self.theta1} must exceed p/(p-2)={p / (p - 2):.6g}")
        if self.theta2 < self.theta1:
            raise InadmissibleParameters("theta2 must not be smaller than theta1")
        if self.lam < self.lambda_min * (1 - 1e-14):
            raise InadmissibleParameters(
                f"lambda={self.lam} is below the admissible minimum {self.lambda_min:.10g}")

    @property
    def lambda_min(self) -> float:
        p, t2 = self.p, self.theta2
        return 2 * (p - 1) ** 2 * (t2 - 1) * t2 ** (p - 1)

    @property
    def drift_coefficient(self) -> float:
        p, t1 = self.p, self.theta1
        return (p - 1) ** 2 * (t1 - 1) * t1 ** (p - 2)

    @property
    def drift_exponent(self) -> float:
        return (self.p - 2) * (self.theta2 - 1) - 1

    @property
    def identical(self) -> bool:
        return self.theta1 == self.theta2

    def drift_field(self) -> ScalarField:
        k, e = self.drift_coefficient, self.drift_exponent
        deriv = ScalarField.expression(f"{_fmt(k * e)}*pow(abs(x), {_fmt(e - 1)})")
        return ScalarField.expression(f"{_fmt(k)}*pow(abs(x), {_fmt(e)})*sgn(x)",
                                      derivative=deriv, breakpoints=(0.0,))

    def reaction(self) -> ReactionField:
        return ReactionField.linear(self.lam)

    def source_field(self, theta: float) -> ScalarField:
        """``f_theta`` as a JSON-serialisable expression field."""
        p = self.p
        lead = (p - 1) * theta ** (p - 1) * (theta - 1)
        e1 = (theta - 1) * (p - 1) - 1
        k, eb = self.drift_coefficient, self.drift_exponent
        # theta*b(x)*sgn(x)*|x|^(theta-1) = theta*k*|x|^(eb+theta-1) for x != 0
        text = (f"{_fmt(lead)}*pow(abs(x), {_fmt(e1)})"
                f" + {_fmt(theta * k)}*pow(abs(x), {_fmt(eb + theta - 1)})*abs(sgn(x))"
                f" + {_fmt(self.lam)}*(1 - pow(abs(x), {_fmt(theta)}))")
        return ScalarField.expression(text, breakpoints=(0.0,))

    def instance(self, theta: float) -> ProblemInstance:
        return ProblemInstance(self.p, self.drift_field(), self.reaction(),
                               self.source_field(theta), name=f"theta={theta:g}")


def u_theta(theta: float, x):
    if not theta > 1:
        raise ValueError("theta must exceed 1")
    xa = _as_domain(x)
    return _out(1.0 - np.abs(xa) ** theta, x)


def du_theta(theta: float, x):
    xa = _as_domain(x)
    return _out(-theta * np.abs(xa) ** (theta - 1) * np.sign(xa), x)


def dflux_theta(p: float, theta: float, x):
    """Exact derivative of ``|u'|^{p-2} u'`` for ``u = u_theta``."""
    xa = _as_domain(x)
    e = (theta - 1) * (p - 1) - 1
    with np.errstate(divide="ignore"):
        val = -theta ** (p - 1) * (theta - 1) * (p - 1) * np.abs(xa) ** e
    return _out(val, x)


def example1_drift(params: ThetaFamilyParams, x):
    xa = _as_domain(x)
    val = params.drift_coefficient * np.abs(xa) ** params.drift_exponent * np.sign(xa)
    return _out(val, x)


def example1_drift_derivative(params: ThetaFamilyParams, x):
    xa = _as_domain(x)
    e = params.drift_exponent
    return _out(params.drift_coefficient * e * np.abs(xa) ** (e - 1), x)


def f_theta(p: float, theta: float, b: ScalarField, phi: ReactionField, x):
    """Source making ``u_theta`` an exact solution for drift ``b`` and reaction ``phi``.

    At ``x = 0`` the continuous limit is returned when the leading exponent
    ``(theta-1)(p-1)-1`` is positive; otherwise :class:`SingularAtZero`.
    """
    p = check_exponent(p)
    xa = _as_domain(x)
    e = (theta - 1) * (p - 1) - 1
    if e <= 0 and np.any(xa == 0):
        raise SingularAtZero(f"leading exponent {e:g} <= 0, no limit at x = 0")
    ax = np.abs(xa)
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = (p - 1) * theta ** (p - 1) * (theta - 1) * ax ** e
    lead = np.where(ax == 0, 0.0, lead)
    drift = theta * np.asarray(b(xa)) * np.sign(xa) * ax ** (theta - 1)
    react = phi.value(xa, 1.0 - ax ** theta)
    return _out(lead + drift + react, x)


def dftheta_dtheta(params: ThetaFamilyParams, theta: float, x, *, parts: bool = False):
    """``d f_theta / d theta`` for the family drift and linear reaction.

    With ``parts=True`` returns the two brace factors ``(A, B)`` such that the
    derivative equals ``|x|^(theta-1) * (A + B * log|x|)``.
    """
    xa = np.asarray(x, dtype=float)
    if np.any((np.abs(xa) >= 1) | (xa == 0)):
        raise DomainError("derivative in theta is defined for 0 < |x| < 1")
    if not params.theta1 <= theta <= params.theta2:
        raise DomainError("theta must lie in [theta1, theta2]")
    p, lam = params.p, params.lam
    ax = np.abs(xa)
    q = ax ** ((theta - 1) * (p - 2) - 1)
    bs = example1_drift(params, xa) * np.sign(xa)
    first = (p - 1) * (p * theta ** (p - 1) - (p - 1) * theta ** (p - 2)) * q + bs
    second = (p - 1) ** 2 * theta ** (p - 1) * (theta - 1) * q + theta * bs - lam * ax
    if parts:
        return _out(first, x), _out(second, x)
    return _out(ax ** (theta - 1) * (first + np.log(ax) * second), x)


@dataclass
class AdmissibilityReport:
    holds: bool
    details: dict

    def __bool__(self):
        return self.holds


def example2_drift_is_admissible(b: ScalarField, params: ThetaFamilyParams,
                                 n: int = 2001, atol: float = 1e-12) -> AdmissibilityReport:
    """Check the generalised drift conditions against the theta-family bound.

    Conditions: ``b(0) = b'(0) = 0``, ``b' >= 0`` and
    ``0 <= b(x)/x <= K |x|^{(p-2)(theta2-1)-2}`` on a probe grid.
    """
    if not b.has_derivative:
        raise MissingDerivative("admissibility needs the derivative of b")
    x = np.linspace(-1.0, 1.0, n)
    x = 0.5 * (x - x[::-1])
    bx, dbx = np.asarray(b(x)), np.asarray(b.deriv(x))
    b0, db0 = float(b(0.0)), float(b.deriv(0.0))
    nz = x != 0
    ratio = bx[nz] / x[nz]
    bound = params.drift_coefficient * np.abs(x[nz]) ** (params.drift_exponent - 1)
    checks = {
        "b_at_zero": abs(b0) <= atol,
        "db_at_zero": abs(db0) <= atol,
        "db_nonnegative": bool(np.all(dbx >= -atol)),
        "ratio_nonnegative": bool(np.all(ratio >= -atol)),
        "ratio_below_bound": bool(np.all(ratio <= bound * (1 + 1e-12) + atol)),
    }
    excess = ratio - bound
    details = dict(checks, b0=b0, db0=db0, min_db=float(np.min(dbx)),
                   max_excess=float(np.max(excess)),
                   worst_x=float(x[nz][int(np.argmax(excess))]), probes=int(n))
    return AdmissibilityReport(all(checks.values()), details)


def theta_profile(params: ThetaFamilyParams, theta: float, nodes) -> SolutionProfile:
    nodes = np.asarray(nodes, dtype=float)
    return SolutionProfile(GridFunction(nodes, u_theta(theta, nodes)), du_theta(theta, nodes),
                           "closed-form", dflux=dflux_theta(params.p, theta, nodes),
                           breakpoints=(0.0,), meta={"family": "theta", "theta": theta, "p": params.p})


# ---------------------------------------------------------------------------
# plateau pair


def plateau_b0(p: float) -> float:
    p = check_exponent(p)
    return -((1.5) ** (1 - p)) * ((p - 2) / (p - 1)) ** (1 - p)


def plateau_xs(p: float) -> float:
    return 1.0 - 3.0 / 2.0 ** conjugate_exponent(p)


@dataclass(frozen=True)
class PlateauExampleParams:
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        if not -0.5 < self.xs < 1:
            raise InadmissibleParameters("plateau end x_s must lie in (-1/2, 1)")

    @property
    def xs(self) -> float:
        return plateau_xs(self.p)

    @property
    def b0(self) -> float:
        return plateau_b0(self.p)

    @property
    def breakpoints(self) -> tuple[float, float]:
        return (-0.5, self.xs)


def _plateau_consts(p: float):
    p = check_exponent(p)
    alpha = (p - 1) / (p - 2)
    k = 3.0 ** ((1 - p) / (p - 2))
    kv = 2.0 ** (p / (p - 2)) * k
    return p, alpha, k, kv, plateau_xs(p), plateau_b0(p)


def plateau_u(p: float, x):
    p, alpha, k, _, _, _ = _plateau_consts(p)
    xa = _as_domain(x)
    left = -4 * xa * (xa + 1)
    right = 1 - k * np.clip(2 * xa + 1, 0, None) ** alpha
    return _out(np.where(xa < -0.5, left, right), x)


def plateau_du(p: float, x):
    p, alpha, k, _, _, _ = _plateau_consts(p)
    xa = _as_domain(x)
    left = -4 * (2 * xa + 1)
    right = -2 * k * alpha * np.clip(2 * xa + 1, 0, None) ** (alpha - 1)
    return _out(np.where(xa < -0.5, left, right), x)


def plateau_v(p: float, x):
    p, alpha, _, kv, xs, _ = _plateau_consts(p)
    xa = _as_domain(x)
    left = -4 * xa * (xa + 1)
    right = 1 - kv * np.clip(xa - xs, 0, None) ** alpha
    return _out(np.where(xa < -0.5, left, np.where(xa <= xs, 1.0, right)), x)


def plateau_dv(p: float, x):
    p, alpha, _, kv, xs, _ = _plateau_consts(p)
    xa = _as_domain(x)
    left = -4 * (2 * xa + 1)
    right = -kv * alpha * np.clip(xa - xs, 0, None) ** (alpha - 1)
    return _out(np.where(xa < -0.5, left, np.where(xa <= xs, 0.0, right)), x)


def plateau_gap(p: float, x):
    """``v - u`` evaluated without cancellation on the plateau."""
    p, alpha, k, kv, xs, _ = _plateau_consts(p)
    xa = _as_domain(x)
    du = k * np.clip(2 * xa + 1, 0, None) ** alpha
    dv = kv * np.clip(xa - xs, 0, None) ** alpha
    # both terms equal 1 at x = 1; clamp the rounding there
    return _out(np.where(xa < -0.5, 0.0, np.maximum(du - dv, 0.0)), x)


def _left_source(p, b0, xa):
    t = np.clip(-(2 * xa + 1), 0, None)
    return 2 ** (2 * p - 1) * (p - 1) * t ** (p - 2) + 4 * b0 * (2 * xa + 1)


def plateau_third_coefficient(p: float) -> float:
    p = check_exponent(p)
    return (2 ** (((p - 1) ** 2 + 1) / (p - 2)) * 3 ** (-((p - 1) ** 2) / (p - 2))
            * ((p - 1) / (p - 2)) ** p)


def plateau_sources(p: float, x):
    """Return ``(f, g)`` whose solutions are ``plateau_u`` and ``plateau_v``.

    ``f = g`` on ``[-1, x_s]``; ``g`` carries the extra positive branch on
    ``(x_s, 1]``, taken as its right limit ``0`` at ``x_s``.
    """
    p, _, _, _, xs, b0 = _plateau_consts(p)
    xa = _as_domain(x)
    left = _left_source(p, b0, xa)
    f = np.where(xa < -0.5, left, 0.0)
    third = plateau_third_coefficient(p) * np.clip(xa - xs, 0, None) ** (1 / (p - 2))
    g = np.where(xa <= xs, f, third)
    return _out(f, x), _out(g, x)


def plateau_dflux(p: float, x, which: str = "u"):
    """Exact derivative of ``|w'|^{p-2} w'`` for ``w`` = ``plateau_u`` or ``plateau_v``."""
    p, alpha, k, kv, xs, _ = _plateau_consts(p)
    xa = _as_domain(x)
    tl = np.clip(-(2 * xa + 1), 0, None)
    left = -2 * (p - 1) * 4 ** (p - 1) * tl ** (p - 2)
    if which == "u":
        right = -2 * alpha * (2 * k * alpha) ** (p - 1) * np.clip(2 * xa + 1, 0, None) ** (alpha - 1)
        val = np.where(xa < -0.5, left, right)
    elif which == "v":
        right = -alpha * (kv * alpha) ** (p - 1) * np.clip(xa - xs, 0, None) ** (alpha - 1)
        val = np.where(xa < -0.5, left, np.where(xa <= xs, 0.0, right))
    else:
        raise ValueError("which must be 'u' or 'v'")
    return _out(val, x)


def plateau_source_fields(p: float) -> tuple[ScalarField, ScalarField]:
    """``(f, g)`` as JSON-serialisable piecewise fields."""
    p, _, _, _, xs, b0 = _plateau_consts(p)
    left = (f"{_fmt(2 ** (2 * p - 1) * (p - 1))}*pow(-(2*x+1), {_fmt(p - 2)})"
            f" + {_fmt(4 * b0)}*(2*x+1)")
    third = f"{_fmt(plateau_third_coefficient(p))}*pow(x - {_fmt(xs)}, {_fmt(1 / (p - 2))})"
    # f gets a redundant cut at x_s so that f and g share one grid
    f = ScalarField.piecewise([(-1.0, -0.5, left), (-0.5, xs, "0"), (xs, 1.0, "0")])
    g = ScalarField.piecewise([(-1.0, -0.5, left), (-0.5, xs, "0"), (xs, 1.0, third)])
    return f, g


def plateau_instance(p: float, which: str = "f") -> ProblemInstance:
    f, g = plateau_source_fields(p)
    src = {"f": f, "g": g}[which]
    return ProblemInstance(p, ScalarField.constant(plateau_b0(p)), ReactionField.zero(), src,
                           name=f"plateau pair {which}, p={p:g}")


def plateau_profiles(p: float, nodes) -> tuple[SolutionProfile, SolutionProfile]:
    nodes = np.asarray(nodes, dtype=float)
    bps = (-0.5, plateau_xs(p))
    u = SolutionProfile(GridFunction(nodes, plateau_u(p, nodes)), plateau_du(p, nodes), "closed-form",
                        dflux=plateau_dflux(p, nodes, "u"), breakpoints=bps,
                        meta={"family": "plateau", "which": "u", "p": p})
    v = SolutionProfile(GridFunction(nodes, plateau_v(p, nodes)), plateau_dv(p, nodes), "closed-form",
                        dflux=plateau_dflux(p, nodes, "v"), breakpoints=bps,
                        meta={"family": "plateau", "which": "v", "p": p})
    return u, v
