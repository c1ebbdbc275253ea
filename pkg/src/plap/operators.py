"""The quasilinear operator, mean-value coefficients, energy and hypothesis checks."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from .coretypes import (GridFunction, NumericPolicy, ProblemInstance, ReactionField,
                        ScalarField, SolutionProfile, check_exponent, probe_grid)
from .errors import GridMismatch, MissingDerivative, NonVariational


def flux(p: float, s):
    """``|s|^{p-2} s``."""
    s = np.asarray(s, dtype=float)
    out = np.abs(s) ** (p - 2) * s
    return float(out) if out.ndim == 0 else out


def flux_inverse(p: float, t):
    """``|t|^{p'-2} t`` with ``p' = p/(p-1)``; inverse of :func:`flux`."""
    t = np.asarray(t, dtype=float)
    out = np.abs(t) ** (1.0 / (p - 1)) * np.sign(t)
    return float(out) if out.ndim == 0 else out


def _near(a, b):
    # relative only, so tiny but distinct arguments still use the exact quotient
    return np.abs(b - a) <= 1e-12 * np.maximum(np.abs(a), np.abs(b))


def mean_value_coefficient(p: float, a, b):
    """``(p-1) * int_0^1 |(1-t) a + t b|^{p-2} dt`` by the flux difference quotient.

    Falls back to the point value ``(p-1)|a|^{p-2}`` when ``|b - a|`` is at
    most ``1e-12 max(|a|, |b|)``.
    """
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    close = _near(a, b)
    denom = np.where(close, 1.0, b - a)
    quotient = (flux(p, b) - flux(p, a)) / denom
    out = np.where(close, (p - 1) * np.abs(a) ** (p - 2), quotient)
    return float(out) if out.ndim == 0 else out


def _power_integral(p, a, b, order):
    # (p-1) int_0^1 |a + t (b - a)|^{p-2} dt with Gauss-Jacobi rules anchored at the root
    e = p - 2
    d = b - a
    if d == 0.0:
        return (p - 1) * abs(a) ** e
    t0 = -a / d
    y, w = roots_jacobi(order, 0.0, e)  # weight (1+y)^e on [-1, 1]

    def anchored(end):
        # int_{t0}^{end} integrand dt, substituting t = t0 + L (1+y)/2
        length = end - t0
        if length == 0.0:
            return 0.0
        t = t0 + 0.5 * length * (1 + y)
        vals = np.abs(a + t * d) ** e
        weight = (1 + y) ** e
        return 0.5 * length * float(np.sum(w * vals / weight))

    return (p - 1) * (anchored(1.0) - anchored(0.0))


def mean_value_coefficient_quadrature(p: float, a: float, b: float, order: int = 16) -> float:
    """Quadrature cross-check of :func:`mean_value_coefficient`.

    The integrand is a power of a linear function, so Gauss-Jacobi rules with
    the weight placed at its root integrate it without the loss that plain
    Gauss-Legendre suffers near a zero.
    """
    return float(_power_integral(float(p), float(a), float(b), order))


def mean_value_reaction(phi: ReactionField, x, a, b):
    """``int_0^1 d phi/ds (x, (1-t) a + t b) dt``."""
    x, a, b = np.broadcast_arrays(np.asarray(x, float), np.asarray(a, float), np.asarray(b, float))
    if phi.kind == "zero":
        out = np.zeros_like(a)
    elif phi.kind == "linear":
        out = np.full_like(a, phi.lam)
    else:
        close = _near(a, b)
        denom = np.where(close, 1.0, b - a)
        quotient = (phi.value(x, b) - phi.value(x, a)) / denom
        out = np.where(close, phi.partial_s(x, a), quotient)
    return float(out) if out.ndim == 0 else out


def mean_value_reaction_quadrature(phi: ReactionField, x: float, a: float, b: float,
                                   order: int = 16) -> float:
    t, w = np.polynomial.legendre.leggauss(order)
    s = a + 0.5 * (t + 1) * (b - a)
    return float(0.5 * np.sum(w * phi.partial_s(np.full_like(s, x), s)))


# ---------------------------------------------------------------------------
# operator residual


@dataclass(frozen=True, eq=False)
class OperatorResidual:
    grid: GridFunction
    sup_norm: float
    excluded_nodes: tuple[int, ...] = ()

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    def mask(self) -> np.ndarray:
        keep = np.ones(self.grid.nodes.size, dtype=bool)
        keep[list(self.excluded_nodes)] = False
        return keep


def _stencil_weights(x: np.ndarray, width: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """First-derivative weights on ``width``-point stencils (centred where possible)."""
    n, half = x.size, width // 2
    start = np.clip(np.arange(n) - half, 0, n - width)
    idx = start[:, None] + np.arange(width)[None, :]
    d = x[idx] - x[:, None]
    scale = np.max(np.abs(d), axis=1, keepdims=True)
    d = d / scale
    # Vandermonde rows d^k, solve V^T w = e_1 for the first derivative
    V = d[:, None, :] ** np.arange(width)[None, :, None]
    rhs = np.zeros((n, width))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(V, rhs[..., None])[..., 0] / scale
    return idx, w


def nodal_derivative(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Fourth-order derivative on a possibly non-uniform grid.

    Five-point central stencils in the interior, shifted one-sided stencils
    next to the ends.
    """
    x = np.asarray(x, dtype=float)
    if x.size < 5:
        return np.gradient(w, x, edge_order=2)
    idx, wt = _stencil_weights(x)
    return np.sum(wt * np.asarray(w, dtype=float)[idx], axis=1)


def excluded_near(x: np.ndarray, points: Sequence[float], radius: float) -> np.ndarray:
    pts = np.asarray([q for q in points if -1 < q < 1], dtype=float)
    if pts.size == 0:
        return np.zeros(x.size, dtype=bool)
    return np.min(np.abs(x[:, None] - pts[None, :]), axis=1) <= radius


def apply_operator(inst: ProblemInstance, u: SolutionProfile,
                   nodes: np.ndarray | None = None,
                   exclude: Sequence[float] | None = None) -> OperatorResidual:
    """``-(|u'|^{p-2}u')' - b u' + phi(x, u) - f`` at the nodes of ``u``.

    The outer derivative is ``u.dflux`` when the profile carries it and a
    five-point difference of the nodal flux otherwise.  Nodes within ``2h`` of
    the instance and profile breakpoints (or of ``exclude``) are left out of
    the sup norm.
    """
    x = u.nodes
    if nodes is not None and (len(nodes) != x.size or np.any(np.asarray(nodes) != x)):
        raise GridMismatch("profile nodes differ from the requested grid")
    p = inst.p
    if u.dflux is not None:
        dw = u.dflux
    else:
        dw = nodal_derivative(x, flux(p, u.du))
    res = -dw - np.asarray(inst.b(x)) * u.du + inst.phi.value(x, u.values) - np.asarray(inst.f(x))
    pts = set(inst.breakpoints) | set(u.breakpoints)
    if exclude is not None:
        pts |= set(exclude)
    excl = excluded_near(x, sorted(pts), 2 * u.u.h_max * (1 + 1e-9))
    sup = float(np.max(np.abs(res[~excl]))) if np.any(~excl) else 0.0
    return OperatorResidual(GridFunction(x, res), sup, tuple(int(i) for i in np.flatnonzero(excl)))


# ---------------------------------------------------------------------------
# hypotheses


@dataclass
class HypothesisReport:
    name: str
    holds: bool
    margin: float | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        out = {"holds": self.holds}
        if self.margin is not None:
            out["margin"] = self.margin
        out.update(self.details)
        return out


def check_hypothesis_M(inst: ProblemInstance, s_range: tuple[float, float] = (-1.0, 1.0),
                       n_x: int = 201, n_s: int = 41) -> HypothesisReport:
    """Minimum of ``b'(x)/2 + d phi/ds (x, s)`` on an ``n_x`` by ``n_s`` probe grid."""
    if not inst.b.has_derivative:
        raise MissingDerivative("hypothesis (M) needs the derivative of b")
    x = probe_grid(n_x)
    s = np.linspace(s_range[0], s_range[1], n_s)
    db = np.asarray(inst.b.deriv(x))
    xx, ss = np.meshgrid(x, s, indexing="ij")
    vals = 0.5 * db[:, None] + inst.phi.partial_s(xx, ss)
    k = np.unravel_index(int(np.argmin(vals)), vals.shape)
    margin = float(vals[k])
    return HypothesisReport("M", margin >= 0, margin,
                            {"argmin_x": float(x[k[0]]), "argmin_s": float(s[k[1]]),
                             "probes": [n_x, n_s], "s_range": list(map(float, s_range))})


def _ordered_sources(f: ScalarField, g: ScalarField, policy: NumericPolicy):
    x = policy.nodes(sorted(set(f.breakpoints) | set(g.breakpoints)))
    fx, gx = np.asarray(f(x)), np.asarray(g(x))
    scale = 1.0 + max(float(np.max(np.abs(fx))), float(np.max(np.abs(gx))))
    tol = policy.tol_contact * scale
    ordered = bool(np.all(fx >= -tol) and np.all(gx - fx >= -tol))
    return x, fx, gx, tol, ordered


def check_hypothesis_Hpm1(f: ScalarField, g: ScalarField,
                          delta_list: Sequence[float] = (0.05, 0.1, 0.25),
                          policy: NumericPolicy | None = None) -> HypothesisReport:
    """``0 <= f <= g`` and a strict gap near both ends for every ``delta``.

    Positive measure is approximated by "at least one probe node with
    ``f < g - tol``" in ``(-1, -1+delta)`` and in ``(1-delta, 1)``.
    """
    policy = policy or NumericPolicy()
    if any(not 0 < d < 1 for d in delta_list):
        raise ValueError("each delta must lie in (0, 1)")
    x, fx, gx, tol, ordered = _ordered_sources(f, g, policy)
    strict = fx < gx - tol
    per_delta = {}
    for d in delta_list:
        left = int(np.count_nonzero(strict & (x > -1) & (x < -1 + d)))
        right = int(np.count_nonzero(strict & (x < 1) & (x > 1 - d)))
        per_delta[str(d)] = {"left_gap_nodes": left, "right_gap_nodes": right}
    ends = all(v["left_gap_nodes"] > 0 and v["right_gap_nodes"] > 0 for v in per_delta.values())
    return HypothesisReport("Hpm1", ordered and ends, None,
                            {"ordered": ordered, "deltas": per_delta, "probes": int(x.size),
                             "gap_nodes": int(np.count_nonzero(strict))})


def check_hypothesis_H0(f: ScalarField, g: ScalarField, b: ScalarField, phi: ReactionField,
                        policy: NumericPolicy | None = None) -> HypothesisReport:
    """Constant drift, zero reaction, ``0 <= f <= g`` and ``f`` not identical to ``g``."""
    policy = policy or NumericPolicy()
    x, fx, gx, tol, ordered = _ordered_sources(f, g, policy)
    gap_nodes = int(np.count_nonzero(gx - fx > tol))
    bx = np.asarray(b(probe_grid(201)))
    const_b = bool(np.ptp(bx) < 1e-12)
    details = {"ordered": ordered, "gap_nodes": gap_nodes, "phi_zero": phi.kind == "zero",
               "b_constant": const_b, "b0": float(bx[100]) if const_b else None,
               "probes": int(x.size)}
    holds = ordered and gap_nodes > 0 and phi.kind == "zero" and const_b
    return HypothesisReport("H0", holds, None, details)


# ---------------------------------------------------------------------------
# energy and reflection


def _trapezoid(y, x):
    return float(np.sum(0.5 * (y[1:] + y[:-1]) * np.diff(x)))


def evaluate_energy(inst: ProblemInstance, u: SolutionProfile) -> float:
    """``(1/p) int |u'|^p + int Phi(x, u) - int f u`` by the trapezoid rule.

    Defined only for zero drift.
    """
    x = u.nodes
    if float(np.max(np.abs(inst.b(probe_grid(201))))) > 0 or float(np.max(np.abs(inst.b(x)))) > 0:
        raise NonVariational("the energy functional exists only for b = 0")
    p = inst.p
    dens = (np.abs(u.du) ** p / p + inst.phi.primitive(x, u.values)
            - np.asarray(inst.f(x)) * u.values)
    return _trapezoid(dens, x)


def reflect_problem(inst: ProblemInstance) -> ProblemInstance:
    """Instance for ``x -> -x``: drift negated and mirrored, data mirrored, boundary values swapped."""
    return ProblemInstance(inst.p, inst.b.reflected(negate=True), inst.phi.reflected(),
                           inst.f.reflected(), bc_left=inst.bc_right, bc_right=inst.bc_left,
                           name=f"reflected {inst.name}".strip())


__all__ = [
    "flux", "flux_inverse", "mean_value_coefficient", "mean_value_coefficient_quadrature",
    "mean_value_reaction", "mean_value_reaction_quadrature", "OperatorResidual",
    "apply_operator", "nodal_derivative", "HypothesisReport", "check_hypothesis_M",
    "check_hypothesis_Hpm1", "check_hypothesis_H0", "evaluate_energy", "reflect_problem",
    "check_exponent",
]
