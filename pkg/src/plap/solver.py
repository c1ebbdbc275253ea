"""Numerical solvers for the two-point problem.

Two methods are provided.  :func:`solve_shooting` integrates the first-order
form ``|u'|^{p-2}u' + b0 u + F(x) = C`` (``F`` an antiderivative of ``f``) and
adjusts ``C`` until the right boundary value is met.  It only applies when the
drift is constant and there is no reaction.  :func:`solve_newton_fd` handles
the general case with a damped Newton iteration on a regularised
finite-difference system.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .coretypes import (GridFunction, NumericPolicy, ProblemInstance, ScalarField,
                        SolutionProfile)
from .errors import NewtonDiverged, NoBracket, NonMonotoneShooting, PreconditionError
from .operators import nodal_derivative, reflect_problem

SUBSTEPS = 4
GRADING_LEVELS = 4


# ---------------------------------------------------------------------------
# quadrature


def _cumulative_gauss(fn, pts: np.ndarray) -> np.ndarray:
    """Cumulative integral of ``fn`` at ``pts``, one 3-point Gauss panel per gap.

    Gauss nodes avoid the panel ends, so a jump of ``fn`` at a knot never
    leaks its one-sided value into the neighbouring panel.
    """
    y, w = np.polynomial.legendre.leggauss(3)
    mid = 0.5 * (pts[1:] + pts[:-1])
    half = 0.5 * np.diff(pts)
    q = mid[:, None] + half[:, None] * y[None, :]
    vals = np.asarray(fn(q.ravel()), dtype=float).reshape(q.shape)
    return np.concatenate([[0.0], np.cumsum(half * (vals @ w))])


def antiderivative(f: ScalarField, policy: NumericPolicy | None = None,
                   nodes: np.ndarray | None = None) -> GridFunction:
    """``F(x) = int_{-1}^x f`` on the policy grid.

    Breakpoints of ``f`` are added to the integration knots so that no panel
    straddles a kink or jump.
    """
    policy = policy or NumericPolicy()
    x = policy.nodes(f.breakpoints) if nodes is None else np.asarray(nodes, dtype=float)
    knots = np.union1d(x, [b for b in f.breakpoints if -1 < b < 1])
    F = _cumulative_gauss(f, knots)
    return GridFunction(x, F[np.searchsorted(knots, x)])


# ---------------------------------------------------------------------------
# shooting kernels


@numba.njit(cache=True)
def _psi(a, q, ptol):
    if abs(a) <= ptol:
        return 0.0
    return math.copysign(abs(a) ** q, a)


@numba.njit(cache=True)
def _implicit_solve(R, k, q):
    # s + k sgn(s)|s|^q = R, safeguarded Newton on |s|
    if R == 0.0:
        return 0.0
    r = abs(R)
    lo, hi = 0.0, r
    s = min(r, (r / k) ** (1.0 / q)) if k > 0 else r
    for _ in range(200):
        g = s + k * s ** q - r
        if g > 0:
            hi = s
        else:
            lo = s
        dg = 1.0 + k * q * s ** (q - 1.0) if s > 0 else np.inf
        sn = s - g / dg
        if not (lo < sn < hi):
            sn = 0.5 * (lo + hi)
        if abs(sn - s) <= 1e-16 * r or hi - lo <= 1e-16 * r:
            s = sn
            break
        s = sn
    return s if R > 0 else -s


@numba.njit(cache=True)
def _implicit_step(y, C, b0, Fv, a, q):
    # y_new = y + a Psi(C - b0 y_new - Fv), written in s = C - b0 y_new - Fv
    s = _implicit_solve(C - Fv - b0 * y, a * b0, q)
    return (C - Fv - s) / b0


@numba.njit(cache=True)
def _integrate(C, u0, b0, p, t, F, ptol):
    """March ``u' = Psi(C - b0 u - F)`` over the substep knots ``t[0::2]``.

    ``t[1::2]`` are the substep midpoints and ``F`` is sampled on ``t``.
    Substeps where the Hölder sink is stiff (or the argument changes sign) use
    Richardson-extrapolated implicit Euler; the rest use classical RK4.
    """
    n = (len(t) - 1) // 2
    out = np.empty(n + 1)
    u = u0
    out[0] = u
    q = 1.0 / (p - 1.0)
    e = (2.0 - p) / (p - 1.0)
    nimp = 0
    for j in range(n):
        hh = t[2 * j + 2] - t[2 * j]
        a1 = C - b0 * u - F[2 * j]
        k1 = _psi(a1, q, ptol)
        a2 = C - b0 * (u + hh / 2 * k1) - F[2 * j + 1]
        k2 = _psi(a2, q, ptol)
        a3 = C - b0 * (u + hh / 2 * k2) - F[2 * j + 1]
        k3 = _psi(a3, q, ptol)
        a4 = C - b0 * (u + hh * k3) - F[2 * j + 2]
        k4 = _psi(a4, q, ptol)
        stiff = False
        if b0 > 0:
            m = min(abs(a1), abs(a2), abs(a3), abs(a4))
            if m == 0.0 or hh * b0 * q * m ** e > 1.0:
                stiff = True
            if a1 * a4 < 0 or a1 * a2 < 0 or a1 * a3 < 0:
                stiff = True
        if stiff:
            nimp += 1
            y1 = _implicit_step(u, C, b0, F[2 * j + 1], hh / 2, q)
            y2 = _implicit_step(y1, C, b0, F[2 * j + 2], hh / 2, q)
            yf = _implicit_step(u, C, b0, F[2 * j + 2], hh, q)
            u = 2.0 * y2 - yf
        else:
            u = u + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j + 1] = u
    return out, nimp


@dataclass(frozen=True, eq=False)
class ShootingState:
    """Integration constant ``C`` and the antiderivative ``F`` on the output grid.

    ``C`` is the conserved value of ``|u'|^{p-2}u' + b0 u + F``.
    """

    C: float
    F: GridFunction

    def __post_init__(self):
        if self.F.values[0] != 0.0:
            raise ValueError("F must vanish at x = -1")


def _shooting_grid(nodes: np.ndarray, breakpoints: Sequence[float]) -> np.ndarray:
    """Substep knots: nodes, breakpoints, geometric grading, then 4 substeps per gap."""
    h = float(np.max(np.diff(nodes)))
    bps = [b for b in breakpoints if -1 < b < 1]
    graded = [b + s * h * 2.0 ** -k for b in bps for s in (-1, 1)
              for k in range(1, GRADING_LEVELS + 1)]
    knots = np.union1d(nodes, bps + [g for g in graded if -1 < g < 1])
    gaps = np.diff(knots)
    sub = (knots[:-1, None] + gaps[:, None] * np.arange(SUBSTEPS)[None, :] / SUBSTEPS).ravel()
    return np.append(sub, 1.0)


def solve_shooting(inst: ProblemInstance, policy: NumericPolicy | None = None,
                   nodes: np.ndarray | None = None) -> SolutionProfile:
    """Shooting solver for constant drift ``b0`` and zero reaction.

    For ``b0 < 0`` the problem is solved in the mirrored frame, where the
    initial value problem from ``x = -1`` is well posed, and mirrored back.
    """
    policy = policy or NumericPolicy()
    b0 = inst.constant_drift()
    if b0 is None:
        raise PreconditionError("shooting requires a constant drift")
    if not inst.phi.is_zero:
        raise PreconditionError("shooting requires zero reaction")
    x = policy.nodes(inst.breakpoints) if nodes is None else np.asarray(nodes, dtype=float)
    if b0 < 0:
        sol = _shoot(reflect_problem(inst), -b0, policy, -x[::-1])
        out = sol.mirrored()
        object.__setattr__(out, "meta", {**sol.meta, "reflected": True})
        return out
    return _shoot(inst, b0, policy, x)


def _shoot(inst: ProblemInstance, b0: float, policy: NumericPolicy,
           x: np.ndarray) -> SolutionProfile:
    p, alpha, beta = inst.p, inst.bc_left, inst.bc_right
    st = _shooting_grid(x, inst.breakpoints)
    t = np.empty(2 * st.size - 1)
    t[0::2] = st
    t[1::2] = 0.5 * (st[1:] + st[:-1])
    F = _cumulative_gauss(inst.f, t)
    ptol = 1e-3 * policy.tol_solve * (1 + abs(b0) + float(np.max(np.abs(F))))
    idx = np.searchsorted(st, x)

    def shoot(C):
        return _integrate(C, alpha, b0, p, t, F, ptol)[0]

    def mismatch(C):
        return shoot(C)[-1] - beta

    center = b0 * alpha
    f_l1 = float(np.sum(np.abs(np.diff(t)) * np.abs(inst.f(0.5 * (t[1:] + t[:-1])))))
    c_max = f_l1 + abs(b0) * max(1.0, abs(alpha), abs(beta))
    c_max = max(c_max, 1.0)
    for _ in range(7):
        lo, hi = center - c_max, center + c_max
        m_lo, m_hi = mismatch(lo), mismatch(hi)
        if m_lo <= 0 <= m_hi:
            break
        c_max *= 10
    else:
        raise NoBracket(f"u(1; C) - {beta} keeps one sign for |C - {center}| <= {c_max / 10:g}")

    samples = np.linspace(lo, hi, 9)
    vals = np.array([mismatch(c) for c in samples])
    if np.any(np.diff(vals) < -policy.tol_solve):
        warnings.warn("shooting map u(1; C) is not monotone in C", NonMonotoneShooting,
                      stacklevel=3)
    k = int(np.searchsorted(vals, 0.0)) if np.all(np.diff(vals) >= 0) else 0
    if 0 < k < vals.size:
        lo, hi = samples[k - 1], samples[k]
    if m_lo == 0:
        C = lo
    elif m_hi == 0:
        C = hi
    else:
        C = brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    r = mismatch(C)
    if r < 0:
        # prefer the supersolution side when it is equally accurate
        up = np.nextafter(C, np.inf)
        for _ in range(8):
            r_up = mismatch(up)
            if 0 <= r_up <= policy.tol_solve:
                C, r = up, r_up
                break
            up = np.nextafter(up, np.inf)
    if abs(r) > policy.tol_solve:
        raise NoBracket(f"shooting map has no root within tolerance (mismatch {r:.3e})")

    path, nimp = _integrate(C, alpha, b0, p, t, F, ptol)
    u = path[idx]
    Fx = F[2 * idx]
    q = 1.0 / (p - 1.0)
    arg = C - b0 * u - Fx
    du = np.where(np.abs(arg) <= ptol, 0.0, np.sign(arg) * np.abs(arg) ** q)
    state = ShootingState(C, GridFunction(x, Fx))
    return SolutionProfile(GridFunction(x, u), du, "shooting", residual_sup=abs(r),
                           breakpoints=inst.breakpoints,
                           meta={"state": state, "C": C, "implicit_substeps": int(nimp),
                                 "reflected": False, "p": p})


# ---------------------------------------------------------------------------
# Newton


DEFAULT_EPS_SCHEDULE = (1.0, 1e-1, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10)


@dataclass(frozen=True)
class NewtonConfig:
    eps_schedule: tuple[float, ...] = DEFAULT_EPS_SCHEDULE
    damping: float = 0.5
    max_halvings: int = 40
    max_iter: int = 200
    warm_start: bool = True
    richardson: bool = True

    def __post_init__(self):
        sched = tuple(float(e) for e in self.eps_schedule)
        object.__setattr__(self, "eps_schedule", sched)
        if not sched or any(e <= 0 for e in sched):
            raise ValueError("eps_schedule must hold positive values")
        if any(b >= a for a, b in zip(sched, sched[1:])):
            raise ValueError("eps_schedule must be strictly decreasing")
        if sched[-1] > 1e-10:
            raise ValueError("eps_schedule must end at or below 1e-10")
        if not 0 < self.damping < 1:
            raise ValueError("damping factor must lie in (0, 1)")
        if self.max_halvings < 1 or self.max_iter < 1:
            raise ValueError("max_halvings and max_iter must be positive")


class _Discretisation:
    """Conservative three-point scheme on possibly non-uniform nodes."""

    def __init__(self, inst: ProblemInstance, x: np.ndarray):
        self.inst, self.x, self.p = inst, x, inst.p
        self.h = np.diff(x)
        hm, hp = self.h[:-1], self.h[1:]
        self.hc = 0.5 * (hm + hp)
        self.xi = x[1:-1]
        self.bi = np.asarray(inst.b(self.xi), dtype=float)
        self.fi = np.asarray(inst.f(self.xi), dtype=float)
        # central first-derivative weights
        self.cm = -hp / (hm * (hm + hp))
        self.c0 = (hp - hm) / (hm * hp)
        self.cp = hm / (hp * (hm + hp))

    def _convection(self, U):
        return self.cm * U[:-2] + self.c0 * U[1:-1] + self.cp * U[2:]

    def residual(self, U, eps):
        s = np.diff(U) / self.h
        w = (s * s + eps * eps) ** ((self.p - 2) / 2) * s
        R = (-(w[1:] - w[:-1]) / self.hc - self.bi * self._convection(U)
             + self.inst.phi.value(self.xi, U[1:-1]) - self.fi)
        return R, s

    def _banded(self, dw, U):
        lo = -dw[:-1] / self.hc - self.bi * self.cm
        di = (dw[1:] + dw[:-1]) / self.hc - self.bi * self.c0 \
            + self.inst.phi.partial_s(self.xi, U[1:-1])
        up = -dw[1:] / self.hc - self.bi * self.cp
        ab = np.zeros((3, self.xi.size))
        ab[0, 1:] = up[:-1]
        ab[1] = di
        ab[2, :-1] = lo[1:]
        return ab

    def jacobian(self, U, s, eps):
        p = self.p
        dw = (s * s + eps * eps) ** ((p - 4) / 2) * ((p - 1) * s * s + eps * eps) / self.h
        return self._banded(dw, U)

    def linear_start(self, U):
        """One Newton step of the problem with constant diffusion ``kappa``."""
        p = self.p
        kappa = (p - 1) * max(1.0, float(np.max(np.abs(self.fi)))) ** ((p - 2) / (p - 1))
        s = np.diff(U) / self.h
        R = (-kappa * np.diff(s) / self.hc - self.bi * self._convection(U)
             + self.inst.phi.value(self.xi, U[1:-1]) - self.fi)
        ab = self._banded(kappa / self.h, U)
        out = U.copy()
        out[1:-1] += solve_banded((1, 1), ab, -R)
        return out


def _newton_stages(inst: ProblemInstance, x: np.ndarray, target: float,
                   config: NewtonConfig, initial: np.ndarray | None) -> tuple[np.ndarray, float, list]:
    disc = _Discretisation(inst, x)
    U = inst.bc_left + (x + 1) / 2 * (inst.bc_right - inst.bc_left)
    if initial is not None:
        U = np.array(initial, dtype=float)
        if U.shape != x.shape:
            raise ValueError("initial guess must match the grid")
        U[0], U[-1] = inst.bc_left, inst.bc_right
    elif config.warm_start:
        U = disc.linear_start(U)
    history = []
    last = len(config.eps_schedule) - 1
    for stage, eps in enumerate(config.eps_schedule):
        status, iters = "max_iter", 0
        R, s = disc.residual(U, eps)
        r = float(np.max(np.abs(R)))
        for iters in range(config.max_iter):
            if r <= target:
                status = "converged"
                break
            try:
                d = solve_banded((1, 1), disc.jacobian(U, s, eps), -R)
            except (np.linalg.LinAlgError, ValueError):
                status = "singular"
                break
            lam = 1.0
            for _ in range(config.max_halvings):
                trial = U.copy()
                trial[1:-1] += lam * d
                Rt, st = disc.residual(trial, eps)
                rt = float(np.max(np.abs(Rt)))
                if np.isfinite(rt) and rt < (1 - 1e-4 * lam) * r:
                    break
                lam *= config.damping
            else:
                status = "damping exhausted"
                break
            U, R, s, r = trial, Rt, st, rt
        else:
            if r <= target:
                status = "converged"
        history.append({"eps": eps, "iterations": iters, "residual": r, "status": status,
                        "nodes": int(x.size)})
        if stage == last and status != "converged":
            raise NewtonDiverged(f"Newton {status} at eps={eps:g} (residual {r:.3e})",
                                 stage=eps, residual=r)
    return U, r, history


def solve_newton_fd(inst: ProblemInstance, policy: NumericPolicy | None = None,
                    config: NewtonConfig | None = None, nodes: np.ndarray | None = None,
                    initial: np.ndarray | None = None) -> SolutionProfile:
    """Damped Newton with continuation in the flux regularisation ``eps``.

    The flux is replaced by ``(s^2 + eps^2)^{(p-2)/2} s``.  Each stage starts
    from the previous one.  A stage that stalls is recorded and skipped; only
    a stall at the final ``eps`` raises :class:`NewtonDiverged`.

    With ``config.richardson`` the system is also solved on the grid with all
    midpoints added, and the two second-order solutions are combined as
    ``(4 U_fine - U)/3`` at the original nodes.
    """
    policy = policy or NumericPolicy()
    config = config or NewtonConfig()
    x = policy.nodes(inst.breakpoints) if nodes is None else np.asarray(nodes, dtype=float)
    target = policy.tol_solve * (1 + float(np.max(np.abs(inst.f(x)))))
    U, r, history = _newton_stages(inst, x, target, config, initial)
    if config.richardson:
        xf = np.union1d(x, 0.5 * (x[1:] + x[:-1]))
        Uf, rf, hist_f = _newton_stages(inst, xf, target, config, None)
        history += hist_f
        U = (4.0 * Uf[::2] - U) / 3.0
        r = max(r, rf)
    du = nodal_derivative(x, U)
    return SolutionProfile(GridFunction(x, U), du, "newton-fd", residual_sup=r,
                           regularization_final=config.eps_schedule[-1],
                           breakpoints=inst.breakpoints,
                           meta={"history": history, "richardson": config.richardson,
                                 "p": inst.p})


def shooting_applicable(inst: ProblemInstance) -> bool:
    return inst.constant_drift() is not None and inst.phi.is_zero


def solve(inst: ProblemInstance, policy: NumericPolicy | None = None, method: str = "auto",
          nodes: np.ndarray | None = None) -> SolutionProfile:
    """Dispatch to shooting (``auto`` when applicable) or Newton."""
    if method == "auto":
        method = "shooting" if shooting_applicable(inst) else "newton"
    if method == "shooting":
        return solve_shooting(inst, policy, nodes=nodes)
    if method in ("newton", "newton-fd"):
        return solve_newton_fd(inst, policy, nodes=nodes)
    raise ValueError(f"unknown method {method!r}")


__all__ = ["antiderivative", "ShootingState", "solve_shooting", "NewtonConfig",
           "solve_newton_fd", "solve", "shooting_applicable", "DEFAULT_EPS_SCHEDULE"]
