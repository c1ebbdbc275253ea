"""Comparison of ordered solution pairs.

:func:`compare` splits the interior nodes of a pair ``u <= v`` into the
contact set ``P0`` (``u = v`` up to tolerance) and the strict set ``P1``
(``u < v``).  It also records one-sided boundary derivatives.  The remaining
functions check structural statements about such pairs:

* vanishing derivatives at contact points;
* ``P1`` being a single open interval when there is no reaction;
* the boundary-point ordering ``v'(1) < u'(1) <= 0 <= u'(-1) < v'(-1)``;
* for constant drift, ``u = v`` on the upwind side of a contact point.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .coretypes import (NumericPolicy, ProblemInstance, ReactionField, ScalarField,
                        SolutionProfile, probe_grid, require_same_grid)
from .errors import (HypothesisNotMet, NoContactPoint, NotAContactPoint,
                     StructureViolation)
from .examples import (PlateauExampleParams, ThetaFamilyParams, f_theta, plateau_gap, plateau_instance,
                       plateau_profiles, theta_profile, u_theta)
from .operators import (apply_operator, check_hypothesis_H0, check_hypothesis_Hpm1, flux,
                        nodal_derivative)
from .solver import solve

DERIVATIVE_TOL = 1e-4
CONTACT_DELTA = 0.01
MERGE_GAP = 3
ALTERNATIVES = ("alt1", "alt2", "both", "neither", "not-applicable")


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs ``(i, j)`` (inclusive) where ``mask`` is true."""
    if not mask.any():
        return []
    padded = np.concatenate([[False], mask, [False]]).astype(int)
    d = np.diff(padded)
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1) - 1))


def _boundary_derivatives(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    d = np.gradient(y[[0, 1, 2]], x[[0, 1, 2]], edge_order=2)[0], \
        np.gradient(y[[-3, -2, -1]], x[[-3, -2, -1]], edge_order=2)[-1]
    return float(d[0]), float(d[1])


@dataclass(eq=False)
class ComparisonVerdict:
    wcp_holds: bool
    min_gap: float
    P1_intervals: list[tuple[float, float]]
    P0_intervals: list[tuple[float, float]]
    contact_points: list[dict[str, float]]
    boundary: dict[str, float]
    hopf_ordering_holds: bool
    dichotomy_alternative: str
    tolerances_used: dict[str, Any]
    threshold: float = 0.0
    reversed_nodes: list[int] = field(default_factory=list)
    # node-level data for the structural checks
    nodes: np.ndarray = field(default=None, repr=False)
    gap: np.ndarray = field(default=None, repr=False)
    du_u: np.ndarray = field(default=None, repr=False)
    du_v: np.ndarray = field(default=None, repr=False)
    p1_runs: list[tuple[int, int]] = field(default_factory=list, repr=False)
    p0_runs: list[tuple[int, int]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "wcp_holds": bool(self.wcp_holds),
            "min_gap": float(self.min_gap),
            "contact_threshold": float(self.threshold),
            "P1_intervals": [[float(a), float(b)] for a, b in self.P1_intervals],
            "P0_intervals": [[float(a), float(b)] for a, b in self.P0_intervals],
            "contact_points": [{k: float(v) for k, v in c.items()} for c in self.contact_points],
            "reversed_nodes": [float(self.nodes[i]) for i in self.reversed_nodes],
            "boundary": {k: float(v) for k, v in self.boundary.items()},
            "hopf_ordering_holds": bool(self.hopf_ordering_holds),
            "dichotomy_alternative": self.dichotomy_alternative,
            "tolerances_used": dict(self.tolerances_used),
        }


def compare(u: SolutionProfile, v: SolutionProfile, policy: NumericPolicy | None = None,
            f: ScalarField | None = None, g: ScalarField | None = None,
            b0: float | None = None) -> ComparisonVerdict:
    """Contact/strict decomposition of the pair ``(u, v)``.

    A node is in contact when ``|v - u| <= tol_contact (1 + max(sup|u|, sup|v|))``.
    A run of strict interior nodes ``i..j`` becomes the open interval
    ``(x[i-1], x[j+1])``; a contact run becomes ``[x[i], x[j]]``, extended to
    ``-1`` or ``1`` when it reaches the boundary.  When ``f``, ``g`` and ``b0``
    are given, the constant-drift dichotomy is evaluated as well.
    """
    policy = policy or NumericPolicy()
    x = require_same_grid(u, v)
    gap = v.values - u.values
    scale = max(float(np.max(np.abs(u.values))), float(np.max(np.abs(v.values))))
    thr = policy.tol_contact * (1 + scale)
    n = x.size
    inner = gap[1:-1]
    strict = np.zeros(n, dtype=bool)
    strict[1:-1] = inner > thr
    contact = np.zeros(n, dtype=bool)
    contact[1:-1] = np.abs(inner) <= thr
    reversed_nodes = [int(i) + 1 for i in np.flatnonzero(inner < -thr)]

    p1_runs = [(int(i), int(j)) for i, j in _runs(strict)]
    p0_runs = [(int(i), int(j)) for i, j in _runs(contact)]
    P1 = [(float(x[i - 1]), float(x[j + 1])) for i, j in p1_runs]
    P0 = [(-1.0 if i == 1 else float(x[i]), 1.0 if j == n - 2 else float(x[j]))
          for i, j in p0_runs]

    contacts = []
    for i, j in p0_runs:
        left_strict = strict[i - 1]
        right_strict = strict[j + 1]
        if left_strict and right_strict:
            picks = [i + int(np.argmin(np.abs(gap[i:j + 1])))]
        else:
            picks = ([j] if right_strict else []) + ([i] if left_strict else [])
        for k in picks:
            contacts.append({"x0": float(x[k]), "u_val": float(u.values[k]),
                             "du_val": float(u.du[k]), "dv_val": float(v.du[k])})

    du_l, du_r = _boundary_derivatives(x, u.values)
    dv_l, dv_r = _boundary_derivatives(x, v.values)
    boundary = {"du_left": du_l, "dv_left": dv_l, "du_right": du_r, "dv_right": dv_r}
    slack = policy.tol_contact * (1 + max(abs(du_l), abs(du_r), abs(dv_l), abs(dv_r)))
    hopf = (dv_r < du_r - policy.tol_contact and du_r <= slack and -slack <= du_l
            and du_l < dv_l - policy.tol_contact and bool(np.all(strict[1:-1])))

    verdict = ComparisonVerdict(
        wcp_holds=bool(np.min(gap) >= -thr), min_gap=float(np.min(gap)),
        P1_intervals=P1, P0_intervals=P0, contact_points=contacts, boundary=boundary,
        hopf_ordering_holds=bool(hopf), dichotomy_alternative="not-applicable",
        tolerances_used=policy.to_dict(), threshold=thr, reversed_nodes=reversed_nodes,
        nodes=x, gap=gap, du_u=u.du, du_v=v.du, p1_runs=p1_runs, p0_runs=p0_runs)
    if f is not None and g is not None and b0 is not None:
        try:
            verdict.dichotomy_alternative = check_drift_dichotomy(u, v, f, g, b0, policy).alternative
        except NoContactPoint:
            pass
    return verdict


def solve_pair(inst: ProblemInstance, g: ScalarField, policy: NumericPolicy | None = None,
               method: str = "auto") -> tuple[SolutionProfile, SolutionProfile, ComparisonVerdict]:
    """Solve with sources ``inst.f`` and ``g`` on a common grid and compare."""
    policy = policy or NumericPolicy()
    inst_g = inst.with_source(g)
    nodes = policy.nodes(sorted(set(inst.breakpoints) | set(inst_g.breakpoints)))
    u = solve(inst, policy, method, nodes=nodes)
    v = solve(inst_g, policy, method, nodes=nodes)
    b0 = inst.constant_drift() if inst.phi.is_zero else None
    return u, v, compare(u, v, policy, inst.f, g, b0)


# ---------------------------------------------------------------------------
# interval structure


@dataclass
class StructureReport:
    holds: bool
    classification: str
    a_left: float | None = None
    a_right: float | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.holds

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _merged(runs: list[tuple[int, int]], gap_nodes: int) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for i, j in runs:
        if out and i - out[-1][1] - 1 <= gap_nodes:
            out[-1] = (out[-1][0], j)
        else:
            out.append((i, j))
    return out


def check_interval_structure(verdict: ComparisonVerdict, phi_is_zero: bool,
                             deriv_tol: float = DERIVATIVE_TOL) -> StructureReport:
    """Check that ``P1`` is one open interval ``(a_left, a_right)``.

    The cases are ``case-i`` (``P1 = (-1, 1)``), ``case-ii`` (contact on the
    left with ``u' = v' = 0`` at ``a_left``), ``case-iii`` (the mirror image)
    and ``empty``.  With a reaction term the statement does not apply and the
    result is ``not-covered``.
    """
    x = verdict.nodes
    n = x.size
    runs = _merged(verdict.p1_runs, MERGE_GAP)
    if not phi_is_zero:
        return StructureReport(True, "not-covered", details={"components": len(runs)})
    if len(runs) >= 2:
        raise StructureViolation(
            f"strict set has {len(runs)} components without a reaction term: "
            + ", ".join(f"({x[i - 1]:.6g}, {x[j + 1]:.6g})" for i, j in runs))
    if not runs:
        return StructureReport(True, "empty", details={"identical": True})
    i, j = runs[0]
    a_left, a_right = float(x[i - 1]), float(x[j + 1])
    cases, checks = [], {}
    if i == 1 and j == n - 2:
        cases.append("case-i")
    if i > 1:
        cases.append("case-ii")
        k = i - 1
        checks["left_derivatives"] = [float(verdict.du_u[k]), float(verdict.du_v[k])]
        checks["left_contact"] = bool(np.all(np.abs(verdict.gap[1:i]) <= verdict.threshold))
    if j < n - 2:
        cases.append("case-iii")
        k = j + 1
        checks["right_derivatives"] = [float(verdict.du_u[k]), float(verdict.du_v[k])]
        checks["right_contact"] = bool(np.all(np.abs(verdict.gap[j + 1:-1]) <= verdict.threshold))
    ok = all(v for k, v in checks.items() if k.endswith("contact"))
    ok = ok and all(abs(d) <= deriv_tol for k, v in checks.items()
                    if k.endswith("derivatives") for d in v)
    return StructureReport(ok, "+".join(cases).replace("+case-", "+"), a_left, a_right,
                           details=checks)


# ---------------------------------------------------------------------------
# contact diagnostics


def _continuous_at(fld: ScalarField, x0: float, step: float = 1e-9) -> bool:
    vals = np.asarray(fld(np.array([x0 - step, x0, x0 + step]).clip(-1, 1)), dtype=float)
    return bool(np.ptp(vals) <= 1e-6 * (1 + np.max(np.abs(vals))))


def contact_point_diagnostics(u: SolutionProfile, v: SolutionProfile, f: ScalarField,
                              g: ScalarField, x0: float, policy: NumericPolicy | None = None,
                              delta: float = CONTACT_DELTA, deriv_tol: float = DERIVATIVE_TOL,
                              phi_is_zero: bool = True, p: float | None = None) -> dict[str, Any]:
    """Diagnostics at a contact point ``x0`` with a strict neighbourhood on one side.

    Asserted: ``u'(x0) = v'(x0) = 0`` and, when both sources are continuous at
    ``x0`` and there is no reaction, ``f(x0) = g(x0)``.  The jump of the flux
    derivative and the one-sided source inequality are reported only.
    """
    policy = policy or NumericPolicy()
    x = require_same_grid(u, v)
    if not -1 < x0 < 1:
        raise NotAContactPoint(f"x0 = {x0} is not interior")
    gap = v.values - u.values
    thr = policy.tol_contact * (1 + max(np.max(np.abs(u.values)), np.max(np.abs(v.values))))
    k = int(np.argmin(np.abs(x - x0)))
    if abs(gap[k]) > thr:
        raise NotAContactPoint(f"v - u = {gap[k]:.3e} at x = {x[k]:.6g} exceeds {thr:.3e}")
    strict = gap > thr
    left = strict & (x >= x0 - delta) & (x < x[k])
    right = strict & (x > x[k]) & (x <= x0 + delta)
    if not (left.any() or right.any()):
        raise HypothesisNotMet(f"no strict node within {delta} of x0 = {x0}")
    fx, gx = float(f(x[k])), float(g(x[k]))
    continuous = _continuous_at(f, x[k]) and _continuous_at(g, x[k])
    p = p if p is not None else _p_of(u, v)

    def dflux_at(prof):
        if prof.dflux is not None:
            return float(prof.dflux[k])
        if p is None:
            return float("nan")
        return float(nodal_derivative(x, flux(p, prof.du))[k])

    src_tol = policy.tol_contact * (1 + max(abs(fx), abs(gx)))
    checks = {"derivatives_vanish": abs(u.du[k]) <= deriv_tol and abs(v.du[k]) <= deriv_tol}
    if continuous and phi_is_zero:
        checks["sources_agree"] = abs(fx - gx) <= src_tol
    return {
        "x0": float(x[k]),
        "side_strict": {"left": bool(left.any()), "right": bool(right.any())},
        "du": abs(float(u.du[k])), "dv": abs(float(v.du[k])),
        "f": fx, "g": gx, "source_gap": abs(fx - gx), "sources_continuous": continuous,
        "source_inequality": bool(fx <= gx + src_tol),
        "flux_derivative_gap": dflux_at(u) - dflux_at(v),
        "checks": {k2: bool(v2) for k2, v2 in checks.items()},
        "holds": bool(all(checks.values())),
    }


def _p_of(u: SolutionProfile, v: SolutionProfile) -> float | None:
    p = u.meta.get("p", v.meta.get("p"))
    return float(p) if p is not None else None


# ---------------------------------------------------------------------------
# boundary ordering


def check_hopf_global(u: SolutionProfile, v: SolutionProfile, f: ScalarField, g: ScalarField,
                      policy: NumericPolicy | None = None) -> dict[str, Any]:
    """Boundary ordering ``v'(1) < u'(1) <= 0 <= u'(-1) < v'(-1)`` and ``u < v`` inside.

    The verdict is ``"true"``, ``"false"`` or ``"hypothesis-not-met"``.  The
    last one is used when the sources differ but not on sets of positive
    measure next to both ends.  Identical sources give ``"false"``.
    """
    policy = policy or NumericPolicy()
    verdict = compare(u, v, policy)
    b = verdict.boundary
    tol = policy.tol_contact
    slack = tol * (1 + max(abs(val) for val in b.values()))
    items = {
        "dv_right < du_right": b["dv_right"] < b["du_right"] - tol,
        "du_right <= 0": b["du_right"] <= slack,
        "0 <= du_left": b["du_left"] >= -slack,
        "du_left < dv_left": b["du_left"] < b["dv_left"] - tol,
        "u < v inside": not verdict.P0_intervals and not verdict.reversed_nodes,
    }
    hyp = check_hypothesis_Hpm1(f, g, policy=policy)
    failures = [k for k, ok in items.items() if not ok]
    identical = hyp.details["gap_nodes"] == 0
    if hyp.holds:
        status = "false" if failures else "true"
    else:
        status = "false" if identical else "hypothesis-not-met"
    return {"verdict": status, "failures": failures, "boundary": dict(b),
            "hypothesis": hyp.to_dict(), "min_gap": verdict.min_gap}


# ---------------------------------------------------------------------------
# constant-drift dichotomy


@dataclass
class DichotomyReport:
    alternative: str
    holds: bool
    x0: float
    required: tuple[str, ...]
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def check_drift_dichotomy(u: SolutionProfile, v: SolutionProfile, f: ScalarField,
                          g: ScalarField, b0: float, policy: NumericPolicy | None = None,
                          x0: float | None = None,
                          deriv_tol: float = DERIVATIVE_TOL) -> DichotomyReport:
    """Constant drift: ``u = v`` and ``f = g`` on the upwind side of a contact point.

    Alternative 1 is ``(-1, x0]`` and is required for ``b0 <= 0``;
    alternative 2 is ``[x0, 1)`` and is required for ``b0 >= 0``.  Equalities
    are checked pointwise at the nodes.
    """
    policy = policy or NumericPolicy()
    x = require_same_grid(u, v)
    gap = v.values - u.values
    thr = policy.tol_contact * (1 + max(np.max(np.abs(u.values)), np.max(np.abs(v.values))))
    interior = np.abs(gap[1:-1]) <= thr
    if not interior.any():
        raise NoContactPoint("u and v do not touch at any interior node")
    if x0 is None:
        verdict = compare(u, v, policy)
        if verdict.contact_points:
            x0 = verdict.contact_points[0]["x0"]
        elif not verdict.p1_runs:
            x0 = 0.0
        else:
            raise NoContactPoint("no contact point adjacent to a strict interval")
    k = int(np.argmin(np.abs(x - x0)))
    if not 0 < k < x.size - 1 or abs(gap[k]) > thr:
        raise NoContactPoint(f"x0 = {x0} is not an interior contact node")
    fx, gx = np.asarray(f(x), dtype=float), np.asarray(g(x), dtype=float)
    src_tol = policy.tol_contact * (1 + max(np.max(np.abs(fx)), np.max(np.abs(gx))))

    def side(sl):
        return {"solutions_equal": bool(np.all(np.abs(gap[sl]) <= thr)),
                "sources_equal": bool(np.all(np.abs(fx[sl] - gx[sl]) <= src_tol)),
                "max_solution_gap": float(np.max(np.abs(gap[sl]))),
                "max_source_gap": float(np.max(np.abs(fx[sl] - gx[sl])))}

    alt1 = side(slice(1, k + 1))
    alt2 = side(slice(k, x.size - 1))
    ok1 = alt1["solutions_equal"] and alt1["sources_equal"]
    ok2 = alt2["solutions_equal"] and alt2["sources_equal"]
    alternative = "both" if ok1 and ok2 else "alt1" if ok1 else "alt2" if ok2 else "neither"
    zero = abs(b0) <= 1e-12
    required = ("alt1", "alt2") if zero else ("alt1",) if b0 < 0 else ("alt2",)
    crit = abs(u.du[k]) <= deriv_tol and abs(v.du[k]) <= deriv_tol
    verified = {"alt1": ok1, "alt2": ok2}
    holds = all(verified[r] for r in required) and bool(crit)
    return DichotomyReport(alternative, bool(holds), float(x[k]), required,
                           {"alt1": alt1, "alt2": alt2, "critical_point": bool(crit),
                            "du": float(u.du[k]), "dv": float(v.du[k]), "b0": float(b0)})


# ---------------------------------------------------------------------------
# end-to-end counterexample checks


def verify_counterexample_theta(params: ThetaFamilyParams,
                            policy: NumericPolicy | None = None) -> dict[str, Any]:
    """Reaction-term counterexample: ordered sources, ordered solutions, contact at 0.

    Checks (a) ``f_theta1 < f_theta2`` away from 0, (b) the solved pair is
    ordered and (c) the exact solutions touch at 0.
    """
    policy = policy or NumericPolicy()
    report: dict[str, Any] = {"params": {"p": params.p, "theta1": params.theta1,
                                         "theta2": params.theta2, "lambda": params.lam},
                              "policy": policy.to_dict()}
    if params.identical:
        report.update(status="identical family members", degenerate=True, all_pass=False,
                      checks={})
        return report
    b, phi = params.drift_field(), params.reaction()
    probes = probe_grid(policy.grid_n)
    off = probes[probes != 0.0]
    f1 = f_theta(params.p, params.theta1, b, phi, off)
    f2 = f_theta(params.p, params.theta2, b, phi, off)
    f_gap = f2 - f1
    at0 = [float(f_theta(params.p, t, b, phi, 0.0)) for t in (params.theta1, params.theta2)]

    u_sol = solve(params.instance(params.theta1), policy, "newton")
    v_sol = solve(params.instance(params.theta2), policy, "newton")
    num = compare(u_sol, v_sol, policy)
    x = u_sol.nodes
    exact = compare(theta_profile(params, params.theta1, x),
                    theta_profile(params, params.theta2, x), policy)
    u_gap = u_theta(params.theta2, probes) - u_theta(params.theta1, probes)
    zeros = probes[u_gap == 0.0]
    checks = {
        "sources_strictly_ordered": bool(np.all(f_gap > 0)),
        "wcp_holds": bool(num.wcp_holds and exact.wcp_holds),
        "touch_at_zero": bool(u_theta(params.theta1, 0.0) == u_theta(params.theta2, 0.0)),
    }
    report.update(
        status="ok" if all(checks.values()) else "failed", degenerate=False,
        checks=checks, all_pass=bool(all(checks.values())),
        f_gap_min=float(np.min(f_gap)), f_probe_points=int(off.size), f_at_zero=at0,
        u_gap_min=float(np.min(u_gap)), u_gap_zeros=[float(z) for z in zeros],
        numerical_min_gap=num.min_gap,
        residual_sup=max(u_sol.residual_sup, v_sol.residual_sup),
        solver_error=[float(np.max(np.abs(u_sol.values - u_theta(params.theta1, x)))),
                      float(np.max(np.abs(v_sol.values - u_theta(params.theta2, x))))],
        P0_intervals=[list(iv) for iv in exact.P0_intervals],
        P1_intervals=[list(iv) for iv in exact.P1_intervals],
        structure=check_interval_structure(exact, phi_is_zero=False).classification)
    return report


def verify_counterexample_plateau(p: float, policy: NumericPolicy | None = None) -> dict[str, Any]:
    """Plateau counterexample with constant negative drift.

    (a) closed-form residuals, (b) ``f <= g`` with ``f != g``, (c) contact set
    ``(-1, -1/2]`` and strict set ``(-1/2, 1)``, (d) upwind alternative at
    ``-1/2``, (e) interval structure with left contact.
    """
    params = PlateauExampleParams(p)
    policy = policy or NumericPolicy()
    if p < 2.5:
        policy = policy.relaxed(10.0)
    inst_f, inst_g = plateau_instance(p, "f"), plateau_instance(p, "g")
    x = policy.nodes(params.breakpoints)
    h = float(np.max(np.diff(x)))
    u, v = plateau_profiles(p, x)
    res = [apply_operator(inst_f, u).sup_norm, apply_operator(inst_g, v).sup_norm]

    probes = probe_grid(policy.grid_n)
    fv, gv = inst_f.f(probes), inst_g.f(probes)
    src_tol = policy.tol_contact * (1 + float(np.max(np.abs(gv))))
    ordered = bool(np.all(fv <= gv + src_tol))
    gap_points = int(np.sum(gv - fv > src_tol))

    verdict = compare(u, v, policy, inst_f.f, inst_g.f, params.b0)
    thr = verdict.threshold
    analytic = plateau_gap(p, x)
    first = int(np.argmax((analytic > thr) & (x > -0.5)))
    p0_ok = any(a <= -1.0 and b_ >= -0.5 - 1e-12 for a, b_ in verdict.P0_intervals)
    p1 = verdict.P1_intervals
    p1_ok = (len(p1) == 1 and p1[0][1] == 1.0
             and abs(p1[0][0] - x[first - 1]) <= h * (1 + 1e-9))
    analytic_ok = bool(np.all(analytic[(x > -0.5) & (x < 1)] > 0))
    p1_at_half = bool(p1) and abs(p1[0][0] + 0.5) <= h * (1 + 1e-9)

    dich = check_drift_dichotomy(u, v, inst_f.f, inst_g.f, params.b0, policy, x0=-0.5)
    structure = check_interval_structure(verdict, phi_is_zero=True)
    checks = {
        "residuals": bool(max(res) <= policy.tol_residual),
        "sources_ordered": ordered and gap_points > 0,
        "contact_structure": bool(p0_ok and p1_ok and analytic_ok),
        "upwind_alternative": bool(dich.holds and dich.alternative in ("alt1", "both")),
        "left_contact_case": bool(structure.holds and structure.classification == "case-ii"),
    }
    return {
        "p": float(p), "b0": params.b0, "x_s": params.xs, "policy": policy.to_dict(),
        "checks": checks, "all_pass": bool(all(checks.values())),
        "residual_sup": res, "source_gap_points": gap_points, "min_gap": verdict.min_gap,
        "P0_intervals": [list(iv) for iv in verdict.P0_intervals],
        "P1_intervals": [list(iv) for iv in p1],
        "P1_left_end_within_one_node_of_half": p1_at_half,
        "first_resolved_gap_node": float(x[first]),
        "dichotomy": dich.to_dict(), "structure": structure.to_dict(),
        "contact_points": verdict.contact_points,
    }


__all__ = ["ComparisonVerdict", "compare", "solve_pair", "StructureReport",
           "check_interval_structure", "contact_point_diagnostics", "check_hopf_global",
           "DichotomyReport", "check_drift_dichotomy", "verify_counterexample_theta",
           "verify_counterexample_plateau", "DERIVATIVE_TOL", "CONTACT_DELTA"]
