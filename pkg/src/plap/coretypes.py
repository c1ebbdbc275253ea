"""Domain types: coefficient fields, problem instances, grids and numeric policy.

Everything here is immutable after construction.  Fields are evaluated on
``[-1, 1]`` only; asking for a value outside the interval raises
:class:`~plap.errors.DomainError` instead of extrapolating.
"""

from __future__ import annotations

import dataclasses
import os
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError, GridMismatch, MissingDerivative, UnsupportedExponent
from .expr import compile_expression

_DOMAIN_SLACK = 1e-12
GRID_ENV_VAR = "PLAP_DEFAULT_GRID_N"


def conjugate_exponent(p: float, strict: bool = True) -> float:
    """Return ``p / (p - 1)``.

    With ``strict`` the degenerate range ``p > 2`` is enforced; otherwise any
    ``p > 1`` is accepted, which makes the map an involution on ``(1, inf)``.
    """
    p = float(p)
    if strict and not p > 2:
        raise UnsupportedExponent(f"p must exceed 2, got {p!r}")
    if not p > 1:
        raise UnsupportedExponent(f"p must exceed 1, got {p!r}")
    return p / (p - 1.0)


def check_exponent(p: float) -> float:
    p = float(p)
    if not np.isfinite(p) or not p > 2:
        raise UnsupportedExponent(f"only the degenerate case p > 2 is supported, got {p!r}")
    return p


def _check_domain(x: np.ndarray) -> None:
    if x.size and (np.nanmin(x) < -1 - _DOMAIN_SLACK or np.nanmax(x) > 1 + _DOMAIN_SLACK):
        raise DomainError("fields are defined on [-1, 1] only")


def probe_grid(n: int = 201) -> np.ndarray:
    x = np.linspace(-1.0, 1.0, n)
    return 0.5 * (x - x[::-1])


# ---------------------------------------------------------------------------
# scalar fields


class ScalarField:
    """A real function on ``[-1, 1]`` with an optional exact derivative.

    Use the constructors :meth:`constant`, :meth:`expression`,
    :meth:`piecewise`, :meth:`table` or :meth:`from_callable`, or
    :meth:`from_spec` for the JSON form.  ``breakpoints`` lists interior points
    where the field or its derivative may fail to be smooth; grids built for a
    problem insert them as nodes.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], *,
                 derivative: ScalarField | None = None,
                 breakpoints: Sequence[float] = (),
                 spec: Mapping[str, Any] | None = None,
                 name: str = ""):
        self._fn = fn
        self.derivative = derivative
        self.breakpoints = tuple(sorted({float(b) for b in breakpoints if -1 < b < 1}))
        self.spec = dict(spec) if spec is not None else None
        self.name = name

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        _check_domain(arr)
        out = np.asarray(self._fn(np.clip(arr, -1.0, 1.0)), dtype=float)
        out = np.broadcast_to(out, arr.shape).copy() if out.shape != arr.shape else out
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        label = self.name or (self.spec or {}).get("kind", "callable")
        return f"ScalarField({label})"

    @property
    def has_derivative(self) -> bool:
        return self.derivative is not None

    def deriv(self, x):
        if self.derivative is None:
            raise MissingDerivative(f"{self!r} has no declared derivative")
        return self.derivative(x)

    # constructors -----------------------------------------------------------

    @classmethod
    def constant(cls, value: float) -> ScalarField:
        c = float(value)
        zero = None if c == 0.0 else cls(lambda x: np.zeros_like(x), spec={"kind": "const", "value": 0.0})
        fld = cls(lambda x: np.full_like(x, c), spec={"kind": "const", "value": c}, name=f"const {c:g}")
        fld.derivative = zero if zero is not None else fld
        return fld

    @classmethod
    def expression(cls, text: str, derivative: str | ScalarField | None = None,
                   breakpoints: Sequence[float] = ()) -> ScalarField:
        d = cls.expression(derivative, breakpoints=breakpoints) if isinstance(derivative, str) else derivative
        spec: dict[str, Any] = {"kind": "expr", "expr": text}
        if isinstance(derivative, str):
            spec["derivative"] = derivative
        elif derivative is not None and derivative.spec is not None:
            spec["derivative"] = derivative.spec
        if breakpoints:
            spec["breakpoints"] = list(breakpoints)
        return cls(compile_expression(text), derivative=d, breakpoints=breakpoints, spec=spec, name=text)

    @classmethod
    def piecewise(cls, pieces: Sequence[tuple[float, float, str | Callable]],
                  derivative: ScalarField | None = None) -> ScalarField:
        """Build from ``(lo, hi, expr)`` pieces covering ``[-1, 1]``.

        Pieces are half-open ``[lo, hi)`` except the last, which is closed.
        """
        pieces = sorted(pieces, key=lambda pc: pc[0])
        if not pieces:
            raise ValueError("piecewise field needs at least one piece")
        if abs(pieces[0][0] + 1) > _DOMAIN_SLACK or abs(pieces[-1][1] - 1) > _DOMAIN_SLACK:
            raise ValueError("pieces must cover [-1, 1]")
        for (lo, hi, _), (lo2, _, _) in zip(pieces, pieces[1:]):
            if not lo < hi or abs(hi - lo2) > _DOMAIN_SLACK:
                raise ValueError("pieces must be contiguous with disjoint interiors")
        if not pieces[-1][0] < pieces[-1][1]:
            raise ValueError("empty piece")
        fns = [compile_expression(e) if isinstance(e, str) else e for _, _, e in pieces]
        cuts = np.array([hi for _, hi, _ in pieces[:-1]])

        def evaluate(x):
            idx = np.searchsorted(cuts, x, side="right")
            out = np.empty_like(x)
            for k, fn in enumerate(fns):
                mask = idx == k
                if np.any(mask):
                    out[mask] = np.asarray(fn(x[mask]), dtype=float)
            return out

        spec = None
        if all(isinstance(e, str) for _, _, e in pieces):
            spec = {"kind": "piecewise",
                    "pieces": [{"interval": [lo, hi], "expr": e} for lo, hi, e in pieces]}
            if derivative is not None and derivative.spec is not None:
                spec["derivative"] = derivative.spec
        return cls(lambda x: evaluate(np.atleast_1d(x)).reshape(np.shape(x)),
                   derivative=derivative, breakpoints=cuts, spec=spec, name="piecewise")

    @classmethod
    def table(cls, xs: Sequence[float], ys: Sequence[float],
              derivative: ScalarField | None = None) -> ScalarField:
        """Piecewise-linear interpolation of samples spanning ``[-1, 1]``."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValueError("table needs matching 1-d x and y with at least two samples")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("table x must be strictly increasing")
        if abs(xs[0] + 1) > _DOMAIN_SLACK or abs(xs[-1] - 1) > _DOMAIN_SLACK:
            raise ValueError("table must span [-1, 1]")
        spec = {"kind": "table", "x": xs.tolist(), "y": ys.tolist()}
        if derivative is not None and derivative.spec is not None:
            spec["derivative"] = derivative.spec
        return cls(lambda x: np.interp(x, xs, ys), derivative=derivative,
                   breakpoints=xs[1:-1], spec=spec, name="table")

    @classmethod
    def from_callable(cls, fn: Callable, derivative: Callable | ScalarField | None = None,
                      breakpoints: Sequence[float] = (), name: str = "") -> ScalarField:
        if derivative is not None and not isinstance(derivative, ScalarField):
            derivative = cls(derivative, breakpoints=breakpoints, name=f"d {name}")
        return cls(fn, derivative=derivative, breakpoints=breakpoints, name=name)

    @classmethod
    def from_spec(cls, spec: Mapping[str, Any] | float | str) -> ScalarField:
        """Parse the JSON ``fieldspec`` form (a bare number or string also works)."""
        if isinstance(spec, (int, float)):
            return cls.constant(spec)
        if isinstance(spec, str):
            return cls.expression(spec)
        kind = spec.get("kind")
        deriv_spec = spec.get("derivative")
        deriv = cls.from_spec(deriv_spec) if deriv_spec is not None else None
        if kind == "const":
            return cls.constant(spec["value"])
        if kind == "expr":
            return cls.expression(spec["expr"], derivative=deriv,
                                  breakpoints=spec.get("breakpoints", ()))
        if kind == "piecewise":
            pieces = [(pc["interval"][0], pc["interval"][1], pc["expr"]) for pc in spec["pieces"]]
            return cls.piecewise(pieces, derivative=deriv)
        if kind == "table":
            return cls.table(spec["x"], spec["y"], derivative=deriv)
        if kind == "reflected":
            return cls.from_spec(spec["field"]).reflected(negate=bool(spec.get("negate", False)))
        raise ValueError(f"unknown field kind {kind!r}")

    def to_spec(self) -> dict[str, Any]:
        if self.spec is None:
            raise ValueError(f"{self!r} has no JSON representation")
        return dict(self.spec)

    # transformations ----------------------------------------------------------

    def reflected(self, negate: bool = False) -> ScalarField:
        """Return ``x -> s * self(-x)`` with ``s = -1`` when ``negate``."""
        sign = -1.0 if negate else 1.0
        fn = self._fn
        spec = None
        if self.spec is not None:
            spec = {"kind": "reflected", "field": self.spec, "negate": negate}
        out = ScalarField(lambda x: sign * fn(-x), breakpoints=[-b for b in self.breakpoints],
                          spec=spec, name=f"reflected({self.name})")
        if self.derivative is self:
            # the zero field is its own derivative
            out.derivative = out
        elif self.derivative is not None:
            # d/dx [s f(-x)] = -s f'(-x)
            out.derivative = self.derivative.reflected(negate=not negate)
        return out

    # checks -------------------------------------------------------------------

    def derivative_consistency(self, n: int = 101, step: float = 1e-5) -> float:
        """Largest mismatch between the declared derivative and a central difference.

        Probe points within ``2 * step`` of a breakpoint are skipped; the two
        endpoints use second-order one-sided differences.
        """
        if self.derivative is None:
            raise MissingDerivative(f"{self!r} has no declared derivative")
        x = probe_grid(n)
        bps = np.asarray(self.breakpoints)
        if bps.size:
            x = x[np.min(np.abs(x[:, None] - bps[None, :]), axis=1) > 2 * step]
        fd = np.empty_like(x)
        inner = np.abs(x) <= 1 - step
        xi = x[inner]
        fd[inner] = (self(xi + step) - self(xi - step)) / (2 * step)
        for idx in np.flatnonzero(~inner):
            s = -step if x[idx] > 0 else step
            x0 = x[idx]
            fd[idx] = (-3 * self(x0) + 4 * self(x0 + s) - self(x0 + 2 * s)) / (2 * s)
        return float(np.max(np.abs(fd - self.derivative(x))))

    def is_constant(self, n: int = 201, atol: float = 1e-12) -> bool:
        vals = self(probe_grid(n))
        return bool(np.ptp(vals) < atol)


# ---------------------------------------------------------------------------
# reaction term


@dataclass(frozen=True)
class ReactionField:
    """The zero-order term ``phi(x, s)`` with its ``s``-derivative.

    ``kind`` is one of ``zero``, ``linear`` (``lam * s``), ``power``
    (``lam * |s|^(p-2) s``) or ``custom``.
    """

    kind: str = "zero"
    lam: float = 0.0
    p: float | None = None
    value_fn: Callable | None = None
    partial_fn: Callable | None = None
    primitive_fn: Callable | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "linear", "power", "custom"):
            raise ValueError(f"unknown reaction kind {self.kind!r}")
        if self.kind == "power" and (self.p is None or not self.p > 1):
            raise ValueError("power reaction needs an exponent p > 1")
        if self.kind == "custom" and (self.value_fn is None or self.partial_fn is None):
            raise ValueError("custom reaction needs value_fn and partial_fn")

    @classmethod
    def zero(cls) -> ReactionField:
        return cls("zero")

    @classmethod
    def linear(cls, lam: float) -> ReactionField:
        return cls("linear", float(lam))

    @classmethod
    def power(cls, lam: float, p: float) -> ReactionField:
        return cls("power", float(lam), float(p))

    @classmethod
    def custom(cls, value: Callable, partial_s: Callable,
               primitive: Callable | None = None) -> ReactionField:
        return cls("custom", value_fn=value, partial_fn=partial_s, primitive_fn=primitive)

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind in ("linear", "power") and self.lam == 0.0)

    def value(self, x, s):
        x, s = np.broadcast_arrays(np.asarray(x, float), np.asarray(s, float))
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "linear":
            return self.lam * s
        if self.kind == "power":
            return self.lam * np.abs(s) ** (self.p - 2) * s
        return np.asarray(self.value_fn(x, s), dtype=float)

    def partial_s(self, x, s):
        x, s = np.broadcast_arrays(np.asarray(x, float), np.asarray(s, float))
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "linear":
            return np.full_like(s, self.lam)
        if self.kind == "power":
            return self.lam * (self.p - 1) * np.abs(s) ** (self.p - 2)
        return np.asarray(self.partial_fn(x, s), dtype=float)

    def primitive(self, x, s, order: int = 16):
        """``Phi(x, s) = int_0^s phi(x, t) dt``; Gauss-Legendre for custom kinds."""
        x, s = np.broadcast_arrays(np.asarray(x, float), np.asarray(s, float))
        if self.kind == "zero":
            return np.zeros_like(s)
        if self.kind == "linear":
            return 0.5 * self.lam * s * s
        if self.kind == "power":
            return self.lam * np.abs(s) ** self.p / self.p
        if self.primitive_fn is not None:
            return np.asarray(self.primitive_fn(x, s), dtype=float)
        nodes, weights = np.polynomial.legendre.leggauss(order)
        t = 0.5 * (nodes[:, None] + 1.0) * s.ravel()[None, :]
        vals = self.value(np.broadcast_to(x.ravel(), t.shape), t)
        return (0.5 * s.ravel() * (weights @ vals)).reshape(s.shape)

    def reflected(self) -> ReactionField:
        if self.kind != "custom":
            return self
        v, d, prim = self.value_fn, self.partial_fn, self.primitive_fn
        return ReactionField.custom(lambda x, s: v(-x, s), lambda x, s: d(-x, s),
                                    None if prim is None else (lambda x, s: prim(-x, s)))

    def to_spec(self) -> dict[str, Any]:
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind in ("linear", "power"):
            return {"kind": self.kind, "lambda": self.lam}
        raise ValueError("custom reactions have no JSON representation")

    @classmethod
    def from_spec(cls, spec: Mapping[str, Any] | None, p: float) -> ReactionField:
        if spec is None:
            return cls.zero()
        kind = spec.get("kind", "zero")
        if kind == "zero":
            return cls.zero()
        if kind == "linear":
            return cls.linear(spec["lambda"])
        if kind == "power":
            return cls.power(spec["lambda"], p)
        raise ValueError(f"unknown reaction kind {kind!r}")


# ---------------------------------------------------------------------------
# problem instance


@dataclass(frozen=True)
class ProblemInstance:
    """``-(|u'|^{p-2} u')' - b(x) u' + phi(x, u) = f(x)`` on ``(-1, 1)`` with Dirichlet data."""

    p: float
    b: ScalarField
    phi: ReactionField
    f: ScalarField
    bc_left: float = 0.0
    bc_right: float = 0.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "p", check_exponent(self.p))
        vals = self.f(probe_grid(401))
        if not np.all(np.isfinite(vals)):
            raise ValueError("source f must be bounded on [-1, 1]")

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.b.breakpoints) | set(self.f.breakpoints)))

    def constant_drift(self) -> float | None:
        """The drift value if ``b`` is constant on the probe grid, else ``None``."""
        vals = self.b(probe_grid(201))
        if np.ptp(vals) < 1e-12:
            return float(vals[100])
        return None

    def with_source(self, f: ScalarField, name: str | None = None) -> ProblemInstance:
        return dataclasses.replace(self, f=f, name=self.name if name is None else name)

    def to_spec(self) -> dict[str, Any]:
        return {"p": self.p, "b": self.b.to_spec(), "phi": self.phi.to_spec(),
                "f": self.f.to_spec(), "bc": [self.bc_left, self.bc_right]}

    @classmethod
    def from_spec(cls, spec: Mapping[str, Any]) -> ProblemInstance:
        p = check_exponent(spec["p"])
        bc = spec.get("bc", [0.0, 0.0])
        return cls(p=p, b=ScalarField.from_spec(spec.get("b", 0.0)),
                   phi=ReactionField.from_spec(spec.get("phi"), p),
                   f=ScalarField.from_spec(spec.get("f", 0.0)),
                   bc_left=float(bc[0]), bc_right=float(bc[1]), name=spec.get("name", ""))


# ---------------------------------------------------------------------------
# grids and profiles


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes, values = _frozen(self.nodes), _frozen(self.values)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("a grid needs at least three nodes")
        if values.shape != nodes.shape:
            raise ValueError("values and nodes differ in length")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[0] != -1.0 or nodes[-1] != 1.0:
            raise ValueError("nodes must start at -1 and end at 1")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def h_max(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def __len__(self):
        return self.nodes.size

    def same_grid(self, other: GridFunction) -> bool:
        return self.nodes.shape == other.nodes.shape and bool(np.all(self.nodes == other.nodes))


@dataclass(frozen=True, eq=False)
class SolutionProfile:
    """Nodal values and derivatives of a (numerical or exact) solution.

    ``dflux`` optionally carries the exact derivative of ``|u'|^{p-2} u'`` at
    the nodes; closed-form profiles set it, solver output does not.
    """

    u: GridFunction
    du: np.ndarray
    method: str
    residual_sup: float = 0.0
    regularization_final: float = 0.0
    dflux: np.ndarray | None = None
    breakpoints: tuple[float, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.method not in ("shooting", "newton-fd", "closed-form"):
            raise ValueError(f"unknown method {self.method!r}")
        du = _frozen(self.du)
        if du.shape != self.u.nodes.shape:
            raise ValueError("du must match the node count")
        object.__setattr__(self, "du", du)
        if self.dflux is not None:
            object.__setattr__(self, "dflux", _frozen(self.dflux))
        if self.regularization_final < 0:
            raise ValueError("regularization must be non-negative")
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))

    @property
    def nodes(self) -> np.ndarray:
        return self.u.nodes

    @property
    def values(self) -> np.ndarray:
        return self.u.values

    @classmethod
    def from_functions(cls, nodes, u: Callable, du: Callable, dflux: Callable | None = None,
                       breakpoints: Sequence[float] = (), **meta) -> SolutionProfile:
        nodes = np.asarray(nodes, dtype=float)
        return cls(GridFunction(nodes, u(nodes)), du(nodes), "closed-form",
                   dflux=None if dflux is None else dflux(nodes),
                   breakpoints=tuple(breakpoints), meta=dict(meta))

    def mirrored(self) -> SolutionProfile:
        """Profile of ``x -> u(-x)`` on the mirrored grid."""
        x = -self.nodes[::-1]
        return dataclasses.replace(
            self, u=GridFunction(x, self.values[::-1]), du=-self.du[::-1],
            dflux=None if self.dflux is None else self.dflux[::-1],
            breakpoints=tuple(-b for b in self.breakpoints), meta=dict(self.meta))

    def derivative_consistency(self, exclude: Sequence[float] | None = None) -> tuple[float, float]:
        """Return ``(mismatch, bound)`` between ``du`` and second-order differences of ``u``.

        ``bound = max(10 h^2, 1e-6) * (1 + sup|u|)``; nodes within ``2h`` of the
        breakpoints (or of ``exclude``) are ignored.
        """
        x, v = self.nodes, self.values
        fd = np.gradient(v, x, edge_order=2)
        h = self.u.h_max
        pts = np.asarray(self.breakpoints if exclude is None else exclude, dtype=float)
        keep = np.ones(x.size, dtype=bool)
        if pts.size:
            keep = np.min(np.abs(x[:, None] - pts[None, :]), axis=1) > 2 * h
        mismatch = float(np.max(np.abs(fd - self.du)[keep])) if np.any(keep) else 0.0
        return mismatch, max(10 * h * h, 1e-6) * (1 + float(np.max(np.abs(v))))


def default_grid_n() -> int:
    raw = os.environ.get(GRID_ENV_VAR)
    return int(raw) if raw else 2001


@dataclass(frozen=True)
class NumericPolicy:
    grid_n: int = field(default_factory=default_grid_n)
    tol_solve: float = 1e-8
    tol_contact: float = 1e-7
    tol_residual: float = 1e-6
    quadrature_order: int = 16

    def __post_init__(self):
        if self.grid_n < 11 or self.grid_n % 2 == 0:
            raise ValueError("grid_n must be odd and at least 11")
        for name in ("tol_solve", "tol_contact", "tol_residual"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.quadrature_order < 1:
            raise ValueError("quadrature_order must be positive")

    def nodes(self, breakpoints: Sequence[float] = ()) -> np.ndarray:
        """Uniform symmetric grid with the interior ``breakpoints`` inserted.

        A breakpoint closer than ``1e-6 h`` to an existing node replaces it.
        """
        x = probe_grid(self.grid_n)
        h = 2.0 / (self.grid_n - 1)
        extra = []
        for bp in breakpoints:
            if not -1 < bp < 1:
                continue
            k = int(np.argmin(np.abs(x - bp)))
            if abs(x[k] - bp) < 1e-6 * h:
                x[k] = bp
            else:
                extra.append(bp)
        return np.union1d(x, extra)

    def relaxed(self, factor: float) -> NumericPolicy:
        return dataclasses.replace(self, tol_solve=self.tol_solve * factor,
                                   tol_contact=self.tol_contact * factor,
                                   tol_residual=self.tol_residual * factor)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def require_same_grid(*profiles: SolutionProfile) -> np.ndarray:
    first = profiles[0].u
    for other in profiles[1:]:
        if not first.same_grid(other.u):
            raise GridMismatch("profiles live on different grids")
    return first.nodes
