import json

import numpy as np
import pytest

from plap.coretypes import (GridFunction, NumericPolicy, ProblemInstance, ReactionField,
                            ScalarField, SolutionProfile, conjugate_exponent, probe_grid,
                            require_same_grid)
from plap.errors import DomainError, GridMismatch, MissingDerivative, UnsupportedExponent


class TestConjugateExponent:
    @pytest.mark.parametrize("p", [2.12, 2.5, 3.0, 4.0, 4.74, 10.0])
    def test_value_and_reciprocal_identity(self, p):
        q = conjugate_exponent(p)
        assert q == pytest.approx(p / (p - 1), rel=1e-15)
        assert 1 / p + 1 / q == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize("p", [1.5, 1.9, 3.0, 7.5])
    def test_involution_in_relaxed_mode(self, p):
        q = conjugate_exponent(p, strict=False)
        assert conjugate_exponent(q, strict=False) == pytest.approx(p, rel=1e-14)

    @pytest.mark.parametrize("p", [2.0, 1.5, 0.0, -3.0])
    def test_strict_rejects_non_degenerate(self, p):
        with pytest.raises(UnsupportedExponent):
            conjugate_exponent(p)

    def test_relaxed_still_rejects_p_at_most_one(self):
        with pytest.raises(UnsupportedExponent):
            conjugate_exponent(1.0, strict=False)


class TestScalarField:
    def test_outside_domain_raises(self):
        fld = ScalarField.expression("x")
        with pytest.raises(DomainError):
            fld(1.01)
        with pytest.raises(DomainError):
            fld(np.array([-1.5, 0.0]))

    def test_scalar_in_scalar_out(self):
        out = ScalarField.expression("x*x")(0.5)
        assert isinstance(out, float) and out == 0.25

    def test_constant_derivative_is_zero(self):
        c = ScalarField.constant(-2.5)
        assert c(0.3) == -2.5
        assert c.deriv(np.array([-1.0, 1.0])).tolist() == [0.0, 0.0]

    def test_missing_derivative(self):
        with pytest.raises(MissingDerivative):
            ScalarField.expression("x").deriv(0.0)

    def test_declared_derivative_consistency(self):
        fld = ScalarField.expression("pow(x, 3) - x", derivative="3*x*x - 1")
        assert fld.derivative_consistency() < 1e-8

    def test_piecewise_half_open_pieces(self):
        fld = ScalarField.piecewise([(-1, 0, "1"), (0, 1, "2")])
        assert fld(-1e-9) == 1 and fld(0.0) == 2 and fld(1.0) == 2
        assert list(fld.breakpoints) == [0.0]

    @pytest.mark.parametrize("pieces", [
        [(-1, 0, "1")],
        [(-1, 0, "1"), (0.1, 1, "2")],
        [(-0.9, 1, "1")],
    ])
    def test_piecewise_must_tile_the_interval(self, pieces):
        with pytest.raises(ValueError):
            ScalarField.piecewise(pieces)

    def test_table_interpolates_linearly(self):
        fld = ScalarField.table([-1, 0, 1], [0, 2, 0])
        assert fld(0.25) == pytest.approx(1.5)

    def test_table_validation(self):
        with pytest.raises(ValueError):
            ScalarField.table([-1, 0.5, 0.2, 1], [0, 0, 0, 0])
        with pytest.raises(ValueError):
            ScalarField.table([-0.5, 1], [0, 0])

    @pytest.mark.parametrize("spec", [
        {"kind": "const", "value": 1.5},
        {"kind": "expr", "expr": "x*x", "derivative": "2*x"},
        {"kind": "piecewise", "pieces": [{"interval": [-1, 0], "expr": "-x"},
                                         {"interval": [0, 1], "expr": "x"}]},
        {"kind": "table", "x": [-1, 0, 1], "y": [1, 0, 3]},
        {"kind": "reflected", "field": {"kind": "expr", "expr": "x + 2"}, "negate": True},
    ])
    def test_spec_round_trip(self, spec):
        fld = ScalarField.from_spec(spec)
        again = ScalarField.from_spec(json.loads(json.dumps(fld.to_spec())))
        x = probe_grid(41)
        assert np.array_equal(fld(x), again(x))

    def test_bare_number_and_string_specs(self):
        assert ScalarField.from_spec(3)(0.0) == 3.0
        assert ScalarField.from_spec("2*x")(0.5) == 1.0

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            ScalarField.from_spec({"kind": "spline"})

    def test_callable_field_has_no_spec(self):
        with pytest.raises(ValueError):
            ScalarField.from_callable(np.sin).to_spec()

    def test_reflection_and_derivative(self):
        fld = ScalarField.expression("x*x*x + x", derivative="3*x*x + 1", breakpoints=(0.25,))
        r = fld.reflected(negate=True)
        x = probe_grid(21)
        assert np.allclose(r(x), -fld(-x))
        assert np.allclose(r.deriv(x), fld.deriv(-x))
        assert list(r.breakpoints) == [-0.25]
        assert r.derivative_consistency() < 1e-8

    def test_reflecting_zero_constant_terminates(self):
        z = ScalarField.constant(0.0).reflected(negate=True)
        assert z(0.5) == 0.0 and z.deriv(0.5) == 0.0


class TestReactionField:
    def test_kinds(self):
        x, s = np.zeros(3), np.array([-2.0, 0.5, 1.0])
        assert np.all(ReactionField.zero().value(x, s) == 0)
        assert np.allclose(ReactionField.linear(3).value(x, s), 3 * s)
        assert np.allclose(ReactionField.power(2, 4).value(x, s), 2 * np.abs(s) ** 2 * s)
        assert np.allclose(ReactionField.power(2, 4).partial_s(x, s), 6 * s * s)

    def test_primitive_closed_forms_and_quadrature(self):
        s = np.linspace(-1, 1, 9)
        x = np.zeros_like(s)
        lin = ReactionField.linear(2.0)
        custom = ReactionField.custom(lambda x, s: 2.0 * s, lambda x, s: np.full_like(s, 2.0))
        assert np.allclose(lin.primitive(x, s), s * s)
        assert np.allclose(custom.primitive(x, s), s * s, atol=1e-14)

    def test_spec_round_trip(self):
        for r in (ReactionField.zero(), ReactionField.linear(5), ReactionField.power(1.5, 3)):
            assert ReactionField.from_spec(r.to_spec(), 3).to_spec() == r.to_spec()

    def test_custom_has_no_spec(self):
        r = ReactionField.custom(lambda x, s: s, lambda x, s: np.ones_like(s))
        with pytest.raises(ValueError):
            r.to_spec()

    def test_validation(self):
        with pytest.raises(ValueError):
            ReactionField("cubic")
        with pytest.raises(ValueError):
            ReactionField("custom")


class TestProblemInstance:
    def test_rejects_p_at_most_two(self):
        with pytest.raises(UnsupportedExponent):
            ProblemInstance(2.0, ScalarField.constant(0), ReactionField.zero(), ScalarField.constant(1))

    def test_rejects_unbounded_source(self):
        with pytest.raises(ValueError):
            ProblemInstance(3.0, ScalarField.constant(0), ReactionField.zero(),
                            ScalarField.expression("1/x"))

    def test_constant_drift_and_breakpoints(self):
        inst = ProblemInstance(3.0, ScalarField.constant(-0.5), ReactionField.zero(),
                               ScalarField.piecewise([(-1, 0.2, "1"), (0.2, 1, "0")]))
        assert inst.constant_drift() == -0.5
        assert inst.breakpoints == (0.2,)
        assert ProblemInstance(3.0, ScalarField.expression("x"), ReactionField.zero(),
                               ScalarField.constant(0)).constant_drift() is None

    def test_spec_round_trip(self):
        spec = {"p": 3.5, "b": {"kind": "const", "value": 1.0}, "phi": {"kind": "linear", "lambda": 2.0},
                "f": {"kind": "expr", "expr": "1 - x*x"}, "bc": [0.0, 0.5]}
        inst = ProblemInstance.from_spec(spec)
        assert inst.bc_right == 0.5
        assert ProblemInstance.from_spec(inst.to_spec()).to_spec() == inst.to_spec()


class TestGridAndProfile:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            GridFunction([-1, 1], [0, 0])
        with pytest.raises(ValueError):
            GridFunction([-1, 0.5, 0.2, 1], [0, 0, 0, 0])
        with pytest.raises(ValueError):
            GridFunction([-0.9, 0, 1], [0, 0, 0])

    def test_grid_is_immutable(self):
        g = GridFunction([-1, 0, 1], [0, 1, 0])
        with pytest.raises(ValueError):
            g.values[0] = 3

    def test_profile_method_validation(self):
        g = GridFunction([-1, 0, 1], [0, 1, 0])
        with pytest.raises(ValueError):
            SolutionProfile(g, [0, 0, 0], "guess")

    def test_mirrored_is_involution(self):
        x = NumericPolicy(grid_n=21).nodes([0.13])
        prof = SolutionProfile.from_functions(x, lambda t: (1 - t * t) * (t + 2),
                                              lambda t: -2 * t * (t + 2) + 1 - t * t, breakpoints=(0.13,))
        m = prof.mirrored()
        assert np.allclose(m.values, prof.values[::-1]) and m.breakpoints == (-0.13,)
        mm = m.mirrored()
        assert np.array_equal(mm.nodes, prof.nodes) and np.array_equal(mm.du, prof.du)

    def test_derivative_consistency_bound(self):
        x = NumericPolicy(grid_n=401).nodes()
        prof = SolutionProfile.from_functions(x, np.cos, lambda t: -np.sin(t))
        mismatch, bound = prof.derivative_consistency()
        assert mismatch <= bound

    def test_require_same_grid(self):
        a = SolutionProfile.from_functions(np.linspace(-1, 1, 5), np.cos, np.sin)
        b = SolutionProfile.from_functions(np.linspace(-1, 1, 7), np.cos, np.sin)
        with pytest.raises(GridMismatch):
            require_same_grid(a, b)
        assert require_same_grid(a, a).size == 5


class TestNumericPolicy:
    @pytest.mark.parametrize("n", [10, 2000, 5])
    def test_grid_n_must_be_odd_and_large_enough(self, n):
        with pytest.raises(ValueError):
            NumericPolicy(grid_n=n)

    def test_env_default(self, monkeypatch):
        monkeypatch.setenv("PLAP_DEFAULT_GRID_N", "101")
        assert NumericPolicy().grid_n == 101

    def test_nodes_symmetric_with_breakpoints(self):
        pol = NumericPolicy(grid_n=11)
        x = pol.nodes()
        assert np.array_equal(x, -x[::-1]) and x[5] == 0.0
        y = pol.nodes([0.3333, 0.2 + 1e-9])
        assert 0.3333 in y and 0.2 + 1e-9 in y and y.size == 12

    def test_relaxed(self):
        pol = NumericPolicy(grid_n=11).relaxed(10)
        assert pol.tol_solve == pytest.approx(1e-7) and pol.tol_contact == pytest.approx(1e-6)
