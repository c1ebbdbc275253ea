"""A tiny, safe expression language for coefficient fields.

Grammar (a strict subset of Python syntax)::

    expr    := expr ('+' | '-') term | term
    term    := term ('*' | '/') factor | factor
    factor  := ('+' | '-') factor | power
    power   := atom ['**' factor]
    atom    := NUMBER | 'x' | call | '(' expr ')'
    call    := 'abs(' expr ')' | 'sgn(' expr ')' | 'pow(' expr ',' expr ')'

``sgn(0) = 0``.  ``pow(a, b)`` and ``a ** b`` are the same operation; a negative
base with a non-integer exponent evaluates to NaN, so write ``pow(abs(x), 1.5)``.
"""

from __future__ import annotations

import ast
from collections.abc import Callable

import numpy as np

_FUNCS = {"abs": 1, "sgn": 1, "pow": 2}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


class ExpressionError(ValueError):
    """The text is not a valid field expression."""


def _build(node: ast.AST) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(node, ast.Expression):
        return _build(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        c = float(node.value)
        return lambda x: np.full_like(x, c)
    if isinstance(node, ast.Name):
        if node.id != "x":
            raise ExpressionError(f"unknown identifier {node.id!r}")
        return lambda x: x
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        inner = _build(node.operand)
        if isinstance(node.op, ast.USub):
            return lambda x: -inner(x)
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _build(node.left), _build(node.right)
        return lambda x: op(left(x), right(x))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ExpressionError("only abs, sgn and pow may be called")
        name = node.func.id
        if node.keywords or len(node.args) != _FUNCS[name]:
            raise ExpressionError(f"{name} takes {_FUNCS[name]} positional argument(s)")
        args = [_build(a) for a in node.args]
        if name == "abs":
            return lambda x: np.abs(args[0](x))
        if name == "sgn":
            return lambda x: np.sign(args[0](x))
        return lambda x: np.power(args[0](x), args[1](x))
    raise ExpressionError(f"unsupported syntax: {ast.dump(node)[:60]}")


def compile_expression(text: str) -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``text`` into a vectorised function of ``x``."""
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    fn = _build(tree)

    def evaluate(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(fn(np.asarray(x, dtype=float)), dtype=float)

    return evaluate
