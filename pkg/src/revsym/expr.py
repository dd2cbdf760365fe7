"""A small arithmetic language for user-supplied maps.

Expressions are parsed with :mod:`ast` and only a whitelist of nodes is
accepted, so nothing outside arithmetic, ``sin``/``cos``/``exp``/``sqrt``
and the constant ``pi`` can be evaluated.  The grammar is documented in the
README.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
}
CONSTANTS = {"pi": math.pi}

_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}


class ExpressionError(ValueError):
    def __init__(self, message: str, column: int | None = None):
        self.column = column
        where = f" (column {column})" if column is not None else ""
        super().__init__(message + where)


@dataclass(frozen=True)
class Expression:
    source: str
    variables: tuple[str, ...]
    _fn: Callable

    def __call__(self, *args):
        return self._fn(dict(zip(self.variables, args)))


def _compile(node: ast.AST, variables: tuple[str, ...]) -> Callable[[dict], object]:
    col = getattr(node, "col_offset", None)
    col = None if col is None else col + 1
    if isinstance(node, ast.Expression):
        return _compile(node.body, variables)
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ExpressionError(f"unsupported literal {node.value!r}", col)
        value = float(node.value)
        return lambda env: value
    if isinstance(node, ast.Name):
        if node.id in variables:
            name = node.id
            return lambda env: env[name]
        if node.id in CONSTANTS:
            value = CONSTANTS[node.id]
            return lambda env: value
        raise ExpressionError(f"unknown name '{node.id}'", col)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _compile(node.operand, variables)
        if isinstance(node.op, ast.USub):
            return lambda env: np.negative(inner(env))
        return inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op = _BINOPS[type(node.op)]
        left, right = _compile(node.left, variables), _compile(node.right, variables)
        return lambda env: op(left(env), right(env))
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS:
            raise ExpressionError("only sin, cos, exp and sqrt may be called", col)
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes exactly one argument", col)
        fn = FUNCTIONS[node.func.id]
        arg = _compile(node.args[0], variables)
        return lambda env: fn(arg(env))
    raise ExpressionError(f"unsupported syntax: {type(node).__name__}", col)


def parse(source: str, variables=("x", "y")) -> Expression:
    """Compile ``source`` into a vectorized callable of ``variables``."""
    if not isinstance(source, str) or not source.strip():
        raise ExpressionError("empty expression")
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"syntax error: {exc.msg}", exc.offset) from None
    variables = tuple(variables)
    return Expression(source, variables, _compile(tree, variables))


def planar_map(gx: str, gy: str) -> Callable[[np.ndarray], np.ndarray]:
    """``(x, y) -> (gx(x, y), gy(x, y))`` acting on arrays of shape ``(n, 2)``."""
    ex, ey = parse(gx), parse(gy)

    def apply(pts: np.ndarray) -> np.ndarray:
        x, y = pts[:, 0], pts[:, 1]
        return np.column_stack([np.broadcast_to(ex(x, y), x.shape),
                                np.broadcast_to(ey(x, y), x.shape)]).astype(float)

    return apply
