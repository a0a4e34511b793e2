"""Tiny arithmetic expression language for user-defined problems.

Grammar: numbers, the variables ``t``, ``s``, ``x``, constants ``e`` and ``pi``,
operators ``+ - * / ^`` (``**`` also accepted), parentheses and the functions
``exp ln log sqrt abs sin cos``. Expressions compile to numpy-vectorized
callables.
"""

import ast

import numpy as np

from .exceptions import ConfigurationError

_FUNCS = {
    "exp": np.exp,
    "ln": np.log,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
}
_CONSTS = {"e": np.e, "pi": np.pi}
_BINOPS = {
    ast.Add: np.add,
    ast.Sub: np.subtract,
    ast.Mult: np.multiply,
    ast.Div: np.divide,
    ast.Pow: np.power,
}
_UNARY = {ast.USub: np.negative, ast.UAdd: np.positive}


def _check(node, variables):
    if isinstance(node, ast.Expression):
        return _check(node.body, variables)
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
            raise ConfigurationError(f"unsupported literal {node.value!r}")
        return
    if isinstance(node, ast.Name):
        if node.id not in variables and node.id not in _CONSTS:
            raise ConfigurationError(
                f"unknown name {node.id!r}; allowed: {sorted(variables)} and e, pi"
            )
        return
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        _check(node.left, variables)
        _check(node.right, variables)
        return
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        _check(node.operand, variables)
        return
    if isinstance(node, ast.Call):
        if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS:
            raise ConfigurationError(f"unknown function in {ast.unparse(node)!r}")
        if len(node.args) != 1 or node.keywords:
            raise ConfigurationError(f"{node.func.id} takes exactly one argument")
        _check(node.args[0], variables)
        return
    raise ConfigurationError(f"unsupported syntax: {ast.unparse(node)!r}")


def _eval(node, env):
    if isinstance(node, ast.Constant):
        return float(node.value)
    if isinstance(node, ast.Name):
        return env[node.id] if node.id in env else _CONSTS[node.id]
    if isinstance(node, ast.BinOp):
        return _BINOPS[type(node.op)](_eval(node.left, env), _eval(node.right, env))
    if isinstance(node, ast.UnaryOp):
        return _UNARY[type(node.op)](_eval(node.operand, env))
    return _FUNCS[node.func.id](_eval(node.args[0], env))


class Expression:
    """Compiled expression; call with positional arrays in ``variables`` order."""

    def __init__(self, text, variables):
        self.text = text
        self.variables = tuple(variables)
        try:
            tree = ast.parse(text.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ConfigurationError(f"cannot parse expression {text!r}: {exc.msg}") from None
        _check(tree, set(self.variables))
        self._body = tree.body

    def __call__(self, *args):
        if len(args) != len(self.variables):
            raise TypeError(f"expected {len(self.variables)} arguments, got {len(args)}")
        env = {k: np.asarray(v, dtype=float) for k, v in zip(self.variables, args)}
        shape = np.broadcast_shapes(*(v.shape for v in env.values())) if env else ()
        with np.errstate(all="ignore"):
            out = _eval(self._body, env)
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()

    def __repr__(self):
        return f"Expression({self.text!r}, {self.variables})"


def compile_expr(text, variables):
    return Expression(str(text), variables)
