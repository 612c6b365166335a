"""A small arithmetic expression language for scenario files.

Expressions are Python-syntax arithmetic over complex numbers, restricted to
a whitelist of names and functions, and evaluated with numpy so they
vectorize over sample arrays::

    >>> f = compile_expr("zeta + 2*t", ["zeta", "t"])
    >>> complex(f(zeta=1j, t=1))
    (2+1j)
"""
from __future__ import annotations

import ast
from typing import Callable, Iterable

import numpy as np

__all__ = ["ExpressionError", "compile_expr", "compile_vector", "FUNCTIONS"]


class ExpressionError(ValueError):
    pass


FUNCTIONS: dict[str, Callable] = {
    "conj": np.conj,
    "re": np.real,
    "im": np.imag,
    "abs": np.abs,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
}

CONSTANTS = {"pi": np.pi, "i": 1j, "I": 1j}

ALIASES = {"ζ": "zeta", "λ1": "t1", "λ2": "t2", "ψ": "psi", "θ": "theta"}

_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_UNARY = (ast.UAdd, ast.USub)


def _normalize(src: str) -> str:
    for k, v in ALIASES.items():
        src = src.replace(k, v)
    return src.replace("^", "**")


def _validate(node: ast.AST, names: set[str], src: str) -> None:
    for sub in ast.walk(node):
        if isinstance(sub, (ast.Expression, ast.Load)) or isinstance(sub, _BINOPS + _UNARY):
            continue
        if isinstance(sub, ast.BinOp):
            if not isinstance(sub.op, _BINOPS):
                raise ExpressionError(f"operator {type(sub.op).__name__} not allowed in {src!r}")
        elif isinstance(sub, ast.UnaryOp):
            if not isinstance(sub.op, _UNARY):
                raise ExpressionError(f"operator {type(sub.op).__name__} not allowed in {src!r}")
        elif isinstance(sub, ast.Constant):
            if not isinstance(sub.value, (int, float, complex)) or isinstance(sub.value, bool):
                raise ExpressionError(f"literal {sub.value!r} not allowed in {src!r}")
        elif isinstance(sub, ast.Name):
            if sub.id not in names and sub.id not in FUNCTIONS and sub.id not in CONSTANTS:
                raise ExpressionError(f"unknown name {sub.id!r} in {src!r}; allowed: {sorted(names)}")
        elif isinstance(sub, ast.Call):
            if not isinstance(sub.func, ast.Name) or sub.func.id not in FUNCTIONS:
                raise ExpressionError(f"only {sorted(FUNCTIONS)} may be called in {src!r}")
            if sub.keywords or len(sub.args) != 1:
                raise ExpressionError(f"functions take exactly one argument in {src!r}")
        else:
            raise ExpressionError(f"syntax {type(sub).__name__} not allowed in {src!r}")


def compile_expr(src: str, variables: Iterable[str]) -> Callable[..., np.ndarray]:
    """Compile ``src`` into a vectorized function of the named variables."""
    if not isinstance(src, str) or not src.strip():
        raise ExpressionError("expression must be a non-empty string")
    names = set(variables)
    text = _normalize(src)
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {src!r}: {exc.msg}") from exc
    _validate(tree, names, src)
    code = compile(tree, "<expr>", "eval")
    env = {"__builtins__": {}, **FUNCTIONS, **CONSTANTS}

    def fn(**kw):
        missing = names.difference(kw)
        if missing:
            raise ExpressionError(f"missing variables {sorted(missing)} for {src!r}")
        local = {k: np.asarray(v, dtype=complex) for k, v in kw.items()}
        with np.errstate(all="ignore"):
            out = eval(code, env, local)
        return np.asarray(out, dtype=complex)

    fn.source = src
    return fn


def compile_vector(sources: list[str], variables: Iterable[str]) -> Callable[..., np.ndarray]:
    """Compile a list of coordinate expressions into a function returning an
    array with the coordinates on the last axis."""
    if isinstance(sources, str):
        sources = [sources]
    fns = [compile_expr(s, variables) for s in sources]

    def vec(**kw):
        parts = [f(**kw) for f in fns]
        shape = np.broadcast_shapes(*(p.shape for p in parts))
        return np.stack([np.broadcast_to(p, shape) for p in parts], axis=-1)

    vec.sources = list(sources)
    return vec
