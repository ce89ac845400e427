"""A tiny imperative language for exercising the execution pipeline.

Programs are a restricted statement/expression subset validated against a
whitelist, then executed with a fixed builtin table.  Protocol: the process
reads one JSON array of arguments from stdin (bound to ``args`` and to
``a0``, ``a1``, ...), runs the program, and prints the value of the last
top-level expression statement as JSON on stdout.

Run as: python -m xlsearch.toy <file>

Exit codes: 0 ok, 1 runtime error, 2 invalid program.
"""

from __future__ import annotations

import ast
import json
import sys

_ALLOWED_STMT = (
    ast.Expr,
    ast.Assign,
    ast.AugAssign,
    ast.If,
    ast.While,
    ast.For,
    ast.Break,
    ast.Continue,
    ast.Pass,
)

_ALLOWED_EXPR = (
    ast.BinOp,
    ast.UnaryOp,
    ast.BoolOp,
    ast.Compare,
    ast.Name,
    ast.Constant,
    ast.List,
    ast.Tuple,
    ast.Subscript,
    ast.Slice,
    ast.Call,
    ast.IfExp,
    ast.Load,
    ast.Store,
)

_ALLOWED_OPS = (
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.FloorDiv, ast.Mod, ast.Pow,
    ast.USub, ast.UAdd, ast.Not,
    ast.And, ast.Or,
    ast.Eq, ast.NotEq, ast.Lt, ast.LtE, ast.Gt, ast.GtE, ast.In, ast.NotIn,
)

_BUILTINS = {
    "len": len,
    "abs": abs,
    "min": min,
    "max": max,
    "sum": sum,
    "sorted": sorted,
    "range": range,
    "int": int,
    "float": float,
    "str": str,
    "bool": bool,
    "round": round,
    "print": print,
}

_RESULT = "__toy_result__"


class ToySyntaxError(Exception):
    pass


def _check(node: ast.AST) -> None:
    for child in ast.walk(node):
        if isinstance(child, ast.Module):
            continue
        if isinstance(child, _ALLOWED_STMT):
            if isinstance(child, ast.Assign):
                if len(child.targets) != 1 or not isinstance(child.targets[0], ast.Name):
                    raise ToySyntaxError(
                        f"line {child.lineno}: only single-name assignment allowed"
                    )
            if isinstance(child, ast.AugAssign) and not isinstance(child.target, ast.Name):
                raise ToySyntaxError(
                    f"line {child.lineno}: augmented assignment target must be a name"
                )
            if isinstance(child, ast.For) and not isinstance(child.target, ast.Name):
                raise ToySyntaxError(
                    f"line {child.lineno}: loop target must be a name"
                )
            continue
        if isinstance(child, _ALLOWED_EXPR):
            if isinstance(child, ast.Call):
                if not isinstance(child.func, ast.Name) or child.func.id not in _BUILTINS:
                    raise ToySyntaxError(
                        f"line {child.lineno}: only builtin calls allowed"
                    )
                if child.keywords:
                    raise ToySyntaxError(
                        f"line {child.lineno}: keyword arguments not allowed"
                    )
            continue
        if isinstance(child, (ast.boolop, ast.operator, ast.unaryop, ast.cmpop)):
            if not isinstance(child, _ALLOWED_OPS):
                raise ToySyntaxError(f"operator {type(child).__name__} not allowed")
            continue
        if isinstance(child, (ast.expr_context, ast.keyword)):
            continue
        raise ToySyntaxError(f"construct {type(child).__name__} not allowed")


def compile_program(source: str):
    """Validate and compile; the last top-level expression feeds the result."""
    try:
        tree = ast.parse(source, mode="exec")
    except SyntaxError as exc:
        raise ToySyntaxError(str(exc)) from None
    _check(tree)
    for node in tree.body:
        if isinstance(node, ast.Expr):
            capture = ast.Assign(
                targets=[ast.Name(id=_RESULT, ctx=ast.Store())], value=node.value
            )
            ast.copy_location(capture, node)
            tree.body[tree.body.index(node)] = capture
    ast.fix_missing_locations(tree)
    return compile(tree, "<toy>", "exec")


def run_program(source: str, arguments: list):
    """Execute and return (has_value, value)."""
    code = compile_program(source)
    env = {"__builtins__": {}, "args": list(arguments)}
    for i, arg in enumerate(arguments):
        env[f"a{i}"] = arg
    env.update(_BUILTINS)
    exec(code, env)
    if _RESULT in env:
        return True, env[_RESULT]
    return False, None


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m xlsearch.toy <file>", file=sys.stderr)
        return 2
    try:
        source = open(argv[0], "r", encoding="utf-8").read()
    except OSError as exc:
        print(f"cannot read program: {exc}", file=sys.stderr)
        return 2
    try:
        arguments = json.load(sys.stdin)
    except ValueError as exc:
        print(f"stdin is not a JSON array: {exc}", file=sys.stderr)
        return 1
    if not isinstance(arguments, list):
        print("stdin must hold a JSON array", file=sys.stderr)
        return 1
    try:
        has_value, value = run_program(source, arguments)
    except ToySyntaxError as exc:
        print(f"invalid program: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if has_value:
        try:
            sys.stdout.write(json.dumps(value))
        except (TypeError, ValueError) as exc:
            print(f"result not serializable: {exc}", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
