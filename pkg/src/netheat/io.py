"""Network spec files, the closed initial-data expression grammar, and CSV/JSON output.

File format (line oriented, '#' comments, sections in brackets):

    [vertices]
    c
    a
    [edges]
    e0 c a 1.0
    [mesh]
    n = 200
    [initial.u]
    e0: 1 + gauss(0.5, 0.15)
    *: 1
    [initial.c]
    *: 0

Initial-data expressions use a deliberately tiny grammar over the local edge
coordinate x in [0, 1]: numbers, x, pi, + - * / ^, parentheses, sin, cos,
exp, and gauss(center, width) = exp(-(x-center)^2 / (2 width^2)).  Edge lines
may name an edge or '*' as a default for unnamed edges.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .functions import GraphFunction
from .network import build_network


class ParseError(InputError):
    def __init__(self, message, line=None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


# ---------------------------------------------------------------------------
# expression grammar
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
                    r"|([A-Za-z_]+)|(\*\*|[-+*/^(),]))")

_FUNCS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}


def _tokenize(text):
    pos, out = 0, []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ParseError(f"bad character {text[pos:].strip()[0]!r} "
                                 f"in expression {text!r}")
            break
        num, name, op = m.groups()
        if num:
            out.append(("num", float(num)))
        elif name:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    out.append(("end", None))
    return out


class _ExprParser:
    """Recursive descent over the closed grammar; compiles to a numpy callable."""

    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None, value=None):
        k, v = self.toks[self.i]
        if (kind and k != kind) or (value is not None and v != value):
            raise ParseError(f"unexpected {v!r} in expression {self.text!r}")
        self.i += 1
        return v

    def parse(self):
        fn = self.expr()
        if self.peek()[0] != "end":
            raise ParseError(f"trailing input in expression {self.text!r}")
        return fn

    def expr(self):
        fn = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.take("op")
            rhs = self.term()
            fn = (lambda a, b: lambda x: a(x) + b(x))(fn, rhs) if op == "+" \
                else (lambda a, b: lambda x: a(x) - b(x))(fn, rhs)
        return fn

    def term(self):
        fn = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.take("op")
            rhs = self.factor()
            fn = (lambda a, b: lambda x: a(x) * b(x))(fn, rhs) if op == "*" \
                else (lambda a, b: lambda x: a(x) / b(x))(fn, rhs)
        return fn

    def factor(self):
        base = self.unary()
        if self.peek() == ("op", "^"):
            self.take("op")
            expo = self.factor()
            return lambda x: base(x) ** expo(x)
        return base

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take("op")
            inner = self.unary()
            return lambda x: -inner(x)
        if self.peek() == ("op", "+"):
            self.take("op")
            return self.unary()
        return self.atom()

    def atom(self):
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return lambda x, v=value: np.full_like(np.asarray(x, dtype=float), v)
        if kind == "name":
            self.take()
            if value == "x":
                return lambda x: np.asarray(x, dtype=float)
            if value == "pi":
                return lambda x: np.full_like(np.asarray(x, dtype=float), np.pi)
            if value in _FUNCS:
                f = _FUNCS[value]
                self.take("op", "(")
                arg = self.expr()
                self.take("op", ")")
                return lambda x: f(arg(x))
            if value == "gauss":
                self.take("op", "(")
                c = self.expr()
                self.take("op", ",")
                w = self.expr()
                self.take("op", ")")
                return lambda x: np.exp(-(np.asarray(x, dtype=float) - c(x)) ** 2
                                        / (2.0 * w(x) ** 2))
            raise ParseError(f"unknown name {value!r} in expression {self.text!r}")
        if (kind, value) == ("op", "("):
            self.take()
            fn = self.expr()
            self.take("op", ")")
            return fn
        raise ParseError(f"unexpected token in expression {self.text!r}")


def compile_expression(text):
    """Callable xi-array -> values for one edge expression."""
    fn = _ExprParser(text).parse()
    probe = fn(np.array([0.0, 0.5, 1.0]))
    if not np.all(np.isfinite(probe)):
        raise ParseError(f"expression {text!r} is not finite on [0, 1]")
    return fn


# ---------------------------------------------------------------------------
# network spec files
# ---------------------------------------------------------------------------

@dataclass
class NetworkSpec:
    net: object
    n_mesh: int = 200
    edge_names: tuple = ()
    u_exprs: dict = field(default_factory=dict)
    c_exprs: dict = field(default_factory=dict)

    def _build_initial(self, exprs):
        if not exprs:
            return None
        name_to_idx = {nm: i for i, nm in enumerate(self.edge_names)}
        fns = {}
        default = None
        for key, text in exprs.items():
            if key == "*":
                default = compile_expression(text)
            elif key in name_to_idx:
                fns[name_to_idx[key]] = compile_expression(text)
            else:
                raise ParseError(f"unknown edge {key!r} in initial data")
        def sample(j, xi):
            fn = fns.get(j, default)
            if fn is None:
                raise ParseError(f"no expression for edge {self.edge_names[j]!r} "
                                 "and no '*' default")
            return fn(xi)
        return GraphFunction.from_callable(self.net, self.n_mesh, sample)

    def initial_u(self):
        return self._build_initial(self.u_exprs)

    def initial_c(self):
        return self._build_initial(self.c_exprs)


def parse_network_file(text):
    """Parse the sectioned text format into a NetworkSpec."""
    section = None
    vertices = []
    edge_rows = []
    n_mesh = 200
    u_exprs, c_exprs = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError("unterminated section header", lineno)
            section = line[1:-1].strip().lower()
            if section not in ("vertices", "edges", "mesh", "initial.u",
                               "initial.c"):
                raise ParseError(f"unknown section [{section}]", lineno)
            continue
        if section == "vertices":
            if len(line.split()) != 1:
                raise ParseError("vertex lines hold a single id", lineno)
            vertices.append(line)
        elif section == "edges":
            parts = line.split()
            if len(parts) != 4:
                raise ParseError("edge lines are: name endpoint endpoint weight",
                                 lineno)
            name, u, v, w = parts
            try:
                w = float(w)
            except ValueError:
                raise ParseError(f"bad edge weight {parts[3]!r}", lineno) from None
            edge_rows.append((name, u, v, w, lineno))
        elif section == "mesh":
            m = re.fullmatch(r"n\s*=\s*(\d+)", line)
            if not m:
                raise ParseError("mesh section expects 'n = <intervals>'", lineno)
            n_mesh = int(m.group(1))
            if n_mesh < 2:
                raise ParseError("mesh needs at least 2 intervals", lineno)
        elif section in ("initial.u", "initial.c"):
            if ":" not in line:
                raise ParseError("initial lines are '<edge>|*: <expression>'",
                                 lineno)
            key, expr = (s.strip() for s in line.split(":", 1))
            (u_exprs if section == "initial.u" else c_exprs)[key] = expr
        else:
            raise ParseError("content before any section header", lineno)
    if not vertices:
        raise ParseError("missing [vertices] section")
    if not edge_rows:
        raise ParseError("missing [edges] section")
    names = [r[0] for r in edge_rows]
    if len(set(names)) != len(names):
        raise ParseError("duplicate edge name")
    try:
        net = build_network([(u, v, w) for _, u, v, w, _ in edge_rows],
                            vertex_ids=vertices)
    except InputError:
        raise
    spec = NetworkSpec(net=net, n_mesh=n_mesh, edge_names=tuple(names),
                       u_exprs=u_exprs, c_exprs=c_exprs)
    for exprs in (u_exprs, c_exprs):
        for text_ in exprs.values():
            compile_expression(text_)
    return spec


def load_network_file(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_network_file(fh.read())


def serialize_network(net, edge_names=None, n_mesh=None):
    """Text round-trip of a Network (numbers as shortest repr)."""
    lines = ["[vertices]"]
    lines += list(net.vertex_ids)
    lines.append("[edges]")
    for j, (u, v, w) in enumerate(net.edges):
        name = edge_names[j] if edge_names else f"e{j}"
        lines.append(f"{name} {net.vertex_ids[u]} {net.vertex_ids[v]} {w!r}")
    if n_mesh is not None:
        lines.append("[mesh]")
        lines.append(f"n = {n_mesh}")
    return "\n".join(lines) + "\n"


def format_float(v):
    """Shortest round-trip decimal for CSV output."""
    return repr(float(v))
