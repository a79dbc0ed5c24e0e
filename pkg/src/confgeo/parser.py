"""Expression and system-file parsing.

Expression grammar: ^ > unary- > * / > + -, with left-associative * / + -
and right-associative ^; exponents must be integer constants.  Variables
are the literal tokens x, y<i>, p<i>, q<i>; rational literals are <int> or
<int>/<int> (the latter is ordinary division).

System files are line-oriented: `m = <int>` first, then one `f<i> = <expr>`
per line; `#` starts a comment; whitespace is insignificant.  The comments
`# name: ...` and `# expect: ...` are read as optional metadata.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .expr import (Constant, Expr, PoleError, SamplePoint, VarId, X,
                   ZeroDenominatorError, eneg, epow, eprod, equot, esum,
                   eval_exact, variables_of, Variable)
from .jet import OdeSystem


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


_TOKEN_RE = re.compile(r"\s*(?:(?P<int>\d+)|(?P<var>[xypq]\d*)|(?P<op>[-+*/^()])|(?P<bad>\S))")


def tokenize(text: str, line_offset: int = 1):
    tokens = []
    for ln, line in enumerate(text.split("\n"), start=line_offset):
        body = line.split("#", 1)[0]
        pos = 0
        while pos < len(body):
            mobj = _TOKEN_RE.match(body, pos)
            if mobj is None:
                break
            col = mobj.start(mobj.lastgroup) + 1
            if mobj.group("bad"):
                raise ParseError(f"unexpected character {mobj.group('bad')!r}", ln, col)
            if mobj.group("int"):
                tokens.append(("int", int(mobj.group("int")), ln, col))
            elif mobj.group("var"):
                tokens.append(("var", mobj.group("var"), ln, col))
            elif mobj.group("op"):
                tokens.append(("op", mobj.group("op"), ln, col))
            pos = mobj.end()
    return tokens


class _ExprParser:
    def __init__(self, tokens, m: int | None, end_line: int):
        self.tokens = tokens
        self.i = 0
        self.m = m
        self.end = (end_line, 1)

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self):
        t = self._peek()
        if t is None:
            raise ParseError("unexpected end of expression", *self.end)
        self.i += 1
        return t

    def _expect_op(self, op: str):
        t = self._next()
        if t[0] != "op" or t[1] != op:
            raise ParseError(f"expected {op!r}, found {t[1]!r}", t[2], t[3])

    def parse(self) -> Expr:
        e = self.parse_sum()
        t = self._peek()
        if t is not None:
            raise ParseError(f"unexpected trailing token {t[1]!r}", t[2], t[3])
        return e

    def parse_sum(self) -> Expr:
        terms = [self.parse_term()]
        while True:
            t = self._peek()
            if t and t[0] == "op" and t[1] in "+-":
                self.i += 1
                rhs = self.parse_term()
                terms.append(rhs if t[1] == "+" else eneg(rhs))
            else:
                return esum(terms)

    def parse_term(self) -> Expr:
        e = self.parse_unary()
        while True:
            t = self._peek()
            if t and t[0] == "op" and t[1] in "*/":
                self.i += 1
                rhs = self.parse_unary()
                if t[1] == "*":
                    e = eprod((e, rhs))
                else:
                    try:
                        e = equot(e, rhs)
                    except ZeroDenominatorError:
                        raise ParseError("division by zero", t[2], t[3]) from None
            else:
                return e

    def parse_unary(self) -> Expr:
        t = self._peek()
        if t and t[0] == "op" and t[1] == "-":
            self.i += 1
            return eneg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        t = self._peek()
        if t and t[0] == "op" and t[1] == "^":
            self.i += 1
            n = self._exponent_value(t)
            try:
                return epow(base, n)
            except ZeroDenominatorError:
                raise ParseError("zero raised to a negative power", t[2], t[3]) from None
        return base

    def _exponent_value(self, caret) -> int:
        exp = self.parse_unary()
        if variables_of(exp):
            raise ParseError("exponent must be an integer constant", caret[2], caret[3])
        try:
            v = eval_exact(exp, SamplePoint(1, (Fraction(0),) * 4))
        except PoleError:
            raise ParseError("exponent does not evaluate", caret[2], caret[3]) from None
        if v.denominator != 1:
            raise ParseError(f"non-integer exponent {v}", caret[2], caret[3])
        return int(v)

    def parse_atom(self) -> Expr:
        t = self._next()
        kind, val, ln, col = t
        if kind == "int":
            return Constant(val)
        if kind == "var":
            return Variable(self._varid(val, ln, col))
        if kind == "op" and val == "(":
            e = self.parse_sum()
            self._expect_op(")")
            return e
        raise ParseError(f"unexpected token {val!r}", ln, col)

    def _varid(self, tok: str, ln: int, col: int) -> VarId:
        if tok == "x":
            return X
        if len(tok) == 1:
            raise ParseError(f"variable {tok!r} needs an index", ln, col)
        if tok[0] == "x":
            raise ParseError("x carries no index", ln, col)
        idx = int(tok[1:])
        if idx < 1:
            raise ParseError(f"variable index must be >= 1 in {tok!r}", ln, col)
        if self.m is not None and idx > self.m:
            raise ParseError(f"variable {tok!r} out of range for m={self.m}", ln, col)
        return VarId(tok[0], idx)


def parse_expression(text: str, m: int | None = None, line_offset: int = 1) -> Expr:
    tokens = tokenize(text, line_offset)
    if not tokens:
        raise ParseError("empty expression", line_offset, 1)
    last_line = tokens[-1][2]
    return _ExprParser(tokens, m, last_line).parse()


# --------------------------------------------------------------------------
# system files
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SystemFile:
    m: int
    rhs: tuple                 # raw expression strings f1..fm
    exprs: tuple               # parsed expressions
    name: str | None = None
    expected: str | None = None

    def system(self) -> OdeSystem:
        return OdeSystem(self.m, self.exprs)


_HEADER_RE = re.compile(r"^\s*m\s*=\s*(\d+)\s*$")
_RHS_RE = re.compile(r"^\s*f(\d+)\s*=\s*(.*\S)\s*$")
_META_RE = re.compile(r"^\s*#\s*(name|expect)\s*:\s*(.*\S)\s*$")


def parse_system_source(text: str, name: str | None = None) -> SystemFile:
    m = None
    rhs: dict[int, tuple[str, int]] = {}
    meta = {"name": name, "expect": None}
    for ln, raw in enumerate(text.split("\n"), start=1):
        meta_m = _META_RE.match(raw)
        if meta_m:
            meta[meta_m.group(1)] = meta_m.group(2)
            continue
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        hm = _HEADER_RE.match(line)
        if hm:
            if m is not None:
                raise ParseError("duplicate m declaration", ln, 1)
            m = int(hm.group(1))
            if m < 2:
                raise ParseError(f"system dimension must be m >= 2, got {m}", ln, 1)
            continue
        rm = _RHS_RE.match(line)
        if rm:
            if m is None:
                raise ParseError("m = <int> must come before the right-hand sides", ln, 1)
            i = int(rm.group(1))
            if not 1 <= i <= m:
                raise ParseError(f"f{i} out of range for m={m}", ln, 1)
            if i in rhs:
                raise ParseError(f"duplicate right-hand side f{i}", ln, 1)
            rhs[i] = (rm.group(2), ln)
            continue
        raise ParseError(f"cannot parse line: {line.strip()!r}", ln, 1)
    if m is None:
        raise ParseError("missing m = <int> declaration", 1, 1)
    missing = [i for i in range(1, m + 1) if i not in rhs]
    if missing:
        raise ParseError(f"missing right-hand side(s): {', '.join(f'f{i}' for i in missing)}",
                         1, 1)
    exprs = []
    strings = []
    for i in range(1, m + 1):
        text_i, ln = rhs[i]
        exprs.append(parse_expression(text_i, m, line_offset=ln))
        strings.append(text_i)
    return SystemFile(m, tuple(strings), tuple(exprs),
                      name=meta["name"], expected=meta["expect"])


def load_system_file(path) -> SystemFile:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    import os
    return parse_system_source(text, name=os.path.basename(str(path)))
