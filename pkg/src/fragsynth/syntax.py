"""Canonical surface syntax: pretty-printer and parser.

The canonical form is deterministic (fixed spacing, one statement per
line, two-space indents, minimal parentheses by precedence with
parenthesized equal-precedence right operands). `parse(pretty_print(p))`
reproduces `p` structurally, which also makes the printed text usable as
a dedup key.

    fn name(a: Int, xs: List[Int]) -> Int {
      var var1: Int = 0;
      for (i1; var1 < a; i1++) {
        if (?) {
          var1 = var1 + listGetInt(xs, i1);
        }
      }
      return var1;
    }

Angelic conditions print as `?`. Calls are uniform `component(args)`;
there is no method syntax.
"""

from __future__ import annotations

from .lang import (
    ANGELIC, BOOL, Assign, BinOp, BoolV, Call, Cond, ConstLit, Expr, ExprStmt,
    FloatV, ForCounter, ForEach, If, Index, IndexAssign, IntV, ListV,
    LocalDecl, NotOp, NullV, Param, Program, RecordV, Stmt, StrV, TypeRef,
    VarRef, Value, is_angelic, is_list_type, expr_type, parse_type, type_text,
)

_PREC = {"||": 1, "&&": 2, "==": 3, "<": 4, "<=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_POSTFIX_PREC = 8

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\t": "\\t", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


def _quote(s: str) -> str:
    return '"' + "".join(_ESCAPES.get(c, c) for c in s) + '"'


def literal_text(v: Value) -> str:
    if isinstance(v, IntV):
        return str(v.v)
    if isinstance(v, FloatV):
        return repr(v.v)
    if isinstance(v, BoolV):
        return "true" if v.v else "false"
    if isinstance(v, StrV):
        return _quote(v.v)
    if isinstance(v, NullV):
        return "null"
    raise ValueError(f"value has no literal form: {v!r}")


def expr_text(e: Expr, prec: int = 0) -> str:
    t = e.__class__
    if t is VarRef:
        return e.name
    if t is ConstLit:
        return literal_text(e.value)
    if t is BinOp:
        p = _PREC[e.op]
        s = f"{expr_text(e.lhs, p)} {e.op} {expr_text(e.rhs, p + 1)}"
        return f"({s})" if p < prec else s
    if t is NotOp:
        return f"!({expr_text(e.operand)})"
    if t is Call:
        args = ", ".join(expr_text(a) for a in e.args)
        return f"{e.component}({args})"
    if t is Index:
        return f"{expr_text(e.coll, _POSTFIX_PREC)}[{expr_text(e.index)}]"
    raise TypeError(f"not an expression: {e!r}")


def cond_text(c: Cond) -> str:
    return "?" if is_angelic(c) else expr_text(c)


def _stmt_lines(s: Stmt, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    t = s.__class__
    if t is Assign:
        out.append(f"{pad}{s.name} = {expr_text(s.value)};")
    elif t is IndexAssign:
        coll = expr_text(s.coll, _POSTFIX_PREC)
        out.append(f"{pad}{coll}[{expr_text(s.index)}] = {expr_text(s.value)};")
    elif t is ExprStmt:
        out.append(f"{pad}{expr_text(s.call)};")
    elif t is If:
        out.append(f"{pad}if ({cond_text(s.cond)}) {{")
        for b in s.body:
            _stmt_lines(b, indent + 1, out)
        out.append(f"{pad}}}")
    elif t is ForCounter:
        out.append(f"{pad}for ({s.var}; {cond_text(s.cond)}; {s.var}++) {{")
        for b in s.body:
            _stmt_lines(b, indent + 1, out)
        out.append(f"{pad}}}")
    elif t is ForEach:
        out.append(f"{pad}foreach ({s.var} : {s.iter_name}) {{")
        for b in s.body:
            _stmt_lines(b, indent + 1, out)
        out.append(f"{pad}}}")
    else:
        raise TypeError(f"not a statement: {s!r}")


def stmt_text(s: Stmt, indent: int = 0) -> str:
    out: list[str] = []
    _stmt_lines(s, indent, out)
    return "\n".join(out)


def pretty_print(p: Program) -> str:
    params = ", ".join(f"{q.name}: {type_text(q.type)}" for q in p.params)
    head = f"fn {p.name}({params})"
    if p.ret is not None:
        head += f" -> {type_text(p.ret)}"
    lines = [head + " {"]
    for d in p.locals:
        lines.append(f"  var {d.name}: {type_text(d.type)} = {expr_text(d.init)};")
    for s in p.body:
        _stmt_lines(s, 1, lines)
    if p.ret_expr is not None:
        lines.append(f"  return {expr_text(p.ret_expr)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- lexer

class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_KEYWORDS = {"fn", "var", "return", "if", "for", "foreach",
             "true", "false", "null"}
_TWO_CHAR = ("->", "++", "&&", "||", "==", "<=")
_ONE_CHAR = "(){}[];:,=<+-*/%!?."


def _tokenize(text: str):
    toks: list[tuple[str, str, int, int]] = []  # kind, text, line, col
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "kw" if word in _KEYWORDS else "name"
            toks.append((kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                toks.append(("float", text[i:j], start_line, start_col))
            else:
                toks.append(("int", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if c == '"':
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n:
                    raise ParseError("unterminated string", start_line, start_col)
                ch = text[j]
                if ch == '"':
                    j += 1
                    break
                if ch == "\\":
                    if j + 1 >= n or text[j + 1] not in _UNESCAPES:
                        raise ParseError("bad string escape", line, col + j - i)
                    buf.append(_UNESCAPES[text[j + 1]])
                    j += 2
                    continue
                if ch == "\n":
                    raise ParseError("unterminated string", start_line, start_col)
                buf.append(ch)
                j += 1
            toks.append(("str", "".join(buf), start_line, start_col))
            col += j - i
            i = j
            continue
        two = text[i:i + 2]
        if two in _TWO_CHAR:
            toks.append(("punct", two, start_line, start_col))
            i += 2
            col += 2
            continue
        if c in _ONE_CHAR:
            toks.append(("punct", c, start_line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(("eof", "", line, col))
    return toks


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, text: str, components: dict):
        self.toks = _tokenize(text)
        self.pos = 0
        self.components = components
        self.scopes: list[dict[str, TypeRef]] = [{}]

    # -- token helpers

    def peek(self):
        return self.toks[self.pos]

    def advance(self):
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def error(self, msg: str):
        _, _, line, col = self.peek()
        raise ParseError(msg, line, col)

    def expect(self, kind: str, text: str | None = None):
        k, v, line, col = self.peek()
        if k != kind or (text is not None and v != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {v or k!r}", line, col)
        return self.advance()

    def at_punct(self, text: str) -> bool:
        k, v, _, _ = self.peek()
        return k == "punct" and v == text

    def eat_punct(self, text: str) -> bool:
        if self.at_punct(text):
            self.advance()
            return True
        return False

    # -- scope helpers

    def declare(self, name: str, t: TypeRef):
        if any(name in s for s in self.scopes):
            self.error(f"duplicate variable {name!r}")
        self.scopes[-1][name] = t

    def lookup(self, name: str) -> TypeRef | None:
        for s in reversed(self.scopes):
            if name in s:
                return s[name]
        return None

    # -- grammar

    def parse_program(self) -> Program:
        self.expect("kw", "fn")
        name = self.expect("name")[1]
        self.expect("punct", "(")
        params: list[Param] = []
        if not self.at_punct(")"):
            while True:
                pname = self.expect("name")[1]
                self.expect("punct", ":")
                ptype = self.parse_typeref()
                self.declare(pname, ptype)
                params.append(Param(pname, ptype))
                if not self.eat_punct(","):
                    break
        self.expect("punct", ")")
        ret = None
        if self.eat_punct("->"):
            ret = self.parse_typeref()
        self.expect("punct", "{")
        decls: list[LocalDecl] = []
        while self.peek()[:2] == ("kw", "var"):
            self.advance()
            dname = self.expect("name")[1]
            self.expect("punct", ":")
            dtype = self.parse_typeref()
            self.expect("punct", "=")
            init = self.parse_expr()
            self.expect("punct", ";")
            self.declare(dname, dtype)
            decls.append(LocalDecl(dname, dtype, init))
        body: list[Stmt] = []
        ret_expr = None
        while not self.at_punct("}"):
            if self.peek()[:2] == ("kw", "return"):
                self.advance()
                ret_expr = self.parse_expr()
                self.expect("punct", ";")
                break
            body.append(self.parse_stmt())
        self.expect("punct", "}")
        self.expect("eof")
        if (ret is None) != (ret_expr is None):
            raise ParseError("return expression must match the signature", 1, 1)
        return Program(name, params, ret, decls, body, ret_expr)

    def parse_typeref(self) -> TypeRef:
        k, v, line, col = self.peek()
        if k != "name":
            self.error("expected a type name")
        self.advance()
        if self.eat_punct("["):
            inner = self.parse_typeref()
            self.expect("punct", "]")
            t = TypeRef(v, (inner,))
        else:
            t = TypeRef(v)
        try:
            return parse_type(type_text(t))
        except ValueError as exc:
            raise ParseError(str(exc), line, col) from None

    def parse_block(self) -> list[Stmt]:
        self.expect("punct", "{")
        body: list[Stmt] = []
        while not self.at_punct("}"):
            body.append(self.parse_stmt())
        if not body:
            self.error("control-structure body may not be empty")
        self.expect("punct", "}")
        return body

    def parse_cond(self) -> Cond:
        if self.eat_punct("?"):
            return ANGELIC
        return self.parse_expr()

    def parse_stmt(self) -> Stmt:
        k, v, _, _ = self.peek()
        if (k, v) == ("kw", "if"):
            self.advance()
            self.expect("punct", "(")
            cond = self.parse_cond()
            self.expect("punct", ")")
            return If(cond, self.parse_block())
        if (k, v) == ("kw", "for"):
            self.advance()
            self.expect("punct", "(")
            var = self.expect("name")[1]
            self.expect("punct", ";")
            self.scopes.append({})
            self.declare(var, TypeRef("Int"))
            cond = self.parse_cond()
            self.expect("punct", ";")
            var2 = self.expect("name")[1]
            if var2 != var:
                self.error(f"loop counter mismatch: {var!r} vs {var2!r}")
            self.expect("punct", "++")
            self.expect("punct", ")")
            body = self.parse_block()
            self.scopes.pop()
            return ForCounter(var, cond, body)
        if (k, v) == ("kw", "foreach"):
            self.advance()
            self.expect("punct", "(")
            var = self.expect("name")[1]
            self.expect("punct", ":")
            iter_name = self.expect("name")[1]
            it = self.lookup(iter_name)
            if it is None:
                self.error(f"unknown variable {iter_name!r}")
            if not is_list_type(it):
                self.error(f"foreach over non-list variable {iter_name!r}")
            self.expect("punct", ")")
            self.scopes.append({})
            elem_type = it.params[0]
            self.declare(var, elem_type)
            body = self.parse_block()
            self.scopes.pop()
            return ForEach(var, elem_type, iter_name, body)
        expr = self.parse_expr()
        if self.eat_punct("="):
            value = self.parse_expr()
            self.expect("punct", ";")
            if isinstance(expr, VarRef):
                return Assign(expr.name, value)
            if isinstance(expr, Index):
                return IndexAssign(expr.coll, expr.index, value)
            self.error("only variables and index expressions are assignable")
        self.expect("punct", ";")
        if not isinstance(expr, Call):
            self.error("expression statements must be calls")
        return ExprStmt(expr)

    # precedence-climbing expression parser
    def parse_expr(self, min_prec: int = 1) -> Expr:
        lhs = self.parse_unary()
        while True:
            k, v, _, _ = self.peek()
            if k != "punct" or v not in _PREC or _PREC[v] < min_prec:
                return lhs
            self.advance()
            rhs = self.parse_expr(_PREC[v] + 1)
            lhs = BinOp(v, lhs, rhs)

    def parse_unary(self) -> Expr:
        if self.at_punct("!"):
            self.advance()
            self.expect("punct", "(")
            inner = self.parse_expr()
            self.expect("punct", ")")
            return self.parse_postfix(NotOp(inner))
        if self.at_punct("-"):
            k, v, _, _ = self.toks[self.pos + 1]
            if k in ("int", "float"):
                self.advance()
                self.advance()
                if k == "int":
                    return ConstLit(IntV(-int(v)))
                return ConstLit(FloatV(-float(v)))
            self.error("'-' is only a binary operator (negative literals aside)")
        return self.parse_postfix(self.parse_primary())

    def parse_postfix(self, e: Expr) -> Expr:
        while self.eat_punct("["):
            idx = self.parse_expr()
            self.expect("punct", "]")
            e = Index(e, idx)
        return e

    def parse_primary(self) -> Expr:
        k, v, line, col = self.peek()
        if k == "int":
            self.advance()
            return ConstLit(IntV(int(v)))
        if k == "float":
            self.advance()
            return ConstLit(FloatV(float(v)))
        if k == "str":
            self.advance()
            return ConstLit(StrV(v))
        if k == "kw" and v in ("true", "false"):
            self.advance()
            return ConstLit(BoolV(v == "true"))
        if k == "kw" and v == "null":
            self.advance()
            return ConstLit(NullV())
        if k == "punct" and v == "(":
            self.advance()
            e = self.parse_expr()
            self.expect("punct", ")")
            return e
        if k == "name":
            self.advance()
            if self.at_punct("("):
                self.advance()
                args: list[Expr] = []
                if not self.at_punct(")"):
                    while True:
                        args.append(self.parse_expr())
                        if not self.eat_punct(","):
                            break
                self.expect("punct", ")")
                sig = self.components.get(v)
                if sig is None:
                    raise ParseError(f"unknown component {v!r}", line, col)
                return Call(v, args, sig.ret)
            t = self.lookup(v)
            if t is None:
                raise ParseError(f"unknown variable {v!r}", line, col)
            return VarRef(v, t)
        raise ParseError(f"expected an expression, found {v or k!r}", line, col)


def parse(text: str, components: dict | None = None) -> Program:
    """Parse canonical program text. `components` maps component ids to
    their signatures (anything with a `.ret` attribute); it defaults to the
    builtin library."""
    if components is None:
        from .builtins import builtin_components
        components = builtin_components()
    return _Parser(text, components).parse_program()
