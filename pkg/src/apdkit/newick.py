"""Extended Newick and JSON edge-list formats, with exact numbers."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import InputError
from .network import PhyloNetwork, require_valid, to_fraction, validate

__all__ = [
    "ParseDiagnostic",
    "emit_enewick",
    "emit_json",
    "format_number",
    "load_network",
    "parse_enewick",
    "parse_json",
    "parse_network",
]

_SPECIAL = set("(),:;[]'")
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?(/\d+)?$")


@dataclass(frozen=True)
class ParseDiagnostic:
    position: int
    message: str
    severity: str = "error"

    def __str__(self):
        return f"{self.severity} at offset {self.position}: {self.message}"


def _fail(pos: int, msg: str):
    raise InputError(f"offset {pos}: {msg}")


def _number(text: str, pos: int) -> Fraction:
    if not _NUMBER.match(text):
        _fail(pos, f"not a number: {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        _fail(pos, f"not a rational number: {text!r}")


@dataclass
class _Occurrence:
    node: int
    parent: int | None
    length: Fraction | None
    prob: Fraction | None
    pos: int


class _Parser:
    def __init__(self, text: str, diagnostics: list):
        self.s = text
        self.i = 0
        self.diag = diagnostics
        self.n = 0
        self.names: dict[int, str] = {}
        self.name_pos: dict[int, int] = {}
        self.has_children: dict[int, bool] = {}
        self.hybrid: dict[str, int] = {}
        self.occ: list[_Occurrence] = []

    def warn(self, pos, msg):
        self.diag.append(ParseDiagnostic(pos, msg, "warning"))

    def peek(self) -> str:
        self.skip()
        return self.s[self.i] if self.i < len(self.s) else ""

    def skip(self, keep_meta=False):
        """Skip blanks and comments; ``keep_meta`` stops at ``[&...]``."""
        s = self.s
        while self.i < len(s):
            c = s[self.i]
            if c.isspace():
                self.i += 1
            elif c == "[" and not (keep_meta and s.startswith("[&", self.i)):
                self.comment()
            else:
                break

    def comment(self) -> str:
        start = self.i
        end = self.s.find("]", self.i)
        if end < 0:
            _fail(start, "unterminated comment")
        self.i = end + 1
        return self.s[start + 1 : end]

    def label(self) -> str:
        self.skip(keep_meta=True)
        s = self.s
        if self.i < len(s) and s[self.i] == "'":
            start = self.i
            out = []
            self.i += 1
            while True:
                if self.i >= len(s):
                    _fail(start, "unterminated quoted label")
                c = s[self.i]
                if c == "'":
                    if s[self.i + 1 : self.i + 2] == "'":
                        out.append("'")
                        self.i += 2
                        continue
                    self.i += 1
                    return "".join(out)
                out.append(c)
                self.i += 1
        start = self.i
        while self.i < len(s) and s[self.i] not in _SPECIAL and not s[self.i].isspace():
            self.i += 1
        return s[start : self.i]

    def annotation(self):
        """``:len[:support[:prob]]`` and ``[&length=..,prob=..]`` comments."""
        slots: list[str | None] = []
        slot_pos: list[int] = []
        meta: dict[str, tuple[str, int]] = {}
        while True:
            self.skip(keep_meta=True)
            if self.i >= len(self.s):
                break
            c = self.s[self.i]
            if c == "[":
                pos = self.i
                body = self.comment().strip()
                if body.startswith("&"):
                    for part in body[1:].split(","):
                        if "=" in part:
                            k, v = part.split("=", 1)
                            meta[k.strip().lower()] = (v.strip(), pos)
                continue
            if c == ":":
                if len(slots) == 3:
                    _fail(self.i, "more than three ':' fields")
                self.i += 1
                self.skip(keep_meta=True)
                start = self.i
                while self.i < len(self.s) and self.s[self.i] not in _SPECIAL and not self.s[self.i].isspace():
                    self.i += 1
                slots.append(self.s[start : self.i] or None)
                slot_pos.append(start)
                continue
            break
        length = prob = None
        if slots and slots[0] is not None:
            length = _number(slots[0], slot_pos[0])
        if len(slots) > 1 and slots[1] is not None:
            _number(slots[1], slot_pos[1])  # support values are read and dropped
        if len(slots) > 2 and slots[2] is not None:
            prob = _number(slots[2], slot_pos[2])
        for key in ("length", "weight"):
            if key in meta:
                length = _number(*meta[key])
        for key in ("prob", "probability", "gamma"):
            if key in meta:
                prob = _number(*meta[key])
        return length, prob

    def node(self, parent: int | None):
        self.skip()
        start = self.i
        kids_start = None
        if self.peek() == "(":
            kids_start = self.i
            self.i += 1
            kids = []
            while True:
                kids.append(self.node(None))
                c = self.peek()
                if c == ",":
                    self.i += 1
                    continue
                if c == ")":
                    self.i += 1
                    break
                _fail(self.i, f"expected ',' or ')', found {c!r}" if c else "unexpected end of input")
        else:
            kids = None
        lpos = self.i
        name = self.label()
        tag = None
        if "#" in name:
            name, tag = name.split("#", 1)
            if not tag:
                _fail(lpos, "empty hybrid tag")
        if tag is not None:
            v = self.hybrid.get(tag)
            if v is None:
                v = self.new_node()
                self.hybrid[tag] = v
            if kids is not None:
                if self.has_children.get(v):
                    _fail(kids_start, f"hybrid #{tag} is given children more than once")
                self.has_children[v] = True
            if name:
                if self.names.get(v, name) != name:
                    _fail(lpos, f"hybrid #{tag} has conflicting labels")
                self.names[v] = name
                self.name_pos[v] = lpos
        else:
            if kids is None and not name:
                _fail(start, "leaf without a label")
            v = self.new_node()
            self.has_children[v] = kids is not None
            if name:
                self.names[v] = name
                self.name_pos[v] = lpos
        for k in kids or ():
            k.parent = v
        length, prob = self.annotation()
        occ = _Occurrence(v, parent, length, prob, start)
        self.occ.append(occ)
        return occ

    def new_node(self) -> int:
        self.n += 1
        return self.n - 1


def parse_enewick(text: str, diagnostics: list | None = None) -> PhyloNetwork:
    """Parse one extended Newick statement terminated by ``;``.

    Hybrid nodes are written ``label#H1``; all occurrences of a tag are one
    node, at most one of them with children.  Branch annotations are
    ``:length[:support[:probability]]`` and may be given or overridden by a
    ``[&length=..,prob=..]`` comment.  Numbers are converted exactly.
    ``diagnostics`` collects warnings.
    """
    diag = diagnostics if diagnostics is not None else []
    p = _Parser(text, diag)
    if not p.peek():
        _fail(0, "empty input")
    root = p.node(None)
    if p.peek() != ";":
        _fail(p.i, "expected ';'")
    p.i += 1
    if p.peek():
        _fail(p.i, "trailing text after ';'")
    if root.length is not None and root.length != 0:
        p.warn(root.pos, "length on the root branch ignored")
    if root.node in set(p.hybrid.values()):
        _fail(root.pos, "the root cannot be a hybrid node")

    occ = [o for o in p.occ if o.parent is not None]
    incoming: dict[int, list[_Occurrence]] = {}
    for o in occ:
        incoming.setdefault(o.node, []).append(o)
    probs: dict[int, Fraction] = {}
    for v, ins in incoming.items():
        if len(ins) == 1:
            o = ins[0]
            probs[id(o)] = Fraction(1) if o.prob is None else o.prob
            continue
        given = [o.prob for o in ins if o.prob is not None]
        missing = [o for o in ins if o.prob is None]
        for o in ins:
            if o.prob is not None:
                probs[id(o)] = o.prob
        if missing:
            share = (1 - sum(given, Fraction(0))) / len(missing)
            if len(missing) > 1:
                p.warn(missing[0].pos, f"{len(missing)} in-edges without probability share the remainder")
            for o in missing:
                probs[id(o)] = share
    for o in occ:
        pr = probs[id(o)]
        if not 0 < pr <= 1:
            _fail(o.pos, f"inheritance probability {pr} outside (0, 1]")
    if any(o.length is None for o in occ):
        p.warn(0, "branches without a length get weight 0")

    # preorder ids: order of first appearance is not preorder for nested
    # parsing, so renumber by a traversal from the root
    children: dict[int, list[_Occurrence]] = {}
    for o in sorted(occ, key=lambda o: o.pos):
        children.setdefault(o.parent, []).append(o)
    order, seen = [], set()
    stack = [root.node]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        order.append(v)
        for o in reversed(children.get(v, [])):
            stack.append(o.node)
    remap = {v: i for i, v in enumerate(order)}
    edges = [
        (remap[o.parent], remap[o.node], o.length or Fraction(0), probs[id(o)])
        for o in sorted(occ, key=lambda o: (remap[o.parent], o.pos))
    ]
    has_out = {o.parent for o in occ}
    taxa, labels = {}, {}
    for v, name in p.names.items():
        if v not in remap:
            continue
        if v in has_out:
            labels[remap[v]] = name
        else:
            if name in taxa.values():
                _fail(p.name_pos[v], f"duplicate taxon label {name!r}")
            taxa[remap[v]] = name
    net = PhyloNetwork(len(order), edges, taxa, labels)
    for viol in validate(net).violations:
        diag.append(ParseDiagnostic(0, str(viol), "warning"))
    return net


# -- emission ----------------------------------------------------------------


def format_number(x: Fraction) -> str | None:
    """Shortest exact decimal for ``x``, or ``None`` when none exists."""
    x = Fraction(x)
    q = x.denominator
    twos = fives = 0
    while q % 2 == 0:
        q //= 2
        twos += 1
    while q % 5 == 0:
        q //= 5
        fives += 1
    if q != 1:
        return None
    digits = max(twos, fives)
    scaled = x * 10**digits
    assert scaled.denominator == 1
    n = scaled.numerator
    sign = "-" if n < 0 else ""
    s = str(abs(n)).rjust(digits + 1, "0")
    if digits:
        s = s[:-digits] + "." + s[-digits:]
    return sign + s


def _quote(name: str) -> str:
    if not name or any(c in _SPECIAL or c.isspace() or c == "#" for c in name):
        return "'" + name.replace("'", "''") + "'"
    return name


def emit_enewick(net: PhyloNetwork) -> str:
    """Extended Newick text; reticulations are tagged ``#H1``, ``#H2``, ..."""
    require_valid(net)
    tags = {r: f"H{i + 1}" for i, r in enumerate(sorted(net.reticulations))}
    written: set[int] = set()

    def annot(e) -> str:
        w = format_number(e.weight)
        pr = format_number(e.prob)
        show_prob = net.indegree(e.head) >= 2 or e.prob != 1
        meta = []
        if w is None:
            meta.append(f"length={e.weight}")
        if show_prob and pr is None:
            meta.append(f"prob={e.prob}")
        if show_prob:
            text = f":{w or ''}::{pr or ''}"
        else:
            text = f":{w}" if w is not None else ""
        if meta:
            text += "[&" + ",".join(meta) + "]"
        return text

    def name_of(v) -> str:
        name = net.taxa.get(v) or net.labels.get(v) or ""
        return _quote(name) if name else ""

    def render(v) -> str:
        tag = "#" + tags[v] if v in tags else ""
        if v in tags and v in written:
            return tag
        written.add(v)
        kids = net.out_edges[v]
        head = name_of(v) + tag
        if not kids:
            return head
        inner = ",".join(render(net.edges[e].head) + annot(net.edges[e]) for e in kids)
        return f"({inner}){head}"

    return render(net.root) + ";"


def _num_json(x: Fraction):
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def emit_json(net: PhyloNetwork) -> str:
    nodes = []
    for v in range(net.n_nodes):
        rec = {"id": v}
        if v in net.taxa:
            rec["taxon"] = net.taxa[v]
        elif v in net.labels:
            rec["label"] = net.labels[v]
        nodes.append(rec)
    edges = [
        {"tail": e.tail, "head": e.head, "weight": _num_json(e.weight), "prob": _num_json(e.prob)}
        for e in net.edges
    ]
    return json.dumps({"nodes": nodes, "edges": edges}, indent=1)


def parse_json(text: str) -> PhyloNetwork:
    """``{"nodes": [{"id", "taxon"?, "label"?}], "edges": [{"tail", "head", "weight", "prob"}]}``.

    Numbers may be JSON numbers or strings such as ``"0.3"`` or ``"3/10"``.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict) or "nodes" not in doc:
        raise InputError("JSON network needs a 'nodes' list")
    ids: dict = {}
    taxa, labels = {}, {}
    for rec in doc["nodes"]:
        if not isinstance(rec, dict) or "id" not in rec:
            raise InputError(f"bad node record {rec!r}")
        key = rec["id"]
        if isinstance(key, (list, dict)) or key in ids:
            raise InputError(f"duplicate or invalid node id {key!r}")
        v = ids[key] = len(ids)
        if rec.get("taxon") is not None:
            taxa[v] = str(rec["taxon"])
        if rec.get("label") is not None:
            labels[v] = str(rec["label"])
    edges = []
    for rec in doc.get("edges", []):
        if not isinstance(rec, dict):
            raise InputError(f"bad edge record {rec!r}")
        try:
            tail, head = ids[rec["tail"]], ids[rec["head"]]
        except KeyError as exc:
            raise InputError(f"edge {rec!r} references an unknown node {exc}") from None
        edges.append(
            (tail, head, to_fraction(rec.get("weight", 0)), to_fraction(rec.get("prob", 1)))
        )
    return PhyloNetwork(len(ids), edges, taxa, labels)


def parse_network(text: str, diagnostics: list | None = None) -> PhyloNetwork:
    """JSON if the text starts with ``{``, extended Newick otherwise."""
    if text.lstrip().startswith("{"):
        return parse_json(text)
    return parse_enewick(text.strip(), diagnostics)


def load_network(path, diagnostics: list | None = None) -> PhyloNetwork:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    return parse_network(text, diagnostics)
