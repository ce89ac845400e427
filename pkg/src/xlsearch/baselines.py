"""No-training comparison searchers: BM25 over tokens and tree edit
distance over generic ASTs.

ASTs come from s-expression sidecar files with a fixed cross-language node
vocabulary; a degenerate token-stream converter exists so the ranking path
stays testable when no sidecars are available.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from .embedding import tokenize
from .errors import FormatError
from .search import SearchHit

AST_KINDS = frozenset(
    ["module", "function", "call", "assign", "if", "loop", "return",
     "literal", "identifier", "other"]
)

BM25_K1 = 1.2
BM25_B = 0.75


class BM25:
    """Okapi BM25 with the nonnegative idf variant ln(1 + (N-n+0.5)/(n+0.5)).

    Scores sum over the query's unique tokens.
    """

    def __init__(self, corpus, k1: float = BM25_K1, b: float = BM25_B):
        self.k1 = k1
        self.b = b
        self.ids = [s.id for s in corpus]
        self.tf = [Counter(tokenize(s.text)) for s in corpus]
        self.lengths = [sum(c.values()) for c in self.tf]
        n_docs = len(corpus)
        self.avgdl = sum(self.lengths) / n_docs if n_docs else 0.0
        df = Counter()
        for counts in self.tf:
            df.update(counts.keys())
        self.idf = {
            term: math.log(1.0 + (n_docs - n + 0.5) / (n + 0.5))
            for term, n in df.items()
        }

    def score(self, query_tokens, doc_index: int) -> float:
        counts = self.tf[doc_index]
        if not counts:
            return 0.0
        norm = self.k1 * (1.0 - self.b + self.b * self.lengths[doc_index] / self.avgdl)
        total = 0.0
        for term in set(query_tokens):
            tf = counts.get(term)
            if not tf:
                continue
            total += self.idf[term] * tf * (self.k1 + 1.0) / (tf + norm)
        return total

    def rank(self, query, n: int) -> list[SearchHit]:
        query_tokens = tokenize(query.text)
        scored = [(self.score(query_tokens, i), self.ids[i]) for i in range(len(self.ids))]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return [
            SearchHit(sample_id=sid, score=score, rank=rank)
            for rank, (score, sid) in enumerate(scored[:n], start=1)
        ]


def bm25_rank(corpus, query, n: int) -> list[SearchHit]:
    return BM25(corpus).rank(query, n)


@dataclass
class AstNode:
    kind: str
    label: str | None = None
    children: list["AstNode"] = field(default_factory=list)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)


_ATOM_RE = re.compile(r"[^\s()]+")


def parse_sexpr(text: str) -> AstNode:
    """Parse one `(kind[:label] child...)` tree."""
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_node() -> AstNode:
        nonlocal pos
        skip_ws()
        if pos >= n or text[pos] != "(":
            raise FormatError(f"expected '(' at position {pos}")
        pos += 1
        skip_ws()
        m = _ATOM_RE.match(text, pos)
        if not m:
            raise FormatError(f"expected node kind at position {pos}")
        atom = m.group(0)
        pos = m.end()
        kind, _, label = atom.partition(":")
        if kind not in AST_KINDS:
            raise FormatError(f"unknown node kind {kind!r} at position {m.start()}")
        node = AstNode(kind=kind, label=label or None)
        while True:
            skip_ws()
            if pos >= n:
                raise FormatError("unbalanced parentheses: missing ')'")
            if text[pos] == ")":
                pos += 1
                return node
            node.children.append(parse_node())

    root = parse_node()
    skip_ws()
    if pos != n:
        raise FormatError(f"trailing data at position {pos}")
    return root


def to_sexpr(node: AstNode) -> str:
    atom = node.kind if node.label is None else f"{node.kind}:{node.label}"
    if re.search(r"[\s()]", atom):
        raise FormatError(f"label {node.label!r} contains whitespace or parens")
    if not node.children:
        return f"({atom})"
    inner = " ".join(to_sexpr(c) for c in node.children)
    return f"({atom} {inner})"


def degenerate_ast(sample) -> AstNode:
    """Token stream as a flat tree: identifier/literal leaves under a module."""
    leaves = [
        AstNode(kind="literal" if tok[0].isdigit() else "identifier", label=tok)
        for tok in tokenize(sample.text)
    ]
    return AstNode(kind="module", children=leaves)


def load_ast(sample, degenerate: bool = False) -> AstNode | None:
    if sample.ast is not None:
        with open(sample.ast, "r", encoding="utf-8") as fh:
            return parse_sexpr(fh.read())
    if degenerate:
        return degenerate_ast(sample)
    return None


class _Annotated:
    """Postorder arrays for Zhang-Shasha: 1-based nodes, leftmost-leaf map."""

    def __init__(self, root: AstNode):
        self.nodes: list[AstNode | None] = [None]
        self.lmld = [0]
        self._walk(root)
        last_for_lmld: dict[int, int] = {}
        for i in range(1, len(self.nodes)):
            last_for_lmld[self.lmld[i]] = i
        self.keyroots = sorted(last_for_lmld.values())

    def _walk(self, node: AstNode) -> int:
        first_leaf = None
        for child in node.children:
            leaf = self._walk(child)
            if first_leaf is None:
                first_leaf = leaf
        self.nodes.append(node)
        index = len(self.nodes) - 1
        self.lmld.append(first_leaf if first_leaf is not None else index)
        return self.lmld[index]


def _rename_cost(a: AstNode, b: AstNode) -> int:
    return 0 if (a.kind, a.label) == (b.kind, b.label) else 1


def tree_edit_distance(a: AstNode, b: AstNode) -> int:
    """Zhang-Shasha minimum edit cost with unit insert/delete/relabel."""
    ta, tb = _Annotated(a), _Annotated(b)
    n, m = len(ta.nodes) - 1, len(tb.nodes) - 1
    td = [[0] * (m + 1) for _ in range(n + 1)]

    for i in ta.keyroots:
        for j in tb.keyroots:
            li, lj = ta.lmld[i], tb.lmld[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, rows):
                for y in range(1, cols):
                    ni, nj = li + x - 1, lj + y - 1
                    if ta.lmld[ni] == li and tb.lmld[nj] == lj:
                        fd[x][y] = min(
                            fd[x - 1][y] + 1,
                            fd[x][y - 1] + 1,
                            fd[x - 1][y - 1] + _rename_cost(ta.nodes[ni], tb.nodes[nj]),
                        )
                        td[ni][nj] = fd[x][y]
                    else:
                        fd[x][y] = min(
                            fd[x - 1][y] + 1,
                            fd[x][y - 1] + 1,
                            fd[ta.lmld[ni] - li][tb.lmld[nj] - lj] + td[ni][nj],
                        )
    return td[n][m]


def ast_rank(corpus, query, n: int, degenerate: bool = False):
    """Rank by 1/(1+distance); returns (hits, excluded sample ids)."""
    query_ast = load_ast(query, degenerate)
    if query_ast is None:
        return [], [query.id]
    excluded: list[str] = []
    scored: list[tuple[float, str]] = []
    for sample in corpus:
        doc_ast = load_ast(sample, degenerate)
        if doc_ast is None:
            excluded.append(sample.id)
            continue
        sim = 1.0 / (1.0 + tree_edit_distance(query_ast, doc_ast))
        scored.append((sim, sample.id))
    scored.sort(key=lambda t: (-t[0], t[1]))
    hits = [
        SearchHit(sample_id=sid, score=sim, rank=rank)
        for rank, (sim, sid) in enumerate(scored[:n], start=1)
    ]
    return hits, excluded
