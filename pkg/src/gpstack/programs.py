"""Expression-tree programs: arithmetic trees over record attributes.

A program is an immutable binary tree whose leaves read an attribute or hold
a constant and whose internal nodes apply one of four protected arithmetic
operators.  Programs map a record to a single real number; that number is
what downstream histogram binning consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

OPS: tuple[str, ...] = ("add", "sub", "mul", "pdiv")

DIV_GUARD = 1e-9          # |denominator| below this makes pdiv return 1.0
FINITE_CLAMP = 1e12       # overflow/inf replacement magnitude, sign kept
ATTRIBUTE_PROB = 0.9      # chance a fresh terminal reads an attribute
CONST_RANGE = 1.0         # fresh constants drawn uniform from [-1, 1]
MUTATION_RATE = 0.1       # per-node parameter mutation probability
MUTATION_SIGMA = 0.1      # stddev of Gaussian nudges applied to constants


@dataclass(frozen=True)
class Attribute:
    index: int


@dataclass(frozen=True)
class Constant:
    value: float


@dataclass(frozen=True)
class Operator:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Attribute, Constant, Operator]


@dataclass(frozen=True)
class RngStream:
    """Reproducible random source addressed by a root seed plus a path.

    Child streams extend the path, so every site in a run (population slot,
    generation, boost epoch) gets an independent generator that depends only
    on its address, never on how much randomness other sites consumed.
    """

    seed: int
    path: tuple[int, ...] = ()

    def child(self, *ids: int) -> "RngStream":
        return RngStream(self.seed, self.path + tuple(int(i) for i in ids))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(seq))


@dataclass(frozen=True)
class ProgramTree:
    """A program with cached size/depth and a postorder instruction list."""

    root: Node
    node_count: int
    depth: int
    _code: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def from_root(cls, root: Node) -> "ProgramTree":
        count, depth = _measure(root)
        return cls(root, count, depth, tuple(_compile(root)))


def _measure(node: Node) -> tuple[int, int]:
    if isinstance(node, Operator):
        lc, ld = _measure(node.left)
        rc, rd = _measure(node.right)
        return lc + rc + 1, 1 + max(ld, rd)
    return 1, 1


_ATTR, _CONST, _OP = 0, 1, 2


def _compile(node: Node) -> list:
    code: list = []
    stack = [(node, False)]
    while stack:
        cur, expanded = stack.pop()
        if isinstance(cur, Operator):
            if expanded:
                code.append((_OP, cur.op))
            else:
                stack.append((cur, True))
                stack.append((cur.right, False))
                stack.append((cur.left, False))
        elif isinstance(cur, Attribute):
            code.append((_ATTR, cur.index))
        else:
            code.append((_CONST, cur.value))
    return code


def eval_batch(tree: ProgramTree, records: np.ndarray) -> np.ndarray:
    """Evaluate the program on every row of an (n, d) matrix at once.

    Protected semantics: pdiv yields 1.0 where |denominator| < 1e-9, and any
    non-finite intermediate is replaced by +-1e12 with its sign kept, so the
    output is always finite.  Finite values are never clipped.
    """
    records = np.asarray(records, dtype=np.float64)
    n = records.shape[0]
    stack: list[np.ndarray] = []
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for kind, arg in tree._code:
            if kind == _ATTR:
                stack.append(records[:, arg])
            elif kind == _CONST:
                stack.append(np.full(n, arg, dtype=np.float64))
            else:
                b = stack.pop()
                a = stack.pop()
                if arg == "add":
                    r = a + b
                elif arg == "sub":
                    r = a - b
                elif arg == "mul":
                    r = a * b
                else:
                    safe = np.abs(b) >= DIV_GUARD
                    r = np.divide(a, b, out=np.ones(n, dtype=np.float64), where=safe)
                if not np.isfinite(r).all():
                    r = np.nan_to_num(r, copy=False, nan=0.0,
                                      posinf=FINITE_CLAMP, neginf=-FINITE_CLAMP)
                stack.append(r)
    out = stack[0]
    return out if out.base is None else out.copy()


def eval_record(tree: ProgramTree, record: np.ndarray) -> float:
    """Evaluate the program on a single record."""
    row = np.asarray(record, dtype=np.float64).reshape(1, -1)
    return float(eval_batch(tree, row)[0])


def _random_terminal(d: int, rng: np.random.Generator) -> Node:
    if rng.random() < ATTRIBUTE_PROB:
        return Attribute(int(rng.integers(d)))
    return Constant(float(rng.uniform(-CONST_RANGE, CONST_RANGE)))


def init_stump(d: int, rng: np.random.Generator) -> ProgramTree:
    """Fresh single-node program: attribute read with probability 0.9, else a
    uniform constant in [-1, 1]."""
    if d < 1:
        raise ValueError("need at least one attribute")
    return ProgramTree.from_root(_random_terminal(d, rng))


def _leaves_preorder(node: Node) -> list[Node]:
    out: list[Node] = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Operator):
            stack.append(cur.right)
            stack.append(cur.left)
        else:
            out.append(cur)
    return out


def _replace_leaf(node: Node, target: int, replacement: Node, counter: list[int]) -> Node:
    if isinstance(node, Operator):
        left = _replace_leaf(node.left, target, replacement, counter)
        if left is not node.left:
            return Operator(node.op, left, node.right)
        right = _replace_leaf(node.right, target, replacement, counter)
        if right is not node.right:
            return Operator(node.op, node.left, right)
        return node
    if counter[0] == target:
        counter[0] += 1
        return replacement
    counter[0] += 1
    return node


def grow_clone(parent: ProgramTree, d: int, rng: np.random.Generator) -> ProgramTree:
    """Copy of ``parent`` with one leaf grown into an operator node.

    A uniformly chosen leaf (preorder order) becomes the left child of a new
    operator with a uniformly chosen op; the right child is a fresh random
    terminal.  The parent is untouched; unchanged subtrees are shared.
    Node count always grows by exactly 2.
    """
    leaves = _leaves_preorder(parent.root)
    target = int(rng.integers(len(leaves)))
    op = OPS[int(rng.integers(len(OPS)))]
    displaced = leaves[target]
    replacement = Operator(op, displaced, _random_terminal(d, rng))
    new_root = _replace_leaf(parent.root, target, replacement, [0])
    return ProgramTree.from_root(new_root)


def _mutate_node(node: Node, d: int, rng: np.random.Generator,
                 rate: float, sigma: float) -> Node:
    # one uniform draw per node decides the hit; redraws consume extra
    # randomness only when a mutation actually fires
    hit = rng.random() < rate
    if isinstance(node, Operator):
        op = OPS[int(rng.integers(len(OPS)))] if hit else node.op
        left = _mutate_node(node.left, d, rng, rate, sigma)
        right = _mutate_node(node.right, d, rng, rate, sigma)
        if op == node.op and left is node.left and right is node.right:
            return node
        return Operator(op, left, right)
    if not hit:
        return node
    if isinstance(node, Attribute):
        return Attribute(int(rng.integers(d)))
    return Constant(node.value + float(rng.normal(0.0, sigma)))


def mutate_params(tree: ProgramTree, d: int, rng: np.random.Generator,
                  rate: float = MUTATION_RATE, sigma: float = MUTATION_SIGMA) -> ProgramTree:
    """Per-node parameter mutation; structure and node count never change.

    Nodes are visited in preorder.  Each independently mutates with
    probability ``rate``: constants get a Gaussian(0, sigma) nudge, attribute
    indices are resampled uniformly, operators are resampled uniformly.
    """
    return ProgramTree.from_root(_mutate_node(tree.root, d, rng, rate, sigma))


def format_tree(tree: ProgramTree) -> str:
    """Prefix text form, e.g. ``(add (attr 0) (const 0.25))``.

    Constants are written with ``repr`` so parsing the text reproduces the
    tree bit for bit.
    """
    parts: list[str] = []
    _format_node(tree.root, parts)
    return "".join(parts)


def _format_node(node: Node, parts: list[str]) -> None:
    if isinstance(node, Operator):
        parts.append(f"({node.op} ")
        _format_node(node.left, parts)
        parts.append(" ")
        _format_node(node.right, parts)
        parts.append(")")
    elif isinstance(node, Attribute):
        parts.append(f"(attr {node.index})")
    else:
        parts.append(f"(const {node.value!r})")


class TreeFormatError(ValueError):
    """Raised when program text cannot be parsed."""


def parse_tree(text: str) -> ProgramTree:
    """Inverse of :func:`format_tree`."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = [0]

    def parse() -> Node:
        if pos[0] >= len(tokens):
            raise TreeFormatError("unexpected end of program text")
        if tokens[pos[0]] != "(":
            raise TreeFormatError(f"expected '(' at token {pos[0]}")
        pos[0] += 1
        head = tokens[pos[0]]
        pos[0] += 1
        if head == "attr":
            idx = tokens[pos[0]]
            pos[0] += 1
            node: Node = Attribute(int(idx))
        elif head == "const":
            val = tokens[pos[0]]
            pos[0] += 1
            node = Constant(float(val))
        elif head in OPS:
            left = parse()
            right = parse()
            node = Operator(head, left, right)
        else:
            raise TreeFormatError(f"unknown node kind {head!r}")
        if pos[0] >= len(tokens) or tokens[pos[0]] != ")":
            raise TreeFormatError(f"expected ')' after {head} node")
        pos[0] += 1
        return node

    try:
        root = parse()
    except (ValueError, IndexError) as exc:
        if isinstance(exc, TreeFormatError):
            raise
        raise TreeFormatError(f"bad program text: {exc}") from exc
    if pos[0] != len(tokens):
        raise TreeFormatError("trailing tokens after program")
    return ProgramTree.from_root(root)
