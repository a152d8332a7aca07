"""The ColoredTree value type and its line-oriented text format.

Vertices are 0-based in memory (vertex ``m`` is the ``m+1``-th arrival) and
1-based in the text format, where the root carries ``0`` sentinels::

    n=3 alphabet=x,y
    1 x 0 0
    2 y 1 0
    3 x 1 1
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, FitPAError
from .model import ColorAlphabet


def _frozen(arr, dtype=np.int64) -> np.ndarray:
    out = np.array(arr, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ColoredTree:
    """One realisation of the growth process.

    ``colors[m]`` is the alphabet index of vertex ``m``; ``parents[m]`` the
    vertex it attached to (``-1`` for the root); ``attach_degree[m]`` the
    parent's in-degree immediately before that edge was created.
    """

    alphabet: ColorAlphabet
    colors: np.ndarray
    parents: np.ndarray
    attach_degree: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "colors", _frozen(self.colors))
        object.__setattr__(self, "parents", _frozen(self.parents))
        object.__setattr__(self, "attach_degree", _frozen(self.attach_degree))

    @property
    def n(self) -> int:
        return int(self.colors.shape[0])

    def in_degrees(self) -> np.ndarray:
        """Final in-degree (number of children) of every vertex."""
        return np.bincount(self.parents[1:], minlength=self.n)

    def color_symbols(self) -> list[str]:
        return [self.alphabet.symbols[i] for i in self.colors]

    def __eq__(self, other):
        if not isinstance(other, ColoredTree):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and np.array_equal(self.colors, other.colors)
            and np.array_equal(self.parents, other.parents)
            and np.array_equal(self.attach_degree, other.attach_degree)
        )

    def validate(self) -> None:
        """Walk the tree and check every structural invariant; raise on failure."""
        n = self.n
        if n < 1:
            raise FitPAError("a tree has at least one vertex")
        if self.parents.shape != (n,) or self.attach_degree.shape != (n,):
            raise FitPAError("colors, parents and attach_degree must have equal length")
        if np.any((self.colors < 0) | (self.colors >= len(self.alphabet))):
            raise FitPAError("colour index outside the alphabet")
        if self.parents[0] != -1 or self.attach_degree[0] != 0:
            raise FitPAError("root must have parent -1 and attach_degree 0")
        seen = np.zeros(n, dtype=np.int64)
        for m in range(1, n):
            p = int(self.parents[m])
            if not 0 <= p < m:
                raise FitPAError(f"vertex {m} has parent {p}, which is not an earlier vertex")
            if self.attach_degree[m] != seen[p]:
                raise FitPAError(
                    f"vertex {m}: attach_degree {self.attach_degree[m]} but parent {p} had {seen[p]} children"
                )
            seen[p] += 1
        if seen.sum() != n - 1:
            raise FitPAError("in-degrees do not sum to n - 1")


def tree_from_parents(alphabet, colors, parents) -> ColoredTree:
    """Build a tree from 0-based parents (root ``-1``), deriving attach degrees."""
    if not isinstance(alphabet, ColorAlphabet):
        alphabet = ColorAlphabet(tuple(alphabet))
    colors = np.asarray(colors, dtype=np.int64)
    parents = np.asarray(parents, dtype=np.int64)
    n = colors.shape[0]
    attach = np.zeros(n, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    for m in range(1, n):
        p = parents[m]
        attach[m] = count[p]
        count[p] += 1
    return ColoredTree(alphabet, colors, parents, attach)


def dumps_tree(tree: ColoredTree) -> str:
    buf = io.StringIO()
    write_tree(tree, buf)
    return buf.getvalue()


def write_tree(tree: ColoredTree, fh) -> None:
    fh.write(f"n={tree.n} alphabet={','.join(tree.alphabet.symbols)}\n")
    symbols = tree.alphabet.symbols
    parents = (tree.parents + 1).tolist()
    attach = tree.attach_degree.tolist()
    colors = tree.colors.tolist()
    chunk = 1 << 16
    for start in range(0, tree.n, chunk):
        stop = min(start + chunk, tree.n)
        fh.write(
            "".join(
                f"{m + 1} {symbols[colors[m]]} {parents[m]} {attach[m]}\n" for m in range(start, stop)
            )
        )


def loads_tree(text: str) -> ColoredTree:
    return read_tree(io.StringIO(text))


def read_tree(fh) -> ColoredTree:
    """Parse the tree text format; errors carry 1-based line numbers."""
    header = fh.readline()
    fields = dict(part.split("=", 1) for part in header.split() if "=" in part)
    if set(fields) != {"n", "alphabet"}:
        raise ConfigError("header must be 'n=<n> alphabet=<comma list>'", line=1)
    try:
        n = int(fields["n"])
    except ValueError:
        raise ConfigError(f"bad vertex count {fields['n']!r}", line=1) from None
    alphabet = ColorAlphabet(tuple(fields["alphabet"].split(",")))
    lookup = {s: i for i, s in enumerate(alphabet.symbols)}
    colors = np.empty(n, dtype=np.int64)
    parents = np.empty(n, dtype=np.int64)
    attach = np.empty(n, dtype=np.int64)
    count = 0
    for lineno, line in enumerate(fh, start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ConfigError(f"expected 4 fields, got {len(parts)}", line=lineno)
        try:
            idx, parent, deg = int(parts[0]), int(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigError(f"non-integer field in {line.strip()!r}", line=lineno) from None
        if idx != count + 1 or count >= n:
            raise ConfigError(f"expected vertex {count + 1}, got {idx}", line=lineno)
        if parts[1] not in lookup:
            raise ConfigError(f"unknown colour {parts[1]!r}", line=lineno)
        colors[count] = lookup[parts[1]]
        parents[count] = parent - 1
        attach[count] = deg
        count += 1
    if count != n:
        raise ConfigError(f"header announces {n} vertices but {count} were listed")
    tree = ColoredTree(alphabet, colors, parents, attach)
    try:
        tree.validate()
    except FitPAError as exc:
        raise ConfigError(f"invalid tree: {exc}") from None
    return tree
