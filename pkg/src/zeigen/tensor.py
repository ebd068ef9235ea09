"""Nonnegative tensors in coordinate form and their multilinear kernels.

A tensor of order ``m`` and dimension ``n`` is stored as a list of
``(index tuple, value)`` pairs with 1-based indices; unlisted entries are
zero.  All kernels (contraction, Jacobian, residual) loop over the stored
entries only, so the cost per call is ``O(nnz * m)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadArity,
    DimensionMismatch,
    DuplicateIndexTuple,
    IndexOutOfRange,
    NegativeEntry,
    NegativeInput,
    TensorFormatError,
    ZeroVector,
)

# Components of v smaller than RATIO_ZERO_TOL * ||v||_1 count as zero when
# forming componentwise ratio bounds; floating-point dust left behind by a
# projection must not create huge spurious ratios.
RATIO_ZERO_TOL = 1e-14


@dataclass(frozen=True)
class Tensor:
    """Immutable nonnegative tensor of order ``m`` and dimension ``n``.

    ``indices`` has shape (nnz, m) with 0-based entries; ``values`` has
    shape (nnz,).  Instances are safe to share across concurrent solves.
    """

    m: int
    n: int
    indices: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def nnz(self) -> int:
        return self.values.size

    def apply(self, x: np.ndarray) -> np.ndarray:
        return apply(self, x)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return jacobian_T(self, x)

    def residual(self, x: np.ndarray, lam: float) -> float:
        return residual(self, x, lam)


@dataclass(frozen=True)
class Iterate:
    """One solver iterate: vector ``x``, scalar ``lam``, cached residual."""

    x: np.ndarray
    lam: float
    residual_norm: float


def build_tensor(m: int, n: int, entries) -> Tensor:
    """Validate ``entries`` (1-based index tuples to nonnegative values)
    and build a :class:`Tensor`.

    Raises :class:`BadArity`, :class:`IndexOutOfRange`,
    :class:`NegativeEntry` or :class:`DuplicateIndexTuple` on invalid input.
    """
    if m < 2:
        raise ValueError(f"tensor order must be >= 2, got {m}")
    if n < 1:
        raise ValueError(f"tensor dimension must be >= 1, got {n}")

    entries = list(entries)
    idx = np.zeros((len(entries), m), dtype=np.intp)
    vals = np.zeros(len(entries))
    seen: set[tuple[int, ...]] = set()
    for row, (tup, value) in enumerate(entries):
        tup = tuple(int(i) for i in tup)
        if len(tup) != m:
            raise BadArity(f"index tuple {tup} has {len(tup)} indices, expected {m}")
        if any(i < 1 or i > n for i in tup):
            raise IndexOutOfRange(f"index tuple {tup} out of range [1, {n}]")
        value = float(value)
        if not np.isfinite(value):
            raise NegativeEntry(f"entry {tup} has non-finite value {value}")
        if value < 0:
            raise NegativeEntry(f"entry {tup} has negative value {value}")
        if tup in seen:
            raise DuplicateIndexTuple(f"index tuple {tup} appears more than once")
        seen.add(tup)
        idx[row] = [i - 1 for i in tup]
        vals[row] = value

    idx.setflags(write=False)
    vals.setflags(write=False)
    return Tensor(m=int(m), n=int(n), indices=idx, values=vals)


def _check_vector(A: Tensor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise DimensionMismatch(f"expected vector of length {A.n}, got shape {x.shape}")
    return x


def apply(A: Tensor, x) -> np.ndarray:
    """Contract the tensor with ``m - 1`` copies of ``x``:
    ``(A x^{m-1})_i = sum A_{i i2 ... im} x_{i2} ... x_{im}``.
    """
    x = _check_vector(A, x)
    out = np.zeros(A.n)
    if A.nnz == 0:
        return out
    contrib = A.values * np.prod(x[A.indices[:, 1:]], axis=1)
    np.add.at(out, A.indices[:, 0], contrib)
    return out


def jacobian_T(A: Tensor, x) -> np.ndarray:
    """Exact derivative T(x) of the contraction: ``T(x)_{ij} = d(A x^{m-1})_i / dx_j``.

    Each stored entry contributes, for every variable position p in
    {2, ..., m}, the product of the other m-2 variable factors to
    row i1, column ip.
    """
    x = _check_vector(A, x)
    T = np.zeros((A.n, A.n))
    if A.nnz == 0:
        return T
    rows = A.indices[:, 0]
    for p in range(1, A.m):
        others = [q for q in range(1, A.m) if q != p]
        partial = A.values * np.prod(x[A.indices[:, others]], axis=1)
        np.add.at(T, (rows, A.indices[:, p]), partial)
    return T


def residual(A: Tensor, x, lam: float) -> float:
    """1-norm of ``A x^{m-1} - lam * x`` (the solvers' stopping quantity)."""
    x = _check_vector(A, x)
    return float(np.linalg.norm(apply(A, x) - lam * x, 1))


def ratio_bounds(w, v) -> tuple[float, float]:
    """Componentwise ratio bounds ``(min(w/v), max(w/v))``.

    For strictly positive ``v`` this is the plain min/max of ``w_i / v_i``
    (``w`` of any sign).  When ``v`` has zeros, both vectors must be
    nonnegative and the bounds extend over the index sets of nonzeros of
    ``w`` (S1) and ``v`` (S2): indices in S1 but not S2 push the lower
    bound to 0 and enter the upper bound as bare ``w_i`` values.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    if w.shape != v.shape or w.ndim != 1:
        raise DimensionMismatch(f"need equal-length vectors, got {w.shape} and {v.shape}")
    vnorm = float(np.linalg.norm(v, 1))
    if vnorm == 0.0:
        raise ZeroVector("ratio bounds need v != 0")

    in_s2 = np.abs(v) > RATIO_ZERO_TOL * vnorm
    if np.all(in_s2) and np.all(v > 0):
        ratios = w / v
        return float(ratios.min()), float(ratios.max())

    if np.any(v < -RATIO_ZERO_TOL * vnorm):
        raise NegativeInput("extended ratio bounds need v >= 0")
    wnorm = float(np.linalg.norm(w, 1))
    if np.any(w < -RATIO_ZERO_TOL * max(wnorm, 1.0)):
        raise NegativeInput("extended ratio bounds need w >= 0")

    in_s1 = np.abs(w) > RATIO_ZERO_TOL * wnorm
    ratios = w[in_s2] / v[in_s2]
    upper = float(ratios.max())
    lower = float(ratios.min())
    bare = in_s1 & ~in_s2
    if np.any(bare):
        upper = max(upper, float(w[bare].max()))
        lower = 0.0
    return lower, upper


def z1_to_z2(x, lam: float, m: int) -> tuple[np.ndarray, float]:
    """Convert a 1-norm-normalized eigenpair to its 2-norm counterpart:
    ``(x / ||x||_2, lam / ||x||_2^{m-2})``.
    """
    x = np.asarray(x, dtype=float)
    n2 = float(np.linalg.norm(x, 2))
    if n2 == 0.0:
        raise ZeroVector("cannot normalize the zero vector")
    return x / n2, float(lam) / n2 ** (m - 2)


def parse_tensor_text(text: str, source: str = "<string>") -> Tensor:
    """Parse the tensor text format.

    First non-comment line is ``m n``; each following line is
    ``i1 i2 ... im value`` (1-based, whitespace-separated).  ``#`` starts
    a comment.  Raises :class:`TensorFormatError` naming the offending
    line, or a construction error for semantic problems.
    """
    header: tuple[int, int] | None = None
    entries: list[tuple[tuple[int, ...], float]] = []
    seen_lines: dict[tuple[int, ...], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if header is None:
            if len(fields) != 2:
                raise TensorFormatError(
                    f"{source}:{lineno}: header must be 'm n', got {raw.strip()!r}"
                )
            try:
                m, n = int(fields[0]), int(fields[1])
            except ValueError:
                raise TensorFormatError(
                    f"{source}:{lineno}: header must be two integers, got {raw.strip()!r}"
                ) from None
            if m < 2 or n < 1:
                raise TensorFormatError(
                    f"{source}:{lineno}: need order >= 2 and dimension >= 1, got m={m} n={n}"
                )
            header = (m, n)
            continue

        m, n = header
        if len(fields) != m + 1:
            raise TensorFormatError(
                f"{source}:{lineno}: expected {m} indices and a value, got {len(fields)} fields"
            )
        try:
            tup = tuple(int(f) for f in fields[:m])
            value = float(fields[m])
        except ValueError:
            raise TensorFormatError(
                f"{source}:{lineno}: could not parse entry {raw.strip()!r}"
            ) from None
        if any(i < 1 or i > n for i in tup):
            raise IndexOutOfRange(f"{source}:{lineno}: index tuple {tup} out of range [1, {n}]")
        if not np.isfinite(value) or value < 0:
            raise NegativeEntry(f"{source}:{lineno}: entry {tup} has invalid value {value}")
        if tup in seen_lines:
            raise DuplicateIndexTuple(
                f"{source}:{lineno}: index tuple {tup} already defined on line {seen_lines[tup]}"
            )
        seen_lines[tup] = lineno
        entries.append((tup, value))

    if header is None:
        raise TensorFormatError(f"{source}: no header line 'm n' found")
    return build_tensor(header[0], header[1], entries)


def load_tensor(path) -> Tensor:
    """Read a tensor from a text file (see :func:`parse_tensor_text`)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_tensor_text(fh.read(), source=str(path))
