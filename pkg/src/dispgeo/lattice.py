"""Exact arithmetic on SL(n,Z): word metrics, roots, finite quotients.

Matrices are nested tuples of Python ints, so every computation here is
exact and overflow-free.  The module provides the breadth-first word
metric over a symmetric generating set (default: elementary matrices
E_ij(+-1)), upper and lower bounds for the translation length, the
bounded-depth-roots certificate, contortion witnesses through reduction
mod a prime, and the diagonal conjugation identity that rescales a
unipotent inside SL(2, Z[1/p]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iter_product

import numpy as np

from .errors import (
    DimensionUnsupported,
    IdentityInput,
    NoModulusFound,
    ResourceExceeded,
    TorsionInput,
    ZeroScale,
)

__all__ = [
    "IntMatrix",
    "as_int_matrix",
    "identity",
    "mat_mul",
    "mat_pow",
    "mat_mod",
    "mat_pow_mod",
    "det_exact",
    "inverse_unimodular",
    "char_poly",
    "GeneratorSet",
    "elementary_generators",
    "BallTable",
    "enumerate_ball",
    "word_length_bfs",
    "translation_length_upper",
    "translation_length_lower",
    "unipotence_exponent",
    "has_trivial_hyperbolic_part",
    "is_torsion",
    "DepthBound",
    "depth_root_bound",
    "find_roots_in_box",
    "sl_group_order",
    "ContortionWitness",
    "contortion_witness",
    "unipotent_conjugation_identity",
    "is_p_unit_denominator",
]

IntMatrix = tuple[tuple[int, ...], ...]


def as_int_matrix(rows) -> IntMatrix:
    """Normalize to a square tuple-of-tuples of Python ints."""
    if isinstance(rows, np.ndarray):
        if not np.issubdtype(rows.dtype, np.integer):
            if not np.all(rows == np.round(rows)):
                raise ValueError("matrix entries must be integers")
        rows = rows.tolist()
    mat = tuple(tuple(row) for row in rows)
    n = len(mat)
    if n == 0 or any(len(row) != n for row in mat):
        raise ValueError("matrix must be square and nonempty")
    for row in mat:
        for x in row:
            if isinstance(x, bool) or not isinstance(x, int):
                if isinstance(x, float) and x == int(x):
                    continue
                raise ValueError(f"non-integer entry {x!r}")
    return tuple(tuple(int(x) for x in row) for row in mat)


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n))
                 for i in range(n))


def mat_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    n = len(a)
    bt = tuple(zip(*b))
    return tuple(
        tuple(sum(x * y for x, y in zip(row, col)) for col in bt)
        for row in a)


def mat_pow(a: IntMatrix, k: int) -> IntMatrix:
    if k < 0:
        return mat_pow(inverse_unimodular(a), -k)
    result = identity(len(a))
    base = a
    while k:
        if k & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        k >>= 1
    return result


def mat_mod(a: IntMatrix, m: int) -> IntMatrix:
    return tuple(tuple(x % m for x in row) for row in a)


def mat_pow_mod(a: IntMatrix, k: int, m: int) -> IntMatrix:
    result = mat_mod(identity(len(a)), m)
    base = mat_mod(a, m)
    while k:
        if k & 1:
            result = mat_mod(mat_mul(result, base), m)
        base = mat_mod(mat_mul(base, base), m)
        k >>= 1
    return result


def det_exact(a: IntMatrix) -> int:
    """Fraction-free Gaussian elimination (Bareiss)."""
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    m = [list(row) for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if pivot is None:
                return 0
            m[k], m[pivot] = m[pivot], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def inverse_unimodular(a: IntMatrix) -> IntMatrix:
    """Exact inverse of a det +-1 integer matrix (again integer)."""
    n = len(a)
    det = det_exact(a)
    if det not in (1, -1):
        raise ValueError(f"determinant {det} is not a unit")
    work = [[Fraction(x) for x in row] + [Fraction(int(i == j))
            for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if work[r][col] != 0)
        work[col], work[pivot] = work[pivot], work[col]
        pv = work[col][col]
        work[col] = [x / pv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    inv = tuple(tuple(work[i][n + j] for j in range(n)) for i in range(n))
    assert all(x.denominator == 1 for row in inv for x in row)
    return tuple(tuple(int(x) for x in row) for row in inv)


def char_poly(a: IntMatrix) -> tuple[int, ...]:
    """Characteristic polynomial coefficients, highest degree first.

    Faddeev-LeVerrier; all divisions are exact for integer input.
    """
    n = len(a)
    coeffs: list[Fraction] = [Fraction(1)]
    m = a
    for k in range(1, n + 1):
        ck = Fraction(-sum(m[i][i] for i in range(n)), k)
        coeffs.append(ck)
        if k < n:
            shifted = tuple(
                tuple(Fraction(m[i][j]) + (ck if i == j else 0)
                      for j in range(n)) for i in range(n))
            m = tuple(
                tuple(sum(a[i][l] * shifted[l][j] for l in range(n))
                      for j in range(n)) for i in range(n))
    assert all(c.denominator == 1 for c in coeffs)
    return tuple(int(c) for c in coeffs)


# ---------------------------------------------------------------------------
# Word metric over a symmetric generating set


def _is_elementary(m: IntMatrix) -> int | None:
    """Off-diagonal entry t when m = I + t e_ij, else None."""
    n = len(m)
    t = None
    for i in range(n):
        for j in range(n):
            want = 1 if i == j else 0
            if m[i][j] != want:
                if i == j or t is not None:
                    return None
                t = m[i][j]
    return t


def _operator_norm_upper(m: IntMatrix) -> float:
    """Certified upper bound for the operator norm.

    Elementary matrices I + t e_ij act in a single coordinate plane and
    get the exact bound (|t| + sqrt(t^2 + 4))/2; anything else falls back
    to the Frobenius norm, which always dominates the operator norm.
    """
    t = _is_elementary(m)
    if t is not None:
        tt = abs(t)
        return (tt + math.sqrt(tt * tt + 4.0)) / 2.0 * (1.0 + 1e-12)
    frob = math.sqrt(sum(x * x for row in m for x in row))
    return frob * (1.0 + 1e-12)


@dataclass(frozen=True)
class GeneratorSet:
    """Symmetric generating set with a certified operator-norm bound.

    ``norm_bound`` is an upper bound c for the operator norm of every
    generator, so any word of length L has operator norm at most c^L.
    """

    elements: tuple[IntMatrix, ...]
    norm_bound: float

    def __post_init__(self):
        n = len(self.elements[0])
        seen = set(self.elements)
        if identity(n) in seen:
            raise ValueError("generating set must not contain the identity")
        for g in self.elements:
            if det_exact(g) != 1:
                raise ValueError(f"generator {g} has determinant != 1")
            if inverse_unimodular(g) not in seen:
                raise ValueError(f"generating set not closed under "
                                 f"inversion: missing inverse of {g}")

    @property
    def dimension(self) -> int:
        return len(self.elements[0])

    @classmethod
    def from_matrices(cls, mats) -> "GeneratorSet":
        elements = tuple(as_int_matrix(m) for m in mats)
        bound = max(_operator_norm_upper(m) for m in elements)
        return cls(elements=elements, norm_bound=bound)


def elementary_generators(n: int) -> GeneratorSet:
    """All E_ij(+-1), i != j, in deterministic (i, j, sign) order.

    Every E_ij(+-1) has operator norm (1 + sqrt 5)/2 = 1.618... < 1.62.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    mats = []
    for i in range(n):
        for j in range(n):
            if i != j:
                for t in (1, -1):
                    rows = [[1 if a == b else 0 for b in range(n)]
                            for a in range(n)]
                    rows[i][j] = t
                    mats.append(tuple(tuple(row) for row in rows))
    return GeneratorSet.from_matrices(mats)


@dataclass(frozen=True)
class BallTable:
    """Exact word length for every element of length <= radius."""

    radius: int
    index: dict[IntMatrix, int]

    def conjugators(self, max_length: int):
        return [m for m, length in self.index.items()
                if length <= max_length]


def enumerate_ball(gens: GeneratorSet, radius: int,
                   max_size: int = 1_000_000) -> BallTable:
    """Breadth-first word lengths out to the given radius.

    Deterministic: the frontier is expanded in insertion order and
    generators are applied in their listed order.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    n = gens.dimension
    index: dict[IntMatrix, int] = {identity(n): 0}
    frontier = [identity(n)]
    for r in range(1, radius + 1):
        nxt = []
        for m in frontier:
            for s in gens.elements:
                child = mat_mul(m, s)
                if child not in index:
                    index[child] = r
                    nxt.append(child)
                    if len(index) > max_size:
                        raise ResourceExceeded(
                            f"ball table exceeded {max_size} entries at "
                            f"radius {r}", count=len(index))
        frontier = nxt
    return BallTable(radius=radius, index=index)


def word_length_bfs(m, gens: GeneratorSet, radius: int,
                    max_size: int = 1_000_000) -> int | None:
    """Exact word length if <= radius, else None (not in the ball)."""
    target = as_int_matrix(m)
    if det_exact(target) != 1:
        raise ValueError("word length is defined for determinant-1 matrices")
    n = gens.dimension
    if target == identity(n):
        return 0
    seen = {identity(n)}
    frontier = [identity(n)]
    for r in range(1, radius + 1):
        nxt = []
        for cur in frontier:
            for s in gens.elements:
                child = mat_mul(cur, s)
                if child == target:
                    return r
                if child not in seen:
                    seen.add(child)
                    nxt.append(child)
                    if len(seen) > max_size:
                        raise ResourceExceeded(
                            f"BFS exceeded {max_size} states", count=len(seen))
        frontier = nxt
    return None


def translation_length_upper(m, gens: GeneratorSet, conj_radius: int,
                             word_radius: int,
                             max_size: int = 1_000_000) -> int | None:
    """min |h m h^-1| over conjugators h with |h| <= conj_radius.

    An upper bound for the translation length; None when every conjugate
    escapes the word ball.
    """
    target = as_int_matrix(m)
    if det_exact(target) != 1:
        raise ValueError("translation length needs determinant 1")
    table = enumerate_ball(gens, word_radius, max_size=max_size)
    best: int | None = None
    if conj_radius <= word_radius:
        conjugators = table.conjugators(conj_radius)
    else:
        conjugators = list(enumerate_ball(gens, conj_radius,
                                          max_size=max_size).index)
    for h in conjugators:
        conj = mat_mul(mat_mul(h, target), inverse_unimodular(h))
        length = table.index.get(conj)
        if length is not None and (best is None or length < best):
            best = length
            if best == 0:
                break
    return best


def translation_length_lower(m, gens: GeneratorSet) -> float:
    """log_c(gcd of entries of m - I), a conjugation-invariant lower
    bound for the translation length.

    h(m - I)h^-1 = hmh^-1 - I, so the gcd d of the entries of m - I
    divides every entry of every conjugate minus the identity; a nonzero
    entry of size >= d forces operator norm >= d, while words of length L
    have operator norm <= c^L.  Vacuous (0.0) when the gcd is 1.
    """
    mm = as_int_matrix(m)
    n = len(mm)
    diff = [mm[i][j] - (1 if i == j else 0) for i in range(n)
            for j in range(n)]
    if all(x == 0 for x in diff):
        raise IdentityInput("translation length lower bound needs m != I")
    d = 0
    for x in diff:
        d = math.gcd(d, abs(x))
    if d <= 1:
        return 0.0
    return math.log(d) / math.log(gens.norm_bound)


# ---------------------------------------------------------------------------
# Torsion, unipotence and the bounded-depth-roots certificate


def _totient(m: int) -> int:
    result = m
    x = m
    p = 2
    while p * p <= x:
        if x % p == 0:
            while x % p == 0:
                x //= p
            result -= result // p
        p += 1
    if x > 1:
        result -= result // x
    return result


@lru_cache(maxsize=None)
def unipotence_exponent(n: int) -> int:
    """lcm of all m with Euler totient(m) <= n.

    If C in SL(n,Z) has all eigenvalues on the unit circle they are roots
    of unity of degree <= n, so C to this power is unipotent.

    >>> unipotence_exponent(2), unipotence_exponent(3), unipotence_exponent(4)
    (12, 12, 120)
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    # totient(m) >= sqrt(m/2), so m <= 2 n^2 suffices
    orders = [m for m in range(1, 2 * n * n + 1) if _totient(m) <= n]
    return math.lcm(*orders)


def has_trivial_hyperbolic_part(m) -> bool:
    """True iff every eigenvalue has modulus 1, decided exactly.

    Equivalent to A^M being unipotent for M = unipotence_exponent(n):
    integer arithmetic only, no floating point.
    """
    a = as_int_matrix(m)
    n = len(a)
    power = mat_pow(a, unipotence_exponent(n))
    nil = tuple(tuple(power[i][j] - (1 if i == j else 0) for j in range(n))
                for i in range(n))
    return _is_nilpotent_power(nil, n)


def _is_nilpotent_power(nil: IntMatrix, n: int) -> bool:
    power = nil
    for _ in range(n - 1):
        power = mat_mul(power, nil)
    return all(x == 0 for row in power for x in row)


def is_torsion(m) -> bool:
    """A^M == I with M = unipotence_exponent(n) characterizes finite
    order in SL(n,Z): any torsion element is diagonalizable with root-of-
    unity eigenvalues of degree <= n."""
    a = as_int_matrix(m)
    return mat_pow(a, unipotence_exponent(len(a))) == identity(len(a))


_CYCLOTOMIC = {
    1: (1, -1),
    2: (1, 1),
    3: (1, 1, 1),
    4: (1, 0, 1),
    6: (1, -1, 1),
}


def _poly_divmod(p: tuple[int, ...], d: tuple[int, ...]):
    """Division of integer polynomials with monic divisor (exact)."""
    p = list(p)
    out = []
    while len(p) >= len(d):
        lead = p[0]
        out.append(lead)
        for i, c in enumerate(d):
            p[i] -= lead * c
        assert p[0] == 0
        p.pop(0)
    return tuple(out), tuple(p)


def _strip_cyclotomic(poly: tuple[int, ...], n: int) -> tuple[int, ...]:
    """Remove all cyclotomic factors of order m with totient(m) <= n."""
    factors = [f for m, f in sorted(_CYCLOTOMIC.items())
               if _totient(m) <= n]
    changed = True
    while changed and len(poly) > 1:
        changed = False
        for f in factors:
            if len(poly) >= len(f):
                q, r = _poly_divmod(poly, f)
                if all(c == 0 for c in r):
                    poly = q
                    changed = True
    return poly


@lru_cache(maxsize=None)
def _expanding_moduli(poly: tuple[int, ...], n: int) -> tuple[float, ...]:
    """Moduli > 1 among the roots, after exact cyclotomic stripping.

    For degrees <= 3 the stripped remainder has no roots of modulus
    exactly 1 (a unit-circle pair would force an integer quadratic factor
    x^2 - tx + 1 with |t| < 2, all of which are cyclotomic), so a root
    within 1e-6 of the circle only needs more precision, not a tie-break:
    those are recomputed with 60-digit arithmetic.
    """
    stripped = _strip_cyclotomic(poly, n)
    if len(stripped) <= 1:
        return ()
    roots = np.roots(np.array(stripped, dtype=float))
    moduli = list(np.abs(roots))
    if any(abs(m - 1.0) < 1e-6 for m in moduli):
        from mpmath import mp
        with mp.workdps(60):
            roots = mp.polyroots(list(stripped), maxsteps=200,
                                 extraprec=200)
            moduli = [float(abs(r)) for r in roots]
    return tuple(sorted(m for m in moduli if m > 1.0))


def _coefficient_bound(n: int, ceil_k: int) -> int:
    return max(math.comb(n, m) * ceil_k ** m for m in range(1, n))


def _family_min_expanding(n: int, k1: int) -> float | None:
    """Minimal root modulus exceeding 1 over all monic integer
    polynomials of degree n with |middle coefficients| <= k1 and constant
    term (-1)^n (the determinant-1 pin)."""
    constant = 1 if n % 2 == 0 else -1
    best: float | None = None
    ranges = [range(-k1, k1 + 1)] * (n - 1)
    for middle in iter_product(*ranges):
        poly = (1,) + middle + (constant,)
        for m in _expanding_moduli(poly, n):
            if best is None or m < best:
                best = m
            break  # only the smallest per polynomial matters
    return best


@dataclass(frozen=True)
class DepthBound:
    """Certificate that eta^k = matrix has no solution for k >= depth.

    Hyperbolic branch: K is the spectral radius, K1 the coefficient bound
    for characteristic polynomials of potential roots, b > 1 the smallest
    expanding root modulus over that finite polynomial family, q the least
    power with b^q > K; a root of order >= q would be forced to have
    trivial hyperbolic part, contradicting K > 1, so depth = q.

    Quasi-unipotent branch (all eigenvalue moduli 1, b and q are None):
    with U = matrix^M unipotent and N = log U, any k-th root forces
    (k * 2N + N^2) to be divisible by 2k^2 entrywise, which bounds k;
    depth is that bound plus one.

    ``box_bound`` and ``checked_powers`` record the scope of the
    exhaustive cross-check; ``roots_found`` lists roots discovered below
    the certified depth (informative, e.g. genuine square roots).
    """

    matrix: IntMatrix
    branch: str
    K: float
    K1: int
    b: float | None
    q: int | None
    M: int
    depth: int
    box_bound: int
    checked_powers: tuple[int, ...]
    roots_found: tuple[tuple[int, IntMatrix], ...]


_BOX_ENUMERATION_CAP = 20_000_000


@lru_cache(maxsize=8)
def _det1_survivors(n: int, box: int) -> np.ndarray:
    """All integer matrices with |entries| <= box and det 1, as an
    (m, n, n) int64 array.

    Candidates are decoded from a flat index in bounded-memory chunks and
    the determinant filter is vectorized.  Boxes whose candidate count
    passes the enumeration cap are an error, never truncated.
    """
    base = 2 * box + 1
    total = base ** (n * n)
    if total > _BOX_ENUMERATION_CAP:
        raise ResourceExceeded(
            f"box {box} in dimension {n} has {total} candidates > cap "
            f"{_BOX_ENUMERATION_CAP}", count=total)
    chunk = 1 << 19
    keep_blocks = []
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        cols = []
        for _ in range(n * n):
            idx, rem = np.divmod(idx, base)
            cols.append(rem - box)
        e = cols  # row-major entries e[0..n*n-1]
        if n == 2:
            det = e[0] * e[3] - e[1] * e[2]
        else:
            det = (e[0] * (e[4] * e[8] - e[5] * e[7])
                   - e[1] * (e[3] * e[8] - e[5] * e[6])
                   + e[2] * (e[3] * e[7] - e[4] * e[6]))
        mask = det == 1
        if np.any(mask):
            block = np.stack([c[mask] for c in cols], axis=1)
            keep_blocks.append(block)
    flat = np.concatenate(keep_blocks, axis=0)
    return flat.reshape(-1, n, n)


def find_roots_in_box(a, k: int, box: int) -> list[IntMatrix]:
    """All integer B with |entries| <= box, det 1 and B^k = a (exact).

    The batched power check stays in int64 while the row-sum growth bound
    (n * box)^k fits; beyond that it falls back to exact big-int powering
    per candidate, so the result is exact either way.
    """
    target = as_int_matrix(a)
    n = len(target)
    if n not in (2, 3):
        raise DimensionUnsupported("box search supports n in {2, 3}")
    if k < 1 or box < 1:
        raise ValueError("need k >= 1 and box >= 1")
    survivors = _det1_survivors(n, box)
    # a root of `a` commutes with `a`; the commutator check never
    # overflows int64 at these box sizes and prunes almost everything
    t64 = np.asarray(target, dtype=np.int64)
    left = np.einsum("bij,jk->bik", survivors, t64)
    right = np.einsum("ij,bjk->bik", t64, survivors)
    survivors = survivors[np.all(left == right, axis=(1, 2))]
    if (n * box) ** k < 2 ** 62:
        power = np.broadcast_to(np.eye(n, dtype=np.int64),
                                survivors.shape).copy()
        base = survivors.copy()
        kk = k
        while kk:
            if kk & 1:
                power = np.einsum("bij,bjk->bik", power, base)
            kk >>= 1
            if kk:
                base = np.einsum("bij,bjk->bik", base, base)
        hits = np.all(power == np.asarray(target, dtype=np.int64),
                      axis=(1, 2))
        picked = survivors[hits]
        return [tuple(tuple(int(x) for x in row) for row in b)
                for b in picked]
    found = []
    for cand in survivors:
        b = tuple(tuple(int(x) for x in row) for row in cand)
        if mat_pow(b, k) == target:
            found.append(b)
    return found


def depth_root_bound(a, box_bound: int | None = None,
                     extra_powers: tuple[int, ...] = ()) -> DepthBound:
    """Full bounded-depth-roots certificate for a non-torsion matrix.

    Dimensions 2 and 3 only (the box cross-check is exhaustive there).
    Raises TorsionInput for finite-order input.
    """
    mat = as_int_matrix(a)
    n = len(mat)
    if n not in (2, 3):
        raise DimensionUnsupported(f"depth_root_bound supports n in "
                                   f"{{2, 3}}, got {n}")
    if det_exact(mat) != 1:
        raise ValueError("input must have determinant 1")
    m_exp = unipotence_exponent(n)
    if is_torsion(mat):
        raise TorsionInput("torsion elements have roots of every depth "
                           "along their finite orbit")

    if has_trivial_hyperbolic_part(mat):
        branch = "quasi_unipotent"
        k_spectral = 1.0
        ceil_k = 1
        k1 = _coefficient_bound(n, ceil_k)
        b = None
        q = None
        u = mat_pow(mat, m_exp)
        nil = tuple(tuple(u[i][j] - (1 if i == j else 0) for j in range(n))
                    for i in range(n))
        nil2 = mat_mul(nil, nil)
        # 2 log(U) = 2 N - N^2 for (U - I) = N nilpotent of order <= 3
        w1 = tuple(tuple(2 * nil[i][j] - nil2[i][j] for j in range(n))
                   for i in range(n))
        a_max = max(abs(x) for row in w1 for x in row)
        c_max = max(abs(x) for row in nil2 for x in row)
        k_max = 1
        while 2 * (k_max + 1) ** 2 - a_max * (k_max + 1) - c_max <= 0:
            k_max += 1
        depth = k_max + 1
    else:
        branch = "hyperbolic"
        coeffs = char_poly(mat)
        roots = np.roots(np.array(coeffs, dtype=float))
        k_spectral = float(np.max(np.abs(roots)))
        ceil_k = math.ceil(k_spectral - 1e-9)
        k1 = _coefficient_bound(n, ceil_k)
        b_raw = _family_min_expanding(n, k1)
        assert b_raw is not None  # the input's own polynomial is expanding
        b = b_raw * (1.0 - 1e-9)
        if b <= 1.0:
            # unreachable for n <= 3 at sane K1 (expanding roots of the
            # family stay ~1/(4 K1) away from the circle), but never loop
            raise RuntimeError("expanding modulus too close to 1 to "
                               "certify a power threshold")
        q = 1
        while b ** q <= k_spectral * (1.0 + 1e-9):
            q += 1
        assert q >= 2
        depth = q

    if box_bound is None:
        box_bound = ceil_k + 1 if n == 2 else min(ceil_k + 1, 2)
    checked = sorted(set((2, 3)) | set(extra_powers) | {depth, depth + 1})
    roots_found = []
    for k in checked:
        for root in find_roots_in_box(mat, k, box_bound):
            if k >= depth:
                raise RuntimeError(
                    f"soundness failure: found {root} with root^{k} = "
                    f"input despite certified depth {depth}")
            roots_found.append((k, root))
    return DepthBound(matrix=mat, branch=branch, K=k_spectral, K1=k1,
                      b=b, q=q, M=m_exp, depth=depth, box_bound=box_bound,
                      checked_powers=tuple(checked),
                      roots_found=tuple(roots_found))


# ---------------------------------------------------------------------------
# Finite quotients: contortion witnesses


def sl_group_order(n: int, m: int) -> int:
    """|SL(n, Z/m)| for prime m: m^(n(n-1)/2) * prod_{j=2..n} (m^j - 1).

    >>> sl_group_order(2, 2), sl_group_order(2, 3), sl_group_order(3, 2)
    (6, 24, 168)
    """
    if n < 2 or m < 2:
        raise ValueError("need n >= 2 and m >= 2")
    order = m ** (n * (n - 1) // 2)
    for j in range(2, n + 1):
        order *= m ** j - 1
    return order


def _primes(cap: int):
    sieve = [True] * (cap + 1)
    for p in range(2, cap + 1):
        if sieve[p]:
            yield p
            for q in range(p * p, cap + 1, p):
                sieve[q] = False


@dataclass(frozen=True)
class ContortionWitness:
    """gamma^k escapes every listed conjugacy class.

    Reduction mod the prime ``modulus`` sends gamma^k to the identity
    (k is the order of SL(n, Z/modulus)) while every class representative
    stays away from the identity, so no conjugate can equal gamma^k.
    """

    gamma: IntMatrix
    class_reps: tuple[IntMatrix, ...]
    modulus: int
    k: int


def contortion_witness(gamma, class_reps,
                       prime_cap: int = 10_000) -> ContortionWitness:
    """Smallest prime modulus separating the class reps from the
    identity, and the resulting escaping power gamma^k.

    gamma must be non-torsion (else its powers cycle) and no class
    representative may be the identity.
    """
    g = as_int_matrix(gamma)
    n = len(g)
    if det_exact(g) != 1:
        raise ValueError("gamma must have determinant 1")
    if is_torsion(g):
        raise TorsionInput("gamma must be non-torsion")
    reps = tuple(as_int_matrix(r) for r in class_reps)
    if not reps:
        raise ValueError("need at least one conjugacy class representative")
    ident = identity(n)
    for r in reps:
        if len(r) != n:
            raise ValueError("class representatives must match gamma's size")
        if r == ident:
            raise ValueError("the identity is not a valid class "
                             "representative")
    modulus = None
    for p in _primes(prime_cap):
        if all(mat_mod(r, p) != mat_mod(ident, p) for r in reps):
            modulus = p
            break
    if modulus is None:
        raise NoModulusFound(f"no prime <= {prime_cap} separates the "
                             "representatives from the identity")
    k = sl_group_order(n, modulus)
    if mat_pow_mod(g, k, modulus) != mat_mod(ident, modulus):
        raise RuntimeError("group order does not annihilate gamma mod m; "
                           "order formula or input invalid")
    return ContortionWitness(gamma=g, class_reps=reps, modulus=modulus, k=k)


# ---------------------------------------------------------------------------
# SL(2, Z[1/p]): rescaling a unipotent by a diagonal conjugation


def is_p_unit_denominator(x: Fraction, p: int) -> bool:
    """True iff x lies in Z[1/p]: the denominator is a power of p."""
    if p < 2:
        raise ValueError("p must be >= 2")
    d = Fraction(x).denominator
    while d % p == 0:
        d //= p
    return d == 1


def unipotent_conjugation_identity(t, p: int | None = None
                                   ) -> tuple[tuple, tuple]:
    """diag(t, 1/t) [[1,1],[0,1]] diag(1/t, t) computed exactly.

    Returns (conjugator, result); the result is [[1, t^2], [0, 1]], so for
    t = p^k the p^(2k)-th power of the unipotent is conjugate to the
    unipotent itself inside SL(2, Z[1/p]).  Passing ``p`` additionally
    enforces that t (hence every matrix entry) lies in Z[1/p].
    """
    t = Fraction(t)
    if t == 0:
        raise ZeroScale("t must be nonzero")
    if p is not None and not (is_p_unit_denominator(t, p)
                              and is_p_unit_denominator(1 / t, p)):
        raise ValueError(f"{t} is not a unit of Z[1/{p}]")
    conj = ((t, Fraction(0)), (Fraction(0), 1 / t))
    u = ((Fraction(1), Fraction(1)), (Fraction(0), Fraction(1)))
    inv = ((1 / t, Fraction(0)), (Fraction(0), t))

    def fr_mul(a, b):
        return tuple(tuple(sum(a[i][l] * b[l][j] for l in range(2))
                           for j in range(2)) for i in range(2))

    result = fr_mul(fr_mul(conj, u), inv)
    assert result == ((1, t * t), (0, 1))
    return conj, result
