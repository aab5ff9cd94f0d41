"""Hyperbolicity machinery over exact word metrics.

Everything here is parameterized by the hyperbolicity constant delta (an
exact rational, >= 0) and is exercised exactly at delta = 0 on free groups,
where every inequality below is a theorem.  The three ping-pong conditions,
the almost-cyclically-reduced predicate, the selector that repairs a
non-ACR element by right-multiplying with a pair element, and the resulting
word-length bound in terms of stable norms all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    HypothesisViolated,
    NotAlmostCyclicallyReduced,
    NotPingPong,
    PingPongNotFound,
    SelectionFailed,
)
from .words import (
    Word,
    ball,
    distance,
    gromov_product,
    multiply,
    stable_norm,
    translation_length,
    word_length,
)

__all__ = [
    "AcrVerdict",
    "PingPongCertificate",
    "LengthBound",
    "is_almost_cyclically_reduced",
    "stable_length_lower_bound",
    "check_chain_separation",
    "certify_ping_pong",
    "find_ping_pong_pair",
    "select_acr",
    "stable_norm_length_bound",
    "pair_offset",
    "conjugacy_undistortion_check",
]


def _as_delta(delta) -> Fraction:
    d = Fraction(delta)
    if d < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    return d


@dataclass(frozen=True)
class AcrVerdict:
    """Outcome of the almost-cyclically-reduced test.

    ``product`` is <g, g^-1> based at the identity, ``threshold`` is
    |g|/3 - delta, and ``is_acr`` iff product <= threshold.
    """

    element: Word
    product: Fraction
    threshold: Fraction
    is_acr: bool


def is_almost_cyclically_reduced(g: Word, delta=0) -> AcrVerdict:
    """Test <g, g^-1> <= |g|/3 - delta (boundary case counts as ACR).

    For a reduced word, <g, g^-1> equals the number of letters peeled by
    cyclic reduction, so a cyclically reduced word always passes at
    delta = 0 unless it is empty with delta > 0.
    """
    d = _as_delta(delta)
    product = gromov_product(g, g.inverse()).value
    threshold = Fraction(len(g), 3) - d
    return AcrVerdict(element=g, product=product, threshold=threshold,
                      is_acr=product <= threshold)


def stable_length_lower_bound(g: Word, delta=0) -> Fraction:
    """|g|/3, valid as a lower bound for the stable norm of any almost
    cyclically reduced g.  Raises if g is not ACR at this delta."""
    verdict = is_almost_cyclically_reduced(g, delta)
    if not verdict.is_acr:
        raise NotAlmostCyclicallyReduced(
            f"{g!r}: <g,g^-1> = {verdict.product} > {verdict.threshold}")
    return Fraction(len(g), 3)


def check_chain_separation(points: Sequence[Word], a, delta=0) -> bool:
    """Check that a chain with uniformly spaced consecutive triples
    diverges linearly.

    Hypothesis (verified first, HypothesisViolated(n) on the first bad
    triple): d(x_{n+2}, x_n) >= max(d(x_{n+2}, x_{n+1}), d(x_{n+1}, x_n))
    + a + 2 delta.  Returns True iff d(x_n, x_p) >= |n - p| a for every
    pair of indices.
    """
    a = Fraction(a)
    d = _as_delta(delta)
    pts = list(points)
    for n in range(len(pts) - 2):
        d02 = distance(pts[n], pts[n + 2])
        d01 = distance(pts[n], pts[n + 1])
        d12 = distance(pts[n + 1], pts[n + 2])
        if d02 < max(d01, d12) + a + 2 * d:
            raise HypothesisViolated(
                f"triple at index {n}: d(x_n, x_n+2) = {d02} < "
                f"max({d01}, {d12}) + {a} + 2*{d}", index=n)
    for n in range(len(pts)):
        for p in range(n + 1, len(pts)):
            if distance(pts[n], pts[p]) < (p - n) * a:
                return False
    return True


@dataclass(frozen=True)
class PingPongCertificate:
    """A certified ping-pong pair (u, v) at a given delta.

    margin1 = min(|u|, |v|) - 100 delta
    margin2 = min(|u|, |v|)/2 - 20 delta - max <u^(+-1), v^(+-1)>
    margin3 = min over w in {u, v} of |w|/2 - 20 delta - <w, w^-1>

    All margins are >= 0 by construction; such a pair generates a free
    subgroup.
    """

    u: Word
    v: Word
    delta: Fraction
    margin1: Fraction
    margin2: Fraction
    margin3: Fraction


def certify_ping_pong(u: Word, v: Word, delta=0) -> PingPongCertificate:
    """Check the three ping-pong conditions; raise NotPingPong with the
    first failing condition and its (negative) margin otherwise.

    >>> cert = certify_ping_pong(Word.from_str("aab"), Word.from_str("bba"))
    >>> (cert.margin1, cert.margin2, cert.margin3)
    (Fraction(3, 1), Fraction(3, 2), Fraction(3, 2))
    """
    d = _as_delta(delta)
    lu, lv = word_length(u), word_length(v)
    shorter = Fraction(min(lu, lv))

    margin1 = shorter - 100 * d
    if margin1 < 0:
        raise NotPingPong(1, margin1)

    ui, vi = u.inverse(), v.inverse()
    cross = max(
        gromov_product(u, v).value,
        gromov_product(u, vi).value,
        gromov_product(ui, v).value,
        gromov_product(ui, vi).value,
    )
    margin2 = shorter / 2 - 20 * d - cross
    if margin2 < 0:
        raise NotPingPong(2, margin2)

    margin3 = min(
        Fraction(lu, 2) - 20 * d - gromov_product(u, ui).value,
        Fraction(lv, 2) - 20 * d - gromov_product(v, vi).value,
    )
    if margin3 < 0:
        raise NotPingPong(3, margin3)

    return PingPongCertificate(u=u, v=v, delta=d, margin1=margin1,
                               margin2=margin2, margin3=margin3)


def find_ping_pong_pair(f: Word, a: Word, delta=0,
                        n_max: int = 32) -> tuple[int, PingPongCertificate]:
    """Smallest N <= n_max with (f^N, a f^N a^-1) a ping-pong pair.

    f must be cyclically reduced with positive translation length, and a a
    generator that does not commute with f.  Existence for large N is a
    theorem; n_max is only a resource cap.
    """
    if translation_length(f) == 0:
        raise ValueError("f must have positive translation length")
    if not f.is_cyclically_reduced():
        raise ValueError("f must be cyclically reduced")
    if word_length(a) != 1:
        raise ValueError("a must be a single generator or inverse")
    if multiply(a, f) == multiply(f, a):
        raise ValueError("a must not commute with f")
    d = _as_delta(delta)
    fn = Word.identity(f.rank)
    ai = a.inverse()
    for n in range(1, n_max + 1):
        fn = multiply(fn, f)
        conj = multiply(multiply(a, fn), ai)
        try:
            return n, certify_ping_pong(fn, conj, d)
        except NotPingPong:
            continue
    raise PingPongNotFound(f"no power up to {n_max} works at delta {d}")


def select_acr(g: Word, pair: PingPongCertificate) -> Word:
    """Return the first of g, g*u, g*v that is almost cyclically reduced.

    Requires |g| >= 3 max(|u|, |v|) + 100 delta.  With a valid certificate
    one of the three is always ACR; SelectionFailed therefore signals a
    bug, not bad input (at delta = 0 on a free group it is a theorem).
    """
    d = pair.delta
    needed = 3 * max(word_length(pair.u), word_length(pair.v)) + 100 * d
    if word_length(g) < needed:
        raise HypothesisViolated(
            f"|g| = {word_length(g)} < 3 max(|u|,|v|) + 100 delta = {needed}")
    for candidate in (g, multiply(g, pair.u), multiply(g, pair.v)):
        if is_almost_cyclically_reduced(candidate, d).is_acr:
            return candidate
    raise SelectionFailed(f"no ACR candidate for {g!r}")


def pair_offset(pair: PingPongCertificate) -> Fraction:
    """The additive constant 3 max(|u|, |v|) + 100 delta of the length
    bound; always derived from the pair, never taken as input."""
    return 3 * max(word_length(pair.u), word_length(pair.v)) + 100 * pair.delta


@dataclass(frozen=True)
class LengthBound:
    """|g| versus 3 max([g], [gu], [gv]) + offset (stable norms)."""

    lhs: int
    rhs: Fraction
    holds: bool


def stable_norm_length_bound(g: Word, pair: PingPongCertificate,
                             alpha=None) -> LengthBound:
    """Bound the word length of g by the best stable norm among g, g*u,
    g*v.  ``alpha`` overrides the derived offset (test hook for negative
    controls); leave None for real use.
    """
    offset = pair_offset(pair) if alpha is None else Fraction(alpha)
    best = max(stable_norm(g),
               stable_norm(multiply(g, pair.u)),
               stable_norm(multiply(g, pair.v)))
    lhs = word_length(g)
    rhs = 3 * best + offset
    return LengthBound(lhs=lhs, rhs=rhs, holds=lhs <= rhs)


def conjugacy_undistortion_check(gens: Iterable[Word], A, B,
                                 radius: int) -> bool:
    """Check |g| <= A * max_i ell(w_i g) + B for every g in the ball.

    ``gens`` is the finite witness family (may contain the identity), A > 0
    and B >= 0 exact rationals, ``ell`` the translation length.  Returns
    False as soon as one element fails.
    """
    ws = list(gens)
    if not ws:
        raise ValueError("witness family must be nonempty")
    rank = ws[0].rank
    A = Fraction(A)
    B = Fraction(B)
    if A <= 0 or B < 0:
        raise ValueError("need A > 0 and B >= 0")
    for g in ball(rank, radius):
        best = max(translation_length(multiply(w, g)) for w in ws)
        if word_length(g) > A * best + B:
            return False
    return True
