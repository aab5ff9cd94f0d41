"""Real matrix geometry on SL(n,R): projections, norms, proximality.

Two projections drive everything: the vector of sorted log singular values
(norm-like, subadditive) and the vector of sorted log eigenvalue moduli
(conjugation-invariant, the translation length of the acting isometry).
Their Euclidean norms are the symmetric-space norm and displacement, and
their difference measures how far an element is from acting like a
diagonal one.

All numerics use dense LAPACK solvers through numpy.  Integer unipotents
short-circuit to exactly zero displacement, which the lattice experiments
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractionFailed,
    EigenFailure,
    NoDominantEigenvalue,
    SeparationFailed,
    SingularInput,
    ZeroVector,
)

__all__ = [
    "ProximalityCertificate",
    "cartan_projection",
    "jordan_projection",
    "symmetric_space_norm",
    "symmetric_space_displacement",
    "projective_metric",
    "point_hyperplane_distance",
    "certify_proximal",
    "cartan_jordan_gap",
    "is_unipotent",
    "renormalized_cartan_average",
    "check_special_linear",
    "random_special_linear",
]

_EIG_REL_TOL = 1e-9  # relative tolerance for simplicity/reality decisions


def _as_matrix(g) -> np.ndarray:
    m = np.asarray(g, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 2:
        raise ValueError("matrices must be at least 2x2")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def check_special_linear(g, tol: float = 1e-9) -> None:
    """Raise if |det(g) - 1| > tol * scale^n with scale = max |entry|."""
    m = _as_matrix(g)
    scale = max(1.0, float(np.max(np.abs(m))))
    if abs(np.linalg.det(m) - 1.0) > tol * scale ** m.shape[0]:
        raise ValueError(f"determinant {np.linalg.det(m)} is not 1")


def random_special_linear(n: int, rng, entry_bound: float = 2.0,
                          min_det: float = 0.05,
                          max_eigenbasis_condition: float | None = None
                          ) -> np.ndarray:
    """Draw a det-1 matrix: uniform entries in [-bound, bound], rescaled.

    Draws with |det| < min_det are rejected before rescaling (the n-th
    root would blow the entries up), as are negative-determinant draws.
    With ``max_eigenbasis_condition`` set, draws whose eigenvector basis
    has 2-norm condition number above the cap are also rejected; since
    |log sv_i(g^m) - m log|lambda_i|| <= log cond(V), the cap certifies
    how fast renormalized power averages converge to the Jordan
    projection (cap 2.7 gives 1e-3 at m = 2^10).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    while True:
        m = rng.uniform(-entry_bound, entry_bound, size=(n, n))
        det = np.linalg.det(m)
        if det < min_det:
            continue
        g = m / det ** (1.0 / n)
        if max_eigenbasis_condition is not None:
            _, vecs = np.linalg.eig(g)
            if np.linalg.cond(vecs) > max_eigenbasis_condition:
                continue
        return g


def _integer_entries(g) -> list[list[int]] | None:
    """Exact integer rows when every entry is integral, else None."""
    if isinstance(g, (list, tuple)) and all(
            isinstance(x, int) and not isinstance(x, bool)
            for row in g for x in row):
        return [list(row) for row in g]
    m = np.asarray(g)
    if np.issubdtype(m.dtype, np.integer):
        return [[int(x) for x in row] for row in m]
    if (np.issubdtype(m.dtype, np.floating)
            and np.all(np.isfinite(m)) and np.all(m == np.round(m))):
        return [[int(x) for x in row] for row in m]
    return None


def _cartan_from_integer_rows(rows: list[list[int]]) -> np.ndarray:
    """High-precision route for integer matrices whose singular values
    exceed double-precision dynamic range (e.g. large exact powers)."""
    from mpmath import mp, svd_r

    from .lattice import det_exact

    mat = tuple(tuple(r) for r in rows)
    if det_exact(mat) == 0:
        raise SingularInput("integer matrix is singular")
    bits = max(abs(x) for row in rows for x in row).bit_length()
    with mp.workdps(max(60, 2 * len(rows) * bits // 3 + 40)):
        h = mp.matrix(rows)
        sv = svd_r(h, compute_uv=False)
        logs = sorted((float(mp.log(sv[i])) for i in range(len(rows))),
                      reverse=True)
    return np.array(logs)


def cartan_projection(g) -> np.ndarray:
    """Sorted (non-increasing) log singular values.

    For det-1 matrices the entries sum to 0 up to roundoff.  Integer
    matrices too large (or too ill-conditioned) for double precision go
    through an exact-coefficient high-precision route.
    """
    rows = _integer_entries(g)
    if rows is not None and max(abs(x) for row in rows
                                for x in row) > 10 ** 12:
        return _cartan_from_integer_rows(rows)
    m = _as_matrix(g)
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= sv[0] * 1e-14 or sv[-1] == 0.0:
        if rows is not None:
            return _cartan_from_integer_rows(rows)
        raise SingularInput(f"singular values {sv} too degenerate for logs")
    return np.sort(np.log(sv))[::-1]


def _int_nilpotency(rows: list[list[int]]) -> bool:
    """(A - I)^n == 0 in exact integer arithmetic."""
    n = len(rows)
    nil = [[rows[i][j] - (1 if i == j else 0) for j in range(n)]
           for i in range(n)]
    power = nil
    for _ in range(n - 1):
        power = [[sum(power[i][k] * nil[k][j] for k in range(n))
                  for j in range(n)] for i in range(n)]
    return all(x == 0 for row in power for x in row)


def is_unipotent(g) -> bool:
    """(g - I)^n == 0; exact for integer input, tolerance otherwise.

    Float tolerance is 1e-8 * max(1, scale)^n on the max entry of the
    power, with scale the largest entry modulus of g.
    """
    rows = _integer_entries(g)
    if rows is not None:
        if len(rows) != len(rows[0]):
            raise ValueError("expected a square matrix")
        return _int_nilpotency(rows)
    m = _as_matrix(g)
    n = m.shape[0]
    power = np.linalg.matrix_power(m - np.eye(n), n)
    scale = max(1.0, float(np.max(np.abs(m))))
    return float(np.max(np.abs(power))) <= 1e-8 * scale ** n


def _jordan_from_integer_rows(rows: list[list[int]]) -> np.ndarray:
    """Exact route for integer matrices: characteristic polynomial over Z,
    then high-precision roots.

    Keeps the projection meaningful for huge-entry powers, where float
    eigensolvers lose the small eigenvalues entirely.
    """
    from mpmath import mp

    from .lattice import char_poly, det_exact

    mat = tuple(tuple(r) for r in rows)
    if det_exact(mat) == 0:
        raise SingularInput("integer matrix is singular")
    coeffs = list(char_poly(mat))
    bits = max(abs(c) for c in coeffs).bit_length()
    try:
        with mp.workdps(max(60, bits // 3 + 40)):
            roots = mp.polyroots(coeffs, maxsteps=500, extraprec=300)
            logs = sorted((float(mp.log(abs(r))) for r in roots),
                          reverse=True)
    except mp.NoConvergence as exc:  # heavily repeated roots
        if bits > 900:
            raise EigenFailure(
                "root finding did not converge and coefficients exceed "
                "float range") from exc
        moduli = np.abs(np.roots(np.array(coeffs, dtype=float)))
        if np.any(moduli == 0.0):
            raise SingularInput("zero eigenvalue modulus") from exc
        logs = sorted(np.log(moduli), reverse=True)
    return np.array(logs)


def jordan_projection(g) -> np.ndarray:
    """Sorted (non-increasing) log eigenvalue moduli.

    Equals lim cartan_projection(g^m)/m.  Integer unipotent input returns
    the exact zero vector so downstream displacement is exactly 0; other
    integer input goes through the exact characteristic polynomial, so
    arbitrarily large entries stay accurate.
    """
    rows = _integer_entries(g)
    if rows is not None:
        if _int_nilpotency(rows):
            return np.zeros(len(rows))
        return _jordan_from_integer_rows(rows)
    m = _as_matrix(g)
    if abs(np.linalg.det(m)) < 1e-300:
        raise SingularInput("matrix is numerically singular")
    try:
        eig = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    moduli = np.abs(eig)
    if np.any(moduli == 0.0):
        raise SingularInput("zero eigenvalue modulus")
    return np.sort(np.log(moduli))[::-1]


def symmetric_space_norm(g) -> float:
    """Euclidean norm of the Cartan projection; subadditive."""
    return float(np.linalg.norm(cartan_projection(g)))


def symmetric_space_displacement(g) -> float:
    """Euclidean norm of the Jordan projection.

    Conjugation-invariant and bounded by the symmetric-space norm; exactly
    0.0 for integer unipotents.
    """
    return float(np.linalg.norm(jordan_projection(g)))


def _unit(x, name: str = "vector") -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.all(np.isfinite(v)):
        raise ZeroVector(f"{name} must be nonzero and finite")
    return v / norm


def projective_metric(x, y) -> float:
    """Sine of the angle between the lines Rx and Ry; in [0, 1]."""
    ux, uy = _unit(x, "x"), _unit(y, "y")
    cos = min(1.0, abs(float(np.dot(ux, uy))))
    return float(np.sqrt(max(0.0, 1.0 - cos * cos)))


def point_hyperplane_distance(x, normal) -> float:
    """Sine-metric distance from the line Rx to the projectivized
    hyperplane with the given normal vector; in [0, 1]."""
    ux, un = _unit(x, "x"), _unit(normal, "normal")
    return min(1.0, abs(float(np.dot(ux, un))))


def _projective_samples(n: int, count: int) -> np.ndarray:
    """Deterministic quasi-uniform sample of P(R^n), as unit rows.

    Dimension 2 uses equally spaced angles on a half-circle, dimension 3 a
    Fibonacci lattice on the sphere (antipodes identified for free);
    higher dimensions fall back to a fixed-seed Gaussian lattice, which is
    equally deterministic.
    """
    if count < 1:
        raise ValueError("need at least one sample")
    if n == 2:
        theta = np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    if n == 3:
        golden = (1.0 + np.sqrt(5.0)) / 2.0
        j = np.arange(count)
        z = 2.0 * (j + 0.5) / count - 1.0
        phi = 2.0 * np.pi * j / golden
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((count, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _dominant_real_eigenvector(m: np.ndarray) -> tuple[float, np.ndarray]:
    """Eigenvalue of strictly largest modulus and its real unit vector.

    Raises NoDominantEigenvalue when the top modulus is not simple or the
    top eigenvalue is not real, both within 1e-9 * spectral radius.
    """
    try:
        eigvals, eigvecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    moduli = np.abs(eigvals)
    order = np.argsort(moduli)[::-1]
    top = order[0]
    radius = moduli[top]
    if radius == 0.0:
        raise SingularInput("zero spectral radius")
    if moduli[order[1]] > radius - _EIG_REL_TOL * radius:
        raise NoDominantEigenvalue(
            f"top moduli {moduli[order[0]]:.6g} and {moduli[order[1]]:.6g} "
            "are not separated")
    if abs(eigvals[top].imag) > _EIG_REL_TOL * radius:
        raise NoDominantEigenvalue(
            f"top eigenvalue {eigvals[top]:.6g} is not real")
    vec = eigvecs[:, top]
    pivot = vec[np.argmax(np.abs(vec))]
    vec = vec / pivot
    vec = np.real(vec)
    return float(np.real(eigvals[top])), vec / np.linalg.norm(vec)


@dataclass(frozen=True)
class ProximalityCertificate:
    """Witnesses that g attracts the far-from-hyperplane part of P(V).

    ``separation`` is the distance from the attracting point to the
    repelling hyperplane (>= r); ``contraction_margin`` the worst value of
    epsilon - d(g x, attracting) over tested samples x with
    d(x, hyperplane) >= epsilon (>= 0).  Sampling is deterministic, so the
    certificate is reproducible; it is evidence at the stated sample
    count, not an interval-arithmetic proof.
    """

    r: float
    epsilon: float
    attracting: tuple[float, ...]
    repelling_normal: tuple[float, ...]
    separation: float
    contraction_margin: float
    samples_tested: int


def certify_proximal(g, r: float, epsilon: float,
                     samples: int = 1000) -> ProximalityCertificate:
    """Certify (r, epsilon)-proximality by direct verification.

    The attracting point is the eigenvector of the dominant eigenvalue,
    the repelling hyperplane the invariant complement (kernel of the
    dominant left eigenvector).  Raises NoDominantEigenvalue /
    SeparationFailed / ContractionFailed as appropriate.
    """
    if not (r > 2 * epsilon > 0):
        raise ValueError(f"need r > 2 epsilon > 0, got r={r}, epsilon={epsilon}")
    if samples < 1:
        raise ValueError("samples must be >= 1")
    m = _as_matrix(g)
    _, x_plus = _dominant_real_eigenvector(m)
    _, normal = _dominant_real_eigenvector(m.T)

    separation = point_hyperplane_distance(x_plus, normal)
    if separation < r:
        raise SeparationFailed(separation, r)

    pts = _projective_samples(m.shape[0], samples)
    far = np.abs(pts @ normal) >= epsilon
    tested = pts[far]
    if len(tested) == 0:
        raise ValueError("no sample point clears the epsilon band; "
                         "increase samples or decrease epsilon")
    images = tested @ m.T
    norms = np.linalg.norm(images, axis=1)
    if np.any(norms == 0.0):
        raise SingularInput("sample collapsed to zero under g")
    cos = np.abs(images @ x_plus) / norms
    dist = np.sqrt(np.maximum(0.0, 1.0 - np.minimum(1.0, cos) ** 2))
    worst = int(np.argmax(dist))
    margin = float(epsilon - dist[worst])
    if margin < 0.0:
        raise ContractionFailed(tuple(float(t) for t in tested[worst]),
                                float(dist[worst]), epsilon)
    return ProximalityCertificate(
        r=float(r), epsilon=float(epsilon),
        attracting=tuple(float(t) for t in x_plus),
        repelling_normal=tuple(float(t) for t in normal),
        separation=float(separation),
        contraction_margin=margin,
        samples_tested=int(len(tested)))


def cartan_jordan_gap(g) -> float:
    """Euclidean norm of cartan_projection(g) - jordan_projection(g).

    Zero exactly for normal matrices; bounded over families of uniformly
    proximal elements, which is what the gap experiment measures.
    """
    return float(np.linalg.norm(cartan_projection(g) - jordan_projection(g)))


def renormalized_cartan_average(g, squarings: int,
                                dps: int | None = None) -> np.ndarray:
    """cartan_projection(g^m)/m for m = 2^squarings.

    Repeated squaring with renormalization by the largest entry; the log
    factors accumulate exactly once per level.  The singular values of g^m
    span a dynamic range of order exp(m * spectral spread), far beyond
    double precision already for m ~ 100, so the squaring runs in
    arbitrary precision (gmpy2-backed mpmath); ``dps`` overrides the
    automatically chosen working precision.  Converges to the Jordan
    projection as the number of squarings grows.
    """
    from mpmath import mp, mpf, matrix as mp_matrix, svd_r

    m = _as_matrix(g)
    if squarings < 0:
        raise ValueError("squarings must be >= 0")
    n = m.shape[0]
    if dps is None:
        try:
            lam = jordan_projection(m)
            spread = float(lam[0] - lam[-1])
        except (SingularInput, EigenFailure):
            spread = 2.0 * n * np.log(max(2.0, float(np.max(np.abs(m)))))
        dps = int(1.3 * (2 ** squarings) * spread / np.log(10.0)) + 60
    with mp.workdps(dps):
        h = mp_matrix(m.tolist())
        # g^(2^k) = c_k H_k with H_k at unit scale; track log(c_k)/2^k
        log_scale = mpf(0)
        for k in range(1, squarings + 1):
            h = h * h
            f = max(abs(h[i, j]) for i in range(n) for j in range(n))
            if f == 0:
                raise SingularInput("renormalized power degenerated")
            h = h / f
            log_scale += mp.log(f) / (2 ** k)
        sv = svd_r(h, compute_uv=False)
        if min(sv) == 0:
            raise SingularInput("renormalized power is singular")
        scale = 2 ** squarings
        vals = [float(log_scale + mp.log(sv[i]) / scale) for i in range(n)]
    return np.array(sorted(vals, reverse=True))
