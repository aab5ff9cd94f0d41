"""Deterministic experiment runners.

Each runner builds an ExperimentReport: a config echo, pre-rendered rows,
a summary, and a machine-readable pass flag.  Reports render to CSV (with
``#`` header/footer lines) or a plain text document; identical configs
always produce byte-identical output.  Randomized experiments draw from
numpy's default PCG64 generator with a mandatory explicit seed.

Wall-clock timing is intentionally kept out of the report body (it would
break byte-for-byte reproducibility); the CLI prints it to stderr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import (
    ContractionFailed,
    NoDominantEigenvalue,
    ResourceExceeded,
    SelectionFailed,
    SeparationFailed,
)
from .hyperbolic import (
    certify_ping_pong,
    is_almost_cyclically_reduced,
    pair_offset,
    select_acr,
    stable_norm_length_bound,
)
from .lattice import (
    TorsionInput,
    depth_root_bound,
    elementary_generators,
    mat_pow,
    translation_length_lower,
    word_length_bfs,
)
from .matgeo import (
    cartan_jordan_gap,
    certify_proximal,
    symmetric_space_displacement,
)
from .serialize import render_rational, render_real, write_atomic
from .words import Word, ball, ball_size, parse_word, word_length

__all__ = [
    "ExperimentReport",
    "run_prop422",
    "run_prop507",
    "run_ams_gap",
    "run_depth_roots",
    "render_report",
    "write_report",
    "DEFAULT_GAP_BOUNDS",
]

# Frozen after the seeded calibration run documented in the README:
# at the default configs (seed 42, 1000 samples, r=0.5, epsilon=0.05) the
# observed max gap is 0.979 in dimension 2 and 1.325 in dimension 3;
# bounds carry ~30% headroom.
DEFAULT_GAP_BOUNDS = {2: 1.3, 3: 1.8}


@dataclass
class ExperimentReport:
    """Deterministic record of one experiment run."""

    name: str
    config: dict[str, str]
    columns: tuple[str, ...]
    rows: list[tuple[str, ...]] = field(default_factory=list)
    summary: dict[str, str] = field(default_factory=dict)
    passed: bool = True


def render_report(report: ExperimentReport, fmt: str = "csv") -> str:
    if fmt == "csv":
        lines = [f"# dispgeo-report v1",
                 f"# experiment: {report.name}",
                 f"# tool_version: {__version__}"]
        for k in sorted(report.config):
            lines.append(f"# config {k} = {report.config[k]}")
        lines.append(",".join(report.columns))
        for row in report.rows:
            lines.append(",".join(row))
        for k in sorted(report.summary):
            lines.append(f"# summary {k} = {report.summary[k]}")
        lines.append(f"# passed: {'true' if report.passed else 'false'}")
        return "\n".join(lines) + "\n"
    if fmt == "report":
        lines = [f"dispgeo report: {report.name}",
                 f"tool version: {__version__}",
                 "config:"]
        for k in sorted(report.config):
            lines.append(f"  {k} = {report.config[k]}")
        lines.append("rows:")
        lines.append("  " + " | ".join(report.columns))
        for row in report.rows:
            lines.append("  " + " | ".join(row))
        lines.append("summary:")
        for k in sorted(report.summary):
            lines.append(f"  {k} = {report.summary[k]}")
        lines.append(f"passed: {'true' if report.passed else 'false'}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r} (use csv or report)")


def write_report(report: ExperimentReport, path: str,
                 fmt: str = "csv") -> None:
    write_atomic(path, render_report(report, fmt))


def run_prop422(radius: int = 12, u: str | Word = "aab",
                v: str | Word = "bba", delta=0,
                alpha_override=None, max_violations: int = 20,
                max_ball: int = 2_000_000) -> ExperimentReport:
    """Exhaustive scan: |g| against 3 max(stable norms of g, gu, gv) + a.

    Also exercises the ACR selector wherever its length hypothesis holds
    and records its outcomes.  Any bound violation or selector failure
    fails the run (the bound is a theorem at delta = 0, so violations
    only appear under the alpha override, the negative-control hook).
    Balls larger than ``max_ball`` are an error, never truncated.
    """
    uw = parse_word(u) if isinstance(u, str) else u
    vw = parse_word(v) if isinstance(v, str) else v
    size = ball_size(2, radius)
    if size > max_ball:
        raise ResourceExceeded(
            f"radius {radius} ball has {size} words > cap {max_ball}",
            count=size)
    delta = Fraction(delta)
    pair = certify_ping_pong(uw, vw, delta)
    threshold = 3 * max(word_length(uw), word_length(vw)) + 100 * delta

    config = {
        "radius": str(radius), "u": uw.to_str(), "v": vw.to_str(),
        "delta": render_rational(delta),
        "alpha": render_rational(pair_offset(pair)
                                 if alpha_override is None
                                 else Fraction(alpha_override)),
        "alpha_overridden": "true" if alpha_override is not None else "false",
    }
    per_length = {
        L: {"count": 0, "violations": 0, "min_slack": None,
            "sel_g": 0, "sel_gu": 0, "sel_gv": 0, "sel_skipped": 0,
            "falsified": 0}
        for L in range(radius + 1)}
    example_violations: list[str] = []

    for g in ball(2, radius):
        L = word_length(g)
        stats = per_length[L]
        stats["count"] += 1
        res = stable_norm_length_bound(g, pair, alpha=alpha_override)
        slack = res.rhs - res.lhs
        if stats["min_slack"] is None or slack < stats["min_slack"]:
            stats["min_slack"] = slack
        if not res.holds:
            stats["violations"] += 1
            if len(example_violations) < max_violations:
                example_violations.append(
                    f"{g.to_str()}:lhs={res.lhs}:rhs="
                    f"{render_rational(res.rhs)}")
        if L >= threshold:
            try:
                chosen = select_acr(g, pair)
            except SelectionFailed:
                stats["falsified"] += 1
                continue
            verdict = is_almost_cyclically_reduced(chosen, delta)
            if not verdict.is_acr:
                stats["falsified"] += 1
            elif chosen == g:
                stats["sel_g"] += 1
            elif chosen == g * pair.u:
                stats["sel_gu"] += 1
            else:
                stats["sel_gv"] += 1
        else:
            stats["sel_skipped"] += 1

    rows = []
    total_violations = 0
    total_falsified = 0
    for L in range(radius + 1):
        s = per_length[L]
        total_violations += s["violations"]
        total_falsified += s["falsified"]
        rows.append((str(L), str(s["count"]), str(s["violations"]),
                     render_rational(s["min_slack"])
                     if s["min_slack"] is not None else "",
                     str(s["sel_g"]), str(s["sel_gu"]), str(s["sel_gv"]),
                     str(s["sel_skipped"]), str(s["falsified"])))
    passed = total_violations == 0 and total_falsified == 0
    summary = {
        "total_words": str(sum(s["count"] for s in per_length.values())),
        "total_violations": str(total_violations),
        "selector_falsified": str(total_falsified),
        "example_violations": ";".join(example_violations) or "none",
    }
    return ExperimentReport(
        name="prop422", config=config,
        columns=("length", "count", "violations", "min_slack",
                 "selector_kept_g", "selector_gu", "selector_gv",
                 "selector_skipped", "selector_falsified"),
        rows=rows, summary=summary, passed=passed)


def _padded_fibonacci(n: int):
    rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    rows[0][0], rows[0][1] = 2, 1
    rows[1][0], rows[1][1] = 1, 1
    return tuple(tuple(r) for r in rows)


def run_prop507(n: int = 3, power_max: int = 2 ** 20,
                negative_control: bool = False, word_radius: int = 4,
                max_ball: int = 1_000_000) -> ExperimentReport:
    """Unipotent displacement stays 0 while the word metric diverges.

    gamma = E_1n(1): every power has symmetric-space displacement exactly
    0, yet the conjugation-invariant lower bound for the translation
    length grows without bound, so no constants A > 0, B can satisfy
    0 >= A * ell - B along the powers: the action fails to displace well
    even though the orbit maps are undistorted.  The negative control
    replaces gamma by a hyperbolic element (strictly positive column).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if power_max < 1:
        raise ValueError("power_max must be >= 1")
    gens = elementary_generators(n)
    if negative_control:
        gamma = _padded_fibonacci(n)
        # exact integer powers overflow float eigensolvers around 1e308
        cap = min(power_max, 256)
    else:
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        rows[0][n - 1] = 1
        gamma = tuple(tuple(r) for r in rows)
        cap = power_max

    config = {
        "n": str(n), "power_max": str(power_max),
        "negative_control": "true" if negative_control else "false",
        "word_radius": str(word_radius),
        "norm_bound": render_real(gens.norm_bound),
    }
    rows_out = []
    displacements_ok = True
    lower_values = []
    p = 1
    while p <= cap:
        m = mat_pow(gamma, p)
        disp = symmetric_space_displacement(m)
        lower = translation_length_lower(m, gens)
        lower_values.append(lower)
        if negative_control:
            displacements_ok = displacements_ok and disp > 0.0
        else:
            displacements_ok = displacements_ok and disp == 0.0
        wl = ""
        if p <= 16:
            length = word_length_bfs(m, gens, word_radius,
                                     max_size=max_ball)
            wl = str(length) if length is not None else "not_in_ball"
        rows_out.append((str(p), render_real(disp), render_real(lower), wl))
        p *= 2

    increasing = all(b > a for a, b in zip(lower_values, lower_values[1:]))
    passed = displacements_ok and (negative_control or increasing)
    summary = {
        "displacement_column": ("all_positive" if negative_control
                                else "all_zero")
        if displacements_ok else "unexpected",
        "lower_bound_strictly_increasing": "true" if increasing else "false",
        "max_lower_bound": render_real(max(lower_values)),
        "well_displacing_falsified": (
            "true" if (not negative_control and displacements_ok
                       and max(lower_values) > 0) else "false"),
    }
    return ExperimentReport(
        name="prop507", config=config,
        columns=("power", "displacement", "translation_length_lower",
                 "word_length"),
        rows=rows_out, summary=summary, passed=passed)


def _gap_sample(dimension: int, rng, diagonal_only: bool) -> np.ndarray:
    """One random candidate for the proximality gap experiment.

    Log singular spectrum drawn uniformly, then conjugated by a
    bounded-condition-number matrix (skipped when diagonal_only), so a
    substantial fraction of draws certifies at the default (r, epsilon).
    """
    if dimension == 2:
        t = rng.uniform(1.5, 4.5)
        diag = np.diag([math.exp(t), math.exp(-t)])
    elif dimension == 3:
        t1 = rng.uniform(4.0, 7.0)
        t2 = rng.uniform(-1.0, 1.0)
        diag = np.diag([math.exp(t1), math.exp(t2), math.exp(-t1 - t2)])
    else:
        raise ValueError("gap experiment supports dimensions 2 and 3")
    if diagonal_only:
        return diag
    while True:
        h = rng.standard_normal((dimension, dimension))
        if abs(np.linalg.det(h)) > 0.2 and np.linalg.cond(h) <= 8.0:
            break
    return h @ diag @ np.linalg.inv(h)


def run_ams_gap(dimension: int = 2, samples: int = 1000, r: float = 0.5,
                epsilon: float = 0.05, seed: int = 42,
                diagonal_only: bool = False,
                gap_bound: float | None = None,
                proximal_samples: int = 400) -> ExperimentReport:
    """Distribution of the Cartan-Jordan gap over certified proximal
    elements.

    Draws are seeded (PCG64); elements failing (r, epsilon) certification
    are recorded and skipped.  The run passes when the maximum observed
    gap stays below the calibrated bound for the dimension.
    """
    if dimension not in DEFAULT_GAP_BOUNDS:
        raise ValueError("gap experiment supports dimensions 2 and 3")
    if not (r > 2 * epsilon > 0):
        raise ValueError("need r > 2 epsilon > 0")
    if samples < 0:
        raise ValueError("samples must be >= 0")
    bound = DEFAULT_GAP_BOUNDS[dimension] if gap_bound is None else gap_bound
    rng = np.random.default_rng(seed)
    config = {
        "dimension": str(dimension), "samples": str(samples),
        "r": render_real(r), "epsilon": render_real(epsilon),
        "seed": str(seed),
        "diagonal_only": "true" if diagonal_only else "false",
        "gap_bound": render_real(bound),
        "prng": "numpy-default-PCG64",
    }
    rows = []
    gaps = []
    certified = 0
    for i in range(samples):
        g = _gap_sample(dimension, rng, diagonal_only)
        try:
            certify_proximal(g, r, epsilon, samples=proximal_samples)
        except (NoDominantEigenvalue, SeparationFailed,
                ContractionFailed) as exc:
            rows.append((str(i), type(exc).__name__, ""))
            continue
        gap = cartan_jordan_gap(g)
        gaps.append(gap)
        certified += 1
        rows.append((str(i), "certified", render_real(gap)))
    max_gap = max(gaps) if gaps else 0.0
    passed = max_gap <= bound
    summary = {
        "certified": str(certified),
        "rejected": str(samples - certified),
        "max_gap": render_real(max_gap) if gaps else "none",
        "mean_gap": render_real(sum(gaps) / len(gaps)) if gaps else "none",
        "gap_bound": render_real(bound),
    }
    return ExperimentReport(
        name="ams-gap", config=config,
        columns=("sample", "status", "gap"),
        rows=rows, summary=summary, passed=passed)


def run_depth_roots(matrices, box_bound: int | None = None
                    ) -> ExperimentReport:
    """Depth certificates plus exhaustive box cross-checks per matrix."""
    config = {"matrices": str(len(matrices)),
              "box_bound": str(box_bound) if box_bound is not None
              else "auto"}
    rows = []
    passed = True
    blank = ("",) * 9
    for i, m in enumerate(matrices):
        label = str([list(r) for r in m]).replace(" ", "")
        try:
            cert = depth_root_bound(m, box_bound=box_bound)
        except TorsionInput:
            rows.append((str(i), label, "torsion") + blank)
            continue
        except RuntimeError as exc:
            rows.append((str(i), label, f"SOUNDNESS-FAILURE:{exc}") + blank)
            passed = False
            continue
        roots = ";".join(
            f"k={k}:{str([list(r) for r in b]).replace(' ', '')}"
            for k, b in cert.roots_found) or "none"
        rows.append((str(i), label, cert.branch, render_real(cert.K),
                     str(cert.K1),
                     render_real(cert.b) if cert.b is not None else "",
                     str(cert.q) if cert.q is not None else "",
                     str(cert.M), str(cert.depth), str(cert.box_bound),
                     ",".join(str(k) for k in cert.checked_powers), roots))
    summary = {"soundness_failures": str(sum(
        1 for row in rows if row[2].startswith("SOUNDNESS")))}
    return ExperimentReport(
        name="depth-roots", config=config,
        columns=("index", "matrix", "branch_or_status", "K", "K1", "b",
                 "q", "M", "depth", "box_bound", "checked_powers",
                 "roots_below_depth"),
        rows=rows, summary=summary, passed=passed)
