import shutil
import subprocess
import sys

import pytest

from dispgeo.hyperbolic import (
    certify_ping_pong,
    conjugacy_undistortion_check,
    find_ping_pong_pair,
    is_almost_cyclically_reduced,
    pair_offset,
    select_acr,
    stable_norm_length_bound,
)
from dispgeo.words import Word, ball, parse_word


def test_pair_to_bound_workflow():
    """Search a pair, repair a deep conjugate, and confirm the length
    bound and the undistortion witness it produces."""
    n, cert = find_ping_pong_pair(parse_word("ab"), parse_word("a"),
                                  delta=0, n_max=10)
    assert cert.u == parse_word("ab") ** n

    # b^8 a b^-8: peel count 8 exceeds a third of the length 17
    deep = parse_word("b" * 8 + "a" + "B" * 8)
    assert not is_almost_cyclically_reduced(deep, 0).is_acr
    repaired = select_acr(deep, cert)
    assert is_almost_cyclically_reduced(repaired, 0).is_acr

    res = stable_norm_length_bound(deep, cert)
    assert res.holds

    gens = [Word.identity(2), cert.u, cert.v]
    assert conjugacy_undistortion_check(gens, 3, pair_offset(cert),
                                        radius=6)


def test_offset_scales_with_the_pair():
    # the additive offset is derived from the certified pair, never taken
    # on faith: longer pair words push it up, delta pushes it up further
    short = certify_ping_pong(parse_word("aab"), parse_word("bba"), 0)
    long_u = parse_word("aab") * parse_word("aab")
    long_v = parse_word("bba") * parse_word("bba")
    longer = certify_ping_pong(long_u, long_v, 0)
    assert pair_offset(short) == 9
    assert pair_offset(longer) == 18
    from fractions import Fraction
    with_delta = certify_ping_pong(long_u, long_v, Fraction(1, 25))
    assert pair_offset(with_delta) == 22
    for g in ball(2, 5):
        assert stable_norm_length_bound(g, longer).holds


@pytest.mark.skipif(shutil.which("dispgeo") is None,
                    reason="console script not on PATH")
def test_console_script_end_to_end(tmp_path):
    out = tmp_path / "run.csv"
    proc = subprocess.run(
        ["dispgeo", "prop507", "--power-max", "256", "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    text = out.read_text()
    assert text.startswith("# dispgeo-report v1")
    assert text.rstrip().endswith("# passed: true")
    assert "finished in" in proc.stderr

    bad = subprocess.run(
        ["dispgeo", "prop422", "--radius", "3", "--alpha-override", "-99"],
        capture_output=True, text=True)
    assert bad.returncode == 1


def test_module_invocation():
    proc = subprocess.run(
        [sys.executable, "-m", "dispgeo.cli", "word", "stable", "Bab"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1"
