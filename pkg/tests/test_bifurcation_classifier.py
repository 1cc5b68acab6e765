import numpy as np
import pytest

from neumannbif.bifurcation_classifier import (
    NOT_APPLICABLE,
    NOT_IMPLIED,
    YES,
    classify,
    classify_range,
    lambda_candidates,
    nondegenerate_orbit_check,
    radial_only_test,
    separation_epsilon,
    symmetry_breaking_test,
)
from neumannbif.errors import AsymmetryError, InsufficientCutoffError
from neumannbif.neumann_spectrum import RootCache, eigenvalues_up_to
from neumannbif.operator_spectrum import kernel_dim, matrix_spectrum

import oracles

BETA2 = oracles.roots(2, 1, 1)[0] ** 2
BETA_RADIAL = oracles.roots(2, 0, 1)[0] ** 2


def _eigs(N, beta_max):
    return eigenvalues_up_to(N, beta_max, cache=RootCache(N))


def _at(a, lam0, N=2, beta_max=None):
    spec = matrix_spectrum(a)
    eigs = _eigs(N, beta_max or 1.5 * max(abs(lam0), 1.0) * max(abs(x) for x in spec.alphas) + 5.0)
    lo, hi = lam0 - 1e-6, lam0 + 1e-6
    (cand,) = lambda_candidates(spec, eigs, lo, hi)
    return cand, spec, eigs


def test_candidates_examples():
    spec = matrix_spectrum(np.diag([1.0, 2.0]))
    eigs = _eigs(2, 10.0)
    lams = [c.lambda0 for c in lambda_candidates(spec, eigs, 0.1, 4.0)]
    assert lams == pytest.approx([BETA2 / 2, BETA2], abs=1e-9)
    assert lambda_candidates(matrix_spectrum(np.zeros((2, 2))), eigs, 0.1, 4.0) == []
    neg = lambda_candidates(matrix_spectrum([[-1.0]]), _eigs(2, 10.0), -4.0, -0.1)
    pos = lambda_candidates(matrix_spectrum([[1.0]]), _eigs(2, 10.0), 0.1, 4.0)
    assert [c.lambda0 for c in neg] == [-c.lambda0 for c in reversed(pos)]


def test_candidates_need_cutoff():
    with pytest.raises(InsufficientCutoffError):
        lambda_candidates(matrix_spectrum([[1.0]]), _eigs(2, 4.0), 0.1, 10.0)


def test_witnesses_exclude_zero_alpha():
    spec = matrix_spectrum(np.diag([0.0, 1.0]))
    for c in lambda_candidates(spec, _eigs(2, 30.0), -1.0, 20.0):
        assert c.witnesses and all(a != 0.0 for a, _ in c.witnesses)


def test_zero_candidate_present():
    spec = matrix_spectrum(np.diag([1.0, -1.0, 2.0]))
    lams = [c.lambda0 for c in lambda_candidates(spec, _eigs(2, 10.0), -1.0, 1.0)]
    assert 0.0 in lams


def test_single_nonradial_crossing_is_global_and_breaks_symmetry():
    rec = classify(*_at([[1.0]], BETA2))
    assert rec.c1 and rec.global_bifurcation and rec.local_bifurcation
    assert rec.symmetry_breaking == YES and not rec.radial_only


def test_radial_crossing():
    rec = classify(*_at([[BETA_RADIAL]], 1.0, beta_max=20.0))
    assert rec.c2 and not rec.c1 and rec.global_bifurcation
    assert rec.radial_only and rec.symmetry_breaking == NOT_APPLICABLE
    assert rec.kernel_dim_normal == 1


def test_even_radial_crossing_decides_nothing():
    rec = classify(*_at(np.diag([BETA_RADIAL, BETA_RADIAL]), 1.0, beta_max=20.0))
    assert not (rec.c1 or rec.c2 or rec.local_bifurcation)
    assert rec.kernel_dim_normal == 2


def test_mixed_crossing_is_not_implied():
    cand, spec, eigs = _at(np.diag([BETA_RADIAL, BETA2]), 1.0, beta_max=20.0)
    assert len(cand.intersected) == 2
    rec = classify(cand, spec, eigs)
    assert rec.c1 and rec.symmetry_breaking == NOT_IMPLIED
    assert symmetry_breaking_test(cand, spec, eigs) == NOT_IMPLIED
    assert not radial_only_test(cand, spec, eigs)


@pytest.mark.parametrize("diag,c3,thm0", [
    ([1.0, -1.0, 2.0], True, True),
    ([1.0, 0.0], True, True),
    ([1.0, 2.0], False, True),
    ([1.0, -1.0], False, False),
])
def test_zero_level(diag, c3, thm0):
    spec = matrix_spectrum(np.diag(diag))
    eigs = _eigs(2, 10.0)
    zero = [c for c in lambda_candidates(spec, eigs, -0.5, 0.5) if c.lambda0 == 0.0]
    rec = classify(zero[0], spec, eigs)
    assert (rec.c3, rec.thm0) == (c3, thm0)
    assert rec.global_bifurcation == c3
    assert rec.local_bifurcation == thm0
    assert not (rec.c1 or rec.c2)
    assert rec.radial_only
    assert any(t["clause"] == "radial" and "degenerate" in t["detail"] for t in rec.explanation)


def test_even_signature_at_zero_leaves_globality_open():
    spec = matrix_spectrum(np.diag([1.0, 2.0]))
    eigs = _eigs(2, 10.0)
    (zero,) = [c for c in lambda_candidates(spec, eigs, -0.5, 0.5) if c.lambda0 == 0.0]
    rec = classify(zero, spec, eigs)
    assert any(t["clause"] == "note" for t in rec.explanation)


def _random_records(count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        N = int(rng.choice([2, 3]))
        m = int(rng.integers(1, 5))
        alphas = rng.choice([-3.0, -1.0, 0.0, 0.5, 1.0, 2.0, 5.0], size=m)
        q, _ = np.linalg.qr(rng.normal(size=(m, m)))
        a = q @ np.diag(alphas) @ q.T
        a = 0.5 * (a + a.T)
        spec = matrix_spectrum(a)
        eigs = _eigs(N, 80.0)
        yield spec, eigs, lambda_candidates(spec, eigs, -5.0, 5.0)


def test_record_invariants():
    for spec, eigs, cands in _random_records(40, 3):
        for cand in cands:
            rec = classify(cand, spec, eigs)
            assert not (rec.c1 and rec.c2)
            if rec.global_bifurcation:
                assert rec.local_bifurcation
            if rec.symmetry_breaking == YES:
                assert rec.global_bifurcation
            if rec.radial_only:
                assert rec.symmetry_breaking != YES
            if rec.c3:
                assert rec.thm0
            if rec.lambda0 == 0.0:
                assert not (rec.c1 or rec.c2)
            else:
                assert not (rec.c3 or rec.thm0)


def test_necessity():
    rng = np.random.default_rng(11)
    for spec, eigs, cands in _random_records(100, 5):
        levels = [c.lambda0 for c in cands]
        probes = list(rng.uniform(-5, 5, size=5)) + [
            b / a for a in spec.alphas if a != 0 for b in (e.beta for e in eigs.distinct()) if abs(b / a) <= 5]
        for lam in probes:
            if kernel_dim(spec, eigs, lam) - spec.kernel_dim > 0:
                assert min(abs(lam - x) for x in levels) <= 1e-8 * (1 + abs(lam))


def test_scaling_equivariance():
    a = np.diag([1.0, 2.0, -0.5])
    eigs = _eigs(2, 60.0)
    base = lambda_candidates(matrix_spectrum(a), eigs, -6.0, 6.0)
    for c in (0.5, 2.0):
        scaled = lambda_candidates(matrix_spectrum(c * a), eigs, -6.0 / c, 6.0 / c)
        assert [s.lambda0 for s in scaled] == pytest.approx([b.lambda0 / c for b in base], rel=1e-12)
        for s, b in zip(scaled, base):
            r1, r2 = classify(s, matrix_spectrum(c * a), eigs), classify(b, matrix_spectrum(a), eigs)
            assert (r1.c1, r1.c2, r1.c3, r1.thm0, r1.symmetry_breaking) == (r2.c1, r2.c2, r2.c3, r2.thm0, r2.symmetry_breaking)


def test_separation_epsilon_is_half_gap():
    spec = matrix_spectrum(np.diag([1.0, 2.0]))
    eigs = _eigs(2, 40.0)
    eps = separation_epsilon(BETA2, spec, eigs)
    gap = min(abs(BETA2 - x) for x in (BETA2 / 2, 9.3283611 / 2, 9.3283611))
    assert eps == pytest.approx(gap / 2, abs=1e-5)


def test_classify_range_matches_candidates():
    spec = matrix_spectrum(np.diag([1.0, 2.0]))
    eigs = _eigs(3, 40.0)
    recs = classify_range(spec, eigs, 0.1, 10.0)
    assert [r.lambda0 for r in recs] == [c.lambda0 for c in lambda_candidates(spec, eigs, 0.1, 10.0)]


def test_orbit_check():
    r0, fpp = 1.0, 0.8
    u0 = np.array([np.sqrt(r0), 0.0])
    h = 4 * fpp * np.outer(u0, u0)
    # finite-difference Hessian of f(|u|^2) with f(s) = fpp/2 (s - r0)^2
    F = lambda u: 0.5 * fpp * (u @ u - r0) ** 2
    eps = 1e-4
    fd = np.array([[(F(u0 + eps * (ei + ej)) - F(u0 + eps * ei) - F(u0 + eps * ej) + F(u0)) / eps ** 2
                    for ej in np.eye(2)] for ei in np.eye(2)])
    assert np.abs(fd - h).max() < 1e-3
    assert nondegenerate_orbit_check(h, 1)
    assert not nondegenerate_orbit_check(np.zeros((2, 2)), 0)
    assert nondegenerate_orbit_check(np.diag([1.0, -2.0]), 0)
    with pytest.raises(AsymmetryError):
        nondegenerate_orbit_check([[1.0, 2.0], [0.0, 1.0]], 0)
