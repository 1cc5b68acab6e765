import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from neumannbif.bifurcation_classifier import classify, lambda_candidates
from neumannbif.errors import DomainError
from neumannbif.euler_ring import (
    EulerElement,
    So2RepDecomposition,
    chi_sphere,
    index_change_witness,
    rep_of_negative_space,
    ring_add,
    ring_mul,
)
from neumannbif.neumann_spectrum import RootCache, eigenvalues_up_to
from neumannbif.operator_spectrum import matrix_spectrum

I = EulerElement.unit()
u = EulerElement.generator

coeff = st.integers(min_value=-10, max_value=10)
elements = st.builds(
    lambda a0, rest: EulerElement(a0, tuple(rest.items())),
    coeff, st.dictionaries(st.integers(min_value=1, max_value=20), coeff, max_size=5))
reps = st.builds(
    lambda d0, rest: So2RepDecomposition(d0, tuple(rest.items())),
    st.integers(min_value=0, max_value=6),
    st.dictionaries(st.integers(min_value=1, max_value=20), st.integers(min_value=0, max_value=4), max_size=4))


@settings(max_examples=200, deadline=None)
@given(elements, elements, elements)
def test_ring_axioms(a, b, c):
    assert ring_add(a, b) == ring_add(b, a)
    assert ring_mul(a, b) == ring_mul(b, a)
    assert ring_mul(ring_mul(a, b), c) == ring_mul(a, ring_mul(b, c))
    assert ring_mul(a, ring_add(b, c)) == ring_add(ring_mul(a, b), ring_mul(a, c))
    assert ring_mul(I, a) == a
    assert all(v != 0 for _, v in ring_mul(a, b).orbit_coeffs)


@settings(max_examples=100, deadline=None)
@given(reps, reps)
def test_smash_compatibility(v, w):
    assert chi_sphere(v + w) == ring_mul(chi_sphere(v), chi_sphere(w))


@settings(max_examples=200, deadline=None)
@given(reps)
def test_nontriviality(rep):
    assert (chi_sphere(rep) == I) == (rep.trivial_dim % 2 == 0 and not rep.rotation_counts)


def test_ring_examples():
    assert (I - u(1)) * (I - u(1)) == I - 2 * u(1)
    for k in (1, 3, 7):
        assert (I - u(k)) * (I + u(k)) == I
    assert u(2) * u(5) == EulerElement()


def test_chi_examples():
    assert chi_sphere(So2RepDecomposition()) == I
    for d in range(5):
        assert chi_sphere(So2RepDecomposition(d)) == (-1) ** d * I
    assert chi_sphere(So2RepDecomposition(0, ((4, 1),))) == I - u(4)


def test_invalid_inputs():
    with pytest.raises(DomainError):
        EulerElement(0, ((0, 1),))
    with pytest.raises(DomainError):
        So2RepDecomposition(-1)
    with pytest.raises(DomainError):
        So2RepDecomposition(0, ((1, -1),))


def _eigs(beta_max):
    return eigenvalues_up_to(2, beta_max, cache=RootCache(2))


def test_negative_space_examples():
    eigs = _eigs(40.0)
    assert rep_of_negative_space(matrix_spectrum(np.diag([1.0, 2.0])), eigs, -1.0) == So2RepDecomposition()
    one = matrix_spectrum([[1.0]])
    assert rep_of_negative_space(one, eigs, 2.0) == So2RepDecomposition(1)
    assert rep_of_negative_space(one, eigs, 4.0) == So2RepDecomposition(1, ((1, 1),))


def test_negative_space_matches_morse_oracle():
    rng = np.random.default_rng(2)
    for _ in range(20):
        m = int(rng.integers(1, 4))
        b = rng.normal(size=(m, m))
        a = b + b.T
        lam = float(rng.uniform(-4, 4))
        spec = matrix_spectrum(a)
        beta_max = max([0.0] + [lam * x for x in spec.alphas]) + 5.0
        ref = np.linalg.eigvalsh(oracles.assembled_operator(a, oracles.spectrum(2, beta_max), lam))
        assert rep_of_negative_space(spec, _eigs(beta_max), lam).dimension == int(np.sum(ref < -1e-9))


def test_negative_space_needs_disk():
    with pytest.raises(DomainError):
        rep_of_negative_space(matrix_spectrum([[1.0]]), eigenvalues_up_to(3, 10.0), 1.0)


def test_witness_examples():
    eigs = _eigs(40.0)
    beta2 = oracles.roots(2, 1, 1)[0] ** 2
    radial = oracles.roots(2, 0, 1)[0] ** 2
    one = matrix_spectrum([[1.0]])
    assert index_change_witness(beta2, one, eigs)
    assert not index_change_witness(2.0, one, eigs, eps=0.5)
    even = matrix_spectrum(np.diag([radial, radial]))
    assert not index_change_witness(1.0, even, eigs)


def test_witness_agrees_with_classifier():
    rng = np.random.default_rng(9)
    eigs = _eigs(120.0)
    for _ in range(30):
        m = int(rng.integers(1, 4))
        spec = matrix_spectrum(np.diag(rng.choice([-2.0, 0.0, 1.0, 3.0, 5.0], size=m)))
        for cand in lambda_candidates(spec, eigs, 0.05, 20.0):
            rec = classify(cand, spec, eigs, check_euler=False)
            assert index_change_witness(cand, spec, eigs) == (rec.c1 or rec.c2)
