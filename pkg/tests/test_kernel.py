import numpy as np
import pytest

import photonic_puf.kernel as kernel
from photonic_puf.encoding import GridConfig, encode_states
from photonic_puf.jones import TWO_PI, extract_observables, make_jones_vector
from photonic_puf.kernel import encode_responses, generate_dataset
from photonic_puf.model import build_puf, evaluate_puf


def random_challenges(rng, n):
    return rng.uniform(0.001, 0.999, n), rng.uniform(0.0, TWO_PI, n)


def test_backends_agree():
    if kernel.BACKEND != "compiled":
        pytest.skip("compiled kernel not built")
    rng = np.random.default_rng(0)
    puf = build_puf(11)
    ex2, dphi = random_challenges(rng, 5000)
    mats = puf.output_matrices()
    a = encode_responses(mats, ex2, dphi, backend="compiled")
    b = encode_responses(mats, ex2, dphi, backend="numpy")
    assert np.array_equal(a, b)


def test_kernel_matches_object_layer():
    # bulk path vs the per-vector Jones pipeline, bit for bit
    rng = np.random.default_rng(1)
    puf = build_puf(12, n_cells=4)
    ex2, dphi = random_challenges(rng, 50)
    codes = encode_responses(puf.output_matrices(), ex2, dphi)
    for i in range(50):
        c = make_jones_vector(ex2[i], dphi[i])
        for j, (out1, out2) in enumerate(evaluate_puf(puf, c)):
            for k, v in enumerate((out1, out2)):
                obs = extract_observables(v)
                expected = encode_states([obs[0]], [obs[1]])[0]
                assert codes[i, j, k] == expected


def test_generate_dataset_shapes():
    grid = GridConfig(ex2_step=0.01, ex2_count=10, dphi_step=0.5, dphi_count=4)
    ds = generate_dataset(build_puf(13, n_cells=6), grid)
    assert ds.n_challenges == 40
    assert ds.interim.shape == (40, 6, 2)
    assert ds.challenge_codes.shape == (40,)
    assert np.unique(ds.challenge_codes).size == 40


def test_generate_dataset_deterministic():
    grid = GridConfig(ex2_step=0.01, ex2_count=5, dphi_step=0.5, dphi_count=3)
    a = generate_dataset(build_puf(14), grid)
    b = generate_dataset(build_puf(14), grid)
    assert np.array_equal(a.interim, b.interim)


def test_unknown_backend():
    puf = build_puf(15, n_cells=1)
    with pytest.raises(ValueError):
        encode_responses(puf.output_matrices(), np.array([0.5]), np.array([1.0]), backend="gpu")
