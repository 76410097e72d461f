"""End-to-end acceptance checks over the full default-size run.

Each test prints one PASS/FAIL line. The heavy fixtures (ten full 212,929-
challenge datasets) are built once per session and shared.
"""

import contextlib
import time

import numpy as np
import pytest

from photonic_puf.attack import (
    AttackConfig,
    PredictorModel,
    challenge_features,
    code_bits,
    evaluate_predictor,
    gradient_check,
    susceptibility_sweep,
    train_predictor,
)
from photonic_puf.cli import main, puf_seed_for
from photonic_puf.datafile import read_dataset
from photonic_puf.encoding import (
    LESS_SIGNIFICANT_BITS,
    MORE_SIGNIFICANT_BITS,
    GridConfig,
    Interpretation,
    build_interpretation,
)
from photonic_puf.jones import TWO_PI, make_jones_vector, validate_lossless
from photonic_puf.kernel import generate_dataset
from photonic_puf.metrics import autocorrelation, bit_aliasing, uniformity, uniqueness
from photonic_puf.model import build_puf, evaluate_puf

N_PUFS = 10
MASTER_SEED = 0


@contextlib.contextmanager
def criterion(num, desc):
    try:
        yield
    except Exception:
        print(f"[criterion {num:2d}] FAIL  {desc}")
        raise
    print(f"[criterion {num:2d}] PASS  {desc}")


@pytest.fixture(scope="session")
def pufs():
    return [build_puf(puf_seed_for(MASTER_SEED, i)) for i in range(N_PUFS)]


@pytest.fixture(scope="session")
def responses(pufs):
    """{(puf_index, output, bit): response ints} for all 48 interpretations
    of every PUF, over the full default grid."""
    grid = GridConfig()
    out = {}
    for i, puf in enumerate(pufs):
        ds = generate_dataset(puf, grid)
        for o in (1, 2):
            for b in range(24):
                out[(i, o, b)] = build_interpretation(ds, o, b).responses
        if i == 0:
            out["challenge_codes"] = ds.challenge_codes
    return out


def less_significant(responses, puf_index, output):
    return [responses[(puf_index, output, b)] for b in LESS_SIGNIFICANT_BITS]


def test_criterion_1_dataset_geometry(tmp_path):
    with criterion(1, "dataset geometry: 10 files x 212,929 records; smoke grid fast"):
        t0 = time.time()
        out = tmp_path / "full"
        rc = main(["generate", "--seed", "0", "--output", str(out), "--binary"])
        elapsed = time.time() - t0
        assert rc == 0
        files = sorted(out.glob("puf*.bin"))
        assert len(files) == 10
        for f in files:
            ds, header = read_dataset(f)
            assert ds.n_challenges == 212_929
            assert int(header["records"]) == 212_929
        assert elapsed <= 30 * 60

        t0 = time.time()
        rc = main([
            "generate", "--seed", "0", "--pufs", "1",
            "--ex2-step", "0.003", "--ex2-count", "300",
            "--dphi-step", "0.7", "--dphi-count", "8",
            "--output", str(tmp_path / "smoke"),
        ])
        assert rc == 0
        assert time.time() - t0 <= 5.0


def test_criterion_2_metric_oracle_equivalence():
    # independent naive-loop oracles live in test_metrics; reuse them here
    from test_metrics import (
        oracle_bit_aliasing,
        oracle_reliability,
        oracle_uniformity,
        oracle_uniqueness,
        random_dataset,
    )
    from photonic_puf.metrics import reliability

    with criterion(2, "metrics match naive-loop oracle exactly on 100 random datasets"):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            resp, n = random_dataset(rng)
            assert uniqueness(resp, n) == oracle_uniqueness(resp, n)
            assert uniformity(resp[0], n) == oracle_uniformity(resp[0], n)
            assert reliability(resp[0], resp[1:], n) == oracle_reliability(resp[0], resp[1:], n)
            for pos in range(n):
                assert bit_aliasing(resp, pos, n) == oracle_bit_aliasing(resp, pos, n)


def test_criterion_3_uniqueness_less_significant(responses):
    with criterion(3, "uniqueness of every less-significant interpretation in [0.49, 0.51]"):
        for o in (1, 2):
            for b in LESS_SIGNIFICANT_BITS:
                stacked = np.stack([responses[(i, o, b)] for i in range(N_PUFS)])
                value = uniqueness(stacked, 24)
                assert 0.49 <= value <= 0.51, (o, b, value)


def test_criterion_4_uniformity_less_significant(responses):
    with criterion(4, "per-PUF uniformity over less-significant interpretations: mean in [0.49, 0.51], std <= 0.01"):
        for i in range(N_PUFS):
            for o in (1, 2):
                values = [uniformity(r, 24) for r in less_significant(responses, i, o)]
                assert 0.49 <= np.mean(values) <= 0.51, (i, o, np.mean(values))
                assert np.std(values) <= 0.01, (i, o, np.std(values))


def test_criterion_5_bit_aliasing_less_significant(responses):
    with criterion(5, "bit-aliasing median over 24 positions in [0.49, 0.51] for every less-significant interpretation"):
        for o in (1, 2):
            for b in LESS_SIGNIFICANT_BITS:
                stacked = np.stack([responses[(i, o, b)] for i in range(N_PUFS)])
                values = [bit_aliasing(stacked, pos, 24) for pos in range(24)]
                med = np.median(values)
                assert 0.49 <= med <= 0.51, (o, b, med)


def test_criterion_6_autocorrelation_whiteness(responses):
    with criterion(6, "less-significant interpretations white (|acf|<0.05 on >=95% of lags); some more-significant one is not"):
        for o in (1, 2):
            for b in LESS_SIGNIFICANT_BITS:
                acf = autocorrelation(responses[(0, o, b)].astype(np.float64), 1000)
                frac = np.mean(np.abs(acf[1:]) < 0.05)
                assert frac >= 0.95, (o, b, frac)
        violations = []
        for o in (1, 2):
            for b in MORE_SIGNIFICANT_BITS:
                seq = responses[(0, o, b)].astype(np.float64)
                if np.ptp(seq) == 0:
                    continue
                acf = autocorrelation(seq, 1000)
                violations.append(np.mean(np.abs(acf[1:]) < 0.05) < 0.95)
        assert any(violations)


def test_criterion_7_attack_resilience_ordering(responses):
    with criterion(7, "at 1e4 train CRPs: less-significant accuracy <= more-significant, and < 0.70"):
        codes = responses["challenge_codes"]
        x = challenge_features(codes)
        rng = np.random.default_rng(0)
        perm = rng.permutation(codes.shape[0])
        hold, train = perm[:20_000], perm[20_000:30_000]
        cfg = AttackConfig()

        def mean_accuracy(bit_indices):
            accs = []
            for b in bit_indices:
                y = code_bits(responses[(0, 1, b)])
                model = train_predictor(x[train], y[train], cfg)
                accs.append(evaluate_predictor(model, x[hold], y[hold]))
            return float(np.mean(accs))

        t0 = time.time()
        less = mean_accuracy(LESS_SIGNIFICANT_BITS)
        more = mean_accuracy(MORE_SIGNIFICANT_BITS)
        assert less <= more, (less, more)
        assert less < 0.70, less

        # one full default sweep must stay within its runtime budget
        interp = Interpretation(1, 9, codes, responses[(0, 1, 9)])
        t0 = time.time()
        result = susceptibility_sweep(interp, cfg)
        assert time.time() - t0 <= 20 * 60
        assert len(result.entries) == len(cfg.train_sizes)


def test_criterion_8_attack_controls():
    with criterion(8, "identity dataset > 0.95 accuracy; shuffled responses never beat chance"):
        rng = np.random.default_rng(8)
        codes = rng.integers(0, 1 << 24, size=27_000, dtype=np.uint32)
        x, y = challenge_features(codes), code_bits(codes)
        cfg = AttackConfig()
        model = train_predictor(x[:5000], y[:5000], cfg)
        assert evaluate_predictor(model, x[5000:], y[5000:]) > 0.95

        shuffled = codes.copy()
        np.random.default_rng(9).shuffle(shuffled)
        interp = Interpretation(1, 0, codes, shuffled)
        sweep_cfg = AttackConfig(train_sizes=(100, 1000, 3000), holdout_size=20_000)
        result = susceptibility_sweep(interp, sweep_cfg)
        assert all(not e.beats_chance for e in result.entries)
        # determinism per seed
        again = susceptibility_sweep(interp, sweep_cfg)
        assert [e.accuracy for e in again.entries] == [e.accuracy for e in result.entries]


def test_criterion_9_gradient_check():
    with criterion(9, "analytic vs finite-difference gradients agree within 1e-4 on 20 random models"):
        rng = np.random.default_rng(99)
        for _ in range(20):
            hidden = int(rng.integers(4, 12))
            model = PredictorModel([24, hidden, 24], rng)
            codes = rng.integers(0, 1 << 24, size=4, dtype=np.uint32)
            x, y = challenge_features(codes), code_bits(codes)
            assert gradient_check(model, x, y) < 1e-4


def test_criterion_10_numerical_hygiene(pufs):
    with criterion(10, "unit norms within 1e-12 over 10,000 challenges; all matrices lossless"):
        for puf in pufs:
            for cell in puf.cells:
                for m in (cell.prefix, cell.suffix1, cell.suffix2):
                    assert validate_lossless(m)

        rng = np.random.default_rng(10)
        n = 10_000
        ex2 = rng.uniform(0.001, 0.999, n)
        dphi = rng.uniform(0.0, TWO_PI, n)
        v = np.stack([np.sqrt(ex2), np.sqrt(1 - ex2) * np.exp(1j * dphi)], axis=1)
        mats = pufs[0].output_matrices()
        for j in range(mats.shape[0]):
            for k in range(2):
                out = v @ mats[j, k].T
                norms = np.linalg.norm(out, axis=1)
                assert np.max(np.abs(norms - 1.0)) < 1e-12

        # spot-check the per-vector pipeline too
        for i in range(100):
            c = make_jones_vector(ex2[i], dphi[i])
            for out1, out2 in evaluate_puf(pufs[0], c):
                assert abs(out1.norm() - 1.0) < 1e-12
                assert abs(out2.norm() - 1.0) < 1e-12
