import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qhartley.model import QuantumModel, expectation
from qhartley.sampling import (
    AmbiguousSplitError,
    Histogram,
    SampleBatch,
    UnsupportedSamplingError,
    build_bivariate_sampling_circuit,
    build_fine_sampling_circuit,
    build_sampling_circuit,
    constant_zero_positions,
    decode_bitstring,
    decoded_csv,
    exact_distribution,
    histogram,
    pearson,
    postprocess_bivariate,
    raw_csv,
    register_width,
    sample,
    tvd,
)


def random_model(seed, n=3, depth=2, kind="hartley"):
    rng = np.random.default_rng(seed)
    m = QuantumModel(kind, n, depth)
    m.theta = rng.uniform(-np.pi, np.pi, m.n_params)
    return m


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 4))
def test_plain_sampling_reproduces_model_on_integers(seed, n):
    m = random_model(seed, n=n, depth=1)
    p = exact_distribution(build_sampling_circuit(m))
    size = 2**n
    # the ancilla never fires and every outcome carries twice the latent probability
    assert np.abs(p[size:]).max() < 1e-12
    assert np.allclose(p[:size], 2 * expectation(m, np.arange(size)), atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 4))
def test_s1_sampling_reproduces_model_on_fine_grid(seed, n):
    m = random_model(seed, n=n, depth=1)
    p = exact_distribution(build_fine_sampling_circuit(m, 1))
    coords = np.arange(2 ** (n + 2)) / 2
    inside = coords <= m.x_max
    q = expectation(m, coords[inside])
    assert np.abs(p[~inside]).max() < 1e-12
    assert np.allclose(p[inside], q / q.sum(), atol=1e-12)


def test_s1_even_readouts_match_plain_sampling():
    m = random_model(4, n=3)
    plain = exact_distribution(build_sampling_circuit(m))[:8]
    fine = exact_distribution(build_fine_sampling_circuit(m, 1))[:16:2]
    assert np.allclose(fine / fine.sum(), plain, atol=1e-12)


def test_untrained_model_samples_uniformly():
    p = exact_distribution(build_sampling_circuit(QuantumModel("hartley", 3, 2)))
    assert np.allclose(p[:8], 1 / 8)


def test_qft_chain_is_a_valid_distribution():
    m = random_model(1, n=3, depth=1)
    c = build_fine_sampling_circuit(m, 2, "qft-chain")
    assert c.n_qubits == register_width(3, 2) == 6
    p = exact_distribution(c)
    assert p.sum() == pytest.approx(1)


def test_unsupported_variants():
    m = random_model(0)
    with pytest.raises(UnsupportedSamplingError):
        build_sampling_circuit(m, 2, "bitstring-network")
    with pytest.raises(UnsupportedSamplingError):
        build_sampling_circuit(m, 1, "plain")
    with pytest.raises(ValueError):
        build_sampling_circuit(m, 1, "magic")
    with pytest.raises(ValueError):
        build_sampling_circuit(QuantumModel("fourier", 3, 1, ansatz="hea", scheme="RX"))


def test_bivariate_sampling_reproduces_model():
    n = 2
    m = random_model(6, n=n, depth=1, kind="bivariate-hartley")
    for S in (0, 1):
        p = exact_distribution(build_bivariate_sampling_circuit(m, S))
        w = register_width(n, S)
        p = p.reshape(2**w, 2**w)
        coords = np.arange(2**w) / 2**S
        inside = coords <= m.x_max
        q = np.array([[expectation(m, x, y) for y in coords[inside]] for x in coords[inside]])
        assert np.allclose(p[np.ix_(inside, inside)], q / q.sum(), atol=1e-12)
        assert p[np.ix_(inside, inside)].sum() == pytest.approx(1, abs=1e-12)


def test_sampling_is_seeded():
    m = random_model(2)
    a = sample(m, 2000, seed=5)
    assert a.counts == sample(m, 2000, seed=5).counts
    assert a.counts != sample(m, 2000, seed=6).counts
    assert a.model_hash == sample(m, 10, seed=1).model_hash
    assert all(len(k) == register_width(3, 0) for k in a.counts)


def test_zero_shots():
    b = sample(random_model(2), 0, seed=1)
    assert b.counts == {} and b.shots == 0
    with pytest.raises(ValueError):
        histogram(b)


def test_batch_validation():
    with pytest.raises(ValueError):
        SampleBatch({"0000": 3}, 3, 0, "plain", 4, 0)
    with pytest.raises(ValueError):
        SampleBatch({"000": 4}, 3, 0, "plain", 4, 0)


def test_decode():
    assert decode_bitstring("0101", 3, 0) == 5
    assert decode_bitstring("01011", 3, 1, "bitstring-network") == 5.5
    with pytest.raises(ValueError):
        decode_bitstring("0101", 3, 1, "bitstring-network")
    with pytest.raises(ValueError):
        decode_bitstring("01x1", 3, 0)


def test_histogram_and_bins():
    b = SampleBatch({"0000": 1, "0011": 3}, 3, 0, "plain", 4, 0)
    h = histogram(b)
    assert h.as_dict()[3.0] == 0.75 and len(h.coords) == 16
    h2 = histogram(b, bins=[0, 1, 2, 3])
    assert np.allclose(h2.probs, [0.25, 0, 0, 0.75])
    with pytest.raises(ValueError):
        histogram(b, bins=[0.5])


def test_tvd():
    assert tvd([1, 0], [0.25, 0.75]) == pytest.approx(0.75)
    assert tvd([0.5, 0.5], [0.5, 0.5]) == 0
    with pytest.raises(ValueError):
        tvd([1, 0], [1, 0, 0])
    a = Histogram(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    b = Histogram(np.array([0.0, 2.0]), np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        tvd(a, b)


def test_postprocess_drops_constant_ancillas_and_splits():
    # n=2, S=0: two 3-bit registers, ancillas at positions 0 and 3
    b = SampleBatch({"001010": 2, "011000": 2}, 2, 0, "plain", 4, 0, bivariate=True)
    assert constant_zero_positions(b.counts) == [0, 3, 5]
    h = postprocess_bivariate(b)
    assert h.probs.shape == (4, 4)
    assert h.probs[1, 2] == 0.5 and h.probs[3, 0] == 0.5
    assert np.allclose(h.marginal_x().probs, [0, 0.5, 0, 0.5])


def test_postprocess_ambiguous_split():
    # one ancilla fires, the other does not: the halves no longer have equal length
    b = SampleBatch({"101010": 1, "001010": 1}, 2, 0, "plain", 2, 0, bivariate=True)
    with pytest.raises(AmbiguousSplitError):
        postprocess_bivariate(b)


def test_pearson():
    a = np.arange(10.0)
    assert pearson(a, 2 * a + 1) == pytest.approx(1)
    assert pearson(a, -a) == pytest.approx(-1)


def test_csv_outputs_have_headers_and_domain_flags():
    m = random_model(3)
    b = sample(m, 500, seed=2)
    raw = raw_csv(b)
    assert "# model_sha256=" + b.model_hash in raw.splitlines()
    assert "bitstring,count" in raw
    dec = decoded_csv(b, m.x_max).splitlines()
    header = dec.index("coordinate,probability,in_domain")
    rows = [r.split(",") for r in dec[header + 1 :]]
    assert len(rows) == 16
    assert {r[2] for r in rows if float(r[0]) > m.x_max} == {"0"}
    assert sum(float(r[1]) for r in rows) == pytest.approx(1)


def test_postprocess_single_string_and_empty_batch():
    h = postprocess_bivariate(SampleBatch({"010001": 7}, 2, 0, "plain", 7, 0, bivariate=True))
    assert h.probs[2, 1] == 1 and np.count_nonzero(h.probs) == 1
    with pytest.raises(ValueError):
        postprocess_bivariate(SampleBatch({}, 2, 0, "plain", 0, 0, bivariate=True))


def test_postprocess_recovers_product_marginals():
    rng = np.random.default_rng(0)
    px, py = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
    counts = {}
    for i in range(4):
        for j in range(4):
            c = int(round(1e6 * px[i] * py[j]))
            if c:
                counts[f"0{i:02b}0{j:02b}"] = c
    b = SampleBatch(counts, 2, 0, "plain", sum(counts.values()), 0, bivariate=True)
    h = postprocess_bivariate(b)
    assert np.allclose(h.marginal_x().probs, px, atol=1e-5)
    assert np.allclose(h.marginal_y().probs, py, atol=1e-5)
