"""SplitMix64 against an independent reference implementation."""

import numpy as np

from fuzzysteg.rng import MASK64, SplitMix64


def reference_splitmix64(seed, count):
    """Straight transcription of the published algorithm, plain ints only."""
    out = []
    state = seed & MASK64
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


# First outputs for seed 0, frozen from the reference implementation above.
SEED0_FIRST = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0x16F6486EB4A61FE2,
]


def test_seed0_matches_reference_sequence():
    assert reference_splitmix64(0, 4) == SEED0_FIRST
    rng = SplitMix64(0)
    assert [rng.next_u64() for _ in range(4)] == SEED0_FIRST


def test_matches_reference_for_many_seeds():
    for seed in (1, 2, 42, 2**63, MASK64, 0xDEADBEEF):
        rng = SplitMix64(seed)
        assert [rng.next_u64() for _ in range(20)] == reference_splitmix64(seed, 20)


def test_same_seed_same_sequence():
    a = SplitMix64(7)
    b = SplitMix64(7)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]


def test_different_seeds_differ():
    assert SplitMix64(1).next_u64() != SplitMix64(2).next_u64()


def test_batch_matches_scalar_path():
    scalar = SplitMix64(99)
    batch = SplitMix64(99)
    expected = [scalar.next_u64() for _ in range(1000)]
    got = batch.take_u64(1000)
    assert got.dtype == np.uint64
    assert [int(v) for v in got] == expected
    # state advanced identically: next draws agree too
    assert scalar.next_u64() == batch.next_u64()


def test_floats_in_unit_interval():
    rng = SplitMix64(5)
    vals = rng.take_floats(10_000)
    assert vals.min() >= 0.0
    assert vals.max() < 1.0
    assert abs(vals.mean() - 0.5) < 0.02


def test_bytes_deterministic_and_sized():
    assert SplitMix64(3).take_bytes(13) == SplitMix64(3).take_bytes(13)
    assert len(SplitMix64(3).take_bytes(13)) == 13
    assert SplitMix64(3).take_bytes(0) == b""


def test_normals_standardized():
    vals = SplitMix64(11).take_normals(20_000)
    assert abs(vals.mean()) < 0.03
    assert abs(vals.std() - 1.0) < 0.03
