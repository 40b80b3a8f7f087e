"""Shared fixtures: tiny deterministic corpora and cached desk-scale runs."""

import numpy as np
import pytest

from fuzzysteg import corpus
from fuzzysteg.imaging import Image


@pytest.fixture(scope="session")
def mini_spec():
    """Small corpus spec used by feature/detector statistics tests."""
    return corpus.CorpusSpec(images_per_category=10, side=64)


@pytest.fixture(scope="session")
def mini_images(mini_spec):
    """{category: [Image, ...]} at side 64, 10 images each."""
    return {
        cat: [corpus.generate_category(cat, i, mini_spec) for i in range(10)]
        for cat in corpus.CATEGORIES
    }


@pytest.fixture()
def rgb_random():
    """Deterministic random RGB test image."""
    rng = np.random.default_rng(1234)
    return Image(rng.integers(0, 256, size=(32, 48, 3), dtype=np.uint8))


@pytest.fixture()
def gray_random():
    rng = np.random.default_rng(99)
    return Image(rng.integers(0, 256, size=(16, 16, 1), dtype=np.uint8))
