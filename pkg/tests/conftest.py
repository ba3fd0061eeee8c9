import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from cqarank.corpus import load_corpus, load_profiles
from cqarank.pipeline import parse_settings, read_config_file

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SAMPLE_DIR = Path(__file__).resolve().parents[1] / "src" / "cqarank" / "data" / "sample"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def sample_dir():
    return SAMPLE_DIR


@pytest.fixture(scope="session")
def sample_corpus():
    corpus = load_corpus(SAMPLE_DIR / "threads.jsonl")
    profiles, _ = load_profiles(SAMPLE_DIR / "profiles.jsonl")
    return corpus.with_profiles(profiles)


@pytest.fixture(scope="session")
def related_corpus():
    corpus = load_corpus(SAMPLE_DIR / "related.jsonl")
    profiles, _ = load_profiles(SAMPLE_DIR / "profiles.jsonl")
    return corpus.with_profiles(profiles)


@pytest.fixture(scope="session")
def sample_config():
    return parse_settings(read_config_file(SAMPLE_DIR / "sample.ini"))


@pytest.fixture(scope="session")
def sample_models(sample_corpus, sample_config):
    from cqarank.pipeline import build_models

    return build_models(sample_corpus, sample_config)


@pytest.fixture(scope="session")
def sample_split(sample_corpus):
    """First 14 sample threads for training, the rest for evaluation."""
    from cqarank.corpus import Corpus

    threads = sample_corpus.threads
    return (Corpus(threads[:14], sample_corpus.profiles), Corpus(threads[14:], sample_corpus.profiles))


@pytest.fixture(scope="session")
def split_models(sample_split, sample_config):
    from cqarank.pipeline import build_models

    return build_models(sample_split[0], sample_config)


@pytest.fixture(scope="session")
def split_matrices(sample_split, split_models, sample_config):
    from cqarank.pipeline import extract_matrix

    train, dev = sample_split
    return extract_matrix(train, split_models, sample_config), extract_matrix(dev, split_models, sample_config)


# acceptance criteria register one line each; printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
