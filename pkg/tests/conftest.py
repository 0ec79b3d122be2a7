import pytest

from sigagent.corpus import bundled_sentences, split_corpus
from sigagent.provider import train_from_texts


@pytest.fixture(scope="session")
def corpus_split():
    return split_corpus(bundled_sentences())


@pytest.fixture(scope="session")
def corpus_predictor(corpus_split):
    train, _ = corpus_split
    return train_from_texts(train, order=2, smoothing=0.1)


@pytest.fixture(scope="session")
def corpus_predictor3(corpus_split):
    # two tokens of history, so the K=1 vs K=2 comparison is not vacuous
    train, _ = corpus_split
    return train_from_texts(train, order=3, smoothing=0.1)


# one PASS/FAIL line per acceptance criterion, shown even when output is captured
ACCEPTANCE: dict[int, str] = {}


@pytest.fixture()
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
