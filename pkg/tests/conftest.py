import random

import pytest

from vocablab.bpe import train_bpe

_ACCEPTANCE_ITEMS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, title): toolkit acceptance criterion"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker:
            _ACCEPTANCE_ITEMS[item.nodeid] = (
                marker.kwargs.get("num", 0),
                marker.kwargs.get("title", item.name),
            )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            if getattr(report, "when", "call") != "call" and verdict == "PASS":
                continue
            if report.nodeid in _ACCEPTANCE_ITEMS:
                num, title = _ACCEPTANCE_ITEMS[report.nodeid]
                lines.append((num, f"acceptance criterion {num:2d}: {verdict}  {title}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(set(lines)):
            terminalreporter.write_line(line)


def make_text_lines(rng, n_lines, words=None, punctuated=True):
    words = words or (
        "det är en dag som har varit här och vi kan se att de inte alls "
        "vill komma hem igen nu då"
    ).split()
    lines = []
    for _ in range(n_lines):
        count = rng.randint(2, 8)
        line = " ".join(rng.choice(words) for _ in range(count))
        if punctuated and rng.random() < 0.5:
            line += rng.choice([".", "!", "?", ","])
        lines.append(line)
    return lines


@pytest.fixture(scope="session")
def fallback_model():
    rng = random.Random(11)
    corpus = make_text_lines(rng, 200)
    return train_bpe(corpus, 400, True)


@pytest.fixture(scope="session")
def plain_model():
    rng = random.Random(12)
    corpus = make_text_lines(rng, 200)
    return train_bpe(corpus, 320, False)
