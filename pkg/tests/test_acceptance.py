"""One test per acceptance criterion, each run at its own time limit.

Every criterion prints a single pass/fail line (with timing) as it finishes.
"""

import pytest

from llv.corpus import load_corpus
from llv.verify import CRITERIA, SUITES, Options, run_criterion

OPTS = Options(load_corpus())


@pytest.mark.parametrize("cid", SUITES["paper"])
def test_criterion(cid, capsys):
    result = run_criterion(cid, OPTS)
    with capsys.disabled():
        print(f"\n{result.line()}")
    assert result.status == "pass", result.details
    assert result.seconds <= CRITERIA[cid][2]
