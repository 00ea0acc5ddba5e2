import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
sys.path.insert(0, str(HERE))

SMALL_CNF = "p cnf 5 3\n1 -3 0\n2 3 -1 -4 0\n-5 -4 0\n"
SMALL_CNF_CONF = "p cnf 5 3\n3 -1 -4 2 0\n-4 -5 0\n1 -3 0\n"
# running example; ids: p1=3 p2=4 p3=5 p4=2 p5=7, aggregate=6
RUN_RULES = "8 2 2 3 0 0\n8 2 4 5 2 1 2 3\n5 6 7 3 0 3 5 2 1 2 4\n1 7 1 0 6\n"
RUN_SM = RUN_RULES + "0\n3 p1\n4 p2\n5 p3\n2 p4\n7 p5\n0\nB+\n0\nB-\n0\n1\n"
CONF_RULES = "5 6 7 3 0 3 5 2 1 2 4\n8 2 2 3 0 0\n8 2 4 5 2 1 2 3\n1 7 1 0 6\n"
SAT_W_TEXT = "size 10.0\nnegative 10.0\nocc 10.0\nord_lit 1\nord_cl 1\n"
ASP_W_TEXT = "aggregate 10.0\nneg_body_occ 10.0\n"


@pytest.fixture
def stubs():
    return HERE / "stubs"


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
