"""One test per numbered acceptance criterion, each backed by a packaged config.

Every test prints a single ``[PASS]``/``[FAIL] criterion N`` line; the lines
are also collected into the terminal summary.
"""

import pytest

from endpoint_l1 import experiments as ex

from conftest import ACCEPTANCE_LINES

BY_CRITERION = {ex.packaged_config(cid).criterion: cid for cid in ex.packaged_config_ids()}


@pytest.mark.slow
@pytest.mark.parametrize("criterion", sorted(BY_CRITERION))
def test_criterion(criterion):
    cfg = ex.packaged_config(BY_CRITERION[criterion])
    rep = ex.run(cfg)
    status = "PASS" if rep.passed else "FAIL"
    detail = "; ".join(c.describe() for c in rep.checks if not c.passed) or f"{len(rep.checks)} checks ok"
    line = f"[{status}] criterion {criterion}: {cfg.id} ({rep.runtime_s:.1f} s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert rep.passed, detail
