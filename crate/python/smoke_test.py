"""Smoke test for the scenery_rs extension module."""

import json
import math

import scenery_rs


def main():
    law = dict(scenery_rs.state_distribution(0.0, 4))
    assert math.isclose(law[0], 6 / 16), law
    assert math.isclose(sum(law.values()), 1.0)

    m = scenery_rs.margin([(1, 0.5), (3, 0.5)], 4, 4, 0.0)
    assert math.isclose(m, 1 / 16, abs_tol=1e-12), m

    assert scenery_rs.delta_path_count(8, "1/20", 3) == 2**8
    assert scenery_rs.equivalent("12345", "54321")
    assert not scenery_rs.equivalent("12345", "12354")

    checks = scenery_rs.verify_oracles()
    failed = [c for c in checks if not c[3]]
    assert not failed, failed
    assert checks[0][2] == "5/32"

    config = "n = 4\nepsilon = 0.1\nhorizon_cap = 5000\ntrials = 12\nseed = 3\n"
    lines, summary = scenery_rs.run_batch(config)
    again, _ = scenery_rs.run_batch(config)
    assert lines == again
    records = [json.loads(line) for line in lines]
    summary = json.loads(summary)
    assert summary["trials"] == 12
    assert summary["successes"] == sum(r["success"] for r in records)

    try:
        scenery_rs.run_batch("delta = \"1/2\"\n")
    except ValueError as e:
        assert "63*delta" in str(e)
    else:
        raise AssertionError("oversized delta accepted")

    print(f"ok: {len(checks)} oracle checks, {len(records)} records, success {summary['successes']}/12")


if __name__ == "__main__":
    main()
