import pytest

from rieszshape import verify


@pytest.mark.parametrize("suite", verify.SUITES)
def test_each_suite_passes(suite):
    checks = verify.run_suite(suite, seed=11)
    assert checks
    failed = [c for c in checks if not c.passed]
    assert not failed, failed


def test_report_table_is_reproducible():
    a = verify.run("critical", seed=5).table()
    b = verify.run("critical", seed=5).table()
    assert a == b
    assert a.splitlines()[-1].startswith("# ")


def test_suite_streams_are_independent():
    alone = verify.run_suite("minimize", seed=8)
    together = [c for c in verify.run("all", seed=8).checks if c.suite == "minimize"]
    assert alone == together


def test_unknown_suite():
    with pytest.raises(KeyError):
        verify.run_suite("nope")


def test_check_pass_logic():
    assert verify.Check("s", "n", 1.0, 1.0, 0.0, 0.0).passed
    assert not verify.Check("s", "n", 1.0, 1.0, float("nan"), 1.0).passed
