import pytest

from ionlayer import verify


def test_report_is_conjunction(monkeypatch):
    monkeypatch.setitem(verify.SUITES, "eigenvalue", lambda grid: [verify.Check("ok", True)])
    monkeypatch.setitem(verify.SUITES, "exact", lambda grid: [verify.Check("bad", False, "why")])
    report = verify.run_verify("eigenvalue")
    assert report["passed"] is True
    for name in list(verify.SUITES):
        if name not in ("eigenvalue", "exact"):
            monkeypatch.setitem(verify.SUITES, name, lambda grid: [verify.Check("ok", True)])
    report = verify.run_verify("all")
    assert report["passed"] is False
    assert report["suites"]["exact"]["checks"][0] == {"name": "bad", "passed": False, "detail": "why"}


def test_exceptions_become_failures():
    def boom():
        raise ValueError("nope")

    check = verify._run("explodes", boom)
    assert not check.passed and "nope" in check.detail


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run_verify("bogus")


@pytest.mark.parametrize("name", ["eigenvalue", "exact", "asymptotics", "capacitance", "concentration"])
def test_light_suites_pass(name):
    report = verify.run_verify(name, (1e3, 1e4, 1e5, 1e6))
    failed = [c for c in report["suites"][name]["checks"] if not c["passed"]]
    assert not failed, failed


def test_random_points_are_reproducible():
    assert verify.random_ccpb_points(5) == verify.random_ccpb_points(5)
    assert all(mu < lam for lam, mu in verify.random_ccpb_points(20))
