from artifact import suites


def test_every_criterion_has_one_suite():
    assert [s.criterion for s in suites.SUITES] == list(range(1, 13))


def test_same_seed_same_report():
    a = suites.run_suite(4, seed=9, scale=0.05).to_json()
    b = suites.run_suite(4, seed=9, scale=0.05).to_json()
    assert a == b


def test_crashing_case_is_a_failure_not_an_exception():
    result = suites.SuiteResult(0, "demo")
    suites._Recorder(result).check("boom", lambda: 1 / 0)
    assert not result.passed and "ZeroDivisionError" in result.cases[0].detail


def test_empty_suite_does_not_pass():
    assert not suites.SuiteResult(0, "empty").passed
