import math

import mpmath as mp
import pytest

import _oracle
from ionlayer import concentration as conc
from ionlayer.errors import DomainError
from ionlayer.exact import SingleSpeciesSolution, eval_u

LAMS = (1e2, 1e3, 1e4, 1e5)


@pytest.fixture(scope="module")
def sols():
    return {lam: SingleSpeciesSolution.from_lambda(lam) for lam in LAMS}


@pytest.mark.parametrize("h_id", sorted(conc.CATALOG))
def test_identity(sols, h_id):
    for sol in sols.values():
        assert abs(conc.identity_defect(sol, h_id)) <= 1e-8


@pytest.mark.parametrize("h_id", sorted(conc.CATALOG))
def test_catalog_reference_values(h_id):
    h = conc.CATALOG[h_id]
    f = lambda r: float(h(r))
    assert float(mp.quad(f, [0, 0.5, 0.75, 1])) == pytest.approx(h.integral, rel=1e-12)
    assert f(1.0) == pytest.approx(h.at_one, abs=1e-15)
    e = 1e-7
    assert (f(1.0) - f(1.0 - e)) / e == pytest.approx(h.slope_at_one, rel=1e-5, abs=1e-6)


def test_constant_has_unit_charge(sols):
    for sol in sols.values():
        assert conc.charge_functional(sol, "one") == pytest.approx(1.0, abs=1e-8)


def test_linear_by_parts(sols):
    # int rho r / lam = 1 + (u(1) - u(0)) / lam
    sol = sols[1e4]
    expected = 1.0 + (eval_u(sol, 1.0) - eval_u(sol, 0.0)) / sol.lam
    assert conc.charge_functional(sol, "r") == pytest.approx(expected, rel=1e-9)
    lam = sol.lam
    approx = 1.0 - (2 * math.log(lam) - 2 * math.log(math.pi) + 4 / lam) / lam
    assert expected == pytest.approx(approx, abs=1e-7)


def test_energy_of_constant(sols):
    sol = sols[1e4]
    e = conc.energy_functional(sol, "one")
    assert 0.99 < e < 1.0
    assert e == pytest.approx(1.0 - 1.0 / sol.i, rel=1e-9)


def test_energy_against_mpmath():
    lam = 1e3
    j, k, e = _oracle.solution(lam)
    ref = mp.quad(lambda r: (2 * k * mp.tan(k * r)) ** 2 * r * r / (2 * lam), [0, 0.5, 0.99, 1])
    sol = SingleSpeciesSolution.from_lambda(lam)
    assert conc.energy_functional(sol, "r2") == pytest.approx(float(ref), rel=1e-8)


@pytest.mark.parametrize("h_id", sorted(set(conc.CATALOG) - {"one"}))
def test_gap_decreases(sols, h_id):
    h = conc.CATALOG[h_id]
    gaps = [abs(conc.charge_functional(sols[lam], h) - h.at_one) for lam in LAMS]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    energy_gaps = [abs(conc.energy_functional(sols[lam], h) - h.at_one) for lam in LAMS]
    assert energy_gaps[-1] < energy_gaps[0]


@pytest.mark.parametrize("h_id", [i for i, h in conc.CATALOG.items() if h.smooth])
def test_rate_bound(sols, h_id):
    h = conc.CATALOG[h_id]
    lam = 1e4
    gap = abs(conc.charge_functional(sols[lam], h) - h.at_one)
    assert gap <= 2 * math.log(lam) * (1 + abs(h.slope_at_one)) / lam


def test_localization(sols):
    mass = [conc.localized_mass(sols[lam]) for lam in LAMS]
    assert all(b < a for a, b in zip(mass, mass[1:]))
    assert mass[-1] < 0.01
    with pytest.raises(DomainError):
        conc.localized_mass(sols[1e2], kappa=1.0)


def test_localized_mass_is_integral():
    sol = SingleSpeciesSolution.from_lambda(1e3)
    delta = 1e3 ** -0.5
    j, k, e = _oracle.solution(1e3)
    ref = mp.quad(lambda r: j / mp.cos(k * r) ** 2 / 1000, [0, 1 - delta])
    assert conc.localized_mass(sol) == pytest.approx(float(ref), rel=1e-10)


def test_unknown_id_and_csv():
    with pytest.raises(DomainError):
        conc.get_test_function("sin")
    text = conc.results_to_csv(conc.concentration_sweep([1e3], ["r", "hat"]))
    lines = text.splitlines()
    assert lines[0] == "lambda,h_id,charge,energy,h_at_1,gap"
    assert [l.split(",")[1] for l in lines[1:]] == ["r", "hat"]
