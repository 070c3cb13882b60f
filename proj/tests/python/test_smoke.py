import math

import pytest

import heightlab as hl


def test_psi_closed_form():
    m = hl.Mechanism(1.0, 1.0, hl.LevyMeasure.zero())
    assert hl.psi(m, 2.0) == pytest.approx(6.0, abs=1e-12)
    assert hl.psi(m, 0.0) == 0.0
    atom = hl.Mechanism(0.0, 1.0, hl.LevyMeasure.atoms([(1.0, 1.0)]))
    assert hl.psi(atom, 1.0) == pytest.approx(1.0 + math.exp(-1.0))


def test_phi_inverts_psi():
    m = hl.Mechanism(0.3, 1.0, hl.LevyMeasure.atoms([(1.0, 0.5)]))
    for u in (0.5, 1.0, 4.0):
        lam = hl.phi(m, u)
        assert hl.psi(m, lam) == pytest.approx(u, rel=1e-8)


def test_height_nonnegative_and_reflected():
    m = hl.Mechanism(0.0, 1.0, hl.LevyMeasure.zero())
    p = hl.simulate_levy(m, horizon=1.0, dt=1e-3, seed=7)
    h = hl.height_from_path(p, 1.0)
    x = p.values
    hv = h.values
    assert len(hv) == len(x)
    assert (hv >= 0.0).all()
    runmin = 0.0
    for i in range(len(x)):
        runmin = min(runmin, x[i])
        assert hv[i] == x[i] - runmin


def test_first_passage_and_local_time():
    m = hl.Mechanism(0.5, 1.0, hl.LevyMeasure.atoms([(1.0, 0.5)]))
    p = hl.simulate_levy_first_passage(m, x=0.5, cap=200.0, dt=1e-3, seed=3)
    t = hl.first_passage_time(p, 0.5)
    assert t is not None and t > 0
    h = hl.height_from_path(p, 1.0)
    fields = hl.local_time_field(h, 0.05, [t])
    # occupation conservation: sum of bin times equals elapsed time
    assert fields[0].sum() * 0.05 == pytest.approx(t, rel=0.05)


def test_csbp_martingale_mean():
    f = hl.linear_interaction(0.0)
    m = hl.Mechanism(0.0, 1.0, hl.LevyMeasure.zero())
    vals = []
    for k in range(300):
        pop = hl.simulate_csbp(f, m, [1.0], 0.5, 1e-3, 0.01,
                               hl.seed_split(11, 0, k))
        vals.append(pop.z(0, pop.steps() - 1))
    mean = sum(vals) / len(vals)
    assert mean == pytest.approx(1.0, abs=0.15)


def test_extinction_and_ks():
    assert (hl.extinction_criterion(hl.polynomial_interaction([0.0, -1.0]), 1.0)
            == hl.Extinction.ExtinctAS)
    assert (hl.extinction_criterion(hl.polynomial_interaction([0.5]), 1.0)
            == hl.Extinction.NotExtinctAS)
    stat, p = hl.ks_two_sample([0.1, 0.2, 0.3], [0.1, 0.2, 0.3], 50, 1)
    assert stat == 0.0
