import json
import math

import numpy as np
import pytest

from shellspec.band_structure import (REGIME_GENERIC, REGIME_LINE, REGIME_POINT, essential_spectrum,
                                      line_bs_distance, line_symbol, mu_boundedness, z_pm)
from shellspec.dirac_core import InteractionParams

INF = math.inf

from band_oracles import electrostatic_bands, magnetic_bands, same_bands, scalar_bands


def test_oracle_self_check():
    # (1,0,0), m=c=1: q = -3/5
    assert electrostatic_bands(1.0, 1, 1) == ([(-INF, -0.6), (1, INF)], [])


@pytest.mark.parametrize("fam", ["electrostatic", "scalar", "magnetic"])
def test_random_draws_match_closed_forms(fam):
    rng = np.random.default_rng({"electrostatic": 1, "scalar": 2, "magnetic": 3}[fam])
    bad = []
    for _ in range(200):
        m, c = rng.uniform(0.5, 2, size=2)
        g = rng.uniform(-6, 6)
        if fam == "electrostatic":
            p = InteractionParams(g, 0, 0, m, c)
            want, pts = electrostatic_bands(g, m, c)
        elif fam == "scalar":
            p = InteractionParams(0, g, 0, m, c)
            want, pts = scalar_bands(g, m, c), []
        else:
            p = InteractionParams(0, 0, g, m, c)
            want, pts = magnetic_bands(g, m, c), []
        rep = essential_spectrum(p)
        if not same_bands(rep.bands, want) or rep.isolated_points != pts:
            bad.append((p, rep.bands, want))
    assert not bad, bad[:3]


def test_spectral_transition_point():
    for eta in (2.0, -2.0):
        rep = essential_spectrum(InteractionParams(eta, 0, 0))
        assert rep.isolated_points == [0.0]
        assert rep.regime == REGIME_POINT
        assert rep.critical


@pytest.mark.parametrize("eta", [2.001, 1.999, -2.001, -1.999])
def test_near_transition_interval(eta):
    rep = essential_spectrum(InteractionParams(eta, 0, 0))
    assert rep.isolated_points == []
    gb = rep.gap_bands()
    assert len(gb) == 1 and gb[0][1] - gb[0][0] > 0
    assert gb[0][0] <= 1e-3 and gb[0][1] >= -1e-3


def test_point_regime_position_general():
    # d = 4c^2, lam = 0: point at -(tau/eta) m c^2
    p = InteractionParams(math.sqrt(4 + 1.0), 1.0, 0.0)
    rep = essential_spectrum(p)
    assert rep.regime == REGIME_POINT
    assert np.isclose(rep.isolated_points[0], -1 / math.sqrt(5))


def test_line_regime_is_everything():
    # eta^2 - tau^2 - lam^2 = 4 with lam != 0
    p = InteractionParams(math.sqrt(5.0), 0.0, 1.0)
    rep = essential_spectrum(p)
    assert rep.regime == REGIME_LINE and rep.bands == [(-INF, INF)]


def test_massless_is_whole_line():
    rep = essential_spectrum(InteractionParams(0.5, 0.2, 0.1, mass=0.0))
    assert rep.bands == [(-INF, INF)]


def test_gap_band_values():
    assert np.isclose(essential_spectrum(InteractionParams(3.0, 0, 0)).gap_bands()[0][0], 5 / 13)
    rep = essential_spectrum(InteractionParams(0, -1, 0))
    assert np.allclose(rep.gap_complement, [(-0.6, 0.6)])


def test_json_roundtrip():
    rep = essential_spectrum(InteractionParams(2.0, 0, 0))
    d = json.loads(rep.to_json())
    assert d["points"] == [0.0]
    assert d["bands"] == [[-INF, -1.0], [1.0, INF]]
    assert json.dumps(d) == rep.to_json()


def test_zpm_rejects_d_equal_4c2():
    with pytest.raises(ValueError):
        z_pm(0.0, 1, InteractionParams(2.0, 0, 0))


def test_line_symbol_hermitian_and_distance():
    p = InteractionParams(0, -1, 0)
    S = line_symbol(0.7, 0.2, p)
    assert np.allclose(S, S.conj().T)
    R = math.sqrt(1 - 0.52 ** 2)
    want = 1 - (1 / R + math.sqrt(1 / R ** 2 - 1)) / 2      # attained at p = 0
    assert abs(line_bs_distance(0.52, p) - want) < 1e-10


def test_mu_boundedness_flags():
    # eta^2 = tau^2 + (lam + 2c)^2
    assert mu_boundedness(InteractionParams(3.0, 0.0, 1.0))[0]
    assert not any(mu_boundedness(InteractionParams(1.0, 0, 0)))
