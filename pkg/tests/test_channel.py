import io

import numpy as np
import pytest
from scipy import stats

from mmrelay.channel import (ChannelRealization, MatrixKind, PilotConfig, complex_gaussian,
                             draw_channels, mmse_estimate_direct, mmse_estimate_pilot,
                             read_dump, trial_stream, write_dump)


def test_stream_is_pure():
    a = trial_stream(5, 17).standard_normal(8)
    b = trial_stream(5, 17).standard_normal(8)
    c = trial_stream(5, 18).standard_normal(8)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ValueError):
        trial_stream(-1, 0)


def test_complex_gaussian_moments():
    z = complex_gaussian(trial_stream(1), (200_000,), var=0.3)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(0.3, rel=0.01)
    assert abs(np.mean(z.real * z.imag)) < 3e-3
    assert np.var(z.real) == pytest.approx(np.var(z.imag), rel=0.02)
    # |z|^2 is exponential with mean var
    assert stats.kstest(np.abs(z) ** 2 / 0.3, "expon").pvalue > 1e-3


def test_draw_shapes():
    ch = draw_channels(16, 4, trial_stream(0))
    assert ch.F.shape == (16, 4) and ch.G.shape == (4, 16)
    with pytest.raises(ValueError):
        draw_channels(3, 4, trial_stream(0))


def test_dft_pilots_orthonormal():
    pc = PilotConfig.dft(7, 5, 2.0)
    np.testing.assert_allclose(pc.Phi.conj().T @ pc.Phi, np.eye(5), atol=1e-13)
    assert pc.P_c == pytest.approx(14 / 15)


def _pilot_stats(P_t, tau, n=3000, M=8, K=3):
    pc = PilotConfig.dft(tau, K, P_t)
    rng = trial_stream(11)
    fh, ef, cross = [], [], []
    for _ in range(n):
        ch = draw_channels(M, K, rng)
        est = mmse_estimate_pilot(ch, pc, rng)
        fh.append(est.F_hat.ravel())
        ef.append(est.E_f.ravel())
        cross.append((est.F_hat * est.E_f.conj()).ravel())
    return np.concatenate(fh), np.concatenate(ef), np.concatenate(cross), pc.P_c


@pytest.mark.parametrize("P_t,tau", [(0.2, 4), (2.0, 3)])
def test_pilot_estimate_matches_direct_law(P_t, tau):
    fh, ef, cross, Pc = _pilot_stats(P_t, tau)
    n = fh.size
    assert np.mean(np.abs(fh) ** 2) == pytest.approx(Pc, abs=4 * Pc / np.sqrt(n))
    assert np.mean(np.abs(ef) ** 2) == pytest.approx(1 - Pc, abs=4 * (1 - Pc) / np.sqrt(n))
    # MMSE orthogonality: estimate uncorrelated with its error
    assert abs(np.mean(cross)) < 4 * np.sqrt(Pc * (1 - Pc) / n)


def test_pilot_perfect_csi():
    ch = draw_channels(8, 2, trial_stream(2))
    est = mmse_estimate_pilot(ch, PilotConfig.dft(2, 2, np.inf), trial_stream(3))
    np.testing.assert_array_equal(est.F_hat, ch.F)
    assert est.P_c == 1.0


def test_pilot_errors():
    ch = draw_channels(8, 3, trial_stream(2))
    with pytest.raises(ValueError):
        PilotConfig.dft(2, 3, 1.0)
    with pytest.raises(ValueError):
        mmse_estimate_pilot(ch, PilotConfig.dft(4, 2, 1.0), trial_stream(0))


def test_direct_estimate():
    est = mmse_estimate_direct(64, 4, 0.7, trial_stream(9))
    np.testing.assert_allclose(est.F_hat - est.E_f, est.F)
    np.testing.assert_allclose(est.G_hat - est.E_g, est.G)
    with pytest.raises(ValueError):
        mmse_estimate_direct(64, 4, 0.0, trial_stream(9))


def test_dump_round_trip():
    est = mmse_estimate_direct(5, 3, 0.6, trial_stream(4))
    buf = io.BytesIO()
    n = write_dump(buf, est)
    assert n == 6 * (16 + 16 * 15)
    buf.seek(0)
    recs = dict(read_dump(buf))
    assert set(recs) == set(MatrixKind)
    np.testing.assert_array_equal(recs[MatrixKind.G_HAT], est.G_hat)
    np.testing.assert_array_equal(recs[MatrixKind.E_F], est.E_f)
    assert recs[MatrixKind.G].shape == (3, 5)


def test_dump_layout():
    ch = ChannelRealization(F=np.array([[1 + 2j], [3 - 4j]]), G=np.array([[5j, 6.0]]))
    buf = io.BytesIO()
    write_dump(buf, ch)
    raw = buf.getvalue()
    assert raw[:4] == b"MMRL"
    assert np.frombuffer(raw[4:16], "<u4").tolist() == [2, 1, 0]
    assert np.frombuffer(raw[16:48], "<f8").tolist() == [1, 2, 3, -4]


def test_dump_rejects_garbage():
    with pytest.raises(ValueError):
        list(read_dump(io.BytesIO(b"XXXX" + bytes(12))))
    with pytest.raises(ValueError):
        list(read_dump(io.BytesIO(b"MMRL" + bytes(4))))
