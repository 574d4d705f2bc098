import math

import numpy as np
import pytest

from cotp import entropic, pad, qcore, typesys
from cotp.errors import ConfigError, EnumerationCapExceeded
from cotp.pad.protocol import TrialResult
from conftest import random_abe

Q = qcore.SystemLayout.of


def marginal(rho, label="A"):
    return qcore.partial_trace(rho, label)


def encode_direct(s, decomp, rho, n):
    """(U(s) x I) rho^{(x) n} (U(s) x I)^dagger with explicit matrices."""
    big = qcore.tensor_power(rho, n)
    u = pad.encoding_unitary(s, decomp)
    full = np.kron(u, np.eye(big.dim // u.shape[0]))
    return full @ big.data @ full.conj().T


def ghz_ae(ghz):
    return qcore.partial_trace(ghz, ["A", "E"])


class TestGeneralizedPauli:
    def test_x(self):
        assert np.allclose(pad.generalized_pauli(2, 1, 0), [[0, 1], [1, 0]])

    def test_z(self):
        assert np.allclose(pad.generalized_pauli(2, 0, 1), np.diag([1, -1]))

    def test_clock_shift(self):
        w = np.exp(2j * np.pi / 3)
        shift = np.zeros((3, 3))
        clock = np.zeros((3, 3), dtype=complex)
        for j in range(3):
            shift[(j + 1) % 3, j] = 1
            clock[j, j] = w ** j
        assert np.allclose(pad.generalized_pauli(3, 1, 1), shift @ clock, atol=1e-14)

    def test_unitary(self):
        for x in range(5):
            for z in range(5):
                u = pad.generalized_pauli(5, x, z)
                assert np.max(np.abs(u.conj().T @ u - np.eye(5))) < 1e-12

    def test_range(self):
        with pytest.raises(ConfigError):
            pad.generalized_pauli(2, 2, 0)


class TestEncodingUnitary:
    def test_zero(self):
        dec = pad.decompose_marginal(qcore.random_density(Q(("A", 2)), seed=1), 2)
        u = pad.encoding_unitary(pad.EncodingVector.zero(len(dec.types)), dec)
        assert np.allclose(u, np.eye(4))

    def test_n1_signs(self):
        rho = qcore.random_density(Q(("A", 2)), seed=2)
        dec = pad.decompose_marginal(rho, 1)
        w = dec.alphabet.full_basis
        for s in pad.enumerate_all_s(dec):
            d = w.conj().T @ pad.encoding_unitary(s, dec) @ w
            assert np.allclose(d, np.diag(np.diag(d)), atol=1e-12)
            assert np.allclose(np.abs(np.diag(d).real), 1) and np.allclose(np.diag(d).imag, 0)

    def test_block_structure(self):
        rho = qcore.random_density(Q(("A", 2)), seed=3)
        dec = pad.decompose_marginal(rho, 2)
        projs = [typesys.type_projector(t, dec.alphabet) for t in dec.types]
        rng = np.random.default_rng(0)
        code = pad.build_code(5, 1, dec, rng)
        for m in range(5):
            u = pad.encoding_unitary(code.entry(m, 0), dec)
            assert np.max(np.abs(u.conj().T @ u - np.eye(4))) < 1e-10
            for i, p in enumerate(projs):
                assert np.max(np.abs(u @ p - p @ u)) < 1e-12
                for j, q in enumerate(projs):
                    if i != j:
                        assert np.max(np.abs(p @ u @ q)) < 1e-12

    def test_type_mismatch(self):
        dec = pad.decompose_marginal(qcore.maximally_mixed(Q(("A", 2))), 2)
        with pytest.raises(ConfigError):
            pad.encoding_unitary(pad.EncodingVector.zero(2), dec)


class TestEnumerateAll:
    @pytest.mark.parametrize("n, count", [(1, 4), (2, 32), (3, 1296)])
    def test_counts(self, n, count):
        dec = pad.decompose_marginal(qcore.random_density(Q(("A", 2)), seed=4), n)
        assert pad.count_all_s(dec) == count
        if n < 3:
            vecs = list(pad.enumerate_all_s(dec))
            assert len(vecs) == len(set(vecs)) == count

    def test_cap(self):
        dec = pad.decompose_marginal(qcore.maximally_mixed(Q(("A", 2))), 3)
        with pytest.raises(EnumerationCapExceeded):
            next(pad.enumerate_all_s(dec, cap=100))


class TestBuildCode:
    def test_single(self):
        dec = pad.decompose_marginal(qcore.maximally_mixed(Q(("A", 2))), 2)
        code = pad.build_code(1, 1, dec, np.random.default_rng(0))
        assert (code.M, code.K) == (1, 1)
        code.entry(0, 0).check(dec.dims)

    def test_seeded(self):
        dec = pad.decompose_marginal(qcore.maximally_mixed(Q(("A", 2))), 3)
        a = pad.build_code(3, (2, 2), dec, np.random.default_rng(9))
        b = pad.build_code(3, (2, 2), dec, np.random.default_rng(9))
        assert all(np.array_equal(x, y) for x, y in zip(a.flat(), b.flat()))
        assert a.entry(1, (1, 0)) == a.entry(1, 2)

    def test_uniform_bits(self):
        dec = pad.decompose_marginal(qcore.maximally_mixed(Q(("A", 2))), 2)
        code = pad.build_code(10_000, 1, dec, np.random.default_rng(1))
        assert np.all(np.abs(code.b.mean(axis=(0, 1)) - 0.5) < 0.02)
        for t, d in enumerate(dec.dims):
            assert code.x[..., t].max() < d and code.z[..., t].max() < d


class TestCodeStates:
    def test_identity(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        t = len(dec.types)
        code = pad.Code(np.zeros((1, 1, t), int), np.zeros((1, 1, t), int),
                        np.zeros((1, 1, t), int), (1,))
        w = pad.code_states(code, ghz, 2)[0][0]
        assert np.allclose(w.data, qcore.tensor_power(ghz, 2).data, atol=1e-12)

    def test_direct_and_spectrum(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.build_code(2, 2, dec, np.random.default_rng(5))
        states = pad.code_states(code, ghz, 2)
        h0 = entropic.entropy(qcore.tensor_power(ghz, 2))
        for m in range(2):
            for k in range(2):
                w = states[m][k]
                assert np.max(np.abs(w.data - encode_direct(code.entry(m, k), dec, ghz, 2))) < 1e-12
                assert entropic.entropy(w) == pytest.approx(h0, abs=1e-9)
                red = qcore.partial_trace(w, ["A^2", "E^2"]).data
                direct = qcore.partial_trace(qcore.DensityMatrix(
                    w.layout, encode_direct(code.entry(m, k), dec, ghz, 2), check=False),
                    ["A^2", "E^2"]).data
                assert np.allclose(np.linalg.eigvalsh(red), np.linalg.eigvalsh(direct), atol=1e-12)

    def test_random_state_spectrum(self):
        rho = random_abe(11, dims=(3, 2, 2), rank=2)
        dec = pad.decompose_marginal(marginal(rho), 2)
        code = pad.build_code(2, 1, dec, np.random.default_rng(2))
        h0 = entropic.entropy(qcore.tensor_power(rho, 2))
        for row in pad.code_states(code, rho, 2):
            assert entropic.entropy(row[0]) == pytest.approx(h0, abs=1e-9)


def trine():
    return [np.outer(v, v.conj()) for v in
            (np.array([math.cos(2 * math.pi * j / 3), math.sin(2 * math.pi * j / 3)])
             for j in range(3))]


class TestPGM:
    def test_single_state(self):
        res = pad.pgm_decoder([qcore.random_density(3, seed=1)])
        assert res.success[0] == pytest.approx(1, abs=1e-12)

    def test_orthogonal(self):
        res = pad.pgm_decoder([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0])])
        assert np.allclose(res.success, 1)

    def test_trine(self):
        states = trine()
        res = pad.pgm_decoder(states)
        # direct 2x2 oracle: S = 3/2 I, so S^{-1/2} = sqrt(2/3) I
        s = sum(states)
        assert np.allclose(s, 1.5 * np.eye(2))
        oracle = [np.trace((2 / 3) * w @ w).real for w in states]
        assert np.allclose(res.success, oracle, atol=1e-12)
        assert np.allclose(res.success, 2 / 3, atol=1e-9)

    def test_completeness(self):
        states = [qcore.random_density(4, rank=1, seed=s).data for s in range(3)]
        res = pad.pgm_decoder(states)
        total = sum(res.povm) + res.completion
        assert np.max(np.abs(total - np.eye(4))) < 1e-9
        for lam in res.povm:
            assert np.linalg.eigvalsh(lam).min() > -1e-9

    def test_monomial_matches_generic(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.build_code(2, 2, dec, np.random.default_rng(3))
        states = [w for row in pad.code_states(code, ghz, 2) for w in row]
        generic = pad.pgm_decoder(states).success
        frame = pad.ProtocolFrame(ghz, 2)
        arr, rest, _ = frame.power()
        perms, phases = frame.monomials(code)
        assert np.allclose(pad.pgm_success_monomial(arr, perms, phases, rest), generic, atol=1e-10)

    def test_projector_only_changes_s(self):
        states = [qcore.random_density(4, seed=s).data for s in range(3)]
        p = np.diag([1.0, 1.0, 1.0, 0.0])
        res = pad.pgm_decoder(states, projector=p)
        total = sum(res.povm) + res.completion
        assert np.max(np.abs(total - np.eye(4))) < 1e-9


class TestAverageState:
    def test_n1_dephased(self):
        rho = random_abe(12)
        rho_ae = qcore.partial_trace(rho, ["A", "E"])
        avg = pad.average_state(rho_ae, 1)
        w = typesys.SpectralAlphabet.of(marginal(rho)).full_basis
        proj = [np.kron(np.outer(w[:, i], w[:, i].conj()), np.eye(2)) for i in range(2)]
        want = sum(p @ rho_ae.data @ p for p in proj)
        assert np.allclose(avg.data, want, atol=1e-12)

    def test_maximally_mixed_product(self):
        rho_e = qcore.random_density(Q(("E", 2)), seed=13)
        rho = qcore.tensor(qcore.maximally_mixed(Q(("A", 2))), rho_e)
        avg = pad.average_state(rho, 2)
        assert np.allclose(avg.data, qcore.tensor_power(rho, 2).data, atol=1e-12)

    @pytest.mark.parametrize("seed", [None, 14])
    def test_brute_force(self, ghz, seed):
        rho = ghz_ae(ghz) if seed is None else qcore.partial_trace(random_abe(seed), ["A", "E"])
        dec = pad.decompose_marginal(marginal(rho), 2)
        vecs = list(pad.enumerate_all_s(dec))
        assert len(vecs) == 32
        brute = sum(encode_direct(s, dec, rho, 2) for s in vecs) / 32
        assert np.max(np.abs(pad.average_state(rho, 2, dec).data - brute)) < 1e-12


class TestAdversary:
    def test_full_key(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.full_key_code(2, dec)
        avg = pad.average_state(ghz, 2, dec, subset="E")
        for m in range(2):
            tau = pad.adversary_state(code, m, ghz, 2, subset="E", decomp=dec)
            assert qcore.trace_distance(tau, avg) <= 1e-12

    def test_single_key(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.build_code(1, 1, dec, np.random.default_rng(4))
        tau = pad.adversary_state(code, 0, ghz, 2, subset="E", decomp=dec)
        single = qcore.DensityMatrix(qcore.tensor_power(ghz, 2).layout,
                                     encode_direct(code.entry(0, 0), dec, ghz, 2))
        assert np.allclose(tau.data, qcore.partial_trace(single, ["A^2", "E^2"]).data, atol=1e-12)

    def test_loop_oracle(self, ghz):
        rho_ae = ghz_ae(ghz)
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.build_code(2, 8, dec, np.random.default_rng(8))
        for m in range(2):
            loop = np.zeros((16, 16), dtype=complex)
            for k in range(8):
                loop += encode_direct(code.entry(m, k), dec, rho_ae, 2)
            tau = pad.adversary_state(code, m, rho_ae, 2, decomp=dec)
            assert np.max(np.abs(tau.data - loop / 8)) < 1e-12


class TestSecurityMetrics:
    def test_full_key(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        deltas = pad.security_metrics(pad.full_key_code(3, dec), ghz, 2, "E", decomp=dec)
        assert np.all(deltas <= 1e-12)

    def test_invisible(self):
        rho = qcore.tensor(qcore.maximally_mixed(Q(("A", 2))),
                           qcore.random_density(Q(("E", 2)), seed=15))
        dec = pad.decompose_marginal(marginal(rho), 2)
        code = pad.build_code(3, 1, dec, np.random.default_rng(0))
        assert np.all(pad.security_metrics(code, rho, 2, "E", decomp=dec) <= 1e-12)

    def test_regression_fixture(self, ghz):
        cfg = pad.ProtocolConfig(n=2, M=2, keys=(4,), seed=7)
        trial = pad.simulate(cfg, ghz).trials[0]
        assert np.allclose(trial.deltas["AE"], [0.125, 0.125], atol=1e-12)
        assert trial.success[0, 1] == pytest.approx(0.8106904345508249, abs=1e-10)

    def test_in_unit_interval(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.build_code(4, 2, dec, np.random.default_rng(6))
        d = pad.security_metrics(code, ghz, 2, ["B", "E"], decomp=dec)
        assert np.all((d >= 0) & (d <= 1))

    def test_unknown_subset(self, ghz):
        dec = pad.decompose_marginal(marginal(ghz), 1)
        with pytest.raises(ConfigError):
            pad.security_metrics(pad.build_code(1, 1, dec, np.random.default_rng(0)), ghz, 1, "Z")


def covering_oracle(K, n, i, d, dp, D):
    e = d * d * d * K * 2 ** (-n * (i + dp)) / (4 * math.log(2))
    return 1 - 2 * D * math.exp(-e)


class TestCoveringBound:
    def test_infinite_key(self):
        assert pad.covering_bound(math.inf, 4, 1.0, 0.1, 0.05, 16).value == 1.0

    def test_zero_exponent(self):
        res = pad.covering_bound(1e-300, 4, 1.0, 0.1, 0.05, 0.25)
        assert res.raw == pytest.approx(1 - 2 * 0.25)

    def test_calculator(self):
        res = pad.covering_bound(2 ** 10, 4, 1.0, 0.1, 0.05, 16)
        assert res.raw == pytest.approx(covering_oracle(2 ** 10, 4, 1.0, 0.1, 0.05, 16), abs=1e-12)
        assert res.value == min(max(res.raw, 0), 1)
        assert res.distance == pytest.approx(0.1 + 4 * math.sqrt(0.1) + 24 * 0.1 ** 0.25)

    def test_positive(self):
        with pytest.raises(ConfigError):
            pad.covering_bound(4, 1, 1.0, 0.0, 0.1, 1)


def fake_trial(success, deltas):
    success = np.asarray(success, dtype=float)
    return TrialResult(0, 0, success, {"AE": np.asarray(deltas, dtype=float)}, {})


class TestExpurgate:
    def _code(self, M):
        dec = pad.decompose_marginal(qcore.maximally_mixed(Q(("A", 2))), 1)
        return pad.build_code(M, 2, dec, np.random.default_rng(0))

    def test_ties(self):
        sub, res = pad.expurgate(fake_trial(np.full((4, 2), 0.9), [0.1] * 4), self._code(4))
        assert res.kept == (0, 1) and sub.M == 2

    def test_drops_catastrophe(self):
        s = np.full((4, 2), 0.95)
        s[2, 1] = 0.01
        _, res = pad.expurgate(fake_trial(s, [0.1, 0.2, 0.3, 0.4]), self._code(4))
        assert 2 not in res.kept
        assert res.eps == pytest.approx(0.05) and res.delta == pytest.approx(0.2)

    def test_single_message(self):
        with pytest.raises(ConfigError):
            pad.expurgate(fake_trial([[1.0]], [0.0]), self._code(1))

    def test_markov(self, ghz):
        rep = pad.simulate(pad.ProtocolConfig(n=2, M=4, keys=(2,), trials=5, seed=1), ghz)
        for t in rep.trials:
            worst = 1 - t.success.min(axis=1)
            assert t.expurgation.eps <= 2 * worst.mean() + 1e-12
            assert all(c.satisfied for c in t.expurgation.converse.values())


class TestSimulate:
    def test_degenerate(self, ghz):
        rep = pad.simulate(pad.ProtocolConfig(n=2, M=1, keys=(1,), seed=4), ghz)
        t = rep.trials[0]
        assert t.eps_worst == pytest.approx(0, abs=1e-12)
        dec = pad.decompose_marginal(marginal(ghz), 2)
        code = pad.build_code(1, 1, dec, np.random.default_rng(t.seed))
        tau = pad.adversary_state(code, 0, ghz, 2, subset="E", decomp=dec)
        avg = pad.average_state(ghz, 2, dec, subset="E")
        assert t.delta == pytest.approx(qcore.trace_distance(tau, avg), abs=1e-12)
        assert t.expurgation is None

    def test_full_key(self, ghz):
        rep = pad.simulate(pad.ProtocolConfig(n=2, M=2, full_key=True, trials=2), ghz)
        assert rep.K == 32 and np.all(rep.delta <= 1e-12)
        assert rep.converse_satisfied

    def test_report_fields(self, ghz):
        rep = pad.simulate(pad.ProtocolConfig(n=2, M=4, keys=(2,), trials=3, seed=2), ghz)
        assert rep.rate_bits == 1.0 and rep.key_rate_bits == 0.5
        assert rep.cqmi["AE"] == pytest.approx(1.0)
        s = rep.summary()
        assert s["eps_min"] <= s["eps_median"] <= s["eps_max"]
        for t in rep.trials:
            assert np.all((t.success >= 0) & (t.success <= 1))
            assert t.eps_avg <= t.eps_worst + 1e-15

    def test_workers_do_not_change_results(self, ghz):
        base = dict(n=2, M=2, keys=(4,), trials=6, seed=99)
        a = pad.simulate(pad.ProtocolConfig(**base), ghz)
        b = pad.simulate(pad.ProtocolConfig(**base, workers=4), ghz)
        for x, y in zip(a.trials, b.trials):
            assert x.seed == y.seed and np.array_equal(x.success, y.success)
            assert np.array_equal(x.deltas["AE"], y.deltas["AE"])

    def test_typical_decoder(self, ghz):
        rep = pad.simulate(pad.ProtocolConfig(n=2, M=2, keys=(2,), trials=3,
                                              decoder="pgm_typical", typical_delta=0.5), ghz)
        assert rep.converse_satisfied

    def test_compressed(self):
        rho = random_abe(16)
        rep = pad.simulate(pad.ProtocolConfig(n=3, M=2, keys=(2,), trials=2, seed=1,
                                              compress_delta=0.3), rho)
        assert rep.converse_satisfied
        full = pad.simulate(pad.ProtocolConfig(n=2, M=2, full_key=True, compress_delta=0.5), rho)
        assert np.all(full.delta <= 1e-12)

    def test_config_errors(self):
        with pytest.raises(ConfigError):
            pad.ProtocolConfig(n=1, M=0)
        with pytest.raises(ConfigError):
            pad.ProtocolConfig(n=1, M=2, security_subsets=(("E",), ("A", "E")))
        with pytest.raises(ConfigError):
            pad.ProtocolConfig(n=1, M=2, decoder="ml")

    def test_unknown_label(self, ghz):
        with pytest.raises(ConfigError):
            pad.simulate(pad.ProtocolConfig(n=1, M=2, security_subsets=(("F",),)), ghz)


def scrambling_state():
    psi = qcore.random_pure(Q(("A", 4), ("B", 2), ("E", 2), ("F", 2)), seed=0)
    return qcore.partial_trace(psi, ["A", "B", "E"])


class TestMultikey:
    def test_single_key_reduces(self, ghz):
        cfg = pad.ProtocolConfig(n=2, M=2, keys=(4,), trials=2, seed=3)
        a = pad.simulate(cfg, ghz)
        b = pad.simulate_multikey(cfg, ghz)
        for x, y in zip(a.trials, b.trials):
            assert np.array_equal(x.success, y.success)
            assert np.array_equal(x.deltas["AE"], y.deltas["AE"])

    def test_ghz_scrambling(self, ghz):
        cfg = pad.ProtocolConfig(n=2, M=2, keys=(2, 2), trials=2,
                                 security_subsets=(("B",), ("E",)))
        rep = pad.simulate_multikey(cfg, ghz)
        assert set(rep.trials[0].deltas) == {"AB", "AE"}
        assert entropic.neg_interaction_information(ghz, "A", "B", "E") == \
            pytest.approx(0, abs=1e-12)
        assert rep.converse_satisfied

    def test_random_state_fixture(self):
        rho = scrambling_state()
        assert entropic.neg_interaction_information(rho, "A", "B", "E") > 0.5
        med = {}
        for k in (1, 2, 4):
            cfg = pad.ProtocolConfig(n=2, M=2, keys=(k, k), trials=5, seed=3,
                                     security_subsets=(("B",), ("E",)))
            rep = pad.simulate_multikey(cfg, rho)
            assert rep.converse_satisfied
            med[k] = [np.median([t.deltas[s].max() for t in rep.trials]) for s in ("AB", "AE")]
        assert med[1][0] > med[2][0] > med[4][0]
        assert med[1][1] > med[2][1] > med[4][1]
        assert med[4] == pytest.approx([0.156807091655424, 0.14234995285395458], abs=1e-9)

    def test_key_count_mismatch(self, ghz):
        cfg = pad.ProtocolConfig(n=1, M=2, keys=(2, 2), security_subsets=(("E",),))
        with pytest.raises(ConfigError):
            pad.simulate_multikey(cfg, ghz)
