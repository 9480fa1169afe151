import numpy as np
import pytest

from ancrelay.channel import ChannelRealization, modulate_bpsk, uplink_superpose
from ancrelay.jointbp import (JointDecoder, chk_update, clamp_user, decode,
                              hard_decide, hard_decisions, init_evidence,
                              pair_convolve, relay_mmse_output, var_update, _WHT)
from ancrelay.ldpc import build_gallager, derive_generator, encode, syndrome
from ancrelay.metrics import relay_mse

from conftest import (binary_sumproduct_beliefs, brute_force_pair_posterior,
                      make_matrix, random_tree_matrix)


def random_packet(H, rng, h13, h23, sigma2):
    G = derive_generator(H)
    x1 = encode(G, rng.integers(0, 2, G.info_len, dtype=np.uint8))
    x2 = encode(G, rng.integers(0, 2, G.info_len, dtype=np.uint8))
    a1, a2 = modulate_bpsk(x1), modulate_bpsk(x2)
    ch = ChannelRealization(h13, h23, sigma2)
    r = uplink_superpose(a1, a2, ch, rng)
    return x1, x2, a1, a2, ch, r


class TestEvidence:
    def test_point_mass_at_near_zero_noise(self):
        p = init_evidence(2.0 + 0j, 1.0, 1.0, 1e-12)
        assert np.allclose(p, [1, 0, 0, 0])

    def test_symmetry_at_zero_received(self):
        p = init_evidence(0j, 1.0, 1.0, 0.7)
        assert p[1] == p[2]
        assert p[0] == p[3]

    def test_distances_case(self):
        # constellation 1.5, 0.5, -0.5, -1.5; r = 1.5 gives squared
        # distances 0, 1, 4, 9
        p = init_evidence(1.5 + 0j, 1.0, 0.5, 1.0)
        expect = np.exp(-np.array([0.0, 1.0, 4.0, 9.0]))
        expect /= expect.sum()
        assert np.allclose(p, expect, atol=1e-12)

    def test_requires_positive_sigma2(self):
        with pytest.raises(ValueError):
            init_evidence(0j, 1.0, 1.0, 0.0)

    def test_packet_shape(self):
        p = init_evidence(np.zeros(5, dtype=complex), 1.0, 0.5, 1.0)
        assert p.shape == (5, 4)
        assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)


class TestVarUpdate:
    def test_uniform_is_identity(self):
        p = np.array([0.4, 0.3, 0.2, 0.1])
        assert np.allclose(var_update([p, np.full(4, 0.25)]), p)

    def test_product_example(self):
        out = var_update([np.array([0.5, 0.5, 0, 0]), np.array([0.5, 0, 0.5, 0])])
        assert np.allclose(out, [1, 0, 0, 0])

    def test_single_input_passthrough(self):
        p = np.array([0.1, 0.2, 0.3, 0.4])
        assert np.allclose(var_update([p]), p)

    def test_contradiction_returns_uniform(self):
        out = var_update([np.array([1.0, 0, 0, 0]), np.array([0, 0, 0, 1.0])])
        assert np.allclose(out, 0.25)


class TestChkUpdate:
    def test_point_mass_identity(self):
        q = np.array([0.4, 0.3, 0.2, 0.1])
        assert np.allclose(chk_update([np.array([1.0, 0, 0, 0]), q]), q)

    def test_pairwise_example(self):
        p = np.array([0.7, 0.3, 0.0, 0.0])
        assert np.allclose(chk_update([p, p]), [0.58, 0.42, 0, 0], atol=1e-12)

    def test_uniform_absorbs(self):
        q = np.array([0.05, 0.15, 0.3, 0.5])
        assert np.allclose(chk_update([np.full(4, 0.25), q]), 0.25, atol=1e-15)

    def test_kernel_commutative_associative(self):
        rng = np.random.default_rng(42)
        msgs = rng.random((10_000, 3, 4))
        msgs /= msgs.sum(axis=2, keepdims=True)
        for p, q, s in msgs:
            a = pair_convolve(pair_convolve(p, q), s)
            b = pair_convolve(p, pair_convolve(q, s))
            c = pair_convolve(pair_convolve(q, s), p)
            assert np.max(np.abs(a - b)) < 1e-12
            assert np.max(np.abs(a - c)) < 1e-12

    def test_transform_route_matches_direct_fold(self):
        # the decoder's Walsh-Hadamard route and the pairwise fold must agree
        rng = np.random.default_rng(3)
        msgs = rng.random((500, 3, 4))
        msgs /= msgs.sum(axis=2, keepdims=True)
        for triple in msgs:
            direct = chk_update(list(triple))
            transformed = np.prod(triple @ _WHT, axis=0) @ _WHT / 4.0
            assert np.max(np.abs(direct - transformed)) < 1e-12

    def test_output_normalized(self):
        rng = np.random.default_rng(5)
        p, q = rng.random((2, 4))
        p /= p.sum()
        q /= q.sum()
        assert chk_update([p, q]).sum() == pytest.approx(1.0, abs=1e-12)


class TestHardDecide:
    def test_examples(self):
        assert hard_decide(np.array([0.6, 0.2, 0.1, 0.1])) == (0, 0)
        assert hard_decide(np.array([0.25, 0.25, 0.25, 0.25])) == (0, 0)
        assert hard_decide(np.array([0.0, 0.0, 0.0, 1.0])) == (1, 1)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(8)
        b = rng.random((64, 4))
        b /= b.sum(axis=1, keepdims=True)
        h1, h2 = hard_decisions(b)
        for k in range(64):
            assert (h1[k], h2[k]) == hard_decide(b[k])


class TestClampUser:
    def test_mass_folding_example(self):
        out = clamp_user(np.array([0.4, 0.1, 0.3, 0.2]), 1, 0)
        assert np.allclose(out, [0.7, 0.3, 0, 0])

    def test_idempotent(self):
        m = np.array([0.7, 0.3, 0.0, 0.0])
        assert np.allclose(clamp_user(m, 1, 0), m)

    def test_both_users_gives_point_mass(self):
        m = np.array([0.4, 0.1, 0.3, 0.2])
        out = clamp_user(clamp_user(m, 1, 1), 2, 0)
        assert np.allclose(out, [0, 0, 1, 0])

    def test_user2_preserves_user1_marginal(self):
        m = np.array([0.4, 0.1, 0.3, 0.2])
        out = clamp_user(m, 2, 1)
        assert out[0] + out[1] == pytest.approx(0.5)
        assert np.allclose(out, [0, 0.5, 0, 0.5])

    def test_rejects_bad_user(self):
        with pytest.raises(ValueError):
            clamp_user(np.full(4, 0.25), 3, 0)


class TestRelayOutput:
    def test_point_mass(self):
        assert relay_mmse_output(np.array([[1.0, 0, 0, 0]]), 1, 1)[0] == 2
    def test_uniform_is_zero(self):
        out = relay_mmse_output(np.full((1, 4), 0.25), 0.3 + 1j, -2.0)
        assert abs(out[0]) < 1e-15
    def test_ambiguous_pair_cancels(self):
        out = relay_mmse_output(np.array([[0, 0.5, 0.5, 0]]), 1, 1)
        assert abs(out[0]) < 1e-15


class TestDecode:
    def test_zero_noise_distinct_gains(self):
        rng = np.random.default_rng(6)
        H = build_gallager(48, 3, 6, rng)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 1.0, 0.5, 1e-18)
        res = decode(H, r, ch)
        assert res.decoded1 and res.decoded2
        assert res.iterations == 1
        assert np.array_equal(res.hard1, x1)
        assert np.array_equal(res.hard2, x2)
        assert relay_mse(res.relay_out, a1, a2, 1.0, 0.5) < 1e-12

    def test_zero_noise_symmetric_gains_mse(self):
        # pairs (0,1)/(1,0) are indistinguishable but their broadcast value
        # coincides at 0, so the relay estimate is still exact
        rng = np.random.default_rng(16)
        H = build_gallager(48, 3, 6, rng)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 1.0, 1.0, 1e-18)
        res = decode(H, r, ch)
        assert relay_mse(res.relay_out, a1, a2, 1.0, 1.0) < 1e-12

    def test_repeat_code_equals_pair_evidence_product(self):
        rng = np.random.default_rng(9)
        H = build_gallager(40, 1, 2, rng)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 1.0, 0.7, 0.8)
        res = decode(H, r, ch)
        assert res.iterations == 1  # pair beliefs always agree, syndromes pass
        ev = init_evidence(r, ch.h13, ch.h23, ch.sigma2)
        for g in range(20):
            prod = ev[2 * g] * ev[2 * g + 1]
            prod /= prod.sum()
            assert np.max(np.abs(res.beliefs[2 * g] - prod)) < 1e-12
            assert np.max(np.abs(res.beliefs[2 * g + 1] - prod)) < 1e-12

    def test_tree_matches_enumeration(self):
        rng = np.random.default_rng(21)
        H = random_tree_matrix(rng, n_max=10)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 1.0, 0.6 + 0.3j, 0.9)
        ev = init_evidence(r, ch.h13, ch.h23, ch.sigma2)
        res = decode(H, r, ch, max_iters=H.n + H.m + 2, stop_and_clamp=False)
        oracle = brute_force_pair_posterior(H, ev)
        assert np.max(np.abs(res.beliefs - oracle)) < 1e-9

    def test_single_user_reduces_to_binary_sumproduct(self):
        # h23 = 0 factorizes the evidence; user 1's marginal trajectory must
        # match a plain binary decoder of the same H, iteration by iteration
        rng = np.random.default_rng(30)
        H = build_gallager(16, 2, 4, rng)
        a1 = modulate_bpsk(rng.integers(0, 2, 16))
        sigma2 = 0.9
        r = a1 + np.sqrt(sigma2 / 2) * (rng.standard_normal(16)
                                        + 1j * rng.standard_normal(16))
        ev = init_evidence(r, 1.0, 0.0, sigma2)
        dec = JointDecoder(H, ev, stop_and_clamp=False)
        bin_ev = np.stack([np.exp(-np.abs(r - 1.0) ** 2 / sigma2),
                           np.exp(-np.abs(r + 1.0) ** 2 / sigma2)], axis=1)
        bin_ev /= bin_ev.sum(axis=1, keepdims=True)
        reference = binary_sumproduct_beliefs(H, bin_ev, 8)
        for it in range(8):
            dec.sweep()
            b = dec.beliefs()
            marg1 = np.stack([b[:, 0] + b[:, 1], b[:, 2] + b[:, 3]], axis=1)
            assert np.max(np.abs(marg1 - reference[it])) < 1e-9

    def test_clamp_stability_over_further_sweeps(self):
        rng = np.random.default_rng(14)
        H = build_gallager(120, 3, 6, rng)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 1.0, 0.55 + 0.4j, 0.35)
        ev = init_evidence(r, ch.h13, ch.h23, ch.sigma2)
        dec = JointDecoder(H, ev)
        clamped = None
        for _ in range(20):
            dec.sweep()
            hard1, hard2 = hard_decisions(dec.beliefs())
            if not syndrome(H, hard1).any():
                dec.clamp(1, hard1)
                clamped = hard1
                break
        assert clamped is not None, "expected user 1 to decode at this SNR"
        for _ in range(10):
            dec.sweep()
            h1, _ = hard_decisions(dec.beliefs())
            assert np.array_equal(h1, clamped)
            assert not syndrome(H, h1).any()

    def test_messages_normalized_after_every_sweep(self):
        rng = np.random.default_rng(33)
        H = build_gallager(64, 2, 4, rng)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 1.0, 1.0, 1.3)
        dec = JointDecoder(H, init_evidence(r, 1.0, 1.0, 1.3))
        for _ in range(10):
            dec.sweep()
            b = dec.beliefs()
            for arr in (dec.v2c, dec.c2v, b):
                assert np.max(np.abs(arr.sum(axis=-1) - 1.0)) < 1e-12
                assert arr.min() >= 0.0

    def test_contradiction_counter(self):
        H = make_matrix([[0, 1]], 2)
        ev = np.array([[1.0, 0, 0, 0], [0, 0, 0, 1.0]])
        dec = JointDecoder(H, ev, stop_and_clamp=False)
        dec.sweep()
        b = dec.beliefs()
        assert dec.contradictions > 0
        assert np.allclose(b, 0.25)

    def test_broadcast_coefficients_default_to_uplink(self):
        rng = np.random.default_rng(17)
        H = build_gallager(24, 1, 2, rng)
        x1, x2, a1, a2, ch, r = random_packet(H, rng, 0.9, 0.4, 0.5)
        res = decode(H, r, ch)
        manual = relay_mmse_output(res.beliefs, 0.9, 0.4)
        assert np.allclose(res.relay_out, manual)
        res2 = decode(H, r, ch, broadcast=(1.0, 1.0))
        assert not np.allclose(res2.relay_out, res.relay_out)

    def test_max_iters_validation(self):
        H = make_matrix([[0, 1]], 2)
        with pytest.raises(ValueError):
            decode(H, np.zeros(2, dtype=complex),
                   ChannelRealization(1.0, 1.0, 1.0), max_iters=0)
