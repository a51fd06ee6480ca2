"""Autodiff, layer, optimizer, and checkpoint tests for the tensor core."""

import math

import numpy as np
import pytest

from deskrl import numkit as nk
from deskrl.numkit import ops

from gradcheck import check_grads

RNG = np.random.default_rng


class TestBackward:
    def test_sum_of_squares_analytic(self):
        w = nk.Parameter("w", [1.0, -2.0])
        loss = ops.sum(ops.mul(w.value, w.value))
        nk.backward(loss)
        np.testing.assert_array_equal(w.grad, [2.0, -4.0])

    def test_constant_loss_leaves_grads_zero(self):
        w = nk.Parameter("w", [1.0, 2.0])
        loss = nk.as_tensor(3.5)
        nk.backward(loss)
        np.testing.assert_array_equal(w.grad, [0.0, 0.0])

    def test_non_scalar_loss_rejected(self):
        w = nk.Parameter("w", [1.0, 2.0])
        with pytest.raises(nk.AutodiffError, match="scalar"):
            nk.backward(ops.mul(w.value, w.value))

    def test_nan_names_offending_op(self):
        w = nk.Parameter("w", [-1.0])
        loss = ops.sum(ops.log(w.value))
        with pytest.raises(nk.AutodiffError, match="log"):
            nk.backward(loss)

    def test_backward_twice_doubles_grads(self):
        rng = RNG(0)
        w = nk.Parameter("w", rng.normal(size=(3, 2)))

        def loss():
            return ops.sum(ops.tanh(ops.mul(w.value, w.value)))

        nk.backward(loss())
        once = w.grad.copy()
        nk.backward(loss())
        np.testing.assert_allclose(w.grad, 2.0 * once, rtol=0, atol=0)

    def test_diamond_graph_accumulates(self):
        # y = x*x reused twice: d/dx [x*x + x*x] = 4x
        x = nk.Parameter("x", [3.0])
        sq = ops.mul(x.value, x.value)
        loss = ops.sum(ops.add(sq, sq))
        nk.backward(loss)
        np.testing.assert_allclose(x.grad, [12.0])

    def test_no_grad_blocks_recording(self):
        w = nk.Parameter("w", [2.0])
        with nk.no_grad():
            y = ops.mul(w.value, w.value)
        assert not y.requires_grad
        nk.backward(ops.sum(ops.mul(w.value, 0.0)))
        np.testing.assert_array_equal(w.grad, [0.0])


class TestFiniteDifference:
    """Every differentiable primitive against the central-difference oracle."""

    def test_mlp_three_layers(self):
        rng = RNG(1)
        x = nk.as_tensor(rng.normal(size=(4, 5)))
        arrays = [
            rng.normal(size=(5, 8)) * 0.5,
            rng.normal(size=(8,)) * 0.1,
            rng.normal(size=(8, 6)) * 0.5,
            rng.normal(size=(6,)) * 0.1,
            rng.normal(size=(6, 1)) * 0.5,
            rng.normal(size=(1,)) * 0.1,
        ]

        def loss(ps):
            h1 = ops.relu(nk.linear(x, ps[0].value, ps[1].value))
            h2 = ops.tanh(nk.linear(h1, ps[2].value, ps[3].value))
            return ops.sum(nk.linear(h2, ps[4].value, ps[5].value))

        check_grads(loss, arrays)

    @pytest.mark.parametrize(
        "name,fn",
        [
            ("add", lambda a, b: ops.add(a, b)),
            ("sub", lambda a, b: ops.sub(a, b)),
            ("mul", lambda a, b: ops.mul(a, b)),
            ("div", lambda a, b: ops.div(a, ops.add(ops.mul(b, b), 0.5))),
            ("matmul", lambda a, b: ops.matmul(a, ops.reshape(b, (4, 3)))),
            ("minimum", lambda a, b: ops.minimum(a, b)),
            ("maximum", lambda a, b: ops.maximum(a, b)),
        ],
    )
    def test_binary_ops(self, name, fn):
        rng = RNG(hash(name) % 2**32)
        arrays = [rng.normal(size=(3, 4)), rng.normal(size=(3, 4))]

        def loss(ps):
            out = fn(ps[0].value, ps[1].value)
            return ops.sum(ops.mul(out, out))

        check_grads(loss, arrays)

    @pytest.mark.parametrize(
        "name,fn",
        [
            ("neg", ops.neg),
            ("relu", ops.relu),
            ("tanh", ops.tanh),
            ("exp", ops.exp),
            ("sqrt", lambda t: ops.sqrt(ops.add(ops.mul(t, t), 1.0))),
            ("log", lambda t: ops.log(ops.add(ops.mul(t, t), 1.0))),
            ("softplus", ops.softplus),
            ("atanh", lambda t: ops.atanh(ops.mul(ops.tanh(t), 0.9))),
            ("clip", lambda t: ops.clip(t, -0.5, 0.5)),
            ("mean_all", lambda t: ops.mean(t)),
            ("mean_axis", lambda t: ops.mean(t, axis=1)),
            ("sum_axis0", lambda t: ops.sum(t, axis=0)),
            ("sum_keepdims", lambda t: ops.sum(t, axis=1, keepdims=True)),
            ("reshape", lambda t: ops.reshape(t, (4, 3))),
            ("slice_cols", lambda t: ops.slice_cols(t, 1, 3)),
        ],
    )
    def test_unary_ops(self, name, fn):
        rng = RNG(hash(name) % 2**32)
        arrays = [rng.normal(size=(3, 4)) * 0.7]

        def loss(ps):
            out = fn(ps[0].value)
            return ops.sum(ops.mul(out, out))

        check_grads(loss, arrays)

    def test_relu_away_from_kink(self):
        # FD at the kink is meaningless; check on values bounded away from 0.
        arrays = [np.array([[1.0, -1.0, 0.5, -0.25]])]

        def loss(ps):
            return ops.sum(ops.relu(ps[0].value))

        check_grads(loss, arrays)

    def test_broadcast_add_bias(self):
        rng = RNG(7)
        x = nk.as_tensor(rng.normal(size=(5, 3)))
        arrays = [rng.normal(size=(3,))]

        def loss(ps):
            out = ops.add(x, ps[0].value)
            return ops.sum(ops.mul(out, out))

        check_grads(loss, arrays)

    def test_concat(self):
        rng = RNG(8)
        arrays = [rng.normal(size=(2, 3)), rng.normal(size=(2, 2))]

        def loss(ps):
            out = ops.concat([ps[0].value, ps[1].value], axis=1)
            return ops.sum(ops.mul(out, out))

        check_grads(loss, arrays)

    @pytest.mark.parametrize("stride,pad", [(1, 0), (1, 1), (2, 1)])
    def test_conv2d(self, stride, pad):
        rng = RNG(100 + stride * 10 + pad)
        arrays = [
            rng.normal(size=(2, 3, 5, 5)) * 0.5,
            rng.normal(size=(4, 3, 3, 3)) * 0.5,
            rng.normal(size=(4,)) * 0.1,
        ]

        def loss(ps):
            out = ops.conv2d(ps[0].value, ps[1].value, ps[2].value, stride=stride, pad=pad)
            return ops.sum(ops.mul(out, out))

        check_grads(loss, arrays)

    def test_group_norm_grad(self):
        rng = RNG(9)
        arrays = [
            rng.normal(size=(2, 4, 3, 3)),
            rng.normal(size=(4,)),
            rng.normal(size=(4,)),
        ]

        def loss(ps):
            out = nk.group_norm(ps[0].value, 2, ps[1].value, ps[2].value)
            return ops.sum(ops.mul(out, out))

        check_grads(loss, arrays)

    def test_tanh_gaussian_log_prob_grad(self):
        rng = RNG(10)
        action = np.tanh(rng.normal(size=(3, 2)))
        arrays = [rng.normal(size=(3, 2)) * 0.5, rng.normal(size=(3, 2)) * 0.3]

        def loss(ps):
            return ops.sum(nk.tanh_gaussian_log_prob(ps[0].value, ps[1].value, action))

        check_grads(loss, arrays)


class TestGroupNorm:
    def test_constant_input_maps_to_zero(self):
        x = np.full((2, 4, 3, 3), 7.0)
        out = nk.group_norm(x, 2, np.ones(4), np.zeros(4))
        np.testing.assert_allclose(out.data, 0.0, atol=1e-12)

    def test_zero_gain_gives_bias(self):
        rng = RNG(11)
        x = rng.normal(size=(2, 4, 3, 3))
        bias = np.array([1.0, -2.0, 0.5, 3.0])
        out = nk.group_norm(x, 4, np.zeros(4), bias)
        np.testing.assert_allclose(out.data, np.broadcast_to(bias[None, :, None, None], x.shape))

    def test_per_group_statistics(self):
        rng = RNG(12)
        x = rng.normal(size=(3, 8, 4, 4)) * 5.0 + 2.0
        out = nk.group_norm(x, 4, np.ones(8), np.zeros(8)).data
        grouped = out.reshape(3, 4, 2 * 16)
        np.testing.assert_allclose(grouped.mean(axis=2), 0.0, atol=1e-10)
        np.testing.assert_allclose(grouped.var(axis=2), 1.0, atol=1e-4)

    def test_affine_input_invariance_within_group(self):
        # Variance must dominate the 1e-5 epsilon for invariance at 1e-8.
        rng = RNG(13)
        x = rng.normal(size=(2, 4, 5, 5)) * 100.0
        a = nk.group_norm(x, 2, np.ones(4), np.zeros(4)).data
        b = nk.group_norm(3.0 * x + 11.0, 2, np.ones(4), np.zeros(4)).data
        np.testing.assert_allclose(a, b, atol=1e-8)

    def test_indivisible_groups_rejected(self):
        with pytest.raises(nk.AutodiffError, match="groups"):
            nk.group_norm(np.zeros((1, 6, 2, 2)), 4, np.ones(6), np.zeros(6))


class TestTanhGaussianLogProb:
    def test_standard_normal_at_zero(self):
        lp = nk.tanh_gaussian_log_prob(np.zeros((1, 1)), np.zeros((1, 1)), np.zeros((1, 1)))
        assert lp.data[0] == pytest.approx(-0.5 * math.log(2 * math.pi), abs=1e-12)

    def test_translation_symmetry(self):
        rng = RNG(14)
        u = rng.normal(size=(4, 3))
        mean = rng.normal(size=(4, 3))
        shift = 0.37
        a = nk.log_prob_from_pre_tanh(nk.as_tensor(mean), nk.as_tensor(np.zeros((4, 3))), nk.as_tensor(u))
        b = nk.log_prob_from_pre_tanh(
            nk.as_tensor(mean + shift), nk.as_tensor(np.zeros((4, 3))), nk.as_tensor(u + shift)
        )
        # Gaussian term is shift invariant; only the tanh correction differs.
        corr_a = 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u)).sum(axis=1)
        corr_b = 2.0 * (math.log(2.0) - (u + shift) - np.logaddexp(0.0, -2.0 * (u + shift))).sum(axis=1)
        np.testing.assert_allclose(a.data + corr_a, b.data + corr_b, atol=1e-10)

    def test_two_dim_closed_form(self):
        # mean 0, log_std 0, action (tanh 1, tanh -1)
        action = np.array([[math.tanh(1.0), math.tanh(-1.0)]])
        expected = (
            2.0 * (-0.5 * math.log(2 * math.pi) - 0.5)
            - math.log(1.0 - math.tanh(1.0) ** 2)
            - math.log(1.0 - math.tanh(-1.0) ** 2)
        )
        lp = nk.tanh_gaussian_log_prob(np.zeros((1, 2)), np.zeros((1, 2)), action)
        assert lp.data[0] == pytest.approx(expected, rel=1e-12)

    def test_out_of_range_action_rejected(self):
        with pytest.raises(nk.AutodiffError, match="clip upstream"):
            nk.tanh_gaussian_log_prob(np.zeros((1, 1)), np.zeros((1, 1)), np.array([[1.0]]))


class TestAdam:
    def test_first_step_is_signed_lr(self):
        rng = RNG(15)
        p = nk.Parameter("w", rng.normal(size=(4,)))
        before = p.value.data.copy()
        g = np.array([0.5, -2.0, 1e-3, -1e-4])
        p.value.grad[:] = g
        state = nk.AdamState(eps=1e-12)
        nk.adam_step([p], state, 0.01)
        np.testing.assert_allclose(p.value.data, before - 0.01 * np.sign(g), atol=1e-8)
        assert state.step == 1

    def test_zero_grad_is_identity_from_fresh_state(self):
        p = nk.Parameter("w", [1.0, 2.0])
        before = p.value.data.copy()
        nk.adam_step([p], nk.AdamState(), 0.1)
        np.testing.assert_array_equal(p.value.data, before)

    def test_two_steps_descend_quadratic(self):
        # f(w) = w^2 from w=1 with lr=0.1: the hand-run update moves toward 0 twice.
        p = nk.Parameter("w", [1.0])
        state = nk.AdamState()
        values = [p.value.data[0]]
        for _ in range(2):
            p.zero_grad()
            loss = ops.sum(ops.mul(p.value, p.value))
            nk.backward(loss)
            nk.adam_step([p], state, 0.1)
            values.append(p.value.data[0])
        assert values[1] < values[0]
        assert values[2] < values[1]

    def test_lr_zero_is_identity(self):
        p = nk.Parameter("w", [3.0])
        p.value.grad[:] = 1.0
        nk.adam_step([p], nk.AdamState(), 0.0)
        np.testing.assert_array_equal(p.value.data, [3.0])

    def test_shape_mismatch_rejected(self):
        p = nk.Parameter("w", [1.0, 2.0])
        p.value.grad = np.zeros((3,))
        with pytest.raises(nk.OptimError, match="shape"):
            nk.adam_step([p], nk.AdamState(), 0.1)


class TestCheckpoint:
    def test_bit_exact_round_trip(self, tmp_path):
        rng = RNG(16)
        arrays = {
            "enc/w0": rng.normal(size=(4, 3)),
            "enc/b0": rng.normal(size=(3,)),
            "scalar": np.array(0.1 + 0.2),
        }
        path = tmp_path / "params.ckpt"
        nk.save_archive(path, arrays, {"step": 12, "config_hash": "abc123"})
        loaded, meta = nk.load_archive(path)
        assert meta == {"step": "12", "config_hash": "abc123"}
        assert set(loaded) == set(arrays)
        for name in arrays:
            assert loaded[name].tobytes() == arrays[name].tobytes()

    def test_save_load_save_identical_bytes(self, tmp_path):
        rng = RNG(17)
        arrays = {"w": rng.normal(size=(5, 5))}
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        nk.save_archive(p1, arrays, {"step": 0})
        loaded, meta = nk.load_archive(p1)
        nk.save_archive(p2, loaded, meta)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_rejected(self, tmp_path):
        path = tmp_path / "params.ckpt"
        nk.save_archive(path, {"w": np.ones((8, 8))}, {"step": 1})
        data = path.read_bytes()
        path.write_bytes(data[: len(data) - 16])
        with pytest.raises(nk.CheckpointError, match="truncated"):
            nk.load_archive(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "params.ckpt"
        path.write_bytes(b"not a checkpoint")
        with pytest.raises(nk.CheckpointError, match="magic"):
            nk.load_archive(path)
