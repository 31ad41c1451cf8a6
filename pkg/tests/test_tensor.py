"""Gradient checks for the autodiff core against central finite differences."""

import numpy as np
import pytest

from clausekit import nn
from clausekit.nn import tensor as T


def numeric_grad(fn, arrays, index, h=1e-5):
    """Central-difference gradient of scalar fn w.r.t. arrays[index]."""
    base = [a.copy() for a in arrays]
    grad = np.zeros_like(base[index])
    flat = grad.reshape(-1)
    src = base[index].reshape(-1)
    for i in range(flat.size):
        orig = src[i]
        src[i] = orig + h
        up = fn(*base)
        src[i] = orig - h
        down = fn(*base)
        src[i] = orig
        flat[i] = (up - down) / (2.0 * h)
    return grad


def check_gradients(build, arrays, tol=1e-6):
    """build(tensors) -> scalar Tensor; compares autodiff grads to numeric ones."""
    tensors = [nn.parameter(a, dtype=np.float64) for a in arrays]
    loss = build(*tensors)
    loss.backward()

    def scalar_fn(*raw):
        fresh = [nn.parameter(a, dtype=np.float64) for a in raw]
        return build(*fresh).item()

    for idx, t in enumerate(tensors):
        num = numeric_grad(scalar_fn, arrays, idx)
        denom = np.maximum(np.abs(t.grad) + np.abs(num), 1e-8)
        rel = np.abs(t.grad - num) / denom
        assert rel.max() < tol, f"arg {idx}: max rel err {rel.max():.3e}"


class TestElementwiseOps:
    def test_add_broadcast_gradients(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(3,))
        check_gradients(lambda x, y: nn.tensor_sum(nn.mul(nn.add(x, y), nn.add(x, y))), [a, b])

    def test_mul_gradients(self):
        rng = np.random.default_rng(1)
        a = rng.normal(size=(5, 2))
        b = rng.normal(size=(5, 2))
        check_gradients(lambda x, y: nn.tensor_sum(nn.mul(x, y)), [a, b])

    def test_relu_gradients_away_from_kink(self):
        rng = np.random.default_rng(2)
        a = rng.normal(size=(6, 4))
        a[np.abs(a) < 0.1] += 0.2
        check_gradients(lambda x: nn.tensor_sum(nn.relu(x)), [a])

    def test_sigmoid_gradients(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(3, 3))
        check_gradients(lambda x: nn.tensor_sum(nn.sigmoid(x)), [a])

    def test_sigmoid_extreme_inputs_no_overflow(self):
        x = nn.as_tensor(np.array([-800.0, 0.0, 800.0]))
        out = nn.sigmoid(x)
        np.testing.assert_allclose(out.data, [0.0, 0.5, 1.0], atol=1e-12)

    def test_mean_and_scale_gradients(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(7,))
        check_gradients(lambda x: nn.scale(nn.tensor_mean(nn.mul(x, x)), 3.0), [a])


class TestMatmul:
    def test_matmul_gradients(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(4, 3))
        b = rng.normal(size=(3, 5))
        check_gradients(lambda x, y: nn.tensor_sum(nn.matmul(x, y)), [a, b])

    def test_batched_matmul_gradients(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=(2, 4, 3))
        b = rng.normal(size=(2, 3, 5))
        check_gradients(lambda x, y: nn.tensor_sum(nn.matmul(x, y)), [a, b])

    def test_broadcast_matmul_gradients(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(2, 4, 3))
        b = rng.normal(size=(3, 5))
        check_gradients(lambda x, y: nn.tensor_sum(nn.matmul(x, y)), [a, b])

    def test_shape_mismatch_raises(self):
        a = nn.as_tensor(np.zeros((2, 3)))
        b = nn.as_tensor(np.zeros((4, 2)))
        with pytest.raises(nn.NNError):
            nn.matmul(a, b)


class TestNormalizationAndSoftmax:
    def test_softmax_gradients(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=(3, 5))
        w = rng.normal(size=(3, 5))

        def build(x):
            return nn.tensor_sum(nn.mul(nn.softmax(x), nn.as_tensor(w)))

        check_gradients(build, [a])

    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(9)
        s = nn.softmax(nn.as_tensor(rng.normal(size=(4, 6)))).data
        np.testing.assert_allclose(s.sum(axis=-1), np.ones(4), atol=1e-12)

    def test_layer_norm_gradients(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=(3, 6))
        gamma = rng.normal(size=(6,))
        beta = rng.normal(size=(6,))
        w = rng.normal(size=(3, 6))

        def build(xi, g, b):
            return nn.tensor_sum(nn.mul(nn.layer_norm(xi, g, b), nn.as_tensor(w)))

        check_gradients(build, [x, gamma, beta], tol=1e-5)

    def test_layer_norm_output_standardized(self):
        rng = np.random.default_rng(11)
        x = nn.as_tensor(rng.normal(size=(5, 8)) * 4 + 2)
        gamma = nn.as_tensor(np.ones(8))
        beta = nn.as_tensor(np.zeros(8))
        out = nn.layer_norm(x, gamma, beta).data
        np.testing.assert_allclose(out.mean(axis=-1), np.zeros(5), atol=1e-10)
        np.testing.assert_allclose(out.var(axis=-1), np.ones(5), atol=1e-4)


class TestStructuralOps:
    def test_reshape_transpose_gradients(self):
        rng = np.random.default_rng(12)
        a = rng.normal(size=(2, 3, 4))
        w = rng.normal(size=(3, 2, 4))

        def build(x):
            # transpose then flatten through a weighted sum keeps every element used once
            t = nn.transpose(x, (1, 0, 2))
            return nn.tensor_sum(nn.mul(t, nn.as_tensor(w)))

        check_gradients(build, [a])

    def test_embedding_lookup_gradients(self):
        rng = np.random.default_rng(13)
        table = rng.normal(size=(7, 4))
        ids = np.array([[0, 3, 3], [6, 1, 0]])
        w = rng.normal(size=(2, 3, 4))

        def build(tbl):
            return nn.tensor_sum(nn.mul(nn.embedding_lookup(tbl, ids), nn.as_tensor(w)))

        check_gradients(build, [table])

    def test_embedding_out_of_range_raises(self):
        table = nn.parameter(np.zeros((3, 2)))
        with pytest.raises(nn.NNError):
            nn.embedding_lookup(table, np.array([0, 3]))


class TestAttention:
    def test_attention_gradients(self):
        rng = np.random.default_rng(14)
        q = rng.normal(size=(2, 3, 8))
        k = rng.normal(size=(2, 4, 8))
        v = rng.normal(size=(2, 4, 8))

        def build(qi, ki, vi):
            return nn.tensor_sum(nn.multi_head_attention(qi, ki, vi, heads=2))

        check_gradients(build, [q, k, v], tol=1e-5)

    def test_causal_attention_gradients(self):
        rng = np.random.default_rng(15)
        q = rng.normal(size=(1, 4, 6))
        k = rng.normal(size=(1, 4, 6))
        v = rng.normal(size=(1, 4, 6))

        def build(qi, ki, vi):
            return nn.tensor_sum(nn.multi_head_attention(qi, ki, vi, heads=3, causal=True))

        check_gradients(build, [q, k, v], tol=1e-5)

    def test_causal_mask_blocks_future(self):
        rng = np.random.default_rng(16)
        q = nn.as_tensor(rng.normal(size=(1, 5, 4)))
        k = nn.as_tensor(rng.normal(size=(1, 5, 4)))
        v1 = rng.normal(size=(1, 5, 4))
        v2 = v1.copy()
        v2[0, 3:, :] += 100.0  # only positions >= 3 change
        out1 = nn.multi_head_attention(q, k, nn.as_tensor(v1), heads=1, causal=True).data
        out2 = nn.multi_head_attention(q, k, nn.as_tensor(v2), heads=1, causal=True).data
        np.testing.assert_allclose(out1[0, :3], out2[0, :3], atol=1e-12)
        assert np.abs(out1[0, 3:] - out2[0, 3:]).max() > 1.0


class TestLosses:
    def test_bce_matches_reference_value(self):
        logits = np.array([0.0, 2.0, -1.0])
        targets = np.array([1.0, 0.0, 1.0])
        p = 1.0 / (1.0 + np.exp(-logits))
        expected = -np.mean(targets * np.log(p) + (1 - targets) * np.log(1 - p))
        loss = nn.bce_with_logits(nn.as_tensor(logits), nn.as_tensor(targets))
        np.testing.assert_allclose(loss.item(), expected, rtol=1e-12)

    def test_bce_gradients(self):
        rng = np.random.default_rng(17)
        logits = rng.normal(size=(6,))
        targets = (rng.random(6) > 0.5).astype(np.float64)

        def build(z):
            return nn.bce_with_logits(z, nn.as_tensor(targets))

        check_gradients(build, [logits])

    def test_bce_extreme_logits_finite(self):
        logits = nn.parameter(np.array([500.0, -500.0]), dtype=np.float64)
        targets = nn.as_tensor(np.array([0.0, 1.0]))
        loss = nn.bce_with_logits(logits, targets)
        assert np.isfinite(loss.item())
        loss.backward()
        assert np.all(np.isfinite(logits.grad))

    def test_cross_entropy_matches_reference_value(self):
        logits = np.array([[2.0, 0.5, -1.0], [0.0, 0.0, 0.0]])
        targets = np.array([0, 2])
        shifted = logits - logits.max(axis=1, keepdims=True)
        logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        expected = -(logp[0, 0] + logp[1, 2]) / 2.0
        loss = nn.cross_entropy_with_logits(nn.as_tensor(logits), targets)
        np.testing.assert_allclose(loss.item(), expected, rtol=1e-12)

    def test_cross_entropy_gradients(self):
        rng = np.random.default_rng(18)
        logits = rng.normal(size=(5, 7))
        targets = rng.integers(0, 7, size=5)

        def build(z):
            return nn.cross_entropy_with_logits(z, targets)

        check_gradients(build, [logits])

    def test_cross_entropy_ignores_padding_positions(self):
        rng = np.random.default_rng(19)
        logits = rng.normal(size=(4, 5))
        targets = np.array([1, 0, 2, 0])
        # with ignore_id=0 only rows 0 and 2 contribute
        loss_masked = nn.cross_entropy_with_logits(nn.as_tensor(logits), targets, ignore_id=0)
        loss_manual = nn.cross_entropy_with_logits(
            nn.as_tensor(logits[[0, 2]]), targets[[0, 2]]
        )
        np.testing.assert_allclose(loss_masked.item(), loss_manual.item(), rtol=1e-12)

    def test_cross_entropy_ignore_id_gradients(self):
        rng = np.random.default_rng(20)
        logits = rng.normal(size=(6, 4))
        targets = np.array([0, 1, 2, 0, 3, 1])

        def build(z):
            return nn.cross_entropy_with_logits(z, targets, ignore_id=0)

        check_gradients(build, [logits])


class TestDropoutAndGradMode:
    def test_dropout_eval_is_identity(self):
        rng = np.random.default_rng(21)
        x = nn.as_tensor(rng.normal(size=(10, 10)))
        out = nn.dropout(x, 0.5, training=False)
        np.testing.assert_array_equal(out.data, x.data)

    def test_dropout_training_scales_survivors(self):
        rng = np.random.default_rng(22)
        x = nn.parameter(np.ones((2000,)), dtype=np.float64)
        out = nn.dropout(x, 0.25, rng=np.random.default_rng(0), training=True)
        kept = out.data != 0
        np.testing.assert_allclose(out.data[kept], 1.0 / 0.75)
        assert abs(kept.mean() - 0.75) < 0.05
        nn.tensor_sum(out).backward()
        np.testing.assert_allclose(x.grad[kept], 1.0 / 0.75)
        np.testing.assert_allclose(x.grad[~kept], 0.0)

    def test_no_grad_blocks_graph_recording(self):
        x = nn.parameter(np.ones(3))
        with nn.no_grad():
            y = nn.tensor_sum(nn.mul(x, x))
        with pytest.raises(nn.NNError):
            y.backward()

    def test_backward_requires_scalar(self):
        x = nn.parameter(np.ones((2, 2)))
        y = nn.mul(x, x)
        with pytest.raises(nn.NNError):
            y.backward()

    def test_grad_accumulates_across_backward_calls(self):
        x = nn.parameter(np.array([2.0]), dtype=np.float64)
        nn.tensor_sum(nn.mul(x, x)).backward()
        first = x.grad.copy()
        nn.tensor_sum(nn.mul(x, x)).backward()
        np.testing.assert_allclose(x.grad, 2 * first)

    def test_diamond_graph_gradient(self):
        # y = x*x + x*x reuses x twice on both paths: dy/dx = 4x
        x = nn.parameter(np.array([3.0]), dtype=np.float64)
        sq = nn.mul(x, x)
        nn.tensor_sum(nn.add(sq, sq)).backward()
        np.testing.assert_allclose(x.grad, [12.0])


class TestLayersAndOptim:
    def test_linear_shapes_and_gradients(self):
        rng = np.random.default_rng(23)
        layer = nn.Linear(4, 3, rng, dtype=np.float64)
        x = nn.parameter(rng.normal(size=(5, 4)), dtype=np.float64)
        out = layer(x)
        assert out.data.shape == (5, 3)
        nn.tensor_sum(out).backward()
        assert layer.weight.grad.shape == (4, 3)
        assert layer.bias.grad.shape == (3,)
        np.testing.assert_allclose(layer.bias.grad, np.full(3, 5.0))

    def test_mlp_parameter_collection(self):
        rng = np.random.default_rng(24)
        mlp = nn.MLP([8, 16, 4, 1], dropout_p=0.3, rng=rng)
        assert len(mlp.parameters()) == 6  # three layers x (weight, bias)
        names = [n for n, _ in mlp.named_parameters()]
        assert "layers.0.weight" in names and "layers.2.bias" in names

    def test_state_roundtrip(self):
        rng = np.random.default_rng(25)
        a = nn.MLP([4, 6, 2], dropout_p=0.0, rng=rng)
        b = nn.MLP([4, 6, 2], dropout_p=0.0, rng=np.random.default_rng(99))
        b.load_state_arrays(a.state_arrays())
        x = nn.as_tensor(np.random.default_rng(1).normal(size=(3, 4)).astype(np.float32))
        np.testing.assert_array_equal(a(x).data, b(x).data)

    def test_state_shape_mismatch_raises(self):
        rng = np.random.default_rng(26)
        a = nn.MLP([4, 6, 2], dropout_p=0.0, rng=rng)
        b = nn.MLP([4, 8, 2], dropout_p=0.0, rng=rng)
        with pytest.raises(nn.NNError):
            b.load_state_arrays(a.state_arrays())

    def test_adam_reduces_quadratic_loss(self):
        x = nn.parameter(np.array([5.0, -3.0]), dtype=np.float64)
        opt = nn.Adam([x], lr=0.1)
        for _ in range(200):
            loss = nn.tensor_sum(nn.mul(x, x))
            loss.backward()
            opt.step()
        assert np.abs(x.data).max() < 1e-2

    def test_adam_clears_gradients_after_step(self):
        x = nn.parameter(np.array([1.0]), dtype=np.float64)
        opt = nn.Adam([x], lr=0.1)
        nn.tensor_sum(nn.mul(x, x)).backward()
        opt.step()
        assert x.grad is None

    def test_adam_skips_params_without_grads(self):
        x = nn.parameter(np.array([1.0]), dtype=np.float64)
        opt = nn.Adam([x], lr=0.1)
        before = x.data.copy()
        opt.step()
        np.testing.assert_array_equal(x.data, before)

    def test_mha_layer_gradcheck(self):
        rng = np.random.default_rng(27)
        layer = nn.MultiHeadAttention(6, 2, rng, dtype=np.float64)
        x = rng.normal(size=(1, 3, 6))

        def build(xi):
            return nn.tensor_sum(layer(xi, xi, xi, causal=True))

        check_gradients(build, [x], tol=1e-5)


class TestModelArtifacts:
    def test_save_load_roundtrip(self, tmp_path):
        rng = np.random.default_rng(28)
        params = {"w": rng.normal(size=(3, 4)).astype(np.float32), "b": np.zeros(4, dtype=np.float32)}
        path = tmp_path / "model.json"
        nn.save_model(path, "test-kind", {"dim": 4}, params, "fp123", extra={"note": 1})
        loaded = nn.load_model(path, expected_kind="test-kind")
        assert loaded["config"] == {"dim": 4}
        assert loaded["encoder_fingerprint"] == "fp123"
        assert loaded["extra"] == {"note": 1}
        np.testing.assert_array_equal(loaded["params"]["w"], params["w"])
        assert loaded["params"]["b"].dtype == np.float32

    def test_load_wrong_kind_raises(self, tmp_path):
        path = tmp_path / "model.json"
        nn.save_model(path, "kind-a", {}, {"w": np.zeros(2)}, "fp")
        with pytest.raises(nn.NNError):
            nn.load_model(path, expected_kind="kind-b")

    def test_load_garbage_raises(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("not json at all")
        with pytest.raises(nn.NNError):
            nn.load_model(path)
