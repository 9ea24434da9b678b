import pytest
import torch

from propen.modules import Activation, DenseLayer, Mlp, forward
from propen.modules.dense_mlp import DTYPE
from propen.tests.helpers import dense_layer, identity_mlp


class TestForward:
    @staticmethod
    def test_zero_parameters_give_zero_output():
        model = Mlp.from_dims([3, 4, 2], seed=0)
        with torch.no_grad():
            for parameter in model.parameters():
                parameter.zero_()
        assert torch.equal(
            forward(model, torch.tensor([1.0, -2.0, 3.0])), torch.zeros(2, dtype=DTYPE)
        )

    @staticmethod
    def test_identity_layer_returns_input():
        vector = torch.tensor([0.3, -1.2, 5.0], dtype=DTYPE)
        assert torch.equal(forward(identity_mlp(3), vector), vector)

    @staticmethod
    @pytest.mark.parametrize(
        "weight,bias,value,expected",
        [
            (2.0, -1.0, 0.25, 0.0),
            (2.0, -1.0, 1.0, 1.0),
            (-1.0, 0.0, 3.0, 0.0),
        ],
    )
    def test_relu_layer_matches_hand_evaluation(weight, bias, value, expected):
        model = Mlp([dense_layer([[weight]], [bias], Activation.RELU)])
        assert forward(model, torch.tensor([value])).item() == expected

    @staticmethod
    def test_accepts_batches():
        model = Mlp.from_dims([3, 5, 2], seed=1)
        inputs = torch.rand(7, 3, dtype=DTYPE)
        outputs = forward(model, inputs)
        assert outputs.shape == (7, 2)
        torch.testing.assert_close(outputs[4], forward(model, inputs[4]))

    @staticmethod
    @pytest.mark.parametrize("input_length", [2, 4])
    def test_refuses_wrong_input_length(input_length):
        with pytest.raises(ValueError, match="length 3"):
            forward(Mlp.from_dims([3, 2], seed=0), torch.zeros(input_length))

    @staticmethod
    def test_refuses_non_finite_input():
        with pytest.raises(ValueError):
            forward(identity_mlp(2), torch.tensor([0.0, float("nan")]))


class TestMlp:
    @staticmethod
    def test_refuses_layers_that_do_not_chain():
        with pytest.raises(ValueError, match="layer 1 expects 4"):
            Mlp([DenseLayer(2, 3), DenseLayer(4, 1)])

    @staticmethod
    def test_from_dims_uses_identity_on_last_layer_only():
        model = Mlp.from_dims([2, 8, 8, 3], seed=0)
        assert [layer.activation for layer in model.layers] == [
            Activation.RELU,
            Activation.RELU,
            Activation.IDENTITY,
        ]
        assert model.dims() == [2, 8, 8, 3]

    @staticmethod
    def test_same_seed_gives_same_initialization():
        assert torch.equal(
            Mlp.from_dims([4, 6, 2], seed=3).parameters_vector(),
            Mlp.from_dims([4, 6, 2], seed=3).parameters_vector(),
        )

    @staticmethod
    def test_initial_weights_are_within_glorot_bound():
        layer = DenseLayer(10, 20, generator=torch.Generator().manual_seed(0))
        assert layer.weights.abs().max() <= (6 / 30) ** 0.5
        assert torch.equal(layer.biases, torch.zeros(20, dtype=DTYPE))

    @staticmethod
    @pytest.mark.parametrize("seed", range(5))
    def test_input_gradient_matches_finite_differences(seed):
        model = Mlp.from_dims([4, 6, 1], seed=seed)
        point = torch.rand(4, generator=torch.Generator().manual_seed(seed), dtype=DTYPE)
        step = 1e-5
        finite_differences = torch.stack(
            [
                (forward(model, point + step * direction) - forward(model, point - step * direction))[0]
                / (2 * step)
                for direction in torch.eye(4, dtype=DTYPE)
            ]
        )
        torch.testing.assert_close(
            model.input_gradient(point), finite_differences, rtol=1e-4, atol=1e-8
        )

    @staticmethod
    def test_input_gradient_refuses_vector_outputs():
        with pytest.raises(ValueError):
            Mlp.from_dims([2, 3], seed=0).input_gradient(torch.zeros(2))
