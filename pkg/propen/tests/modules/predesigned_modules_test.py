import pytest

from propen.modules import (
    AIRFOIL_ARCHITECTURE,
    TOY_ARCHITECTURE,
    Activation,
    ArchitectureSpec,
    decoder,
    encoder,
    encoder_decoder,
    latent_discriminator,
)


class TestEncoderDecoder:
    @staticmethod
    @pytest.mark.parametrize(
        "arch,input_dim,expected_dims",
        [
            (TOY_ARCHITECTURE, 10, [10, 30, 30, 15, 30, 30, 10]),
            (ArchitectureSpec(4, 1, 2), 3, [3, 4, 2, 4, 3]),
            (AIRFOIL_ARCHITECTURE, 400, [400, 100, 100, 100, 50, 100, 100, 100, 400]),
        ],
    )
    def test_has_a_latent_bottleneck(arch, input_dim, expected_dims):
        assert encoder_decoder(input_dim, input_dim, arch).dims() == expected_dims

    @staticmethod
    def test_bottleneck_and_output_are_linear():
        model = encoder_decoder(10, 10, TOY_ARCHITECTURE)
        activations = [layer.activation for layer in model.layers]
        assert activations[2] == Activation.IDENTITY
        assert activations[-1] == Activation.IDENTITY
        assert activations.count(Activation.IDENTITY) == 2


class TestExplicitGuidanceModules:
    @staticmethod
    def test_latent_dims_agree():
        arch = ArchitectureSpec(8, 2, 5)
        assert encoder(6, arch).output_dim == 5
        assert decoder(6, arch).input_dim == 5
        assert decoder(6, arch).output_dim == 6
        assert latent_discriminator(arch).dims() == [5, 8, 8, 1]


class TestArchitectureSpec:
    @staticmethod
    @pytest.mark.parametrize(
        "kwargs", [{"hidden_width": 0}, {"n_hidden_layers": 0}, {"latent_dim": 0}]
    )
    def test_refuses_non_positive_sizes(kwargs):
        with pytest.raises(ValueError):
            ArchitectureSpec(**kwargs)
