import pytest
import torch

from propen.datasets import DesignSet
from propen.exceptions import NonFiniteStateError
from propen.methods import ExplicitGuidanceModel, GuidanceConfig, Standardizer, train_explicit
from propen.modules import ArchitectureSpec, Mlp, TrainConfig
from propen.modules.dense_mlp import DTYPE
from propen.tests.helpers import dense_layer, identity_mlp

SMALL_ARCHITECTURE = ArchitectureSpec(hidden_width=16, n_hidden_layers=1, latent_dim=4)


def linear_guidance_model(weights) -> ExplicitGuidanceModel:
    """Identity auto-encoder with the discriminator d(z) = weights . z"""
    return ExplicitGuidanceModel(
        identity_mlp(len(weights)),
        identity_mlp(len(weights)),
        Mlp([dense_layer([weights], [0.0])]),
    )


def small_design_set() -> DesignSet:
    generator = torch.Generator().manual_seed(0)
    designs = torch.randn(30, 3, generator=generator, dtype=DTYPE)
    return DesignSet(designs, designs.sum(dim=1))


class TestGuide:
    @staticmethod
    def test_linear_discriminator_gives_straight_ascent():
        model = linear_guidance_model([1.0, -2.0])
        seed = torch.tensor([0.5, 0.5], dtype=DTYPE)
        trajectory = model.guide(
            seed, GuidanceConfig(step_size=0.1, n_steps=4, max_gradient_norm=None)
        )
        expected = torch.stack(
            [seed + step * 0.1 * torch.tensor([1.0, -2.0], dtype=DTYPE) for step in range(5)]
        )
        torch.testing.assert_close(trajectory.states, expected)
        assert trajectory.steps_taken == 4
        assert not trajectory.converged

    @staticmethod
    def test_no_step_gives_the_reconstruction():
        model = ExplicitGuidanceModel(
            Mlp.from_dims([3, 4], seed=0),
            Mlp.from_dims([4, 3], seed=1),
            Mlp.from_dims([4, 1], seed=2),
        )
        seed = torch.tensor([0.1, 0.2, 0.3], dtype=DTYPE)
        trajectory = model.guide(seed, GuidanceConfig(n_steps=0))
        assert trajectory.states.shape == (1, 3)
        torch.testing.assert_close(trajectory.states[0], model.decode(model.encode(seed)))

    @staticmethod
    def test_zero_step_size_repeats_the_reconstruction():
        model = ExplicitGuidanceModel(
            Mlp.from_dims([2, 3], seed=0),
            Mlp.from_dims([3, 2], seed=1),
            Mlp.from_dims([3, 5, 1], seed=2),
        )
        trajectory = model.guide(torch.ones(2), GuidanceConfig(step_size=0.0, n_steps=5))
        assert (trajectory.states == trajectory.states[0]).all()

    @staticmethod
    def test_standardization_is_applied_around_the_networks():
        standardizer = Standardizer(torch.tensor([1.0], dtype=DTYPE), torch.tensor([2.0], dtype=DTYPE))
        model = ExplicitGuidanceModel(
            identity_mlp(1), identity_mlp(1), Mlp([dense_layer([[1.0]], [0.0])]), standardizer
        )
        assert model.encode(torch.tensor([3.0])).tolist() == [1.0]
        trajectory = model.guide(torch.tensor([3.0]), GuidanceConfig(step_size=0.5, n_steps=1))
        assert trajectory.states.flatten().tolist() == [3.0, 4.0]

    @staticmethod
    def test_oracle_fills_property_values():
        model = linear_guidance_model([1.0, 0.0])
        trajectory = model.guide(
            torch.zeros(2), GuidanceConfig(step_size=1.0, n_steps=2), oracle=lambda designs: designs[..., 0]
        )
        assert trajectory.property_values.tolist() == [0.0, 1.0, 2.0]

    @staticmethod
    def test_non_finite_latent_aborts():
        model = linear_guidance_model([1e308, 0.0])
        with pytest.raises(NonFiniteStateError) as error:
            model.guide(
                torch.zeros(2), GuidanceConfig(step_size=10.0, n_steps=3, max_gradient_norm=None)
            )
        assert error.value.step == 1

    @staticmethod
    def test_overflowing_decoder_aborts():
        model = ExplicitGuidanceModel(
            identity_mlp(1), Mlp([dense_layer([[1e308]], [0.0])]), Mlp([dense_layer([[1.0]], [0.0])])
        )
        with pytest.raises(NonFiniteStateError) as error:
            model.guide(torch.tensor([0.5]), GuidanceConfig(step_size=1.0, n_steps=3))
        assert error.value.step == 2
        assert len(error.value.trajectory.states) == 2

    @staticmethod
    @pytest.mark.parametrize("max_gradient_norm", [0.5, 1.0, 2.0])
    def test_long_gradients_are_clipped(max_gradient_norm):
        model = linear_guidance_model([3.0, 4.0])
        trajectory = model.guide(
            torch.zeros(2),
            GuidanceConfig(step_size=0.1, n_steps=3, max_gradient_norm=max_gradient_norm),
        )
        steps = trajectory.states[1:] - trajectory.states[:-1]
        expected_step = 0.1 * max_gradient_norm * torch.tensor([0.6, 0.8], dtype=DTYPE)
        torch.testing.assert_close(steps, expected_step.expand(3, 2))

    @staticmethod
    def test_short_gradients_are_not_clipped():
        model = linear_guidance_model([0.3, 0.4])
        trajectory = model.guide(torch.zeros(2), GuidanceConfig(step_size=0.1, n_steps=1))
        torch.testing.assert_close(
            trajectory.final_state, torch.tensor([0.03, 0.04], dtype=DTYPE)
        )

    @staticmethod
    def test_steps_are_taken_in_standardized_latent_coordinates():
        latent_standardizer = Standardizer(
            torch.tensor([5.0, 5.0], dtype=DTYPE), torch.tensor([2.0, 0.5], dtype=DTYPE)
        )
        model = ExplicitGuidanceModel(
            identity_mlp(2),
            identity_mlp(2),
            Mlp([dense_layer([[1.0, 1.0]], [0.0])]),
            latent_standardizer=latent_standardizer,
        )
        trajectory = model.guide(
            torch.zeros(2), GuidanceConfig(step_size=0.1, n_steps=1, max_gradient_norm=None)
        )
        # grad_u d = scale, and a unit step in u moves z by scale
        torch.testing.assert_close(
            trajectory.final_state, torch.tensor([0.4, 0.025], dtype=DTYPE)
        )

    @staticmethod
    @pytest.mark.parametrize(
        "encoder_dims,decoder_dims,discriminator_dims",
        [([2, 3], [4, 2], [3, 1]), ([2, 3], [3, 2], [3, 2]), ([2, 3], [3, 4], [3, 1])],
    )
    def test_refuses_inconsistent_networks(encoder_dims, decoder_dims, discriminator_dims):
        with pytest.raises(ValueError):
            ExplicitGuidanceModel(
                Mlp.from_dims(encoder_dims), Mlp.from_dims(decoder_dims), Mlp.from_dims(discriminator_dims)
            )

    @staticmethod
    @pytest.mark.parametrize(
        "step_size,n_steps,max_gradient_norm",
        [(-0.1, 3, 1.0), (0.1, -1, 1.0), (0.1, 3, 0.0), (0.1, 3, -1.0)],
    )
    def test_config_refuses_invalid_values(step_size, n_steps, max_gradient_norm):
        with pytest.raises(ValueError):
            GuidanceConfig(step_size, n_steps, max_gradient_norm)


class TestTrainExplicit:
    @staticmethod
    def test_single_design_is_reconstructed_and_predicted():
        data = DesignSet(torch.tensor([[1.0, -1.0]]), torch.tensor([0.5]))
        model, epoch_losses = train_explicit(
            data, SMALL_ARCHITECTURE, TrainConfig(epochs=1000, batch_size=1, learning_rate=5e-3)
        )
        assert epoch_losses[-1] < 1e-4
        torch.testing.assert_close(
            model.decode(model.encode(data.designs[0])), data.designs[0], rtol=0, atol=2e-2
        )

    @staticmethod
    def test_same_seed_gives_identical_parameters():
        def trained_parameters():
            model, _ = train_explicit(small_design_set(), SMALL_ARCHITECTURE, TrainConfig(epochs=5))
            return torch.cat(
                [
                    network.parameters_vector()
                    for network in (model.encoder, model.decoder, model.discriminator)
                ]
            )

        assert torch.equal(trained_parameters(), trained_parameters())

    @staticmethod
    def test_loss_decreases():
        _, epoch_losses = train_explicit(
            small_design_set(), SMALL_ARCHITECTURE, TrainConfig(epochs=200, learning_rate=1e-2)
        )
        assert epoch_losses[-1] < epoch_losses[0]

    @staticmethod
    def test_latent_gradient_matches_finite_differences():
        model, _ = train_explicit(small_design_set(), SMALL_ARCHITECTURE, TrainConfig(epochs=5))
        latent = model.encode(torch.tensor([0.1, 0.2, 0.3], dtype=DTYPE))
        gradient = model.discriminator.input_gradient(latent)
        step = 1e-6
        finite_differences = torch.stack(
            [
                (
                    model.discriminator(latent + step * direction)
                    - model.discriminator(latent - step * direction)
                ).squeeze()
                / (2 * step)
                for direction in torch.eye(len(latent), dtype=DTYPE)
            ]
        ).detach()
        torch.testing.assert_close(gradient, finite_differences, rtol=0, atol=1e-4)

    @staticmethod
    def test_small_steps_increase_the_discriminator():
        model, _ = train_explicit(small_design_set(), SMALL_ARCHITECTURE, TrainConfig(epochs=50))
        latents = model.guide_latents(torch.zeros(3), GuidanceConfig(step_size=1e-3, n_steps=10))
        with torch.no_grad():
            predictions = model.discriminator(latents).flatten()
        assert (predictions[1:] >= predictions[:-1]).all()

    @staticmethod
    def test_latent_standardizer_is_fitted_on_training_codes():
        data = small_design_set()
        model, _ = train_explicit(data, SMALL_ARCHITECTURE, TrainConfig(epochs=20))
        codes = model.latent_standardizer.transform(model.encode(data.designs))
        torch.testing.assert_close(codes.mean(dim=0), torch.zeros(4, dtype=DTYPE), rtol=0, atol=1e-9)
        constant = model.encode(data.designs).std(dim=0, unbiased=False) == 0
        expected_std = torch.where(constant, torch.zeros(4, dtype=DTYPE), torch.ones(4, dtype=DTYPE))
        torch.testing.assert_close(codes.std(dim=0, unbiased=False), expected_std, rtol=0, atol=1e-9)

    @staticmethod
    def test_refuses_empty_data():
        with pytest.raises(ValueError):
            train_explicit(DesignSet(torch.empty(0, 2), torch.empty(0)), SMALL_ARCHITECTURE, TrainConfig())
