import dataclasses
from pathlib import Path
from typing import NoReturn, Optional

import pandas as pd
import typer
from loguru import logger

from propen.datasets import (
    DesignSet,
    KdeModel,
    NacaParams,
    SyntheticAirfoilProperty,
    naca_coordinates,
)
from propen.exceptions import (
    EmptyMatchedDatasetError,
    MalformedPropertyFileError,
    NonFiniteStateError,
    NonFiniteTrainingError,
)
from propen.matching import MatchConfig, build_matched_dataset
from propen.methods import (
    IoMode,
    OptimizeConfig,
    PropEn,
    PropEnVariant,
    train_propen,
    trajectories_to_csv,
)
from propen.modules import TOY_ARCHITECTURE, ArchitectureSpec, TrainConfig
from propen.theory import TheoryCheck, run_theory_check
from scripts.airfoil_exchange import (
    MANIFEST_NAME,
    evaluate_export,
    export_airfoils,
    import_properties,
)
from scripts.experiment import load_experiment_config, run_experiment
from scripts.utils import InvalidConfigError, output_dir_override

EXIT_INVALID_CONFIG = 2
EXIT_EMPTY_MATCHED_DATASET = 3
EXIT_NON_FINITE_TRAINING = 4

app = typer.Typer(help="Property-guided design optimization with matched reconstruction.")
airfoil_app = typer.Typer(help="File exchange with an external airfoil evaluator.")
app.add_typer(airfoil_app, name="airfoil")


def _exit_on_domain_error(error: Exception) -> NoReturn:
    logger.error(str(error))
    if isinstance(error, InvalidConfigError):
        raise typer.Exit(EXIT_INVALID_CONFIG)
    if isinstance(error, EmptyMatchedDatasetError):
        raise typer.Exit(EXIT_EMPTY_MATCHED_DATASET)
    if isinstance(error, (NonFiniteTrainingError, NonFiniteStateError)):
        raise typer.Exit(EXIT_NON_FINITE_TRAINING)
    raise error


def _match_config(delta_x: float, delta_y: float, delta_y_lower: float) -> MatchConfig:
    try:
        return MatchConfig(delta_x, delta_y, delta_y_lower)
    except ValueError as error:
        raise InvalidConfigError(str(error)) from error


@app.command()
def run(
    config: Path,
    output_dir: Optional[Path] = typer.Option(
        None, help="Overrides the config's output_dir and PROPEN_OUTPUT_DIR."
    ),
) -> None:
    """
    Run an experiment described by a JSON config, and write per-repetition CSVs, results.csv
    and summary.csv.
    """
    try:
        experiment_config = load_experiment_config(config)
        if output_dir is not None:
            experiment_config = dataclasses.replace(
                experiment_config, output_dir=output_dir
            )
        summary = run_experiment(experiment_config)
    except (
        InvalidConfigError,
        EmptyMatchedDatasetError,
        NonFiniteTrainingError,
        NonFiniteStateError,
    ) as error:
        _exit_on_domain_error(error)
    logger.info("\n" + summary.to_string(index=False))


@app.command()
def match(
    data: Path,
    dx: float = typer.Option(..., help="Threshold on the squared euclidean distance."),
    dy: float = typer.Option(..., help="Upper bound on the property gap."),
    dy_lower: float = typer.Option(0.0, help="Strict lower bound on the property gap."),
    output: Path = Path("matched.csv"),
) -> None:
    """Match the designs of a CSV with columns x0,...,x{m-1},y and write the pairs."""
    try:
        matched = build_matched_dataset(
            DesignSet.read_csv(data), _match_config(dx, dy, dy_lower)
        )
    except InvalidConfigError as error:
        _exit_on_domain_error(error)
    matched.to_csv(output)
    logger.info(f"Saved {len(matched)} matched pairs in {output}")


@app.command()
def train(
    data: Path,
    dx: float = typer.Option(...),
    dy: float = typer.Option(...),
    dy_lower: float = 0.0,
    io_mode: IoMode = IoMode.X2X,
    mix_beta: float = 0.0,
    epochs: int = 500,
    batch_size: int = 64,
    learning_rate: float = 1e-3,
    hidden_width: int = TOY_ARCHITECTURE.hidden_width,
    n_hidden_layers: int = TOY_ARCHITECTURE.n_hidden_layers,
    latent_dim: int = TOY_ARCHITECTURE.latent_dim,
    random_seed: int = 0,
    output: Path = Path("propen_model.prpn"),
) -> None:
    """
    Train a PropEn model on the matched pairs of a design CSV. The model is written as a PRPN
    file with a JSON sidecar, ready for the optimize command.
    """
    try:
        match_config = MatchConfig(dx, dy, dy_lower)
        variant = PropEnVariant(io_mode, mix_beta)
        arch = ArchitectureSpec(hidden_width, n_hidden_layers, latent_dim)
        train_config = TrainConfig(epochs, batch_size, learning_rate, random_seed)
    except ValueError as error:
        _exit_on_domain_error(InvalidConfigError(str(error)))
    try:
        model = train_propen(
            build_matched_dataset(DesignSet.read_csv(data), match_config),
            variant,
            arch,
            train_config,
            use_tqdm=True,
        )
    except (EmptyMatchedDatasetError, NonFiniteTrainingError) as error:
        _exit_on_domain_error(error)
    model.save(output)
    logger.info(f"Saved model in {output}")


@app.command()
def optimize(
    model: Path,
    seeds: Path,
    max_steps: int = 30,
    convergence_eps: float = 1e-4,
    kde_data: Optional[Path] = typer.Option(
        None, help="Design CSV whose KDE log-density evaluates every state."
    ),
    kde_bandwidth: float = 0.01,
    output: Path = Path("trajectories.csv"),
) -> None:
    """
    Optimize the seeds of a design CSV with a trained PropEn model. XY2XY models read the seed
    properties from the y column, or evaluate them with the KDE of --kde-data.
    """
    try:
        propen_model = PropEn.load(model, OptimizeConfig(max_steps, convergence_eps))
    except ValueError as error:
        _exit_on_domain_error(InvalidConfigError(str(error)))
    seed_set = DesignSet.read_csv(seeds)
    oracle = (
        KdeModel(DesignSet.read_csv(kde_data).designs, kde_bandwidth)
        if kde_data is not None
        else None
    )
    try:
        trajectories = propen_model.optimize_seeds(
            seed_set.designs, seed_set.properties, oracle, use_tqdm=True
        )
    except NonFiniteStateError as error:
        _exit_on_domain_error(error)
    except ValueError as error:
        _exit_on_domain_error(InvalidConfigError(str(error)))
    trajectories_to_csv(trajectories, output, propen_model.method_name)
    logger.info(f"Saved {len(trajectories)} trajectories in {output}")


@app.command("check-theory")
def check_theory(
    which: TheoryCheck,
    random_seed: int = 0,
    output: Optional[Path] = None,
) -> None:
    """Run one sweep of theory checks and write rows check,instance,lhs,rhs,holds."""
    report = run_theory_check(which, random_seed)
    if output is None:
        output = output_dir_override(Path(".")) / f"theory_{which.value}.csv"
    output.parent.mkdir(parents=True, exist_ok=True)
    report.to_csv(output, index=False)
    logger.info(f"Saved {len(report)} check rows in {output}")


@app.command()
def naca(
    m: float = typer.Option(..., help="Maximum camber, as a fraction of the chord."),
    p: float = typer.Option(..., help="Position of maximum camber, as a fraction of the chord."),
    t: float = typer.Option(..., help="Maximum thickness, as a fraction of the chord."),
    n: int = typer.Option(200, help="Number of coordinate pairs."),
    open_trailing_edge: bool = False,
    output: Optional[Path] = None,
) -> None:
    """Generate a NACA 4-digit airfoil and write its coordinates as columns x,y."""
    try:
        params = NacaParams(m, p, t, n, closed_trailing_edge=not open_trailing_edge)
    except ValueError as error:
        _exit_on_domain_error(InvalidConfigError(str(error)))
    coordinates = pd.DataFrame(naca_coordinates(params).numpy(), columns=["x", "y"])
    if output is None:
        typer.echo(coordinates.to_csv(index=False), nl=False)
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    coordinates.to_csv(output, index=False)
    logger.info(f"Saved {len(coordinates)} coordinates in {output}")


@airfoil_app.command("export")
def airfoil_export(designs: Path, export_dir: Path) -> None:
    """Export the flattened airfoils of a design CSV for an external evaluator."""
    export_airfoils(DesignSet.read_csv(designs), export_dir)


@airfoil_app.command("evaluate")
def airfoil_evaluate(
    export_dir: Path, property_file: Path, angle_of_attack: float = 4.0
) -> None:
    """Write a property file for an export with the built-in synthetic lift-to-drag oracle."""
    evaluate_export(
        export_dir / MANIFEST_NAME, SyntheticAirfoilProperty(angle_of_attack), property_file
    )
    logger.info(f"Saved synthetic properties in {property_file}")


@airfoil_app.command("import")
def airfoil_import(designs: Path, property_file: Path, output: Path) -> None:
    """Set the properties of exported designs from an evaluator's property file."""
    try:
        updated = import_properties(DesignSet.read_csv(designs), property_file)
    except MalformedPropertyFileError as error:
        logger.error(str(error))
        raise typer.Exit(1) from error
    updated.to_csv(output)
    logger.info(f"Saved {len(updated)} evaluated designs in {output}")


if __name__ == "__main__":
    app()
