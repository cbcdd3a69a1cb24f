"""Command-line parsing and run configuration."""
import argparse
import json
from pathlib import Path
from typing import Any, Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, ValidationError, model_validator

from . import __version__
from .exceptions import ConfigurationError
from .spec_loader import describe_validation_error

Command = Literal["calibrate", "check-metric", "cspace-scan", "ricci-scan", "classify"]
SPEC_COMMANDS = ("check-metric", "cspace-scan", "ricci-scan")


class RunConfig(BaseModel):
    """Validated settings of one invocation; flags override config-file values."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    spec: Optional[Path] = None
    dim: Optional[int] = Field(None, ge=4)
    tol: PositiveFloat = 1e-5
    h: PositiveFloat = 0.01
    steps: int = Field(100, ge=1)
    geodesics: int = Field(20, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    points: int = Field(20, ge=1)
    radius: float = Field(0.5, ge=0)
    velocity: Optional[list[float]] = None
    l_max: Optional[int] = Field(None, ge=1)
    search_trials: int = Field(0, ge=0)
    threads: Optional[int] = Field(None, ge=1)
    out: Optional[Path] = None

    @model_validator(mode="after")
    def _required_inputs(self) -> "RunConfig":
        if self.command in SPEC_COMMANDS and self.spec is None:
            raise ValueError(f"{self.command} needs a metric spec (--spec)")
        if self.command == "classify" and self.dim is None:
            raise ValueError("classify needs a dimension (--dim)")
        return self

    def echo(self) -> dict[str, Any]:
        """Get the config as echoed into reports; the output path is left out."""
        return self.model_dump(mode="json", exclude={"out"})


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigurationError(message)


def _vector(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _command(commands: Any, common: argparse.ArgumentParser, name: str, help: str) -> argparse.ArgumentParser:
    return commands.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS, help=help)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="JSON file with run-config values")
    common.add_argument("--out", type=Path, help="Write the JSON report here")
    common.add_argument("--seed", type=int, help="RNG seed recorded in the report")
    common.add_argument("--threads", type=int, help="Scan parallelism (default LCFLAB_THREADS)")

    parser = _Parser(prog="lcflab", description="Conformally flat constant-Ricci study toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    _command(commands, common, "calibrate", "Run the calibration suite")

    check = _command(commands, common, "check-metric", "Weyl, Codazzi and Ricci diagnostics")
    check.add_argument("--spec", type=Path, help="Metric spec JSON file")
    check.add_argument("--points", type=int, help="Number of sample points")
    check.add_argument("--radius", type=float, help="Sampling radius")

    cspace = _command(commands, common, "cspace-scan", "Jacobi spectra along random geodesics")
    cspace.add_argument("--spec", type=Path, help="Metric spec JSON file")
    cspace.add_argument("--geodesics", type=int, help="Number of geodesics")
    cspace.add_argument("--h", type=float, help="Integration step")
    cspace.add_argument("--steps", type=int, help="Steps per geodesic")
    cspace.add_argument("--tol", type=float, help="Constancy tolerance")
    cspace.add_argument("--radius", type=float, help="Start-point radius")
    cspace.add_argument("--velocity", type=_vector, help="Fixed initial direction in the orthonormal frame")

    ricci = _command(commands, common, "ricci-scan", "Ricci spectra at random points")
    ricci.add_argument("--spec", type=Path, help="Metric spec JSON file")
    ricci.add_argument("--points", type=int, help="Number of sample points")
    ricci.add_argument("--radius", type=float, help="Sampling radius")
    ricci.add_argument("--tol", type=float, help="Constancy tolerance")

    classify = _command(commands, common, "classify", "Exact multiplicity classification")
    classify.add_argument("--dim", type=int, help="Manifold dimension n >= 4")
    classify.add_argument("--l-max", dest="l_max", type=int, help="Largest number of distinct eigenvalues")
    classify.add_argument("--search-trials", dest="search_trials", type=int, help="Numeric search for undecided shapes")

    return parser


def _read_config_file(path: Path) -> dict[str, Any]:
    try:
        with Path(path).open("r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigurationError(f"cannot read config file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must hold a JSON object")
    return data


def parse_config(argv: Optional[Sequence[str]] = None, config_file: Optional[Path] = None) -> RunConfig:
    """Merge config-file values with command-line flags and validate."""
    flags = vars(build_parser().parse_args(argv))
    config_file = flags.pop("config", config_file)

    values = _read_config_file(config_file) if config_file is not None else {}
    values.update(flags)
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        raise ConfigurationError(describe_validation_error(e)) from e
