import os

from loguru import logger

from errors import InvalidParameterError
from models import GridSpec, OperatorTag, RunConfig
from modules.descriptors import load_space, load_subspace
from modules.spectra import scan_grid
from modules.utility import config_header, write_meta


def command(config: RunConfig) -> int:
    """Write the σ_min indicator of a truncated operator over a grid of λ."""
    model = load_space(config.space, config.N, config.tol)
    subspace = None
    if config.operator == OperatorTag.RESTRICTION:
        if config.subspace is None:
            raise InvalidParameterError("Scanning RestrictionMatrix needs --subspace.")
        subspace = load_subspace(config.subspace, model)

    grid = config.grid or GridSpec()
    if config.resolution is not None:
        grid = grid.model_copy(update={"resolution": config.resolution})
    scan = scan_grid(model, config.operator, grid, subspace=subspace)
    if violations := scan.lipschitz_violations():
        logger.warning(f"{len(violations)} adjacent grid pairs break the Lipschitz bound")

    header = "\n".join(
        [
            config_header(config.model_copy(update={"grid": grid}).echo(model.describe())),
            f"operator_tag: {scan.operator_tag.value}",
            f"N: {scan.trunc_len}",
            f"kind: {model.kind.value}",
        ]
    )
    path = os.path.join(config.out, f"scan_{config.operator.value}.csv")
    scan.to_csv(path, header)
    write_meta(path)
    logger.info(f"Scan of {scan.grid.size} points written to {path}")
    return 0
