import os

from loguru import logger

from errors import CheckFailed
from models import RunConfig
from modules.checks import model_axioms_check
from modules.descriptors import load_space
from modules.utility import write_json, write_meta


def command(config: RunConfig) -> int:
    """Validate a space model against the structural axioms."""
    model = load_space(config.space, config.N, config.tol)
    report = model_axioms_check(model, seed=config.seed)

    path = os.path.join(config.out, "space.json")
    write_json(
        path,
        {
            "config": config.echo(model.describe()),
            "space": {
                "kind": model.kind.value,
                "d": model.fiber_dim,
                "N": model.trunc_len,
                "tol": model.tol,
                "radius": model.radius,
                "ratio_bound": model.weights.ratio_bound,
            },
            "report": report.to_json(),
        },
    )
    write_meta(path)
    logger.info(f"Space report written to {path}")

    if not report.passed:
        raise CheckFailed(report.failures())
    return 0
