import os

from loguru import logger

from errors import CheckFailed, InvalidParameterError
from models import RunConfig, pair, unpair
from modules.descriptors import load_space, load_subspace
from modules.subspaces import arr_disc_check, restriction_spectrum
from modules.utility import write_json, write_meta

DEFAULT_DISC_SAMPLES = (0.0, 0.5, -0.5, 0.5j, -0.5j)


def command(config: RunConfig) -> int:
    """Build a subspace, report the spectrum of L on it and check the disc identity."""
    if config.subspace is None:
        raise InvalidParameterError("The subspace command needs --subspace.")
    model = load_space(config.space, config.N, config.tol)
    sub = load_subspace(config.subspace, model)
    spectrum = restriction_spectrum(sub)

    payload = {
        "config": config.echo(model.describe()),
        "dimension": sub.dim,
        "mode": sub.mode.value,
        "gram_condition": sub.condition,
        "closure_residual": sub.closure_residual,
        "threshold": sub.threshold,
        "spectrum": [pair(mu) for mu in spectrum],
    }

    report = None
    if model.fiber_dim == 1:
        if config.lambdas:
            samples = [unpair(value) for value in config.lambdas]
        else:
            inside = [mu for mu in spectrum if abs(mu) * model.weights.asymptotic_ratio < 1]
            samples = inside + [s for s in DEFAULT_DISC_SAMPLES if s not in inside]
        report = arr_disc_check(model, sub, samples)
        payload["arr_disc"] = report.model_dump(mode="json")["entries"]
        payload["arr_disc_passed"] = report.passed
    else:
        logger.info("Disc identity skipped for a vector-valued space")

    path = os.path.join(config.out, "subspace.json")
    write_json(path, payload)
    write_meta(path)
    logger.info(f"Subspace report written to {path}")

    if report is not None and not report.passed:
        raise CheckFailed([f"arr_disc[{i}]" for i, e in enumerate(report.entries) if not e.agree])
    return 0
