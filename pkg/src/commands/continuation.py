import os

from loguru import logger

from errors import CheckFailed, InvalidParameterError, LabError
from models import ContinuationRecord, RunConfig, pair, unpair
from modules.descriptors import load_function, load_space, load_subspace
from modules.resolvent import continue_f
from modules.utility import write_json, write_meta


def command(config: RunConfig) -> int:
    """Evaluate the continuation c_λ(f)(λ) at every requested λ."""
    if config.f is None:
        raise InvalidParameterError("The continue command needs --f.")
    if not config.lambdas:
        raise InvalidParameterError("The continue command needs at least one --lambda.")

    model = load_space(config.space, config.N, config.tol)
    f = load_function(config.f, model)
    subspace = load_subspace(config.subspace, model) if config.subspace else None

    records: list[ContinuationRecord] = []
    failed: list[str] = []
    for index, value in enumerate(config.lambdas):
        lam = unpair(value)
        try:
            records.append(continue_f(model, f, lam, subspace).to_record())
        except LabError as exc:
            logger.warning(f"Continuation at λ = {lam:.6g} failed: {exc}")
            records.append(ContinuationRecord(lambda_=pair(lam), error=type(exc).__name__))
            failed.append(f"continue.lambda[{index}]")

    path = os.path.join(config.out, "continuation.json")
    write_json(
        path,
        {
            "config": config.echo(model.describe()),
            "results": [
                record.model_dump(mode="json", by_alias=True, exclude_none=True)
                for record in records
            ],
        },
    )
    write_meta(path)
    logger.info(f"{len(records)} continuation values written to {path}")

    if failed:
        raise CheckFailed(failed)
    return 0
