import io
import os

import numpy as np
from loguru import logger

from errors import CheckFailed
from models import RunConfig
from modules.checks import run_suite
from modules.descriptors import load_space
from modules.reports import CheckReport
from modules.utility import atomic_write, config_header, write_json, write_meta


def write_sequences(path: str, report: CheckReport, header: str) -> None:
    """Measured sequences in long form: series id, index, value."""
    names = sorted(report.sequences)
    rows = [
        (series, index, value)
        for series, name in enumerate(names)
        for index, value in enumerate(report.sequences[name])
    ]
    legend = "\n".join(f"series {series}: {name}" for series, name in enumerate(names))
    buffer = io.StringIO()
    np.savetxt(
        buffer,
        np.array(rows, dtype=float).reshape(-1, 3),
        fmt=("%d", "%d", "%.17g"),
        delimiter=",",
        header=f"{header}\n{legend}\nseries,index,value",
        comments="# ",
    )
    atomic_write(path, buffer.getvalue())


def command(config: RunConfig) -> int:
    """Run the named check suite and write a summary plus one CSV per check."""
    model = load_space(config.space, config.N, config.tol)
    result = run_suite(model, config.suite, seed=config.seed)

    echo = config.echo(model.describe())
    path = os.path.join(config.out, f"check_{config.suite.value}.json")
    write_json(path, {"config": echo, "suite": result.model_dump(mode="json")})
    write_meta(path)
    for report in result.reports:
        if report.sequences:
            header = f"{config_header(echo)}\ncheck: {report.name}"
            write_sequences(os.path.join(config.out, f"{report.name}.csv"), report, header)
    logger.info(f"Suite {config.suite.value} written to {path}")

    if not result.passed:
        raise CheckFailed(result.failures())
    return 0
