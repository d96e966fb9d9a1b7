from typing import Optional

import autoclick as ac

from edmtools.console.report import RunReport, finish, parameters
from edmtools.instances import read_instance
from edmtools.oracle import DEFAULT_RESTARTS, oracle_solve


def cmd_oracle(
    instance: ac.ReadableFile,
    dim: Optional[int] = None,
    restarts: int = DEFAULT_RESTARTS,
    threads: int = 1,
    seed: int = 0,
) -> RunReport:
    inst = read_instance(instance)
    d = inst.d if dim is None else dim
    result = oracle_solve(inst.matrix, d, restarts=restarts, seed=seed, threads=threads)
    report = RunReport(
        str(instance),
        "oracle",
        parameters=parameters(dim=d, restarts=restarts, seed=seed),
    )
    report.record(result.verdict)
    report.detail = f"{result.verdict.detail}; residual {result.residual:.3g}"
    return report


def oracle(
    instance: ac.ReadableFile,
    dim: Optional[int] = None,
    restarts: int = DEFAULT_RESTARTS,
    threads: int = 1,
    seed: int = 0,
    report: Optional[ac.WritableFile] = None,
):
    """
    Decide an instance by fitting point coordinates directly. A no is
    certified only when a fully specified clique fails to embed.

    Args:
        instance: The instance file.
        dim: Target dimension. Defaults to the dimension in the instance header.
        restarts: Number of random starts.
        threads: Maximum number of concurrent restarts.
        seed: Seed for the starts.
        report: Write the run report to this file.
    """
    finish(
        lambda: cmd_oracle(instance, dim, restarts, threads, seed),
        instance,
        "oracle",
        report,
    )
