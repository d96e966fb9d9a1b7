import enum
from pathlib import Path
from typing import Optional

import autoclick as ac
from loguru import logger

from edmtools.compress import (
    CliqueCover,
    CompressOutcome,
    OutcomeKind,
    compress_cliquecover,
    compress_ktt,
    compress_maxdeg,
    edge_clique_cover_search,
)
from edmtools.console.report import RunReport, finish, parameters
from edmtools.instances import Instance, Metadata, read_cover, read_instance, write_instance
from edmtools.solvers import DEFAULT_KMAX
from edmtools.utils import PreconditionViolated, replace_suffix


REDUCED_SUFFIX = ".reduced.edm"
"""Suffix of the reduced instance written next to the input by default."""


class Scheme(enum.Enum):
    KTT = 0
    """Matrices without a t-block pattern."""
    MAXDEG = 1
    """Matrices with a bounded number of unspecified entries per row."""
    COVER = 2
    """Matrices whose specified entries have a small edge clique cover."""


def _restrict(cover: CliqueCover, outcome: CompressOutcome) -> CliqueCover:
    position = {v: i for i, v in enumerate(outcome.kept)}
    return CliqueCover(
        tuple(
            tuple(position[v] for v in clique if v in position) for clique in cover
        )
    )


def _cover_for(inst: Instance, cover_file: Optional[Path], kmax: int) -> CliqueCover:
    if cover_file is not None:
        return read_cover(cover_file)
    if inst.cover is not None:
        return inst.cover
    logger.info("No cover given; searching for one with at most {} cliques", kmax)
    cover = edge_clique_cover_search(inst.matrix.graph, kmax)
    if cover is None:
        raise PreconditionViolated(f"No edge clique cover with at most {kmax} cliques")
    return cover


def cmd_compress(
    instance: ac.ReadableFile,
    dim: Optional[int] = None,
    scheme: Scheme = Scheme.MAXDEG,
    t: int = 2,
    max_unspecified: Optional[int] = None,
    cover_file: Optional[ac.ReadableFile] = None,
    kmax: int = DEFAULT_KMAX,
    outfile: Optional[ac.WritableFile] = None,
    threads: int = 1,
    verify: bool = False,
) -> RunReport:
    """
    Compresses an instance file, writes the reduced instance, and builds the run
    report. The report's answer is set only if the compression decided the
    instance.

    Raises:
        InstanceError: if the file is malformed.
        PreconditionViolated: if the scheme's promise does not hold.
    """
    inst = read_instance(instance)
    d = inst.d if dim is None else dim
    matrix = inst.matrix
    cover = None
    if scheme == Scheme.KTT:
        settings = parameters(dim=d, scheme=scheme, t=t)
        outcome = compress_ktt(matrix, d, t, verify=verify, threads=threads)
    elif scheme == Scheme.MAXDEG:
        if max_unspecified is None:
            max_unspecified = int(matrix.unspecified_counts().max(initial=0))
        settings = parameters(dim=d, scheme=scheme, max_unspecified=max_unspecified)
        outcome = compress_maxdeg(matrix, d, max_unspecified, threads=threads)
    elif scheme == Scheme.COVER:
        cover = _cover_for(inst, cover_file, kmax)
        settings = parameters(dim=d, scheme=scheme, k=len(cover))
        outcome = compress_cliquecover(matrix, d, cover, threads=threads)
    else:
        raise ValueError(f"Unsupported scheme: {scheme}")

    if outfile is None:
        outfile = replace_suffix(Path(instance), REDUCED_SUFFIX)
    metadata = Metadata(
        generator=f"compress {scheme.name.lower()}",
        cliques=() if cover is None else _restrict(cover, outcome).cliques,
        kept=outcome.kept,
        removed=outcome.removed,
    )
    write_instance(Instance(outcome.instance, d, metadata), outfile)
    logger.info(
        "Wrote {} rows to {} ({} removed)",
        outcome.instance.n,
        outfile,
        len(outcome.removed),
    )

    report = RunReport(
        str(instance), "compress", parameters=settings, removed=outcome.removed
    )
    if outcome.kind is OutcomeKind.SOLVED:
        report.record(outcome.verdict)
        report.detail = f"solved: {report.answer_text}"
    else:
        report.detail = f"reduced to {outcome.instance.n} rows"
    return report


def compress(
    instance: ac.ReadableFile,
    dim: Optional[int] = None,
    scheme: Scheme = Scheme.MAXDEG,
    t: int = 2,
    max_unspecified: Optional[int] = None,
    cover_file: Optional[ac.ReadableFile] = None,
    kmax: int = DEFAULT_KMAX,
    outfile: Optional[ac.WritableFile] = None,
    threads: int = 1,
    verify: bool = False,
    report: Optional[ac.WritableFile] = None,
):
    """
    Remove irrelevant rows from a partial distance matrix, keeping the answer.

    Exits with 0 or 1 if the compression decided the instance (yes or no), 2 if
    it only reduced it, and 3 if the scheme's precondition does not hold.

    Args:
        instance: The instance file.
        dim: Target dimension. Defaults to the dimension in the instance header.
        scheme: 'KTT' - no t-block pattern; 'MAXDEG' - bounded unspecified
            entries per row; 'COVER' - small edge clique cover of the specified
            entries.
        t: Block size excluded by the matrix, for 'KTT'.
        max_unspecified: Bound on unspecified entries per row, for 'MAXDEG'.
            Defaults to the largest count in the matrix.
        cover_file: Edge clique cover, one clique per line, for 'COVER'. If not
            given, the cover in the instance metadata is used, else one is
            searched for.
        kmax: Largest cover size to search for.
        outfile: The reduced instance. Defaults to '{prefix}.reduced.edm' next
            to the input.
        threads: Maximum number of concurrent clique checks.
        verify: Check the 'KTT' promise before compressing.
        report: Write the run report to this file.
    """
    finish(
        lambda: cmd_compress(
            instance,
            dim,
            scheme,
            t,
            max_unspecified,
            cover_file,
            kmax,
            outfile,
            threads,
            verify,
        ),
        instance,
        "compress",
        report,
    )
