"""Run reports and exit handling shared by the commands.
"""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
import sys
import time
from typing import Callable, Optional, Sequence, Tuple

from loguru import logger
from xphyle import open_

from edmtools.utils import EdmError, InstanceError, NotChordal, PreconditionViolated
from edmtools.verdict import Answer, CertificateKind, Verdict


INPUT_ERROR_EXIT = 3
"""Exit code for unreadable or invalid input and violated preconditions."""
UNDECIDED_EXIT = 2
"""Exit code for a run that produced no verdict."""


@dataclass
class RunReport:
    """
    Summary of one command invocation.

    Args:
        instance: Path of the instance, as given.
        command: Name of the command.
        answer: The answer, or None if the command did not decide the instance
            (e.g. a compression that only reduced it).
        certified: False for a heuristic no.
        certificate: What backs the answer.
        wall_time: Seconds spent, filled in by :meth:`timed`.
        parameters: (name, value) pairs of the settings used.
        removed: Original indices deleted by a compression, in order.
        witness: Index set of a failing clique.
        detail: Free text.
        verdict: The recorded verdict; it decides the exit code.
    """

    instance: str
    command: str
    answer: Optional[Answer] = None
    certified: bool = False
    certificate: CertificateKind = CertificateKind.NONE
    wall_time: float = 0.0
    parameters: Tuple[Tuple[str, str], ...] = ()
    removed: Optional[Tuple[int, ...]] = None
    witness: Optional[Tuple[int, ...]] = None
    detail: str = ""
    verdict: Optional[Verdict] = field(default=None, repr=False)
    _start: float = field(default_factory=time.perf_counter, repr=False)

    def record(self, verdict: Verdict) -> "RunReport":
        self.answer = verdict.answer
        self.certified = verdict.certified
        self.certificate = verdict.certificate
        self.witness = verdict.witness
        self.detail = verdict.detail
        self.verdict = verdict
        return self

    def timed(self) -> "RunReport":
        self.wall_time = time.perf_counter() - self._start
        return self

    @property
    def answer_text(self) -> str:
        if self.answer is None:
            return "undecided"
        if self.answer is Answer.NO and not self.certified:
            return "no (uncertified)"
        return self.answer.name.lower()

    @property
    def exit_code(self) -> int:
        """The verdict's exit code; 2 when nothing was decided."""
        return UNDECIDED_EXIT if self.verdict is None else self.verdict.exit_code

    def format(self, include_time: bool = True) -> str:
        """Text block with a fixed field order; wall time comes last."""
        lines = [
            f"instance: {self.instance}",
            f"command: {self.command}",
            f"answer: {self.answer_text}",
            f"certified: {str(self.certified).lower()}",
            f"certificate: {self.certificate.value}",
            "witness: " + _indices(self.witness),
            "parameters: "
            + " ".join(f"{name}={value}" for name, value in self.parameters),
            "removed: " + _indices(self.removed),
            f"detail: {self.detail}",
        ]
        if include_time:
            lines.append(f"wall_time: {self.wall_time:.3f}")
        return "\n".join(lines) + "\n"


def _indices(indices: Optional[Sequence[int]]) -> str:
    if indices is None:
        return "-"
    return " ".join(str(i) for i in indices)


def parameters(**kwargs) -> Tuple[Tuple[str, str], ...]:
    """(name, value) pairs in argument order, skipping None."""
    return tuple(
        (name, value.name.lower() if isinstance(value, Enum) else str(value))
        for name, value in kwargs.items()
        if value is not None
    )


def write_report(report: RunReport, path: Path) -> None:
    with open_(path, "wt") as out:
        out.write(report.format())


def finish(
    run: Callable[[], RunReport],
    instance: Path,
    command: str,
    report: Optional[Path] = None,
) -> None:
    """
    Runs a command body, prints the answer, optionally writes the report, and
    exits with the report's code (3 when the input or a precondition is at
    fault, which includes a pattern that is not chordal).
    """
    try:
        result = run().timed()
    except (InstanceError, PreconditionViolated, NotChordal, OSError) as err:
        logger.error("{}: {}", instance, err)
        sys.exit(INPUT_ERROR_EXIT)
    except EdmError as err:
        logger.error("{} failed on {}: {}", command, instance, err)
        result = RunReport(str(instance), command, detail=str(err)).timed()
    print(result.answer_text)
    if result.witness is not None:
        print("witness: " + _indices(result.witness))
    if result.detail:
        print(result.detail)
    if report is not None:
        write_report(result, report)
    logger.info(
        "{} {}: {} in {:.3f}s", command, instance, result.answer_text, result.wall_time
    )
    sys.exit(result.exit_code)
