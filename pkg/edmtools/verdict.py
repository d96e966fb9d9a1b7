from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from edmtools.matrix import Realization


class Answer(Enum):
    """Outcome of a completion decision.
    """

    YES = 0
    """A completion exists; a realization certificate is attached."""
    NO = 1
    """No completion exists (certified or heuristic, see `Verdict.certified`)."""
    UNKNOWN = 2
    """The backend could not decide within its budget."""


class CertificateKind(Enum):
    """What backs an answer.
    """

    REALIZATION = "realization"
    FAILING_CLIQUE = "failing clique"
    REFUTATION = "refutation"
    NONE = "none"


@dataclass(frozen=True)
class Verdict:
    """
    Result of a decision procedure.

    Args:
        answer: The answer.
        certified: False for a heuristic no (the oracle after failed restarts).
        completion: Complete squared-distance matrix, for yes.
        realization: Points realizing `completion`, for yes.
        witness: Index set whose fully specified submatrix is not embeddable.
        detail: Free-text explanation, shown in reports.
    """

    answer: Answer
    certified: bool = True
    completion: Optional[np.ndarray] = None
    realization: Optional[Realization] = None
    witness: Optional[Tuple[int, ...]] = None
    detail: str = ""

    @staticmethod
    def yes(
        completion: np.ndarray, realization: Realization, detail: str = ""
    ) -> "Verdict":
        return Verdict(
            Answer.YES, completion=completion, realization=realization, detail=detail
        )

    @staticmethod
    def no(
        witness: Optional[Tuple[int, ...]] = None,
        certified: bool = True,
        detail: str = "",
    ) -> "Verdict":
        return Verdict(
            Answer.NO,
            certified=certified,
            witness=None if witness is None else tuple(witness),
            detail=detail,
        )

    @staticmethod
    def unknown(detail: str = "") -> "Verdict":
        return Verdict(Answer.UNKNOWN, certified=False, detail=detail)

    @property
    def definite(self) -> bool:
        """True for yes and for a certified no.
        """
        return self.answer is Answer.YES or (
            self.answer is Answer.NO and self.certified
        )

    @property
    def certificate(self) -> CertificateKind:
        if self.answer is Answer.YES:
            return CertificateKind.REALIZATION
        if self.answer is Answer.NO and self.certified:
            if self.witness is not None:
                return CertificateKind.FAILING_CLIQUE
            return CertificateKind.REFUTATION
        return CertificateKind.NONE

    @property
    def exit_code(self) -> int:
        if self.answer is Answer.YES:
            return 0
        if self.answer is Answer.NO and self.certified:
            return 1
        return 2
