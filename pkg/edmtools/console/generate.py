import enum
import sys
from typing import List, Optional, Tuple

import autoclick as ac
from loguru import logger

from edmtools.console.report import INPUT_ERROR_EXIT
from edmtools.generators import (
    gen_masked_pointcloud,
    gen_saxe,
    line_placement,
    mask_from_name,
)
from edmtools.instances import Instance, write_instance
from edmtools.utils import EdmError, InstanceError


class GeneratorKind(enum.Enum):
    MASKED = 0
    """Random points with entries hidden by a mask model."""
    SAXE = 1
    """Weighted graph encoded as a planar instance on a circle."""


def parse_weight(text: str) -> Tuple[int, int, int]:
    """Parses 'u-v:w' into (u, v, w)."""
    try:
        edge, w = text.split(":")
        u, v = edge.split("-")
        return int(u), int(v), int(w)
    except ValueError:
        raise InstanceError(f"Invalid weighted edge {text!r}; expected 'u-v:w'")


def cmd_generate(
    kind: GeneratorKind,
    outfile: ac.WritableFile,
    n: int = 10,
    dim: int = 2,
    mask: str = "chordal",
    mask_param: Optional[int] = None,
    weights: Optional[List[str]] = None,
    epsilon: float = 0.5,
    seed: int = 0,
) -> Instance:
    """
    Generates an instance and writes it to `outfile`.

    Raises:
        InstanceError: if the parameters describe no valid instance.
        PreconditionViolated: if the weighted graph is unusable.
    """
    if kind == GeneratorKind.MASKED:
        instance = gen_masked_pointcloud(n, dim, mask_from_name(mask, mask_param), seed)
    elif kind == GeneratorKind.SAXE:
        if not weights:
            raise InstanceError("The saxe generator needs --weights")
        triples = [parse_weight(w) for w in weights]
        instance = gen_saxe(triples, epsilon, placement=line_placement(triples))
    else:
        raise ValueError(f"Unsupported generator: {kind}")
    write_instance(instance, outfile)
    logger.info("Wrote a {}-point instance to {}", instance.n, outfile)
    return instance


def generate(
    kind: GeneratorKind,
    outfile: ac.WritableFile,
    n: int = 10,
    dim: int = 2,
    mask: str = "chordal",
    mask_param: Optional[int] = None,
    weights: Optional[List[str]] = None,
    epsilon: float = 0.5,
    seed: int = 0,
):
    """
    Generate an instance file.

    Args:
        kind: 'MASKED' - uniform random points in the unit cube with hidden
            entries; 'SAXE' - a weighted graph encoded on a circle, with anchors
            at its center.
        outfile: The instance file to write.
        n: Number of points, for 'MASKED'.
        dim: Dimension of the points, for 'MASKED'.
        mask: Mask model, for 'MASKED': 'per-row', 'block-free', 'chordal' or
            'cover'.
        mask_param: Parameter of the mask model: the row budget, the excluded
            block size, or the number of cover cliques.
        weights: Weighted edges 'u-v:w' with w in 1..4, for 'SAXE'.
        epsilon: Largest fraction of unspecified entries, for 'SAXE'.
        seed: Random seed, for 'MASKED'.
    """
    try:
        cmd_generate(kind, outfile, n, dim, mask, mask_param, weights, epsilon, seed)
    except (EdmError, ValueError) as err:
        logger.error("Cannot generate instance: {}", err)
        sys.exit(INPUT_ERROR_EXIT)
    print(outfile)
