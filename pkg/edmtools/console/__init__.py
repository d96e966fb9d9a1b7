"""edmtools command line interface.
"""
from edmtools.console import compress, generate, oracle, solve

import autoclick as ac


COMMON_SHORT_NAMES = {
    "instance": "i",
    "dim": "d",
    "outfile": "o",
    "threads": "j",
    "seed": "s",
    "restarts": "R",
    "report": "r",
}


def merge_short_names(d):
    sn = dict(COMMON_SHORT_NAMES)
    sn.update(d)
    return sn


# Set global options
ac.set_global("infer_short_names", False)
ac.set_global("add_composite_prefixes", False)


@ac.group()
def edmtools():
    pass


# Decide whether a partial distance matrix has a completion in R^d.
edmtools.command(
    decorated=solve.solve,
    short_names=merge_short_names({"strategy": "S", "kmax": "k"}),
)


# Shrink an instance to an equivalent principal submatrix.
edmtools.command(
    decorated=compress.compress,
    short_names=merge_short_names(
        {"scheme": "S", "cover_file": "c", "max_unspecified": "m", "kmax": "k"}
    ),
)


# Write a random or weighted-graph instance.
edmtools.command(
    decorated=generate.generate,
    types={"weights": ac.DelimitedList(str)},
    short_names=merge_short_names(
        {"kind": "K", "n": "n", "dim": "d", "mask": "m", "weights": "w", "epsilon": "e"}
    ),
)


# Cross-check an instance with the numerical oracle.
edmtools.command(decorated=oracle.oracle, short_names=COMMON_SHORT_NAMES)
