"""Console entry point.

Pins BLAS thread counts before numpy loads so report bytes do not depend
on the host's core count or threading defaults.
"""
import os
import sys

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
             "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")


def main() -> None:
    from .cli import main as _cli_main
    sys.exit(_cli_main())
