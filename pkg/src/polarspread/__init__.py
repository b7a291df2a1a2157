"""Maximal symplectic and orthogonal partial spreads and partial ovoids over
small finite fields, with exhaustive desk-scale verification.

The usual entry points:

    from polarspread import families, verify
    fam = families.transversal_spread(3, 1)
    cert = verify.check_maximal_spread(fam, "symplectic")
"""

__version__ = "0.1.0"

from . import artifacts, families, gf, linalg, octonion, spaces, verify  # noqa: F401
