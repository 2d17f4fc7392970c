"""Exception types raised by the package.

Every error carries a short machine-readable ``code`` matching the names used
in the CLI output and in the JSON reports.
"""


class SrgError(Exception):
    code = "srg_error"


class RankDeficientError(SrgError):
    code = "rank_deficient"


class PoleOnGridError(SrgError):
    code = "pole_on_grid"


class ImproperSystemError(SrgError):
    code = "improper_system"


class SoftRequiresStableError(SrgError):
    code = "soft_requires_stable"


class OnCurveError(SrgError):
    code = "on_curve"


class IllPosedError(SrgError):
    code = "ill_posed"


class DegeneratePairError(SrgError):
    code = "degenerate_pair"


class HorizonOverflowError(SrgError):
    code = "horizon_overflow"


class ZeroCrossCheckError(SrgError):
    """The two transmission-zero routes disagree beyond tolerance."""

    code = "zero_cross_check"


class SchemaError(SrgError):
    code = "schema_error"


class NonsquareSystemError(SchemaError):
    code = "nonsquare_system"
