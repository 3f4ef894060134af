"""Exception hierarchy shared across the pipeline.

Every error carries a short machine-readable ``code`` (used in structured
stderr diagnostics) and the CLI ``exit_code`` bucket it belongs to:
2 for input/parse problems, 3 for computation failures.
"""


class BlockmorphError(Exception):
    code = "error"
    exit_code = 3


class InvalidInput(BlockmorphError):
    code = "invalid_input"
    exit_code = 2


class ParseError(BlockmorphError):
    code = "parse_error"
    exit_code = 2


class EmptyInput(BlockmorphError):
    code = "empty_input"
    exit_code = 2


class UnknownSet(BlockmorphError):
    code = "unknown_set"
    exit_code = 2


class UnknownBlock(BlockmorphError):
    code = "unknown_block"
    exit_code = 2


class MissingIndicator(BlockmorphError):
    code = "missing_indicator"
    exit_code = 2


class EncodingsMismatch(BlockmorphError):
    """Encodings file was not produced by the model it is used with."""

    code = "encodings_mismatch"
    exit_code = 2


class DegenerateGeometry(BlockmorphError):
    code = "degenerate_geometry"
    exit_code = 3


class InsufficientPoints(BlockmorphError):
    code = "insufficient_points"
    exit_code = 3


class NoBlocksFound(BlockmorphError):
    code = "no_blocks_found"
    exit_code = 3


class DegenerateBlock(BlockmorphError):
    code = "degenerate_block"
    exit_code = 3


class ConstantIndicator(BlockmorphError):
    code = "constant_indicator"
    exit_code = 3


class ZeroVariance(BlockmorphError):
    code = "zero_variance"
    exit_code = 3


class DimensionMismatch(BlockmorphError):
    code = "dimension_mismatch"
    exit_code = 3


class EmptyFeatures(BlockmorphError):
    code = "empty_features"
    exit_code = 3
