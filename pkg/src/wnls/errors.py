"""Exception types shared across the package."""


class WnlsError(Exception):
    """Base class for all package-specific errors."""


class GridMismatch(WnlsError):
    """Operands live on grids of different size."""


class NonZeroMean(WnlsError):
    """An operation requiring a mean-free field received one with a nonzero
    constant mode."""


class NonPhysical(WnlsError):
    """A field value is outside the range where the requested operation is
    numerically meaningful (e.g. exponential overflow)."""


class UnresolvedMollifier(WnlsError):
    """The mollification scale is below what the grid resolves (eps < 4/n)."""


class SmallDataViolation(WnlsError):
    """Focusing run rejected because the small-data condition fails."""

    def __init__(self, lhs: float, message: str = ""):
        self.lhs = lhs
        if not message:
            message = (
                "small-data condition violated: "
                f"weighted initial norm {lhs:.6g} exceeds 1"
            )
        super().__init__(message)


class BlowUp(WnlsError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, step: int, time: float):
        self.step = step
        self.time = time
        super().__init__(f"non-finite field values at step {step} (t = {time:.6g})")


class DegenerateFit(WnlsError):
    """A rate fit was requested on data that cannot determine a slope."""


class ConfigError(WnlsError):
    """Invalid run configuration."""


class SnapshotError(WnlsError):
    """Base class for snapshot file format errors."""


class BadMagic(SnapshotError):
    """Snapshot file does not start with the expected format marker."""


class TruncatedPayload(SnapshotError):
    """Snapshot payload holds fewer bytes than the header promises."""


class HeaderMismatch(SnapshotError):
    """Snapshot header fields are inconsistent with the payload or with the
    declared format."""
