"""Error taxonomy for the plotting pipeline."""


class ReportPlotsError(Exception):
    """Base for everything this package raises on purpose."""


class SchemaError(ReportPlotsError):
    """Input CSV deviates from the harness schema.

    The first offending column is carried in .column: a missing
    expected name, an unknown name, or the first misplaced one.
    """

    def __init__(self, column: str, detail: str = ""):
        self.column = column
        super().__init__(column if not detail else f"{column}: {detail}")


class EmptyData(ReportPlotsError):
    """A requested figure kind has no rows to draw."""


class IoError(ReportPlotsError):
    """Filesystem failure while reading input or writing images."""
