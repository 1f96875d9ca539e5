"""Figure specification: which kind, from which files, to which image."""

from dataclasses import dataclass, field

from .errors import InvalidOptionError

KINDS = ("beta-bands", "scenario-means", "kriging", "rope", "trace", "acf")

# which kinds accept a second input file (data overlay)
_TWO_INPUT_KINDS = ("scenario-means",)


@dataclass(frozen=True)
class FigureSpec:
    """One renderable figure.

    ``inputs`` holds the CSV path(s): every kind takes one file, and
    scenario-means optionally takes the raw dataset CSV second for the
    observed-trajectory overlay.  ``ids`` restricts panel selection for
    curve-per-panel kinds, ``params`` does the same for trace and acf;
    empty means a sensible default.  ``threshold`` only affects the rope
    kind's dotted reference line.
    """

    kind: str
    inputs: tuple
    out: str
    ids: tuple = field(default=())
    params: tuple = field(default=())
    threshold: float = 0.9
    dpi: int = 120
    max_panels: int = 12

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidOptionError(
                f"kind must be one of {', '.join(KINDS)}; got {self.kind!r}"
            )
        inputs = tuple(str(p) for p in self.inputs)
        object.__setattr__(self, "inputs", inputs)
        if not inputs:
            raise InvalidOptionError("at least one input CSV is required")
        limit = 2 if self.kind in _TWO_INPUT_KINDS else 1
        if len(inputs) > limit:
            raise InvalidOptionError(
                f"{self.kind} takes at most {limit} input file(s), got {len(inputs)}"
            )
        if not self.out:
            raise InvalidOptionError("an output image path is required")
        if not 0.0 < self.threshold < 1.0:
            raise InvalidOptionError(
                f"threshold must be in (0, 1), got {self.threshold}"
            )
        if self.dpi <= 0:
            raise InvalidOptionError(f"dpi must be positive, got {self.dpi}")
        if self.max_panels <= 0:
            raise InvalidOptionError(
                f"max_panels must be positive, got {self.max_panels}"
            )
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "params", tuple(str(p) for p in self.params))
