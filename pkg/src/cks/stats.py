import json
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class OpStats:
    """Work done by one operator run.

    ``macs`` counts issued multiply-accumulates.  A term rejected by an
    in-loop range check still counts: it costs an iteration, exactly like the
    conditional zero it replaces.  ``zeros_skipped`` is the part of the
    reference operator's work that was never issued.
    """

    macs: int
    zeros_skipped: int = 0

    @classmethod
    def against(cls, macs, reference_macs):
        return cls(int(macs), int(reference_macs) - int(macs))

    @property
    def flops(self):
        return 2 * self.macs

    def to_json(self):
        return json.dumps(asdict(self))
