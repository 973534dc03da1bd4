# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

from dataclasses import astuple, dataclass, fields
from typing import Optional, Tuple

from ..channel import AfOutagePair, DfOutageProfile
from ..optimizer import SweepRow


@dataclass(frozen=True)
class OutputRecord:
    """
    Flat row emitted for every operating point; fields that do not apply stay None
    """
    mode: str
    snr_db: float
    rate_bpshz: float
    p12: Optional[float] = None
    p21: Optional[float] = None
    p1r: Optional[float] = None
    p2r: Optional[float] = None
    pr1: Optional[float] = None
    pr2: Optional[float] = None
    goodput_bpshz: Optional[float] = None
    normalized_rate: Optional[float] = None
    eb_paper: Optional[float] = None
    eb_renewal: Optional[float] = None
    eb_empirical: Optional[float] = None
    goodput_empirical: Optional[float] = None
    source: str = "analytic"
    stderr_goodput: Optional[float] = None
    stderr_eb: Optional[float] = None

    @classmethod
    def header(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def values(self) -> tuple:
        return astuple(self)

    @classmethod
    def from_row(cls, row: SweepRow) -> "OutputRecord":
        point = row.point
        outage = {}
        if isinstance(point.outage, AfOutagePair):
            outage = {"p12": point.outage.p12, "p21": point.outage.p21}
        elif isinstance(point.outage, DfOutageProfile):
            outage = {
                "p1r": point.outage.p1r,
                "p2r": point.outage.p2r,
                "pr1": point.outage.pr1,
                "pr2": point.outage.pr2,
            }
        empirical = {}
        if row.sim is not None:
            goodput, eb = row.sim.empirical_goodput, row.sim.empirical_eb
            empirical = {
                "goodput_empirical": goodput.value,
                "stderr_goodput": goodput.stderr,
                "eb_empirical": eb.value,
                "stderr_eb": eb.stderr,
            }
        return cls(
            mode=point.mode.value,
            snr_db=row.snr_db,
            rate_bpshz=point.rate,
            goodput_bpshz=point.goodput,
            normalized_rate=point.normalized_rate,
            eb_paper=point.eb_paper,
            eb_renewal=point.eb_renewal,
            source=row.source.value,
            **outage,
            **empirical,
        )
