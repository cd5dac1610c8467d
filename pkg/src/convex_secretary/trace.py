"""Record of one online run, shared by every online algorithm."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import Number, fmt_rational

CLASSIC = "classic"
THRESHOLD = "threshold"


@dataclass
class OnlineTrace:
    seed: int | None
    k: int | None
    tau: Fraction | None  # threshold level; None on the classic branch or when nothing qualified
    tau_id: int | None  # element realising the threshold (None = +infinity, accept nothing)
    accepted: list[int]
    profit: Number
    branch: str
    coins: list[int] = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def tau_infinite(self) -> bool:
        return self.branch == THRESHOLD and self.tau_id is None

    def row(self) -> dict:
        if self.branch == THRESHOLD and self.tau_id is None:
            tau = "inf"
        elif self.tau is None:
            tau = ""
        else:
            tau = str(fmt_rational(self.tau))
        return {
            "seed": "" if self.seed is None else self.seed,
            "k": "" if self.k is None else self.k,
            "tau": tau,
            "tau_id": "" if self.tau_id is None else self.tau_id,
            "branch": self.branch,
            "coins": "".join(str(c) for c in self.coins),
            "accepted": " ".join(str(e) for e in self.accepted),
            "profit": str(fmt_rational(self.profit)),
        }
