from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..core.exceptions import MissingColumnError

# order in which run_coupled records norms; series.csv follows it
RUN_COLUMNS: Tuple[str, ...] = (
    "u_lq",
    "u_dsigma",
    "u_d2sigma",
    "u_t",
    "v_lq",
    "v_dsigma",
    "v_d2sigma",
    "v_t",
    "v_lmp1",
    "v_lqp1",
    "u_lmp2",
    "u_lqp2",
)


@dataclass
class NormSeries:
    """Norms sampled at strictly increasing times, one list per column id."""

    times: List[float] = field(default_factory=list)
    columns: Dict[str, List[float]] = field(default_factory=dict)
    blow_up: bool = False
    blow_up_time: Optional[float] = None

    @classmethod
    def from_columns(cls, times, columns: Dict[str, object]) -> "NormSeries":
        series = cls(times=[float(t) for t in times], columns={k: [float(x) for x in v] for k, v in columns.items()})
        series.validate()
        return series

    def validate(self) -> None:
        length = len(self.times)
        for name, values in self.columns.items():
            if len(values) != length:
                raise ValueError(f"column {name!r} has {len(values)} values for {length} times")
        if length > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("series times must be strictly increasing")

    def append(self, t: float, row: Dict[str, float]) -> None:
        if self.times and t <= self.times[-1]:
            raise ValueError(f"time {t} does not increase past {self.times[-1]}")
        if not self.columns:
            self.columns = {name: [] for name in row}
        if set(row) != set(self.columns):
            raise ValueError(f"row columns {sorted(row)} differ from series columns {sorted(self.columns)}")
        self.times.append(float(t))
        for name, value in row.items():
            self.columns[name].append(float(value))

    def __len__(self) -> int:
        return len(self.times)

    @property
    def column_names(self) -> List[str]:
        return list(self.columns)

    def t(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumnError(f"series has no column {name!r} (have: {', '.join(self.columns) or 'none'})")
        return np.asarray(self.columns[name], dtype=float)

    def scaled(self, factor: float) -> "NormSeries":
        return NormSeries(
            times=list(self.times),
            columns={k: [factor * x for x in v] for k, v in self.columns.items()},
            blow_up=self.blow_up,
            blow_up_time=self.blow_up_time,
        )
