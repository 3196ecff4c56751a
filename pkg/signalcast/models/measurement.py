from dataclasses import dataclass, field


@dataclass(frozen=True)
class Measurement:
    """One traffic-signal cycle of one sensor.

    `begin` and `length` are integer seconds; the cycle occupies seconds
    begin .. begin + length - 1 inclusive. `observed` is False when the
    sensor failed to report the cycle (ground truth is still carried).
    """

    sensor_id: str
    begin: int
    length: int
    flow: float
    observed: bool = True

    @property
    def end(self):
        return self.begin + self.length - 1

    @property
    def unit_flow(self):
        return self.flow / self.length

    def to_dict(self):
        return {
            "sensor_id": self.sensor_id,
            "begin": self.begin,
            "length": self.length,
            "flow": self.flow,
            "observed": int(self.observed),
        }

    def __repr__(self):
        flag = "" if self.observed else " missing"
        return f"<Measurement {self.sensor_id} b={self.begin} p={self.length} f={self.flow:g}{flag}>"


@dataclass(frozen=True)
class SensorSeries:
    sensor_id: str
    measurements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "measurements", tuple(self.measurements))

    def __len__(self):
        return len(self.measurements)

    def __iter__(self):
        return iter(self.measurements)

    @property
    def observed(self):
        return tuple(m for m in self.measurements if m.observed)

    @property
    def first_begin(self):
        return self.measurements[0].begin if self.measurements else None

    @property
    def last_end(self):
        return self.measurements[-1].end if self.measurements else None

    def with_flags(self, observed_flags):
        flags = list(observed_flags)
        if len(flags) != len(self.measurements):
            raise ValueError(f"expected {len(self.measurements)} flags, got {len(flags)}")
        return SensorSeries(
            self.sensor_id,
            tuple(
                Measurement(m.sensor_id, m.begin, m.length, m.flow, bool(flag))
                for m, flag in zip(self.measurements, flags)
            ),
        )

    def is_gapless(self, index):
        """True when measurement `index` starts right after the previous one ends."""
        if index == 0:
            return True
        return self.measurements[index].begin == self.measurements[index - 1].end + 1


def validate_series(series):
    """Return the list of rule violations in `series`; empty when every invariant holds."""
    violations = []
    previous = None
    for index, m in enumerate(series.measurements):
        if m.sensor_id != series.sensor_id:
            violations.append(
                f"sensor mismatch at index {index}: {m.sensor_id!r} in series {series.sensor_id!r}"
            )
        if m.length < 1:
            violations.append(f"length < 1 at index {index}")
        if m.flow < 0:
            violations.append(f"negative flow at index {index}: {m.flow}")
        if previous is not None:
            if m.begin <= previous.begin:
                violations.append(
                    f"order at index {index}: begin {m.begin} <= prev begin {previous.begin}"
                )
            elif m.begin <= previous.end:
                violations.append(
                    f"overlap at index {index}: begin {m.begin} <= prev end {previous.end}"
                )
        previous = m
    return violations
