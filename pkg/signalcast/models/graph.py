from dataclasses import dataclass, field

from ..errors import DuplicateSensorError, UnknownSensorError
from ..utils.geo import haversine_km


@dataclass(frozen=True)
class Sensor:
    sensor_id: str
    lat: float
    lon: float


@dataclass(frozen=True)
class EdgeFeature:
    distance_km: float
    reachable: int

    def __post_init__(self):
        if self.distance_km < 0:
            raise ValueError(f"distance_km must be >= 0, got {self.distance_km}")
        if self.reachable not in (0, 1):
            raise ValueError(f"reachable must be 0 or 1, got {self.reachable}")

    def as_tuple(self):
        return (float(self.distance_km), float(self.reachable))


@dataclass
class DiffusionGraph:
    """Sensors linked when closer than `epsilon_km`.

    `edges` maps (src, dst) sensor ids to the feature of that directed edge.
    A measurement at src is diffused along (src, dst) into dst's buffer.
    """

    nodes: tuple
    edges: dict
    epsilon_km: float
    _index: dict = field(init=False, repr=False)
    _out: dict = field(init=False, repr=False)

    def __post_init__(self):
        self.nodes = tuple(self.nodes)
        self._index = {s.sensor_id: i for i, s in enumerate(self.nodes)}
        self._out = {s.sensor_id: [] for s in self.nodes}
        for src, dst in sorted(self.edges):
            self._out[src].append(dst)

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, sensor_id):
        return sensor_id in self._index

    @property
    def sensor_ids(self):
        return [s.sensor_id for s in self.nodes]

    def index_of(self, sensor_id):
        try:
            return self._index[sensor_id]
        except KeyError:
            raise UnknownSensorError(sensor_id) from None

    def receivers(self, sensor_id):
        """Sensors that store a message when `sensor_id` measures, ascending id."""
        if sensor_id not in self._out:
            raise UnknownSensorError(sensor_id)
        return self._out[sensor_id]

    def edge(self, src, dst):
        return self.edges[(src, dst)]

    def __repr__(self):
        return f"<DiffusionGraph nodes={len(self.nodes)} edges={len(self.edges)} eps={self.epsilon_km}km>"


def build_graph(sensors, lane_reachability, epsilon_km):
    """Link every ordered pair of distinct sensors closer than `epsilon_km`.

    `sensors` is an iterable of (sensor_id, lat, lon); `lane_reachability`
    a set of directed (src, dst) pairs marked directly reachable.
    """
    if epsilon_km <= 0:
        raise ValueError(f"epsilon_km must be positive, got {epsilon_km}")

    nodes = []
    seen = set()
    for sensor_id, lat, lon in sensors:
        if sensor_id in seen:
            raise DuplicateSensorError(sensor_id)
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise ValueError(f"invalid coordinates for sensor {sensor_id!r}: ({lat}, {lon})")
        seen.add(sensor_id)
        nodes.append(Sensor(sensor_id, float(lat), float(lon)))
    nodes.sort(key=lambda s: s.sensor_id)

    reach = set(lane_reachability)
    edges = {}
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            distance = float(haversine_km(a.lat, a.lon, b.lat, b.lon))
            if distance < epsilon_km:
                edges[(a.sensor_id, b.sensor_id)] = EdgeFeature(
                    distance, int((a.sensor_id, b.sensor_id) in reach)
                )
                edges[(b.sensor_id, a.sensor_id)] = EdgeFeature(
                    distance, int((b.sensor_id, a.sensor_id) in reach)
                )
    return DiffusionGraph(tuple(nodes), edges, epsilon_km)
