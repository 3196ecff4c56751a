import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from marshmallow import (
    RAISE,
    Schema,
    ValidationError,
    fields,
    post_load,
    pre_load,
    validate,
    validates_schema,
)

from .errors import ConfigError


class Config:
    DATA_DIR = os.getenv("SIGNALCAST_DATA_DIR", "data")
    OUTPUT_DIR = os.getenv("SIGNALCAST_OUTPUT_DIR", "runs")
    LOG_LEVEL = os.getenv("SIGNALCAST_LOG_LEVEL", "INFO")
    DEVICE = os.getenv("SIGNALCAST_DEVICE", "cpu")
    NUM_THREADS = int(os.getenv("SIGNALCAST_NUM_THREADS", 1))
    SEED = int(os.getenv("SIGNALCAST_SEED", 0))


# Vehicles per second at each hour of the day, interpolated linearly and wrapped at midnight.
DEFAULT_DIURNAL_PROFILE = [
    0.04, 0.03, 0.03, 0.03, 0.04, 0.07, 0.14, 0.22, 0.25, 0.20, 0.16, 0.15,
    0.16, 0.15, 0.15, 0.16, 0.19, 0.24, 0.25, 0.19, 0.13, 0.10, 0.07, 0.05,
]


@dataclass
class ScenarioConfig:
    grid_rows: int = 2
    grid_cols: int = 3
    lanes_per_intersection: int = 4
    p_min: int = 40
    p_max: int = 200
    base_cycle: int = 60
    controller_gain: float = 400.0
    diurnal_profile: list = field(default_factory=lambda: list(DEFAULT_DIURNAL_PROFILE))
    coupling: float = 0.5
    spillover: float = 0.3
    length_noise: float = 5.0
    flow_noise: float = 0.1
    missing_ratio: float = 0.3
    mean_missing_span: float = 1800.0
    spacing_km: float = 0.4
    origin_lat: float = 27.83
    origin_lon: float = 113.13
    seed: int = 0

    @property
    def num_sensors(self):
        return self.grid_rows * self.grid_cols * self.lanes_per_intersection


@dataclass
class ModelConfig:
    kind: str = "aseer"
    hidden_dim: int = 64
    time_dim: int = 16
    mlp_layers: int = 3
    step_size: int = 12
    p_floor: float = 20.0
    epsilon_km: float = 1.0
    no_agdn: bool = False
    no_pte: bool = False
    no_sapn: bool = False


@dataclass
class TrainConfig:
    lr: float = 0.001
    patience: int = 10
    max_epochs: int = 100
    grad_clip: float = 5.0
    history_len: int = 3600
    horizon: int = 3600
    stride: int = 1800
    train_fraction: float = 0.6
    val_fraction: float = 0.2
    seed: int = 0
    double_precision: bool = False


@dataclass
class EvalConfig:
    stride: int = 1800
    latency_step_sizes: list = field(default_factory=lambda: [1, 6, 12, 24, 48])
    latency_hours: list = field(default_factory=lambda: [1, 4, 24])
    latency_repeats: int = 5
    latency_batch: int = 20


@dataclass
class RunConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    evaluation: EvalConfig = field(default_factory=EvalConfig)
    days: int = 7


class _StrictSchema(Schema):
    class Meta:
        unknown = RAISE


class ScenarioSchema(_StrictSchema):
    grid_rows = fields.Integer(load_default=2, validate=validate.Range(min=1))
    grid_cols = fields.Integer(load_default=3, validate=validate.Range(min=1))
    lanes_per_intersection = fields.Integer(load_default=4, validate=validate.Range(min=1, max=4))
    p_min = fields.Integer(load_default=40, validate=validate.Range(min=1))
    p_max = fields.Integer(load_default=200)
    base_cycle = fields.Integer(load_default=60)
    controller_gain = fields.Float(load_default=400.0)
    diurnal_profile = fields.List(
        fields.Float(validate=validate.Range(min=0)),
        load_default=lambda: list(DEFAULT_DIURNAL_PROFILE),
        validate=validate.Length(min=1),
    )
    coupling = fields.Float(load_default=0.5, validate=validate.Range(min=0, max=1))
    spillover = fields.Float(load_default=0.3, validate=validate.Range(min=0))
    length_noise = fields.Float(load_default=5.0, validate=validate.Range(min=0))
    flow_noise = fields.Float(load_default=0.1, validate=validate.Range(min=0))
    missing_ratio = fields.Float(
        load_default=0.3, validate=validate.Range(min=0, max=1, max_inclusive=False)
    )
    mean_missing_span = fields.Float(load_default=1800.0, validate=validate.Range(min=1))
    spacing_km = fields.Float(load_default=0.4, validate=validate.Range(min=0, min_inclusive=False))
    origin_lat = fields.Float(load_default=27.83, validate=validate.Range(min=-90, max=90))
    origin_lon = fields.Float(load_default=113.13, validate=validate.Range(min=-180, max=180))
    seed = fields.Integer(load_default=lambda: Config.SEED)

    @validates_schema
    def validate_cycle_bounds(self, data, **kwargs):
        if not data["p_min"] <= data["base_cycle"] <= data["p_max"]:
            raise ValidationError(
                f"require p_min <= base_cycle <= p_max, got "
                f"{data['p_min']} / {data['base_cycle']} / {data['p_max']}",
                "base_cycle",
            )

    @post_load
    def make_config(self, data, **kwargs):
        return ScenarioConfig(**data)


class ModelSchema(_StrictSchema):
    kind = fields.String(load_default="aseer", validate=validate.OneOf(["aseer", "recurrent"]))
    hidden_dim = fields.Integer(load_default=64, validate=validate.Range(min=1))
    time_dim = fields.Integer(load_default=16, validate=validate.Range(min=2))
    mlp_layers = fields.Integer(load_default=3, validate=validate.Range(min=1))
    step_size = fields.Integer(load_default=12, validate=validate.Range(min=1))
    p_floor = fields.Float(load_default=20.0, validate=validate.Range(min=1))
    epsilon_km = fields.Float(load_default=1.0, validate=validate.Range(min=0, min_inclusive=False))
    no_agdn = fields.Boolean(load_default=False)
    no_pte = fields.Boolean(load_default=False)
    no_sapn = fields.Boolean(load_default=False)

    @validates_schema
    def validate_time_dim(self, data, **kwargs):
        if data["time_dim"] % 2:
            raise ValidationError("time_dim must be even", "time_dim")

    @post_load
    def make_config(self, data, **kwargs):
        return ModelConfig(**data)


class TrainSchema(_StrictSchema):
    lr = fields.Float(load_default=0.001, validate=validate.Range(min=0, min_inclusive=False))
    patience = fields.Integer(load_default=10, validate=validate.Range(min=1))
    max_epochs = fields.Integer(load_default=100, validate=validate.Range(min=1))
    grad_clip = fields.Float(load_default=5.0, validate=validate.Range(min=0, min_inclusive=False))
    history_len = fields.Integer(load_default=3600, validate=validate.Range(min=1))
    horizon = fields.Integer(load_default=3600, validate=validate.Range(min=1))
    stride = fields.Integer(load_default=1800, validate=validate.Range(min=1))
    train_fraction = fields.Float(load_default=0.6, validate=validate.Range(min=0, min_inclusive=False))
    val_fraction = fields.Float(load_default=0.2, validate=validate.Range(min=0, min_inclusive=False))
    seed = fields.Integer(load_default=lambda: Config.SEED)
    double_precision = fields.Boolean(load_default=False)

    @validates_schema
    def validate_split(self, data, **kwargs):
        if data["train_fraction"] + data["val_fraction"] >= 1:
            raise ValidationError("train_fraction + val_fraction must leave a test split", "val_fraction")

    @post_load
    def make_config(self, data, **kwargs):
        return TrainConfig(**data)


class EvalSchema(_StrictSchema):
    stride = fields.Integer(load_default=1800, validate=validate.Range(min=1))
    latency_step_sizes = fields.List(
        fields.Integer(validate=validate.Range(min=1)), load_default=lambda: [1, 6, 12, 24, 48]
    )
    latency_hours = fields.List(
        fields.Float(validate=validate.Range(min=0, min_inclusive=False)), load_default=lambda: [1, 4, 24]
    )
    latency_repeats = fields.Integer(load_default=5, validate=validate.Range(min=1))
    latency_batch = fields.Integer(load_default=20, validate=validate.Range(min=1))

    @post_load
    def make_config(self, data, **kwargs):
        return EvalConfig(**data)


class RunConfigSchema(_StrictSchema):
    scenario = fields.Nested(ScenarioSchema)
    model = fields.Nested(ModelSchema)
    training = fields.Nested(TrainSchema)
    evaluation = fields.Nested(EvalSchema)
    days = fields.Integer(load_default=7, validate=validate.Range(min=1))

    @pre_load
    def fill_sections(self, data, **kwargs):
        data = dict(data)
        for section in ("scenario", "model", "training", "evaluation"):
            data.setdefault(section, {})
        return data

    @post_load
    def make_config(self, data, **kwargs):
        return RunConfig(**data)


def parse_run_config(document):
    """Validate a config mapping and build a RunConfig. Raises ConfigError."""
    if not isinstance(document, dict):
        raise ConfigError("config document must be a JSON object")
    try:
        return RunConfigSchema().load(document)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e.messages}") from e


def load_run_config(path=None):
    if path is None:
        return parse_run_config({})
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    return parse_run_config(document)


def dump_run_config(run_config):
    return RunConfigSchema().dump(run_config)
