from ..errors import ConfigError
from .agdn import AsyncGraphDiffusion, MessageBuffer, TrafficMessage, process_timeline, replay_timeline
from .batching import InstanceBatch, build_batch
from .forecaster import AsyncForecaster, predicted_slots
from .sapn import SemiAutoregressiveDecoder, StateEvolutionUnit, SemiAutoregressivePredictor, run_rollout
from .time_encoding import TimeEncoding
from .ttcn import MetaFilter, TransformableConvolution, fuse

MODEL_KINDS = ("aseer", "recurrent")


def create_model(config, sensor_ids, stats=None, kind=None):
    """Build a learnable forecaster from a ModelConfig."""
    kind = kind or config.kind
    if kind == "aseer":
        return AsyncForecaster(sensor_ids, config, stats)
    if kind == "recurrent":
        from ..baselines import RecurrentForecaster

        return RecurrentForecaster(sensor_ids, config, stats)
    raise ConfigError(f"unknown model kind {kind!r}; expected one of {', '.join(MODEL_KINDS)}")
