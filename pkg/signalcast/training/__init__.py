from .checkpoint import CHECKPOINT_FILE, Checkpoint, load_checkpoint, save_checkpoint
from .losses import LossBreakdown, hybrid_loss, loss_cycle, loss_flow, loss_timing, masked_mae
from .trainer import HISTORY_COLUMNS, Trainer, TrainResult, dtype_for, prepare_batches
