"""Active learning with partial labels.

A pool-based query loop where the oracle returns candidate label sets
instead of exact labels. The predictor trains on the candidate sets with a
risk-consistent weighted cross entropy; a second net (the WorseNet) trains
on the complementary sets and improves both inference (via the probability
gap between the two nets) and query selection (via the pseudo candidate
set of classes where the predictor dominates).
"""

from .candidate_sets import (FPS, GIVEN, USS, Oracle, generate_fps,
                             generate_uss, invert, invert_batch)
from .config import ExperimentConfig, load_config, parse_config, serialize_config
from .datasets import DatasetBundle, load_csv, load_idx, make_blobs, write_csv
from .errors import (ConfigurationError, DataError, FormatError, NumericError,
                     RequestError)
from .estimators import PartialLabelClassifier, WorseNetClassifier
from .experiment import run_experiment, run_single, summarize_records
from .loop import (AlplRun, PoolState, RoundRecord, TrainSchedule, init_pools,
                   predict_plain, predict_wp, run_alpl, run_round)
from .losses import (EntropyDecomposition, LossReport, irc_loss, kld_term,
                     rc_loss, worse_loss, worse_loss_entropy_decomposition)
from .nn import (AdamState, BatchOutput, DenseNet, NetGradients, adam_step,
                 backward, forward, init_adam, init_net, softmax)
from .selectors import (SELECTOR_KINDS, ScoredPool, coreset_select, eu_score,
                        mcu_score, mmu_score, pseudo_candidate_set,
                        select_top_b, uncertainty_scores, ws_score)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "AlplRun", "BatchOutput", "ConfigurationError",
    "DataError", "DatasetBundle", "DenseNet", "EntropyDecomposition",
    "ExperimentConfig", "FPS", "FormatError", "GIVEN", "LossReport",
    "NetGradients", "NumericError", "Oracle", "PartialLabelClassifier",
    "PoolState", "RequestError", "RoundRecord", "SELECTOR_KINDS",
    "ScoredPool", "TrainSchedule", "USS", "WorseNetClassifier",
    "adam_step", "backward", "coreset_select", "eu_score", "forward",
    "generate_fps", "generate_uss", "init_adam", "init_net", "init_pools",
    "invert", "invert_batch", "irc_loss", "kld_term", "load_config",
    "load_csv", "load_idx", "make_blobs", "mcu_score", "mmu_score",
    "parse_config", "predict_plain", "predict_wp", "pseudo_candidate_set",
    "rc_loss", "run_alpl", "run_experiment", "run_round", "run_single",
    "select_top_b", "serialize_config", "softmax", "summarize_records",
    "uncertainty_scores", "worse_loss", "worse_loss_entropy_decomposition",
    "write_csv", "ws_score",
]
