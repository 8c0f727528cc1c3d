"""Fair node classification by disentangling attribute, structure and potential bias."""

from ._backend import backend_name
from .config import PRESETS, TrainConfig, preset
from .errors import BiasDisenError, NumericError, ParseError, SchemaError, UndefinedMetricError, ValidationError
from .experiments import analyze_dataset, run_ablation, run_baseline, run_seeds, sweep
from .graph import AttributedGraph, SplitMasks, build_knn_graph, normalize_adjacency, split_nodes
from .io import load_dataset, load_named
from .metrics import analyze, prediction_report
from .model import forward_full, init_params, prepare_inputs
from .objectives import LossWeights, total_loss
from .reporting import RunReport, emit_report
from .sparse import SparseMatrix
from .training import train, train_vanilla_gcn

__version__ = "0.1.0"
