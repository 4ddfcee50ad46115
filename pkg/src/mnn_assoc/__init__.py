"""Two-level mirroring-network associative memory: voice features mapped to image features."""

from .clustering import KMeansModel, accuracy, assign_groups, classify, forgy_kmeans, kmeans_restarts
from .hierarchy import EvalReport, HierarchyConfig, HierarchyModel, associate, evaluate, train_full
from .ingestion import SamplePair, SyntheticSpec, generate_synthetic, split
from .mirror import MirrorNet, decode, encode, new_mirror, reconstruction_error, train_mirror
from .neural import Network, TrainConfig, backprop, check_gradients, forward, init_network, train_epochs

__version__ = "0.1.0"
