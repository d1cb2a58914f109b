"""Density-reweighted graph Laplacians on sampled manifolds and their continuum limits."""
from .graph_core import IsolatedVertexError, WeightedGraph
from .harness import ExperimentConfig, bandwidth_schedule, estimate_rate, run_convergence
from .kernel import KernelMoments, KernelProfile, cubic_taper, get_kernel, moments
from .manifold import get_model, sample
from .neighborhood import apply_laplacian, build_graph
from .oracle import LimitSpec, limit_at

__version__ = "0.1.0"
