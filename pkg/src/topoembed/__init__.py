"""Topological descriptors of graphs from scalar node embeddings.

A scalar node embedding is read as a function on the vertices, its
lower-star filtration gives a 0-dimensional persistence diagram, and
diagrams are compared with the q-Wasserstein distance.
"""

from .encoders import ScalarField, WalkConfig, degree_encoder, encode
from .filtration import LowerStarFiltration, lower_star
from .graph_core import WeightedGraph, ego_network, load_edge_list, load_off_mesh
from .metrics import DistanceMatrix, bottleneck, distance_matrix, wasserstein
from .persistence import PersistenceDiagram, finitize, zero_persistence
from .pipeline import ExperimentSpec, graph_descriptor, node_descriptor, run_experiment

__version__ = "0.1.0"
