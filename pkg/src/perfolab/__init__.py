"""Random perfect graphs: sampling, first-order model checking and experiments."""
from .graph import Graph, PartitionedGraph, VertexSet, complement
from .sampler import Orientation, PerfectSample, SampleSeed, sample_perfect, sample_unipolar

__version__ = "0.1.0"

__all__ = [
    "Graph", "Orientation", "PartitionedGraph", "PerfectSample", "SampleSeed", "VertexSet",
    "complement", "sample_perfect", "sample_unipolar", "__version__",
]
