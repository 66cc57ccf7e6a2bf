"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class DualPlanarError(Exception):
    """Base class for all errors raised by :mod:`dualplanar`."""


# planar_core
class MalformedDocument(DualPlanarError):
    """The graph document does not parse or references unknown items."""


class DuplicateId(MalformedDocument):
    """Two vertices or two edges share an id."""


class NonPlanarRotation(DualPlanarError):
    """The rotation system does not describe a genus-zero embedding."""


# congest_sim
class BandwidthExceeded(DualPlanarError):
    """A vertex tried to push more than B bits over one edge in one round."""


class ItemTooLarge(DualPlanarError):
    """A broadcast item does not fit in a single B-bit message."""


class Disconnected(DualPlanarError):
    """The operation needs a graph that is connected in the undirected sense."""


# shortcuts / dual_agg
class InvalidPartition(DualPlanarError):
    """A part is empty, overlaps another part, or induces a disconnected subgraph."""


class InvalidDualPartition(InvalidPartition):
    """A part of dual nodes is not connected in the dual graph."""


class OversizedValue(DualPlanarError):
    """A minor-aggregation value does not fit in a machine word."""


class TooManyVirtualNodes(DualPlanarError):
    """More virtual nodes were requested than the configured bound allows."""


class NotATree(DualPlanarError):
    """The given edge set is not a spanning tree of the node set."""


class CutNotRespecting(DualPlanarError):
    """The cut-marking edges are not edges of the given tree."""


# bdd
class PropertyViolation(DualPlanarError):
    """A decomposition failed one of its structural assertions."""


# dual_labeling
class BagMismatch(DualPlanarError):
    """Two labels from different bags were decoded against each other."""


class UnknownFace(DualPlanarError):
    """The requested face id does not exist."""


class NegativeCycleReport(DualPlanarError):
    """A negative cycle exists in the dual; raised as an expected outcome.

    Attributes
    ----------
    bag_id:
        Id of the decomposition bag whose local computation found the cycle.
    """

    def __init__(self, bag_id: int, message: str | None = None) -> None:
        self.bag_id = bag_id
        super().__init__(message or f"negative dual cycle detected in bag {bag_id}")


# flow_cut / global_mincut
class STIdentical(DualPlanarError):
    """Source and sink are the same vertex."""


class NotSameFace(DualPlanarError):
    """Source and sink do not share a face of the embedding."""


class OracleContractViolation(DualPlanarError):
    """An approximate SSSP oracle returned an estimate below the true distance."""


class SmoothingFailed(DualPlanarError):
    """Smoothing did not reach the edge-wise smoothness guarantee."""


class Acyclic(DualPlanarError):
    """The graph has no cycle, so its girth is undefined."""
