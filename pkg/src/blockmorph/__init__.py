"""blockmorph: block-scale urban morphology metrics, SOM clustering, and
metric-to-form retrieval."""

__version__ = "0.1.0"

from .geometry import EdgeSet, Point2, PolygonM, Ring  # noqa: F401
from .ingest import Block, Building, Corpus, RawBuilding, RoadSegment  # noqa: F401
from .metrics import (  # noqa: F401
    INDICATORS,
    SET_COMPOSITIONS,
    FeatureMatrix,
    MetricRecord,
    MetricSet,
)
from .som import EncodingVector, SomConfig, SomModel  # noqa: F401
from .retrieval import Query, RankedResult  # noqa: F401
