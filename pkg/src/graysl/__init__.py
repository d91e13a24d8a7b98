"""Event-camera Gray-code structured light toolkit.

Simulates an event camera watching projected Gray-code stripe patterns,
decodes the resulting event stream into depth-encoded images, and recovers
metric depth through a constant-time row/code disparity lookup, with a
brute-force scanline matcher as oracle and benchmark baseline.
"""

__version__ = "0.1.0"

from .backend import active_backend_name, available_backends, get_backend, set_backend
from .bench import BenchReport, run_bench
from .errors import (
    ConfigurationError,
    DomainError,
    GraySLError,
    IntegrityError,
    ParseError,
)
from .event_io import read_events, write_events
from .geometry import RectifiedRig, default_rig, identity_remap, load_rig, rectify_image, triangulate
from .graycode import (
    GrayCodeConfig,
    PatternSet,
    decode_gray,
    encode_gray,
    make_pattern_set,
    stack_to_code,
)
from .matching import (
    build_gx_map,
    depth_pipeline,
    make_projector_code_image,
    query_disparity,
    search_disparity,
)
from .metrics import MetricReport, compute_metrics
from .pipeline import (
    OverlapBuffer,
    assemble_code,
    binarize_slice,
    median_filter,
    morph_close,
    segment_stream,
)
from .simulator import (
    EventStream,
    ProjectionTiming,
    Scene,
    SensorModel,
    generate_events,
    project_slide,
)

__all__ = [
    "BenchReport",
    "ConfigurationError",
    "DomainError",
    "EventStream",
    "GrayCodeConfig",
    "GraySLError",
    "IntegrityError",
    "MetricReport",
    "OverlapBuffer",
    "ParseError",
    "PatternSet",
    "ProjectionTiming",
    "RectifiedRig",
    "Scene",
    "SensorModel",
    "active_backend_name",
    "assemble_code",
    "available_backends",
    "binarize_slice",
    "build_gx_map",
    "compute_metrics",
    "decode_gray",
    "default_rig",
    "depth_pipeline",
    "encode_gray",
    "generate_events",
    "get_backend",
    "identity_remap",
    "load_rig",
    "make_pattern_set",
    "make_projector_code_image",
    "median_filter",
    "morph_close",
    "project_slide",
    "query_disparity",
    "read_events",
    "rectify_image",
    "run_bench",
    "search_disparity",
    "segment_stream",
    "set_backend",
    "stack_to_code",
    "triangulate",
    "write_events",
]
