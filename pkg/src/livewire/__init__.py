"""Live-wire segmentation toolkit: 2D engine, 3D pipeline, meshing, metrics."""

from .cost_model import (
    CostWeights,
    HeatOverlay,
    PathStats,
    StaticCostField,
    TrainedMapping,
    deviation_penalty,
    direction_penalty,
    edge_cost,
    gradient_feature,
    laplacian_feature,
    static_cost,
    train_mapping,
)
from .engine import (
    Boundary,
    BoundaryEvent,
    CoolingState,
    EngineRequest,
    EventKind,
    LiveWireSession,
    PathTree,
    RequestKind,
    compute_path_tree,
    cooling_tick,
    reconstruct,
)
from .image_ops import (
    CutLine,
    FilterSpec,
    ScalarField,
    apply_filter,
    build_orthogonal_cut,
    gradient_magnitude,
    laplacian_zero_crossings,
    sample_line,
)
from .mesh import Mesh, SampledContour, build_band, correspond, normalize_next, resample
from .metrics import contour_error, mutual_error, repeatability
from .phantoms import Phantom
from .pipeline3d import (
    CutBoundary,
    DTField,
    StripParams,
    TopologySegment,
    TopologyViolation,
    UnreachableSeedError,
    chamfer_dt,
    segment_volume,
    slice_seeds,
    strip_mask,
    strip_width,
    validate_cut_ordering,
)
from .replay import RunResult, SeedStrategy, scripted_user
from .volume_io import ContourSet, Volume, load_contours, load_volume, save_contours, slice_of

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
