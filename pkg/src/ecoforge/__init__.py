"""Ecosystem-wide contribution and collaboration analytics for forge logs."""

from .collabgraph import (
    LAYERS,
    CollabEdge,
    Layer,
    LayerWeights,
    MultiLayerTemporalGraph,
    build_graph,
    layer_weights,
    link_strength,
    second_order_centrality,
)
from .depgraph import (
    DependencyGraph,
    Scope,
    build_dependency_graph,
    classify_scope,
)
from .events import (
    ActivityEvent,
    Comment,
    FilterConfig,
    Review,
    detect_bots,
    filter_activities,
    parse_events,
)
from .features import (
    ContributionCounts,
    ControlVars,
    EventIndex,
    FeatureRow,
    PipelineConfig,
    assemble_matrix,
    contribution_counts,
    control_vars,
    is_newcomer,
)
from .matrix import (
    cap_sampling,
    cooks_outlier_filter,
    cooks_threshold,
    multicollinearity_screen,
    transform_matrix,
)

__version__ = "0.1.0"
