"""Graph fusion encoder embedding: supervised multi-graph vertex embedding
with SBM generators, a k-NN evaluation harness and spectral baselines."""

from .graph import (
    DenseGraph,
    EdgeList,
    GraphCollection,
    LabelVector,
    ValidationReport,
    as_labels,
    from_adjacency,
    make_edgelist,
    read_edgelist,
    read_labels,
    read_vertex_ids,
    to_adjacency,
    validate_collection,
    write_edgelist,
)
from .embedding import (
    EmptyClassError,
    EncoderMatrix,
    FusionEmbedding,
    build_encoder,
    class_counts,
    embed_graph,
    export_binary,
    export_csv,
    fuse,
    load_binary,
)
from .classify import (
    ErrorReport,
    EvalProtocol,
    cross_validate,
    cross_validate_embedding,
    knn_predict,
    stratified_folds,
)
from .sbm import (
    BlockSpec,
    DegreeLaw,
    coincident_groups,
    is_identifiable,
    named_spec,
    normalized_blocks,
    sample_collection,
    sample_dcsbm,
    sample_labels,
    sample_sbm,
    sample_theta,
)
from .baselines import (
    SpectralConfig,
    best_d_error,
    mase_embed,
    omnibus_embed,
    omnibus_vertex_embedding,
    sweep_embeddings,
    top_eigenpairs,
    truncated_svd,
    use_embed,
)
from .ingest import (
    attributes_to_similarity,
    attributes_to_similarity_matrix,
    binarize,
    intersect_vertices,
    load_manifest,
    read_attributes,
)
from .experiments import (
    prior_coin_floor,
    run_baseline,
    run_simulation,
    class_mean_deviation,
    verify_theorems,
    write_gnuplot,
    write_table,
)

__version__ = "0.1.0"
