from .clustering import KMeansResult, kmeans, cluster_accuracy, contingency_matrix
from .probe import linear_probe, feature_space_probe
from .ablation import AblationRow, AblationReport, region_ablation, timestep_ablation, parse_window, \
    window_label, REGIMES
from .export import export_embeddings, read_embeddings, write_frame
