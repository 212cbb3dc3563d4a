"""Clustering algorithms: k-means, PAM k-medoids, agglomerative, DBSCAN."""

from .density import DbscanSweepResult, dbscan, dbscan_sweep, default_eps_grid
from .hierarchy import LINKAGES, Dendrogram, Merge, agglomerative, build_dendrogram, cut_dendrogram
from .kmeans import kmeans
from .kmedoids import kmedoids
from .labeling import NOISE, Labeling, canonicalize, write_labels_csv, write_run_manifest

__all__ = [
    "NOISE",
    "LINKAGES",
    "Labeling",
    "Dendrogram",
    "Merge",
    "DbscanSweepResult",
    "agglomerative",
    "build_dendrogram",
    "canonicalize",
    "cut_dendrogram",
    "dbscan",
    "dbscan_sweep",
    "default_eps_grid",
    "kmeans",
    "kmedoids",
    "write_labels_csv",
    "write_run_manifest",
]
