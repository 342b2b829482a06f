"""Proportional-edge class covers: prototype selection and classification.

Main entry points:

* :func:`pepcd.tessellation.tessellate` - Delaunay cells and outer simplices;
* :mod:`pepcd.proximity` - proximity regions and catch digraphs;
* :mod:`pepcd.domination` - exact, greedy and brute-force dominating sets;
* :func:`pepcd.classify.train` - cover, hybrid, k-NN and CCCD classifiers;
* :mod:`pepcd.evaluation` and :mod:`pepcd.simulation` - metrics, 5x2 CV tests,
  PCA and Monte Carlo experiments.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND  # noqa: E402
from .classify import ClassCover, CoverBuilder, TrainedModel, train, verify_cover  # noqa: E402
from .domination import (  # noqa: E402
    brute_force_mds,
    composite_mds,
    exact_mds_cell,
    exact_mds_hull,
    greedy_mds,
    spherical_mds,
    standard_mds,
)
from .evaluation import evaluate, five_by_two_cv, overlap_shift, pca_fit, pca_reduce  # noqa: E402
from .tessellation import Tessellation, tessellate  # noqa: E402

__all__ = [
    "BACKEND",
    "ClassCover",
    "CoverBuilder",
    "Tessellation",
    "TrainedModel",
    "brute_force_mds",
    "composite_mds",
    "evaluate",
    "exact_mds_cell",
    "exact_mds_hull",
    "five_by_two_cv",
    "greedy_mds",
    "overlap_shift",
    "pca_fit",
    "pca_reduce",
    "spherical_mds",
    "standard_mds",
    "tessellate",
    "train",
    "verify_cover",
]
