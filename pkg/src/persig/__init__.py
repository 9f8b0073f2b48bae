"""Signature features of persistence barcodes.

Barcodes are mapped to paths (landscapes, envelopes, Betti and Euler curves)
whose truncated signatures, or signature kernels, serve as features.
"""
from .barcode import Barcode, Interval, betti_count, bottleneck_distance, load_barcode, rank_count, save_barcode
from .embeddings import (
    betti_embed,
    envelope_embed,
    euler_embed,
    generalized_betti_embed,
    integrated_landscape,
    integrated_landscape_embed,
    landscape,
    landscape_embed,
    naive_embed,
    restricted_envelope_embed,
)
from .kernel import GramMatrix, PipelineParams, StaticKernel, gram, kernelized_feature_pipeline, sig_kernel
from .paths import PiecewiseLinearPath, QuadraticSplinePath, holder1_norm, one_variation, time_augment
from .rips import build_rips, euler_curve_counts, persistence, rips_barcode
from .signature import TruncatedTensor, shuffle_product, signature

__version__ = "0.1.0"
