"""Random energy model simulator: exact streaming replicas, limit theory and
Poisson-Dirichlet samplers."""

import json
import os

from ._core import (
    ManifestError,
    ReplicaResult,
    __version__,
    builtin_manifests,
    critical_beta,
    diagnose_phase,
    energies,
    free_energy_limit,
    ks_two_sample,
    normalize_manifest,
    poisson_count_pmf,
    rate_function,
    run_replica,
    sample_pd_poisson,
    sample_pd_stick,
    shift_constant,
)
from ._core import run_manifest as _run_manifest


def _manifest_text(manifest):
    if isinstance(manifest, dict):
        return json.dumps(manifest)
    if isinstance(manifest, os.PathLike) or (isinstance(manifest, str) and not manifest.lstrip().startswith("{")):
        with open(manifest, encoding="utf-8") as f:
            return f.read()
    return manifest


def run_manifest(manifest, workers=None, output_dir=None, seed=None):
    """Run a manifest given as a dict, JSON text or a file path.

    Returns a dict with the check results and the output directory."""
    return _run_manifest(_manifest_text(manifest), workers, None if output_dir is None else str(output_dir), seed)


__all__ = [
    "ManifestError",
    "ReplicaResult",
    "__version__",
    "builtin_manifests",
    "critical_beta",
    "diagnose_phase",
    "energies",
    "free_energy_limit",
    "ks_two_sample",
    "normalize_manifest",
    "poisson_count_pmf",
    "rate_function",
    "run_manifest",
    "run_replica",
    "sample_pd_poisson",
    "sample_pd_stick",
    "shift_constant",
]
