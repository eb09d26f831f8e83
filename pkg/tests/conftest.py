"""Shared fixtures: the trained model bundles used by the acceptance suite.

Training the per-sector networks from scratch takes several minutes, so the
bundles can be cached across runs by pointing CCMLAB_MODEL_CACHE at a
directory; cached bundles are only reused when their recorded provenance
(config, seed, sample count) matches what the suite would train.
"""

import os
from dataclasses import asdict
from pathlib import Path

import pytest

from ccmlab import harness
from ccmlab.estimators import SectorModels
from ccmlab.scenario import ScenarioConfig

# Experiment base for the estimator sweeps.  Relative to the all-defaults
# config, two knobs are pinned here and why:
#  - noise_var=300: with the trace(R) = rho*N power normalization, the
#    post-matched-filter beamspace SNR at mean SNR s is roughly
#    s + 10*log10(T*N*c/N0) with c the in-beam energy fraction; N0 = 300
#    places the noise knee inside the swept window (clean at +30 dB, visibly
#    degrading below -10 dB) instead of ~35 dB below it.
#  - rho_std_db=2.0: the per-tap power spread is a free experiment parameter;
#    at 3 dB, rare fixed-pilot cross-correlation alignments let a strong
#    interferer consistently outshine a weak tap across all realizations,
#    which poisons the full-range digital-BF scans with multi-degree outliers
#    and breaks their lower-bound role.  2 dB keeps the lognormal power
#    heterogeneity while keeping those events negligible.
SWEEP_CONFIG = ScenarioConfig(seed=1234, rho_std_db=2.0, noise_var=300.0)

AOA_SAMPLES_PER_SECTOR = 100_000
AS_SAMPLES_PER_SECTOR = 20_000
TRAIN_SEED = 1234
AOA_SNR_MIX = (0.0, 10.0, 20.0, 30.0)


def _cached_bundle(cache: Path, task: str, n_per_sector: int, snr_mix) -> SectorModels | None:
    try:
        bundle = SectorModels.load(cache, task)
    except (FileNotFoundError, ValueError, KeyError):
        return None
    meta = bundle.meta
    if (meta.get("seed") == TRAIN_SEED
            and meta.get("n_per_sector") == n_per_sector
            and meta.get("config") == asdict(SWEEP_CONFIG)
            and (snr_mix is None or tuple(meta.get("snr_mix_db") or ()) == snr_mix)):
        return bundle
    return None


@pytest.fixture(scope="session")
def model_cache_dir(tmp_path_factory) -> Path:
    env = os.environ.get("CCMLAB_MODEL_CACHE")
    if env:
        path = Path(env)
        path.mkdir(parents=True, exist_ok=True)
        return path
    return tmp_path_factory.mktemp("models")


@pytest.fixture(scope="session")
def aoa_models(model_cache_dir) -> SectorModels:
    cached = _cached_bundle(model_cache_dir, "aoa", AOA_SAMPLES_PER_SECTOR, AOA_SNR_MIX)
    if cached is not None:
        return cached
    bundle = harness.fit_sector_models(SWEEP_CONFIG, "aoa", AOA_SAMPLES_PER_SECTOR,
                                       seed=TRAIN_SEED, snr_mix_db=AOA_SNR_MIX)
    bundle.save(model_cache_dir)
    return bundle


@pytest.fixture(scope="session")
def as_models(model_cache_dir) -> SectorModels:
    cached = _cached_bundle(model_cache_dir, "as", AS_SAMPLES_PER_SECTOR, None)
    if cached is not None:
        return cached
    bundle = harness.fit_sector_models(SWEEP_CONFIG, "as", AS_SAMPLES_PER_SECTOR,
                                       seed=TRAIN_SEED)
    bundle.save(model_cache_dir)
    return bundle
