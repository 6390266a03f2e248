import numpy as np
import pytest

from vprbench.imaging import GrayImage
from vprbench.synthetic import SyntheticConfig, generate


def textured(seed: int, h: int = 96, w: int = 96, blur: float = 1.5) -> GrayImage:
    """Smoothed random texture with full 8-bit range; shared across feature tests."""
    from scipy.ndimage import gaussian_filter

    rng = np.random.default_rng(seed)
    a = gaussian_filter(rng.uniform(0, 255, (h, w)), blur)
    a = (a - a.min()) / (a.max() - a.min()) * 255
    return GrayImage.from_array(np.rint(a).astype(np.uint8))


@pytest.fixture(scope="session")
def tiny_bundle():
    return generate(SyntheticConfig(cols=6, rows=4, n_training=12))


@pytest.fixture(scope="session")
def tiny_bundle_dir(tmp_path_factory, tiny_bundle):
    from vprbench.synthetic import write_bundle

    out = tmp_path_factory.mktemp("bundle")
    write_bundle(tiny_bundle, out)
    return out
