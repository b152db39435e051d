import numpy as np

from ttcomplete.diffops import SmoothWeights, dw_gram
from ttcomplete.mtt import MttFactor, reconstruct


def make_smooth_lowrank(dims, r1=2, r2=2, seed=0, c=0.05):
    """Low-rank tensor passed through one smoothing step, scaled into [0,1].

    Built from random middle-mode cores; the smoothing step is a single
    diffusion update a - c * gram(a), which keeps every unfolding rank
    bounded (each direction's difference operator acts on one mode only) and
    makes the instance match the solver's own prior.
    """
    rng = np.random.default_rng(seed)
    i1, i2, i3 = dims
    f = MttFactor(
        mode=2,
        x=rng.standard_normal((i1, r1)),
        y=rng.standard_normal((i2, r1, r2)),
        z=rng.standard_normal((r2, i3)),
    )
    a = reconstruct(f)
    a = a - c * dw_gram(a, SmoothWeights(1.0, 1.0, 1.0, 0.0))
    return (a - a.min()) / (a.max() - a.min())
