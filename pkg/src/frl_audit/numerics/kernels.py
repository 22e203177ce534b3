import numpy as np

from .autodiff import Tensor, as_tensor


def median_bandwidth(z):
    """Median pairwise Euclidean distance of the rows of ``z`` (1.0 if degenerate)."""
    z = np.asarray(z.data if isinstance(z, Tensor) else z, dtype=np.float64)
    if z.ndim == 1:
        z = z[:, None]
    n = z.shape[0]
    if n < 2:
        return 1.0
    diff = z[:, None, :] - z[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    iu = np.triu_indices(n, k=1)
    med = float(np.median(dist[iu]))
    return med if med > 0 else 1.0


def _sqdist(a, b):
    diff = a.reshape(a.shape[0], 1, a.shape[1]) - b.reshape(1, b.shape[0], b.shape[1])
    return (diff * diff).sum(axis=2)


def rbf_mmd2(a, b, bandwidth):
    """Biased (V-statistic) squared MMD with kernel ``exp(-|x-y|^2 / (2 bw^2))``.

    Accepts arrays or Tensors; returns a Tensor when either input is one,
    otherwise a float.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    tensor_out = isinstance(a, Tensor) or isinstance(b, Tensor)
    a = as_tensor(a)
    b = as_tensor(b)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("both batches must be non-empty")
    scale = -1.0 / (2.0 * bandwidth * bandwidth)
    kaa = (_sqdist(a, a) * scale).exp().mean()
    kbb = (_sqdist(b, b) * scale).exp().mean()
    kab = (_sqdist(a, b) * scale).exp().mean()
    out = kaa + kbb - kab * 2.0
    return out if tensor_out else float(out.data)
