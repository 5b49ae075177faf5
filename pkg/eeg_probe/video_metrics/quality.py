import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from eeg_probe.errors import DimensionError
from eeg_probe.video_metrics.frames import as_frame, check_same_shape

SSIM_WINDOW = 8


def psnr(a, b) -> float:
    """
    Peak signal-to-noise ratio in dB for unit peak; identical frames give inf.
    """
    a, b = as_frame(a), as_frame(b)
    check_same_shape(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)


def ssim(a, b, window: int = SSIM_WINDOW, k1: float = 0.01, k2: float = 0.03) -> float:
    """
    Mean structural similarity over all window x window positions (stride 1) with uniform
    weights and population statistics.
    """
    a, b = as_frame(a), as_frame(b)
    check_same_shape(a, b)
    if a.shape[0] < window or a.shape[1] < window:
        raise DimensionError(f'frame of shape {a.shape} is smaller than the {window}x{window} ssim window')
    c1, c2 = k1 ** 2, k2 ** 2
    wa = sliding_window_view(a, (window, window))
    wb = sliding_window_view(b, (window, window))
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    da = wa - mu_a[..., None, None]
    db = wb - mu_b[..., None, None]
    var_a = (da * da).mean(axis=(-2, -1))
    var_b = (db * db).mean(axis=(-2, -1))
    cov = (da * db).mean(axis=(-2, -1))
    local = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2))
    return float(local.mean())
