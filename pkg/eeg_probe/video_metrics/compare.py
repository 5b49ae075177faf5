import logging
from dataclasses import asdict, dataclass

import numpy as np

from eeg_probe.errors import DimensionError
from eeg_probe.video_metrics.flow import ofs
from eeg_probe.video_metrics.frames import as_clip
from eeg_probe.video_metrics.quality import psnr, ssim

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClipComparison:
    n_frames: int
    psnr: float
    ssim: float
    ofs_gt: float
    ofs_gen: float

    def to_json_dict(self) -> dict:
        # inf is not valid JSON
        return {k: ("inf" if isinstance(v, float) and np.isinf(v) else v) for k, v in asdict(self).items()}


def compare_clips(gt, gen, hs_alpha: float = 1.0, iterations: int = 100) -> ClipComparison:
    """
    Mean PSNR (inf if any pair is identical) and SSIM over paired frames plus the OFS of both clips (nan for single frames).
    """
    gt, gen = as_clip(gt), as_clip(gen)
    if gt.shape != gen.shape:
        raise DimensionError(f'clips differ in shape: {gt.shape} vs {gen.shape}')
    psnrs = [psnr(a, b) for a, b in zip(gt, gen)]
    result = ClipComparison(
        n_frames=len(gt),
        psnr=float(np.mean(psnrs)),
        ssim=float(np.mean([ssim(a, b) for a, b in zip(gt, gen)])),
        ofs_gt=ofs(gt, hs_alpha, iterations) if len(gt) > 1 else float("nan"),
        ofs_gen=ofs(gen, hs_alpha, iterations) if len(gen) > 1 else float("nan"),
    )
    logger.info(f'compared {result.n_frames} frames: psnr={result.psnr} ssim={result.ssim:.4f} '
                f'ofs_gt={result.ofs_gt:.4f} ofs_gen={result.ofs_gen:.4f}')
    return result
