from .frames import as_frame, as_clip, read_clip, write_clip, FRAME_PATTERN
from .quality import psnr, ssim
from .flow import optical_flow, flow_magnitude, ofs
from .keyframes import select_keyframes
from .compare import ClipComparison, compare_clips
