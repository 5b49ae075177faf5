from .encoding import positional_encode, ConditioningVector, build_conditioning, frame_label, \
    generator_total_loss, DEFAULT_ENC_DIM, DEFAULT_TOTAL_FRAMES
from .export import conditioning_table, export_conditioning
