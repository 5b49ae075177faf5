from .filters import notch_filter, highpass_filter, resample
from .channels import interpolate_bad_channels, reref_average, eog_regress
from .segmentation import segment, segment_annotated
from .splits import split_within, split_leave_two, split_kfold
from .pipeline import PreprocessConfig, preprocess_recording, preprocess_pack, PIPELINE_STEPS
