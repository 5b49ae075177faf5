from .types import Annotation, Recording, SegmentSet, SEGMENT_SAMPLES, SPLIT_TAGS
from .pack import write_pack, read_pack, write_segments, read_segments
from .synth import SynthSpec, synth_dataset
