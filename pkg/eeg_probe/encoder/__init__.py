from .config import EncoderConfig, EMBED_DIM
from .model import EncoderParams, init_params, gat_attention, gat_layer, encode, embed, mask_timesteps, \
    as_param_tensors, param_shapes
from .serialization import save_params, load_params
