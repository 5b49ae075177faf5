from dataclasses import dataclass

from eeg_probe.errors import ConfigError

EMBED_DIM = 1024


@dataclass
class EncoderConfig:
    in_channels: int = 62
    in_samples: int = 400
    gat_dim: int = 32
    gat_heads: int = 1
    conv_channels: int = 32
    conv_kernel: int = 25
    conv_stride: int = 5
    embed_dim: int = EMBED_DIM
    leaky_alpha: float = 0.2
    seed: int = 0

    def validate(self):
        for name in ("in_channels", "in_samples", "gat_dim", "gat_heads", "conv_channels", "conv_kernel",
                     "conv_stride"):
            if getattr(self, name) < 1:
                raise ConfigError(f'{name} has to be positive, got {getattr(self, name)}')
        if self.conv_kernel > self.in_samples:
            raise ConfigError(f'conv_kernel ({self.conv_kernel}) must not exceed in_samples ({self.in_samples})')
        if self.embed_dim != EMBED_DIM:
            raise ConfigError(f'embed_dim is fixed to {EMBED_DIM}, got {self.embed_dim}')

    @property
    def conv_out_samples(self) -> int:
        return (self.in_samples - self.conv_kernel) // self.conv_stride + 1

    @property
    def flat_dim(self) -> int:
        return self.conv_channels * self.conv_out_samples
