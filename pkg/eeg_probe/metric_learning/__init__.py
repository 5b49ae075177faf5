from .mining import TripletBatch, mine_multisimilarity
from .loss import triplet_loss
from .optim import AdamState, adam_step
from .train import TrainConfig, TrainHistory, train, train_step, class_balanced_batches
