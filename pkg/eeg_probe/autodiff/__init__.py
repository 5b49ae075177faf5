from .tensor import Tensor, Tape, backward
from .ops import add, sub, mul, scale, leaky_relu, elementwise, matmul, transpose, reshape, take_rows, sum_all, \
    mean_all, sum_rows, row_softmax, l2_normalize_rows, concat_rows, concat_cols, conv1d, as_tensor
from .gradcheck import finite_diff_check
