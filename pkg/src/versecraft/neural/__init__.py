"""Numerical core: LSTM kernels, seq2seq model, loss, optimizer, checkpoints."""

from .lstm import (
    LstmCell,
    bilstm_backward,
    bilstm_encode,
    bilstm_forward,
    lstm_step,
    lstm_step_backward,
    lstm_step_forward,
    run_lstm_backward,
    run_lstm_forward,
    sigmoid,
)
from .optim import AdamState, adam_step, clip_gradients, global_norm
from .seq2seq import (
    EncoderStates,
    Mode,
    PARAM_NAMES,
    Seq2SeqModel,
    attend,
    backward,
    decode_greedy,
    decode_train,
    encode,
    fixed_context,
    loss_and_grads,
    sequence_loss,
    sequence_loss_grad,
    softmax,
)
from .checkpoint import (
    CKPT_MAGIC,
    load_blob,
    load_checkpoint,
    save_blob,
    save_checkpoint,
)

__all__ = [
    "AdamState",
    "CKPT_MAGIC",
    "EncoderStates",
    "LstmCell",
    "Mode",
    "PARAM_NAMES",
    "Seq2SeqModel",
    "adam_step",
    "attend",
    "backward",
    "bilstm_backward",
    "bilstm_encode",
    "bilstm_forward",
    "clip_gradients",
    "decode_greedy",
    "decode_train",
    "encode",
    "fixed_context",
    "global_norm",
    "load_blob",
    "load_checkpoint",
    "loss_and_grads",
    "lstm_step",
    "lstm_step_backward",
    "lstm_step_forward",
    "run_lstm_backward",
    "run_lstm_forward",
    "save_blob",
    "save_checkpoint",
    "sequence_loss",
    "sequence_loss_grad",
    "sigmoid",
    "softmax",
]
