"""
The sequence-to-sequence translation network: memory cells, attention
variants, the encoder/decoder with its analytic gradients, greedy decoding
and checkpoint files.


:license: BSD 2-clause, see LICENSE for details.
"""
from .cells import (Cell, LSTMCell, GRUCell, LayerNormLSTMCell, NonFiniteActivation,
                    lstm_step, gru_step, layer_norm_lstm_step, layer_norm, get_cell)
from .attention import Attention, attention_score, get_attention
from .seq2seq import (Seq2Seq, ModelParams, Batch, DecodeResult, NonFiniteLoss, IdOutOfRange,
                      LengthExceeded, EmptySequence, init_params, encode, decode_step,
                      forward_loss, greedy_decode, log_softmax, target_logprobs)
from .checkpoint import (Checkpoint, CheckpointError, save_checkpoint, load_checkpoint,
                         checkpoint_bytes, snapshot_name, find_snapshots, translate,
                         SNAPSHOT_PREFIX,
                         reference_logprobs)
