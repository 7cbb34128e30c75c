import os
import collections

from argschema.schemas import DefaultSchema
from argschema.fields import Int

from ...common.utils import read_config_file
from ...common.exceptions import InvalidModelConfig

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'configs')


class ModelConfigParams(DefaultSchema):
    n_layers = Int(required=True, help='Transformer blocks')
    d_model = Int(required=True, help='Channels')
    n_heads = Int(required=True, help='Attention heads; must divide d_model')
    d_ff = Int(required=False, allow_none=True, default=None, help='Feed-forward width (4 * d_model when absent)')
    vocab_size = Int(required=True, help='Vocabulary size (padded)')
    seq_len = Int(required=True, help='Tokens per sequence')
    max_seq_len = Int(required=False, allow_none=True, default=None, help='Rows of the position table (seq_len when absent)')
    batch_size = Int(required=True, default=1, help='Sequences per step')


class ModelConfig(collections.namedtuple('ModelConfig', ['n_layers', 'd_model', 'n_heads', 'd_ff', 'vocab_size',
                                                          'seq_len', 'max_seq_len', 'batch_size'])):

    def __new__(cls, n_layers, d_model, n_heads, d_ff=None, vocab_size=256, seq_len=32, max_seq_len=None,
                batch_size=1):

        d_ff = 4 * d_model if d_ff is None else d_ff
        max_seq_len = seq_len if max_seq_len is None else max_seq_len

        self = super(ModelConfig, cls).__new__(cls, int(n_layers), int(d_model), int(n_heads), int(d_ff),
                                               int(vocab_size), int(seq_len), int(max_seq_len), int(batch_size))

        if min(self) < 1:
            raise InvalidModelConfig('every model dimension must be >= 1: {}'.format(self))
        if self.d_model % self.n_heads:
            raise InvalidModelConfig('d_model {} is not divisible by n_heads {}'.format(self.d_model, self.n_heads))
        if self.seq_len > self.max_seq_len:
            raise InvalidModelConfig('seq_len {} exceeds max_seq_len {}'.format(self.seq_len, self.max_seq_len))

        return self

    @property
    def head_size(self):
        return self.d_model // self.n_heads

    @property
    def tokens(self):
        return self.batch_size * self.seq_len


def config_path(name):

    """
    A config file path: the name itself when it exists, else a packaged
    config ('toy', 'gpt2-124m', with or without '.cfg').
    """

    if os.path.isfile(name):
        return name

    candidate = os.path.join(CONFIG_DIR, name if name.endswith('.cfg') else name + '.cfg')
    if os.path.isfile(candidate):
        return candidate

    raise InvalidModelConfig('no model config named {!r}'.format(name))


def load_model_config(name):

    """
    Reads a 'key = value' model config

    Inputs:
    -------
    name : String
        File path or packaged config name

    Outputs:
    --------
    config : ModelConfig

    """

    return ModelConfig(**read_config_file(config_path(name), ModelConfigParams))
