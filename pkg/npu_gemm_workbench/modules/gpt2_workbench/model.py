"""
GPT-2 forward and backward passes, following the layer functions of llm.c.

Weights of linear layers are stored (out_channels, in_channels), which is
the column-major layout of the (in, out) matrix the layer multiplies by;
activations are row-major (tokens, channels). Linear layers run through a
gemm-offload context; everything else (layernorm, attention, GELU,
residuals, embeddings, cross-entropy) stays on the host.
"""

import collections
import hashlib
import logging

import numpy as np
from scipy.special import softmax, logsumexp

from ...common.matrix import Matrix, ROW_MAJOR, COL_MAJOR
from ...common.exceptions import TokenOutOfRange, ShapeMismatch
from ..gemm_offload.offload import init, matmul, GemmRequest, REFERENCE
from ..tiling_planner.planner import DEFAULT_TILE
from .flops import extract_gemm_sizes

logger = logging.getLogger(__name__)

LAYERNORM_EPS = 1e-5
GELU_SCALE = np.sqrt(2.0 / np.pi)
INIT_STD = 0.02

DTYPE_NAMES = {np.dtype(np.float32): 'float32', np.dtype(np.float64): 'float64'}


def param_shapes(config):

    V, maxT, L = config.vocab_size, config.max_seq_len, config.n_layers
    C, F = config.d_model, config.d_ff

    return collections.OrderedDict([('wte', (V, C)),
                                    ('wpe', (maxT, C)),
                                    ('ln1w', (L, C)),
                                    ('ln1b', (L, C)),
                                    ('qkvw', (L, 3 * C, C)),
                                    ('qkvb', (L, 3 * C)),
                                    ('attprojw', (L, C, C)),
                                    ('attprojb', (L, C)),
                                    ('ln2w', (L, C)),
                                    ('ln2b', (L, C)),
                                    ('fcw', (L, F, C)),
                                    ('fcb', (L, F)),
                                    ('fcprojw', (L, C, F)),
                                    ('fcprojb', (L, C)),
                                    ('lnfw', (C,)),
                                    ('lnfb', (C,))])


def num_parameters(config):
    return int(sum(np.prod(shape) for shape in param_shapes(config).values()))


class ParamStore(object):

    """
    All tensors of a model in one flat buffer, with named views.
    """

    def __init__(self, config, data=None, dtype=np.float32):

        self.config = config
        self.shapes = param_shapes(config)
        total = num_parameters(config)

        if data is None:
            data = np.zeros(total, dtype=dtype)
        if data.size != total:
            raise ShapeMismatch('parameter buffer holds {} values, expected {}'.format(data.size, total))

        self.data = data
        self.views = collections.OrderedDict()

        offset = 0
        for name, shape in self.shapes.items():
            size = int(np.prod(shape))
            self.views[name] = self.data[offset:offset + size].reshape(shape)
            offset += size

    def __getitem__(self, name):
        return self.views[name]

    def __iter__(self):
        return iter(self.views)

    @property
    def dtype(self):
        return self.data.dtype

    def zeros_like(self):
        return ParamStore(self.config, np.zeros_like(self.data))

    def copy(self):
        return ParamStore(self.config, self.data.copy())


def init_params(config, rng, scheme='gpt2', dtype=np.float32):

    """
    Fresh parameters

    Inputs:
    -------
    config : ModelConfig
    rng : numpy.random.RandomState
    scheme : 'gpt2' or 'zeros'
        'gpt2' draws weights from N(0, 0.02), with residual projections
        scaled by 1/sqrt(2 * n_layers), layernorm gains of 1 and zero biases

    Outputs:
    --------
    params : ParamStore

    """

    params = ParamStore(config, dtype=dtype)

    if scheme == 'zeros':
        return params
    if scheme != 'gpt2':
        raise ValueError('unrecognized init scheme: {}'.format(scheme))

    proj_std = INIT_STD / np.sqrt(2 * config.n_layers)

    for name in ('wte', 'wpe', 'qkvw', 'fcw'):
        params[name][...] = rng.normal(0.0, INIT_STD, params[name].shape)
    for name in ('attprojw', 'fcprojw'):
        params[name][...] = rng.normal(0.0, proj_std, params[name].shape)
    for name in ('ln1w', 'ln2w', 'lnfw'):
        params[name][...] = 1.0

    return params


class GPT2Model(object):

    def __init__(self, config, params, ctx):
        self.config = config
        self.params = params
        self.ctx = ctx
        self.opt_state = {}


def build_model(config, seed=0, backend=REFERENCE, tile=DEFAULT_TILE, grid=None, cost=None,
                scheme='gpt2', dtype=np.float32, **options):

    """
    A model with fresh parameters and an offload context planned for
    every GEMM size of its training step.
    """

    params = init_params(config, np.random.RandomState(seed), scheme, dtype)
    ctx = init(extract_gemm_sizes(config), tile, grid, cost, backend, **options)
    return GPT2Model(config, params, ctx)


def _rows(x):
    x = np.ascontiguousarray(x)
    return Matrix(x.reshape(-1), x.shape[0], x.shape[1], DTYPE_NAMES[x.dtype], ROW_MAJOR)


def _weights(weight):
    # an (out, in) row-major weight read as the column-major (in, out) operand
    return Matrix(weight.reshape(-1), weight.shape[1], weight.shape[0], DTYPE_NAMES[weight.dtype], COL_MAJOR)


def _gemm(ctx, req, dtype):
    c, _, _ = matmul(ctx, req)
    return c.to_array().astype(dtype, copy=False)


def matmul_forward(ctx, inp, weight, bias=None):

    """
    out = inp W + bias, with inp (N, C) and weight (OC, C)
    """

    out = _gemm(ctx, GemmRequest(_rows(inp), _weights(weight)), inp.dtype)
    if bias is not None:
        out = out + bias
    return out


def matmul_backward(ctx, dout, inp, weight):

    """
    Gradients of matmul_forward

    Outputs:
    --------
    dinp : (N, C) = dout W^T
    dweight : (OC, C) = dout^T inp
    dbias : (OC,) column sums of dout

    """

    dinp = _gemm(ctx, GemmRequest(_rows(dout), _weights(weight), transpose_b=True), dout.dtype)
    dweight = _gemm(ctx, GemmRequest(_rows(dout), _rows(inp), transpose_a=True), dout.dtype)
    return dinp, dweight, dout.sum(axis=0)


def layernorm_forward(x, w, b):

    mean = x.mean(axis=-1, keepdims=True)
    rstd = 1.0 / np.sqrt(((x - mean) ** 2).mean(axis=-1, keepdims=True) + LAYERNORM_EPS)
    return (x - mean) * rstd * w + b, mean, rstd


def layernorm_backward(dout, x, mean, rstd, w):

    norm = (x - mean) * rstd
    dnorm = dout * w
    dx = (dnorm - dnorm.mean(axis=-1, keepdims=True)
          - norm * (dnorm * norm).mean(axis=-1, keepdims=True)) * rstd
    return dx, (dout * norm).sum(axis=0), dout.sum(axis=0)


def causal_mask(T):
    return np.triu(np.ones((T, T), dtype=bool), 1)


def split_heads(qkv, B, T, NH):

    C = qkv.shape[1] // 3
    heads = qkv.reshape(B, T, 3, NH, C // NH).transpose(2, 0, 3, 1, 4)
    return heads[0], heads[1], heads[2]


def attention_forward(qkv, B, T, NH):

    """
    Causal multi-head self-attention on the host

    Inputs:
    -------
    qkv : (B*T, 3C) array

    Outputs:
    --------
    out : (B*T, C) array
    att : (B, NH, T, T) array
        Attention weights; rows sum to 1 and future positions are 0

    """

    q, k, v = split_heads(qkv, B, T, NH)
    scale = 1.0 / np.sqrt(q.shape[-1])

    preatt = np.matmul(q, k.transpose(0, 1, 3, 2)) * scale
    preatt[..., causal_mask(T)] = -np.inf
    att = softmax(preatt, axis=-1).astype(qkv.dtype, copy=False)

    out = np.matmul(att, v).transpose(0, 2, 1, 3).reshape(B * T, -1)
    return out, att


def attention_backward(dout, qkv, att, B, T, NH):

    q, k, v = split_heads(qkv, B, T, NH)
    scale = 1.0 / np.sqrt(q.shape[-1])

    dy = dout.reshape(B, T, NH, -1).transpose(0, 2, 1, 3)
    datt = np.matmul(dy, v.transpose(0, 1, 3, 2))
    dv = np.matmul(att.transpose(0, 1, 3, 2), dy)

    dpreatt = att * (datt - (datt * att).sum(axis=-1, keepdims=True)) * scale
    dq = np.matmul(dpreatt, k)
    dk = np.matmul(dpreatt.transpose(0, 1, 3, 2), q)

    dqkv = np.stack([dq, dk, dv]).transpose(1, 3, 0, 2, 4)
    return dqkv.reshape(B * T, -1)


def gelu_forward(x):
    return 0.5 * x * (1.0 + np.tanh(GELU_SCALE * (x + 0.044715 * x ** 3)))


def gelu_backward(dout, x):

    tanh_out = np.tanh(GELU_SCALE * (x + 0.044715 * x ** 3))
    sech2 = 1.0 - tanh_out ** 2
    local_grad = 0.5 * (1.0 + tanh_out) + 0.5 * x * sech2 * GELU_SCALE * (1.0 + 3.0 * 0.044715 * x ** 2)
    return dout * local_grad


def check_tokens(tokens, config):

    tokens = np.asarray(tokens)
    if tokens.ndim != 2 or tokens.shape[1] != config.seq_len:
        raise ShapeMismatch('expected tokens of shape (batch, {}), got {}'.format(config.seq_len, tokens.shape))
    if tokens.size and (tokens.min() < 0 or tokens.max() >= config.vocab_size):
        raise TokenOutOfRange('tokens must lie in [0, {}), got [{}, {}]'.format(config.vocab_size, tokens.min(),
                                                                               tokens.max()))
    return tokens.astype(np.int64)


def forward(model, tokens, targets=None):

    """
    Runs the model on a batch of token sequences

    Inputs:
    -------
    model : GPT2Model
    tokens : (B, seq_len) int array
    targets : (B, seq_len) int array, optional
        Next tokens; when given, the mean cross-entropy loss is computed

    Outputs:
    --------
    logits : (B, seq_len, vocab_size) array
    acts : dict
        Everything backward() needs, plus 'loss' and 'probs' with targets

    """

    config, params, ctx = model.config, model.params, model.ctx
    tokens = check_tokens(tokens, config)
    B, T = tokens.shape
    C, NH = config.d_model, config.n_heads

    residual = (params['wte'][tokens] + params['wpe'][:T]).reshape(B * T, C)

    acts = {'tokens': tokens, 'layers': []}

    for l in range(config.n_layers):
        layer = {'residual': residual}

        layer['ln1'], layer['ln1_mean'], layer['ln1_rstd'] = layernorm_forward(residual, params['ln1w'][l],
                                                                               params['ln1b'][l])
        layer['qkv'] = matmul_forward(ctx, layer['ln1'], params['qkvw'][l], params['qkvb'][l])
        layer['atty'], layer['att'] = attention_forward(layer['qkv'], B, T, NH)
        residual2 = residual + matmul_forward(ctx, layer['atty'], params['attprojw'][l], params['attprojb'][l])
        layer['residual2'] = residual2

        layer['ln2'], layer['ln2_mean'], layer['ln2_rstd'] = layernorm_forward(residual2, params['ln2w'][l],
                                                                               params['ln2b'][l])
        layer['fch'] = matmul_forward(ctx, layer['ln2'], params['fcw'][l], params['fcb'][l])
        layer['fch_gelu'] = gelu_forward(layer['fch'])
        residual = residual2 + matmul_forward(ctx, layer['fch_gelu'], params['fcprojw'][l], params['fcprojb'][l])

        acts['layers'].append(layer)

    acts['residual'] = residual
    acts['lnf'], acts['lnf_mean'], acts['lnf_rstd'] = layernorm_forward(residual, params['lnfw'], params['lnfb'])

    # weight tying: the token table is the (vocab, C) output weight
    logits = matmul_forward(ctx, acts['lnf'], params['wte'])

    if targets is not None:
        targets = check_tokens(targets, config).reshape(-1)
        lse = logsumexp(logits, axis=1)
        acts['loss'] = float(np.mean(lse - logits[np.arange(B * T), targets]))
        acts['probs'] = np.exp(logits - lse[:, None])

    return logits.reshape(B, T, -1), acts


def backward(model, acts, targets=None, dlogits=None):

    """
    Gradients of the mean cross-entropy loss

    Inputs:
    -------
    model : GPT2Model
    acts : dict
        From forward() with the same targets
    targets : (B, seq_len) int array
    dlogits : (B*T, vocab_size) array, optional
        Upstream gradient used instead of the loss gradient

    Outputs:
    --------
    grads : ParamStore

    """

    config, params, ctx = model.config, model.params, model.ctx
    tokens = acts['tokens']
    B, T = tokens.shape
    NH = config.n_heads

    grads = params.zeros_like()

    if dlogits is None:
        targets = check_tokens(targets, config).reshape(-1)
        dlogits = acts['probs'].copy()
        dlogits[np.arange(B * T), targets] -= 1.0
        dlogits /= B * T

    dlnf, dwte, _ = matmul_backward(ctx, dlogits, acts['lnf'], params['wte'])
    grads['wte'][...] += dwte

    dresidual, dw, db = layernorm_backward(dlnf, acts['residual'], acts['lnf_mean'], acts['lnf_rstd'],
                                           params['lnfw'])
    grads['lnfw'][...] = dw
    grads['lnfb'][...] = db

    for l in reversed(range(config.n_layers)):
        layer = acts['layers'][l]

        dfch_gelu, grads['fcprojw'][l], grads['fcprojb'][l] = matmul_backward(ctx, dresidual, layer['fch_gelu'],
                                                                              params['fcprojw'][l])
        dfch = gelu_backward(dfch_gelu, layer['fch'])
        dln2, grads['fcw'][l], grads['fcb'][l] = matmul_backward(ctx, dfch, layer['ln2'], params['fcw'][l])
        dx, grads['ln2w'][l], grads['ln2b'][l] = layernorm_backward(dln2, layer['residual2'], layer['ln2_mean'],
                                                                    layer['ln2_rstd'], params['ln2w'][l])
        dresidual2 = dresidual + dx

        datty, grads['attprojw'][l], grads['attprojb'][l] = matmul_backward(ctx, dresidual2, layer['atty'],
                                                                            params['attprojw'][l])
        dqkv = attention_backward(datty, layer['qkv'], layer['att'], B, T, NH)
        dln1, grads['qkvw'][l], grads['qkvb'][l] = matmul_backward(ctx, dqkv, layer['ln1'], params['qkvw'][l])
        dx, grads['ln1w'][l], grads['ln1b'][l] = layernorm_backward(dln1, layer['residual'], layer['ln1_mean'],
                                                                    layer['ln1_rstd'], params['ln1w'][l])
        dresidual = dresidual2 + dx

    np.add.at(grads['wte'], tokens.reshape(-1), dresidual)
    grads['wpe'][:T] += dresidual.reshape(B, T, -1).sum(axis=0)

    return grads


def logits_checksum(logits):
    return hashlib.sha256(np.ascontiguousarray(logits, dtype=np.float32).tobytes()).hexdigest()
