import logging

import numpy as np
import pandas as pd

from ...common.utils import printProgressBar
from ...common.exceptions import TokenOutOfRange, ShapeMismatch
from .model import forward, backward

logger = logging.getLogger(__name__)

SGD = 'sgd'
ADAMW = 'adamw'

ADAMW_BETA1 = 0.9
ADAMW_BETA2 = 0.999
ADAMW_EPS = 1e-8


def synthetic_corpus(n_tokens, vocab_size, seed=0, concentration=0.1):

    """
    Deterministic token stream from a random first-order Markov chain

    Inputs:
    -------
    n_tokens : Int
    vocab_size : Int
    seed : Int
    concentration : Float
        Dirichlet parameter of each transition row; small values make
        the next token predictable

    Outputs:
    --------
    tokens : numpy.ndarray (int64)

    """

    rng = np.random.RandomState(seed)
    transitions = np.cumsum(rng.dirichlet(np.full(vocab_size, concentration), size=vocab_size), axis=1)
    draws = rng.random_sample(n_tokens)

    tokens = np.empty(n_tokens, dtype=np.int64)
    token = rng.randint(vocab_size)
    for i in range(n_tokens):
        tokens[i] = token
        token = min(int(np.searchsorted(transitions[token], draws[i], side='right')), vocab_size - 1)

    return tokens


def read_tokens(tokens_file, vocab_size=None):

    """
    Reads a little-endian uint16 token file
    """

    tokens = np.fromfile(tokens_file, dtype='<u2').astype(np.int64)

    if vocab_size is not None and tokens.size and tokens.max() >= vocab_size:
        raise TokenOutOfRange('{} holds token {} outside a vocabulary of {}'.format(tokens_file, tokens.max(),
                                                                                   vocab_size))
    return tokens


def split_tokens(tokens, val_fraction=0.1):

    n_val = int(len(tokens) * val_fraction)
    return tokens[:len(tokens) - n_val], tokens[len(tokens) - n_val:]


class DataLoader(object):

    """
    Consecutive (inputs, targets) batches of shape (B, T), wrapping
    around at the end of the stream.
    """

    def __init__(self, tokens, batch_size, seq_len):

        self.tokens = np.asarray(tokens)
        self.batch_size = batch_size
        self.seq_len = seq_len
        self.span = batch_size * seq_len

        if self.tokens.size < self.span + 1:
            raise ShapeMismatch('{} tokens cannot fill a batch of {}x{}'.format(self.tokens.size, batch_size, seq_len))

        self.position = 0

    def reset(self):
        self.position = 0

    def next_batch(self):

        if self.position + self.span + 1 > self.tokens.size:
            self.position = 0

        window = self.tokens[self.position:self.position + self.span + 1]
        self.position += self.span

        inputs = window[:-1].reshape(self.batch_size, self.seq_len)
        targets = window[1:].reshape(self.batch_size, self.seq_len)
        return inputs, targets


def sgd_update(model, grads, lr):
    model.params.data -= lr * grads.data


def adamw_update(model, grads, lr, weight_decay=0.0, beta1=ADAMW_BETA1, beta2=ADAMW_BETA2, eps=ADAMW_EPS):

    """
    The AdamW step of llm.c, applied to the flat parameter buffer
    """

    state = model.opt_state
    if not state:
        state['m'] = np.zeros_like(model.params.data)
        state['v'] = np.zeros_like(model.params.data)
        state['t'] = 0

    state['t'] += 1
    t = state['t']
    g = grads.data

    state['m'] = beta1 * state['m'] + (1.0 - beta1) * g
    state['v'] = beta2 * state['v'] + (1.0 - beta2) * g * g

    m_hat = state['m'] / (1.0 - beta1 ** t)
    v_hat = state['v'] / (1.0 - beta2 ** t)

    model.params.data -= lr * (m_hat / (np.sqrt(v_hat) + eps) + weight_decay * model.params.data)


def train_step(model, batch, lr, optimizer=SGD, weight_decay=0.0):

    """
    One forward, backward and parameter update

    Inputs:
    -------
    model : GPT2Model
    batch : (inputs, targets) pair of (B, T) int arrays
    lr : Float
    optimizer : 'sgd' or 'adamw'

    Outputs:
    --------
    loss : Float
        Loss of the batch before the update

    """

    inputs, targets = batch
    _, acts = forward(model, inputs, targets)
    grads = backward(model, acts, targets)

    if optimizer == SGD:
        sgd_update(model, grads, lr)
    elif optimizer == ADAMW:
        adamw_update(model, grads, lr, weight_decay)
    else:
        raise ValueError('unrecognized optimizer: {}'.format(optimizer))

    return acts['loss']


def evaluate(model, loader, batches):

    loader.reset()
    losses = []
    for _ in range(batches):
        inputs, targets = loader.next_batch()
        _, acts = forward(model, inputs, targets)
        losses.append(acts['loss'])
    return float(np.mean(losses))


def train(model, loader, steps, lr, optimizer=SGD, weight_decay=0.0, val_loader=None, val_every=10,
          val_batches=1, overfit=False):

    """
    Runs the training loop

    Inputs:
    -------
    model : GPT2Model
    loader : DataLoader
    steps : Int
    val_loader : DataLoader (optional)
        Validation loss is computed every val_every steps and after the last
    overfit : Bool
        Repeat the first batch at every step

    Outputs:
    --------
    metrics : pandas.DataFrame
        step, train_loss, val_loss (NaN between evaluations) and the
        modeled offload time spent in the step

    """

    rows = []
    batch = loader.next_batch()

    for step in range(1, steps + 1):

        if not overfit and step > 1:
            batch = loader.next_batch()

        before = model.ctx.total_seconds
        loss = train_step(model, batch, lr, optimizer, weight_decay)
        offload_seconds = model.ctx.total_seconds - before

        val_loss = np.nan
        if val_loader is not None and (step % val_every == 0 or step == steps):
            val_loss = evaluate(model, val_loader, val_batches)

        rows.append({'step': step, 'train_loss': loss, 'val_loss': val_loss, 'offload_seconds': offload_seconds})

        logger.debug('step {}: loss {:.4f}'.format(step, loss))
        printProgressBar(step, steps, prefix='training')

    return pd.DataFrame(rows, columns=['step', 'train_loss', 'val_loss', 'offload_seconds'])
