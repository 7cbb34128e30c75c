import pytest
import numpy as np
import os

from npu_gemm_workbench.common.utils import divergence_stats
from npu_gemm_workbench.common.exceptions import TokenOutOfRange, ShapeMismatch, InvalidModelConfig
from npu_gemm_workbench.modules.tiling_planner.planner import ProblemSize
from npu_gemm_workbench.modules.gemm_offload.offload import init, REFERENCE, EMULATED
from npu_gemm_workbench.modules.gpt2_workbench.config import ModelConfig, load_model_config
from npu_gemm_workbench.modules.gpt2_workbench.flops import (count_flops, gpt2_gemm_sizes,
                                                             gemm_calls, flops_matmul)
from npu_gemm_workbench.modules.gpt2_workbench.model import (build_model, forward, backward, num_parameters,
                                                             attention_forward, matmul_forward, matmul_backward,
                                                             logits_checksum)
from npu_gemm_workbench.modules.gpt2_workbench.train import (synthetic_corpus, read_tokens, DataLoader, train,
                                                             train_step)

SMALL = ModelConfig(n_layers=1, d_model=16, n_heads=2, d_ff=32, vocab_size=32, seq_len=8)

def toy_batch(config, seed=0):

    tokens = synthetic_corpus(config.tokens + 1, config.vocab_size, seed)
    return DataLoader(tokens, config.batch_size, config.seq_len).next_batch()

def test_flops_gpt2_124m():

    ledger = count_flops(load_model_config('gpt2-124m'))

    assert(abs(ledger.total - 197e9) <= 0.05 * 197e9)
    assert(ledger.total == ledger.forward + ledger.backward)
    assert(ledger.table()['total'].sum() == ledger.total)
    assert(ledger.gemm_total < ledger.total)

def test_flops_gemm_share():

    config = load_model_config('gpt2-124m')
    ledger = count_flops(config)

    expected = sum(3 * flops_matmul(*c.size) * c.count for c in gemm_calls(config) if c.phase == 'forward')
    assert(ledger.gemm_total == expected)

def test_flops_scale_with_sequence():

    config = load_model_config('gpt2-124m')
    doubled = config._replace(seq_len=2 * config.seq_len)

    assert(count_flops(doubled).gemm_total == 2 * count_flops(config).gemm_total)
    assert(count_flops(doubled).total > 2 * count_flops(config).total)

def test_gemm_sizes():

    sizes = gpt2_gemm_sizes()

    assert(len(sizes) == 12)
    assert(len(set(sizes)) == 12)
    assert(sizes[:5] == (ProblemSize(256, 768, 2304), ProblemSize(256, 768, 768), ProblemSize(256, 768, 3072),
                         ProblemSize(256, 3072, 768), ProblemSize(256, 768, 50304)))
    assert(ProblemSize(50304, 256, 768) in sizes)
    assert(ProblemSize(2304, 256, 768) in sizes)

    # every GEMM a step issues has a planned size
    config = load_model_config('gpt2-124m')
    assert(set(c.size for c in gemm_calls(config)) == set(sizes))

def test_parameter_count():

    assert(num_parameters(load_model_config('gpt2-124m')) == 124475904)

def test_model_config():

    toy = load_model_config('toy')
    assert(toy.d_ff == 4 * toy.d_model)
    assert(toy.head_size == 16)

    with pytest.raises(InvalidModelConfig):
        ModelConfig(n_layers=1, d_model=10, n_heads=3)

    with pytest.raises(InvalidModelConfig):
        ModelConfig(n_layers=1, d_model=16, n_heads=2, seq_len=64, max_seq_len=32)

    with pytest.raises(InvalidModelConfig):
        load_model_config('no-such-model')

def test_zero_weights_loss():

    model = build_model(SMALL, scheme='zeros')
    inputs, targets = toy_batch(SMALL)

    logits, acts = forward(model, inputs, targets)

    assert(logits.shape == (1, SMALL.seq_len, SMALL.vocab_size))
    assert(np.isclose(acts['loss'], np.log(SMALL.vocab_size), rtol=1e-5))

def test_attention_is_causal():

    rng = np.random.RandomState(0)
    B, T, NH, C = 2, 6, 2, 8
    qkv = rng.standard_normal((B * T, 3 * C))

    out, att = attention_forward(qkv, B, T, NH)

    assert(out.shape == (B * T, C))
    assert(np.allclose(att.sum(axis=-1), 1.0))
    assert(np.all(att[..., np.triu_indices(T, 1)[0], np.triu_indices(T, 1)[1]] == 0.0))

def test_matmul_gradients():

    ctx = init([], backend=REFERENCE)
    rng = np.random.RandomState(1)
    inp = rng.standard_normal((8, 6))
    weight = rng.standard_normal((5, 6))
    bias = rng.standard_normal(5)
    dout = rng.standard_normal((8, 5))

    out = matmul_forward(ctx, inp, weight, bias)
    dinp, dweight, dbias = matmul_backward(ctx, dout, inp, weight)

    assert(np.allclose(out, inp @ weight.T + bias))
    assert(np.allclose(dinp, dout @ weight))
    assert(np.allclose(dweight, dout.T @ inp))
    assert(np.allclose(dbias, dout.sum(axis=0)))

def test_finite_differences():

    model = build_model(SMALL, seed=3, dtype=np.float64)
    inputs, targets = toy_batch(SMALL, seed=3)

    _, acts = forward(model, inputs, targets)
    grads = backward(model, acts, targets)

    rng = np.random.RandomState(4)
    eps = 1e-6
    for index in rng.choice(model.params.data.size, 100, replace=False):
        saved = model.params.data[index]
        model.params.data[index] = saved + eps
        plus = forward(model, inputs, targets)[1]['loss']
        model.params.data[index] = saved - eps
        minus = forward(model, inputs, targets)[1]['loss']
        model.params.data[index] = saved

        numeric = (plus - minus) / (2 * eps)
        analytic = grads.data[index]
        assert(abs(numeric - analytic) <= 1e-2 * max(abs(numeric), abs(analytic)) + 1e-8)

def test_zero_upstream_gradient():

    model = build_model(SMALL, seed=5)
    inputs, _ = toy_batch(SMALL)

    _, acts = forward(model, inputs)
    grads = backward(model, acts, dlogits=np.zeros((SMALL.tokens, SMALL.vocab_size), dtype=np.float32))

    assert(not np.any(grads.data))

def test_zero_learning_rate():

    model = build_model(SMALL, seed=6)
    before = model.params.data.copy()

    train_step(model, toy_batch(SMALL), 0.0)
    train_step(model, toy_batch(SMALL), 0.0, optimizer='adamw')

    assert(np.array_equal(model.params.data, before))

def test_tokens_out_of_range():

    model = build_model(SMALL)
    tokens = np.zeros((1, SMALL.seq_len), dtype=np.int64)
    tokens[0, 3] = SMALL.vocab_size

    with pytest.raises(TokenOutOfRange):
        forward(model, tokens)

    with pytest.raises(ShapeMismatch):
        forward(model, np.zeros((1, SMALL.seq_len + 1), dtype=np.int64))

def test_read_tokens(tmpdir):

    path = os.path.join(str(tmpdir), 'tokens.bin')
    np.array([1, 2, 300], dtype='<u2').tofile(path)

    assert(read_tokens(path).tolist() == [1, 2, 300])

    with pytest.raises(TokenOutOfRange):
        read_tokens(path, vocab_size=256)

def test_data_loader():

    tokens = np.arange(20)
    loader = DataLoader(tokens, 2, 4)

    inputs, targets = loader.next_batch()

    assert(inputs.shape == (2, 4))
    assert(np.array_equal(targets, inputs + 1))
    assert(loader.next_batch()[0][0, 0] == 8)

    with pytest.raises(ShapeMismatch):
        DataLoader(np.arange(8), 2, 4)

def test_synthetic_corpus():

    first = synthetic_corpus(1000, 64, seed=1)

    assert(np.array_equal(first, synthetic_corpus(1000, 64, seed=1)))
    assert(first.min() >= 0 and first.max() < 64)

def test_checksum_is_deterministic():

    inputs, _ = toy_batch(SMALL)

    first = logits_checksum(forward(build_model(SMALL, seed=7), inputs)[0])
    second = logits_checksum(forward(build_model(SMALL, seed=7), inputs)[0])
    other = logits_checksum(forward(build_model(SMALL, seed=8), inputs)[0])

    assert(first == second)
    assert(first != other)

def test_sgd_decreases_loss():

    config = load_model_config('toy')
    model = build_model(config, seed=0)
    tokens = synthetic_corpus(4 * config.tokens, config.vocab_size, seed=0)

    metrics = train(model, DataLoader(tokens, config.batch_size, config.seq_len), 20, 0.1, overfit=True)
    losses = metrics['train_loss'].values

    assert(np.all(np.diff(losses) < 0))

def test_adamw_overfits():

    config = load_model_config('toy')
    model = build_model(config, seed=0)
    tokens = synthetic_corpus(4 * config.tokens, config.vocab_size, seed=0)

    metrics = train(model, DataLoader(tokens, config.batch_size, config.seq_len), 50, 1e-2, 'adamw', overfit=True)

    assert(metrics['train_loss'].min() < 0.1 * metrics['train_loss'].iloc[0])
    assert(np.all(metrics['offload_seconds'] > 0))

def test_emulated_logits_divergence():

    config = load_model_config('toy')
    inputs, _ = toy_batch(config)

    reference = forward(build_model(config, seed=0, backend=REFERENCE), inputs)[0]
    emulated = forward(build_model(config, seed=0, backend=EMULATED), inputs)[0]

    assert(divergence_stats(emulated, reference)['mean'] < 5e-3)

@pytest.mark.slow
def test_emulated_training():

    config = load_model_config('toy')
    tokens = synthetic_corpus(4 * config.tokens, config.vocab_size, seed=0)
    losses = {}

    for backend in (REFERENCE, EMULATED):
        model = build_model(config, seed=0, backend=backend)
        loader = DataLoader(tokens, config.batch_size, config.seq_len)
        metrics = train(model, loader, 50, 1e-2, 'adamw', overfit=True)
        assert(metrics['train_loss'].min() < 0.1 * metrics['train_loss'].iloc[0])
        losses[backend] = metrics['train_loss'].iloc[-1]

    assert(abs(losses[EMULATED] - losses[REFERENCE]) <= 0.05 * losses[REFERENCE])
