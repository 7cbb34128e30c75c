from argschema import ArgSchemaParser
import time
import logging
import json

import numpy as np

from npu_gemm_workbench.common.utils import (resolve_cost, build_manifest, write_report,
                                             log_execution_time, configure_logging)
from npu_gemm_workbench.modules.core_arch.grid import grid_from_params
from npu_gemm_workbench.modules.tiling_planner.planner import parse_tile_shape, format_size
from npu_gemm_workbench.modules.gpt2_workbench.config import load_model_config
from npu_gemm_workbench.modules.gpt2_workbench.model import build_model, num_parameters, forward, logits_checksum
from npu_gemm_workbench.modules.gpt2_workbench.train import (synthetic_corpus, read_tokens, split_tokens,
                                                             DataLoader, train)
from npu_gemm_workbench.modules.gpt2_workbench.flops import count_flops, gemm_calls, extract_gemm_sizes

logger = logging.getLogger(__name__)


def _finite(value):
    # NaN is not valid JSON
    return None if value != value else value


def run_train_toy(args):

    logger.info('npu gemm workbench: train-toy module')

    start = time.time()

    config = load_model_config(args['config'])

    model = build_model(config, args['seed'], args['backend'], parse_tile_shape(args['tile']),
                        grid_from_params(args['arch_params']), resolve_cost(args))

    if args.get('tokens_file'):
        tokens = read_tokens(args['tokens_file'], config.vocab_size)
    else:
        tokens = synthetic_corpus(args['corpus_tokens'], config.vocab_size, args['seed'])

    train_tokens, val_tokens = split_tokens(tokens, args['val_fraction'])

    loader = DataLoader(train_tokens, config.batch_size, config.seq_len)
    val_loader = None
    if val_tokens.size > config.tokens:
        val_loader = DataLoader(val_tokens, config.batch_size, config.seq_len)
    else:
        logger.info('validation split too short for one batch, skipping validation')

    # logits of the first batch under the initial parameters
    initial_checksum = logits_checksum(forward(model, loader.next_batch()[0])[0])
    loader.reset()

    metrics = train(model, loader, args['steps'], args['lr'], args['optimizer'], args['weight_decay'],
                    val_loader, args['val_every'], args['val_batches'], args['overfit'])

    records = [dict((k, _finite(v)) for k, v in row.items()) for row in metrics.astype(object).to_dict('records')]

    if args.get('metrics'):
        with open(args['metrics'], 'w') as f:
            json.dump(records, f, indent=2)

    val_losses = metrics['val_loss'].dropna()

    output = {"model": dict(config._asdict()),
              "parameters": num_parameters(config),
              "initial_loss": float(metrics['train_loss'].iloc[0]) if len(metrics) else None,
              "final_loss": float(metrics['train_loss'].iloc[-1]) if len(metrics) else None,
              "final_val_loss": float(val_losses.iloc[-1]) if len(val_losses) else None,
              "initial_logits_checksum": initial_checksum,
              "offload_seconds": model.ctx.total_seconds,
              "metrics": records,
              "size_table": model.ctx.size_table().to_dict('records')}

    log_execution_time(start)

    return output


def run_flops(args):

    logger.info('npu gemm workbench: flops module')

    start = time.time()

    config = load_model_config(args['config'])
    ledger = count_flops(config)

    if args.get('ledger_file'):
        ledger.table().to_csv(args['ledger_file'], index=False)

    output = ledger.summary()
    output.update({"model": dict(config._asdict()),
                   "total_gflops": ledger.total / 1e9,
                   "gemm_sizes": [format_size(s) for s in extract_gemm_sizes(config)],
                   "gemm_calls": [{'site': c.site, 'phase': c.phase, 'size': format_size(c.size), 'count': c.count}
                                  for c in gemm_calls(config)]})

    # numpy integers do not serialize
    output['operations'] = [dict((k, v.item() if isinstance(v, np.generic) else v) for k, v in row.items())
                            for row in output['operations']]

    log_execution_time(start)

    return output


def main(argv=None):

    from npu_gemm_workbench.modules.gpt2_workbench._schemas import InputParameters, OutputParameters

    mod = ArgSchemaParser(schema_type=InputParameters,
                          output_schema_type=OutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_train_toy(mod.args)

    output.update({"manifest": build_manifest('train-toy', mod.args, ['config', 'tokens_file', 'cost_config'])})
    output.update({"input_parameters": mod.args})

    write_report(mod, output)


def main_flops(argv=None):

    from npu_gemm_workbench.modules.gpt2_workbench._schemas import FlopsInputParameters, FlopsOutputParameters

    mod = ArgSchemaParser(schema_type=FlopsInputParameters,
                          output_schema_type=FlopsOutputParameters,
                          args=argv)

    configure_logging(mod.args)

    output = run_flops(mod.args)

    output.update({"manifest": build_manifest('flops', mod.args, ['config'])})
    output.update({"input_parameters": mod.args})

    write_report(mod, output)


if __name__ == "__main__":
    main()
