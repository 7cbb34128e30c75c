from argschema import ArgSchema
from argschema.schemas import DefaultSchema
from argschema.fields import Nested, String, Int, Bool, Float, Dict, List
from marshmallow import validate
from ...common.schemas import ArchParams, CostParams


class InputParameters(ArgSchema):

    config = String(required=True, default='toy', help='Model config file, or a packaged config name')
    backend = String(required=True, default='reference-f32', validate=validate.OneOf(['reference-f32', 'emulated-npu']),
                     help='Where the GEMMs run')
    tile = String(required=True, default='64x64x32', help='Tile shape m x k x n for the emulated backend')
    steps = Int(required=True, default=50, help='Training steps')
    lr = Float(required=True, default=0.1, help='Learning rate')
    optimizer = String(required=True, default='sgd', validate=validate.OneOf(['sgd', 'adamw']), help='Parameter update rule')
    weight_decay = Float(required=True, default=0.0, help='AdamW weight decay')
    overfit = Bool(required=True, default=False, help='Train on the first batch at every step')
    tokens_file = String(required=False, help='Little-endian uint16 token file; a synthetic corpus is generated when absent')
    corpus_tokens = Int(required=True, default=16384, help='Length of the synthetic corpus')
    val_fraction = Float(required=True, default=0.1, help='Share of the tokens held out for validation')
    val_every = Int(required=True, default=10, help='Steps between validation losses')
    val_batches = Int(required=True, default=4, help='Batches per validation loss')
    metrics = String(required=False, help='JSON file for the per-step metrics')

    arch_params = Nested(ArchParams, default={})
    cost_params = Nested(CostParams)
    cost_config = String(required=False, help='key = value file overriding cost_params')

    seed = Int(required=True, default=0, help='Seed for parameter initialization and the synthetic corpus')
    report = String(required=False, help='Path of the JSON report; standard output when absent')


class FlopsInputParameters(ArgSchema):

    config = String(required=True, default='gpt2-124m', help='Model config file, or a packaged config name')
    ledger_file = String(required=False, help='CSV file for the per-operation ledger')
    seed = Int(required=True, default=0, help='Recorded in the manifest only')
    report = String(required=False, help='Path of the JSON report; standard output when absent')


class OutputSchema(DefaultSchema):

    input_parameters = Nested(InputParameters,
                              description=("Input parameters the module "
                                           "was run with"),
                              required=True)


class OutputParameters(OutputSchema):

    model = Dict()
    parameters = Int()
    initial_loss = Float()
    final_loss = Float()
    final_val_loss = Float()
    offload_seconds = Float()
    initial_logits_checksum = String()
    metrics = List(Dict)
    size_table = List(Dict)
    manifest = Dict()


class FlopsOutputSchema(DefaultSchema):

    input_parameters = Nested(FlopsInputParameters,
                              description=("Input parameters the module "
                                           "was run with"),
                              required=True)


class FlopsOutputParameters(FlopsOutputSchema):

    model = Dict()
    forward_flops = Int()
    backward_flops = Int()
    total_flops = Int()
    gemm_flops = Int()
    total_gflops = Float()
    operations = List(Dict)
    gemm_sizes = List(String)
    gemm_calls = List(Dict)
    manifest = Dict()
