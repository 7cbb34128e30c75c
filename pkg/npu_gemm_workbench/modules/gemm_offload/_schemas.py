from argschema import ArgSchema
from argschema.schemas import DefaultSchema
from argschema.fields import Nested, String, Int, Bool, Float, Dict, List
from marshmallow import validate
from ...common.schemas import ArchParams, CostParams


class InputParameters(ArgSchema):

    size = String(required=True, default='256x768x2304', help='Problem size M x K x N')
    backend = String(required=True, default='emulated-npu', validate=validate.OneOf(['reference-f32', 'emulated-npu']),
                     help='Where the GEMM runs')
    tile = String(required=True, default='64x64x32', help='Tile shape m x k x n')
    a_file = String(required=False, help='MAT0 file holding A (or A^T with transpose_a)')
    b_file = String(required=False, help='MAT0 file holding B (or B^T with transpose_b)')
    output_file = String(required=False, help='MAT0 file to write C to')
    transpose_a = Bool(required=True, default=False, help='Operand a holds A^T')
    transpose_b = Bool(required=True, default=False, help='Operand b holds B^T')
    simulate_values = Bool(required=True, default=False, help='Compute C through the event simulator instead of the functional kernel path')
    wallclock = Bool(required=True, default=False, help='Also report measured host times (diagnostic only)')
    compare_oracle = Bool(required=True, default=False, help='Compare the backend with the float32 reference over oracle_sizes')
    oracle_sizes = String(required=True, default='gpt2', help='"gpt2" for the 12 GPT-2 124M sizes, or comma-separated M x K x N sizes')
    divergence_file = String(required=False, help='CSV file for the per-size divergence table')

    arch_params = Nested(ArchParams, default={})
    cost_params = Nested(CostParams)
    cost_config = String(required=False, help='key = value file overriding cost_params')

    seed = Int(required=True, default=0, help='Seed for random operands')
    report = String(required=False, help='Path of the JSON report; standard output when absent')


class OutputSchema(DefaultSchema):

    input_parameters = Nested(InputParameters,
                              description=("Input parameters the module "
                                           "was run with"),
                              required=True)


class OutputParameters(OutputSchema):

    size = String()
    backend = String()
    stages = Dict()
    total_seconds = Float()
    reconfig_cycles = Int()
    kernel_cycles = Int()
    divergence = Dict()
    oracle = List(Dict)
    wallclock = Dict()
    manifest = Dict()
