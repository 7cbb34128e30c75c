from argschema import ArgSchema
from argschema.schemas import DefaultSchema
from argschema.fields import Nested, String, Int, Bool, Float, Dict
from marshmallow import validate
from ...common.schemas import ArchParams, CostParams


class InputParameters(ArgSchema):

    size = String(required=True, help='Problem size M x K x N')
    tile = String(required=True, default='64x64x32', help='Tile shape m x k x n')
    inputs = String(required=True, default='random', validate=validate.OneOf(['random', 'ones', 'none']),
                    help='Operand values: U[0,1) from the seed, all ones, or none for a timing-only run')
    a_file = String(required=False, help='MAT0 file holding A (row-major); overrides inputs')
    b_file = String(required=False, help='MAT0 file holding B; stored column-major in main memory')
    output_file = String(required=False, help='MAT0 file to write C to')
    reconfig = String(required=True, default='none', validate=validate.OneOf(['none', 'minimal', 'full']),
                      help='Reconfiguration paid before the run (minimal is relative to previous_size)')
    previous_size = String(required=False, help='Size loaded before this one; defaults to the preceding GPT-2 size')
    compare_reconfig = Bool(required=True, default=False, help='Report full and minimal reconfiguration side by side')
    trace = String(required=False, help='File to write the event trace to, one event per line')
    save_figure = Bool(required=True, default=False, help='Save a per-core utilization figure')
    figure_location = String(required=False, default='utilization.png', help='Path of the utilization figure')
    core_table = String(required=False, help='CSV file for per-core busy cycles and utilization')

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

    problem = String()
    padded = String()
    tile = String()
    total_cycles = Int()
    reconfig_cycles = Int()
    busy_cycles = Dict()
    utilization = Dict()
    aggregate_utilization = Float()
    bytes_moved = Dict()
    model_seconds = Float()
    effective_flops = Float()
    peak_flops = Float()
    matches_functional = Bool()
    reconfig_comparison = Dict()
    manifest = Dict()
