from argschema import ArgSchema
from argschema.schemas import DefaultSchema
from argschema.fields import Nested, String, Int, Bool, Float, Dict
from ...common.schemas import ArchParams, CostParams


class InputParameters(ArgSchema):

    shape = String(required=True, default='64x64x32', help='Tile shape m x k x n')
    check_schedule = Bool(required=True, default=False, help='Build the issue schedule and scan it for accumulator hazards')
    accumulators = Int(required=True, default=4, help='Accumulator registers in the inner-loop rotation (fewer than the VMAC latency shows the NOP cost)')
    acc_depth = Int(required=True, default=1, help='Tile pairs accumulated per output tile when reporting cycles per output tile')

    arch_params = Nested(ArchParams, default={})
    cost_params = Nested(CostParams)
    cost_config = String(required=False, help='key = value file overriding cost_params')

    seed = Int(required=True, default=0, help='Seed for the random tile used in the numeric check')
    report = String(required=False, help='Path of the JSON report; standard output when absent')


class OutputSchema(DefaultSchema):

    input_parameters = Nested(InputParameters,
                              description=("Input parameters the module "
                                           "was run with"),
                              required=True)


class OutputParameters(OutputSchema):

    shape = String()
    max_rel_error = Float()
    mean_rel_error = Float()
    vmac_count = Int()
    nop_count = Int()
    hazards = Int()
    steady_cycles = Int()
    cycles_per_tile_pair = Int()
    output_tile_cycles = Int()
    utilization = Float()
    manifest = Dict()
