from argschema import ArgSchema
from argschema.schemas import DefaultSchema
from argschema.fields import Nested, String, Int, Bool, Dict, List
from ...common.schemas import ArchParams, CostParams


class InputParameters(ArgSchema):

    size = String(required=True, help='Problem size M x K x N')
    tile = String(required=True, default='64x64x32', help='Tile shape m x k x n')
    dump_arch = Bool(required=True, default=False, help='Include the grid description in the report')
    arch_file = String(required=False, help='Also write the grid description to this file')
    emit_schedule = Bool(required=True, default=False, help='Print every shim transfer as "SHIM <col> <A|B> <rowblk> <colblk>"')
    explore = Bool(required=True, default=False, help='Rank candidate tile shapes by simulated cycles')
    explore_table = String(required=False, help='CSV file for the tile exploration table')
    max_core_steps = Int(required=True, default=50000, help='Skip simulating candidates with more tile pairs per core than this')

    arch_params = Nested(ArchParams, default={})
    cost_params = Nested(CostParams)
    cost_config = String(required=False, help='key = value file overriding cost_params')

    seed = Int(required=True, default=0, help='Unused by planning; recorded in the manifest')
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
    pad_m = Int()
    pad_k = Int()
    pad_n = Int()
    acc_depth = Int()
    out_tiles = Int()
    out_tiles_per_core = Int()
    runtime_params = List(Int)
    repeat_a = Int()
    repeat_b = Int()
    l1_footprint = Int()
    l2_footprint = Int()
    shims = Dict()
    arch = String()
    exploration = List(Dict)
    manifest = Dict()
