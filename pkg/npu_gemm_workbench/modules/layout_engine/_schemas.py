from argschema import ArgSchema
from argschema.schemas import DefaultSchema
from argschema.fields import Nested, String, Int, Bool, List, Dict
from marshmallow import validate


class InputParameters(ArgSchema):

    op = String(required=True, default='A', validate=validate.OneOf(['A', 'B', 'C']),
                help='Operand whose L2 -> L1 micro-tiling to examine')
    tile = String(required=True, default='64x64', help='Operand tile shape, rows x cols')
    dump = Bool(required=True, default=False, help='Print the element permutation as "src_index -> dst_index" lines')

    seed = Int(required=True, default=0, help='Seed for randomized inputs')
    report = String(required=False, help='Path of the JSON report; standard output when absent')


class OutputSchema(DefaultSchema):

    input_parameters = Nested(InputParameters,
                              description=("Input parameters the module "
                                           "was run with"),
                              required=True)


class OutputParameters(OutputSchema):

    op = String()
    tile = String()
    n_elements = Int()
    dma_granule_bytes = Int()
    pattern_dims = List(List(Int))
    residue = List(Int)
    exact = Bool()
    round_trip = Bool()
    manifest = Dict()
