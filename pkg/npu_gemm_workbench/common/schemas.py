from argschema.schemas import DefaultSchema
from argschema.fields import String, Float, Dict, Int


class ArchParams(DefaultSchema):
    columns = Int(required=True, default=4, help='Shim/memory columns in the array partition')
    compute_rows = Int(required=True, default=4, help='Rows of compute cores above the memory row')
    l1_bytes = Int(required=True, default=65536, help='Local memory per compute core, in bytes')
    l2_bytes = Int(required=True, default=524288, help='Memory per memory core, in bytes')
    fma_per_cycle = Int(required=True, default=128, help='bfloat16 FMAs per cycle per compute core')
    clock_hz = Float(required=True, default=1e9, help='Array clock frequency')
    vmac_latency_cycles = Int(required=True, default=4, help='Cycles before a VMAC result can be accumulated into')


class CostParams(DefaultSchema):
    l3_l2_bytes_per_cycle = Float(required=True, default=32.0, help='Shim DMA bandwidth between main memory and a memory core')
    l2_l1_bytes_per_cycle = Float(required=True, default=32.0, help='DMA bandwidth between a memory core and a compute core')
    dma_setup_cycles = Int(required=True, default=50, help='Fixed latency added to every DMA transfer')
    param_write_cycles = Int(required=True, default=10, help='Cost of writing one runtime parameter word')
    shim_descriptor_cycles = Int(required=True, default=500, help='Cost of loading one shim DMA descriptor set')
    compute_config_cycles = Int(required=True, default=200, help='Full reconfiguration cost per compute core')
    memory_config_cycles = Int(required=True, default=400, help='Full reconfiguration cost per memory core')
    switchbox_config_cycles = Int(required=True, default=50, help='Full reconfiguration cost per switch box')
    preamble_cycles = Int(required=True, default=8, help='Kernel pipeline fill cycles per output tile')
    postamble_cycles = Int(required=True, default=8, help='Kernel pipeline drain cycles per output tile')
    host_copy_bytes_per_s = Float(required=True, default=10e9, help='Host memcpy bandwidth into/out of shared buffers')
    host_transpose_bytes_per_s = Float(required=True, default=2.5e9, help='Host bandwidth of a transposing copy')
    host_sync_input_s = Float(required=True, default=0.0, help='Constant input-buffer sync cost per call (seconds)')
    host_sync_output_s = Float(required=True, default=0.0, help='Constant output-buffer sync cost per call (seconds)')
    host_gflops = Float(required=True, default=100.0, help='Host GEMM throughput used to cost the reference backend')


class ManifestSchema(DefaultSchema):
    subcommand = String(required=True, help='Subcommand that produced the report')
    arguments = Dict(required=True, help='Full argument set the subcommand ran with')
    seed = Int(required=True, help='Seed all randomized inputs were drawn from')
    tool_version = String(required=True, help='Package version and source commit')
    input_digests = Dict(required=True, help='SHA-256 of every input file, keyed by path')
