"""
Single entry point for every module: ``npu-gemm <subcommand> [flags]``.

Flags are passed to the module's argschema parser after two rewrites:
dashes in flag names become underscores (``--check-schedule`` is
``--check_schedule``), and a boolean flag given without a value is set to
True. Exit codes: 0 on success, 1 on usage errors, 2 when a module raises
a WorkbenchError.
"""

import sys
import importlib
import collections

import marshmallow as mm
from argschema.fields import Bool, Nested

from .common.exceptions import WorkbenchError

Subcommand = collections.namedtuple('Subcommand', ['module', 'main', 'schema', 'summary'])

SUBCOMMANDS = collections.OrderedDict([
    ('plan', Subcommand('tiling_planner', 'main', 'InputParameters',
                        'tile a GEMM problem onto the array (--dump-arch prints the grid)')),
    ('layout', Subcommand('layout_engine', 'main', 'InputParameters',
                          'show the layout transform chain of an operand')),
    ('kernel', Subcommand('kernel_emulator', 'main', 'InputParameters',
                          'check kernel numerics and the VMAC schedule')),
    ('simulate', Subcommand('npu_simulator', 'main', 'InputParameters',
                            'run a plan on the cycle-approximate simulator')),
    ('gemm', Subcommand('gemm_offload', 'main', 'InputParameters',
                        'offload one GEMM and report the stage breakdown')),
    ('train-toy', Subcommand('gpt2_workbench', 'main', 'InputParameters',
                             'train a toy GPT-2 with offloaded GEMMs')),
    ('flops', Subcommand('gpt2_workbench', 'main_flops', 'FlopsInputParameters',
                         'count the FLOPs of one GPT-2 training step')),
])


def usage():

    lines = ['usage: npu-gemm <subcommand> [flags]', '', 'subcommands:']
    for name, sub in SUBCOMMANDS.items():
        lines.append('  {:<10} {}'.format(name, sub.summary))
    lines.append('')
    lines.append("run 'npu-gemm <subcommand> -h' for the flags of a subcommand")
    return '\n'.join(lines)


def bool_flags(schema_type, prefix=''):

    """
    Command-line names of every boolean field, nested groups included
    """

    flags = set()
    for name, field in schema_type().fields.items():
        if isinstance(field, Bool):
            flags.add('--' + prefix + name)
        elif isinstance(field, Nested):
            flags |= bool_flags(type(field.schema), prefix + name + '.')
    return flags


def flag_name(flag):
    return '--' + flag[2:].replace('-', '_')


def normalize_argv(argv, booleans):

    out = []
    for i, arg in enumerate(argv):

        if arg.startswith('--'):
            flag, sep, value = arg.partition('=')
            flag = flag_name(flag)
            following = argv[i + 1] if i + 1 < len(argv) else None

            if not sep and flag in booleans and (following is None or following.startswith('--')):
                out.extend([flag, 'True'])
                continue

            arg = flag + sep + value

        out.append(arg)

    return out


def main(argv=None):

    argv = sys.argv[1:] if argv is None else list(argv)

    if not argv or argv[0] in ('-h', '--help'):
        sys.stderr.write(usage() + '\n')
        return 0 if argv else 1

    name = argv[0]
    if name not in SUBCOMMANDS:
        sys.stderr.write('error: unknown subcommand {!r}\n\n{}\n'.format(name, usage()))
        return 1

    sub = SUBCOMMANDS[name]
    module = importlib.import_module('npu_gemm_workbench.modules.{}.__main__'.format(sub.module))
    schemas = importlib.import_module('npu_gemm_workbench.modules.{}._schemas'.format(sub.module))

    args = normalize_argv(argv[1:], bool_flags(getattr(schemas, sub.schema)))

    try:
        getattr(module, sub.main)(args)
    except SystemExit as e:
        # argparse exits 0 after -h and 2 on bad flags
        return 0 if not e.code else 1
    except mm.ValidationError as e:
        sys.stderr.write('error: invalid arguments: {}\n'.format(e))
        return 1
    except (IOError, OSError) as e:
        sys.stderr.write('error: {}\n'.format(e))
        return 1
    except WorkbenchError as e:
        sys.stderr.write('error: {}: {}\n'.format(type(e).__name__, e))
        return 2

    return 0


def console_main():
    sys.exit(main())


if __name__ == '__main__':
    console_main()
