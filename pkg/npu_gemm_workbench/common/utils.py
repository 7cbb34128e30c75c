import os
import sys
import json
import time
import hashlib
import logging

import numpy as np
import marshmallow as mm
from dotenv import dotenv_values
from git import Repo

import npu_gemm_workbench
from .exceptions import InvalidProblemSize

logger = logging.getLogger(__name__)


def parse_dims(text, count):

    """
    Parses a dimension string such as '256x768x2304'

    Inputs:
    -------
    text : String
        Dimensions separated by 'x'
    count : Int
        Number of dimensions expected

    Outputs:
    --------
    dims : tuple of Int

    """

    parts = str(text).lower().replace('×', 'x').split('x')

    if len(parts) != count:
        raise InvalidProblemSize('expected {} dimensions in {!r}'.format(count, text))

    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise InvalidProblemSize('non-integer dimension in {!r}'.format(text))

    if min(dims) < 1:
        raise InvalidProblemSize('dimensions must be >= 1: {!r}'.format(text))

    return dims


def rms(data):

    """
    Computes root-mean-square of an array

    Input:
    -----
    data - numpy.ndarray

    Output:
    ------
    rms_value - float

    """

    return np.power(np.mean(np.power(data.astype('float64'), 2)), 0.5)


def load_with_schema(schema_type, data):

    """
    Validates a flat dictionary against an argschema DefaultSchema,
    filling in defaults. Unknown keys are rejected.
    """

    schema = schema_type()
    unknown = sorted(set(data) - set(schema.fields))
    if unknown:
        raise mm.ValidationError('unknown keys: {}'.format(', '.join(unknown)))

    result = schema.load(data)

    # marshmallow 2 returns (data, errors); marshmallow 3 raises
    if hasattr(result, 'errors'):
        if result.errors:
            raise mm.ValidationError(result.errors)
        return result.data

    return result


def read_config_file(config_file, schema_type):

    """
    Reads a line-oriented 'key = value' text file

    Inputs:
    -------
    config_file : file path
    schema_type : DefaultSchema subclass
        Schema used to type the values and supply defaults

    Outputs:
    --------
    config : dict

    """

    values = dotenv_values(config_file)
    values = {k.strip(): v for k, v in values.items() if v is not None}

    return load_with_schema(schema_type, values)


def resolve_cost(args):

    """
    Cost constants for a run: the 'cost_params' group, overridden by the
    optional 'cost_config' file.
    """

    from .schemas import CostParams

    cost = dict(load_with_schema(CostParams, {}))
    cost.update(args.get('cost_params') or {})

    if args.get('cost_config'):
        overrides = dotenv_values(args['cost_config'])
        overrides = {k.strip(): v for k, v in overrides.items() if v is not None}
        cost.update(load_with_schema(CostParams, dict(cost, **overrides)))

    return cost


def get_repo_commit_date_and_hash(repo_location):

    """
    Date and hash of the head commit of the checkout containing
    repo_location, or 'repository not available' for both

    """

    commit_date = 'repository not available'
    commit_hash = 'repository not available'

    if os.path.exists(repo_location):
        try:
            repo = Repo(repo_location, search_parent_directories=True)
            headcommit = repo.head.commit
            commit_date = time.strftime("%a, %d %b %Y %H:%M", time.gmtime(headcommit.committed_date))
            commit_hash = headcommit.hexsha
        except Exception:
            pass

    return commit_date, commit_hash


def tool_version():

    package_dir = os.path.dirname(os.path.abspath(npu_gemm_workbench.__file__))
    commit_date, commit_hash = get_repo_commit_date_and_hash(package_dir)

    if commit_hash == 'repository not available':
        return '{} (unversioned)'.format(npu_gemm_workbench.__version__)

    return '{} ({})'.format(npu_gemm_workbench.__version__, commit_hash[:12])


def file_digest(path, chunk_size=1 << 20):

    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(chunk_size), b''):
            sha.update(chunk)
    return sha.hexdigest()


def build_manifest(subcommand, args, input_keys=()):

    """
    Builds the RunManifest embedded in every report

    Inputs:
    -------
    subcommand : String
    args : dict
        Parsed arguments the module ran with
    input_keys : iterable of String
        Top-level argument names that hold input file paths

    Outputs:
    --------
    manifest : dict

    """

    digests = {}
    for key in input_keys:
        path = args.get(key)
        if path and os.path.isfile(path):
            digests[path] = file_digest(path)

    arguments = {k: v for k, v in args.items() if k not in ('log_level',)}

    return {'subcommand': subcommand,
            'arguments': json.loads(json.dumps(arguments, sort_keys=True, default=str)),
            'seed': int(args.get('seed', 0)),
            'tool_version': tool_version(),
            'input_digests': digests}


def write_report(mod, output):

    """
    Writes a module's output manifest to the 'report' path, or to
    standard output when no path was given.
    """

    text = json.dumps(mod.get_output_json(output), indent=2, sort_keys=True)

    path = mod.args.get('report') or mod.args.get('output_json')

    if path:
        with open(path, 'w') as f:
            f.write(text + '\n')
    else:
        print(text)


def log_execution_time(start):

    execution_time = time.time() - start
    logger.info('total time: ' + str(np.around(execution_time, 2)) + ' seconds')
    return execution_time


def printProgressBar(iteration, total, prefix = '', suffix = '', decimals = 0, length = 40, fill = '▒'):

    """
    Redraws a one-line progress bar on standard error; silent unless the
    workbench logs at INFO or below, so reports on standard output stay clean.
    """

    if not logger.isEnabledFor(logging.INFO) or total == 0:
        return

    percent = ("{0:." + str(decimals) + "f}").format(100 * (iteration / float(total)))
    filledLength = int(length * iteration // total)
    bar = fill * filledLength + '░' * (length - filledLength)
    sys.stderr.write('\r%s %s %s%% %s' % (prefix, bar, percent, suffix))
    sys.stderr.flush()

    if iteration == total:
        sys.stderr.write('\n')


def configure_logging(args):

    """
    Sends package log records to stderr at the argschema 'log_level'.
    """

    logging.basicConfig(format='%(message)s', stream=sys.stderr)
    logging.getLogger('npu_gemm_workbench').setLevel(args.get('log_level', 'ERROR'))


def relative_divergence(values, reference):

    """
    Element-wise |values - reference| / max(|reference|, rms(reference)).
    The rms floor keeps near-zero reference entries from dominating; an
    all-zero reference with equal values gives 0.
    """

    values = np.asarray(values, dtype='float64')
    reference = np.asarray(reference, dtype='float64')

    diff = np.abs(values - reference)
    floor = np.maximum(np.abs(reference), rms(reference)) if reference.size else np.abs(reference)

    out = np.zeros_like(diff)
    np.divide(diff, floor, out=out, where=floor > 0)
    out[(floor == 0) & (diff > 0)] = np.inf

    return out


def divergence_stats(values, reference):

    """
    Mean, max and standard deviation of relative_divergence.
    """

    d = relative_divergence(values, reference)
    if d.size == 0:
        return {'mean': 0.0, 'max': 0.0, 'std': 0.0}
    return {'mean': float(np.mean(d)), 'max': float(np.max(d)), 'std': float(np.std(d))}
