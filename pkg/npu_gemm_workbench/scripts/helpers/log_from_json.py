import json


def summaryRow(size_name, reports):

    """
    One row of the sweep table from the plan and simulate reports of a size
    """

    row = {'size': size_name}

    if 'plan' in reports:
        with open(reports['plan']) as f:
            plan = json.load(f)
        row.update({'padded': plan['padded'],
                    'out_tiles_per_core': plan['out_tiles_per_core'],
                    'l1_footprint': plan['l1_footprint'],
                    'l2_footprint': plan['l2_footprint']})

    if 'simulate' in reports:
        with open(reports['simulate']) as f:
            sim = json.load(f)
        row.update({'total_cycles': sim['total_cycles'],
                    'utilization': sim['aggregate_utilization'],
                    'effective_flops': sim['effective_flops'],
                    'model_seconds': sim['model_seconds']})

    return row
