import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

import numpy as np

from ..core_arch.grid import core_label, FIRST_COMPUTE_ROW


def plot_utilization(report, grid, figure_location):

    """
    Saves a per-core utilization map and the busy timeline of every
    compute core

    Inputs:
    -------
    report : SimReport
    grid : Grid
    figure_location : file path

    """

    utilization = report.utilization

    heat = np.zeros((grid.compute_rows, grid.columns))
    for core in grid.compute_cores:
        heat[core.y - FIRST_COMPUTE_ROW, core.x] = utilization[core_label(core)]

    plt.figure(figsize=(8, 10))

    plt.subplot(2, 1, 1)
    plt.imshow(np.flipud(heat), aspect='auto', vmin=0, vmax=1, cmap='viridis',
               extent=(-0.5, grid.columns - 0.5, FIRST_COMPUTE_ROW - 0.5, FIRST_COMPUTE_ROW + grid.compute_rows - 0.5))
    plt.colorbar(label='utilization')
    plt.xlabel('column')
    plt.ylabel('row')
    plt.title('{} cycles'.format(report.total_cycles))

    plt.subplot(2, 1, 2)
    labels = [core_label(core) for core in grid.compute_cores]
    for row, label in enumerate(labels):
        spans = [(begin, end - begin) for begin, end in report.intervals[label]]
        plt.broken_barh(spans, (row - 0.4, 0.8), color='k')
    plt.yticks(range(len(labels)), labels, fontsize=6)
    plt.xlim([0, report.total_cycles])
    plt.xlabel('cycle')

    plt.tight_layout()
    plt.savefig(figure_location)
    plt.close()
