"""CSV, plot-data and timing files written by the experiment runner."""

import logging
from pathlib import Path

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = '%.16e'
CSV_LINE_END = '\r\n'


def write_csv(frame: pd.DataFrame, path: str | Path, units: str, config_hash: str) -> Path:
    """Write a CSV whose first line is a comment naming units and the config hash"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as f:
        f.write(f"# units: {units}; config_hash={config_hash}{CSV_LINE_END}")
        frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator=CSV_LINE_END)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_csv(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')


def write_dat(path: str | Path, deltas, errors, measure: str, config_hash: str) -> Path:
    """Two whitespace-separated columns (delta, median error) for gnuplot"""
    path = Path(path)
    lines = [f"# delta median_{measure} config_hash={config_hash}"]
    lines += [f"{d:.16e} {e:.16e}" for d, e in zip(np.asarray(deltas), np.asarray(errors))]
    path.write_text('\n'.join(lines) + '\n')
    return path


def write_gnuplot_script(path: str | Path, fits: dict, title: str) -> Path:
    """Plot every measure's .dat file together with its fitted power law

    Args:
        path: Script location; .dat files are expected next to it
        fits: Mapping measure name -> (slope, intercept)
        title: Plot title
    """
    path = Path(path)
    lines = [
        f'set title "{title}"',
        'set logscale xy',
        'set xlabel "noise level delta"',
        'set ylabel "error at stop"',
        'set key left top',
        'set format xy "%.0e"',
    ]
    plots = []
    for i, (measure, (slope, intercept)) in enumerate(sorted(fits.items()), start=1):
        lines.append(f"f{i}(x) = exp({intercept:.16e}) * x**({slope:.16e})")
        plots.append(f"'{measure}.dat' using 1:2 with points pt 7 title '{measure}'")
        plots.append(f"f{i}(x) with lines title 'slope {slope:.3f}'")
    if plots:
        lines.append('plot ' + ', \\\n     '.join(plots))
    path.write_text('\n'.join(lines) + '\n')
    return path


def append_timings(path: str | Path, entries: list[str]) -> None:
    with open(path, 'a') as f:
        for entry in entries:
            f.write(entry + '\n')
