""" Containers for computed curves and everything that ends up on disk. """
import os
import json
import hashlib
import datetime
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

# Fixed float formatting keeps reruns byte-identical
FLOAT_FORMAT = '%.10g'


@dataclass
class CcdfCurve:
    """
    Coverage (P(metric > threshold)) at ascending thresholds. kind is 'sinr'
    (thresholds linear) or 'rate' (bits/s). Empirical curves carry 95%
    confidence halfwidths; analytic ones may carry per class curves.
    """
    thresholds: np.ndarray
    values: np.ndarray
    kind: str
    halfwidths: Optional[np.ndarray] = None
    per_class: Optional[Dict] = None

    def __post_init__(self):
        self.thresholds = np.asarray(self.thresholds, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.thresholds.shape != self.values.shape:
            raise ValueError('thresholds and values differ in shape')
        if np.any(np.diff(self.thresholds) < 0):
            raise ValueError('thresholds must be ascending')

    def __len__(self):
        return len(self.thresholds)

    def to_frame(self, threshold_column:str, thresholds=None) -> pd.DataFrame:
        """
        One row per threshold: threshold_column, coverage, then class_* columns
        when per class values are present (None becomes an empty field).
        """
        frame = {threshold_column: self.thresholds if thresholds is None else thresholds,
                 'coverage': self.values}
        if self.per_class is not None:
            for user_class, values in self.per_class.items():
                frame[user_class.column] = [np.nan if v is None else v for v in values]
        if self.halfwidths is not None:
            frame['halfwidth'] = self.halfwidths
        return pd.DataFrame(frame)


def write_csv(frame:pd.DataFrame, path:str) -> str:
    """ Writes frame without index and returns the file's sha256. """
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='')
    return file_checksum(path)

def file_checksum(path:str) -> str:
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b''):
            sha.update(block)
    return sha.hexdigest()


@dataclass
class RunManifest:
    """ What was run, with which inputs, and what came out. Written as manifest.json. """
    config: dict
    mode: str
    seed: Optional[int]
    version: str
    started: str = field(default_factory=lambda: datetime.datetime.now().isoformat(timespec='seconds'))
    wall_clock: float = 0.
    outputs: Dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def add_csv(self, out_dir:str, name:str, frame:pd.DataFrame):
        self.outputs[name] = write_csv(frame, os.path.join(out_dir, name))

    def to_dict(self) -> dict:
        return {
            'config'    : self.config,
            'mode'      : self.mode,
            'seed'      : self.seed,
            'version'   : self.version,
            'started'   : self.started,
            'wall_clock': self.wall_clock,
            'outputs'   : self.outputs,
            'summary'   : self.summary,
            'timings'   : self.timings,
        }

    def write(self, out_dir:str) -> str:
        path = os.path.join(out_dir, 'manifest.json')
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, default=_to_json)
        return path


def _to_json(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)
