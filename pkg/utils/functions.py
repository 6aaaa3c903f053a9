import math
from collections import deque

import numpy as np


def db2lin(x_db):
    """ Converts a ratio in dB to linear scale. Works on scalars and arrays. """
    if np.ndim(x_db):
        return 10. ** (np.asarray(x_db, dtype=float) / 10.)
    return 10. ** (float(x_db) / 10.)

def dbm2mw(x_dbm):
    """ dBm -> mW. None stands for a noiseless receiver and maps to 0. """
    if x_dbm is None:
        return 0.
    return db2lin(x_dbm)

def shannon_threshold(x):
    """ t(x) = 2^x - 1, the SINR needed for a spectral efficiency of x bits/s/Hz. """
    if np.ndim(x):
        with np.errstate(over='ignore'):
            return np.expm1(np.asarray(x, dtype=float) * math.log(2.))
    if x >= 1024:
        return math.inf
    return math.expm1(x * math.log(2.))


class MovingAverage():
    """ Running average over the last max_window_size values. Non-finite values are skipped. """

    def __init__(self, max_window_size=1000):
        self.max_window_size = max_window_size
        self.reset()

    def add(self, elem):
        if not math.isfinite(elem):
            print('Warning: Moving average ignored a value of %f' % elem)
            return

        self.window.append(elem)
        self.sum += elem

        if len(self.window) > self.max_window_size:
            self.sum -= self.window.popleft()

    def reset(self):
        self.window = deque()
        self.sum = 0

    def get_avg(self):
        return self.sum / max(len(self.window), 1)


class ProgressBar():
    """
    Text progress bar. str(bar) gives the bar itself, bar.line(label) gives the
    whole status line that the simulator and the optimizer print with '\\r'.
    """

    def __init__(self, length, max_val):
        self.max_val = max(max_val, 1)
        self.length = length
        self.cur_val = 0

        self.cur_num_bars = -1
        self._update_str()

    def set_val(self, new_val):
        self.cur_val = min(max(new_val, 0), self.max_val)
        self._update_str()

    def is_finished(self):
        return self.cur_val == self.max_val

    def line(self, label:str, extra:str='') -> str:
        pct = 100 * self.cur_val / self.max_val
        return '\r%s  %s %6d / %6d (%5.1f%%) %s' % (label, self.string, self.cur_val, self.max_val, pct, extra)

    def _update_str(self):
        num_bars = int(self.length * (self.cur_val / self.max_val))

        if num_bars != self.cur_num_bars:
            self.cur_num_bars = num_bars
            self.string = '█' * num_bars + '░' * (self.length - num_bars)

    def __str__(self):
        return self.string
