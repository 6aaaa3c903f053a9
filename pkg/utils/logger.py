import os
import json
import time
import platform

import numpy as np
import scipy

from .workers import visible_threads


def _to_json(obj):
    """ json.dumps fallback for the numpy types that end up in log entries. """
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, 'to_dict'):
        return obj.to_dict()
    return str(obj)


class Log:
    """
    Appends JSON lines describing a run to <log_dir>/<log_name>.log.

    Every time a Log is opened on a file a 'session' entry is written first with
    the data that stays fixed during the run (resolved config, CLI args, library
    versions, worker count). After that each call to log() writes one entry of
    the given type. Sessions are numbered, so rerunning into the same output
    directory keeps the history.

    Extra args:
     - session_data: Anything unique to this run, typically the config echo and args.
     - log_time: Also store the wall-clock time in each entry.
    """

    def __init__(self, log_name:str, log_dir:str='logs/', session_data:dict={}, log_time:bool=True):
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        self.log_path = os.path.join(log_dir, log_name + '.log')

        self.session = 0
        if os.path.exists(self.log_path):
            # Continue the numbering of whatever is already in there
            last = ''
            with open(self.log_path, 'r') as f:
                for line in f:
                    if line.strip():
                        last = line

            if last:
                self.session = json.loads(last)['session'] + 1

        self.log_time = log_time
        self._log_session_header(session_data)

    def _log_session_header(self, session_data:dict):
        info = {}
        info['type'] = 'session'
        info['session'] = self.session
        info['data'] = session_data

        info['host'] = {
            'python' : platform.python_version(),
            'numpy'  : np.__version__,
            'scipy'  : scipy.__version__,
            'threads': visible_threads(),
        }

        if self.log_time:
            info['time'] = time.time()

        self._write(info)

    def log(self, type:str, data:dict={}, **kwdargs):
        """
        Add an entry of the given type (e.g. 'stage', 'summary', 'error').
        Data points can be passed as kwdargs, as a dictionary, or both.
        """
        info = {}
        info['type'] = type
        info['session'] = self.session

        kwdargs.update(data)
        info['data'] = kwdargs

        if self.log_time:
            info['time'] = time.time()

        self._write(info)

    def _write(self, info:dict):
        with open(self.log_path, 'a') as f:
            f.write(json.dumps(info, default=_to_json) + '\n')


def read_log(path:str, session:int=None) -> list:
    """ Returns the entries of a log file, optionally only those of one session. """
    entries = []

    if not os.path.exists(path):
        print(path + ' doesn\'t exist!')
        return entries

    with open(path, 'r') as f:
        for line in f:
            line = line.strip()
            if len(line) > 0:
                js = json.loads(line)
                if session is None or js['session'] == session:
                    entries.append(js)

    return entries
