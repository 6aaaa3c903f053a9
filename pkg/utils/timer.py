"""
Module-level stage timers.

	with timer.env('rate'):
		...

Timers nest: starting a new one pauses the running one, so every name only
accumulates the time spent in its own body. run.py resets the timers once per
run and writes stats() into the log and the manifest.
"""
import time
from collections import defaultdict

_total_times = defaultdict(float)
_start_times = {}
_timer_stack = []


def reset():
	""" Forget all accumulated times. """
	_total_times.clear()
	_start_times.clear()
	_timer_stack.clear()

def _pause(name):
	_total_times[name] += time.perf_counter() - _start_times.pop(name)

def start(name):
	""" Start timing name, pausing whatever timer was running. """
	if _timer_stack:
		_pause(_timer_stack[-1])
	_timer_stack.append(name)
	_start_times[name] = time.perf_counter()

def stop(name=None):
	""" Stop the innermost timer and resume the one below it. """
	if not _timer_stack:
		print('Warning: timer stopped with no timer running!')
		return

	top = _timer_stack.pop()
	if name is not None and name != top:
		print('Warning: stopping timer %s but %s is running!' % (name, top))
	_pause(top)

	if _timer_stack:
		_start_times[_timer_stack[-1]] = time.perf_counter()

def stats():
	""" Returns {name: seconds} for every timer seen since the last reset. """
	return dict(_total_times)

def total_time():
	""" Total seconds accumulated across all timers. """
	return sum(_total_times.values())

def print_stats():
	""" Prints the current timing information as a table. """
	names = list(_total_times.keys())
	width = max([len(k) for k in names] + [4])
	row = ' {:>%d} | {:>10.1f} ' % width

	header = (' {:^%d} | {:^10} ' % width).format('Name', 'Time (ms)')
	sep = '-' * header.find('|') + '+' + '-' * (len(header) - header.find('|') - 1)

	print()
	print(header)
	print(sep)
	for name in names:
		print(row.format(name, _total_times[name] * 1000))
	print(sep)
	print(row.format('Total', total_time() * 1000))
	print()


class env():
	"""
	Context manager around start / stop:
		with timer.env(name):
			# (...)
	"""

	def __init__(self, name):
		self.name = name

	def __enter__(self):
		start(self.name)

	def __exit__(self, e, ev, t):
		stop(self.name)
