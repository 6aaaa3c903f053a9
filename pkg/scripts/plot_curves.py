import sys, os
import pandas as pd
import matplotlib.pyplot as plt

# Usage: python scripts/plot_curves.py <out_dir> [sinr|rate|backhaul|validate|optimize]
# Reads the CSV files run.py wrote into out_dir and shows them.

CLASS_COLUMNS = ['class_macro', 'class_small', 'class_offloaded']
CLASS_NAMES   = ['Macro', 'Small cell (unbiased)', 'Offloaded']

out_dir = sys.argv[1]
kind = sys.argv[2] if len(sys.argv) > 2 else 'rate'

def read(name):
	path = os.path.join(out_dir, name)
	if not os.path.exists(path):
		print(path + ' doesn\'t exist!')
		sys.exit(1)
	return pd.read_csv(path)

def plot_ccdf(frame, x, title, log_x=False, extra=None):
	plt.title(os.path.basename(os.path.normpath(out_dir)) + ' ' + title)
	plt.xlabel(x)
	plt.ylabel('Coverage')

	names = ['Total']
	plt.plot(frame[x], frame['coverage'])
	for column, name in zip(CLASS_COLUMNS, CLASS_NAMES):
		if column in frame and frame[column].notna().any():
			plt.plot(frame[x], frame[column], '--')
			names.append(name)

	if extra is not None:
		plt.plot(frame[x], frame[extra], ':')
		names.append(extra.capitalize())

	if log_x:
		plt.xscale('log')
	plt.legend(names)
	plt.show()

def plot_gap(frame, x, title, log_x=False):
	plt.title(title)
	plt.xlabel(x)
	plt.ylabel('Coverage')

	plt.plot(frame[x], frame['analytic'])
	plt.errorbar(frame[x], frame['empirical'], yerr=frame['halfwidth'], fmt='o', markersize=3)

	if log_x:
		plt.xscale('log')
	plt.legend(['Analysis', 'Simulation'])
	plt.show()

def plot_surface(frame):
	plt.title('Objective over (bias, eta)')
	grid = frame.pivot(index='eta', columns='bias_db', values='objective')
	plt.imshow(grid.values, origin='lower', aspect='auto',
	           extent=[grid.columns.min(), grid.columns.max(), grid.index.min(), grid.index.max()])
	plt.xlabel('Bias (dB)')
	plt.ylabel('eta')
	plt.colorbar()
	plt.show()

if kind == 'sinr':
	plot_ccdf(read('sinr_coverage.csv'), 'threshold_db', 'SINR coverage')
elif kind == 'rate':
	frame = read('rate_coverage.csv')
	plot_ccdf(frame, 'threshold_bps', 'Rate coverage', log_x=True)
elif kind == 'backhaul':
	frame = read('backhaul_coverage.csv')
	plot_ccdf(frame, 'threshold_bps', 'Rate coverage, limited backhaul', log_x=True, extra='unlimited')
elif kind == 'validate':
	plot_gap(read('gap_sinr.csv'), 'threshold_db', 'SINR coverage')
	if os.path.exists(os.path.join(out_dir, 'gap_rate.csv')):
		plot_gap(read('gap_rate.csv'), 'threshold_bps', 'Rate coverage', log_x=True)
elif kind == 'optimize':
	plot_surface(read('surface.csv'))
else:
	print('Unknown plot kind ' + kind)
	sys.exit(1)
