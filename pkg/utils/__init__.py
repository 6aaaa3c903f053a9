from .errors import *
from .functions import MovingAverage, ProgressBar
