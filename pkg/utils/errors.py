"""
Exceptions raised by the analytic engine, the simulator and the config layer.
run.py maps them onto exit codes, see EXIT_CODES at the bottom.
"""


class HetNetError(Exception):
    """ Base class for everything this package raises on purpose. """
    pass


class ConfigError(HetNetError, ValueError):
    """ The configuration is missing a key or has a value outside its domain. """

    def __init__(self, key:str, message:str):
        self.key = key
        super().__init__('%s: %s' % (key, message))


class DomainError(HetNetError, ValueError):
    """ A numeric routine was called outside the region where it is defined. """
    pass


class ConvergenceError(HetNetError, RuntimeError):
    """
    Adaptive quadrature (or any other iterative routine) did not reach the
    requested tolerance. The estimated residual is kept around for reporting.
    """

    def __init__(self, message:str, residual:float=float('nan')):
        self.residual = residual
        super().__init__('%s (residual %.3g)' % (message, residual))


class DegenerateClassError(HetNetError, ValueError):
    """ A quantity conditioned on a user class with zero association probability. """
    pass


class BracketError(HetNetError, RuntimeError):
    """ A root search had no sign change over its search interval. """
    pass


class InsufficientSamplesError(HetNetError, ValueError):
    """ An empirical estimator got fewer samples than it needs. """

    def __init__(self, needed:int, got:int, what:str='results'):
        self.needed = needed
        self.got = got
        super().__init__('need at least %d %s, got %d' % (needed, what, got))


EXIT_OK          = 0
EXIT_CONFIG      = 2
EXIT_CONVERGENCE = 3
EXIT_CLAIMS      = 4

def exit_code(err:BaseException) -> int:
    """ Returns the CLI exit code for an exception raised while running a mode. """
    if isinstance(err, (ConfigError, DomainError)):
        return EXIT_CONFIG
    if isinstance(err, ConvergenceError):
        return EXIT_CONVERGENCE
    # Everything else we raise is a numerical dead end as far as the CLI is concerned
    return EXIT_CONVERGENCE
