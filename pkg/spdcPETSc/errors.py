'''
This module contains the exceptions raised by spdcPETSc.
They derive from the builtin exceptions so that generic handlers keep working.
'''

class ConfigurationError(ValueError):
    '''
    Invalid or inconsistent scenario configuration

    :arg message: description of the problem

    :arg line: 1-based line of the configuration file, if known

    :arg key: configuration key involved, if known

    :arg source: name of the configuration file, if known
    '''
    def __init__(self, message, line=None, key=None, source=None):
        self.message = message
        self.line = line
        self.key = key
        self.source = source
        super().__init__(str(self))

    def __str__(self):
        prefix = ""
        if self.source is not None:
            prefix += "{}:".format(self.source)
        if self.line is not None:
            prefix += "{}:".format(self.line)
        if self.key is not None:
            prefix += " {}:".format(self.key)
        return (prefix+" "+self.message).strip()

class WavelengthRangeError(ConfigurationError):
    '''
    Dispersion formula evaluated outside of its validity range
    '''

class DomainError(ValueError):
    '''
    Input outside the domain of an operation, e.g. evanescent wave vectors
    or a field tagged with the wrong plane
    '''

class NumericalError(RuntimeError):
    '''
    Numerical failure, e.g. a non-converged iteration
    '''

class DetectionError(NumericalError):
    '''
    A feature that should be detected was not found
    '''

class FringeResolutionError(NumericalError):
    '''
    The fringe pattern does not resolve a minimum next to its maximum
    '''

class UndefinedDistinguishabilityError(NumericalError):
    '''
    Both slit coincidence rates vanish
    '''

class SpdcWarning(UserWarning):
    '''
    Warning category used by spdcPETSc
    '''
