'''
This module contains the progress monitor: rank 0 messages printed with
PETSc.Sys.Print when the spdc_monitor option is set, and PETSc log stages
timing the phases of a run.
'''
import time

from petsc4py import PETSc

class Monitor:
    '''
    This class prints progress messages and times the phases of a run

    :arg enabled: print messages, if None the PETSc option -spdc_monitor decides

    :arg prefix: options prefix
    '''
    def __init__(self, enabled=None, prefix="spdc_"):
        if enabled is None:
            enabled = PETSc.Options().getBool(prefix+"monitor", False)
        self.enabled = bool(enabled)
        self.timings = {}
        self._stages = {}

    def __call__(self, message, *args):
        if self.enabled:
            PETSc.Sys.Print("[spdc] "+message.format(*args))

    def stage(self, name):
        '''
        Context manager timing a phase inside a PETSc log stage
        '''
        return _Stage(self, name)

class _Stage:
    def __init__(self, monitor, name):
        self.monitor = monitor
        self.name = name
        self.start = None

    def __enter__(self):
        stages = self.monitor._stages
        if self.name not in stages:
            stages[self.name] = PETSc.Log.Stage("spdc "+self.name)
        stages[self.name].push()
        self.start = time.perf_counter()
        self.monitor("{} ...", self.name)
        return self

    def __exit__(self, *exc):
        elapsed = time.perf_counter()-self.start
        self.monitor._stages[self.name].pop()
        self.monitor.timings[self.name] = self.monitor.timings.get(self.name, 0.0)+elapsed
        self.monitor("{} done in {:.2f} s", self.name, elapsed)
        return False
