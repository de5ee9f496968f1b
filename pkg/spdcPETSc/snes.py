'''
This module contains all the functions related to the PETSc SNES
'''
import numpy as np

from petsc4py import PETSc

from spdcPETSc.errors import NumericalError


class NonLinearSolver:
    '''
    This class creates a PETSc Non-Linear Solver (SNES) for a small dense
    system given by numpy callbacks. Every rank solves its own copy of the
    system on PETSc.COMM_SELF.

    :arg size: number of unknowns

    :arg residual: callback x -> F(x), both numpy arrays of length size

    :arg jacobian: callback x -> dF/dx as a (size, size) numpy array,
                   if None central differences of the residual are used

    :arg solverParameters: PETSc options, without the prefix

    :arg optionsPrefix: prefix for the PETSc options of this solver
    '''
    def __init__(self, size, residual=None, jacobian=None, solverParameters=None,
                 optionsPrefix=None):
        self.size = size
        self.snes = PETSc.SNES().create(comm=PETSc.COMM_SELF)
        #Setting up the options
        options_object = PETSc.Options()
        prefix = optionsPrefix if optionsPrefix is not None else ""
        if solverParameters is not None:
            for optName, optValue in solverParameters.items():
                if not options_object.hasName(prefix+optName):
                    options_object[prefix+optName] = optValue
        self.snes.setOptionsPrefix(optionsPrefix)
        if residual is not None: self.residual = residual
        if jacobian is not None: self.jacobian = jacobian
        else: self.jacobian = self.finiteDifferenceJacobian
        self.f = PETSc.Vec().createSeq(size, comm=PETSc.COMM_SELF)
        self.J = PETSc.Mat().createDense((size, size), comm=PETSc.COMM_SELF)
        self.J.setUp()

    def setup(self):
        '''
        This method is used to setup the PETSc SNES object
        '''
        self.snes.setFunction(self.petscResidual, self.f)
        self.snes.setJacobian(self.petscJacobian, self.J, self.J)
        self.snes.setFromOptions()

    def solve(self, x0):
        '''
        This method solves the non-linear problem

        :arg x0: initial guess as a numpy array

        :return: the solution as a numpy array
        '''
        self.setup()
        x = PETSc.Vec().createSeq(self.size, comm=PETSc.COMM_SELF)
        x.setArray(np.asarray(x0, dtype=PETSc.ScalarType))
        self.snes.solve(None, x)
        reason = self.snes.getConvergedReason()
        if reason <= 0:
            raise NumericalError("SNES diverged with reason {}".format(reason))
        return np.real(x.getArray(readonly=True)).copy()

    def petscResidual(self, snes, x, f):
        '''
        This method is used to wrap the callback to the residual in
        a PETSc compatible way

        :arg snes: PETSc SNES object representing the non-linear solver

        :arg x: current guess of the solution as a PETSc Vec

        :arg f: residual function as PETSc Vec
        '''
        assert isinstance(snes, PETSc.SNES)
        values = self.residual(np.real(x.getArray(readonly=True)).copy())
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite residual")
        f.setArray(np.asarray(values, dtype=PETSc.ScalarType))

    def residual(x): #pylint: disable=E0102,E0213,E0202
        '''
        Callback to the residual of the non-linear problem

        :arg x: current guess of the solution as a numpy array

        :return: the residual as a numpy array
        '''
        raise NotImplementedError("No residual has been implemented yet.")

    def petscJacobian(self, snes, x, J, P):
        '''
        This method is used to wrap the callback to the Jacobian in
        a PETSc compatible way

        :arg snes: PETSc SNES object representing the non-linear solver

        :arg x: current guess of the solution as a PETSc Vec

        :arg J: Jacobian computed at x as a PETSc Mat

        :arg P: preconditioner for the Jacobian computed at x
                as a PETSc Mat
        '''
        assert isinstance(snes, PETSc.SNES)
        values = np.atleast_2d(self.jacobian(np.real(x.getArray(readonly=True)).copy()))
        rows = np.arange(self.size, dtype=PETSc.IntType)
        P.setValues(rows, rows, np.asarray(values, dtype=PETSc.ScalarType).ravel())
        P.assemble()
        if J.handle != P.handle:
            J.assemble()

    def finiteDifferenceJacobian(self, x, step=1e-7):
        '''
        Central difference Jacobian, used when no Jacobian callback is given

        :arg x: current guess of the solution as a numpy array
        '''
        columns = []
        for i in range(self.size):
            h = np.zeros(self.size)
            h[i] = step*max(1.0, abs(x[i]))
            columns.append((np.asarray(self.residual(x+h))-np.asarray(self.residual(x-h)))/(2*h[i]))
        return np.array(columns).T

    def jacobian(x): #pylint: disable=E0102,E0213,E0202
        '''
        Callback to the Jacobian of the non-linear problem

        :arg x: current guess of the solution as a numpy array

        :return: the Jacobian as a numpy array
        '''
        raise NotImplementedError("No Jacobian has been implemented yet.")
