'''
This module contains the row distributed dense PETSc matrix that stores a
sampled two-photon amplitude.
'''
import numpy as np

from petsc4py import PETSc

from spdcPETSc.vec import VectorMapping

def complexScalars():
    '''
    True if PETSc was built with complex scalars
    '''
    return np.iscomplexobj(np.zeros(1, dtype=PETSc.ScalarType))

class Matrix(object):
    '''
    This class creates a dense PETSc Matrix distributed by rows. Each rank
    evaluates only the rows it owns. Complex entries are stored as a real and
    an imaginary matrix when PETSc uses real scalars.

    :arg rowBlock: callback (rstart, rend) -> numpy array of the rows rstart..rend-1

    :arg shape: global (rows, columns)

    :arg comm: communicator, PETSc.COMM_WORLD by default

    :arg realValued: the callback returns real values only

    '''
    def __init__(self, rowBlock, shape, comm=None, realValued=False):
        comm = comm if comm is not None else PETSc.COMM_WORLD
        self.shape = tuple(shape)
        self.realValued = realValued
        self.mat = PETSc.Mat().createDense(self.shape, comm=comm)
        self.mat.setUp()
        self.rstart, self.rend = self.mat.getOwnershipRange()
        block = np.asarray(rowBlock(self.rstart, self.rend))
        self.local = block if not realValued else np.real(block)
        if complexScalars() or realValued:
            self._fill(self.mat, self.local)
            self.imagMat = None
        else:
            self._fill(self.mat, self.local.real)
            self.imagMat = self.mat.duplicate()
            self._fill(self.imagMat, self.local.imag)
        self.rowMapping = VectorMapping(self.mat.createVecLeft())
        self.colMapping = VectorMapping(self.mat.createVecRight())

    def _fill(self, mat, values):
        rows = np.arange(self.rstart, self.rend, dtype=PETSc.IntType)
        cols = np.arange(self.shape[1], dtype=PETSc.IntType)
        mat.setValues(rows, cols, np.ascontiguousarray(values, dtype=PETSc.ScalarType).ravel())
        mat.assemble()

    def mult(self, x):
        '''
        This function computes A x for a vector x held in full by every rank,
        the result is returned in full on every rank

        :arg x: numpy array of length columns, real or complex
        '''
        x = np.asarray(x)
        if complexScalars():
            y = self.rowMapping.pVec.duplicate()
            self.mat.mult(self.colMapping.fromGlobal(x), y)
            return self.rowMapping.numpyVec(y)
        parts = [x.real, x.imag] if np.iscomplexobj(x) else [x, None]
        result = np.zeros(self.shape[0], dtype=complex)
        for unit, part in zip((1, 1j), parts):
            if part is None:
                continue
            y = self.rowMapping.pVec.duplicate()
            self.mat.mult(self.colMapping.fromGlobal(part), y)
            result += unit*np.real(self.rowMapping.numpyVec(y))
            if self.imagMat is not None:
                self.imagMat.mult(self.colMapping.fromGlobal(part), y)
                result += unit*1j*np.real(self.rowMapping.numpyVec(y))
        return result

    def scale(self, alpha):
        '''
        Multiply the matrix by the real number alpha
        '''
        self.mat.scale(alpha)
        if self.imagMat is not None:
            self.imagMat.scale(alpha)
        self.local = self.local*alpha

    def rowReduce(self, function):
        '''
        Apply function to the owned block, one value per row, and gather the
        results on every rank

        :arg function: callback numpy block -> numpy vector of length rend - rstart
        '''
        return self.rowMapping.gather(function(self.local))

    def columnSum(self, values):
        '''
        Sum over rows of an elementwise function of the owned block

        :arg values: callback numpy block -> array of the block's shape
        '''
        comm = self.mat.getComm().tompi4py()
        return comm.allreduce(np.sum(values(self.local), axis=0))

    def toArray(self):
        '''
        The whole matrix as a numpy array on every rank
        '''
        comm = self.mat.getComm().tompi4py()
        return np.vstack(comm.allgather(self.local))

    def view(self):
        '''
        This function display PETSc Mat info

        '''
        self.mat.view()
