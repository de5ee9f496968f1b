'''
This module contains the mapping between numpy arrays and distributed
PETSc vectors, used to split per-pixel work across ranks and gather the
results.
'''
import numpy as np

from petsc4py import PETSc


class VectorMapping:
    '''
    This class creates a mapping between a distributed PETSc vector and
    numpy arrays holding either the locally owned block or the whole vector

    :arg parDescr: global size of the vector, or a PETSc Vec whose layout is used

    :arg comm: communicator, PETSc.COMM_WORLD by default

    :arg prefix: prefix for PETSc options
    '''
    def __init__(self, parDescr, comm=None, prefix='spdc_'):
        if isinstance(parDescr, PETSc.Vec):
            self.pVec = parDescr.duplicate()
        else:
            self.pVec = PETSc.Vec().create(comm=comm if comm is not None else PETSc.COMM_WORLD)
            self.pVec.setSizes(int(parDescr))
            self.pVec.setOptionsPrefix(prefix)
            self.pVec.setFromOptions()
        self.comm = self.pVec.getComm()
        self.size = self.pVec.getSize()
        self.start, self.end = self.pVec.getOwnershipRange()
        self.toZeroScat, self.zeroVec = PETSc.Scatter.toZero(self.pVec)
        self.toAllScat, self.allVec = PETSc.Scatter.toAll(self.pVec)

    def ownedRange(self):
        '''
        Global indices [start, end) owned by this rank
        '''
        return self.start, self.end

    def petscVec(self, localValues, petscVec=None):
        '''
        This function generate a PETSc vector from the locally owned values

        :arg localValues: numpy array of length end - start
        :arg petscVec: the PETSc vector to be loaded, if None a new one is generated
        '''
        if petscVec is None:
            petscVec = self.pVec.duplicate()
        petscVec.setArray(np.asarray(localValues, dtype=PETSc.ScalarType))
        return petscVec

    def fromGlobal(self, values, petscVec=None):
        '''
        This function loads a PETSc vector from a numpy array that every rank
        holds in full

        :arg values: numpy array of the global size
        :arg petscVec: the PETSc vector to be loaded, if None a new one is generated
        '''
        return self.petscVec(np.asarray(values)[self.start:self.end], petscVec)

    def numpyVec(self, petscVec, root=False):
        '''
        This function gathers a distributed PETSc vector into a numpy array

        :arg petscVec: the PETSc vector
        :arg root: if True only rank 0 receives the array, the others get None
        '''
        if root:
            self.toZeroScat.scatter(petscVec, self.zeroVec, addv=PETSc.InsertMode.INSERT,
                                    mode=PETSc.ScatterMode.FORWARD)
            if self.comm.getRank() != 0:
                return None
            return self.zeroVec.getArray(readonly=True).copy()
        self.toAllScat.scatter(petscVec, self.allVec, addv=PETSc.InsertMode.INSERT,
                               mode=PETSc.ScatterMode.FORWARD)
        return self.allVec.getArray(readonly=True).copy()

    def gather(self, localValues, root=False):
        '''
        This function gathers locally owned real values into a numpy array,
        complex values are gathered as two real vectors if PETSc is real

        :arg localValues: numpy array of length end - start
        :arg root: if True only rank 0 receives the array
        '''
        localValues = np.asarray(localValues)
        if np.iscomplexobj(localValues) and not np.iscomplexobj(np.zeros(1, PETSc.ScalarType)):
            real = self.gather(localValues.real, root)
            imag = self.gather(localValues.imag, root)
            return None if real is None else real + 1j*imag
        values = self.numpyVec(self.petscVec(localValues), root)
        if values is not None and not np.iscomplexobj(localValues):
            values = np.real(values)
        return values
