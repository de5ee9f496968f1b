'''
This module test the vec class
'''
import numpy as np

from mpi4py.MPI import COMM_WORLD

from spdcPETSc import VectorMapping

def test_vec_ownership():
    '''
    Testing that the ownership ranges of the ranks tile the vector
    '''
    Map = VectorMapping(37)
    start, end = Map.ownedRange()
    ranges = COMM_WORLD.allgather((start, end))
    assert ranges[0][0] == 0 and ranges[-1][1] == 37
    assert all(a[1] == b[0] for a, b in zip(ranges[:-1], ranges[1:]))

def test_vec_gather():
    '''
    Testing the gather of locally owned values on all ranks and on rank 0
    '''
    Map = VectorMapping(50)
    start, end = Map.ownedRange()
    local = np.arange(start, end, dtype=float)**2
    values = Map.gather(local)
    assert np.array_equal(values, np.arange(50, dtype=float)**2)
    rootValues = Map.gather(local, root=True)
    if COMM_WORLD.rank == 0:
        assert np.array_equal(rootValues, values)
    else:
        assert rootValues is None

def test_vec_gather_complex():
    '''
    Testing the gather of complex values
    '''
    Map = VectorMapping(20)
    start, end = Map.ownedRange()
    local = np.exp(1j*np.arange(start, end))
    assert np.allclose(Map.gather(local), np.exp(1j*np.arange(20)), atol=1e-15)

def test_vec_from_global():
    '''
    Testing the load of a PETSc Vec from an array every rank holds in full
    '''
    Map = VectorMapping(30)
    values = np.linspace(0, 1, 30)
    petscVec = Map.fromGlobal(values)
    assert np.allclose(np.real(Map.numpyVec(petscVec)), values)

if __name__ == '__main__':
    test_vec_ownership()
    test_vec_gather()
    test_vec_gather_complex()
    test_vec_from_global()
