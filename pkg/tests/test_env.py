'''
This module test that the environment is correctly been setup.
In particular it will test for: petsc4py, PETSc, mpi4py, scipy and spdcPETSc
'''

import petsc4py
from petsc4py import PETSc
from mpi4py import MPI

import scipy

import spdcPETSc

def test_petsc4py():
    '''
    Testing that petsc4py can be imported correctly
    '''
    assert petsc4py.get_config() != ""

def  test_petsc():
    '''
    Testing that PETSc can be imported correctly
    '''
    assert PETSc.DECIDE == -1

def test_mpi4py():
    '''
    Testing that mpi4py shares the PETSc world communicator
    '''
    assert MPI.COMM_WORLD.size == PETSc.COMM_WORLD.getSize()

def test_scipy():
    '''
    Testing that scipy can be imported correctly
    '''
    assert scipy.__version__ != ""

def test_spdcPETSc():
    '''
    Testing that spdcPETSc can be imported correctly
    '''
    assert spdcPETSc.VERSION == "0.1.0"

if __name__ == '__main__':
    test_petsc4py()
    test_petsc()
    test_mpi4py()
    test_scipy()
    test_spdcPETSc()
