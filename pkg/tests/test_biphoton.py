'''
This module test the two-photon amplitude and its reductions against
dense brute-force sums
'''
import numpy as np
import pytest

from mpi4py.MPI import COMM_WORLD

from spdcPETSc.errors import DomainError, ConfigurationError
from spdcPETSc.dispersion import CrystalSpec, WaveVector
from spdcPETSc.modes import PumpMode
from spdcPETSc.grid import GridSpec
from spdcPETSc.biphoton import (SIGNAL, IDLER, phi, PartnerTables, build1DAmplitude, singles1D,
                                transmittedFraction, singlesMap2D, singlesCut, phaseVectors,
                                conditionalSignalAmplitudes, conditionalSignalAmplitude,
                                conditionalSignalSlices)

#dq = 2.5/N is exact in binary, so pair sums land exactly on the pump lattice
QMAX = 1.25

def _denseSignalMap(grid, pump, crystal, idlerMask=None):
    q = grid.momentum()
    w = grid.weights()
    weight = w[:, None]*w[None, :]
    if idlerMask is not None:
        weight = weight*idlerMask**2
    values = np.zeros((grid.samples, grid.samples))
    for jy in range(grid.samples):
        for jx in range(grid.samples):
            amplitude = phi(WaveVector(q[jx], q[jy]), WaveVector(q[None, :], q[:, None]), pump,
                            crystal)
            values[jy, jx] = np.sum(np.abs(amplitude)**2*weight)*grid.dq**2
    return values

def _dense1D(grid, pump, crystal):
    q = grid.momentum()
    w = grid.weights()
    values = phi(WaveVector(0.0, q[:, None]), WaveVector(0.0, q[None, :]), pump, crystal)
    values = values*w[:, None]*w[None, :]
    return values/np.sqrt(np.sum(np.abs(values)**2)*grid.dq**2)

def test_streaming_singles_dense():
    '''
    Testing the streaming singles map against the dense sum of |phi|^2 at N = 32
    '''
    grid = GridSpec(32, QMAX)
    pump = PumpMode()
    crystal = CrystalSpec()
    streaming = singlesMap2D(SIGNAL, grid, pump, crystal)
    dense = _denseSignalMap(grid, pump, crystal)
    assert np.max(np.abs(streaming-dense)) <= 1e-12*np.max(dense)

def test_streaming_singles_masked():
    '''
    Testing the partner mask of the streaming singles map
    '''
    grid = GridSpec(32, QMAX)
    pump = PumpMode()
    crystal = CrystalSpec()
    q = grid.momentum()
    idlerMask = (q[:, None] < 0).astype(float)*np.ones((1, 32))
    streaming = singlesMap2D(SIGNAL, grid, pump, crystal, idlerMask=idlerMask)
    dense = _denseSignalMap(grid, pump, crystal, idlerMask)
    assert np.max(np.abs(streaming-dense)) <= 1e-12*np.max(dense)

def test_singles_mirror_symmetry():
    '''
    Testing the x-mirror symmetry of both singles maps
    '''
    grid = GridSpec(32, QMAX)
    tables = PartnerTables(grid, PumpMode(), CrystalSpec())
    for arm in (SIGNAL, IDLER):
        values = singlesMap2D(arm, grid, PumpMode(), CrystalSpec(), tables=tables)
        paired = values[:, 1:]
        assert np.max(np.abs(paired-paired[:, ::-1])) <= 1e-10*np.max(values)

def test_singles_root():
    '''
    Testing that a map gathered on rank 0 only is None elsewhere
    '''
    grid = GridSpec(32, QMAX)
    values = singlesMap2D(SIGNAL, grid, PumpMode(), CrystalSpec(), root=True)
    if COMM_WORLD.rank == 0:
        assert values.shape == (32, 32)
    else:
        assert values is None

def test_singles_cut():
    '''
    Testing that a cut equals the matching column of the map
    '''
    grid = GridSpec(32, QMAX)
    pump = PumpMode()
    crystal = CrystalSpec()
    tables = PartnerTables(grid, pump, crystal)
    values = singlesMap2D(IDLER, grid, pump, crystal, tables=tables)
    cut = singlesCut(IDLER, 0.0, grid, pump, crystal, tables=tables)
    assert np.allclose(cut, values[:, 16], rtol=1e-15, atol=0)
    with pytest.raises(DomainError):
        singlesCut(SIGNAL, 5.0, grid, pump, crystal, tables=tables)
    with pytest.raises(ValueError):
        singlesMap2D("pump", grid, pump, crystal, tables=tables)

def test_amplitude_dense():
    '''
    Testing the distributed 1-D amplitude against the dense normalized phi
    '''
    grid = GridSpec(32, QMAX)
    pump = PumpMode()
    crystal = CrystalSpec()
    amplitude = build1DAmplitude(grid, pump, crystal)
    dense = _dense1D(grid, pump, crystal)
    assert np.max(np.abs(amplitude.toArray()-dense)) <= 1e-12*np.max(np.abs(dense))
    assert abs(amplitude.norm()-1) < 1e-12

def test_amplitude_coverage():
    '''
    Testing that a grid not covering the ring is refused
    '''
    with pytest.raises(ConfigurationError):
        build1DAmplitude(GridSpec(32, 0.8), PumpMode(), CrystalSpec())

def test_singles_1d():
    '''
    Testing the marginals of the 1-D model
    '''
    grid = GridSpec(64, QMAX)
    amplitude = build1DAmplitude(grid, PumpMode(), CrystalSpec())
    dense = np.abs(amplitude.toArray())**2
    signal = singles1D(amplitude, SIGNAL)
    idler = singles1D(amplitude, IDLER)
    assert np.allclose(signal, dense.sum(axis=1)*grid.dq, atol=1e-14)
    assert np.allclose(idler, dense.sum(axis=0)*grid.dq, atol=1e-14)
    assert abs(np.sum(signal)*grid.dq-1) < 1e-12
    assert abs(np.sum(idler)*grid.dq-1) < 1e-12
    assert abs(transmittedFraction(amplitude)-1) < 1e-12
    mask = (grid.momentum() > 0).astype(float)
    fraction = transmittedFraction(amplitude, signalMask=mask)
    assert 0 < fraction < 1
    assert np.isclose(fraction, np.sum(dense[mask > 0])*grid.dq**2)
    assert 0 <= amplitude.bandFraction() <= 1 + 1e-12

def test_conditional_amplitude():
    '''
    Testing the conditional signal amplitude against a dense projection
    '''
    grid = GridSpec(64, QMAX)
    amplitude = build1DAmplitude(grid, PumpMode(), CrystalSpec())
    dense = amplitude.toArray()
    positions = [-20.0, 0.0, 35.0]
    mask = (np.abs(grid.momentum()) < 0.8).astype(float)
    expected = dense @ (phaseVectors(grid, positions)*mask[:, None])
    values = conditionalSignalAmplitudes(positions, amplitude, mask)
    assert values.shape == (64, 3)
    assert np.max(np.abs(values-expected)) <= 1e-12*np.max(np.abs(expected))
    field = conditionalSignalAmplitude(35.0, amplitude, mask)
    assert np.allclose(field.values, expected[:, 2], atol=1e-14)
    with pytest.raises(DomainError):
        phaseVectors(grid, [1e4])

def test_conditional_slices():
    '''
    Testing one slice of the 2-D conditional amplitudes against phi
    '''
    grid = GridSpec(32, QMAX)
    pump = PumpMode(0, 1, 40.0)
    crystal = CrystalSpec()
    tables = PartnerTables(grid, pump, crystal)
    q = grid.momentum()
    w = grid.weights()
    positions = [0.0, 10.0]
    slices = conditionalSignalSlices(positions, tables)
    sx, ix, values = next(slices)
    block = phi(WaveVector(q[sx], q[:, None]), WaveVector(q[ix], q[None, :]), pump, crystal)
    block = block*w[:, None]*w[None, :]
    expected = block @ phaseVectors(grid, positions)
    assert np.max(np.abs(values-expected)) <= 1e-10*np.max(np.abs(expected))
    support = set(tables.pumpSupport().tolist())
    assert all(s+i in support for s, i, _ in slices)
    with pytest.raises(DomainError):
        next(conditionalSignalSlices(positions, PartnerTables(grid, pump, crystal, False)))

if __name__ == '__main__':
    test_streaming_singles_dense()
    test_streaming_singles_masked()
    test_singles_mirror_symmetry()
    test_singles_root()
    test_singles_cut()
    test_amplitude_dense()
    test_amplitude_coverage()
    test_singles_1d()
    test_conditional_amplitude()
    test_conditional_slices()
