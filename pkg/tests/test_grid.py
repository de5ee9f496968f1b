'''
This module test the sampling grids and the sampled fields
'''
import numpy as np
import pytest

from spdcPETSc.errors import ConfigurationError, DomainError
from spdcPETSc.dispersion import CrystalSpec
from spdcPETSc.grid import GridSpec, ComplexField2D, PlaneTag, ringExtent, MOMENTUM, POSITION

def test_grid_spacing():
    '''
    Testing the conjugate spacings dx dq = 2 pi / N
    '''
    grid = GridSpec(512, 1.2)
    assert np.isclose(grid.dx*grid.dq, 2*np.pi/512)
    assert np.isclose(grid.dx, np.pi/1.2)
    q = grid.momentum()
    assert q[256] == 0 and np.isclose(q[0], -1.2)
    assert grid.position()[256] == 0

def test_grid_samples():
    '''
    Testing that the sample count must be a power of two not smaller than 32
    '''
    for samples in (16, 48, 100):
        with pytest.raises(ConfigurationError):
            GridSpec(samples, 1.2)
    assert GridSpec(32, 1.2).refined().samples == 64

def test_weights():
    '''
    Testing that only the unpaired sample is left out of partner sums
    '''
    w = GridSpec(64, 1.2).weights()
    assert w[0] == 0 and np.all(w[1:] == 1)

def test_positions():
    '''
    Testing the position lookup on the conjugate grid
    '''
    grid = GridSpec(128, 1.2)
    assert grid.positionIndex(0.0) == 64
    assert grid.positionIndex(2*grid.dx) == 66
    with pytest.raises(DomainError):
        grid.positionIndex(1000.0)
    with pytest.raises(DomainError):
        grid.checkPosition(-1000.0)
    grid.checkPosition(100.0)

def test_ring_coverage():
    '''
    Testing the ring extent of the default crystal and the coverage check
    '''
    crystal = CrystalSpec()
    extent = ringExtent(crystal)
    assert 0.8 < extent < 1.05
    assert GridSpec(64, 1.2).checkCoverage(crystal) == extent
    with pytest.raises(ConfigurationError):
        GridSpec(64, 0.9).checkCoverage(crystal)

def test_field_tags():
    '''
    Testing the domain and plane tags of sampled fields
    '''
    grid = GridSpec(32, 1.2)
    field = ComplexField2D(np.ones(32), MOMENTUM, grid)
    assert field.plane == PlaneTag.CRYSTAL
    assert np.isclose(field.norm(), 32*grid.dq)
    with pytest.raises(DomainError):
        field.requireDomain(POSITION)
    with pytest.raises(DomainError):
        ComplexField2D(np.ones(16), MOMENTUM, grid)
    with pytest.raises(DomainError):
        ComplexField2D(np.ones(32), POSITION, grid, PlaneTag.APERTURE)
    with pytest.raises(DomainError):
        PlaneTag.checkTransform(PlaneTag.SLIT, PlaneTag.CRYSTAL)
    image = ComplexField2D(np.ones((32, 32)), POSITION, grid)
    assert image.axes == (("y", "um"), ("x", "um"))
    assert np.isclose(image.cell(), grid.dx**2)

if __name__ == '__main__':
    test_grid_spacing()
    test_grid_samples()
    test_weights()
    test_positions()
    test_ring_coverage()
    test_field_tags()
