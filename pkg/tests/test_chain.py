'''
This module test the optical chain: transforms, apertures, the double
slit and the cone calibration
'''
import numpy as np
import pytest

from spdcPETSc.errors import ConfigurationError, DomainError, DetectionError, SpdcWarning
from spdcPETSc.dispersion import CrystalSpec
from spdcPETSc.modes import PumpMode
from spdcPETSc.grid import GridSpec, ComplexField2D, PlaneTag, MOMENTUM, POSITION
from spdcPETSc.biphoton import build1DAmplitude, transmittedFraction
from spdcPETSc.chain import (ApertureSpec, apertureMask, DoubleSlitSpec, fourierTransform,
                             toNearField, toFarField, applyDoubleSlit, radialProfile,
                             measureConeDiameter, OpticalChain, nearFieldSingles)

def _randomField(shape, seed=3):
    generator = np.random.default_rng(seed)
    return generator.standard_normal(shape) + 1j*generator.standard_normal(shape)

@pytest.mark.parametrize("samples", [32, 128])
def test_parseval(samples):
    '''
    Testing that the centered transform is unitary with the grid measures
    '''
    grid = GridSpec(samples, 1.2)
    values = _randomField((samples, samples))
    transformed = fourierTransform(values, grid, (0, 1))
    position = np.sum(np.abs(values)**2)*grid.dx**2
    momentum = np.sum(np.abs(transformed)**2)*grid.dq**2
    assert abs(position-momentum) < 1e-12*position

@pytest.mark.parametrize("samples", [32, 128])
def test_round_trip(samples):
    '''
    Testing that inverse after forward gives the field back
    '''
    grid = GridSpec(samples, 1.2)
    values = _randomField((samples, samples))
    back = fourierTransform(fourierTransform(values, grid, (0, 1)), grid, (0, 1), forward=False)
    assert np.max(np.abs(back-values)) < 1e-12*np.max(np.abs(values))

def test_gaussian_transform():
    '''
    Testing the sign and centering convention on a displaced Gaussian
    '''
    grid = GridSpec(256, 1.2)
    x = grid.position()
    q = grid.momentum()
    sigma, shift = 20.0, 30.0
    values = np.exp(-(x-shift)**2/(2*sigma**2))
    expected = sigma*np.exp(-(q*sigma)**2/2)*np.exp(-1j*q*shift)
    assert np.max(np.abs(fourierTransform(values, grid)-expected)) < 1e-10

def test_plane_transitions():
    '''
    Testing the domain and plane bookkeeping of the transforms
    '''
    grid = GridSpec(32, 1.2)
    field = ComplexField2D(_randomField((32, 32)), MOMENTUM, grid, PlaneTag.CRYSTAL)
    near = toNearField(field)
    assert near.domain == POSITION and near.plane == PlaneTag.SLIT
    far = toFarField(near)
    assert far.domain == MOMENTUM and far.plane == PlaneTag.FAR_DETECTION
    assert np.max(np.abs(far.values-field.values)) < 1e-12*np.max(np.abs(field.values))
    with pytest.raises(DomainError):
        toFarField(field)
    with pytest.raises(DomainError):
        toNearField(far)

def test_far_field_oversampling():
    '''
    Testing that zero padding interpolates the far field without changing
    the original samples
    '''
    grid = GridSpec(32, 1.2)
    near = ComplexField2D(_randomField(32), POSITION, grid, PlaneTag.SLIT)
    coarse = toFarField(near)
    fine = toFarField(near, oversample=4)
    assert fine.grid.samples == 128
    assert np.isclose(fine.grid.dx, grid.dx)
    assert np.max(np.abs(fine.values[::4]-coarse.values)) < 1e-12*np.max(np.abs(coarse.values))
    with pytest.raises(ConfigurationError):
        toFarField(near, oversample=3)

def test_double_slit():
    '''
    Testing the slit openings on the position grid
    '''
    grid = GridSpec(512, 1.2)
    y = grid.position()
    slit = DoubleSlitSpec(65.0, 235.0, 20.0)
    upper, lower = slit.openings(grid)
    assert not np.any(upper & lower)
    assert abs(np.mean(y[upper])-(20.0+117.5)) < grid.dx
    assert abs(np.mean(y[lower])-(20.0-117.5)) < grid.dx
    assert abs(np.count_nonzero(upper)*grid.dx-65.0) < 2*grid.dx
    field = ComplexField2D(np.ones(512), POSITION, grid, PlaneTag.SLIT)
    transmitted = applyDoubleSlit(field, slit)
    assert np.array_equal(transmitted.values, (upper | lower).astype(float))
    with pytest.raises(ConfigurationError):
        slit.openings(GridSpec(32, 0.05))
    with pytest.raises(ConfigurationError):
        DoubleSlitSpec(300.0, 235.0)

def test_magnified_double_slit():
    '''
    Testing the slit openings of a magnified image of the crystal exit plane
    '''
    grid = GridSpec(512, 1.2)
    M = 235.0/(np.sqrt(2)*75.0)
    slit = DoubleSlitSpec(65.0, 235.0, magnification=M)
    upper, lower = slit.openings(grid)
    y = grid.position()
    assert np.allclose(slit.positions(grid), M*y)
    assert abs(np.mean(y[upper])-75.0/np.sqrt(2)) < grid.dx
    assert abs(np.mean(y[lower])+75.0/np.sqrt(2)) < grid.dx
    assert abs(np.count_nonzero(upper)*grid.dx*M-65.0) < 2*grid.dx*M
    assert slit.metadata()["magnification"] == M
    chain = OpticalChain(slit=slit)
    assert chain.metadata()["magnification"] == M
    with pytest.raises(ConfigurationError):
        DoubleSlitSpec(65.0, 235.0, magnification=0.0)

def test_aperture_masks():
    '''
    Testing binary masks in relative and absolute units
    '''
    grid = GridSpec(128, 1.2)
    q = grid.momentum()
    circle = ApertureSpec("circle", "relative", 0.3, 0.0, 1.0)
    mask = apertureMask(circle, grid, coneDiameter=0.96)
    assert set(np.unique(mask)) <= {0.0, 1.0}
    assert np.array_equal(mask*mask, mask)
    centroid = (np.sum(mask*q[None, :])/np.sum(mask), np.sum(mask*q[:, None])/np.sum(mask))
    assert abs(centroid[0]) < grid.dq and abs(centroid[1]-0.96) < grid.dq
    slit = ApertureSpec("vertical-slit", "absolute", 2.0, 1.0)
    inverse = ApertureSpec("inverse-slit", "absolute", 2.0, 1.0)
    assert np.array_equal(apertureMask(slit, grid, planeScale=10.0)
                          + apertureMask(inverse, grid, planeScale=10.0), np.ones((128, 128)))
    assert np.all(apertureMask(ApertureSpec(), grid) == 1)
    with pytest.raises(DomainError):
        apertureMask(circle, grid)
    with pytest.raises(ConfigurationError):
        ApertureSpec("square")
    with pytest.raises(ConfigurationError):
        ApertureSpec("circle", size=2.0)

def test_cone_diameter():
    '''
    Testing the cone diameter on a synthetic annulus
    '''
    grid = GridSpec(256, 1.2)
    q = grid.momentum()
    radius = np.sqrt(q[None, :]**2 + q[:, None]**2)
    annulus = np.exp(-(radius-0.48)**2/(2*0.02**2))
    assert abs(measureConeDiameter(annulus, grid)-0.96) < 0.02
    radii, profile, centre = radialProfile(annulus, grid)
    assert abs(radii[np.argmax(profile)]-0.48) <= grid.dq
    assert np.hypot(*centre) < grid.dq
    with pytest.raises(DetectionError):
        measureConeDiameter(np.ones((256, 256)), grid)

def test_chain_calibration():
    '''
    Testing the calibration and the 1-D masks of the chain
    '''
    grid = GridSpec(128, 1.2)
    chain = OpticalChain(ApertureSpec("vertical-slit", size=0.3))
    assert chain.needsCone()
    with pytest.raises(DomainError):
        chain.masks(grid)
    chain.calibrate(0.96)
    assert np.isclose(chain.planeScale, 10.0/0.96)
    with pytest.warns(SpdcWarning):
        signalMask, idlerMask = chain.masks1D(grid)
    assert signalMask.shape == (128,) and np.all(idlerMask == 1)
    with pytest.raises(DetectionError):
        chain.calibrate(0.0)
    assert not OpticalChain().needsCone()

def test_near_field_singles():
    '''
    Testing that the near-field singles carry the transmitted weight
    '''
    grid = GridSpec(128, 1.2)
    amplitude = build1DAmplitude(grid, PumpMode(), CrystalSpec())
    chain = OpticalChain(ApertureSpec("circle", size=0.3, centerY=1.0))
    chain.calibrate(0.96)
    y, intensity = nearFieldSingles(amplitude, chain)
    signalMask, idlerMask = chain.masks1D(grid)
    expected = transmittedFraction(amplitude, signalMask, idlerMask)
    assert y.shape == intensity.shape == (128,)
    assert np.all(intensity >= 0)
    assert np.allclose(y, chain.slit.positions(grid))
    assert abs(np.sum(intensity)*grid.dx-expected) < 1e-12

if __name__ == '__main__':
    for n in (32, 128):
        test_parseval(n)
        test_round_trip(n)
    test_gaussian_transform()
    test_plane_transitions()
    test_far_field_oversampling()
    test_double_slit()
    test_magnified_double_slit()
    test_aperture_masks()
    test_cone_diameter()
    test_chain_calibration()
    test_near_field_singles()
