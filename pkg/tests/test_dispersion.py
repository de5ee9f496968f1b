'''
This module test the dispersion of the crystal and the phase mismatch
'''
import math

import numpy as np
import pytest

from spdcPETSc.errors import ConfigurationError, WavelengthRangeError, DomainError
from spdcPETSc.dispersion import (SellmeierSet, CrystalSpec, WaveVector, BBO_ORDINARY,
                                  BBO_EXTRAORDINARY, indexOrdinary, indexExtraordinary, kz,
                                  kzResidual, deltaKz, phaseMatchAmplitude, collinearAngle,
                                  phaseMatchCurves, intersectionRegions, slopeRatio,
                                  lineCrossings)
from spdcPETSc.modes import PumpMode

def test_ordinary_index():
    '''
    Testing the ordinary BBO index at the pump and the signal wavelength
    '''
    ordinary = SellmeierSet(BBO_ORDINARY)
    assert abs(indexOrdinary(ordinary, 0.405)-1.6919) < 1e-3
    assert abs(indexOrdinary(ordinary, 0.810)-1.6603) < 1e-3

def test_wavelength_range():
    '''
    Testing that evaluation outside the validity range is refused
    '''
    ordinary = SellmeierSet(BBO_ORDINARY)
    with pytest.raises(WavelengthRangeError):
        ordinary(1.55)
    with pytest.raises(ConfigurationError):
        ordinary(0.1)

def test_sellmeier_coefficients():
    '''
    Testing that a Sellmeier set needs four coefficients
    '''
    with pytest.raises(ConfigurationError):
        SellmeierSet((2.7, 0.02, 0.02))

def test_extraordinary_limits():
    '''
    Testing n(0) = n_o and n(pi/2) = n_e
    '''
    ordinary = SellmeierSet(BBO_ORDINARY)
    extraordinary = SellmeierSet(BBO_EXTRAORDINARY)
    assert abs(indexExtraordinary(ordinary, extraordinary, 0.405, 0.0)-ordinary(0.405)) < 1e-14
    assert abs(indexExtraordinary(ordinary, extraordinary, 0.405, np.pi/2)
               - extraordinary(0.405)) < 1e-14
    with pytest.raises(DomainError):
        indexExtraordinary(ordinary, extraordinary, 0.405, -0.1)

def test_energy_conservation():
    '''
    Testing that wavelengths violating energy conservation are refused
    '''
    with pytest.raises(ConfigurationError):
        CrystalSpec(signalWavelength=0.8, idlerWavelength=0.81)

def test_kz_on_axis():
    '''
    Testing k_z at q = 0 against the on-axis wave numbers
    '''
    crystal = CrystalSpec()
    origin = WaveVector(0.0, 0.0)
    for photon in ("pump", "signal", "idler"):
        value = kz(origin, crystal.wavelength(photon), crystal.polarization(photon), crystal)
        assert abs(value-crystal.wavenumber(photon)) < 1e-10

def test_kz_extraordinary_residual():
    '''
    Testing that the extraordinary k_z solves its direction-dependent equation
    '''
    crystal = CrystalSpec()
    q = np.linspace(-1.0, 1.0, 41)
    wave = WaveVector(q[None, :], q[:, None])
    value = kz(wave, 0.405, "e", crystal)
    assert np.max(kzResidual(wave, 0.405, value, crystal)) < 1e-9

def test_kz_fast_paraxial():
    '''
    Testing that the paraxial k_z agrees with the exact one close to the axis
    '''
    exact = CrystalSpec()
    fast = exact.copy(fidelity="fast")
    q = np.linspace(-0.05, 0.05, 11)
    wave = WaveVector(q[None, :], q[:, None])
    difference = kz(wave, 0.405, "e", exact)-kz(wave, 0.405, "e", fast)
    assert np.max(np.abs(difference)) < 1e-4

def test_kz_evanescent():
    '''
    Testing that evanescent wave vectors are refused
    '''
    crystal = CrystalSpec()
    with pytest.raises(DomainError):
        kz(WaveVector(20.0, 0.0), 0.81, "o", crystal)
    with pytest.raises(DomainError):
        kz(WaveVector(0.0, 40.0), 0.405, "e", crystal)

def test_mismatch_mirror_symmetry():
    '''
    Testing that Delta k_z is even under q_x -> -q_x of both photons
    '''
    crystal = CrystalSpec()
    q = np.linspace(-0.9, 0.9, 19)
    qs = WaveVector(q[None, :], 0.3)
    qi = WaveVector(0.1, q[:, None])
    assert np.max(np.abs(deltaKz(qs, qi, crystal)
                         - deltaKz(qs.mirrorX(), qi.mirrorX(), crystal))) < 1e-12

def test_surrogate_phase_matching():
    '''
    Testing the surrogate phase-matching profiles
    '''
    q = WaveVector(np.linspace(-0.5, 0.5, 11), 0.2)
    flat = CrystalSpec(phaseMatching="none")
    assert np.all(phaseMatchAmplitude(q, -q, flat) == 1)
    gaussian = CrystalSpec(phaseMatching="gaussian")
    values = phaseMatchAmplitude(q, -q, gaussian)
    assert np.allclose(values, phaseMatchAmplitude(-q, q, gaussian), atol=1e-15)
    assert np.all(values <= 1)
    assert phaseMatchAmplitude(WaveVector(0, 0), WaveVector(0, 0), gaussian) == 1

def test_collinear_angle():
    '''
    Testing the collinear phase-matching angle found by SNES
    '''
    theta = collinearAngle(CrystalSpec())
    assert abs(math.degrees(theta)-41.9) < 1.5
    origin = WaveVector(0.0, 0.0)
    assert abs(deltaKz(origin, origin, CrystalSpec(axisAngle=theta))) < 1e-9

def test_curve_intersections():
    '''
    Testing the steep and the flat intersection of the phase-matching curves
    with the pump node line
    '''
    crystal = CrystalSpec()
    curves = phaseMatchCurves((-1.2, 1.2), crystal)
    regions = intersectionRegions(curves, PumpMode().humpOffset())
    assert len(regions) == 2
    assert regions[0]["name"] == "upper" and regions[1]["name"] == "lower"
    assert regions[0]["node"][0] > regions[1]["node"][0]
    assert abs(regions[0]["slope"]) < abs(regions[1]["slope"])
    assert slopeRatio(regions) >= 3
    for region in regions:
        qsy, qiy = region["node"]
        assert abs(qsy+qiy) < 1e-9
        mismatch = deltaKz(WaveVector(0, qsy), WaveVector(0, qiy), crystal)
        assert abs(mismatch)*crystal.length/2 < 1e-2
        assert len(region["crossings"]) >= 1

def test_curve_roots():
    '''
    Testing that the points of the phase-matching curves are roots of Delta k_z
    '''
    crystal = CrystalSpec()
    curves = phaseMatchCurves((-1.2, 1.2), crystal, samples=201)
    assert curves
    for line in curves:
        mismatch = deltaKz(WaveVector(0, line[:, 0]), WaveVector(0, line[:, 1]), crystal)
        assert np.max(np.abs(mismatch))*crystal.length/2 < 1e-8
    assert lineCrossings(curves, 0.0)

if __name__ == '__main__':
    test_ordinary_index()
    test_wavelength_range()
    test_sellmeier_coefficients()
    test_extraordinary_limits()
    test_energy_conservation()
    test_kz_on_axis()
    test_kz_extraordinary_residual()
    test_kz_fast_paraxial()
    test_kz_evanescent()
    test_mismatch_mirror_symmetry()
    test_surrogate_phase_matching()
    test_collinear_angle()
    test_curve_intersections()
    test_curve_roots()
