'''
This module test the reference results of the simulator on the default
setup: the complementarity scans, the ring and cut peak counts, the fringe
parity and the numerical consistency checks
'''
import math

import numpy as np

from mpi4py.MPI import COMM_WORLD

from spdcPETSc.config import ScenarioConfig
from spdcPETSc.dispersion import CrystalSpec
from spdcPETSc.modes import PumpMode, hermiteGauss
from spdcPETSc.grid import GridSpec, ComplexField2D, PlaneTag, POSITION
from spdcPETSc.chain import OpticalChain, DoubleSlitSpec
from spdcPETSc.biphoton import build1DAmplitude
from spdcPETSc.detection import (CoincidenceModel, DetectorSpec, vdScan, fringeFromNearField,
                                 visibility, tomographicCut, countPeaks)
from spdcPETSc.scenarios import (Scenario, applyPreset, scan, ringCuts, cutBands,
                                 COMPLEMENTARITY_TOLERANCE, _fringeParity, _refinement,
                                 _crossCheck)

def _scenario(overrides=None):
    settings = {"run.workers": COMM_WORLD.size}
    settings.update(overrides or {})
    return Scenario(ScenarioConfig().copy(settings))

def _hump(config):
    return config.magnification()*config["pump.waist_um"]/math.sqrt(2)

def test_complementarity_bound():
    '''
    Testing the scan behind the upper circle: V^2 + D^2 stays below one,
    reaches it over a band, and the humps and the node give the which-way
    and the interference limits
    '''
    scenario = _scenario()
    upper = applyPreset(scenario.config, "circle-upper").copy({"scan.points": 17})
    result, _ = scan(scenario, upper)
    assert result.maxComplementarity() <= 1+COMPLEMENTARITY_TOLERANCE
    assert result.equalityBand(0.95) is not None
    hump = _hump(upper)
    landmarks, _ = scan(scenario, upper.copy({"scan.y_min_um": -hump, "scan.y_max_um": hump,
                                              "scan.points": 3}))
    assert np.all(landmarks.Dabs[[0, 2]] > 0.9)
    assert landmarks.V[1] > 0.9 and landmarks.Dabs[1] < 0.1
    assert landmarks.D[0]*landmarks.D[2] < 0

def test_unfair_sampling():
    '''
    Testing that the scan without an aperture exceeds the complementarity bound
    '''
    scenario = _scenario()
    free, _ = scan(scenario, applyPreset(scenario.config, "no-aperture").copy(
        {"scan.points": 17}))
    assert free.maxComplementarity() > 1+COMPLEMENTARITY_TOLERANCE
    finite = np.isfinite(free.V)
    assert np.all((free.V[finite] >= 0) & (free.V[finite] <= 1))

def test_ring_asymmetry():
    '''
    Testing the double peak of the upper ring and the single peak of the
    lower ring in the vertical singles cut
    '''
    _, _, _, summary = ringCuts(_scenario())
    assert summary["upper_peaks"] == 2
    assert summary["lower_peaks"] == 1

def test_tomographic_peaks():
    '''
    Testing two signal peaks through the flat intersection and one through
    the steep one on the default setup
    '''
    scenario = _scenario()
    amplitude = scenario.amplitude()
    peaks = {}
    for name, band in cutBands(scenario):
        _, counts = tomographicCut(band, amplitude)
        peaks[name] = countPeaks(counts)
    assert peaks == {"upper": 2, "lower": 1}

def test_fringe_parity():
    '''
    Testing the central minimum and the double hump behind the upper circle
    and the central maximum and the single hump behind the lower circle
    '''
    scenario = _scenario()
    upper = _fringeParity(scenario, "circle-upper")
    assert upper["central_minimum"]
    assert upper["nearfield"]["peaks"] == 2
    assert upper["nearfield"]["aligned_with_slits"]
    lower = _fringeParity(scenario, "circle-lower")
    assert lower["central_maximum"]
    assert lower["nearfield"]["peaks"] == 1

def test_two_slit_period():
    '''
    Testing the fringe period 2 pi/d of a uniform field behind the slits
    of the default chain
    '''
    config = ScenarioConfig()
    grid = config.grid()
    slit = config.chain().slit
    upper, lower = slit.openings(grid)
    field = ComplexField2D((upper | lower).astype(complex), POSITION, grid, PlaneTag.SLIT)
    fringe = fringeFromNearField(field, slit, config.detector())
    rates = fringe.rates/fringe.rates.max()
    Q = fringe.coordinates
    central = np.abs(Q) <= np.pi/slit.separation
    assert np.all(rates[central] > 0.9*np.cos(Q[central]*slit.separation/2)**2 - 0.05)
    dark = np.argmin(np.abs(Q-np.pi/slit.separation))
    assert rates[dark] < 0.05
    assert visibility(fringe) > 0.99

def test_surrogate_symmetry():
    '''
    Testing that without the phase-matching factor the idler at the pump
    node leaves an odd signal field with equal counts through both slits
    '''
    grid = GridSpec(128, 1.25)
    pump = PumpMode()
    slit = DoubleSlitSpec(magnification=235.0/(math.sqrt(2)*pump.waist))
    model = CoincidenceModel(OpticalChain(slit=slit), grid, pump,
                             CrystalSpec(phaseMatching="none"), "1d")
    result = vdScan([0.0], model, DetectorSpec())
    assert abs(result.cs1[0]-result.cs2[0]) <= 1e-10*result.cs1[0]
    assert result.cs1[0] > 0
    assert abs(result.D[0]) < 1e-10

def test_band_fraction():
    '''
    Testing that the weight of the amplitude lies on the phase-matching band
    '''
    amplitude = build1DAmplitude(GridSpec(512, 1.2), PumpMode(), CrystalSpec())
    assert amplitude.bandFraction() >= 0.9
    assert amplitude.bandFraction(20*np.pi) >= 0.99

def test_mode_orthonormality():
    '''
    Testing the discrete inner products of TEM00 and TEM01
    '''
    x = np.linspace(-1500.0, 1500.0, 30001)
    dx = x[1]-x[0]
    u0 = hermiteGauss(0, 75.0, x)
    u1 = hermiteGauss(1, 75.0, x)
    assert abs(np.sum(u0*u0)*dx-1) < 1e-8
    assert abs(np.sum(u1*u1)*dx-1) < 1e-8
    assert abs(np.sum(u0*u1)*dx) < 1e-8

def test_refinement_and_cross_check():
    '''
    Testing V and D at the humps and the node against a grid with twice the
    samples and the 1-D against the reduced 2-D model
    '''
    scenario = _scenario()
    hump = _hump(scenario.config)
    positions = [-hump, 0.0, hump]
    refinement = _refinement(scenario, positions)
    assert refinement["max_dV"] <= 0.01 and refinement["max_dD"] <= 0.01
    check = _crossCheck(scenario, positions)
    assert check["samples"] <= 64
    assert check["max_dV"] <= 0.05 and check["max_dD"] <= 0.05

if __name__ == '__main__':
    test_complementarity_bound()
    test_unfair_sampling()
    test_ring_asymmetry()
    test_tomographic_peaks()
    test_fringe_parity()
    test_two_slit_period()
    test_surrogate_symmetry()
    test_band_fraction()
    test_mode_orthonormality()
    test_refinement_and_cross_check()
