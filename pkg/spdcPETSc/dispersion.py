'''
This module contains the refractive indices of a uniaxial crystal and the
longitudinal phase mismatch of type-II down-conversion.
Lengths are in µm, wave numbers in rad/µm and angles in radians.
'''
import math

import numpy as np

from spdcPETSc.errors import ConfigurationError, WavelengthRangeError
from spdcPETSc.errors import DomainError, NumericalError
from spdcPETSc.snes import NonLinearSolver

ORDINARY = "o"
EXTRAORDINARY = "e"

#Kato-type BBO dispersion, n^2 = A + B/(l^2 - C) - D l^2
BBO_SOURCE = "K. Kato, IEEE J. Quantum Electron. 22, 1013 (1986)"
BBO_ORDINARY = (2.7359, 0.01878, 0.01822, 0.01354)
BBO_EXTRAORDINARY = (2.3753, 0.01224, 0.01667, 0.01516)
BBO_RANGE = (0.22, 1.06)

#Gaussian fit of the transverse sinc envelope, used by the even surrogate
GAUSSIAN_WIDTH = 0.455

PHOTONS = ("pump", "signal", "idler")
PHASE_MATCHING = ("sinc", "none", "gaussian")
FIDELITY = ("exact", "fast")

class SellmeierSet:
    '''
    This class holds one dispersion formula n^2(l) = A + B/(l^2-C) - D l^2

    :arg coefficients: the tuple (A, B, C, D), C and B in µm^2, D in µm^-2

    :arg validity: wavelength range (µm) over which the formula may be evaluated

    :arg source: literature reference echoed into the output metadata
    '''
    def __init__(self, coefficients, validity=BBO_RANGE, source=BBO_SOURCE):
        coefficients = tuple(float(c) for c in coefficients)
        if len(coefficients) != 4:
            raise ConfigurationError("a Sellmeier set needs 4 coefficients, got {}".format(
                len(coefficients)))
        lo, hi = (float(v) for v in validity)
        if not 0 < lo < hi:
            raise ConfigurationError("invalid validity range [{}, {}]".format(lo, hi))
        if coefficients[2] > 0 and math.sqrt(coefficients[2]) >= lo:
            raise ConfigurationError("validity range contains the pole of the formula")
        self.coefficients = coefficients
        self.validity = (lo, hi)
        self.source = source
        samples = np.linspace(lo, hi, 257)
        if np.any(self.indexSquared(samples) <= 1):
            raise ConfigurationError("n^2 must exceed 1 over the validity range")

    def indexSquared(self, wavelength):
        '''
        Evaluate n^2 at the given wavelength(s)

        :arg wavelength: wavelength in µm, scalar or array
        '''
        lam = np.asarray(wavelength, dtype=float)
        lo, hi = self.validity
        if np.any(lam < lo) or np.any(lam > hi):
            raise WavelengthRangeError("wavelength {} µm outside of [{}, {}] µm".format(
                wavelength, lo, hi))
        A, B, C, D = self.coefficients
        lam2 = lam**2
        return A + B/(lam2-C) - D*lam2

    def __call__(self, wavelength):
        return np.sqrt(self.indexSquared(wavelength))

    def __eq__(self, other):
        return isinstance(other, SellmeierSet) and self.coefficients == other.coefficients \
            and self.validity == other.validity

    def __repr__(self):
        return "SellmeierSet({}, {})".format(self.coefficients, self.validity)

def indexOrdinary(sellmeierSet, wavelength):
    '''
    Ordinary refractive index

    :arg sellmeierSet: ordinary SellmeierSet

    :arg wavelength: wavelength in µm
    '''
    return sellmeierSet(wavelength)

def indexExtraordinary(ordinarySet, extraordinarySet, wavelength, theta):
    '''
    Index of the extraordinary wave travelling at angle theta to the optical
    axis, n(theta) = [cos^2/n_o^2 + sin^2/n_e^2]^(-1/2)

    :arg ordinarySet: ordinary SellmeierSet

    :arg extraordinarySet: extraordinary SellmeierSet

    :arg wavelength: wavelength in µm

    :arg theta: angle to the optical axis in [0, pi]
    '''
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0) or np.any(theta > np.pi):
        raise DomainError("angle to the optical axis must lie in [0, pi]")
    cos2 = np.cos(theta)**2
    return _ellipse(ordinarySet.indexSquared(wavelength),
                    extraordinarySet.indexSquared(wavelength), cos2)

def _ellipse(no2, ne2, cos2):
    return 1/np.sqrt(cos2/no2 + (1-cos2)/ne2)

class CrystalSpec:
    '''
    This class describes a type-II down-conversion crystal. The optical
    axis lies in the y-z plane along (0, -sin(axisAngle), cos(axisAngle)).

    :arg length: crystal length L in µm

    :arg axisAngle: optical axis tilt from z in radians

    :arg pumpWavelength: pump wavelength in µm

    :arg signalWavelength: signal wavelength in µm

    :arg idlerWavelength: idler wavelength in µm

    :arg ordinary: ordinary SellmeierSet, BBO by default

    :arg extraordinary: extraordinary SellmeierSet, BBO by default

    :arg signalPolarization: 'o' or 'e', the idler takes the other one

    :arg phaseMatching: 'sinc', or one of the surrogates 'none' and 'gaussian'

    :arg fidelity: 'exact' fixed-point k_z or 'fast' paraxial k_z
    '''
    def __init__(self, length=2000.0, axisAngle=math.radians(41.9), pumpWavelength=0.405,
                 signalWavelength=0.81, idlerWavelength=0.81, ordinary=None,
                 extraordinary=None, signalPolarization=ORDINARY, phaseMatching="sinc",
                 fidelity="exact"):
        self.length = float(length)
        self.axisAngle = float(axisAngle)
        self.wavelengths = {"pump": float(pumpWavelength), "signal": float(signalWavelength),
                            "idler": float(idlerWavelength)}
        self.ordinary = ordinary if ordinary is not None else SellmeierSet(BBO_ORDINARY)
        self.extraordinary = extraordinary if extraordinary is not None \
            else SellmeierSet(BBO_EXTRAORDINARY)
        if signalPolarization not in (ORDINARY, EXTRAORDINARY):
            raise ConfigurationError("polarization must be 'o' or 'e'",
                                     key="crystal.signal_polarization")
        idlerPolarization = EXTRAORDINARY if signalPolarization == ORDINARY else ORDINARY
        self.polarizations = {"pump": EXTRAORDINARY, "signal": signalPolarization,
                              "idler": idlerPolarization}
        if phaseMatching not in PHASE_MATCHING:
            raise ConfigurationError("unknown phase matching '{}'".format(phaseMatching),
                                     key="crystal.phase_matching")
        if fidelity not in FIDELITY:
            raise ConfigurationError("unknown fidelity '{}'".format(fidelity),
                                     key="run.fidelity")
        self.phaseMatching = phaseMatching
        self.fidelity = fidelity
        if self.length <= 0:
            raise ConfigurationError("crystal length must be positive", key="crystal.length_um")
        if min(self.wavelengths.values()) <= 0:
            raise ConfigurationError("wavelengths must be positive")
        lp, ls, li = (self.wavelengths[p] for p in PHOTONS)
        if abs(1/lp - 1/ls - 1/li) > 1e-12/lp:
            raise ConfigurationError("energy conservation 1/l_p = 1/l_s + 1/l_i violated")

    def wavelength(self, photon):
        '''
        Wavelength of 'pump', 'signal' or 'idler'
        '''
        return self.wavelengths[photon]

    def polarization(self, photon):
        '''
        Polarization of 'pump', 'signal' or 'idler'
        '''
        return self.polarizations[photon]

    def wavenumber(self, photon):
        '''
        On-axis wave number 2 pi n / l of the given photon
        '''
        lam = self.wavelengths[photon]
        if self.polarizations[photon] == ORDINARY:
            n = indexOrdinary(self.ordinary, lam)
        else:
            n = indexExtraordinary(self.ordinary, self.extraordinary, lam, self.axisAngle)
        return 2*np.pi*float(n)/lam

    def copy(self, **kwargs):
        '''
        Copy of the crystal with some of the constructor arguments replaced
        '''
        args = {"length": self.length, "axisAngle": self.axisAngle,
                "pumpWavelength": self.wavelengths["pump"],
                "signalWavelength": self.wavelengths["signal"],
                "idlerWavelength": self.wavelengths["idler"],
                "ordinary": self.ordinary, "extraordinary": self.extraordinary,
                "signalPolarization": self.polarizations["signal"],
                "phaseMatching": self.phaseMatching, "fidelity": self.fidelity}
        args.update(kwargs)
        return CrystalSpec(**args)

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"length_um": self.length, "axis_angle_deg": math.degrees(self.axisAngle),
                "wavelengths_um": dict(self.wavelengths),
                "polarizations": dict(self.polarizations),
                "sellmeier_o": list(self.ordinary.coefficients),
                "sellmeier_e": list(self.extraordinary.coefficients),
                "sellmeier_range_um": list(self.ordinary.validity),
                "sellmeier_source": self.ordinary.source,
                "phase_matching": self.phaseMatching, "fidelity": self.fidelity}

class WaveVector:
    '''
    Transverse wave vector (q_x, q_y) in rad/µm of one photon, the components
    may be arrays of any broadcastable shape
    '''
    def __init__(self, qx, qy):
        self.qx, self.qy = np.broadcast_arrays(np.asarray(qx, dtype=float),
                                               np.asarray(qy, dtype=float))

    def __add__(self, other):
        return WaveVector(self.qx+other.qx, self.qy+other.qy)

    def __sub__(self, other):
        return WaveVector(self.qx-other.qx, self.qy-other.qy)

    def __neg__(self):
        return WaveVector(-self.qx, -self.qy)

    def mirrorX(self):
        '''
        The wave vector with q_x -> -q_x
        '''
        return WaveVector(-self.qx, self.qy)

    def normSquared(self):
        '''
        |q|^2
        '''
        return self.qx**2 + self.qy**2

def kz(q, wavelength, polarization, crystal, maxIterations=50, rtol=1e-12):
    '''
    Longitudinal wave number of a plane wave inside the crystal.
    For the extraordinary wave the index depends on the direction, which
    depends on k_z; this is solved by fixed-point iteration started from the
    ordinary k_z.

    :arg q: WaveVector

    :arg wavelength: vacuum wavelength in µm

    :arg polarization: 'o' or 'e'

    :arg crystal: CrystalSpec, its fidelity selects exact or paraxial evaluation
    '''
    q2 = q.normSquared()
    no2 = crystal.ordinary.indexSquared(wavelength)
    k0 = 2*np.pi/wavelength
    if polarization == ORDINARY:
        k2 = k0**2*no2
        if np.any(q2 >= k2):
            raise DomainError("evanescent ordinary wave vector")
        return np.sqrt(k2-q2)
    if polarization != EXTRAORDINARY:
        raise ValueError("polarization must be 'o' or 'e', not '{}'".format(polarization))
    ne2 = crystal.extraordinary.indexSquared(wavelength)
    sinA, cosA = math.sin(crystal.axisAngle), math.cos(crystal.axisAngle)
    if crystal.fidelity == "fast":
        n = _ellipse(no2, ne2, cosA**2)
        K = k0*n
        if np.any(q2 >= K**2):
            raise DomainError("evanescent extraordinary wave vector")
        dndtheta = -n**3*sinA*cosA*(1/ne2-1/no2)
        return K + k0*dndtheta*q.qy/K - q2/(2*K)
    if np.any(q2 >= k0**2*max(no2, ne2)):
        raise DomainError("evanescent extraordinary wave vector")
    kzValue = np.sqrt(k0**2*no2-q2)
    for _ in range(maxIterations):
        cosT = (-q.qy*sinA + kzValue*cosA)/np.sqrt(q2+kzValue**2)
        arg = (k0*_ellipse(no2, ne2, cosT**2))**2 - q2
        if np.any(arg <= 0):
            raise DomainError("evanescent extraordinary wave vector")
        kzNew = np.sqrt(arg)
        converged = np.all(np.abs(kzNew-kzValue) <= rtol*np.abs(kzNew))
        kzValue = kzNew
        if converged:
            return kzValue
    raise NumericalError("extraordinary k_z did not converge in {} iterations".format(
        maxIterations))

def kzResidual(q, wavelength, kzValue, crystal):
    '''
    Residual |k_z - sqrt(k(theta(k_z))^2 - |q|^2)| of an extraordinary k_z
    '''
    q2 = q.normSquared()
    sinA, cosA = math.sin(crystal.axisAngle), math.cos(crystal.axisAngle)
    cosT = (-q.qy*sinA + kzValue*cosA)/np.sqrt(q2+kzValue**2)
    n = _ellipse(crystal.ordinary.indexSquared(wavelength),
                 crystal.extraordinary.indexSquared(wavelength), cosT**2)
    return np.abs(kzValue - np.sqrt((2*np.pi*n/wavelength)**2-q2))

def deltaKz(qs, qi, crystal):
    '''
    Phase mismatch k_z,pump(q_s+q_i) - k_z,signal(q_s) - k_z,idler(q_i)

    :arg qs: signal WaveVector

    :arg qi: idler WaveVector

    :arg crystal: CrystalSpec
    '''
    kp = kz(qs+qi, crystal.wavelength("pump"), crystal.polarization("pump"), crystal)
    ks = kz(qs, crystal.wavelength("signal"), crystal.polarization("signal"), crystal)
    ki = kz(qi, crystal.wavelength("idler"), crystal.polarization("idler"), crystal)
    return kp - ks - ki

def phaseMatchProfile(crystal, mismatch, differenceSquared=None):
    '''
    Phase-matching factor from a precomputed mismatch

    :arg crystal: CrystalSpec

    :arg mismatch: Delta k_z array

    :arg differenceSquared: |q_s - q_i|^2, only used by the gaussian surrogate
    '''
    if crystal.phaseMatching == "sinc":
        return np.sinc(np.asarray(mismatch)*crystal.length/(2*np.pi))
    if crystal.phaseMatching == "none":
        return np.ones_like(np.asarray(mismatch, dtype=float))
    Kp = crystal.wavenumber("pump")
    return np.exp(-GAUSSIAN_WIDTH*crystal.length*np.asarray(differenceSquared)/(4*Kp))

def phaseMatchAmplitude(qs, qi, crystal):
    '''
    sinc(Delta k_z L / 2), with sinc(0) = 1

    :arg qs: signal WaveVector

    :arg qi: idler WaveVector

    :arg crystal: CrystalSpec
    '''
    if crystal.phaseMatching == "sinc":
        return phaseMatchProfile(crystal, deltaKz(qs, qi, crystal))
    shape = np.broadcast(qs.qx, qi.qx).shape
    return phaseMatchProfile(crystal, np.zeros(shape), (qs-qi).normSquared())

def collinearAngle(crystal, bracket=(math.radians(30), math.radians(55)),
                   solverParameters=None):
    '''
    Optical axis angle for which the collinear process is phase matched,
    i.e. Delta k_z(0, 0) = 0, found with a PETSc SNES

    :arg crystal: CrystalSpec providing everything except the axis angle

    :arg bracket: angle interval that must contain the root
    '''
    origin = WaveVector(0.0, 0.0)
    def mismatch(theta):
        return float(deltaKz(origin, origin, crystal.copy(axisAngle=theta)))
    lo, hi = bracket
    if mismatch(lo)*mismatch(hi) > 0:
        raise NumericalError("no collinear phase matching between {:.2f} and {:.2f} deg".format(
            math.degrees(lo), math.degrees(hi)))
    step = 1e-6
    def residual(x):
        return np.array([mismatch(x[0])])
    def jacobian(x):
        return np.array([[(mismatch(x[0]+step)-mismatch(x[0]-step))/(2*step)]])
    parameters = {"snes_type": "newtonls", "snes_atol": 1e-13, "snes_rtol": 1e-14,
                  "snes_stol": 1e-16, "snes_max_it": 50, "ksp_type": "preonly",
                  "pc_type": "lu"}
    if solverParameters is not None:
        parameters.update(solverParameters)
    solver = NonLinearSolver(1, residual=residual, jacobian=jacobian,
                             solverParameters=parameters, optionsPrefix="spdc_pm_")
    theta = solver.solve(np.array([(lo+hi)/2]))[0]
    if not lo <= theta <= hi:
        raise NumericalError("phase-matching root left the bracket")
    return theta

def phaseMatchCurves(qRange, crystal, qx=0.0, samples=801, tol=1e-10):
    '''
    Zero set of Delta k_z in the (q_sy, q_iy) plane for q_sx = q_ix = qx.
    The plane is scanned along the difference coordinate d = q_sy - q_iy,
    for every d the roots in the sum coordinate s = q_sy + q_iy are bracketed
    by sign changes and refined by bisection.

    :arg qRange: (lo, hi) interval of both q_sy and q_iy in rad/µm

    :arg crystal: CrystalSpec

    :arg qx: common transverse x component of both photons

    :arg samples: samples per coordinate of the bracketing scan

    :return: list of polylines, arrays of shape (n, 2) holding (q_sy, q_iy)
    '''
    lo, hi = (float(v) for v in qRange)
    d = np.linspace(lo-hi, hi-lo, samples)
    s = np.linspace(2*lo, 2*hi, samples)
    def mismatch(dd, ss):
        qs = WaveVector(qx, (ss+dd)/2)
        qi = WaveVector(qx, (ss-dd)/2)
        return deltaKz(qs, qi, crystal)
    D = mismatch(d[:, None], s[None, :])
    inside = (np.abs(d[:, None]) <= 2*hi - s[None, :]) & (np.abs(d[:, None]) <= s[None, :] - 2*lo)
    D = np.where(inside, D, np.nan)
    left, right = D[:, :-1], D[:, 1:]
    rows, cols = np.nonzero((left*right < 0) | (left == 0))
    dRoot = d[rows]
    sLo, sHi = s[cols], s[cols+1]
    fLo = left[rows, cols]
    sMid = sLo.copy()
    scale = crystal.length/2
    active = fLo != 0
    for _ in range(100):
        if not np.any(active):
            break
        sMid = np.where(active, (sLo+sHi)/2, sMid)
        fMid = mismatch(dRoot, sMid)
        done = np.abs(fMid)*scale < tol
        lower = np.sign(fMid) == np.sign(fLo)
        sLo = np.where(active & lower, sMid, sLo)
        fLo = np.where(active & lower, fMid, fLo)
        sHi = np.where(active & ~lower, sMid, sHi)
        active = active & ~done
    sMid = np.where(left[rows, cols] == 0, s[cols], sMid)
    return _polylines(rows, dRoot, sMid)

def _polylines(rows, dRoot, sRoot):
    '''
    Group roots column by column into polylines, a change in the number of
    roots per column closes all open polylines
    '''
    polylines = []
    current = []
    previousRow, previousCount = None, None
    for row in np.unique(rows):
        roots = np.sort(sRoot[rows == row])
        d = dRoot[rows == row][0]
        contiguous = previousRow is not None and row == previousRow+1
        if not contiguous or len(roots) != previousCount:
            polylines += [p for p in current if len(p) > 1]
            current = [[] for _ in roots]
        for branch, sValue in zip(current, roots):
            branch.append(((sValue+d)/2, (sValue-d)/2))
        previousRow, previousCount = row, len(roots)
    polylines += [p for p in current if len(p) > 1]
    return [np.array(p) for p in polylines]

def lineCrossings(polylines, offset):
    '''
    Crossings of the polylines with the line q_sy + q_iy = offset

    :return: list of (q_sy, q_iy, slope) with slope = dq_iy/dq_sy
    '''
    crossings = []
    for line in polylines:
        g = line[:, 0] + line[:, 1] - offset
        for i in np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0]:
            t = g[i]/(g[i]-g[i+1])
            point = line[i] + t*(line[i+1]-line[i])
            a, b = max(i-1, 0), min(i+2, len(line)-1)
            dsy, diy = line[b]-line[a]
            slope = diy/dsy if dsy != 0 else np.inf
            crossings.append((point[0], point[1], slope))
    return crossings

def intersectionRegions(polylines, humpOffset):
    '''
    Group the crossings of the phase-matching curves with the pump node
    line q_sy + q_iy = 0 and the hump lines q_sy + q_iy = +-humpOffset into
    regions, sorted by decreasing q_sy. The first region is called 'upper',
    the last one 'lower'.

    :arg polylines: output of phaseMatchCurves

    :arg humpOffset: momentum offset of the pump humps, 0 for a single hump
    '''
    regions = []
    for qsy, qiy, slope in sorted(lineCrossings(polylines, 0.0), key=lambda c: -c[0]):
        regions.append({"name": "region{}".format(len(regions)), "node": (qsy, qiy),
                        "slope": slope, "crossings": []})
    if not regions:
        return regions
    regions[0]["name"] = "upper"
    if len(regions) > 1:
        regions[-1]["name"] = "lower"
    if humpOffset > 0:
        for offset in (humpOffset, -humpOffset):
            for crossing in lineCrossings(polylines, offset):
                nearest = min(regions, key=lambda r: abs(r["node"][0]-crossing[0]))
                nearest["crossings"].append(crossing)
    return regions

def slopeRatio(regions):
    '''
    Ratio of the largest to the smallest slope magnitude at the node crossings
    '''
    slopes = [abs(r["slope"]) for r in regions]
    if len(slopes) < 2 or min(slopes) == 0:
        return np.inf
    return max(slopes)/min(slopes)
