'''
This module contains the optical elements of the two arms: far-field
apertures acting on the momentum grid, the double slit in the signal near
field and the unitary transforms between conjugate planes.
'''
import warnings

import numpy as np
from scipy.signal import find_peaks

from spdcPETSc.errors import ConfigurationError, DomainError, DetectionError, SpdcWarning
from spdcPETSc.grid import GridSpec, ComplexField2D, PlaneTag, MOMENTUM, POSITION

SHAPES = ("none", "vertical-slit", "inverse-slit", "circle")
UNITS = ("relative", "absolute")

class ApertureSpec:
    '''
    This class describes a hard-edged far-field aperture of one arm.

    :arg shape: 'none', 'vertical-slit', 'inverse-slit' or 'circle'

    :arg units: 'relative' (fractions of the measured cone diameter) or
                'absolute' (mm in the aperture plane)

    :arg size: slit width or circle diameter

    :arg centerX: horizontal center, same units as size

    :arg centerY: vertical center, same units as size
    '''
    def __init__(self, shape="none", units="relative", size=0.3, centerX=0.0, centerY=0.0):
        if shape not in SHAPES:
            raise ConfigurationError("unknown aperture shape '{}'".format(shape))
        if units not in UNITS:
            raise ConfigurationError("aperture units must be relative or absolute")
        if shape != "none":
            if size <= 0:
                raise ConfigurationError("aperture size must be positive")
            if units == "relative" and size > 1.5:
                raise ConfigurationError("relative aperture size must lie in (0, 1.5]")
        self.shape = shape
        self.units = units
        self.size = float(size)
        self.center = (float(centerX), float(centerY))

    def toMomentum(self, coneDiameter=None, planeScale=None):
        '''
        Size and center converted to rad/µm

        :arg coneDiameter: measured cone diameter in rad/µm, needed in relative mode

        :arg planeScale: aperture plane scale in mm per rad/µm, needed in absolute mode
        '''
        if self.units == "relative":
            if coneDiameter is None:
                raise DomainError("relative aperture used before the cone diameter was measured")
            factor = coneDiameter
        else:
            if planeScale is None:
                raise DomainError("absolute aperture used without a plane scale")
            factor = 1/planeScale
        return self.size*factor, self.center[0]*factor, self.center[1]*factor

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"shape": self.shape, "units": self.units, "size": self.size,
                "center": list(self.center)}

def apertureMask(spec, grid, coneDiameter=None, planeScale=None):
    '''
    Binary mask of an aperture on the momentum grid, indexed [y, x]

    :arg spec: ApertureSpec

    :arg grid: GridSpec
    '''
    N = grid.samples
    if spec.shape == "none":
        return np.ones((N, N))
    size, cx, cy = spec.toMomentum(coneDiameter, planeScale)
    q = grid.momentum()
    qx, qy = q[None, :], q[:, None]
    if spec.shape == "circle":
        mask = (qx-cx)**2 + (qy-cy)**2 <= (size/2)**2
    else:
        mask = np.broadcast_to(np.abs(qx-cx) <= size/2, (N, N))
        if spec.shape == "inverse-slit":
            mask = ~mask
    return mask.astype(float)

class DoubleSlitSpec:
    '''
    This class describes a double slit with its long axis along x,
    opening 1 is the upper one, |Y - offset - d/2| <= a/2. The crystal exit
    plane is imaged onto the slit plane with magnification M, a point y on
    the crystal lands at Y = M y and a far-field angle q on the grid reads
    Q = q/M in slit-plane units.

    :arg width: slit width a in µm

    :arg separation: center-to-center separation d in µm

    :arg offset: lateral offset in µm

    :arg magnification: imaging magnification M from the crystal to the slit
    '''
    def __init__(self, width=65.0, separation=235.0, offset=0.0, magnification=1.0):
        if not 0 < width < separation:
            raise ConfigurationError("double slit needs 0 < width < separation",
                                     key="chain.slit.width_um")
        if not magnification > 0:
            raise ConfigurationError("magnification must be positive", key="chain.magnification")
        self.width = float(width)
        self.separation = float(separation)
        self.offset = float(offset)
        self.magnification = float(magnification)

    def positions(self, grid):
        '''
        Slit-plane positions Y of the grid samples
        '''
        return grid.position()*self.magnification

    def openings(self, grid):
        '''
        Boolean transmissions (opening 1, opening 2) on the position grid

        :arg grid: GridSpec
        '''
        y = self.positions(grid)
        dx = grid.dx*self.magnification
        half = self.width/2 + 1e-6*dx
        upper = np.abs(y-self.offset-self.separation/2) <= half
        lower = np.abs(y-self.offset+self.separation/2) <= half
        for name, opening in (("upper", upper), ("lower", lower)):
            if np.count_nonzero(opening) < 4:
                raise ConfigurationError(
                    "{} slit opening resolved by {} samples, at least 4 are needed (dx = {:.3f} "
                    "µm)".format(name, np.count_nonzero(opening), dx), key="grid.q_max")
        return upper, lower

    def transmission(self, grid):
        '''
        Two-slit transmission along y
        '''
        upper, lower = self.openings(grid)
        return (upper | lower).astype(float)

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"width_um": self.width, "separation_um": self.separation,
                "offset_um": self.offset, "magnification": self.magnification}

def fourierTransform(values, grid, axes=(0,), forward=True):
    '''
    Centered unitary transform of an array along the given axes,
    forward maps position to momentum with F = dx/sqrt(2 pi) sum f exp(-i q x)

    :arg values: complex array sampled on the grid along the given axes

    :arg grid: GridSpec

    :arg axes: transformed axes

    :arg forward: position to momentum if True
    '''
    axes = tuple(axes)
    shifted = np.fft.ifftshift(np.asarray(values, dtype=complex), axes=axes)
    if forward:
        transformed = np.fft.fftn(shifted, axes=axes)*(grid.dx/np.sqrt(2*np.pi))**len(axes)
    else:
        transformed = np.fft.ifftn(shifted, axes=axes)*(np.sqrt(2*np.pi)/grid.dx)**len(axes)
    return np.fft.fftshift(transformed, axes=axes)

def _axes(field):
    return tuple(range(field.values.ndim))

def toNearField(field, plane=PlaneTag.SLIT):
    '''
    Image a momentum field onto a near-field plane. Positions stay in crystal
    units, DoubleSlitSpec scales them to the slit plane.

    :arg field: ComplexField2D in the momentum domain

    :arg plane: target position plane
    '''
    field.requireDomain(MOMENTUM)
    PlaneTag.checkTransform(field.plane, plane)
    values = fourierTransform(field.values, field.grid, _axes(field), forward=False)
    return ComplexField2D(values, POSITION, field.grid, plane)

def toFarField(field, oversample=1):
    '''
    Transform a near-field onto the far-field detection plane. With
    oversample > 1 the field is zero padded, the result lives on a grid with
    oversample times more samples over the same momentum window.

    :arg field: ComplexField2D in the position domain at the slit plane

    :arg oversample: power of two padding factor
    '''
    field.requireDomain(POSITION)
    PlaneTag.checkTransform(field.plane, PlaneTag.FAR_DETECTION)
    oversample = int(oversample)
    if oversample < 1 or oversample & (oversample-1):
        raise ConfigurationError("oversample must be a power of two", key="detector.oversample")
    grid = field.grid
    values = field.values
    if oversample > 1:
        grid = GridSpec(field.grid.samples*oversample, field.grid.qMax)
        pad = (grid.samples-field.grid.samples)//2
        values = np.pad(values, [(pad, pad)]*values.ndim)
    values = fourierTransform(values, grid, tuple(range(values.ndim)), forward=True)
    return ComplexField2D(values, MOMENTUM, grid, PlaneTag.FAR_DETECTION)

def applyDoubleSlit(field, slit):
    '''
    Multiply a near field by the two-slit transmission along y (axis 0),
    uniform in x

    :arg field: ComplexField2D in the position domain

    :arg slit: DoubleSlitSpec
    '''
    field.requireDomain(POSITION)
    transmission = slit.transmission(field.grid)
    if field.values.ndim == 2:
        transmission = transmission[:, None]
    return field.copy(field.values*transmission, PlaneTag.SLIT)

def radialProfile(singlesMap, grid):
    '''
    Mean of a map over rings of width dq about its intensity centroid,
    limited to radii whose circle fits inside the map

    :arg singlesMap: (N, N) non-negative map indexed [y, x]

    :arg grid: GridSpec of the map

    :return: (radii in rad/µm, profile, (q_x, q_y) of the centroid)
    '''
    values = np.asarray(singlesMap, dtype=float)
    total = np.sum(values)
    if not np.isfinite(total) or total <= 0 or np.ptp(values) == 0:
        raise DetectionError("no ring found in a flat singles map")
    q = grid.momentum()
    cx = np.sum(values*q[None, :])/total
    cy = np.sum(values*q[:, None])/total
    radius = np.sqrt((q[None, :]-cx)**2 + (q[:, None]-cy)**2)/grid.dq
    bins = np.rint(radius).astype(int).ravel()
    counts = np.bincount(bins)
    profile = np.bincount(bins, weights=values.ravel())/np.maximum(counts, 1)
    reach = int(min(cx-q[0], q[-1]-cx, cy-q[0], q[-1]-cy)/grid.dq)
    profile = profile[:max(reach, 3)]
    return np.arange(len(profile))*grid.dq, profile, (float(cx), float(cy))

def measureConeDiameter(singlesMap, grid):
    '''
    Diameter in rad/µm of the circle through the ring maxima of a singles
    map, from the peak of its radial profile about the intensity centroid,
    refined by a parabola through the peak and its neighbours.
    Divide by grid.dq for index units.

    :arg singlesMap: (N, N) non-negative map indexed [y, x]

    :arg grid: GridSpec of the map
    '''
    _, profile, _ = radialProfile(singlesMap, grid)
    peaks, _ = find_peaks(np.concatenate(([0.0], profile, [0.0])))
    peaks = peaks-1
    if peaks.size == 0:
        raise DetectionError("no ring found in the radial profile")
    p = int(peaks[np.argmax(profile[peaks])])
    offset = 0.0
    if 0 < p < len(profile)-1:
        left, centre, right = profile[p-1], profile[p], profile[p+1]
        curvature = left-2*centre+right
        if curvature != 0:
            offset = 0.5*(left-right)/curvature
    return 2*(p+offset)*grid.dq

class OpticalChain:
    '''
    This class holds the apertures of both arms and the double slit of the
    signal arm, together with the cone calibration needed by relative units.

    :arg signalAperture: ApertureSpec of the signal arm

    :arg idlerAperture: ApertureSpec of the idler arm

    :arg slit: DoubleSlitSpec

    :arg planeScale: aperture plane scale in mm per rad/µm, derived from the
                     measured cone if None

    :arg coneDiameterMm: cone diameter in the aperture plane used to derive the plane scale
    '''
    def __init__(self, signalAperture=None, idlerAperture=None, slit=None, planeScale=None,
                 coneDiameterMm=10.0):
        self.signalAperture = signalAperture if signalAperture is not None else ApertureSpec()
        self.idlerAperture = idlerAperture if idlerAperture is not None else ApertureSpec()
        self.slit = slit if slit is not None else DoubleSlitSpec()
        self.planeScale = planeScale
        self.coneDiameterMm = float(coneDiameterMm)
        self.coneDiameter = None

    def needsCone(self):
        '''
        True if a mask needs the measured cone diameter
        '''
        return any(a.shape != "none" and (a.units == "relative" or self.planeScale is None)
                   for a in (self.signalAperture, self.idlerAperture))

    def calibrate(self, coneDiameter):
        '''
        Record the measured cone diameter in rad/µm
        '''
        if coneDiameter <= 0:
            raise DetectionError("cone diameter must be positive")
        self.coneDiameter = float(coneDiameter)
        if self.planeScale is None:
            self.planeScale = self.coneDiameterMm/self.coneDiameter

    def masks(self, grid):
        '''
        (signal mask, idler mask) on the momentum grid, indexed [y, x]
        '''
        return tuple(apertureMask(a, grid, self.coneDiameter, self.planeScale)
                     for a in (self.signalAperture, self.idlerAperture))

    def masks1D(self, grid):
        '''
        (signal mask, idler mask) along q_y at q_x = 0 for the 1-D model
        '''
        for name, aperture in (("signal", self.signalAperture), ("idler", self.idlerAperture)):
            if aperture.shape in ("vertical-slit", "inverse-slit"):
                warnings.warn("the 1-D model samples the {} {} at q_x = 0 only, use "
                              "scan.model = 2d to resolve it".format(name, aperture.shape),
                              SpdcWarning)
        return tuple(mask[:, grid.samples//2] for mask in self.masks(grid))

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"signal_aperture": self.signalAperture.metadata(),
                "idler_aperture": self.idlerAperture.metadata(),
                "slit": self.slit.metadata(), "plane_scale_mm": self.planeScale,
                "cone_diameter_rad_um": self.coneDiameter,
                "magnification": self.slit.magnification, "beam_splitter": "ideal"}

def nearFieldSingles(amplitude, chain):
    '''
    Signal singles intensity along y at the slit plane in the 1-D model,
    I(y_s) = sum_k |F^-1[Phi(., q_k) M_s](y_s)|^2 M_i(q_k)^2 dq

    :arg amplitude: BiphotonAmplitude1D

    :arg chain: calibrated OpticalChain

    :return: (positions, intensity)
    '''
    grid = amplitude.grid
    signalMask, idlerMask = chain.masks1D(grid)
    values = amplitude.toArray()*signalMask[:, None]
    nearField = fourierTransform(values, grid, (0,), forward=False)
    intensity = np.sum(np.abs(nearField)**2*(idlerMask**2)[None, :], axis=1)*grid.dq
    return chain.slit.positions(grid), intensity
