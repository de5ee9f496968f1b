'''
This module contains the sampling grids shared by all planes of the
optical chain and the sampled complex fields living on them.
'''
import numpy as np

from spdcPETSc.errors import ConfigurationError, DomainError, DetectionError
from spdcPETSc.dispersion import phaseMatchCurves, lineCrossings

MOMENTUM = "momentum"
POSITION = "position"

class PlaneTag:
    '''
    Planes of the optical chain, in propagation order. Transforms only
    connect adjacent conjugate planes.
    '''
    CRYSTAL = "crystal-exit momentum"
    APERTURE = "aperture plane"
    SLIT = "slit plane"
    NEAR_DETECTION = "detection near field"
    FAR_DETECTION = "detection far field"
    DOMAIN = {CRYSTAL: MOMENTUM, APERTURE: MOMENTUM, SLIT: POSITION,
              NEAR_DETECTION: POSITION, FAR_DETECTION: MOMENTUM}
    TRANSFORMS = {(APERTURE, SLIT), (CRYSTAL, SLIT), (SLIT, FAR_DETECTION),
                  (APERTURE, NEAR_DETECTION), (CRYSTAL, NEAR_DETECTION)}

    @classmethod
    def checkTransform(cls, source, target):
        '''
        Raise a DomainError unless a transform links source and target
        '''
        if (source, target) not in cls.TRANSFORMS:
            raise DomainError("no transform from the {} to the {}".format(source, target))

class GridSpec:
    '''
    This class describes the uniform momentum grid q_k = (k - N/2) dq,
    dq = 2 Q_max / N, and its conjugate position grid x_j = (j - N/2) dx,
    dx = pi / Q_max, so that dx dq = 2 pi / N.

    :arg samples: samples per axis N, a power of two not smaller than 32

    :arg qMax: momentum half extent in rad/µm
    '''
    def __init__(self, samples=512, qMax=1.2):
        samples = int(samples)
        if samples < 32 or samples & (samples-1):
            raise ConfigurationError("grid samples must be a power of two >= 32, got {}".format(
                samples), key="grid.samples")
        if qMax <= 0:
            raise ConfigurationError("q_max must be positive", key="grid.q_max")
        self.samples = samples
        self.qMax = float(qMax)
        self.dq = 2*self.qMax/samples
        self.dx = np.pi/self.qMax

    def momentum(self):
        '''
        Momentum samples in rad/µm
        '''
        return (np.arange(self.samples)-self.samples//2)*self.dq

    def position(self):
        '''
        Conjugate position samples in µm
        '''
        return (np.arange(self.samples)-self.samples//2)*self.dx

    def weights(self):
        '''
        Quadrature weights of the partner sums: one, except for the sample at
        -Q_max that has no mirror image on the grid
        '''
        w = np.ones(self.samples)
        w[0] = 0.0
        return w

    def positionIndex(self, y):
        '''
        Index of the position sample nearest to y

        :arg y: position in µm
        '''
        j = int(round(y/self.dx)) + self.samples//2
        if not 0 <= j < self.samples:
            raise DomainError("position {} µm outside the conjugate grid".format(y))
        return j

    def checkPosition(self, y):
        '''
        Raise a DomainError if y lies outside the conjugate position grid
        '''
        lo, hi = -self.samples//2*self.dx, (self.samples//2-1)*self.dx
        slack = 1e-9*self.dx
        if not lo-slack <= y <= hi+slack:
            raise DomainError("position {} µm outside [{}, {}] µm".format(y, lo, hi))

    def checkCoverage(self, crystal, margin=0.15):
        '''
        Check that Q_max covers the emission ring with the given margin

        :return: the ring extent in rad/µm
        '''
        extent = ringExtent(crystal)
        if self.qMax < (1+margin)*extent:
            raise ConfigurationError(
                "q_max = {} rad/µm does not cover the ring extent {:.4f} rad/µm with {:.0%} "
                "margin".format(self.qMax, extent, margin), key="grid.q_max")
        return extent

    def refined(self):
        '''
        Grid with twice as many samples over the same momentum window
        '''
        return GridSpec(2*self.samples, self.qMax)

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"samples": self.samples, "q_max": self.qMax, "dq": self.dq, "dx_um": self.dx}

def ringExtent(crystal, samples=801):
    '''
    Largest |q_y| at which the phase-matching curve crosses the line of zero
    total transverse momentum, i.e. the outer edge of the emission ring

    :arg crystal: CrystalSpec
    '''
    reach = 0.25*min(crystal.wavenumber("signal"), crystal.wavenumber("idler"))
    curves = phaseMatchCurves((-reach, reach), crystal, samples=samples)
    crossings = lineCrossings(curves, 0.0)
    if not crossings:
        raise DetectionError("no phase matching in |q| < {:.3f} rad/µm, check the axis angle"
                             .format(reach))
    return max(max(abs(c[0]), abs(c[1])) for c in crossings)

class ComplexField2D:
    '''
    This class holds a complex field sampled on a GridSpec, a vector along y
    or an array indexed [y, x]

    :arg values: complex samples

    :arg domain: 'momentum' or 'position'

    :arg grid: GridSpec

    :arg plane: PlaneTag, defaults to the crystal exit or the slit plane
    '''
    def __init__(self, values, domain, grid, plane=None):
        values = np.asarray(values, dtype=complex)
        if domain not in (MOMENTUM, POSITION):
            raise DomainError("unknown domain '{}'".format(domain))
        if values.ndim not in (1, 2) or any(n != grid.samples for n in values.shape):
            raise DomainError("field of shape {} does not match the grid".format(values.shape))
        if plane is None:
            plane = PlaneTag.CRYSTAL if domain == MOMENTUM else PlaneTag.SLIT
        if PlaneTag.DOMAIN[plane] != domain:
            raise DomainError("the {} is not a {} plane".format(plane, domain))
        self.values = values
        self.domain = domain
        self.grid = grid
        self.plane = plane

    @property
    def axes(self):
        '''
        Axis labels and units
        '''
        if self.domain == MOMENTUM:
            labels = (("q_y", "rad/um"), ("q_x", "rad/um"))
        else:
            labels = (("y", "um"), ("x", "um"))
        return labels[:self.values.ndim]

    def cell(self):
        '''
        Area (or length) element of one sample
        '''
        step = self.grid.dq if self.domain == MOMENTUM else self.grid.dx
        return step**self.values.ndim

    def requireDomain(self, domain):
        '''
        Raise a DomainError unless the field lives in the given domain
        '''
        if self.domain != domain:
            raise DomainError("expected a {} field, got a {} field".format(domain, self.domain))

    def norm(self):
        '''
        Squared norm sum |f|^2 times the sample cell
        '''
        return float(np.sum(np.abs(self.values)**2)*self.cell())

    def copy(self, values=None, plane=None):
        '''
        Copy of the field, optionally with new values or plane
        '''
        return ComplexField2D(self.values.copy() if values is None else values, self.domain,
                              self.grid, self.plane if plane is None else plane)
