'''
This module contains the detection side: coincidence fringes in the far
field, slit coincidences in the near field, visibility, distinguishability
and their scan against the idler detector position.
'''
import numpy as np
from scipy.signal import find_peaks

from mpi4py import MPI

from spdcPETSc.errors import (ConfigurationError, DomainError, DetectionError, NumericalError,
                              FringeResolutionError, UndefinedDistinguishabilityError)
from spdcPETSc.grid import ComplexField2D, PlaneTag, MOMENTUM, POSITION
from spdcPETSc.chain import toNearField, toFarField
from spdcPETSc.biphoton import (conditionalSignalAmplitudes, conditionalSignalSlices,
                                PartnerTables, build1DAmplitude)
from spdcPETSc.vec import VectorMapping

MODELS = ("1d", "2d")

class DetectorSpec:
    '''
    This class describes the detectors of a scan: the signal detector in
    the far field and the idler detector scanned along y in the near field.
    Idler positions are given in the slit plane, which the idler arm shares.

    :arg signalPixel: half-width in rad/µm of the signal pixel, 0 is a point detector

    :arg idlerPixel: half-width in µm of the idler pixel, 0 is a point detector

    :arg oversample: zero padding factor of the far-field fringe
    '''
    def __init__(self, signalPixel=0.0, idlerPixel=0.0, oversample=8):
        if signalPixel < 0 or idlerPixel < 0:
            raise ConfigurationError("pixel half-widths must not be negative")
        self.signalPixel = float(signalPixel)
        self.idlerPixel = float(idlerPixel)
        self.oversample = int(oversample)

    def check(self, grid, magnification=1.0):
        '''
        Raise a ConfigurationError if a finite pixel is smaller than one grid
        cell of the plane it sits in
        '''
        dq, dx = grid.dq/magnification, grid.dx*magnification
        if 0 < self.signalPixel < dq:
            raise ConfigurationError("signal pixel {} rad/µm smaller than the grid cell {:.5f}"
                                     .format(self.signalPixel, dq),
                                     key="detector.signal_pixel")
        if 0 < self.idlerPixel < dx:
            raise ConfigurationError("idler pixel {} µm smaller than the grid cell {:.3f}"
                                     .format(self.idlerPixel, dx),
                                     key="detector.idler_pixel_um")

    def idlerSamples(self, y, step):
        '''
        Positions averaged by the idler pixel centred at y

        :arg y: pixel centre in µm

        :arg step: sample spacing in µm
        '''
        if self.idlerPixel == 0:
            return np.array([y])
        n = int(np.floor(self.idlerPixel/step))
        return y + np.arange(-n, n+1)*step

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"signal_plane": "far", "idler_plane": "near", "scan_axis": "y",
                "signal_pixel": self.signalPixel, "idler_pixel_um": self.idlerPixel,
                "oversample": self.oversample}

class FringePattern:
    '''
    This class holds a far-field coincidence fringe. The envelope is the
    incoherent sum |F1|^2 + |F2|^2 of the two slit contributions, when it is
    known the window is centred on its maximum.

    :arg coordinates: signal q_y samples in rad/µm

    :arg rates: non-negative rates

    :arg window: (lo, hi) envelope window used by visibility

    :arg envelope: non-negative envelope on the same samples, or None
    '''
    def __init__(self, coordinates, rates, window=None, envelope=None):
        rates = np.asarray(rates, dtype=float)
        if not np.all(np.isfinite(rates)) or np.any(rates < 0):
            raise NumericalError("fringe rates must be finite and non-negative")
        self.coordinates = np.asarray(coordinates, dtype=float)
        self.rates = rates
        self.envelope = None if envelope is None else np.asarray(envelope, dtype=float)
        if window is None:
            window = (self.coordinates[0], self.coordinates[-1])
        self.window = (float(window[0]), float(window[1]))

    @property
    def centre(self):
        '''
        Centre of the envelope window
        '''
        return 0.5*(self.window[0]+self.window[1])

    def inWindow(self):
        '''
        (coordinates, rates) inside the envelope window
        '''
        inside = self._inside()
        return self.coordinates[inside], self.rates[inside]

    def _inside(self):
        return (self.coordinates >= self.window[0]) & (self.coordinates <= self.window[1])

    def normalized(self):
        '''
        (coordinates, rates/envelope) where the envelope in the window is at
        least half its maximum
        '''
        inside = self._inside()
        q, rates, envelope = self.coordinates[inside], self.rates[inside], self.envelope[inside]
        if envelope.size == 0 or not np.max(envelope) > 0:
            return q[:0], rates[:0]
        keep = envelope >= 0.5*np.max(envelope)
        return q[keep], rates[keep]/envelope[keep]

    def centralSample(self):
        '''
        Index of the sample nearest to the window centre
        '''
        return int(np.argmin(np.abs(self.coordinates-self.centre)))

def centredFringe(coordinates, rates, envelope, halfWidth):
    '''
    FringePattern with the window [q_c - halfWidth, q_c + halfWidth] about
    the envelope maximum q_c
    '''
    centre = coordinates[int(np.argmax(envelope))]
    return FringePattern(coordinates, rates, (centre-halfWidth, centre+halfWidth), envelope)

def _contrast(values):
    if values.size == 0 or np.ptp(values) == 0:
        return 0.0
    p = int(np.argmax(values))
    minima, _ = find_peaks(-values)
    left = minima[minima < p]
    right = minima[minima > p]
    adjacent = [values[left[-1]]] if left.size else []
    adjacent += [values[right[0]]] if right.size else []
    if not adjacent:
        raise FringeResolutionError("no local minimum next to the fringe maximum")
    vMax, vMin = values[p], min(adjacent)
    return float((vMax-vMin)/(vMax+vMin))

def _extrema(q, values, centre):
    '''
    Local maxima and minima of values and the one nearest to centre as
    (index, is maximum), None without extrema
    '''
    maxima, _ = find_peaks(values)
    minima, _ = find_peaks(-values)
    candidates = [(abs(q[i]-centre), i, True) for i in maxima]
    candidates += [(abs(q[i]-centre), i, False) for i in minima]
    if not candidates:
        return maxima, minima, None
    _, index, isMaximum = min(candidates)
    return maxima, minima, (index, isMaximum)

def _centralContrast(q, values, centre):
    if values.size == 0 or np.ptp(values) == 0:
        return 0.0
    maxima, minima, central = _extrema(q, values, centre)
    if central is None:
        raise FringeResolutionError("no fringe extremum inside the envelope")
    p, isMaximum = central
    others = minima if isMaximum else maxima
    adjacent = [values[i] for i in (others[others < p][-1:].tolist()
                                    + others[others > p][:1].tolist())]
    if not adjacent:
        raise FringeResolutionError("no opposite extremum next to the central fringe")
    if isMaximum:
        vMax, vMin = values[p], min(adjacent)
    else:
        vMax, vMin = max(adjacent), values[p]
    return float((vMax-vMin)/(vMax+vMin))

def visibility(fringe):
    '''
    V = (R_max - R_min)/(R_max + R_min) with R_max the global maximum in the
    envelope window and R_min the smaller of the two local minima adjacent
    to it. A flat pattern has V = 0.

    When the fringe carries its envelope the rates are divided by it first,
    over the part of the window where the envelope is at least half its
    maximum, and the central fringe is used: the extremum nearest to the
    envelope maximum and the extreme one of its two neighbours of the other
    kind.

    :arg fringe: FringePattern
    '''
    if fringe.envelope is None:
        _, values = fringe.inWindow()
        return _contrast(values)
    q, values = fringe.normalized()
    return _centralContrast(q, values, fringe.centre)

def centralExtremum(fringe):
    '''
    'maximum' or 'minimum', the kind of the fringe extremum nearest to the
    window centre, None for a flat fringe
    '''
    if fringe.envelope is not None:
        q, values = fringe.normalized()
    else:
        q, values = fringe.inWindow()
    _, _, central = _extrema(q, values, fringe.centre)
    if central is None:
        return None
    return "maximum" if central[1] else "minimum"

def distinguishability(cs1, cs2):
    '''
    D = (C_S1 - C_S2)/(C_S1 + C_S2)
    '''
    total = cs1 + cs2
    if not total > 0:
        raise UndefinedDistinguishabilityError("no coincidences through either slit")
    return float((cs1-cs2)/total)

def boxcar(rates, halfWidth, step):
    '''
    Average of rates over a pixel of the given half-width
    '''
    n = int(round(halfWidth/step))
    if n == 0:
        return rates
    kernel = np.ones(2*n+1)/(2*n+1)
    return np.convolve(rates, kernel, mode="same")

def slitFarFields(field, slit, detector):
    '''
    Far fields (Q, F1, F2) of a near field behind opening 1 and opening 2,
    Q in slit-plane rad/µm

    :arg field: 1-D ComplexField2D in the position domain

    :arg slit: DoubleSlitSpec

    :arg detector: DetectorSpec
    '''
    field.requireDomain(POSITION)
    upper, lower = slit.openings(field.grid)
    F1 = toFarField(field.copy(field.values*upper, PlaneTag.SLIT), detector.oversample)
    F2 = toFarField(field.copy(field.values*lower, PlaneTag.SLIT), detector.oversample)
    return F1.grid.momentum()/slit.magnification, F1.values, F2.values

def fringeFromNearField(field, slit, detector):
    '''
    Far-field fringe |F[t(Y) psi(Y)]|^2 of a signal near field psi behind
    the double slit, with the envelope |F1|^2 + |F2|^2 and a window of
    half-width 2 pi/a about the envelope maximum

    :arg field: 1-D ComplexField2D in the position domain

    :arg slit: DoubleSlitSpec

    :arg detector: DetectorSpec
    '''
    Q, F1, F2 = slitFarFields(field, slit, detector)
    step = Q[1]-Q[0]
    rates = boxcar(np.abs(F1+F2)**2, detector.signalPixel, step)
    envelope = boxcar(np.abs(F1)**2+np.abs(F2)**2, detector.signalPixel, step)
    return centredFringe(Q, rates, envelope, 2*np.pi/slit.width)

class CoincidenceModel:
    '''
    This class binds the chain, the grid and the source of a coincidence
    scan. In the 1-D model the amplitude is the distributed
    BiphotonAmplitude1D; in the 2-D model the coincidence rate sums the
    (q_sx, q_ix) slices incoherently, the idler detector integrates over x.

    :arg chain: calibrated OpticalChain

    :arg grid: GridSpec

    :arg pump: PumpMode

    :arg crystal: CrystalSpec

    :arg model: '1d' or '2d'

    :arg amplitude: BiphotonAmplitude1D to reuse in the 1-D model
    '''
    def __init__(self, chain, grid, pump, crystal, model="1d", amplitude=None):
        if model not in MODELS:
            raise ConfigurationError("scan model must be 1d or 2d", key="scan.model")
        self.chain = chain
        self.grid = grid
        self.pump = pump
        self.crystal = crystal
        self.model = model
        if model == "1d":
            self.amplitude = amplitude if amplitude is not None \
                else build1DAmplitude(grid, pump, crystal)
            self.signalMask, self.idlerMask = chain.masks1D(grid)
            self.tables = None
        else:
            self.amplitude = None
            self.signalMask, self.idlerMask = chain.masks(grid)
            self.tables = PartnerTables(grid, pump, crystal)

    @property
    def collective(self):
        '''
        True if conditional amplitudes must be computed by all ranks together
        '''
        return self.model == "1d"

    def slices(self, positions):
        '''
        Generator of (weight, (N, P) conditional signal amplitudes)
        '''
        if self.model == "1d":
            A = conditionalSignalAmplitudes(positions, self.amplitude, self.idlerMask)
            yield 1.0, A*self.signalMask[:, None]
            return
        for _, _, A in conditionalSignalSlices(positions, self.tables, self.idlerMask,
                                               self.signalMask):
            yield 1.0, A

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"model": self.model, "chain": self.chain.metadata(),
                "grid": self.grid.metadata()}

def _accumulate(model, positions, detector, owned=None):
    '''
    Fringes and slit coincidences for a batch of slit-plane idler
    positions, the idler pixel is averaged incoherently. Conditional
    amplitudes are formed for every position, fringes only for the
    positions listed in owned.
    '''
    grid = model.grid
    slit = model.chain.slit
    upper, lower = slit.openings(grid)
    dY = grid.dx*slit.magnification
    owned = set(range(len(positions)) if owned is None else owned)
    groups = [detector.idlerSamples(y, dY) for y in positions]
    expanded = np.concatenate(groups)/slit.magnification if groups else np.zeros(0)
    owner = np.concatenate([np.full(len(g), i) for i, g in enumerate(groups)]) if groups \
        else np.zeros(0, dtype=int)
    sums = [None]*len(positions)
    cs1 = np.zeros(len(positions))
    cs2 = np.zeros(len(positions))
    if not model.collective and not owned:
        return sums, cs1, cs2
    for weight, A in model.slices(expanded):
        for p in range(A.shape[1]):
            i = int(owner[p])
            if i not in owned:
                continue
            near = toNearField(ComplexField2D(A[:, p], MOMENTUM, grid, PlaneTag.CRYSTAL))
            share = weight/len(groups[i])
            intensity = np.abs(near.values)**2
            cs1[i] += share*np.sum(intensity[upper])*dY
            cs2[i] += share*np.sum(intensity[lower])*dY
            fringe = fringeFromNearField(near, slit, detector)
            if sums[i] is None:
                sums[i] = [fringe.coordinates, share*fringe.rates, share*fringe.envelope]
            else:
                sums[i][1] = sums[i][1] + share*fringe.rates
                sums[i][2] = sums[i][2] + share*fringe.envelope
    halfWidth = 2*np.pi/slit.width
    fringes = [None if s is None else centredFringe(s[0], s[1], s[2], halfWidth) for s in sums]
    return fringes, cs1, cs2

def coincidenceFringe(yi, model, detector):
    '''
    Far-field coincidence fringe of the signal for an idler detected at y_i

    :arg yi: idler position in µm

    :arg model: CoincidenceModel

    :arg detector: DetectorSpec
    '''
    fringes, _, _ = _accumulate(model, [yi], detector)
    return fringes[0]

def singlesFringe(model, detector):
    '''
    Far-field signal singles fringe behind the double slit, the incoherent
    sum of the coincidence fringes over every idler grid position

    :arg model: CoincidenceModel

    :arg detector: DetectorSpec without an idler pixel
    '''
    if detector.idlerPixel:
        detector = DetectorSpec(detector.signalPixel, 0.0, detector.oversample)
    fringes, _, _ = _accumulate(model, model.chain.slit.positions(model.grid), detector)
    rates = np.sum([f.rates for f in fringes], axis=0)
    envelope = np.sum([f.envelope for f in fringes], axis=0)
    return centredFringe(fringes[0].coordinates, rates, envelope,
                         2*np.pi/model.chain.slit.width)

def slitCoincidences(yi, model, detector=None):
    '''
    (C_S1, C_S2): near-field coincidence rates integrated over the upper and
    the lower slit opening for an idler detected at y_i

    :arg yi: idler position in µm

    :arg model: CoincidenceModel
    '''
    _, cs1, cs2 = _accumulate(model, [yi], detector if detector is not None else DetectorSpec())
    return float(cs1[0]), float(cs2[0])

class PoissonNoise:
    '''
    This class samples Poisson counts from noise-free rates, the largest
    fringe rate of a scan point is mapped to meanCounts

    :arg meanCounts: expected counts at the fringe maximum

    :arg seed: seed, combined with the scan point index
    '''
    def __init__(self, meanCounts=1000.0, seed=0):
        if meanCounts <= 0:
            raise ConfigurationError("mean counts must be positive", key="noise.mean_counts")
        self.meanCounts = float(meanCounts)
        self.seed = int(seed)

    def apply(self, index, fringe, cs1, cs2):
        '''
        Noisy copies of a fringe and the slit coincidences of scan point index
        '''
        rng = np.random.default_rng([self.seed, index])
        scale = self.meanCounts/max(np.max(fringe.rates), np.finfo(float).tiny)
        rates = rng.poisson(fringe.rates*scale).astype(float)
        envelope = None if fringe.envelope is None else fringe.envelope*scale
        slitScale = self.meanCounts/max(cs1, cs2, np.finfo(float).tiny)
        return (FringePattern(fringe.coordinates, rates, fringe.window, envelope),
                float(rng.poisson(cs1*slitScale)), float(rng.poisson(cs2*slitScale)))

class ScanResult:
    '''
    This class holds a visibility/distinguishability scan, one record per
    idler position. Failed points carry nan values and an error tag.

    :arg positions: idler positions in µm
    '''
    COLUMNS = ("y_i", "V", "D_signed", "D_abs", "V2_plus_D2", "C_S1", "C_S2")

    def __init__(self, positions):
        n = len(positions)
        self.positions = np.asarray(positions, dtype=float)
        self.V = np.full(n, np.nan)
        self.D = np.full(n, np.nan)
        self.cs1 = np.full(n, np.nan)
        self.cs2 = np.full(n, np.nan)
        self.errors = [""]*n
        self.fringes = [None]*n

    @property
    def Dabs(self):
        return np.abs(self.D)

    @property
    def complementarity(self):
        '''
        V^2 + D^2 per position
        '''
        return self.V**2 + self.D**2

    def rows(self):
        '''
        Records in CSV column order
        '''
        return [tuple(float(c[i]) for c in (self.positions, self.V, self.D, self.Dabs,
                                            self.complementarity, self.cs1, self.cs2))
                for i in range(len(self.positions))]

    def maxComplementarity(self):
        '''
        Largest finite V^2 + D^2
        '''
        values = self.complementarity
        finite = values[np.isfinite(values)]
        return float(finite.max()) if finite.size else float("nan")

    def equalityBand(self, threshold=0.95):
        '''
        Longest contiguous range of positions with V^2 + D^2 >= threshold,
        as (y_start, y_end), or None
        '''
        above = np.nan_to_num(self.complementarity, nan=-1.0) >= threshold
        best, start = None, None
        for i, flag in enumerate(np.append(above, False)):
            if flag and start is None:
                start = i
            if not flag and start is not None:
                if best is None or i-start > best[1]-best[0]:
                    best = (start, i)
                start = None
        if best is None:
            return None
        return float(self.positions[best[0]]), float(self.positions[best[1]-1])

    def summary(self):
        '''
        Dictionary of scan level figures
        '''
        return {"points": len(self.positions),
                "max_V2_plus_D2": self.maxComplementarity(),
                "equality_band_um": self.equalityBand(),
                "gaps": [{"y_i": float(y), "error": e}
                         for y, e in zip(self.positions, self.errors) if e]}

def _record(result, i, fringe, cs1, cs2, noise):
    if noise is not None:
        fringe, cs1, cs2 = noise.apply(i, fringe, cs1, cs2)
    result.fringes[i] = fringe
    result.cs1[i], result.cs2[i] = cs1, cs2
    errors = []
    try:
        result.V[i] = visibility(fringe)
    except NumericalError as err:
        errors.append(type(err).__name__)
    try:
        result.D[i] = distinguishability(cs1, cs2)
    except NumericalError as err:
        errors.append(type(err).__name__)
    result.errors[i] = ",".join(errors)

def vdScan(positions, model, detector, noise=None, comm=None):
    '''
    Visibility and distinguishability against the idler position. Points
    are split over the ranks by the ownership range of a PETSc Vec, every
    rank receives the full ScanResult. Failing points are recorded as gaps
    and the scan continues.

    :arg positions: idler positions in µm

    :arg model: CoincidenceModel

    :arg detector: DetectorSpec

    :arg noise: PoissonNoise or None
    '''
    comm = comm if comm is not None else MPI.COMM_WORLD
    slit = model.chain.slit
    detector.check(model.grid, slit.magnification)
    result = ScanResult(positions)
    valid = []
    for i, y in enumerate(result.positions):
        try:
            for sample in detector.idlerSamples(y, model.grid.dx*slit.magnification):
                model.grid.checkPosition(sample/slit.magnification)
            valid.append(i)
        except DomainError as err:
            result.errors[i] = type(err).__name__
    start, end = VectorMapping(len(valid)).ownedRange() if valid else (0, 0)
    if model.collective:
        fringes, cs1, cs2 = _accumulate(model, result.positions[valid], detector,
                                        range(start, end))
        local = [(valid[j], fringes[j], cs1[j], cs2[j]) for j in range(start, end)]
    else:
        mine = [valid[j] for j in range(start, end)]
        fringes, cs1, cs2 = _accumulate(model, result.positions[mine], detector)
        local = list(zip(mine, fringes, cs1, cs2))
    records = [r for part in comm.allgather(local) for r in part]
    for i, fringe, c1, c2 in sorted(records, key=lambda r: r[0]):
        _record(result, i, fringe, c1, c2, noise)
    return result

def tomographicCut(band, amplitude):
    '''
    Signal counts along q_sy for idlers in the band lo <= q_iy <= hi,
    sum over the band of |Phi|^2 dq

    :arg band: (lo, hi) in rad/µm

    :arg amplitude: BiphotonAmplitude1D

    :return: (q_sy, counts)
    '''
    grid = amplitude.grid
    q = grid.momentum()
    lo, hi = band
    columns = np.nonzero((q >= lo) & (q <= hi))[0]
    if columns.size == 0:
        raise DetectionError("empty band [{}, {}] rad/µm".format(lo, hi))
    counts = amplitude.matrix.rowReduce(
        lambda block: np.sum(np.abs(block[:, columns])**2, axis=1)*grid.dq)
    return q, np.real(counts)

def countPeaks(values, prominence=0.1):
    '''
    Number of local maxima with prominence of at least the given fraction of
    the largest value, maxima at the ends count too

    :arg values: non-negative profile
    '''
    values = np.asarray(values, dtype=float)
    if values.size == 0 or np.max(values) <= 0:
        return 0
    padded = np.concatenate(([0.0], values, [0.0]))
    peaks, _ = find_peaks(padded, prominence=prominence*np.max(values))
    return len(peaks)

def peakPositions(coordinates, values, prominence=0.1):
    '''
    Coordinates of the maxima counted by countPeaks
    '''
    values = np.asarray(values, dtype=float)
    padded = np.concatenate(([0.0], values, [0.0]))
    peaks, _ = find_peaks(padded, prominence=prominence*np.max(values))
    return np.asarray(coordinates)[peaks-1]
