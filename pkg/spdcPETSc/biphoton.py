'''
This module contains the two-photon amplitude
Phi(q_s, q_i) = u(q_s + q_i) sinc(Delta k_z(q_s, q_i) L/2)
and its reductions to singles rates and conditional amplitudes.

All partner sums run over the momentum grid with the weights of
GridSpec.weights, i.e. without the unpaired sample at -Q_max.
'''
import numpy as np

from spdcPETSc.errors import NumericalError, DomainError
from spdcPETSc.dispersion import WaveVector, kz, phaseMatchAmplitude, phaseMatchProfile
from spdcPETSc.modes import modeMomentum, modeFactors
from spdcPETSc.grid import ComplexField2D, MOMENTUM, PlaneTag
from spdcPETSc.vec import VectorMapping
from spdcPETSc.mat import Matrix

SIGNAL = "signal"
IDLER = "idler"
ARMS = (SIGNAL, IDLER)

def phi(qs, qi, pump, crystal):
    '''
    Unnormalized two-photon amplitude

    :arg qs: signal WaveVector

    :arg qi: idler WaveVector

    :arg pump: PumpMode

    :arg crystal: CrystalSpec
    '''
    return modeMomentum(pump, qs+qi)*phaseMatchAmplitude(qs, qi, crystal)

class PartnerTables:
    '''
    This class tabulates k_z of signal and idler on the grid and k_z and
    the mode factors of the pump on the lattice of pair sums
    s_m = (m - N) dq, m = 0, ..., 2N-2, so that grid indices j, k of the two
    photons meet the pump at lattice index j + k. Tables are indexed [y, x].

    :arg grid: GridSpec

    :arg pump: PumpMode

    :arg crystal: CrystalSpec

    :arg twoDimensional: if False only q_x = 0 is tabulated
    '''
    def __init__(self, grid, pump, crystal, twoDimensional=True):
        N = grid.samples
        self.grid = grid
        self.crystal = crystal
        self.twoDimensional = twoDimensional
        self.momentum = grid.momentum()
        self.lattice = (np.arange(2*N-1)-N)*grid.dq
        qx = self.momentum if twoDimensional else np.zeros(1)
        sx = self.lattice if twoDimensional else np.zeros(1)
        self.momentumX = qx
        self.signal = kz(WaveVector(qx[None, :], self.momentum[:, None]),
                         crystal.wavelength(SIGNAL), crystal.polarization(SIGNAL), crystal)
        self.idler = kz(WaveVector(qx[None, :], self.momentum[:, None]),
                        crystal.wavelength(IDLER), crystal.polarization(IDLER), crystal)
        self.pump = kz(WaveVector(sx[None, :], self.lattice[:, None]),
                       crystal.wavelength("pump"), crystal.polarization("pump"), crystal)
        self.pumpX, self.pumpY = modeFactors(pump, sx, self.lattice)
        self.weights = grid.weights()

    def profile(self, mismatch, differenceSquared):
        '''
        Phase-matching factor for a mismatch table
        '''
        return phaseMatchProfile(self.crystal, mismatch, differenceSquared)

    def pumpSupport(self, relative=1e-8):
        '''
        Lattice indices m_x where |u_x| is at least relative times its peak
        '''
        magnitude = np.abs(self.pumpX)
        return np.nonzero(magnitude >= relative*magnitude.max())[0]

class BiphotonAmplitude1D:
    '''
    This class holds Phi on the (q_sy, q_iy) plane at q_sx = q_ix = 0 as a
    row distributed PETSc matrix, rows are signal samples and columns are
    idler samples. The amplitude is normalized so that
    sum |Phi|^2 dq^2 = 1.

    :arg grid: GridSpec

    :arg pump: PumpMode

    :arg crystal: CrystalSpec

    :arg comm: communicator of the matrix
    '''
    def __init__(self, grid, pump, crystal, comm=None):
        self.grid = grid
        self.pump = pump
        self.crystal = crystal
        self.tables = PartnerTables(grid, pump, crystal, twoDimensional=False)
        self._mismatch = None
        self.matrix = Matrix(self._rows, (grid.samples, grid.samples), comm=comm)
        mpiComm = self.matrix.mat.getComm().tompi4py()
        norm = mpiComm.allreduce(float(np.sum(np.abs(self.matrix.local)**2)))*grid.dq**2
        if not np.isfinite(norm) or norm <= 0:
            raise NumericalError("two-photon amplitude has zero or non-finite norm")
        self.normalization = 1/np.sqrt(norm)
        self.matrix.scale(self.normalization)

    def _rows(self, rstart, rend):
        t = self.tables
        rows = np.arange(rstart, rend)
        cols = np.arange(self.grid.samples)
        lattice = rows[:, None]+cols[None, :]
        q = t.momentum
        self._mismatch = t.pump[lattice, 0] - t.signal[rows, 0][:, None] - t.idler[None, :, 0]
        differenceSquared = (q[rows][:, None]-q[None, :])**2
        values = t.pumpY[lattice]*t.pumpX[0]*t.profile(self._mismatch, differenceSquared)
        return values*t.weights[rows][:, None]*t.weights[None, :]

    def localMismatch(self):
        '''
        Delta k_z on the locally owned rows
        '''
        return self._mismatch

    def toArray(self):
        '''
        The normalized amplitude as an (N, N) numpy array on every rank
        '''
        return self.matrix.toArray()

    def norm(self):
        '''
        sum |Phi|^2 dq^2
        '''
        return float(np.sum(self.matrix.rowReduce(lambda block: np.sum(np.abs(block)**2,
                                                                          axis=1))))*self.grid.dq**2

    def bandFraction(self, halfWidth=2*np.pi):
        '''
        Fraction of the weight on samples with |Delta k_z| L/2 <= halfWidth
        '''
        band = np.abs(self._mismatch)*self.crystal.length/2 <= halfWidth
        inBand = self.matrix.rowMapping.gather(
            np.sum(np.abs(self.matrix.local)**2*band, axis=1))
        return float(np.sum(inBand))*self.grid.dq**2/self.norm()

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"model": "1d", "normalization": self.normalization,
                "determinism": "agreement to 1e-12 across worker counts"}

def build1DAmplitude(grid, pump, crystal, checkCoverage=True, comm=None):
    '''
    Sample and normalize Phi on the (q_sy, q_iy) plane

    :arg grid: GridSpec, checked to cover the emission ring

    :arg pump: PumpMode

    :arg crystal: CrystalSpec
    '''
    if checkCoverage:
        grid.checkCoverage(crystal)
    return BiphotonAmplitude1D(grid, pump, crystal, comm=comm)

def _maskVector(mask, samples):
    if mask is None:
        return np.ones(samples)
    return np.asarray(mask, dtype=float)

def singles1D(amplitude, arm, signalMask=None, idlerMask=None):
    '''
    Singles rate of one arm along q_y in the 1-D model,
    the marginal of |Phi|^2 M_s^2 M_i^2 over the partner photon

    :arg amplitude: BiphotonAmplitude1D

    :arg arm: 'signal' or 'idler'

    :arg signalMask: mask on the signal q_y samples

    :arg idlerMask: mask on the idler q_y samples
    '''
    N = amplitude.grid.samples
    dq = amplitude.grid.dq
    ms = _maskVector(signalMask, N)**2
    mi = _maskVector(idlerMask, N)**2
    matrix = amplitude.matrix
    if arm == SIGNAL:
        rows = slice(matrix.rstart, matrix.rend)
        return matrix.rowReduce(lambda block: np.sum(np.abs(block)**2*mi[None, :], axis=1)
                                * ms[rows]*dq)
    if arm == IDLER:
        ownRows = ms[matrix.rstart:matrix.rend]
        return np.real(matrix.columnSum(lambda block: np.abs(block)**2*ownRows[:, None]))*mi*dq
    raise ValueError("arm must be 'signal' or 'idler', not '{}'".format(arm))

def transmittedFraction(amplitude, signalMask=None, idlerMask=None):
    '''
    Fraction of the biphoton weight passing both masks in the 1-D model
    '''
    dq = amplitude.grid.dq
    return float(np.sum(singles1D(amplitude, SIGNAL, signalMask, idlerMask)))*dq

def _pixel(tables, arm, jy, jx, ownMask, partnerWeight):
    own = 1.0 if ownMask is None else float(np.abs(ownMask[jy, jx])**2)
    if own == 0:
        return 0.0
    N = tables.grid.samples
    q = tables.momentum
    window = (slice(jy, jy+N), slice(jx, jx+N))
    pump2 = (np.abs(tables.pumpY[jy:jy+N])**2)[:, None]*(np.abs(tables.pumpX[jx:jx+N])**2)[None, :]
    if arm == SIGNAL:
        mismatch = tables.pump[window] - tables.signal[jy, jx] - tables.idler
    else:
        mismatch = tables.pump[window] - tables.signal - tables.idler[jy, jx]
    differenceSquared = (q[jy]-q[:, None])**2 + (q[jx]-q[None, :])**2
    integrand = pump2*tables.profile(mismatch, differenceSquared)**2*partnerWeight
    return own*float(np.sum(integrand))*tables.grid.dq**2

def _armMasks(arm, signalMask, idlerMask):
    if arm not in ARMS:
        raise ValueError("arm must be 'signal' or 'idler', not '{}'".format(arm))
    return (signalMask, idlerMask) if arm == SIGNAL else (idlerMask, signalMask)

def _partnerWeight(tables, partnerMask):
    w = tables.weights[:, None]*tables.weights[None, :]
    if partnerMask is not None:
        w = w*np.abs(partnerMask)**2
    return w

def singlesMap2D(arm, grid, pump, crystal, signalMask=None, idlerMask=None, tables=None,
                 root=False):
    '''
    Far-field singles map R(q) of one arm over (q_x, q_y), indexed [y, x],
    R(q_a) = sum over the partner grid of |Phi|^2 |M_s|^2 |M_i|^2 dq^2.
    Output pixels are distributed over the ranks through a PETSc Vec, the
    partner sum of every pixel runs in a fixed order, so the map is
    bit-identical for any number of ranks.

    :arg arm: 'signal' or 'idler'

    :arg grid: GridSpec

    :arg pump: PumpMode

    :arg crystal: CrystalSpec

    :arg signalMask: (N, N) mask on the signal momentum grid, or None

    :arg idlerMask: (N, N) mask on the idler momentum grid, or None

    :arg tables: PartnerTables to reuse

    :arg root: if True the map is only returned on rank 0
    '''
    ownMask, partnerMask = _armMasks(arm, signalMask, idlerMask)
    if tables is None:
        tables = PartnerTables(grid, pump, crystal)
    N = grid.samples
    partnerWeight = _partnerWeight(tables, partnerMask)
    mapping = VectorMapping(N*N)
    start, end = mapping.ownedRange()
    local = np.array([_pixel(tables, arm, p//N, p % N, ownMask, partnerWeight)
                      for p in range(start, end)], dtype=float)
    values = mapping.gather(local, root)
    return None if values is None else np.real(values).reshape(N, N)

def singlesCut(arm, qx, grid, pump, crystal, signalMask=None, idlerMask=None, tables=None):
    '''
    Singles rate along q_y in the column of the map nearest to qx,
    the pixels of the column are distributed over the ranks

    :arg qx: q_x of the column in rad/µm
    '''
    ownMask, partnerMask = _armMasks(arm, signalMask, idlerMask)
    if tables is None:
        tables = PartnerTables(grid, pump, crystal)
    N = grid.samples
    jx = int(round(qx/grid.dq)) + N//2
    if not 0 <= jx < N:
        raise DomainError("q_x = {} rad/µm outside the grid".format(qx))
    partnerWeight = _partnerWeight(tables, partnerMask)
    mapping = VectorMapping(N)
    start, end = mapping.ownedRange()
    local = np.array([_pixel(tables, arm, jy, jx, ownMask, partnerWeight)
                      for jy in range(start, end)], dtype=float)
    return np.real(mapping.gather(local))

def phaseVectors(grid, positions):
    '''
    Projection of the idler onto near-field points, exp(i q_k y_p) dq as an
    (N, P) array

    :arg positions: idler positions y_p in µm
    '''
    positions = np.atleast_1d(np.asarray(positions, dtype=float))
    for y in positions:
        grid.checkPosition(y)
    return np.exp(1j*grid.momentum()[:, None]*positions[None, :])*grid.dq

def conditionalSignalAmplitudes(positions, amplitude, idlerMask=None):
    '''
    Conditional signal amplitudes A(q_sy | y_p) = sum_k Phi[:, k] M_i[k]
    exp(i q_k y_p) dq of the 1-D model for several idler positions, as an
    (N, P) array. Collective over the ranks of the amplitude.

    :arg positions: idler positions in µm

    :arg amplitude: BiphotonAmplitude1D

    :arg idlerMask: mask on the idler q_y samples
    '''
    grid = amplitude.grid
    projections = phaseVectors(grid, positions)*_maskVector(idlerMask, grid.samples)[:, None]
    columns = [amplitude.matrix.mult(projections[:, p]) for p in range(projections.shape[1])]
    return np.array(columns).T.reshape(grid.samples, -1)

def conditionalSignalAmplitude(yi, amplitude, idlerMask=None):
    '''
    Conditional signal amplitude for an idler detected at the near-field
    point y_i, a momentum field on the crystal exit plane

    :arg yi: idler position in µm

    :arg amplitude: BiphotonAmplitude1D

    :arg idlerMask: mask on the idler q_y samples
    '''
    values = conditionalSignalAmplitudes([yi], amplitude, idlerMask)[:, 0]
    return ComplexField2D(values, MOMENTUM, amplitude.grid, PlaneTag.CRYSTAL)

def conditionalSignalSlices(positions, tables, idlerMask=None, signalMask=None, support=1e-8):
    '''
    Conditional signal amplitudes of the 2-D model, one (N, P) array per
    pair of q_sx and q_ix samples inside the pump support. The coincidence
    rate is the incoherent sum over the slices.

    :arg positions: idler positions in µm

    :arg tables: two-dimensional PartnerTables

    :arg idlerMask: (N, N) idler mask or None

    :arg signalMask: (N, N) signal mask or None, applied to the result

    :return: generator of (sx, ix, array)
    '''
    if not tables.twoDimensional:
        raise DomainError("conditional slices need two-dimensional tables")
    grid = tables.grid
    N = grid.samples
    q = tables.momentum
    projections = phaseVectors(grid, positions)
    allowed = set(tables.pumpSupport(support).tolist())
    rows = np.arange(N)
    lattice = rows[:, None]+rows[None, :]
    for sx in range(N):
        for ix in range(N):
            if sx+ix not in allowed or tables.weights[sx]*tables.weights[ix] == 0:
                continue
            mi = 1.0 if idlerMask is None else idlerMask[:, ix]
            ms = 1.0 if signalMask is None else signalMask[:, sx]
            if np.all(ms == 0) or np.all(mi == 0):
                continue
            mismatch = tables.pump[lattice, sx+ix] - tables.signal[:, sx][:, None] \
                - tables.idler[None, :, ix]
            differenceSquared = (q[:, None]-q[None, :])**2 + (q[sx]-q[ix])**2
            block = tables.pumpY[lattice]*tables.pumpX[sx+ix] \
                * tables.profile(mismatch, differenceSquared)
            block = block*tables.weights[:, None]*tables.weights[None, :]
            yield sx, ix, (block @ (projections*np.reshape(mi, (-1, 1))))*np.reshape(ms, (-1, 1))
