'''
This module contains the transverse Hermite-Gauss modes of the pump,
in position space at the beam waist and in momentum space.
Both are normalized to unit integral of the squared modulus and are related
by the unitary transform F(q) = 1/(2 pi) int f(r) exp(-i q.r) d^2r.
'''
import math

import numpy as np
from scipy.special import eval_hermite

from spdcPETSc.errors import ConfigurationError

class PumpMode:
    '''
    This class describes a Hermite-Gauss mode HG_mn, m nodes along x and
    n nodes along y, so TEM01 has its two humps along y.

    :arg orderX: number of nodes along x

    :arg orderY: number of nodes along y

    :arg waist: Gaussian waist radius w0 in µm (1/e^2 intensity radius of TEM00)

    :arg offset: centre (x0, y0) in µm

    :arg family: only 'hermite-gauss' is available
    '''
    def __init__(self, orderX=0, orderY=1, waist=75.0, offset=(0.0, 0.0),
                 family="hermite-gauss"):
        if family != "hermite-gauss":
            raise ConfigurationError("unsupported mode family '{}'".format(family),
                                     key="pump.family")
        if int(orderX) != orderX or int(orderY) != orderY or orderX < 0 or orderY < 0:
            raise ConfigurationError("mode orders must be non-negative integers")
        if waist <= 0:
            raise ConfigurationError("waist must be positive", key="pump.waist_um")
        self.family = family
        self.orderX = int(orderX)
        self.orderY = int(orderY)
        self.waist = float(waist)
        self.offset = (float(offset[0]), float(offset[1]))

    @property
    def phaseFactor(self):
        '''
        Constant phase (-i)^(m+n) picked up by the transform
        '''
        return (-1j)**(self.orderX+self.orderY)

    def humpOffset(self):
        '''
        Momentum q_y > 0 of the outermost maximum of |u(0, q_y)|^2, 0 for a
        mode without nodes along y. For TEM01 this is sqrt(2)/w0.
        '''
        n = self.orderY
        if n == 0:
            return 0.0
        if n == 1:
            return math.sqrt(2)/self.waist
        t = np.linspace(0, math.sqrt(2*n+1)+3, 20001)
        profile = eval_hermite(n, t)**2*np.exp(-t**2)
        interior = np.nonzero((profile[1:-1] > profile[:-2]) & (profile[1:-1] >= profile[2:]))[0]
        return float(t[interior[-1]+1])*math.sqrt(2)/self.waist

    def metadata(self):
        '''
        Dictionary echoed into output files
        '''
        return {"family": self.family, "order": [self.orderX, self.orderY],
                "waist_um": self.waist, "offset_um": list(self.offset),
                "waist_convention": "1/e^2 intensity radius of the underlying TEM00"}

def hermiteGauss(order, waist, x):
    '''
    One-dimensional normalized Hermite-Gauss function at the waist

    :arg order: number of nodes

    :arg waist: waist radius in µm

    :arg x: position(s) in µm
    '''
    x = np.asarray(x, dtype=float)
    norm = (2/np.pi)**0.25/math.sqrt(2**order*math.factorial(order)*waist)
    return norm*eval_hermite(order, math.sqrt(2)*x/waist)*np.exp(-x**2/waist**2)

def hermiteGaussMomentum(order, waist, q):
    '''
    One-dimensional transform of hermiteGauss without the constant phase (-i)^order

    :arg order: number of nodes

    :arg waist: waist radius in µm

    :arg q: wave number(s) in rad/µm
    '''
    q = np.asarray(q, dtype=float)
    norm = (waist**2/(2*np.pi))**0.25/math.sqrt(2**order*math.factorial(order))
    return norm*eval_hermite(order, q*waist/math.sqrt(2))*np.exp(-q**2*waist**2/4)

def modePosition(mode, x, y):
    '''
    Mode amplitude u(x, y) at the beam waist

    :arg mode: PumpMode

    :arg x: x position(s) in µm

    :arg y: y position(s) in µm
    '''
    x0, y0 = mode.offset
    u = hermiteGauss(mode.orderX, mode.waist, np.asarray(x)-x0) \
        * hermiteGauss(mode.orderY, mode.waist, np.asarray(y)-y0)
    return u.astype(complex)

def modeMomentum(mode, q):
    '''
    Mode amplitude in momentum space, the analytic transform of modePosition

    :arg mode: PumpMode

    :arg q: WaveVector
    '''
    x0, y0 = mode.offset
    u = hermiteGaussMomentum(mode.orderX, mode.waist, q.qx) \
        * hermiteGaussMomentum(mode.orderY, mode.waist, q.qy)
    u = mode.phaseFactor*u
    if x0 != 0 or y0 != 0:
        u = u*np.exp(-1j*(q.qx*x0+q.qy*y0))
    return u

def modeFactors(mode, qx, qy):
    '''
    Separable factors (u_x(q_x), u_y(q_y)) of modeMomentum on two 1-D axes,
    the constant phase and the offset phases are folded in, so that
    modeMomentum(q) = u_x(q_x) u_y(q_y)

    :arg mode: PumpMode

    :arg qx: 1-D array of q_x in rad/µm

    :arg qy: 1-D array of q_y in rad/µm
    '''
    x0, y0 = mode.offset
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    ux = hermiteGaussMomentum(mode.orderX, mode.waist, qx)*np.exp(-1j*qx*x0)
    uy = mode.phaseFactor*hermiteGaussMomentum(mode.orderY, mode.waist, qy)*np.exp(-1j*qy*y0)
    return ux, uy
