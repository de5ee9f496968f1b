'''
spdcPETSc simulates which-slit knowledge and interference of photon pairs
from type-II down-conversion pumped in a Hermite-Gauss mode, on top of PETSc
'''
VERSION = "0.1.0"

from spdcPETSc.errors import *
from spdcPETSc.dispersion import *
from spdcPETSc.modes import *
from spdcPETSc.grid import *
from spdcPETSc.vec import *
from spdcPETSc.mat import *
from spdcPETSc.snes import *
from spdcPETSc.biphoton import *
from spdcPETSc.chain import *
from spdcPETSc.detection import *
from spdcPETSc.config import *
from spdcPETSc.scenarios import *

__all__ = ["ConfigurationError", "DomainError", "NumericalError", "CrystalSpec", "SellmeierSet",
           "PumpMode", "GridSpec", "ComplexField2D", "VectorMapping", "Matrix", "NonLinearSolver",
           "BiphotonAmplitude1D", "OpticalChain", "ApertureSpec", "DoubleSlitSpec",
           "DetectorSpec", "ScanResult", "ScenarioConfig", "Scenario", "RunManifest"]
