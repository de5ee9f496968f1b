'''
This module contains the scenario configuration: a flat file of
"section.key = value" lines checked against a typed schema, resolved to
defaults and pushed into the PETSc options database.
'''
import math

import numpy as np

from petsc4py import PETSc

from spdcPETSc.errors import ConfigurationError
from spdcPETSc.dispersion import (CrystalSpec, SellmeierSet, BBO_ORDINARY, BBO_EXTRAORDINARY,
                                  BBO_RANGE, BBO_SOURCE, PHASE_MATCHING, FIDELITY)
from spdcPETSc.modes import PumpMode
from spdcPETSc.grid import GridSpec
from spdcPETSc.chain import ApertureSpec, DoubleSlitSpec, OpticalChain, SHAPES, UNITS
from spdcPETSc.detection import DetectorSpec, PoissonNoise, MODELS

OPTIONS_PREFIX = "spdc_"

def _floatList(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))

def _boolean(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean: '{}'".format(text))

def _choice(*choices):
    def convert(text):
        value = text.strip()
        if value not in choices:
            raise ValueError("'{}' is not one of {}".format(value, ", ".join(choices)))
        return value
    return convert

def _positive(convert):
    def check(text):
        value = convert(text)
        if not value > 0:
            raise ValueError("must be positive")
        return value
    return check

def _nonNegative(convert):
    def check(text):
        value = convert(text)
        if value < 0:
            raise ValueError("must not be negative")
        return value
    return check

def _aperture(arm):
    prefix = "chain.{}_aperture.".format(arm)
    return [
        (prefix+"shape", _choice(*SHAPES), "none", "aperture shape"),
        (prefix+"units", _choice(*UNITS), "relative",
         "relative: fractions of the cone diameter, absolute: mm in the aperture plane"),
        (prefix+"size", _positive(float), 0.3, "slit width or circle diameter"),
        (prefix+"center_x", float, 0.0, "horizontal center"),
        (prefix+"center_y", float, 0.0, "vertical center"),
    ]

#(key, converter, default, help)
SCHEMA = [
    ("crystal.length_um", _positive(float), 2000.0, "crystal length L"),
    ("crystal.axis_angle_deg", float, 41.9, "optical axis tilt from z"),
    ("crystal.pump_wavelength_um", _positive(float), 0.405, "pump wavelength"),
    ("crystal.signal_wavelength_um", _positive(float), 0.81, "signal wavelength"),
    ("crystal.idler_wavelength_um", _positive(float), 0.81, "idler wavelength"),
    ("crystal.sellmeier_o", _floatList, BBO_ORDINARY, "ordinary A, B, C, D"),
    ("crystal.sellmeier_e", _floatList, BBO_EXTRAORDINARY, "extraordinary A, B, C, D"),
    ("crystal.sellmeier_range_um", _floatList, BBO_RANGE, "Sellmeier validity range"),
    ("crystal.signal_polarization", _choice("o", "e"), "o", "signal polarization"),
    ("crystal.phase_matching", _choice(*PHASE_MATCHING), "sinc",
     "sinc, or the surrogates none and gaussian"),
    ("pump.family", _choice("hermite-gauss"), "hermite-gauss", "mode family"),
    ("pump.order_x", _nonNegative(int), 0, "nodes along x"),
    ("pump.order_y", _nonNegative(int), 1, "nodes along y"),
    ("pump.waist_um", _positive(float), 75.0,
     "waist radius w0, a 150 um spot size is read as the 1/e^2 diameter"),
    ("pump.offset_x_um", float, 0.0, "mode center x"),
    ("pump.offset_y_um", float, 0.0, "mode center y"),
    ("grid.samples", _positive(int), 512, "samples per axis, a power of two >= 32"),
    ("grid.q_max", _positive(float), 1.2, "momentum half extent in rad/um"),
    ("grid.ring_margin", _nonNegative(float), 0.15, "required margin beyond the ring"),
    ] + _aperture("signal") + _aperture("idler") + [
    ("chain.slit.width_um", _positive(float), 65.0, "slit width a"),
    ("chain.slit.separation_um", _positive(float), 235.0, "slit separation d"),
    ("chain.slit.offset_um", float, 0.0, "lateral slit offset"),
    ("chain.magnification", _nonNegative(float), 0.0,
     "crystal to slit plane imaging magnification, 0 images the TEM01 humps on the slit centres"),
    ("chain.plane_scale_mm", _nonNegative(float), 0.0,
     "aperture plane mm per rad/um, 0 derives it from the cone diameter"),
    ("chain.cone_diameter_mm", _positive(float), 10.0, "cone diameter in the aperture plane"),
    ("chain.cone_samples", _positive(int), 128, "samples of the calibration map"),
    ("detector.signal_pixel", _nonNegative(float), 0.0,
     "signal pixel half-width in rad/um, 0 is a point detector"),
    ("detector.idler_pixel_um", _nonNegative(float), 0.0,
     "idler pixel half-width in um, 0 is a point detector"),
    ("detector.oversample", _positive(int), 8, "far-field zero padding factor"),
    ("scan.y_min_um", float, -200.0, "first idler position"),
    ("scan.y_max_um", float, 200.0, "last idler position"),
    ("scan.points", _positive(int), 41, "number of idler positions"),
    ("scan.model", _choice(*MODELS), "1d", "coincidence model"),
    ("scan.slit_widths", _floatList, (), "relative slit-aperture widths of a family scan"),
    ("cuts.band_halfwidth", _nonNegative(float), 0.0,
     "tomographic band half-width in rad/um, 0 means 2 sqrt(2)/w0"),
    ("ring.samples", _positive(int), 128, "samples per axis of the 2-D singles maps"),
    ("noise.mode", _choice("none", "poisson"), "none", "noise layer"),
    ("noise.mean_counts", _positive(float), 1000.0, "counts at the fringe maximum"),
    ("noise.seed", _nonNegative(int), 0, "noise seed"),
    ("run.fidelity", _choice(*FIDELITY), "exact", "exact or fast paraxial k_z"),
    ("run.workers", _positive(int), 1, "intended number of MPI ranks"),
    ("run.output_dir", str, "out", "output directory"),
    ("run.monitor", _boolean, False, "print progress"),
]

KEYS = [entry[0] for entry in SCHEMA]
CONVERTERS = {entry[0]: entry[1] for entry in SCHEMA}
DEFAULTS = {entry[0]: entry[2] for entry in SCHEMA}
HELP = {entry[0]: entry[3] for entry in SCHEMA}

def formatValue(value):
    '''
    Text form of a value, floats use repr so that they parse back exactly
    '''
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(formatValue(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)

def optionName(key, prefix=OPTIONS_PREFIX):
    '''
    PETSc option name of a configuration key
    '''
    return prefix+key.replace(".", "_").replace("-", "_")

class ScenarioConfig:
    '''
    This class holds a scenario configuration, the explicitly set values
    and the line each of them came from.

    :arg values: dictionary key -> converted value

    :arg source: file name used in error messages
    '''
    def __init__(self, values=None, source="<config>"):
        self.values = {}
        self.lines = {}
        self.source = source
        self.inserted = []
        for key, value in (values or {}).items():
            self.set(key, value)

    @classmethod
    def parse(cls, text, source="<config>"):
        '''
        Parse "key = value" lines, '#' starts a comment
        '''
        config = cls(source=source)
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError("expected 'key = value'", line=number, source=source)
            key, value = (part.strip() for part in line.split("=", 1))
            if key in config.values:
                raise ConfigurationError("duplicate key, first set on line {}".format(
                    config.lines[key]), line=number, key=key, source=source)
            config.set(key, value, line=number)
        return config

    @classmethod
    def fromFile(cls, path):
        '''
        Parse a configuration file
        '''
        try:
            with open(path, encoding="utf-8") as f:
                text = f.read()
        except OSError as err:
            raise ConfigurationError("cannot read configuration: {}".format(err),
                                     source=str(path)) from err
        return cls.parse(text, source=str(path))

    def set(self, key, value, line=None):
        '''
        Set a key from text or from an already typed value
        '''
        if key not in CONVERTERS:
            raise ConfigurationError("unknown key", line=line, key=key, source=self.source)
        text = value if isinstance(value, str) else formatValue(value)
        try:
            self.values[key] = CONVERTERS[key](text)
        except ValueError as err:
            raise ConfigurationError("invalid value '{}': {}".format(text, err), line=line,
                                     key=key, source=self.source) from err
        self.lines[key] = line

    def resolve(self):
        '''
        Dictionary of every key in schema order, defaults filled in
        '''
        return {key: self.values.get(key, DEFAULTS[key]) for key in KEYS}

    def serialize(self):
        '''
        Text of the resolved configuration, parse(serialize()) resolves to the same values
        '''
        resolved = self.resolve()
        return "".join("{} = {}\n".format(key, formatValue(resolved[key])) for key in KEYS)

    def toOptions(self, prefix=OPTIONS_PREFIX):
        '''
        Push the resolved configuration into the PETSc options database.
        Options already present, e.g. from the command line, take precedence
        and are read back into the configuration.
        '''
        options = PETSc.Options()
        for key, value in self.resolve().items():
            name = optionName(key, prefix)
            if options.hasName(name):
                self.set(key, options.getString(name, ""))
            else:
                options[name] = formatValue(value)
                self.inserted.append(name)
        return self

    def clearOptions(self):
        '''
        Remove the options inserted by toOptions
        '''
        options = PETSc.Options()
        for name in self.inserted:
            options.delValue(name)
        self.inserted = []

    def __getitem__(self, key):
        if key not in DEFAULTS:
            raise KeyError(key)
        return self.values.get(key, DEFAULTS[key])

    def _error(self, err, key):
        return ConfigurationError(str(err.args[0]) if err.args else str(err),
                                  line=self.lines.get(key), key=key, source=self.source)

    def crystal(self):
        '''
        CrystalSpec of the configuration
        '''
        validity = self["crystal.sellmeier_range_um"]
        try:
            if len(validity) != 2:
                raise ConfigurationError("expected two values", key="crystal.sellmeier_range_um")
            sets = []
            for key in ("crystal.sellmeier_o", "crystal.sellmeier_e"):
                if len(self[key]) != 4:
                    raise ConfigurationError("expected four Sellmeier coefficients", key=key)
                sets.append(SellmeierSet(self[key], validity, BBO_SOURCE))
            return CrystalSpec(self["crystal.length_um"],
                               math.radians(self["crystal.axis_angle_deg"]),
                               self["crystal.pump_wavelength_um"],
                               self["crystal.signal_wavelength_um"],
                               self["crystal.idler_wavelength_um"], sets[0], sets[1],
                               self["crystal.signal_polarization"],
                               self["crystal.phase_matching"], self["run.fidelity"])
        except ConfigurationError as err:
            raise ConfigurationError(err.message, line=self.lines.get(err.key), key=err.key,
                                     source=self.source) from err

    def pump(self):
        '''
        PumpMode of the configuration
        '''
        return PumpMode(self["pump.order_x"], self["pump.order_y"], self["pump.waist_um"],
                        (self["pump.offset_x_um"], self["pump.offset_y_um"]),
                        self["pump.family"])

    def grid(self, samples=None):
        '''
        GridSpec of the configuration, optionally with another sample count
        '''
        key = "grid.samples"
        try:
            return GridSpec(self[key] if samples is None else samples, self["grid.q_max"])
        except ConfigurationError as err:
            raise ConfigurationError(err.message, line=self.lines.get(err.key or key),
                                     key=err.key or key, source=self.source) from err

    def aperture(self, arm):
        '''
        ApertureSpec of 'signal' or 'idler'
        '''
        prefix = "chain.{}_aperture.".format(arm)
        return ApertureSpec(self[prefix+"shape"], self[prefix+"units"], self[prefix+"size"],
                            self[prefix+"center_x"], self[prefix+"center_y"])

    def chain(self):
        '''
        Uncalibrated OpticalChain of the configuration
        '''
        try:
            slit = DoubleSlitSpec(self["chain.slit.width_um"], self["chain.slit.separation_um"],
                                  self["chain.slit.offset_um"], self.magnification())
        except ConfigurationError as err:
            raise ConfigurationError(err.message, line=self.lines.get("chain.slit.width_um"),
                                     key="chain.slit.width_um", source=self.source) from err
        scale = self["chain.plane_scale_mm"]
        return OpticalChain(self.aperture("signal"), self.aperture("idler"), slit,
                            scale if scale > 0 else None, self["chain.cone_diameter_mm"])

    def detector(self):
        '''
        DetectorSpec of the configuration
        '''
        return DetectorSpec(self["detector.signal_pixel"], self["detector.idler_pixel_um"],
                            self["detector.oversample"])

    def noise(self):
        '''
        PoissonNoise or None
        '''
        if self["noise.mode"] == "none":
            return None
        return PoissonNoise(self["noise.mean_counts"], self["noise.seed"])

    def scanPositions(self):
        '''
        Idler positions of the scan in µm
        '''
        if self["scan.y_max_um"] < self["scan.y_min_um"]:
            raise ConfigurationError("scan.y_max_um below scan.y_min_um",
                                     line=self.lines.get("scan.y_max_um"), key="scan.y_max_um",
                                     source=self.source)
        return np.linspace(self["scan.y_min_um"], self["scan.y_max_um"], self["scan.points"])

    def magnification(self):
        '''
        Crystal to slit plane magnification, d/(sqrt(2) w0) unless set
        '''
        value = self["chain.magnification"]
        if value > 0:
            return value
        return self["chain.slit.separation_um"]/(math.sqrt(2)*self["pump.waist_um"])

    def bandHalfWidth(self):
        '''
        Tomographic band half-width in rad/µm
        '''
        value = self["cuts.band_halfwidth"]
        return value if value > 0 else 2*math.sqrt(2)/self["pump.waist_um"]

    def copy(self, overrides=None):
        '''
        Copy with the keys of the overrides dictionary replaced
        '''
        config = ScenarioConfig(source=self.source)
        config.values = dict(self.values)
        config.lines = dict(self.lines)
        for key, value in (overrides or {}).items():
            config.set(key, value)
        return config
