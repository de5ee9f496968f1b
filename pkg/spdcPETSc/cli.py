'''
This module contains the command-line interface, one subcommand per
scenario runner:

    spdcPETSc vd --config scenario.cfg --out results --grid 512
    mpiexec -n 8 spdcPETSc ring --workers 8 -spdc_monitor

Options starting with a single dash are handed to the PETSc options
database and take precedence over the configuration file.
'''
import argparse
import sys

from mpi4py import MPI
from petsc4py import PETSc

from spdcPETSc.config import ScenarioConfig
from spdcPETSc.errors import ConfigurationError, DomainError, NumericalError
from spdcPETSc.scenarios import Scenario, RUNNERS, PRESETS, applyPreset

EXIT_SUCCESS = 0
EXIT_CONFIGURATION = 2
EXIT_NUMERICAL = 3

def _summaryLine(runner):
    return runner.__doc__.strip().splitlines()[0] if runner.__doc__ else ""

def parser():
    '''
    argparse parser of the command line
    '''
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario configuration file")
    common.add_argument("--preset", choices=sorted(PRESETS), help="aperture chain preset")
    common.add_argument("--out", help="output directory, overrides run.output_dir")
    common.add_argument("--workers", type=int, help="expected number of MPI ranks")
    common.add_argument("--fast", action="store_true", help="paraxial k_z")
    common.add_argument("--grid", type=int, help="samples per axis, overrides grid.samples")
    common.add_argument("--monitor", action="store_true", help="print progress")
    main = argparse.ArgumentParser(prog="spdcPETSc",
                                   description="Two-photon double-slit complementarity "
                                               "simulations")
    commands = main.add_subparsers(dest="command", required=True)
    for name, runner in RUNNERS.items():
        commands.add_parser(name, parents=[common], help=_summaryLine(runner))
    return main

def loadConfig(args, comm=None):
    '''
    ScenarioConfig of the parsed command line: file, preset, flags, then
    the PETSc options database
    '''
    comm = comm if comm is not None else MPI.COMM_WORLD
    config = ScenarioConfig.fromFile(args.config) if args.config else ScenarioConfig()
    if args.preset:
        config = applyPreset(config, args.preset)
    overrides = {}
    if args.out:
        overrides["run.output_dir"] = args.out
    if args.workers is not None:
        overrides["run.workers"] = args.workers
    elif "run.workers" not in config.values:
        overrides["run.workers"] = comm.size
    if args.fast:
        overrides["run.fidelity"] = "fast"
    if args.grid is not None:
        overrides["grid.samples"] = args.grid
    if args.monitor:
        overrides["run.monitor"] = True
    return config.copy(overrides).toOptions()

def main(argv=None):
    '''
    Run a subcommand and return the exit code
    '''
    args, petscOptions = parser().parse_known_args(argv)
    comm = MPI.COMM_WORLD
    config = None
    try:
        if petscOptions:
            unknown = [o for o in petscOptions if o.startswith("--")]
            if unknown:
                raise ConfigurationError("unknown option(s) {}".format(" ".join(unknown)))
            PETSc.Options().insertString(" ".join(petscOptions))
        config = loadConfig(args, comm)
        scenario = Scenario(config, args.command, comm=comm)
        RUNNERS[args.command](scenario)
    except (ConfigurationError, DomainError) as err:
        if comm.rank == 0:
            print("spdcPETSc {}: {}".format(args.command, err), file=sys.stderr)
        return EXIT_CONFIGURATION
    except NumericalError as err:
        if comm.rank == 0:
            print("spdcPETSc {}: {}: {}".format(args.command, type(err).__name__, err),
                  file=sys.stderr)
        return EXIT_NUMERICAL
    finally:
        if config is not None:
            config.clearOptions()
    PETSc.Sys.Print("spdcPETSc {}: outputs in {}".format(args.command, scenario.outputDir))
    return EXIT_SUCCESS

if __name__ == "__main__":
    sys.exit(main())
