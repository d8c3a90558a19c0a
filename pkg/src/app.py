import argparse
import json
import sys

from circle_map import MapFamily, critical_set_for, eval_deriv2, reduce_circle
from conditions import check_mis, check_W, check_X, check_Y
from errors import ConfigError, CriticalHit, DegenerateLadder, IoError, LabError, NumericalFailure, OracleMismatch, \
    ParseError, ValidationError
from exclusion import BISECT, MC, ParameterExcluder, SweepRecord
from lemma_lab import LemmaLab, lemma_ids
from logger import logger
from messenger import Messenger
from orbit import compute_ladder, critical_orbit, truncate_trace
from result_store import ResultStore
from returns import DEEP, SHALLOW, build_ladder, classify_essential, decompose, segment_lengths
from settings import RunConfig, load_config, override_config, settings_template

# Command-line flags that override a setting of the same RunConfig name
override_names = ["drive_name", "L", "L_list", "beta", "alpha", "N", "epsilon", "profile_kind", "mode", "n_max",
                  "samples", "min_width", "seed", "strict", "workers", "output_directory"]


class LabArgumentParser(argparse.ArgumentParser):
    """
    Usage errors exit with status 1
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, "{}: error: {}\n".format(self.prog, message))


def build_parser():
    run, constants = settings_template["run"], settings_template["constants"]

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON settings file (created with the defaults when missing)")
    common.add_argument("--drive", dest="drive_name", choices=["sine", "fourier"], help="drive function [sine]")
    common.add_argument("--L", dest="L", type=float, help="the family's L [{:g}]".format(run["L"]))
    common.add_argument("--beta", type=float, help="ladder exponent in (3/2, 2) [{}]".format(constants["beta"]))
    common.add_argument("--alpha", type=float, help="recurrence exponent [lambda/100]")
    common.add_argument("--N", dest="N", type=int, help="last step of the initial phase [{}]".format(constants["N"]))
    common.add_argument("--epsilon", type=float, help="K0 neighbourhood [{}]".format(constants["epsilon"]))
    common.add_argument("--profile", dest="profile_kind", choices=["empirical", "paper"],
                        help="constants profile [{}]".format(constants["profileKind"]))
    common.add_argument("--n-max", dest="n_max", type=int, help="orbit horizon [{}]".format(run["nMax"]))
    common.add_argument("--seed", type=int, help="random seed [{}]".format(run["seed"]))
    common.add_argument("--workers", type=int, help="worker processes [CPU count or $CIRCLE_LAB_WORKERS]")
    common.add_argument("--output", dest="output_directory",
                        help="output directory [{}]".format(settings_template["output"]["directory"]))

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--mode", choices=[MC, BISECT], help="measure estimator [{}]".format(run["mode"]))
    sampling.add_argument("--samples", type=int, help="Monte Carlo samples [{}]".format(run["samples"]))
    sampling.add_argument("--min-width", dest="min_width", type=float,
                          help="smallest bisection cell [{:g}]".format(run["minWidth"]))
    sampling.add_argument("--strict", action="store_const", const=True, default=None,
                          help="also exclude on X/Y failures after the initial phase")

    orbit_point = argparse.ArgumentParser(add_help=False)
    orbit_point.add_argument("--a", dest="a", type=float, default=0.0, help="parameter in [0, 1) [0]")
    orbit_point.add_argument("--c", dest="critical_index", type=int, default=0, help="critical point index [0]")

    parser = LabArgumentParser(prog="circle-lab", description="Parameter exclusion for the circle maps "
                                                               "theta -> theta + a + L Phi(theta)")
    subparsers = parser.add_subparsers(dest="command")
    subparsers.required = True

    subparsers.add_parser("orbit", parents=[common, orbit_point], help="critical orbit and distortion ladder")
    subparsers.add_parser("critical", parents=[common], help="critical points of f")
    returns = subparsers.add_parser("returns", parents=[common, orbit_point], help="free returns of a critical orbit")
    returns.add_argument("--shallow", action="store_true", help="returns to C_delta0 instead of C_delta")
    check = subparsers.add_parser("check", parents=[common], help="conditions (mis), X, Y, W as JSON lines")
    check.add_argument("--a", dest="a", type=float, default=0.0, help="parameter in [0, 1) [0]")
    check.add_argument("--n", dest="n_max", type=int, help="same as --n-max")
    subparsers.add_parser("exclude", parents=[common, sampling], help="exclusion run at one L")
    sweep = subparsers.add_parser("sweep", parents=[common, sampling], help="exclusion runs over several L")
    sweep.add_argument("--L-list", dest="L_list", type=float, nargs="+",
                       help="increasing L values {}".format(run["LList"]))
    verify = subparsers.add_parser("verify", parents=[common], help="numerical lemma verification")
    verify.add_argument("--lemma", choices=lemma_ids, required=True, help="lemma to check")
    verify.add_argument("--trials", type=int, default=1000, help="number of trials [1000]")
    subparsers.add_parser("report", parents=[common], help="tables and plot data from an earlier records.json")

    return parser


def get_config(args):
    config = load_config(args.config) if args.config else RunConfig()
    return override_config(config, **{name: getattr(args, name, None) for name in override_names})


def get_store(config, config_settings=None):
    return ResultStore(config.output_directory, config_settings or config.to_settings())


def _member(config, phi, a):
    return MapFamily(phi, reduce_circle(a), config.L)


def _critical_index(index, critical_set):
    if not 0 <= index < len(critical_set):
        raise ValidationError("c", "expected an index below {}, got {}".format(len(critical_set), index))
    return index


def _critical_traces(family, n, critical_set):
    """
    Orbits of every critical point, cut at the first critical hit if any

    :return: (traces, step of the first hit or None)
    :rtype: tuple
    """
    traces = []
    for index in range(len(critical_set)):
        try:
            traces.append(critical_orbit(family, index, n, critical_set))
        except CriticalHit as hit:
            traces.append(hit.trace)
    horizon = min(trace.horizon for trace in traces)
    hit_at = horizon if horizon < n else None
    return [truncate_trace(trace, horizon) for trace in traces], hit_at


def _ladder(trace, beta):
    try:
        return compute_ladder(trace, beta)
    except DegenerateLadder as exception:
        return compute_ladder(truncate_trace(trace, exception.index), beta)


def run_orbit(config, args, messenger):
    phi = config.phi()
    critical_set = critical_set_for(phi, config.L)
    index = _critical_index(args.critical_index, critical_set)
    hit_at = None
    try:
        trace = critical_orbit(_member(config, phi, args.a), index, config.n_max, critical_set)
    except CriticalHit as hit:
        hit_at = hit.trace.horizon
        trace = truncate_trace(hit.trace, hit_at)
    ladder = _ladder(trace, config.beta)

    messenger.print_orbit(trace, ladder, hit_at)
    messenger.print_written([get_store(config).write_orbit(trace, ladder)])
    return 0


def run_critical(config, args, messenger):
    phi = config.phi()
    critical_set = critical_set_for(phi, config.L)
    family = MapFamily(phi, 0.0, config.L)
    messenger.print_critical_set(critical_set, [eval_deriv2(family, point) for point in critical_set.points])
    return 0


def run_returns(config, args, messenger):
    phi = config.phi()
    critical_set = critical_set_for(phi, config.L)
    index = _critical_index(args.critical_index, critical_set)
    profile = config.profile_for(phi, config.L)
    traces, _ = _critical_traces(_member(config, phi, args.a), config.n_max, critical_set)
    ladders = [build_ladder(trace, profile.beta) for trace in traces]
    decomposition = classify_essential(decompose(traces[index], ladders, profile, SHALLOW if args.shallow else DEEP))

    messenger.print_returns(decomposition, segment_lengths(decomposition))
    messenger.print_written([get_store(config).write_returns(decomposition)])
    return 0


def run_check(config, args, messenger):
    """
    One JSON line per (condition, critical point); orbits cut short by a critical hit are checked up to the hit
    """
    phi = config.phi()
    critical_set = critical_set_for(phi, config.L)
    profile = config.profile_for(phi, config.L)
    traces, _ = _critical_traces(_member(config, phi, args.a), config.n_max, critical_set)
    ladders = [build_ladder(trace, profile.beta) for trace in traces]

    for trace in traces:
        n = trace.horizon
        decomposition = decompose(trace, ladders, profile, DEEP)
        for report in [check_mis(trace, profile, min(profile.N, n)), check_X(trace, profile, n),
                       check_Y(trace, profile, n), check_W(decomposition, profile, n)]:
            messenger.print_json_line(report.to_dict())
    return 0


def _finish_records(config, records, messenger):
    paths = get_store(config).emit_report(records)
    messenger.print_summary(records)
    messenger.print_written(paths)
    return 0


def run_exclude(config, args, messenger):
    phi = config.phi()
    excluder = ParameterExcluder(phi, config.workers, config.strict)
    profile = config.profile_for(phi, config.L)
    if config.mode == BISECT:
        record = excluder.run_exclusion_bisect(config.L, profile, config.n_max, config.min_width)
    else:
        record = excluder.run_exclusion_mc(config.L, profile, config.n_max, config.samples, config.seed)
    return _finish_records(config, [record], messenger)


def run_sweep(config, args, messenger):
    phi = config.phi()
    excluder = ParameterExcluder(phi, config.workers, config.strict)
    records = excluder.sweep_L(config.L_list, lambda L: config.profile_for(phi, L), config.n_max, config.samples,
                               config.seed, config.mode, config.min_width)
    return _finish_records(config, records, messenger)


def run_verify(config, args, messenger):
    phi = config.phi()
    lab = LemmaLab(phi, config.workers, config.beta, config.N, config.epsilon, config.rule)
    # Without an explicit --profile each lemma uses its own default profile
    profile = config.profile_for(phi, config.L) if args.profile_kind is not None else None
    report = lab.run(args.lemma, args.trials, config.L, config.n_max, config.seed, profile)

    messenger.print_lemma_report(report)
    messenger.print_written(get_store(config).write_lemma_report(report))
    return 0


def run_report(config, args, messenger):
    records_file_string = get_store(config).records_file_string
    try:
        with open(records_file_string) as file:
            content = json.load(file)
    except OSError as exception:
        raise IoError(records_file_string, exception.strerror or str(exception))
    except json.JSONDecodeError as exception:
        raise ParseError(exception.msg, exception.lineno, exception.colno)

    records = [SweepRecord.from_dict(item) for item in content.get("records", [])]
    if not records:
        raise ValidationError("records", "{} holds no records".format(records_file_string))
    store = get_store(config, content.get("config"))
    paths = [store.write_trend(records)] + [store.write_survivor_plot(record) for record in records]
    paths.append(store.write_trend_plot(records))

    messenger.print_summary(records)
    messenger.print_written(paths)
    return 0


commands = {
    "orbit": run_orbit,
    "critical": run_critical,
    "returns": run_returns,
    "check": run_check,
    "exclude": run_exclude,
    "sweep": run_sweep,
    "verify": run_verify,
    "report": run_report
}


def main(argv=None):
    """
    Runs one subcommand

    :return: Exit status: 0 success, 1 usage or settings error, 2 numerical failure, 3 file error
    :rtype: int
    """
    messenger = Messenger()
    args = build_parser().parse_args(argv)

    try:
        config = get_config(args)
        return commands[args.command](config, args, messenger)
    except ParseError as exception:
        messenger.print_error("parse", [exception], True)
        logger.exception(exception)
        return 1
    except ConfigError as exception:
        messenger.print_error("validation", [exception], True)
        logger.exception(exception)
        return 1
    except OracleMismatch as exception:
        messenger.print_error("oracle", [exception], True)
        logger.exception(exception)
        return 2
    except NumericalFailure as exception:
        messenger.print_error("numerical", [exception], True)
        logger.exception(exception)
        return 2
    except IoError as exception:
        messenger.print_error("io", [exception], True)
        logger.exception(exception)
        return 3
    except OSError as exception:
        messenger.print_error("io", [exception.filename or exception], True)
        logger.exception(exception)
        return 3
    except (LabError, ValueError) as exception:
        messenger.print_error("usage", [exception], True)
        logger.exception(exception)
        return 1
    except KeyboardInterrupt:
        messenger.print_error("keyboardInterrupt", will_exit=True)
        return 1
    except Exception as exception:
        messenger.print_error("unknown", will_exit=True)
        logger.exception(exception)
        return 1


if __name__ == "__main__":
    sys.exit(main())
