import json
import math

from termcolor import cprint

vacuous_str = "n/a(vacuous)"


def format_value(value, spec="{:.6g}"):
    """
    Console rendering of a number; NaN (a vacuous bound) becomes 'n/a(vacuous)' and None becomes '-'
    """
    if value is None:
        return "-"
    if isinstance(value, float) and math.isnan(value):
        return vacuous_str
    return spec.format(value)


class Messenger(object):
    """
    Used for handling console output
    """

    def __init__(self):
        self.header_str = "\n{}\n"

        self.console_str = {
            "summary": {
                "header": "{:>10}  {:>5}  {:>10}  {:>10}  {:>14}  {}",
                "row": "{:>10}  {:>5}  {:>10}  {:>10}  {:>14}  {}",
                "exponent": "Fitted decay exponent of 1 - |A|: {}"
            },
            "lemma": {
                "header": "Lemma {} at L={} ({} trials, seed {})",
                "row": "hypothesis met: {}  passed: {}  pass rate: {}  worst margin: {}",
                "clause": "  {:<16} {:>6} / {:<6}",
                "finite": "  finite-L statement: violations are failures",
                "asymptotic": "  asymptotic statement: the rate is reported, not asserted"
            },
            "orbit": {
                "header": "Critical orbit of c{}={} for a={} and L={}",
                "row": "horizon {}  log|(f^n)'c_0| = {}  min d(c_i, C) = {}  D_n = {}",
                "hit": "The orbit hit the critical set at step {}."
            },
            "critical": {
                "header": "{} critical points of f for L={}",
                "row": "  c{:<3} {!r}  f''(c) = {}"
            },
            "returns": {
                "header": "Free returns of the orbit of c{} ({} mode, horizon {})",
                "row": "  t={:<5} c{:<3} depth {:<12} index {:<4} p={:<5} {:<8} {}",
                "empty": "  no free returns",
                "split": "  {} free steps, {} bound steps"
            },
            "written": "Wrote {}"
        }

        self.error_str = {
            "parse": "Could not parse the settings: {}",
            "validation": "Invalid setting {}",
            "usage": "Invalid usage: {}",
            "numerical": "Numerical failure: {}",
            "oracle": "Two independent computations disagree: {}",
            "io": "File error: {}",
            "keyboardInterrupt": "Interrupted.",
            "unknown": "An unknown exception occurred.",

            "general": "See the latest log file for more information."
        }

    def print_header(self, text):
        cprint(self.header_str.format(text), attrs=["bold", "underline"])

    def summary_lines(self, records):
        """
        Rows of the summary table, one per record

        :param records: SweepRecords
        :type records: list

        :return: (text, is vacuous) per row
        :rtype: list
        """
        lines = []
        for record in records:
            bound = record.paper_bound
            vacuous = bound is None or (isinstance(bound, float) and math.isnan(bound))
            counts = ", ".join("{}:{}".format(key, value) for key, value in sorted(record.exclusion_counts.items()))
            lines.append((self.console_str["summary"]["row"].format(
                format_value(record.L, "{:g}"), record.n_max, format_value(record.final_fraction),
                format_value(record.final_stderr), vacuous_str if vacuous else format_value(bound), counts), vacuous))
        return lines

    def print_summary(self, records):
        """
        Prints the survivor fraction table of a run

        :param records: SweepRecords
        :type records: list
        """
        self.print_header(self.console_str["summary"]["header"].format(
            "L", "n", "fraction", "stderr", "paper bound", "exclusions"))
        for text, vacuous in self.summary_lines(records):
            cprint(text, "yellow" if vacuous else "blue")
        exponent = records[-1].decay_exponent if records else None
        if len(records) > 1:
            cprint(self.console_str["summary"]["exponent"].format(format_value(exponent)), "blue", attrs=["bold"])

    def print_lemma_report(self, report):
        self.print_header(self.console_str["lemma"]["header"].format(
            report.lemma_id, format_value(report.L, "{:g}"), report.trials, report.seed))
        worst = report.worst_margin["margin"] if report.worst_margin else None
        color = "blue" if report.pass_count == report.hypothesis_met_count else "red"
        cprint(self.console_str["lemma"]["row"].format(
            report.hypothesis_met_count, report.pass_count, format_value(report.pass_rate), format_value(worst)),
            color, attrs=["bold"])
        for name, counts in sorted(report.clause_counts.items()):
            cprint(self.console_str["lemma"]["clause"].format(name, counts["passed"], counts["checked"]))
        cprint(self.console_str["lemma"]["finite" if report.finite_L else "asymptotic"], "grey")

    def print_orbit(self, trace, ladder, hit_at=None):
        self.print_header(self.console_str["orbit"]["header"].format(
            trace.critical_index, format_value(trace.origin), format_value(trace.a), format_value(trace.L, "{:g}")))
        cprint(self.console_str["orbit"]["row"].format(
            trace.horizon, format_value(float(trace.log_deriv[-1])), format_value(float(min(trace.dist))),
            format_value(float(ladder.D[-1]))), "blue")
        if hit_at is not None:
            cprint(self.console_str["orbit"]["hit"].format(hit_at), "yellow")

    def print_critical_set(self, critical_set, second_derivatives):
        self.print_header(self.console_str["critical"]["header"].format(
            len(critical_set), format_value(critical_set.L, "{:g}")))
        for index, (point, second) in enumerate(zip(critical_set.points, second_derivatives)):
            cprint(self.console_str["critical"]["row"].format(index, float(point), format_value(second)), "blue")

    def print_returns(self, decomposition, lengths):
        self.print_header(self.console_str["returns"]["header"].format(
            decomposition.critical_index, decomposition.mode, decomposition.horizon))
        if not decomposition.events:
            cprint(self.console_str["returns"]["empty"], "grey")
        for event in decomposition.events:
            flag = "essential" if event.essential else ""
            if event.exhausted:
                flag = (flag + " exhausted").strip()
            cprint(self.console_str["returns"]["row"].format(
                event.time, event.bound_to, format_value(event.depth), event.depth_index, event.bound_period,
                event.kind, flag), "blue" if event.essential else None)
        cprint(self.console_str["returns"]["split"].format(lengths["free"], lengths["bound"]), "grey")

    def print_json_line(self, content):
        """
        One machine-readable line, without colour
        """
        print(json.dumps(content))

    def print_written(self, paths):
        for path in paths:
            cprint(self.console_str["written"].format(path), "grey")

    def print_error(self, error_type, data=None, will_exit=False):
        """
        Prints the error type message to the console

        :param error_type: The error type
            (one of: 'parse', 'validation', 'usage', 'numerical', 'oracle', 'io', 'keyboardInterrupt', 'unknown')
        :type error_type: str
        :param data: Relevant error information
        :type data: list
        :param will_exit: Whether the program is exiting or not
        :type will_exit: bool

        :return: Error string
        :rtype: str
        """
        suffix = ""
        if will_exit:
            suffix = " Exiting program."

        error_str = self.error_str[error_type]
        if data:
            error_str = error_str.format(*data)

        cprint("\n" + error_str + suffix, "red", attrs=["bold"])
        cprint(self.error_str["general"] + "\n", "grey", attrs=["bold"])

        return error_str
