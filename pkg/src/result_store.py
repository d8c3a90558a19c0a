import json
import os

from directory_utilities import write_csv_to_file, write_json_to_file
from errors import IoError
from logger import logger

artifact_version = "1.0"


def _l_label(L):
    return "{:g}".format(L)


class ResultStore(object):
    """
    Writes the artifacts of a run into one output directory. Every file carries the artifact version and the
    serialized run config.
    """

    def __init__(self, output_directory, config_settings, version=artifact_version):
        self.output_directory = output_directory
        self.config_settings = config_settings
        self.version = version

        self.records_file_string = self._path("records.json")
        self.trend_file_string = self._path("trend.csv")
        self.cells_file_string = self._path("cells.csv")
        self.violations_file_string = self._path("violations.csv")
        self.orbit_file_string = self._path("orbit.csv")
        self.returns_file_string = self._path("returns.csv")

    def _path(self, name):
        return os.path.join(self.output_directory, name)

    def header_lines(self):
        return [
            "circle-lab artifact version {}".format(self.version),
            "config {}".format(json.dumps(self.config_settings, sort_keys=True, separators=(",", ":")))
        ]

    def _write_csv(self, path, columns, rows, delimiter=","):
        try:
            write_csv_to_file(path, self.header_lines(), columns, rows, delimiter)
        except OSError as exception:
            raise IoError(path, exception.strerror or str(exception))
        logger.info("Wrote {}".format(path))
        return path

    def _write_json(self, path, content):
        try:
            write_json_to_file(path, content)
        except OSError as exception:
            raise IoError(path, exception.strerror or str(exception))
        logger.info("Wrote {}".format(path))
        return path

    def emit_report(self, records):
        """
        Writes records.json, trend.csv, the survivor or cell tables and the plot-data files for a list of
        SweepRecords

        :param records: At least one record
        :type records: list

        :return: Paths written
        :rtype: list
        """
        if not records:
            raise ValueError("emit_report needs at least one record")
        written = [self.write_records(records), self.write_trend(records)]
        for record in records:
            suffix = "" if len(records) == 1 else "_L{}".format(_l_label(record.L))
            if record.cell_list:
                written.append(self.write_cells(record, self._path("cells{}.csv".format(suffix))))
            else:
                written.append(self.write_survivors(record, self._path("survivors{}.csv".format(suffix))))
            written.append(self.write_survivor_plot(record))
        written.append(self.write_trend_plot(records))
        return written

    def write_records(self, records):
        content = {
            "version": self.version,
            "config": self.config_settings,
            "records": [record.to_dict() for record in records]
        }
        return self._write_json(self.records_file_string, content)

    def write_trend(self, records):
        rows = [[record.L, record.n_max, record.final_fraction, record.final_stderr, record.paper_bound]
                for record in records]
        return self._write_csv(self.trend_file_string, ["L", "n", "fraction", "stderr", "paper_bound"], rows)

    def write_survivors(self, record, path=None):
        rows = [verdict.to_row() for verdict in record.verdicts]
        return self._write_csv(path or self._path("survivors.csv"),
                               ["a", "first_failure_step", "condition", "critical_point"], rows)

    def write_cells(self, record, path=None):
        rows = [cell.to_row() for cell in record.cell_list]
        return self._write_csv(path or self.cells_file_string,
                               ["a_lo", "a_hi", "status", "step", "condition", "critical_point", "unresolved"], rows)

    def write_survivor_plot(self, record):
        path = self._path("plot_survivors_L{}.dat".format(_l_label(record.L)))
        rows = [[n, fraction] for n, fraction in enumerate(record.survivor_fraction)]
        return self._write_csv(path, ["n", "fraction"], rows, delimiter=" ")

    def write_trend_plot(self, records):
        path = self._path("plot_trend_n{}.dat".format(records[0].n_max))
        rows = [[record.L, record.final_fraction] for record in records]
        return self._write_csv(path, ["L", "fraction"], rows, delimiter=" ")

    def write_lemma_report(self, report):
        """
        lemma_<id>.json with the report and violations.csv with the full inputs of every violation
        """
        content = dict(report.to_dict(), version=self.version, config=self.config_settings)
        json_path = self._write_json(self._path("lemma_{}.json".format(report.lemma_id)), content)
        rows = [[violation["lemma"], violation["trial"], violation["clause"], violation["lhs"], violation["rhs"],
                 violation["margin"], json.dumps(violation["inputs"], sort_keys=True)]
                for violation in report.violations]
        csv_path = self._write_csv(self.violations_file_string,
                                   ["lemma", "trial", "clause", "lhs", "rhs", "margin", "inputs"], rows)
        return [json_path, csv_path]

    def write_orbit(self, trace, ladder):
        rows = []
        for i in range(trace.horizon + 1):
            d_i = float(ladder.d[i]) if i < ladder.horizon else None
            D_next = float(ladder.D[i + 1]) if i < ladder.horizon else None
            rows.append([i, float(trace.points[i]), float(trace.log_deriv[i]), int(trace.signs[i]),
                         float(trace.dist[i]), d_i, D_next])
        return self._write_csv(self.orbit_file_string,
                               ["i", "c_i", "log_deriv", "sign", "dist", "d_i", "D_i+1"], rows)

    def write_returns(self, decomposition):
        rows = [event.to_row() for event in decomposition.events]
        return self._write_csv(self.returns_file_string,
                               ["time", "bound_to", "depth", "depth_index", "bound_period", "kind", "essential"], rows)
