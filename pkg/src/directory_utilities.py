import os
import errno
import csv
import json
import math


def validate_or_make_directory(directory_string):
    """
    Check if a file's directory exists. If it doesn't, then create it.

    :param directory_string: The file path whose directory should exist (ex: ../output/trend.csv)
    :type directory_string: str
    """
    directory = os.path.dirname(directory_string)
    if directory and not os.path.exists(directory):
        try:
            os.makedirs(directory)
        except OSError as exception:
            if exception.errno != errno.EEXIST:
                raise


def get_json_text(directory_string, default_json_content=None):
    """
    Get the raw text of a JSON file. If it doesn't exist,
    create and populate it with the specified default content.

    :param directory_string: The file path (ex: ../settings.json)
    :type directory_string: str
    :param default_json_content: The content to populate a non-existing JSON file with
    :type default_json_content: dict

    :return: The file's text
    :rtype: str
    """
    validate_or_make_directory(directory_string)
    try:
        with open(directory_string) as file:
            return file.read()
    except IOError:
        if default_json_content is None:
            default_json_content = {}
        write_json_to_file(directory_string, default_json_content)
        return json.dumps(default_json_content, indent=4, sort_keys=True)


def write_json_to_file(directory_string, json_content):
    """
    Write JSON content to a file, replacing whatever was there.
    Non-finite floats are written as null.

    :param directory_string: The file path (ex: ../output/records.json)
    :type directory_string: str
    :param json_content: The content to write
    :type json_content: dict, list
    """
    validate_or_make_directory(directory_string)
    with open(directory_string, "w") as file:
        json.dump(_finite_or_none(json_content), file, indent=4, sort_keys=True)
        file.write("\n")


def write_csv_to_file(directory_string, header_lines, columns, rows, delimiter=","):
    """
    Write rows to a CSV (or whitespace separated plot-data) file preceded by '#' comment lines.

    :param directory_string: The file path (ex: ../output/trend.csv)
    :type directory_string: str
    :param header_lines: Comment lines written before the column names, without the '#'
    :type header_lines: list
    :param columns: Column names
    :type columns: list
    :param rows: Row values; floats are written with repr so they round-trip exactly
    :type rows: list
    :param delimiter: Field separator
    :type delimiter: str
    """
    validate_or_make_directory(directory_string)
    with open(directory_string, "w", newline="") as file:
        for line in header_lines:
            file.write("# {}\n".format(line))
        file.write("# {}\n".format(delimiter.join(columns)))
        writer = csv.writer(file, delimiter=delimiter, lineterminator="\n")
        for row in rows:
            writer.writerow([_format_cell(value) for value in row])


def _format_cell(value):
    if isinstance(value, float):
        if math.isnan(value):
            return "n/a(vacuous)"
        return repr(value)
    return value


def _finite_or_none(content):
    if isinstance(content, float) and not math.isfinite(content):
        return None
    if isinstance(content, dict):
        return {key: _finite_or_none(value) for key, value in content.items()}
    if isinstance(content, (list, tuple)):
        return [_finite_or_none(value) for value in content]
    return content
