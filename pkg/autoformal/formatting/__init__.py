"""
The formatting module renders run records, evaluation reports and cover
reports in different ways (short, long or table) and in different mark-up
formats: text, JSON or LaTeX.

The table mode of evaluation reports follows the layout of a hyperparameter
comparison: Parameter, Final Test Perplexity, Final Test BLEU, Identical
Statements (%), Identical No-overlap (%). Cover reports list, per set of
models, the share of items within edit distance 0, 1, 2 and 3.


:license: BSD 2-clause, see LICENSE for details.
"""
import json
import re
import textwrap
from os.path import dirname

from ..core import component, component_type, get_registered_components
from ..evaluation import EvalReport, CoverReport
from ..records import RunRecord

NOT_AVAILABLE = "n/a"

record_fields = ["label", "timestamp", "command", "status", "duration", "outcome",
                 "experiment_name", "reason", "parameters", "output_data", "tags"]
record_columns = ["label", "timestamp", "command", "status", "duration", "outcome"]
report_columns = ["Parameter", "Final Test Perplexity", "Final Test BLEU",
                  "Identical Statements (%)", "Identical No-overlap (%)"]


def format_number(value, digits=2):
    return NOT_AVAILABLE if value is None else "%.*f" % (digits, value)


def format_count(pair):
    count, pct = pair
    return "%d (%s%%)" % (count, format_number(pct))


def format_bucket(bucket):
    return "%s / %s" % (format_number(bucket[0]), format_number(bucket[1]))


def bucket_header(k):
    return "0" if k == 0 else "<= %d" % k


def human_readable_duration(seconds):
    """
    Coverts seconds to human readable unit

    >>> human_readable_duration(((6 * 60 + 32) * 60 + 12))
    '6h 32m 12.00s'
    >>> human_readable_duration(0.5)
    '0.50s'
    """
    if seconds is None:
        return "None"
    minutes, s = divmod(float(seconds), 60)
    hours, m = divmod(int(minutes), 60)
    days, h = divmod(hours, 24)
    parts = [(days, "{0}d"), (h, "{0}h"), (m, "{0}m"), (s, "{0:.2f}s")]
    return " ".join(templ.format(val) for val, templ in parts if val != 0) or "0.00s"


def report_items(report, parameter=None):
    """Key/value lines of an EvalReport, in a fixed, machine-parseable order."""
    items = [
        ("model_id", report.model_id if report.model_id is not None else NOT_AVAILABLE),
        ("size", str(report.size)),
        ("no_overlap_size", str(report.no_overlap_size)),
        ("perplexity", format_number(report.perplexity, 4)),
        ("bleu", format_number(report.bleu)),
        ("identical_total", format_count(report.identical_total)),
        ("identical_no_overlap", format_count(report.identical_no_overlap)),
    ]
    for k, bucket in report.distance_buckets.items():
        items.append(("distance_le_%d" % k, format_bucket(bucket)))
    for name, value in sorted(report.hyperparameters.items()):
        items.append(("hyperparameters.%s" % name, str(value)))
    return items


def report_label(report, parameter=None):
    if parameter:
        return str(report.hyperparameters.get(parameter, NOT_AVAILABLE))
    return report.model_id if report.model_id is not None else NOT_AVAILABLE


def report_row(report, parameter=None):
    return [report_label(report, parameter),
            format_number(report.perplexity),
            format_number(report.bleu),
            format_number(report.identical_total[1]),
            format_number(report.identical_no_overlap[1])]


def cover_headers(report):
    ks = report.rows[0][2].keys() if report.rows else ()
    return ["Models"] + [bucket_header(k) for k in ks]


def cover_rows(report):
    rows = []
    for name, models, buckets in report.rows:
        if name == "union":
            title = "Union of all %d models" % len(models)
        else:
            title = "%s: %s" % (name, ", ".join(str(m) for m in models))
        rows.append([title] + [format_bucket(bucket) for bucket in buckets.values()])
    return rows


def record_value(record, field):
    value = getattr(record, field)
    if field == "duration":
        return human_readable_duration(value)
    if field == "timestamp":
        return value.strftime("%Y-%m-%d %H:%M:%S")
    if isinstance(value, dict):
        return ", ".join("%s=%s" % item for item in sorted(value.items()))
    if isinstance(value, (set, list)):
        return ", ".join(sorted(str(v) for v in value))
    return "" if value is None else str(value)


def tabulate(items, parameter=None):
    """Return (headers, rows) of strings for a homogeneous list of items."""
    if not items:
        return [], []
    if all(isinstance(item, EvalReport) for item in items):
        return list(report_columns), [report_row(item, parameter) for item in items]
    if all(isinstance(item, CoverReport) for item in items):
        rows = []
        for item in items:
            rows.extend(cover_rows(item))
        return cover_headers(items[0]), rows
    if all(isinstance(item, RunRecord) for item in items):
        return ([h.replace("_", " ").title() for h in record_columns],
                [[record_value(item, field) for field in record_columns] for item in items])
    raise TypeError("Cannot tabulate a mixture of %s"
                    % ", ".join(sorted(set(type(item).__name__ for item in items))))


def item_name(item, parameter=None):
    if isinstance(item, EvalReport):
        return report_label(item, parameter)
    if isinstance(item, CoverReport):
        return "cover of %d items" % item.size
    return item.label


@component_type
class Formatter(object):
    required_attributes = ("short", "long", "table")

    def __init__(self, items, parameter=None):
        self.items = items
        self.parameter = parameter

    def format(self, mode='short'):
        """
        Format the items according to the given mode. ``mode`` may be 'short',
        'long' or 'table'.
        """
        if mode not in self.required_attributes:
            raise ValueError("Unknown format mode %r" % mode)
        return getattr(self, mode)()


@component
class JSONFormatter(Formatter):
    name = "json"

    def short(self, indent=2):
        return json.dumps([item.as_dict() for item in self.items], indent=indent)

    def long(self, indent=2):
        return self.short(indent=indent)

    def table(self, indent=2):
        return self.short(indent=indent)


@component
class TextFormatter(Formatter):
    """
    Format records or reports as text.
    """
    name = "text"

    def short(self):
        """Return one identifier per item, one per line."""
        return "\n".join(item_name(item, self.parameter) for item in self.items)

    def long(self, text_width=80, left_column_width=24):
        """
        Return every field of every item as `key: value` lines. Record
        values longer than the text width are wrapped round.
        """
        output = ""
        for item in self.items:
            if len(self.items) > 1:
                output += "-" * text_width + "\n"
            if isinstance(item, EvalReport):
                for key, value in report_items(item):
                    output += "%s: %s\n" % (key, value)
            elif isinstance(item, CoverReport):
                headers = cover_headers(item)
                for row in cover_rows(item):
                    output += "%s: %s\n" % (row[0], "; ".join(
                        "%s %s" % (h, v) for h, v in zip(headers[1:], row[1:])))
            else:
                for field in record_fields:
                    lines = textwrap.wrap(record_value(item, field),
                                          width=text_width - left_column_width) or [""]
                    output += "%-*s: %s\n" % (left_column_width, field.replace("_", " ").title(),
                                              lines[0])
                    for line in lines[1:]:
                        output += " " * (left_column_width + 2) + line + "\n"
        return output

    def table(self):
        headers, rows = tabulate(self.items, self.parameter)
        return str(TextTable(headers, rows))


class TextTable(object):
    """
    Very primitive implementation of a text table: `rows` are lists of
    strings, one per header.
    """

    def __init__(self, headers, rows, max_column_width=40):
        self.headers = headers
        self.rows = rows
        self.max_column_width = max_column_width

    def calculate_column_widths(self):
        column_widths = []
        for i, header in enumerate(self.headers):
            column_width = max([len(header)] + [len(row[i]) for row in self.rows])
            column_widths.append(min(self.max_column_width, column_width))
        return column_widths

    def __str__(self):
        column_widths = self.calculate_column_widths()
        format = "| " + " | ".join("%%-%ds" % w for w in column_widths) + " |\n"
        output = format % tuple(self.headers)
        for row in self.rows:
            output += format % tuple(value[:self.max_column_width] for value in row)
        return output


@component
class LaTeXFormatter(Formatter):
    name = "latex"
    SUBSTITUTIONS = (
        (re.compile(r'\\'), r'\\textbackslash'),
        (re.compile(r'([{}_#%&$])'), r'\\\1'),
        (re.compile(r'~'), r'\~{}'),
        (re.compile(r'\^'), r'\^{}'),
        (re.compile(r'"'), r"''"),
        (re.compile(r'\<'), r'\\textless{}'),
        (re.compile(r'\>'), r'\\textgreater{}')
    )

    @staticmethod
    def _escape_tex(value):
        newval = str(value)
        for pattern, replacement in LaTeXFormatter.SUBSTITUTIONS:
            newval = pattern.sub(replacement, newval)
        return newval

    def short(self):
        return self.table()

    def long(self):
        return self.table()

    def table(self):
        from jinja2 import Environment, FileSystemLoader
        env = Environment(loader=FileSystemLoader([dirname(__file__)]), keep_trailing_newline=True)
        env.block_start_string = '{%'
        env.block_end_string = '%}'
        env.variable_start_string = '@'
        env.variable_end_string = '@'
        env.filters['escape_tex'] = LaTeXFormatter._escape_tex
        headers, rows = tabulate(self.items, self.parameter)
        template = env.get_template('latex_template.tex')
        return template.render(headers=headers, rows=rows, alignment="l" + "r" * (len(headers) - 1))


def get_formatter(format):
    """
    Return a :class:`Formatter` class of the appropriate type. ``format``
    may be 'text', 'json' or 'latex'.
    """
    try:
        return get_registered_components(Formatter)[format]
    except KeyError:
        raise ValueError("Unknown output format %r" % format)
