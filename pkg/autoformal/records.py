"""
Provenance of command runs.

A RunRecord captures what one `train`, `infer`, `evaluate` or `cover`
invocation did: its parameters, how long it took, how it ended and which
output files it wrote. Records are kept as one JSON document per run in
`<output_dir>/.autoformal/records/`.


:license: BSD 2-clause, see LICENSE for details.
"""
import json
import logging
import os
import re
import time
from collections import OrderedDict
from datetime import datetime

from .core import TIMESTAMP_FORMAT, STATUS_FORMAT, STATUS_PATTERN
from .datastore import DataKey

logger = logging.getLogger("autoformal")

RECORD_DIR = os.path.join(".autoformal", "records")
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

INITIALIZED = "initialized"
RUNNING = "running"
FINISHED = "finished"
FAILED = "failed"
DIVERGED = "diverged"


class RunRecord(object):
    valid_name_pattern = r'^\w+[\w\-\.:]*$'

    def __init__(self, command, parameters=None, experiment_name="default", label=None,
                 reason="", timestamp=None, timestamp_format=TIMESTAMP_FORMAT):
        self.timestamp = timestamp or datetime.now().replace(microsecond=0)
        self.label = label or self.timestamp.strftime(timestamp_format)
        if not re.match(RunRecord.valid_name_pattern, self.label):
            raise ValueError("Invalid record label %r" % self.label)
        self.command = command
        self.parameters = parameters or {}
        self.experiment_name = experiment_name
        self.reason = reason
        self.duration = None
        self.outcome = ""
        self.output_data = []
        self.tags = set([STATUS_FORMAT % INITIALIZED])
        self._start = None

    def __repr__(self):
        return "RunRecord(%r, %r, %s)" % (self.label, self.command, self.status)

    @property
    def status(self):
        for tag in self.tags:
            match = STATUS_PATTERN.match(tag)
            if match:
                return match.group(1)
        return None

    def set_status(self, status):
        self.tags = set(tag for tag in self.tags if not STATUS_PATTERN.match(tag))
        self.tags.add(STATUS_FORMAT % status)

    def start(self):
        self._start = time.time()
        self.set_status(RUNNING)

    def finish(self, status=FINISHED, outcome="", output_data=()):
        if self._start is not None:
            self.duration = time.time() - self._start
        self.set_status(status)
        self.outcome = outcome
        self.output_data.extend(output_data)
        logger.debug("Record %s: %s", self.label, status)

    def as_dict(self):
        return OrderedDict([
            ("label", self.label),
            ("timestamp", self.timestamp.strftime(DATE_FORMAT)),
            ("command", self.command),
            ("experiment_name", self.experiment_name),
            ("reason", self.reason),
            ("parameters", self.parameters),
            ("duration", self.duration),
            ("outcome", self.outcome),
            ("status", self.status),
            ("tags", sorted(self.tags)),
            ("output_data", [key.as_dict() for key in self.output_data]),
        ])

    @classmethod
    def from_dict(cls, data):
        record = cls(data["command"], data.get("parameters"), data.get("experiment_name", "default"),
                     data["label"], data.get("reason", ""),
                     datetime.strptime(data["timestamp"], DATE_FORMAT))
        record.duration = data.get("duration")
        record.outcome = data.get("outcome", "")
        record.tags = set(data.get("tags", ()))
        record.output_data = [DataKey.from_dict(key) for key in data.get("output_data", ())]
        return record

    def __eq__(self, other):
        return isinstance(other, RunRecord) and self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self.__eq__(other)


class RecordStore(object):
    """Stores each RunRecord as `<label>.json` in a directory."""

    def __init__(self, directory):
        self.directory = directory

    def __str__(self):
        return "Record store in %s" % self.directory

    @classmethod
    def in_output_dir(cls, output_dir):
        return cls(os.path.join(str(output_dir), RECORD_DIR))

    def _path(self, label):
        return os.path.join(self.directory, label + ".json")

    def has(self, label):
        return os.path.exists(self._path(label))

    def unique_label(self, label):
        """Return `label`, or `label_<n>` if a record with that label already exists."""
        candidate = label
        n = 1
        while self.has(candidate):
            candidate = "%s_%d" % (label, n)
            n += 1
        return candidate

    def save(self, record):
        if not os.path.isdir(self.directory):
            os.makedirs(self.directory)
        with open(self._path(record.label), "w", encoding="utf-8") as f:
            json.dump(record.as_dict(), f, indent=2)

    def get(self, label):
        if not self.has(label):
            raise KeyError(label)
        with open(self._path(label), encoding="utf-8") as f:
            return RunRecord.from_dict(json.load(f, object_pairs_hook=OrderedDict))

    def labels(self, tags=None):
        if not os.path.isdir(self.directory):
            return []
        labels = sorted(name[:-len(".json")] for name in os.listdir(self.directory)
                        if name.endswith(".json"))
        if tags:
            if not isinstance(tags, list):
                tags = [tags]
            labels = [label for label in labels
                      if any(tag in self.get(label).tags for tag in tags)]
        return labels

    def list(self, tags=None):
        records = [self.get(label) for label in self.labels(tags)]
        return sorted(records, key=lambda record: (record.timestamp, record.label))
