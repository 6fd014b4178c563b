"""
Unit tests for the autoformal.records module
"""

import os
import unittest
from datetime import datetime

from autoformal.datastore import DataKey
from autoformal.records import (RunRecord, RecordStore, RECORD_DIR, INITIALIZED, RUNNING,
                                FINISHED, FAILED, DIVERGED)

from .utils import TemporaryDirectoryMixin

back_to_the_future = datetime(2015, 10, 21, 16, 29, 0)


class TestRunRecord(unittest.TestCase):

    def test_default_label_from_timestamp(self):
        record = RunRecord("train", timestamp=back_to_the_future)
        self.assertEqual(record.label, "20151021-162900")
        self.assertEqual(record.status, INITIALIZED)

    def test_invalid_label(self):
        self.assertRaises(ValueError, RunRecord, "train", label="no spaces allowed")

    def test_status_transitions(self):
        record = RunRecord("train", label="run1")
        record.start()
        self.assertEqual(record.status, RUNNING)
        record.finish(DIVERGED, outcome="stopped at step 5")
        self.assertEqual(record.status, DIVERGED)
        self.assertIsNotNone(record.duration)
        self.assertEqual(record.outcome, "stopped at step 5")
        self.assertEqual(len([tag for tag in record.tags if tag.startswith("_")]), 1)

    def test_user_tags_survive_status_changes(self):
        record = RunRecord("evaluate", label="run1")
        record.tags.add("baseline")
        record.set_status(FAILED)
        self.assertIn("baseline", record.tags)

    def test_dict_round_trip(self):
        record = RunRecord("train", {"num_units": 8}, "lstm-model", "run1", "testing",
                           back_to_the_future)
        record.start()
        record.finish(FINISHED, "ok", [DataKey("model/checkpoint", "0" * 40, "2015-10-21 16:30:00",
                                               size=10)])
        self.assertEqual(RunRecord.from_dict(record.as_dict()), record)


class TestRecordStore(TemporaryDirectoryMixin, unittest.TestCase):

    def setUp(self):
        super().setUp()
        self.store = RecordStore.in_output_dir(self.tmpdir)

    def test_location(self):
        self.assertEqual(self.store.directory, os.path.join(self.tmpdir, RECORD_DIR))

    def test_empty(self):
        self.assertEqual(self.store.labels(), [])

    def test_save_and_get(self):
        record = RunRecord("infer", {"max_len": 10}, label="run1")
        self.store.save(record)
        self.assertTrue(self.store.has("run1"))
        self.assertEqual(self.store.get("run1"), record)
        self.assertTrue(os.path.exists(os.path.join(self.store.directory, "run1.json")))

    def test_get_missing(self):
        self.assertRaises(KeyError, self.store.get, "nope")

    def test_unique_label(self):
        self.store.save(RunRecord("train", label="run"))
        self.store.save(RunRecord("train", label="run_1"))
        self.assertEqual(self.store.unique_label("run"), "run_2")
        self.assertEqual(self.store.unique_label("other"), "other")

    def test_list_by_time_and_tags(self):
        early = RunRecord("train", label="b", timestamp=datetime(2020, 1, 1))
        late = RunRecord("train", label="a", timestamp=datetime(2021, 1, 1))
        late.tags.add("keep")
        self.store.save(late)
        self.store.save(early)
        self.assertEqual([r.label for r in self.store.list()], ["b", "a"])
        self.assertEqual(self.store.labels("keep"), ["a"])


if __name__ == '__main__':
    unittest.main()
