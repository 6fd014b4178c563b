"""
The output directory of a project and keys identifying the files written
there.

An OutputDirectory resolves its root from an explicit argument, then the
AUTOFORMAL_OUTPUT_DIR environment variable, then "./Data". A DataKey
records the path of an output file relative to that root, its SHA-1 digest,
creation time and size, so that run records can later tell whether a file
has changed.


:license: BSD 2-clause, see LICENSE for details.
"""
import datetime
import hashlib
import logging
import os

logger = logging.getLogger("autoformal")

OUTPUT_DIR_VARIABLE = "AUTOFORMAL_OUTPUT_DIR"
DEFAULT_ROOT = "./Data"
IGNORE_DIGEST = "0" * 40
CHUNK_SIZE = 1 << 20


def file_digest(path):
    sha1 = hashlib.sha1()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            sha1.update(chunk)
    return sha1.hexdigest()


class DataKey(object):
    """
    Identifies an output file. `metadata` holds at least the file size.
    """

    def __init__(self, path, digest, creation, **metadata):
        self.path = path
        self.digest = digest
        self.creation = creation
        self.metadata = metadata

    def __repr__(self):
        return "%s(%s [%s])" % (self.path, self.digest, self.creation)

    def __eq__(self, other):
        return (isinstance(other, DataKey) and self.path == other.path and
                (self.digest == other.digest or IGNORE_DIGEST in (self.digest, other.digest)))

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(self.path)

    def as_dict(self):
        return {
            "path": self.path,
            "digest": self.digest,
            "creation": self.creation,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["path"], data["digest"], data.get("creation"), **data.get("metadata", {}))


class OutputDirectory(object):
    """A local directory receiving checkpoints, reports and hypotheses."""

    def __init__(self, root=None):
        root = root or os.environ.get(OUTPUT_DIR_VARIABLE) or DEFAULT_ROOT
        self.root = os.path.abspath(root)

    def __str__(self):
        return self.root

    def __repr__(self):
        return "OutputDirectory(%r)" % self.root

    def __getstate__(self):
        return {"root": self.root}

    def create(self):
        if not os.path.isdir(self.root):
            logger.debug("Creating output directory %s", self.root)
            os.makedirs(self.root)
        return self

    def path(self, *parts):
        """Absolute path of `parts` joined below the root; relative input only."""
        return os.path.join(self.root, *parts)

    def relative(self, path):
        path = os.path.abspath(path)
        if os.path.commonpath([path, self.root]) == self.root:
            return os.path.relpath(path, self.root)
        return path

    def generate_keys(self, *paths):
        """Return a DataKey for each existing file in `paths` (absolute or root-relative)."""
        keys = []
        for path in paths:
            full_path = path if os.path.isabs(path) else self.path(path)
            if not os.path.isfile(full_path):
                raise IOError("File %s does not exist" % full_path)
            stats = os.stat(full_path)
            creation = datetime.datetime.fromtimestamp(stats.st_mtime).replace(microsecond=0)
            keys.append(DataKey(self.relative(full_path), file_digest(full_path),
                                creation.strftime("%Y-%m-%d %H:%M:%S"), size=stats.st_size))
        return keys
