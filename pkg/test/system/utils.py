"""
Utility functions for writing system tests.
"""
import filecmp
import os.path
import shutil
import tempfile
from itertools import islice

import sarge

DEBUG = False
temporary_dir = None
working_dir = None
env = {}

VARIABLES = "ABCDEFGH"
RELATIONS = (("\\subseteq", "c="), ("=", "="))


def setup():
    """Create a temporary directory holding the tagged article files."""
    global temporary_dir, working_dir, env
    temporary_dir = os.path.realpath(tempfile.mkdtemp())
    working_dir = os.path.join(temporary_dir, "autoformal_exercise")
    os.mkdir(working_dir)
    print(working_dir)
    env.clear()
    write_article(working_dir)


def teardown():
    """Delete all files."""
    if temporary_dir and os.path.exists(temporary_dir):
        shutil.rmtree(temporary_dir)


def toy_statements(n=None):
    """(latex, mizar) statements relating two distinct variables, in a fixed order."""
    statements = []
    for latex_rel, mizar_rel in RELATIONS:
        for a in VARIABLES:
            for b in VARIABLES:
                if a != b:
                    statements.append(("$%s %s %s$" % (a, latex_rel, b), "%s %s %s;" % (a, mizar_rel, b)))
    return statements[:n] if n else statements


def write_article(directory, n=72):
    """Write position-tagged LaTeX and Mizar files and a symbol table for `n` statements."""
    statements = toy_statements(n)
    with open(os.path.join(directory, "article.latex.tagged"), "w") as latex, \
            open(os.path.join(directory, "article.mizar.tagged"), "w") as mizar:
        for i, (latex_text, mizar_text) in enumerate(statements):
            latex.write("%d 1\t%s\n" % (i + 1, latex_text))
            mizar.write("%d 1\t%s\n" % (i + 1, mizar_text))
    with open(os.path.join(directory, "article.voc"), "w") as f:
        f.write("#SYMBOLS\nc=\n")


def run(command):
    """Run a command in the working directory and capture the output."""
    return sarge.run(command, cwd=working_dir, stdout=sarge.Capture(), stderr=sarge.Capture())


def pairs(iterable):
    """
    ABCDEF -> (A, B), (C, D), (E, F)
    """
    return zip(islice(iterable, 0, None, 2), islice(iterable, 1, None, 2))


def assert_file_exists(p, relative_path):
    """Assert that a file exists at the given path, relative to the working directory."""
    assert os.path.exists(os.path.join(working_dir, relative_path)), relative_path


def assert_in_output(p, texts):
    """Assert that the stdout from process 'p' contains all of the provided text."""
    if isinstance(texts, str):
        texts = [texts]
    for text in texts:
        assert text in p.stdout.text, "'{0}' is not in '{1}'".format(text, p.stdout.text)


def assert_error(p, error_class):
    """Assert that the last stderr line of 'p' reports an error of the given class."""
    lines = p.stderr.text.strip().splitlines()
    assert lines and lines[-1].startswith("error: %s: " % error_class), p.stderr.text


def assert_return_code(p, value):
    assert p.returncode == value, "Return code {0}, expected {1}\n{2}".format(
        p.returncode, value, p.stderr.text)


def assert_same_files(p, paths):
    """Assert that two files, relative to the working directory, are byte-identical."""
    first, second = (os.path.join(working_dir, path) for path in paths)
    assert filecmp.cmp(first, second, shallow=False), "%s and %s differ" % (first, second)


def build_command(template, env_var):
    """Return a function which will return a string."""

    def wrapped(env):
        args = env[env_var]
        if hasattr(args, "__len__") and not isinstance(args, str):
            return template.format(*args)
        return template.format(args)
    return wrapped


def run_test(command, *checks):
    """Execute a command in a sub-process then check that the output matches some criterion."""
    global env, DEBUG

    if callable(command):
        command = command(env)
    p = run(command)
    if DEBUG:
        print(p.stdout.text)
        print(p.stderr.text)
    if assert_return_code not in checks:
        assert_return_code(p, 0)
    for check, checkarg in pairs(checks):
        if callable(checkarg):
            checkarg = checkarg(env)
        check(p, checkarg)
run_test.__test__ = False  # pytest should not treat this as a test
