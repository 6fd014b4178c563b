#!/usr/bin/env python


from setuptools import setup
from setuptools.command.sdist import sdist
import os


class sdist_git(sdist):
    """Add revision number to version for development releases."""

    def run(self):
        if "dev" in self.distribution.metadata.version:
            self.distribution.metadata.version += self.get_tip_revision()
        sdist.run(self)

    def get_tip_revision(self, path=os.getcwd()):
        try:
            import git
        except ImportError:
            return ''
        try:
            repo = git.Repo('.')
        except git.InvalidGitRepositoryError:
            return ''
        return repo.head.commit.hexsha[:7]


install_requires = ['numpy>=1.17', 'jinja2']

setup(
    name = "autoformal",
    version = "0.1dev",
    package_dir = {'autoformal': 'autoformal'},
    packages = ['autoformal', 'autoformal.model', 'autoformal.formatting'],
    package_data = {'autoformal': ['formatting/latex_template.tex']},
    scripts = ['bin/autoformal', 'bin/autoformal-complete.sh'],
    author = "autoformal authors and contributors",
    description = "Neural translation of LaTeX mathematics into Mizar statements",
    long_description = open('README.rst').read(),
    license = "BSD 2 clause",
    keywords = "autoformalization mizar latex neural machine translation",
    classifiers = ['Development Status :: 3 - Alpha',
                   'Environment :: Console',
                   'Intended Audience :: Science/Research',
                   'License :: OSI Approved :: BSD License',
                   'Natural Language :: English',
                   'Operating System :: OS Independent',
                   'Programming Language :: Python :: 3',
                   'Topic :: Scientific/Engineering :: Mathematics'],
    cmdclass = {'sdist': sdist_git},
    python_requires = ">=3.6",
    install_requires = install_requires,
    extras_require = {'yaml': 'pyyaml',
                      'parameters': 'parameters',
                      'test': ['pytest', 'hypothesis', 'sarge']}
)
