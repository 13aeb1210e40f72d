#! /usr/bin/env python
from __future__ import with_statement

import os.path

from setuptools import setup

extra = {
    'entry_points': {
        'console_scripts': [
            'gpr_model_space_diagnosis = diagnose_gpr_by_model_space.cli:main',
            ],
    },
    'install_requires': [
        'numpy',
        'scipy',
        'tqdm',
        'scikit-learn',
        ],
    'extras_require': {
        'test': ['pytest'],
        },
}


def get_version(fname=os.path.join('diagnose_gpr_by_model_space', '__init__.py')):
    with open(fname) as f:
        for line in f:
            if line.startswith('__version__'):
                return eval(line.split('=')[-1])


def get_long_description():
    descr = []
    for fname in ('README.md',):
        with open(fname) as f:
            descr.append(f.read())
    return '\n\n'.join(descr)


setup(
    name="diagnose_gpr_by_model_space",
    version=get_version(),
    description="Find and group anomalies in ground penetrating radar B-scans "
                "by fitting a 2D echo state network to every window",
    long_description=get_long_description(),
    packages=[
        "diagnose_gpr_by_model_space",
        ],
    python_requires='>=3.6',
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Environment :: Console",
        "Intended Audience :: Science/Research",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering",
    ],
    **extra)
