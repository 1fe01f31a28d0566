#!/usr/bin/env python
# -*- coding: utf-8 -*-
import os.path
import re

from setuptools import setup, find_packages

name = 'critmetro'


def get_version():
    file_name = os.path.join(name, '__init__.py')
    with open(file_name) as init_file:
        content = init_file.readlines()
    for line in content:
        match = re.match('^ *__version__ *= *[\'"]([^\'"]+)', line)
        if match:
            return match.group(1)
    raise Exception('Could not parse version string.')


setup(
    name=name,
    version=get_version(),
    description='Multiparameter quantum metrology of spin chains near quantum phase transitions.',
    long_description="""Multiparameter quantum metrology of spin chains near quantum phase transitions.

    Features:

        * Sparse Hamiltonians of Ising and XY chains built from Pauli strings
        * Block Lanczos ground states with tracking through degenerate doublets
        * Quantum Fisher information matrix from ground-state fidelities
        * Mean Uhlmann (Berry) curvature from Bargmann phases of small loops
        * Quantumness index R of any parameter subset
        * Free-fermion solution of the XY rotation protocol up to thousands of spins
        * Finite-size scaling fits and critical-point location
        * Command line scans with deterministic CSV / JSON output

    """,

    license='MIT',

    classifiers=[
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Physics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
    ],
    keywords=['quantum-metrology', 'quantum-fisher-information', 'spin-chains', 'phase-transitions'],
    packages=find_packages(exclude=("test",)),
    package_dir={name: name},
    include_package_data=True,
    install_requires=['numpy', 'scipy', 'sympy', 'pfapack'],
    setup_requires=["pytest-runner"],
    python_requires=">=3.9",
    tests_require=["pytest"],
    entry_points={'console_scripts': ['critmetro = critmetro.cli:main']},
    platforms=['ALL'],
)
