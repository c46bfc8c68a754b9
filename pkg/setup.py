"""A setuptools based setup module.

usage: pip install -e .

"""

from setuptools import setup
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    long_description = f.read().replace('\r\n', '\n')

setup(
    name='Q_CRYPTO',

    version='0.1.0',

    description='Simulator for quantum key distribution and quantum coin tossing',
    long_description=long_description,
    long_description_content_type='text/markdown',

    license='BSD-3',

    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Education',
        'Topic :: Security :: Cryptography',
        'License :: OSI Approved :: BSD License',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
    ],

    keywords='quantum cryptography key-distribution coin-tossing polarization simulation',

    packages=['Q_CRYPTO'],

    python_requires='>=3.8',

    install_requires=['numpy',
                      'pandas',
                      'tqdm >= 4.32.1'
                      ],

    extras_require={
        'test': ['pytest', 'pytest-cov', 'coverage'],
        'doc': ['sphinx', 'sphinx-autoapi', 'sphinx-rtd-theme'],
    },

    package_data={
        'Q_CRYPTO': ['tables/bb84_table.csv',
                     'tables/cointoss_table.csv'],
    },

    include_package_data=True,

    entry_points={
        'console_scripts': [
            'qcrypto=Q_CRYPTO.main:main',
        ],
    },
)
