"""Setup script for dominion."""
from setuptools import setup, find_packages
from pathlib import Path

# Read README
readme_file = Path(__file__).parent / 'README.md'
long_description = readme_file.read_text(encoding='utf-8') if readme_file.exists() else ''

# Read requirements
requirements_file = Path(__file__).parent / 'requirements.txt'
requirements = []
if requirements_file.exists():
    with open(requirements_file, 'r') as f:
        requirements = [
            line.split('#', 1)[0].strip()
            for line in f
            if line.strip() and not line.startswith('#')
            and not line.startswith('python') and not line.startswith('pytest')
        ]

setup(
    name='dominion',
    version='1.0.0',
    description='Exact domination numbers of 2-designs and checks of their bounds',
    long_description=long_description,
    long_description_content_type='text/markdown',
    author='dominion developers',
    author_email='',
    packages=['src'] + ['src.' + p for p in find_packages(where='src')],
    py_modules=['main'],
    include_package_data=True,
    install_requires=requirements,
    extras_require={'test': ['pytest>=8.0.0']},
    python_requires='>=3.10',
    entry_points={
        'console_scripts': [
            'dominion=main:main',
        ],
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering :: Mathematics',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        'Operating System :: OS Independent',
    ],
    keywords='combinatorics block design domination incidence graph',
)
