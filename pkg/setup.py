from setuptools import find_packages, setup

# PEP0440 compatible formatted version, see:
# https://www.python.org/dev/peps/pep-0440/
#
# release markers:
#   X.Y
#   X.Y.Z   # For bugfix releases
#
# pre-release markers:
#   X.YaN   # Alpha release
#   X.YbN   # Beta release
#   X.YrcN  # Release Candidate
#   X.Y     # Final release

setup(
    name="eeg-probe",
    version="1.0rc1",
    description="What do EEG encoders learn? Preprocessing, triplet training, clustering probes, region and "
                "timestep ablations, conditioning vectors and video metrics.",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Intended Audience :: Science/Research",
        "Development Status :: 3 - Alpha",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Medical Science Apps.",
    ],
    license="MIT",
    packages=find_packages(
        exclude=[
            "*.tests",
            "*.tests.*",
            "tests.*",
            "tests",
        ]
    ),
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.6",
        "pandas",
        "hydra-core>=1.1",
        "omegaconf>=2.1",
        "joblib",
        "Pillow",
    ],
    extras_require={"test": ["pytest"]},
    entry_points={"console_scripts": ["eeg-probe=eeg_probe.main:main"]},
    python_requires=">=3.8",
)
