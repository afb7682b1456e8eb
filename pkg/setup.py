import os
from setuptools import setup, find_packages

setup(
    name="segmentkit",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        line.strip() for line in open("requirements.txt") if line.strip() and not line.startswith("#")
    ],
    extras_require={
        "test": ["pytest==8.4.2"],
    },
    python_requires=">=3.10",
    description="Exact segmentation of 1D signals with the Mumford-Shah / Blake-Zisserman / Potts family",
    long_description=open("README.md").read(
    ) if os.path.exists("README.md") else "",
    long_description_content_type="text/markdown",
    entry_points={
        "console_scripts": [
            "segmentkit = segmentkit.cli:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "Operating System :: OS Independent",
    ],
    include_package_data=True,
)
