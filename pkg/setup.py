from setuptools import setup

VERSION = "2026.10.0"

setup(
    version=VERSION,
)
