import os
import re

from setuptools import setup

here = os.path.dirname(os.path.abspath(__file__))

with open(os.path.join(here, "simident", "__init__.py"), "r") as fin:
    metadata = dict(re.findall(r'^(__\w+__) = "([^"]*)"$', fin.read(), re.MULTILINE))

with open(os.path.join(here, "README.md"), "r") as fin:
    __long_description__ = fin.read()

setup(
    name=metadata["__package_name__"],
    version=metadata["__version__"],
    author=metadata["__author__"],
    author_email=metadata["__email__"],
    license="MIT",
    description=metadata["__description__"],
    long_description=__long_description__,
    long_description_content_type="text/markdown",
    packages=[metadata["__package_name__"]],
    package_data={metadata["__package_name__"]: ["py.typed"]},
    python_requires=">=3.8",
    install_requires=["networkx>=2.6", "numpy>=1.21"],
    entry_points={"console_scripts": ["simident = simident.cli:main"]},
    extras_require={
        "dev": ["flake8", "pytest", "black", "mypy", "tox", "isort", "types-networkx"],
        "docs": [
            "mkdocs",
            "mkdocs-material",
            "markdown-include",
            "mkdocs-include-markdown-plugin",
            "mkdocs-macros-plugin",
        ],
    },
)
