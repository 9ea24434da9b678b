from setuptools import find_packages, setup


with open("README.md", "r") as f:
    long_description = f.read()


setup(
    name="propen",
    version="0.1.0",
    description="Property-guided design optimization with matched reconstruction, in PyTorch",
    long_description=long_description,
    long_description_content_type="text/markdown",
    license="MIT",
    install_requires=[
        "loguru>=0.5.3",
        "numpy>=1.20.0",
        "pandas>=1.5.0",
        "torch>=1.9.0",
        "tqdm>=4.1.0",
        "typer>=0.9.0",
    ],
    packages=find_packages(exclude=["examples", "examples.*"]),
    python_requires=">=3.8",
    entry_points={"console_scripts": ["propen=scripts.cli:app"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
    ],
)
