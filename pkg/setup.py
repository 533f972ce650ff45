from setuptools import setup, find_packages

setup(
    name="qcp-teleport-detector",
    version="1.0.0",
    author="Your Name",
    description="Finite-temperature quantum critical point detection through quantum teleportation",
    packages=find_packages(exclude=["tests", "tests.*"]),
    py_modules=["main"],
    install_requires=[
        line.strip() for line in open("requirements.txt").readlines()
        if line.strip() and not line.startswith('#') and not line.startswith('pytest')
    ],
    extras_require={"test": ["pytest>=7.0.0"]},
    python_requires=">=3.8",
    entry_points={
        'console_scripts': [
            'qcp-detector=main:main',
        ]
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Physics",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
    ],
)
