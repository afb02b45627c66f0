from setuptools import find_packages, setup

setup(
    name="qforms",
    version="0.0.1",
    description=("Exact quasimodular forms and prime-detecting partition functions."),
    keywords=("quasimodular forms q-series partitions primes"),
    packages=find_packages(),
    install_requires=[
        "click",
        "more-itertools",
        "numpy",
        "ray",
        "sympy",
    ],
    entry_points={"console_scripts": ["qforms=qforms.cli:main"]},
)
