from setuptools import setup

setup(
    name="hardy-semigroup-lab",
    version="0.1",
    packages=["texts"],
    py_modules=[
        "classifier",
        "cli",
        "errors",
        "evolution",
        "factory_profiles",
        "inequality_lab",
        "lab_config",
        "lab_constants",
        "params_core",
        "radial_toolkit",
        "sharpness_oracle",
        "utils",
    ],
    install_requires=[
        "numpy",
        "scipy",
        "pydantic>=2",
        "python-dotenv",
        "colorama"
    ],
    entry_points={"console_scripts": ["hardy-lab=cli:main"]},
)
