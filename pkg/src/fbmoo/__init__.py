"""Dyadic grid models of fractional sparse domination and multilinear weights.

Submodules
----------
dyadic      cubes, lattices, Haar functions, good/bad classification
gridfn      grid functions, averages, Orlicz and BMO type norms
operators   fractional maximal and integral operators, shifts, paraproducts
sparse      sparse families, the stopping-time constructor, sparse operators
weights     exponent tuples, weight characteristics, factorization
verify      numerical checks producing structured reports
cli         command line front end
"""

from .dyadic import DyadicCube, Lattice, build_lattice
from .gridfn import GridFunction
from .operators import KernelSpec, ParaproductSpec, ShiftSpec
from .sparse import SparseFamily, build_sparse_cz, is_sparse
from .weights import ExponentTuple, InadmissibleExponents, WeightTuple, extrapolation_exponents
from .verify import ExperimentReport

__version__ = "0.1.0"

__all__ = [
    "DyadicCube",
    "Lattice",
    "build_lattice",
    "GridFunction",
    "KernelSpec",
    "ShiftSpec",
    "ParaproductSpec",
    "SparseFamily",
    "build_sparse_cz",
    "is_sparse",
    "ExponentTuple",
    "InadmissibleExponents",
    "WeightTuple",
    "extrapolation_exponents",
    "ExperimentReport",
]
