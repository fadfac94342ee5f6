"""Generalized Moisil-Teodorescu systems in psi-hyperholomorphic form.

Complex-quaternion algebra, the angle family of structural sets, the
associated Cauchy-Riemann operators, boundary integral transforms on
triangulated surfaces and the interior/exterior decomposition of boundary
vector fields.
"""

__version__ = "0.1.0"

from .geometry import TetrahedralMesh, TriangulatedSurface, load_off, load_tet, make_ellipsoid, make_sphere
from .kernels import available_backends, set_backend
from .operators import ANALYTIC, DerivativeScheme, apply_Dpsi, apply_psiD, mt_residual, special_case_map
from .quaternion import conj, norm_c, norm_r, qmul, quat
from .reconstruction import ExtensionParams, MembershipFailed, decompose
from .structural import StructuralSet, make_psi_theta, parse_theta
from .transforms import (
    BoundaryField,
    borel_pompeiu_residual,
    boundary_limit,
    cauchy_transform,
    jump_check,
    m_psi_star_test,
    m_psi_test,
    singular_cauchy,
    teodorescu,
)

__all__ = [
    "ANALYTIC",
    "BoundaryField",
    "DerivativeScheme",
    "ExtensionParams",
    "MembershipFailed",
    "StructuralSet",
    "TetrahedralMesh",
    "TriangulatedSurface",
    "__version__",
    "apply_Dpsi",
    "apply_psiD",
    "available_backends",
    "borel_pompeiu_residual",
    "boundary_limit",
    "cauchy_transform",
    "conj",
    "decompose",
    "jump_check",
    "load_off",
    "load_tet",
    "m_psi_star_test",
    "m_psi_test",
    "make_ellipsoid",
    "make_psi_theta",
    "make_sphere",
    "mt_residual",
    "norm_c",
    "norm_r",
    "parse_theta",
    "qmul",
    "quat",
    "set_backend",
    "singular_cauchy",
    "special_case_map",
    "teodorescu",
]
