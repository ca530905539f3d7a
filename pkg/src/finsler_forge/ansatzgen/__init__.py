"""Exact-solution generators and separated field-equation residuals."""

from finsler_forge.ansatzgen.cosmo4d import CosmoRecipe
from finsler_forge.ansatzgen.cosmo4d import Polarizations
from finsler_forge.ansatzgen.cosmo4d import generate_4d_cosmo
from finsler_forge.ansatzgen.cosmo4d import polarizations
from finsler_forge.ansatzgen.cosmo4d import prime_4d
from finsler_forge.ansatzgen.eight import FansParams
from finsler_forge.ansatzgen.eight import SolitonicCoefficients
from finsler_forge.ansatzgen.eight import conformal_base
from finsler_forge.ansatzgen.eight import diagonal_fans
from finsler_forge.ansatzgen.eight import fans_shell
from finsler_forge.ansatzgen.eight import fans_source
from finsler_forge.ansatzgen.eight import generate_8d_solitonic
from finsler_forge.ansatzgen.eight import generate_three_shell
from finsler_forge.ansatzgen.eight import residuals_8d
from finsler_forge.ansatzgen.generators import generate_canonical
from finsler_forge.ansatzgen.generators import generate_sol1
from finsler_forge.ansatzgen.psi import Grid
from finsler_forge.ansatzgen.psi import PsiSolution
from finsler_forge.ansatzgen.psi import solve_psi
from finsler_forge.ansatzgen.recipes import ResidualReport
from finsler_forge.ansatzgen.recipes import ShellRecipe
from finsler_forge.ansatzgen.recipes import SolutionRecipe
from finsler_forge.ansatzgen.recipes import Source
from finsler_forge.ansatzgen.separated import residuals_generic
from finsler_forge.ansatzgen.separated import residuals_separated

__all__: list[str] = [
    "CosmoRecipe",
    "FansParams",
    "Grid",
    "Polarizations",
    "PsiSolution",
    "ResidualReport",
    "ShellRecipe",
    "SolitonicCoefficients",
    "SolutionRecipe",
    "Source",
    "conformal_base",
    "diagonal_fans",
    "fans_shell",
    "fans_source",
    "generate_4d_cosmo",
    "generate_8d_solitonic",
    "generate_canonical",
    "generate_sol1",
    "generate_three_shell",
    "polarizations",
    "prime_4d",
    "residuals_8d",
    "residuals_generic",
    "residuals_separated",
    "solve_psi",
]
