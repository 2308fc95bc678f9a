# src/problems/__init__.py

"""
Benchmark Problems Package
--------------------------
One class per benchmark, registered under the identifier used in configs.
"""

from typing import Dict, Type, Union

from .allen_cahn import AllenCahnDt, allen_cahn_reference
from .burgers import BurgersCt, BurgersDt, burgers_reference
from .schrodinger import SchrodingerCt, nls_reference
from ..continuous_time import CtProblem
from ..discrete_time import DtProblem

CT_PROBLEMS: Dict[str, Type[CtProblem]] = {
    "burgers-ct": BurgersCt,
    "nls-ct": SchrodingerCt,
}

DT_PROBLEMS: Dict[str, Type[DtProblem]] = {
    "burgers-dt": BurgersDt,
    "allen-cahn-dt": AllenCahnDt,
}

PROBLEM_IDS = tuple(CT_PROBLEMS) + tuple(DT_PROBLEMS)

REFERENCES = {
    "burgers-ct": burgers_reference,
    "nls-ct": nls_reference,
    "burgers-dt": burgers_reference,
    "allen-cahn-dt": allen_cahn_reference,
}


def is_discrete(problem_id: str) -> bool:
    return problem_id in DT_PROBLEMS


def problem_class(problem_id: str) -> Union[Type[CtProblem], Type[DtProblem]]:
    """
    Looks up a problem class by identifier.

    Raises:
        KeyError: Unknown identifier.
    """
    if problem_id in CT_PROBLEMS:
        return CT_PROBLEMS[problem_id]
    if problem_id in DT_PROBLEMS:
        return DT_PROBLEMS[problem_id]
    raise KeyError(f"unknown problem '{problem_id}'; choose one of {', '.join(PROBLEM_IDS)}")


__all__ = [
    "AllenCahnDt",
    "BurgersCt",
    "BurgersDt",
    "SchrodingerCt",
    "CT_PROBLEMS",
    "DT_PROBLEMS",
    "PROBLEM_IDS",
    "REFERENCES",
    "is_discrete",
    "problem_class",
]
