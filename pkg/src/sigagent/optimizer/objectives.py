"""Built-in objectives selectable by name."""

from __future__ import annotations

import numpy as np

from .core import Objective
from .space import Dimension, ParamSpace


def sphere(dim: int = 3, bound: float = 1.0) -> Objective:
    space = ParamSpace([Dimension(f"x{i + 1}", -bound, bound) for i in range(dim)])
    return Objective("sphere", space, lambda x: -float(np.sum(x * x)),
                     f"maximise the negated sphere function -sum(x^2) over {dim} dimensions")


def rastrigin(dim: int = 3, bound: float = 5.12) -> Objective:
    space = ParamSpace([Dimension(f"x{i + 1}", -bound, bound) for i in range(dim)])

    def f(x):
        return -float(10 * len(x) + np.sum(x * x - 10 * np.cos(2 * np.pi * x)))

    return Objective("rastrigin", space, f, f"maximise the negated Rastrigin function over {dim} dimensions")


BUILTIN = {"sphere": sphere, "rastrigin": rastrigin}


def get_objective(name: str, **kw) -> Objective:
    if name == "detection":
        from ..detector import detection_objective_from_scene
        return detection_objective_from_scene(**kw)
    try:
        return BUILTIN[name](**kw)
    except KeyError:
        raise KeyError(f"unknown objective {name!r}; choose from {sorted(BUILTIN) + ['detection']}") from None
