"""Numerical tolerances shared by all modules."""
from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Bundle of tolerances.

    Relative tolerances are scaled by ``max(1, norm)`` of the quantity being
    tested unless documented otherwise at the point of use.
    """

    herm_tol: float = 1e-10
    fact_tol: float = 1e-10
    psd_tol: float = 1e-10
    rank_tol: float = 1e-10
    res_tol: float = 1e-8
    fi_tol: float = 1e-10
    comm_tol: float = 1e-8
    unit_tol: float = 1e-8
    map_tol: float = 1e-8
    inv_tol: float = 1e-10
    eval_tol: float = 1e-8
    spec_tol: float = 1e-8
    herg_tol: float = 1e-8

    def updated(self, **overrides):
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self):
        return asdict(self)


DEFAULT = Tolerances()
