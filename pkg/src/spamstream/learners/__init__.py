"""Online linear learners: eight first-order and eight Gaussian (second-order) rules."""

from .models import (
    ALGORITHMS,
    DEFAULTS,
    FIRST_ORDER,
    SECOND_ORDER,
    AlgorithmSpec,
    CovarianceDegenerate,
    FirstOrderModel,
    GaussianModelState,
    UnknownAlgorithm,
    UpdateOutcome,
    hinge_loss,
    init_model,
    predict,
)
from .probit import probit
from .updates import update


class Learner:
    """A spec and its model state bundled together."""

    def __init__(self, spec: AlgorithmSpec | str, dim: int) -> None:
        self.spec = spec if isinstance(spec, AlgorithmSpec) else AlgorithmSpec(spec)
        self.model = init_model(self.spec, dim)

    def predict(self, x) -> tuple[int, float]:
        return predict(self.model, x)

    def update(self, x, y: int) -> UpdateOutcome:
        return update(self.model, self.spec, x, y)

    def __repr__(self) -> str:
        return f"Learner({self.spec.name!r}, dim={self.model.dim}, steps={self.model.step_count})"


__all__ = [
    "ALGORITHMS", "DEFAULTS", "FIRST_ORDER", "SECOND_ORDER", "AlgorithmSpec", "CovarianceDegenerate",
    "FirstOrderModel", "GaussianModelState", "Learner", "UnknownAlgorithm", "UpdateOutcome",
    "hinge_loss", "init_model", "predict", "probit", "update",
]
