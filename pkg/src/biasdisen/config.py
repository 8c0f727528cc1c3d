"""Training configuration and per-dataset presets."""

from dataclasses import asdict, dataclass, replace

from .errors import ValidationError
from .model import ABLATIONS

SELECTION_RULES = ("acc_minus_fair", "acc", "last")


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 0
    epochs: int = 1000
    hidden: int = 16
    k: int = 40
    alpha: float = 1.0
    beta: float = 0.0003
    lr_attr: float = 0.001
    lr_stru: float = 0.0003
    lr_pot: float = 0.003
    weight_decay: float = 1e-5
    alpha_prop: float = 0.5
    hops: int = 2
    gamma: float = 0.5
    ablation: str = "none"
    selection: str = "acc_minus_fair"
    eval_every: int = 10
    bco_clamp: float = None
    lr_baseline: float = 0.01
    baseline_selection: str = "acc"
    dataset: str = ""

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError(f"epochs must be at least 1, got {self.epochs}")
        if self.k < 1:
            raise ValidationError(f"k must be at least 1, got {self.k}")
        if self.hidden < 1 or self.eval_every < 1:
            raise ValidationError("hidden and eval_every must be positive")
        for name in ("lr_attr", "lr_stru", "lr_pot", "lr_baseline"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        if self.alpha < 0 or self.beta < 0 or self.weight_decay < 0:
            raise ValidationError("alpha, beta and weight_decay must be non-negative")
        if self.ablation not in ABLATIONS:
            raise ValidationError(f"unknown ablation {self.ablation!r}; choose from {sorted(ABLATIONS)}")
        for name in ("selection", "baseline_selection"):
            if getattr(self, name) not in SELECTION_RULES:
                raise ValidationError(f"unknown {name} {getattr(self, name)!r}; choose from {SELECTION_RULES}")
        if self.bco_clamp is not None and not self.bco_clamp > 0:
            raise ValidationError("bco_clamp must be positive when set")

    def to_dict(self):
        return asdict(self)

    def with_(self, **changes):
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


PRESETS = {
    "nba": dict(k=40, alpha=1.0, beta=0.0003, lr_pot=0.0005),
    "recidivism": dict(k=1, alpha=1.0, beta=0.0005, lr_pot=0.003),
    "credit": dict(k=8, alpha=15.0, beta=0.0095, lr_pot=0.003),
    "pokec_n": dict(k=100, alpha=1.0, beta=0.005, lr_pot=0.003),
    "pokec_z": dict(k=100, alpha=100.0, beta=0.0003, lr_pot=0.003),
}


def preset(name, **overrides):
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return TrainConfig(dataset=name, **PRESETS[name]).with_(**overrides)
