from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

FAMILIES = ("mlp", "debias", "ddc", "vfae", "lfr", "binary_mi", "det_binary_mi")

# family -> settings keys it understands (with defaults)
FAMILY_SETTINGS = {
    "mlp": {},
    "debias": {"adversary_widths": [8]},
    "ddc": {"mmd_bandwidth": None},
    "vfae": {"decoder_widths": None, "mmd_bandwidth": None},
    "lfr": {"recon_weight": 0.1},
    "binary_mi": {},
    "det_binary_mi": {},
}

STOCHASTIC = {"vfae": "sampled", "binary_mi": "sampled"}


class SpecError(ValueError):
    pass


@dataclass
class ModelSpec:
    """Architecture and optimization settings for one model family.

    For ``lfr`` the representation width is the prototype count and
    ``encoder_widths`` must be empty; for the binary families it is the
    width of the binary layer.
    """

    family: str
    encoder_widths: tuple = (16,)
    rep_width: int = 8
    activation: str = "tanh"
    settings: dict = field(default_factory=dict)
    optimizer: str = "adam"
    lr: float = 0.01
    epochs: int = 30
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise SpecError(f"unknown model family {self.family!r}")
        self.encoder_widths = tuple(int(w) for w in self.encoder_widths)
        if self.rep_width < 1:
            raise SpecError("representation width must be at least 1")
        if any(w < 1 for w in self.encoder_widths):
            raise SpecError("encoder widths must be positive")
        if self.activation not in ("tanh", "relu"):
            raise SpecError(f"activation must be tanh or relu, got {self.activation!r}")
        if self.optimizer not in ("adam", "sgd"):
            raise SpecError(f"unknown optimizer {self.optimizer!r}")
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0:
            raise SpecError("epochs >= 0, batch_size >= 1 and lr > 0 are required")
        allowed = FAMILY_SETTINGS[self.family]
        unknown = set(self.settings) - set(allowed)
        if unknown:
            raise SpecError(f"family {self.family!r} does not use settings {sorted(unknown)}")
        if self.family == "lfr" and self.encoder_widths:
            raise SpecError("lfr has no encoder layers; set encoder_widths to []")
        merged = dict(allowed)
        merged.update(self.settings)
        self.settings = merged

    def setting(self, key):
        return self.settings[key]

    def to_dict(self):
        d = asdict(self)
        d["encoder_widths"] = list(self.encoder_widths)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def with_params(self, **overrides):
        """Copy with top-level fields or family settings replaced by name."""
        d = self.to_dict()
        settings = dict(d.pop("settings"))
        for key, value in overrides.items():
            if key in d:
                d[key] = value
            else:
                settings[key] = value
        return ModelSpec(settings=settings, **d)


@dataclass
class TrainedModel:
    spec: ModelSpec
    params: dict
    gamma: float
    n_features: int
    loss_trace: list = field(default_factory=list)  # per epoch (L_class, L_fair)

    @property
    def extraction_mode(self):
        if self.spec.family == "det_binary_mi":
            return "hard-threshold"
        return STOCHASTIC.get(self.spec.family, "deterministic")


@dataclass
class Representation:
    train_Z: np.ndarray
    test_Z: np.ndarray
    family: str
    fold: int
    gamma: float
    mode: str
    seed: int = None
