"""Model zoo: plain MLP plus fair representation learners under the gamma tradeoff."""
from .families import REGISTRY, build
from .losses import (
    binary_mi_penalty,
    combine,
    ddc_fair_loss,
    debias_fair_loss,
    gaussian_kl,
    lfr_losses,
    prototype_memberships,
    vfae_loss,
)
from .spec import FAMILIES, ModelSpec, Representation, SpecError, TrainedModel
from .training import (
    TrainingDivergence,
    combined_loss,
    fit,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_scores,
    representations,
    save_model,
)

__all__ = [
    "FAMILIES", "ModelSpec", "REGISTRY", "Representation", "SpecError", "TrainedModel",
    "TrainingDivergence", "binary_mi_penalty", "build", "combine", "combined_loss",
    "ddc_fair_loss", "debias_fair_loss", "fit", "gaussian_kl", "lfr_losses", "load_model",
    "model_from_dict", "model_to_dict", "predict_scores", "prototype_memberships",
    "representations", "save_model", "vfae_loss",
]
