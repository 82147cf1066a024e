"""Masked-LM scoring service and biased fine-tuning."""

from lm_service.config import ServiceConfig
from lm_service.model import MaskedLanguageModel, ModelError

__all__ = ["MaskedLanguageModel", "ModelError", "ServiceConfig"]
