"""
Named ablation presets: single-stage aggregation/SE variants, the CNN counterpart with
its augmentation baselines, and the multi-stage rows (plain recurrence, skip
concatenation, additive skip connection).
"""

from typing import Dict, NamedTuple, Optional

from ..errors import ConfigurationError
from .config import MAX_STAGES, Aggregation, Backbone, Link, ModelConfig, RefineConfig


class Variant(NamedTuple):
    refine: RefineConfig
    augment: Optional[str] = None


_P4 = ModelConfig()
_CNN = ModelConfig(backbone=Backbone.REGULAR_CNN)

VARIANTS: Dict[str, Variant] = {
    "DSEN": Variant(RefineConfig(stages=1, base=_P4)),
    "DSEN_maxpool": Variant(
        RefineConfig(stages=1, base=ModelConfig(aggregation=Aggregation.ORIENT_MAX))
    ),
    "DSEN_avgpool": Variant(
        RefineConfig(stages=1, base=ModelConfig(aggregation=Aggregation.ORIENT_AVG))
    ),
    "DSEN_w/o_SE": Variant(RefineConfig(stages=1, base=ModelConfig(use_se=False))),
    "CNN": Variant(RefineConfig(stages=1, base=_CNN)),
    "CNN+DA": Variant(RefineConfig(stages=1, base=_CNN), augment="rot_range"),
    "CNN+C4DA": Variant(RefineConfig(stages=1, base=_CNN), augment="c4"),
    "MCNN": Variant(RefineConfig(stages=MAX_STAGES, link=Link.NONE, base=_CNN)),
    "MCNN+SR": Variant(RefineConfig(stages=MAX_STAGES, link=Link.SKIP_CONCAT, base=_CNN)),
    "MDSEN": Variant(RefineConfig(stages=MAX_STAGES, link=Link.NONE, base=_P4)),
    "MDSEN+SC": Variant(RefineConfig(stages=MAX_STAGES, link=Link.SKIP_ADD, base=_P4)),
    "S-DSEN": Variant(RefineConfig(stages=MAX_STAGES, link=Link.SKIP_CONCAT, base=_P4)),
}
for _stages in (2, 4, 6):
    VARIANTS[f"S-DSEN_s{_stages}"] = Variant(
        RefineConfig(stages=_stages, link=Link.SKIP_CONCAT, base=_P4)
    )


def get_variant(name: str) -> Variant:
    try:
        return VARIANTS[name]
    except KeyError:
        choices = ", ".join(VARIANTS)
        raise ConfigurationError(f"unknown variant {name!r}; choose from {choices}") from None
