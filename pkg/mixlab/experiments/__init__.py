from .base import Experiment  # noqa: F401
from .charts import ChartValidate
from .dissipation import DissipationSweep
from .dissipation import ThmMainProtocol
from .dissipation import VanishingGap
from .mixing import EnvelopeScan
from .mixing import MixingDecay
from .periods import BetaExponent
from .periods import PeriodTable

EXPERIMENTS = {
    experiment.name: experiment
    for experiment in (
        PeriodTable,
        ChartValidate,
        MixingDecay,
        DissipationSweep,
        ThmMainProtocol,
        EnvelopeScan,
        VanishingGap,
        BetaExponent,
    )
}
