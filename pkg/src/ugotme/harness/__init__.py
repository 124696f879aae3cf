from .script import SessionScript, load_session, save_session  # noqa: F401
from .synth import SyntheticGenConfig, generate_synthetic_session  # noqa: F401
from .metrics import EvalReport, confusion_matrix, response_accuracy, weighted_f1  # noqa: F401
