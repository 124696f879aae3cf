from .server import EdgeServer  # noqa: F401
from .simulator import SessionLog, run_robot_simulator  # noqa: F401
