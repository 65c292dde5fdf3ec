"""Publication-style figures from commgame experiment logs.

The boundary to the training code is the file format: the checkpoint CSV
schema and the aggregate summary JSON. Nothing here imports the trainer.
"""

from .curves import CurveSpec, load_rows, mean_band, setting_curves
from .figures import plot_convergence, plot_summary_bars

__version__ = "0.1.0"
