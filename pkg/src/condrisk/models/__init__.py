from .base import FAMILIES, ModelSpec, Predictor, TrainReport, fit, gradient_check
from .io import load_predictor, save_predictor
from .forest import warm_up as warm_up_forest
