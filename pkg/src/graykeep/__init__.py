"""Reversible data hiding in RGB images that leaves the grayscale unchanged."""
from .baselines import hou_embed_unit, li_embed_unit_R, run_scheme
from .classifier import RegionClass, classify, delta
from .codec import Scheme, decode, decode_full, encode, select_thresholds
from .errors import (CapacityError, CorruptStreamError, GraykeepError, ImageFormatError,
                     ImageTooSmallError)
from .estimator import GrayInvariantEmbedder
from .expansion import (adjust_green, compute_ecb, embed_unit_R, extract_unit_R,
                        recover_green)
from .image_core import load_image, save_image, to_gray
from .locmap import compress, decompress
from .metrics import QualityReport, invariance_report, mse, psnr, ued
from .payload import random_bits, read_payload, write_payload
from .predictors import Context9, PredictionPair, agsp_predict, med_predict, predict_pair

__version__ = "0.1.0"
