"""scikit-learn style front end for the grayscale-invariant codec."""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import codec
from .errors import CapacityError
from .image_core import check_color_image
from .payload import as_bits


class GrayInvariantEmbedder(TransformerMixin, BaseEstimator):
    """Hide a bit string in an RGB image without changing its grayscale.

    ``fit(X, y)`` takes the cover image ``X`` and the secret bits ``y`` and
    settles the thresholds; ``transform`` returns the marked image and
    ``inverse_transform`` restores the cover from a marked image. Use
    :meth:`extract` to read the secret back.

    Parameters
    ----------
    method : {"proposed", "hou", "li"}
    t1, t2 : int or None
        Classification thresholds; searched when either is None.
    target_bits : int or None
        Capacity the threshold search plans for (default: len(y)).
    """

    def __init__(self, method="proposed", t1=None, t2=None, target_bits=None):
        self.method = method
        self.t1 = t1
        self.t2 = t2
        self.target_bits = target_bits

    def fit(self, X, y=None):
        X = check_color_image(X)
        self.secret_ = as_bits(y)
        target = len(self.secret_) if self.target_bits is None else int(self.target_bits)
        if self.t1 is not None and self.t2 is not None:
            self.t1_, self.t2_ = int(self.t1), int(self.t2)
        else:
            self.t1_, self.t2_ = codec.select_thresholds(
                X, target, scheme=self.method, secret=self.secret_)
        self.n_features_in_ = X.shape[-1]
        return self

    def transform(self, X):
        check_is_fitted(self, "secret_")
        try:
            marked, self.report_ = codec.encode(
                X, self.secret_, t1=self.t1_, t2=self.t2_, scheme=self.method)
        except CapacityError:
            if self.t1 is not None and self.t2 is not None:
                raise
            # the fitted pair came up short once the location map was added
            marked, self.report_ = codec.encode(
                X, self.secret_, scheme=self.method, target_bits=self.target_bits)
            self.t1_, self.t2_ = self.report_.t1, self.report_.t2
        return marked

    def inverse_transform(self, X):
        return codec.decode(X, scheme=self.method)[0]

    def extract(self, X):
        """Secret bits carried by the marked image ``X``."""
        return codec.decode(X, scheme=self.method)[1]
