"""scikit-learn style wrappers around the tests.

Detectors are stateless classifiers over graphs: ``predict`` maps a sequence
of graphs to decisions in {0, 1} and ``decision_function`` returns the
statistic minus the threshold. ``fit`` only validates the parameters, so
the estimators work with ``clone``, ``get_params`` and ``set_params``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import InvalidArgumentError
from .graphs import Graph
from .sdp import SdpParams, sdp_test
from .spectral import DETECTION_CONSTANT, identify, spectral_test
from .stats import exhaustive_test
from .validation import check_graph, check_int, check_probability


def as_graph_list(X) -> list:
    """Accept one graph, a sequence of graphs, or adjacency matrices (2-D or stacked 3-D)."""
    if isinstance(X, Graph):
        return [X]
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            return [Graph.from_adjacency(X)]
        if X.ndim == 3:
            return [Graph.from_adjacency(A) for A in X]
        raise InvalidArgumentError(f"adjacency input must be 2-D or 3-D, got {X.ndim}-D")
    try:
        items = list(X)
    except TypeError:
        raise InvalidArgumentError(f"cannot interpret {type(X).__name__} as graphs") from None
    return [g if isinstance(g, Graph) else Graph.from_adjacency(np.asarray(g)) for g in items]


class _Detector(ClassifierMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses implement ``_outcome``."""

    def _validate(self):
        pass

    def fit(self, X=None, y=None):
        """Validate parameters; no data is learned."""
        self._validate()
        self.classes_ = np.array([0, 1])
        return self

    def outcomes(self, X) -> list:
        check_is_fitted(self, "classes_")
        return [self._outcome(G) for G in as_graph_list(X)]

    def predict(self, X) -> np.ndarray:
        return np.array([o.decision for o in self.outcomes(X)], dtype=np.int64)

    def decision_function(self, X) -> np.ndarray:
        return np.array([o.statistic - o.threshold for o in self.outcomes(X)])


class SpectralDetector(_Detector):
    """Top eigenvalue of the shifted adjacency against ``constant * sigma(q0) * sqrt(n)``."""

    def __init__(self, q0=0.5, constant=DETECTION_CONSTANT, tol=1e-8, method="auto"):
        self.q0 = q0
        self.constant = constant
        self.tol = tol
        self.method = method

    def _validate(self):
        check_probability(self.q0, low_open=True, high_open=True)

    def _outcome(self, G):
        return spectral_test(G, self.q0, tol=self.tol, method=self.method, constant=self.constant)


class ExhaustiveDetector(_Detector):
    """Search for a copy of the densest part of ``H``."""

    def __init__(self, H=None, q0=0.5, budget=10**8):
        self.H = H
        self.q0 = q0
        self.budget = budget

    def _validate(self):
        check_graph(self.H, "H", nonempty=True)
        check_probability(self.q0, low_open=True)
        check_int(self.budget, "budget", minimum=1)

    def _outcome(self, G):
        return exhaustive_test(G, self.H, self.q0, budget=self.budget)


class SdpDetector(_Detector):
    """Relaxation value against ``2 e(H)`` minus a relative slack."""

    def __init__(self, H=None, slack_rel=1e-3, tol=1e-5, max_iter=20_000, rho=1.0, route="auto"):
        self.H = H
        self.slack_rel = slack_rel
        self.tol = tol
        self.max_iter = max_iter
        self.rho = rho
        self.route = route

    def _params(self):
        return SdpParams(rho=self.rho, tol=self.tol, max_iter=self.max_iter,
                         slack_rel=self.slack_rel, route=self.route)

    def _validate(self):
        check_graph(self.H, "H", nonempty=True)
        self._params()

    def _outcome(self, G):
        return sdp_test(G, self.H, self._params())


class SpectralIdentifier(BaseEstimator):
    """Leave-one-out spectral identification of the planted vertices.

    ``fit(G)`` stores ``result_``, ``selected_`` and ``scores_``;
    ``predict(G)`` returns a 0/1 membership vector over the vertices of ``G``.
    """

    def __init__(self, q0=0.1, k=10, refine_eps=None, method="secular", tol=1e-6):
        self.q0 = q0
        self.k = k
        self.refine_eps = refine_eps
        self.method = method
        self.tol = tol

    def _run(self, G):
        check_probability(self.q0, high_open=True)
        check_int(self.k, "k", minimum=1)
        return identify(G, self.q0, self.k, method=self.method, tol=self.tol,
                        refine_eps=self.refine_eps)

    def fit(self, X, y=None):
        (G,) = as_graph_list(X)
        self.result_ = self._run(G)
        self.selected_ = np.array(self.result_.selected, dtype=np.int64)
        self.scores_ = self.result_.scores
        self._fitted_graph = G
        return self

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "result_")
        (G,) = as_graph_list(X)
        res = self.result_ if G == self._fitted_graph else self._run(G)
        chosen = res.refined if (self.refine_eps is not None and res.refined is not None) else res.selected
        out = np.zeros(G.n, dtype=np.int64)
        out[list(chosen)] = 1
        return out

    def fit_predict(self, X, y=None) -> np.ndarray:
        return self.fit(X).predict(X)
