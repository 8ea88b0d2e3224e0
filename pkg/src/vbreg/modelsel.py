"""Polynomial feature maps and bound-based model selection.

Each candidate column count k expands the scalar inputs into powers
x^0 .. x^(k-1), fits the matching variational model from a cold start, and
records its converged bound. Because the bound is a lower bound on the log
model evidence, the candidate with the largest bound is selected; exact
ties resolve to the smallest candidate index (the simplest model under
ascending orders).
"""

from dataclasses import dataclass

import numpy as np

from .dataio import Dataset, LabelDataset
from .linear import fit_linear
from .logit import fit_logit

__all__ = ["CandidateResult", "polynomial_design", "select_model"]


@dataclass(frozen=True)
class CandidateResult:
    """One fitted candidate: its position, column count, bound, posterior."""

    index: int
    order: int
    bound: float
    posterior: object


def polynomial_design(x, k):
    """N x k matrix whose column j holds x^j (0^0 evaluates to 1)."""
    k = int(k)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError(f"x must be 1-D, got shape {x.shape}")
    return x[:, None] ** np.arange(k)


def select_model(x, y, orders, task, priors=None, opts=None):
    """Fit one candidate per entry of orders and pick the bound argmax.

    Returns (best_index, results) where best_index positions the winner in
    orders and results holds every CandidateResult in candidate order.
    """
    orders = list(orders)
    if not orders:
        raise ValueError("orders must be non-empty")
    if task not in ("linear", "logit"):
        raise ValueError(f"task must be 'linear' or 'logit', got {task!r}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)

    results = []
    for index, k in enumerate(orders):
        design = polynomial_design(x, k)
        names = tuple(f"x{j}" for j in range(int(k)))
        try:
            if task == "linear":
                data = Dataset(x=design, y=y, feature_names=names)
                post = fit_linear(data, priors, opts)
                bound = post.elbo
            else:
                data = LabelDataset(x=design, y=y, feature_names=names)
                post = fit_logit(data, priors, opts)
                bound = post.bound
        except Exception as exc:
            raise RuntimeError(
                f"candidate {index} (order {k}) failed: {exc}") from exc
        results.append(CandidateResult(index=index, order=int(k),
                                       bound=float(bound), posterior=post))

    bounds = np.asarray([r.bound for r in results])
    best = int(np.argmax(bounds))   # first maximum wins exact ties
    return best, results
