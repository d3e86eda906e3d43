"""L1-regularised logistic regression votes.

Ten independent fits of the full regularisation path, each picking its
penalty by the cross-validated one-standard-error rule; features are
ranked by how often they carry a nonzero coefficient across the runs.
"""

from __future__ import annotations

import numpy as np

from ..errors import NoConvergence
from ..validation import check_two_classes
from .base import BaseSelector


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd = np.where(sd == 0.0, 1.0, sd)
    return (X - mu) / sd, mu, sd


def lambda_max(Xs: np.ndarray, y: np.ndarray) -> float:
    """Smallest penalty at which every coefficient is zero."""
    n = Xs.shape[0]
    resid = y.astype(np.float64) - y.mean()
    lam = float(np.abs(Xs.T @ resid).max() / n)
    return max(lam, 1e-12)


def lambda_grid(Xs: np.ndarray, y: np.ndarray, n_lambdas: int, decades: float) -> np.ndarray:
    lam = lambda_max(Xs, y)
    return np.geomspace(lam, lam * 10.0 ** (-decades), n_lambdas)


def _soft(z: float, lam: float) -> float:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


class _SweepBudget:
    def __init__(self, cap: int, run: int):
        self.left = cap
        self.run = run

    def spend(self) -> None:
        if self.left <= 0:
            raise NoConvergence(self.run)
        self.left -= 1


_MIN_WEIGHT = 1e-5  # IRLS weight floor, keeps working responses finite


def _wls_cycle(Xs, beta, state, lam, coords) -> float:
    """One cyclic CD pass over `coords` of the penalised weighted least
    squares subproblem; maintains the working residual in place."""
    resid = state["resid"]  # z - b0 - Xs @ beta
    inv_n = state["inv_n"]
    wX = state["wX"]
    wxx = state["wxx"]
    max_delta = 0.0
    for j in coords:
        rho = wX[:, j] @ resid * inv_n + wxx[j] * beta[j]
        if rho > lam:
            new = (rho - lam) / wxx[j]
        elif rho < -lam:
            new = (rho + lam) / wxx[j]
        else:
            new = 0.0
        delta = new - beta[j]
        if delta != 0.0:
            resid -= delta * Xs[:, j]
            beta[j] = new
            if -delta > max_delta or delta > max_delta:
                max_delta = abs(delta)
    return max_delta


_LOOSE_TOL = 1e-4  # inner tolerance while IRLS weights are still moving


def _irls_solve(Xs, yf, beta, b0, lam, inner_tol, outer_tol, budget) -> float:
    """IRLS + active-set CD for one lambda; mutates beta, returns b0."""
    n = Xs.shape[0]
    while True:
        eta = b0 + Xs @ beta
        # clip saturated probabilities so working responses stay bounded
        p = np.clip(_sigmoid(eta), _MIN_WEIGHT, 1.0 - _MIN_WEIGHT)
        w = np.maximum(p * (1.0 - p), _MIN_WEIGHT)
        z = eta + (yf - p) / w
        resid = z - eta
        w_sum = float(w.sum())
        wX = np.asfortranarray(Xs * w[:, None])
        state = {
            "resid": resid,
            "inv_n": 1.0 / n,
            "wX": wX,
            "wxx": np.maximum((w @ (Xs * Xs)) / n, 1e-12),
        }
        outer_before = beta.copy()

        d0 = float(w @ resid) / w_sum
        b0 += d0
        resid -= d0
        while True:  # converge the active set, then screen for newcomers
            while True:
                coords = np.flatnonzero(beta != 0.0).tolist()
                if not coords:
                    break
                budget.spend()
                delta = _wls_cycle(Xs, beta, state, lam, coords)
                d0 = float(w @ resid) / w_sum
                b0 += d0
                resid -= d0
                if max(delta, abs(d0)) < inner_tol:
                    break
            budget.spend()
            rho = (wX.T @ resid) / n + state["wxx"] * beta
            violators = (np.abs(rho) > lam) & (beta == 0.0)
            if not violators.any():
                break
            moved = _wls_cycle(Xs, beta, state, lam, np.flatnonzero(violators).tolist())
            if moved < inner_tol:
                break  # boundary coordinates whose activation is below tolerance
        if float(np.abs(beta - outer_before).max(initial=0.0)) < outer_tol:
            return b0


def fit_lasso_path(
    Xs: np.ndarray,
    y: np.ndarray,
    lambdas: np.ndarray,
    max_sweeps: int = 10_000,
    tol: float = 1e-7,
    run: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients along a descending lambda grid, warm-started.

    Outer IRLS re-weighting around the current estimate; inner cyclic
    coordinate descent over the active set with a vectorised KKT screen
    deciding which coordinates join it. Solutions are polished to `tol`
    on max coefficient change after a loose first phase. Raises
    NoConvergence when the total sweep cap is exhausted.
    """
    Xs = np.asfortranarray(Xs)
    n, f = Xs.shape
    yf = y.astype(np.float64)
    p_hat = min(max(yf.mean(), 0.5 / n), 1.0 - 0.5 / n)
    beta = np.zeros(f)
    b0 = float(np.log(p_hat / (1.0 - p_hat)))
    sign = 2.0 * yf - 1.0
    null_deviance = 2.0 * float(np.mean(np.logaddexp(0.0, -sign * b0)))

    budget = _SweepBudget(max_sweeps, run)
    betas = np.empty((lambdas.shape[0], f))
    intercepts = np.empty(lambdas.shape[0])
    previous_deviance = null_deviance
    for li, lam in enumerate(lambdas):
        loose = max(tol, _LOOSE_TOL)
        if loose > tol:
            b0 = _irls_solve(Xs, yf, beta, b0, lam, loose, loose, budget)
        b0 = _irls_solve(Xs, yf, beta, b0, lam, tol, max(tol, 1e-9), budget)
        betas[li] = beta
        intercepts[li] = b0
        # freeze the remaining path once the fit saturates or stops
        # improving; the (near-)separable tail otherwise burns the sweep
        # budget chasing diverging coefficients
        deviance = 2.0 * float(np.mean(np.logaddexp(0.0, -sign * (b0 + Xs @ beta))))
        saturated = deviance < 1e-3 * null_deviance
        stalled = (beta != 0.0).any() and previous_deviance - deviance < 1e-5 * null_deviance
        previous_deviance = deviance
        if saturated or stalled:
            betas[li + 1:] = beta
            intercepts[li + 1:] = b0
            break
    return betas, intercepts


def _deviance(eta: np.ndarray, y: np.ndarray) -> float:
    sign = 2.0 * y.astype(np.float64) - 1.0
    return 2.0 * float(np.mean(np.logaddexp(0.0, -sign * eta)))


def _one_se_lambda_index(cv_mean: np.ndarray, cv_per_fold: np.ndarray) -> int:
    """Largest lambda with mean CV deviance within one SE of the minimum."""
    best = int(np.argmin(cv_mean))
    se = float(np.std(cv_per_fold[:, best], ddof=1)) / np.sqrt(cv_per_fold.shape[0])
    within = np.flatnonzero(cv_mean <= cv_mean[best] + se)
    return int(within[0])  # grid is descending, so first index = largest lambda


class LassoVoteSelector(BaseSelector):
    """Vote aggregation over repeated lambda.1se LASSO fits.

    Every run cross-validates the penalty with seeded folds, refits the
    path on all provided rows and votes for the features with nonzero
    coefficients at the chosen penalty. Features are ranked by (votes,
    mean |coefficient|, index) and the top k win. Scores are the vote
    counts.
    """

    def __init__(self, k=10, seed=0, runs=10, n_lambdas=50, decades=2.0, folds=5,
                 max_sweeps=10_000, tol=1e-7):
        self.k = k
        self.seed = seed
        self.runs = runs
        self.n_lambdas = n_lambdas
        self.decades = decades
        self.folds = folds
        self.max_sweeps = max_sweeps
        self.tol = tol

    def _fit(self, X, y):
        check_two_classes(y)
        n, f = X.shape
        votes = np.zeros(f)
        coef_sums = np.zeros(f)

        # the grid and the full-data path are identical across runs;
        # only the seeded folds (hence the chosen lambda) vary
        Xs_full, _, _ = _standardize(X)
        grid = lambda_grid(Xs_full, y, self.n_lambdas, self.decades)
        betas_full, _ = fit_lasso_path(Xs_full, y, grid, self.max_sweeps, self.tol, 0)

        for run in range(self.runs):
            rng = np.random.default_rng([self.seed, run])
            perm = rng.permutation(n)
            folds = np.array_split(perm, self.folds)

            cv = np.empty((self.folds, grid.shape[0]))
            for fi, held in enumerate(folds):
                train = np.setdiff1d(perm, held)
                Xs_tr, mu_tr, sd_tr = _standardize(X[train])
                betas, intercepts = fit_lasso_path(
                    Xs_tr, y[train], grid, self.max_sweeps, self.tol, run
                )
                Xs_te = (X[held] - mu_tr) / sd_tr
                eta = intercepts[:, None] + betas @ Xs_te.T  # (L, n_held)
                cv[fi] = [_deviance(eta[li], y[held]) for li in range(grid.shape[0])]

            chosen = _one_se_lambda_index(cv.mean(axis=0), cv)
            active = betas_full[chosen] != 0.0
            votes[active] += 1.0
            coef_sums[active] += np.abs(betas_full[chosen][active])

        with np.errstate(invalid="ignore"):
            mean_coef = np.where(votes > 0, coef_sums / np.maximum(votes, 1.0), 0.0)
        order = np.lexsort((np.arange(f), -mean_coef, -votes))[: min(self.k, f)]
        self.selected_ = [int(j) for j in order]
        self.scores_ = [float(votes[j]) for j in order]
