"""
Array form of a NetworkModel.

Valuations, market totals, demand and profit are evaluated with sparse
path/ISP and market/path incidence matrices. ``IspObjective`` is the profit of
one ISP as a function of a single attribute with all other entries fixed; the
numeric best-response oracle and the dynamics work on it.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import sparse

SQRT_ATTRIBUTE = "sqrt-attribute"
QUADRATIC_ATTRIBUTE = "quadratic-attribute"

# Floor used when differentiating sqrt at 0.
_SQRT_FLOOR = 1e-300

ArrayLike = Union[float, np.ndarray]


def valuation_transform(values: ArrayLike, form: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.sqrt(values) if form == SQRT_ATTRIBUTE else values


def valuation_transform_slope(values: ArrayLike, form: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if form == SQRT_ATTRIBUTE:
        return 0.5 / np.sqrt(np.maximum(values, _SQRT_FLOOR))
    return np.ones_like(values)


def cost_transform(values: ArrayLike, form: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.square(values) if form == QUADRATIC_ATTRIBUTE else values


def cost_transform_slope(values: ArrayLike, form: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return 2.0 * values if form == QUADRATIC_ATTRIBUTE else np.ones_like(values)


@dataclass(frozen=True, eq=False)
class IspObjective:
    """Profit of ISP n as a function of a_nk, restricted to the markets n serves.

    For market m with demand d_m, ``totals`` is 1 + the sum of path valuations
    without n's a_nk term, ``unshared`` the part of it on paths through n and
    ``beta`` the summed coefficient of a_nk over those paths.
    """

    demand: np.ndarray
    beta: np.ndarray
    unshared: np.ndarray
    totals: np.ndarray
    net_revenue: float
    phi: float
    gamma: float
    fixed_cost: float
    valuation_form: str
    cost_form: str

    @property
    def num_markets(self) -> int:
        return int(self.demand.size)

    def isp_demand(self, x: ArrayLike) -> ArrayLike:
        gx = valuation_transform(x, self.valuation_form)[..., None]
        share = (self.unshared + self.beta * gx) / (self.totals + self.beta * gx)
        return (self.demand * share).sum(axis=-1)

    def demand_slope(self, x: ArrayLike) -> ArrayLike:
        gx = valuation_transform(x, self.valuation_form)[..., None]
        dg = valuation_transform_slope(x, self.valuation_form)[..., None]
        outside = self.totals - self.unshared
        return (self.demand * self.beta * dg * outside / (self.totals + self.beta * gx) ** 2).sum(axis=-1)

    def value(self, x: ArrayLike) -> ArrayLike:
        hx = cost_transform(x, self.cost_form)
        return self.isp_demand(x) * (self.net_revenue - self.phi * hx) - self.gamma * hx - self.fixed_cost

    def slope(self, x: ArrayLike) -> ArrayLike:
        hx = cost_transform(x, self.cost_form)
        dh = cost_transform_slope(x, self.cost_form)
        return (self.demand_slope(x) * (self.net_revenue - self.phi * hx)
                - self.isp_demand(x) * self.phi * dh - self.gamma * dh)


@dataclass(frozen=True, eq=False)
class ModelArrays:
    """Incidence matrices and parameter vectors of a model."""

    base: np.ndarray
    alpha: Tuple[sparse.csc_matrix, ...]
    on_path: sparse.csc_matrix
    market_paths: sparse.csr_matrix
    market_paths_by_path: sparse.csc_matrix
    demand: np.ndarray
    rho: np.ndarray
    phi0: np.ndarray
    phi: np.ndarray
    gamma: np.ndarray
    gamma0: np.ndarray
    valuation_form: str
    cost_form: str

    @classmethod
    def from_model(cls, model) -> "ModelArrays":
        num_paths, num_isps, num_attributes = len(model.paths), model.num_isps, model.num_attributes
        rows, cols = [], []
        data = [[] for _ in range(num_attributes)]
        for r, path in enumerate(model.paths):
            for n, coeffs in zip(path.isps, path.coeffs):
                rows.append(r)
                cols.append(n)
                for k in range(num_attributes):
                    data[k].append(coeffs[k])
        shape = (num_paths, num_isps)
        alpha = tuple(
            sparse.csc_matrix((np.asarray(data[k], dtype=float), (rows, cols)), shape=shape)
            for k in range(num_attributes)
        )
        on_path = sparse.csc_matrix((np.ones(len(rows)), (rows, cols)), shape=shape)

        index = {p.id: r for r, p in enumerate(model.paths)}
        m_rows, m_cols = [], []
        for m, market in enumerate(model.markets):
            for path_id in market.paths:
                m_rows.append(m)
                m_cols.append(index[path_id])
        market_shape = (len(model.markets), num_paths)
        market_paths = sparse.csr_matrix((np.ones(len(m_rows)), (m_rows, m_cols)), shape=market_shape)

        return cls(
            base=np.array([p.base_valuation for p in model.paths], dtype=float),
            alpha=alpha,
            on_path=on_path,
            market_paths=market_paths,
            market_paths_by_path=market_paths.tocsc(),
            demand=np.array([m.demand_limit for m in model.markets], dtype=float),
            rho=np.array([i.rho for i in model.isps], dtype=float),
            phi0=np.array([i.phi0 for i in model.isps], dtype=float),
            phi=np.array([i.phi for i in model.isps], dtype=float).reshape(num_isps, num_attributes),
            gamma=np.array([i.gamma for i in model.isps], dtype=float).reshape(num_isps, num_attributes),
            gamma0=np.array([i.gamma0 for i in model.isps], dtype=float),
            valuation_form=model.valuation_form.value,
            cost_form=model.cost_form.value,
        )

    def valuations(self, A: np.ndarray) -> np.ndarray:
        g = valuation_transform(A, self.valuation_form)
        v = self.base.copy()
        for k, alpha_k in enumerate(self.alpha):
            v += alpha_k @ g[:, k]
        return v

    def market_totals(self, v: np.ndarray) -> np.ndarray:
        """1 + sum of path valuations per market."""
        return 1.0 + self.market_paths @ v

    def path_demand(self, A: np.ndarray) -> np.ndarray:
        v = self.valuations(A)
        weights = self.market_paths_by_path.T @ (self.demand / self.market_totals(v))
        return v * weights

    def isp_demand(self, A: np.ndarray) -> np.ndarray:
        return self.on_path.T @ self.path_demand(A)

    def profit_parts(self, A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(demand, revenue, demand-dependent cost, demand-independent cost) per ISP."""
        h = cost_transform(A, self.cost_form)
        demand = self.isp_demand(A)
        revenue = demand * self.rho
        demand_cost = demand * ((self.phi * h).sum(axis=1) + self.phi0)
        fixed_cost = (self.gamma * h).sum(axis=1) + self.gamma0
        return demand, revenue, demand_cost, fixed_cost

    def profits(self, A: np.ndarray) -> np.ndarray:
        _, revenue, demand_cost, fixed_cost = self.profit_parts(A)
        return revenue - demand_cost - fixed_cost

    def aggregate_profit_gradient(self, A: np.ndarray) -> np.ndarray:
        """Gradient of the summed ISP profits with respect to every a_nk."""
        h = cost_transform(A, self.cost_form)
        v = self.valuations(A)
        totals = self.market_totals(v)
        margin = self.rho - (self.phi * h).sum(axis=1) - self.phi0
        path_margin = self.on_path @ margin
        weighted = self.market_paths @ (v * path_margin)
        dv = (path_margin * (self.market_paths.T @ (self.demand / totals))
              - self.market_paths.T @ (self.demand * weighted / totals ** 2))
        demand = self.on_path.T @ (v * (self.market_paths.T @ (self.demand / totals)))
        g_slope = valuation_transform_slope(A, self.valuation_form)
        h_slope = cost_transform_slope(A, self.cost_form)
        gradient = np.empty_like(np.asarray(A, dtype=float))
        for k, alpha_k in enumerate(self.alpha):
            gradient[:, k] = ((alpha_k.T @ dv) * g_slope[:, k]
                              - (demand * self.phi[:, k] + self.gamma[:, k]) * h_slope[:, k])
        return gradient

    def objective(self, A: np.ndarray, n: int, k: int) -> IspObjective:
        g = valuation_transform(A, self.valuation_form)
        column = self.alpha[k][:, [n]]
        paths, coeffs = column.indices, column.data
        without = self.valuations(A)
        without[paths] -= coeffs * g[n, k]

        incidence = self.market_paths_by_path[:, paths].tocsr()
        markets = np.unique(incidence.nonzero()[0])
        incidence = incidence[markets]

        h = cost_transform(A[n], self.cost_form)
        other_phi = float(self.phi[n] @ h - self.phi[n, k] * h[k])
        other_gamma = float(self.gamma[n] @ h - self.gamma[n, k] * h[k])
        return IspObjective(
            demand=self.demand[markets],
            beta=np.asarray(incidence @ coeffs, dtype=float),
            unshared=np.asarray(incidence @ without[paths], dtype=float),
            totals=np.asarray(1.0 + self.market_paths[markets] @ without, dtype=float),
            net_revenue=float(self.rho[n] - self.phi0[n] - other_phi),
            phi=float(self.phi[n, k]),
            gamma=float(self.gamma[n, k]),
            fixed_cost=other_gamma + float(self.gamma0[n]),
            valuation_form=self.valuation_form,
            cost_form=self.cost_form,
        )
