"""
Builders for the canonical theory topologies.

Homogeneous markets, the homogeneous competition pair (isolated markets
versus shared paths), the heterogeneous two-path pair (isolated versus
competing paths) and the general two-ISP market.
"""

from dataclasses import dataclass, replace
from typing import List, Optional

from core.errors import ModelValidationError
from logic.model.network import IspParams, Market, NetworkModel, Path, uniform_path
from logic.model.specs import HomogeneousSpec, PathProfile, TwoIspMarket

SOURCE = "s"
DESTINATION = "t"


@dataclass(frozen=True)
class CompetitionPair:
    """Competition-free and competitive versions of one network."""

    isolated: NetworkModel
    competitive: NetworkModel
    reduced: Optional[NetworkModel] = None


def _homogeneous_isps(spec: HomogeneousSpec) -> List[IspParams]:
    return [
        IspParams(name=f"isp-{q}-{i}", rho=spec.rho, phi0=spec.phi0, phi=(spec.phi1,), gamma=(spec.gamma1,))
        for q in range(spec.Q)
        for i in range(spec.I)
    ]


def _homogeneous_paths(spec: HomogeneousSpec) -> List[Path]:
    return [
        uniform_path(f"r{q}", [q * spec.I + i for i in range(spec.I)], spec.alpha1, spec.alpha0)
        for q in range(spec.Q)
    ]


def build_homogeneous(spec: HomogeneousSpec) -> NetworkModel:
    """One market with Q disjoint paths of I identical ISPs and a single attribute."""
    paths = _homogeneous_paths(spec)
    market = Market(SOURCE, DESTINATION, spec.d, tuple(p.id for p in paths))
    return NetworkModel(
        isps=tuple(_homogeneous_isps(spec)),
        attributes=("quality",),
        paths=tuple(paths),
        markets=(market,),
    )


def build_competition_pair_homogeneous(Q: int, I: int, d_prime: float, params: HomogeneousSpec) -> CompetitionPair:
    """Q isolated markets of demand d' versus Q markets sharing all Q paths.

    The competitive network is equivalent to a single market of demand d'Q,
    exposed as ``reduced``.
    """
    spec = replace(params, Q=Q, I=I, d=d_prime)
    isps = tuple(_homogeneous_isps(spec))
    paths = tuple(_homogeneous_paths(spec))
    isolated = NetworkModel(
        isps=isps,
        attributes=("quality",),
        paths=paths,
        markets=tuple(Market(f"s{q}", f"t{q}", d_prime, (paths[q].id,)) for q in range(Q)),
    )
    # market q lists its own path first
    competitive = isolated.with_markets(
        Market(f"s{q}", f"t{q}", d_prime, tuple(paths[(q + j) % Q].id for j in range(Q))) for q in range(Q)
    )
    reduced = build_homogeneous(replace(spec, d=d_prime * Q))
    return CompetitionPair(isolated=isolated, competitive=competitive, reduced=reduced)


def profile_isp(name: str, profile: PathProfile) -> IspParams:
    """A single ISP whose characteristic ratio equals ``profile.psi`` (alpha = gamma = 1)."""
    return IspParams(name=name, rho=profile.psi ** 2, phi0=0.0, phi=(0.0,), gamma=(1.0,))


def _profile_paths(profile_r: PathProfile, profile_rbar: PathProfile) -> List[Path]:
    return [
        uniform_path("r", [0], 1.0, profile_r.base_valuation),
        uniform_path("rbar", [1], 1.0, profile_rbar.base_valuation),
    ]


def build_two_path_model(profile_r: PathProfile, profile_rbar: PathProfile, d: float) -> NetworkModel:
    """Two disjoint single-ISP paths competing in one market of demand d."""
    paths = _profile_paths(profile_r, profile_rbar)
    return NetworkModel(
        isps=(profile_isp("isp-r", profile_r), profile_isp("isp-rbar", profile_rbar)),
        attributes=("quality",),
        paths=tuple(paths),
        markets=(Market(SOURCE, DESTINATION, d, ("r", "rbar")),),
    )


def build_two_path_pair(profile_r: PathProfile, profile_rbar: PathProfile,
                        d_r: float, d_rbar: float) -> CompetitionPair:
    """Isolated markets (d_r, d_rbar) versus one shared market of demand d_r + d_rbar."""
    if d_r < 0 or d_rbar < 0:
        raise ModelValidationError("demand limits must be non-negative")
    competitive = build_two_path_model(profile_r, profile_rbar, d_r + d_rbar)
    isolated = competitive.with_markets([
        Market("s-r", "t-r", d_r, ("r",)),
        Market("s-rbar", "t-rbar", d_rbar, ("rbar",)),
    ])
    return CompetitionPair(isolated=isolated, competitive=competitive)


def build_two_isp_market(params: TwoIspMarket) -> NetworkModel:
    isps = (
        IspParams(name="isp-1", rho=params.rho1, phi0=params.phi10, phi=(params.phi1,), gamma=(params.gamma1,)),
        IspParams(name="isp-2", rho=params.rho2, phi0=params.phi20, phi=(params.phi2,), gamma=(params.gamma2,)),
    )
    paths = (
        uniform_path("r1", [0], params.alpha1, params.alpha10),
        uniform_path("r2", [1], params.alpha2, params.alpha20),
    )
    return NetworkModel(
        isps=isps,
        attributes=("quality",),
        paths=paths,
        markets=(Market(SOURCE, DESTINATION, params.d, ("r1", "r2")),),
    )
