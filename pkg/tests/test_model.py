"""
Valuations, selection probabilities, demand and profit of the network model.
"""

import numpy as np
import pytest

from core.errors import DomainError, ModelValidationError
from logic.model.evaluation import (
    aggregate_profit,
    aggregate_valuation,
    cheapness_attribute,
    isp_demand,
    nash_product,
    path_demand,
    path_valuation,
    path_valuations,
    profit,
    profit_breakdown,
    profits,
    selection_probability,
)
from logic.model.network import (
    IspParams,
    Market,
    NetworkModel,
    Path,
    ValuationForm,
    check_attribute_matrix,
    single_attribute_isp,
    uniform_path,
)
from logic.model.serialization import load_model, model_from_json, model_to_json, save_model


def _one_isp(paths, markets, rho=1.0, gamma=1.0, phi0=0.0):
    return NetworkModel(
        isps=(single_attribute_isp("isp-0", rho=rho, gamma=gamma, phi0=phi0),),
        attributes=("quality",),
        paths=tuple(paths),
        markets=tuple(markets),
    )


def test_path_valuation_base_only():
    model = _one_isp([uniform_path("r", [0], 1.0, 0.5)], [Market("s", "t", 1.0, ("r",))])
    assert path_valuation(model, model.zeros(), "r") == pytest.approx(0.5)


def test_path_valuation_affine_and_sqrt():
    model = _one_isp([uniform_path("r", [0], 2.0, 1.0)], [Market("s", "t", 1.0, ("r",))])
    assert path_valuation(model, np.array([[3.0]]), "r") == pytest.approx(7.0)

    sqrt_model = model.with_forms(ValuationForm.SQRT_ATTRIBUTE, model.cost_form)
    assert path_valuation(sqrt_model, np.array([[4.0]]), "r") == pytest.approx(5.0)


def test_selection_probability():
    single = _one_isp([uniform_path("r", [0], 1.0)], [Market("s", "t", 1.0, ("r",))])
    assert selection_probability(single, np.array([[1.0]]), 0, "r") == pytest.approx(0.5)

    pair = _one_isp(
        [uniform_path("r1", [0], 1.0), uniform_path("r2", [0], 1.0)],
        [Market("s", "t", 1.0, ("r1", "r2"))],
    )
    A = np.array([[1.0]])
    assert selection_probability(pair, A, 0, "r1") == pytest.approx(1 / 3)
    assert selection_probability(pair, A, 0, "r2") == pytest.approx(1 / 3)


def test_selection_probability_of_worthless_path():
    model = _one_isp(
        [uniform_path("r1", [0], 1.0), uniform_path("r2", [0], 1.0, 3.0)],
        [Market("s", "t", 1.0, ("r1", "r2"))],
    )
    assert selection_probability(model, model.zeros(), 0, "r1") == 0.0


def test_selection_probability_rejects_foreign_path():
    model = _one_isp(
        [uniform_path("r1", [0], 1.0), uniform_path("r2", [0], 1.0)],
        [Market("s", "t", 1.0, ("r1",)), Market("u", "v", 1.0, ("r2",))],
    )
    with pytest.raises(ModelValidationError):
        selection_probability(model, model.zeros(), 0, "r2")


def test_isp_demand_examples():
    A = np.array([[1.0]])
    single = _one_isp([uniform_path("r", [0], 1.0)], [Market("s", "t", 10.0, ("r",))])
    assert isp_demand(single, A, 0) == pytest.approx(5.0)

    disjoint = _one_isp(
        [uniform_path("r1", [0], 1.0), uniform_path("r2", [0], 1.0)],
        [Market("s1", "t1", 10.0, ("r1",)), Market("s2", "t2", 10.0, ("r2",))],
    )
    assert isp_demand(disjoint, A, 0) == pytest.approx(10.0)

    shared = _one_isp(
        [uniform_path("r1", [0], 1.0), uniform_path("r2", [0], 1.0)],
        [Market("s", "t", 9.0, ("r1", "r2"))],
    )
    assert isp_demand(shared, A, 0) == pytest.approx(6.0)
    assert path_demand(shared, A, "r1") == pytest.approx(3.0)


def test_profit_components():
    # D = 20 * 1/2 = 10, margin 0.5 - 0.2, fixed cost 2 * a
    model = _one_isp([uniform_path("r", [0], 1.0)], [Market("s", "t", 20.0, ("r",))],
                     rho=0.5, gamma=2.0, phi0=0.2)
    A = np.array([[1.0]])
    parts = profit_breakdown(model, A, 0)
    assert parts.demand == pytest.approx(10.0)
    assert parts.revenue == pytest.approx(5.0)
    assert parts.demand_cost == pytest.approx(2.0)
    assert parts.fixed_cost == pytest.approx(2.0)
    assert profit(model, A, 0) == pytest.approx(1.0)


def test_monopoly_profit(monopoly):
    A = np.array([[1.0]])
    assert profit(monopoly, A, 0) == pytest.approx(1.0)
    assert profits(monopoly, A)[0] == pytest.approx(1.0)
    assert aggregate_profit(monopoly, A) == pytest.approx(1.0)


def test_profit_without_costs_is_revenue():
    model = _one_isp([uniform_path("r", [0], 1.0)], [Market("s", "t", 10.0, ("r",))], gamma=0.0)
    assert profit(model, np.array([[1.0]]), 0) == pytest.approx(5.0)


def test_aggregate_valuation():
    model = _one_isp(
        [uniform_path("r1", [0], 1.0, 0.5), uniform_path("r2", [0], 1.0, 1.0)],
        [Market("s", "t", 1.0, ("r1", "r2"))],
    )
    assert aggregate_valuation(model, model.zeros()) == pytest.approx(1.5)
    assert path_valuations(model, model.zeros()) == pytest.approx({"r1": 0.5, "r2": 1.0})

    empty = _one_isp([], [])
    assert aggregate_valuation(empty, empty.zeros()) == 0.0


def _two_isp_model(rho_second: float) -> NetworkModel:
    # each ISP alone on a market of demand 8 with a = 1: profit 4 * rho - 1
    return NetworkModel(
        isps=(single_attribute_isp("a", rho=0.75, gamma=1.0),
              single_attribute_isp("b", rho=rho_second, gamma=1.0)),
        attributes=("quality",),
        paths=(uniform_path("r1", [0], 1.0), uniform_path("r2", [1], 1.0)),
        markets=(Market("s1", "t1", 8.0, ("r1",)), Market("s2", "t2", 8.0, ("r2",))),
    )


def test_nash_product():
    A = np.ones((2, 1))
    assert nash_product(_two_isp_model(1.0), A, [0, 1]) == pytest.approx(6.0)
    assert nash_product(_two_isp_model(0.25), A, [0, 1]) == pytest.approx(0.0)
    assert nash_product(_two_isp_model(0.0), A, [0, 1]) == pytest.approx(-2.0)
    with pytest.raises(ModelValidationError):
        nash_product(_two_isp_model(1.0), A, [])


@pytest.mark.parametrize("price,p_max,expected", [(30, 100, 70), (100, 100, 0), (0, 100, 100)])
def test_cheapness_attribute(price, p_max, expected):
    assert cheapness_attribute(price, p_max) == expected


def test_cheapness_attribute_rejects_price_above_max():
    with pytest.raises(DomainError):
        cheapness_attribute(120, 100)


def test_validation_rejects_broken_parameters():
    with pytest.raises(ModelValidationError):
        IspParams(name="x", rho=0.1, phi0=0.2, phi=(0.0,), gamma=(1.0,))
    with pytest.raises(ModelValidationError):
        Path(id="r", isps=(0,), base_valuation=0.0, coeffs=((0.0,),))
    with pytest.raises(ModelValidationError):
        Market("s", "t", -1.0, ("r",))
    with pytest.raises(ModelValidationError):
        _one_isp([uniform_path("r", [3], 1.0)], [Market("s", "t", 1.0, ("r",))])


def test_attribute_matrix_checks(monopoly):
    with pytest.raises(ModelValidationError):
        check_attribute_matrix(monopoly, np.zeros((2, 1)))
    with pytest.raises(ModelValidationError):
        check_attribute_matrix(monopoly, np.array([[-1.0]]))
    with pytest.raises(ModelValidationError):
        check_attribute_matrix(monopoly, np.array([[np.nan]]))


def test_bounds_and_clamp():
    model = NetworkModel(
        isps=(single_attribute_isp("isp-0", rho=1.0, gamma=1.0),),
        attributes=("quality",),
        paths=(uniform_path("r", [0], 1.0),),
        markets=(Market("s", "t", 4.0, ("r",)),),
        lower_bounds=np.array([[0.5]]),
        upper_bounds=np.array([[2.0]]),
    )
    assert model.clamp(np.array([[0.0]]))[0, 0] == 0.5
    assert model.clamp(np.array([[3.0]]))[0, 0] == 2.0
    assert model.clamp_entry(1.0, 0, 0) == 1.0
    with pytest.raises(ModelValidationError):
        NetworkModel(isps=model.isps, attributes=model.attributes, paths=model.paths, markets=model.markets,
                     lower_bounds=np.array([[3.0]]), upper_bounds=np.array([[2.0]]))


def test_json_round_trip(tmp_path, monopoly):
    bounded = NetworkModel(
        isps=monopoly.isps, attributes=monopoly.attributes, paths=monopoly.paths, markets=monopoly.markets,
        lower_bounds=np.array([[0.25]]), upper_bounds=np.array([[np.inf]]),
    )
    text = model_to_json(bounded)
    assert model_to_json(model_from_json(text)) == text

    file_path = tmp_path / "model.json"
    save_model(bounded, str(file_path))
    restored = load_model(str(file_path))
    assert np.isinf(restored.upper_bounds[0, 0])
    assert restored.lower_bounds[0, 0] == 0.25


def test_load_model_errors(tmp_path):
    with pytest.raises(ModelValidationError):
        load_model(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(ModelValidationError):
        load_model(str(broken))
