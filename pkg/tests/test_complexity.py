import pytest

from cellfree_rlspa.complexity import complexity_table, flops_gdpa, flops_rgdpa, flops_rlspa


def test_default_values():
    assert flops_rlspa(100, 25, 175) == 13_671_875
    assert flops_rgdpa(100, 25, 30) == 7_500_000
    assert flops_gdpa(100, 25, 30) == 5_625_000
    assert flops_rlspa(1, 1, 1) == 2


def test_detailed_adds_lower_order_terms():
    assert flops_rlspa(100, 25, 175, detailed=True) == 175 * (25**3 + 100 * 625 + 2 * 100 * 25 + 25)


def test_linearity():
    assert flops_rlspa(100, 25, 350) == 2 * flops_rlspa(100, 25, 175)
    assert flops_gdpa(200, 25, 30) == 2 * flops_gdpa(100, 25, 30)
    assert flops_rgdpa(100, 25, 30) / flops_gdpa(100, 25, 30) == pytest.approx(4 / 3)


def test_crossover_at_73_iterations():
    assert flops_gdpa(100, 25, 73) == 13_687_500 > flops_rlspa(100, 25, 175)
    assert flops_gdpa(100, 25, 72) < flops_rlspa(100, 25, 175)


@pytest.mark.parametrize("fn", [flops_rgdpa, flops_gdpa])
def test_zero_iterations_rejected(fn):
    with pytest.raises(ValueError):
        fn(100, 25, 0)


def test_monotone_in_every_parameter():
    base = (40, 10, 20)
    for fn in (flops_rlspa, flops_rgdpa, flops_gdpa):
        for i in range(3):
            bigger = list(base)
            bigger[i] += 1
            assert fn(*bigger) > fn(*base)


def test_table_ordering():
    rows = complexity_table((10, 25, 50), N=4, n=25, n_sym=175, iters=30)
    by_m = {}
    for r in rows:
        by_m.setdefault(r.params[0], {})[r.method] = r.flops
    assert sorted(by_m) == [40, 100, 200]
    for v in by_m.values():
        assert v["rgdpa_style"] > v["gdpa_style"]
    assert by_m[100]["rlspa"] > by_m[100]["rgdpa_style"] > by_m[100]["gdpa_style"]
