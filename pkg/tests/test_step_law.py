import math

import pytest

from brwllt import errors, step_law
from brwllt.step_law import WalkClass, classify, lazy_simple_law, moments, validate


def test_simple_walk_valid():
    law = validate(1, 0.0, [[1.0]])
    assert law.d == 1
    assert law.zeta0 == 0.0
    assert law.weights == ((1.0,),)
    assert law.ranges == (1,)


def test_reducible_gcd_two():
    with pytest.raises(errors.Reducible):
        validate(1, 0.0, [[0.0, 1.0]])


def test_lazy_2d_valid():
    law = validate(2, 0.2, [[0.4], [0.4]])
    assert classify(law) is WalkClass.APERIODIC


def test_non_normalized():
    with pytest.raises(errors.NonNormalized):
        validate(1, 0.0, [[0.9]])


def test_negative_weight():
    with pytest.raises(errors.NegativeWeight):
        validate(1, 0.5, [[0.7, -0.2]])


def test_zero_top_weight():
    with pytest.raises(errors.ZeroTopWeight):
        validate(1, 0.5, [[0.5, 0.0]])


def test_degenerate_lazy():
    with pytest.raises(errors.DegenerateLazy):
        validate(1, 1.0, [[0.0]])


def test_renormalization_is_exact():
    # A sum within tolerance but not exactly 1 gets divided out.
    eps = 4e-13
    law = validate(1, 0.0, [[1.0 + eps]])
    assert law.weights[0][0] == 1.0


@pytest.mark.parametrize(
    "zeta0,axes,expected",
    [
        (0.0, [[1.0]], WalkClass.BIPARTITE),
        (1.0 / 3.0, [[2.0 / 3.0]], WalkClass.APERIODIC),
        (0.0, [[0.5, 0.5]], WalkClass.APERIODIC),
        (0.0, [[0.5, 0.0, 0.5]], WalkClass.BIPARTITE),
    ],
)
def test_classify(zeta0, axes, expected):
    assert classify(validate(1, zeta0, axes)) is expected


def test_classify_exclusive_2d():
    # One even-supported axis makes the whole law aperiodic.
    law = validate(2, 0.0, [[0.25, 0.25], [0.5]])
    assert classify(law) is WalkClass.APERIODIC


def test_moments_simple_walk():
    m = moments(validate(1, 0.0, [[1.0]]))
    assert m.gamma2 == (1.0,)
    assert m.gamma4 == (1.0,)
    assert m.gamma6 == (1.0,)
    assert m.det_gamma2 == 1.0


def test_moments_range_three():
    # zeta_{1,1} = zeta_{1,3} = 1/2: (1 + 3^k)/2.
    m = moments(validate(1, 0.0, [[0.5, 0.0, 0.5]]))
    assert m.gamma2 == (5.0,)
    assert m.gamma4 == (41.0,)
    assert m.gamma6 == (365.0,)


def test_moments_lazy():
    m = moments(validate(1, 0.5, [[0.5]]))
    assert m.gamma2 == (0.5,)


def test_moments_direct_summation_agrees():
    law = validate(2, 0.1, [[0.2, 0.3], [0.15, 0.25]])
    m = moments(law)
    for s in range(2):
        for k, g in ((2, m.gamma2), (4, m.gamma4), (6, m.gamma6)):
            direct = sum(w * r**k for r, w in enumerate(law.weights[s], start=1))
            assert abs(g[s] - direct) <= 1e-14
    assert m.det_gamma2 == m.gamma2[0] * m.gamma2[1]


def test_gamma2_leq_gamma4():
    law = validate(2, 0.1, [[0.2, 0.3], [0.15, 0.25]])
    m = moments(law)
    for s in range(2):
        assert m.gamma2[s] <= m.gamma4[s]


def test_atoms_sum_to_one_and_symmetric():
    law = validate(2, 0.1, [[0.2, 0.3], [0.15, 0.25]])
    atoms = dict(law.atoms())
    assert abs(math.fsum(atoms.values()) - 1.0) <= 1e-15
    for point, p in atoms.items():
        neg = tuple(-c for c in point)
        assert atoms[neg] == p
    # mean step is exactly zero by pairing
    for s in range(2):
        assert math.fsum(p * point[s] for point, p in atoms.items()) == 0.0


def test_tiny_weight_warning():
    with pytest.warns(UserWarning):
        law = validate(1, 0.0, [[0.5, 1e-16, 0.5]])
    assert law.weights[0][1] == 0.0


def test_round_trip_dict():
    law = lazy_simple_law(2, 0.25)
    again = step_law.law_from_dict(step_law.law_to_dict(law))
    assert again == law
