import pytest
from hypothesis import settings

from distpref.core import GroundSet, PriorityRanking
from distpref.preferences import (
    Bounds,
    TypeAssignment,
    dichotomous_bounds_preference,
    soft_bounds_preference,
)

# first calls may include kernel compilation
settings.register_profile("default", deadline=None)
settings.load_profile("default")


class FloorsCeilings:
    """Five students; s1-s3 of type t', s4-s5 of type t; one school, q = 3,
    needing two to three of type t and at most three of type t'."""

    ground = GroundSet(5)
    tau = TypeAssignment((1, 1, 1, 0, 0), 2, ("t", "t'"))
    bounds = Bounds((2, 0), (3, 3))
    q = 3
    pi = PriorityRanking.identity(5)

    def m(self, *labels):
        return self.ground.mask(labels)

    @property
    def dichotomous(self):
        return dichotomous_bounds_preference(self.tau, self.bounds)

    @property
    def soft(self):
        return soft_bounds_preference(self.tau, self.bounds, self.q)


@pytest.fixture
def fc():
    return FloorsCeilings()
