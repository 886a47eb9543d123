from .field import Box, PointField, Topology, sample_poisson
from .tested_region import TestedRegion

__all__ = ["Box", "PointField", "Topology", "sample_poisson", "TestedRegion"]
