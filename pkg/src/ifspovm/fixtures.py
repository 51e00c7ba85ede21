"""Named systems used by the configs, tests and benchmarks."""
from .geometry import AffineContraction, IFSystem

# merge radius at which the two branches of the 0.6 system start sharing
# atoms at depths 4..8 (no exact coincidences occur for this slope)
OVERLAP_MERGE_RADIUS = 0.01


def cantor():
    """x/3 and x/3 + 2/3 on [0, 1]."""
    return IFSystem.from_slopes([(1 / 3, 0.0), (1 / 3, 2 / 3)])


def dyadic():
    """x/2 and x/2 + 1/2; the attractor is [0, 1] with Lebesgue measure."""
    return IFSystem.from_slopes([(0.5, 0.0), (0.5, 0.5)])


def overlap():
    """0.6 x and 0.6 x + 0.4: images [0, 0.6] and [0.4, 1] overlap."""
    return IFSystem.from_slopes([(0.6, 0.0), (0.6, 0.4)])


def flipped():
    """A system with a reflection: -x/3 + 1/3 and x/3 + 2/3."""
    return IFSystem.from_slopes([(-1 / 3, 1 / 3), (1 / 3, 2 / 3)])


def sierpinski():
    half = [[0.5, 0.0], [0.0, 0.5]]
    return IFSystem(
        [
            AffineContraction(half, [0.0, 0.0]),
            AffineContraction(half, [0.5, 0.0]),
            AffineContraction(half, [0.25, 0.5]),
        ]
    )


BY_NAME = {
    "cantor": cantor,
    "dyadic": dyadic,
    "overlap": overlap,
    "flipped": flipped,
    "sierpinski": sierpinski,
}
