import logging
from itertools import product
from typing import Any, Dict, List

import numpy as np

from errors import ParamsError
from lab_constants import *
from radial_toolkit import (CutoffPowerProfile, GaussianProfile, LinearGaussianProfile,
                            PowerExponentialProfile, PowerGaussianProfile, RadialProfile)

logger = logging.getLogger(__name__)

CORPUS_SIZE = 100


class GaussianFactory:
    _gaussian_data: Dict[str, Dict[str, Any]] = {
        "narrow": {"a": 4.0},
        "standard": {"a": 1.0},
        "wide": {"a": 0.25},
    }

    @classmethod
    def create_gaussian(cls, variant: str = "standard", amplitude: float = 1.0) -> GaussianProfile:
        """Create a Gaussian e^{-a r^2} from a named variant.

        Raises:
            ValueError: If the variant is not recognised.
        """
        if variant not in cls._gaussian_data:
            valid_variants = list(cls._gaussian_data.keys())
            raise ValueError(f"Invalid gaussian variant: {variant}. Valid variants are: {valid_variants}")
        return GaussianProfile(amplitude=amplitude, **cls._gaussian_data[variant])

    @classmethod
    def grid(cls) -> List[GaussianProfile]:
        return [GaussianProfile(a=a) for a in (0.25, 0.5, 1.0, 2.0, 4.0)]


class PowerExponentialFactory:
    _power_exponential_data: Dict[str, Dict[str, Any]] = {
        "flat": {"s": 0.0, "q": 1.0},
        "linear": {"s": 1.0, "q": 1.0},
        "peaked": {"s": 3.0, "q": 0.5},
    }

    @classmethod
    def create_power_exponential(cls, variant: str = "linear", amplitude: float = 1.0) -> PowerExponentialProfile:
        if variant not in cls._power_exponential_data:
            valid_variants = list(cls._power_exponential_data.keys())
            raise ValueError(f"Invalid power_exponential variant: {variant}. Valid variants are: {valid_variants}")
        return PowerExponentialProfile(amplitude=amplitude, **cls._power_exponential_data[variant])

    @classmethod
    def create_sharpness_profile(cls, N: int, p: float, delta: float) -> PowerExponentialProfile:
        """v(r) = r^beta e^{-r/p} with beta = (delta + 2p - N)/p."""
        if delta <= 0:
            raise ParamsError(f"delta > 0 required (got delta={delta})")
        return PowerExponentialProfile(s=(delta + 2.0 * p - N) / p, q=p)

    @classmethod
    def grid(cls) -> List[PowerExponentialProfile]:
        return [PowerExponentialProfile(s=s, q=q)
                for s, q in product((0.0, 0.5, 1.0, 2.0, 3.0, 4.0), (0.5, 1.0, 1.5, 2.0, 3.0))]


class PowerGaussianFactory:
    @classmethod
    def grid(cls) -> List[PowerGaussianProfile]:
        return [PowerGaussianProfile(s=s, a=a)
                for s, a in product((0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0), (0.25, 0.5, 1.0, 2.0, 4.0))]


class CutoffPowerFactory:
    @classmethod
    def create_hardy_optimizer(cls, N: int, p: float, alpha: float, eps: float,
                               r0: float = 1.0, log_width: float = float(np.log(1e3))) -> CutoffPowerProfile:
        """r^{-(N+alpha-2)/p + eps} with a slow log-scale cutoff past r0."""
        if eps <= 0:
            raise ParamsError(f"eps > 0 required (got eps={eps})")
        return CutoffPowerProfile(s=-(N + alpha - 2.0) / p + eps, w=log_width, r0=r0, scale=CUTOFF_LOG)

    @classmethod
    def grid(cls) -> List[CutoffPowerProfile]:
        return [CutoffPowerProfile(s=s, w=w)
                for s, w in product((0.0, 1.0, 2.0, 3.0, 4.0, 6.0), (0.5, 1.0, 2.0, 4.0, 8.0))]


class LinearGaussianFactory:
    @classmethod
    def create_sign_changing(cls, r1: float = 1.0, a: float = 1.0) -> LinearGaussianProfile:
        return LinearGaussianProfile(r1=r1, a=a)


class ProfileFactory:
    _families = {
        FAMILY_GAUSSIAN: GaussianProfile,
        FAMILY_POWER_EXPONENTIAL: PowerExponentialProfile,
        FAMILY_POWER_GAUSSIAN: PowerGaussianProfile,
        FAMILY_CUTOFF_POWER: CutoffPowerProfile,
        FAMILY_LINEAR_GAUSSIAN: LinearGaussianProfile,
    }

    @classmethod
    def from_descriptor(cls, descriptor: str) -> RadialProfile:
        """Parse "family:key=value,..." (e.g. "power_exponential:s=1,q=2").

        The key A sets the amplitude; scale=log selects the log-scale cutoff.

        Raises:
            ParamsError: for unknown families or malformed pairs.
        """
        family, _, body = descriptor.strip().partition(":")
        if family not in cls._families:
            valid_families = list(cls._families.keys())
            raise ParamsError(f"Invalid profile family: {family}. Valid families are: {valid_families}")
        kwargs: Dict[str, Any] = {}
        for pair in filter(None, (item.strip() for item in body.split(","))):
            key, sep, value = pair.partition("=")
            if not sep:
                raise ParamsError(f"Malformed profile parameter: {pair!r}")
            key = key.strip()
            if key == "A":
                kwargs["amplitude"] = float(value)
            elif key == "scale":
                kwargs["scale"] = value.strip()
            else:
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    raise ParamsError(f"Profile parameter {key} is not a number: {value!r}")
        try:
            return cls._families[family](**kwargs)
        except TypeError as e:
            raise ParamsError(f"Invalid parameters for {family}: {e}")


def build_profile_corpus() -> List[RadialProfile]:
    """The fixed 100-profile corpus used by the sweeps."""
    corpus = (GaussianFactory.grid() + PowerExponentialFactory.grid()
              + PowerGaussianFactory.grid() + CutoffPowerFactory.grid())
    assert len(corpus) == CORPUS_SIZE
    logger.debug(f"📦 Built profile corpus with {len(corpus)} profiles")
    return corpus


def random_power_gaussians(count: int, seed: int = 0, s_range=(0.0, 4.0), a_range=(0.25, 4.0)) -> List[PowerGaussianProfile]:
    rng = np.random.default_rng(seed)
    return [PowerGaussianProfile(s=float(s), a=float(a), amplitude=float(amp))
            for s, a, amp in zip(rng.uniform(*s_range, count), rng.uniform(*a_range, count),
                                 rng.uniform(0.5, 2.0, count))]
