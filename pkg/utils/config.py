import os
from functools import lru_cache
from pathlib import Path

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

load_dotenv()

ROOT = Path(__file__).parent.parent
PROFILE_YAML = ROOT / "config" / "profiles.yaml"


class SimulationProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 20240101
    workers: int = Field(default=1, ge=1)
    samples: int = Field(default=100_000, ge=1)
    mc_chunk: int = Field(default=8192, ge=1)
    trial_chunk: int = Field(default=8, ge=1)
    progress: bool = False


class LimitsProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    max_cut_nodes: int = 20
    max_state_space: int = 2**24
    lookup_message_bits: int = 16
    lookup_domain_bits: int = 16


class TolerancesProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    pmf_sum: float = 1e-12
    snr_level: float = 1e-12
    lp: float = 1e-9


class RegionsProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    directions: int = Field(default=64, ge=1)


class BcSimProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    failure_threshold: float = Field(default=0.01, gt=0.0, le=1.0)
    min_block_len: int = 64
    payload_grid: tuple[float, ...] = (1.0, 0.95, 0.9, 0.8, 0.5)

    @field_validator("payload_grid")
    @classmethod
    def _descending(cls, grid: tuple[float, ...]) -> tuple[float, ...]:
        if not grid or any(f <= 0 for f in grid):
            raise ValueError("payload_grid needs at least one positive fraction")
        return tuple(sorted(set(grid), reverse=True))


class LoggingProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: str = "warning"


class Profile(BaseModel):
    model_config = ConfigDict(frozen=True)

    simulation: SimulationProfile = SimulationProfile()
    limits: LimitsProfile = LimitsProfile()
    tolerances: TolerancesProfile = TolerancesProfile()
    regions: RegionsProfile = RegionsProfile()
    bc_sim: BcSimProfile = BcSimProfile()
    logging: LoggingProfile = LoggingProfile()


def load_profile(path: Path | str | None = None) -> Profile:
    """Read a profile file; BITLEVEL_PROFILE selects an alternative one."""
    path = Path(path or os.getenv("BITLEVEL_PROFILE") or PROFILE_YAML)
    if not path.exists():
        raise ValueError(f"Profile file not found: {path}")
    data = yaml.safe_load(path.read_text()) or {}
    return Profile.model_validate(data)


@lru_cache(maxsize=1)
def get_profile() -> Profile:
    return load_profile()
