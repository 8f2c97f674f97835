import json
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pydantic
from pydantic import BaseModel, ConfigDict, Field, field_validator

from nsx.config import Config
from nsx.models.germ import KINDS, Germ
from nsx.models.mp_types import BigComplex
from nsx.utils.errors import ValidationError

Number = Union[int, float, str]
Pair = Tuple[Number, Number]


class GermSpec(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: str
    branch_points: List[Pair] = Field(min_length=1)
    exponents: Optional[List[Union[Pair, Number]]] = None
    normalization: Union[Pair, Number] = 1

    @field_validator('kind')
    @classmethod
    def known_kind(cls, value):
        if value not in KINDS:
            raise ValueError(f'unknown germ kind {value}; expected one of {", ".join(KINDS)}')
        return value

    def to_germ(self, precision_bits):
        points = [BigComplex.from_pair(p, precision_bits) for p in self.branch_points]
        exponents = None
        if self.exponents is not None:
            exponents = [BigComplex.from_pair(e, precision_bits).value if isinstance(e, tuple) else e
                         for e in self.exponents]
        normalization = self.normalization if isinstance(self.normalization, tuple) else (self.normalization, 0)
        return Germ(self.kind, points, exponents, BigComplex.from_pair(normalization, precision_bits))


class CommandOptions(BaseModel):
    """Knobs of the individual commands; every field has a default."""

    model_config = ConfigDict(extra='forbid')

    tube_width: float = Field(default=Config.TUBE_WIDTH, gt=0)
    grid_radius: float = Field(default=2.0, gt=0)
    grid_count: int = Field(default=16, ge=1)
    grid_center: Pair = (0, 0)
    n_list: Optional[List[int]] = None
    n_min: int = Field(default=1, ge=1)
    boundary_samples: int = Field(default=6, ge=0)
    error_rate_point: Optional[Pair] = None
    exact_moments: bool = True
    seed_roots: Optional[List[Pair]] = None

    @field_validator('n_list')
    @classmethod
    def positive_indices(cls, value):
        if value is not None and any(n < 1 for n in value):
            raise ValueError('n_list entries must be positive')
        return sorted(set(value)) if value is not None else None


class ProblemConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    germ: GermSpec
    n_max: int = Field(ge=0)
    precision_bits: int = Field(default=Config.DEFAULT_PRECISION_BITS, ge=64)
    epsilon: float = Field(default=Config.EPSILON, gt=0, lt=1)
    tolerance: float = Field(default=Config.DEFAULT_TOLERANCE, gt=0)
    output_dir: Optional[str] = None
    options: CommandOptions = Field(default_factory=CommandOptions)

    def indices(self):
        if self.options.n_list is not None:
            return [n for n in self.options.n_list if n <= self.n_max]
        return list(range(self.options.n_min, self.n_max + 1))

    def echo(self):
        return self.model_dump(mode='json')


def _flatten(errors):
    return '; '.join(f"{'.'.join(str(x) for x in e['loc']) or 'config'}: {e['msg']}" for e in errors)


def load_problem_config(path, defaults=None, **overrides):
    """Parse a JSON problem file.

    `defaults` fill keys the file leaves out; `overrides` are the CLI flags that were given.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ValidationError('config file not found', path=str(path))
    except json.JSONDecodeError as e:
        raise ValidationError('config is not valid JSON', path=str(path), line=e.lineno, column=e.colno)
    if not isinstance(data, dict):
        raise ValidationError('config must be a JSON object', path=str(path))
    for key, value in (defaults or {}).items():
        data.setdefault(key, value)
    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return ProblemConfig.model_validate(data)
    except pydantic.ValidationError as e:
        raise ValidationError('invalid problem config', path=str(path), errors=_flatten(e.errors()))
